#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dmawpt/common.hpp"

namespace dmawpt {

/// Square complex matrix that is Hermitian by construction: the input is
/// replaced by (A + A^H)/2.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const Eigen::MatrixXcd& entries);
  explicit HermitianMatrix(const Eigen::MatrixXd& entries);

  static HermitianMatrix zero(int dimension);
  static HermitianMatrix identity(int dimension);
  /// v v^H
  static HermitianMatrix outer(const Eigen::VectorXcd& v);

  int dimension() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXcd& entries() const { return entries_; }
  bool is_real(double tol = 0.0) const;

  /// Tr(A X) for Hermitian A, X (always real).
  double inner(const HermitianMatrix& other) const;
  double inner(const Eigen::MatrixXcd& other) const;

 private:
  Eigen::MatrixXcd entries_;
};

enum class ConstraintSense { GreaterEqual, LessEqual, Equal };

struct SdpConstraint {
  HermitianMatrix matrix;
  double bound = 0.0;
  ConstraintSense sense = ConstraintSense::GreaterEqual;
};

/// min Tr(C X) s.t. Tr(A_i X) {≥, ≤, =} b_i, [Tr(X) ≤ cap], X ⪰ 0.
struct SdpProblem {
  int dimension = 0;
  HermitianMatrix cost;
  std::vector<SdpConstraint> constraints;
  std::optional<double> trace_cap;

  /// Throws DimensionMismatch if any matrix does not share the cost dimension.
  void validate() const;
};

enum class SdpStatus { Optimal, Infeasible, MaxIterations, Unbounded };

const char* to_string(SdpStatus status);

struct SdpSolution {
  HermitianMatrix matrix;
  double objective = 0.0;
  SdpStatus status = SdpStatus::MaxIterations;
  double primal_residual = 0.0;  // relative, on the equilibrated problem
  double dual_residual = 0.0;    // relative, on the equilibrated problem
  double duality_gap = 0.0;      // absolute, in objective units
  int iterations = 0;
};

struct SdpOptions {
  double tol = 1e-6;
  int max_iters = 50000;
  /// Solve real-valued problems over symmetric matrices instead of Hermitian.
  bool native_real = true;
  /// When set, one JSON object per convergence check is appended to this file.
  std::string trace_path;
};

/// Hermitian A ↦ [[Re A, -Im A], [Im A, Re A]]. Bounds and any trace cap are
/// doubled because Tr(A_R X_R) = 2 Tr(A X); the embedded objective is twice
/// the complex objective.
SdpProblem real_embedding(const SdpProblem& problem);

Eigen::MatrixXd embed_hermitian(const Eigen::MatrixXcd& a);

/// Inverse of the embedding for a (possibly unstructured) real PSD solution:
/// averages the two diagonal blocks and the two off-diagonal blocks, which
/// keeps complex PSD-ness and every embedded trace value.
Eigen::MatrixXcd extract_from_embedding(const Eigen::MatrixXd& x);

/// Frobenius-nearest PSD matrix: clamp negative eigenvalues to zero.
/// Throws EigenFailure on non-finite input.
Eigen::MatrixXd psd_projection(const Eigen::MatrixXd& m);
Eigen::MatrixXcd psd_projection(const Eigen::MatrixXcd& m);

/// First-order operator-splitting solve (ADMM on the PSD cone with slack
/// boxes, adaptive penalty, Ruiz-free row/cost/variable scaling).
SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& options);
SdpSolution solve_sdp(const SdpProblem& problem, double tol = 1e-6, int max_iters = 50000);

/// Eigenvectors scaled by sqrt(eigenvalue), for eigenvalues above
/// rank_tol * λ_max, in descending order, at most max_factors. Each factor's
/// global phase makes its first non-negligible entry real and positive.
std::vector<Eigen::VectorXcd> extract_rank_factors(const Eigen::MatrixXcd& x, int max_factors,
                                                   double rank_tol);
std::vector<Eigen::VectorXcd> extract_rank_factors(const SdpSolution& solution, int max_factors,
                                                   double rank_tol);

/// Rotates v so its first entry with magnitude above 1e-12 * max|v| is real
/// and positive.
void normalize_phase(Eigen::VectorXcd& v);

}  // namespace dmawpt
