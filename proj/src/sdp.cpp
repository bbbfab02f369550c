#include "dmawpt/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace dmawpt {

// ---------------------------------------------------------------------------
// HermitianMatrix

HermitianMatrix::HermitianMatrix(const Eigen::MatrixXcd& entries) {
  if (entries.rows() != entries.cols()) {
    throw DimensionMismatch("Hermitian matrix must be square");
  }
  entries_ = 0.5 * (entries + entries.adjoint());
}

HermitianMatrix::HermitianMatrix(const Eigen::MatrixXd& entries)
    : HermitianMatrix(Eigen::MatrixXcd(entries.cast<cplx>())) {}

HermitianMatrix HermitianMatrix::zero(int dimension) {
  return HermitianMatrix(Eigen::MatrixXcd(Eigen::MatrixXcd::Zero(dimension, dimension)));
}

HermitianMatrix HermitianMatrix::identity(int dimension) {
  return HermitianMatrix(Eigen::MatrixXcd(Eigen::MatrixXcd::Identity(dimension, dimension)));
}

HermitianMatrix HermitianMatrix::outer(const Eigen::VectorXcd& v) {
  return HermitianMatrix(Eigen::MatrixXcd(v * v.adjoint()));
}

bool HermitianMatrix::is_real(double tol) const {
  return entries_.imag().cwiseAbs().maxCoeff() <= tol;
}

double HermitianMatrix::inner(const HermitianMatrix& other) const { return inner(other.entries_); }

double HermitianMatrix::inner(const Eigen::MatrixXcd& other) const {
  // Tr(A X) = sum_ij A_ij X_ji = sum_ij A_ij conj(X_ij) for Hermitian X.
  return (entries_.array() * other.array().conjugate()).sum().real();
}

void SdpProblem::validate() const {
  if (dimension < 1) throw DimensionMismatch("SDP dimension must be positive");
  if (cost.dimension() != dimension) throw DimensionMismatch("cost dimension mismatch");
  for (const auto& c : constraints) {
    if (c.matrix.dimension() != dimension) {
      throw DimensionMismatch("constraint matrix dimension mismatch");
    }
  }
}

const char* to_string(SdpStatus status) {
  switch (status) {
    case SdpStatus::Optimal: return "optimal";
    case SdpStatus::Infeasible: return "infeasible";
    case SdpStatus::MaxIterations: return "max_iterations";
    case SdpStatus::Unbounded: return "unbounded";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Real embedding

Eigen::MatrixXd embed_hermitian(const Eigen::MatrixXcd& a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = a.real();
  out.topRightCorner(n, n) = -a.imag();
  out.bottomLeftCorner(n, n) = a.imag();
  out.bottomRightCorner(n, n) = a.real();
  return out;
}

Eigen::MatrixXcd extract_from_embedding(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows() / 2;
  const Eigen::MatrixXd re = 0.5 * (x.topLeftCorner(n, n) + x.bottomRightCorner(n, n));
  const Eigen::MatrixXd im = 0.5 * (x.bottomLeftCorner(n, n) - x.topRightCorner(n, n));
  Eigen::MatrixXcd out(n, n);
  out.real() = re;
  out.imag() = im;
  return out;
}

SdpProblem real_embedding(const SdpProblem& problem) {
  problem.validate();
  SdpProblem out;
  out.dimension = 2 * problem.dimension;
  out.cost = HermitianMatrix(embed_hermitian(problem.cost.entries()));
  for (const auto& c : problem.constraints) {
    out.constraints.push_back(
        {HermitianMatrix(embed_hermitian(c.matrix.entries())), 2.0 * c.bound, c.sense});
  }
  if (problem.trace_cap) out.trace_cap = 2.0 * *problem.trace_cap;
  return out;
}

// ---------------------------------------------------------------------------
// PSD projection

namespace {

template <typename Mat>
Mat project_psd(const Mat& m) {
  if (!m.allFinite()) throw EigenFailure("PSD projection of a non-finite matrix");
  const Mat sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  if (es.info() != Eigen::Success) throw EigenFailure("eigendecomposition failed");
  const Eigen::VectorXd clamped = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

Eigen::MatrixXd psd_projection(const Eigen::MatrixXd& m) { return project_psd(m); }
Eigen::MatrixXcd psd_projection(const Eigen::MatrixXcd& m) { return project_psd(m); }

// ---------------------------------------------------------------------------
// Rank factors

void normalize_phase(Eigen::VectorXcd& v) {
  const double peak = v.cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) return;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v[i]);
    if (mag > 1e-12 * peak) {
      v *= std::conj(v[i]) / mag;
      v[i] = cplx(mag, 0.0);
      return;
    }
  }
}

std::vector<Eigen::VectorXcd> extract_rank_factors(const Eigen::MatrixXcd& x, int max_factors,
                                                   double rank_tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (x + x.adjoint()));
  if (es.info() != Eigen::Success) throw EigenFailure("eigendecomposition failed");
  const Eigen::VectorXd& values = es.eigenvalues();
  std::vector<Eigen::VectorXcd> factors;
  if (values.size() == 0) return factors;
  const double top = values[values.size() - 1];
  if (!(top > 0.0)) return factors;
  for (Eigen::Index i = values.size() - 1; i >= 0; --i) {
    if (static_cast<int>(factors.size()) >= max_factors) break;
    if (!(values[i] > rank_tol * top)) break;
    Eigen::VectorXcd v = es.eigenvectors().col(i) * std::sqrt(values[i]);
    normalize_phase(v);
    factors.push_back(std::move(v));
  }
  return factors;
}

std::vector<Eigen::VectorXcd> extract_rank_factors(const SdpSolution& solution, int max_factors,
                                                   double rank_tol) {
  return extract_rank_factors(solution.matrix.entries(), max_factors, rank_tol);
}

// ---------------------------------------------------------------------------
// ADMM solver

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kSqrt2 = std::sqrt(2.0);

// Isometric packing of symmetric (real) or Hermitian (complex) matrices into
// R^d so that Tr(A X) = pack(A) . pack(X).
template <typename Scalar>
struct Packing;

template <>
struct Packing<double> {
  using Mat = Eigen::MatrixXd;
  static int length(int n) { return n * (n + 1) / 2; }
  static Eigen::VectorXd pack(const Eigen::MatrixXcd& m) {
    const int n = static_cast<int>(m.rows());
    Eigen::VectorXd v(length(n));
    int k = 0;
    for (int i = 0; i < n; ++i) v[k++] = m(i, i).real();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) v[k++] = kSqrt2 * m(i, j).real();
    return v;
  }
  static void unpack(const Eigen::VectorXd& v, Mat& m) {
    const int n = static_cast<int>(m.rows());
    int k = 0;
    for (int i = 0; i < n; ++i) m(i, i) = v[k++];
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        m(i, j) = m(j, i) = v[k++] / kSqrt2;
      }
  }
  static void pack_into(const Mat& m, Eigen::VectorXd& v) {
    const int n = static_cast<int>(m.rows());
    int k = 0;
    for (int i = 0; i < n; ++i) v[k++] = m(i, i);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) v[k++] = kSqrt2 * m(i, j);
  }
  static Eigen::MatrixXcd to_complex(const Mat& m) { return m.cast<cplx>(); }
};

template <>
struct Packing<cplx> {
  using Mat = Eigen::MatrixXcd;
  static int length(int n) { return n * n; }
  static Eigen::VectorXd pack(const Eigen::MatrixXcd& m) {
    const int n = static_cast<int>(m.rows());
    Eigen::VectorXd v(length(n));
    pack_into(m, v);
    return v;
  }
  static void unpack(const Eigen::VectorXd& v, Mat& m) {
    const int n = static_cast<int>(m.rows());
    int k = 0;
    for (int i = 0; i < n; ++i) m(i, i) = cplx(v[k++], 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const cplx value(v[k] / kSqrt2, v[k + 1] / kSqrt2);
        k += 2;
        m(i, j) = value;
        m(j, i) = std::conj(value);
      }
  }
  static void pack_into(const Mat& m, Eigen::VectorXd& v) {
    const int n = static_cast<int>(m.rows());
    int k = 0;
    for (int i = 0; i < n; ++i) v[k++] = m(i, i).real();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        v[k++] = kSqrt2 * m(i, j).real();
        v[k++] = kSqrt2 * m(i, j).imag();
      }
  }
  static Eigen::MatrixXcd to_complex(const Mat& m) { return m; }
};

// Projection of packed vectors onto the PSD cone, with reusable workspace.
template <typename Scalar>
class ConeProjector {
 public:
  using P = Packing<Scalar>;
  using Mat = typename P::Mat;

  explicit ConeProjector(int n) : n_(n), work_(n, n), solver_(n) {}

  // Projects v in place; returns the smallest eigenvalue before clamping.
  double project(Eigen::VectorXd& v) {
    if (n_ == 1) {
      const double lo = v[0];
      v[0] = std::max(v[0], 0.0);
      return lo;
    }
    P::unpack(v, work_);
    solver_.compute(work_);
    if (solver_.info() != Eigen::Success) throw EigenFailure("eigendecomposition failed");
    const Eigen::VectorXd& lam = solver_.eigenvalues();
    const double lo = lam[0];
    if (lo >= 0.0) return lo;
    const Mat& vecs = solver_.eigenvectors();
    work_.setZero();
    for (int i = 0; i < n_; ++i) {
      if (lam[i] > 0.0) work_.noalias() += lam[i] * vecs.col(i) * vecs.col(i).adjoint();
    }
    P::pack_into(work_, v);
    return lo;
  }

  double min_eigenvalue(const Eigen::VectorXd& v) {
    if (n_ == 1) return v[0];
    P::unpack(v, work_);
    solver_.compute(work_, Eigen::EigenvaluesOnly);
    return solver_.eigenvalues()[0];
  }

  double max_eigenvalue(const Eigen::VectorXd& v) {
    if (n_ == 1) return v[0];
    P::unpack(v, work_);
    solver_.compute(work_, Eigen::EigenvaluesOnly);
    return solver_.eigenvalues()[n_ - 1];
  }

 private:
  int n_;
  Mat work_;
  Eigen::SelfAdjointEigenSolver<Mat> solver_;
};

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

struct RowSet {
  Eigen::MatrixXd a;  // m × d
  Eigen::VectorXd lo, hi;
  std::vector<bool> equality;
};

SdpSolution infeasible_solution(int n) {
  SdpSolution s;
  s.matrix = HermitianMatrix::zero(n);
  s.status = SdpStatus::Infeasible;
  s.objective = kInf;
  return s;
}

template <typename Scalar>
SdpSolution run_admm(const SdpProblem& problem, const SdpOptions& opt) {
  using P = Packing<Scalar>;
  const int n = problem.dimension;
  const int d = P::length(n);

  // Assemble rows and drop structurally empty ones.
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> lo, hi;
  std::vector<bool> eq;
  auto push_row = [&](const Eigen::VectorXd& a, double l, double h, bool is_eq) -> bool {
    const double norm = a.norm();
    if (norm == 0.0) return l <= 0.0 && 0.0 <= h;
    rows.push_back(a / norm);
    lo.push_back(l / norm);
    hi.push_back(h / norm);
    eq.push_back(is_eq);
    return true;
  };
  for (const auto& c : problem.constraints) {
    const Eigen::VectorXd a = P::pack(c.matrix.entries());
    bool ok = true;
    switch (c.sense) {
      case ConstraintSense::GreaterEqual: ok = push_row(a, c.bound, kInf, false); break;
      case ConstraintSense::LessEqual: ok = push_row(a, -kInf, c.bound, false); break;
      case ConstraintSense::Equal: ok = push_row(a, c.bound, c.bound, true); break;
    }
    if (!ok) return infeasible_solution(n);
  }
  if (problem.trace_cap) {
    if (!push_row(P::pack(Eigen::MatrixXcd::Identity(n, n)), -kInf, *problem.trace_cap, false)) {
      return infeasible_solution(n);
    }
  }
  const int m = static_cast<int>(rows.size());

  // Scaling: unit rows, unit cost, variable scale kappa so bounds are O(1).
  double kappa = 0.0;
  for (int i = 0; i < m; ++i) {
    if (std::isfinite(lo[i])) kappa = std::max(kappa, std::abs(lo[i]));
    if (std::isfinite(hi[i])) kappa = std::max(kappa, std::abs(hi[i]));
  }
  if (!(kappa > 0.0)) kappa = 1.0;
  Eigen::MatrixXd A(m, d);
  Eigen::VectorXd l(m), u(m), rho_row(m);
  for (int i = 0; i < m; ++i) {
    A.row(i) = rows[i].transpose();
    l[i] = lo[i] / kappa;
    u[i] = hi[i] / kappa;
  }
  Eigen::VectorXd c = P::pack(problem.cost.entries());
  double cost_scale = c.norm();
  if (cost_scale > 0.0) {
    c /= cost_scale;
  } else {
    cost_scale = 1.0;
  }
  const double obj_scale = cost_scale * kappa;

  const Eigen::MatrixXd AAt = A * A.transpose();
  const double sigma = 1e-6;
  const double alpha = 1.6;
  double rho = 0.1;
  const double eq_factor = 1e3;

  Eigen::LDLT<Eigen::MatrixXd> kkt;
  double shift = sigma + rho;
  auto refactor = [&]() {
    shift = sigma + rho;
    for (int i = 0; i < m; ++i) rho_row[i] = eq[i] ? eq_factor * rho : rho;
    if (m > 0) {
      Eigen::MatrixXd K = AAt;
      for (int i = 0; i < m; ++i) K(i, i) += shift / rho_row[i];
      kkt.compute(K);
    }
  };
  refactor();

  Eigen::VectorXd x = Eigen::VectorXd::Zero(d), zc = Eigen::VectorXd::Zero(d),
                  yc = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd za = Eigen::VectorXd::Zero(m), ya = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd x_prev(d), ya_prev(m), yc_prev(d);
  Eigen::VectorXd rhs(d), xt(d), Axt(m), w(m), wc(d), tmp(d);
  ConeProjector<Scalar> cone(n);

  std::ofstream trace;
  if (!opt.trace_path.empty()) trace.open(opt.trace_path, std::ios::app);

  const double eps = opt.tol;
  const double eps_inf = 1e-5;
  const int check_every = 10;
  int pinf_hits = 0, dinf_hits = 0;
  // Penalty updates are rationed: frequent retuning keeps ADMM from settling.
  const int adapt_every = 100;
  const int max_rho_updates = 20;
  int rho_updates = 0;

  SdpSolution sol;
  sol.status = SdpStatus::MaxIterations;
  double r_prim = kInf, r_dual = kInf, gap = kInf, p_obj = 0.0;

  int iter = 0;
  for (; iter < opt.max_iters; ++iter) {
    const bool check = (iter + 1) % check_every == 0 || iter + 1 == opt.max_iters;
    if (check) {
      x_prev = x;
      ya_prev = ya;
      yc_prev = yc;
    }

    rhs = sigma * x - c + rho * zc - yc;
    if (m > 0) rhs.noalias() += A.transpose() * (rho_row.cwiseProduct(za) - ya);
    if (m > 0) {
      const Eigen::VectorXd t = kkt.solve(A * rhs);
      xt = (rhs - A.transpose() * t) / shift;
      Axt.noalias() = A * xt;
    } else {
      xt = rhs / shift;
    }

    x = alpha * xt + (1.0 - alpha) * x;
    if (m > 0) {
      w = alpha * Axt + (1.0 - alpha) * za;
      Eigen::VectorXd v = w + ya.cwiseQuotient(rho_row);
      const Eigen::VectorXd za_new = v.cwiseMax(l).cwiseMin(u);
      ya += rho_row.cwiseProduct(w - za_new);
      za = za_new;
    }
    wc = alpha * xt + (1.0 - alpha) * zc;
    tmp = wc + yc / rho;
    cone.project(tmp);
    yc += rho * (wc - tmp);
    zc = tmp;

    if (!check) continue;

    // Residuals on the scaled problem.
    const Eigen::VectorXd Ax = m > 0 ? Eigen::VectorXd(A * x) : Eigen::VectorXd();
    const Eigen::VectorXd Aty = m > 0 ? Eigen::VectorXd(A.transpose() * ya)
                                      : Eigen::VectorXd(Eigen::VectorXd::Zero(d));
    r_prim = std::max(m > 0 ? inf_norm(Ax - za) : 0.0, inf_norm(x - zc));
    r_dual = inf_norm(c + Aty + yc);
    p_obj = c.dot(zc);
    double d_obj = 0.0;
    for (int i = 0; i < m; ++i) {
      // A multiplier of the wrong sign against an infinite bound is residual
      // noise; it is already charged to the dual residual.
      if (ya[i] > 0.0 && std::isfinite(u[i])) d_obj -= u[i] * ya[i];
      if (ya[i] < 0.0 && std::isfinite(l[i])) d_obj -= l[i] * ya[i];
    }
    gap = std::abs(p_obj - d_obj);
    const double prim_scale =
        std::max({m > 0 ? inf_norm(Ax) : 0.0, inf_norm(za), inf_norm(x), inf_norm(zc)});
    const double dual_scale = std::max({inf_norm(Aty), inf_norm(yc), inf_norm(c)});

    if (trace.is_open()) {
      trace << "{\"iter\":" << iter + 1 << ",\"primal_residual\":" << r_prim
            << ",\"dual_residual\":" << r_dual << ",\"gap\":" << gap << ",\"rho\":" << rho
            << ",\"objective\":" << p_obj * obj_scale << "}\n";
    }

    if (r_prim <= eps * (1.0 + prim_scale) && r_dual <= eps * (1.0 + dual_scale) &&
        gap <= eps * (1.0 + std::max(std::abs(p_obj), std::abs(d_obj)))) {
      sol.status = SdpStatus::Optimal;
      ++iter;
      break;
    }

    // Primal infeasibility certificate from the dual iterate difference.
    if (iter > 50) {
      const Eigen::VectorXd dya = ya - ya_prev;
      const Eigen::VectorXd dyc = yc - yc_prev;
      const double ndy = std::max(inf_norm(dya), inf_norm(dyc));
      bool pinf = false;
      if (ndy > 1e-12) {
        const Eigen::VectorXd r = (m > 0 ? Eigen::VectorXd(A.transpose() * dya)
                                         : Eigen::VectorXd(Eigen::VectorXd::Zero(d))) +
                                  dyc;
        if (inf_norm(r) <= eps_inf * ndy && cone.max_eigenvalue(dyc) <= eps_inf * ndy) {
          double support = 0.0;
          bool finite = true;
          for (int i = 0; i < m && finite; ++i) {
            if (dya[i] > eps_inf * ndy) {
              if (std::isinf(u[i])) finite = false;
              else support += u[i] * dya[i];
            } else if (dya[i] < -eps_inf * ndy) {
              if (std::isinf(l[i])) finite = false;
              else support += l[i] * dya[i];
            }
          }
          pinf = finite && support < -eps_inf * ndy;
        }
      }
      pinf_hits = pinf ? pinf_hits + 1 : 0;
      if (pinf_hits >= 2) {
        sol.status = SdpStatus::Infeasible;
        ++iter;
        break;
      }

      // Dual infeasibility (unbounded primal) from the primal difference.
      const Eigen::VectorXd dx = x - x_prev;
      const double ndx = inf_norm(dx);
      bool dinf = false;
      if (ndx > 1e-12 && c.dot(dx) < -eps_inf * ndx) {
        dinf = cone.min_eigenvalue(dx) >= -eps_inf * ndx;
        if (dinf && m > 0) {
          const Eigen::VectorXd Adx = A * dx;
          for (int i = 0; i < m && dinf; ++i) {
            if (std::isfinite(u[i]) && Adx[i] > eps_inf * ndx) dinf = false;
            if (std::isfinite(l[i]) && Adx[i] < -eps_inf * ndx) dinf = false;
          }
        }
      }
      dinf_hits = dinf ? dinf_hits + 1 : 0;
      if (dinf_hits >= 2) {
        sol.status = SdpStatus::Unbounded;
        ++iter;
        break;
      }
    }

    // Adaptive penalty.
    const double prim_rel = r_prim / std::max(prim_scale, 1e-30);
    const double dual_rel = r_dual / std::max(dual_scale, 1e-30);
    if ((iter + 1) % adapt_every == 0 && rho_updates < max_rho_updates &&
        prim_rel > 0.0 && dual_rel > 0.0) {
      const double rho_new = std::clamp(rho * std::sqrt(prim_rel / dual_rel), 1e-6, 1e6);
      if (rho_new > 5.0 * rho || rho_new < 0.2 * rho) {
        rho = rho_new;
        ++rho_updates;
        refactor();
      }
    }
  }

  typename P::Mat xm(n, n);
  P::unpack(zc, xm);
  sol.matrix = HermitianMatrix(Eigen::MatrixXcd(P::to_complex(xm) * kappa));
  sol.objective = problem.cost.inner(sol.matrix);
  sol.primal_residual = r_prim;
  sol.dual_residual = r_dual;
  sol.duality_gap = gap * obj_scale;
  sol.iterations = iter;
  if (sol.status == SdpStatus::Infeasible) sol.objective = kInf;
  if (sol.status == SdpStatus::Unbounded) sol.objective = -kInf;
  return sol;
}

bool problem_is_real(const SdpProblem& p) {
  if (!p.cost.is_real()) return false;
  return std::all_of(p.constraints.begin(), p.constraints.end(),
                     [](const SdpConstraint& c) { return c.matrix.is_real(); });
}

}  // namespace

SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& options) {
  problem.validate();
  if (options.native_real && problem_is_real(problem)) return run_admm<double>(problem, options);
  return run_admm<cplx>(problem, options);
}

SdpSolution solve_sdp(const SdpProblem& problem, double tol, int max_iters) {
  SdpOptions options;
  options.tol = tol;
  options.max_iters = max_iters;
  return solve_sdp(problem, options);
}

}  // namespace dmawpt
