#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace dmawpt {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kMu0 = 4.0e-7 * std::numbers::pi;  // H/m
inline constexpr double kNeperToDb = 8.685889638065036;

// Error hierarchy. Solver outcomes (infeasible, unbounded, iteration cap) are
// reported as statuses, not through these.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ZeroArray : public Error {
 public:
  using Error::Error;
};

class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InfeasibleProblem : public Error {
 public:
  using Error::Error;
};

class EigenFailure : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

inline double wavelength_from_frequency(double frequency_hz) {
  return kSpeedOfLight / frequency_hz;
}

// Wraps an angle into [0, 2π).
double wrap_phase(double phase_rad);

// SplitMix64-style mixing of a base seed with two stream indices.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw. Used instead
// of std::uniform_real_distribution so results are identical across standard
// library implementations.
inline double unit_uniform(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace dmawpt
