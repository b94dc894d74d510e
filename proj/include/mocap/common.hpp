#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mocap {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Error raised by file parsers; carries a human-readable location.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Stable 64-bit FNV-1a, used to derive per-stage seeds from one global seed
/// so every pipeline stage is independently reproducible.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t stage_seed(std::uint64_t global_seed, std::string_view stage) {
  return global_seed ^ fnv1a(stage);
}

inline double clip_prob(double p) {
  const double lo = 1e-12;
  if (p < lo) return lo;
  if (p > 1.0 - lo) return 1.0 - lo;
  return p;
}

}  // namespace mocap
