#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace unirep {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Exit-code classes used by the CLI: ConfigError -> 1, DataError -> 2,
// NumericError -> 3.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// FNV-1a, the hash used for feature hashing and file fingerprints.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Round a double to the nearest float32-representable value. Model
// parameters are kept at this resolution so checkpoints (float32 arrays)
// round-trip without loss, while all arithmetic runs in double.
inline double snap_f32(double x) { return static_cast<double>(static_cast<float>(x)); }

}  // namespace unirep
