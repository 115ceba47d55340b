#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>

namespace dsid {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

enum class ErrorCode {
  kInvalidArgument = 1,
  kDimensionMismatch,
  kConfig,
  kPreflight,
  kIo,
  kNumeric,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Independent RNG streams are keyed by (seed, role, index) so that the draw
// sequence of one agent never depends on how many draws another agent made.
enum class StreamRole : std::uint64_t {
  kRegressor = 1,
  kNoise = 2,
  kGraph = 3,
  kMonteCarlo = 4,
  kCentralized = 5,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline Rng make_stream(std::uint64_t seed, StreamRole role, std::uint64_t index) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(role));
  h = splitmix64(h ^ index);
  return Rng(h);
}

using WarningHandler = std::function<void(const std::string&)>;

/// Routes library warnings; the default handler writes to stderr. Returns the
/// previous handler.
WarningHandler set_warning_handler(WarningHandler handler);
void log_warning(const std::string& message);

// sgn(x) = 1 for x >= 0, -1 otherwise; matches 1 - 2*I[y < c] with x = y - c.
inline double sign_of(double x) { return x >= 0.0 ? 1.0 : -1.0; }

}  // namespace dsid
