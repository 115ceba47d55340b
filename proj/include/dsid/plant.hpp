#pragma once

// Linear plants y = phi^T theta* + d observed through binary sensors.

#include "dsid/common.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace dsid {

enum class NoiseKind { kGaussian, kLaplace, kUniform };

/// Zero-median noise with analytic distribution and density.
class NoiseModel {
 public:
  static NoiseModel gaussian(double variance);
  static NoiseModel laplace(double scale);
  static NoiseModel uniform(double half_width);

  NoiseKind kind() const noexcept { return kind_; }
  double parameter() const noexcept { return param_; }

  double cdf(double x) const;
  double pdf(double x) const;
  double sample(Rng& rng) const;

  /// Points where the density is not smooth (used to split quadratures).
  std::vector<double> kinks() const;
  std::string describe() const;

 private:
  NoiseModel(NoiseKind kind, double param) : kind_(kind), param_(param) {}
  NoiseKind kind_;
  double param_;
};

enum class RegressorKind { kSparseUniform, kDenseUniform, kCustomBounded };

std::string to_string(RegressorKind kind);

class RegressorGenerator {
 public:
  using Custom = std::function<void(std::size_t agent, std::uint64_t k, Rng& rng,
                                    std::span<double> out)>;

  /// phi = eta * e_m with eta ~ U[-bound, bound]. Agent a (0-based) sits on
  /// coordinate a mod dim unless `coordinates` assigns it explicitly.
  static RegressorGenerator sparse_uniform(std::size_t dim, double bound = 1.0,
                                           std::vector<std::size_t> coordinates = {});
  /// Entries iid U[-1, 1] scaled by bound / sqrt(dim).
  static RegressorGenerator dense_uniform(std::size_t dim, double bound = 1.0);
  /// Samples whose norm exceeds bound are projected back onto the ball.
  static RegressorGenerator custom_bounded(std::size_t dim, double bound, Custom custom);

  RegressorKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  double bound() const noexcept { return bound_; }

  /// Support coordinate of a sparse-uniform agent.
  std::size_t coordinate_of(std::size_t agent) const;

  void sample(std::size_t agent, std::uint64_t k, Rng& rng, std::span<double> out) const;
  Vector sample(std::size_t agent, std::uint64_t k, Rng& rng) const;

 private:
  RegressorGenerator(RegressorKind kind, std::size_t dim, double bound)
      : kind_(kind), dim_(dim), bound_(bound) {}

  RegressorKind kind_;
  std::size_t dim_;
  double bound_;
  std::vector<std::size_t> coordinates_;
  Custom custom_;
};

class SystemModel {
 public:
  /// One noise model per agent; all agents share theta*.
  SystemModel(Vector theta_star, RegressorGenerator regressors, std::vector<NoiseModel> noises);

  std::size_t agent_count() const noexcept { return noises_.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(theta_star_.size()); }
  const Vector& theta_star() const noexcept { return theta_star_; }
  const RegressorGenerator& regressors() const noexcept { return regressors_; }
  const NoiseModel& noise(std::size_t agent) const { return noises_.at(agent); }

  /// One-agent model that keeps the given agent's regressor support and noise.
  SystemModel restricted_to(std::size_t agent) const;

 private:
  Vector theta_star_;
  RegressorGenerator regressors_;
  std::vector<NoiseModel> noises_;
};

/// theta*_j = (1 + 0.1 j) sqrt(j), j = 1..dim.
Vector theta_star_formula(std::size_t dim);

/// Per-agent regressor and noise streams.
class PlantStreams {
 public:
  PlantStreams(std::uint64_t seed, std::size_t agents);

  std::size_t size() const noexcept { return regressor_.size(); }
  Rng& regressor(std::size_t agent) { return regressor_.at(agent); }
  Rng& noise(std::size_t agent) { return noise_.at(agent); }

 private:
  std::vector<Rng> regressor_;
  std::vector<Rng> noise_;
};

double output(std::span<const double> phi, std::span<const double> theta_star, double noise);
inline double output(const Vector& phi, const Vector& theta_star, double noise) {
  return output(std::span<const double>(phi.data(), static_cast<std::size_t>(phi.size())),
                std::span<const double>(theta_star.data(),
                                        static_cast<std::size_t>(theta_star.size())),
                noise);
}

/// I[y < c].
inline int binary_observe(double y, double threshold) { return y < threshold ? 1 : 0; }

}  // namespace dsid
