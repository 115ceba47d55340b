#include "dsid/plant.hpp"

#include <cmath>
#include <numbers>

namespace dsid {

// --- NoiseModel -----------------------------------------------------------

NoiseModel NoiseModel::gaussian(double variance) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw Error(ErrorCode::kInvalidArgument, "gaussian noise variance must be positive");
  }
  return NoiseModel(NoiseKind::kGaussian, variance);
}

NoiseModel NoiseModel::laplace(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorCode::kInvalidArgument, "laplace noise scale must be positive");
  }
  return NoiseModel(NoiseKind::kLaplace, scale);
}

NoiseModel NoiseModel::uniform(double half_width) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw Error(ErrorCode::kInvalidArgument, "uniform noise half-width must be positive");
  }
  return NoiseModel(NoiseKind::kUniform, half_width);
}

double NoiseModel::cdf(double x) const {
  switch (kind_) {
    case NoiseKind::kGaussian:
      return 0.5 * std::erfc(-x / std::sqrt(2.0 * param_));
    case NoiseKind::kLaplace:
      return x < 0.0 ? 0.5 * std::exp(x / param_) : 1.0 - 0.5 * std::exp(-x / param_);
    case NoiseKind::kUniform:
      if (x <= -param_) return 0.0;
      if (x >= param_) return 1.0;
      return 0.5 + x / (2.0 * param_);
  }
  return 0.0;
}

double NoiseModel::pdf(double x) const {
  switch (kind_) {
    case NoiseKind::kGaussian:
      return std::exp(-x * x / (2.0 * param_)) / std::sqrt(2.0 * std::numbers::pi * param_);
    case NoiseKind::kLaplace:
      return std::exp(-std::abs(x) / param_) / (2.0 * param_);
    case NoiseKind::kUniform:
      return std::abs(x) < param_ ? 1.0 / (2.0 * param_) : 0.0;
  }
  return 0.0;
}

double NoiseModel::sample(Rng& rng) const {
  switch (kind_) {
    case NoiseKind::kGaussian:
      return std::normal_distribution<double>(0.0, std::sqrt(param_))(rng);
    case NoiseKind::kLaplace: {
      const double magnitude = std::exponential_distribution<double>(1.0 / param_)(rng);
      return std::bernoulli_distribution(0.5)(rng) ? magnitude : -magnitude;
    }
    case NoiseKind::kUniform:
      return std::uniform_real_distribution<double>(-param_, param_)(rng);
  }
  return 0.0;
}

std::vector<double> NoiseModel::kinks() const {
  switch (kind_) {
    case NoiseKind::kGaussian: return {};
    case NoiseKind::kLaplace: return {0.0};
    case NoiseKind::kUniform: return {-param_, param_};
  }
  return {};
}

std::string NoiseModel::describe() const {
  switch (kind_) {
    case NoiseKind::kGaussian: return "gaussian(sigma2=" + std::to_string(param_) + ")";
    case NoiseKind::kLaplace: return "laplace(b=" + std::to_string(param_) + ")";
    case NoiseKind::kUniform: return "uniform(a=" + std::to_string(param_) + ")";
  }
  return "?";
}

// --- RegressorGenerator ---------------------------------------------------

std::string to_string(RegressorKind kind) {
  switch (kind) {
    case RegressorKind::kSparseUniform: return "sparse-uniform";
    case RegressorKind::kDenseUniform: return "dense-uniform";
    case RegressorKind::kCustomBounded: return "custom-bounded";
  }
  return "?";
}

namespace {
void check_dim_bound(std::size_t dim, double bound) {
  if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "regressor dimension must be positive");
  if (!(bound > 0.0) || !std::isfinite(bound)) {
    throw Error(ErrorCode::kInvalidArgument, "regressor bound must be positive");
  }
}
}  // namespace

RegressorGenerator RegressorGenerator::sparse_uniform(std::size_t dim, double bound,
                                                      std::vector<std::size_t> coordinates) {
  check_dim_bound(dim, bound);
  for (std::size_t c : coordinates) {
    if (c >= dim) throw Error(ErrorCode::kInvalidArgument, "coordinate assignment out of range");
  }
  RegressorGenerator g(RegressorKind::kSparseUniform, dim, bound);
  g.coordinates_ = std::move(coordinates);
  return g;
}

RegressorGenerator RegressorGenerator::dense_uniform(std::size_t dim, double bound) {
  check_dim_bound(dim, bound);
  return RegressorGenerator(RegressorKind::kDenseUniform, dim, bound);
}

RegressorGenerator RegressorGenerator::custom_bounded(std::size_t dim, double bound,
                                                      Custom custom) {
  check_dim_bound(dim, bound);
  if (!custom) throw Error(ErrorCode::kInvalidArgument, "custom regressor callback is empty");
  RegressorGenerator g(RegressorKind::kCustomBounded, dim, bound);
  g.custom_ = std::move(custom);
  return g;
}

std::size_t RegressorGenerator::coordinate_of(std::size_t agent) const {
  if (kind_ != RegressorKind::kSparseUniform) {
    throw Error(ErrorCode::kInvalidArgument, "coordinate_of needs a sparse-uniform generator");
  }
  if (!coordinates_.empty()) return coordinates_.at(agent);
  return agent % dim_;
}

void RegressorGenerator::sample(std::size_t agent, std::uint64_t k, Rng& rng,
                                std::span<double> out) const {
  if (out.size() != dim_) throw Error(ErrorCode::kDimensionMismatch, "regressor buffer size");
  switch (kind_) {
    case RegressorKind::kSparseUniform: {
      std::fill(out.begin(), out.end(), 0.0);
      out[coordinate_of(agent)] = std::uniform_real_distribution<double>(-bound_, bound_)(rng);
      return;
    }
    case RegressorKind::kDenseUniform: {
      const double scale = bound_ / std::sqrt(static_cast<double>(dim_));
      std::uniform_real_distribution<double> unit(-1.0, 1.0);
      for (double& v : out) v = scale * unit(rng);
      return;
    }
    case RegressorKind::kCustomBounded: {
      custom_(agent, k, rng, out);
      double norm2 = 0.0;
      for (double v : out) norm2 += v * v;
      const double norm = std::sqrt(norm2);
      if (norm > bound_) {
        for (double& v : out) v *= bound_ / norm;
      }
      return;
    }
  }
}

Vector RegressorGenerator::sample(std::size_t agent, std::uint64_t k, Rng& rng) const {
  Vector v(static_cast<Eigen::Index>(dim_));
  sample(agent, k, rng, std::span<double>(v.data(), dim_));
  return v;
}

// --- SystemModel ----------------------------------------------------------

SystemModel::SystemModel(Vector theta_star, RegressorGenerator regressors,
                         std::vector<NoiseModel> noises)
    : theta_star_(std::move(theta_star)),
      regressors_(std::move(regressors)),
      noises_(std::move(noises)) {
  if (noises_.empty()) throw Error(ErrorCode::kInvalidArgument, "model needs at least one agent");
  if (dim() != regressors_.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "theta* and regressor dimensions differ");
  }
}

SystemModel SystemModel::restricted_to(std::size_t agent) const {
  if (agent >= agent_count()) throw Error(ErrorCode::kInvalidArgument, "agent out of range");
  RegressorGenerator gen = regressors_;
  if (gen.kind() == RegressorKind::kSparseUniform) {
    gen = RegressorGenerator::sparse_uniform(dim(), gen.bound(), {regressors_.coordinate_of(agent)});
  }
  return SystemModel(theta_star_, std::move(gen), {noises_[agent]});
}

Vector theta_star_formula(std::size_t dim) {
  Vector t(static_cast<Eigen::Index>(dim));
  for (std::size_t j = 1; j <= dim; ++j) {
    const double jd = static_cast<double>(j);
    t(static_cast<Eigen::Index>(j - 1)) = (1.0 + 0.1 * jd) * std::sqrt(jd);
  }
  return t;
}

// --- streams / observation ------------------------------------------------

PlantStreams::PlantStreams(std::uint64_t seed, std::size_t agents) {
  regressor_.reserve(agents);
  noise_.reserve(agents);
  for (std::size_t i = 0; i < agents; ++i) {
    regressor_.push_back(make_stream(seed, StreamRole::kRegressor, i));
    noise_.push_back(make_stream(seed, StreamRole::kNoise, i));
  }
}

double output(std::span<const double> phi, std::span<const double> theta_star, double noise) {
  if (phi.size() != theta_star.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "regressor and parameter dimensions differ");
  }
  double y = 0.0;
  for (std::size_t j = 0; j < phi.size(); ++j) y += phi[j] * theta_star[j];
  return y + noise;
}

}  // namespace dsid
