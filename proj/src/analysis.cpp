#include "dsid/analysis.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>

namespace dsid {

namespace {

const SystemModel& model_of(const RegressionContext& ctx) {
  if (!ctx.model) throw Error(ErrorCode::kInvalidArgument, "regression context has no model");
  return *ctx.model;
}

void check_theta(const SystemModel& model, const Vector& theta) {
  if (static_cast<std::size_t>(theta.size()) != model.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "theta has wrong dimension");
  }
}

template <class F>
double gauss_legendre(std::size_t nodes, F&& f, double a, double b) {
  namespace q = boost::math::quadrature;
  switch (nodes) {
    case 32: return q::gauss<double, 32>::integrate(f, a, b);
    case 64: return q::gauss<double, 64>::integrate(f, a, b);
    case 128: return q::gauss<double, 128>::integrate(f, a, b);
    default:
      throw Error(ErrorCode::kInvalidArgument,
                  "unsupported Gauss-Legendre node count " + std::to_string(nodes));
  }
}

// Integrates f over [-a, a], split wherever eta * delta hits a kink of the
// noise density (and at 0) so each piece has a smooth integrand.
template <class F>
double piecewise_integral(std::size_t nodes, const NoiseModel& noise, double delta, double a,
                          F&& f) {
  std::vector<double> cuts{-a, 0.0, a};
  if (delta != 0.0) {
    for (double kink : noise.kinks()) {
      const double eta = kink / delta;
      if (eta > -a && eta < a) cuts.push_back(eta);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    total += gauss_legendre(nodes, f, cuts[p], cuts[p + 1]);
  }
  return total;
}

// Estimates E[phi phi^T] per agent by sampling.
Matrix second_moment_mc(const SystemModel& model, std::size_t agent, std::size_t samples,
                        Rng& rng) {
  const auto l = static_cast<Eigen::Index>(model.dim());
  Matrix acc = Matrix::Zero(l, l);
  Vector phi(l);
  for (std::size_t s = 0; s < samples; ++s) {
    model.regressors().sample(agent, s, rng, std::span<double>(phi.data(), model.dim()));
    acc.noalias() += phi * phi.transpose();
  }
  return acc / static_cast<double>(samples);
}

}  // namespace

bool has_closed_form(const RegressionContext& ctx) {
  return model_of(ctx).regressors().kind() == RegressorKind::kSparseUniform;
}

Vector regression_function(const RegressionContext& ctx, const Vector& theta) {
  const SystemModel& model = model_of(ctx);
  check_theta(model, theta);
  if (!has_closed_form(ctx)) {
    log_warning("regression_function: no closed form for " +
                to_string(model.regressors().kind()) + " regressors, using Monte Carlo");
    Rng rng = make_stream(ctx.fallback_seed, StreamRole::kMonteCarlo, 0);
    return regression_function_mc(ctx, theta, ctx.fallback_samples, rng).mean;
  }
  const double a = model.regressors().bound();
  const Vector delta = theta - model.theta_star();
  Vector f = Vector::Zero(theta.size());
  for (std::size_t i = 0; i < model.agent_count(); ++i) {
    const std::size_t m = model.regressors().coordinate_of(i);
    const double dm = delta(static_cast<Eigen::Index>(m));
    const NoiseModel& noise = model.noise(i);
    auto integrand = [&](double eta) {
      return eta / (2.0 * a) * (1.0 - 2.0 * noise.cdf(eta * dm));
    };
    f(static_cast<Eigen::Index>(m)) += piecewise_integral(ctx.nodes, noise, dm, a, integrand);
  }
  return f;
}

Matrix regression_jacobian(const RegressionContext& ctx, const Vector& theta) {
  const SystemModel& model = model_of(ctx);
  check_theta(model, theta);
  if (!has_closed_form(ctx)) {
    throw Error(ErrorCode::kInvalidArgument,
                "regression_jacobian needs sparse-uniform regressors");
  }
  const double a = model.regressors().bound();
  const Vector delta = theta - model.theta_star();
  const auto l = theta.size();
  Matrix j = Matrix::Zero(l, l);
  for (std::size_t i = 0; i < model.agent_count(); ++i) {
    const auto m = static_cast<Eigen::Index>(model.regressors().coordinate_of(i));
    const double dm = delta(m);
    const NoiseModel& noise = model.noise(i);
    auto integrand = [&](double eta) { return eta * eta / a * noise.pdf(eta * dm); };
    j(m, m) += piecewise_integral(ctx.nodes, noise, dm, a, integrand);
  }
  return j;
}

Matrix jacobian_at_root(const RegressionContext& ctx) {
  const SystemModel& model = model_of(ctx);
  const auto l = static_cast<Eigen::Index>(model.dim());
  const auto& gen = model.regressors();
  Matrix j = Matrix::Zero(l, l);
  switch (gen.kind()) {
    case RegressorKind::kSparseUniform: {
      // E[eta^2] = bound^2 / 3 for eta ~ U[-bound, bound].
      const double second = gen.bound() * gen.bound() / 3.0;
      for (std::size_t i = 0; i < model.agent_count(); ++i) {
        const auto m = static_cast<Eigen::Index>(gen.coordinate_of(i));
        j(m, m) += second * 2.0 * model.noise(i).pdf(0.0);
      }
      return j;
    }
    case RegressorKind::kDenseUniform: {
      const double second = gen.bound() * gen.bound() / static_cast<double>(l) / 3.0;
      for (std::size_t i = 0; i < model.agent_count(); ++i) {
        j.diagonal().array() += second * 2.0 * model.noise(i).pdf(0.0);
      }
      return j;
    }
    case RegressorKind::kCustomBounded: {
      log_warning("jacobian_at_root: custom regressors, estimating E[phi phi^T] by Monte Carlo");
      Rng rng = make_stream(ctx.fallback_seed, StreamRole::kMonteCarlo, 1);
      for (std::size_t i = 0; i < model.agent_count(); ++i) {
        j += second_moment_mc(model, i, ctx.fallback_samples, rng) * 2.0 *
             model.noise(i).pdf(0.0);
      }
      return j;
    }
  }
  return j;
}

namespace {

template <class PerSample>
MonteCarloEstimate welford(std::size_t samples, Eigen::Index dim, PerSample&& draw) {
  if (samples == 0) throw Error(ErrorCode::kInvalidArgument, "need at least one sample");
  Vector mean = Vector::Zero(dim);
  Vector m2 = Vector::Zero(dim);
  Vector x(dim);
  for (std::size_t s = 0; s < samples; ++s) {
    draw(s, x);
    const Vector d = x - mean;
    mean += d / static_cast<double>(s + 1);
    m2.array() += d.array() * (x - mean).array();
  }
  MonteCarloEstimate est;
  est.mean = mean;
  est.samples = samples;
  if (samples > 1) {
    est.standard_error =
        (m2 / static_cast<double>(samples - 1) / static_cast<double>(samples)).array().sqrt();
  } else {
    est.standard_error = Vector::Zero(dim);
  }
  return est;
}

}  // namespace

MonteCarloEstimate regression_function_mc(const RegressionContext& ctx, const Vector& theta,
                                          std::size_t samples, Rng& rng) {
  const SystemModel& model = model_of(ctx);
  check_theta(model, theta);
  const auto l = static_cast<Eigen::Index>(model.dim());
  Vector phi(l);
  return welford(samples, l, [&](std::size_t s, Vector& x) {
    x.setZero();
    for (std::size_t i = 0; i < model.agent_count(); ++i) {
      model.regressors().sample(i, s, rng, std::span<double>(phi.data(), model.dim()));
      const double y = output(phi, model.theta_star(), model.noise(i).sample(rng));
      x += phi * sign_of(y - phi.dot(theta));
    }
  });
}

MonteCarloEstimate l1_objective_mc(const RegressionContext& ctx, const Vector& theta,
                                   std::size_t samples, Rng& rng) {
  const SystemModel& model = model_of(ctx);
  check_theta(model, theta);
  Vector phi(static_cast<Eigen::Index>(model.dim()));
  return welford(samples, 1, [&](std::size_t s, Vector& x) {
    x(0) = 0.0;
    for (std::size_t i = 0; i < model.agent_count(); ++i) {
      model.regressors().sample(i, s, rng, std::span<double>(phi.data(), model.dim()));
      const double y = output(phi, model.theta_star(), model.noise(i).sample(rng));
      x(0) += std::abs(y - phi.dot(theta));
    }
  });
}

// --- metrics --------------------------------------------------------------

double consensus_gap(const NetworkSnapshot& s) {
  const Vector mean = s.mean();
  return (s.theta.colwise() - mean).norm();
}

Vector estimation_errors(const NetworkSnapshot& s, const Vector& theta_star) {
  if (static_cast<std::size_t>(theta_star.size()) != s.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "theta* dimension");
  }
  return (s.theta.colwise() - theta_star).colwise().norm().transpose();
}

MetricsRow compute_metrics(const NetworkSnapshot& s, const Vector& theta_star,
                           bool per_agent_errors) {
  MetricsRow row;
  row.k = s.k;
  row.sigma_max = *std::max_element(s.sigma.begin(), s.sigma.end());
  row.theta_bar = s.mean();
  row.consensus_gap = (s.theta.colwise() - row.theta_bar).norm();
  row.mean_error = (row.theta_bar - theta_star).norm();
  if (per_agent_errors) row.agent_errors = estimation_errors(s, theta_star);
  return row;
}

MetricsRecorder::MetricsRecorder(Vector theta_star, std::uint64_t stride, bool per_agent_errors,
                                 bool keep_rows)
    : theta_star_(std::move(theta_star)),
      stride_(stride),
      per_agent_(per_agent_errors),
      keep_(keep_rows) {
  if (stride_ == 0) throw Error(ErrorCode::kInvalidArgument, "metric stride must be >= 1");
}

void MetricsRecorder::emit(const NetworkSnapshot& s) {
  MetricsRow row = compute_metrics(s, theta_star_, per_agent_);
  last_emitted_ = s.k;
  if (on_row_) on_row_(row);
  if (keep_) rows_.push_back(std::move(row));
}

void MetricsRecorder::observe(const NetworkSnapshot& after) {
  const double gap = consensus_gap(after);
  if (gap > peak_gap_) {
    peak_gap_ = gap;
    peak_gap_k_ = after.k;
  }
  if ((after.k - 1) % stride_ == 0) emit(after);
}

void MetricsRecorder::finish(const NetworkSnapshot& final_state) {
  if (final_state.k > 1 && last_emitted_ != final_state.k) emit(final_state);
}

StepSink MetricsRecorder::sink() {
  return [this](const NetworkSnapshot& after, const StepTrace&) { observe(after); };
}

}  // namespace dsid
