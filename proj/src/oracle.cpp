#include "dsid/oracle.hpp"

#include <cmath>

namespace dsid {

CentralizedResult centralized_baseline(const SystemModel& model, std::uint64_t steps,
                                       std::uint64_t seed, std::uint64_t stride,
                                       int truncation_offset) {
  const auto l = static_cast<Eigen::Index>(model.dim());
  PlantStreams streams(seed, model.agent_count());
  CentralizedResult r;
  r.theta = Vector::Zero(l);
  Vector phi(l), pooled(l);
  for (std::uint64_t t = 0; t < steps; ++t) {
    pooled.setZero();
    for (std::size_t i = 0; i < model.agent_count(); ++i) {
      model.regressors().sample(i, r.k, streams.regressor(i),
                                std::span<double>(phi.data(), model.dim()));
      const double y = output(phi, model.theta_star(), model.noise(i).sample(streams.noise(i)));
      pooled += innovation(phi, binary_observe(y, phi.dot(r.theta)));
    }
    Vector candidate = r.theta + pooled / static_cast<double>(r.k);
    if (candidate.norm() > static_cast<double>(r.sigma + truncation_offset)) {
      r.theta.setZero();
      ++r.sigma;
    } else {
      r.theta = std::move(candidate);
    }
    ++r.k;
    if (stride > 0 && (r.k - 1) % stride == 0) r.trajectory.push_back(r.theta);
  }
  return r;
}

RootSolution solve_root(const RegressionContext& ctx, const Vector& theta_init,
                        int max_iterations, double tolerance) {
  if (!has_closed_form(ctx)) {
    throw Error(ErrorCode::kInvalidArgument, "solve_root needs a closed-form regression function");
  }
  RootSolution sol;
  sol.theta = theta_init;
  Vector f = regression_function(ctx, sol.theta);
  sol.residual = f.norm();
  // f saturates far from the root, where the Jacobian is nearly singular and
  // a raw Newton step can throw one coordinate arbitrarily far while |f|
  // still drops through the others. Steps are therefore capped at unit length;
  // letting the cap grow after good steps reopens the same escape.
  constexpr double radius = 1.0;
  while (sol.residual > tolerance && sol.iterations < max_iterations) {
    ++sol.iterations;
    const Matrix jac = regression_jacobian(ctx, sol.theta);  // -df/dtheta
    Vector step = jac.ldlt().solve(f);
    if (!step.allFinite()) step = f;
    if (const double len = step.norm(); len > radius) step *= radius / len;
    double t = 1.0;
    Vector trial = sol.theta + step;
    Vector f_trial = regression_function(ctx, trial);
    for (int halvings = 0; f_trial.norm() >= sol.residual && halvings < 60; ++halvings) {
      t *= 0.5;
      trial = sol.theta + t * step;
      f_trial = regression_function(ctx, trial);
    }
    if (f_trial.norm() >= sol.residual) break;  // no progress possible
    sol.theta = std::move(trial);
    f = std::move(f_trial);
    sol.residual = f.norm();
  }
  sol.converged = sol.residual <= tolerance;
  return sol;
}

Matrix central_difference_jacobian(const std::function<Vector(const Vector&)>& f,
                                   const Vector& theta, double h) {
  const auto l = theta.size();
  Matrix j(l, l);
  for (Eigen::Index c = 0; c < l; ++c) {
    Vector up = theta, down = theta;
    up(c) += h;
    down(c) -= h;
    j.col(c) = (f(up) - f(down)) / (2.0 * h);
  }
  return j;
}

ProbeReport identifiability_probe(const SystemModel& model, std::size_t agent,
                                  std::uint64_t steps, std::uint64_t seed, double threshold) {
  if (model.regressors().kind() != RegressorKind::kSparseUniform) {
    throw Error(ErrorCode::kInvalidArgument, "identifiability probe needs sparse-uniform regressors");
  }
  const SystemModel single = model.restricted_to(agent);
  const auto schedule = TopologySchedule::make_static(make_step(Digraph(1), WeightScheme::kMetropolis));
  PlantStreams streams(seed, 1);
  InvariantMonitor monitor;
  const StepSink sinks[] = {monitor.sink()};
  const NetworkSnapshot final_state =
      run(single, schedule, steps, initial_snapshot(1, model.dim()), streams, sinks);

  ProbeReport report;
  report.agent = agent;
  report.steps = steps;
  report.final_theta = final_state.theta.col(0);
  report.errors = (report.final_theta - model.theta_star()).cwiseAbs();
  report.final_sigma = final_state.sigma.front();
  report.last_sigma_change = monitor.last_sigma_change();
  for (std::size_t m = 0; m < model.dim(); ++m) {
    if (report.errors(static_cast<Eigen::Index>(m)) < threshold) {
      report.identifiable.push_back(m);
    } else {
      report.stalled.push_back(m);
    }
  }
  return report;
}

}  // namespace dsid
