#pragma once

// Independent baselines used to check the distributed estimator.

#include "dsid/analysis.hpp"
#include "dsid/plant.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace dsid {

struct CentralizedResult {
  Vector theta;
  int sigma = 0;
  std::uint64_t k = 1;
  std::vector<Vector> trajectory;  // every stride-th estimate, when stride > 0
};

/// Single estimator driven by the pooled innovations of every agent:
/// theta <- theta + (1/k) sum_i phi_i (1 - 2 z_i), truncated at M(sigma) = sigma + offset.
/// Uses the same per-agent streams as a distributed run with the same seed.
CentralizedResult centralized_baseline(const SystemModel& model, std::uint64_t steps,
                                       std::uint64_t seed, std::uint64_t stride = 0,
                                       int truncation_offset = 0);

struct RootSolution {
  Vector theta;
  double residual = 0.0;   // |f(theta)|
  int iterations = 0;
  bool converged = false;
};

/// Damped Newton on f with the closed-form Jacobian: steps capped by a trust
/// radius of one, full step first, halved while |f| does not decrease.
RootSolution solve_root(const RegressionContext& ctx, const Vector& theta_init,
                        int max_iterations = 200, double tolerance = 1e-10);

/// Plain Jacobian df/dtheta by central differences.
Matrix central_difference_jacobian(const std::function<Vector(const Vector&)>& f,
                                   const Vector& theta, double h = 1e-4);

struct ProbeReport {
  std::size_t agent = 0;                          // 0-based
  std::vector<std::size_t> identifiable;          // 0-based coordinates
  std::vector<std::size_t> stalled;
  Vector final_theta;
  Vector errors;                                  // |theta_m - theta*_m|
  std::uint64_t steps = 0;
  int final_sigma = 0;
  std::uint64_t last_sigma_change = 1;
};

/// Runs one agent alone (W = [1]) on its own data and classifies each
/// coordinate by whether its final error is below `threshold`.
ProbeReport identifiability_probe(const SystemModel& model, std::size_t agent,
                                  std::uint64_t steps, std::uint64_t seed,
                                  double threshold = 0.1);

}  // namespace dsid
