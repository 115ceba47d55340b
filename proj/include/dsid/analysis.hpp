#pragma once

// The mean field f(theta) = sum_i E[phi_i sgn(y_i - phi_i^T theta)] whose
// unique zero is theta*, its Jacobian, and per-step trajectory metrics.

#include "dsid/identifier.hpp"
#include "dsid/plant.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace dsid {

struct RegressionContext {
  const SystemModel* model = nullptr;
  /// Gauss-Legendre nodes per 1-D piece; 32, 64 and 128 are available.
  std::size_t nodes = 64;
  /// Draws used when the regressor kind has no closed form.
  std::size_t fallback_samples = 200000;
  std::uint64_t fallback_seed = 0;
};

/// True when f and its Jacobian can be evaluated by quadrature.
bool has_closed_form(const RegressionContext& ctx);

/// f(theta). Sparse-uniform regressors reduce every component to a sum of
/// 1-D integrals; other kinds fall back to Monte Carlo with a warning.
Vector regression_function(const RegressionContext& ctx, const Vector& theta);

/// -df/dtheta at theta (positive semidefinite). Closed form for sparse-uniform.
Matrix regression_jacobian(const RegressionContext& ctx, const Vector& theta);

/// sum_i E[phi_i phi_i^T] 2 f_{i,d}(0).
Matrix jacobian_at_root(const RegressionContext& ctx);

struct MonteCarloEstimate {
  Vector mean;
  Vector standard_error;
  std::size_t samples = 0;
};

/// Sample mean of sum_i phi_i sgn(y_i - phi_i^T theta) over fresh draws.
MonteCarloEstimate regression_function_mc(const RegressionContext& ctx, const Vector& theta,
                                          std::size_t samples, Rng& rng);

/// E sum_i |y_i - phi_i^T theta|, the convex objective whose negative
/// gradient is f. Diagnostic only.
MonteCarloEstimate l1_objective_mc(const RegressionContext& ctx, const Vector& theta,
                                   std::size_t samples, Rng& rng);

// --- trajectory metrics ---------------------------------------------------

/// Norm of the stacked deviations theta_i - mean(theta).
double consensus_gap(const NetworkSnapshot& s);
Vector estimation_errors(const NetworkSnapshot& s, const Vector& theta_star);

struct MetricsRow {
  std::uint64_t k = 0;
  int sigma_max = 0;
  double consensus_gap = 0.0;
  double mean_error = 0.0;
  Vector theta_bar;
  Vector agent_errors;  // empty unless requested

  bool operator==(const MetricsRow&) const = default;
};

MetricsRow compute_metrics(const NetworkSnapshot& s, const Vector& theta_star,
                           bool per_agent_errors);

/// Sink that keeps every stride-th row (plus the final one, via finish())
/// and tracks the peak consensus gap over all steps.
class MetricsRecorder {
 public:
  using RowCallback = std::function<void(const MetricsRow&)>;

  MetricsRecorder(Vector theta_star, std::uint64_t stride, bool per_agent_errors,
                  bool keep_rows = true);

  void set_row_callback(RowCallback cb) { on_row_ = std::move(cb); }
  void observe(const NetworkSnapshot& after);
  /// Emits the final snapshot if it has not been emitted yet.
  void finish(const NetworkSnapshot& final_state);
  StepSink sink();

  const std::vector<MetricsRow>& rows() const noexcept { return rows_; }
  double peak_consensus_gap() const noexcept { return peak_gap_; }
  std::uint64_t peak_consensus_gap_k() const noexcept { return peak_gap_k_; }

 private:
  void emit(const NetworkSnapshot& s);

  Vector theta_star_;
  std::uint64_t stride_;
  bool per_agent_;
  bool keep_;
  std::vector<MetricsRow> rows_;
  RowCallback on_row_;
  double peak_gap_ = 0.0;
  std::uint64_t peak_gap_k_ = 0;
  std::uint64_t last_emitted_ = 0;
};

}  // namespace dsid
