#include "dsid/identifier.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

namespace dsid {

void TruncationLedger::record(std::size_t agent, int sigma, std::uint64_t k) {
  tau_agent.try_emplace({agent, sigma}, k);
  auto [it, inserted] = tau.try_emplace(sigma, k);
  if (!inserted && k < it->second) it->second = k;
  sigma_max = std::max(sigma_max, sigma);
}

AgentState NetworkSnapshot::agent(std::size_t i) const {
  return AgentState{theta.col(static_cast<Eigen::Index>(i)), sigma.at(i)};
}

Vector NetworkSnapshot::mean() const { return theta.rowwise().mean(); }

NetworkSnapshot initial_snapshot(std::size_t agents, std::size_t dim, const Vector& theta0) {
  if (agents == 0 || dim == 0) {
    throw Error(ErrorCode::kInvalidArgument, "snapshot needs agents and a positive dimension");
  }
  NetworkSnapshot s;
  s.k = 1;
  const auto l = static_cast<Eigen::Index>(dim);
  if (theta0.size() == 0) {
    s.theta = Matrix::Zero(l, static_cast<Eigen::Index>(agents));
  } else {
    if (theta0.size() != l) throw Error(ErrorCode::kDimensionMismatch, "initial estimate size");
    s.theta = theta0.replicate(1, static_cast<Eigen::Index>(agents));
  }
  s.sigma.assign(agents, 0);
  for (std::size_t i = 0; i < agents; ++i) s.ledger.record(i, 0, s.k);
  return s;
}

Vector innovation(const Vector& phi, int z) {
  if (z != 0 && z != 1) throw Error(ErrorCode::kInvalidArgument, "binary observation must be 0 or 1");
  return phi * static_cast<double>(1 - 2 * z);
}

namespace {

void check_compatible(const NetworkSnapshot& s, const WeightMatrix& w, const SystemModel& model,
                      const PlantStreams& streams) {
  const std::size_t n = s.agent_count();
  if (n == 0 || static_cast<std::size_t>(s.theta.cols()) != n) {
    throw Error(ErrorCode::kDimensionMismatch, "snapshot estimate/counter counts differ");
  }
  if (w.size() != n) throw Error(ErrorCode::kDimensionMismatch, "weight matrix size != agent count");
  if (model.agent_count() != n) throw Error(ErrorCode::kDimensionMismatch, "model agent count");
  if (model.dim() != s.dim()) throw Error(ErrorCode::kDimensionMismatch, "estimate dimension");
  if (streams.size() < n) throw Error(ErrorCode::kDimensionMismatch, "too few plant streams");
  if (s.k == 0) throw Error(ErrorCode::kInvalidArgument, "step index must be >= 1");
}

std::vector<int> neighbor_max(const std::vector<int>& sigma, const WeightMatrix& w) {
  std::vector<int> hat(sigma.size());
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    int m = sigma[i];
    for (const auto& e : w.row(i)) m = std::max(m, sigma[e.col]);
    hat[i] = m;
  }
  return hat;
}

}  // namespace

void dsaawet_identification_step_inplace(NetworkSnapshot& s, const WeightMatrix& w,
                                         const SystemModel& model, PlantStreams& streams,
                                         const IdentifierOptions& options, StepTrace* trace) {
  check_compatible(s, w, model, streams);
  if (options.truncation_offset < 0) {
    throw Error(ErrorCode::kInvalidArgument, "truncation offset must be >= 0");
  }
  const std::size_t n = s.agent_count();
  const auto l = static_cast<Eigen::Index>(s.dim());
  const double gain = 1.0 / static_cast<double>(s.k);
  const std::vector<int> hat = neighbor_max(s.sigma, w);

  std::vector<std::size_t> order = options.update_order;
  if (order.empty()) {
    order.resize(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
  } else if (order.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "update order must list every agent once");
  }

  if (trace) {
    trace->sigma_before = s.sigma;
    trace->sigma_hat = hat;
    trace->candidate_norm.assign(n, 0.0);
    trace->truncated.assign(n, 0);
    trace->observation.assign(n, 0);
  }

  Matrix next(l, static_cast<Eigen::Index>(n));
  std::vector<int> next_sigma(n);
  Vector phi(l);
  Vector candidate(l);
  const auto& theta_star = model.theta_star();

  for (std::size_t i : order) {
    const auto col = static_cast<Eigen::Index>(i);
    // Draws happen for every agent so stream consumption never depends on state.
    model.regressors().sample(i, s.k, streams.regressor(i),
                              std::span<double>(phi.data(), static_cast<std::size_t>(l)));
    const double d = model.noise(i).sample(streams.noise(i));
    const double y = output(phi, theta_star, d);
    const double threshold = phi.dot(s.theta.col(col));
    const int z = binary_observe(y, threshold);

    candidate.setZero();
    if (s.sigma[i] == hat[i]) {
      for (const auto& e : w.row(i)) {
        if (s.sigma[e.col] == hat[i]) {
          candidate.noalias() += e.weight * s.theta.col(static_cast<Eigen::Index>(e.col));
        }
      }
      candidate.noalias() += gain * (phi * static_cast<double>(1 - 2 * z));
    }

    const double norm = candidate.norm();
    const double bound = static_cast<double>(hat[i] + options.truncation_offset);
    const bool truncate = norm > bound;
    if (truncate) {
      next.col(col).setZero();
      next_sigma[i] = hat[i] + 1;
    } else {
      next.col(col) = candidate;
      next_sigma[i] = hat[i];
    }
    if (trace) {
      trace->candidate_norm[i] = norm;
      trace->truncated[i] = truncate ? 1 : 0;
      trace->observation[i] = static_cast<std::uint8_t>(z);
    }
  }

  s.theta.swap(next);
  ++s.k;
  for (std::size_t i = 0; i < n; ++i) {
    if (next_sigma[i] != s.sigma[i]) s.ledger.record(i, next_sigma[i], s.k);
  }
  s.sigma.swap(next_sigma);
}

NetworkSnapshot dsaawet_identification_step(const NetworkSnapshot& s, const WeightMatrix& w,
                                            const SystemModel& model, PlantStreams& streams,
                                            const IdentifierOptions& options, StepTrace* trace) {
  NetworkSnapshot next = s;
  dsaawet_identification_step_inplace(next, w, model, streams, options, trace);
  return next;
}

GenericState generic_dsaawet_step(const GenericState& state, const WeightMatrix& w,
                                  const Matrix& observations, double step_size,
                                  const BoundSequence& bound, const Vector& reset_point) {
  const std::size_t n = state.sigma.size();
  const Eigen::Index l = state.x.rows();
  if (static_cast<std::size_t>(state.x.cols()) != n || w.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "state/weight agent counts differ");
  }
  if (observations.rows() != l || static_cast<std::size_t>(observations.cols()) != n) {
    throw Error(ErrorCode::kDimensionMismatch, "observation matrix shape");
  }
  if (reset_point.size() != l) throw Error(ErrorCode::kDimensionMismatch, "reset point size");
  if (!(step_size > 0.0)) throw Error(ErrorCode::kInvalidArgument, "step size must be positive");
  if (!bound) throw Error(ErrorCode::kInvalidArgument, "missing truncation bound sequence");

  const std::vector<int> hat = neighbor_max(state.sigma, w);
  GenericState next;
  next.k = state.k + 1;
  next.x.resize(l, static_cast<Eigen::Index>(n));
  next.sigma.resize(n);
  Vector candidate(l);

  for (std::size_t i = 0; i < n; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    if (state.sigma[i] == hat[i]) {
      candidate.setZero();
      for (const auto& e : w.row(i)) {
        if (state.sigma[e.col] == hat[i]) {
          candidate.noalias() += e.weight * state.x.col(static_cast<Eigen::Index>(e.col));
        } else {
          candidate.noalias() += e.weight * reset_point;
        }
      }
      candidate.noalias() += step_size * observations.col(col);
    } else {
      candidate = reset_point;
    }
    const double limit = bound(hat[i]);
    if (candidate.norm() > limit) {
      next.x.col(col) = reset_point;
      next.sigma[i] = hat[i] + 1;
    } else {
      next.x.col(col) = candidate;
      next.sigma[i] = hat[i];
    }
  }
  return next;
}

NetworkSnapshot run(const SystemModel& model, const TopologySchedule& schedule,
                    std::uint64_t steps, NetworkSnapshot init, PlantStreams& streams,
                    std::span<const StepSink> sinks, const IdentifierOptions& options) {
  if (schedule.agent_count() != init.agent_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "schedule agent count differs from snapshot");
  }
  StepTrace trace;
  for (std::uint64_t t = 0; t < steps; ++t) {
    const auto topo = schedule.at(init.k);
    dsaawet_identification_step_inplace(init, topo->weights, model, streams, options,
                                        sinks.empty() ? nullptr : &trace);
    for (const auto& sink : sinks) sink(init, trace);
  }
  return init;
}

// --- monitors -------------------------------------------------------------

void InvariantMonitor::observe(const NetworkSnapshot& after, const StepTrace& trace) {
  bool changed = false;
  for (std::size_t i = 0; i < after.agent_count(); ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    if (after.sigma[i] != trace.sigma_before[i]) changed = true;
    if (after.sigma[i] > trace.sigma_before[i]) {
      ++sigma_increases_;
      if (!(after.theta.col(col).array() == 0.0).all()) ++zero_violations_;
    }
    if (trace.truncated[i]) {
      ++truncations_;
    } else if (after.theta.col(col).norm() > static_cast<double>(trace.sigma_hat[i] + offset_)) {
      ++bound_violations_;
    }
  }
  if (changed) last_change_ = after.k;
}

StepSink InvariantMonitor::sink() {
  return [this](const NetworkSnapshot& after, const StepTrace& trace) { observe(after, trace); };
}

SpreadReport check_truncation_spread(const TruncationLedger& ledger, std::size_t agents,
                                     std::size_t window, std::uint64_t final_k) {
  SpreadReport report;
  const std::uint64_t slack = static_cast<std::uint64_t>(window) * (agents - 1);
  for (const auto& [m, tau_m] : ledger.tau) {
    const std::uint64_t deadline = tau_m + slack;
    const auto next = ledger.tau.find(m + 1);
    bool undecided = false;
    std::vector<std::string> failures;
    for (std::size_t j = 0; j < agents; ++j) {
      std::uint64_t reached = std::numeric_limits<std::uint64_t>::max();
      if (auto it = ledger.tau_agent.find({j, m}); it != ledger.tau_agent.end()) reached = it->second;
      if (next != ledger.tau.end()) reached = std::min(reached, next->second);
      if (reached <= deadline) continue;
      if (deadline > final_k) {
        undecided = true;
      } else {
        failures.push_back("m=" + std::to_string(m) + " agent " + std::to_string(j) +
                           ": min(tau_jm, tau_m+1) exceeds tau_m + B(N-1) = " +
                           std::to_string(deadline));
      }
    }
    if (!failures.empty()) {
      report.violations.insert(report.violations.end(), failures.begin(), failures.end());
      ++report.checked;
    } else if (undecided) {
      ++report.skipped;
    } else {
      ++report.checked;
    }
  }
  return report;
}

bool sigma_settled_since(const NetworkSnapshot& final_state, const InvariantMonitor& monitor,
                         std::uint64_t k0) {
  const auto& s = final_state.sigma;
  const bool equal = std::all_of(s.begin(), s.end(), [&](int v) { return v == s.front(); });
  return equal && monitor.last_sigma_change() <= k0;
}

}  // namespace dsid
