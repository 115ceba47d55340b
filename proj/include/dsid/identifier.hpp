#pragma once

// Distributed identification with expanding truncations.
//
// Every agent i keeps an estimate theta_i and a truncation counter sigma_i.
// One synchronous round at time k:
//
//   sigma_hat_i = max_{j in N_i(k)} sigma_j
//   theta'_i    = [ sum_j w_ij theta_j I(sigma_j == sigma_hat_i)
//                   + a_k phi_i (1 - 2 z_i) ] * I(sigma_i == sigma_hat_i)
//   theta_i     = theta'_i if |theta'_i| <= M(sigma_hat_i) else 0
//   sigma_i     = sigma_hat_i + I(|theta'_i| > M(sigma_hat_i))
//
// with z_i = I[y_i < phi_i^T theta_i], a_k = 1/k and M(s) = s + offset.

#include "dsid/plant.hpp"
#include "dsid/topology.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace dsid {

struct AgentState {
  Vector theta;
  int sigma = 0;
};

/// tau_agent[(i, m)] = first k with sigma_{i,k} == m; tau[m] = min over agents.
struct TruncationLedger {
  std::map<int, std::uint64_t> tau;
  std::map<std::pair<std::size_t, int>, std::uint64_t> tau_agent;
  int sigma_max = 0;

  void record(std::size_t agent, int sigma, std::uint64_t k);
};

struct NetworkSnapshot {
  std::uint64_t k = 1;
  Matrix theta;              // dim x agents, column i is agent i
  std::vector<int> sigma;
  TruncationLedger ledger;

  std::size_t agent_count() const noexcept { return sigma.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(theta.rows()); }
  AgentState agent(std::size_t i) const;
  Vector mean() const;
};

/// k = 1, sigma = 0 and theta = theta0 (zero when empty) for every agent.
NetworkSnapshot initial_snapshot(std::size_t agents, std::size_t dim, const Vector& theta0 = {});

struct IdentifierOptions {
  /// Truncation bounds M(s) = s + truncation_offset.
  int truncation_offset = 0;
  /// Agent update order within a round; empty means 0..N-1. Results do not
  /// depend on it because every read comes from the pre-step state.
  std::vector<std::size_t> update_order;
};

/// Per-agent detail of the last round, for monitors.
struct StepTrace {
  std::vector<int> sigma_before;
  std::vector<int> sigma_hat;
  std::vector<double> candidate_norm;
  std::vector<std::uint8_t> truncated;
  std::vector<std::uint8_t> observation;  // z_{i,k+1}
};

/// phi * (1 - 2z).
Vector innovation(const Vector& phi, int z);

/// Advances s by one synchronous round, drawing phi and d from the agent streams.
void dsaawet_identification_step_inplace(NetworkSnapshot& s, const WeightMatrix& w,
                                         const SystemModel& model, PlantStreams& streams,
                                         const IdentifierOptions& options = {},
                                         StepTrace* trace = nullptr);

NetworkSnapshot dsaawet_identification_step(const NetworkSnapshot& s, const WeightMatrix& w,
                                            const SystemModel& model, PlantStreams& streams,
                                            const IdentifierOptions& options = {},
                                            StepTrace* trace = nullptr);

// --- generic engine ------------------------------------------------------

struct GenericState {
  std::uint64_t k = 1;
  Matrix x;                  // dim x agents
  std::vector<int> sigma;
};

/// Truncation bound M_s as a function of the counter s.
using BoundSequence = std::function<double(int)>;

/// One round of the general recursion, where neighbors and agents with a
/// lower counter contribute (or restart from) reset_point instead of zero.
/// observations holds O_{i,k+1} as column i.
GenericState generic_dsaawet_step(const GenericState& state, const WeightMatrix& w,
                                  const Matrix& observations, double step_size,
                                  const BoundSequence& bound, const Vector& reset_point);

// --- driver --------------------------------------------------------------

using StepSink = std::function<void(const NetworkSnapshot& after, const StepTrace& trace)>;

/// Runs `steps` rounds; sinks see every completed round.
NetworkSnapshot run(const SystemModel& model, const TopologySchedule& schedule,
                    std::uint64_t steps, NetworkSnapshot init, PlantStreams& streams,
                    std::span<const StepSink> sinks = {}, const IdentifierOptions& options = {});

// --- invariant monitors --------------------------------------------------

/// Watches zero-after-truncation, the bound after non-truncating rounds and
/// the last round in which any counter changed.
class InvariantMonitor {
 public:
  explicit InvariantMonitor(int truncation_offset = 0) : offset_(truncation_offset) {}

  void observe(const NetworkSnapshot& after, const StepTrace& trace);
  StepSink sink();

  std::uint64_t zero_after_truncation_violations() const noexcept { return zero_violations_; }
  std::uint64_t bound_violations() const noexcept { return bound_violations_; }
  std::uint64_t truncation_events() const noexcept { return truncations_; }
  std::uint64_t sigma_increase_events() const noexcept { return sigma_increases_; }
  /// Snapshot index at which some counter last changed (1 if never).
  std::uint64_t last_sigma_change() const noexcept { return last_change_; }

 private:
  int offset_;
  std::uint64_t zero_violations_ = 0;
  std::uint64_t bound_violations_ = 0;
  std::uint64_t truncations_ = 0;
  std::uint64_t sigma_increases_ = 0;
  std::uint64_t last_change_ = 1;
};

struct SpreadReport {
  std::size_t checked = 0;
  std::size_t skipped = 0;   // windows extending past the observed horizon
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// min(tau_{j,m}, tau_{m+1}) <= tau_m + B (N - 1) for every recorded m and
/// agent j; unreached times count as infinite.
SpreadReport check_truncation_spread(const TruncationLedger& ledger, std::size_t agents,
                                     std::size_t window, std::uint64_t final_k);

/// True when all counters are equal at the end and none changed after k0.
bool sigma_settled_since(const NetworkSnapshot& final_state, const InvariantMonitor& monitor,
                         std::uint64_t k0);

}  // namespace dsid
