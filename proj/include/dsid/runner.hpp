#pragma once

// Experiment configuration, preflight checks, orchestration and persistence.
//
// Config files are `key = value` lines; `#` starts a comment. Keys:
//
//   n_agents, l, steps, seed, stride
//   theta_star            "formula" or comma-separated values
//   theta_init            comma-separated values (default zeros)
//   topology.mode         static | periodic | regenerated
//   topology.p            edge probability of the Poisson graph
//   topology.weights      metropolis | degree
//   topology.B            connectivity window (default 1, or the period)
//   topology.period       number of graphs in a periodic schedule
//   topology.require_connected   redraw disconnected base graphs (default true)
//   topology.kappa        lower bound on positive weights (default: observed minimum)
//   topology.horizon      steps inspected when validating regenerated schedules
//   noise.kind            gaussian | laplace | uniform
//   noise.sigma2 | noise.b | noise.a
//   regressor.kind        sparse-uniform | dense-uniform
//   regressor.bound
//   truncation.offset     M(s) = s + offset
//   output.dir, output.per_agent_errors

#include "dsid/analysis.hpp"
#include "dsid/identifier.hpp"
#include "dsid/oracle.hpp"
#include "dsid/plant.hpp"
#include "dsid/topology.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dsid {

struct ExperimentConfig {
  std::size_t n_agents = 100;
  std::size_t dim = 8;
  std::optional<Vector> theta_star;  // unset: theta_star_formula(dim)
  std::optional<Vector> theta_init;  // unset: zeros

  struct Topology {
    ScheduleMode mode = ScheduleMode::kStatic;
    double p = 0.06;
    WeightScheme weights = WeightScheme::kMetropolis;
    std::size_t window = 0;  // 0: derived from mode
    std::size_t period = 1;
    bool require_connected = true;
    std::optional<double> kappa;
    std::size_t horizon = 64;
  } topology;

  struct Noise {
    NoiseKind kind = NoiseKind::kGaussian;
    double sigma2 = 0.09;
    double b = 1.0;
    double a = 1.0;
  } noise;

  struct Regressor {
    RegressorKind kind = RegressorKind::kSparseUniform;
    double bound = 1.0;
  } regressor;

  std::uint64_t steps = 1000000;
  std::uint64_t seed = 1;
  std::uint64_t stride = 100;
  int truncation_offset = 0;
  bool per_agent_errors = false;
  std::string out_dir;

  Vector resolved_theta_star() const;
  std::size_t resolved_window() const;
};

/// Parses config text; every problem is reported (with its key) in one Error.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Applies one `key = value` override.
void apply_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// N=100, l=8, Poisson p=6/N static graph, sparse-uniform regressors,
/// N(0, 0.09) noise, a_k = 1/k, M_k = k, 10^6 steps.
ExperimentConfig preset_section_v(std::uint64_t seed);

SystemModel build_model(const ExperimentConfig& cfg);
TopologySchedule build_schedule(const ExperimentConfig& cfg);

struct PreflightReport {
  C4Report c4;
  bool noise_median_ok = false;
  bool coverage_ok = false;
  std::vector<std::string> failures;
  std::vector<std::string> warnings;
  bool passed() const { return failures.empty(); }
};

/// Checks connectivity and weights of the schedule, zero-median noise with a
/// positive density at 0, and that every coordinate is excited by some agent.
PreflightReport preflight(const ExperimentConfig& cfg, const SystemModel& model,
                          const TopologySchedule& schedule);

struct ExperimentResult {
  ExperimentConfig config;
  PreflightReport preflight;
  NetworkSnapshot final_state;
  std::vector<MetricsRow> rows;  // kept only when no output directory is set
  Vector theta_star;
  Vector final_errors;
  double mean_error = 0.0;
  double max_agent_error = 0.0;
  double consensus_gap_final = 0.0;
  double consensus_gap_peak = 0.0;
  std::uint64_t truncation_events = 0;
  std::uint64_t sigma_increase_events = 0;
  std::uint64_t last_sigma_change = 1;
  std::uint64_t zero_after_truncation_violations = 0;
  std::uint64_t bound_violations = 0;
  SpreadReport spread;
  bool sigma_settled_second_half = false;
  double wall_seconds = 0.0;
  std::vector<std::string> warnings;
};

/// Preflight, run, and (when out_dir is set) trajectory.csv + summary.json.
/// Throws Error(kPreflight) listing every failed check.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Independent experiments on worker threads, one per config.
std::vector<ExperimentResult> run_batch(const std::vector<ExperimentConfig>& configs);

// --- persistence ----------------------------------------------------------

void write_trajectory_header(std::ostream& out, std::size_t dim, std::size_t per_agent);
void write_trajectory_row(std::ostream& out, const MetricsRow& row);
std::vector<MetricsRow> read_trajectory_csv(std::istream& in);

std::string summary_json(const ExperimentResult& result);
/// One JSON object on a single line; coordinates are reported 1-based.
std::string probe_json_line(const ProbeReport& report);

struct AnalyzeReport {
  Vector f;
  Vector root_jacobian_eigenvalues;   // of -df/dtheta at theta*
  Vector jacobian_eigenvalues;        // of -df/dtheta at theta (closed form only)
  bool closed_form = false;
};

AnalyzeReport analyze(const ExperimentConfig& cfg, const Vector& theta);
std::string analyze_json(const AnalyzeReport& report);

Vector parse_vector(const std::string& text);

}  // namespace dsid
