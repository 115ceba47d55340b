#include "dsid/runner.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

namespace dsid {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::kConfig, "expected a finite number, got '" + t + "'");
  }
  return v;
}

template <class Int>
Int parse_integer(const std::string& text) {
  const std::string t = trim(text);
  Int v{};
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw Error(ErrorCode::kConfig, "expected an integer, got '" + t + "'");
  }
  return v;
}

bool parse_bool(const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw Error(ErrorCode::kConfig, "expected true/false, got '" + t + "'");
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

json vector_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

}  // namespace

Vector parse_vector(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) values.push_back(parse_double(item));
  if (values.empty()) throw Error(ErrorCode::kConfig, "empty vector");
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

// --- config ---------------------------------------------------------------

Vector ExperimentConfig::resolved_theta_star() const {
  return theta_star ? *theta_star : theta_star_formula(dim);
}

std::size_t ExperimentConfig::resolved_window() const {
  if (topology.window > 0) return topology.window;
  return topology.mode == ScheduleMode::kPeriodic ? topology.period : 1;
}

void apply_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  auto& t = cfg.topology;
  if (key == "n_agents") cfg.n_agents = parse_integer<std::size_t>(value);
  else if (key == "l") cfg.dim = parse_integer<std::size_t>(value);
  else if (key == "steps") cfg.steps = parse_integer<std::uint64_t>(value);
  else if (key == "seed") cfg.seed = parse_integer<std::uint64_t>(value);
  else if (key == "stride") cfg.stride = parse_integer<std::uint64_t>(value);
  else if (key == "theta_star") {
    if (value == "formula") cfg.theta_star.reset();
    else cfg.theta_star = parse_vector(value);
  } else if (key == "theta_init") cfg.theta_init = parse_vector(value);
  else if (key == "topology.mode") t.mode = schedule_mode_from_string(value);
  else if (key == "topology.p") t.p = parse_double(value);
  else if (key == "topology.weights") {
    if (value == "metropolis") t.weights = WeightScheme::kMetropolis;
    else if (value == "degree" || value == "paper") t.weights = WeightScheme::kDegree;
    else throw Error(ErrorCode::kConfig, "expected metropolis or degree, got '" + value + "'");
  } else if (key == "topology.B") t.window = parse_integer<std::size_t>(value);
  else if (key == "topology.period") t.period = parse_integer<std::size_t>(value);
  else if (key == "topology.require_connected") t.require_connected = parse_bool(value);
  else if (key == "topology.kappa") t.kappa = parse_double(value);
  else if (key == "topology.horizon") t.horizon = parse_integer<std::size_t>(value);
  else if (key == "noise.kind") {
    if (value == "gaussian") cfg.noise.kind = NoiseKind::kGaussian;
    else if (value == "laplace") cfg.noise.kind = NoiseKind::kLaplace;
    else if (value == "uniform") cfg.noise.kind = NoiseKind::kUniform;
    else throw Error(ErrorCode::kConfig, "unknown noise kind '" + value + "'");
  } else if (key == "noise.sigma2") cfg.noise.sigma2 = parse_double(value);
  else if (key == "noise.b") cfg.noise.b = parse_double(value);
  else if (key == "noise.a") cfg.noise.a = parse_double(value);
  else if (key == "regressor.kind") {
    if (value == "sparse-uniform") cfg.regressor.kind = RegressorKind::kSparseUniform;
    else if (value == "dense-uniform") cfg.regressor.kind = RegressorKind::kDenseUniform;
    else throw Error(ErrorCode::kConfig, "unknown regressor kind '" + value + "'");
  } else if (key == "regressor.bound") cfg.regressor.bound = parse_double(value);
  else if (key == "truncation.offset") cfg.truncation_offset = parse_integer<int>(value);
  else if (key == "output.dir") cfg.out_dir = value;
  else if (key == "output.per_agent_errors") cfg.per_agent_errors = parse_bool(value);
  else throw Error(ErrorCode::kConfig, "unknown key");
}

namespace {

std::vector<std::string> validate(const ExperimentConfig& cfg) {
  std::vector<std::string> errors;
  if (cfg.n_agents == 0) errors.push_back("n_agents: must be positive");
  if (cfg.dim == 0) errors.push_back("l: must be positive");
  if (cfg.stride == 0) errors.push_back("stride: must be positive");
  if (cfg.theta_star && static_cast<std::size_t>(cfg.theta_star->size()) != cfg.dim) {
    errors.push_back("theta_star: length " + std::to_string(cfg.theta_star->size()) +
                     " differs from l=" + std::to_string(cfg.dim));
  }
  if (cfg.theta_init && static_cast<std::size_t>(cfg.theta_init->size()) != cfg.dim) {
    errors.push_back("theta_init: length differs from l");
  }
  if (!(cfg.topology.p >= 0.0 && cfg.topology.p <= 1.0)) {
    errors.push_back("topology.p: must lie in [0, 1]");
  }
  if (cfg.topology.period == 0) errors.push_back("topology.period: must be positive");
  if (cfg.topology.mode == ScheduleMode::kRegenerated && cfg.topology.horizon < cfg.resolved_window()) {
    errors.push_back("topology.horizon: must be at least topology.B");
  }
  if (cfg.noise.kind == NoiseKind::kGaussian && !(cfg.noise.sigma2 > 0.0)) {
    errors.push_back("noise.sigma2: must be positive");
  }
  if (cfg.noise.kind == NoiseKind::kLaplace && !(cfg.noise.b > 0.0)) {
    errors.push_back("noise.b: must be positive");
  }
  if (cfg.noise.kind == NoiseKind::kUniform && !(cfg.noise.a > 0.0)) {
    errors.push_back("noise.a: must be positive");
  }
  if (!(cfg.regressor.bound > 0.0)) errors.push_back("regressor.bound: must be positive");
  if (cfg.truncation_offset < 0) errors.push_back("truncation.offset: must be >= 0");
  return errors;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::vector<std::string> errors;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    try {
      apply_config_value(cfg, key, line.substr(eq + 1));
    } catch (const Error& e) {
      errors.push_back(key + ": " + e.what());
    }
  }
  for (auto& e : validate(cfg)) errors.push_back(std::move(e));
  if (!errors.empty()) throw Error(ErrorCode::kConfig, "invalid config:\n  " + join(errors, "\n  "));
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

ExperimentConfig preset_section_v(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.n_agents = 100;
  cfg.dim = 8;
  cfg.theta_star.reset();
  cfg.topology.mode = ScheduleMode::kStatic;
  cfg.topology.p = 6.0 / 100.0;
  cfg.topology.weights = WeightScheme::kMetropolis;
  cfg.noise.kind = NoiseKind::kGaussian;
  cfg.noise.sigma2 = 0.09;
  cfg.regressor.kind = RegressorKind::kSparseUniform;
  cfg.regressor.bound = 1.0;
  cfg.steps = 1000000;
  cfg.seed = seed;
  cfg.stride = 100;
  return cfg;
}

// --- construction ---------------------------------------------------------

SystemModel build_model(const ExperimentConfig& cfg) {
  if (auto errors = validate(cfg); !errors.empty()) {
    throw Error(ErrorCode::kConfig, "invalid config:\n  " + join(errors, "\n  "));
  }
  NoiseModel noise = [&] {
    switch (cfg.noise.kind) {
      case NoiseKind::kGaussian: return NoiseModel::gaussian(cfg.noise.sigma2);
      case NoiseKind::kLaplace: return NoiseModel::laplace(cfg.noise.b);
      case NoiseKind::kUniform: return NoiseModel::uniform(cfg.noise.a);
    }
    return NoiseModel::gaussian(cfg.noise.sigma2);
  }();
  RegressorGenerator gen = cfg.regressor.kind == RegressorKind::kDenseUniform
                               ? RegressorGenerator::dense_uniform(cfg.dim, cfg.regressor.bound)
                               : RegressorGenerator::sparse_uniform(cfg.dim, cfg.regressor.bound);
  return SystemModel(cfg.resolved_theta_star(), std::move(gen),
                     std::vector<NoiseModel>(cfg.n_agents, noise));
}

TopologySchedule build_schedule(const ExperimentConfig& cfg) {
  const auto& t = cfg.topology;
  const std::size_t n = cfg.n_agents;
  const std::size_t window = cfg.resolved_window();
  auto base_graph = [&] {
    if (t.require_connected) return generate_connected_poisson_graph(n, t.p, cfg.seed);
    Rng rng = make_stream(cfg.seed, StreamRole::kGraph, 0);
    return generate_poisson_graph(n, t.p, rng);
  };
  switch (t.mode) {
    case ScheduleMode::kStatic:
      return TopologySchedule::make_static(make_step(base_graph(), t.weights), window);
    case ScheduleMode::kPeriodic: {
      std::vector<TopologyStep> steps;
      for (auto& g : split_edges_round_robin(base_graph(), t.period)) {
        steps.push_back(make_step(std::move(g), t.weights));
      }
      return TopologySchedule::make_periodic(std::move(steps), window);
    }
    case ScheduleMode::kRegenerated: {
      const std::uint64_t seed = cfg.seed;
      const double p = t.p;
      const WeightScheme scheme = t.weights;
      // Per-step graphs live on their own stream indices, clear of the base graph.
      return TopologySchedule::make_regenerated(
          n,
          [=](std::uint64_t k) {
            Rng rng = make_stream(seed, StreamRole::kGraph, (std::uint64_t{1} << 40) + k);
            return make_step(generate_poisson_graph(n, p, rng), scheme);
          },
          window);
    }
  }
  throw Error(ErrorCode::kConfig, "topology.mode: unsupported");
}

PreflightReport preflight(const ExperimentConfig& cfg, const SystemModel& model,
                          const TopologySchedule& schedule) {
  PreflightReport report;
  C4Options opts;
  opts.kappa = cfg.topology.kappa;
  opts.horizon = cfg.topology.horizon;
  report.c4 = validate_c4(schedule, opts);
  for (const auto& f : report.c4.failures) {
    if (cfg.topology.weights == WeightScheme::kDegree && f.rfind("C4a", 0) == 0) {
      report.warnings.push_back(
          "degree weights (w_ij = 1/n_i) are row-stochastic only on this graph; the network "
          "average is not preserved (" + f + ")");
    } else {
      report.failures.push_back("topology: " + f);
    }
  }
  if (cfg.topology.weights == WeightScheme::kDegree && report.c4.doubly_stochastic_ok) {
    report.warnings.push_back("degree weights selected; graph happens to be regular");
  }

  report.noise_median_ok = true;
  for (std::size_t i = 0; i < model.agent_count(); ++i) {
    const NoiseModel& nm = model.noise(i);
    if (std::abs(nm.cdf(0.0) - 0.5) > 1e-12 || !(nm.pdf(0.0) > 0.0)) {
      report.noise_median_ok = false;
      report.failures.push_back("noise: agent " + std::to_string(i + 1) +
                                " violates F(0) = 1/2 with f(0) > 0");
      break;
    }
  }

  const auto& gen = model.regressors();
  report.coverage_ok = true;
  if (gen.kind() == RegressorKind::kSparseUniform) {
    std::vector<bool> covered(model.dim(), false);
    for (std::size_t i = 0; i < model.agent_count(); ++i) covered[gen.coordinate_of(i)] = true;
    for (std::size_t m = 0; m < model.dim(); ++m) {
      if (!covered[m]) {
        report.coverage_ok = false;
        report.failures.push_back("regressor: coordinate " + std::to_string(m + 1) +
                                  " is not excited by any agent (sum E[phi phi^T] singular)");
      }
    }
  }
  return report;
}

// --- persistence ----------------------------------------------------------

void write_trajectory_header(std::ostream& out, std::size_t dim, std::size_t per_agent) {
  out << "k,sigma_max,consensus_gap,mean_error";
  for (std::size_t j = 1; j <= dim; ++j) out << ",theta_bar_" << j;
  for (std::size_t i = 1; i <= per_agent; ++i) out << ",err_" << i;
  out << '\n';
}

void write_trajectory_row(std::ostream& out, const MetricsRow& row) {
  out << row.k << ',' << row.sigma_max << ',' << format_double(row.consensus_gap) << ','
      << format_double(row.mean_error);
  for (Eigen::Index j = 0; j < row.theta_bar.size(); ++j) out << ',' << format_double(row.theta_bar(j));
  for (Eigen::Index i = 0; i < row.agent_errors.size(); ++i) {
    out << ',' << format_double(row.agent_errors(i));
  }
  out << '\n';
}

std::vector<MetricsRow> read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kIo, "trajectory csv: missing header");
  std::size_t dim = 0, per_agent = 0;
  {
    std::stringstream hs(line);
    std::string col;
    std::vector<std::string> cols;
    while (std::getline(hs, col, ',')) cols.push_back(col);
    if (cols.size() < 4 || cols[0] != "k" || cols[1] != "sigma_max") {
      throw Error(ErrorCode::kIo, "trajectory csv: unexpected header");
    }
    for (std::size_t c = 4; c < cols.size(); ++c) {
      if (cols[c].rfind("theta_bar_", 0) == 0) ++dim;
      else if (cols[c].rfind("err_", 0) == 0) ++per_agent;
      else throw Error(ErrorCode::kIo, "trajectory csv: unknown column " + cols[c]);
    }
  }
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::vector<std::string> cells;
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 4 + dim + per_agent) {
      throw Error(ErrorCode::kIo, "trajectory csv: wrong field count");
    }
    MetricsRow row;
    row.k = parse_integer<std::uint64_t>(cells[0]);
    row.sigma_max = parse_integer<int>(cells[1]);
    row.consensus_gap = parse_double(cells[2]);
    row.mean_error = parse_double(cells[3]);
    row.theta_bar.resize(static_cast<Eigen::Index>(dim));
    for (std::size_t j = 0; j < dim; ++j) row.theta_bar(static_cast<Eigen::Index>(j)) = parse_double(cells[4 + j]);
    row.agent_errors.resize(static_cast<Eigen::Index>(per_agent));
    for (std::size_t i = 0; i < per_agent; ++i) {
      row.agent_errors(static_cast<Eigen::Index>(i)) = parse_double(cells[4 + dim + i]);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// --- orchestration --------------------------------------------------------

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  ExperimentResult result;
  result.config = cfg;
  const SystemModel model = build_model(cfg);
  const TopologySchedule schedule = build_schedule(cfg);
  result.preflight = preflight(cfg, model, schedule);
  if (!result.preflight.passed()) {
    throw Error(ErrorCode::kPreflight,
                "preflight failed:\n  " + join(result.preflight.failures, "\n  "));
  }
  for (const auto& w : result.preflight.warnings) {
    log_warning(w);
    result.warnings.push_back(w);
  }

  result.theta_star = model.theta_star();
  NetworkSnapshot init = initial_snapshot(cfg.n_agents, cfg.dim, cfg.theta_init.value_or(Vector()));
  PlantStreams streams(cfg.seed, cfg.n_agents);
  InvariantMonitor monitor(cfg.truncation_offset);
  MetricsRecorder recorder(result.theta_star, cfg.stride, cfg.per_agent_errors, cfg.out_dir.empty());

  std::ofstream csv;
  std::filesystem::path out_dir;
  if (!cfg.out_dir.empty()) {
    out_dir = cfg.out_dir;
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    csv.open(out_dir / "trajectory.csv", std::ios::binary);
    if (!csv) throw Error(ErrorCode::kIo, "cannot write " + (out_dir / "trajectory.csv").string());
    write_trajectory_header(csv, cfg.dim, cfg.per_agent_errors ? cfg.n_agents : 0);
    recorder.set_row_callback([&](const MetricsRow& row) { write_trajectory_row(csv, row); });
  }

  IdentifierOptions options;
  options.truncation_offset = cfg.truncation_offset;
  const StepSink sinks[] = {monitor.sink(), recorder.sink()};
  result.final_state = run(model, schedule, cfg.steps, std::move(init), streams, sinks, options);
  recorder.finish(result.final_state);
  result.rows = recorder.rows();

  const NetworkSnapshot& fin = result.final_state;
  result.final_errors = estimation_errors(fin, result.theta_star);
  result.mean_error = (fin.mean() - result.theta_star).norm();
  result.max_agent_error = result.final_errors.maxCoeff();
  result.consensus_gap_final = consensus_gap(fin);
  result.consensus_gap_peak = recorder.peak_consensus_gap();
  result.truncation_events = monitor.truncation_events();
  result.sigma_increase_events = monitor.sigma_increase_events();
  result.last_sigma_change = monitor.last_sigma_change();
  result.zero_after_truncation_violations = monitor.zero_after_truncation_violations();
  result.bound_violations = monitor.bound_violations();
  result.spread = check_truncation_spread(fin.ledger, cfg.n_agents, cfg.resolved_window(), fin.k);
  result.sigma_settled_second_half = sigma_settled_since(fin, monitor, 1 + cfg.steps / 2);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  if (!cfg.out_dir.empty()) {
    csv.close();
    if (!csv) throw Error(ErrorCode::kIo, "failed writing trajectory.csv");
    std::ofstream summary(out_dir / "summary.json", std::ios::binary);
    summary << summary_json(result) << '\n';
    if (!summary) throw Error(ErrorCode::kIo, "failed writing summary.json");
  }
  return result;
}

std::vector<ExperimentResult> run_batch(const std::vector<ExperimentConfig>& configs) {
  std::vector<std::future<ExperimentResult>> jobs;
  jobs.reserve(configs.size());
  for (const auto& cfg : configs) {
    jobs.push_back(std::async(std::launch::async, [cfg] { return run_experiment(cfg); }));
  }
  std::vector<ExperimentResult> results;
  results.reserve(jobs.size());
  for (auto& j : jobs) results.push_back(j.get());
  return results;
}

std::string summary_json(const ExperimentResult& r) {
  const double norm_star = r.theta_star.norm();
  json j;
  j["seed"] = r.config.seed;
  j["steps"] = r.config.steps;
  j["final_k"] = r.final_state.k;
  j["n_agents"] = r.config.n_agents;
  j["l"] = r.config.dim;
  j["theta_star"] = vector_json(r.theta_star);
  j["theta_bar"] = vector_json(r.final_state.mean());
  j["mean_error"] = r.mean_error;
  j["relative_mean_error"] = norm_star > 0.0 ? r.mean_error / norm_star : r.mean_error;
  j["max_agent_error"] = r.max_agent_error;
  j["relative_max_agent_error"] = norm_star > 0.0 ? r.max_agent_error / norm_star : r.max_agent_error;
  j["final_errors"] = vector_json(r.final_errors);
  j["consensus_gap_final"] = r.consensus_gap_final;
  j["consensus_gap_peak"] = r.consensus_gap_peak;
  j["sigma_final"] = r.final_state.sigma;
  j["sigma_max"] = r.final_state.ledger.sigma_max;
  j["truncation_events"] = r.truncation_events;
  j["sigma_increase_events"] = r.sigma_increase_events;
  j["last_sigma_change"] = r.last_sigma_change;
  j["sigma_settled_second_half"] = r.sigma_settled_second_half;
  j["invariants"] = {
      {"zero_after_truncation_violations", r.zero_after_truncation_violations},
      {"bound_violations", r.bound_violations},
      {"spread_checked", r.spread.checked},
      {"spread_skipped", r.spread.skipped},
      {"spread_violations", r.spread.violations},
  };
  j["preflight"] = {
      {"passed", r.preflight.passed()},
      {"failures", r.preflight.failures},
      {"warnings", r.preflight.warnings},
      {"kappa", r.preflight.c4.kappa},
      {"doubly_stochastic", r.preflight.c4.doubly_stochastic_ok},
      {"window_connected", r.preflight.c4.windows_ok},
      {"noise_median_ok", r.preflight.noise_median_ok},
      {"coverage_ok", r.preflight.coverage_ok},
  };
  j["warnings"] = r.warnings;
  j["wall_time_s"] = r.wall_seconds;
  return j.dump(2);
}

std::string probe_json_line(const ProbeReport& report) {
  auto one_based = [](const std::vector<std::size_t>& v) {
    std::vector<std::size_t> out;
    for (std::size_t m : v) out.push_back(m + 1);
    return out;
  };
  json j;
  j["agent"] = report.agent + 1;
  j["steps"] = report.steps;
  j["identifiable"] = one_based(report.identifiable);
  j["stalled"] = one_based(report.stalled);
  j["errors"] = vector_json(report.errors);
  j["final_theta"] = vector_json(report.final_theta);
  j["final_sigma"] = report.final_sigma;
  j["last_sigma_change"] = report.last_sigma_change;
  return j.dump();
}

AnalyzeReport analyze(const ExperimentConfig& cfg, const Vector& theta) {
  const SystemModel model = build_model(cfg);
  if (static_cast<std::size_t>(theta.size()) != model.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "theta must have l=" + std::to_string(model.dim()) +
                                                   " entries");
  }
  RegressionContext ctx;
  ctx.model = &model;
  ctx.fallback_seed = cfg.seed;
  AnalyzeReport report;
  report.closed_form = has_closed_form(ctx);
  report.f = regression_function(ctx, theta);
  report.root_jacobian_eigenvalues =
      Eigen::SelfAdjointEigenSolver<Matrix>(jacobian_at_root(ctx)).eigenvalues();
  if (report.closed_form) {
    report.jacobian_eigenvalues =
        Eigen::SelfAdjointEigenSolver<Matrix>(regression_jacobian(ctx, theta)).eigenvalues();
  }
  return report;
}

std::string analyze_json(const AnalyzeReport& report) {
  json j;
  j["closed_form"] = report.closed_form;
  j["f"] = vector_json(report.f);
  j["root_jacobian_eigenvalues"] = vector_json(report.root_jacobian_eigenvalues);
  if (report.closed_form) j["jacobian_eigenvalues"] = vector_json(report.jacobian_eigenvalues);
  return j.dump(2);
}

}  // namespace dsid
