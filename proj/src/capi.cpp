#include "dsid/dsid.h"

#include "dsid/runner.hpp"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <new>

struct dsid_config {
  dsid::ExperimentConfig value;
};

struct dsid_result {
  dsid::ExperimentResult value;
  std::string summary;
};

namespace {

thread_local std::string g_last_error;

dsid_status to_status(dsid::ErrorCode code) {
  switch (code) {
    case dsid::ErrorCode::kInvalidArgument: return DSID_ERR_INVALID_ARGUMENT;
    case dsid::ErrorCode::kDimensionMismatch: return DSID_ERR_DIMENSION;
    case dsid::ErrorCode::kConfig: return DSID_ERR_CONFIG;
    case dsid::ErrorCode::kPreflight: return DSID_ERR_PREFLIGHT;
    case dsid::ErrorCode::kIo: return DSID_ERR_IO;
    case dsid::ErrorCode::kNumeric: return DSID_ERR_NUMERIC;
  }
  return DSID_ERR_INTERNAL;
}

template <class F>
dsid_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return DSID_OK;
  } catch (const dsid::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return DSID_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DSID_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return DSID_ERR_INTERNAL;
  }
}

dsid_status null_argument(const char* what) {
  g_last_error = std::string("null argument: ") + what;
  return DSID_ERR_INVALID_ARGUMENT;
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* dsid_version(void) { return "1.0.0"; }

const char* dsid_status_name(dsid_status status) {
  switch (status) {
    case DSID_OK: return "ok";
    case DSID_ERR_INVALID_ARGUMENT: return "invalid argument";
    case DSID_ERR_DIMENSION: return "dimension mismatch";
    case DSID_ERR_CONFIG: return "config error";
    case DSID_ERR_PREFLIGHT: return "preflight failed";
    case DSID_ERR_IO: return "i/o error";
    case DSID_ERR_NUMERIC: return "numeric error";
    case DSID_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* dsid_last_error(void) { return g_last_error.c_str(); }

void dsid_set_warning_callback(dsid_warning_fn fn, void* user_data) {
  if (!fn) {
    dsid::set_warning_handler([](const std::string& msg) {
      std::fprintf(stderr, "warning: %s\n", msg.c_str());
    });
    return;
  }
  dsid::set_warning_handler([fn, user_data](const std::string& msg) { fn(msg.c_str(), user_data); });
}

dsid_status dsid_config_load(const char* path, dsid_config** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  return guarded([&] { *out = new dsid_config{dsid::load_config(path)}; });
}

dsid_status dsid_config_parse(const char* text, dsid_config** out) {
  if (!text) return null_argument("text");
  if (!out) return null_argument("out");
  return guarded([&] { *out = new dsid_config{dsid::parse_config(text)}; });
}

dsid_status dsid_config_preset_v(uint64_t seed, dsid_config** out) {
  if (!out) return null_argument("out");
  return guarded([&] { *out = new dsid_config{dsid::preset_section_v(seed)}; });
}

dsid_status dsid_config_set(dsid_config* config, const char* key, const char* value) {
  if (!config) return null_argument("config");
  if (!key || !value) return null_argument("key/value");
  return guarded([&] {
    dsid::ExperimentConfig updated = config->value;
    try {
      dsid::apply_config_value(updated, key, value);
    } catch (const dsid::Error& e) {
      throw dsid::Error(e.code(), std::string(key) + ": " + e.what());
    }
    config->value = std::move(updated);
  });
}

void dsid_config_free(dsid_config* config) { delete config; }

dsid_status dsid_run(const dsid_config* config, dsid_result** out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  return guarded([&] {
    auto r = std::make_unique<dsid_result>();
    r->value = dsid::run_experiment(config->value);
    r->summary = dsid::summary_json(r->value);
    *out = r.release();
  });
}

dsid_status dsid_result_summary_json(const dsid_result* result, char** out) {
  if (!result) return null_argument("result");
  if (!out) return null_argument("out");
  return guarded([&] { *out = copy_string(result->summary); });
}

dsid_status dsid_result_metric(const dsid_result* result, const char* name, double* out) {
  if (!result) return null_argument("result");
  if (!name || !out) return null_argument("name/out");
  return guarded([&] {
    const auto& r = result->value;
    const double norm_star = r.theta_star.norm();
    const std::string key = name;
    if (key == "mean_error") *out = r.mean_error;
    else if (key == "relative_mean_error") *out = r.mean_error / norm_star;
    else if (key == "max_agent_error") *out = r.max_agent_error;
    else if (key == "relative_max_agent_error") *out = r.max_agent_error / norm_star;
    else if (key == "consensus_gap_final") *out = r.consensus_gap_final;
    else if (key == "consensus_gap_peak") *out = r.consensus_gap_peak;
    else if (key == "truncation_events") *out = static_cast<double>(r.truncation_events);
    else if (key == "sigma_max") *out = r.final_state.ledger.sigma_max;
    else if (key == "final_k") *out = static_cast<double>(r.final_state.k);
    else if (key == "wall_time_s") *out = r.wall_seconds;
    else throw dsid::Error(dsid::ErrorCode::kInvalidArgument, "unknown metric '" + key + "'");
  });
}

dsid_status dsid_result_theta_bar(const dsid_result* result, double* out, size_t capacity,
                                  size_t* length) {
  if (!result) return null_argument("result");
  return guarded([&] {
    const dsid::Vector bar = result->value.final_state.mean();
    const auto l = static_cast<std::size_t>(bar.size());
    if (length) *length = l;
    if (out) {
      for (std::size_t j = 0; j < std::min(capacity, l); ++j) out[j] = bar(static_cast<Eigen::Index>(j));
    }
  });
}

void dsid_result_free(dsid_result* result) { delete result; }

dsid_status dsid_probe(const dsid_config* config, size_t agent, uint64_t steps, char** json_line) {
  if (!config) return null_argument("config");
  if (!json_line) return null_argument("json_line");
  return guarded([&] {
    const auto& cfg = config->value;
    if (agent == 0 || agent > cfg.n_agents) {
      throw dsid::Error(dsid::ErrorCode::kInvalidArgument,
                        "agent must lie in 1.." + std::to_string(cfg.n_agents));
    }
    const dsid::SystemModel model = dsid::build_model(cfg);
    const auto report = dsid::identifiability_probe(model, agent - 1, steps, cfg.seed);
    const std::string line = dsid::probe_json_line(report);
    if (!cfg.out_dir.empty()) {
      std::filesystem::create_directories(cfg.out_dir);
      std::ofstream f(std::filesystem::path(cfg.out_dir) / "probe.jsonl", std::ios::app);
      f << line << '\n';
      if (!f) throw dsid::Error(dsid::ErrorCode::kIo, "failed writing probe.jsonl");
    }
    *json_line = copy_string(line);
  });
}

dsid_status dsid_analyze(const dsid_config* config, const double* theta, size_t length,
                         char** json) {
  if (!config) return null_argument("config");
  if (!theta) return null_argument("theta");
  if (!json) return null_argument("json");
  return guarded([&] {
    const dsid::Vector t = Eigen::Map<const dsid::Vector>(theta, static_cast<Eigen::Index>(length));
    *json = copy_string(dsid::analyze_json(dsid::analyze(config->value, t)));
  });
}

dsid_status dsid_write_topology(const dsid_config* config, const char* path, size_t steps) {
  if (!config) return null_argument("config");
  if (!path) return null_argument("path");
  return guarded([&] {
    const auto schedule = dsid::build_schedule(config->value);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw dsid::Error(dsid::ErrorCode::kIo, std::string("cannot write ") + path);
    dsid::write_schedule_text(f, schedule, steps);
    if (!f) throw dsid::Error(dsid::ErrorCode::kIo, std::string("failed writing ") + path);
  });
}

void dsid_string_free(char* s) { std::free(s); }

}  // extern "C"
