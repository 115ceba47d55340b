// Command-line front end. Talks to the library only through dsid.h.
#include "dsid/dsid.h"

#include <CLI11.hpp>

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct ConfigDeleter {
  void operator()(dsid_config* c) const { dsid_config_free(c); }
};
struct ResultDeleter {
  void operator()(dsid_result* r) const { dsid_result_free(r); }
};
struct StringDeleter {
  void operator()(char* s) const { dsid_string_free(s); }
};
using ConfigPtr = std::unique_ptr<dsid_config, ConfigDeleter>;
using ResultPtr = std::unique_ptr<dsid_result, ResultDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

// Exit codes: 0 ok, 2 usage/config, 3 preflight, 4 i/o, 1 anything else.
int exit_code(dsid_status s) {
  switch (s) {
    case DSID_OK: return 0;
    case DSID_ERR_INVALID_ARGUMENT:
    case DSID_ERR_DIMENSION:
    case DSID_ERR_CONFIG: return 2;
    case DSID_ERR_PREFLIGHT: return 3;
    case DSID_ERR_IO: return 4;
    default: return 1;
  }
}

struct Failure {
  dsid_status status;
};

void check(dsid_status s) {
  if (s != DSID_OK) {
    std::fprintf(stderr, "error (%s): %s\n", dsid_status_name(s), dsid_last_error());
    throw Failure{s};
  }
}

ConfigPtr load(const std::string& path) {
  dsid_config* c = nullptr;
  check(dsid_config_load(path.c_str(), &c));
  return ConfigPtr(c);
}

void set(dsid_config* c, const char* key, const std::string& value) {
  check(dsid_config_set(c, key, value.c_str()));
}

void run_and_report(const dsid_config* cfg) {
  dsid_result* raw = nullptr;
  check(dsid_run(cfg, &raw));
  ResultPtr result(raw);
  char* json = nullptr;
  check(dsid_result_summary_json(result.get(), &json));
  StringPtr owned(json);
  std::printf("%s\n", json);
}

std::vector<double> parse_theta(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      std::fprintf(stderr, "error: --theta: '%s' is not a number\n", item.c_str());
      throw Failure{DSID_ERR_INVALID_ARGUMENT};
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed identification with binary-valued sensors"};
  app.require_subcommand(1);
  app.set_version_flag("--version", dsid_version());

  std::string config_path, out_dir, theta_text;
  std::optional<std::uint64_t> seed, steps, stride;
  bool paper_weights = false;
  std::size_t agent = 0;
  std::uint64_t probe_steps = 100000;
  std::size_t topo_steps = 0;
  std::uint64_t preset_seed = 1;

  auto* simulate = app.add_subcommand("simulate", "Run one experiment from a config file");
  simulate->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--seed", seed, "Override the seed");
  simulate->add_option("--steps", steps, "Override the step count");
  simulate->add_option("--out", out_dir, "Output directory for trajectory.csv and summary.json");
  simulate->add_flag("--paper-weights", paper_weights, "Use 1/n_i weights instead of Metropolis");
  simulate->add_option("--stride", stride, "Metric stride")->check(CLI::PositiveNumber);

  auto* preset = app.add_subcommand("preset-v", "Run the N=100, l=8 reproduction preset");
  preset->add_option("--seed", preset_seed, "Seed")->required();
  preset->add_option("--out", out_dir, "Output directory")->required();
  preset->add_option("--steps", steps, "Override the step count");
  preset->add_flag("--paper-weights", paper_weights, "Use 1/n_i weights instead of Metropolis");
  preset->add_option("--stride", stride, "Metric stride")->check(CLI::PositiveNumber);

  auto* probe = app.add_subcommand("probe", "Run one agent alone and report stalled coordinates");
  probe->add_option("--agent", agent, "Agent index (1-based)")->required()->check(CLI::PositiveNumber);
  probe->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  probe->add_option("--steps", probe_steps, "Steps of the solo run")->capture_default_str();
  probe->add_option("--out", out_dir, "Directory receiving probe.jsonl");

  auto* analyze = app.add_subcommand("analyze", "Print f(theta) and Jacobian eigenvalues");
  analyze->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  analyze->add_option("--theta", theta_text, "Comma-separated estimate")->required();

  auto* topology = app.add_subcommand("topology", "Write the configured schedule as text");
  topology->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  topology->add_option("--out", out_dir, "Destination file")->required();
  topology->add_option("--steps", topo_steps, "Blocks to write for regenerated schedules");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate || *preset) {
      ConfigPtr cfg;
      if (*simulate) {
        cfg = load(config_path);
        if (seed) set(cfg.get(), "seed", std::to_string(*seed));
      } else {
        dsid_config* c = nullptr;
        check(dsid_config_preset_v(preset_seed, &c));
        cfg.reset(c);
      }
      if (steps) set(cfg.get(), "steps", std::to_string(*steps));
      if (stride) set(cfg.get(), "stride", std::to_string(*stride));
      if (paper_weights) set(cfg.get(), "topology.weights", "degree");
      if (!out_dir.empty()) set(cfg.get(), "output.dir", out_dir);
      run_and_report(cfg.get());
    } else if (*probe) {
      ConfigPtr cfg = load(config_path);
      if (!out_dir.empty()) set(cfg.get(), "output.dir", out_dir);
      char* line = nullptr;
      check(dsid_probe(cfg.get(), agent, probe_steps, &line));
      StringPtr owned(line);
      std::printf("%s\n", line);
    } else if (*analyze) {
      ConfigPtr cfg = load(config_path);
      const std::vector<double> theta = parse_theta(theta_text);
      char* json = nullptr;
      check(dsid_analyze(cfg.get(), theta.data(), theta.size(), &json));
      StringPtr owned(json);
      std::printf("%s\n", json);
    } else if (*topology) {
      ConfigPtr cfg = load(config_path);
      check(dsid_write_topology(cfg.get(), out_dir.c_str(), topo_steps));
    }
  } catch (const Failure& f) {
    return exit_code(f.status);
  }
  return 0;
}
