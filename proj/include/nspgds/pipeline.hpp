#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "nspgds/gibbs.hpp"
#include "nspgds/model.hpp"
#include "nspgds/tasks.hpp"

namespace nspgds::pipeline {

// Resolved run configuration: config-file values overridden by flags.
struct RunConfig {
  Hyperparameters hyper;
  SamplerConfig sampler;
  std::string data_path;
  std::string mask_path;
  std::string out_dir;
  int V = 20;  // generate only
  int T = 80;  // generate only
  double mask_fraction = 0.10;
  int forecast_steps = 2;
  bool emit_svg = false;
  bool resume = false;
};

// Applies key=value entries (the config-file format) onto a RunConfig.
// Unknown keys raise std::invalid_argument.
void apply_key_value(RunConfig& cfg, const std::string& key, const std::string& value);
void apply_config_file(RunConfig& cfg, const std::string& path);

// Subcommand bodies. Each writes its outputs under cfg.out_dir and returns
// the metrics.csv content where applicable (already written to disk too).
void cmd_generate(const RunConfig& cfg);
std::string cmd_fit(const RunConfig& cfg);
std::string cmd_smooth(const RunConfig& cfg);
std::string cmd_forecast(const RunConfig& cfg);
void cmd_report(const RunConfig& cfg);

// Loads counts plus optional mask file.
CountData load_data(const RunConfig& cfg);

void write_manifest(const RunConfig& cfg, const std::string& command);

}  // namespace nspgds::pipeline
