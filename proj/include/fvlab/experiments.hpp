#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace fvlab {

const char* version();

/// Resolved settings of one experiment run. Every field can be set by name
/// through set_config_field, which is what the config file and the CLI use.
struct ExperimentConfig {
  std::string experiment;
  std::string lambda = "kingman:1";
  std::string levy = "brownian:sigma=1";
  std::string mu0 = "point:0";
  int n = 100;
  double t = 0.5;
  std::string tgrid;
  long replicas = 200;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "json";
  std::size_t event_cap = 50'000'000;
  int workers = 1;

  int bmax = 12;
  std::string nlist;
  double eps = 0.25;
  int k = 1;
  double b = 0.1;
  double s = -1.0;  ///< lookback; negative means t/2
  std::string ball = "0:1";
  std::string set;
  std::string anchors;
  std::string phi = "ball:0:1";
  std::string psi;
  int grid = 32;
  long inner = 256;
  double floor = 0.0;
  long min_stratum = 30;
  bool lookdown = false;
};

/// Names accepted by set_config_field, in echo order.
const std::vector<std::string>& config_keys();

/// Throws std::invalid_argument for unknown keys or malformed values.
void set_config_field(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Flat key=value file with optional [section] headers. Keys outside any
/// section (or under [global]) always apply; keys under [<experiment>] apply to
/// that experiment only.
std::map<std::string, std::string> read_config_file(const std::string& path,
                                                    const std::string& experiment);

/// `geo:<lo>,<hi>,<count>` or `lin:<lo>,<hi>,<count>`, or a comma list.
std::vector<double> parse_time_grid(std::string_view spec);

/// Runs a preset (rates, speed, moments, support, dust, bounds, genealogy,
/// coalescent) and returns the serialized output.
std::string run_experiment(const ExperimentConfig& config);

const std::vector<std::string>& experiment_names();

}  // namespace fvlab
