#include <deque>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "fvlab/experiments.hpp"

namespace {

struct Flag {
  std::string key;
  std::string value;
  CLI::Option* option = nullptr;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lambda-coalescent and Lambda-Fleming-Viot simulation presets", "fvlab"};
  app.set_version_flag("--version", std::string(fvlab::version()));
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "key=value config file with [experiment] sections")
      ->check(CLI::ExistingFile);

  struct Spec {
    const char* key;
    const char* flag;
    const char* help;
  };
  const Spec globals[] = {
      {"lambda", "--lambda", "Lambda measure, e.g. kingman:1+beta:1.5"},
      {"levy", "--levy", "mutation process, e.g. brownian:sigma=1"},
      {"mu0", "--mu0", "initial law: point:x | atoms:x;y | normal:sd"},
      {"n", "--n", "number of levels or sample size"},
      {"t", "--t", "time horizon"},
      {"tgrid", "--tgrid", "geo:lo,hi,count | lin:lo,hi,count | t1,t2,..."},
      {"replicas", "--replicas", "independent replicas"},
      {"seed", "--seed", "master seed"},
      {"out", "--out", "output path (default stdout)"},
      {"format", "--format", "json | csv"},
      {"event_cap", "--event-cap", "abort a lookdown run after this many events"},
      {"workers", "--workers", "replica worker threads"},
  };
  const Spec locals[] = {
      {"bmax", "--bmax", "largest block count in the rate table"},
      {"nlist", "--nlist", "comma separated n values for the support sweep"},
      {"eps", "--eps", "enlargement radius"},
      {"k", "--k", "convolution power of the jump law"},
      {"b", "--b", "block fraction threshold"},
      {"s", "--s", "lookback time (default t/2)"},
      {"ball", "--ball", "center:radius"},
      {"set", "--set", "atoms of the target set, ';' separated"},
      {"anchors", "--anchors", "points to report, ';' separated"},
      {"phi", "--phi", "one | ball:c:r | coord:i"},
      {"psi", "--psi", "second test function (default phi)"},
      {"grid", "--grid", "time grid for the second moment integral"},
      {"inner", "--inner", "inner samples per cluster"},
      {"floor", "--floor", "ignore atoms lighter than this"},
      {"min_stratum", "--min-stratum", "smallest stratum that is tested"},
  };

  std::deque<Flag> flags;  // options bind to these strings; addresses must stay put
  for (const auto& g : globals) {
    flags.push_back({g.key, {}, nullptr});
    flags.back().option = app.add_option(g.flag, flags.back().value, g.help);
  }
  bool lookdown = false;
  CLI::Option* lookdown_flag = nullptr;

  std::string chosen;
  for (const auto& name : fvlab::experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " preset");
    sub->fallthrough();
    sub->callback([&chosen, name] { chosen = name; });
    for (const auto& l : locals) {
      flags.push_back({l.key, {}, nullptr});
      flags.back().option = sub->add_option(l.flag, flags.back().value, l.help);
    }
    if (name == "coalescent") {
      lookdown_flag = sub->add_flag("--lookdown", lookdown, "dump lookdown event logs instead");
    }
  }

  CLI11_PARSE(app, argc, argv);

  try {
    fvlab::ExperimentConfig config;
    config.experiment = chosen;
    if (!config_path.empty()) {
      for (const auto& [key, value] : fvlab::read_config_file(config_path, chosen)) {
        fvlab::set_config_field(config, key, value);
      }
    }
    for (const auto& f : flags) {
      if (f.option->count() > 0) fvlab::set_config_field(config, f.key, f.value);
    }
    if (lookdown_flag != nullptr && lookdown_flag->count() > 0) config.lookdown = lookdown;
    if (config.experiment != chosen) config.experiment = chosen;

    const std::string output = fvlab::run_experiment(config);
    if (config.out.empty()) {
      std::cout << output;
      std::cout.flush();
    } else {
      std::ofstream file(config.out, std::ios::binary);
      if (!file) throw std::runtime_error("cannot write " + config.out);
      file << output;
      if (!file) throw std::runtime_error("write failed for " + config.out);
    }
  } catch (const std::exception& e) {
    std::cerr << "fvlab: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
