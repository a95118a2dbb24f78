#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

#include "fvlab/event_log.hpp"
#include "fvlab/experiments.hpp"

using namespace fvlab;

TEST(Experiments, TimeGrids) {
  const auto g = parse_time_grid("geo:1e-3,1e-1,3");
  ASSERT_EQ(g.size(), 3u);
  EXPECT_NEAR(g[1], 1e-2, 1e-15);
  EXPECT_EQ(parse_time_grid("lin:1,2,3")[1], 1.5);
  EXPECT_EQ(parse_time_grid("0.5,0.25").size(), 2u);
  for (const char* bad : {"geo:0,1,3", "lin:2,1,3", "geo:1,2", "", "0.1,-1"}) {
    EXPECT_THROW(parse_time_grid(bad), std::invalid_argument) << bad;
  }
}

TEST(Experiments, ConfigFields) {
  ExperimentConfig c;
  set_config_field(c, "event-cap", "123");
  set_config_field(c, "Replicas", "7");
  set_config_field(c, "lambda", " beta:1.5 ");
  EXPECT_EQ(c.event_cap, 123u);
  EXPECT_EQ(c.replicas, 7);
  EXPECT_EQ(c.lambda, "beta:1.5");
  EXPECT_THROW(set_config_field(c, "replicas", "0"), std::invalid_argument);
  EXPECT_THROW(set_config_field(c, "n", "ten"), std::invalid_argument);
  EXPECT_THROW(set_config_field(c, "colour", "red"), std::invalid_argument);
  EXPECT_THROW(set_config_field(c, "format", "xml"), std::invalid_argument);
  EXPECT_EQ(config_keys().front(), "experiment");
}

TEST(Experiments, ConfigFileSections) {
  const std::string path = testing::TempDir() + "fvlab_cfg.txt";
  {
    std::ofstream f(path);
    f << "# comment\nn = 10\nseed=4\n[speed]\nn = 20\n[rates]\nbmax=5\n";
  }
  const auto speed = read_config_file(path, "speed");
  EXPECT_EQ(speed.at("n"), "20");
  EXPECT_EQ(speed.at("seed"), "4");
  EXPECT_EQ(speed.count("bmax"), 0u);
  EXPECT_EQ(read_config_file(path, "rates").at("n"), "10");
  {
    std::ofstream f(path);
    f << "n 10\n";
  }
  EXPECT_THROW(read_config_file(path, "speed"), std::invalid_argument);
  std::remove(path.c_str());
  EXPECT_THROW(read_config_file(path, "speed"), std::runtime_error);
}

TEST(Experiments, RatesReport) {
  ExperimentConfig c;
  c.experiment = "rates";
  c.lambda = "kingman:1";
  c.bmax = 6;
  const auto j = nlohmann::json::parse(run_experiment(c));
  EXPECT_EQ(j["version"], version());
  EXPECT_EQ(j["config"]["bmax"], 6);
  for (const auto& row : j["rows"]) {
    EXPECT_EQ(row["rate"].get<double>(), row["k"] == 2 ? 1.0 : 0.0);
  }
  EXPECT_EQ(j["rows"].size(), 15u);
}

TEST(Experiments, Determinism) {
  for (const char* name : {"speed", "moments", "genealogy"}) {
    ExperimentConfig c;
    c.experiment = name;
    c.lambda = "kingman:1+beta:1.5";
    c.n = 4;
    c.t = 0.3;
    c.replicas = 50;
    c.seed = 99;
    c.phi = "ball:0:0.5";
    c.grid = 4;
    const auto a = run_experiment(c);
    EXPECT_EQ(a, run_experiment(c)) << name;
    c.seed = 100;
    EXPECT_NE(a, run_experiment(c)) << name;
  }
}

TEST(Experiments, CsvOutput) {
  ExperimentConfig c;
  c.experiment = "speed";
  c.lambda = "beta:1.5";
  c.n = 50;
  c.tgrid = "lin:0.1,0.2,2";
  c.replicas = 3;
  c.format = "csv";
  const auto out = run_experiment(c);
  EXPECT_NE(out.find("experiment,n,t,replica_group,value,stderr"), std::string::npos);
  EXPECT_NE(out.find("speed:N_t,50,0.1,2,"), std::string::npos);
}

TEST(Experiments, LookdownDumpParses) {
  ExperimentConfig c;
  c.experiment = "coalescent";
  c.lookdown = true;
  c.n = 6;
  c.t = 1.0;
  c.replicas = 1;
  c.lambda = "kingman:1+atoms:1@0.5";
  const auto log = EventLog::parse(run_experiment(c));
  EXPECT_EQ(log.n(), 6);
  EXPECT_EQ(log.lambda_spec, c.lambda);
  EXPECT_GT(log.size(), 0u);
}

TEST(Experiments, Errors) {
  ExperimentConfig c;
  c.experiment = "nope";
  EXPECT_THROW(run_experiment(c), std::invalid_argument);
  c.experiment = "rates";
  c.lambda = "beta:7";
  EXPECT_THROW(run_experiment(c), std::invalid_argument);
  c.experiment = "coalescent";
  c.lookdown = true;
  c.lambda = "kingman:1";
  c.n = 200;
  c.event_cap = 5;
  EXPECT_THROW(run_experiment(c), std::runtime_error);
}
