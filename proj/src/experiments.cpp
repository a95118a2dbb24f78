#include "fvlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "fvlab/coalescent.hpp"
#include "fvlab/event_log.hpp"
#include "fvlab/fv_process.hpp"
#include "fvlab/lambda_measure.hpp"
#include "fvlab/levy.hpp"
#include "fvlab/lookdown.hpp"
#include "fvlab/oracles.hpp"
#include "fvlab/replicas.hpp"
#include "fvlab/stats.hpp"
#include "parse_util.hpp"

#ifndef FVLAB_VERSION
#define FVLAB_VERSION "0.0.0"
#endif

namespace fvlab {

using json = nlohmann::ordered_json;

const char* version() { return FVLAB_VERSION; }

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"rates", "speed",  "moments",   "support",
                                                 "dust",  "bounds", "genealogy", "coalescent"};
  return names;
}

namespace {

struct Field {
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<json(const ExperimentConfig&)> get;
};

template <class T>
Field int_field(T ExperimentConfig::*member, T lo) {
  return {[member, lo](ExperimentConfig& c, const std::string& v) {
            const long long x = detail::parse_int(v, "integer");
            if (x < static_cast<long long>(lo)) throw std::invalid_argument("value '" + v + "' too small");
            c.*member = static_cast<T>(x);
          },
          [member](const ExperimentConfig& c) { return json(c.*member); }};
}

Field double_field(double ExperimentConfig::*member) {
  return {[member](ExperimentConfig& c, const std::string& v) {
            c.*member = detail::parse_double(v, "number");
          },
          [member](const ExperimentConfig& c) { return json(c.*member); }};
}

Field string_field(std::string ExperimentConfig::*member) {
  return {[member](ExperimentConfig& c, const std::string& v) { c.*member = detail::trim(v); },
          [member](const ExperimentConfig& c) { return json(c.*member); }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = [] {
    std::vector<std::pair<std::string, Field>> f;
    f.emplace_back("experiment", string_field(&ExperimentConfig::experiment));
    f.emplace_back("lambda", string_field(&ExperimentConfig::lambda));
    f.emplace_back("levy", string_field(&ExperimentConfig::levy));
    f.emplace_back("mu0", string_field(&ExperimentConfig::mu0));
    f.emplace_back("n", int_field(&ExperimentConfig::n, 1));
    f.emplace_back("t", double_field(&ExperimentConfig::t));
    f.emplace_back("tgrid", string_field(&ExperimentConfig::tgrid));
    f.emplace_back("replicas", int_field(&ExperimentConfig::replicas, 1L));
    f.emplace_back("seed", Field{[](ExperimentConfig& c, const std::string& v) {
                                   const std::string t = detail::trim(v);
                                   std::uint64_t x = 0;
                                   const auto res = std::from_chars(t.data(), t.data() + t.size(), x);
                                   if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
                                     throw std::invalid_argument("bad seed '" + v + "'");
                                   }
                                   c.seed = x;
                                 },
                                 [](const ExperimentConfig& c) { return json(c.seed); }});
    f.emplace_back("out", string_field(&ExperimentConfig::out));
    f.emplace_back("format", Field{[](ExperimentConfig& c, const std::string& v) {
                                     const std::string x = detail::lower(detail::trim(v));
                                     if (x != "json" && x != "csv") {
                                       throw std::invalid_argument("format must be json or csv");
                                     }
                                     c.format = x;
                                   },
                                   [](const ExperimentConfig& c) { return json(c.format); }});
    f.emplace_back("event_cap", int_field(&ExperimentConfig::event_cap, std::size_t{1}));
    f.emplace_back("workers", int_field(&ExperimentConfig::workers, 1));
    f.emplace_back("bmax", int_field(&ExperimentConfig::bmax, 2));
    f.emplace_back("nlist", string_field(&ExperimentConfig::nlist));
    f.emplace_back("eps", double_field(&ExperimentConfig::eps));
    f.emplace_back("k", int_field(&ExperimentConfig::k, 0));
    f.emplace_back("b", double_field(&ExperimentConfig::b));
    f.emplace_back("s", double_field(&ExperimentConfig::s));
    f.emplace_back("ball", string_field(&ExperimentConfig::ball));
    f.emplace_back("set", string_field(&ExperimentConfig::set));
    f.emplace_back("anchors", string_field(&ExperimentConfig::anchors));
    f.emplace_back("phi", string_field(&ExperimentConfig::phi));
    f.emplace_back("psi", string_field(&ExperimentConfig::psi));
    f.emplace_back("grid", int_field(&ExperimentConfig::grid, 1));
    f.emplace_back("inner", int_field(&ExperimentConfig::inner, 1L));
    f.emplace_back("floor", double_field(&ExperimentConfig::floor));
    f.emplace_back("min_stratum", int_field(&ExperimentConfig::min_stratum, 1L));
    f.emplace_back("lookdown", Field{[](ExperimentConfig& c, const std::string& v) {
                                       const std::string x = detail::lower(detail::trim(v));
                                       if (x == "1" || x == "true" || x == "yes" || x.empty()) {
                                         c.lookdown = true;
                                       } else if (x == "0" || x == "false" || x == "no") {
                                         c.lookdown = false;
                                       } else {
                                         throw std::invalid_argument("lookdown must be true or false");
                                       }
                                     },
                                     [](const ExperimentConfig& c) { return json(c.lookdown); }});
    return f;
  }();
  return table;
}

std::string normalize_key(std::string key) {
  key = detail::lower(detail::trim(key));
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

json config_echo(const ExperimentConfig& c) {
  json j = json::object();
  for (const auto& [name, field] : fields()) j[name] = field.get(c);
  return j;
}

json header(const ExperimentConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  j["version"] = version();
  j["seed"] = c.seed;
  j["config"] = config_echo(c);
  return j;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return detail::format_double(v);
}

// Long-format sweep table: experiment, n, t, replica_group, value, stderr.
class LongCsv {
 public:
  explicit LongCsv(const ExperimentConfig& c) {
    out_ << "# fvlab " << version() << ' ' << config_echo(c).dump() << '\n';
    out_ << "experiment,n,t,replica_group,value,stderr\n";
  }
  void row(const std::string& experiment, int n, double t, const std::string& group, double value,
           double se) {
    out_ << experiment << ',' << n << ',' << fmt(t) << ',' << group << ',' << fmt(value) << ','
         << fmt(se) << '\n';
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

struct ParsedTestFunction {
  TestFunction f;
  double sup = 1.0;
};

ParsedTestFunction parse_test_function(const std::string& text, int dimension) {
  const auto parts = detail::split(text, ':');
  if (parts.empty()) throw std::invalid_argument("empty test function");
  const std::string kind = detail::lower(parts[0]);
  if (kind == "one") return {phi::constant(1.0), 1.0};
  if (kind == "ball" && parts.size() == 3) {
    Point c = parse_point(parts[1]);
    if (c.size() != dimension) throw std::invalid_argument("ball center has the wrong dimension");
    return {phi::indicator_ball(std::move(c), detail::parse_double(parts[2], "radius")), 1.0};
  }
  if (kind == "coord" && parts.size() == 2) {
    const int i = static_cast<int>(detail::parse_int(parts[1], "coordinate"));
    if (i < 0 || i >= dimension) throw std::invalid_argument("coordinate out of range");
    return {phi::coordinate(i), std::numeric_limits<double>::infinity()};
  }
  throw std::invalid_argument("unknown test function '" + text + "'");
}

BallQuery parse_ball(const std::string& text) {
  const auto parts = detail::split(text, ':');
  if (parts.size() != 2) throw std::invalid_argument("ball must be <center>:<radius>");
  return {parse_point(parts[0]), detail::parse_double(parts[1], "radius")};
}

std::vector<Point> parse_points(const std::string& text) {
  std::vector<Point> pts;
  for (const auto& p : detail::split(text, ';')) pts.push_back(parse_point(p));
  return pts;
}

FvSetup make_setup(const ExperimentConfig& c) {
  FvSetup s;
  s.lambda = parse_lambda(c.lambda);
  s.levy = parse_levy(c.levy);
  s.mu0 = parse_initial_law(c.mu0, s.levy.dimension());
  s.n = c.n;
  s.replicas = c.replicas;
  s.seed = c.seed;
  s.workers = c.workers;
  s.event_cap = c.event_cap;
  return s;
}

json moment_json(const MomentReport& r) {
  json j;
  j["observable"] = r.observable;
  j["estimate"] = r.estimate;
  j["stderr"] = r.std_error;
  j["target"] = r.target;
  j["target_stderr"] = r.target_std_error;
  j["z"] = r.z;
  for (const auto& [k, v] : r.extras) j["extras"][k] = v;
  return j;
}

json bound_json(const BoundReport& r) {
  json j;
  j["observable"] = r.observable;
  j["samples"] = r.total_samples;
  j["frequency"] = r.overall_frequency;
  j["mean_bound"] = r.overall_bound;
  j["passed"] = r.passed;
  j["strata"] = json::array();
  for (const auto& s : r.strata) {
    j["strata"].push_back({{"label", s.label},
                           {"samples", s.samples},
                           {"frequency", s.frequency},
                           {"stderr", s.std_error},
                           {"bound", s.bound},
                           {"degenerate", s.degenerate},
                           {"passed", s.passed}});
  }
  j["warnings"] = r.warnings;
  return j;
}

std::string finish(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------

std::string run_rates(const ExperimentConfig& c) {
  const auto lambda = parse_lambda(c.lambda);
  json j = header(c);
  j["rows"] = json::array();
  std::ostringstream csv;
  csv << "b,k,rate,oracle,rel_error\n";
  double worst = 0.0;
  for (int b = 2; b <= c.bmax; ++b) {
    for (int k = 2; k <= b; ++k) {
      const double rate = merger_rate(lambda, b, k);
      const double oracle = validation::brute_force_rate(lambda, b, k);
      const double rel = rate == oracle ? 0.0 : std::abs(rate - oracle) / std::max(std::abs(oracle), 1e-300);
      worst = std::max(worst, rel);
      j["rows"].push_back({{"b", b}, {"k", k}, {"rate", rate}, {"oracle", oracle}, {"rel_error", rel}});
      csv << b << ',' << k << ',' << fmt(rate) << ',' << fmt(oracle) << ',' << fmt(rel) << '\n';
    }
  }
  j["max_rel_error"] = worst;
  return c.format == "csv" ? csv.str() : finish(j);
}

std::string run_speed(const ExperimentConfig& c) {
  const auto lambda = parse_lambda(c.lambda);
  const auto grid = c.tgrid.empty() ? std::vector<double>{c.t} : parse_time_grid(c.tgrid);
  const double horizon = *std::max_element(grid.begin(), grid.end());
  const MergerRateTable table(lambda, c.n);
  const auto counts = run_replicas<std::vector<double>>(c.replicas, c.workers, [&](long r) {
    Engine rng = make_stream(c.seed, static_cast<std::uint64_t>(r), 1);
    const auto path = simulate_coalescent(table, c.n, horizon, rng);
    std::vector<double> out;
    for (double t : grid) out.push_back(static_cast<double>(path.block_count_at(t)));
    return out;
  });
  double cl = std::numeric_limits<double>::quiet_NaN();
  if (!lambda.is_zero()) cl = speed_lower_constant(lambda);
  std::string cdi = "undetermined";
  try {
    cdi = to_string(comes_down_from_infinity(lambda));
  } catch (const std::domain_error&) {
    cdi = "not applicable";
  }
  json j = header(c);
  j["comes_down_from_infinity"] = cdi;
  j["c_lambda"] = cl;
  j["times"] = json::array();
  LongCsv csv(c);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double t = grid[g];
    double v = std::numeric_limits<double>::quiet_NaN();
    if (cdi == "yes" || cdi == "no") v = v_of_t(lambda, t);
    std::vector<double> ns, ratios;
    stats::MeanAccumulator acc;
    long above = 0;
    for (long r = 0; r < c.replicas; ++r) {
      const double nt = counts[static_cast<std::size_t>(r)][g];
      ns.push_back(nt);
      ratios.push_back(nt / v);
      acc.add(nt);
      if (nt * t >= 0.8 * cl) ++above;
      csv.row("speed:N_t", c.n, t, std::to_string(r), nt, 0.0);
    }
    auto median = [](std::vector<double> x) {
      std::sort(x.begin(), x.end());
      const std::size_t m = x.size() / 2;
      return x.size() % 2 ? x[m] : 0.5 * (x[m - 1] + x[m]);
    };
    const double med_ratio = median(ratios);
    csv.row("speed:v", c.n, t, "all", v, 0.0);
    csv.row("speed:c_over_t", c.n, t, "all", cl / t, 0.0);
    csv.row("speed:median_ratio", c.n, t, "all", med_ratio, 0.0);
    j["times"].push_back({{"t", t},
                          {"v", v},
                          {"c_over_t", cl / t},
                          {"mean_N", acc.mean()},
                          {"stderr_N", acc.stderr_of_mean()},
                          {"median_N", median(ns)},
                          {"median_ratio", med_ratio},
                          {"envelope_fraction", static_cast<double>(above) / c.replicas}});
  }
  return c.format == "csv" ? csv.str() : finish(j);
}

std::string run_moments(const ExperimentConfig& c) {
  const FvSetup setup = make_setup(c);
  const auto phi = parse_test_function(c.phi, setup.levy.dimension());
  const auto psi = parse_test_function(c.psi.empty() ? c.phi : c.psi, setup.levy.dimension());
  const auto first = first_moment_check(setup, c.t, phi.f);
  SecondMomentOptions opt;
  opt.grid = c.grid;
  opt.phi_sup = phi.sup;
  const auto second = second_moment_check(setup, c.t, phi.f, psi.f, opt);
  if (c.format == "csv") {
    LongCsv csv(c);
    csv.row("moments:first", c.n, c.t, "all", first.estimate, first.std_error);
    csv.row("moments:first_target", c.n, c.t, "all", first.target, first.target_std_error);
    csv.row("moments:second", c.n, c.t, "all", second.estimate, second.std_error);
    csv.row("moments:second_target", c.n, c.t, "all", second.target, second.target_std_error);
    return csv.str();
  }
  json j = header(c);
  j["first_moment"] = moment_json(first);
  j["second_moment"] = moment_json(second);
  return finish(j);
}

std::vector<int> n_values(const ExperimentConfig& c) {
  if (c.nlist.empty()) return {c.n};
  std::vector<int> out;
  for (const auto& x : detail::split(c.nlist, ',')) {
    out.push_back(static_cast<int>(detail::parse_int(x, "n")));
  }
  return out;
}

std::string run_support(const ExperimentConfig& c) {
  FvSetup setup = make_setup(c);
  const auto anchors = c.anchors.empty() ? std::vector<Point>{} : parse_points(c.anchors);
  json j = header(c);
  j["sweep"] = json::array();
  LongCsv csv(c);
  for (int n : n_values(c)) {
    setup.n = n;
    const auto rep = support_propagation_probe(setup, c.t, c.k, c.eps, anchors, c.floor);
    json row = {{"n", n}, {"hit_fraction", rep.hit_fraction}, {"stderr", rep.std_error}};
    csv.row("support:hit_fraction", n, c.t, "all", rep.hit_fraction, rep.std_error);
    for (std::size_t a = 0; a < rep.anchor_hits.size(); ++a) {
      row["anchors"].push_back({{"point", format_point(rep.anchor_hits[a].first)},
                                {"hit_probability", rep.anchor_hits[a].second},
                                {"stderr", rep.anchor_std_errors[a]}});
      csv.row("support:anchor@" + format_point(rep.anchor_hits[a].first), n, c.t, "all",
              rep.anchor_hits[a].second, rep.anchor_std_errors[a]);
    }
    j["sweep"].push_back(row);
  }
  return c.format == "csv" ? csv.str() : finish(j);
}

std::string run_dust(const ExperimentConfig& c) {
  const FvSetup setup = make_setup(c);
  const auto rep = dust_regime_probe(setup, c.t);
  if (c.format == "csv") {
    LongCsv csv(c);
    csv.row("dust:singleton_fraction", c.n, c.t, "all", rep.singleton_fraction, rep.singleton_std_error);
    csv.row("dust:ks_p_value", c.n, c.t, "all", rep.ks_p_value, 0.0);
    return csv.str();
  }
  json j = header(c);
  j["singleton_fraction"] = rep.singleton_fraction;
  j["singleton_stderr"] = rep.singleton_std_error;
  j["displacement_samples"] = rep.displacement_samples;
  j["ks_statistic"] = rep.ks_statistic;
  j["ks_p_value"] = rep.ks_p_value;
  j["full_collapse_replicas"] = rep.full_collapse_replicas;
  j["collapse_violations"] = rep.collapse_violations;
  return finish(j);
}

std::string run_bounds(const ExperimentConfig& c) {
  const FvSetup setup = make_setup(c);
  const double s = c.s < 0.0 ? 0.5 * c.t : c.s;
  const auto mass = cluster_mass_bound_check(setup, c.t, s, parse_ball(c.ball), c.inner, c.min_stratum);
  std::vector<Point> set;
  if (!c.set.empty()) {
    set = parse_points(c.set);
  } else {
    Engine rng = make_stream(c.seed, 0, 99);
    set.push_back(setup.mu0.sample(rng));
  }
  const auto hit = cluster_hit_bound_check(setup, c.t, set, c.eps, c.b, 200000, c.min_stratum);
  if (c.format == "csv") {
    LongCsv csv(c);
    for (const auto* rep : {&mass, &hit}) {
      const std::string name = rep == &mass ? "bounds:cluster_mass" : "bounds:cluster_hit";
      for (const auto& st : rep->strata) {
        csv.row(name + ":" + st.label, c.n, c.t, st.degenerate ? "degenerate" : "all", st.frequency,
                st.std_error);
      }
    }
    return csv.str();
  }
  json j = header(c);
  j["cluster_mass"] = bound_json(mass);
  j["cluster_hit"] = bound_json(hit);
  return finish(j);
}

std::string run_genealogy(const ExperimentConfig& c) {
  const auto lambda = parse_lambda(c.lambda);
  const int n = c.n;
  if (n < 2 || n > 16) throw std::invalid_argument("genealogy preset needs 2 <= n <= 16");
  const double rate = total_event_rate(lambda, n);
  if (!(rate > 0.0)) throw std::invalid_argument("genealogy preset needs a nonzero Lambda");
  const int cells_per_set = 11;  // 10 deciles + no event
  auto time_bin = [&](double tau, double r) {
    if (!std::isfinite(tau)) return 10;
    const double u = -std::expm1(-r * tau);
    return std::min(9, static_cast<int>(u * 10.0));
  };
  const std::size_t subsets = std::size_t{1} << n;
  std::vector<long long> from_lookdown(subsets * cells_per_set, 0), from_coalescent(subsets * cells_per_set, 0);

  const LookdownDriver driver(lambda, n);
  const LevySpec still = LevySpec::none(1);
  const InitialLaw origin = InitialLaw::point(Point::Zero(1));
  LookdownOptions opts;
  opts.event_cap = c.event_cap;
  long violations = 0;
  const auto look = run_replicas<std::pair<std::size_t, long>>(c.replicas, c.workers, [&](long r) {
    Engine rng = make_stream(c.seed, static_cast<std::uint64_t>(r), 1);
    const auto traj = simulate_lookdown(driver, still, origin, {c.t}, rng, opts);
    const auto& log = traj.events();
    std::size_t cell = 10;
    if (!log.empty()) {
      const auto e = log[log.size() - 1];
      std::size_t mask = 0;
      for (int l : e.levels) mask |= std::size_t{1} << (l - 1);
      cell = mask * cells_per_set + static_cast<std::size_t>(time_bin(c.t - e.time, rate));
    }
    // Labels equal ancestor levels block by block.
    const double s = uniform01(rng) * c.t;
    const auto anc = ancestral_partition(traj, c.t, s);
    long bad = 0;
    for (std::size_t i = 0; i < anc.blocks.block_count(); ++i) {
      for (int level : anc.blocks.block(i)) {
        if (anc.ancestor_level[level - 1] != static_cast<int>(i) + 1) ++bad;
      }
    }
    return std::pair<std::size_t, long>{cell, bad};
  });
  for (const auto& [cell, bad] : look) {
    ++from_lookdown[cell];
    violations += bad;
  }
  const MergerRateTable table(lambda, n);
  const auto coal = run_replicas<std::size_t>(c.replicas, c.workers, [&](long r) {
    Engine rng = make_stream(c.seed, static_cast<std::uint64_t>(r), 2);
    const auto path = simulate_coalescent(table, n, c.t, rng);
    if (path.events().empty()) return std::size_t{10};
    const auto& e = path.events().front();
    std::size_t mask = 0;
    for (std::size_t p : e.blocks) mask |= std::size_t{1} << p;
    return mask * cells_per_set + static_cast<std::size_t>(time_bin(e.time, rate));
  });
  for (std::size_t cell : coal) ++from_coalescent[cell];
  const auto duality = stats::chi_square_homogeneity(from_lookdown, from_coalescent);

  json j = header(c);
  j["duality"] = {{"statistic", duality.statistic}, {"dof", duality.dof}, {"p_value", duality.p_value}};
  j["label_violations"] = violations;

  const LambdaMeasure multi = lambda.without_kingman();
  if (!multi.is_zero()) {
    const LookdownDriver subset(multi, n);
    const validation::ThinningEventSampler thinning(multi, n);
    const int sizes = n + 1;
    std::vector<long long> a(static_cast<std::size_t>(10 * sizes), 0), b(a.size(), 0);
    Engine ra = make_stream(c.seed, 0, 3);
    Engine rb = make_stream(c.seed, 0, 4);
    std::vector<int> levels;
    const double ref = subset.total_rate();
    for (long r = 0; r < c.replicas; ++r) {
      const double wait = exponential(ra, subset.total_rate());
      subset.sample_event(ra, levels);
      ++a[static_cast<std::size_t>(time_bin(wait, ref) * sizes + static_cast<int>(levels.size()))];
      const auto d = thinning.next(rb);
      ++b[static_cast<std::size_t>(time_bin(d.waiting_time, ref) * sizes + static_cast<int>(d.levels.size()))];
    }
    const auto eq = stats::chi_square_homogeneity(a, b);
    j["event_scheme"] = {{"subset_rate", subset.total_rate()},
                         {"thinning_rate", thinning.total_rate()},
                         {"statistic", eq.statistic},
                         {"dof", eq.dof},
                         {"p_value", eq.p_value}};
  }
  if (c.format == "csv") {
    LongCsv csv(c);
    csv.row("genealogy:duality_p", n, c.t, "all", duality.p_value, 0.0);
    csv.row("genealogy:label_violations", n, c.t, "all", static_cast<double>(violations), 0.0);
    if (j.contains("event_scheme")) {
      csv.row("genealogy:event_scheme_p", n, c.t, "all", j["event_scheme"]["p_value"].get<double>(), 0.0);
    }
    return csv.str();
  }
  return finish(j);
}

std::string run_coalescent(const ExperimentConfig& c) {
  const auto lambda = parse_lambda(c.lambda);
  std::ostringstream out;
  if (c.lookdown) {
    const auto levy = parse_levy(c.levy);
    const auto mu0 = parse_initial_law(c.mu0, levy.dimension());
    LookdownOptions opts;
    opts.event_cap = c.event_cap;
    for (long r = 0; r < c.replicas; ++r) {
      Engine rng = make_stream(c.seed, static_cast<std::uint64_t>(r), 1);
      const auto traj = simulate_lookdown(c.n, lambda, levy, mu0, {c.t}, rng, opts);
      EventLog log = traj.events();
      log.seed = c.seed;
      log.lambda_spec = c.lambda;
      log.levy_spec = c.levy;
      out << log.serialize();
    }
    return out.str();
  }
  const MergerRateTable table(lambda, std::max(c.n, 2));
  out << "# fvlab-coalescent v1\n";
  out << "n " << c.n << "\nseed " << c.seed << "\nlambda " << c.lambda << "\nhorizon "
      << fmt(c.t) << '\n';
  for (long r = 0; r < c.replicas; ++r) {
    Engine rng = make_stream(c.seed, static_cast<std::uint64_t>(r), 1);
    const auto path = simulate_coalescent(table, c.n, c.t, rng);
    out << "replica " << r << " events " << path.events().size() << '\n';
    for (const auto& e : path.events()) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", e.time);
      out << buf << ' ';
      for (std::size_t i = 0; i < e.blocks.size(); ++i) out << (i ? "," : "") << e.blocks[i] + 1;
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, f] : fields()) k.push_back(name);
    return k;
  }();
  return keys;
}

void set_config_field(ExperimentConfig& config, const std::string& key, const std::string& value) {
  const std::string k = normalize_key(key);
  for (const auto& [name, field] : fields()) {
    if (name == k) {
      field.set(config, value);
      return;
    }
  }
  throw std::invalid_argument("unknown config key '" + key + "'");
}

std::map<std::string, std::string> read_config_file(const std::string& path,
                                                    const std::string& experiment) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::map<std::string, std::string> general, specific;
  std::string section;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string s = detail::trim(line);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": bad section");
      section = detail::lower(detail::trim(s.substr(1, s.size() - 2)));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = normalize_key(s.substr(0, eq));
    const std::string value = detail::trim(s.substr(eq + 1));
    if (section.empty() || section == "global") {
      general[key] = value;
    } else if (section == experiment) {
      specific[key] = value;
    }
  }
  for (const auto& [k, v] : specific) general[k] = v;
  return general;
}

std::vector<double> parse_time_grid(std::string_view spec) {
  const auto colon = spec.find(':');
  const std::string kind = colon == std::string_view::npos ? "" : detail::lower(detail::trim(spec.substr(0, colon)));
  std::vector<double> out;
  if (kind == "geo" || kind == "lin") {
    const auto parts = detail::split(spec.substr(colon + 1), ',');
    if (parts.size() != 3) throw std::invalid_argument("time grid must be <kind>:<lo>,<hi>,<count>");
    const double lo = detail::parse_double(parts[0], "grid start");
    const double hi = detail::parse_double(parts[1], "grid end");
    const long long count = detail::parse_int(parts[2], "grid count");
    if (count < 1 || !(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("bad time grid");
    for (long long i = 0; i < count; ++i) {
      const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
      out.push_back(kind == "geo" ? lo * std::pow(hi / lo, f) : lo + (hi - lo) * f);
    }
    return out;
  }
  for (const auto& x : detail::split(spec, ',')) out.push_back(detail::parse_double(x, "time"));
  if (out.empty()) throw std::invalid_argument("empty time grid");
  for (double t : out) {
    if (!(t > 0.0)) throw std::invalid_argument("grid times must be positive");
  }
  return out;
}

std::string run_experiment(const ExperimentConfig& config) {
  if (!(config.t > 0.0)) throw std::invalid_argument("t must be positive");
  const std::string& e = config.experiment;
  if (e == "rates") return run_rates(config);
  if (e == "speed") return run_speed(config);
  if (e == "moments") return run_moments(config);
  if (e == "support") return run_support(config);
  if (e == "dust") return run_dust(config);
  if (e == "bounds") return run_bounds(config);
  if (e == "genealogy") return run_genealogy(config);
  if (e == "coalescent") return run_coalescent(config);
  throw std::invalid_argument("unknown experiment '" + e + "'");
}

}  // namespace fvlab
