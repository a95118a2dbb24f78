#include "fvlab/fv_process.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "fvlab/coalescent.hpp"
#include "fvlab/replicas.hpp"
#include "fvlab/stats.hpp"

namespace fvlab {

namespace {

// Stream salts keep the independent Monte Carlo pieces apart.
constexpr std::uint64_t kSaltLookdown = 1;
constexpr std::uint64_t kSaltTargetPhi = 2;
constexpr std::uint64_t kSaltTargetPsi = 3;
constexpr std::uint64_t kSaltSmallBall = 4;
constexpr std::uint64_t kSaltReference = 5;
constexpr std::uint64_t kSaltGridNode = 1000;

LookdownOptions options_for(const FvSetup& setup, bool record) {
  LookdownOptions o;
  o.record_events = record;
  o.event_cap = setup.event_cap;
  return o;
}

stats::MeanAccumulator target_mean(const FvSetup& setup, double t, const TestFunction& phi,
                                   long samples, std::uint64_t salt) {
  Engine rng = make_stream(setup.seed, 0, salt);
  stats::MeanAccumulator acc;
  for (long i = 0; i < samples; ++i) {
    Point x = setup.mu0.sample(rng);
    add_increment(setup.levy, t, rng, x);
    acc.add(phi(x));
  }
  return acc;
}

void check_setup(const FvSetup& setup, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("t must be positive");
  if (setup.replicas < 1) throw std::invalid_argument("need at least one replica");
  if (setup.levy.dimension() != setup.mu0.dimension()) {
    throw std::invalid_argument("initial law and mutation dimensions differ");
  }
}

}  // namespace

double pair_coalescence_rate(const LambdaMeasure& lambda) { return lambda.total_mass(); }

double MomentReport::extra(const std::string& key) const {
  for (const auto& [k, v] : extras) {
    if (k == key) return v;
  }
  throw std::out_of_range("no extra named " + key);
}

MomentReport first_moment_check(const FvSetup& setup, double t, const TestFunction& phi,
                                long target_samples) {
  check_setup(setup, t);
  const LookdownDriver driver(setup.lambda, setup.n);
  const auto opts = options_for(setup, false);
  const auto values = run_replicas<double>(setup.replicas, setup.workers, [&](long r) {
    Engine rng = make_stream(setup.seed, static_cast<std::uint64_t>(r), kSaltLookdown);
    const auto traj = simulate_lookdown(driver, setup.levy, setup.mu0, {t}, rng, opts);
    return empirical_measure(traj, t).integrate(phi);
  });
  stats::MeanAccumulator lhs;
  for (double v : values) lhs.add(v);
  const auto rhs = target_mean(setup, t, phi, target_samples, kSaltTargetPhi);

  MomentReport rep;
  rep.observable = "first moment <phi, Z_t>";
  rep.estimate = lhs.mean();
  rep.std_error = lhs.stderr_of_mean();
  rep.target = rhs.mean();
  rep.target_std_error = rhs.stderr_of_mean();
  rep.z = stats::z_score(rep.estimate, rep.std_error, rep.target, rep.target_std_error);
  return rep;
}

namespace {

// Weights of G(s_j) in int_0^t sigma e^{-sigma s} G(s) ds for G linear between nodes.
std::vector<double> exponential_trapezoid_weights(double sigma, double t, int intervals) {
  std::vector<double> w(static_cast<std::size_t>(intervals) + 1, 0.0);
  const double h = t / intervals;
  const double x = sigma * h;
  // g(x) = (1 - e^{-x}(1 + x)) / x, the right-node share per unit e^{-sigma a}.
  const double g = x < 1e-3 ? x * (0.5 - x * (1.0 / 3.0 - x / 8.0))
                            : (-std::expm1(-x) - x * std::exp(-x)) / x;
  const double mass = -std::expm1(-x);
  for (int j = 0; j < intervals; ++j) {
    const double ea = std::exp(-sigma * j * h);
    const double right = ea * g;
    w[j] += ea * mass - right;
    w[j + 1] += right;
  }
  return w;
}

}  // namespace

MomentReport second_moment_check(const FvSetup& setup, double t, const TestFunction& phi,
                                 const TestFunction& psi, const SecondMomentOptions& options) {
  check_setup(setup, t);
  if (setup.n < 2) throw std::invalid_argument("the U-statistic needs n >= 2");
  if (options.grid < 1) throw std::invalid_argument("grid must have at least one interval");
  const LookdownDriver driver(setup.lambda, setup.n);
  const auto opts = options_for(setup, false);
  struct Pair {
    double ustat = 0.0;
    double plain = 0.0;
  };
  const double n = setup.n;
  const auto values = run_replicas<Pair>(setup.replicas, setup.workers, [&](long r) {
    Engine rng = make_stream(setup.seed, static_cast<std::uint64_t>(r), kSaltLookdown);
    const auto traj = simulate_lookdown(driver, setup.levy, setup.mu0, {t}, rng, opts);
    const auto& pos = traj.positions_at(t);
    stats::CompensatedSum sp, sq, spq;
    for (int k = 0; k < setup.n; ++k) {
      const double a = phi(pos.col(k));
      const double b = psi(pos.col(k));
      sp.add(a);
      sq.add(b);
      spq.add(a * b);
    }
    return Pair{(sp.value() * sq.value() - spq.value()) / (n * (n - 1.0)),
                sp.value() * sq.value() / (n * n)};
  });
  stats::MeanAccumulator lhs, plain;
  for (const auto& v : values) {
    lhs.add(v.ustat);
    plain.add(v.plain);
  }

  const double sigma = pair_coalescence_rate(setup.lambda);
  const double decay = std::exp(-sigma * t);
  const auto a_phi = target_mean(setup, t, phi, options.target_samples, kSaltTargetPhi);
  const auto a_psi = target_mean(setup, t, psi, options.target_samples, kSaltTargetPsi);
  const double head = decay * a_phi.mean() * a_psi.mean();
  const double head_se = decay * std::hypot(a_psi.mean() * a_phi.stderr_of_mean(),
                                            a_phi.mean() * a_psi.stderr_of_mean());

  // G(s) = <T_{t-s}(T_s phi T_s psi), mu0> on the grid.
  const int grid = options.grid;
  std::vector<double> g(static_cast<std::size_t>(grid) + 1, 0.0);
  std::vector<double> g_se(g.size(), 0.0);
  if (sigma > 0.0) {
    for (int j = 0; j <= grid; ++j) {
      const double s = t * j / grid;
      Engine rng = make_stream(setup.seed, static_cast<std::uint64_t>(j), kSaltGridNode);
      stats::MeanAccumulator acc;
      for (long i = 0; i < options.node_samples; ++i) {
        Point y = setup.mu0.sample(rng);
        add_increment(setup.levy, t - s, rng, y);
        Point a = y;
        Point b = y;
        add_increment(setup.levy, s, rng, a);
        add_increment(setup.levy, s, rng, b);
        acc.add(phi(a) * psi(b));
      }
      g[j] = acc.mean();
      g_se[j] = acc.stderr_of_mean();
    }
  }
  auto integrate = [&](int stride) {
    const int intervals = grid / stride;
    const auto w = exponential_trapezoid_weights(sigma, t, intervals);
    stats::CompensatedSum sum;
    double var = 0.0;
    for (int j = 0; j <= intervals; ++j) {
      sum.add(w[j] * g[j * stride]);
      var += w[j] * w[j] * g_se[j * stride] * g_se[j * stride];
    }
    return std::pair<double, double>{sum.value(), std::sqrt(var)};
  };
  std::pair<double, double> tail{0.0, 0.0};
  double tail_coarse = 0.0;
  const bool constant_g = std::all_of(g.begin(), g.end(), [&](double v) { return v == g[0]; }) &&
                          std::all_of(g_se.begin(), g_se.end(), [](double v) { return v == 0.0; });
  if (sigma > 0.0 && constant_g) {
    // Exact integral of a constant.
    tail = {g[0] * (1.0 - decay), 0.0};
    tail_coarse = tail.first;
  } else if (sigma > 0.0) {
    tail = integrate(1);
    tail_coarse = grid % 2 == 0 ? integrate(2).first : tail.first;
  }

  MomentReport rep;
  rep.observable = "second moment <phi, Z_t><psi, Z_t>";
  rep.estimate = lhs.mean();
  rep.std_error = lhs.stderr_of_mean();
  // Written as g0 - decay (g0 - A_phi A_psi) for a constant G so that phi = psi = 1 gives exactly 1.
  rep.target = constant_g && sigma > 0.0 ? g[0] - decay * (g[0] - a_phi.mean() * a_psi.mean())
                                         : head + tail.first;
  rep.target_std_error = std::hypot(head_se, tail.second);
  rep.z = stats::z_score(rep.estimate, rep.std_error, rep.target, rep.target_std_error);
  const double bound = decay * a_phi.mean() * a_phi.mean() +
                       options.phi_sup * (1.0 - decay) * a_phi.mean();
  const double bound_se = std::abs(2.0 * decay * a_phi.mean() + options.phi_sup * (1.0 - decay)) *
                          a_phi.stderr_of_mean();
  rep.extras = {{"sigma", sigma},
                {"grid", static_cast<double>(grid)},
                {"integral", tail.first},
                {"integral_half_grid", tail_coarse},
                {"plain_product_mean", plain.mean()},
                {"plain_product_stderr", plain.stderr_of_mean()},
                {"bound", bound},
                {"bound_stderr", bound_se}};
  return rep;
}

namespace {

struct Record {
  double key;
  double bound;
  bool event;
};

// Consecutive strata of roughly equal size in key order; ties never split.
std::vector<Stratum> stratify(std::vector<Record> records, int pieces, long min_stratum,
                              std::vector<std::string>& warnings, bool label_by_key_value) {
  std::sort(records.begin(), records.end(), [](const Record& a, const Record& b) {
    return a.key < b.key;
  });
  std::vector<Stratum> out;
  const std::size_t total = records.size();
  std::size_t start = 0;
  for (int piece = 1; start < total; ++piece) {
    std::size_t stop = label_by_key_value ? start + 1 : std::max(start + 1, total * piece / pieces);
    stop = std::min(stop, total);
    while (stop < total && records[stop].key == records[stop - 1].key) ++stop;
    Stratum st;
    long events = 0;
    double bound_sum = 0.0;
    for (std::size_t i = start; i < stop; ++i) {
      events += records[i].event ? 1 : 0;
      bound_sum += records[i].bound;
    }
    st.samples = static_cast<long>(stop - start);
    st.frequency = static_cast<double>(events) / st.samples;
    st.std_error = stats::binomial_stderr(st.frequency, static_cast<std::size_t>(st.samples));
    st.bound = bound_sum / st.samples;
    char buf[96];
    if (label_by_key_value) {
      std::snprintf(buf, sizeof buf, "N=%g", records[start].key);
    } else {
      std::snprintf(buf, sizeof buf, "p in [%.4g, %.4g]", records[start].key, records[stop - 1].key);
    }
    st.label = buf;
    if (st.samples < min_stratum) {
      st.degenerate = true;
      warnings.push_back("stratum " + st.label + " skipped: only " + std::to_string(st.samples) +
                         " samples");
    } else {
      st.passed = st.frequency >= st.bound - 3.0 * st.std_error;
    }
    out.push_back(st);
    start = stop;
  }
  return out;
}

BoundReport summarize(std::string observable, const std::vector<Record>& records,
                      std::vector<Stratum> strata, std::vector<std::string> warnings) {
  BoundReport rep;
  rep.observable = std::move(observable);
  rep.total_samples = static_cast<long>(records.size());
  long events = 0;
  double bound = 0.0;
  for (const auto& r : records) {
    events += r.event ? 1 : 0;
    bound += r.bound;
  }
  if (!records.empty()) {
    rep.overall_frequency = static_cast<double>(events) / records.size();
    rep.overall_bound = bound / records.size();
  }
  rep.strata = std::move(strata);
  rep.warnings = std::move(warnings);
  rep.passed = std::all_of(rep.strata.begin(), rep.strata.end(),
                           [](const Stratum& s) { return s.degenerate || s.passed; });
  return rep;
}

}  // namespace

BoundReport cluster_mass_bound_check(const FvSetup& setup, double t, double s, const BallQuery& ball,
                                     long inner, long min_stratum) {
  check_setup(setup, t);
  if (!(s > 0.0) || s > t) throw std::invalid_argument("need 0 < s <= t");
  const LookdownDriver driver(setup.lambda, setup.n);
  const auto opts = options_for(setup, true);
  const double back = t - s;
  const auto per_replica = run_replicas<std::vector<Record>>(setup.replicas, setup.workers, [&](long r) {
    Engine rng = make_stream(setup.seed, static_cast<std::uint64_t>(r), kSaltLookdown);
    const std::vector<double> times = back > 0.0 ? std::vector<double>{back, t} : std::vector<double>{0.0, t};
    const auto traj = simulate_lookdown(driver, setup.levy, setup.mu0, times, rng, opts);
    const auto ancestry = ancestral_partition(traj, t, s);
    const auto& then = traj.positions_at(times.front());
    const auto& now = traj.positions_at(t);
    std::vector<Record> out;
    for (std::size_t i = 0; i < ancestry.blocks.block_count(); ++i) {
      const auto& block = ancestry.blocks.block(i);
      const int ancestor = ancestry.ancestor_level[block.front() - 1];
      const Point origin = then.col(ancestor - 1);
      long inside = 0;
      Point y(origin.size());
      for (long j = 0; j < inner; ++j) {
        y = origin;
        add_increment(setup.levy, s, rng, y);
        if (ball.contains(y)) ++inside;
      }
      const double p = static_cast<double>(inside) / inner;
      long members_in = 0;
      for (int level : block) {
        if (ball.contains(now.col(level - 1))) ++members_in;
      }
      // Z_{i,s}(t,B) >= p |pi_i| / 2, both sides scaled by n.
      out.push_back({p, 0.5 * p, members_in >= 0.5 * p * static_cast<double>(block.size())});
    }
    return out;
  });
  std::vector<Record> records;
  for (const auto& v : per_replica) records.insert(records.end(), v.begin(), v.end());
  std::vector<std::string> warnings;
  auto strata = stratify(records, 10, min_stratum, warnings, false);
  return summarize("cluster mass Z_{i,s}(t,B) >= p|pi_i|/2", records, std::move(strata),
                   std::move(warnings));
}

BoundReport cluster_hit_bound_check(const FvSetup& setup, double t, const std::vector<Point>& set,
                                    double eps, double b, long p_samples, long min_stratum) {
  check_setup(setup, t);
  if (!(b > 0.0 && b <= 0.5)) throw std::invalid_argument("b must lie in (0, 1/2]");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  Engine prng = make_stream(setup.seed, 0, kSaltSmallBall);
  const double p = small_ball_prob(setup.levy, t, eps, p_samples, prng).value;
  double mu_b = 0.0;
  if (setup.mu0.kind() != InitialLaw::Kind::normal) {
    const auto initial = setup.mu0.as_measure();
    for (const auto& a : initial.atoms()) {
      if (std::any_of(set.begin(), set.end(), [&](const Point& x) { return x == a.point; })) {
        mu_b += a.weight;
      }
    }
  }
  const Enlargement enlarged{set, eps};
  const LookdownDriver driver(setup.lambda, setup.n);
  const auto opts = options_for(setup, true);
  const auto records = run_replicas<Record>(setup.replicas, setup.workers, [&](long r) {
    Engine rng = make_stream(setup.seed, static_cast<std::uint64_t>(r), kSaltLookdown);
    const auto traj = simulate_lookdown(driver, setup.levy, setup.mu0, {t}, rng, opts);
    const auto ancestry = ancestral_partition(traj, t, t);
    long big = 0;
    for (const auto& block : ancestry.blocks.blocks()) {
      if (static_cast<double>(block.size()) >= 2.0 * b * setup.n * (1.0 - 1e-12)) ++big;
    }
    const double mass = empirical_measure(traj, t).mass_in(enlarged);
    const double bound = 1.0 - std::pow(1.0 - 0.5 * mu_b * p, static_cast<double>(big));
    return Record{static_cast<double>(big), bound, mass >= b * p};
  });
  std::vector<std::string> warnings;
  auto strata = stratify(records, 0, min_stratum, warnings, true);
  auto rep = summarize("Z(t,B_eps) >= b p(t,eps)", records, std::move(strata), std::move(warnings));
  return rep;
}

SupportReport support_propagation_probe(const FvSetup& setup, double t, int k, double eps,
                                        const std::vector<Point>& anchors, double weight_floor) {
  check_setup(setup, t);
  const auto& jumps = setup.levy.point_jumps();
  if (!jumps || setup.levy.stable_jumps()) {
    throw std::invalid_argument("support probe needs a finite point-mass jump measure");
  }
  const LookdownDriver driver(setup.lambda, setup.n);
  const auto opts = options_for(setup, false);
  struct Outcome {
    double fraction = 0.0;
    std::vector<char> anchor_hit;
  };
  const auto outcomes = run_replicas<Outcome>(setup.replicas, setup.workers, [&](long r) {
    Engine rng = make_stream(setup.seed, static_cast<std::uint64_t>(r), kSaltLookdown);
    const auto traj = simulate_lookdown(driver, setup.levy, setup.mu0, {t}, rng, opts);
    const auto z = empirical_measure(traj, t).compacted();
    const auto conv = convolve_support(*jumps, z, k);
    double hit = 0.0, total = 0.0;
    for (const auto& a : conv.atoms()) {
      if (a.weight < weight_floor) continue;
      total += a.weight;
      if (z.charges({a.point, eps})) hit += a.weight;
    }
    Outcome o;
    o.fraction = total > 0.0 ? hit / total : 1.0;
    for (const auto& y : anchors) o.anchor_hit.push_back(z.charges({y, eps}) ? 1 : 0);
    return o;
  });
  SupportReport rep;
  rep.n = setup.n;
  stats::MeanAccumulator frac;
  for (const auto& o : outcomes) frac.add(o.fraction);
  rep.hit_fraction = frac.mean();
  rep.std_error = frac.stderr_of_mean();
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    long hits = 0;
    for (const auto& o : outcomes) hits += o.anchor_hit[a];
    const double q = static_cast<double>(hits) / outcomes.size();
    rep.anchor_hits.emplace_back(anchors[a], q);
    rep.anchor_std_errors.push_back(stats::binomial_stderr(q, outcomes.size()));
  }
  return rep;
}

DustReport dust_regime_probe(const FvSetup& setup, double t, long reference_samples) {
  check_setup(setup, t);
  if (has_dust(setup.lambda) != Verdict::yes) {
    throw std::domain_error("dust probe requires a measure with dust");
  }
  const LookdownDriver driver(setup.lambda, setup.n);
  const auto opts = options_for(setup, true);
  struct Outcome {
    double singleton_fraction = 0.0;
    std::vector<double> displacements;
    bool full_event = false;
    bool collapsed = false;
  };
  const auto outcomes = run_replicas<Outcome>(setup.replicas, setup.workers, [&](long r) {
    Engine rng = make_stream(setup.seed, static_cast<std::uint64_t>(r), kSaltLookdown);
    const auto traj = simulate_lookdown(driver, setup.levy, setup.mu0, {t}, rng, opts);
    const auto ancestry = ancestral_partition(traj, t, t);
    const auto& now = traj.positions_at(t);
    Outcome o;
    long singles = 0;
    for (const auto& block : ancestry.blocks.blocks()) {
      if (block.size() != 1) continue;
      ++singles;
      const int level = block.front();
      const int ancestor = ancestry.ancestor_level[level - 1];
      o.displacements.push_back(now(0, level - 1) - traj.initial_positions()(0, ancestor - 1));
    }
    o.singleton_fraction = static_cast<double>(singles) / setup.n;
    const auto& log = traj.events();
    for (std::size_t e = 0; e < log.size(); ++e) {
      if (static_cast<int>(log[e].levels.size()) == setup.n && setup.n > 1) o.full_event = true;
    }
    o.collapsed = ancestry.blocks.block_count() == 1;
    return o;
  });
  DustReport rep;
  stats::MeanAccumulator frac;
  std::vector<double> sample;
  for (const auto& o : outcomes) {
    frac.add(o.singleton_fraction);
    sample.insert(sample.end(), o.displacements.begin(), o.displacements.end());
    if (o.full_event) {
      ++rep.full_collapse_replicas;
      if (!o.collapsed) ++rep.collapse_violations;
    }
  }
  rep.singleton_fraction = frac.mean();
  rep.singleton_std_error = frac.stderr_of_mean();
  rep.displacement_samples = static_cast<long>(sample.size());
  if (!sample.empty()) {
    Engine rng = make_stream(setup.seed, 0, kSaltReference);
    std::vector<double> reference;
    reference.reserve(static_cast<std::size_t>(reference_samples));
    for (long i = 0; i < reference_samples; ++i) reference.push_back(sample_increment(setup.levy, t, rng)[0]);
    const auto ks = stats::ks_two_sample(sample, reference);
    rep.ks_statistic = ks.statistic;
    rep.ks_p_value = ks.p_value;
  }
  return rep;
}

}  // namespace fvlab
