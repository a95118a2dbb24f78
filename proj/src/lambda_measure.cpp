#include "fvlab/lambda_measure.hpp"

#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fvlab/quadrature.hpp"
#include "parse_util.hpp"

namespace fvlab {

namespace {

void require_mass(double m, const char* what) {
  if (!(m >= 0.0) || !std::isfinite(m)) {
    throw std::invalid_argument(std::string(what) + ": mass must be finite and nonnegative");
  }
}

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

}  // namespace

LambdaMeasure LambdaMeasure::kingman(double mass) { return LambdaMeasure{}.add_kingman(mass); }
LambdaMeasure LambdaMeasure::top(double mass) { return LambdaMeasure{}.add_top(mass); }
LambdaMeasure LambdaMeasure::atom(double location, double mass) {
  return LambdaMeasure{}.add_atom(location, mass);
}
LambdaMeasure LambdaMeasure::beta(double alpha, double mass) {
  return LambdaMeasure{}.add_beta(alpha, mass);
}
LambdaMeasure LambdaMeasure::uniform(double mass) { return LambdaMeasure{}.add_beta(1.0, mass); }
LambdaMeasure LambdaMeasure::density(std::function<double(double)> f, std::string label) {
  return LambdaMeasure{}.add_density(std::move(f), std::move(label));
}

LambdaMeasure& LambdaMeasure::add_kingman(double mass) {
  require_mass(mass, "kingman");
  kingman_mass_ += mass;
  return *this;
}

LambdaMeasure& LambdaMeasure::add_top(double mass) {
  require_mass(mass, "top");
  top_mass_ += mass;
  return *this;
}

LambdaMeasure& LambdaMeasure::add_atom(double location, double mass) {
  require_mass(mass, "atom");
  if (!(location > 0.0 && location < 1.0)) {
    throw std::invalid_argument("atom location must lie strictly inside (0, 1)");
  }
  if (mass > 0.0) atoms_.push_back({location, mass});
  return *this;
}

LambdaMeasure& LambdaMeasure::add_beta(double alpha, double mass) {
  require_mass(mass, "beta");
  if (!(alpha > 0.0 && alpha < 2.0)) {
    throw std::invalid_argument("beta family requires alpha in (0, 2)");
  }
  if (mass > 0.0) betas_.push_back({alpha, mass});
  return *this;
}

LambdaMeasure& LambdaMeasure::add_density(std::function<double(double)> f, std::string label) {
  if (!f) throw std::invalid_argument("density component needs a function");
  DensityComponent c{std::move(f), std::move(label), 0.0};
  c.mass = quad::unit_interval([&](double x, double) { return c.density(x); });
  if (!(c.mass >= 0.0) || !std::isfinite(c.mass)) {
    throw std::invalid_argument("density component is not integrable on (0, 1)");
  }
  densities_.push_back(std::move(c));
  return *this;
}

LambdaMeasure operator+(LambdaMeasure a, const LambdaMeasure& b) {
  a.kingman_mass_ += b.kingman_mass_;
  a.top_mass_ += b.top_mass_;
  a.atoms_.insert(a.atoms_.end(), b.atoms_.begin(), b.atoms_.end());
  a.betas_.insert(a.betas_.end(), b.betas_.begin(), b.betas_.end());
  a.densities_.insert(a.densities_.end(), b.densities_.begin(), b.densities_.end());
  return a;
}

double LambdaMeasure::interior_mass() const {
  double m = 0.0;
  for (const auto& a : atoms_) m += a.mass;
  for (const auto& b : betas_) m += b.mass;
  for (const auto& d : densities_) m += d.mass;
  return m;
}

LambdaMeasure LambdaMeasure::without_kingman() const {
  LambdaMeasure copy = *this;
  copy.kingman_mass_ = 0.0;
  return copy;
}

double LambdaMeasure::interior_density(double x, double one_minus_x) const {
  double total = 0.0;
  for (const auto& b : betas_) {
    const double a = b.alpha;
    total += b.mass * std::exp((1.0 - a) * std::log(x) + (a - 1.0) * std::log(one_minus_x) -
                               log_beta(2.0 - a, a));
  }
  for (const auto& d : densities_) total += d.density(x);
  return total;
}

std::string LambdaMeasure::to_string() const {
  std::vector<std::string> parts;
  auto num = [](double v) { return detail::format_double(v); };
  if (kingman_mass_ > 0.0) parts.push_back("kingman:" + num(kingman_mass_));
  for (const auto& b : betas_) {
    parts.push_back("beta:" + num(b.alpha) + ":" + num(b.mass));
  }
  if (!atoms_.empty()) {
    std::string s = "atoms:";
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (i) s += ",";
      s += num(atoms_[i].mass) + "@" + num(atoms_[i].location);
    }
    parts.push_back(s);
  }
  if (top_mass_ > 0.0) parts.push_back("top:" + num(top_mass_));
  for (const auto& d : densities_) parts.push_back("density:" + d.label);
  if (parts.empty()) return "zero";
  std::string out = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) out += "+" + parts[i];
  return out;
}

LambdaMeasure parse_lambda(std::string_view spec) {
  LambdaMeasure result;
  for (const auto& term : detail::split_terms(spec)) {
    const auto colon = term.find(':');
    const std::string name = detail::lower(detail::trim(term.substr(0, colon)));
    const std::string body = colon == std::string::npos ? "" : detail::trim(term.substr(colon + 1));
    if (name == "zero") {
      continue;
    } else if (name == "kingman") {
      result.add_kingman(body.empty() ? 1.0 : detail::parse_double(body, "kingman mass"));
    } else if (name == "top") {
      result.add_top(body.empty() ? 1.0 : detail::parse_double(body, "top mass"));
    } else if (name == "uniform") {
      result.add_beta(1.0, body.empty() ? 1.0 : detail::parse_double(body, "uniform mass"));
    } else if (name == "beta") {
      const auto fields = detail::split(body, ':');
      if (fields.empty() || fields.size() > 2) {
        throw std::invalid_argument("beta spec must be beta:<alpha>[:<mass>]");
      }
      const double alpha = detail::parse_double(fields[0], "beta alpha");
      const double mass = fields.size() == 2 ? detail::parse_double(fields[1], "beta mass") : 1.0;
      result.add_beta(alpha, mass);
    } else if (name == "atoms") {
      for (const auto& item : detail::split(body, ',')) {
        const auto at = item.find('@');
        if (at == std::string::npos) throw std::invalid_argument("atom must be <mass>@<location>");
        const double mass = detail::parse_double(item.substr(0, at), "atom mass");
        const double loc = detail::parse_double(item.substr(at + 1), "atom location");
        if (loc == 0.0) {
          result.add_kingman(mass);
        } else if (loc == 1.0) {
          result.add_top(mass);
        } else {
          result.add_atom(loc, mass);
        }
      }
    } else {
      throw std::invalid_argument("unknown lambda component '" + name + "'");
    }
  }
  return result;
}

}  // namespace fvlab
