#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace fvlab {

/// Point mass inside the open unit interval.
struct InteriorAtom {
  double location = 0.5;  ///< in (0, 1)
  double mass = 1.0;      ///< > 0
};

/// `mass` times the Beta(2 - alpha, alpha) probability law.
struct BetaComponent {
  double alpha = 1.0;  ///< in (0, 2)
  double mass = 1.0;   ///< > 0
};

/// Absolutely continuous component with a user-supplied density on (0, 1).
/// The density must be integrable; its total mass is computed by quadrature.
struct DensityComponent {
  std::function<double(double)> density;
  std::string label = "density";
  double mass = 0.0;  ///< filled in by LambdaMeasure
};

/// Finite measure on [0, 1]: an atom at 0 (Kingman part), an atom at 1, and
/// an interior part made of atoms, Beta laws and densities.
class LambdaMeasure {
 public:
  LambdaMeasure() = default;

  static LambdaMeasure zero() { return {}; }
  static LambdaMeasure kingman(double mass = 1.0);
  static LambdaMeasure top(double mass = 1.0);
  static LambdaMeasure atom(double location, double mass = 1.0);
  static LambdaMeasure beta(double alpha, double mass = 1.0);
  static LambdaMeasure uniform(double mass = 1.0);
  static LambdaMeasure density(std::function<double(double)> f, std::string label = "density");

  LambdaMeasure& add_kingman(double mass);
  LambdaMeasure& add_top(double mass);
  LambdaMeasure& add_atom(double location, double mass);
  LambdaMeasure& add_beta(double alpha, double mass);
  LambdaMeasure& add_density(std::function<double(double)> f, std::string label = "density");

  friend LambdaMeasure operator+(LambdaMeasure a, const LambdaMeasure& b);

  double kingman_mass() const { return kingman_mass_; }
  double top_mass() const { return top_mass_; }
  double interior_mass() const;
  /// Lambda([0, 1]); equals the pair coalescence rate lambda_{2,2}.
  double total_mass() const { return kingman_mass_ + top_mass_ + interior_mass(); }
  bool is_zero() const { return total_mass() == 0.0; }

  const std::vector<InteriorAtom>& atoms() const { return atoms_; }
  const std::vector<BetaComponent>& betas() const { return betas_; }
  const std::vector<DensityComponent>& densities() const { return densities_; }

  /// The measure with its atom at 0 removed (drives multiple-merger events).
  LambdaMeasure without_kingman() const;

  /// Sum of the interior part's density (atoms excluded) at x in (0, 1).
  /// `one_minus_x` is 1-x, passed separately for accuracy near 1.
  double interior_density(double x, double one_minus_x) const;
  bool has_continuous_part() const { return !betas_.empty() || !densities_.empty(); }

  /// Canonical spec string; densities render as `density:<label>` and cannot be re-parsed.
  std::string to_string() const;

 private:
  double kingman_mass_ = 0.0;
  double top_mass_ = 0.0;
  std::vector<InteriorAtom> atoms_;
  std::vector<BetaComponent> betas_;
  std::vector<DensityComponent> densities_;
};

/// Parses `kingman:<m>`, `beta:<alpha>[:<m>]`, `atoms:<m1>@<x1>,<m2>@<x2>,...`,
/// `uniform:<m>`, `top:<m>`, `zero`, joined by `+`. Throws std::invalid_argument.
LambdaMeasure parse_lambda(std::string_view spec);

}  // namespace fvlab
