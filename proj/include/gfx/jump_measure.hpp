#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <variant>
#include <vector>

#include "gfx/random.hpp"

namespace gfx {

/// Integrand over jump sizes y < 0, together with its leading behaviour
/// f(-u) ~ coeff * u^power * (ln u)^log_power as u -> 0+. The expansion lets
/// power densities integrate the singular endpoint analytically and decide
/// divergence symbolically.
struct Integrand {
  std::function<double(double)> f;
  double coeff = 0.0;
  double power = 0.0;
  int log_power = 0;

  /// (1 - e^y)^q
  static Integrand frac_moment(double q);
  /// ln(1 - e^y) (1 - e^y)^q
  static Integrand frac_log_moment(double q);
  /// e^{qy} - 1 + q(1 - e^y)
  static Integrand compensated_exp(double q);
  /// y e^{qy} + 1 - e^y
  static Integrand compensated_exp_derivative(double q);
  /// e^{theta y}
  static Integrand exp_tilt(double theta);
  /// y + 1 - e^y
  static Integrand small_jump_drift();
  /// y^2
  static Integrand square();
  /// (1 - e^y)(1 - e^{theta y})
  static Integrand tilt_compensator(double theta);
};

/// Levy measure on (-inf, 0) from a closed family: finite atomic, power
/// density c|y|^{-1-beta} on (-L, -inner), and scaled / summed / exponentially
/// tilted composites. Immutable; cheap to copy.
class JumpMeasure {
 public:
  struct Atom {
    double location;
    double weight;
  };

  /// The zero measure.
  JumpMeasure();

  static JumpMeasure atoms(std::vector<Atom> atoms);
  /// c|y|^{-1-beta} dy on (-cutoff, -inner); inner == 0 gives infinite activity.
  static JumpMeasure power(double c, double beta, double cutoff, double inner = 0.0);
  static JumpMeasure sum(std::vector<JumpMeasure> parts);
  static JumpMeasure scaled(double factor, JumpMeasure base);
  /// e^{theta y} m(dy), theta >= 0.
  static JumpMeasure tilted(double theta, JumpMeasure base);

  /// m((-inf, -eps)); throws std::domain_error for eps <= 0.
  double tail_mass(double eps) const;
  /// m((-inf, 0)); +inf for infinite activity.
  double total_mass() const;
  bool is_zero() const;
  bool is_finite() const { return total_mass() < std::numeric_limits<double>::infinity(); }

  /// Integral of (1 - e^y)^q; +inf when it diverges (decided from q, never numerically).
  double frac_moment(double q) const;
  /// Integral of an arbitrary integrand; +-inf on divergence at the origin.
  double integrate(const Integrand& g) const;
  /// Infimum of {q >= 0 : frac_moment(q) < inf}.
  double frac_moment_threshold() const;
  /// True when frac_moment(frac_moment_threshold()) is finite.
  bool threshold_attained() const;

  /// y < -eps distributed as m restricted to (-inf, -eps), normalized.
  double sample_restricted(double eps, RandomStream& rng) const;
  /// Same, with eps = 0 (requires finite total mass).
  double sample(RandomStream& rng) const;

  /// m restricted to (-inf, -eps).
  JumpMeasure below(double eps) const;
  /// m restricted to [-eps, 0).
  JumpMeasure above(double eps) const;

  /// True when the measure is built from atoms only.
  bool is_atomic() const;
  /// Explicit atoms of an atomic measure (scales and tilts applied).
  std::vector<Atom> flatten_atoms() const;

  struct AtomicData {
    std::vector<Atom> atoms;
  };
  struct PowerData {
    double c;
    double beta;
    double cutoff;
    double inner;
  };
  struct SumData {
    std::vector<JumpMeasure> parts;
  };
  struct ScaledData {
    double factor;
    std::shared_ptr<const JumpMeasure> base;
  };
  struct TiltedData {
    double theta;
    std::shared_ptr<const JumpMeasure> base;
  };
  using Repr = std::variant<AtomicData, PowerData, SumData, ScaledData, TiltedData>;

  const Repr& repr() const { return *repr_; }

 private:
  explicit JumpMeasure(Repr r);
  double sample_range(double lo, RandomStream& rng) const;
  std::shared_ptr<const Repr> repr_;
};

/// Lambda_1^(eps) = Lambda_1 on (-inf,-eps); Lambda_2^(eps) = Lambda_2 + Lambda_1 on [-eps, 0).
struct TruncatedPair {
  double eps;
  JumpMeasure lambda1_eps;
  JumpMeasure lambda2_eps;
};

TruncatedPair truncate(const JumpMeasure& lambda1, const JumpMeasure& lambda2, double eps);

}  // namespace gfx
