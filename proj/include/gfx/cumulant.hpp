#pragma once

#include <optional>
#include <utility>

#include "gfx/jump_measure.hpp"

namespace gfx {

/// (k, sigma^2, b, Lambda_1, Lambda_2) plus the self-similarity index alpha.
/// Lambda_1 carries the jumps that produce a child, Lambda_2 the others.
struct Characteristics {
  double k = 0.0;
  double sigma2 = 0.0;
  double b = 0.0;
  JumpMeasure lambda1;
  JumpMeasure lambda2;
  double alpha = 0.0;

  /// Validated construction. Requires k, sigma2 >= 0 and that the process is
  /// killed or drifts to -inf (k > 0 or Psi'(0+) < 0).
  static Characteristics make(double k, double sigma2, double b, JumpMeasure lambda1,
                              JumpMeasure lambda2, double alpha = 0.0);
};

/// Throws std::invalid_argument when the characteristics violate the gate above.
void validate(const Characteristics& ch);

/// Same process with Lambda_1 restricted to (-inf, -eps) and the remainder
/// moved into Lambda_2. Psi is unchanged.
Characteristics truncated(const Characteristics& ch, double eps);

double psi(const Characteristics& ch, double q);
/// Psi'(q)
double psi_dot(const Characteristics& ch, double q);
/// Exponent of the non-birth motion: Lambda_1 enters only through its drift.
double psi2(const Characteristics& ch, double q);
/// kappa(q) = Psi(q) + integral (1-e^y)^q Lambda_1(dy); may be +inf.
double kappa(const Characteristics& ch, double q);
/// Analytic right-derivative of kappa. Throws std::domain_error where kappa
/// is infinite.
double kappa_dot(const Characteristics& ch, double q);
double kappa_truncated(const Characteristics& ch, double eps, double q);
double kappa_dot_truncated(const Characteristics& ch, double eps, double q);
/// kappa(q_tilt + p) - kappa(q_tilt)
double phi(const Characteristics& ch, double q_tilt, double p);

/// Infimum of the domain where kappa is finite, and whether it is attained.
double q_bar(const Characteristics& ch);
bool q_bar_attained(const Characteristics& ch);

/// Minimizer of kappa on its finite domain, or nullopt when kappa keeps
/// decreasing over the whole search range. The result is the root of kappa'
/// by bisection; a golden-section minimization of kappa serves as an
/// independent check and a disagreement above 1e-6 throws std::runtime_error.
std::optional<double> find_qm(const Characteristics& ch);

struct CumulantProfile {
  double q_bar = 0.0;
  bool q_bar_attained = false;
  bool degenerate = false;
  std::optional<double> q_m;
  double kappa_min = 0.0;
  bool hypothesis_H = false;
  /// |kappa_min| <= 1e-12: neither (H) nor its negation is trusted.
  bool indeterminate = false;
  bool technical_condition = false;
  std::optional<double> malthusian_witness;
  std::optional<double> q_minus;
  std::optional<double> q_plus;
  double kappa_dot_minus = 0.0;
  double kappa_dot_plus = 0.0;
};

inline constexpr double kPositivityTol = 1e-12;

CumulantProfile classify(const Characteristics& ch);

/// q_m -/+ delta for the largest delta in {0.5, 0.25, ...} meeting the sign
/// and kappa'(q) < kappa(q)/q conditions. Throws std::runtime_error when the
/// sweep drops below 1e-6 or (H) does not hold.
std::pair<double, double> select_tilts(const Characteristics& ch, const CumulantProfile& profile);

}  // namespace gfx
