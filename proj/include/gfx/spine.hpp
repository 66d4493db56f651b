#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "gfx/cumulant.hpp"
#include "gfx/homogeneous_gf.hpp"
#include "gfx/levy_path.hpp"

namespace gfx {

/// Motion of the selected particle under the measure tilted by chi^q.
///
/// Continuous part: Gaussian sigma2, drift sigma2 q + b + int(1-e^y) Lambda_1
/// + int (1-e^y)(1-e^{qy}) Lambda_2, non-birth jumps e^{qy} Lambda_2(dy).
/// Birth events at rate int (e^{qy} + (1-e^y)^q) Lambda_1(dy); at an event
/// the spine keeps the e^J child (log-jump J, weight e^{qJ}) or moves to the
/// other one (log-jump ln(1-e^J), weight (1-e^J)^q). No killing.
struct SpineSpec {
  Characteristics base;
  double q = 0.0;
  PathSpec path;
  double birth_rate = 0.0;
  double kappa_q = 0.0;
  double kappa_dot_q = 0.0;

  /// Exact discrete law of the birth mark when Lambda_1 is atomic.
  struct Option {
    double log_jump;
    std::uint8_t branch;
    double weight;
  };
  std::vector<Option> options;
};

/// Throws std::invalid_argument when kappa(q) is infinite or the birth
/// intensity is not finite.
SpineSpec make_spine_spec(const Characteristics& ch, double q, double path_eps = 1e-4,
                          double step = 1e-3);

/// Laplace exponent implied by the spine dynamics (no reference to kappa at q + p).
double spine_exponent(const SpineSpec& spec, double p);
/// max over ps of |spine_exponent(p) - (kappa(q+p) - kappa(q))|.
double exponent_gap(const SpineSpec& spec, const std::vector<double>& ps);

BirthMark sample_spine_birth(const SpineSpec& spec, RandomStream& rng);

struct SiblingRecord {
  double chi_time;
  /// Initial log-mass; with the spine's post-split mass it sums to the pre-split mass.
  double log_mass;
  /// Lamperti time of the birth along the spine.
  double x_time;
  bool switched;
};

struct SpineRealization {
  PathRecord path;
  std::vector<SiblingRecord> siblings;
  double alpha = 0.0;
  /// Spine clock at each knot.
  std::vector<double> clock;
  RandomStream rng{0, 0};

  double chi_horizon() const { return path.horizon; }
};

/// Spine path to chi_horizon started at log-mass ln x0, with its Lamperti clock
/// for alpha and the list of siblings.
SpineRealization simulate_spine(const SpineSpec& spec, double x0, double chi_horizon, double alpha,
                                const RandomStream& rng);

/// Untilted sub-population of sibling n, run for `horizon` chi-time after its birth.
TreePopulation expand_sibling(const SpineSpec& spec, const SpineRealization& real, std::size_t n,
                              double horizon, const SimulateOptions& opts);

struct LifetimeEstimate {
  /// integral of chi^{-alpha} up to the chi-horizon
  double estimate = 0.0;
  /// extrapolated remainder e^{-alpha xi(H)} / (alpha mu) from the empirical
  /// slope mu; +inf when the slope has the wrong sign
  double tail_bound = 0.0;
};

/// Lifetime of a single path under the Lamperti clock.
LifetimeEstimate path_lifetime(const PathRecord& path, double alpha);
/// Requires alpha < 0 with a decreasing spine (kappa'(q) < 0) or alpha > 0
/// with an increasing one; otherwise throws std::invalid_argument.
LifetimeEstimate spine_lifetime(const SpineSpec& spec, const SpineRealization& real);

/// Bounded statistic of the population at time t, given the log-masses of
/// the particles alive then.
using PopulationStatistic = std::function<double(const std::vector<double>& log_masses)>;

struct ChangeOfMeasureResult {
  double p_mean = 0.0, p_se = 0.0;  // E_P[M_q(t) f]
  double q_mean = 0.0, q_se = 0.0;  // E_Q[f]
  double z = 0.0;
  std::size_t p_excluded = 0;
  std::size_t q_excluded = 0;
};

ChangeOfMeasureResult change_of_measure_check(const Characteristics& ch, double q, double t,
                                              const PopulationStatistic& f, std::size_t n_runs,
                                              const RandomStream& rng,
                                              const SimulateOptions& opts = {});

}  // namespace gfx
