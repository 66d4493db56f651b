#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "gfx/jump_measure.hpp"
#include "gfx/random.hpp"

namespace gfx {

/// Spectrally negative Levy process with killing, exponent
///   -kill_rate + sigma2 q^2/2 + drift q + integral (e^{qy} - 1 + q(1 - e^y)) jumps(dy).
struct PathSpec {
  double kill_rate = 0.0;
  double sigma2 = 0.0;
  double drift = 0.0;
  JumpMeasure jumps;
  double path_eps = 1e-4;
  double step = 1e-3;
};

void validate(const PathSpec& spec);

/// Exponent of the spec (the target law).
double spec_exponent(const PathSpec& spec, double q);
/// Drift actually simulated: jumps in [-path_eps, 0) are replaced by their mean effect.
double effective_drift(const PathSpec& spec);
/// q^2/2 * integral over [-path_eps, 0) of y^2: leading gap between the
/// simulated exponent and spec_exponent.
double small_jump_bias(const PathSpec& spec, double q);
/// Grid step actually used: the largest 2^-n not above spec.step.
double dyadic_step(double step);

struct BirthMark {
  /// Log-jump applied to the path (< 0).
  double log_jump;
  /// Free tag carried into the event (the spine uses 1 for a switch of child).
  std::uint8_t branch = 0;
};

/// Poisson stream of marked events that a path carries on top of its own jumps.
struct BirthProcess {
  double rate = 0.0;
  std::function<BirthMark(RandomStream&)> mark;
  /// End the path at the first event without applying its jump.
  bool stop_at_first = false;
};

enum class JumpOrigin : std::uint8_t { Birth, NonBirth };
enum class PathEnd : std::uint8_t { Horizon, Killed, Birth };

struct JumpEvent {
  double t;
  double y;
  JumpOrigin origin;
  std::uint8_t branch = 0;
};

/// Log-mass is linear between consecutive knots. `before` is the left limit
/// at t, `after` the value once any jump at t has been applied.
struct Knot {
  double t;
  double before;
  double after;
};

struct PathRecord {
  double start_log_mass = 0.0;
  std::vector<Knot> knots;
  std::vector<JumpEvent> events;
  std::optional<double> kill_time;
  double horizon = 0.0;
  PathEnd end = PathEnd::Horizon;

  double end_time() const { return knots.back().t; }
  /// Left limit of the log-mass at the end (the mass a splitting particle divides).
  double final_before() const { return knots.back().before; }
  double final_after() const { return knots.back().after; }
  /// Right-continuous log-mass at local time t in [0, end_time()].
  double log_mass_at(double t) const;
  /// Left limit at t.
  double log_mass_before(double t) const;
};

/// Precomputes the jump-dependent constants of a spec so that repeated
/// sampling does no quadrature.
class PathSampler {
 public:
  explicit PathSampler(PathSpec spec);

  const PathSpec& spec() const { return spec_; }
  double drift() const { return drift_; }
  double jump_rate() const { return jump_rate_; }
  double grid_step() const { return grid_step_; }

  PathRecord sample(const BirthProcess& births, double start_log_mass, double horizon,
                    RandomStream& rng) const;
  /// Same, reusing the storage of `out`.
  void sample_into(PathRecord& out, const BirthProcess& births, double start_log_mass,
                   double horizon, RandomStream& rng) const;

 private:
  PathSpec spec_;
  JumpMeasure big_jumps_;
  double jump_rate_ = 0.0;
  double drift_ = 0.0;
  double grid_step_ = 0.0;
  int grid_level_ = 0;
};

/// Sample a path started at start_log_mass and run until the horizon, the
/// kill time or (if requested) the first birth event. Randomness is split into
/// independent sub-streams per purpose, and the Gaussian part is built from a
/// dyadic midpoint construction keyed by (level, position), so refining the
/// step leaves grid values at coarser dyadic times unchanged.
PathRecord sample_path(const PathSpec& spec, const BirthProcess& births, double start_log_mass,
                       double horizon, RandomStream& rng);

/// Monte-Carlo E[e^{q(xi(t) - xi(0))} 1{t < kill}] and its standard error.
std::pair<double, double> exponent_check(const PathSpec& spec, double q, double t,
                                         std::size_t n_samples, RandomStream& rng);

}  // namespace gfx
