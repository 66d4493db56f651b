#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "gfx/homogeneous_gf.hpp"

namespace gfx {

/// Lamperti clock of one particle: b = A(birth), d = A(death) in X-time and
/// the accumulated integral at each knot of its path.
struct ParticleClock {
  double b = 0.0;
  double d = 0.0;
  /// A at each knot, relative to b; cum.front() == 0.
  std::vector<double> cum;
  /// d is only a lower bound (the particle or a child was cut by the horizon or a cap).
  bool censored = false;
};

struct SelfSimilarSnapshot {
  double t = 0.0;
  std::vector<std::pair<Label, double>> members;
  /// Some particle that could be alive at t lies beyond the simulated range.
  bool censored = false;
};

/// Homogeneous population with Lamperti clocks for index alpha. An optional
/// mask hides particles (used for the coarser levels of a truncation coupling).
class ClockedPopulation {
 public:
  ClockedPopulation(TreePopulation pop, double alpha);

  const TreePopulation& population() const { return pop_; }
  double alpha() const { return alpha_; }
  const std::vector<ParticleClock>& clocks() const { return clocks_; }
  bool visible(std::size_t i) const { return visible_.empty() || visible_[i]; }
  void set_visibility(std::vector<bool> mask) { visible_ = std::move(mask); }

  /// X-time at local chi-time s of particle i: b_i + A_i(s).
  double clock_at(std::size_t i, double s) const;
  /// Inverse clock: local chi-time s with b_i + A_i(s) = t, for t in [b_i, d_i].
  double tau(std::size_t i, double t) const;
  /// X_i(t) for b_i <= t < d_i.
  double mass_at(std::size_t i, double t) const;

  SelfSimilarSnapshot snapshot(double t) const;

 private:
  TreePopulation pop_;
  double alpha_;
  std::vector<ParticleClock> clocks_;
  std::vector<bool> visible_;
};

/// Clock every particle; the parent's d is the child's b.
ClockedPopulation lamperti(TreePopulation pop, double alpha);

struct IntervalCount {
  std::size_t count = 0;
  bool censored = false;
};

/// Number of particles alive at X-time t with mass in (a, a_prime).
IntervalCount interval_count(const ClockedPopulation& cp, double t, double a, double a_prime);

/// One simulation at the finest level, eps_levels.back(); the coarser level eps
/// hides the 1-child subtree of every split with mark in [-eps, -eps_min), whose
/// jump then counts as a non-birth jump of the continuing 0-child. Coarser
/// snapshots are therefore sub-multisets of finer ones, exactly.
std::vector<ClockedPopulation> coupled_truncations(const Characteristics& ch,
                                                   const std::vector<double>& eps_levels, double x0,
                                                   double horizon, const SimulateOptions& opts,
                                                   const RandomStream& rng);

/// No particle alive at the chi-horizon. Throws std::logic_error for capped
/// populations, where the answer is unknown.
bool sudden_death_indicator(const TreePopulation& pop);

/// Indices of the left-most line of descent (labels r, 0, 00, ...).
std::vector<std::size_t> eve_line(const TreePopulation& pop);

}  // namespace gfx
