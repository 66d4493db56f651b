#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gfx/cumulant.hpp"
#include "gfx/levy_path.hpp"

namespace gfx {

/// Word in {0,1}^n, n <= 63. Bit i (from the most significant used bit) is
/// the i-th letter.
struct Label {
  std::uint64_t bits = 0;
  std::uint8_t depth = 0;

  Label child(int b) const { return {(bits << 1) | std::uint64_t(b & 1), std::uint8_t(depth + 1)}; }
  Label parent() const { return {bits >> 1, std::uint8_t(depth - 1)}; }
  int last() const { return int(bits & 1); }
  bool is_root() const { return depth == 0; }
  /// "0110..."; the root prints as "r".
  std::string str() const;

  friend bool operator==(const Label&, const Label&) = default;
  /// Lexicographic order on words.
  friend bool operator<(const Label& a, const Label& b);
};

enum class DeathCause : std::uint8_t { Split, Killed, Horizon };

struct HomogeneousParticle {
  Label label;
  double birth_time = 0.0;  // absolute
  double death_time = 0.0;  // absolute; the horizon when censored
  double initial_log_mass = 0.0;
  PathRecord path;          // local time 0 at birth
  DeathCause cause = DeathCause::Horizon;
  double split_mark = 0.0;  // J when cause == Split
  std::int64_t parent = -1;
  std::int64_t children[2] = {-1, -1};

  bool alive_at(double t) const {
    return birth_time <= t && (t < death_time || cause == DeathCause::Horizon);
  }
  double log_mass_at(double t) const { return path.log_mass_at(t - birth_time); }
};

struct Caps {
  std::size_t max_particles = 1'000'000;
  int max_generation = 60;
};

struct TreePopulation {
  /// Parents precede children.
  std::vector<HomogeneousParticle> particles;
  double x0 = 1.0;
  /// ln x0, kept separately so that starts far below the double range work.
  double log_x0 = 0.0;
  double horizon = 0.0;
  bool capped = false;
  /// Earliest birth time of a particle that was not materialized; the
  /// population is complete on [0, complete_until).
  double complete_until = 0.0;
  std::size_t total_births = 0;
  int max_generation = 0;

  std::vector<double> snapshot(double t) const;
  std::vector<double> log_snapshot(double t) const;
  /// Labels and masses of the particles alive at t, in particle order.
  std::vector<std::pair<Label, double>> labelled_snapshot(double t) const;
  std::size_t alive_count(double t) const;
  std::size_t peak_alive() const;
  bool extinct_by(double t) const;
};

/// Child masses m e^J and m (1 - e^J).
std::pair<double, double> split_masses(double m, double J);

/// Law of one particle's motion: Psi_2 dynamics with killing, births from Lambda_1.
PathSpec particle_path_spec(const Characteristics& ch, double path_eps, double step);

/// Stream of the particle with the given label inside a replica.
RandomStream particle_stream(const RandomStream& replica, const Label& label);

struct SimulateOptions {
  double path_eps = 1e-4;
  double step = 1e-3;
  Caps caps;
};

/// Event-driven construction of the homogeneous tree started from one
/// particle of mass x0. Particles are expanded in order of birth time (ties by
/// label); each particle's randomness is keyed by its label, so the tree does
/// not depend on expansion order. Lambda_1 must have finite mass.
TreePopulation simulate(const Characteristics& ch, double x0, double horizon,
                        const SimulateOptions& opts, const RandomStream& rng);
/// Same, started from log-mass log_x0.
TreePopulation simulate_log(const Characteristics& ch, double log_x0, double horizon,
                            const SimulateOptions& opts, const RandomStream& rng);

/// e^{-t kappa} sum over alive u of (chi_u(t)/x0)^q. Throws std::logic_error
/// for a capped population.
double additive_martingale(const TreePopulation& pop, double t, double q, double kappa_value);

/// Offspring pgf iteration for the split/kill competition: p_n = F(p_{n-1}),
/// F(s) = (k + m s^2)/(k + m). Returns p_1..p_n.
std::vector<double> extinction_pgf(double k, double m, int n);

struct ExtinctionStats {
  /// Fraction of runs with no particle of generation g, g = 1..n.
  std::vector<double> by_generation;
  std::vector<double> by_generation_se;
  /// Fraction of runs with nobody alive at times 1..n (only with by_time).
  std::vector<double> by_time;
  std::vector<double> by_time_se;
  std::size_t time_excluded = 0;
};

ExtinctionStats extinction_stats(const Characteristics& ch, int n_generations, std::size_t n_runs,
                                 const RandomStream& rng, bool by_time = false,
                                 const Caps& caps = {});

}  // namespace gfx
