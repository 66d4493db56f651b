#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gfx/cumulant.hpp"
#include "gfx/homogeneous_gf.hpp"
#include "gfx/random.hpp"

namespace gfx {

enum class ExplosionMode {
  /// Tilted spine plus sibling sub-populations; needs hypothesis (H).
  Spine,
  /// Untilted population from x0 with the budget as particle cap (control runs).
  Direct,
};

struct ExplosionOptions {
  /// n_siblings values (spine mode) or particle caps (direct mode), ascending.
  std::vector<std::size_t> budgets{100, 1000, 10000};
  double x0 = 1.0;
  /// Spine chi-horizon; 0 picks one yielding about 1.05 * max budget siblings.
  double chi_horizon = 0.0;
  int n_probes = 16;
  /// Spine probes are 0.5 * zeta * probe_span^u for n_probes values of u in (0, 1).
  double probe_span = 6.0;
  double path_eps = 1e-4;
  double step = 1e-3;
  unsigned threads = 1;

  // Sibling expansion. Every sibling line is followed by scale levels: a line
  // stops at its first passage through ratio * (level start mass) and becomes
  // a start of the next level; lines that drift floor_levels ratios the other
  // way, or past the last probe time, are dropped; at most `frontier` starts
  // are kept per level. Dropping particles only removes candidates, so
  // the counts are lower bounds for the full population.
  double ratio = 2.0;
  int floor_levels = 3;
  int frontier = 3;
  double level_chi_horizon = 40.0;
  std::size_t level_node_cap = 20000;
  int final_floor_levels = 6;
  std::size_t final_node_cap = 500;

  // Direct mode.
  double direct_x_horizon = 2.0;
  double direct_chi_horizon = 60.0;
};

struct SiblingOutcome {
  std::size_t index = 0;  // birth order along the spine
  double birth_chi = 0.0;
  double birth_log_mass = 0.0;
  double birth_x_time = 0.0;
  /// Particles of the sibling in (a, a') at each probe (lower bound).
  std::vector<std::uint32_t> probe_counts;
  std::size_t levels = 0;
  std::size_t particles = 0;
  /// Every line was dropped before reaching the interval's scale.
  bool exhausted = false;

  bool contributed() const;
};

struct BudgetPoint {
  std::size_t budget = 0;
  std::size_t used = 0;
  /// max over probes of the number of contributing siblings (spine mode) or of
  /// the interval count (direct mode)
  std::size_t count = 0;
  int best_probe = -1;
  bool insufficient = false;
  bool censored = false;
};

struct ExplosionResult {
  ExplosionMode mode = ExplosionMode::Spine;
  double q = 0.0;
  double alpha = 0.0;
  double a = 0.0, a_prime = 0.0;
  double chi_horizon = 0.0;
  double zeta_estimate = 0.0;
  double zeta_tail = 0.0;
  double spine_min_log_mass = 0.0;
  double spine_final_log_mass = 0.0;
  std::vector<double> probes;
  /// Latest-born first.
  std::vector<SiblingOutcome> siblings;
  std::vector<BudgetPoint> curve;
};

/// Raised when the configuration does not meet the experiment's precondition.
struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ExplosionResult explosion_experiment(const Characteristics& ch, double a, double a_prime,
                                     const ExplosionOptions& opts, const RandomStream& rng,
                                     ExplosionMode mode = ExplosionMode::Spine);

}  // namespace gfx
