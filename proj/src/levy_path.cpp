#include "gfx/levy_path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gfx {

namespace {

// Sub-stream purposes within one path.
enum : std::uint64_t { kKill = 1, kBirth = 2, kJump = 3, kBrownian = 4, kBridge = 5 };

RandomStream substream(const RandomStream& rng, std::uint64_t purpose) {
  return RandomStream(rng.seed(), derive_stream({rng.stream(), purpose}));
}

// Brownian motion on [0, end] sampled on the dyadic grid of spacing 2^-level.
// Unit blocks get an N(0,1) increment, then midpoints are filled level by
// level; every draw is addressed by (level, global position).
std::vector<double> dyadic_brownian(const RandomStream& brown, int level, std::size_t n_points) {
  const std::size_t per_block = std::size_t{1} << level;
  const std::size_t n_blocks = std::max<std::size_t>((n_points - 1 + per_block - 1) / per_block, 1);
  std::vector<double> w(n_blocks * per_block + 1, 0.0);
  double base = 0.0;
  for (std::size_t j = 0; j < n_blocks; ++j) {
    double* blk = w.data() + j * per_block;
    blk[0] = base;
    blk[per_block] = base + brown.normal_at(std::uint64_t{j});
    for (int l = 1; l <= level; ++l) {
      const std::size_t half = per_block >> l;
      const double sd = std::sqrt(std::ldexp(1.0, -l - 1));
      const std::size_t count = std::size_t{1} << (l - 1);
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t k = (2 * i + 1) * half;
        const std::uint64_t key = (std::uint64_t(l) << 56) | (std::uint64_t(j) * count + i);
        blk[k] = 0.5 * (blk[k - half] + blk[k + half]) + sd * brown.normal_at(key);
      }
    }
    base = blk[per_block];
  }
  w.resize(std::max(n_points, std::size_t{2}));
  return w;
}

}  // namespace

void validate(const PathSpec& spec) {
  if (!(spec.kill_rate >= 0.0)) throw std::invalid_argument("kill_rate must be >= 0");
  if (!(spec.sigma2 >= 0.0)) throw std::invalid_argument("sigma2 must be >= 0");
  if (!std::isfinite(spec.drift)) throw std::invalid_argument("drift must be finite");
  if (!(spec.path_eps > 0.0)) throw std::invalid_argument("path_eps must be > 0");
  if (!(spec.step > 0.0)) throw std::invalid_argument("step must be > 0");
}

double spec_exponent(const PathSpec& spec, double q) {
  return -spec.kill_rate + 0.5 * spec.sigma2 * q * q + spec.drift * q +
         spec.jumps.integrate(Integrand::compensated_exp(q));
}

double effective_drift(const PathSpec& spec) {
  const auto big = spec.jumps.below(spec.path_eps);
  const auto small = spec.jumps.above(spec.path_eps);
  return spec.drift + (big.is_zero() ? 0.0 : big.frac_moment(1.0)) +
         small.integrate(Integrand::small_jump_drift());
}

double small_jump_bias(const PathSpec& spec, double q) {
  return 0.5 * q * q * spec.jumps.above(spec.path_eps).integrate(Integrand::square());
}

double dyadic_step(double step) {
  if (!(step > 0.0)) throw std::invalid_argument("step must be > 0");
  int e = 0;
  std::frexp(step, &e);  // step in [2^(e-1), 2^e)
  return std::ldexp(1.0, e - 1);
}

double PathRecord::log_mass_at(double t) const {
  // last knot with knot.t <= t
  auto it = std::upper_bound(knots.begin(), knots.end(), t,
                             [](double v, const Knot& k) { return v < k.t; });
  if (it == knots.begin()) return knots.front().before;
  const Knot& a = *(it - 1);
  if (a.t == t || it == knots.end()) return a.after;
  const Knot& b = *it;
  return a.after + (b.before - a.after) * (t - a.t) / (b.t - a.t);
}

double PathRecord::log_mass_before(double t) const {
  // first knot with knot.t >= t
  auto it = std::lower_bound(knots.begin(), knots.end(), t,
                             [](const Knot& k, double v) { return k.t < v; });
  if (it == knots.end()) return knots.back().after;
  if (it->t == t) return it->before;
  if (it == knots.begin()) return it->before;
  const Knot& a = *(it - 1);
  return a.after + (it->before - a.after) * (t - a.t) / (it->t - a.t);
}

PathSampler::PathSampler(PathSpec spec) : spec_(std::move(spec)) {
  validate(spec_);
  big_jumps_ = spec_.jumps.below(spec_.path_eps);
  jump_rate_ = big_jumps_.is_zero() ? 0.0 : big_jumps_.total_mass();
  drift_ = effective_drift(spec_);
  grid_step_ = dyadic_step(spec_.step);
  int e = 0;
  std::frexp(grid_step_, &e);
  grid_level_ = 1 - e;
  if (grid_level_ < 0) {
    grid_level_ = 0;
    grid_step_ = 1.0;
  }
}

PathRecord PathSampler::sample(const BirthProcess& births, double start_log_mass, double horizon,
                               RandomStream& rng) const {
  PathRecord rec;
  sample_into(rec, births, start_log_mass, horizon, rng);
  return rec;
}

void PathSampler::sample_into(PathRecord& rec, const BirthProcess& births, double start_log_mass,
                              double horizon, RandomStream& rng) const {
  if (!(horizon > 0.0)) throw std::invalid_argument("sample_path: horizon must be > 0");
  if (!(births.rate >= 0.0)) throw std::invalid_argument("sample_path: birth rate must be >= 0");

  rec.start_log_mass = start_log_mass;
  rec.horizon = horizon;
  rec.end = PathEnd::Horizon;
  rec.kill_time.reset();
  rec.knots.clear();
  rec.events.clear();

  double end = horizon;
  RandomStream kill_rng = substream(rng, kKill);
  const double kill = kill_rng.exponential(spec_.kill_rate);
  if (kill < end) {
    end = kill;
    rec.end = PathEnd::Killed;
    rec.kill_time = kill;
  }

  RandomStream birth_rng = substream(rng, kBirth);
  if (births.rate > 0.0) {
    double t = birth_rng.exponential(births.rate);
    if (births.stop_at_first) {
      if (t < end) {
        end = t;
        rec.end = PathEnd::Birth;
        rec.kill_time.reset();
        const auto mk = births.mark(birth_rng);
        rec.events.push_back({t, mk.log_jump, JumpOrigin::Birth, mk.branch});
      }
    } else {
      while (t < end) {
        const auto mk = births.mark(birth_rng);
        rec.events.push_back({t, mk.log_jump, JumpOrigin::Birth, mk.branch});
        t += birth_rng.exponential(births.rate);
      }
    }
  }

  if (jump_rate_ > 0.0) {
    RandomStream jump_rng = substream(rng, kJump);
    double t = jump_rng.exponential(jump_rate_);
    while (t < end) {
      rec.events.push_back({t, big_jumps_.sample_restricted(spec_.path_eps, jump_rng),
                            JumpOrigin::NonBirth, 0});
      t += jump_rng.exponential(jump_rate_);
    }
  }
  std::sort(rec.events.begin(), rec.events.end(),
            [](const JumpEvent& a, const JumpEvent& b) { return a.t < b.t; });

  // The terminal birth is recorded but its jump belongs to the children.
  const std::size_t n_applied =
      rec.end == PathEnd::Birth ? rec.events.size() - 1 : rec.events.size();

  const double d = drift_;
  if (spec_.sigma2 == 0.0) {
    rec.knots.reserve(n_applied + 2);
    rec.knots.push_back({0.0, start_log_mass, start_log_mass});
    double jumps = 0.0;
    for (std::size_t i = 0; i < n_applied; ++i) {
      const auto& ev = rec.events[i];
      const double before = start_log_mass + d * ev.t + jumps;
      jumps += ev.y;
      rec.knots.push_back({ev.t, before, before + ev.y});
    }
    const double last = start_log_mass + d * end + jumps;
    if (end > rec.knots.back().t) rec.knots.push_back({end, last, last});
    return;
  }

  // Gaussian part: grid values from the dyadic construction, event values
  // from Brownian bridges between the surrounding grid points.
  const double h = grid_step_;
  const auto n_grid = static_cast<std::size_t>(std::floor(end / h)) + 2;
  const auto w = dyadic_brownian(substream(rng, kBrownian), grid_level_, n_grid);
  const double sigma = std::sqrt(spec_.sigma2);
  RandomStream bridge_rng = substream(rng, kBridge);

  std::vector<std::pair<double, double>> tw;  // (time, W)
  tw.reserve(n_grid + rec.events.size() + 1);
  std::size_t ev = 0;
  double left_t = 0.0;
  double left_w = w[0];
  auto bridge = [&](double s, std::size_t cell) {
    const double right_t = double(cell + 1) * h;
    const double right_w = w[cell + 1];
    const double span = right_t - left_t;
    const double mean = left_w + (s - left_t) / span * (right_w - left_w);
    const double var = (s - left_t) * (right_t - s) / span;
    return mean + std::sqrt(std::max(var, 0.0)) * bridge_rng.normal();
  };
  for (std::size_t k = 0;; ++k) {
    const double gk = double(k) * h;
    if (gk > end) break;
    tw.emplace_back(gk, w[k]);
    left_t = gk;
    left_w = w[k];
    const double next = double(k + 1) * h;
    while (ev < rec.events.size() && rec.events[ev].t < next) {
      const double s = rec.events[ev].t;
      if (s > left_t) {
        const double ws = bridge(s, k);
        tw.emplace_back(s, ws);
        left_t = s;
        left_w = ws;
      }
      ++ev;
    }
    if (end < next && end > left_t) {
      tw.emplace_back(end, bridge(end, k));
      break;
    }
    if (end < next) break;
  }

  rec.knots.reserve(tw.size());
  double jumps = 0.0;
  std::size_t applied = 0;
  for (const auto& [t, wt] : tw) {
    const double before = start_log_mass + d * t + sigma * wt + jumps;
    double after = before;
    while (applied < n_applied && rec.events[applied].t == t) {
      jumps += rec.events[applied].y;
      after += rec.events[applied].y;
      ++applied;
    }
    rec.knots.push_back({t, before, after});
  }
}

PathRecord sample_path(const PathSpec& spec, const BirthProcess& births, double start_log_mass,
                       double horizon, RandomStream& rng) {
  return PathSampler(spec).sample(births, start_log_mass, horizon, rng);
}

std::pair<double, double> exponent_check(const PathSpec& spec, double q, double t,
                                         std::size_t n_samples, RandomStream& rng) {
  if (!(t > 0.0) || !(q >= 0.0)) throw std::domain_error("exponent_check: need t > 0, q >= 0");
  if (n_samples < 2) throw std::invalid_argument("exponent_check: need at least 2 samples");
  const PathSampler sampler(spec);
  const BirthProcess none{};
  double sum = 0.0;
  double sum2 = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    RandomStream r(rng.seed(), derive_stream({rng.stream(), 0xEC, i}));
    const auto path = sampler.sample(none, 0.0, t, r);
    const double v = path.end == PathEnd::Killed ? 0.0 : std::exp(q * path.final_after());
    sum += v;
    sum2 += v * v;
  }
  const double n = double(n_samples);
  const double mean = sum / n;
  const double var = std::max(sum2 / n - mean * mean, 0.0) * n / (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

}  // namespace gfx
