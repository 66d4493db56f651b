#include "gfx/explosion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "gfx/levy_path.hpp"
#include "gfx/replicate.hpp"
#include "gfx/selfsimilar_gf.hpp"
#include "gfx/spine.hpp"

namespace gfx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Start {
  double log_mass;
  double x_time;
};

struct Context {
  double alpha;
  int dir;  // +1: lines climb toward the interval, -1: they descend
  double lr;
  double log_a;
  double log_ap;
  const std::vector<double>* probes;
  double t_max;
  const ExplosionOptions* o;
  const PathSampler* sampler;
  const BirthProcess* births;

  bool is_final(double log_mass) const {
    return dir > 0 ? log_mass >= log_a - lr : log_mass <= log_ap + lr;
  }
};

// integral over [0, r] of exp(-alpha (a + slope s)) ds
double seg_clock(double alpha, double a, double slope, double r) {
  const double c = -alpha * slope;
  const double base = std::exp(-alpha * a);
  if (base == 0.0) return 0.0;
  if (c == 0.0) return base * r;
  return base * std::expm1(c * r) / c;
}

// Inverse of seg_clock in r, clamped to [0, len].
double seg_inverse(double alpha, double a, double slope, double rest, double len) {
  const double c = -alpha * slope;
  const double scaled = rest * std::exp(alpha * a);
  double r = c == 0.0 ? scaled : std::log1p(scaled * c) / c;
  if (!std::isfinite(r)) r = len;
  return std::clamp(r, 0.0, len);
}

struct Node {
  double t;  // homogeneous birth time relative to the level start
  double z;  // log-mass relative to the level start
  double x;  // X-time at birth
  std::uint64_t id;
};

// Nodes are expanded in homogeneous birth order. The population above the
// floor grows exponentially, so a depth-first order would spend the node cap
// inside one subtree.
struct Later {
  bool operator()(const Node& a, const Node& b) const { return a.t > b.t || (a.t == b.t && a.id > b.id); }
};
using Queue = std::priority_queue<Node, std::vector<Node>, Later>;

void expand_level(const Context& cx, const Start& item, const RandomStream& item_rng,
                  std::vector<Start>& hits, std::size_t want, std::size_t& particles) {
  const double top = cx.lr;
  const double floor = -cx.o->floor_levels * cx.lr;
  Queue queue;
  queue.push({0.0, 0.0, item.x_time, 0});
  PathRecord rec;
  std::uint64_t id = 0;
  std::uint64_t next_id = 1;
  while (!queue.empty() && hits.size() < want && id < cx.o->level_node_cap) {
    const Node nd = queue.top();
    queue.pop();
    ++id;
    RandomStream r(item_rng.seed(), derive_stream({item_rng.stream(), nd.id}));
    cx.sampler->sample_into(rec, *cx.births, nd.z, cx.o->level_chi_horizon, r);
    ++particles;
    double x = nd.x;
    bool alive = true;
    const auto& k = rec.knots;
    for (std::size_t j = 0; j + 1 < k.size(); ++j) {
      const double w0 = cx.dir * k[j].after;
      if (j > 0) {
        if (w0 >= top) {  // overshoot by a jump
          hits.push_back({item.log_mass + k[j].after, x});
          alive = false;
          break;
        }
        if (w0 < floor) {
          alive = false;
          break;
        }
      }
      const double w1 = cx.dir * k[j + 1].before;
      const double dt = k[j + 1].t - k[j].t;
      const double slope = (k[j + 1].before - k[j].after) / dt;
      const double a_abs = item.log_mass + k[j].after;
      if (w1 >= top) {  // continuous passage, lands exactly on the level
        const double r_hit = (top - w0) / (w1 - w0) * dt;
        x += seg_clock(cx.alpha, a_abs, slope, r_hit);
        hits.push_back({item.log_mass + cx.dir * top, x});
        alive = false;
        break;
      }
      x += seg_clock(cx.alpha, a_abs, slope, dt);
      if (w1 < floor || x > cx.t_max) {
        alive = false;
        break;
      }
    }
    if (!alive || rec.end != PathEnd::Birth) continue;
    const double m = rec.final_before();
    const double J = rec.events.back().y;
    const double z0 = m + J;
    const double z1 = m + std::log(-std::expm1(J));
    const double tb = nd.t + rec.end_time();
    if (cx.dir * z0 >= floor) queue.push({tb, z0, x, next_id++});
    if (cx.dir * z1 >= floor) queue.push({tb, z1, x, next_id++});
  }
}

void final_stage(const Context& cx, const Start& item, const RandomStream& item_rng,
                 std::vector<std::uint32_t>& counts, std::size_t& particles) {
  const double floor = -cx.o->final_floor_levels * cx.lr;
  const auto& probes = *cx.probes;
  Queue queue;
  queue.push({0.0, 0.0, item.x_time, 0});
  PathRecord rec;
  std::uint64_t id = 0;
  std::uint64_t next_id = 1;
  while (!queue.empty() && id < cx.o->final_node_cap) {
    const Node nd = queue.top();
    queue.pop();
    ++id;
    RandomStream r(item_rng.seed(), derive_stream({item_rng.stream(), nd.id}));
    cx.sampler->sample_into(rec, *cx.births, nd.z, cx.o->level_chi_horizon, r);
    ++particles;
    double x = nd.x;
    bool alive = true;
    const auto& k = rec.knots;
    for (std::size_t j = 0; j + 1 < k.size(); ++j) {
      if (j > 0 && cx.dir * k[j].after < floor) {
        alive = false;
        break;
      }
      const double dt = k[j + 1].t - k[j].t;
      const double slope = (k[j + 1].before - k[j].after) / dt;
      const double a_abs = item.log_mass + k[j].after;
      const double x1 = x + seg_clock(cx.alpha, a_abs, slope, dt);
      auto p = std::lower_bound(probes.begin(), probes.end(), x);
      for (; p != probes.end() && *p < x1; ++p) {
        const double s = seg_inverse(cx.alpha, a_abs, slope, *p - x, dt);
        const double lm = a_abs + slope * s;
        if (cx.log_a < lm && lm < cx.log_ap) ++counts[std::size_t(p - probes.begin())];
      }
      x = x1;
      if (cx.dir * k[j + 1].before < floor || x > cx.t_max) {
        alive = false;
        break;
      }
    }
    if (!alive || rec.end != PathEnd::Birth) continue;
    const double m = rec.final_before();
    const double J = rec.events.back().y;
    const double z0 = m + J;
    const double z1 = m + std::log(-std::expm1(J));
    const double tb = nd.t + rec.end_time();
    if (cx.dir * z0 >= floor) queue.push({tb, z0, x, next_id++});
    if (cx.dir * z1 >= floor) queue.push({tb, z1, x, next_id++});
  }
}

SiblingOutcome run_sibling(const Context& cx, const Start& start, const RandomStream& rng) {
  SiblingOutcome out;
  out.probe_counts.assign(cx.probes->size(), 0);
  std::vector<Start> frontier{start};
  const auto K = std::size_t(std::max(cx.o->frontier, 1));
  for (std::size_t level = 0;; ++level) {
    std::erase_if(frontier, [&](const Start& s) { return s.x_time > cx.t_max; });
    if (frontier.empty()) {
      out.exhausted = true;
      break;
    }
    std::vector<Start> climbing;
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      const RandomStream item_rng(rng.seed(), derive_stream({rng.stream(), level, i}));
      if (cx.is_final(frontier[i].log_mass)) {
        final_stage(cx, frontier[i], item_rng, out.probe_counts, out.particles);
      } else {
        climbing.push_back(frontier[i]);
      }
    }
    if (climbing.empty()) break;
    out.levels = level + 1;
    std::vector<Start> hits;
    for (std::size_t i = 0; i < climbing.size() && hits.size() < K; ++i) {
      const RandomStream item_rng(rng.seed(), derive_stream({rng.stream(), level, 0x1000000 + i}));
      expand_level(cx, climbing[i], item_rng, hits, K, out.particles);
    }
    std::stable_sort(hits.begin(), hits.end(),
                     [](const Start& a, const Start& b) { return a.x_time < b.x_time; });
    if (hits.size() > K) hits.resize(K);
    frontier = std::move(hits);
  }
  return out;
}

std::vector<BudgetPoint> spine_curve(const std::vector<SiblingOutcome>& sib,
                                     const std::vector<std::size_t>& budgets, std::size_t n_probes) {
  std::vector<BudgetPoint> curve;
  for (std::size_t n : budgets) {
    BudgetPoint bp;
    bp.budget = n;
    bp.used = std::min(n, sib.size());
    bp.insufficient = bp.used < n;
    std::vector<std::size_t> per(n_probes, 0);
    for (std::size_t i = 0; i < bp.used; ++i)
      for (std::size_t p = 0; p < n_probes; ++p)
        if (sib[i].probe_counts[p] > 0) ++per[p];
    for (std::size_t p = 0; p < n_probes; ++p) {
      if (per[p] > bp.count || bp.best_probe < 0) {
        bp.count = per[p];
        bp.best_probe = int(p);
      }
    }
    curve.push_back(bp);
  }
  return curve;
}

ExplosionResult run_direct(const Characteristics& ch, double a, double a_prime,
                           const ExplosionOptions& o, const RandomStream& rng) {
  ExplosionResult res;
  res.mode = ExplosionMode::Direct;
  res.alpha = ch.alpha;
  res.a = a;
  res.a_prime = a_prime;
  res.chi_horizon = o.direct_chi_horizon;
  for (int i = 0; i < o.n_probes; ++i) res.probes.push_back(o.direct_x_horizon * (i + 1) / o.n_probes);
  const RandomStream pop_rng(rng.seed(), derive_stream({rng.stream(), 0xD1}));
  for (std::size_t n : o.budgets) {
    SimulateOptions so;
    so.path_eps = o.path_eps;
    so.step = o.step;
    so.caps.max_particles = n;
    const auto cp = lamperti(simulate(ch, o.x0, o.direct_chi_horizon, so, pop_rng), ch.alpha);
    BudgetPoint bp;
    bp.budget = n;
    bp.used = cp.population().particles.size();
    for (std::size_t p = 0; p < res.probes.size(); ++p) {
      const auto ic = interval_count(cp, res.probes[p], a, a_prime);
      bp.censored = bp.censored || ic.censored;
      if (ic.count > bp.count || bp.best_probe < 0) {
        bp.count = ic.count;
        bp.best_probe = int(p);
      }
    }
    res.curve.push_back(bp);
  }
  return res;
}

}  // namespace

bool SiblingOutcome::contributed() const {
  return std::any_of(probe_counts.begin(), probe_counts.end(), [](std::uint32_t c) { return c > 0; });
}

ExplosionResult explosion_experiment(const Characteristics& ch, double a, double a_prime,
                                     const ExplosionOptions& o, const RandomStream& rng,
                                     ExplosionMode mode) {
  if (!(0.0 < a && a < a_prime)) throw std::invalid_argument("explosion: need 0 < a < a_prime");
  if (o.budgets.empty() || !std::is_sorted(o.budgets.begin(), o.budgets.end())) {
    throw std::invalid_argument("explosion: budgets must be non-empty and ascending");
  }
  if (o.n_probes < 1 || o.n_probes > 1024) throw std::invalid_argument("explosion: n_probes out of range");
  if (!(o.ratio > 1.0)) throw std::invalid_argument("explosion: ratio must be > 1");
  if (mode == ExplosionMode::Direct) return run_direct(ch, a, a_prime, o, rng);

  if (ch.alpha == 0.0) throw PreconditionError("explosion: alpha must be nonzero");
  const auto profile = classify(ch);
  if (!profile.hypothesis_H) {
    throw PreconditionError("explosion: hypothesis (H) fails (kappa takes nonpositive values)");
  }
  if (!profile.q_minus || !profile.q_plus) {
    throw PreconditionError("explosion: no admissible tilt pair");
  }

  ExplosionResult res;
  res.mode = mode;
  res.alpha = ch.alpha;
  res.a = a;
  res.a_prime = a_prime;
  res.q = ch.alpha < 0.0 ? *profile.q_minus : *profile.q_plus;

  const SpineSpec spec = make_spine_spec(ch, res.q, o.path_eps, o.step);
  const double n_max = double(o.budgets.back());
  res.chi_horizon = o.chi_horizon > 0.0 ? o.chi_horizon : 1.05 * n_max / spec.birth_rate + 10.0;
  const auto real = simulate_spine(spec, o.x0, res.chi_horizon, ch.alpha,
                                   RandomStream(rng.seed(), derive_stream({rng.stream(), 0x5F})));
  const auto life = spine_lifetime(spec, real);
  res.zeta_estimate = life.estimate;
  res.zeta_tail = life.tail_bound;
  const double zeta = life.estimate + (std::isfinite(life.tail_bound) ? life.tail_bound : 0.0);

  res.spine_min_log_mass = kInf;
  for (const auto& k : real.path.knots)
    res.spine_min_log_mass = std::min({res.spine_min_log_mass, k.before, k.after});
  res.spine_final_log_mass = real.path.final_after();

  for (int i = 0; i < o.n_probes; ++i) {
    res.probes.push_back(0.5 * zeta * std::pow(o.probe_span, (i + 0.5) / o.n_probes));
  }

  Context cx;
  cx.alpha = ch.alpha;
  cx.dir = ch.alpha < 0.0 ? +1 : -1;
  cx.lr = std::log(o.ratio);
  cx.log_a = std::log(a);
  cx.log_ap = std::log(a_prime);
  cx.probes = &res.probes;
  cx.t_max = 0.5 * zeta * o.probe_span;
  cx.o = &o;
  const PathSampler sampler(particle_path_spec(ch, o.path_eps, o.step));
  cx.sampler = &sampler;
  const double m1 = ch.lambda1.total_mass();
  if (!std::isfinite(m1)) throw PreconditionError("explosion: Lambda_1 must have finite mass");
  BirthProcess births;
  births.rate = m1;
  births.stop_at_first = true;
  const JumpMeasure l1 = ch.lambda1;
  births.mark = [l1](RandomStream& r) { return BirthMark{l1.sample(r), 0}; };
  cx.births = &births;

  const std::size_t total = real.siblings.size();
  const std::size_t n_run = std::min<std::size_t>(o.budgets.back(), total);
  res.siblings.resize(n_run);
  parallel_for(n_run, o.threads, [&](std::size_t i) {
    const std::size_t idx = total - 1 - i;
    const auto& s = real.siblings[idx];
    const RandomStream srng(rng.seed(), derive_stream({rng.stream(), 0x51B, idx}));
    auto out = run_sibling(cx, {s.log_mass, s.x_time}, srng);
    out.index = idx;
    out.birth_chi = s.chi_time;
    out.birth_log_mass = s.log_mass;
    out.birth_x_time = s.x_time;
    res.siblings[i] = std::move(out);
  });
  res.curve = spine_curve(res.siblings, o.budgets, res.probes.size());
  return res;
}

}  // namespace gfx
