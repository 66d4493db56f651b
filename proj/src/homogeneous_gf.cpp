#include "gfx/homogeneous_gf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

#include "gfx/kernels.hpp"

namespace gfx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Pending {
  double birth;
  Label label;
  std::int64_t parent;
  double log_mass;
};

struct Later {
  bool operator()(const Pending& a, const Pending& b) const {
    if (a.birth != b.birth) return a.birth > b.birth;
    return b.label < a.label;
  }
};

double split_rate(const Characteristics& ch) {
  const double m = ch.lambda1.total_mass();
  if (!std::isfinite(m)) {
    throw std::invalid_argument("simulate: Lambda_1 has infinite mass; truncate it first");
  }
  return m;
}

BirthProcess split_births(const Characteristics& ch) {
  const double m = split_rate(ch);
  JumpMeasure l1 = ch.lambda1;
  BirthProcess births;
  births.rate = m;
  births.stop_at_first = true;
  if (m > 0.0) births.mark = [l1](RandomStream& r) { return BirthMark{l1.sample(r), 0}; };
  return births;
}

double mean_se(std::size_t hits, std::size_t n, double* se) {
  const double p = n ? double(hits) / double(n) : 0.0;
  *se = n > 1 ? std::sqrt(p * (1.0 - p) / double(n)) : 0.0;
  return p;
}

}  // namespace

std::string Label::str() const {
  if (depth == 0) return "r";
  std::string s(depth, '0');
  for (int i = 0; i < depth; ++i) {
    if ((bits >> (depth - 1 - i)) & 1) s[std::size_t(i)] = '1';
  }
  return s;
}

bool operator<(const Label& a, const Label& b) {
  const std::uint64_t x = a.depth ? a.bits << (64 - a.depth) : 0;
  const std::uint64_t y = b.depth ? b.bits << (64 - b.depth) : 0;
  if (x != y) return x < y;
  return a.depth < b.depth;
}

std::pair<double, double> split_masses(double m, double J) {
  return {m * std::exp(J), m * -std::expm1(J)};
}

PathSpec particle_path_spec(const Characteristics& ch, double path_eps, double step) {
  PathSpec spec;
  spec.kill_rate = ch.k;
  spec.sigma2 = ch.sigma2;
  spec.drift = ch.b + (ch.lambda1.is_zero() ? 0.0 : ch.lambda1.frac_moment(1.0));
  spec.jumps = ch.lambda2;
  spec.path_eps = path_eps;
  spec.step = step;
  return spec;
}

RandomStream particle_stream(const RandomStream& replica, const Label& label) {
  return RandomStream(replica.seed(), derive_stream({replica.stream(), label.bits, label.depth}));
}

TreePopulation simulate(const Characteristics& ch, double x0, double horizon,
                        const SimulateOptions& opts, const RandomStream& rng) {
  if (!(x0 > 0.0) || !std::isfinite(x0)) throw std::invalid_argument("simulate: x0 must be > 0");
  return simulate_log(ch, std::log(x0), horizon, opts, rng);
}

TreePopulation simulate_log(const Characteristics& ch, double log_x0, double horizon,
                            const SimulateOptions& opts, const RandomStream& rng) {
  if (!std::isfinite(log_x0)) throw std::invalid_argument("simulate: log x0 must be finite");
  if (!(horizon > 0.0)) throw std::invalid_argument("simulate: horizon must be > 0");
  const BirthProcess births = split_births(ch);
  const PathSampler sampler(particle_path_spec(ch, opts.path_eps, opts.step));

  TreePopulation pop;
  pop.x0 = std::exp(log_x0);
  pop.log_x0 = log_x0;
  pop.horizon = horizon;
  pop.complete_until = horizon;

  std::priority_queue<Pending, std::vector<Pending>, Later> queue;
  queue.push({0.0, Label{}, -1, log_x0});
  while (!queue.empty()) {
    const Pending next = queue.top();
    queue.pop();
    if (pop.particles.size() >= opts.caps.max_particles ||
        int(next.label.depth) > opts.caps.max_generation) {
      pop.capped = true;
      pop.complete_until = next.birth;
      break;
    }
    HomogeneousParticle p;
    p.label = next.label;
    p.birth_time = next.birth;
    p.initial_log_mass = next.log_mass;
    p.parent = next.parent;
    RandomStream stream = particle_stream(rng, p.label);
    p.path = sampler.sample(births, next.log_mass, horizon - next.birth, stream);
    p.death_time = next.birth + p.path.end_time();
    switch (p.path.end) {
      case PathEnd::Horizon:
        p.cause = DeathCause::Horizon;
        p.death_time = horizon;
        break;
      case PathEnd::Killed: p.cause = DeathCause::Killed; break;
      case PathEnd::Birth: p.cause = DeathCause::Split; break;
    }
    const auto idx = std::int64_t(pop.particles.size());
    if (p.parent >= 0) pop.particles[std::size_t(p.parent)].children[p.label.last()] = idx;
    pop.max_generation = std::max(pop.max_generation, int(p.label.depth));
    if (p.cause == DeathCause::Split) {
      p.split_mark = p.path.events.back().y;
      const double m = p.path.final_before();
      ++pop.total_births;
      queue.push({p.death_time, p.label.child(0), idx, m + p.split_mark});
      queue.push({p.death_time, p.label.child(1), idx, m + std::log(-std::expm1(p.split_mark))});
    }
    pop.particles.push_back(std::move(p));
  }
  return pop;
}

std::vector<double> TreePopulation::log_snapshot(double t) const {
  std::vector<double> out;
  for (const auto& p : particles)
    if (p.alive_at(t)) out.push_back(p.log_mass_at(t));
  return out;
}

std::vector<double> TreePopulation::snapshot(double t) const {
  auto out = log_snapshot(t);
  for (auto& v : out) v = std::exp(v);
  return out;
}

std::vector<std::pair<Label, double>> TreePopulation::labelled_snapshot(double t) const {
  std::vector<std::pair<Label, double>> out;
  for (const auto& p : particles)
    if (p.alive_at(t)) out.emplace_back(p.label, std::exp(p.log_mass_at(t)));
  return out;
}

std::size_t TreePopulation::alive_count(double t) const {
  return std::size_t(std::count_if(particles.begin(), particles.end(),
                                   [t](const HomogeneousParticle& p) { return p.alive_at(t); }));
}

std::size_t TreePopulation::peak_alive() const {
  std::vector<std::pair<double, int>> ev;
  for (const auto& p : particles) {
    ev.emplace_back(p.birth_time, +1);
    if (p.cause != DeathCause::Horizon) ev.emplace_back(p.death_time, -1);
  }
  // deaths before births at equal times: a splitting parent is replaced, not added to
  std::sort(ev.begin(), ev.end());
  std::size_t cur = 0, best = 0;
  for (const auto& [t, d] : ev) {
    cur = std::size_t(std::int64_t(cur) + d);
    best = std::max(best, cur);
  }
  return best;
}

bool TreePopulation::extinct_by(double t) const { return alive_count(t) == 0; }

double additive_martingale(const TreePopulation& pop, double t, double q, double kappa_value) {
  if (pop.capped) throw std::logic_error("additive_martingale: population is capped");
  if (!std::isfinite(kappa_value)) throw std::domain_error("additive_martingale: kappa(q) must be finite");
  if (t < 0.0 || t > pop.horizon) throw std::domain_error("additive_martingale: t outside [0, horizon]");
  auto logs = pop.log_snapshot(t);
  for (auto& v : logs) v -= pop.log_x0;
  if (t == 0.0) return kernels::sum_exp(logs, q);
  return std::exp(-t * kappa_value) * kernels::sum_exp(logs, q);
}

std::vector<double> extinction_pgf(double k, double m, int n) {
  if (!(k >= 0.0 && m >= 0.0 && k + m > 0.0)) throw std::invalid_argument("extinction_pgf: need k + m > 0");
  std::vector<double> out;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    s = (k + m * s * s) / (k + m);
    out.push_back(s);
  }
  return out;
}

ExtinctionStats extinction_stats(const Characteristics& ch, int n_generations, std::size_t n_runs,
                                 const RandomStream& rng, bool by_time, const Caps& caps) {
  if (n_generations < 1) throw std::invalid_argument("extinction_stats: need n_generations >= 1");
  const double m = split_rate(ch);
  if (!(ch.k + m > 0.0)) throw std::invalid_argument("extinction_stats: need k + Lambda_1 mass > 0");

  // Extinction only depends on the split/kill clocks, so the motion is dropped.
  Characteristics bare = ch;
  bare.sigma2 = 0.0;
  bare.lambda2 = JumpMeasure();
  const BirthProcess births = split_births(bare);
  const PathSampler sampler(particle_path_spec(bare, 1.0, 1.0));

  std::vector<std::size_t> gen_extinct(std::size_t(n_generations), 0);
  std::vector<std::size_t> time_extinct(std::size_t(n_generations), 0);
  std::size_t time_used = 0;
  ExtinctionStats st;

  for (std::size_t run = 0; run < n_runs; ++run) {
    const RandomStream replica(rng.seed(), derive_stream({rng.stream(), 0xE7, run}));
    std::vector<Label> level{Label{}};
    for (int g = 1; g <= n_generations; ++g) {
      std::vector<Label> next;
      for (const auto& u : level) {
        RandomStream s = particle_stream(replica, u);
        const auto path = sampler.sample(births, 0.0, kInf, s);
        if (path.end == PathEnd::Birth) {
          next.push_back(u.child(0));
          next.push_back(u.child(1));
        }
      }
      if (next.empty()) {
        for (int h = g; h <= n_generations; ++h) ++gen_extinct[std::size_t(h - 1)];
        break;
      }
      // Enough lineages that the remaining generations are treated as surviving.
      if (next.size() > caps.max_particles) break;
      level = std::move(next);
    }

    if (by_time) {
      SimulateOptions opts;
      opts.caps = caps;
      const auto pop = simulate(bare, 1.0, double(n_generations), opts, replica);
      if (pop.capped) {
        ++st.time_excluded;
        continue;
      }
      ++time_used;
      for (int t = 1; t <= n_generations; ++t)
        if (pop.extinct_by(double(t))) ++time_extinct[std::size_t(t - 1)];
    }
  }

  for (int g = 0; g < n_generations; ++g) {
    double se = 0.0;
    st.by_generation.push_back(mean_se(gen_extinct[std::size_t(g)], n_runs, &se));
    st.by_generation_se.push_back(se);
    if (by_time) {
      st.by_time.push_back(mean_se(time_extinct[std::size_t(g)], time_used, &se));
      st.by_time_se.push_back(se);
    }
  }
  return st;
}

}  // namespace gfx
