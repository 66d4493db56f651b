#include "gfx/selfsimilar_gf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gfx/kernels.hpp"

namespace gfx {

ClockedPopulation::ClockedPopulation(TreePopulation pop, double alpha)
    : pop_(std::move(pop)), alpha_(alpha) {
  if (!std::isfinite(alpha)) throw std::invalid_argument("lamperti: alpha must be finite");
  clocks_.resize(pop_.particles.size());
  std::vector<double> start, end, dt, inc;
  for (std::size_t i = 0; i < pop_.particles.size(); ++i) {
    const auto& p = pop_.particles[i];
    auto& c = clocks_[i];
    c.b = p.parent >= 0 ? clocks_[std::size_t(p.parent)].d : 0.0;
    const auto& k = p.path.knots;
    const std::size_t n = k.size() - 1;
    start.resize(n);
    end.resize(n);
    dt.resize(n);
    inc.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      start[j] = k[j].after;
      end[j] = k[j + 1].before;
      dt[j] = k[j + 1].t - k[j].t;
    }
    kernels::loglinear_integrals(start, end, dt, alpha_, inc);
    c.cum.resize(n + 1);
    c.cum[0] = 0.0;
    for (std::size_t j = 0; j < n; ++j) c.cum[j + 1] = c.cum[j] + inc[j];
    c.d = c.b + c.cum.back();
    c.censored = p.cause == DeathCause::Horizon ||
                 (p.cause == DeathCause::Split && (p.children[0] < 0 || p.children[1] < 0));
  }
}

double ClockedPopulation::clock_at(std::size_t i, double s) const {
  const auto& k = pop_.particles[i].path.knots;
  const auto& c = clocks_[i];
  if (s <= 0.0) return c.b;
  if (s >= k.back().t) return c.d;
  auto it = std::upper_bound(k.begin(), k.end(), s, [](double v, const Knot& kn) { return v < kn.t; });
  const std::size_t j = std::size_t(it - k.begin()) - 1;
  const double a = k[j].after;
  const double len = k[j + 1].t - k[j].t;
  const double r = s - k[j].t;
  const double slope = (k[j + 1].before - a) / len;
  const double rate = -alpha_ * slope;
  const double base = std::exp(-alpha_ * a);
  const double part = rate == 0.0 ? base * r : base * std::expm1(rate * r) / rate;
  return c.b + c.cum[j] + part;
}

double ClockedPopulation::tau(std::size_t i, double t) const {
  const auto& k = pop_.particles[i].path.knots;
  const auto& c = clocks_[i];
  const double target = t - c.b;
  if (target <= 0.0) return 0.0;
  if (target >= c.cum.back()) return k.back().t;
  const std::size_t j = std::size_t(std::upper_bound(c.cum.begin(), c.cum.end(), target) - c.cum.begin()) - 1;
  const double rest = target - c.cum[j];
  const double a = k[j].after;
  const double len = k[j + 1].t - k[j].t;
  const double slope = (k[j + 1].before - a) / len;
  const double rate = -alpha_ * slope;
  const double scaled = rest * std::exp(alpha_ * a);
  double r = rate == 0.0 ? scaled : std::log1p(scaled * rate) / rate;
  if (!std::isfinite(r)) r = len;
  return k[j].t + std::clamp(r, 0.0, len);
}

double ClockedPopulation::mass_at(std::size_t i, double t) const {
  return std::exp(pop_.particles[i].path.log_mass_at(tau(i, t)));
}

SelfSimilarSnapshot ClockedPopulation::snapshot(double t) const {
  SelfSimilarSnapshot snap;
  snap.t = t;
  for (std::size_t i = 0; i < clocks_.size(); ++i) {
    if (!visible(i)) continue;
    const auto& c = clocks_[i];
    if (c.b > t) continue;
    if (t < c.d) {
      snap.members.emplace_back(pop_.particles[i].label, mass_at(i, t));
    } else if (c.censored) {
      snap.censored = true;
    }
  }
  return snap;
}

ClockedPopulation lamperti(TreePopulation pop, double alpha) {
  return ClockedPopulation(std::move(pop), alpha);
}

IntervalCount interval_count(const ClockedPopulation& cp, double t, double a, double a_prime) {
  if (!(0.0 < a && a < a_prime)) throw std::invalid_argument("interval_count: need 0 < a < a_prime");
  const auto snap = cp.snapshot(t);
  IntervalCount out;
  out.censored = snap.censored;
  for (const auto& [label, m] : snap.members)
    if (a < m && m < a_prime) ++out.count;
  return out;
}

std::vector<ClockedPopulation> coupled_truncations(const Characteristics& ch,
                                                   const std::vector<double>& eps_levels, double x0,
                                                   double horizon, const SimulateOptions& opts,
                                                   const RandomStream& rng) {
  if (eps_levels.empty()) throw std::invalid_argument("coupled_truncations: no levels");
  for (std::size_t i = 0; i < eps_levels.size(); ++i) {
    if (!(eps_levels[i] > 0.0)) throw std::invalid_argument("coupled_truncations: levels must be > 0");
    if (i > 0 && !(eps_levels[i] < eps_levels[i - 1])) {
      throw std::invalid_argument("coupled_truncations: levels must be strictly decreasing");
    }
  }
  const double eps_min = eps_levels.back();
  const auto fine = simulate(truncated(ch, eps_min), x0, horizon, opts, rng);

  std::vector<ClockedPopulation> out;
  out.reserve(eps_levels.size());
  for (double eps : eps_levels) {
    std::vector<bool> mask(fine.particles.size(), true);
    for (std::size_t i = 0; i < fine.particles.size(); ++i) {
      const auto& p = fine.particles[i];
      if (p.parent < 0) continue;
      const auto& par = fine.particles[std::size_t(p.parent)];
      const bool reclassified = par.split_mark >= -eps;
      mask[i] = mask[std::size_t(p.parent)] && !(reclassified && p.label.last() == 1);
    }
    ClockedPopulation cp(fine, ch.alpha);
    cp.set_visibility(std::move(mask));
    out.push_back(std::move(cp));
  }
  return out;
}

bool sudden_death_indicator(const TreePopulation& pop) {
  if (pop.capped) throw std::logic_error("sudden_death_indicator: population is capped");
  return pop.extinct_by(pop.horizon);
}

std::vector<std::size_t> eve_line(const TreePopulation& pop) {
  std::vector<std::size_t> line;
  if (pop.particles.empty()) return line;
  std::size_t i = 0;
  for (;;) {
    line.push_back(i);
    const auto c = pop.particles[i].children[0];
    if (c < 0) break;
    i = std::size_t(c);
  }
  return line;
}

}  // namespace gfx
