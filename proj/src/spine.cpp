#include "gfx/spine.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "gfx/kernels.hpp"

namespace gfx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double mean_of(const std::vector<double>& v, double* se) {
  const double n = double(v.size());
  if (v.empty()) {
    *se = 0.0;
    return 0.0;
  }
  double s = 0.0, s2 = 0.0;
  for (double x : v) {
    s += x;
    s2 += x * x;
  }
  const double m = s / n;
  *se = v.size() > 1 ? std::sqrt(std::max(s2 / n - m * m, 0.0) / (n - 1.0)) : 0.0;
  return m;
}

std::vector<double> knot_clock(const PathRecord& path, double alpha) {
  const auto& k = path.knots;
  const std::size_t n = k.size() - 1;
  std::vector<double> a(n), b(n), dt(n), inc(n), cum(n + 1, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    a[j] = k[j].after;
    b[j] = k[j + 1].before;
    dt[j] = k[j + 1].t - k[j].t;
  }
  kernels::loglinear_integrals(a, b, dt, alpha, inc);
  for (std::size_t j = 0; j < n; ++j) cum[j + 1] = cum[j] + inc[j];
  return cum;
}

}  // namespace

SpineSpec make_spine_spec(const Characteristics& ch, double q, double path_eps, double step) {
  if (!(q > 0.0)) throw std::invalid_argument("spine: tilt q must be > 0");
  SpineSpec s;
  s.base = ch;
  s.q = q;
  s.kappa_q = kappa(ch, q);
  if (!std::isfinite(s.kappa_q)) throw std::invalid_argument("spine: kappa(q) is infinite");
  s.kappa_dot_q = kappa_dot(ch, q);

  const double l1_drift = ch.lambda1.is_zero() ? 0.0 : ch.lambda1.frac_moment(1.0);
  s.path.kill_rate = 0.0;
  s.path.sigma2 = ch.sigma2;
  s.path.drift = ch.sigma2 * q + ch.b + l1_drift +
                 ch.lambda2.integrate(Integrand::tilt_compensator(q));
  s.path.jumps = JumpMeasure::tilted(q, ch.lambda2);
  s.path.path_eps = path_eps;
  s.path.step = step;

  s.birth_rate = ch.lambda1.integrate(Integrand::exp_tilt(q)) + ch.lambda1.frac_moment(q);
  if (!std::isfinite(s.birth_rate)) {
    throw std::invalid_argument("spine: birth intensity is infinite; truncate Lambda_1 first");
  }
  if (ch.lambda1.is_atomic()) {
    for (const auto& a : ch.lambda1.flatten_atoms()) {
      const double other = -std::expm1(a.location);
      s.options.push_back({a.location, 0, a.weight * std::exp(q * a.location)});
      s.options.push_back({std::log(other), 1, a.weight * std::pow(other, q)});
    }
  }
  return s;
}

double spine_exponent(const SpineSpec& s, double p) {
  const auto& l1 = s.base.lambda1;
  const double births = l1.integrate(Integrand::exp_tilt(s.q + p)) -
                        l1.integrate(Integrand::exp_tilt(s.q)) + l1.frac_moment(s.q + p) -
                        l1.frac_moment(s.q);
  return spec_exponent(s.path, p) + births;
}

double exponent_gap(const SpineSpec& s, const std::vector<double>& ps) {
  double worst = 0.0;
  for (double p : ps) worst = std::max(worst, std::abs(spine_exponent(s, p) - phi(s.base, s.q, p)));
  return worst;
}

BirthMark sample_spine_birth(const SpineSpec& s, RandomStream& rng) {
  if (!s.options.empty()) {
    double total = 0.0;
    for (const auto& o : s.options) total += o.weight;
    const double target = rng.uniform() * total;
    double acc = 0.0;
    for (const auto& o : s.options) {
      acc += o.weight;
      if (target < acc) return {o.log_jump, o.branch};
    }
    return {s.options.back().log_jump, s.options.back().branch};
  }
  // Propose J from Lambda_1 and accept with (e^{qJ} + (1-e^J)^q)/2 <= 1.
  for (;;) {
    const double J = s.base.lambda1.sample(rng);
    const double stay = std::exp(s.q * J);
    const double other = -std::expm1(J);
    const double move = std::pow(other, s.q);
    if (rng.uniform() * 2.0 >= stay + move) continue;
    if (rng.uniform() * (stay + move) < stay) return {J, 0};
    return {std::log(other), 1};
  }
}

SpineRealization simulate_spine(const SpineSpec& spec, double x0, double chi_horizon, double alpha,
                                const RandomStream& rng) {
  if (!(x0 > 0.0)) throw std::invalid_argument("simulate_spine: x0 must be > 0");
  const PathSampler sampler(spec.path);
  BirthProcess births;
  births.rate = spec.birth_rate;
  births.mark = [&spec](RandomStream& r) { return sample_spine_birth(spec, r); };
  RandomStream stream(rng.seed(), derive_stream({rng.stream(), 0x5B1E}));

  SpineRealization real;
  real.alpha = alpha;
  real.rng = rng;
  real.path = sampler.sample(births, std::log(x0), chi_horizon, stream);
  real.clock = knot_clock(real.path, alpha);

  std::size_t j = 0;
  const auto& k = real.path.knots;
  for (const auto& ev : real.path.events) {
    if (ev.origin != JumpOrigin::Birth) continue;
    while (k[j].t < ev.t) ++j;
    const double before = k[j].before;
    real.siblings.push_back(
        {ev.t, before + std::log(-std::expm1(ev.y)), real.clock[j], ev.branch == 1});
  }
  return real;
}

TreePopulation expand_sibling(const SpineSpec& spec, const SpineRealization& real, std::size_t n,
                              double horizon, const SimulateOptions& opts) {
  if (n >= real.siblings.size()) throw std::out_of_range("expand_sibling: no such sibling");
  const RandomStream r(real.rng.seed(), derive_stream({real.rng.stream(), 0x51B, n}));
  return simulate_log(spec.base, real.siblings[n].log_mass, horizon, opts, r);
}

LifetimeEstimate path_lifetime(const PathRecord& path, double alpha) {
  LifetimeEstimate out;
  out.estimate = knot_clock(path, alpha).back();
  const double H = path.end_time();
  const double mu = (path.final_after() - path.start_log_mass) / H;
  out.tail_bound = alpha * mu > 0.0 ? std::exp(-alpha * path.final_after()) / (alpha * mu) : kInf;
  return out;
}

LifetimeEstimate spine_lifetime(const SpineSpec& spec, const SpineRealization& real) {
  const double a = real.alpha;
  const bool ok = (a < 0.0 && spec.kappa_dot_q < 0.0) || (a > 0.0 && spec.kappa_dot_q > 0.0);
  if (!ok) {
    throw std::invalid_argument(
        "spine_lifetime: need alpha < 0 with kappa'(q) < 0 or alpha > 0 with kappa'(q) > 0");
  }
  return path_lifetime(real.path, a);
}

ChangeOfMeasureResult change_of_measure_check(const Characteristics& ch, double q, double t,
                                              const PopulationStatistic& f, std::size_t n_runs,
                                              const RandomStream& rng, const SimulateOptions& opts) {
  if (!(t > 0.0)) throw std::invalid_argument("change_of_measure_check: t must be > 0");
  const double kq = kappa(ch, q);
  if (!std::isfinite(kq)) throw std::invalid_argument("change_of_measure_check: kappa(q) is infinite");
  const SpineSpec spec = make_spine_spec(ch, q, opts.path_eps, opts.step);

  ChangeOfMeasureResult res;
  std::vector<double> pv, qv;
  pv.reserve(n_runs);
  qv.reserve(n_runs);
  for (std::size_t i = 0; i < n_runs; ++i) {
    const RandomStream pr(rng.seed(), derive_stream({rng.stream(), 0xC0, 0, i}));
    const auto pop = simulate(ch, 1.0, t, opts, pr);
    if (pop.capped) {
      ++res.p_excluded;
    } else {
      const auto logs = pop.log_snapshot(t);
      pv.push_back(additive_martingale(pop, t, q, kq) * f(logs));
    }

    const RandomStream qr(rng.seed(), derive_stream({rng.stream(), 0xC0, 1, i}));
    const auto real = simulate_spine(spec, 1.0, t, 0.0, qr);
    std::vector<double> logs{real.path.final_after()};
    bool capped = false;
    for (std::size_t n = 0; n < real.siblings.size() && !capped; ++n) {
      const double local = t - real.siblings[n].chi_time;
      const auto sub = expand_sibling(spec, real, n, local, opts);
      if (sub.capped) {
        capped = true;
        break;
      }
      const auto sl = sub.log_snapshot(local);
      logs.insert(logs.end(), sl.begin(), sl.end());
    }
    if (capped) {
      ++res.q_excluded;
    } else {
      qv.push_back(f(logs));
    }
  }
  res.p_mean = mean_of(pv, &res.p_se);
  res.q_mean = mean_of(qv, &res.q_se);
  const double s = std::hypot(res.p_se, res.q_se);
  res.z = s > 0.0 ? (res.p_mean - res.q_mean) / s : (res.p_mean == res.q_mean ? 0.0 : kInf);
  return res;
}

}  // namespace gfx
