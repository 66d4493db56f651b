#include "gfx/cumulant.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace gfx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_q(double q, const char* what) {
  if (!(q >= 0.0) || !std::isfinite(q)) throw std::domain_error(std::string(what) + ": q must be >= 0");
}

bool in_domain(const Characteristics& ch, double q) {
  const double qb = q_bar(ch);
  return q > qb || (q == qb && q_bar_attained(ch));
}

}  // namespace

Characteristics Characteristics::make(double k, double sigma2, double b, JumpMeasure lambda1,
                                      JumpMeasure lambda2, double alpha) {
  Characteristics ch{k, sigma2, b, std::move(lambda1), std::move(lambda2), alpha};
  validate(ch);
  return ch;
}

void validate(const Characteristics& ch) {
  if (!(ch.k >= 0.0) || !std::isfinite(ch.k)) throw std::invalid_argument("k must be finite and >= 0");
  if (!(ch.sigma2 >= 0.0) || !std::isfinite(ch.sigma2)) {
    throw std::invalid_argument("sigma2 must be finite and >= 0");
  }
  if (!std::isfinite(ch.b)) throw std::invalid_argument("b must be finite");
  if (!std::isfinite(ch.alpha)) throw std::invalid_argument("alpha must be finite");
  if (ch.k == 0.0 && !(psi_dot(ch, 0.0) < 0.0)) {
    throw std::invalid_argument(
        "characteristics rejected: need k > 0 or Psi'(0+) < 0 (process must be killed or drift to 0)");
  }
}

Characteristics truncated(const Characteristics& ch, double eps) {
  auto pair = truncate(ch.lambda1, ch.lambda2, eps);
  return {ch.k, ch.sigma2, ch.b, pair.lambda1_eps, pair.lambda2_eps, ch.alpha};
}

double psi(const Characteristics& ch, double q) {
  require_q(q, "psi");
  const auto g = Integrand::compensated_exp(q);
  return -ch.k + 0.5 * ch.sigma2 * q * q + ch.b * q + ch.lambda1.integrate(g) + ch.lambda2.integrate(g);
}

double psi_dot(const Characteristics& ch, double q) {
  require_q(q, "psi_dot");
  const auto g = Integrand::compensated_exp_derivative(q);
  return ch.sigma2 * q + ch.b + ch.lambda1.integrate(g) + ch.lambda2.integrate(g);
}

double psi2(const Characteristics& ch, double q) {
  require_q(q, "psi2");
  const double drift = ch.b + (ch.lambda1.is_zero() ? 0.0 : ch.lambda1.frac_moment(1.0));
  return -ch.k + 0.5 * ch.sigma2 * q * q + drift * q +
         ch.lambda2.integrate(Integrand::compensated_exp(q));
}

double kappa(const Characteristics& ch, double q) {
  require_q(q, "kappa");
  const double jumps = ch.lambda1.frac_moment(q);
  if (jumps == kInf) return kInf;
  return psi(ch, q) + jumps;
}

double kappa_dot(const Characteristics& ch, double q) {
  require_q(q, "kappa_dot");
  if (!in_domain(ch, q)) throw std::domain_error("kappa_dot: kappa is infinite at q");
  return psi_dot(ch, q) + ch.lambda1.integrate(Integrand::frac_log_moment(q));
}

double kappa_truncated(const Characteristics& ch, double eps, double q) {
  if (!(eps > 0.0)) throw std::domain_error("kappa_truncated: eps must be > 0");
  return kappa(truncated(ch, eps), q);
}

double kappa_dot_truncated(const Characteristics& ch, double eps, double q) {
  if (!(eps > 0.0)) throw std::domain_error("kappa_dot_truncated: eps must be > 0");
  return kappa_dot(truncated(ch, eps), q);
}

double phi(const Characteristics& ch, double q_tilt, double p) {
  const double base = kappa(ch, q_tilt);
  if (!std::isfinite(base)) throw std::domain_error("phi: kappa(q_tilt) must be finite");
  if (p == 0.0) return 0.0;
  return kappa(ch, q_tilt + p) - base;
}

double q_bar(const Characteristics& ch) { return ch.lambda1.frac_moment_threshold(); }

bool q_bar_attained(const Characteristics& ch) { return ch.lambda1.threshold_attained(); }

std::optional<double> find_qm(const Characteristics& ch) {
  const double qb = q_bar(ch);
  const bool closed = q_bar_attained(ch);
  if (closed && kappa_dot(ch, qb) >= 0.0) return qb;

  // Bracket the sign change of kappa'.
  double lo = qb;
  double hi = std::max(2.0 * qb, qb + 1.0);
  while (kappa_dot(ch, hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) return std::nullopt;
  }
  const double bracket_lo = lo;
  const double bracket_hi = hi;

  for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (kappa_dot(ch, mid) < 0.0) lo = mid;
    else hi = mid;
  }
  const double by_root = 0.5 * (lo + hi);

  // Golden-section on kappa itself; only interior points are evaluated, so an
  // open left end at q_bar is harmless.
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = bracket_lo;
  double b = bracket_hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = kappa(ch, c);
  double fd = kappa(ch, d);
  for (int i = 0; i < 200 && b - a > 1e-10; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = kappa(ch, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = kappa(ch, d);
    }
  }
  const double by_golden = 0.5 * (a + b);
  if (std::abs(by_golden - by_root) > 1e-6) {
    throw std::runtime_error("find_qm: golden-section and derivative bisection disagree");
  }
  return by_root;
}

CumulantProfile classify(const Characteristics& ch) {
  CumulantProfile p;
  p.q_bar = q_bar(ch);
  p.q_bar_attained = q_bar_attained(ch);
  p.degenerate = ch.lambda1.is_zero();

  // Geometric grid on (max(q_bar, 1e-3), 64], plus q_bar itself when kappa is
  // finite there.
  constexpr int kGrid = 512;
  const double lo = std::max(p.q_bar, 1e-3);
  std::vector<double> qs;
  qs.reserve(kGrid + 1);
  if (p.q_bar_attained) qs.push_back(p.q_bar);
  for (int i = 1; i <= kGrid; ++i) qs.push_back(lo * std::pow(64.0 / lo, double(i) / kGrid));

  double grid_min = kInf;
  double prev_q = -1.0;
  for (double q : qs) {
    const double kv = kappa(ch, q);
    grid_min = std::min(grid_min, kv);
    if (!p.malthusian_witness && kv <= 0.0) {
      // Refine toward the first sign change, keeping kappa <= 0 at the witness.
      double good = q;
      if (prev_q >= 0.0) {
        double bad = prev_q;
        for (int i = 0; i < 100 && good - bad > 1e-12; ++i) {
          const double mid = 0.5 * (good + bad);
          if (kappa(ch, mid) <= 0.0) good = mid;
          else bad = mid;
        }
      }
      p.malthusian_witness = good;
    }
    prev_q = q;
  }

  p.q_m = find_qm(ch);
  p.kappa_min = p.q_m ? std::min(kappa(ch, *p.q_m), grid_min) : grid_min;
  p.indeterminate = std::abs(p.kappa_min) <= kPositivityTol;
  p.hypothesis_H = !p.degenerate && p.kappa_min > kPositivityTol && !p.malthusian_witness;

  if (p.q_bar > 0.0) {
    p.technical_condition = true;
  } else if (p.q_bar_attained) {
    p.technical_condition = kappa_dot(ch, 0.0) < 0.0;
  }

  if (p.hypothesis_H && p.q_m) {
    try {
      auto [qm, qp] = select_tilts(ch, p);
      p.q_minus = qm;
      p.q_plus = qp;
      p.kappa_dot_minus = kappa_dot(ch, qm);
      p.kappa_dot_plus = kappa_dot(ch, qp);
    } catch (const std::runtime_error&) {
      // left empty: not usable for tilted experiments
    }
  }
  return p;
}

std::pair<double, double> select_tilts(const Characteristics& ch, const CumulantProfile& profile) {
  if (!profile.hypothesis_H || !profile.q_m) {
    throw std::runtime_error("select_tilts: hypothesis (H) does not hold");
  }
  const double qm = *profile.q_m;
  for (double delta = 0.5; delta >= 1e-6; delta *= 0.5) {
    const double lo = qm - delta;
    const double hi = qm + delta;
    if (!(lo > 0.0) || !in_domain(ch, lo)) continue;
    const double k_lo = kappa(ch, lo);
    const double k_hi = kappa(ch, hi);
    if (!std::isfinite(k_lo) || !std::isfinite(k_hi)) continue;
    const double d_lo = kappa_dot(ch, lo);
    const double d_hi = kappa_dot(ch, hi);
    if (!(d_lo < 0.0 && 0.0 < d_hi)) continue;
    if (!(d_lo < k_lo / lo) || !(d_hi < k_hi / hi)) continue;
    return {lo, hi};
  }
  throw std::runtime_error("select_tilts: no admissible tilt pair down to delta = 1e-6");
}

}  // namespace gfx
