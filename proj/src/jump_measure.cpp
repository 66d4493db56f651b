#include "gfx/jump_measure.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gfx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Below this |y| the power-density integrand is replaced by its leading term.
constexpr double kSingularCut = 1e-10;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double one_minus_exp(double y) { return -std::expm1(y); }

// Integral of g over |y| in (lo, hi) against c u^{-1-beta} du, lo > 0, in the
// variable v = ln u where the integrand is smooth. The depth cap bounds the
// work when the integrand is pure rounding noise (e.g. compensated moments at
// q within an ulp of 1), where the relative tolerance can never be met.
double power_numeric(const Integrand& g, const JumpMeasure::PowerData& p, double lo, double hi) {
  if (!(lo < hi)) return 0.0;
  auto h = [&](double v) {
    const double u = std::exp(v);
    return g.f(-u) * p.c * std::exp(-p.beta * v);
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      h, std::log(lo), std::log(hi), 10, 1e-13);
}

// c * coeff * integral_0^d u^{s-1} (ln u)^k du
double power_origin(const Integrand& g, const JumpMeasure::PowerData& p, double d) {
  if (g.coeff == 0.0) return 0.0;
  const double s = g.power - p.beta;
  if (s <= 0.0) return g.coeff > 0.0 ? kInf : -kInf;
  const double ds = std::pow(d, s);
  if (g.log_power == 0) return p.c * g.coeff * ds / s;
  return p.c * g.coeff * ds * (std::log(d) / s - 1.0 / (s * s));
}

double power_tail(const JumpMeasure::PowerData& p, double eps) {
  const double lo = std::max(eps, p.inner);
  if (lo >= p.cutoff) return 0.0;
  if (lo == 0.0) return kInf;
  return p.c / p.beta * (std::pow(lo, -p.beta) - std::pow(p.cutoff, -p.beta));
}

}  // namespace

Integrand Integrand::frac_moment(double q) {
  return {[q](double y) { return std::pow(one_minus_exp(y), q); }, 1.0, q, 0};
}

Integrand Integrand::frac_log_moment(double q) {
  return {[q](double y) {
            const double w = one_minus_exp(y);
            return std::log(w) * std::pow(w, q);
          },
          1.0, q, 1};
}

Integrand Integrand::compensated_exp(double q) {
  return {[q](double y) { return std::expm1(q * y) - q * std::expm1(y); }, 0.5 * q * (q - 1.0),
          2.0, 0};
}

Integrand Integrand::compensated_exp_derivative(double q) {
  return {[q](double y) { return y * std::exp(q * y) - std::expm1(y); }, q - 0.5, 2.0, 0};
}

Integrand Integrand::exp_tilt(double theta) {
  return {[theta](double y) { return std::exp(theta * y); }, 1.0, 0.0, 0};
}

Integrand Integrand::small_jump_drift() {
  return {[](double y) { return y - std::expm1(y); }, -0.5, 2.0, 0};
}

Integrand Integrand::square() {
  return {[](double y) { return y * y; }, 1.0, 2.0, 0};
}

Integrand Integrand::tilt_compensator(double theta) {
  return {[theta](double y) { return std::expm1(y) * std::expm1(theta * y); }, theta, 2.0, 0};
}

JumpMeasure::JumpMeasure() : repr_(std::make_shared<const Repr>(AtomicData{})) {}

JumpMeasure::JumpMeasure(Repr r) : repr_(std::make_shared<const Repr>(std::move(r))) {}

JumpMeasure JumpMeasure::atoms(std::vector<Atom> atoms) {
  for (const auto& a : atoms) {
    if (!(a.location < 0.0) || !std::isfinite(a.location)) {
      throw std::invalid_argument("atom location must be finite and strictly negative");
    }
    if (!(a.weight > 0.0) || !std::isfinite(a.weight)) {
      throw std::invalid_argument("atom weight must be finite and strictly positive");
    }
  }
  return JumpMeasure(AtomicData{std::move(atoms)});
}

JumpMeasure JumpMeasure::power(double c, double beta, double cutoff, double inner) {
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("power density: c must be > 0");
  if (!(beta > 0.0 && beta < 2.0)) throw std::invalid_argument("power density: beta must lie in (0,2)");
  if (!(cutoff > 0.0) || !std::isfinite(cutoff)) {
    throw std::invalid_argument("power density: cutoff L must be > 0");
  }
  if (!(inner >= 0.0)) throw std::invalid_argument("power density: inner cutoff must be >= 0");
  if (inner >= cutoff) return JumpMeasure();
  return JumpMeasure(PowerData{c, beta, cutoff, inner});
}

JumpMeasure JumpMeasure::sum(std::vector<JumpMeasure> parts) {
  std::erase_if(parts, [](const JumpMeasure& m) { return m.is_zero(); });
  if (parts.empty()) return JumpMeasure();
  if (parts.size() == 1) return parts.front();
  return JumpMeasure(SumData{std::move(parts)});
}

JumpMeasure JumpMeasure::scaled(double factor, JumpMeasure base) {
  if (!(factor >= 0.0) || !std::isfinite(factor)) {
    throw std::invalid_argument("scale factor must be finite and >= 0");
  }
  if (factor == 0.0 || base.is_zero()) return JumpMeasure();
  return JumpMeasure(ScaledData{factor, std::make_shared<const JumpMeasure>(std::move(base))});
}

JumpMeasure JumpMeasure::tilted(double theta, JumpMeasure base) {
  if (!(theta >= 0.0) || !std::isfinite(theta)) {
    throw std::invalid_argument("tilt exponent must be finite and >= 0");
  }
  if (base.is_zero()) return JumpMeasure();
  if (theta == 0.0) return base;
  return JumpMeasure(TiltedData{theta, std::make_shared<const JumpMeasure>(std::move(base))});
}

bool JumpMeasure::is_zero() const {
  const auto* a = std::get_if<AtomicData>(repr_.get());
  return a != nullptr && a->atoms.empty();
}

double JumpMeasure::tail_mass(double eps) const {
  if (!(eps > 0.0)) throw std::domain_error("tail_mass: eps must be > 0");
  return std::visit(
      Overloaded{
          [&](const AtomicData& a) {
            double m = 0.0;
            for (const auto& at : a.atoms)
              if (at.location < -eps) m += at.weight;
            return m;
          },
          [&](const PowerData& p) { return power_tail(p, eps); },
          [&](const SumData& s) {
            double m = 0.0;
            for (const auto& part : s.parts) m += part.tail_mass(eps);
            return m;
          },
          [&](const ScaledData& s) { return s.factor * s.base->tail_mass(eps); },
          [&](const TiltedData& t) {
            return t.base->below(eps).integrate(Integrand::exp_tilt(t.theta));
          }},
      *repr_);
}

double JumpMeasure::total_mass() const {
  return std::visit(Overloaded{[](const AtomicData& a) {
                                 double m = 0.0;
                                 for (const auto& at : a.atoms) m += at.weight;
                                 return m;
                               },
                               [](const PowerData& p) { return power_tail(p, 0.0); },
                               [](const SumData& s) {
                                 double m = 0.0;
                                 for (const auto& part : s.parts) m += part.total_mass();
                                 return m;
                               },
                               [](const ScaledData& s) { return s.factor * s.base->total_mass(); },
                               [](const TiltedData& t) {
                                 return t.base->integrate(Integrand::exp_tilt(t.theta));
                               }},
                    *repr_);
}

double JumpMeasure::integrate(const Integrand& g) const {
  return std::visit(
      Overloaded{[&](const AtomicData& a) {
                   double acc = 0.0;
                   for (const auto& at : a.atoms) acc += at.weight * g.f(at.location);
                   return acc;
                 },
                 [&](const PowerData& p) {
                   if (p.inner > 0.0) return power_numeric(g, p, p.inner, p.cutoff);
                   const double d = std::min(kSingularCut, p.cutoff);
                   const double head = power_origin(g, p, d);
                   if (!std::isfinite(head)) return head;
                   return head + power_numeric(g, p, d, p.cutoff);
                 },
                 [&](const SumData& s) {
                   double acc = 0.0;
                   for (const auto& part : s.parts) acc += part.integrate(g);
                   return acc;
                 },
                 [&](const ScaledData& s) { return s.factor * s.base->integrate(g); },
                 [&](const TiltedData& t) {
                   const double theta = t.theta;
                   Integrand tilted{[f = g.f, theta](double y) { return f(y) * std::exp(theta * y); },
                                    g.coeff, g.power, g.log_power};
                   return t.base->integrate(tilted);
                 }},
      *repr_);
}

double JumpMeasure::frac_moment(double q) const {
  if (!(q >= 0.0)) throw std::domain_error("frac_moment: q must be >= 0");
  return integrate(Integrand::frac_moment(q));
}

double JumpMeasure::frac_moment_threshold() const {
  return std::visit(Overloaded{[](const AtomicData&) { return 0.0; },
                               [](const PowerData& p) { return p.inner > 0.0 ? 0.0 : p.beta; },
                               [](const SumData& s) {
                                 double t = 0.0;
                                 for (const auto& part : s.parts)
                                   t = std::max(t, part.frac_moment_threshold());
                                 return t;
                               },
                               [](const ScaledData& s) { return s.base->frac_moment_threshold(); },
                               [](const TiltedData& t) { return t.base->frac_moment_threshold(); }},
                    *repr_);
}

bool JumpMeasure::threshold_attained() const {
  return std::visit(Overloaded{[](const AtomicData&) { return true; },
                               [](const PowerData& p) { return p.inner > 0.0; },
                               [this](const SumData& s) {
                                 const double t = frac_moment_threshold();
                                 for (const auto& part : s.parts) {
                                   if (part.frac_moment_threshold() == t && !part.threshold_attained())
                                     return false;
                                 }
                                 return true;
                               },
                               [](const ScaledData& s) { return s.base->threshold_attained(); },
                               [](const TiltedData& t) { return t.base->threshold_attained(); }},
                    *repr_);
}

double JumpMeasure::sample_restricted(double eps, RandomStream& rng) const {
  if (!(eps > 0.0)) throw std::domain_error("sample_restricted: eps must be > 0");
  if (!(tail_mass(eps) > 0.0)) {
    throw std::logic_error("sample_restricted: zero mass below -eps");
  }
  return sample_range(eps, rng);
}

double JumpMeasure::sample(RandomStream& rng) const {
  const double m = total_mass();
  if (!(m > 0.0) || !std::isfinite(m)) {
    throw std::logic_error("sample: total mass must be finite and positive");
  }
  return sample_range(0.0, rng);
}

double JumpMeasure::sample_range(double lo, RandomStream& rng) const {
  return std::visit(
      Overloaded{
          [&](const AtomicData& a) {
            double total = 0.0;
            for (const auto& at : a.atoms)
              if (-at.location > lo) total += at.weight;
            const double target = rng.uniform() * total;
            double acc = 0.0;
            double last = 0.0;
            for (const auto& at : a.atoms) {
              if (!(-at.location > lo)) continue;
              acc += at.weight;
              last = at.location;
              if (target < acc) return at.location;
            }
            return last;
          },
          [&](const PowerData& p) {
            const double a = std::max(lo, p.inner);
            const double ta = std::pow(a, -p.beta);
            const double tl = std::pow(p.cutoff, -p.beta);
            const double u = rng.uniform();
            return -std::pow(ta - u * (ta - tl), -1.0 / p.beta);
          },
          [&](const SumData& s) {
            std::vector<double> w;
            w.reserve(s.parts.size());
            double total = 0.0;
            for (const auto& part : s.parts) {
              const double m = lo > 0.0 ? part.tail_mass(lo) : part.total_mass();
              w.push_back(m);
              total += m;
            }
            const double target = rng.uniform() * total;
            double acc = 0.0;
            std::size_t pick = 0;
            for (; pick + 1 < w.size(); ++pick) {
              acc += w[pick];
              if (target < acc && w[pick] > 0.0) break;
            }
            while (w[pick] == 0.0 && pick > 0) --pick;
            return s.parts[pick].sample_range(lo, rng);
          },
          [&](const ScaledData& s) { return s.base->sample_range(lo, rng); },
          [&](const TiltedData& t) {
            for (;;) {
              const double y = t.base->sample_range(lo, rng);
              if (rng.uniform() < std::exp(t.theta * y)) return y;
            }
          }},
      *repr_);
}

JumpMeasure JumpMeasure::below(double eps) const {
  if (!(eps >= 0.0)) throw std::domain_error("below: eps must be >= 0");
  return std::visit(
      Overloaded{[&](const AtomicData& a) {
                   std::vector<Atom> kept;
                   for (const auto& at : a.atoms)
                     if (at.location < -eps) kept.push_back(at);
                   return JumpMeasure(AtomicData{std::move(kept)});
                 },
                 [&](const PowerData& p) {
                   return power(p.c, p.beta, p.cutoff, std::max(p.inner, eps));
                 },
                 [&](const SumData& s) {
                   std::vector<JumpMeasure> parts;
                   for (const auto& part : s.parts) parts.push_back(part.below(eps));
                   return sum(std::move(parts));
                 },
                 [&](const ScaledData& s) { return scaled(s.factor, s.base->below(eps)); },
                 [&](const TiltedData& t) { return tilted(t.theta, t.base->below(eps)); }},
      *repr_);
}

JumpMeasure JumpMeasure::above(double eps) const {
  if (!(eps >= 0.0)) throw std::domain_error("above: eps must be >= 0");
  return std::visit(
      Overloaded{[&](const AtomicData& a) {
                   std::vector<Atom> kept;
                   for (const auto& at : a.atoms)
                     if (at.location >= -eps) kept.push_back(at);
                   return JumpMeasure(AtomicData{std::move(kept)});
                 },
                 [&](const PowerData& p) {
                   const double hi = std::min(p.cutoff, eps);
                   if (hi <= p.inner) return JumpMeasure();
                   return power(p.c, p.beta, hi, p.inner);
                 },
                 [&](const SumData& s) {
                   std::vector<JumpMeasure> parts;
                   for (const auto& part : s.parts) parts.push_back(part.above(eps));
                   return sum(std::move(parts));
                 },
                 [&](const ScaledData& s) { return scaled(s.factor, s.base->above(eps)); },
                 [&](const TiltedData& t) { return tilted(t.theta, t.base->above(eps)); }},
      *repr_);
}

bool JumpMeasure::is_atomic() const {
  return std::visit(Overloaded{[](const AtomicData&) { return true; },
                               [](const PowerData&) { return false; },
                               [](const SumData& s) {
                                 return std::all_of(s.parts.begin(), s.parts.end(),
                                                    [](const JumpMeasure& m) { return m.is_atomic(); });
                               },
                               [](const ScaledData& s) { return s.base->is_atomic(); },
                               [](const TiltedData& t) { return t.base->is_atomic(); }},
                    *repr_);
}

std::vector<JumpMeasure::Atom> JumpMeasure::flatten_atoms() const {
  return std::visit(
      Overloaded{[](const AtomicData& a) { return a.atoms; },
                 [](const PowerData&) -> std::vector<Atom> {
                   throw std::logic_error("flatten_atoms: measure has a density part");
                 },
                 [](const SumData& s) {
                   std::vector<Atom> out;
                   for (const auto& part : s.parts) {
                     auto sub = part.flatten_atoms();
                     out.insert(out.end(), sub.begin(), sub.end());
                   }
                   return out;
                 },
                 [](const ScaledData& s) {
                   auto out = s.base->flatten_atoms();
                   for (auto& a : out) a.weight *= s.factor;
                   return out;
                 },
                 [](const TiltedData& t) {
                   auto out = t.base->flatten_atoms();
                   for (auto& a : out) a.weight *= std::exp(t.theta * a.location);
                   return out;
                 }},
      *repr_);
}

TruncatedPair truncate(const JumpMeasure& lambda1, const JumpMeasure& lambda2, double eps) {
  if (!(eps > 0.0)) throw std::domain_error("truncate: eps must be > 0");
  return {eps, lambda1.below(eps), JumpMeasure::sum({lambda2, lambda1.above(eps)})};
}

}  // namespace gfx
