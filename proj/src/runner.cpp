#include "gfx/runner.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "gfx/cumulant.hpp"
#include "gfx/explosion.hpp"
#include "gfx/homogeneous_gf.hpp"
#include "gfx/kernels.hpp"
#include "gfx/replicate.hpp"
#include "gfx/selfsimilar_gf.hpp"
#include "gfx/spine.hpp"

namespace gfx::runner {

namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// one-sided 99% Student quantile for a slope fitted to n points
double t99(std::size_t n) {
  return boost::math::quantile(boost::math::students_t(double(n - 2)), 0.99);
}

// ---------------------------------------------------------------------------
// Schema

struct Field {
  enum Kind { Num, Int, Bool, Str, NumList, Obj, Measure } kind = Num;
  Json def;  // null: required
  double lo = -kInf, hi = kInf;
  bool lo_open = false;
  bool integral = false;  // lists only
  std::vector<std::string> choices;
  std::vector<std::pair<std::string, Field>> fields;
};

Field num(double def, double lo = -kInf, double hi = kInf, bool lo_open = false) {
  Field f;
  f.kind = Field::Num;
  f.def = def;
  f.lo = lo;
  f.hi = hi;
  f.lo_open = lo_open;
  return f;
}

Field integer(std::int64_t def, double lo, double hi) {
  Field f;
  f.kind = Field::Int;
  f.def = def;
  f.lo = lo;
  f.hi = hi;
  return f;
}

Field boolean(bool def) {
  Field f;
  f.kind = Field::Bool;
  f.def = def;
  return f;
}

Field choice(Json def, std::vector<std::string> choices) {
  Field f;
  f.kind = Field::Str;
  f.def = std::move(def);
  f.choices = std::move(choices);
  return f;
}

Field list(std::vector<double> def, double lo = -kInf, double hi = kInf, bool lo_open = false) {
  Field f;
  f.kind = Field::NumList;
  f.def = def;
  f.lo = lo;
  f.hi = hi;
  f.lo_open = lo_open;
  return f;
}

Field integral(Field f) {
  f.integral = true;
  Json def = Json::array();
  for (const auto& v : f.def) def.push_back(v.get<std::int64_t>());
  f.def = def;
  return f;
}

Field object(std::vector<std::pair<std::string, Field>> fields) {
  Field f;
  f.kind = Field::Obj;
  f.def = Json::object();
  f.fields = std::move(fields);
  return f;
}

Field measure() {
  Field f;
  f.kind = Field::Measure;
  f.def = Json{{"type", "zero"}};
  return f;
}

const Field& schema() {
  static const Field root = object({
      {"experiment", choice(nullptr, experiments())},
      {"characteristics", object({
                              {"k", num(0.0, 0.0)},
                              {"sigma2", num(0.0, 0.0)},
                              {"b", num(0.0)},
                              {"lambda1", measure()},
                              {"lambda2", measure()},
                              {"alpha", num(0.0)},
                          })},
      {"simulation", object({
                         {"x0", num(1.0, 0.0, kInf, true)},
                         {"chi_horizon", num(1.0, 0.0, 1e6, true)},
                         {"step", num(1e-3, 0.0, 1.0, true)},
                         {"path_eps", num(1e-4, 0.0, 1.0, true)},
                         {"eps_levels", list({0.2, 0.1, 0.05}, 0.0, 1.0, true)},
                         {"caps", object({
                                      {"max_particles", integer(1'000'000, 1, 1e9)},
                                      {"max_generation", integer(60, 1, 62)},
                                  })},
                     })},
      {"statistics", object({
                         {"q", list({1.0}, 0.0)},
                         {"t", list({1.0}, 0.0, kInf, true)},
                         {"p", list({0.5, 1.0})},
                         {"a", num(0.5, 0.0, kInf, true)},
                         {"a_prime", num(2.0, 0.0, kInf, true)},
                         {"replicas", integer(1000, 1, 1e9)},
                         {"seed", integer(1, 0, 9007199254740991.0)},
                         {"n_sigma", num(3.0, 0.0, kInf, true)},
                         {"tolerance", num(1e-3, 0.0, 1.0)},
                     })},
      {"cumulant", object({
                       {"q_min", num(0.0, 0.0)},
                       {"q_max", num(4.0, 0.0)},
                       {"points", integer(81, 2, 1e6)},
                   })},
      {"extinction", object({
                         {"generations", integer(20, 1, 60)},
                         {"by_time", boolean(false)},
                     })},
      {"explode", object({
                      {"mode", choice("spine", {"spine", "direct"})},
                      {"replicas", integer(1, 1, 1e6)},
                      {"budgets", integral(list({100, 1000, 10000}, 1.0, 1e9))},
                      {"chi_horizon", num(0.0, 0.0)},
                      {"n_probes", integer(16, 1, 1024)},
                      {"probe_span", num(6.0, 1.0, 1e6, true)},
                      {"ratio", num(2.0, 1.0, 1e6, true)},
                      {"floor_levels", integer(3, 1, 1000)},
                      {"frontier", integer(3, 1, 1e6)},
                      {"level_chi_horizon", num(40.0, 0.0, 1e6, true)},
                      {"level_node_cap", integer(20000, 1, 1e9)},
                      {"final_floor_levels", integer(6, 1, 1000)},
                      {"final_node_cap", integer(500, 1, 1e9)},
                      {"direct_x_horizon", num(2.0, 0.0, 1e6, true)},
                      {"direct_chi_horizon", num(60.0, 0.0, 1e6, true)},
                  })},
      {"output", object({
                     {"debug_dump", boolean(false)},
                 })},
  });
  return root;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

double check_number(const Json& v, const Field& f, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(path, "must be finite");
  if (x < f.lo || (f.lo_open && x == f.lo) || x > f.hi) {
    std::ostringstream os;
    os << "out of range " << (f.lo_open ? "(" : "[") << f.lo << ", " << f.hi << "]";
    fail(path, os.str());
  }
  return x;
}

Json normalize_measure(const Json& v, const std::string& path) {
  if (!v.is_object()) fail(path, "measure must be an object");
  if (!v.contains("type") || !v["type"].is_string()) fail(path, "measure needs a string \"type\"");
  const std::string type = v["type"];
  auto only = [&](std::initializer_list<const char*> keys) {
    for (const auto& [k, _] : v.items()) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* s) { return k == s; })) {
        fail(path + "." + k, "unknown key");
      }
    }
  };
  auto positive = [&](const char* key, bool open) {
    if (!v.contains(key)) fail(path, std::string("missing \"") + key + "\"");
    Field f = num(0.0, 0.0, kInf, open);
    return check_number(v[key], f, path + "." + key);
  };
  if (type == "zero") {
    only({"type"});
    return Json{{"type", "zero"}};
  }
  if (type == "atoms") {
    only({"type", "atoms"});
    if (!v.contains("atoms") || !v["atoms"].is_array()) fail(path, "\"atoms\" must be an array");
    Json out{{"type", "atoms"}, {"atoms", Json::array()}};
    for (std::size_t i = 0; i < v["atoms"].size(); ++i) {
      const auto& a = v["atoms"][i];
      const std::string p = path + ".atoms[" + std::to_string(i) + "]";
      if (!a.is_array() || a.size() != 2) fail(p, "atom must be [y, w]");
      const double y = check_number(a[0], num(0.0, -kInf, 0.0), p);
      const double w = check_number(a[1], num(0.0, 0.0, kInf, true), p);
      if (y == 0.0) fail(p, "atom location must be < 0");
      out["atoms"].push_back({y, w});
    }
    return out;
  }
  if (type == "power") {
    only({"type", "c", "beta", "L", "inner"});
    Json out{{"type", "power"}};
    out["c"] = positive("c", true);
    out["beta"] = check_number(v.value("beta", Json()), num(0.0, 0.0, 2.0, true), path + ".beta");
    out["L"] = positive("L", true);
    out["inner"] = v.contains("inner") ? check_number(v["inner"], num(0.0, 0.0), path + ".inner") : 0.0;
    if (out["inner"].get<double>() >= out["L"].get<double>()) fail(path, "need inner < L");
    return out;
  }
  if (type == "sum") {
    only({"type", "parts"});
    if (!v.contains("parts") || !v["parts"].is_array()) fail(path, "\"parts\" must be an array");
    Json out{{"type", "sum"}, {"parts", Json::array()}};
    for (std::size_t i = 0; i < v["parts"].size(); ++i) {
      out["parts"].push_back(normalize_measure(v["parts"][i], path + ".parts[" + std::to_string(i) + "]"));
    }
    return out;
  }
  fail(path + ".type", "unknown measure type \"" + type + "\"");
}

Json normalize_field(const Json* v, const Field& f, const std::string& path) {
  if (!v || v->is_null()) {
    if (f.def.is_null()) fail(path, "required");
    if (f.kind == Field::Obj) return normalize_field(&f.def, f, path);
    return f.def;
  }
  switch (f.kind) {
    case Field::Num:
      return check_number(*v, f, path);
    case Field::Int: {
      const double x = check_number(*v, f, path);
      if (x != std::floor(x)) fail(path, "expected an integer");
      return std::int64_t(x);
    }
    case Field::Bool:
      if (!v->is_boolean()) fail(path, "expected true or false");
      return *v;
    case Field::Str: {
      if (!v->is_string()) fail(path, "expected a string");
      const std::string s = *v;
      if (std::find(f.choices.begin(), f.choices.end(), s) == f.choices.end()) {
        fail(path, "unknown value \"" + s + "\"");
      }
      return s;
    }
    case Field::NumList: {
      const Json items = v->is_number() ? Json::array({*v}) : *v;
      if (!items.is_array() || items.empty()) fail(path, "expected a non-empty list of numbers");
      Json out = Json::array();
      for (std::size_t i = 0; i < items.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        const double x = check_number(items[i], f, p);
        if (!f.integral) {
          out.push_back(x);
        } else {
          if (x != std::floor(x)) fail(p, "expected an integer");
          out.push_back(std::int64_t(x));
        }
      }
      return out;
    }
    case Field::Measure:
      return normalize_measure(*v, path);
    case Field::Obj: {
      if (!v->is_object()) fail(path, "expected an object");
      for (const auto& [k, _] : v->items()) {
        if (std::none_of(f.fields.begin(), f.fields.end(), [&](const auto& e) { return e.first == k; })) {
          fail(path.empty() ? k : path + "." + k, "unknown key");
        }
      }
      Json out = Json::object();
      for (const auto& [k, sub] : f.fields) {
        const Json* child = v->contains(k) ? &(*v)[k] : nullptr;
        out[k] = normalize_field(child, sub, path.empty() ? k : path + "." + k);
      }
      return out;
    }
  }
  return nullptr;
}

JumpMeasure build_measure(const Json& m) {
  const std::string type = m["type"];
  if (type == "zero") return JumpMeasure();
  if (type == "atoms") {
    std::vector<JumpMeasure::Atom> atoms;
    for (const auto& a : m["atoms"]) atoms.push_back({a[0].get<double>(), a[1].get<double>()});
    return JumpMeasure::atoms(std::move(atoms));
  }
  if (type == "power") {
    return JumpMeasure::power(m["c"], m["beta"], m["L"], m["inner"]);
  }
  std::vector<JumpMeasure> parts;
  for (const auto& p : m["parts"]) parts.push_back(build_measure(p));
  return JumpMeasure::sum(std::move(parts));
}

Characteristics build_characteristics(const Json& c) {
  try {
    return Characteristics::make(c["k"], c["sigma2"], c["b"], build_measure(c["lambda1"]),
                                 build_measure(c["lambda2"]), c["alpha"]);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("characteristics: ") + e.what());
  }
}

std::vector<double> doubles(const Json& j) { return j.get<std::vector<double>>(); }

SimulateOptions sim_options(const Json& cfg) {
  const auto& s = cfg["simulation"];
  SimulateOptions o;
  o.path_eps = s["path_eps"];
  o.step = s["step"];
  o.caps.max_particles = s["caps"]["max_particles"].get<std::size_t>();
  o.caps.max_generation = s["caps"]["max_generation"];
  return o;
}

// ---------------------------------------------------------------------------
// Report helpers

Json jnum(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

Json jopt(const std::optional<double>& v) { return v ? jnum(*v) : Json(nullptr); }

std::string fnum(double v) { return format_number(v); }
std::string fint(std::uint64_t v) { return std::to_string(v); }
std::string fbool(bool v) { return v ? "1" : "0"; }

struct Context {
  const Json& cfg;
  const Execution& exec;
  Characteristics ch;
  std::uint64_t seed;
  std::size_t replicas;
  double n_sigma;
  double tolerance;
  Report& report;
};

bool within(double est, double se, double target, double n_sigma) {
  return std::abs(est - target) <= n_sigma * se;
}

void check_exclusions(Context& cx, const std::string& what, std::size_t excluded, std::size_t total) {
  const double rate = total ? double(excluded) / double(total) : 0.0;
  if (rate > cx.tolerance) {
    cx.report.warnings.push_back(what + ": " + std::to_string(excluded) + " of " + std::to_string(total) +
                                 " runs capped, above tolerance " + fnum(cx.tolerance));
  }
}

// ---------------------------------------------------------------------------
// Experiments

void run_cumulant(Context& cx) {
  const auto& g = cx.cfg["cumulant"];
  const double lo = g["q_min"], hi = g["q_max"];
  const int n = g["points"];
  if (!(hi > lo)) throw ConfigError("cumulant.q_max must exceed cumulant.q_min");
  Table tab{"cumulant", {"q", "kappa", "kappa_dot", "finite_flag"}, {}};
  for (int i = 0; i < n; ++i) {
    const double q = lo + (hi - lo) * i / (n - 1);
    const double k = kappa(cx.ch, q);
    double kd = kInf;
    if (std::isfinite(k)) {
      try {
        kd = kappa_dot(cx.ch, q);
      } catch (const std::domain_error&) {
        kd = kInf;
      }
    }
    tab.rows.push_back({fnum(q), fnum(k), fnum(kd), fbool(std::isfinite(k))});
  }
  cx.report.tables.push_back(std::move(tab));

  Table fm{"frac_moment", {"q", "frac_moment", "finite_flag"}, {}};
  Json at = Json::array();
  for (double q : doubles(cx.cfg["statistics"]["q"])) {
    const double m = cx.ch.lambda1.frac_moment(q);
    fm.rows.push_back({fnum(q), fnum(m), fbool(std::isfinite(m))});
    at.push_back({{"q", q}, {"kappa", jnum(kappa(cx.ch, q))}, {"frac_moment", jnum(m)}});
  }
  cx.report.tables.push_back(std::move(fm));

  const auto p = classify(cx.ch);
  Json prof{{"q_bar", jnum(p.q_bar)},
            {"q_bar_attained", p.q_bar_attained},
            {"degenerate", p.degenerate},
            {"q_m", jopt(p.q_m)},
            {"kappa_min", jnum(p.kappa_min)},
            {"hypothesis_H", p.hypothesis_H},
            {"indeterminate", p.indeterminate},
            {"technical_condition", p.technical_condition},
            {"malthusian_witness", jopt(p.malthusian_witness)},
            {"q_minus", jopt(p.q_minus)},
            {"q_plus", jopt(p.q_plus)},
            {"kappa_dot_minus", jnum(p.kappa_dot_minus)},
            {"kappa_dot_plus", jnum(p.kappa_dot_plus)}};
  cx.report.results = {{"profile", prof}, {"at_q", at}};
  if (p.indeterminate) {
    cx.report.warnings.push_back("min kappa is within " + fnum(kPositivityTol) +
                                 " of 0; hypothesis (H) is indeterminate");
  }
}

void run_simulate(Context& cx) {
  const auto& sim = cx.cfg["simulation"];
  const double x0 = sim["x0"], H = sim["chi_horizon"];
  const auto ts = doubles(cx.cfg["statistics"]["t"]);
  const double alpha = cx.ch.alpha;
  if (alpha == 0.0) {
    for (double t : ts) {
      if (t > H) throw ConfigError("statistics.t: " + fnum(t) + " exceeds simulation.chi_horizon");
    }
  }
  const auto opts = sim_options(cx.cfg);
  const bool dump = cx.cfg["output"]["debug_dump"];

  struct Out {
    std::vector<std::vector<std::string>> rows, particles;
    std::vector<std::size_t> alive;
    bool capped = false;
    std::size_t censored = 0;
  };
  std::vector<Out> outs(cx.replicas);
  parallel_for(cx.replicas, cx.exec.threads, [&](std::size_t r) {
    auto pop = simulate(cx.ch, x0, H, opts, replica_stream(cx.seed, 11, r));
    Out& o = outs[r];
    o.capped = pop.capped;
    if (dump) {
      for (const auto& p : pop.particles) {
        o.particles.push_back({fint(r), p.label.str(), fnum(p.birth_time), fnum(p.death_time),
                               fnum(std::exp(p.initial_log_mass)),
                               p.cause == DeathCause::Split    ? "split"
                               : p.cause == DeathCause::Killed ? "killed"
                                                               : "horizon"});
      }
    }
    if (alpha == 0.0) {
      for (double t : ts) {
        const auto snap = pop.labelled_snapshot(t);
        o.alive.push_back(snap.size());
        for (const auto& [lab, m] : snap) o.rows.push_back({fint(r), fnum(t), lab.str(), fnum(m)});
      }
    } else {
      const auto cp = lamperti(std::move(pop), alpha);
      for (double t : ts) {
        const auto snap = cp.snapshot(t);
        o.censored += snap.censored;
        o.alive.push_back(snap.members.size());
        for (const auto& [lab, m] : snap.members) o.rows.push_back({fint(r), fnum(t), lab.str(), fnum(m)});
      }
    }
  });

  Table tab{"snapshot", {"replica_id", "t", "label", "mass"}, {}};
  Table parts{"particles", {"replica_id", "label", "birth_time", "death_time", "initial_mass", "cause"}, {}};
  std::size_t capped = 0, censored = 0;
  std::vector<std::vector<double>> alive(ts.size());
  for (auto& o : outs) {
    capped += o.capped;
    censored += o.censored;
    for (std::size_t i = 0; i < ts.size(); ++i) alive[i].push_back(double(o.alive[i]));
    for (auto& row : o.rows) tab.rows.push_back(std::move(row));
    for (auto& row : o.particles) parts.rows.push_back(std::move(row));
  }
  cx.report.tables.push_back(std::move(tab));
  if (dump) cx.report.tables.push_back(std::move(parts));
  Json per_t = Json::array();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto s = summarize(alive[i]);
    per_t.push_back({{"t", ts[i]}, {"mean_alive", s.mean}, {"se", s.se}});
  }
  cx.report.results = {{"replicas", cx.replicas},
                       {"capped", capped},
                       {"censored_snapshots", censored},
                       {"time_scale", alpha == 0.0 ? "homogeneous" : "self-similar"},
                       {"alive", per_t}};
  check_exclusions(cx, "simulate", capped, cx.replicas);
}

void run_martingale(Context& cx) {
  const auto qs = doubles(cx.cfg["statistics"]["q"]);
  const auto ts = doubles(cx.cfg["statistics"]["t"]);
  const double x0 = cx.cfg["simulation"]["x0"];
  const auto opts = sim_options(cx.cfg);
  std::vector<double> kq;
  for (double q : qs) {
    kq.push_back(kappa(cx.ch, q));
    if (!std::isfinite(kq.back())) throw ConfigError("statistics.q: kappa(" + fnum(q) + ") is infinite");
  }
  const double tmax = *std::max_element(ts.begin(), ts.end());
  const std::size_t m = qs.size() * ts.size();
  std::vector<double> vals(cx.replicas * m);
  std::vector<char> capped(cx.replicas, 0);
  parallel_for(cx.replicas, cx.exec.threads, [&](std::size_t r) {
    const auto pop = simulate(cx.ch, x0, tmax, opts, replica_stream(cx.seed, 12, r));
    if (pop.capped) {
      capped[r] = 1;
      return;
    }
    for (std::size_t i = 0; i < qs.size(); ++i)
      for (std::size_t j = 0; j < ts.size(); ++j)
        vals[r * m + i * ts.size() + j] = additive_martingale(pop, ts[j], qs[i], kq[i]);
  });
  std::size_t excluded = 0;
  for (char c : capped) excluded += c;

  Table tab{"martingale", {"q", "t", "mean", "se", "n", "excluded", "z", "pass"}, {}};
  Json rows = Json::array();
  for (std::size_t i = 0; i < qs.size(); ++i) {
    for (std::size_t j = 0; j < ts.size(); ++j) {
      std::vector<double> v;
      v.reserve(cx.replicas);
      for (std::size_t r = 0; r < cx.replicas; ++r)
        if (!capped[r]) v.push_back(vals[r * m + i * ts.size() + j]);
      const auto s = summarize(v, excluded);
      const double z = s.se > 0.0 ? (s.mean - 1.0) / s.se : (s.mean == 1.0 ? 0.0 : kInf);
      const bool pass = s.n > 0 && within(s.mean, s.se, 1.0, cx.n_sigma);
      tab.rows.push_back({fnum(qs[i]), fnum(ts[j]), fnum(s.mean), fnum(s.se), fint(s.n), fint(excluded),
                          fnum(z), fbool(pass)});
      rows.push_back({{"q", qs[i]}, {"t", ts[j]}, {"mean", s.mean}, {"se", s.se}, {"z", jnum(z)}, {"pass", pass}});
      if (!pass) {
        cx.report.failures.push_back("martingale mean at q=" + fnum(qs[i]) + ", t=" + fnum(ts[j]) + " is " +
                                     fnum(s.mean) + " +- " + fnum(s.se));
      }
    }
  }
  cx.report.tables.push_back(std::move(tab));
  cx.report.results = {{"estimates", rows},
                       {"replicas", cx.replicas},
                       {"excluded", excluded},
                       {"exclusion_rate", double(excluded) / double(cx.replicas)}};
  check_exclusions(cx, "martingale-check", excluded, cx.replicas);
}

void run_extinction(Context& cx) {
  const int n = cx.cfg["extinction"]["generations"];
  const bool by_time = cx.cfg["extinction"]["by_time"];
  const auto caps = sim_options(cx.cfg).caps;
  const auto st = extinction_stats(cx.ch, n, cx.replicas, replica_stream(cx.seed, 13, 0), by_time, caps);
  std::vector<double> oracle;
  const double m = cx.ch.lambda1.total_mass();
  const bool has_oracle = std::isfinite(m) && (cx.ch.k + m) > 0.0;
  if (has_oracle) oracle = extinction_pgf(cx.ch.k, m, n);

  Table tab{"extinction", {"generation", "empirical", "se", "oracle", "z", "pass"}, {}};
  Json rows = Json::array();
  for (int g = 0; g < n; ++g) {
    const double e = st.by_generation[g];
    double se = st.by_generation_se[g];
    double z = 0.0;
    bool pass = true;
    Json o = nullptr;
    if (has_oracle) {
      const double p = oracle[g];
      // binomial SE under the oracle, so that p = 0 or 1 does not give SE 0
      se = std::sqrt(p * (1.0 - p) / double(cx.replicas));
      z = se > 0.0 ? (e - p) / se : (e == p ? 0.0 : kInf);
      pass = std::abs(e - p) <= cx.n_sigma * se + 1e-15;
      o = p;
      if (!pass) {
        cx.report.failures.push_back("extinction by generation " + std::to_string(g + 1) + ": " + fnum(e) +
                                     " vs oracle " + fnum(p));
      }
    }
    tab.rows.push_back({std::to_string(g + 1), fnum(e), fnum(se), has_oracle ? fnum(oracle[g]) : "",
                        has_oracle ? fnum(z) : "", has_oracle ? fbool(pass) : ""});
    rows.push_back({{"generation", g + 1}, {"empirical", e}, {"se", se}, {"oracle", o}});
  }
  cx.report.tables.push_back(std::move(tab));
  Json res{{"by_generation", rows}, {"replicas", cx.replicas}};
  if (by_time) {
    Table bt{"extinction_by_time", {"t", "empirical", "se"}, {}};
    for (std::size_t i = 0; i < st.by_time.size(); ++i) {
      bt.rows.push_back({fint(i + 1), fnum(st.by_time[i]), fnum(st.by_time_se[i])});
    }
    cx.report.tables.push_back(std::move(bt));
    res["time_excluded"] = st.time_excluded;
    check_exclusions(cx, "extinction by time", st.time_excluded, cx.replicas);
  }
  cx.report.results = res;
}

void run_couple(Context& cx) {
  const auto& sim = cx.cfg["simulation"];
  const auto eps = doubles(sim["eps_levels"]);
  for (std::size_t i = 1; i < eps.size(); ++i) {
    if (!(eps[i] < eps[i - 1])) throw ConfigError("simulation.eps_levels must be strictly decreasing");
  }
  const auto ts = doubles(cx.cfg["statistics"]["t"]);
  const double x0 = sim["x0"], H = sim["chi_horizon"];
  const auto opts = sim_options(cx.cfg);
  const double alpha = cx.ch.alpha;

  struct Out {
    std::vector<std::vector<std::string>> rows;
    std::size_t checks = 0, failures = 0, censored = 0;
    bool capped = false;
  };
  std::vector<Out> outs(cx.replicas);
  parallel_for(cx.replicas, cx.exec.threads, [&](std::size_t r) {
    const auto levels = coupled_truncations(cx.ch, eps, x0, H, opts, replica_stream(cx.seed, 14, r));
    Out& o = outs[r];
    o.capped = levels.back().population().capped;
    for (double t : ts) {
      std::vector<SelfSimilarSnapshot> snaps;
      for (const auto& lv : levels) {
        if (alpha != 0.0) {
          snaps.push_back(lv.snapshot(t));
        } else {
          // homogeneous time: visible particles alive at t
          SelfSimilarSnapshot s;
          s.t = t;
          const auto& parts = lv.population().particles;
          for (std::size_t i = 0; i < parts.size(); ++i) {
            if (lv.visible(i) && parts[i].alive_at(t)) s.members.push_back({parts[i].label, std::exp(parts[i].log_mass_at(t))});
          }
          s.censored = t > H || lv.population().complete_until < t;
          snaps.push_back(std::move(s));
        }
      }
      for (std::size_t l = 0; l + 1 < snaps.size(); ++l) {
        std::map<Label, double> fine;
        for (const auto& [lab, m] : snaps[l + 1].members) fine.emplace(lab, m);
        bool ok = true;
        for (const auto& [lab, m] : snaps[l].members) {
          const auto it = fine.find(lab);
          if (it == fine.end() || it->second != m) {
            ok = false;
            break;
          }
        }
        ++o.checks;
        o.failures += !ok;
        o.censored += snaps[l].censored || snaps[l + 1].censored;
        o.rows.push_back({fint(r), fnum(t), fnum(eps[l]), fnum(eps[l + 1]), fint(snaps[l].members.size()),
                          fint(snaps[l + 1].members.size()), fbool(ok)});
      }
    }
  });
  Table tab{"coupling", {"replica_id", "t", "eps_coarse", "eps_fine", "n_coarse", "n_fine", "included"}, {}};
  std::size_t checks = 0, failures = 0, censored = 0, capped = 0;
  for (auto& o : outs) {
    checks += o.checks;
    failures += o.failures;
    censored += o.censored;
    capped += o.capped;
    for (auto& row : o.rows) tab.rows.push_back(std::move(row));
  }
  cx.report.tables.push_back(std::move(tab));
  cx.report.results = {{"checks", checks},
                       {"failures", failures},
                       {"inclusion_rate", checks ? double(checks - failures) / double(checks) : 1.0},
                       {"censored_checks", censored},
                       {"capped", capped},
                       {"time_scale", alpha == 0.0 ? "homogeneous" : "self-similar"}};
  if (failures) cx.report.failures.push_back(std::to_string(failures) + " coupling checks failed");
  check_exclusions(cx, "couple", capped, cx.replicas);
}

void run_spine(Context& cx) {
  const auto qs = doubles(cx.cfg["statistics"]["q"]);
  const auto ts = doubles(cx.cfg["statistics"]["t"]);
  const auto ps = doubles(cx.cfg["statistics"]["p"]);
  const auto& sim = cx.cfg["simulation"];
  const double x0 = sim["x0"];
  const double tmax = *std::max_element(ts.begin(), ts.end());

  Table gate{"exponent_gate", {"q", "p", "spine_exponent", "phi", "gap"}, {}};
  Table mom{"spine_moments", {"q", "p", "t", "mean", "se", "oracle", "z", "pass"}, {}};
  Json gates = Json::array(), moments = Json::array();
  for (std::size_t qi = 0; qi < qs.size(); ++qi) {
    const double q = qs[qi];
    SpineSpec spec;
    try {
      spec = make_spine_spec(cx.ch, q, sim["path_eps"], sim["step"]);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("spine: ") + e.what());
    }
    for (double p : ps) {
      const double se_ = spine_exponent(spec, p), ph = phi(cx.ch, q, p);
      const double gap = std::abs(se_ - ph);
      const bool ok = gap <= 1e-12 * std::max(1.0, std::abs(ph));
      gate.rows.push_back({fnum(q), fnum(p), fnum(se_), fnum(ph), fnum(gap)});
      gates.push_back({{"q", q}, {"p", p}, {"gap", gap}, {"pass", ok}});
      if (!ok) cx.report.failures.push_back("exponent gate at q=" + fnum(q) + ", p=" + fnum(p) + ": " + fnum(gap));
    }
    std::vector<double> vals(cx.replicas * ts.size() * ps.size());
    parallel_for(cx.replicas, cx.exec.threads, [&](std::size_t r) {
      const auto real = simulate_spine(spec, x0, tmax, 0.0, replica_stream(cx.seed, 15 + 0x100 * qi, r));
      for (std::size_t j = 0; j < ts.size(); ++j) {
        const double xi = real.path.log_mass_at(ts[j]) - std::log(x0);
        for (std::size_t k = 0; k < ps.size(); ++k) vals[(r * ts.size() + j) * ps.size() + k] = std::exp(ps[k] * xi);
      }
    });
    for (std::size_t j = 0; j < ts.size(); ++j) {
      for (std::size_t k = 0; k < ps.size(); ++k) {
        std::vector<double> v(cx.replicas);
        for (std::size_t r = 0; r < cx.replicas; ++r) v[r] = vals[(r * ts.size() + j) * ps.size() + k];
        const auto s = summarize(v);
        const double oracle = std::exp(ts[j] * phi(cx.ch, q, ps[k]));
        const double z = s.se > 0.0 ? (s.mean - oracle) / s.se : kInf;
        const bool pass = within(s.mean, s.se, oracle, cx.n_sigma);
        mom.rows.push_back({fnum(q), fnum(ps[k]), fnum(ts[j]), fnum(s.mean), fnum(s.se), fnum(oracle), fnum(z),
                            fbool(pass)});
        moments.push_back({{"q", q}, {"p", ps[k]}, {"t", ts[j]}, {"mean", s.mean}, {"se", s.se},
                           {"oracle", oracle}, {"z", jnum(z)}, {"pass", pass}});
        if (!pass) {
          cx.report.failures.push_back("spine moment at q=" + fnum(q) + ", p=" + fnum(ps[k]) + ", t=" +
                                       fnum(ts[j]) + ": " + fnum(s.mean) + " vs " + fnum(oracle));
        }
      }
    }
  }
  cx.report.tables.push_back(std::move(gate));
  cx.report.tables.push_back(std::move(mom));
  cx.report.results = {{"exponent_gate", gates}, {"moments", moments}, {"replicas", cx.replicas}};
}

void run_change_of_measure(Context& cx) {
  const auto qs = doubles(cx.cfg["statistics"]["q"]);
  const auto ts = doubles(cx.cfg["statistics"]["t"]);
  const auto opts = sim_options(cx.cfg);
  // f = 1{exactly one particle alive}
  const PopulationStatistic single = [](const std::vector<double>& logs) { return logs.size() == 1 ? 1.0 : 0.0; };
  Table tab{"change_of_measure",
            {"q", "t", "p_mean", "p_se", "q_mean", "q_se", "closed_form", "z_p", "z_q", "z", "p_excluded",
             "q_excluded", "pass"},
            {}};
  Json rows = Json::array();
  std::size_t excluded = 0, total = 0;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    for (std::size_t j = 0; j < ts.size(); ++j) {
      const double q = qs[i], t = ts[j];
      ChangeOfMeasureResult res;
      double rate = kInf;
      try {
        res = change_of_measure_check(cx.ch, q, t, single, cx.replicas,
                                      replica_stream(cx.seed, 16, i * ts.size() + j), opts);
        rate = make_spine_spec(cx.ch, q).birth_rate;
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("change-of-measure: ") + e.what());
      }
      excluded += res.p_excluded + res.q_excluded;
      total += 2 * cx.replicas;
      // Under the tilted law the spine is never killed and, without killing,
      // neither are the siblings: one particle at t iff no spine birth by t.
      const bool closed = cx.ch.k == 0.0;
      const double cf = closed ? std::exp(-t * rate) : std::nan("");
      const double zp = closed && res.p_se > 0 ? (res.p_mean - cf) / res.p_se : 0.0;
      const double zq = closed && res.q_se > 0 ? (res.q_mean - cf) / res.q_se : 0.0;
      bool pass = std::abs(res.z) <= cx.n_sigma;
      if (closed) pass = pass && within(res.p_mean, res.p_se, cf, cx.n_sigma) && within(res.q_mean, res.q_se, cf, cx.n_sigma);
      tab.rows.push_back({fnum(q), fnum(t), fnum(res.p_mean), fnum(res.p_se), fnum(res.q_mean), fnum(res.q_se),
                          closed ? fnum(cf) : "", closed ? fnum(zp) : "", closed ? fnum(zq) : "", fnum(res.z),
                          fint(res.p_excluded), fint(res.q_excluded), fbool(pass)});
      rows.push_back({{"q", q},
                      {"t", t},
                      {"p_mean", res.p_mean},
                      {"p_se", res.p_se},
                      {"q_mean", res.q_mean},
                      {"q_se", res.q_se},
                      {"closed_form", closed ? Json(cf) : Json(nullptr)},
                      {"z", jnum(res.z)},
                      {"pass", pass}});
      if (!pass) cx.report.failures.push_back("change of measure at q=" + fnum(q) + ", t=" + fnum(t));
    }
  }
  cx.report.tables.push_back(std::move(tab));
  cx.report.results = {{"estimates", rows}, {"replicas", cx.replicas}};
  check_exclusions(cx, "change-of-measure", excluded, total);
}

ExplosionOptions explosion_options(const Json& cfg, const Execution& exec) {
  const auto& e = cfg["explode"];
  const auto& s = cfg["simulation"];
  ExplosionOptions o;
  o.budgets.clear();
  for (double b : doubles(e["budgets"])) {
    if (b != std::floor(b)) throw ConfigError("explode.budgets: expected integers");
    o.budgets.push_back(std::size_t(b));
  }
  if (!std::is_sorted(o.budgets.begin(), o.budgets.end()) ||
      std::adjacent_find(o.budgets.begin(), o.budgets.end()) != o.budgets.end()) {
    throw ConfigError("explode.budgets must be strictly increasing");
  }
  o.x0 = s["x0"];
  o.path_eps = s["path_eps"];
  o.step = s["step"];
  o.threads = exec.threads;
  o.chi_horizon = e["chi_horizon"];
  o.n_probes = e["n_probes"];
  o.probe_span = e["probe_span"];
  o.ratio = e["ratio"];
  o.floor_levels = e["floor_levels"];
  o.frontier = e["frontier"];
  o.level_chi_horizon = e["level_chi_horizon"];
  o.level_node_cap = e["level_node_cap"].get<std::size_t>();
  o.final_floor_levels = e["final_floor_levels"];
  o.final_node_cap = e["final_node_cap"].get<std::size_t>();
  o.direct_x_horizon = e["direct_x_horizon"];
  o.direct_chi_horizon = e["direct_chi_horizon"];
  return o;
}

void run_explode(Context& cx) {
  const auto& st = cx.cfg["statistics"];
  const double a = st["a"], ap = st["a_prime"];
  if (!(a < ap)) throw ConfigError("statistics: need a < a_prime");
  const auto opts = explosion_options(cx.cfg, cx.exec);
  const bool direct = cx.cfg["explode"]["mode"] == "direct";
  const std::size_t reps = cx.cfg["explode"]["replicas"].get<std::size_t>();

  Table curve{"growth_curve", {"replica_id", "budget", "used", "count", "best_probe", "insufficient", "censored"}, {}};
  Table sib{"siblings",
            {"replica_id", "index", "birth_chi", "birth_log_mass", "birth_x_time", "contributed", "best_count",
             "levels", "particles", "exhausted"},
            {}};
  Table probes{"probes", {"replica_id", "probe", "t"}, {}};
  std::vector<double> bx, cy, depth, success;
  Json per = Json::array();
  std::size_t insufficient = 0, censored = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    ExplosionResult res;
    try {
      res = explosion_experiment(cx.ch, a, ap, opts, replica_stream(cx.seed, 17, r),
                                 direct ? ExplosionMode::Direct : ExplosionMode::Spine);
    } catch (const PreconditionError& e) {
      throw ConfigError(e.what());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("explode: ") + e.what());
    }
    for (std::size_t i = 0; i < res.probes.size(); ++i) probes.rows.push_back({fint(r), fint(i), fnum(res.probes[i])});
    for (const auto& c : res.curve) {
      curve.rows.push_back({fint(r), fint(c.budget), fint(c.used), fint(c.count), std::to_string(c.best_probe),
                            fbool(c.insufficient), fbool(c.censored)});
      bx.push_back(double(c.budget));
      cy.push_back(double(c.count));
      insufficient += c.insufficient;
      censored += c.censored;
    }
    for (const auto& s : res.siblings) {
      const auto best = s.probe_counts.empty() ? 0u : *std::max_element(s.probe_counts.begin(), s.probe_counts.end());
      sib.rows.push_back({fint(r), fint(s.index), fnum(s.birth_chi), fnum(s.birth_log_mass), fnum(s.birth_x_time),
                          fbool(s.contributed()), fint(best), fint(s.levels), fint(s.particles), fbool(s.exhausted)});
      depth.push_back(-s.birth_log_mass / std::log(10.0));
      success.push_back(s.contributed() ? 1.0 : 0.0);
    }
    Json rep{{"replica", r}};
    if (!direct) {
      rep["q"] = res.q;
      rep["chi_horizon"] = res.chi_horizon;
      rep["zeta_estimate"] = jnum(res.zeta_estimate);
      rep["zeta_tail"] = jnum(res.zeta_tail);
      rep["spine_min_log_mass"] = jnum(res.spine_min_log_mass);
      rep["spine_final_log_mass"] = jnum(res.spine_final_log_mass);
      rep["siblings_run"] = res.siblings.size();
    }
    per.push_back(rep);
  }
  cx.report.tables.push_back(std::move(curve));
  if (!direct) cx.report.tables.push_back(std::move(sib));
  cx.report.tables.push_back(std::move(probes));

  Json res{{"mode", direct ? "direct" : "spine"}, {"replicas", per}, {"insufficient_points", insufficient},
           {"censored_points", censored}};
  bool growth = false, flat = true;
  if (bx.size() >= 3) {
    const auto [b, se] = ols_slope(bx, cy);
    growth = b > 0.0 && b > t99(bx.size()) * se;
    flat = !(b > 0.0 && b > t99(bx.size()) * se);
    res["count_slope"] = {{"slope", b}, {"se", se}, {"positive_99", growth}};
  } else {
    res["count_slope"] = nullptr;
  }
  if (!direct) {
    // success indicator against decades of birth depth
    Json trend = nullptr;
    bool spread = depth.size() >= 3 &&
                  *std::max_element(depth.begin(), depth.end()) > *std::min_element(depth.begin(), depth.end());
    if (spread) {
      const auto [b, se] = ols_slope(depth, success);
      const bool negative = b < 0.0 && -b > t99(depth.size()) * se;
      trend = {{"slope_per_decade", b}, {"se", se}, {"negative_99", negative}};
      if (negative) cx.report.failures.push_back("per-sibling success decreases with birth depth");
    }
    res["success_trend"] = trend;
    double rate = 0.0;
    for (double s : success) rate += s;
    res["success_rate"] = success.empty() ? 0.0 : rate / double(success.size());
    if (!growth) cx.report.failures.push_back("contributing siblings do not grow with the budget at 99%");
  } else if (!flat) {
    cx.report.failures.push_back("direct-mode interval count grows with the budget");
  }
  if (insufficient) {
    cx.report.warnings.push_back(std::to_string(insufficient) + " budget points had fewer siblings than the budget");
  }
  cx.report.results = res;
}

// ---------------------------------------------------------------------------

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

// ---------------------------------------------------------------------------

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override \"" + assignment + "\": expected path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  Json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("override \"" + assignment + "\": empty path component");
    if (!node->is_object()) {
      if (!node->is_null()) throw ConfigError("override \"" + assignment + "\": " + key + " is not inside an object");
      *node = Json::object();
    }
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = std::move(value);
}

Json normalize(Json doc, Execution* exec) {
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
  if (doc.contains("execution")) {
    const Json e = doc["execution"];
    doc.erase("execution");
    if (!e.is_object()) fail("execution", "expected an object");
    for (const auto& [k, v] : e.items()) {
      if (k == "threads") {
        const double x = check_number(v, integer(1, 1, 4096), "execution.threads");
        if (x != std::floor(x)) fail("execution.threads", "expected an integer");
        if (exec) exec->threads = unsigned(x);
      } else if (k == "out_dir") {
        if (!v.is_string()) fail("execution.out_dir", "expected a string");
        if (exec) exec->out_dir = v.get<std::string>();
      } else {
        fail("execution." + k, "unknown key");
      }
    }
  }
  Json out = normalize_field(&doc, schema(), "");
  build_characteristics(out["characteristics"]);  // range checks that need the whole block
  if (!(out["statistics"]["a"].get<double>() < out["statistics"]["a_prime"].get<double>())) {
    fail("statistics.a_prime", "must exceed statistics.a");
  }
  return out;
}

std::string content_hash(const Json& j) { return hex64(fnv1a(j.dump())); }

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_csv(const Table& t) {
  auto cell = [](const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  };
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cell(cells[i]);
    }
    out += "\r\n";
  };
  line(t.columns);
  for (const auto& r : t.rows) line(r);
  return out;
}

int Report::exit_code(bool assert_mode) const {
  if (!warnings.empty()) return 3;
  if (assert_mode && !failures.empty()) return 1;
  return 0;
}

Json Report::summary(bool assert_mode) const {
  Json tabs = Json::object();
  std::uint64_t h = fnv1a(config.dump());
  h = fnv1a(results.dump(), h);
  for (const auto& t : tables) {
    tabs[t.name] = {{"file", t.name + ".csv"}, {"columns", t.columns}, {"rows", t.rows.size()}};
    h = fnv1a(to_csv(t), h);
  }
  return {{"experiment", experiment},
          {"config", config},
          {"config_hash", content_hash(config)},
          {"results", results},
          {"tables", tabs},
          {"rng",
           {{"generator", "philox4x32-10"},
            {"seed", config["statistics"]["seed"]},
            {"streams", "per replica: derive(purpose, replica); per particle: derive(replica stream, label)"}}},
          {"status",
           {{"exit_code", exit_code(assert_mode)},
            {"assert_mode", assert_mode},
            {"failures", failures},
            {"warnings", warnings}}},
          {"content_hash", hex64(h)}};
}

Report run(const Json& config, const Execution& exec) {
  const auto t0 = std::chrono::steady_clock::now();
  Report report;
  report.experiment = config["experiment"];
  report.config = config;
  const auto& st = config["statistics"];
  Context cx{config,
             exec,
             build_characteristics(config["characteristics"]),
             st["seed"].get<std::uint64_t>(),
             st["replicas"].get<std::size_t>(),
             st["n_sigma"],
             st["tolerance"],
             report};
  const std::string& e = report.experiment;
  if (e == "cumulant") run_cumulant(cx);
  else if (e == "simulate") run_simulate(cx);
  else if (e == "martingale-check") run_martingale(cx);
  else if (e == "extinction") run_extinction(cx);
  else if (e == "couple") run_couple(cx);
  else if (e == "spine") run_spine(cx);
  else if (e == "explode") run_explode(cx);
  else if (e == "change-of-measure") run_change_of_measure(cx);
  else throw ConfigError("unknown experiment \"" + e + "\"");
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

std::vector<std::string> emit(const Report& report, const Execution& exec, bool assert_mode) {
  const fs::path dir(exec.out_dir);
  fs::create_directories(dir);
  std::vector<std::pair<fs::path, std::string>> files;
  files.push_back({dir / "summary.json", report.summary(assert_mode).dump(2) + "\n"});
  const Json timing{{"wall_seconds", report.wall_seconds},
                    {"threads", exec.threads},
                    {"out_dir", exec.out_dir},
                    {"kernels", kernels::isa_name(kernels::active_isa())}};
  files.push_back({dir / "timing.json", timing.dump(2) + "\n"});
  for (const auto& t : report.tables) files.push_back({dir / (t.name + ".csv"), to_csv(t)});

  std::vector<fs::path> written;
  auto cleanup = [&] {
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
  };
  try {
    for (const auto& [path, text] : files) {
      fs::path tmp = path;
      tmp += ".tmp";
      std::ofstream os(tmp, std::ios::binary);
      written.push_back(tmp);
      os << text;
      if (!os.flush()) throw std::runtime_error("cannot write " + tmp.string());
    }
    std::vector<std::string> names;
    for (const auto& [path, _] : files) {
      fs::path tmp = path;
      tmp += ".tmp";
      fs::rename(tmp, path);
      written.push_back(path);
      names.push_back(path.string());
    }
    return names;
  } catch (...) {
    cleanup();
    throw;
  }
}

int execute(const Invocation& inv) {
  try {
    Json doc;
    {
      std::ifstream is(inv.config_path);
      if (!is) throw ConfigError("cannot read config " + inv.config_path);
      doc = Json::parse(is, nullptr, false);
      if (doc.is_discarded()) throw ConfigError(inv.config_path + ": not valid JSON");
    }
    if (doc.contains("experiment") && doc["experiment"] != inv.experiment) {
      throw ConfigError("config names experiment " + doc["experiment"].dump() + " but the subcommand is " +
                        inv.experiment);
    }
    doc["experiment"] = inv.experiment;
    for (const auto& o : inv.overrides) apply_override(doc, o);
    // seed: flag, then the config file, then GFX_SEED, then the default
    if (inv.seed) {
      apply_override(doc, "statistics.seed=" + std::to_string(*inv.seed));
    } else if (!(doc.contains("statistics") && doc["statistics"].contains("seed"))) {
      if (const char* env = std::getenv("GFX_SEED")) {
        char* end = nullptr;
        const unsigned long long s = std::strtoull(env, &end, 10);
        if (!*env || *end) throw ConfigError("GFX_SEED must be a non-negative integer");
        apply_override(doc, "statistics.seed=" + std::to_string(s));
      }
    }
    if (inv.replicas) {
      const std::string key = inv.experiment == "explode" ? "explode.replicas" : "statistics.replicas";
      apply_override(doc, key + "=" + std::to_string(*inv.replicas));
    }
    auto list_override = [&](const char* key, const std::vector<double>& v) {
      if (v.empty()) return;
      Json arr = Json::array();
      for (double x : v) arr.push_back(x);
      apply_override(doc, std::string(key) + "=" + arr.dump());
    };
    list_override("statistics.q", inv.q);
    list_override("statistics.t", inv.t);

    Execution exec;
    const Json cfg = normalize(doc, &exec);
    if (inv.threads) exec.threads = std::max(1u, *inv.threads);
    if (inv.out_dir) exec.out_dir = *inv.out_dir;

    const Report report = run(cfg, exec);
    emit(report, exec, inv.assert_mode);
    for (const auto& w : report.warnings) std::cerr << "gfx: warning: " << w << "\n";
    if (inv.assert_mode) {
      for (const auto& f : report.failures) std::cerr << "gfx: assertion failed: " << f << "\n";
    }
    return report.exit_code(inv.assert_mode);
  } catch (const ConfigError& e) {
    std::cerr << "gfx: config error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "gfx: config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "gfx: config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "gfx: error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace gfx::runner
