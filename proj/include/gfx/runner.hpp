#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace gfx::runner {

using Json = nlohmann::json;

/// Bad configuration document or override; maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& experiments() {
  static const std::vector<std::string> names{"cumulant", "simulate",   "martingale-check",
                                              "extinction", "couple",   "spine",
                                              "explode",  "change-of-measure"};
  return names;
}

/// Settings that must not influence any reported number. They are kept out
/// of the config echo so that reports do not depend on them.
struct Execution {
  unsigned threads = 1;
  std::string out_dir = "gfx_out";
};

/// Parse "a.b.c=value" and set that leaf of doc. The value is read as JSON
/// when it parses, otherwise as a string.
void apply_override(Json& doc, const std::string& assignment);

/// Validate a raw document and fill every default. Unknown keys, wrong types
/// and out-of-range values throw ConfigError. An "execution" block, if
/// present, is moved into *exec and dropped from the result.
Json normalize(Json doc, Execution* exec = nullptr);

/// Hex digest of the canonical dump.
std::string content_hash(const Json& j);

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

/// RFC-4180 text with CRLF line ends.
std::string to_csv(const Table& t);
/// %.17g, with inf, -inf and nan spelled out.
std::string format_number(double v);

struct Report {
  std::string experiment;
  Json config;
  Json results;
  std::vector<Table> tables;
  std::vector<std::string> failures;  // assertion failures
  std::vector<std::string> warnings;  // capped or indeterminate results beyond tolerance
  double wall_seconds = 0.0;

  /// 0, 1 (assertions failed, only with assert_mode) or 3.
  int exit_code(bool assert_mode) const;
  /// The summary document (no wall-clock data).
  Json summary(bool assert_mode) const;
};

/// Run a normalized configuration.
Report run(const Json& config, const Execution& exec);

/// Write summary.json, timing.json and one CSV per table into dir. Files are
/// written under temporary names and renamed at the end; on failure every
/// file of this call is removed.
std::vector<std::string> emit(const Report& report, const Execution& exec, bool assert_mode);

struct Invocation {
  std::string experiment;
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> replicas;
  std::optional<unsigned> threads;
  std::optional<std::string> out_dir;
  std::vector<double> q;
  std::vector<double> t;
  bool assert_mode = false;
};

/// Load, override, normalize, run and emit. Returns the process exit code
/// (0 ok, 1 assertion failure, 2 config error, 3 capped or indeterminate
/// results, 4 internal error) and reports problems on stderr.
int execute(const Invocation& inv);

}  // namespace gfx::runner
