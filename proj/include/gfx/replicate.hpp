#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "gfx/random.hpp"

namespace gfx {

/// Run fn(i) for i in [0, n) on up to `threads` workers. Each index is
/// processed exactly once; the caller stores results by index, so the outcome
/// does not depend on the thread count. The first exception is rethrown.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

/// Stream of replica i of a run.
inline RandomStream replica_stream(std::uint64_t seed, std::uint64_t purpose, std::size_t i) {
  return RandomStream(seed, derive_stream({purpose, std::uint64_t(i)}));
}

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double se = 0.0;
  std::size_t excluded = 0;
};

/// Mean and standard error of values merged in index order.
Summary summarize(const std::vector<double>& values, std::size_t excluded = 0);

/// Evaluate task(i, stream_i) for i < n in parallel; NaN results count as excluded.
Summary replicate(const std::function<double(std::size_t, const RandomStream&)>& task, std::size_t n,
                  std::uint64_t seed, std::uint64_t purpose, unsigned threads);

/// Ordinary least squares y = a + b x; returns (b, standard error of b).
std::pair<double, double> ols_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace gfx
