#include "gfx/replicate.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace gfx {

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned count = unsigned(std::min<std::size_t>(threads, n));
  pool.reserve(count);
  for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

Summary summarize(const std::vector<double>& values, std::size_t excluded) {
  Summary s;
  s.excluded = excluded;
  s.n = values.size();
  if (values.empty()) return s;
  // two-pass for stability; order is fixed so the result is reproducible
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / double(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.se = std::sqrt(ss / double(s.n - 1) / double(s.n));
  }
  return s;
}

Summary replicate(const std::function<double(std::size_t, const RandomStream&)>& task, std::size_t n,
                  std::uint64_t seed, std::uint64_t purpose, unsigned threads) {
  std::vector<double> out(n);
  parallel_for(n, threads, [&](std::size_t i) { out[i] = task(i, replica_stream(seed, purpose, i)); });
  std::vector<double> kept;
  kept.reserve(n);
  std::size_t excluded = 0;
  for (double v : out) {
    if (std::isnan(v)) ++excluded;
    else kept.push_back(v);
  }
  return summarize(kept, excluded);
}

std::pair<double, double> ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) throw std::invalid_argument("ols_slope: need >= 3 paired points");
  const double n = double(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("ols_slope: x has no spread");
  const double b = sxy / sxx;
  const double a = my - b * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - a - b * x[i];
    rss += r * r;
  }
  return {b, std::sqrt(rss / (n - 2.0) / sxx)};
}

}  // namespace gfx
