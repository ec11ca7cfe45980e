#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace spdelab {

// splitmix64 step; used to derive independent per-worker seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index + 1));
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("mean: empty sample");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// standard error of the mean
inline double std_error(const std::vector<double>& v) {
  const std::size_t n = v.size();
  if (n < 2) return 0.0;
  const double m = mean(v);
  double s2 = 0.0;
  for (double x : v) s2 += (x - m) * (x - m);
  s2 /= static_cast<double>(n - 1);
  return std::sqrt(s2 / static_cast<double>(n));
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median: empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_stderr = 0.0;
};

// ordinary least squares y = slope*x + intercept
inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw std::invalid_argument("linear_fit: need >= 2 points");
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("linear_fit: degenerate abscissae");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    ss_res += r * r;
  }
  f.r2 = (syy > 0.0) ? 1.0 - ss_res / syy : 1.0;
  if (n > 2) f.slope_stderr = std::sqrt(ss_res / static_cast<double>(n - 2) / sxx);
  return f;
}

struct BootstrapCI {
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

// percentile bootstrap (fixed 200 resamples, deterministic given seed) for a
// statistic evaluated on per-sample values.
template <class Stat>
BootstrapCI bootstrap_ci(const std::vector<double>& sample, Stat stat, std::uint64_t seed,
                         double level = 0.90) {
  constexpr int kResamples = 200;
  if (sample.empty()) throw std::invalid_argument("bootstrap_ci: empty sample");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, sample.size() - 1);
  std::vector<double> stats(kResamples);
  std::vector<double> resample(sample.size());
  for (int b = 0; b < kResamples; ++b) {
    for (std::size_t i = 0; i < sample.size(); ++i) resample[i] = sample[pick(rng)];
    stats[b] = stat(resample);
  }
  std::sort(stats.begin(), stats.end());
  const double tail = 0.5 * (1.0 - level);
  const auto at = [&](double q) {
    const double pos = q * (kResamples - 1);
    const int lo = static_cast<int>(pos);
    const int hi = std::min(lo + 1, kResamples - 1);
    const double w = pos - lo;
    return (1.0 - w) * stats[lo] + w * stats[hi];
  };
  BootstrapCI ci;
  ci.estimate = stat(sample);
  ci.lower = at(tail);
  ci.upper = at(1.0 - tail);
  return ci;
}

}  // namespace spdelab
