#include "uwc/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "uwc/rng.hpp"

namespace uwc {

double mean_of(const std::vector<double>& x) {
  if (x.empty()) throw std::invalid_argument("mean_of: empty series");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sd_of(const std::vector<double>& x) {
  double m = mean_of(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size()));
}

std::vector<std::vector<std::size_t>> block_starts(std::size_t T, std::size_t b, std::size_t n_boot,
                                                   std::uint64_t seed) {
  const std::size_t n_blocks = (T + b - 1) / b;
  const std::size_t n_starts = T - b + 1;
  std::vector<std::vector<std::size_t>> out(n_boot, std::vector<std::size_t>(n_blocks));
  for (std::size_t r = 0; r < n_boot; ++r) {
    CounterRng rng(seed, "bootstrap/replicate", r);
    for (auto& s : out[r]) s = static_cast<std::size_t>(rng.below(n_starts));
  }
  return out;
}

namespace {

double replicate_mean(const std::vector<double>& x, const std::vector<std::size_t>& starts, std::size_t b) {
  const std::size_t T = x.size();
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t st : starts) {
    for (std::size_t k = 0; k < b && n < T; ++k, ++n) s += x[st + k];
  }
  return s / static_cast<double>(T);
}

double percentile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  double h = (static_cast<double>(v.size()) - 1.0) * p;
  auto lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

void check_bootstrap_args(std::size_t T, std::size_t b, std::size_t n_boot) {
  if (T == 0) throw std::invalid_argument("block bootstrap: empty series");
  if (b < 1 || b > T) throw std::invalid_argument("block bootstrap: block length must lie in [1, T]");
  if (n_boot < 200) throw std::invalid_argument("block bootstrap: n_boot must be >= 200");
}

}  // namespace

BootstrapResult block_bootstrap_mean(const std::vector<double>& x, std::size_t b, std::size_t n_boot,
                                     std::uint64_t seed) {
  check_bootstrap_args(x.size(), b, n_boot);
  BootstrapResult r;
  r.mean = mean_of(x);
  r.block_length = b;
  r.n_boot = n_boot;
  auto starts = block_starts(x.size(), b, n_boot, seed);
  r.replicate_means.resize(n_boot);
  std::size_t as_extreme = 0;
  for (std::size_t i = 0; i < n_boot; ++i) {
    r.replicate_means[i] = replicate_mean(x, starts[i], b);
    if (r.replicate_means[i] - r.mean <= r.mean) ++as_extreme;
  }
  r.ci_lower = percentile(r.replicate_means, 0.025);
  r.ci_upper = percentile(r.replicate_means, 0.975);
  r.p_one_sided = static_cast<double>(as_extreme) / static_cast<double>(n_boot);
  return r;
}

std::size_t default_bandwidth(std::size_t T) {
  return static_cast<std::size_t>(std::floor(4.0 * std::pow(static_cast<double>(T) / 100.0, 2.0 / 9.0)));
}

double hac_se(const std::vector<double>& x, long bandwidth) {
  const std::size_t T = x.size();
  if (T == 0) throw std::invalid_argument("hac_se: empty series");
  std::size_t L = bandwidth < 0 ? default_bandwidth(T) : static_cast<std::size_t>(bandwidth);
  if (L >= T) L = T - 1;
  if (L == 0) return sd_of(x) / std::sqrt(static_cast<double>(T));
  double m = mean_of(x);
  auto gamma = [&](std::size_t k) {
    double s = 0.0;
    for (std::size_t t = k; t < T; ++t) s += (x[t] - m) * (x[t - k] - m);
    return s / static_cast<double>(T);
  };
  double lrv = gamma(0);
  for (std::size_t k = 1; k <= L; ++k) lrv += 2.0 * (1.0 - static_cast<double>(k) / static_cast<double>(L + 1)) * gamma(k);
  return std::sqrt(std::max(lrv, 0.0) / static_cast<double>(T));
}

std::size_t default_block_length(std::size_t T, std::size_t horizon) {
  auto cube = static_cast<std::size_t>(std::ceil(std::cbrt(static_cast<double>(T)) - 1e-12));
  return std::min(std::max(horizon, cube), std::max<std::size_t>(T, 1));
}

MaxTResult maxT_fwer(const std::vector<std::vector<double>>& series, std::size_t b, std::size_t n_boot,
                     std::uint64_t seed) {
  if (series.empty()) throw std::invalid_argument("maxT_fwer: need at least one series");
  const std::size_t T = series.front().size();
  for (const auto& s : series)
    if (s.size() != T) throw std::invalid_argument("maxT_fwer: series differ in length");
  check_bootstrap_args(T, b, n_boot);
  const std::size_t M = series.size();
  auto starts = block_starts(T, b, n_boot, seed);
  std::vector<double> stat(M), se(M);
  std::vector<std::vector<double>> boot(M, std::vector<double>(n_boot));
  for (std::size_t m = 0; m < M; ++m) {
    double mean = mean_of(series[m]);
    for (std::size_t r = 0; r < n_boot; ++r) boot[m][r] = replicate_mean(series[m], starts[r], b) - mean;
    double ss = 0.0;
    for (double v : boot[m]) ss += v * v;
    se[m] = std::sqrt(ss / static_cast<double>(n_boot));
    stat[m] = se[m] > 0 ? -mean / se[m] : (mean < 0 ? std::numeric_limits<double>::infinity() : 0.0);
    for (auto& v : boot[m]) v = se[m] > 0 ? -v / se[m] : 0.0;
  }
  MaxTResult res;
  res.raw_p.resize(M);
  res.adjusted_p.resize(M);
  for (std::size_t m = 0; m < M; ++m) {
    std::size_t c = 0;
    for (double v : boot[m])
      if (v >= stat[m]) ++c;
    res.raw_p[m] = static_cast<double>(c) / static_cast<double>(n_boot);
  }
  std::vector<std::size_t> order(M);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) { return stat[a] > stat[c]; });
  double running = 0.0;
  for (std::size_t j = 0; j < M; ++j) {
    std::size_t c = 0;
    for (std::size_t r = 0; r < n_boot; ++r) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t i = j; i < M; ++i) mx = std::max(mx, boot[order[i]][r]);
      if (mx >= stat[order[j]]) ++c;
    }
    running = std::max(running, static_cast<double>(c) / static_cast<double>(n_boot));
    res.adjusted_p[order[j]] = running;
  }
  return res;
}

std::vector<bool> bh_fdr(const std::vector<double>& p, double q) {
  const std::size_t m = p.size();
  for (double v : p)
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("bh_fdr: p-value outside [0,1]");
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::size_t k_max = 0;
  for (std::size_t k = 1; k <= m; ++k)
    if (p[order[k - 1]] <= static_cast<double>(k) * q / static_cast<double>(m)) k_max = k;
  std::vector<bool> reject(m, false);
  for (std::size_t k = 0; k < k_max; ++k) reject[order[k]] = true;
  return reject;
}

TestReport test_report(const std::vector<double>& d, std::size_t horizon, std::size_t n_boot, std::uint64_t seed) {
  TestReport r;
  r.mean = mean_of(d);
  r.hac_se = hac_se(d);
  r.t_stat = r.hac_se > 0 ? r.mean / r.hac_se : std::numeric_limits<double>::quiet_NaN();
  r.block_length = default_block_length(d.size(), horizon);
  r.n_boot = n_boot;
  auto bs = block_bootstrap_mean(d, r.block_length, n_boot, seed);
  r.ci_lower = bs.ci_lower;
  r.ci_upper = bs.ci_upper;
  r.p_one_sided = bs.p_one_sided;
  r.adjusted_p = bs.p_one_sided;
  return r;
}

}  // namespace uwc
