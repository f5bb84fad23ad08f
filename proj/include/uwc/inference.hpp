#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace uwc {

double mean_of(const std::vector<double>& x);
/// Population standard deviation (divisor T), used throughout for consistency with the
/// bandwidth-0 HAC estimator.
double sd_of(const std::vector<double>& x);

struct BootstrapResult {
  std::vector<double> replicate_means;
  double mean = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  /// one-sided p-value for H1: mean < 0
  double p_one_sided = 1.0;
  std::size_t block_length = 1;
  std::size_t n_boot = 0;
};

/// Start indices of the moving blocks for each replicate (shared across series for joint resampling).
std::vector<std::vector<std::size_t>> block_starts(std::size_t T, std::size_t b, std::size_t n_boot, std::uint64_t seed);

BootstrapResult block_bootstrap_mean(const std::vector<double>& series, std::size_t block_length, std::size_t n_boot,
                                     std::uint64_t seed);

std::size_t default_bandwidth(std::size_t T);
/// Bartlett-kernel HAC standard error of the mean; bandwidth < 0 selects the default rule.
double hac_se(const std::vector<double>& series, long bandwidth = -1);

std::size_t default_block_length(std::size_t T, std::size_t horizon);

/// Step-down max-T adjusted p-values (H1: mean < 0 for each series).
struct MaxTResult {
  std::vector<double> raw_p;
  std::vector<double> adjusted_p;
};
MaxTResult maxT_fwer(const std::vector<std::vector<double>>& series, std::size_t block_length, std::size_t n_boot,
                     std::uint64_t seed);

std::vector<bool> bh_fdr(const std::vector<double>& p_values, double q);

struct TestReport {
  std::string method;
  std::string reference;
  double mean = 0.0;
  double hac_se = 0.0;
  double t_stat = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double p_one_sided = 1.0;
  double adjusted_p = 1.0;
  std::size_t block_length = 1;
  std::size_t n_boot = 0;
};

TestReport test_report(const std::vector<double>& differential, std::size_t horizon, std::size_t n_boot,
                       std::uint64_t seed);

}  // namespace uwc
