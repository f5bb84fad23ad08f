#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "uwc/distribution.hpp"
#include "uwc/evaluation.hpp"
#include "uwc/governance.hpp"

namespace uwc {

/// Malformed or missing input data.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kPanelHeader =
    "timestamp,symbol,method,decision_loss,net_return,turnover,total_cost,constraint_bound,kappa,solver_status";
inline constexpr const char* kMarketHeader = "timestamp,return,volatility,spread,volume";
inline constexpr const char* kLatentHeader = "timestamp,signal,true_sd,regime";
inline constexpr const char* kStressHeader = "scenario,expected_loss,multiplier";
inline constexpr const char* kDriftHeader = "timestamp,z";

/// Shortest round-trip-safe decimal (17 significant digits); non-finite as nan/inf/-inf.
std::string format_double(double x);

/// Writes to a sibling temporary file and renames it over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

std::string panel_csv(const EvaluationPanel& panel);
EvaluationPanel parse_panel_csv(const std::string& text);

std::string market_csv(const std::vector<MarketObservation>& market);
std::vector<MarketObservation> parse_market_csv(const std::string& text);

struct LatentSeries {
  std::vector<double> signal;
  std::vector<double> true_sd;
  std::vector<int> regime;
};
std::string latent_csv(const std::vector<MarketObservation>& market, const LatentSeries& latent);
LatentSeries parse_latent_csv(const std::string& text);

std::string stress_csv(const std::vector<StressResult>& rows);
std::string drift_csv(const std::vector<std::int64_t>& timestamps, const DriftStatistic& drift);

}  // namespace uwc
