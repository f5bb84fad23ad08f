#include "uwc/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace uwc {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::vector<std::string>> parse_table(const std::string& text, const char* header) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw DataError("unexpected CSV header: '" + line + "', expected '" + header + "'");
  const std::size_t cols = split(header).size();
  std::vector<std::vector<std::string>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto f = split(line);
    if (f.size() != cols) throw DataError("line " + std::to_string(lineno) + ": expected " + std::to_string(cols) + " fields");
    rows.push_back(std::move(f));
  }
  return rows;
}

double to_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw DataError("not a number: '" + s + "'");
  return v;
}

std::int64_t to_int(const std::string& s) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw DataError("not an integer: '" + s + "'");
  return v;
}

}  // namespace

std::string panel_csv(const EvaluationPanel& panel) {
  std::string out = std::string(kPanelHeader) + "\n";
  for (const auto& r : panel) {
    out += std::to_string(r.timestamp) + "," + r.symbol + "," + r.method + "," + format_double(r.decision_loss) + "," +
           format_double(r.net_return) + "," + format_double(r.turnover) + "," + format_double(r.total_cost) + "," +
           (r.constraint_bound ? "1" : "0") + "," + format_double(r.kappa) + "," + r.solver_status + "\n";
  }
  return out;
}

EvaluationPanel parse_panel_csv(const std::string& text) {
  EvaluationPanel panel;
  for (const auto& f : parse_table(text, kPanelHeader)) {
    PanelRow r;
    r.timestamp = to_int(f[0]);
    r.symbol = f[1];
    r.method = f[2];
    r.decision_loss = to_double(f[3]);
    r.net_return = to_double(f[4]);
    r.turnover = to_double(f[5]);
    r.total_cost = to_double(f[6]);
    if (f[7] != "0" && f[7] != "1") throw DataError("constraint_bound must be 0 or 1");
    r.constraint_bound = f[7] == "1";
    r.kappa = to_double(f[8]);
    r.solver_status = f[9];
    panel.push_back(std::move(r));
  }
  return panel;
}

std::string market_csv(const std::vector<MarketObservation>& market) {
  std::string out = std::string(kMarketHeader) + "\n";
  for (const auto& o : market)
    out += std::to_string(o.timestamp) + "," + format_double(o.realized_return) + "," + format_double(o.volatility) +
           "," + format_double(o.spread) + "," + format_double(o.volume) + "\n";
  return out;
}

std::vector<MarketObservation> parse_market_csv(const std::string& text) {
  std::vector<MarketObservation> out;
  for (const auto& f : parse_table(text, kMarketHeader)) {
    MarketObservation o{to_int(f[0]), to_double(f[1]), to_double(f[2]), to_double(f[3]), to_double(f[4])};
    try {
      validate(o);
    } catch (const std::exception& e) {
      throw DataError("timestamp " + f[0] + ": " + e.what());
    }
    if (!out.empty() && o.timestamp <= out.back().timestamp) throw DataError("timestamps must strictly increase");
    out.push_back(o);
  }
  if (out.empty()) throw DataError("market CSV has no rows");
  return out;
}

std::string latent_csv(const std::vector<MarketObservation>& market, const LatentSeries& latent) {
  std::string out = std::string(kLatentHeader) + "\n";
  for (std::size_t t = 0; t < market.size(); ++t)
    out += std::to_string(market[t].timestamp) + "," + format_double(latent.signal[t]) + "," +
           format_double(latent.true_sd[t]) + "," + std::to_string(latent.regime[t]) + "\n";
  return out;
}

LatentSeries parse_latent_csv(const std::string& text) {
  LatentSeries l;
  for (const auto& f : parse_table(text, kLatentHeader)) {
    l.signal.push_back(to_double(f[1]));
    l.true_sd.push_back(to_double(f[2]));
    l.regime.push_back(static_cast<int>(to_int(f[3])));
  }
  return l;
}

std::string stress_csv(const std::vector<StressResult>& rows) {
  std::string out = std::string(kStressHeader) + "\n";
  for (const auto& r : rows)
    out += r.scenario.name + "," + format_double(r.expected_loss) + "," + format_double(r.multiplier) + "\n";
  return out;
}

std::string drift_csv(const std::vector<std::int64_t>& ts, const DriftStatistic& drift) {
  std::string out = std::string(kDriftHeader) + "\n";
  for (std::size_t i = 0; i < ts.size() && i < drift.z.size(); ++i)
    out += std::to_string(ts[i]) + "," + format_double(drift.z[i]) + "\n";
  return out;
}

}  // namespace uwc
