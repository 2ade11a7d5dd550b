#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cooc/econometrics.hpp"
#include "cooc/market_data.hpp"
#include "cooc/null_model.hpp"
#include "cooc/portfolio.hpp"
#include "cooc/synthetic.hpp"
#include "cooc/types.hpp"

namespace cooc::cli {

namespace fs = std::filesystem;

/// A path as written in the config plus its resolution against the config's directory.
struct ConfigPath {
  std::string text;
  fs::path resolved;

  bool empty() const { return text.empty(); }
};

struct RegressionConfig {
  DesignSpec spec;
  bool per_symbol = false;
  bool subperiods = false;
  std::size_t min_obs = 30;
};

struct SortConfig {
  SortSpec spec;
  CoiType primary = CoiType::Iso;
  std::optional<CoiType> secondary;
};

struct SimulateConfig {
  std::string kind = "planted";  // planted | poisson
  PlantedConfig planted;
  PoissonConfig poisson;
  bool lobster = false;  // also write message files for the ingest command
};

struct RunConfig {
  fs::path base_dir;  // directory of the config file

  ConfigPath messages_dir, trades_dir, bars, factors, momentum_factors;
  std::vector<std::string> universe;
  std::vector<std::string> market;
  std::string spy_ticker = "SPY";
  std::vector<Day> days;  // expected trading days for ingest, optional

  std::vector<std::int64_t> deltas_ns;
  std::optional<std::int64_t> chosen_delta_ns;
  Measure measure = Measure::Count;
  std::vector<TimeWindow> windows;
  TimeWindow analysis_window = TimeWindow::full_day();
  bool write_labels = true;
  DistanceNorm distance_norm = DistanceNorm::WeightedL1;
  std::int64_t interval_ns = kFiveMinutesNs;

  std::vector<RegressionConfig> regressions;
  std::vector<SortConfig> sorts;
  std::vector<double> costs_bps;
  std::optional<int> hac_lags;
  double rf_daily = kDefaultDailyRiskFree;
  int benchmark_buckets = 5;

  std::uint64_t seed = 42;
  unsigned threads = 0;  // 0 = available cores
  ConfigPath output_dir;
  bool include_hidden = false;
  ConflictPolicy conflict = ConflictPolicy::Drop;

  SimulateConfig simulate;
};

/// Default delta grid in nanoseconds: 0.05, 0.075, 0.125, 0.25, 0.5, 1, 5 and 50 ms.
std::vector<std::int64_t> default_deltas();

/// Throws UsageError on unknown keys, wrong types or invalid values.
RunConfig parse_config(const nlohmann::json& j, const fs::path& base_dir);
RunConfig load_config(const fs::path& path);
/// An empty configuration rooted at `base_dir` (every field at its default).
RunConfig default_config(const fs::path& base_dir);

/// Normalized form with defaults filled in; paths appear as written.
nlohmann::json to_json(const RunConfig& config, bool include_run_settings = true);

/// 16 hex digits of FNV-1a over the normalized config, ignoring output_dir and threads.
std::string config_hash(const RunConfig& config);

}  // namespace cooc::cli
