#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cooc/cli/commands.hpp"
#include "cooc/coi.hpp"
#include "cooc/market_data.hpp"

namespace cooc::cli::io {

/// <out>/<name>, created empty. Refuses (UsageError) when it already has content
/// and --force was not given; with --force the old content is removed.
fs::path prepare(const Context& ctx, const std::string& name);

/// Opens a text output and writes the config hash comment line.
std::ofstream open_csv(const fs::path& path, const std::string& hash);
void write_json(const fs::path& path, nlohmann::json j, const std::string& hash);

/// DataError naming the command that produces `path` when it is missing.
void require(const fs::path& path, const std::string& producer);
nlohmann::json read_json(const fs::path& path, const std::string& producer);

/// Universe first, then market-only tickers. UsageError on an empty universe.
SymbolTable symbol_table(const RunConfig& c);

fs::path trades_dir(const Context& ctx);
std::vector<fs::path> csv_files(const fs::path& dir);
std::vector<TradeRecord> load_trades(const Context& ctx, SymbolTable& symbols);

/// Bars with SPY split out, returns built over the merged calendar.
ReturnPanel load_returns(const Context& ctx, SymbolTable& symbols, bool with_trades);
FactorTable load_factors(const Context& ctx);

std::int64_t resolve_delta(const Context& ctx);
fs::path delta_dir(const Context& ctx, std::int64_t delta);

inline constexpr std::string_view kCountsHeader =
    "symbol,day,window,type,buy_count,sell_count,buy_volume,sell_volume";
inline constexpr std::string_view kCoiPanelHeader = "symbol,day,window,measure,type,value";

std::vector<CoiVector> read_coi_panel(const fs::path& path, SymbolTable& symbols, const TimeWindow& window,
                                      Measure measure);

std::string format_delta(std::int64_t delta);
nlohmann::json number(double v);  // null for non-finite values

}  // namespace cooc::cli::io
