#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cooc/types.hpp"

namespace cooc {

// ---------------------------------------------------------------------------
// LOBSTER message files
// ---------------------------------------------------------------------------

/// One row of a LOBSTER message file. `direction` is the side of the limit order
/// (1 = buy limit, -1 = sell limit).
struct MessageRow {
  std::int64_t ts_ns = 0;
  int event_type = 0;
  std::int64_t order_id = 0;
  std::int64_t size = 0;
  std::int64_t price4 = 0;
  int direction = 0;
};

struct LobsterDay {
  SymbolId symbol_id = 0;
  Day day;
  std::vector<MessageRow> rows;
  /// Rows whose timestamp is earlier than the previous row's. They are kept.
  std::size_t out_of_order_rows = 0;
};

/// Converts "seconds.fraction" to integer nanoseconds without going through a
/// floating-point value. Digits past the ninth decimal are rounded half-up.
/// Returns nullopt on malformed input.
std::optional<std::int64_t> parse_time_ns(std::string_view text);

LobsterDay parse_lobster_messages(std::istream& in, std::string_view source, Day day, SymbolId symbol_id);
LobsterDay parse_lobster_messages(const std::filesystem::path& path, Day day, SymbolId symbol_id);

struct MessageFileName {
  std::string ticker;
  Day day;
};
/// Matches `<TICKER>_<YYYY-MM-DD>_[<start>_<end>_]message_*.csv`.
std::optional<MessageFileName> parse_message_filename(std::string_view filename);

// ---------------------------------------------------------------------------
// Trade inference
// ---------------------------------------------------------------------------

inline constexpr int kEventVisibleExecution = 4;
inline constexpr int kEventHiddenExecution = 5;

/// What to do with a group of executions sharing a timestamp but not a side.
enum class ConflictPolicy { Drop, Fail };

struct InferOptions {
  bool include_hidden = false;
  ConflictPolicy conflict = ConflictPolicy::Drop;
};

struct InferDiagnostics {
  std::size_t execution_rows = 0;     // rows of the kept event types
  std::size_t out_of_hours_rows = 0;  // of those, outside 09:30-16:00
  std::size_t merged_rows = 0;        // rows that were folded into another row's trade
  std::size_t conflict_groups = 0;
  std::int64_t input_shares = 0;      // in-hours shares of kept event types
  std::int64_t conflict_shares = 0;
  std::int64_t out_of_hours_shares = 0;
};

struct InferredTrades {
  std::vector<TradeRecord> trades;
  InferDiagnostics diagnostics;
};

/// Keeps executions, reverses the limit side to get the aggressor, drops rows outside
/// regular hours and merges rows with identical timestamps (summed size,
/// size-weighted price rounded half-up to 1e-4 dollars). Output is strictly increasing
/// in ts_ns. Throws DataError on a side conflict under ConflictPolicy::Fail.
InferredTrades infer_trades(const LobsterDay& messages, const InferOptions& options = {});

// ---------------------------------------------------------------------------
// Canonical trade CSV: symbol,day,ts_ns,dir,size,price4
// ---------------------------------------------------------------------------

inline constexpr std::string_view kTradeCsvHeader = "symbol,day,ts_ns,dir,size,price4";

void write_trades_csv(std::ostream& out, std::span<const TradeRecord> trades, const SymbolTable& symbols);
/// Unknown tickers are interned into `symbols`.
std::vector<TradeRecord> read_trades_csv(std::istream& in, SymbolTable& symbols, std::string_view source);
std::vector<TradeRecord> read_trades_csv(const std::filesystem::path& path, SymbolTable& symbols);

// ---------------------------------------------------------------------------
// Daily bars and returns
// ---------------------------------------------------------------------------

struct DailyBar {
  SymbolId symbol_id = 0;
  Day day;
  double open = 0.0;
  double close = 0.0;
};

inline constexpr std::string_view kBarCsvHeader = "day,ticker,open,close";

void write_bars_csv(std::ostream& out, std::span<const DailyBar> bars, const SymbolTable& symbols);
std::vector<DailyBar> read_bars_csv(std::istream& in, SymbolTable& symbols, std::string_view source);
std::vector<DailyBar> read_bars_csv(const std::filesystem::path& path, SymbolTable& symbols);

struct ReturnCell {
  bool present = false;
  double raw_oc = 0.0;  // ln(close / open)
  double excess = 0.0;  // raw_oc - SPY raw_oc
  double rv = 0.0;      // realized volatility from 5-minute last-trade prices
  double dvol = 0.0;    // dollar volume
};

/// Dense (symbol, day) grid. Days are the sorted union of bar days.
class ReturnPanel {
public:
  ReturnPanel() = default;
  ReturnPanel(std::vector<Day> days, std::size_t n_symbols);

  const std::vector<Day>& days() const { return days_; }
  std::size_t n_symbols() const { return n_symbols_; }
  std::optional<std::size_t> day_index(Day d) const;

  ReturnCell& at(SymbolId s, std::size_t day_idx) { return cells_[index(s, day_idx)]; }
  const ReturnCell& at(SymbolId s, std::size_t day_idx) const { return cells_[index(s, day_idx)]; }

  /// SPY open-to-close log return and close price per day.
  double spy_oc(std::size_t day_idx) const { return spy_oc_.at(day_idx); }
  double spy_close(std::size_t day_idx) const { return spy_close_.at(day_idx); }
  void set_spy(std::size_t day_idx, double oc, double close) {
    spy_oc_.at(day_idx) = oc;
    spy_close_.at(day_idx) = close;
  }

private:
  std::size_t index(SymbolId s, std::size_t d) const { return static_cast<std::size_t>(s) * days_.size() + d; }
  std::vector<Day> days_;
  std::size_t n_symbols_ = 0;
  std::vector<ReturnCell> cells_;
  std::vector<double> spy_oc_;
  std::vector<double> spy_close_;
};

/// Square root of the summed squared log returns between the last trade prices of
/// consecutive 5-minute buckets; empty buckets carry the previous price. The price
/// before the first bucket is the day's first trade price. Input must be one
/// symbol-day sorted by time. Zero for an empty day.
double realized_volatility(std::span<const TradeRecord> day_trades);
/// Sum of size * price over the trades, in dollars.
double dollar_volume(std::span<const TradeRecord> day_trades);

/// `n_symbols` sizes the grid (use the symbol table size). Cells without a bar are
/// absent. Every bar day must have a SPY bar, otherwise DataError.
ReturnPanel compute_returns(std::span<const DailyBar> bars, std::span<const DailyBar> spy_bars,
                            std::span<const TradeRecord> trades, std::size_t n_symbols);

// ---------------------------------------------------------------------------
// Factor data (Kenneth French daily files, percent units)
// ---------------------------------------------------------------------------

struct FactorRow {
  Day day;
  double mkt = 0.0, smb = 0.0, hml = 0.0, rmw = 0.0, cma = 0.0, mom = 0.0, rf = 0.0;
};

class FactorTable {
public:
  FactorTable() = default;
  explicit FactorTable(std::vector<FactorRow> rows);

  /// Throws DataError when the day is missing or lacks a momentum value.
  const FactorRow& at(Day d) const;
  bool contains(Day d) const;
  const std::vector<FactorRow>& rows() const { return rows_; }

private:
  std::vector<FactorRow> rows_;  // sorted by day
};

/// Parses the five-factor file; momentum comes from a `Mom` column or the separate file.
FactorTable parse_factors(std::istream& main, std::istream* momentum, std::string_view source);
FactorTable parse_factors(const std::filesystem::path& path,
                          const std::optional<std::filesystem::path>& momentum_path = std::nullopt);
/// Writes a single French-style file (percent units) including a Mom column.
void write_factors_csv(std::ostream& out, const FactorTable& factors);

}  // namespace cooc
