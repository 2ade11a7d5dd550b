#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cooc/types.hpp"

namespace cooc {

struct NeighbourhoodParams {
  std::int64_t delta_ns = 1'000'000;
  /// Membership flags of the market index, indexed by symbol id.
  std::vector<std::uint8_t> market_mask;
};

/// One trading day of trades, indexed by symbol id; each list sorted by ts_ns.
struct DayTrades {
  Day day;
  std::vector<std::vector<TradeRecord>> by_symbol;

  std::size_t total() const;
};

/// Splits a trade stream (any order) into per-day groups sorted by day, each with
/// `n_symbols` lists sorted by time.
std::vector<DayTrades> group_by_day(std::span<const TradeRecord> trades, std::size_t n_symbols);

struct SideCounts {
  std::int64_t buy_count = 0;
  std::int64_t sell_count = 0;
  std::int64_t buy_volume = 0;
  std::int64_t sell_volume = 0;

  void add(Direction d, std::int64_t size) {
    if (d == Direction::Buy) {
      ++buy_count;
      buy_volume += size;
    } else {
      ++sell_count;
      sell_volume += size;
    }
  }
  SideCounts& operator+=(const SideCounts& o) {
    buy_count += o.buy_count;
    sell_count += o.sell_count;
    buy_volume += o.buy_volume;
    sell_volume += o.sell_volume;
    return *this;
  }
  bool operator==(const SideCounts&) const = default;
};

struct LabelCounts {
  std::array<SideCounts, kCoiTypeCount> by_type{};

  SideCounts& operator[](CoiType t) { return by_type[index_of(t)]; }
  const SideCounts& operator[](CoiType t) const { return by_type[index_of(t)]; }
  bool operator==(const LabelCounts&) const = default;
};

struct CountRow {
  SymbolId symbol_id = 0;
  Day day;
  std::size_t window = 0;  // index into DailyLabelCounts::windows
  LabelCounts counts;
};

/// Per (universe symbol, window) counts for one day. Every universe symbol has a row
/// for every window, zero-filled when it did not trade.
struct DailyLabelCounts {
  Day day;
  std::vector<TimeWindow> windows;
  std::vector<CountRow> rows;  // ordered by (symbol_id, window)

  const CountRow* find(SymbolId s, std::size_t window) const;
};

struct DayLabels {
  Day day;
  /// Parallel to DayTrades::by_symbol; empty for symbols outside the universe.
  std::vector<std::vector<TradeClass>> by_symbol;
  bool operator==(const DayLabels&) const = default;
};

struct DayClassification {
  DayLabels labels;
  DailyLabelCounts counts;
};

struct ClassifyOptions {
  std::vector<TimeWindow> windows = {TimeWindow::full_day()};
  /// Number of time-contiguous partitions processed concurrently. Labels do not
  /// depend on this value.
  unsigned partitions = 1;
};

/// Labels every trade of every universe symbol. A trade has a same-stock neighbour if
/// another trade of its symbol lies strictly within delta of it, and a cross neighbour
/// if a trade of a different market-index symbol does. Throws DataError on unsorted or
/// duplicate timestamps within a symbol, or delta < 1.
DayClassification classify_day(const DayTrades& day, const NeighbourhoodParams& params,
                               std::span<const std::uint8_t> universe_mask, const ClassifyOptions& options = {});

inline constexpr std::size_t kBruteForceTradeLimit = 100'000;

/// Pairwise evaluation of the labeling rules. Throws RefusalError above
/// kBruteForceTradeLimit trades.
DayClassification classify_day_bruteforce(const DayTrades& day, const NeighbourhoodParams& params,
                                          std::span<const std::uint8_t> universe_mask,
                                          const ClassifyOptions& options = {});

/// classify_day for each delta (strictly ascending), sharing the merge of all
/// symbols' trades across the sweep.
std::vector<DayClassification> sweep_delta(const DayTrades& day, std::span<const std::int64_t> deltas,
                                           std::span<const std::uint8_t> market_mask,
                                           std::span<const std::uint8_t> universe_mask,
                                           const ClassifyOptions& options = {});

DailyLabelCounts aggregate_counts(const DayTrades& day, const DayLabels& labels,
                                  std::span<const std::uint8_t> universe_mask, std::span<const TimeWindow> windows);

/// Trades per symbol per fixed-length interval starting at 09:30.
struct IntervalCounts {
  Day day;
  std::int64_t interval_ns = kFiveMinutesNs;
  std::vector<std::vector<std::int64_t>> by_symbol;  // [symbol][interval]
};

/// Trades at exactly 16:00:00 fall into the last interval.
IntervalCounts count_intervals(const DayTrades& day, std::int64_t interval_ns = kFiveMinutesNs);

}  // namespace cooc
