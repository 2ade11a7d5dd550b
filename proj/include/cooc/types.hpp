#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cooc {

/// Calendar date stored as yyyymmdd.
struct Day {
  std::int32_t ymd = 0;

  constexpr int year() const { return ymd / 10000; }
  constexpr int month() const { return (ymd / 100) % 100; }
  constexpr int dom() const { return ymd % 100; }
  auto operator<=>(const Day&) const = default;
};

/// Parses "YYYY-MM-DD" or "YYYYMMDD". Throws DataError.
Day parse_day(std::string_view text);
/// Formats as "YYYY-MM-DD".
std::string format_day(Day d);

inline constexpr std::int64_t kNsPerSecond = 1'000'000'000;
inline constexpr std::int64_t kSessionOpenNs = 34'200 * kNsPerSecond;   // 09:30:00
inline constexpr std::int64_t kSessionCloseNs = 57'600 * kNsPerSecond;  // 16:00:00
inline constexpr std::int64_t kFiveMinutesNs = 300 * kNsPerSecond;
inline constexpr int kIntervalsPerDay = 78;

/// Aggressor side of a trade.
enum class Direction : std::int8_t { Buy = 1, Sell = -1 };

constexpr Direction opposite(Direction d) {
  return d == Direction::Buy ? Direction::Sell : Direction::Buy;
}

using SymbolId = std::int32_t;

struct TradeRecord {
  SymbolId symbol_id = 0;
  Day day;
  std::int64_t ts_ns = 0;
  Direction direction = Direction::Buy;
  std::int64_t size = 0;
  std::int64_t price4 = 0;  // units of 1e-4 dollars

  bool operator==(const TradeRecord&) const = default;
};

class SymbolTable {
public:
  SymbolTable() = default;
  /// Universe and market are given as ticker lists; their union forms the table
  /// (universe first, then market-only tickers, each in the given order).
  SymbolTable(const std::vector<std::string>& universe, const std::vector<std::string>& market);

  /// Returns the id of `ticker`, appending it (outside universe and market) if unknown.
  SymbolId intern(std::string_view ticker);
  std::optional<SymbolId> find(std::string_view ticker) const;
  SymbolId at(std::string_view ticker) const;

  const std::string& ticker(SymbolId id) const { return tickers_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tickers_.size(); }
  bool in_universe(SymbolId id) const { return universe_mask_.at(static_cast<std::size_t>(id)) != 0; }
  bool in_market(SymbolId id) const { return market_mask_.at(static_cast<std::size_t>(id)) != 0; }
  void set_universe(SymbolId id, bool v) { universe_mask_.at(static_cast<std::size_t>(id)) = v; }
  void set_market(SymbolId id, bool v) { market_mask_.at(static_cast<std::size_t>(id)) = v; }

  const std::vector<std::string>& tickers() const { return tickers_; }
  const std::vector<std::uint8_t>& universe_mask() const { return universe_mask_; }
  const std::vector<std::uint8_t>& market_mask() const { return market_mask_; }

private:
  std::vector<std::string> tickers_;
  std::vector<std::uint8_t> universe_mask_;
  std::vector<std::uint8_t> market_mask_;
  std::unordered_map<std::string, SymbolId> index_;
};

/// Stored co-occurrence class. `nis` is the union of the three Nis classes.
enum class TradeClass : std::uint8_t { Iso = 0, NisS = 1, NisC = 2, NisB = 3 };

std::string_view class_name(TradeClass c);  // iso, nis_s, nis_c, nis_b
TradeClass parse_class(std::string_view name);

/// Trade groups over which imbalances are computed.
enum class CoiType : std::uint8_t { All = 0, Iso, Nis, NisS, NisC, NisB };
inline constexpr std::size_t kCoiTypeCount = 6;
inline constexpr std::array<CoiType, kCoiTypeCount> kAllCoiTypes = {
    CoiType::All, CoiType::Iso, CoiType::Nis, CoiType::NisS, CoiType::NisC, CoiType::NisB};

std::string_view type_name(CoiType t);  // all, iso, nis, nis_s, nis_c, nis_b
CoiType parse_type(std::string_view name);
constexpr std::size_t index_of(CoiType t) { return static_cast<std::size_t>(t); }

/// Intraday window [start_ns, end_ns). The standard windows ending at 16:00 extend one
/// nanosecond past the close so that trades stamped exactly 16:00:00 are included.
struct TimeWindow {
  enum class Kind : std::uint8_t { FullDay, FirstHalfHour, Mid, LastHalfHour, Custom };
  Kind kind = Kind::FullDay;
  std::int64_t start_ns = kSessionOpenNs;
  std::int64_t end_ns = kSessionCloseNs + 1;

  static TimeWindow full_day() { return {Kind::FullDay, kSessionOpenNs, kSessionCloseNs + 1}; }
  static TimeWindow first_half_hour() { return {Kind::FirstHalfHour, kSessionOpenNs, 36'000 * kNsPerSecond}; }
  static TimeWindow mid() { return {Kind::Mid, 36'000 * kNsPerSecond, 55'800 * kNsPerSecond}; }
  static TimeWindow last_half_hour() { return {Kind::LastHalfHour, 55'800 * kNsPerSecond, kSessionCloseNs + 1}; }
  static TimeWindow custom(std::int64_t start_ns, std::int64_t end_ns);

  bool contains(std::int64_t ts) const { return ts >= start_ns && ts < end_ns; }
  /// full, open30, mid, close30, or custom_<start>_<end>.
  std::string name() const;
  static TimeWindow parse(std::string_view name);
  bool operator==(const TimeWindow&) const = default;
};

std::vector<TimeWindow> standard_windows();

/// One value of a daily series.
struct DatedValue {
  Day day;
  double value = 0.0;
  bool operator==(const DatedValue&) const = default;
};

enum class Measure : std::uint8_t { Count, Volume };
std::string_view measure_name(Measure m);
Measure parse_measure(std::string_view name);

}  // namespace cooc
