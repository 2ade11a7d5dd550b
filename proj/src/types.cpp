#include "cooc/types.hpp"

#include <chrono>
#include <cstdio>

#include "cooc/csv.hpp"
#include "cooc/error.hpp"

namespace cooc {

namespace {

bool valid_ymd(int y, int m, int d) {
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  return y >= 1900 && y <= 9999 && ymd.ok();
}

}  // namespace

Day parse_day(std::string_view text) {
  text = csv::trim(text);
  std::int64_t y = 0, m = 0, d = 0;
  bool ok = false;
  if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
    ok = csv::parse_int(text.substr(0, 4), y) && csv::parse_int(text.substr(5, 2), m) &&
         csv::parse_int(text.substr(8, 2), d);
  } else if (text.size() == 8) {
    std::int64_t v = 0;
    ok = csv::parse_int(text, v);
    y = v / 10000;
    m = (v / 100) % 100;
    d = v % 100;
  }
  if (!ok || !valid_ymd(static_cast<int>(y), static_cast<int>(m), static_cast<int>(d))) {
    throw DataError("invalid date '" + std::string(text) + "'");
  }
  return Day{static_cast<std::int32_t>(y * 10000 + m * 100 + d)};
}

std::string format_day(Day d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year(), d.month(), d.dom());
  return buf;
}

SymbolTable::SymbolTable(const std::vector<std::string>& universe, const std::vector<std::string>& market) {
  for (const auto& t : universe) {
    if (find(t)) throw DataError("duplicate ticker in universe: " + t);
    set_universe(intern(t), true);
  }
  for (const auto& t : market) {
    const auto id = intern(t);
    if (in_market(id)) throw DataError("duplicate ticker in market index: " + t);
    set_market(id, true);
  }
}

SymbolId SymbolTable::intern(std::string_view ticker) {
  if (auto id = find(ticker)) return *id;
  const auto id = static_cast<SymbolId>(tickers_.size());
  tickers_.emplace_back(ticker);
  universe_mask_.push_back(0);
  market_mask_.push_back(0);
  index_.emplace(std::string(ticker), id);
  return id;
}

std::optional<SymbolId> SymbolTable::find(std::string_view ticker) const {
  const auto it = index_.find(std::string(ticker));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SymbolId SymbolTable::at(std::string_view ticker) const {
  if (auto id = find(ticker)) return *id;
  throw DataError("unknown ticker '" + std::string(ticker) + "'");
}

std::string_view class_name(TradeClass c) {
  switch (c) {
    case TradeClass::Iso: return "iso";
    case TradeClass::NisS: return "nis_s";
    case TradeClass::NisC: return "nis_c";
    case TradeClass::NisB: return "nis_b";
  }
  return "?";
}

TradeClass parse_class(std::string_view name) {
  if (name == "iso") return TradeClass::Iso;
  if (name == "nis_s") return TradeClass::NisS;
  if (name == "nis_c") return TradeClass::NisC;
  if (name == "nis_b") return TradeClass::NisB;
  throw DataError("unknown trade class '" + std::string(name) + "'");
}

std::string_view type_name(CoiType t) {
  switch (t) {
    case CoiType::All: return "all";
    case CoiType::Iso: return "iso";
    case CoiType::Nis: return "nis";
    case CoiType::NisS: return "nis_s";
    case CoiType::NisC: return "nis_c";
    case CoiType::NisB: return "nis_b";
  }
  return "?";
}

CoiType parse_type(std::string_view name) {
  for (auto t : kAllCoiTypes) {
    if (type_name(t) == name) return t;
  }
  // accept the hyphenated spelling too
  if (name == "nis-s") return CoiType::NisS;
  if (name == "nis-c") return CoiType::NisC;
  if (name == "nis-b") return CoiType::NisB;
  throw DataError("unknown COI type '" + std::string(name) + "'");
}

TimeWindow TimeWindow::custom(std::int64_t start_ns, std::int64_t end_ns) {
  if (end_ns <= start_ns) throw DataError("custom window must have end > start");
  return {Kind::Custom, start_ns, end_ns};
}

std::string TimeWindow::name() const {
  switch (kind) {
    case Kind::FullDay: return "full";
    case Kind::FirstHalfHour: return "open30";
    case Kind::Mid: return "mid";
    case Kind::LastHalfHour: return "close30";
    case Kind::Custom: break;
  }
  return "custom_" + std::to_string(start_ns) + "_" + std::to_string(end_ns);
}

TimeWindow TimeWindow::parse(std::string_view name) {
  if (name == "full") return full_day();
  if (name == "open30") return first_half_hour();
  if (name == "mid") return mid();
  if (name == "close30") return last_half_hour();
  if (name.starts_with("custom_")) {
    const auto rest = name.substr(7);
    const auto sep = rest.find('_');
    std::int64_t s = 0, e = 0;
    if (sep != std::string_view::npos && csv::parse_int(rest.substr(0, sep), s) &&
        csv::parse_int(rest.substr(sep + 1), e)) {
      return custom(s, e);
    }
  }
  throw DataError("unknown window '" + std::string(name) + "'");
}

std::vector<TimeWindow> standard_windows() {
  return {TimeWindow::full_day(), TimeWindow::first_half_hour(), TimeWindow::mid(), TimeWindow::last_half_hour()};
}

std::string_view measure_name(Measure m) { return m == Measure::Count ? "count" : "volume"; }

Measure parse_measure(std::string_view name) {
  if (name == "count") return Measure::Count;
  if (name == "volume") return Measure::Volume;
  throw DataError("unknown measure '" + std::string(name) + "'");
}

}  // namespace cooc
