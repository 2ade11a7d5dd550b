#include "cooc/market_data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>

#include "cooc/csv.hpp"
#include "cooc/error.hpp"

namespace cooc {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::optional<std::int64_t> parse_time_ns(std::string_view text) {
  text = csv::trim(text);
  const auto dot = text.find('.');
  const auto whole = text.substr(0, dot);
  std::int64_t seconds = 0;
  if (whole.empty() || whole.front() == '-' || !csv::parse_int(whole, seconds)) return std::nullopt;
  if (seconds > std::numeric_limits<std::int64_t>::max() / kNsPerSecond - 1) return std::nullopt;
  std::int64_t frac = 0;
  if (dot != std::string_view::npos) {
    const auto digits = text.substr(dot + 1);
    if (digits.empty()) return std::nullopt;
    std::int64_t scale = kNsPerSecond;
    for (std::size_t i = 0; i < digits.size(); ++i) {
      const char c = digits[i];
      if (c < '0' || c > '9') return std::nullopt;
      if (i < 9) {
        scale /= 10;
        frac += (c - '0') * scale;
      } else if (i == 9 && c >= '5') {
        frac += 1;
      }
    }
  }
  return seconds * kNsPerSecond + frac;
}

LobsterDay parse_lobster_messages(std::istream& in, std::string_view source, Day day, SymbolId symbol_id) {
  LobsterDay out;
  out.day = day;
  out.symbol_id = symbol_id;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (f.size() < 6) {
      throw ParseError(std::string(source), row, "expected at least 6 fields, got " + std::to_string(f.size()));
    }
    MessageRow m;
    const auto ts = parse_time_ns(f[0]);
    std::int64_t type = 0, dir = 0;
    if (!ts) throw ParseError(std::string(source), row, "bad time '" + std::string(f[0]) + "'");
    if (!csv::parse_int(f[1], type) || !csv::parse_int(f[2], m.order_id) || !csv::parse_int(f[3], m.size) ||
        !csv::parse_int(f[4], m.price4) || !csv::parse_int(f[5], dir)) {
      throw ParseError(std::string(source), row, "non-integer field");
    }
    if (dir != 1 && dir != -1) throw ParseError(std::string(source), row, "direction must be 1 or -1");
    m.ts_ns = *ts;
    m.event_type = static_cast<int>(type);
    m.direction = static_cast<int>(dir);
    if (!out.rows.empty() && m.ts_ns < out.rows.back().ts_ns) ++out.out_of_order_rows;
    out.rows.push_back(m);
  }
  return out;
}

LobsterDay parse_lobster_messages(const std::filesystem::path& path, Day day, SymbolId symbol_id) {
  auto in = open_input(path);
  return parse_lobster_messages(in, path.string(), day, symbol_id);
}

std::optional<MessageFileName> parse_message_filename(std::string_view filename) {
  if (!filename.ends_with(".csv")) return std::nullopt;
  // Ticker, then the first "_YYYY-MM-DD_" that is followed somewhere by "_message".
  for (std::size_t i = 1; i + 11 < filename.size(); ++i) {
    if (filename[i] != '_' || filename[i + 11] != '_') continue;
    const auto rest = filename.substr(i + 11);
    if (!rest.starts_with("_message") && rest.find("_message") == std::string_view::npos) continue;
    try {
      return MessageFileName{std::string(filename.substr(0, i)), parse_day(filename.substr(i + 1, 10))};
    } catch (const DataError&) {
    }
  }
  return std::nullopt;
}

InferredTrades infer_trades(const LobsterDay& messages, const InferOptions& options) {
  InferredTrades out;
  auto& diag = out.diagnostics;

  std::vector<MessageRow> exec;
  for (const auto& m : messages.rows) {
    const bool kept = m.event_type == kEventVisibleExecution ||
                      (options.include_hidden && m.event_type == kEventHiddenExecution);
    if (!kept) continue;
    ++diag.execution_rows;
    if (m.ts_ns < kSessionOpenNs || m.ts_ns > kSessionCloseNs) {
      ++diag.out_of_hours_rows;
      diag.out_of_hours_shares += m.size;
      continue;
    }
    diag.input_shares += m.size;
    exec.push_back(m);
  }
  std::stable_sort(exec.begin(), exec.end(),
                   [](const MessageRow& a, const MessageRow& b) { return a.ts_ns < b.ts_ns; });

  for (std::size_t i = 0; i < exec.size();) {
    std::size_t j = i + 1;
    bool conflict = false;
    while (j < exec.size() && exec[j].ts_ns == exec[i].ts_ns) {
      conflict |= exec[j].direction != exec[i].direction;
      ++j;
    }
    std::int64_t shares = 0;
    // Notional can exceed 64 bits only for absurd inputs; use 128-bit to be exact.
    __int128 notional = 0;
    for (std::size_t k = i; k < j; ++k) {
      shares += exec[k].size;
      notional += static_cast<__int128>(exec[k].size) * exec[k].price4;
    }
    if (conflict) {
      if (options.conflict == ConflictPolicy::Fail) {
        throw DataError("executions at ts_ns=" + std::to_string(exec[i].ts_ns) + " have conflicting sides");
      }
      ++diag.conflict_groups;
      diag.conflict_shares += shares;
    } else {
      TradeRecord t;
      t.symbol_id = messages.symbol_id;
      t.day = messages.day;
      t.ts_ns = exec[i].ts_ns;
      t.direction = opposite(exec[i].direction == 1 ? Direction::Buy : Direction::Sell);
      t.size = shares;
      t.price4 = static_cast<std::int64_t>((2 * notional + shares) / (2 * static_cast<__int128>(shares)));
      out.trades.push_back(t);
      diag.merged_rows += j - i - 1;
    }
    i = j;
  }
  return out;
}

void write_trades_csv(std::ostream& out, std::span<const TradeRecord> trades, const SymbolTable& symbols) {
  out << kTradeCsvHeader << '\n';
  for (const auto& t : trades) {
    out << symbols.ticker(t.symbol_id) << ',' << format_day(t.day) << ',' << t.ts_ns << ','
        << (t.direction == Direction::Buy ? 'B' : 'S') << ',' << t.size << ',' << t.price4 << '\n';
  }
}

std::vector<TradeRecord> read_trades_csv(std::istream& in, SymbolTable& symbols, std::string_view source) {
  std::vector<TradeRecord> out;
  std::string line;
  std::size_t row = 0;
  if (!csv::next_record(in, line, row) || csv::trim(line) != kTradeCsvHeader) {
    throw ParseError(std::string(source), row, "expected header '" + std::string(kTradeCsvHeader) + "'");
  }
  while (csv::next_record(in, line, row)) {
    const auto f = csv::split(line);
    if (f.size() != 6) throw ParseError(std::string(source), row, "expected 6 fields");
    TradeRecord t;
    t.symbol_id = symbols.intern(f[0]);
    try {
      t.day = parse_day(f[1]);
    } catch (const DataError& e) {
      throw ParseError(std::string(source), row, e.what());
    }
    if (f[3] == "B") {
      t.direction = Direction::Buy;
    } else if (f[3] == "S") {
      t.direction = Direction::Sell;
    } else {
      throw ParseError(std::string(source), row, "dir must be B or S");
    }
    if (!csv::parse_int(f[2], t.ts_ns) || !csv::parse_int(f[4], t.size) || !csv::parse_int(f[5], t.price4)) {
      throw ParseError(std::string(source), row, "non-integer field");
    }
    if (t.size < 1 || t.price4 < 1) throw ParseError(std::string(source), row, "size and price must be positive");
    out.push_back(t);
  }
  return out;
}

std::vector<TradeRecord> read_trades_csv(const std::filesystem::path& path, SymbolTable& symbols) {
  auto in = open_input(path);
  return read_trades_csv(in, symbols, path.string());
}

void write_bars_csv(std::ostream& out, std::span<const DailyBar> bars, const SymbolTable& symbols) {
  out << kBarCsvHeader << '\n';
  for (const auto& b : bars) {
    out << format_day(b.day) << ',' << symbols.ticker(b.symbol_id) << ',' << csv::format_double(b.open) << ','
        << csv::format_double(b.close) << '\n';
  }
}

std::vector<DailyBar> read_bars_csv(std::istream& in, SymbolTable& symbols, std::string_view source) {
  std::vector<DailyBar> out;
  std::string line;
  std::size_t row = 0;
  if (!csv::next_record(in, line, row) || csv::trim(line) != kBarCsvHeader) {
    throw ParseError(std::string(source), row, "expected header '" + std::string(kBarCsvHeader) + "'");
  }
  while (csv::next_record(in, line, row)) {
    const auto f = csv::split(line);
    if (f.size() != 4) throw ParseError(std::string(source), row, "expected 4 fields");
    DailyBar b;
    try {
      b.day = parse_day(f[0]);
    } catch (const DataError& e) {
      throw ParseError(std::string(source), row, e.what());
    }
    b.symbol_id = symbols.intern(f[1]);
    if (!csv::parse_double(f[2], b.open) || !csv::parse_double(f[3], b.close) || b.open <= 0 || b.close <= 0) {
      throw ParseError(std::string(source), row, "open and close must be positive numbers");
    }
    out.push_back(b);
  }
  return out;
}

std::vector<DailyBar> read_bars_csv(const std::filesystem::path& path, SymbolTable& symbols) {
  auto in = open_input(path);
  return read_bars_csv(in, symbols, path.string());
}

ReturnPanel::ReturnPanel(std::vector<Day> days, std::size_t n_symbols)
    : days_(std::move(days)),
      n_symbols_(n_symbols),
      cells_(n_symbols_ * days_.size()),
      spy_oc_(days_.size(), 0.0),
      spy_close_(days_.size(), 0.0) {}

std::optional<std::size_t> ReturnPanel::day_index(Day d) const {
  const auto it = std::lower_bound(days_.begin(), days_.end(), d);
  if (it == days_.end() || *it != d) return std::nullopt;
  return static_cast<std::size_t>(it - days_.begin());
}

double realized_volatility(std::span<const TradeRecord> day_trades) {
  if (day_trades.empty()) return 0.0;
  std::array<double, kIntervalsPerDay> last{};
  std::array<bool, kIntervalsPerDay> seen{};
  for (const auto& t : day_trades) {
    auto k = (t.ts_ns - kSessionOpenNs) / kFiveMinutesNs;
    k = std::clamp<std::int64_t>(k, 0, kIntervalsPerDay - 1);
    last[static_cast<std::size_t>(k)] = static_cast<double>(t.price4);
    seen[static_cast<std::size_t>(k)] = true;
  }
  double prev = static_cast<double>(day_trades.front().price4);
  double sum = 0.0;
  for (int k = 0; k < kIntervalsPerDay; ++k) {
    if (!seen[static_cast<std::size_t>(k)]) continue;
    const double r = std::log(last[static_cast<std::size_t>(k)] / prev);
    sum += r * r;
    prev = last[static_cast<std::size_t>(k)];
  }
  return std::sqrt(sum);
}

double dollar_volume(std::span<const TradeRecord> day_trades) {
  __int128 notional = 0;
  for (const auto& t : day_trades) notional += static_cast<__int128>(t.size) * t.price4;
  return static_cast<double>(notional) * 1e-4;
}

ReturnPanel compute_returns(std::span<const DailyBar> bars, std::span<const DailyBar> spy_bars,
                            std::span<const TradeRecord> trades, std::size_t n_symbols) {
  std::vector<Day> days;
  for (const auto& b : bars) days.push_back(b.day);
  std::sort(days.begin(), days.end());
  days.erase(std::unique(days.begin(), days.end()), days.end());

  ReturnPanel panel(days, n_symbols);
  std::vector<bool> spy_seen(days.size(), false);
  for (const auto& b : spy_bars) {
    if (auto d = panel.day_index(b.day)) {
      panel.set_spy(*d, std::log(b.close / b.open), b.close);
      spy_seen[*d] = true;
    }
  }
  for (std::size_t d = 0; d < days.size(); ++d) {
    if (!spy_seen[d]) throw DataError("no SPY bar for " + format_day(days[d]));
  }

  for (const auto& b : bars) {
    if (static_cast<std::size_t>(b.symbol_id) >= n_symbols) throw DataError("bar symbol id out of range");
    const auto d = *panel.day_index(b.day);
    auto& cell = panel.at(b.symbol_id, d);
    if (cell.present) {
      throw DataError("duplicate bar for symbol id " + std::to_string(b.symbol_id) + " on " + format_day(b.day));
    }
    cell.present = true;
    cell.raw_oc = std::log(b.close / b.open);
    cell.excess = cell.raw_oc - panel.spy_oc(d);
  }

  // Group trades by (symbol, day); the stream may arrive in any order.
  std::vector<TradeRecord> sorted(trades.begin(), trades.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const TradeRecord& a, const TradeRecord& b) {
    if (a.symbol_id != b.symbol_id) return a.symbol_id < b.symbol_id;
    if (a.day != b.day) return a.day < b.day;
    return a.ts_ns < b.ts_ns;
  });
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].symbol_id == sorted[i].symbol_id && sorted[j].day == sorted[i].day) ++j;
    const auto d = panel.day_index(sorted[i].day);
    if (d && static_cast<std::size_t>(sorted[i].symbol_id) < n_symbols) {
      auto& cell = panel.at(sorted[i].symbol_id, *d);
      if (cell.present) {
        const std::span<const TradeRecord> day_trades(sorted.data() + i, j - i);
        cell.rv = realized_volatility(day_trades);
        cell.dvol = dollar_volume(day_trades);
      }
    }
    i = j;
  }
  return panel;
}

// ---------------------------------------------------------------------------

FactorTable::FactorTable(std::vector<FactorRow> rows) : rows_(std::move(rows)) {
  std::sort(rows_.begin(), rows_.end(), [](const FactorRow& a, const FactorRow& b) { return a.day < b.day; });
  for (std::size_t i = 1; i < rows_.size(); ++i) {
    if (rows_[i].day == rows_[i - 1].day) throw DataError("duplicate factor date " + format_day(rows_[i].day));
  }
}

bool FactorTable::contains(Day d) const {
  const auto it = std::lower_bound(rows_.begin(), rows_.end(), d,
                                   [](const FactorRow& r, Day x) { return r.day < x; });
  return it != rows_.end() && it->day == d && std::isfinite(it->mom);
}

const FactorRow& FactorTable::at(Day d) const {
  const auto it = std::lower_bound(rows_.begin(), rows_.end(), d,
                                   [](const FactorRow& r, Day x) { return r.day < x; });
  if (it == rows_.end() || it->day != d) throw DataError("no factor data for " + format_day(d));
  if (!std::isfinite(it->mom)) throw DataError("no momentum factor for " + format_day(d));
  return *it;
}

namespace {

enum FactorColumn { kMkt, kSmb, kHml, kRmw, kCma, kMom, kRf, kColumnCount };

std::optional<FactorColumn> column_of(std::string_view name) {
  const auto n = lower(name);
  if (n == "mkt-rf" || n == "mkt_rf" || n == "mkt") return kMkt;
  if (n == "smb") return kSmb;
  if (n == "hml") return kHml;
  if (n == "rmw") return kRmw;
  if (n == "cma") return kCma;
  if (n == "mom" || n == "umd" || n == "wml") return kMom;
  if (n == "rf") return kRf;
  return std::nullopt;
}

bool looks_like_date(std::string_view s) {
  return s.size() == 8 && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// Reads one French-format file into day -> column values (already divided by 100).
std::map<Day, std::array<double, kColumnCount>> read_french(std::istream& in, std::string_view source,
                                                             std::array<bool, kColumnCount>& present) {
  present.fill(false);
  std::map<Day, std::array<double, kColumnCount>> data;
  std::vector<std::optional<FactorColumn>> columns;
  std::string line;
  std::size_t row = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++row;
    const auto t = csv::trim(line);
    if (t.empty()) {
      if (!data.empty()) break;
      continue;
    }
    const auto f = csv::split(t);
    if (!have_header) {
      if (looks_like_date(f[0])) throw ParseError(std::string(source), row, "data row before header");
      std::vector<std::optional<FactorColumn>> cols;
      bool any = false;
      for (std::size_t i = 1; i < f.size(); ++i) {
        cols.push_back(column_of(f[i]));
        any |= cols.back().has_value();
      }
      if (any && f.size() >= 2) {
        columns = std::move(cols);
        have_header = true;
        for (const auto& c : columns) {
          if (c) present[*c] = true;
        }
      }
      continue;
    }
    if (!looks_like_date(f[0])) break;  // trailing section or copyright line
    if (f.size() != columns.size() + 1) {
      throw ParseError(std::string(source), row, "expected " + std::to_string(columns.size() + 1) + " fields");
    }
    const Day day = parse_day(f[0]);
    std::array<double, kColumnCount> values;
    values.fill(std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (!columns[i]) continue;
      double v = 0.0;
      if (!csv::parse_double(f[i + 1], v)) throw ParseError(std::string(source), row, "non-numeric factor value");
      values[*columns[i]] = v / 100.0;
    }
    if (!data.emplace(day, values).second) {
      throw ParseError(std::string(source), row, "duplicate date " + format_day(day));
    }
  }
  if (!have_header) throw ParseError(std::string(source), row, "no header line found");
  return data;
}

}  // namespace

FactorTable parse_factors(std::istream& main, std::istream* momentum, std::string_view source) {
  std::array<bool, kColumnCount> present{};
  auto data = read_french(main, source, present);
  for (auto c : {kMkt, kSmb, kHml, kRmw, kCma, kRf}) {
    if (!present[c]) throw DataError(std::string(source) + ": missing a required factor column");
  }
  if (momentum != nullptr) {
    std::array<bool, kColumnCount> mom_present{};
    const auto mom = read_french(*momentum, std::string(source) + " (momentum)", mom_present);
    if (!mom_present[kMom]) throw DataError("momentum file has no Mom column");
    for (auto& [day, values] : data) {
      const auto it = mom.find(day);
      if (it != mom.end()) values[kMom] = it->second[kMom];
    }
  }
  std::vector<FactorRow> rows;
  rows.reserve(data.size());
  for (const auto& [day, v] : data) {
    rows.push_back({day, v[kMkt], v[kSmb], v[kHml], v[kRmw], v[kCma], v[kMom], v[kRf]});
  }
  return FactorTable(std::move(rows));
}

FactorTable parse_factors(const std::filesystem::path& path, const std::optional<std::filesystem::path>& momentum_path) {
  auto in = open_input(path);
  if (momentum_path) {
    auto mom = open_input(*momentum_path);
    return parse_factors(in, &mom, path.string());
  }
  return parse_factors(in, nullptr, path.string());
}

void write_factors_csv(std::ostream& out, const FactorTable& factors) {
  out << ",Mkt-RF,SMB,HML,RMW,CMA,RF,Mom\n";
  for (const auto& r : factors.rows()) {
    out << r.day.ymd;
    for (double v : {r.mkt, r.smb, r.hml, r.rmw, r.cma, r.rf, r.mom}) out << ',' << csv::format_double(v * 100.0);
    out << '\n';
  }
}

}  // namespace cooc
