#include "cooc/cooccurrence.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <thread>

#include "cooc/error.hpp"

namespace cooc {

std::size_t DayTrades::total() const {
  std::size_t n = 0;
  for (const auto& v : by_symbol) n += v.size();
  return n;
}

std::vector<DayTrades> group_by_day(std::span<const TradeRecord> trades, std::size_t n_symbols) {
  std::map<Day, DayTrades> days;
  for (const auto& t : trades) {
    if (static_cast<std::size_t>(t.symbol_id) >= n_symbols) throw DataError("trade symbol id out of range");
    auto& d = days[t.day];
    if (d.by_symbol.empty()) {
      d.day = t.day;
      d.by_symbol.resize(n_symbols);
    }
    d.by_symbol[static_cast<std::size_t>(t.symbol_id)].push_back(t);
  }
  std::vector<DayTrades> out;
  out.reserve(days.size());
  for (auto& [day, d] : days) {
    for (auto& v : d.by_symbol) {
      std::stable_sort(v.begin(), v.end(), [](const TradeRecord& a, const TradeRecord& b) { return a.ts_ns < b.ts_ns; });
    }
    out.push_back(std::move(d));
  }
  return out;
}

const CountRow* DailyLabelCounts::find(SymbolId s, std::size_t window) const {
  const auto it = std::lower_bound(rows.begin(), rows.end(), std::pair{s, window}, [](const CountRow& r, const auto& key) {
    return std::pair{r.symbol_id, r.window} < key;
  });
  if (it == rows.end() || it->symbol_id != s || it->window != window) return nullptr;
  return &*it;
}

namespace {

bool flag(std::span<const std::uint8_t> mask, std::size_t i) { return i < mask.size() && mask[i] != 0; }

void validate(const DayTrades& day, std::int64_t delta_ns) {
  if (delta_ns < 1) throw DataError("delta must be at least 1 ns");
  for (const auto& v : day.by_symbol) {
    for (std::size_t k = 1; k < v.size(); ++k) {
      if (v[k].ts_ns <= v[k - 1].ts_ns) {
        throw DataError(format_day(day.day) + ": trades of symbol id " + std::to_string(v[k].symbol_id) +
                        " are not strictly increasing in time");
      }
    }
  }
}

constexpr TradeClass make_class(bool same, bool cross) {
  if (same) return cross ? TradeClass::NisB : TradeClass::NisS;
  return cross ? TradeClass::NisC : TradeClass::Iso;
}

// Time-merged views shared across a delta sweep.
struct MergedDay {
  struct Visit {
    std::int64_t ts_ns;
    SymbolId symbol;
    std::uint32_t index;  // position within the symbol's list
  };
  std::vector<std::int64_t> market_ts;               // all market-index trades, sorted
  std::vector<Visit> visits;                          // universe trades, sorted by (ts, symbol)
  std::vector<std::vector<std::int64_t>> symbol_ts;  // per symbol, sorted
};

MergedDay merge_day(const DayTrades& day, std::span<const std::uint8_t> market_mask,
                    std::span<const std::uint8_t> universe_mask) {
  MergedDay m;
  m.symbol_ts.resize(day.by_symbol.size());
  for (std::size_t s = 0; s < day.by_symbol.size(); ++s) {
    const auto& trades = day.by_symbol[s];
    const bool in_market = flag(market_mask, s);
    const bool in_universe = flag(universe_mask, s);
    if (!in_market && !in_universe) continue;
    auto& ts = m.symbol_ts[s];
    ts.reserve(trades.size());
    for (std::size_t k = 0; k < trades.size(); ++k) {
      ts.push_back(trades[k].ts_ns);
      if (in_market) m.market_ts.push_back(trades[k].ts_ns);
      if (in_universe) m.visits.push_back({trades[k].ts_ns, static_cast<SymbolId>(s), static_cast<std::uint32_t>(k)});
    }
  }
  std::sort(m.market_ts.begin(), m.market_ts.end());
  std::sort(m.visits.begin(), m.visits.end(), [](const MergedDay::Visit& a, const MergedDay::Visit& b) {
    return a.ts_ns != b.ts_ns ? a.ts_ns < b.ts_ns : a.symbol < b.symbol;
  });
  return m;
}

// Window populations over (t - delta, t + delta) are maintained with two pointers per
// sorted array; the visit order is non-decreasing in t so every pointer only advances.
// A partition starts its pointers by binary search, which makes the result independent
// of where the partition seams fall.
void label_range(const MergedDay& m, std::int64_t delta, std::span<const std::uint8_t> market_mask,
                 std::size_t begin, std::size_t end, DayLabels& labels) {
  if (begin >= end) return;
  const auto& M = m.market_ts;
  const auto start_t = m.visits[begin].ts_ns;
  const auto first_inside = [delta](const std::vector<std::int64_t>& a, std::int64_t t) {
    return static_cast<std::size_t>(
        std::upper_bound(a.begin(), a.end(), t, [delta](std::int64_t x, std::int64_t e) { return x - e < delta; }) -
        a.begin());
  };
  std::size_t lo = first_inside(M, start_t);
  std::size_t hi = lo;
  struct Own {
    std::size_t lo = 0, hi = 0;
    bool init = false;
  };
  std::vector<Own> own(m.symbol_ts.size());

  for (std::size_t v = begin; v < end; ++v) {
    const auto& visit = m.visits[v];
    const auto t = visit.ts_ns;
    while (lo < M.size() && t - M[lo] >= delta) ++lo;
    if (hi < lo) hi = lo;
    while (hi < M.size() && M[hi] - t < delta) ++hi;

    const auto& S = m.symbol_ts[static_cast<std::size_t>(visit.symbol)];
    auto& o = own[static_cast<std::size_t>(visit.symbol)];
    if (!o.init) {
      o.lo = o.hi = first_inside(S, t);
      o.init = true;
    }
    while (o.lo < S.size() && t - S[o.lo] >= delta) ++o.lo;
    if (o.hi < o.lo) o.hi = o.lo;
    while (o.hi < S.size() && S[o.hi] - t < delta) ++o.hi;

    const auto own_in_window = static_cast<std::int64_t>(o.hi - o.lo);  // includes the trade itself
    const auto market_in_window = static_cast<std::int64_t>(hi - lo);
    const bool same = own_in_window > 1;
    const bool cross =
        market_in_window - (flag(market_mask, static_cast<std::size_t>(visit.symbol)) ? own_in_window : 0) > 0;
    labels.by_symbol[static_cast<std::size_t>(visit.symbol)][visit.index] = make_class(same, cross);
  }
}

DayLabels label_merged(const DayTrades& day, const MergedDay& m, std::int64_t delta,
                       std::span<const std::uint8_t> market_mask, std::span<const std::uint8_t> universe_mask,
                       unsigned partitions) {
  DayLabels labels;
  labels.day = day.day;
  labels.by_symbol.resize(day.by_symbol.size());
  for (std::size_t s = 0; s < day.by_symbol.size(); ++s) {
    if (flag(universe_mask, s)) labels.by_symbol[s].assign(day.by_symbol[s].size(), TradeClass::Iso);
  }
  const std::size_t n = m.visits.size();
  partitions = std::max(1u, std::min<unsigned>(partitions, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (partitions == 1) {
    label_range(m, delta, market_mask, 0, n, labels);
    return labels;
  }
  // Each partition writes disjoint label slots.
  std::vector<std::jthread> workers;
  for (unsigned p = 0; p < partitions; ++p) {
    const std::size_t b = n * p / partitions;
    const std::size_t e = n * (p + 1) / partitions;
    workers.emplace_back([&, b, e] { label_range(m, delta, market_mask, b, e, labels); });
  }
  return labels;
}

}  // namespace

DailyLabelCounts aggregate_counts(const DayTrades& day, const DayLabels& labels,
                                  std::span<const std::uint8_t> universe_mask, std::span<const TimeWindow> windows) {
  DailyLabelCounts out;
  out.day = day.day;
  out.windows.assign(windows.begin(), windows.end());
  for (std::size_t s = 0; s < day.by_symbol.size(); ++s) {
    if (!flag(universe_mask, s)) continue;
    const auto first = out.rows.size();
    for (std::size_t w = 0; w < windows.size(); ++w) {
      out.rows.push_back({static_cast<SymbolId>(s), day.day, w, {}});
    }
    const auto& trades = day.by_symbol[s];
    const auto& cls = labels.by_symbol[s];
    for (std::size_t k = 0; k < trades.size(); ++k) {
      const auto& t = trades[k];
      CoiType own_type = CoiType::Iso;
      switch (cls[k]) {
        case TradeClass::Iso: own_type = CoiType::Iso; break;
        case TradeClass::NisS: own_type = CoiType::NisS; break;
        case TradeClass::NisC: own_type = CoiType::NisC; break;
        case TradeClass::NisB: own_type = CoiType::NisB; break;
      }
      for (std::size_t w = 0; w < windows.size(); ++w) {
        if (!windows[w].contains(t.ts_ns)) continue;
        auto& c = out.rows[first + w].counts;
        c[CoiType::All].add(t.direction, t.size);
        c[own_type].add(t.direction, t.size);
        if (own_type != CoiType::Iso) c[CoiType::Nis].add(t.direction, t.size);
      }
    }
  }
  return out;
}

DayClassification classify_day(const DayTrades& day, const NeighbourhoodParams& params,
                               std::span<const std::uint8_t> universe_mask, const ClassifyOptions& options) {
  validate(day, params.delta_ns);
  const auto merged = merge_day(day, params.market_mask, universe_mask);
  DayClassification out;
  out.labels = label_merged(day, merged, params.delta_ns, params.market_mask, universe_mask, options.partitions);
  out.counts = aggregate_counts(day, out.labels, universe_mask, options.windows);
  return out;
}

DayClassification classify_day_bruteforce(const DayTrades& day, const NeighbourhoodParams& params,
                                          std::span<const std::uint8_t> universe_mask,
                                          const ClassifyOptions& options) {
  if (day.total() > kBruteForceTradeLimit) {
    throw RefusalError("brute-force classification refused: " + std::to_string(day.total()) + " trades exceeds " +
                       std::to_string(kBruteForceTradeLimit));
  }
  validate(day, params.delta_ns);
  const auto delta = params.delta_ns;
  const auto n_symbols = day.by_symbol.size();
  DayLabels labels;
  labels.day = day.day;
  labels.by_symbol.resize(n_symbols);
  for (std::size_t i = 0; i < n_symbols; ++i) {
    if (!flag(universe_mask, i)) continue;
    const auto& own = day.by_symbol[i];
    auto& out = labels.by_symbol[i];
    out.reserve(own.size());
    for (std::size_t a = 0; a < own.size(); ++a) {
      const auto t = own[a].ts_ns;
      bool same = false;  // B(x_a) ∩ X_i non-empty
      for (std::size_t b = 0; b < own.size() && !same; ++b) {
        same = b != a && std::abs(own[b].ts_ns - t) < delta;
      }
      bool cross = false;  // B(x_a) ∩ M_{-i} non-empty
      for (std::size_t j = 0; j < n_symbols && !cross; ++j) {
        if (j == i || !flag(params.market_mask, j)) continue;
        for (const auto& x : day.by_symbol[j]) {
          if (std::abs(x.ts_ns - t) < delta) {
            cross = true;
            break;
          }
        }
      }
      out.push_back(make_class(same, cross));
    }
  }
  DayClassification result;
  result.labels = std::move(labels);
  result.counts = aggregate_counts(day, result.labels, universe_mask, options.windows);
  return result;
}

std::vector<DayClassification> sweep_delta(const DayTrades& day, std::span<const std::int64_t> deltas,
                                           std::span<const std::uint8_t> market_mask,
                                           std::span<const std::uint8_t> universe_mask,
                                           const ClassifyOptions& options) {
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    if (deltas[k] < 1) throw DataError("delta must be at least 1 ns");
    if (k > 0 && deltas[k] <= deltas[k - 1]) throw DataError("deltas must be strictly ascending");
  }
  validate(day, deltas.empty() ? 1 : deltas.front());
  const auto merged = merge_day(day, market_mask, universe_mask);
  std::vector<DayClassification> out;
  out.reserve(deltas.size());
  for (const auto delta : deltas) {
    DayClassification c;
    c.labels = label_merged(day, merged, delta, market_mask, universe_mask, options.partitions);
    c.counts = aggregate_counts(day, c.labels, universe_mask, options.windows);
    out.push_back(std::move(c));
  }
  return out;
}

IntervalCounts count_intervals(const DayTrades& day, std::int64_t interval_ns) {
  if (interval_ns < 1) throw DataError("interval must be positive");
  const auto n_intervals = static_cast<std::size_t>((kSessionCloseNs - kSessionOpenNs + interval_ns - 1) / interval_ns);
  IntervalCounts out;
  out.day = day.day;
  out.interval_ns = interval_ns;
  out.by_symbol.assign(day.by_symbol.size(), std::vector<std::int64_t>(n_intervals, 0));
  for (std::size_t s = 0; s < day.by_symbol.size(); ++s) {
    for (const auto& t : day.by_symbol[s]) {
      if (t.ts_ns < kSessionOpenNs || t.ts_ns > kSessionCloseNs) continue;
      auto k = static_cast<std::size_t>((t.ts_ns - kSessionOpenNs) / interval_ns);
      k = std::min(k, n_intervals - 1);
      ++out.by_symbol[s][k];
    }
  }
  return out;
}

}  // namespace cooc
