#include "cooc/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <istream>

#include "cooc/csv.hpp"
#include "cooc/error.hpp"

namespace cooc {

SignalDirection default_direction(CoiType type) {
  return (type == CoiType::Iso || type == CoiType::NisS) ? SignalDirection::Momentum : SignalDirection::Reversal;
}

std::string_view direction_name(SignalDirection d) {
  return d == SignalDirection::Momentum ? "momentum" : "reversal";
}

SignalDirection parse_direction(std::string_view text) {
  if (text == "momentum") return SignalDirection::Momentum;
  if (text == "reversal") return SignalDirection::Reversal;
  throw UsageError("unknown signal direction '" + std::string(text) + "' (momentum|reversal)");
}

BucketAssignment quantile_sort(std::span<const SignalObs> signals, int n_buckets) {
  if (n_buckets < 2) throw UsageError("n_buckets must be at least 2");
  const std::size_t n = signals.size();
  if (n < static_cast<std::size_t>(n_buckets)) {
    throw DataError("quantile sort needs at least " + std::to_string(n_buckets) + " stocks, got " +
                    std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (signals[x].value != signals[y].value) return signals[x].value < signals[y].value;
    return signals[x].symbol_id < signals[y].symbol_id;
  });
  BucketAssignment out;
  out.buckets.reserve(n);
  out.degenerate = signals[order.front()].value == signals[order.back()].value;
  const auto nb = static_cast<std::size_t>(n_buckets);
  // Bucket of the rank midpoint (r + 1/2) / N, evaluated from whichever end is nearer so
  // that reversing the order mirrors the buckets exactly.
  const auto lower = [&](std::size_t r) { return static_cast<int>((2 * r + 1) * nb / (2 * n)); };
  for (std::size_t r = 0; r < n; ++r) {
    const int b = out.degenerate ? n_buckets / 2 : (2 * r + 1 <= n ? lower(r) : n_buckets - 1 - lower(n - 1 - r));
    out.buckets.emplace_back(signals[order[r]].symbol_id, b);
  }
  std::sort(out.buckets.begin(), out.buckets.end());
  return out;
}

DoubleSort double_sort(std::span<const DualSignalObs> signals, int n_buckets) {
  std::vector<SignalObs> a, b;
  a.reserve(signals.size());
  b.reserve(signals.size());
  for (const auto& s : signals) {
    a.push_back({s.symbol_id, s.a});
    b.push_back({s.symbol_id, s.b});
  }
  const auto qa = quantile_sort(a, n_buckets);
  const auto qb = quantile_sort(b, n_buckets);
  DoubleSort out;
  out.n_buckets = n_buckets;
  out.cells.resize(static_cast<std::size_t>(n_buckets * n_buckets));
  out.degenerate = qa.degenerate || qb.degenerate;
  // Both assignments are sorted by symbol id over the same stocks.
  for (std::size_t i = 0; i < qa.buckets.size(); ++i) {
    out.cells[static_cast<std::size_t>(qa.buckets[i].second * n_buckets + qb.buckets[i].second)].push_back(
        qa.buckets[i].first);
  }
  return out;
}

std::vector<double> PortfolioSeries::values() const {
  std::vector<double> v;
  v.reserve(returns.size());
  for (const auto& r : returns) v.push_back(r.value);
  return v;
}

namespace {

struct DaySlice {
  std::vector<SignalPoint> points;  // eligible only
};

// Eligible (signal at t-1, return at t) cross-section for each day index t >= 1.
template <typename Fn>
void for_each_trading_day(std::span<const SignalDay> signals, const ReturnPanel& returns, Fn&& fn) {
  std::map<Day, const SignalDay*> by_day;
  for (const auto& s : signals) {
    if (!by_day.emplace(s.day, &s).second) throw DataError("duplicate signal day " + format_day(s.day));
  }
  const auto& days = returns.days();
  for (std::size_t d = 1; d < days.size(); ++d) {
    std::vector<SignalPoint> eligible;
    if (const auto it = by_day.find(days[d - 1]); it != by_day.end()) {
      for (const auto& p : it->second->points) {
        if (p.symbol_id < 0 || static_cast<std::size_t>(p.symbol_id) >= returns.n_symbols()) continue;
        if (returns.at(p.symbol_id, d).present) eligible.push_back(p);
      }
      std::sort(eligible.begin(), eligible.end(),
                [](const SignalPoint& x, const SignalPoint& y) { return x.symbol_id < y.symbol_id; });
    }
    fn(d, eligible);
  }
}

int favourable(SignalDirection dir, int n_buckets) { return dir == SignalDirection::Momentum ? n_buckets - 1 : 0; }
int unfavourable(SignalDirection dir, int n_buckets) { return n_buckets - 1 - favourable(dir, n_buckets); }

double mean_excess(const ReturnPanel& returns, std::size_t d, std::span<const SymbolId> members) {
  double s = 0.0;
  for (auto m : members) s += returns.at(m, d).excess;
  return s / static_cast<double>(members.size());
}

}  // namespace

PortfolioSeries build_long_short(std::span<const SignalDay> signals, const ReturnPanel& returns, const SortSpec& spec) {
  if (spec.n_buckets < 2) throw UsageError("n_buckets must be at least 2");
  PortfolioSeries out;
  out.label = spec.label;
  const int nb = spec.n_buckets;
  for_each_trading_day(signals, returns, [&](std::size_t d, const std::vector<SignalPoint>& pts) {
    const Day day = returns.days()[d];
    std::vector<SymbolId> long_leg, short_leg;
    bool ok = pts.size() >= static_cast<std::size_t>(nb);
    if (ok && !spec.secondary) {
      std::vector<SignalObs> obs;
      obs.reserve(pts.size());
      for (const auto& p : pts) obs.push_back({p.symbol_id, p.a});
      const auto q = quantile_sort(obs, nb);
      ok = !q.degenerate;
      const int lb = favourable(spec.primary, nb), sb = unfavourable(spec.primary, nb);
      for (const auto& [s, b] : q.buckets) {
        if (b == lb) long_leg.push_back(s);
        if (b == sb) short_leg.push_back(s);
      }
    } else if (ok) {
      std::vector<DualSignalObs> obs;
      obs.reserve(pts.size());
      for (const auto& p : pts) obs.push_back({p.symbol_id, p.a, p.b});
      const auto ds = double_sort(obs, nb);
      ok = !ds.degenerate;
      long_leg = ds.cell(favourable(spec.primary, nb), favourable(*spec.secondary, nb));
      short_leg = ds.cell(unfavourable(spec.primary, nb), unfavourable(*spec.secondary, nb));
    }
    if (!ok || long_leg.empty() || short_leg.empty()) {
      if (spec.empty_leg == EmptyLegPolicy::ZeroAndFlag) {
        out.returns.push_back({day, 0.0});
        out.flagged.push_back(day);
      }
      return;
    }
    PortfolioDay pd{day, {}};
    const double wl = 1.0 / static_cast<double>(long_leg.size());
    const double ws = -1.0 / static_cast<double>(short_leg.size());
    for (auto s : long_leg) pd.holdings.push_back({s, wl});
    for (auto s : short_leg) pd.holdings.push_back({s, ws});
    std::sort(pd.holdings.begin(), pd.holdings.end(),
              [](const Holding& x, const Holding& y) { return x.symbol_id < y.symbol_id; });
    out.returns.push_back({day, mean_excess(returns, d, long_leg) - mean_excess(returns, d, short_leg)});
    out.constituents.push_back(std::move(pd));
  });
  return out;
}

std::vector<PortfolioSeries> bucket_portfolios(std::span<const SignalDay> signals, const ReturnPanel& returns,
                                               const SortSpec& spec) {
  const int nb = spec.n_buckets;
  if (nb < 2) throw UsageError("n_buckets must be at least 2");
  const bool dual = spec.secondary.has_value();
  std::vector<PortfolioSeries> out(static_cast<std::size_t>(dual ? nb * nb : nb));
  for (int a = 0; a < nb; ++a) {
    if (!dual) {
      out[static_cast<std::size_t>(a)].label = spec.label + "_q" + std::to_string(a + 1);
      continue;
    }
    for (int b = 0; b < nb; ++b) {
      out[static_cast<std::size_t>(a * nb + b)].label =
          spec.label + "_" + std::to_string(a + 1) + "_" + std::to_string(b + 1);
    }
  }
  for_each_trading_day(signals, returns, [&](std::size_t d, const std::vector<SignalPoint>& pts) {
    if (pts.size() < static_cast<std::size_t>(nb)) return;
    std::vector<std::vector<SymbolId>> members(out.size());
    if (!dual) {
      std::vector<SignalObs> obs;
      for (const auto& p : pts) obs.push_back({p.symbol_id, p.a});
      const auto q = quantile_sort(obs, nb);
      if (q.degenerate) return;
      for (const auto& [s, b] : q.buckets) members[static_cast<std::size_t>(b)].push_back(s);
    } else {
      std::vector<DualSignalObs> obs;
      for (const auto& p : pts) obs.push_back({p.symbol_id, p.a, p.b});
      auto ds = double_sort(obs, nb);
      if (ds.degenerate) return;
      members = std::move(ds.cells);
    }
    const Day day = returns.days()[d];
    for (std::size_t k = 0; k < out.size(); ++k) {
      if (members[k].empty()) continue;
      out[k].returns.push_back({day, mean_excess(returns, d, members[k])});
      PortfolioDay pd{day, {}};
      const double w = 1.0 / static_cast<double>(members[k].size());
      for (auto s : members[k]) pd.holdings.push_back({s, w});
      out[k].constituents.push_back(std::move(pd));
    }
  });
  return out;
}

double sharpe(std::span<const double> daily, double rf_daily) {
  const std::size_t n = daily.size();
  if (n < 2) throw NumericalError("Sharpe ratio needs at least two observations");
  const double mean = std::accumulate(daily.begin(), daily.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  bool spread = false;
  for (double v : daily) {
    ss += (v - mean) * (v - mean);
    spread = spread || v != daily[0];
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!spread || !(sd > 0.0)) throw NumericalError("Sharpe ratio undefined: zero standard deviation");
  return (mean - rf_daily) / sd * std::sqrt(252.0);
}

double sharpe(const PortfolioSeries& series, double rf_daily) { return sharpe(series.values(), rf_daily); }

PortfolioSeries apply_costs(const PortfolioSeries& series, double round_trip_bps) {
  if (!(round_trip_bps >= 0.0)) throw DataError("transaction cost must be non-negative");
  PortfolioSeries out = series;
  const double c = round_trip_bps * 1e-4;
  for (auto& r : out.returns) r.value -= c;
  return out;
}

namespace {

std::vector<SignalDay> group_signals(std::map<Day, std::vector<SignalPoint>>&& by_day) {
  std::vector<SignalDay> out;
  out.reserve(by_day.size());
  for (auto& [day, pts] : by_day) {
    std::sort(pts.begin(), pts.end(), [](const SignalPoint& x, const SignalPoint& y) { return x.symbol_id < y.symbol_id; });
    for (std::size_t i = 1; i < pts.size(); ++i) {
      if (pts[i].symbol_id == pts[i - 1].symbol_id) {
        throw DataError("duplicate signal for symbol id " + std::to_string(pts[i].symbol_id) + " on " +
                        format_day(day));
      }
    }
    out.push_back({day, std::move(pts)});
  }
  return out;
}

}  // namespace

std::vector<SignalDay> coi_signals(std::span<const CoiVector> panel, CoiType type) {
  std::map<Day, std::vector<SignalPoint>> by_day;
  for (const auto& v : panel) by_day[v.day].push_back({v.symbol_id, v[type], 0.0});
  return group_signals(std::move(by_day));
}

std::vector<SignalDay> coi_signals(std::span<const CoiVector> panel, CoiType a, CoiType b) {
  std::map<Day, std::vector<SignalPoint>> by_day;
  for (const auto& v : panel) by_day[v.day].push_back({v.symbol_id, v[a], v[b]});
  return group_signals(std::move(by_day));
}

std::vector<SignalDay> return_signals(const ReturnPanel& returns) {
  std::vector<SignalDay> out;
  for (std::size_t d = 0; d < returns.days().size(); ++d) {
    SignalDay sd{returns.days()[d], {}};
    for (std::size_t s = 0; s < returns.n_symbols(); ++s) {
      const auto& c = returns.at(static_cast<SymbolId>(s), d);
      if (c.present) sd.points.push_back({static_cast<SymbolId>(s), c.excess, 0.0});
    }
    out.push_back(std::move(sd));
  }
  return out;
}

std::vector<DatedValue> build_umd(const ReturnPanel& returns) {
  std::vector<DatedValue> out;
  const auto& days = returns.days();
  for (std::size_t d = 1; d < days.size(); ++d) {
    std::vector<std::pair<double, SymbolId>> prior;
    for (std::size_t s = 0; s < returns.n_symbols(); ++s) {
      const auto id = static_cast<SymbolId>(s);
      if (returns.at(id, d - 1).present && returns.at(id, d).present) prior.emplace_back(returns.at(id, d - 1).excess, id);
    }
    if (prior.size() < 2) continue;
    std::vector<double> sorted;
    for (const auto& p : prior) sorted.push_back(p.first);
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    const double median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    double top = 0.0, bottom = 0.0;
    std::size_t nt = 0, nbot = 0;
    for (const auto& [r, id] : prior) {
      if (r > median) {
        top += returns.at(id, d).excess;
        ++nt;
      } else {
        bottom += returns.at(id, d).excess;
        ++nbot;
      }
    }
    if (nt == 0 || nbot == 0) continue;
    out.push_back({days[d], top / static_cast<double>(nt) - bottom / static_cast<double>(nbot)});
  }
  return out;
}

Benchmarks build_benchmarks(std::span<const CoiVector> panel, const ReturnPanel& returns, int n_buckets) {
  Benchmarks out;
  const auto all = coi_signals(panel, CoiType::All);
  out.series.push_back(build_long_short(all, returns, {"bench_all_ls", n_buckets, SignalDirection::Reversal, std::nullopt, EmptyLegPolicy::ZeroAndFlag}));
  out.series.push_back(
      build_long_short(return_signals(returns), returns, {"bench_ret_mom_ls", n_buckets, SignalDirection::Momentum, std::nullopt, EmptyLegPolicy::ZeroAndFlag}));

  const auto& days = returns.days();
  PortfolioSeries ew;
  ew.label = "bench_equal_weight";
  for (std::size_t d = 0; d < days.size(); ++d) {
    std::vector<SymbolId> present;
    for (std::size_t s = 0; s < returns.n_symbols(); ++s) {
      if (returns.at(static_cast<SymbolId>(s), d).present) present.push_back(static_cast<SymbolId>(s));
    }
    if (present.empty()) continue;
    ew.returns.push_back({days[d], mean_excess(returns, d, present)});
    PortfolioDay pd{days[d], {}};
    for (auto s : present) pd.holdings.push_back({s, 1.0 / static_cast<double>(present.size())});
    ew.constituents.push_back(std::move(pd));
  }
  out.series.push_back(std::move(ew));

  bool has_spy = !days.empty();
  for (std::size_t d = 0; d < days.size(); ++d) has_spy = has_spy && returns.spy_close(d) > 0.0;
  if (has_spy) {
    PortfolioSeries oc, cc;
    oc.label = "bench_spy_oc";
    cc.label = "bench_spy_cc";
    for (std::size_t d = 0; d < days.size(); ++d) {
      oc.returns.push_back({days[d], returns.spy_oc(d)});
      if (d > 0) cc.returns.push_back({days[d], std::log(returns.spy_close(d) / returns.spy_close(d - 1))});
    }
    out.series.push_back(std::move(oc));
    out.series.push_back(std::move(cc));
  }
  out.umd = build_umd(returns);
  return out;
}

std::vector<SeriesSummary> summarize(std::span<const PortfolioSeries> series, double rf_daily) {
  std::vector<SeriesSummary> out;
  out.reserve(series.size());
  for (const auto& s : series) {
    SeriesSummary sum;
    sum.label = s.label;
    sum.days = s.returns.size();
    double run = 0.0;
    for (const auto& r : s.returns) {
      run += r.value;
      sum.cumulative.push_back({r.day, run});
    }
    if (sum.days > 0) sum.annualized = run / static_cast<double>(sum.days) * 252.0;
    if (sum.days >= 2) {
      try {
        sum.sharpe_ratio = sharpe(s, rf_daily);
      } catch (const NumericalError&) {
      }
    }
    out.push_back(std::move(sum));
  }
  return out;
}

void write_portfolios_csv(std::ostream& out, std::span<const PortfolioSeries> series) {
  out << kPortfolioCsvHeader << '\n';
  for (const auto& s : series) {
    for (const auto& r : s.returns) out << s.label << ',' << format_day(r.day) << ',' << csv::format_double(r.value) << '\n';
  }
}

void write_constituents_csv(std::ostream& out, std::span<const PortfolioSeries> series, const SymbolTable& symbols) {
  out << kConstituentsCsvHeader << '\n';
  for (const auto& s : series) {
    for (const auto& pd : s.constituents) {
      const auto day = format_day(pd.day);
      for (const auto& h : pd.holdings) {
        out << s.label << ',' << day << ',' << symbols.ticker(h.symbol_id) << ',' << csv::format_double(h.weight)
            << '\n';
      }
    }
  }
}

void write_cumulative_csv(std::ostream& out, std::span<const SeriesSummary> summaries) {
  out << "label,day,cumulative\n";
  for (const auto& s : summaries) {
    for (const auto& c : s.cumulative) out << s.label << ',' << format_day(c.day) << ',' << csv::format_double(c.value) << '\n';
  }
}

namespace {

template <typename Row, typename Fill>
std::vector<Row> read_labelled(std::istream& in, const std::string& source, std::string_view header, std::size_t fields,
                               Fill&& fill) {
  std::vector<Row> out;
  std::string line;
  std::size_t row = 0;
  if (!csv::next_record(in, line, row) || csv::trim(line) != header) {
    throw ParseError(source, row, "expected header '" + std::string(header) + "'");
  }
  while (csv::next_record(in, line, row)) {
    const auto f = csv::split(line);
    if (f.size() != fields) throw ParseError(source, row, "expected " + std::to_string(fields) + " fields");
    Row r;
    r.label = std::string(f[0]);
    try {
      r.day = parse_day(f[1]);
    } catch (const DataError& e) {
      throw ParseError(source, row, e.what());
    }
    if (!fill(r, f)) throw ParseError(source, row, "malformed numeric field");
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

std::vector<PortfolioCsvRow> read_portfolios_csv(std::istream& in, const std::string& source) {
  return read_labelled<PortfolioCsvRow>(in, source, kPortfolioCsvHeader, 3, [](PortfolioCsvRow& r, const auto& f) {
    return csv::parse_double(f[2], r.value);
  });
}

std::vector<ConstituentCsvRow> read_constituents_csv(std::istream& in, const std::string& source) {
  return read_labelled<ConstituentCsvRow>(in, source, kConstituentsCsvHeader, 4,
                                          [](ConstituentCsvRow& r, const auto& f) {
                                            r.symbol = std::string(f[2]);
                                            return !r.symbol.empty() && csv::parse_double(f[3], r.weight);
                                          });
}

}  // namespace cooc
