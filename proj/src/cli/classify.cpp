#include <map>
#include <ostream>

#include "cooc/coi.hpp"
#include "cooc/cooccurrence.hpp"
#include "cooc/csv.hpp"
#include "cooc/error.hpp"
#include "cooc/null_model.hpp"
#include "cooc/parallel.hpp"
#include "io.hpp"

namespace cooc::cli {

using nlohmann::json;

namespace {

struct CountsKey {
  SymbolId symbol;
  Day day;
  bool operator<(const CountsKey& o) const { return std::pair{symbol, day} < std::pair{o.symbol, o.day}; }
};

// Full rows of a counts file: (symbol, day, window name) -> counts.
struct CountsFile {
  std::vector<std::tuple<SymbolId, Day, std::string, LabelCounts>> rows;
};

CountsFile read_counts(const fs::path& path, SymbolTable& symbols) {
  io::require(path, "classify");
  std::ifstream in(path);
  std::string line;
  std::size_t row = 0;
  const auto source = path.string();
  if (!csv::next_record(in, line, row) || csv::trim(line) != io::kCountsHeader) {
    throw ParseError(source, row, "expected header '" + std::string(io::kCountsHeader) + "'");
  }
  CountsFile out;
  std::map<std::tuple<SymbolId, Day, std::string>, std::size_t> index;
  while (csv::next_record(in, line, row)) {
    const auto f = csv::split(line);
    if (f.size() != 8) throw ParseError(source, row, "expected 8 fields");
    try {
      const auto id = symbols.intern(f[0]);
      const auto day = parse_day(f[1]);
      const auto type = parse_type(f[3]);
      std::int64_t v[4];
      for (int k = 0; k < 4; ++k) {
        if (!csv::parse_int(f[4 + k], v[k]) || v[k] < 0) throw ParseError(source, row, "bad count");
      }
      auto key = std::tuple{id, day, std::string(f[2])};
      auto [it, fresh] = index.emplace(key, out.rows.size());
      if (fresh) out.rows.emplace_back(id, day, std::string(f[2]), LabelCounts{});
      auto& sc = std::get<3>(out.rows[it->second])[type];
      sc = {v[0], v[1], v[2], v[3]};
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(source, row, e.what());
    }
  }
  return out;
}

}  // namespace

void cmd_classify(const Context& ctx) {
  const auto& c = ctx.config;
  if (c.deltas_ns.empty()) throw UsageError("config: deltas_ns is empty");
  SymbolTable symbols = io::symbol_table(c);
  const auto trades = io::load_trades(ctx, symbols);
  const auto days = group_by_day(trades, symbols.size());
  const auto& market = symbols.market_mask();
  const auto& universe = symbols.universe_mask();
  ClassifyOptions opts;
  opts.windows = c.windows;

  std::vector<std::vector<DayClassification>> results(days.size());
  parallel_for(days.size(), ctx.threads, [&](std::size_t i) {
    results[i] = sweep_delta(days[i], c.deltas_ns, market, universe, opts);
  });

  const auto out = io::prepare(ctx, "classify");
  json per_delta = json::array();
  for (std::size_t k = 0; k < c.deltas_ns.size(); ++k) {
    const auto dir = out / ("delta_" + std::to_string(c.deltas_ns[k]));
    std::array<std::int64_t, 4> class_totals{};
    {
      auto os = io::open_csv(dir / "counts.csv", ctx.hash);
      os << io::kCountsHeader << '\n';
      for (std::size_t i = 0; i < days.size(); ++i) {
        const auto& counts = results[i][k].counts;
        const auto day = format_day(counts.day);
        for (const auto& r : counts.rows) {
          const auto& ticker = symbols.ticker(r.symbol_id);
          const auto wname = counts.windows[r.window].name();
          for (auto t : kAllCoiTypes) {
            const auto& sc = r.counts[t];
            os << ticker << ',' << day << ',' << wname << ',' << type_name(t) << ',' << sc.buy_count << ','
               << sc.sell_count << ',' << sc.buy_volume << ',' << sc.sell_volume << '\n';
          }
        }
      }
    }
    std::ofstream labels;
    if (c.write_labels) {
      labels = io::open_csv(dir / "labels.csv", ctx.hash);
      labels << "symbol,day,ts_ns,dir,size,class\n";
    }
    for (std::size_t i = 0; i < days.size(); ++i) {
      const auto& lab = results[i][k].labels;
      const auto day = format_day(lab.day);
      for (std::size_t s = 0; s < lab.by_symbol.size(); ++s) {
        const auto& ticker = symbols.ticker(static_cast<SymbolId>(s));
        for (std::size_t j = 0; j < lab.by_symbol[s].size(); ++j) {
          ++class_totals[static_cast<std::size_t>(lab.by_symbol[s][j])];
          if (c.write_labels) {
            const auto& t = days[i].by_symbol[s][j];
            labels << ticker << ',' << day << ',' << t.ts_ns << ',' << (t.direction == Direction::Buy ? 'B' : 'S')
                   << ',' << t.size << ',' << class_name(lab.by_symbol[s][j]) << '\n';
          }
        }
      }
    }
    per_delta.push_back({{"delta_ns", c.deltas_ns[k]},
                         {"iso", class_totals[0]},
                         {"nis_s", class_totals[1]},
                         {"nis_c", class_totals[2]},
                         {"nis_b", class_totals[3]}});
  }

  {
    auto os = io::open_csv(out / "intervals.csv", ctx.hash);
    os << "symbol,day,interval,count\n";
    for (const auto& d : days) {
      const auto ic = count_intervals(d, c.interval_ns);
      const auto day = format_day(d.day);
      for (std::size_t s = 0; s < ic.by_symbol.size(); ++s) {
        if (!universe[s] && !market[s]) continue;
        for (std::size_t k = 0; k < ic.by_symbol[s].size(); ++k) {
          if (ic.by_symbol[s][k] > 0) os << symbols.ticker(static_cast<SymbolId>(s)) << ',' << day << ',' << k << ',' << ic.by_symbol[s][k] << '\n';
        }
      }
    }
  }
  json windows = json::array();
  for (const auto& w : c.windows) windows.push_back(w.name());
  io::write_json(out / "manifest.json",
                 {{"deltas_ns", c.deltas_ns},
                  {"windows", windows},
                  {"interval_ns", c.interval_ns},
                  {"days", days.size()},
                  {"trades", trades.size()},
                  {"class_totals", per_delta}},
                 ctx.hash);
  *ctx.log << "classify: " << days.size() << " days, " << trades.size() << " trades, " << c.deltas_ns.size()
           << " deltas -> " << out.string() << '\n';
}

void cmd_select_delta(const Context& ctx) {
  const auto& c = ctx.config;
  SymbolTable symbols = io::symbol_table(c);
  const auto manifest = io::read_json(ctx.out_dir / "classify" / "manifest.json", "classify");
  const auto deltas = manifest.at("deltas_ns").get<std::vector<std::int64_t>>();
  const auto interval_ns = manifest.at("interval_ns").get<std::int64_t>();
  const auto full = TimeWindow::full_day().name();

  // Interval counts per day.
  const auto ipath = ctx.out_dir / "classify" / "intervals.csv";
  io::require(ipath, "classify");
  std::map<Day, IntervalCounts> intervals;
  {
    std::ifstream in(ipath);
    std::string line;
    std::size_t row = 0;
    if (!csv::next_record(in, line, row) || csv::trim(line) != "symbol,day,interval,count") {
      throw ParseError(ipath.string(), row, "expected header 'symbol,day,interval,count'");
    }
    const auto n_int = static_cast<std::size_t>((kSessionCloseNs - kSessionOpenNs + interval_ns - 1) / interval_ns);
    while (csv::next_record(in, line, row)) {
      const auto f = csv::split(line);
      std::int64_t k = 0, n = 0;
      if (f.size() != 4 || !csv::parse_int(f[2], k) || !csv::parse_int(f[3], n) || k < 0 ||
          static_cast<std::size_t>(k) >= n_int || n < 0) {
        throw ParseError(ipath.string(), row, "malformed interval row");
      }
      Day day;
      try {
        day = parse_day(f[1]);
      } catch (const DataError& e) {
        throw ParseError(ipath.string(), row, e.what());
      }
      const auto id = symbols.intern(f[0]);
      auto& ic = intervals[day];
      ic.day = day;
      ic.interval_ns = interval_ns;
      if (ic.by_symbol.size() <= static_cast<std::size_t>(id)) ic.by_symbol.resize(static_cast<std::size_t>(id) + 1, std::vector<std::int64_t>(n_int, 0));
      ic.by_symbol[static_cast<std::size_t>(id)][static_cast<std::size_t>(k)] = n;
    }
  }
  const auto n_int = static_cast<std::size_t>((kSessionCloseNs - kSessionOpenNs + interval_ns - 1) / interval_ns);
  for (auto& [d, ic] : intervals) ic.by_symbol.resize(symbols.size(), std::vector<std::int64_t>(n_int, 0));

  std::vector<DeltaCandidate> candidates;
  for (auto delta : deltas) {
    const auto counts = read_counts(io::delta_dir(ctx, delta) / "counts.csv", symbols);
    std::map<CountsKey, LabelCounts> full_counts;
    for (const auto& [s, d, w, lc] : counts.rows) {
      if (w == full) full_counts[{s, d}] = lc;
    }
    if (full_counts.empty()) throw DataError("classify outputs lack the full-day window needed by select-delta");
    DeltaCandidate cand;
    cand.delta_ns = delta;
    for (auto& [day, ic] : intervals) {
      for (const auto& prof : interval_null_profile(ic, delta, symbols.market_mask(), symbols.universe_mask())) {
        const auto it = full_counts.find({prof.symbol_id, day});
        if (it == full_counts.end()) continue;
        cand.cells.push_back({prof.symbol_id, day, empirical_fractions(it->second), prof.probabilities.to_array()});
      }
    }
    candidates.push_back(std::move(cand));
  }
  const auto sel = select_delta(candidates, c.distance_norm);

  const auto out = io::prepare(ctx, "select_delta");
  {
    auto os = io::open_csv(out / "delta_table.csv", ctx.hash);
    os << "delta_ns,type,null_prob,emp_prob,weighted_distance\n";
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const auto& cand = candidates[i];
      const double m = static_cast<double>(cand.cells.size());
      for (std::size_t k = 0; k < kNullClassCount; ++k) {
        double np = 0.0, ep = 0.0;
        for (const auto& cell : cand.cells) {
          np += cell.null[k] / m;
          ep += cell.empirical[k] / m;
        }
        os << cand.delta_ns << ',' << type_name(kNullClasses[k]) << ',' << csv::format_double(np) << ','
           << csv::format_double(ep) << ',' << csv::format_double(sel.distances[i]) << '\n';
      }
    }
  }
  json dist = json::array();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    dist.push_back({{"delta_ns", candidates[i].delta_ns}, {"distance", io::number(sel.distances[i])}});
  }
  io::write_json(out / "summary.json",
                 {{"chosen_delta_ns", sel.chosen_delta_ns},
                  {"distances", dist},
                  {"cells", candidates.front().cells.size()},
                  {"norm", c.distance_norm == DistanceNorm::WeightedL1 ? "l1" : "l2"}},
                 ctx.hash);
  *ctx.log << "select-delta: chose " << sel.chosen_delta_ns << " ns\n";
}

void cmd_coi(const Context& ctx) {
  const auto& c = ctx.config;
  SymbolTable symbols = io::symbol_table(c);
  const auto delta = io::resolve_delta(ctx);
  const auto counts = read_counts(io::delta_dir(ctx, delta) / "counts.csv", symbols);

  std::map<std::pair<std::string, int>, std::vector<CoiVector>> panels;  // (window, measure)
  std::vector<CoiVector> all;
  for (const auto& [s, d, w, lc] : counts.rows) {
    if (lc[CoiType::All].buy_count + lc[CoiType::All].sell_count == 0) continue;  // no observation
    const auto window = TimeWindow::parse(w);
    for (auto m : {Measure::Count, Measure::Volume}) {
      CountRow row{s, d, 0, lc};
      auto v = compute_coi(row, window, m);
      panels[{w, static_cast<int>(m)}].push_back(v);
      all.push_back(v);
    }
  }

  const auto out = io::prepare(ctx, "coi");
  {
    auto os = io::open_csv(out / "coi_panel.csv", ctx.hash);
    os << io::kCoiPanelHeader << '\n';
    for (const auto& v : all) {
      const auto prefix = symbols.ticker(v.symbol_id) + "," + format_day(v.day) + "," + v.window.name() + "," +
                          std::string(measure_name(v.measure)) + ",";
      for (auto t : kAllCoiTypes) os << prefix << type_name(t) << ',' << csv::format_double(v[t]) << '\n';
    }
  }
  json stats = json::array();
  for (const auto& [key, panel] : panels) {
    json sj = {{"window", key.first}, {"measure", measure_name(static_cast<Measure>(key.second))}};
    try {
      const auto st = coi_stats(panel);
      json types = json::object();
      for (auto t : kAllCoiTypes) {
        const auto i = index_of(t);
        json pacf = json::array();
        for (double p : st.pacf[i]) pacf.push_back(io::number(p));
        json corr = json::object();
        for (auto u : kAllCoiTypes) corr[std::string(type_name(u))] = io::number(st.correlation[i][index_of(u)]);
        types[std::string(type_name(t))] = {{"mean", io::number(st.mean[i])},
                                            {"median", io::number(st.median[i])},
                                            {"std", io::number(st.stddev[i])},
                                            {"pacf", pacf},
                                            {"correlation", corr}};
      }
      sj["observations"] = st.observations;
      sj["symbols"] = st.symbols;
      sj["types"] = types;
    } catch (const DataError& e) {
      sj["error"] = e.what();
    } catch (const NumericalError& e) {
      sj["error"] = e.what();
    }
    stats.push_back(std::move(sj));
  }
  io::write_json(out / "coi_stats.json", {{"delta_ns", delta}, {"panels", stats}}, ctx.hash);
  *ctx.log << "coi: delta " << delta << " ns, " << all.size() / 2 << " symbol-day-window rows -> " << out.string()
           << '\n';
}

}  // namespace cooc::cli
