#include <map>
#include <ostream>
#include <set>

#include "cooc/csv.hpp"
#include "cooc/error.hpp"
#include "cooc/market_data.hpp"
#include "cooc/synthetic.hpp"
#include "io.hpp"

namespace cooc::cli {

using nlohmann::json;

namespace {

std::string trade_file_name(const std::string& ticker, Day day) { return ticker + "_" + format_day(day) + ".csv"; }

json diagnostics_json(const InferDiagnostics& d) {
  return {{"execution_rows", d.execution_rows},   {"out_of_hours_rows", d.out_of_hours_rows},
          {"merged_rows", d.merged_rows},         {"conflict_groups", d.conflict_groups},
          {"input_shares", d.input_shares},       {"conflict_shares", d.conflict_shares},
          {"out_of_hours_shares", d.out_of_hours_shares}};
}

}  // namespace

void cmd_ingest(const Context& ctx) {
  const auto& c = ctx.config;
  if (c.messages_dir.empty()) throw UsageError("config: data.messages_dir is required for ingest");
  const auto& dir = c.messages_dir.resolved;
  if (!fs::is_directory(dir)) throw DataError("message directory " + dir.string() + " does not exist");
  SymbolTable symbols = io::symbol_table(c);

  struct Input {
    fs::path path;
    MessageFileName name;
  };
  std::vector<Input> inputs;
  std::vector<std::string> ignored;
  std::set<std::pair<std::string, Day>> present;
  for (const auto& f : io::csv_files(dir)) {
    const auto name = parse_message_filename(f.filename().string());
    const auto id = name ? symbols.find(name->ticker) : std::nullopt;
    if (!name || !id) {
      ignored.push_back(f.filename().string());
      continue;
    }
    if (!present.emplace(name->ticker, name->day).second) {
      throw DataError("two message files for " + name->ticker + " on " + format_day(name->day));
    }
    inputs.push_back({f, *name});
  }

  std::set<Day> days(c.days.begin(), c.days.end());
  if (days.empty()) {
    for (const auto& in : inputs) days.insert(in.name.day);
  }
  if (days.empty()) throw DataError("no message files for the configured tickers in " + dir.string());
  std::vector<std::string> absent;
  for (const auto& t : c.universe) {
    for (auto d : days) {
      if (!present.count({t, d})) absent.push_back(t + " " + format_day(d));
    }
  }
  if (!absent.empty()) {
    std::string list;
    for (std::size_t i = 0; i < absent.size() && i < 50; ++i) list += (i ? ", " : "") + absent[i];
    if (absent.size() > 50) list += ", ... (" + std::to_string(absent.size()) + " in total)";
    throw DataError("missing message files for symbol-days: " + list);
  }

  const auto out = io::prepare(ctx, "ingest");
  const InferOptions opts{c.include_hidden, c.conflict};
  json files = json::array();
  InferDiagnostics total;
  std::size_t trades_total = 0, out_of_order = 0;
  for (const auto& in : inputs) {
    const auto id = symbols.at(in.name.ticker);
    const auto day = parse_lobster_messages(in.path, in.name.day, id);
    InferredTrades inferred;
    try {
      inferred = infer_trades(day, opts);
    } catch (const DataError& e) {
      throw DataError(in.path.string() + ": " + e.what());
    }
    auto os = io::open_csv(out / "trades" / trade_file_name(in.name.ticker, in.name.day), ctx.hash);
    write_trades_csv(os, inferred.trades, symbols);
    const auto& d = inferred.diagnostics;
    total.execution_rows += d.execution_rows;
    total.out_of_hours_rows += d.out_of_hours_rows;
    total.merged_rows += d.merged_rows;
    total.conflict_groups += d.conflict_groups;
    total.input_shares += d.input_shares;
    total.conflict_shares += d.conflict_shares;
    total.out_of_hours_shares += d.out_of_hours_shares;
    trades_total += inferred.trades.size();
    out_of_order += day.out_of_order_rows;
    auto fj = diagnostics_json(d);
    fj["file"] = in.path.filename().string();
    fj["ticker"] = in.name.ticker;
    fj["day"] = format_day(in.name.day);
    fj["message_rows"] = day.rows.size();
    fj["out_of_order_rows"] = day.out_of_order_rows;
    fj["trades"] = inferred.trades.size();
    files.push_back(std::move(fj));
  }
  auto tj = diagnostics_json(total);
  tj["trades"] = trades_total;
  tj["out_of_order_rows"] = out_of_order;
  io::write_json(out / "summary.json",
                 {{"files", files}, {"totals", tj}, {"ignored_files", ignored},
                  {"include_hidden", c.include_hidden}},
                 ctx.hash);
  *ctx.log << "ingest: " << inputs.size() << " files, " << trades_total << " trades -> " << out.string() << '\n';
}

void cmd_simulate(const Context& ctx) {
  const auto& c = ctx.config;
  const auto& sim = c.simulate;
  SyntheticMarket m;
  if (sim.kind == "planted") {
    auto p = sim.planted;
    p.seed = c.seed;
    m = simulate_planted_market(p);
  } else {
    auto p = sim.poisson;
    p.seed = c.seed;
    m = simulate_poisson_market(p);
  }
  const auto out = io::prepare(ctx, "simulate");

  std::vector<std::string> tickers = m.tickers;
  SymbolTable table(tickers, {});
  table.intern(c.spy_ticker);

  // Trades arrive sorted by (day, symbol, ts): one file per symbol-day.
  std::size_t begin = 0;
  while (begin < m.trades.size()) {
    std::size_t end = begin;
    while (end < m.trades.size() && m.trades[end].symbol_id == m.trades[begin].symbol_id &&
           m.trades[end].day == m.trades[begin].day) {
      ++end;
    }
    const std::span<const TradeRecord> chunk(m.trades.data() + begin, end - begin);
    const auto& ticker = table.ticker(chunk.front().symbol_id);
    auto os = io::open_csv(out / "trades" / trade_file_name(ticker, chunk.front().day), ctx.hash);
    write_trades_csv(os, chunk, table);
    if (sim.lobster) {
      fs::create_directories(out / "messages");
      std::ofstream ms(out / "messages" / (ticker + "_" + format_day(chunk.front().day) +
                                           "_34200000_57600000_message_1.csv"),
                       std::ios::binary);
      write_lobster_messages(ms, chunk);
    }
    begin = end;
  }

  std::vector<DailyBar> bars = m.bars;
  for (auto b : m.spy) {
    b.symbol_id = table.at(c.spy_ticker);
    bars.push_back(b);
  }
  std::sort(bars.begin(), bars.end(), [](const DailyBar& a, const DailyBar& b) {
    return std::pair{a.day, a.symbol_id} < std::pair{b.day, b.symbol_id};
  });
  {
    auto os = io::open_csv(out / "bars.csv", ctx.hash);
    write_bars_csv(os, bars, table);
  }
  {
    auto os = io::open_csv(out / "factors.csv", ctx.hash);
    write_factors_csv(os, FactorTable(m.factors));
  }
  if (!m.signal.empty()) {
    auto os = io::open_csv(out / "latent.csv", ctx.hash);
    os << "symbol,day,signal\n";
    for (std::size_t s = 0; s < m.tickers.size(); ++s) {
      for (std::size_t d = 0; d < m.days.size(); ++d) {
        os << m.tickers[s] << ',' << format_day(m.days[d]) << ','
           << csv::format_double(m.signal[s * m.days.size() + d]) << '\n';
      }
    }
  }

  // Ready-to-run config for the downstream commands.
  RunConfig next = c;
  next.universe = m.tickers;
  next.market = m.tickers;
  next.trades_dir = {"trades", out / "trades"};
  next.bars = {"bars.csv", out / "bars.csv"};
  next.factors = {"factors.csv", out / "factors.csv"};
  next.momentum_factors = {};
  next.messages_dir = sim.lobster ? ConfigPath{"messages", out / "messages"} : ConfigPath{};
  next.output_dir = {"..", ctx.out_dir};
  next.threads = 0;
  next.days.clear();
  io::write_json(out / "config.json", to_json(next), ctx.hash);
  *ctx.log << "simulate: " << m.tickers.size() << " symbols x " << m.days.size() << " days, " << m.trades.size()
           << " trades -> " << out.string() << '\n';
}

}  // namespace cooc::cli
