#include "io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>

#include "cooc/csv.hpp"
#include "cooc/error.hpp"
#include "cooc/parallel.hpp"

namespace cooc::cli {

Context make_context(RunConfig config, const Overrides& o, std::ostream& log) {
  Context ctx;
  if (o.seed) config.seed = *o.seed;
  if (o.include_hidden) config.include_hidden = true;
  if (o.out) {
    ctx.out_dir = fs::absolute(*o.out);
  } else if (const char* env = std::getenv("COOC_OUTPUT_DIR"); env && *env) {
    ctx.out_dir = fs::absolute(env);
  } else if (!config.output_dir.empty()) {
    ctx.out_dir = config.output_dir.resolved;
  } else {
    ctx.out_dir = config.base_dir / "out";
  }
  ctx.out_dir = ctx.out_dir.lexically_normal();
  ctx.threads = o.threads ? *o.threads : (config.threads ? config.threads : default_threads());
  if (ctx.threads == 0) ctx.threads = 1;
  ctx.force = o.force;
  ctx.hash = config_hash(config);
  ctx.config = std::move(config);
  ctx.log = &log;
  return ctx;
}

namespace io {

fs::path prepare(const Context& ctx, const std::string& name) {
  const fs::path dir = ctx.out_dir / name;
  if (fs::exists(dir) && !fs::is_empty(dir)) {
    if (!ctx.force) {
      throw UsageError("refusing to overwrite existing outputs in " + dir.string() + " (pass --force)");
    }
    fs::remove_all(dir);
  }
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_csv(const fs::path& path, const std::string& hash) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "# config_hash=" << hash << '\n';
  return out;
}

void write_json(const fs::path& path, nlohmann::json j, const std::string& hash) {
  j["config_hash"] = hash;
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void require(const fs::path& path, const std::string& producer) {
  if (!fs::exists(path)) {
    throw DataError("missing " + path.string() + "; run `cooc " + producer + "` first");
  }
}

nlohmann::json read_json(const fs::path& path, const std::string& producer) {
  require(path, producer);
  std::ifstream in(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": invalid JSON: " + e.what());
  }
}

SymbolTable symbol_table(const RunConfig& c) {
  if (c.universe.empty()) throw UsageError("config: universe must list at least one ticker");
  return SymbolTable(c.universe, c.market);
}

fs::path trades_dir(const Context& ctx) {
  return ctx.config.trades_dir.empty() ? ctx.out_dir / "ingest" / "trades" : ctx.config.trades_dir.resolved;
}

std::vector<fs::path> csv_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<TradeRecord> load_trades(const Context& ctx, SymbolTable& symbols) {
  const auto dir = trades_dir(ctx);
  if (!fs::is_directory(dir)) {
    throw DataError("no trade directory " + dir.string() + "; run `cooc ingest` (or `cooc simulate`) first");
  }
  std::vector<TradeRecord> all;
  for (const auto& f : csv_files(dir)) {
    auto t = read_trades_csv(f, symbols);
    all.insert(all.end(), t.begin(), t.end());
  }
  return all;
}

ReturnPanel load_returns(const Context& ctx, SymbolTable& symbols, bool with_trades) {
  const auto& c = ctx.config;
  if (c.bars.empty()) throw UsageError("config: data.bars is required");
  require(c.bars.resolved, "simulate");
  const auto bars = read_bars_csv(c.bars.resolved, symbols);
  std::vector<DailyBar> stock, spy;
  const auto spy_id = symbols.find(c.spy_ticker);
  for (const auto& b : bars) {
    if (spy_id && b.symbol_id == *spy_id) spy.push_back(b);
    else if (symbols.in_universe(b.symbol_id)) stock.push_back(b);
  }
  if (spy.empty()) throw DataError(c.bars.resolved.string() + ": no bars for " + c.spy_ticker);
  std::vector<TradeRecord> trades;
  if (with_trades) trades = load_trades(ctx, symbols);
  return compute_returns(stock, spy, trades, symbols.size());
}

FactorTable load_factors(const Context& ctx) {
  const auto& c = ctx.config;
  if (c.factors.empty()) throw UsageError("config: data.factors is required");
  require(c.factors.resolved, "simulate");
  std::optional<fs::path> mom;
  if (!c.momentum_factors.empty()) mom = c.momentum_factors.resolved;
  return parse_factors(c.factors.resolved, mom);
}

std::int64_t resolve_delta(const Context& ctx) {
  const auto& c = ctx.config;
  require(ctx.out_dir / "classify" / "manifest.json", "classify");
  if (c.chosen_delta_ns) return *c.chosen_delta_ns;
  const auto summary = ctx.out_dir / "select_delta" / "summary.json";
  if (fs::exists(summary)) {
    const auto j = read_json(summary, "select-delta");
    return j.at("chosen_delta_ns").get<std::int64_t>();
  }
  if (c.deltas_ns.size() == 1) return c.deltas_ns.front();
  throw DataError("no delta chosen: run `cooc select-delta` or set chosen_delta_ns");
}

fs::path delta_dir(const Context& ctx, std::int64_t delta) {
  return ctx.out_dir / "classify" / ("delta_" + std::to_string(delta));
}

std::vector<CoiVector> read_coi_panel(const fs::path& path, SymbolTable& symbols, const TimeWindow& window,
                                      Measure measure) {
  require(path, "coi");
  std::ifstream in(path);
  std::string line;
  std::size_t row = 0;
  const auto source = path.string();
  if (!csv::next_record(in, line, row) || csv::trim(line) != kCoiPanelHeader) {
    throw ParseError(source, row, "expected header '" + std::string(kCoiPanelHeader) + "'");
  }
  const auto wname = window.name();
  const auto mname = measure_name(measure);
  std::map<std::pair<SymbolId, Day>, CoiVector> by_key;
  while (csv::next_record(in, line, row)) {
    const auto f = csv::split(line);
    if (f.size() != 6) throw ParseError(source, row, "expected 6 fields");
    if (f[2] != wname || f[3] != mname) continue;
    double v = 0.0;
    if (!csv::parse_double(f[5], v) || !(v >= -1.0 && v <= 1.0)) throw ParseError(source, row, "bad COI value");
    try {
      const auto id = symbols.intern(f[0]);
      const auto day = parse_day(f[1]);
      auto& cv = by_key[{id, day}];
      cv.symbol_id = id;
      cv.day = day;
      cv.window = window;
      cv.measure = measure;
      cv.values[index_of(parse_type(f[4]))] = v;
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(source, row, e.what());
    }
  }
  std::vector<CoiVector> out;
  out.reserve(by_key.size());
  for (auto& [k, v] : by_key) out.push_back(v);
  return out;
}

std::string format_delta(std::int64_t delta) { return std::to_string(delta); }

nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace io
}  // namespace cooc::cli
