#include "cooc/cli/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "cooc/error.hpp"
#include "cooc/rng.hpp"

namespace cooc::cli {

using nlohmann::json;

std::vector<std::int64_t> default_deltas() {
  return {50'000, 75'000, 125'000, 250'000, 500'000, 1'000'000, 5'000'000, 50'000'000};
}

namespace {

// Object view that rejects keys nobody asked about.
class Obj {
public:
  Obj(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw UsageError(where_ + ": expected an object");
  }
  ~Obj() noexcept(false) {
    if (std::uncaught_exceptions()) return;
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw UsageError(where_ + ": unknown key '" + k + "'");
    }
  }
  const json* get(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }
  std::string path(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (const auto* v = get(key)) {
      try {
        out = v->get<T>();
      } catch (const json::exception&) {
        throw UsageError(path(key) + ": wrong type");
      }
    }
  }
  template <typename T>
  void read(const std::string& key, std::optional<T>& out) {
    if (const auto* v = get(key)) {
      T x{};
      try {
        x = v->get<T>();
      } catch (const json::exception&) {
        throw UsageError(path(key) + ": wrong type");
      }
      out = x;
    }
  }

private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

ConfigPath make_path(const std::string& text, const fs::path& base) {
  if (text.empty()) return {};
  const fs::path p(text);
  return {text, p.is_absolute() ? p : (base / p).lexically_normal()};
}

void read_path(Obj& o, const std::string& key, ConfigPath& out, const fs::path& base) {
  std::string s;
  o.read(key, s);
  if (!s.empty()) out = make_path(s, base);
}

std::vector<CoiType> parse_types(const std::vector<std::string>& names) {
  std::vector<CoiType> out;
  for (const auto& n : names) out.push_back(parse_type(n));
  return out;
}

Day read_day(Obj& o, const std::string& key, Day fallback) {
  std::string s;
  o.read(key, s);
  return s.empty() ? fallback : parse_day(s);
}

std::optional<Day> read_opt_day(Obj& o, const std::string& key) {
  std::string s;
  o.read(key, s);
  if (s.empty()) return std::nullopt;
  return parse_day(s);
}

std::vector<RegressionConfig> default_regressions() {
  std::vector<RegressionConfig> out;
  const auto add = [&](std::string label, Response r, std::vector<CoiType> types) {
    RegressionConfig rc;
    rc.spec.label = std::move(label);
    rc.spec.response = r;
    rc.spec.coi_types = std::move(types);
    out.push_back(std::move(rc));
  };
  add("contemp_controls", Response::ContemporaneousExcess, {});
  for (auto t : kAllCoiTypes) add("contemp_" + std::string(type_name(t)), Response::ContemporaneousExcess, {t});
  add("contemp_split", Response::ContemporaneousExcess, {CoiType::Iso, CoiType::NisS, CoiType::NisC, CoiType::NisB});
  for (auto t : kAllCoiTypes) add("pred_" + std::string(type_name(t)), Response::LeadExcess, {t});
  add("pred_split", Response::LeadExcess, {CoiType::Iso, CoiType::NisS, CoiType::NisC, CoiType::NisB});
  return out;
}

SortConfig make_sort(CoiType a, std::optional<CoiType> b) {
  SortConfig s;
  s.primary = a;
  s.secondary = b;
  s.spec.label = std::string(type_name(a)) + (b ? "_x_" + std::string(type_name(*b)) : "") + "_ls";
  s.spec.primary = default_direction(a);
  if (b) s.spec.secondary = default_direction(*b);
  return s;
}

std::vector<SortConfig> default_sorts() {
  std::vector<SortConfig> out;
  for (auto t : kAllCoiTypes) out.push_back(make_sort(t, std::nullopt));
  for (auto t : {CoiType::NisS, CoiType::NisC, CoiType::NisB}) out.push_back(make_sort(CoiType::Iso, t));
  return out;
}

std::string norm_name(DistanceNorm n) { return n == DistanceNorm::WeightedL1 ? "l1" : "l2"; }

RunConfig parse_impl(const json& j, const fs::path& base) {
  RunConfig c = default_config(base);
  Obj root(j, "config");
  root.get("config_hash");  // written into generated configs, informational only

  if (const auto* d = root.get("data")) {
    Obj o(*d, "data");
    read_path(o, "messages_dir", c.messages_dir, base);
    read_path(o, "trades_dir", c.trades_dir, base);
    read_path(o, "bars", c.bars, base);
    read_path(o, "factors", c.factors, base);
    read_path(o, "momentum_factors", c.momentum_factors, base);
  }
  root.read("universe", c.universe);
  root.read("market", c.market);
  if (!root.get("market")) c.market = c.universe;
  root.read("spy_ticker", c.spy_ticker);
  {
    std::vector<std::string> days;
    root.read("days", days);
    for (const auto& d : days) c.days.push_back(parse_day(d));
  }
  root.read("deltas_ns", c.deltas_ns);
  root.read("chosen_delta_ns", c.chosen_delta_ns);
  {
    std::string m = std::string(measure_name(c.measure));
    root.read("measure", m);
    c.measure = parse_measure(m);
  }
  {
    std::vector<std::string> w;
    root.read("windows", w);
    if (!w.empty()) {
      c.windows.clear();
      for (const auto& name : w) c.windows.push_back(TimeWindow::parse(name));
    }
    std::string aw = c.analysis_window.name();
    root.read("analysis_window", aw);
    c.analysis_window = TimeWindow::parse(aw);
  }
  root.read("write_labels", c.write_labels);
  {
    std::string n = norm_name(c.distance_norm);
    root.read("distance_norm", n);
    if (n == "l1") c.distance_norm = DistanceNorm::WeightedL1;
    else if (n == "l2") c.distance_norm = DistanceNorm::WeightedL2;
    else throw UsageError("distance_norm must be l1 or l2");
  }
  root.read("interval_ns", c.interval_ns);

  if (const auto* regs = root.get("regressions")) {
    if (!regs->is_array()) throw UsageError("regressions: expected an array");
    c.regressions.clear();
    for (std::size_t i = 0; i < regs->size(); ++i) {
      Obj o((*regs)[i], "regressions[" + std::to_string(i) + "]");
      RegressionConfig rc;
      o.read("label", rc.spec.label);
      if (rc.spec.label.empty()) throw UsageError(o.path("label") + ": required");
      std::string response = "contemporaneous";
      o.read("response", response);
      if (response == "contemporaneous") rc.spec.response = Response::ContemporaneousExcess;
      else if (response == "predictive") rc.spec.response = Response::LeadExcess;
      else throw UsageError(o.path("response") + ": contemporaneous or predictive");
      std::vector<std::string> types;
      o.read("coi_types", types);
      rc.spec.coi_types = parse_types(types);
      if (const auto* ctl = o.get("controls")) {
        Obj co(*ctl, o.path("controls"));
        co.read("lag_return", rc.spec.controls.lag_return);
        co.read("rv", rc.spec.controls.rv);
        co.read("dvol", rc.spec.controls.dvol);
        co.read("factors6", rc.spec.controls.factors6);
      }
      rc.spec.from = read_opt_day(o, "from");
      rc.spec.to = read_opt_day(o, "to");
      if (rc.spec.from && rc.spec.to && *rc.spec.to < *rc.spec.from) throw UsageError(o.path("to") + ": empty period");
      o.read("per_symbol", rc.per_symbol);
      o.read("subperiods", rc.subperiods);
      o.read("min_obs", rc.min_obs);
      c.regressions.push_back(std::move(rc));
    }
  }

  if (const auto* sorts = root.get("sorts")) {
    if (!sorts->is_array()) throw UsageError("sorts: expected an array");
    c.sorts.clear();
    for (std::size_t i = 0; i < sorts->size(); ++i) {
      Obj o((*sorts)[i], "sorts[" + std::to_string(i) + "]");
      std::string primary, secondary;
      o.read("primary", primary);
      if (primary.empty()) throw UsageError(o.path("primary") + ": required");
      o.read("secondary", secondary);
      auto s = make_sort(parse_type(primary), secondary.empty() ? std::nullopt : std::optional(parse_type(secondary)));
      o.read("label", s.spec.label);
      o.read("n_buckets", s.spec.n_buckets);
      if (s.spec.n_buckets < 2) throw UsageError(o.path("n_buckets") + ": must be at least 2");
      std::string dir;
      o.read("primary_direction", dir);
      if (!dir.empty()) s.spec.primary = parse_direction(dir);
      dir.clear();
      o.read("secondary_direction", dir);
      if (!dir.empty()) {
        if (!s.secondary) throw UsageError(o.path("secondary_direction") + ": no secondary signal");
        s.spec.secondary = parse_direction(dir);
      }
      std::string empty = "zero";
      o.read("empty_leg", empty);
      if (empty == "zero") s.spec.empty_leg = EmptyLegPolicy::ZeroAndFlag;
      else if (empty == "skip") s.spec.empty_leg = EmptyLegPolicy::Skip;
      else throw UsageError(o.path("empty_leg") + ": zero or skip");
      if (s.spec.label.rfind("bench_", 0) == 0)
        throw UsageError(o.path("label") + ": prefix bench_ is reserved for benchmarks");
      for (const auto& prev : c.sorts)
        if (prev.spec.label == s.spec.label) throw UsageError(o.path("label") + ": duplicate label " + s.spec.label);
      c.sorts.push_back(std::move(s));
    }
  }

  root.read("costs_bps", c.costs_bps);
  root.read("hac_lags", c.hac_lags);
  root.read("rf_daily", c.rf_daily);
  root.read("benchmark_buckets", c.benchmark_buckets);
  root.read("seed", c.seed);
  root.read("threads", c.threads);
  read_path(root, "output_dir", c.output_dir, base);
  root.read("include_hidden", c.include_hidden);
  {
    std::string p = "drop";
    root.read("conflict_policy", p);
    if (p == "drop") c.conflict = ConflictPolicy::Drop;
    else if (p == "fail") c.conflict = ConflictPolicy::Fail;
    else throw UsageError("conflict_policy must be drop or fail");
  }

  if (const auto* sim = root.get("simulate")) {
    Obj o(*sim, "simulate");
    auto& s = c.simulate;
    o.read("kind", s.kind);
    if (s.kind != "planted" && s.kind != "poisson") throw UsageError("simulate.kind must be planted or poisson");
    int n_symbols = s.kind == "planted" ? s.planted.n_symbols : s.poisson.n_symbols;
    int n_days = s.kind == "planted" ? s.planted.n_days : s.poisson.n_days;
    o.read("n_symbols", n_symbols);
    o.read("n_days", n_days);
    s.planted.n_symbols = s.poisson.n_symbols = n_symbols;
    s.planted.n_days = s.poisson.n_days = n_days;
    s.planted.start = s.poisson.start = read_day(o, "start", s.planted.start);
    o.read("informed_per_day", s.planted.informed_per_day);
    o.read("self_bursts_per_day", s.planted.self_bursts_per_day);
    o.read("cross_bursts_per_day", s.planted.cross_bursts_per_day);
    o.read("burst_span_ns", s.planted.burst_span_ns);
    o.read("beta", s.planted.beta);
    o.read("noise_vol", s.planted.noise_vol);
    o.read("market_vol", s.planted.market_vol);
    o.read("rate_per_second", s.poisson.rate_per_second);
    o.read("lobster", s.lobster);
  }

  // Validation.
  for (auto d : c.deltas_ns) {
    if (d < 1) throw UsageError("deltas_ns: values must be >= 1 ns");
  }
  for (std::size_t i = 1; i < c.deltas_ns.size(); ++i) {
    if (c.deltas_ns[i] <= c.deltas_ns[i - 1]) throw UsageError("deltas_ns: values must be strictly ascending");
  }
  if (c.chosen_delta_ns && *c.chosen_delta_ns < 1) throw UsageError("chosen_delta_ns must be >= 1 ns");
  if (c.interval_ns < 2) throw UsageError("interval_ns must be >= 2");
  for (double b : c.costs_bps) {
    if (!(b >= 0.0)) throw UsageError("costs_bps: values must be non-negative");
  }
  if (c.benchmark_buckets < 2) throw UsageError("benchmark_buckets must be at least 2");
  if (c.hac_lags && *c.hac_lags < 0) throw UsageError("hac_lags must be non-negative");
  std::set<std::string> uni(c.universe.begin(), c.universe.end());
  if (uni.size() != c.universe.size()) throw UsageError("universe: duplicate ticker");
  return c;
}

json day_json(const std::optional<Day>& d) { return d ? json(format_day(*d)) : json(nullptr); }

}  // namespace

RunConfig default_config(const fs::path& base_dir) {
  RunConfig c;
  c.base_dir = base_dir;
  c.deltas_ns = default_deltas();
  c.windows = {TimeWindow::full_day()};
  c.regressions = default_regressions();
  c.sorts = default_sorts();
  c.costs_bps = {1, 2, 3, 4, 5};
  return c;
}

RunConfig parse_config(const json& j, const fs::path& base_dir) {
  try {
    return parse_impl(j, base_dir);
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(std::string("invalid config: ") + e.what());
  }
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j, fs::absolute(path).parent_path());
}

json to_json(const RunConfig& c, bool include_run_settings) {
  json j;
  j["data"] = {{"messages_dir", c.messages_dir.text}, {"trades_dir", c.trades_dir.text}, {"bars", c.bars.text},
               {"factors", c.factors.text}, {"momentum_factors", c.momentum_factors.text}};
  j["universe"] = c.universe;
  j["market"] = c.market;
  j["spy_ticker"] = c.spy_ticker;
  json days = json::array();
  for (auto d : c.days) days.push_back(format_day(d));
  j["days"] = days;
  j["deltas_ns"] = c.deltas_ns;
  j["chosen_delta_ns"] = c.chosen_delta_ns ? json(*c.chosen_delta_ns) : json(nullptr);
  j["measure"] = measure_name(c.measure);
  json windows = json::array();
  for (const auto& w : c.windows) windows.push_back(w.name());
  j["windows"] = windows;
  j["analysis_window"] = c.analysis_window.name();
  j["write_labels"] = c.write_labels;
  j["distance_norm"] = norm_name(c.distance_norm);
  j["interval_ns"] = c.interval_ns;
  json regs = json::array();
  for (const auto& r : c.regressions) {
    json types = json::array();
    for (auto t : r.spec.coi_types) types.push_back(type_name(t));
    regs.push_back({{"label", r.spec.label},
                    {"response", r.spec.response == Response::LeadExcess ? "predictive" : "contemporaneous"},
                    {"coi_types", types},
                    {"controls",
                     {{"lag_return", r.spec.controls.lag_return},
                      {"rv", r.spec.controls.rv},
                      {"dvol", r.spec.controls.dvol},
                      {"factors6", r.spec.controls.factors6}}},
                    {"from", day_json(r.spec.from)},
                    {"to", day_json(r.spec.to)},
                    {"per_symbol", r.per_symbol},
                    {"subperiods", r.subperiods},
                    {"min_obs", r.min_obs}});
  }
  j["regressions"] = regs;
  json sorts = json::array();
  for (const auto& s : c.sorts) {
    sorts.push_back({{"label", s.spec.label},
                     {"primary", type_name(s.primary)},
                     {"secondary", s.secondary ? json(type_name(*s.secondary)) : json(nullptr)},
                     {"n_buckets", s.spec.n_buckets},
                     {"primary_direction", direction_name(s.spec.primary)},
                     {"secondary_direction", s.spec.secondary ? json(direction_name(*s.spec.secondary)) : json(nullptr)},
                     {"empty_leg", s.spec.empty_leg == EmptyLegPolicy::Skip ? "skip" : "zero"}});
  }
  j["sorts"] = sorts;
  j["costs_bps"] = c.costs_bps;
  j["hac_lags"] = c.hac_lags ? json(*c.hac_lags) : json(nullptr);
  j["rf_daily"] = c.rf_daily;
  j["benchmark_buckets"] = c.benchmark_buckets;
  j["seed"] = c.seed;
  j["include_hidden"] = c.include_hidden;
  j["conflict_policy"] = c.conflict == ConflictPolicy::Fail ? "fail" : "drop";
  const auto& s = c.simulate;
  const bool planted = s.kind == "planted";
  j["simulate"] = {{"kind", s.kind},
                   {"n_symbols", planted ? s.planted.n_symbols : s.poisson.n_symbols},
                   {"n_days", planted ? s.planted.n_days : s.poisson.n_days},
                   {"start", format_day(s.planted.start)},
                   {"informed_per_day", s.planted.informed_per_day},
                   {"self_bursts_per_day", s.planted.self_bursts_per_day},
                   {"cross_bursts_per_day", s.planted.cross_bursts_per_day},
                   {"burst_span_ns", s.planted.burst_span_ns},
                   {"beta", s.planted.beta},
                   {"noise_vol", s.planted.noise_vol},
                   {"market_vol", s.planted.market_vol},
                   {"rate_per_second", s.poisson.rate_per_second},
                   {"lobster", s.lobster}};
  if (include_run_settings) {
    j["output_dir"] = c.output_dir.text;
    j["threads"] = c.threads;
  }
  return j;
}

std::string config_hash(const RunConfig& c) {
  const auto h = fnv1a(to_json(c, false).dump());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace cooc::cli
