#include <exception>
#include <map>
#include <ostream>

#include "cooc/csv.hpp"
#include "cooc/econometrics.hpp"
#include "cooc/error.hpp"
#include "cooc/portfolio.hpp"
#include "io.hpp"

namespace cooc::cli {

using nlohmann::json;

namespace {

json result_json(const RegressionResult& r) {
  json terms = json::array();
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    terms.push_back({{"name", r.names[i]},
                     {"coef", io::number(r.coefficients[i])},
                     {"se", io::number(r.std_errors[i])},
                     {"t", io::number(r.t_stats[i])},
                     {"p", io::number(r.p_values[i])},
                     {"stars", significance_stars(r.p_values[i])}});
  }
  return {{"terms", terms},           {"r2", io::number(r.r2)},   {"adj_r2", io::number(r.adj_r2)},
          {"f_stat", io::number(r.f_stat)}, {"f_p_value", io::number(r.f_p_value)},
          {"aic", io::number(r.aic)}, {"bic", io::number(r.bic)}, {"mse", io::number(r.mse)},
          {"mae", io::number(r.mae)}, {"n_obs", r.n_obs},         {"n_params", r.n_params},
          {"hac", r.hac},             {"hac_lags", r.hac_lags}};
}

void table_rows(std::ostream& os, const std::string& label, const RegressionResult& r) {
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    os << label << ',' << r.names[i] << ',' << csv::format_double(r.coefficients[i]) << ','
       << significance_stars(r.p_values[i]) << ',' << csv::format_double(r.std_errors[i]) << ','
       << csv::format_double(r.t_stats[i]) << ',' << csv::format_double(r.p_values[i]) << ','
       << csv::format_double(r.adj_r2) << ',' << r.n_obs << '\n';
  }
}

// Remembers the first failure so the command can finish its outputs and still
// report a failing exit status.
struct FirstError {
  std::exception_ptr error;
  std::string note(const std::exception& e) {
    if (!error) error = std::current_exception();
    return e.what();
  }
  void rethrow() const {
    if (error) std::rethrow_exception(error);
  }
};

std::vector<CoiVector> analysis_panel(const Context& ctx, SymbolTable& symbols) {
  const auto& c = ctx.config;
  auto panel = io::read_coi_panel(ctx.out_dir / "coi" / "coi_panel.csv", symbols, c.analysis_window, c.measure);
  std::erase_if(panel, [&](const CoiVector& v) { return !symbols.in_universe(v.symbol_id); });
  if (panel.empty()) {
    throw DataError("coi panel has no rows for window " + c.analysis_window.name() + " and measure " +
                    std::string(measure_name(c.measure)));
  }
  return panel;
}

}  // namespace

void cmd_regress(const Context& ctx) {
  const auto& c = ctx.config;
  SymbolTable symbols = io::symbol_table(c);
  const auto cois = analysis_panel(ctx, symbols);
  const auto returns = io::load_returns(ctx, symbols, true);
  const auto panel = build_panel(cois, returns, io::load_factors(ctx));

  const auto out = io::prepare(ctx, "regress");
  auto contemp = io::open_csv(out / "contemporaneous.csv", ctx.hash);
  auto pred = io::open_csv(out / "predictive.csv", ctx.hash);
  const char* header = "label,term,coef,stars,se,t,p,adj_r2,n_obs\n";
  contemp << header;
  pred << header;
  FirstError first;
  json specs = json::array();
  for (const auto& rc : c.regressions) {
    const bool lead = rc.spec.response == Response::LeadExcess;
    json types = json::array();
    for (auto t : rc.spec.coi_types) types.push_back(type_name(t));
    json sj = {{"label", rc.spec.label}, {"response", lead ? "predictive" : "contemporaneous"}, {"coi_types", types}};
    try {
      const auto r = lead ? run_predictive(panel, rc.spec) : run_contemporaneous(panel, rc.spec);
      sj["result"] = result_json(r);
      table_rows(lead ? pred : contemp, rc.spec.label, r);
    } catch (const DataError& e) {
      sj["error"] = first.note(e);
    } catch (const NumericalError& e) {
      sj["error"] = first.note(e);
    }
    if (rc.subperiods) {
      json periods = json::array();
      for (const auto& p : run_subperiods(panel, rc.spec)) {
        json pj = {{"year", p.year}};
        if (p.result) pj["result"] = result_json(*p.result);
        else pj["note"] = p.note;
        periods.push_back(std::move(pj));
      }
      sj["subperiods"] = periods;
    }
    if (rc.per_symbol) {
      const auto ps = run_per_symbol(panel, rc.spec, rc.min_obs);
      json summary = json::array();
      for (const auto& cs : ps.summary) {
        summary.push_back({{"name", cs.name},
                           {"mean", io::number(cs.mean)},
                           {"pct_positive", cs.pct_positive},
                           {"pct_significant", cs.pct_significant},
                           {"hist_lo", io::number(cs.hist_lo)},
                           {"hist_hi", io::number(cs.hist_hi)},
                           {"histogram", cs.histogram}});
      }
      json excluded = json::array();
      for (auto s : ps.excluded) excluded.push_back(symbols.ticker(s));
      sj["per_symbol"] = {{"fits", ps.fits.size()},
                          {"excluded", excluded},
                          {"mean_adj_r2", io::number(ps.mean_adj_r2)},
                          {"summary", summary}};
    }
    specs.push_back(std::move(sj));
  }
  io::write_json(out / "results.json",
                 {{"window", c.analysis_window.name()},
                  {"measure", measure_name(c.measure)},
                  {"panel_rows", panel.rows.size()},
                  {"regressions", specs}},
                 ctx.hash);
  contemp.close();
  pred.close();
  *ctx.log << "regress: " << c.regressions.size() << " specs on " << panel.rows.size() << " rows -> "
           << out.string() << '\n';
  first.rethrow();
}

void cmd_backtest(const Context& ctx) {
  const auto& c = ctx.config;
  SymbolTable symbols = io::symbol_table(c);
  const auto cois = analysis_panel(ctx, symbols);
  const auto returns = io::load_returns(ctx, symbols, false);
  const auto factors = io::load_factors(ctx);

  std::vector<PortfolioSeries> long_short, extra;
  FirstError first;
  json sorts = json::array();
  const auto benchmarks = build_benchmarks(cois, returns, c.benchmark_buckets);

  const auto alpha_json = [&](const PortfolioSeries& s) -> json {
    if (s.constituents.empty()) return {{"note", "no positions were taken"}};
    try {
      const auto r = alpha_regression(s.returns, factors, benchmarks.umd, c.hac_lags);
      return {{"alpha", io::number(r.coef("const"))}, {"t", io::number(r.t("const"))},
              {"p", io::number(r.p("const"))},       {"stars", significance_stars(r.p("const"))},
              {"hac_lags", r.hac_lags},              {"regression", result_json(r)}};
    } catch (const DataError& e) {
      return {{"error", first.note(e)}};
    } catch (const NumericalError& e) {
      return {{"error", first.note(e)}};
    }
  };

  for (const auto& sc : c.sorts) {
    const auto signals =
        sc.secondary ? coi_signals(cois, sc.primary, *sc.secondary) : coi_signals(cois, sc.primary);
    auto ls = build_long_short(signals, returns, sc.spec);
    const auto summary = summarize(std::span<const PortfolioSeries>(&ls, 1), c.rf_daily).front();
    json sj = {{"label", ls.label},
               {"primary", type_name(sc.primary)},
               {"secondary", sc.secondary ? json(type_name(*sc.secondary)) : json(nullptr)},
               {"days", summary.days},
               {"flagged_days", ls.flagged.size()},
               {"annualized_return", io::number(summary.annualized)},
               {"sharpe", summary.sharpe_ratio ? io::number(*summary.sharpe_ratio) : json(nullptr)},
               {"alpha", alpha_json(ls)}};
    json costs = json::array();
    for (double bps : c.costs_bps) {
      auto net = apply_costs(ls, bps);
      net.label = ls.label + "_c" + csv::format_double(bps);
      const auto ns = summarize(std::span<const PortfolioSeries>(&net, 1), c.rf_daily).front();
      costs.push_back({{"bps", bps},
                       {"annualized_return", io::number(ns.annualized)},
                       {"sharpe", ns.sharpe_ratio ? io::number(*ns.sharpe_ratio) : json(nullptr)}});
      net.constituents.clear();
      extra.push_back(std::move(net));
    }
    sj["costs"] = costs;
    json buckets = json::array();
    for (auto& b : bucket_portfolios(signals, returns, sc.spec)) {
      const auto bs = summarize(std::span<const PortfolioSeries>(&b, 1), c.rf_daily).front();
      buckets.push_back({{"label", b.label}, {"days", bs.days}, {"annualized_return", io::number(bs.annualized)}});
      b.constituents.clear();
      extra.push_back(std::move(b));
    }
    sj["buckets"] = buckets;
    sorts.push_back(std::move(sj));
    long_short.push_back(std::move(ls));
  }

  json bench = json::array();
  for (const auto& b : benchmarks.series) {
    const auto bs = summarize(std::span<const PortfolioSeries>(&b, 1), c.rf_daily).front();
    json bj = {{"label", b.label},
               {"days", bs.days},
               {"annualized_return", io::number(bs.annualized)},
               {"sharpe", bs.sharpe_ratio ? io::number(*bs.sharpe_ratio) : json(nullptr)}};
    if (b.label == "bench_all_ls" || b.label == "bench_ret_mom_ls") bj["alpha"] = alpha_json(b);
    bench.push_back(std::move(bj));
  }
  PortfolioSeries umd;
  umd.label = "umd";
  umd.returns = benchmarks.umd;

  std::vector<PortfolioSeries> plotted = long_short;
  plotted.insert(plotted.end(), benchmarks.series.begin(), benchmarks.series.end());
  std::vector<PortfolioSeries> everything = plotted;
  everything.push_back(umd);
  everything.insert(everything.end(), extra.begin(), extra.end());

  const auto out = io::prepare(ctx, "backtest");
  {
    auto os = io::open_csv(out / "portfolios.csv", ctx.hash);
    write_portfolios_csv(os, everything);
  }
  {
    auto os = io::open_csv(out / "constituents.csv", ctx.hash);
    write_constituents_csv(os, plotted, symbols);
  }
  const auto summaries = summarize(plotted, c.rf_daily);
  {
    auto os = io::open_csv(out / "cumulative.csv", ctx.hash);
    write_cumulative_csv(os, summaries);
  }
  io::write_json(out / "summary.json",
                 {{"window", c.analysis_window.name()},
                  {"measure", measure_name(c.measure)},
                  {"rf_daily", c.rf_daily},
                  {"sorts", sorts},
                  {"benchmarks", bench},
                  {"umd_days", benchmarks.umd.size()}},
                 ctx.hash);
  *ctx.log << "backtest: " << c.sorts.size() << " sorts -> " << out.string() << '\n';
  first.rethrow();
}

}  // namespace cooc::cli
