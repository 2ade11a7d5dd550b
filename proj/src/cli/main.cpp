#include <CLI11.hpp>
#include <functional>
#include <map>
#include <ostream>

#include "cooc/cli/commands.hpp"
#include "cooc/error.hpp"

namespace cooc::cli {

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool force = false;
  bool include_hidden = false;
};

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trade co-occurrence analytics pipeline"};
  app.require_subcommand(1);
  Flags flags;
  const std::map<std::string, std::pair<std::string, std::function<void(const Context&)>>> commands = {
      {"ingest", {"Infer trades from LOBSTER message files", cmd_ingest}},
      {"classify", {"Label trades by co-occurrence for each delta", cmd_classify}},
      {"select-delta", {"Choose delta against the uniform null model", cmd_select_delta}},
      {"coi", {"Conditional order imbalances and their statistics", cmd_coi}},
      {"regress", {"Contemporaneous and predictive regressions", cmd_regress}},
      {"backtest", {"Sorted long-short portfolios and benchmarks", cmd_backtest}},
      {"simulate", {"Generate a synthetic market", cmd_simulate}},
  };
  std::map<std::string, CLI::Option*> seed_opts, thread_opts, out_opts;
  for (const auto& [name, info] : commands) {
    auto* sub = app.add_subcommand(name, info.first);
    sub->add_option("--config,-c", flags.config, "JSON run configuration")->required();
    out_opts[name] = sub->add_option("--out,-o", flags.out, "Output directory (overrides COOC_OUTPUT_DIR and config)");
    seed_opts[name] = sub->add_option("--seed", flags.seed, "Random seed");
    thread_opts[name] = sub->add_option("--threads", flags.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--force", flags.force, "Overwrite existing outputs");
    sub->add_flag("--include-hidden", flags.include_hidden, "Also keep hidden executions");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  const auto* chosen = app.get_subcommands().front();
  const auto name = chosen->get_name();
  try {
    Overrides o;
    if (*out_opts[name]) o.out = flags.out;
    if (*seed_opts[name]) o.seed = flags.seed;
    if (*thread_opts[name]) o.threads = flags.threads;
    o.force = flags.force;
    o.include_hidden = flags.include_hidden;
    const auto ctx = make_context(load_config(flags.config), o, err);
    commands.at(name).second(ctx);
    return 0;
  } catch (const UsageError& e) {
    err << "cooc " << name << ": usage error: " << e.what() << '\n';
    return 1;
  } catch (const RefusalError& e) {
    err << "cooc " << name << ": usage error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    err << "cooc " << name << ": numerical error: " << e.what() << '\n';
    return 3;
  } catch (const DataError& e) {
    err << "cooc " << name << ": data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "cooc " << name << ": data error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace cooc::cli
