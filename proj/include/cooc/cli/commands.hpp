#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "cooc/cli/config.hpp"

namespace cooc::cli {

/// Resolved settings shared by every command.
struct Context {
  RunConfig config;
  fs::path out_dir;
  unsigned threads = 1;
  bool force = false;
  std::string hash;
  std::ostream* log = nullptr;
};

struct Overrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool force = false;
  bool include_hidden = false;
};

/// Applies flag overrides and the COOC_OUTPUT_DIR variable (flags win over the
/// variable, which wins over the config).
Context make_context(RunConfig config, const Overrides& overrides, std::ostream& log);

void cmd_ingest(const Context& ctx);
void cmd_classify(const Context& ctx);
void cmd_select_delta(const Context& ctx);
void cmd_coi(const Context& ctx);
void cmd_regress(const Context& ctx);
void cmd_backtest(const Context& ctx);
void cmd_simulate(const Context& ctx);

/// Entry point: 0 success, 1 usage, 2 data, 3 numerical.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace cooc::cli
