#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cooc/market_data.hpp"
#include "cooc/types.hpp"

namespace cooc {

/// A generated market. Symbol ids index `tickers`; SPY bars use id tickers.size().
struct SyntheticMarket {
  std::vector<std::string> tickers;
  std::vector<Day> days;
  std::vector<TradeRecord> trades;  // sorted by (day, symbol, ts)
  std::vector<DailyBar> bars;
  std::vector<DailyBar> spy;
  std::vector<FactorRow> factors;
  std::vector<double> signal;  // latent s[symbol * days + day], empty for the Poisson market
};

/// Market with a planted predictive iso-flow signal. Each symbol-day has a latent
/// s in [-1, 1]; isolated "informed" trades buy with probability (1 + s) / 2 and the
/// next day's excess open-to-close return is beta * s plus noise. All other flow
/// arrives in tight same-symbol or cross-symbol bursts with random sides, so it is
/// labelled non-isolated for any delta above the burst span.
struct PlantedConfig {
  int n_symbols = 25;
  int n_days = 120;
  Day start{20170103};
  double informed_per_day = 40.0;  // Poisson mean per symbol-day
  double self_bursts_per_day = 15.0;
  double cross_bursts_per_day = 150.0;  // market wide
  std::int64_t burst_span_ns = 20'000;
  double beta = 0.002;
  double noise_vol = 0.01;
  double market_vol = 0.008;
  std::uint64_t seed = 42;
};

SyntheticMarket simulate_planted_market(const PlantedConfig& config);

/// Independent homogeneous Poisson arrivals over the regular session, random sides.
struct PoissonConfig {
  int n_symbols = 10;
  int n_days = 1;
  Day start{20170103};
  double rate_per_second = 0.1;  // per symbol
  std::uint64_t seed = 42;
};

SyntheticMarket simulate_poisson_market(const PoissonConfig& config);

/// Weekdays starting at `start` (which is kept even if it falls on a weekend).
std::vector<Day> weekday_calendar(Day start, int n_days);

/// LOBSTER-style message rows for one symbol-day: a submission and a visible
/// execution per trade, the execution carrying the passive (opposite) side.
void write_lobster_messages(std::ostream& out, std::span<const TradeRecord> symbol_day_trades);

}  // namespace cooc
