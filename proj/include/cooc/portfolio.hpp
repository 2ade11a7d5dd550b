#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cooc/coi.hpp"
#include "cooc/market_data.hpp"
#include "cooc/types.hpp"

namespace cooc {

enum class SignalDirection { Momentum, Reversal };

/// iso and nis_s are Momentum; all, nis, nis_c and nis_b are Reversal.
SignalDirection default_direction(CoiType type);
std::string_view direction_name(SignalDirection d);
SignalDirection parse_direction(std::string_view text);

struct SignalObs {
  SymbolId symbol_id = 0;
  double value = 0.0;
};

struct BucketAssignment {
  std::vector<std::pair<SymbolId, int>> buckets;  // sorted by symbol id, buckets are 0-based from low
  bool degenerate = false;                         // every signal equal
};

/// Rank-based buckets: stocks are ordered by (signal, symbol id) and the stock at
/// 0-based rank r goes to floor((r + 1/2) * n_buckets / N), counted from the nearer end
/// of the ranking so that negating the signals mirrors the buckets. When N is a
/// multiple of n_buckets this is the right-closed empirical quantile split. All-equal
/// signals put every stock in the middle bucket and flag the day. Throws DataError
/// below n_buckets stocks.
BucketAssignment quantile_sort(std::span<const SignalObs> signals, int n_buckets);

struct DualSignalObs {
  SymbolId symbol_id = 0;
  double a = 0.0;
  double b = 0.0;
};

struct DoubleSort {
  int n_buckets = 0;
  /// cells[a * n_buckets + b], members sorted by symbol id; empty cells stay empty.
  std::vector<std::vector<SymbolId>> cells;
  bool degenerate = false;

  const std::vector<SymbolId>& cell(int a, int b) const { return cells[static_cast<std::size_t>(a * n_buckets + b)]; }
};

/// Independent sorts on each signal, intersected.
DoubleSort double_sort(std::span<const DualSignalObs> signals, int n_buckets);

/// Cross-section of one or two signals observed on a day.
struct SignalPoint {
  SymbolId symbol_id = 0;
  double a = 0.0;
  double b = 0.0;
};
struct SignalDay {
  Day day;
  std::vector<SignalPoint> points;
};

enum class EmptyLegPolicy { ZeroAndFlag, Skip };

struct SortSpec {
  std::string label;
  int n_buckets = 5;
  SignalDirection primary = SignalDirection::Momentum;
  std::optional<SignalDirection> secondary;  // set for double sorts
  EmptyLegPolicy empty_leg = EmptyLegPolicy::ZeroAndFlag;
};

struct Holding {
  SymbolId symbol_id = 0;
  double weight = 0.0;
};

struct PortfolioDay {
  Day day;
  std::vector<Holding> holdings;  // long weights positive, short negative
};

struct PortfolioSeries {
  std::string label;
  std::vector<DatedValue> returns;
  std::vector<PortfolioDay> constituents;  // only days with positions
  std::vector<Day> flagged;                // days recorded as 0 because a leg was empty or degenerate

  std::vector<double> values() const;
};

/// Positions for day t come from signals observed on the previous trading day of
/// `returns`. Eligible stocks have a signal on t-1 and a return on t.
PortfolioSeries build_long_short(std::span<const SignalDay> signals, const ReturnPanel& returns, const SortSpec& spec);

/// Equal-weight long-only series per bucket (n or n*n of them, labelled
/// "<label>_q<k>" or "<label>_<a>_<b>", 1-based). Days where a bucket is empty are
/// absent from that bucket's series.
std::vector<PortfolioSeries> bucket_portfolios(std::span<const SignalDay> signals, const ReturnPanel& returns,
                                               const SortSpec& spec);

inline constexpr double kDefaultDailyRiskFree = 0.0000625;

/// (mean - rf) / sample std * sqrt(252). NumericalError when fewer than two values
/// or zero dispersion.
double sharpe(std::span<const double> daily, double rf_daily = kDefaultDailyRiskFree);
double sharpe(const PortfolioSeries& series, double rf_daily = kDefaultDailyRiskFree);

/// Subtracts round_trip_bps * 1e-4 from every day. DataError on negative bps.
PortfolioSeries apply_costs(const PortfolioSeries& series, double round_trip_bps);

/// Signal days for one COI type from a COI panel (a single window and measure).
std::vector<SignalDay> coi_signals(std::span<const CoiVector> panel, CoiType type);
std::vector<SignalDay> coi_signals(std::span<const CoiVector> panel, CoiType a, CoiType b);
/// Same-day excess returns as a signal.
std::vector<SignalDay> return_signals(const ReturnPanel& returns);

struct Benchmarks {
  std::vector<PortfolioSeries> series;  // labels prefixed bench_: all_ls, ret_mom_ls, equal_weight, spy_oc, spy_cc
  std::vector<DatedValue> umd;
};

/// SPY series are omitted when the panel carries no SPY prices.
Benchmarks build_benchmarks(std::span<const CoiVector> panel, const ReturnPanel& returns, int n_buckets = 5);

/// Top half minus bottom half by previous-day excess return; ties at the median go
/// to the bottom half. Days with fewer than two eligible stocks are skipped.
std::vector<DatedValue> build_umd(const ReturnPanel& returns);

struct SeriesSummary {
  std::string label;
  std::size_t days = 0;
  double annualized = 0.0;            // mean * 252
  std::optional<double> sharpe_ratio; // absent when undefined
  std::vector<DatedValue> cumulative; // running sum
};

std::vector<SeriesSummary> summarize(std::span<const PortfolioSeries> series,
                                     double rf_daily = kDefaultDailyRiskFree);

inline constexpr std::string_view kPortfolioCsvHeader = "label,day,return";
inline constexpr std::string_view kConstituentsCsvHeader = "label,day,symbol,weight";

void write_portfolios_csv(std::ostream& out, std::span<const PortfolioSeries> series);
void write_constituents_csv(std::ostream& out, std::span<const PortfolioSeries> series, const SymbolTable& symbols);
void write_cumulative_csv(std::ostream& out, std::span<const SeriesSummary> summaries);

struct PortfolioCsvRow {
  std::string label;
  Day day;
  double value = 0.0;
};
struct ConstituentCsvRow {
  std::string label;
  Day day;
  std::string symbol;
  double weight = 0.0;
};

std::vector<PortfolioCsvRow> read_portfolios_csv(std::istream& in, const std::string& source);
std::vector<ConstituentCsvRow> read_constituents_csv(std::istream& in, const std::string& source);

}  // namespace cooc
