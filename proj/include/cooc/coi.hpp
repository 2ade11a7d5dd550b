#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "cooc/cooccurrence.hpp"
#include "cooc/types.hpp"

namespace cooc {

/// (buy - sell) / (buy + sell), or 0 when there is nothing on either side.
double imbalance(std::int64_t buy, std::int64_t sell);

struct CoiVector {
  SymbolId symbol_id = 0;
  Day day;
  TimeWindow window;
  Measure measure = Measure::Count;
  std::array<double, kCoiTypeCount> values{};

  double operator[](CoiType t) const { return values[index_of(t)]; }
};

CoiVector compute_coi(const CountRow& row, const TimeWindow& window, Measure measure);
/// One vector per count row.
std::vector<CoiVector> compute_coi(const DailyLabelCounts& counts, Measure measure);

inline constexpr int kPacfLags = 5;

struct CoiStats {
  std::size_t observations = 0;
  std::array<double, kCoiTypeCount> mean{}, median{}, stddev{};
  /// pacf[type][lag - 1], averaged over symbols where the lag regression is identified.
  std::array<std::array<double, kPacfLags>, kCoiTypeCount> pacf{};
  std::array<std::array<double, kCoiTypeCount>, kCoiTypeCount> correlation{};
  std::size_t symbols = 0;
};

/// Lag-k partial autocorrelation as the coefficient on lag k in an OLS fit of the
/// series on an intercept and its first k lags. NaN when fewer than k + 2 residual
/// degrees of freedom remain or the lag matrix is singular.
std::vector<double> partial_autocorrelation(std::span<const double> series, int max_lag);

/// NaN when either series is constant.
double pearson(std::span<const double> a, std::span<const double> b);

/// Table-style statistics of a COI panel (one measure and window). Pooled mean,
/// median and sample standard deviation; PACF and the correlation matrix are computed
/// per symbol over its day-ordered observations, then averaged over symbols. Throws
/// DataError when the panel mixes windows or measures, or when every symbol's series
/// are all constant.
CoiStats coi_stats(std::span<const CoiVector> panel);

}  // namespace cooc
