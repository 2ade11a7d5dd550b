#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "cooc/cooccurrence.hpp"
#include "cooc/types.hpp"

namespace cooc {

struct NullInputs {
  std::int64_t n_i = 1;      // trades of the symbol in the interval
  std::int64_t n_other = 0;  // trades of all other market-index symbols in the interval
  std::int64_t delta_ns = 1;
  std::int64_t interval_ns = kFiveMinutesNs;
};

/// Five classes in the order iso, nis, nis_s, nis_c, nis_b.
inline constexpr std::size_t kNullClassCount = 5;
inline constexpr std::array<CoiType, kNullClassCount> kNullClasses = {CoiType::Iso, CoiType::Nis, CoiType::NisS,
                                                                       CoiType::NisC, CoiType::NisB};

struct ClassProbabilities {
  double iso = 1.0, nis = 0.0, nis_s = 0.0, nis_c = 0.0, nis_b = 0.0;

  std::array<double, kNullClassCount> to_array() const { return {iso, nis, nis_s, nis_c, nis_b}; }
  static ClassProbabilities from_array(const std::array<double, kNullClassCount>& a) {
    return {a[0], a[1], a[2], a[3], a[4]};
  }
};

/// Co-occurrence class probabilities of one trade when the interval's arrivals are
/// i.i.d. uniform, with p = 2 delta / T. Throws DataError unless 0 < 2 delta <= T and
/// n_i >= 1.
ClassProbabilities null_probabilities(const NullInputs& inputs);
/// Same with p given directly, p in [0, 1].
ClassProbabilities null_probabilities(std::int64_t n_i, std::int64_t n_other, double p);

struct NullSimulation {
  ClassProbabilities estimate;
  ClassProbabilities standard_error;  // binomial, sqrt(q (1 - q) / reps)
  std::int64_t reps = 0;
};

/// Monte Carlo of the null model. Arrival times are uniform on a circle of length T,
/// so another trade lands within delta of the designated one with probability exactly
/// 2 delta / T. Reps are simulated in fixed blocks with per-block engines derived from
/// the seed, so the result does not depend on `threads`.
NullSimulation simulate_null(const NullInputs& inputs, std::int64_t reps, std::uint64_t seed, unsigned threads = 1);

struct SymbolNullProfile {
  SymbolId symbol_id = 0;
  Day day;
  std::int64_t trades = 0;
  ClassProbabilities probabilities;
};

/// Per universe symbol: average of per-interval null probabilities weighted by the
/// symbol's share of its day's trades in each interval. Symbols without trades are
/// omitted.
std::vector<SymbolNullProfile> interval_null_profile(const IntervalCounts& counts, std::int64_t delta_ns,
                                                     std::span<const std::uint8_t> market_mask,
                                                     std::span<const std::uint8_t> universe_mask);

/// Empirical class fractions from full-day counts (by trade count).
std::array<double, kNullClassCount> empirical_fractions(const LabelCounts& counts);

enum class DistanceNorm { WeightedL1, WeightedL2 };

struct CellFractions {
  SymbolId symbol_id = 0;
  Day day;
  std::array<double, kNullClassCount> empirical{};
  std::array<double, kNullClassCount> null{};
};

struct DeltaCandidate {
  std::int64_t delta_ns = 0;
  std::vector<CellFractions> cells;
};

struct DeltaSelection {
  std::int64_t chosen_delta_ns = 0;
  std::vector<double> distances;  // parallel to the candidates
};

/// Distance between empirical and null fractions of one cell, each class weighted by
/// its empirical fraction (weights normalized to sum to one).
double weighted_distance(const CellFractions& cell, DistanceNorm norm = DistanceNorm::WeightedL1);

/// Mean cell distance per candidate; picks the largest, ties to the smaller delta.
/// Candidates must share the same (symbol, day) grid.
DeltaSelection select_delta(std::span<const DeltaCandidate> candidates, DistanceNorm norm = DistanceNorm::WeightedL1);

}  // namespace cooc
