#include "cooc/null_model.hpp"

#include <algorithm>
#include <cmath>

#include "cooc/error.hpp"
#include "cooc/parallel.hpp"
#include "cooc/rng.hpp"

namespace cooc {

namespace {

// (1 - p)^n evaluated as exp(n log1p(-p)).
double survive(double p, std::int64_t n) {
  if (n == 0) return 1.0;
  if (p >= 1.0) return 0.0;
  return std::exp(static_cast<double>(n) * std::log1p(-p));
}

// 1 - (1 - p)^n without cancellation for small p.
double hit(double p, std::int64_t n) {
  if (n == 0) return 0.0;
  if (p >= 1.0) return 1.0;
  return -std::expm1(static_cast<double>(n) * std::log1p(-p));
}

}  // namespace

ClassProbabilities null_probabilities(std::int64_t n_i, std::int64_t n_other, double p) {
  if (n_i < 1 || n_other < 0) throw DataError("null model needs n_i >= 1 and n_other >= 0");
  if (!(p >= 0.0 && p <= 1.0)) throw DataError("co-occurrence probability must lie in [0, 1]");
  const double own_miss = survive(p, n_i - 1);
  const double own_hit = hit(p, n_i - 1);
  const double other_miss = survive(p, n_other);
  const double other_hit = hit(p, n_other);
  ClassProbabilities out;
  out.iso = own_miss * other_miss;
  out.nis_s = own_hit * other_miss;
  out.nis_c = own_miss * other_hit;
  out.nis_b = own_hit * other_hit;
  out.nis = hit(p, n_i + n_other - 1);
  return out;
}

ClassProbabilities null_probabilities(const NullInputs& in) {
  if (in.delta_ns < 1 || in.interval_ns < 2 * in.delta_ns) {
    throw DataError("null model needs 0 < 2 delta <= T (delta=" + std::to_string(in.delta_ns) +
                    ", T=" + std::to_string(in.interval_ns) + ")");
  }
  const double p = 2.0 * static_cast<double>(in.delta_ns) / static_cast<double>(in.interval_ns);
  return null_probabilities(in.n_i, in.n_other, p);
}

NullSimulation simulate_null(const NullInputs& in, std::int64_t reps, std::uint64_t seed, unsigned threads) {
  null_probabilities(in);  // validates
  if (reps < 1) throw DataError("reps must be at least 1");
  constexpr std::int64_t kBlock = 8192;
  const auto n_blocks = static_cast<std::size_t>((reps + kBlock - 1) / kBlock);
  std::vector<std::array<std::int64_t, 4>> block_counts(n_blocks);  // iso, nis_s, nis_c, nis_b

  const double T = static_cast<double>(in.interval_ns);
  const double delta = static_cast<double>(in.delta_ns);
  parallel_for(n_blocks, threads, [&](std::size_t b) {
    Engine engine = make_engine(seed, "null_model", b);
    std::uniform_real_distribution<double> uniform(0.0, T);
    const auto near = [&](double a, double x) {
      double d = std::abs(a - x);
      d = std::min(d, T - d);
      return d < delta;
    };
    const std::int64_t begin = static_cast<std::int64_t>(b) * kBlock;
    const std::int64_t end = std::min(reps, begin + kBlock);
    auto& counts = block_counts[b];
    counts.fill(0);
    for (std::int64_t r = begin; r < end; ++r) {
      const double t = uniform(engine);
      // Draws stop once a hit is found; the remaining arrivals cannot change the label.
      bool same = false;
      for (std::int64_t k = 1; k < in.n_i && !same; ++k) same = near(t, uniform(engine));
      bool cross = false;
      for (std::int64_t k = 0; k < in.n_other && !cross; ++k) cross = near(t, uniform(engine));
      ++counts[(same ? 1 : 0) + (cross ? 2 : 0)];
    }
  });

  std::array<std::int64_t, 4> total{};
  for (const auto& c : block_counts) {
    for (std::size_t k = 0; k < 4; ++k) total[k] += c[k];
  }
  const double n = static_cast<double>(reps);
  const auto frac = [&](std::int64_t c) { return static_cast<double>(c) / n; };
  const auto se = [&](double q) { return std::sqrt(q * (1.0 - q) / n); };
  NullSimulation out;
  out.reps = reps;
  out.estimate.iso = frac(total[0]);
  out.estimate.nis_s = frac(total[1]);
  out.estimate.nis_c = frac(total[2]);
  out.estimate.nis_b = frac(total[3]);
  out.estimate.nis = frac(total[1] + total[2] + total[3]);
  const auto e = out.estimate.to_array();
  std::array<double, kNullClassCount> s{};
  for (std::size_t k = 0; k < kNullClassCount; ++k) s[k] = se(e[k]);
  out.standard_error = ClassProbabilities::from_array(s);
  return out;
}

std::vector<SymbolNullProfile> interval_null_profile(const IntervalCounts& counts, std::int64_t delta_ns,
                                                     std::span<const std::uint8_t> market_mask,
                                                     std::span<const std::uint8_t> universe_mask) {
  const auto flag = [](std::span<const std::uint8_t> m, std::size_t i) { return i < m.size() && m[i] != 0; };
  const std::size_t n_symbols = counts.by_symbol.size();
  const std::size_t n_intervals = n_symbols == 0 ? 0 : counts.by_symbol.front().size();

  std::vector<std::int64_t> market_total(n_intervals, 0);
  for (std::size_t s = 0; s < n_symbols; ++s) {
    if (!flag(market_mask, s)) continue;
    for (std::size_t k = 0; k < n_intervals; ++k) market_total[k] += counts.by_symbol[s][k];
  }

  std::vector<SymbolNullProfile> out;
  for (std::size_t s = 0; s < n_symbols; ++s) {
    if (!flag(universe_mask, s)) continue;
    const auto& own = counts.by_symbol[s];
    std::int64_t day_total = 0;
    for (auto c : own) day_total += c;
    if (day_total == 0) continue;
    std::array<double, kNullClassCount> acc{};
    for (std::size_t k = 0; k < n_intervals; ++k) {
      if (own[k] == 0) continue;
      const std::int64_t others = market_total[k] - (flag(market_mask, s) ? own[k] : 0);
      const auto p = null_probabilities({own[k], others, delta_ns, counts.interval_ns}).to_array();
      const double w = static_cast<double>(own[k]) / static_cast<double>(day_total);
      for (std::size_t c = 0; c < kNullClassCount; ++c) acc[c] += w * p[c];
    }
    out.push_back({static_cast<SymbolId>(s), counts.day, day_total, ClassProbabilities::from_array(acc)});
  }
  return out;
}

std::array<double, kNullClassCount> empirical_fractions(const LabelCounts& counts) {
  const auto n = [&](CoiType t) {
    const auto& c = counts[t];
    return static_cast<double>(c.buy_count + c.sell_count);
  };
  const double all = n(CoiType::All);
  std::array<double, kNullClassCount> out{};
  if (all == 0.0) return out;
  for (std::size_t k = 0; k < kNullClassCount; ++k) out[k] = n(kNullClasses[k]) / all;
  return out;
}

double weighted_distance(const CellFractions& cell, DistanceNorm norm) {
  double weight_sum = 0.0;
  for (double w : cell.empirical) weight_sum += w;
  if (weight_sum <= 0.0) return 0.0;
  double acc = 0.0;
  for (std::size_t k = 0; k < kNullClassCount; ++k) {
    const double w = cell.empirical[k] / weight_sum;
    const double gap = std::abs(cell.empirical[k] - cell.null[k]);
    acc += norm == DistanceNorm::WeightedL1 ? w * gap : w * gap * gap;
  }
  return norm == DistanceNorm::WeightedL1 ? acc : std::sqrt(acc);
}

DeltaSelection select_delta(std::span<const DeltaCandidate> candidates, DistanceNorm norm) {
  if (candidates.empty()) throw DataError("select_delta needs at least one candidate delta");
  for (std::size_t k = 1; k < candidates.size(); ++k) {
    if (candidates[k].delta_ns <= candidates[k - 1].delta_ns) throw DataError("candidate deltas must be ascending");
  }
  const auto key = [](const CellFractions& c) { return std::pair{c.symbol_id, c.day}; };
  std::vector<std::pair<SymbolId, Day>> grid;
  for (const auto& c : candidates.front().cells) grid.push_back(key(c));
  std::sort(grid.begin(), grid.end());
  if (grid.empty()) throw DataError("select_delta needs at least one (symbol, day) cell");

  DeltaSelection out;
  double best = -1.0;
  for (const auto& cand : candidates) {
    std::vector<std::pair<SymbolId, Day>> g;
    for (const auto& c : cand.cells) g.push_back(key(c));
    std::sort(g.begin(), g.end());
    if (g != grid) throw DataError("candidate deltas are not aligned on the same (symbol, day) grid");
    double sum = 0.0;
    for (const auto& c : cand.cells) sum += weighted_distance(c, norm);
    const double d = sum / static_cast<double>(cand.cells.size());
    out.distances.push_back(d);
    if (d > best) {
      best = d;
      out.chosen_delta_ns = cand.delta_ns;
    }
  }
  return out;
}

}  // namespace cooc
