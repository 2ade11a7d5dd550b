#include <gtest/gtest.h>

#include <cmath>

#include "cooc/error.hpp"
#include "cooc/null_model.hpp"

using namespace cooc;

namespace {

// Direct evaluation with long double powl, independent of the library's log-space path.
std::array<double, 5> closed_form(std::int64_t ni, std::int64_t no, double p) {
  const long double q = 1.0L - p;
  const long double self_iso = std::pow(q, static_cast<long double>(ni - 1));
  const long double cross_iso = std::pow(q, static_cast<long double>(no));
  const long double iso = std::pow(q, static_cast<long double>(ni + no - 1));
  return {double(iso), double(1 - iso), double((1 - self_iso) * cross_iso), double(self_iso * (1 - cross_iso)),
          double((1 - self_iso) * (1 - cross_iso))};
}

}  // namespace

TEST(NullProbabilities, HandCheckIsExact) {
  const auto p = null_probabilities(2, 1, 0.5);
  EXPECT_EQ(p.iso, 0.25);
  EXPECT_EQ(p.nis, 0.75);
  EXPECT_EQ(p.nis_s, 0.25);
  EXPECT_EQ(p.nis_c, 0.25);
  EXPECT_EQ(p.nis_b, 0.25);
}

TEST(NullProbabilities, DegenerateCases) {
  const auto zero = null_probabilities(7, 12, 0.0);
  EXPECT_EQ(zero.iso, 1.0);
  EXPECT_EQ(zero.nis, 0.0);
  for (double p : {0.001, 0.3, 1.0}) {
    const auto alone = null_probabilities(1, 0, p);
    EXPECT_EQ(alone.iso, 1.0);
    EXPECT_EQ(alone.nis_b, 0.0);
  }
}

TEST(NullProbabilities, MatchesDirectFormulaAndNormalizes) {
  for (std::int64_t ni : {1, 2, 3, 5, 50, 1000})
    for (std::int64_t no : {0, 1, 10, 500, 100000})
      for (double p : {1e-7, 0.001, 0.01, 0.1, 0.5, 0.9}) {
        const auto got = null_probabilities(ni, no, p).to_array();
        const auto want = closed_form(ni, no, p);
        for (int k = 0; k < 5; ++k) EXPECT_NEAR(got[k], want[k], 1e-12) << ni << " " << no << " " << p << " " << k;
        EXPECT_NEAR(got[0] + got[2] + got[3] + got[4], 1.0, 1e-12);
        EXPECT_NEAR(got[2] + got[3] + got[4], got[1], 1e-12);
        for (double v : got) {
          EXPECT_GE(v, 0.0);
          EXPECT_LE(v, 1.0);
        }
      }
}

TEST(NullProbabilities, HugeExponentsStayFinite) {
  const auto p = null_probabilities(10'000'000, 10'000'000, 1e-9);
  EXPECT_NEAR(p.iso, std::exp(19'999'999.0 * std::log1p(-1e-9)), 1e-12);
  EXPECT_NEAR(p.iso + p.nis_s + p.nis_c + p.nis_b, 1.0, 1e-12);
}

TEST(NullProbabilities, IsoStrictlyDecreasing) {
  for (double p : {0.01, 0.2}) {
    EXPECT_GT(null_probabilities(2, 3, p).iso, null_probabilities(3, 3, p).iso);
    EXPECT_GT(null_probabilities(2, 3, p).iso, null_probabilities(2, 4, p).iso);
  }
  EXPECT_GT(null_probabilities(2, 3, 0.1).iso, null_probabilities(2, 3, 0.11).iso);
}

TEST(NullProbabilities, DomainErrors) {
  EXPECT_THROW(null_probabilities({1, 0, 200, 300}), DataError);  // 2 delta > T
  EXPECT_THROW(null_probabilities({0, 1, 10, 300}), DataError);
  EXPECT_THROW(null_probabilities({1, 1, 0, 300}), DataError);
  EXPECT_NO_THROW(null_probabilities({2, 1, 150, 300}));
  EXPECT_THROW(null_probabilities(1, 1, 1.5), DataError);
  EXPECT_DOUBLE_EQ(null_probabilities({2, 1, 75, 300}).iso, 0.25);
}

TEST(SimulateNull, HandCheckWithinThreeStandardErrors) {
  const auto sim = simulate_null({2, 1, 150'000, 600'000}, 200'000, 42);
  const auto est = sim.estimate.to_array(), se = sim.standard_error.to_array();
  const std::array<double, 5> want{0.25, 0.75, 0.25, 0.25, 0.25};
  for (int k = 0; k < 5; ++k) EXPECT_LE(std::abs(est[k] - want[k]), 3 * se[k]) << k;
  EXPECT_EQ(sim.reps, 200'000);
}

TEST(SimulateNull, SaturationIsAlmostSurelyBoth) {
  const auto sim = simulate_null({3, 2, 500, 1000}, 20'000, 1);
  EXPECT_GE(sim.estimate.nis_b, 1.0 - 3 * std::max(sim.standard_error.nis_b, 1e-4));
}

TEST(SimulateNull, DeterministicAndThreadIndependent) {
  const NullInputs in{5, 10, 3000, 300'000};
  const auto a = simulate_null(in, 50'000, 9, 1);
  const auto b = simulate_null(in, 50'000, 9, 1);
  const auto c = simulate_null(in, 50'000, 9, 3);
  EXPECT_EQ(a.estimate.to_array(), b.estimate.to_array());
  EXPECT_EQ(a.estimate.to_array(), c.estimate.to_array());
  const auto d = simulate_null(in, 50'000, 10, 1);
  EXPECT_NE(a.estimate.to_array(), d.estimate.to_array());
}

TEST(IntervalProfile, SingleIntervalAndConstantWeights) {
  IntervalCounts ic;
  ic.day = Day{20170103};
  ic.by_symbol.assign(2, std::vector<std::int64_t>(kIntervalsPerDay, 0));
  ic.by_symbol[0][10] = 4;
  ic.by_symbol[1][10] = 3;
  const std::vector<std::uint8_t> all{1, 1};
  const std::int64_t delta = 1'000'000;
  auto prof = interval_null_profile(ic, delta, all, all);
  ASSERT_EQ(prof.size(), 2u);
  const auto want = null_probabilities({4, 3, delta, kFiveMinutesNs}).to_array();
  const auto got = prof[0].probabilities.to_array();
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(got[k], want[k], 1e-15);
  EXPECT_EQ(prof[0].trades, 4);

  for (auto& v : ic.by_symbol) std::fill(v.begin(), v.end(), 6);
  prof = interval_null_profile(ic, delta, all, all);
  const auto flat = null_probabilities({6, 6, delta, kFiveMinutesNs}).to_array();
  const auto got2 = prof[1].probabilities.to_array();
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(got2[k], flat[k], 1e-13);
}

TEST(IntervalProfile, WeightsByOwnTradesAndSkipsIdleSymbols) {
  IntervalCounts ic;
  ic.day = Day{20170103};
  ic.by_symbol.assign(3, std::vector<std::int64_t>(kIntervalsPerDay, 0));
  ic.by_symbol[0][0] = 1;
  ic.by_symbol[0][1] = 3;
  ic.by_symbol[1][1] = 5;
  const std::vector<std::uint8_t> all{1, 1, 1};
  const auto prof = interval_null_profile(ic, 2'000'000, all, all);
  ASSERT_EQ(prof.size(), 2u);  // symbol 2 never traded
  const auto a = null_probabilities({1, 0, 2'000'000, kFiveMinutesNs}).to_array();
  const auto b = null_probabilities({3, 5, 2'000'000, kFiveMinutesNs}).to_array();
  const auto got = prof[0].probabilities.to_array();
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(got[k], 0.25 * a[k] + 0.75 * b[k], 1e-15);
  // Removing symbol 1 from the market returns symbol 0 to the one-interval self-only case.
  const std::vector<std::uint8_t> m{1, 0, 1};
  const auto solo = interval_null_profile(ic, 2'000'000, m, all);
  const auto c = null_probabilities({3, 0, 2'000'000, kFiveMinutesNs}).to_array();
  EXPECT_NEAR(solo[0].probabilities.iso, 0.25 * a[0] + 0.75 * c[0], 1e-15);
}

TEST(EmpiricalFractions, FromCounts) {
  LabelCounts c;
  c[CoiType::All] = {6, 4, 60, 40};
  c[CoiType::Iso] = {3, 2, 0, 0};
  c[CoiType::Nis] = {3, 2, 0, 0};
  c[CoiType::NisS] = {1, 0, 0, 0};
  c[CoiType::NisC] = {1, 1, 0, 0};
  c[CoiType::NisB] = {1, 1, 0, 0};
  const auto f = empirical_fractions(c);
  EXPECT_DOUBLE_EQ(f[0], 0.5);
  EXPECT_DOUBLE_EQ(f[1], 0.5);
  EXPECT_DOUBLE_EQ(f[2], 0.1);
  EXPECT_DOUBLE_EQ(f[3], 0.2);
}

TEST(SelectDelta, UniformGapsAndTieRule) {
  auto cell = [](double gap) {
    CellFractions c;
    c.empirical = {0.4, 0.6, 0.2, 0.2, 0.2};
    for (int k = 0; k < 5; ++k) c.null[k] = c.empirical[k] + gap;
    return c;
  };
  const std::vector<DeltaCandidate> toy = {{100, {cell(0.1)}}, {200, {cell(0.05)}}};
  const auto sel = select_delta(toy);
  EXPECT_NEAR(sel.distances[0], 0.1, 1e-15);
  EXPECT_NEAR(sel.distances[1], 0.05, 1e-15);
  EXPECT_EQ(sel.chosen_delta_ns, 100);

  const std::vector<DeltaCandidate> same = {{100, {cell(0)}}, {200, {cell(0)}}, {300, {cell(0)}}};
  const auto tie = select_delta(same);
  EXPECT_EQ(tie.chosen_delta_ns, 100);
  for (double d : tie.distances) EXPECT_EQ(d, 0.0);

  const std::vector<DeltaCandidate> none = {{100, {}}};
  EXPECT_THROW(select_delta(none), DataError);
}

TEST(SelectDelta, ArgmaxIsScaleInvariant) {
  CellFractions a, b;
  a.empirical = {0.5, 0.5, 0.1, 0.2, 0.2};
  a.null = {0.7, 0.3, 0.1, 0.1, 0.1};
  b.empirical = a.empirical;
  b.null = {0.6, 0.4, 0.15, 0.15, 0.1};
  const std::vector<DeltaCandidate> c = {{1, {b}}, {2, {a}}};
  const auto s = select_delta(c);
  EXPECT_EQ(s.chosen_delta_ns, 2);
  // Doubling every gap doubles every distance.
  auto scale = [](CellFractions x) {
    for (int k = 0; k < 5; ++k) x.null[k] = x.empirical[k] + 2 * (x.null[k] - x.empirical[k]);
    return x;
  };
  const std::vector<DeltaCandidate> c2 = {{1, {scale(b)}}, {2, {scale(a)}}};
  const auto s2 = select_delta(c2);
  EXPECT_EQ(s2.chosen_delta_ns, 2);
  EXPECT_NEAR(s2.distances[0], 2 * s.distances[0], 1e-15);
  EXPECT_GT(weighted_distance(a, DistanceNorm::WeightedL2), 0.0);
}
