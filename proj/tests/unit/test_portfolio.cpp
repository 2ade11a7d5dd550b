#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "cooc/error.hpp"
#include "cooc/portfolio.hpp"
#include "cooc/synthetic.hpp"
#include "oracles.hpp"

using namespace cooc;

namespace {

struct RandomPanel {
  ReturnPanel returns;
  std::vector<SignalDay> signals;
};

RandomPanel random_panel(std::size_t n_symbols, std::size_t n_days, std::uint64_t seed, double missing = 0.05) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0, 0.01);
  std::uniform_real_distribution<double> u(-1, 1);
  std::bernoulli_distribution gone(missing);
  RandomPanel p;
  const auto days = weekday_calendar(Day{20180102}, n_days);
  p.returns = ReturnPanel(days, n_symbols);
  for (std::size_t d = 0; d < n_days; ++d) {
    p.returns.set_spy(d, z(rng), 250.0);
    SignalDay sd{days[d], {}};
    for (std::size_t s = 0; s < n_symbols; ++s) {
      auto& c = p.returns.at(static_cast<SymbolId>(s), d);
      c.present = !gone(rng);
      c.raw_oc = z(rng);
      c.excess = c.raw_oc - p.returns.spy_oc(d);
      if (!gone(rng)) sd.points.push_back({static_cast<SymbolId>(s), u(rng), u(rng)});
    }
    p.signals.push_back(sd);
  }
  return p;
}

std::vector<SignalDay> negate(std::vector<SignalDay> s) {
  for (auto& d : s)
    for (auto& p : d.points) {
      p.a = -p.a;
      p.b = -p.b;
    }
  return s;
}

SortSpec single(SignalDirection d) { return {"x", 5, d, std::nullopt, EmptyLegPolicy::ZeroAndFlag}; }

}  // namespace

TEST(QuantileSort, WorkedExamples) {
  std::vector<SignalObs> five{{4, 5}, {0, 1}, {3, 4}, {1, 2}, {2, 3}};
  const auto a = quantile_sort(five, 5);
  for (auto [s, b] : a.buckets) EXPECT_EQ(b, s);
  EXPECT_FALSE(a.degenerate);
  std::vector<SignalObs> ten;
  for (int i = 0; i < 10; ++i) ten.push_back({i, std::sin(i * 1.7)});
  const auto b = quantile_sort(ten, 5);
  std::map<int, int> pop;
  for (auto [s, k] : b.buckets) ++pop[k];
  for (int k = 0; k < 5; ++k) EXPECT_EQ(pop[k], 2);
  std::vector<SignalObs> flat(5, {0, 0.3});
  for (int i = 0; i < 5; ++i) flat[i].symbol_id = i;
  const auto c = quantile_sort(flat, 5);
  EXPECT_TRUE(c.degenerate);
  for (auto [s, k] : c.buckets) EXPECT_EQ(k, 2);
  EXPECT_THROW(quantile_sort(std::span(five).first(4), 5), DataError);
  EXPECT_THROW(quantile_sort(five, 1), UsageError);
}

TEST(QuantileSort, MatchesEmpiricalQuantileOracleWhenBucketsDivideEvenly) {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 300; ++rep) {
    const int n_b = std::uniform_int_distribution<int>(2, 10)(rng);
    const int n = n_b * std::uniform_int_distribution<int>(1, 20)(rng);
    std::vector<SignalObs> s;
    std::uniform_real_distribution<double> u(-5, 5);
    for (int i = 0; i < n; ++i) s.push_back({static_cast<SymbolId>(i * 3 + 1), u(rng)});
    const auto got = quantile_sort(s, n_b);
    const auto want = oracle::quantile_buckets(s, n_b);
    std::map<int, int> pop;
    for (auto [sym, k] : got.buckets) {
      ASSERT_EQ(k, want.at(sym)) << "rep " << rep;
      ++pop[k];
    }
    for (int k = 0; k < n_b; ++k) ASSERT_EQ(pop[k], n / n_b);
  }
}

TEST(QuantileSort, UnevenSplitsAreBalancedAndMirrorUnderNegation) {
  std::mt19937_64 rng(18);
  for (int rep = 0; rep < 300; ++rep) {
    const int n_b = 2 * std::uniform_int_distribution<int>(1, 5)(rng) + 1;
    const int n = std::uniform_int_distribution<int>(n_b, 200)(rng);
    std::vector<SignalObs> s, neg;
    std::uniform_real_distribution<double> u(-5, 5);
    for (int i = 0; i < n; ++i) {
      s.push_back({static_cast<SymbolId>(i), u(rng)});
      neg.push_back({s.back().symbol_id, -s.back().value});
    }
    const auto a = quantile_sort(s, n_b), b = quantile_sort(neg, n_b);
    std::map<int, int> pop;
    for (std::size_t i = 0; i < a.buckets.size(); ++i) {
      ASSERT_EQ(a.buckets[i].second, n_b - 1 - b.buckets[i].second);
      ++pop[a.buckets[i].second];
    }
    for (int k = 0; k < n_b; ++k) {
      ASSERT_GE(pop[k], n / n_b - 1);
      ASSERT_LE(pop[k], n / n_b + 2);
    }
    // Ranking is preserved: a larger signal never lands in a lower bucket.
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = 0; j < s.size(); ++j) {
        if (s[i].value < s[j].value) {
          ASSERT_LE(a.buckets[i].second, a.buckets[j].second);
        }
      }
  }
}

TEST(DoubleSort, DiagonalAntiDiagonalAndIndependence) {
  std::vector<DualSignalObs> same, anti, indep;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u;
  for (int i = 0; i < 500; ++i) {
    const double x = u(rng);
    same.push_back({i, x, 2 * x + 1});
    anti.push_back({i, x, -x});
    indep.push_back({i, u(rng), u(rng)});
  }
  const auto d = double_sort(same, 5), a = double_sort(anti, 5), r = double_sort(indep, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      EXPECT_EQ(d.cell(i, j).empty(), i != j);
      EXPECT_EQ(a.cell(i, j).empty(), i + j != 4);
      EXPECT_NEAR(static_cast<double>(r.cell(i, j).size()), 20.0, 13.0);  // well over 3 binomial SE
    }
}

TEST(LongShort, TwoStockMomentumAndReversal) {
  const auto days = weekday_calendar(Day{20180102}, 2);
  ReturnPanel rp(days, 2);
  for (std::size_t d = 0; d < 2; ++d) rp.set_spy(d, 0.0, 100.0);
  rp.at(0, 1) = {true, -0.01, -0.01, 0, 0};
  rp.at(1, 1) = {true, 0.01, 0.01, 0, 0};
  std::vector<SignalDay> sig{{days[0], {{0, -1, 0}, {1, 1, 0}}}};
  SortSpec spec = single(SignalDirection::Momentum);
  spec.n_buckets = 2;
  const auto m = build_long_short(sig, rp, spec);
  ASSERT_EQ(m.returns.size(), 1u);
  EXPECT_EQ(m.returns[0].day, days[1]);
  EXPECT_DOUBLE_EQ(m.returns[0].value, 0.02);
  spec.primary = SignalDirection::Reversal;
  EXPECT_DOUBLE_EQ(build_long_short(sig, rp, spec).returns[0].value, -0.02);
}

TEST(LongShort, AccountingOracleSelfFinancingAndAntiSymmetry) {
  for (int rep = 0; rep < 100; ++rep) {
    const auto p = random_panel(100, 250, 100 + rep);
    const bool dbl = rep % 2 == 1;
    SortSpec spec = single(rep % 4 < 2 ? SignalDirection::Momentum : SignalDirection::Reversal);
    if (dbl) spec.secondary = SignalDirection::Reversal;
    const auto s = build_long_short(p.signals, p.returns, spec);
    const auto neg = build_long_short(negate(p.signals), p.returns, spec);
    ASSERT_EQ(s.returns.size(), neg.returns.size());
    std::map<std::int32_t, const PortfolioDay*> by_day;
    for (const auto& c : s.constituents) by_day[c.day.ymd] = &c;
    for (std::size_t i = 0; i < s.returns.size(); ++i) {
      ASSERT_EQ(s.returns[i].value, -neg.returns[i].value);
      const auto it = by_day.find(s.returns[i].day.ymd);
      if (it == by_day.end()) {
        ASSERT_EQ(s.returns[i].value, 0.0);
        continue;
      }
      const auto d = *p.returns.day_index(s.returns[i].day);
      double ret = 0, sum = 0, pos = 0;
      for (const auto& h : it->second->holdings) {
        ret += h.weight * p.returns.at(h.symbol_id, d).excess;
        sum += h.weight;
        pos += h.weight > 0 ? h.weight : 0;
      }
      ASSERT_NEAR(ret, s.returns[i].value, 1e-12);
      ASSERT_NEAR(sum, 0.0, 1e-12);
      ASSERT_NEAR(pos, 1.0, 1e-12);
    }
  }
}

TEST(LongShort, MonotoneSignalIsAlwaysProfitableForMomentum) {
  auto p = random_panel(40, 30, 7, 0.0);
  for (std::size_t d = 1; d < 30; ++d)
    for (auto& pt : p.signals[d - 1].points) p.returns.at(pt.symbol_id, d).excess = std::tanh(pt.a);
  const auto s = build_long_short(p.signals, p.returns, single(SignalDirection::Momentum));
  ASSERT_EQ(s.returns.size(), 29u);
  for (const auto& r : s.returns) EXPECT_GT(r.value, 0.0);
}

TEST(LongShort, DegenerateDaysAreFlaggedOrSkipped) {
  auto p = random_panel(10, 3, 8, 0.0);
  for (auto& pt : p.signals[0].points) pt.a = 0.5;
  auto spec = single(SignalDirection::Momentum);
  const auto z = build_long_short(p.signals, p.returns, spec);
  ASSERT_EQ(z.returns.size(), 2u);
  EXPECT_EQ(z.returns[0].value, 0.0);
  ASSERT_EQ(z.flagged.size(), 1u);
  EXPECT_EQ(z.flagged[0], p.signals[1].day);
  spec.empty_leg = EmptyLegPolicy::Skip;
  const auto k = build_long_short(p.signals, p.returns, spec);
  EXPECT_EQ(k.returns.size(), 1u);
}

TEST(BucketPortfolios, LabelsAndMeans) {
  const auto p = random_panel(50, 20, 9, 0.0);
  const auto b = bucket_portfolios(p.signals, p.returns, single(SignalDirection::Momentum));
  ASSERT_EQ(b.size(), 5u);
  EXPECT_EQ(b[0].label, "x_q1");
  EXPECT_EQ(b[4].label, "x_q5");
  const auto ls = build_long_short(p.signals, p.returns, single(SignalDirection::Momentum));
  for (std::size_t i = 0; i < ls.returns.size(); ++i)
    EXPECT_NEAR(ls.returns[i].value, b[4].returns[i].value - b[0].returns[i].value, 1e-15);
  auto spec = single(SignalDirection::Momentum);
  spec.secondary = SignalDirection::Momentum;
  const auto g = bucket_portfolios(p.signals, p.returns, spec);
  ASSERT_EQ(g.size(), 25u);
  EXPECT_EQ(g[7].label, "x_2_3");
}

TEST(Sharpe, ClosedFormCases) {
  std::vector<double> constant(10, 0.0000625);
  EXPECT_THROW(sharpe(constant), NumericalError);
  EXPECT_THROW(sharpe(std::vector<double>{0.1}), NumericalError);
  std::vector<double> alt;
  for (int i = 0; i < 100; ++i) alt.push_back(i % 2 ? 0.01 : -0.01);
  EXPECT_NEAR(sharpe(alt, 0.0), 0.0, 1e-12);
  const double sd = std::sqrt(100 * 1e-4 / 99);
  EXPECT_NEAR(sharpe(alt, 0.0001), -0.0001 * std::sqrt(252.0) / sd, 1e-12);
}

TEST(Sharpe, SimulatedTargetWithinThreeSe) {
  std::mt19937_64 rng(123);
  std::normal_distribution<double> z(0.001, 0.01);
  std::vector<double> r(1000);
  for (auto& x : r) x = z(rng);
  const double target = (0.001 - 0.0000625) / 0.01 * std::sqrt(252.0);
  // Daily Sharpe estimator SE ~ sqrt((1 + s^2 / 2) / n), annualized by sqrt(252).
  const double s = (0.001 - 0.0000625) / 0.01;
  const double se = std::sqrt((1 + s * s / 2) / 1000.0) * std::sqrt(252.0);
  EXPECT_NEAR(target, 1.49, 0.005);
  EXPECT_LE(std::abs(sharpe(r) - target), 3 * se);
}

TEST(Costs, ShiftsEveryDay) {
  PortfolioSeries s{"x", {{Day{20180102}, 0.001}, {Day{20180103}, -0.002}}, {}, {}};
  const auto c0 = apply_costs(s, 0);
  EXPECT_EQ(c0.values(), s.values());
  const auto c5 = apply_costs(s, 5);
  EXPECT_NEAR(c5.returns[0].value, 0.0005, 1e-18);
  const auto a = summarize(std::vector{s})[0].annualized, b = summarize(std::vector{c5})[0].annualized;
  EXPECT_NEAR(a - b, 252 * 5 * 1e-4, 1e-12);
  EXPECT_THROW(apply_costs(s, -1), DataError);
}

TEST(Summaries, ConstantAndEmpty) {
  PortfolioSeries s{"c", {}, {}, {}};
  const auto days = weekday_calendar(Day{20180102}, 252);
  for (Day d : days) s.returns.push_back({d, 0.0001});
  const auto sum = summarize(std::vector{s, PortfolioSeries{"e", {}, {}, {}}});
  EXPECT_NEAR(sum[0].annualized, 0.0252, 1e-12);
  EXPECT_NEAR(sum[0].cumulative.back().value, 0.0252, 1e-12);
  EXPECT_FALSE(sum[0].sharpe_ratio);
  EXPECT_EQ(sum[1].days, 0u);
  EXPECT_TRUE(sum[1].cumulative.empty());
}

TEST(Benchmarks, UmdTwoStocksAndReturnMomentumCrossCheck) {
  const auto days = weekday_calendar(Day{20180102}, 3);
  ReturnPanel rp(days, 2);
  for (std::size_t d = 0; d < 3; ++d) rp.set_spy(d, 0.0, 100.0 + d);
  const double ex[2][3] = {{0.01, -0.02, 0.03}, {-0.01, 0.04, 0.005}};
  for (SymbolId s = 0; s < 2; ++s)
    for (std::size_t d = 0; d < 3; ++d) rp.at(s, d) = {true, ex[s][d], ex[s][d], 0, 0};
  const auto umd = build_umd(rp);
  ASSERT_EQ(umd.size(), 2u);
  EXPECT_DOUBLE_EQ(umd[0].value, ex[0][1] - ex[1][1]);
  EXPECT_DOUBLE_EQ(umd[1].value, ex[1][2] - ex[0][2]);

  const auto p = random_panel(30, 40, 10, 0.0);
  std::vector<CoiVector> cois;
  for (const auto& sd : p.signals)
    for (const auto& pt : sd.points) {
      CoiVector v;
      v.symbol_id = pt.symbol_id;
      v.day = sd.day;
      v.values.fill(pt.a);
      cois.push_back(v);
    }
  const auto bm = build_benchmarks(cois, p.returns, 5);
  std::map<std::string, const PortfolioSeries*> by;
  for (const auto& s : bm.series) by[s.label] = &s;
  ASSERT_TRUE(by.count("bench_ret_mom_ls") && by.count("bench_all_ls") && by.count("bench_equal_weight") && by.count("bench_spy_oc") &&
              by.count("bench_spy_cc"));
  const auto direct = build_long_short(return_signals(p.returns), p.returns, single(SignalDirection::Momentum));
  EXPECT_EQ(by["bench_ret_mom_ls"]->values(), direct.values());
  const auto rev = build_long_short(coi_signals(cois, CoiType::All), p.returns, single(SignalDirection::Reversal));
  EXPECT_EQ(by["bench_all_ls"]->values(), rev.values());
  const auto& ew = *by["bench_equal_weight"];
  for (const auto& r : ew.returns) {
    const auto d = *p.returns.day_index(r.day);
    double m = 0;
    int n = 0;
    for (SymbolId s = 0; s < 30; ++s)
      if (p.returns.at(s, d).present) {
        m += p.returns.at(s, d).excess;
        ++n;
      }
    EXPECT_NEAR(r.value, m / n, 1e-15);
  }
  ReturnPanel no_spy = p.returns;
  for (std::size_t d = 0; d < 40; ++d) no_spy.set_spy(d, 0.0, 0.0);
  const auto bm2 = build_benchmarks(cois, no_spy, 5);
  for (const auto& s : bm2.series) EXPECT_EQ(s.label.rfind("bench_spy", 0), std::string::npos);
}

TEST(PortfolioCsv, ConstituentsRoundTripRecomputesReturns) {
  const auto p = random_panel(25, 30, 11);
  const auto s = build_long_short(p.signals, p.returns, single(SignalDirection::Momentum));
  std::vector<std::string> names;
  for (int i = 0; i < 25; ++i) names.push_back("S" + std::to_string(i));
  SymbolTable symbols(names, {});
  std::stringstream pc, cc;
  write_portfolios_csv(pc, std::vector{s});
  write_constituents_csv(cc, std::vector{s}, symbols);
  const auto rows = read_portfolios_csv(pc, "p");
  const auto cons = read_constituents_csv(cc, "c");
  ASSERT_EQ(rows.size(), s.returns.size());
  std::map<std::int32_t, double> recomputed;
  for (const auto& c : cons) {
    const auto d = *p.returns.day_index(c.day);
    recomputed[c.day.ymd] += c.weight * p.returns.at(symbols.at(c.symbol), d).excess;
  }
  for (const auto& r : rows) {
    EXPECT_EQ(r.label, "x");
    EXPECT_NEAR(recomputed[r.day.ymd], r.value, 1e-12);
  }
}

TEST(Directions, Defaults) {
  EXPECT_EQ(default_direction(CoiType::Iso), SignalDirection::Momentum);
  EXPECT_EQ(default_direction(CoiType::NisS), SignalDirection::Momentum);
  for (auto t : {CoiType::All, CoiType::Nis, CoiType::NisC, CoiType::NisB})
    EXPECT_EQ(default_direction(t), SignalDirection::Reversal);
  EXPECT_EQ(parse_direction(direction_name(SignalDirection::Reversal)), SignalDirection::Reversal);
}
