#include "cooc/coi.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "cooc/error.hpp"

namespace cooc {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

double imbalance(std::int64_t buy, std::int64_t sell) {
  const auto total = buy + sell;
  if (total == 0) return 0.0;
  return static_cast<double>(buy - sell) / static_cast<double>(total);
}

CoiVector compute_coi(const CountRow& row, const TimeWindow& window, Measure measure) {
  CoiVector v;
  v.symbol_id = row.symbol_id;
  v.day = row.day;
  v.window = window;
  v.measure = measure;
  for (auto t : kAllCoiTypes) {
    const auto& c = row.counts[t];
    v.values[index_of(t)] = measure == Measure::Count ? imbalance(c.buy_count, c.sell_count)
                                                      : imbalance(c.buy_volume, c.sell_volume);
  }
  return v;
}

std::vector<CoiVector> compute_coi(const DailyLabelCounts& counts, Measure measure) {
  std::vector<CoiVector> out;
  out.reserve(counts.rows.size());
  for (const auto& r : counts.rows) out.push_back(compute_coi(r, counts.windows.at(r.window), measure));
  return out;
}

std::vector<double> partial_autocorrelation(std::span<const double> x, int max_lag) {
  std::vector<double> out(static_cast<std::size_t>(std::max(max_lag, 0)), kNaN);
  const auto n = static_cast<Eigen::Index>(x.size());
  for (int k = 1; k <= max_lag; ++k) {
    const Eigen::Index rows = n - k;
    if (rows < 2 * k + 3) continue;  // k + 1 parameters and at least k + 2 residual dof
    Eigen::MatrixXd X(rows, k + 1);
    Eigen::VectorXd y(rows);
    for (Eigen::Index t = 0; t < rows; ++t) {
      y(t) = x[static_cast<std::size_t>(t + k)];
      X(t, 0) = 1.0;
      for (int l = 1; l <= k; ++l) X(t, l) = x[static_cast<std::size_t>(t + k - l)];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < k + 1) continue;
    const Eigen::VectorXd beta = qr.solve(y);
    out[static_cast<std::size_t>(k - 1)] = beta(k);
  }
  return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) return kNaN;
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return kNaN;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

CoiStats coi_stats(std::span<const CoiVector> panel) {
  CoiStats out;
  if (panel.empty()) throw DataError("empty COI panel");
  for (const auto& v : panel) {
    if (!(v.window == panel.front().window) || v.measure != panel.front().measure) {
      throw DataError("COI panel mixes windows or measures");
    }
  }

  std::map<SymbolId, std::vector<const CoiVector*>> by_symbol;
  for (const auto& v : panel) by_symbol[v.symbol_id].push_back(&v);

  out.observations = panel.size();
  for (auto t : kAllCoiTypes) {
    const auto ti = index_of(t);
    std::vector<double> all;
    all.reserve(panel.size());
    for (const auto& v : panel) all.push_back(v.values[ti]);
    double mean = 0.0;
    for (double x : all) mean += x;
    mean /= static_cast<double>(all.size());
    double ss = 0.0;
    for (double x : all) ss += (x - mean) * (x - mean);
    std::sort(all.begin(), all.end());
    const auto m = all.size() / 2;
    out.mean[ti] = mean;
    out.median[ti] = all.size() % 2 == 1 ? all[m] : 0.5 * (all[m - 1] + all[m]);
    out.stddev[ti] = all.size() > 1 ? std::sqrt(ss / static_cast<double>(all.size() - 1)) : kNaN;
  }

  std::array<std::array<double, kPacfLags>, kCoiTypeCount> pacf_sum{};
  std::array<std::array<std::size_t, kPacfLags>, kCoiTypeCount> pacf_n{};
  std::array<std::array<double, kCoiTypeCount>, kCoiTypeCount> corr_sum{};
  std::array<std::array<std::size_t, kCoiTypeCount>, kCoiTypeCount> corr_n{};
  std::size_t informative = 0;

  for (auto& [symbol, obs] : by_symbol) {
    std::sort(obs.begin(), obs.end(), [](const CoiVector* a, const CoiVector* b) { return a->day < b->day; });
    std::array<std::vector<double>, kCoiTypeCount> series;
    for (std::size_t ti = 0; ti < kCoiTypeCount; ++ti) {
      series[ti].reserve(obs.size());
      for (const auto* v : obs) series[ti].push_back(v->values[ti]);
    }
    bool any_varying = false;
    for (std::size_t ti = 0; ti < kCoiTypeCount; ++ti) {
      const auto pacf = partial_autocorrelation(series[ti], kPacfLags);
      for (int l = 0; l < kPacfLags; ++l) {
        if (std::isnan(pacf[static_cast<std::size_t>(l)])) continue;
        pacf_sum[ti][static_cast<std::size_t>(l)] += pacf[static_cast<std::size_t>(l)];
        ++pacf_n[ti][static_cast<std::size_t>(l)];
      }
      for (std::size_t tj = ti + 1; tj < kCoiTypeCount; ++tj) {
        const double r = pearson(series[ti], series[tj]);
        if (std::isnan(r)) continue;
        any_varying = true;
        corr_sum[ti][tj] += r;
        ++corr_n[ti][tj];
      }
    }
    informative += any_varying ? 1 : 0;
  }
  if (informative == 0) throw DataError("every symbol's COI series are constant; correlations undefined");
  out.symbols = by_symbol.size();

  for (std::size_t ti = 0; ti < kCoiTypeCount; ++ti) {
    for (std::size_t l = 0; l < kPacfLags; ++l) {
      out.pacf[ti][l] = pacf_n[ti][l] ? pacf_sum[ti][l] / static_cast<double>(pacf_n[ti][l]) : kNaN;
    }
    out.correlation[ti][ti] = 1.0;
    for (std::size_t tj = ti + 1; tj < kCoiTypeCount; ++tj) {
      const double r = corr_n[ti][tj] ? corr_sum[ti][tj] / static_cast<double>(corr_n[ti][tj]) : kNaN;
      out.correlation[ti][tj] = r;
      out.correlation[tj][ti] = r;
    }
  }
  return out;
}

}  // namespace cooc
