#include "cooc/econometrics.hpp"

#include <algorithm>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>

#include "cooc/error.hpp"

namespace cooc {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::optional<std::size_t> RegressionResult::find(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  return std::nullopt;
}

namespace {
std::size_t require(const RegressionResult& r, std::string_view name) {
  if (auto i = r.find(name)) return *i;
  throw DataError("regression has no coefficient '" + std::string(name) + "'");
}
}  // namespace

double RegressionResult::coef(std::string_view name) const { return coefficients[require(*this, name)]; }
double RegressionResult::t(std::string_view name) const { return t_stats[require(*this, name)]; }
double RegressionResult::p(std::string_view name) const { return p_values[require(*this, name)]; }
double RegressionResult::se(std::string_view name) const { return std_errors[require(*this, name)]; }

std::string significance_stars(double p) {
  if (!(p == p)) return "";
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.10) return "*";
  return "";
}

int newey_west_auto_lags(std::size_t n) {
  return static_cast<int>(std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 2.0 / 9.0)));
}

RegressionResult ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<std::string>& names,
                         std::optional<int> hac_lags) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  const Eigen::Index k = p + 1;
  if (y.size() != n) throw DataError("design and response have different lengths");
  if (static_cast<Eigen::Index>(names.size()) != p) throw DataError("one name per design column is required");
  if (n <= k) {
    throw DataError("regression needs more observations than parameters (n=" + std::to_string(n) +
                    ", k=" + std::to_string(k) + ")");
  }
  if (hac_lags && *hac_lags < 0) throw DataError("HAC lag count must be non-negative");

  const Eigen::RowVectorXd x_mean = X.colwise().mean();
  const double y_mean = y.mean();
  Eigen::MatrixXd Xc = X.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;

  // Unit-norm columns so that the rank decision does not depend on units.
  Eigen::VectorXd scale(p);
  std::vector<std::string> constant;
  for (Eigen::Index j = 0; j < p; ++j) {
    scale(j) = Xc.col(j).norm();
    if (scale(j) == 0.0 || !std::isfinite(scale(j))) constant.push_back(names[static_cast<std::size_t>(j)]);
  }
  if (!constant.empty()) {
    std::string list;
    for (const auto& c : constant) list += (list.empty() ? "" : ", ") + c;
    throw NumericalError("rank-deficient design: column(s) " + list + " collinear with the intercept");
  }
  for (Eigen::Index j = 0; j < p; ++j) Xc.col(j) /= scale(j);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xc);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    std::string list;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index j = qr.rank(); j < p; ++j) {
      list += (list.empty() ? "" : ", ") + names[static_cast<std::size_t>(perm(j))];
    }
    throw NumericalError("rank-deficient design: column(s) " + list + " are linear combinations of the others");
  }
  const Eigen::VectorXd slopes = (qr.solve(yc).array() / scale.array()).matrix();
  const double intercept = y_mean - x_mean.dot(slopes);

  RegressionResult r;
  r.n_obs = static_cast<std::size_t>(n);
  r.n_params = static_cast<std::size_t>(k);
  r.names.reserve(static_cast<std::size_t>(k));
  r.names.push_back("const");
  r.names.insert(r.names.end(), names.begin(), names.end());
  r.coefficients.push_back(intercept);
  for (Eigen::Index j = 0; j < p; ++j) r.coefficients.push_back(slopes(j));

  const Eigen::VectorXd u = (y - X * slopes).array() - intercept;
  r.residuals.assign(u.data(), u.data() + n);
  const double rss = u.squaredNorm();
  const double tss = yc.squaredNorm();

  // (Xc'Xc)^-1 from the scaled QR factor, then the full inverse of [1 X]'[1 X] by blocks.
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd R_inv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd perm = qr.colsPermutation();
  Eigen::MatrixXd A = perm * (R_inv * R_inv.transpose()) * perm.transpose();
  A = scale.asDiagonal().inverse() * A * scale.asDiagonal().inverse();
  Eigen::MatrixXd bread(k, k);
  const Eigen::VectorXd Ax = A * x_mean.transpose();
  bread(0, 0) = 1.0 / static_cast<double>(n) + x_mean.dot(Ax);
  bread.block(1, 0, p, 1) = -Ax;
  bread.block(0, 1, 1, p) = -Ax.transpose();
  bread.block(1, 1, p, p) = A;

  Eigen::MatrixXd cov(k, k);
  if (!hac_lags) {
    cov = bread * (rss / static_cast<double>(n - k));
  } else {
    Eigen::MatrixXd G(n, k);  // rows u_t * [1, x_t]
    G.col(0) = u;
    G.rightCols(p) = X.array().colwise() * u.array();
    Eigen::MatrixXd meat = G.transpose() * G;
    const int L = *hac_lags;
    for (int l = 1; l <= L && l < n; ++l) {
      const double w = 1.0 - static_cast<double>(l) / static_cast<double>(L + 1);
      const Eigen::MatrixXd gamma = G.bottomRows(n - l).transpose() * G.topRows(n - l);
      meat += w * (gamma + gamma.transpose());
    }
    cov = bread * meat * bread;
    r.hac = true;
    r.hac_lags = L;
  }

  const auto dof = static_cast<double>(n - k);
  boost::math::students_t tdist(dof);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double se = std::sqrt(std::max(cov(j, j), 0.0));
    const double t = r.coefficients[static_cast<std::size_t>(j)] / se;
    r.std_errors.push_back(se);
    r.t_stats.push_back(t);
    r.p_values.push_back(std::isfinite(t) ? 2.0 * boost::math::cdf(boost::math::complement(tdist, std::abs(t)))
                                          : (std::isnan(t) ? kNaN : 0.0));
  }

  r.r2 = tss > 0.0 ? 1.0 - rss / tss : 0.0;
  r.adj_r2 = 1.0 - (1.0 - r.r2) * static_cast<double>(n - 1) / dof;
  if (p > 0 && r.r2 < 1.0) {
    r.f_stat = (r.r2 / static_cast<double>(p)) / ((1.0 - r.r2) / dof);
    boost::math::fisher_f fdist(static_cast<double>(p), dof);
    r.f_p_value = boost::math::cdf(boost::math::complement(fdist, std::max(r.f_stat, 0.0)));
  } else {
    r.f_stat = p > 0 ? std::numeric_limits<double>::infinity() : 0.0;
    r.f_p_value = p > 0 ? 0.0 : 1.0;
  }
  const double nd = static_cast<double>(n);
  const double loglik = -0.5 * nd * (std::log(2.0 * std::numbers::pi) + std::log(rss / nd) + 1.0);
  r.aic = -2.0 * loglik + 2.0 * static_cast<double>(k);
  r.bic = -2.0 * loglik + static_cast<double>(k) * std::log(nd);
  r.mse = rss / nd;
  r.mae = u.cwiseAbs().mean();
  return r;
}

// ---------------------------------------------------------------------------

PanelData build_panel(std::span<const CoiVector> cois, const ReturnPanel& returns, FactorTable factors) {
  PanelData panel;
  panel.calendar = returns.days();
  panel.factors = std::move(factors);
  std::set<std::pair<SymbolId, Day>> seen;
  for (const auto& v : cois) {
    const auto d = returns.day_index(v.day);
    if (!d || static_cast<std::size_t>(v.symbol_id) >= returns.n_symbols()) continue;
    const auto& cell = returns.at(v.symbol_id, *d);
    if (!cell.present) continue;
    if (!seen.emplace(v.symbol_id, v.day).second) {
      throw DataError("duplicate COI row for symbol id " + std::to_string(v.symbol_id) + " on " + format_day(v.day));
    }
    panel.rows.push_back({v.symbol_id, v.day, v.values, cell.excess, cell.rv, cell.dvol});
  }
  std::sort(panel.rows.begin(), panel.rows.end(), [](const PanelObservation& a, const PanelObservation& b) {
    return std::pair{a.symbol_id, a.day} < std::pair{b.symbol_id, b.day};
  });
  return panel;
}

std::vector<std::string> design_columns(const DesignSpec& spec) {
  std::vector<std::string> cols;
  for (auto t : spec.coi_types) cols.push_back("coi_" + std::string(type_name(t)));
  if (spec.response == Response::LeadExcess || spec.controls.lag_return) cols.push_back("lag_ret");
  if (spec.controls.rv) cols.push_back("rv");
  if (spec.controls.dvol) cols.push_back("dvol");
  if (spec.controls.factors6) {
    for (const char* f : {"mkt", "smb", "hml", "rmw", "cma", "mom"}) cols.push_back(f);
  }
  return cols;
}

Design build_design(const PanelData& panel, const DesignSpec& spec, std::optional<SymbolId> symbol,
                    std::optional<int> year) {
  const bool lead = spec.response == Response::LeadExcess;
  const bool lag_col = lead || spec.controls.lag_return;
  Design d;
  d.names = design_columns(spec);
  const auto p = static_cast<Eigen::Index>(d.names.size());

  // Hand-built panels may arrive unsorted; order a view by (symbol, day).
  std::vector<const PanelObservation*> rows;
  rows.reserve(panel.rows.size());
  for (const auto& o : panel.rows) rows.push_back(&o);
  const auto key = [](const PanelObservation* o) { return std::pair{o->symbol_id, o->day}; };
  if (!std::is_sorted(rows.begin(), rows.end(), [&](auto* a, auto* b) { return key(a) < key(b); }))
    std::stable_sort(rows.begin(), rows.end(), [&](auto* a, auto* b) { return key(a) < key(b); });

  const auto find_row = [&](SymbolId s, Day day) -> const PanelObservation* {
    const auto it = std::lower_bound(rows.begin(), rows.end(), std::pair{s, day},
                                     [&](const PanelObservation* o, const std::pair<SymbolId, Day>& k) { return key(o) < k; });
    if (it == rows.end() || (*it)->symbol_id != s || (*it)->day != day) return nullptr;
    return *it;
  };
  const auto next_day = [&](Day day) -> std::optional<Day> {
    const auto it = std::upper_bound(panel.calendar.begin(), panel.calendar.end(), day);
    if (it == panel.calendar.end()) return std::nullopt;
    return *it;
  };

  std::vector<std::pair<const PanelObservation*, double>> picked;  // (regressor row, response)
  for (const auto* row : rows) {
    const auto& o = *row;
    if (symbol && o.symbol_id != *symbol) continue;
    if (year && o.day.year() != *year) continue;
    if (spec.from && o.day < *spec.from) continue;
    if (spec.to && o.day > *spec.to) continue;
    if (lead) {
      const auto nd = next_day(o.day);
      if (!nd) continue;
      const auto* next = find_row(o.symbol_id, *nd);
      if (!next) continue;
      picked.emplace_back(&o, next->excess);
    } else {
      picked.emplace_back(&o, o.excess);
    }
  }

  const auto n = static_cast<Eigen::Index>(picked.size());
  d.X.resize(n, p);
  d.y.resize(n);
  d.keys.reserve(picked.size());
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& [o, response] = picked[static_cast<std::size_t>(r)];
    Eigen::Index c = 0;
    for (auto t : spec.coi_types) d.X(r, c++) = o->coi[index_of(t)];
    if (lag_col) d.X(r, c++) = o->excess;
    if (spec.controls.rv) d.X(r, c++) = o->rv;
    if (spec.controls.dvol) d.X(r, c++) = o->dvol;
    if (spec.controls.factors6) {
      const auto& f = panel.factors.at(o->day);
      for (double v : {f.mkt, f.smb, f.hml, f.rmw, f.cma, f.mom}) d.X(r, c++) = v;
    }
    d.y(r) = response;
    d.keys.emplace_back(o->symbol_id, o->day);
  }
  return d;
}

RegressionResult run_contemporaneous(const PanelData& panel, const DesignSpec& spec) {
  DesignSpec s = spec;
  s.response = Response::ContemporaneousExcess;
  const auto d = build_design(panel, s);
  return ols_fit(d.X, d.y, d.names);
}

RegressionResult run_predictive(const PanelData& panel, const DesignSpec& spec) {
  DesignSpec s = spec;
  s.response = Response::LeadExcess;
  const auto d = build_design(panel, s);
  if (d.y.size() == 0) throw DataError("predictive regression: no observation has a next-day return");
  return ols_fit(d.X, d.y, d.names);
}

namespace {

RegressionResult fit_design(const Design& d) { return ols_fit(d.X, d.y, d.names); }

}  // namespace

std::vector<PeriodResult> run_subperiods(const PanelData& panel, const DesignSpec& spec) {
  std::set<int> years;
  for (const auto& o : panel.rows) {
    if (spec.from && o.day < *spec.from) continue;
    if (spec.to && o.day > *spec.to) continue;
    years.insert(o.day.year());
  }
  std::vector<PeriodResult> out;
  for (int y : years) {
    PeriodResult pr;
    pr.year = y;
    try {
      const auto d = build_design(panel, spec, std::nullopt, y);
      pr.result = fit_design(d);
    } catch (const DataError& e) {
      pr.note = e.what();
    } catch (const NumericalError& e) {
      pr.note = e.what();
    }
    out.push_back(std::move(pr));
  }
  return out;
}

PerSymbolRun run_per_symbol(const PanelData& panel, const DesignSpec& spec, std::size_t min_obs,
                            std::size_t histogram_bins) {
  std::set<SymbolId> symbols;
  for (const auto& o : panel.rows) symbols.insert(o.symbol_id);
  PerSymbolRun out;
  for (auto s : symbols) {
    const auto d = build_design(panel, spec, s);
    if (static_cast<std::size_t>(d.y.size()) < min_obs) {
      out.excluded.push_back(s);
      continue;
    }
    try {
      out.fits.emplace_back(s, fit_design(d));
    } catch (const DataError&) {
      out.excluded.push_back(s);
    } catch (const NumericalError&) {
      out.excluded.push_back(s);
    }
  }
  if (out.fits.empty()) return out;

  const auto& names = out.fits.front().second.names;
  const double m = static_cast<double>(out.fits.size());
  for (std::size_t j = 0; j < names.size(); ++j) {
    CoefficientSummary cs;
    cs.name = names[j];
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& [s, r] : out.fits) {
      const double b = r.coefficients[j];
      cs.mean += b / m;
      cs.pct_positive += (b > 0 ? 100.0 : 0.0) / m;
      cs.pct_significant += (r.p_values[j] < 0.05 ? 100.0 : 0.0) / m;
      lo = std::min(lo, b);
      hi = std::max(hi, b);
    }
    cs.hist_lo = lo;
    cs.hist_hi = hi;
    cs.histogram.assign(std::max<std::size_t>(histogram_bins, 1), 0);
    for (const auto& [s, r] : out.fits) {
      const double b = r.coefficients[j];
      std::size_t bin = 0;
      if (hi > lo) {
        bin = static_cast<std::size_t>((b - lo) / (hi - lo) * static_cast<double>(cs.histogram.size()));
        bin = std::min(bin, cs.histogram.size() - 1);
      }
      ++cs.histogram[bin];
    }
    out.summary.push_back(std::move(cs));
  }
  for (const auto& [s, r] : out.fits) out.mean_adj_r2 += r.adj_r2 / m;
  return out;
}

RegressionResult alpha_regression(std::span<const DatedValue> portfolio, const FactorTable& factors,
                                  std::span<const DatedValue> umd, std::optional<int> hac_lags) {
  std::map<Day, double> umd_by_day;
  for (const auto& u : umd) umd_by_day[u.day] = u.value;
  const auto n = static_cast<Eigen::Index>(portfolio.size());
  Eigen::MatrixXd X(n, 7);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& obs = portfolio[static_cast<std::size_t>(i)];
    const auto& f = factors.at(obs.day);
    const auto it = umd_by_day.find(obs.day);
    if (it == umd_by_day.end()) throw DataError("no UMD value for " + format_day(obs.day));
    X.row(i) << f.mkt, f.smb, f.hml, f.rmw, f.cma, f.mom, it->second;
    y(i) = obs.value - f.rf;
  }
  const int lags = hac_lags ? *hac_lags : newey_west_auto_lags(portfolio.size());
  return ols_fit(X, y, {"mkt", "smb", "hml", "rmw", "cma", "mom", "umd"}, lags);
}

}  // namespace cooc
