#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cooc/coi.hpp"
#include "cooc/market_data.hpp"
#include "cooc/types.hpp"

namespace cooc {

struct RegressionResult {
  std::vector<std::string> names;  // "const" first
  std::vector<double> coefficients;
  std::vector<double> std_errors;
  std::vector<double> t_stats;
  std::vector<double> p_values;  // two-tailed, Student t with n - k dof
  double r2 = 0.0;
  double adj_r2 = 0.0;
  double f_stat = 0.0;
  double f_p_value = 0.0;
  double aic = 0.0;  // Gaussian log-likelihood based
  double bic = 0.0;
  double mse = 0.0;
  double mae = 0.0;
  std::size_t n_obs = 0;
  std::size_t n_params = 0;
  bool hac = false;
  int hac_lags = 0;
  std::vector<double> residuals;

  std::optional<std::size_t> find(std::string_view name) const;
  double coef(std::string_view name) const;
  double t(std::string_view name) const;
  double p(std::string_view name) const;
  double se(std::string_view name) const;
};

/// "***", "**", "*" at two-tailed 1/5/10%, otherwise "".
std::string significance_stars(double p_value);

/// floor(4 (n / 100)^(2/9)).
int newey_west_auto_lags(std::size_t n);

/// Least squares of y on an intercept plus the columns of X (X must not contain an
/// intercept column). Slopes are solved on the mean-centered design. Without
/// `hac_lags` the covariance is classical; with it, Newey-West with Bartlett weights
/// over that many lags (0 gives White's HC0). Throws NumericalError naming the
/// collinear columns when the design is rank deficient and DataError when
/// n_obs <= n_params.
RegressionResult ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<std::string>& names,
                         std::optional<int> hac_lags = std::nullopt);

// ---------------------------------------------------------------------------
// Panel regressions
// ---------------------------------------------------------------------------

struct PanelObservation {
  SymbolId symbol_id = 0;
  Day day;
  std::array<double, kCoiTypeCount> coi{};
  double excess = 0.0;
  double rv = 0.0;
  double dvol = 0.0;
};

/// (symbol, day) rows with both a COI vector and a return, sorted by (symbol, day),
/// plus the trading calendar used to find next-day returns.
struct PanelData {
  std::vector<PanelObservation> rows;
  std::vector<Day> calendar;
  FactorTable factors;
};

PanelData build_panel(std::span<const CoiVector> cois, const ReturnPanel& returns, FactorTable factors);

enum class Response { ContemporaneousExcess, LeadExcess };

struct Controls {
  bool lag_return = false;  // always on for LeadExcess
  bool rv = true;
  bool dvol = true;
  bool factors6 = true;
};

struct DesignSpec {
  std::string label;
  Response response = Response::ContemporaneousExcess;
  std::vector<CoiType> coi_types;
  Controls controls;
  std::optional<Day> from;  // inclusive, on the regressor day
  std::optional<Day> to;    // inclusive
};

/// Regressor column names of a spec, without "const".
std::vector<std::string> design_columns(const DesignSpec& spec);

struct Design {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> names;
  std::vector<std::pair<SymbolId, Day>> keys;  // regressor (symbol, day) per row
};

/// Rows follow (symbol, day) order whatever the input order. `symbol` restricts to one
/// symbol; `year` restricts to one calendar year of the regressor day.
Design build_design(const PanelData& panel, const DesignSpec& spec, std::optional<SymbolId> symbol = std::nullopt,
                    std::optional<int> year = std::nullopt);

/// Pooled OLS of same-day excess returns, classical errors.
RegressionResult run_contemporaneous(const PanelData& panel, const DesignSpec& spec);
/// Pooled OLS of next-trading-day excess returns on day-t regressors; lag return always
/// included. Throws DataError when no observation has a lead return.
RegressionResult run_predictive(const PanelData& panel, const DesignSpec& spec);

struct PeriodResult {
  int year = 0;
  std::optional<RegressionResult> result;  // absent when the period cannot be fitted
  std::string note;
};

std::vector<PeriodResult> run_subperiods(const PanelData& panel, const DesignSpec& spec);

struct CoefficientSummary {
  std::string name;
  double mean = 0.0;
  double pct_positive = 0.0;
  double pct_significant = 0.0;  // two-tailed 5%
  double hist_lo = 0.0;
  double hist_hi = 0.0;
  std::vector<std::size_t> histogram;
};

struct PerSymbolRun {
  std::vector<std::pair<SymbolId, RegressionResult>> fits;  // sorted by symbol
  std::vector<SymbolId> excluded;                           // below the observation floor or unfittable
  std::vector<CoefficientSummary> summary;                  // one per coefficient, "const" included
  double mean_adj_r2 = 0.0;
};

PerSymbolRun run_per_symbol(const PanelData& panel, const DesignSpec& spec, std::size_t min_obs = 30,
                            std::size_t histogram_bins = 20);

/// Time-series regression of (portfolio return - RF) on MKT, SMB, HML, RMW, CMA, MOM
/// and UMD with Newey-West errors. `hac_lags` nullopt selects the automatic bandwidth.
/// Throws DataError when a portfolio day has no factor or UMD value.
RegressionResult alpha_regression(std::span<const DatedValue> portfolio, const FactorTable& factors,
                                  std::span<const DatedValue> umd, std::optional<int> hac_lags = std::nullopt);

}  // namespace cooc
