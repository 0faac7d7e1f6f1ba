#pragma once

#include "lprisk/ingest.hpp"
#include "lprisk/metrics.hpp"

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lprisk {

class EconometricsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Series transforms

enum class TransformKind { Level, FirstDiff, PctChange, ZScore };

struct TransformChain {
    std::vector<TransformKind> steps;  // applied left to right

    static TransformChain level() { return {}; }
    static TransformChain of(TransformKind k) { return {{k}}; }
};

// Missing-aware daily series, aligned to a panel's date axis by index.
using Series = std::vector<std::optional<double>>;

// pct_change_t = (x_t - x_{t-1}) / x_{t-1}, defined only where the prior
// value is > 0; first_diff_t = x_t - x_{t-1}; both leave row 0 missing.
// zscore standardizes over the non-missing sample and throws (naming the
// variable) when that sample is constant. Missing in, missing out.
Series transform_series(const Series& values, const TransformChain& chain,
                        const std::string& name);

// ---------------------------------------------------------------------------
// Event dummies

int dummy_v2(Day date);  // 1 iff date >= 2020-12-03
int dummy_v3(Day date);  // 1 iff date >= 2022-08-25

// 1 iff some hack date h satisfies date-6 <= h <= date: the hack day plus
// the following six days.
int dummy_hack(Day date, std::span<const Day> hack_dates);

// ---------------------------------------------------------------------------
// OLS

struct OlsFit {
    Eigen::VectorXd beta;
    Eigen::VectorXd std_errors;
    Eigen::VectorXd t_stats;
    Eigen::VectorXd residuals;
    std::size_t n = 0;
    double r_squared = 0;
    double adj_r_squared = 0;
};

// Plain OLS with homoskedastic standard errors. X must already contain the
// intercept column. Throws on n <= k and on rank deficiency (naming a
// dependent column via `names`, which parallels X's columns).
OlsFit ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
               std::span<const std::string> names);

// Two-sided normal-approximation significance stars: * 10%, ** 5%, *** 1%.
std::string significance_stars(double t_stat);

// ---------------------------------------------------------------------------
// Model specs

struct TermSpec {
    std::string label;   // as printed in tables, e.g. "Δ Outstanding loan"
    std::string column;  // merged-panel column name
    TransformChain transform;
};

enum class DummyKind { AaveV2, CompoundV3, Hack };

struct DummySpec {
    std::string label;
    DummyKind kind;
};

struct RegressionSpec {
    std::string suite;  // eq10..eq17
    TermSpec dependent;
    TermSpec risk;
    std::vector<DummySpec> dummies;
    std::vector<TermSpec> controls;
    bool standardize = true;
};

struct FittedTerm {
    std::string label;
    double coefficient = 0;
    double t_statistic = 0;
};

struct ModelFit {
    std::vector<FittedTerm> terms;  // risk, dummies, controls — in spec order
    FittedTerm intercept;
    std::size_t n_obs = 0;
    double r_squared = 0;
    double adj_r_squared = 0;
    std::size_t rows_dropped = 0;                       // listwise deletion audit
    std::map<std::string, std::size_t> missing_by_term;
};

// ---------------------------------------------------------------------------
// Panels

struct MergedPanel {
    std::vector<Day> dates;  // strictly increasing
    std::map<std::string, Series> columns;

    const Series& column(const std::string& name) const;
};

MergedPanel merge_panels(std::span<const DailyPanelRow> metrics,
                         std::span<const FactorPanelRow> factors);

// Applies transforms, z-scores dependent and non-dummy regressors over the
// estimation sample when spec.standardize (dummies stay 0/1), listwise-deletes
// rows with any missing value, and fits OLS. hack_dates feeds DummyKind::Hack.
ModelFit run_model(const MergedPanel& panel, const RegressionSpec& spec,
                   std::span<const Day> hack_dates = {});

// ---------------------------------------------------------------------------
// Preset suites (the paper's eight model families)

// The Δ convention is a per-column choice: relative change for value series,
// absolute change for count series. Overridable via delta-map files.
using DeltaMap = std::map<std::string, TransformKind>;
DeltaMap default_delta_map();

struct SuiteSpec {
    std::string id;     // "eq10".."eq17"
    std::string title;  // e.g. "Aave baseline"
    std::vector<TermSpec> risks;       // the four risk measurements
    std::vector<DummySpec> dummies;    // 0..2
    std::vector<TermSpec> controls;
    std::vector<TermSpec> dependents;  // the six protocol outcomes
    bool mainstream_subset = false;    // eq16/eq17: panel should be the 16-asset subset
};

std::vector<SuiteSpec> preset_suites(const DeltaMap& dm = default_delta_map());

// Catalog lookup; nullopt for unknown ids.
std::optional<SuiteSpec> find_suite(const std::string& id, const DeltaMap& dm = default_delta_map());

// All 24 concrete fits for one suite (4 risks x 6 dependents), risk-major.
std::vector<RegressionSpec> expand_suite(const SuiteSpec& suite, bool standardize = true);

}  // namespace lprisk
