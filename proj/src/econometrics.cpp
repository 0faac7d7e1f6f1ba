#include "lprisk/econometrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace lprisk {

Series transform_series(const Series& values, const TransformChain& chain,
                        const std::string& name) {
    Series cur = values;
    for (TransformKind step : chain.steps) {
        Series next(cur.size());
        switch (step) {
            case TransformKind::Level:
                next = cur;
                break;
            case TransformKind::FirstDiff:
                for (std::size_t i = 1; i < cur.size(); ++i) {
                    if (cur[i] && cur[i - 1]) next[i] = *cur[i] - *cur[i - 1];
                }
                break;
            case TransformKind::PctChange:
                for (std::size_t i = 1; i < cur.size(); ++i) {
                    if (cur[i] && cur[i - 1] && *cur[i - 1] > 0) {
                        next[i] = (*cur[i] - *cur[i - 1]) / *cur[i - 1];
                    }
                }
                break;
            case TransformKind::ZScore: {
                double sum = 0;
                std::size_t n = 0;
                for (const auto& v : cur) {
                    if (v) {
                        sum += *v;
                        ++n;
                    }
                }
                if (n == 0) break;
                const double mean = sum / static_cast<double>(n);
                double ss = 0;
                for (const auto& v : cur) {
                    if (v) ss += (*v - mean) * (*v - mean);
                }
                const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
                if (sd == 0.0) {
                    throw EconometricsError("zscore of constant series '" + name + "'");
                }
                for (std::size_t i = 0; i < cur.size(); ++i) {
                    if (cur[i]) next[i] = (*cur[i] - mean) / sd;
                }
                break;
            }
        }
        cur = std::move(next);
    }
    return cur;
}

namespace {

Day civil_day(int y, unsigned m, unsigned d) { return days_from_civil({y, m, d}); }

}  // namespace

int dummy_v2(Day date) {
    static const Day v2_launch = civil_day(2020, 12, 3);
    return date >= v2_launch ? 1 : 0;
}

int dummy_v3(Day date) {
    static const Day v3_launch = civil_day(2022, 8, 25);
    return date >= v3_launch ? 1 : 0;
}

int dummy_hack(Day date, std::span<const Day> hack_dates) {
    for (Day h : hack_dates) {
        if (h <= date && date <= h + 6) return 1;
    }
    return 0;
}

OlsFit ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
               std::span<const std::string> names) {
    const auto n = X.rows();
    const auto k = X.cols();
    if (y.rows() != n) throw EconometricsError("design and response row counts differ");
    if (n <= k) {
        throw EconometricsError("not enough observations: n=" + std::to_string(n) +
                                " <= k=" + std::to_string(k));
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < k) {
        const auto& perm = qr.colsPermutation().indices();
        const Eigen::Index offender = perm[k - 1];  // a column in the dependent tail
        std::string name = offender < static_cast<Eigen::Index>(names.size())
                               ? names[static_cast<std::size_t>(offender)]
                               : "column " + std::to_string(offender);
        throw EconometricsError("design matrix is rank deficient; column '" + name +
                                "' is linearly dependent");
    }

    OlsFit fit;
    fit.n = static_cast<std::size_t>(n);
    fit.beta = qr.solve(y);
    fit.residuals = y - X * fit.beta;
    const double rss = fit.residuals.squaredNorm();
    const double s2 = rss / static_cast<double>(n - k);

    // (X'X)^-1 = P R^-1 R^-T P' from the pivoted factorization X P = Q R.
    const Eigen::MatrixXd r =
        qr.matrixR().topLeftCorner(k, k).template triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv =
        r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    const Eigen::MatrixXd xtx_inv_permuted = r_inv * r_inv.transpose();
    const auto& perm = qr.colsPermutation();
    const Eigen::MatrixXd xtx_inv = perm * xtx_inv_permuted * perm.transpose();

    fit.std_errors.resize(k);
    fit.t_stats.resize(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        fit.std_errors[j] = std::sqrt(s2 * xtx_inv(j, j));
        fit.t_stats[j] = fit.beta[j] / fit.std_errors[j];
    }

    const double tss = (y.array() - y.mean()).square().sum();
    fit.r_squared = tss > 0 ? 1.0 - rss / tss : (rss == 0.0 ? 1.0 : 0.0);
    fit.adj_r_squared = 1.0 - (1.0 - fit.r_squared) * static_cast<double>(n - 1) /
                                  static_cast<double>(n - k);
    return fit;
}

std::string significance_stars(double t_stat) {
    const double a = std::abs(t_stat);
    if (a > 2.5758293035489004) return "***";  // 1%
    if (a > 1.959963984540054) return "**";    // 5%
    if (a > 1.6448536269514722) return "*";    // 10%
    return "";
}

const Series& MergedPanel::column(const std::string& name) const {
    auto it = columns.find(name);
    if (it == columns.end()) {
        throw EconometricsError("unknown panel column '" + name + "'");
    }
    return it->second;
}

MergedPanel merge_panels(std::span<const DailyPanelRow> metrics,
                         std::span<const FactorPanelRow> factors) {
    MergedPanel panel;
    std::set<Day> dates;
    for (const auto& r : metrics) dates.insert(r.date);
    for (const auto& r : factors) dates.insert(r.date);
    panel.dates.assign(dates.begin(), dates.end());

    std::map<Day, std::size_t> index;
    for (std::size_t i = 0; i < panel.dates.size(); ++i) index[panel.dates[i]] = i;
    const std::size_t n = panel.dates.size();

    auto col = [&](const char* name) -> Series& {
        return panel.columns.emplace(name, Series(n)).first->second;
    };

    auto& liquidity = col("liquidity_usd");
    auto& utilization = col("utilization");
    auto& rep_dep = col("repeat_deposit_ratio");
    auto& rep_loan = col("repeat_loan_ratio");
    auto& borrower = col("borrower");
    auto& loan_vol = col("loan_vol_usd");
    auto& loan_cnt = col("loan_cnt");
    auto& new_borrower = col("new_borrower");
    auto& avg_loan = col("avg_loan_usd");
    auto& out_loan = col("outstanding_loan_usd");
    auto& liq_usd = col("liquidation_usd");
    auto& depositor = col("depositor");
    auto& dep_vol = col("deposit_vol_usd");
    auto& dep_cnt = col("deposit_cnt");
    auto& new_depositor = col("new_depositor");
    auto& avg_dep = col("avg_deposit_usd");
    auto& out_dep = col("outstanding_deposit_usd");

    for (const auto& r : metrics) {
        const std::size_t i = index[r.date];
        liquidity[i] = r.liquidity_usd.to_double();
        utilization[i] = r.utilization;
        rep_dep[i] = r.repeat_deposit_ratio;
        rep_loan[i] = r.repeat_loan_ratio;
        borrower[i] = static_cast<double>(r.borrower);
        loan_vol[i] = r.loan_vol_usd.to_double();
        loan_cnt[i] = static_cast<double>(r.loan_cnt);
        new_borrower[i] = static_cast<double>(r.new_borrower);
        avg_loan[i] = r.avg_loan_usd;
        out_loan[i] = r.outstanding_loan_usd.to_double();
        liq_usd[i] = r.liquidation_usd.to_double();
        depositor[i] = static_cast<double>(r.depositor);
        dep_vol[i] = r.deposit_vol_usd.to_double();
        dep_cnt[i] = static_cast<double>(r.deposit_cnt);
        new_depositor[i] = static_cast<double>(r.new_depositor);
        avg_dep[i] = r.avg_deposit_usd;
        out_dep[i] = r.outstanding_deposit_usd.to_double();
    }

    auto& mktc_f = col("mktc_f");
    auto& mktc_c = col("mktc_c");
    auto& token_price = col("token_price_usd");
    auto& tvl = col("tvl_usd");
    auto& revenue = col("revenue_usd");
    auto& holders = col("holder_count");
    auto& active = col("active_users");
    auto& devs = col("developers");

    for (const auto& r : factors) {
        const std::size_t i = index[r.date];
        mktc_f[i] = r.mktc_f;
        mktc_c[i] = r.mktc_c;
        token_price[i] = r.token_price_usd;
        tvl[i] = r.tvl_usd;
        revenue[i] = r.revenue_usd;
        if (r.holder_count) holders[i] = static_cast<double>(*r.holder_count);
        if (r.active_users) active[i] = static_cast<double>(*r.active_users);
        if (r.developers) devs[i] = static_cast<double>(*r.developers);
    }
    return panel;
}

namespace {

Series zscore_over_sample(const Series& values, const std::vector<std::size_t>& rows,
                          const std::string& name) {
    double sum = 0;
    for (std::size_t i : rows) sum += *values[i];
    const double mean = sum / static_cast<double>(rows.size());
    double ss = 0;
    for (std::size_t i : rows) ss += (*values[i] - mean) * (*values[i] - mean);
    const double sd =
        rows.size() > 1 ? std::sqrt(ss / static_cast<double>(rows.size() - 1)) : 0.0;
    if (sd == 0.0) {
        throw EconometricsError("zscore of constant series '" + name + "'");
    }
    Series out(values.size());
    for (std::size_t i : rows) out[i] = (*values[i] - mean) / sd;
    return out;
}

}  // namespace

ModelFit run_model(const MergedPanel& panel, const RegressionSpec& spec,
                   std::span<const Day> hack_dates) {
    const std::size_t n_rows = panel.dates.size();

    struct Prepared {
        std::string label;
        Series values;
        bool is_dummy = false;
    };
    std::vector<Prepared> regressors;

    Series dependent =
        transform_series(panel.column(spec.dependent.column), spec.dependent.transform,
                         spec.dependent.label);

    regressors.push_back(
        {spec.risk.label,
         transform_series(panel.column(spec.risk.column), spec.risk.transform, spec.risk.label),
         false});
    for (const DummySpec& d : spec.dummies) {
        Series s(n_rows);
        for (std::size_t i = 0; i < n_rows; ++i) {
            switch (d.kind) {
                case DummyKind::AaveV2: s[i] = dummy_v2(panel.dates[i]); break;
                case DummyKind::CompoundV3: s[i] = dummy_v3(panel.dates[i]); break;
                case DummyKind::Hack: s[i] = dummy_hack(panel.dates[i], hack_dates); break;
            }
        }
        regressors.push_back({d.label, std::move(s), true});
    }
    for (const TermSpec& c : spec.controls) {
        regressors.push_back(
            {c.label, transform_series(panel.column(c.column), c.transform, c.label), false});
    }

    // Listwise deletion with a per-term audit of what went missing.
    ModelFit fit;
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n_rows; ++i) {
        bool complete = true;
        if (!dependent[i]) {
            ++fit.missing_by_term[spec.dependent.label];
            complete = false;
        }
        for (const Prepared& p : regressors) {
            if (!p.values[i]) {
                ++fit.missing_by_term[p.label];
                complete = false;
            }
        }
        if (complete) rows.push_back(i);
    }
    fit.rows_dropped = n_rows - rows.size();

    const std::size_t k = regressors.size() + 1;  // + intercept
    if (rows.size() <= k) {
        std::ostringstream os;
        os << "too few observations after listwise deletion: kept " << rows.size() << " of "
           << n_rows << " rows for " << k << " coefficients (dropped " << fit.rows_dropped
           << ";";
        for (const auto& [term, cnt] : fit.missing_by_term) {
            os << " " << term << " missing " << cnt << ",";
        }
        std::string msg = os.str();
        msg.back() = ')';
        throw EconometricsError(msg);
    }

    Series dep_final = dependent;
    std::vector<Series> reg_final(regressors.size());
    for (std::size_t j = 0; j < regressors.size(); ++j) reg_final[j] = regressors[j].values;
    if (spec.standardize) {
        dep_final = zscore_over_sample(dependent, rows, spec.dependent.label);
        for (std::size_t j = 0; j < regressors.size(); ++j) {
            if (!regressors[j].is_dummy) {
                reg_final[j] = zscore_over_sample(regressors[j].values, rows, regressors[j].label);
            }
        }
    }

    Eigen::MatrixXd X(rows.size(), k);
    Eigen::VectorXd y(rows.size());
    std::vector<std::string> names;
    names.emplace_back("intercept");
    for (const Prepared& p : regressors) names.push_back(p.label);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        y[static_cast<Eigen::Index>(r)] = *dep_final[rows[r]];
        X(static_cast<Eigen::Index>(r), 0) = 1.0;
        for (std::size_t j = 0; j < reg_final.size(); ++j) {
            X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j + 1)) =
                *reg_final[j][rows[r]];
        }
    }

    const OlsFit ols = ols_fit(X, y, names);
    fit.intercept = {"intercept", ols.beta[0], ols.t_stats[0]};
    for (std::size_t j = 0; j < regressors.size(); ++j) {
        fit.terms.push_back({regressors[j].label, ols.beta[static_cast<Eigen::Index>(j + 1)],
                             ols.t_stats[static_cast<Eigen::Index>(j + 1)]});
    }
    fit.n_obs = ols.n;
    fit.r_squared = ols.r_squared;
    fit.adj_r_squared = ols.adj_r_squared;
    return fit;
}

// ---------------------------------------------------------------------------
// Preset suites

DeltaMap default_delta_map() {
    // Relative change for value series, absolute change for count series.
    return {
        {"mktc_f", TransformKind::PctChange},
        {"mktc_c", TransformKind::PctChange},
        {"token_price_usd", TransformKind::PctChange},
        {"tvl_usd", TransformKind::PctChange},
        {"revenue_usd", TransformKind::PctChange},
        {"outstanding_loan_usd", TransformKind::PctChange},
        {"outstanding_deposit_usd", TransformKind::PctChange},
        {"holder_count", TransformKind::FirstDiff},
        {"active_users", TransformKind::FirstDiff},
        {"developers", TransformKind::FirstDiff},
    };
}

namespace {

TransformKind delta_for(const DeltaMap& dm, const std::string& column) {
    auto it = dm.find(column);
    if (it == dm.end()) {
        throw EconometricsError("no delta rule for column '" + column + "'");
    }
    return it->second;
}

TermSpec level_term(std::string label, std::string column) {
    return {std::move(label), std::move(column), TransformChain::level()};
}

TermSpec delta_term(const DeltaMap& dm, std::string label, std::string column) {
    TransformChain chain = TransformChain::of(delta_for(dm, column));
    return {"Δ " + std::move(label), std::move(column), std::move(chain)};
}

std::vector<TermSpec> risk_terms() {
    return {
        level_term("Liquidity", "liquidity_usd"),
        level_term("Utilization", "utilization"),
        level_term("Repeat deposit ratio", "repeat_deposit_ratio"),
        level_term("Repeat loan ratio", "repeat_loan_ratio"),
    };
}

std::vector<TermSpec> aave_controls(const DeltaMap& dm) {
    return {
        delta_term(dm, "Outstanding loan", "outstanding_loan_usd"),
        delta_term(dm, "Outstanding deposit", "outstanding_deposit_usd"),
        level_term("Deposit vol usd", "deposit_vol_usd"),
        level_term("Loan vol usd", "loan_vol_usd"),
        level_term("Liquidation usd", "liquidation_usd"),
        delta_term(dm, "Active user", "active_users"),
        delta_term(dm, "Developer", "developers"),
    };
}

// The cross-protocol family drops deposit volume and takes active users in
// level, exactly as the second baseline model is written.
std::vector<TermSpec> compound_controls(const DeltaMap& dm) {
    return {
        delta_term(dm, "Outstanding loan", "outstanding_loan_usd"),
        delta_term(dm, "Outstanding deposit", "outstanding_deposit_usd"),
        level_term("Loan vol usd", "loan_vol_usd"),
        level_term("Liquidation usd", "liquidation_usd"),
        level_term("Active user", "active_users"),
        delta_term(dm, "Developer", "developers"),
    };
}

std::vector<TermSpec> aave_dependents(const DeltaMap& dm) {
    return {
        delta_term(dm, "MktC_F", "mktc_f"),
        delta_term(dm, "MktC_C", "mktc_c"),
        level_term("Revenue", "revenue_usd"),  // level here, Δ on the Compound side
        delta_term(dm, "TVL", "tvl_usd"),
        delta_term(dm, "AAVE", "token_price_usd"),
        delta_term(dm, "AAVE holder", "holder_count"),
    };
}

std::vector<TermSpec> compound_dependents(const DeltaMap& dm) {
    return {
        delta_term(dm, "MktC_F", "mktc_f"),
        delta_term(dm, "MktC_C", "mktc_c"),
        delta_term(dm, "Revenue", "revenue_usd"),
        delta_term(dm, "TVL", "tvl_usd"),
        delta_term(dm, "COMP", "token_price_usd"),
        delta_term(dm, "COMP holder", "holder_count"),
    };
}

const DummySpec kV2{"V2", DummyKind::AaveV2};
const DummySpec kV3{"V3", DummyKind::CompoundV3};
const DummySpec kHack{"Hack", DummyKind::Hack};

}  // namespace

std::vector<SuiteSpec> preset_suites(const DeltaMap& dm) {
    std::vector<SuiteSpec> suites;
    auto add = [&](std::string id, std::string title, std::vector<DummySpec> dummies,
                   bool compound, bool mainstream) {
        SuiteSpec s;
        s.id = std::move(id);
        s.title = std::move(title);
        s.risks = risk_terms();
        s.dummies = std::move(dummies);
        s.controls = compound ? compound_controls(dm) : aave_controls(dm);
        s.dependents = compound ? compound_dependents(dm) : aave_dependents(dm);
        s.mainstream_subset = mainstream;
        suites.push_back(std::move(s));
    };
    add("eq10", "Aave baseline", {}, false, false);
    add("eq11", "Compound baseline", {}, true, false);
    add("eq12", "Aave with V2 dummy", {kV2}, false, false);
    add("eq13", "Compound with V3 dummy", {kV3}, true, false);
    add("eq14", "Aave with hack dummy", {kHack}, false, false);
    add("eq15", "Compound with hack dummy", {kHack}, true, false);
    add("eq16", "Aave, mainstream subset, V2 + hack", {kV2, kHack}, false, true);
    add("eq17", "Compound, mainstream subset, V3 + hack", {kV3, kHack}, true, true);
    return suites;
}

std::optional<SuiteSpec> find_suite(const std::string& id, const DeltaMap& dm) {
    for (SuiteSpec& s : preset_suites(dm)) {
        if (s.id == id) return std::move(s);
    }
    return std::nullopt;
}

std::vector<RegressionSpec> expand_suite(const SuiteSpec& suite, bool standardize) {
    std::vector<RegressionSpec> specs;
    specs.reserve(suite.risks.size() * suite.dependents.size());
    for (const TermSpec& risk : suite.risks) {
        for (const TermSpec& dep : suite.dependents) {
            RegressionSpec spec;
            spec.suite = suite.id;
            spec.dependent = dep;
            spec.risk = risk;
            spec.dummies = suite.dummies;
            spec.controls = suite.controls;
            spec.standardize = standardize;
            specs.push_back(std::move(spec));
        }
    }
    return specs;
}

}  // namespace lprisk
