#include "lprisk/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace lprisk {

namespace {

// Two decimals, with "-0.00" folded to "0.00" and NaN rendered as NA.
std::string fixed2(double v) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    std::string s = buf;
    if (s == "-0.00") s = "0.00";
    return s;
}

char panel_letter(std::size_t risk_index) { return static_cast<char>('A' + risk_index); }

}  // namespace

std::string format_cell(double coefficient, double t_statistic) {
    return fixed2(coefficient) + significance_stars(t_statistic) + " (" + fixed2(t_statistic) +
           ")";
}

std::string render_panel_tsv(const SuiteSpec& suite, std::size_t risk_index,
                             std::span<const ModelFit> fits) {
    const TermSpec& risk = suite.risks.at(risk_index);
    std::ostringstream os;
    os << "Panel " << panel_letter(risk_index) << ": " << risk.label << '\n';
    for (std::size_t c = 0; c < fits.size(); ++c) os << "\t(" << c + 1 << ")";
    os << '\n';
    for (const TermSpec& dep : suite.dependents) os << '\t' << dep.label;
    os << '\n';
    // All fits in one panel share the regressor list.
    const std::size_t n_terms = fits.empty() ? 0 : fits.front().terms.size();
    for (std::size_t r = 0; r < n_terms; ++r) {
        os << fits.front().terms[r].label;
        for (const ModelFit& fit : fits) {
            os << '\t' << format_cell(fit.terms[r].coefficient, fit.terms[r].t_statistic);
        }
        os << '\n';
    }
    os << "N";
    for (const ModelFit& fit : fits) os << '\t' << fit.n_obs;
    os << '\n';
    os << "Adj R-sq";
    for (const ModelFit& fit : fits) os << '\t' << fixed2(fit.adj_r_squared);
    os << '\n';
    return os.str();
}

std::string render_panel_markdown(const SuiteSpec& suite, std::size_t risk_index,
                                  std::span<const ModelFit> fits) {
    const TermSpec& risk = suite.risks.at(risk_index);
    std::ostringstream os;
    os << "### Panel " << panel_letter(risk_index) << ": " << risk.label << "\n\n";
    os << "| |";
    for (std::size_t c = 0; c < fits.size(); ++c) os << " (" << c + 1 << ") |";
    os << "\n|---|";
    for (std::size_t c = 0; c < fits.size(); ++c) os << "---|";
    os << "\n| |";
    for (const TermSpec& dep : suite.dependents) os << ' ' << dep.label << " |";
    os << '\n';
    const std::size_t n_terms = fits.empty() ? 0 : fits.front().terms.size();
    for (std::size_t r = 0; r < n_terms; ++r) {
        os << "| " << fits.front().terms[r].label << " |";
        for (const ModelFit& fit : fits) {
            os << ' ' << format_cell(fit.terms[r].coefficient, fit.terms[r].t_statistic) << " |";
        }
        os << '\n';
    }
    os << "| N |";
    for (const ModelFit& fit : fits) os << ' ' << fit.n_obs << " |";
    os << '\n';
    os << "| Adj R-sq |";
    for (const ModelFit& fit : fits) os << ' ' << fixed2(fit.adj_r_squared) << " |";
    os << '\n';
    return os.str();
}

std::string render_stats_markdown(const std::string& title, std::span<const StatsRow> rows) {
    std::ostringstream os;
    os << "### " << title << "\n\n";
    os << "| Variable | Mean | Median | Maximum | Minimum | Std |\n";
    os << "|---|---|---|---|---|---|\n";
    for (const StatsRow& row : rows) {
        os << "| " << row.name << " | " << fixed2(row.stats.mean) << " | "
           << fixed2(row.stats.median) << " | " << fixed2(row.stats.maximum) << " | "
           << fixed2(row.stats.minimum) << " | " << fixed2(row.stats.stddev) << " |\n";
    }
    return os.str();
}

}  // namespace lprisk
