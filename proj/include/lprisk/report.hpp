#pragma once

#include "lprisk/econometrics.hpp"
#include "lprisk/metrics.hpp"

#include <span>
#include <string>
#include <vector>

namespace lprisk {

// "0.14*** (7.43)" — coefficient with significance stars over the t-stat.
std::string format_cell(double coefficient, double t_statistic);

// One risk-measure panel: columns (1)..(6) are the suite's dependents, rows
// are the regressors in model order, then N and Adj R-sq.
std::string render_panel_tsv(const SuiteSpec& suite, std::size_t risk_index,
                             std::span<const ModelFit> fits);
std::string render_panel_markdown(const SuiteSpec& suite, std::size_t risk_index,
                                  std::span<const ModelFit> fits);

struct StatsRow {
    std::string name;
    DescriptiveStats stats;
};

// Variable | Mean | Median | Maximum | Minimum | Std, two-decimal cells.
std::string render_stats_markdown(const std::string& title, std::span<const StatsRow> rows);

}  // namespace lprisk
