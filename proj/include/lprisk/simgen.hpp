#pragma once

#include "lprisk/ingest.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lprisk {

class SimError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct AssetConfig {
    std::string symbol;
    double initial_price = 1.0;
    double daily_volatility = 0.0;  // log-return sigma; ~0 for stablecoins
};

// Successive withdrawals by the largest depositors: on each stress day the
// top-k depositors pull `withdrawal_fraction_per_day` of what they still
// have, capped by pool liquidity. Background activity pauses for the window.
struct StressConfig {
    int start_day = 0;  // offset from scenario start
    int top_k_depositors = 1;
    double withdrawal_fraction_per_day = 0.5;
    int duration = 1;
};

struct ScenarioConfig {
    std::uint64_t seed = 1;
    int horizon_days = 30;
    Day start_date = 18628;  // 2021-01-01

    int depositor_count = 10;
    int borrower_count = 5;
    int liquidator_count = 1;

    std::vector<AssetConfig> assets;

    // Expected events per day (Poisson).
    double deposit_intensity = 4.0;
    double withdraw_intensity = 1.5;
    double borrow_intensity = 2.0;
    double repay_intensity = 1.5;

    // Chance that a day's acting agent is drawn from the already-active set
    // rather than the full roster; 1.0 freezes the active population.
    double repeat_activity_prob = 0.8;

    double deposit_amount_mean = 1000.0;
    double deposit_amount_sigma = 0.75;
    double borrow_amount_mean = 400.0;
    double borrow_amount_sigma = 0.75;

    double collateral_factor = 0.75;   // debt value may not exceed this share of collateral
    double liquidation_bonus = 0.05;
    double close_factor = 0.5;         // max share of a debt repaid per liquidation

    std::optional<StressConfig> stress;
};

// Empty when the config is runnable.
std::vector<std::string> validate_config(const ScenarioConfig& config);

// Key = value lines, one "asset = SYM price=P vol=V" line per asset,
// stress_* keys for the optional stress block. '#' starts a comment.
ScenarioConfig parse_scenario_config(std::istream& in);

struct LiquidationAudit {
    Day date = 0;
    std::string borrower;
    std::string asset;
    Decimal pre_debt;  // borrower's economic debt before the event
    Decimal repaid;
};

struct GenerationResult {
    std::vector<EventRecord> events;        // strict-replay valid, timestamp sorted
    std::vector<FactorPanelRow> factors;    // one row per scenario day
    std::vector<LiquidationAudit> liquidations;
};

// Deterministic in config.seed. Throws SimError on infeasible configs.
GenerationResult generate(const ScenarioConfig& config);

// Post-hoc level shifts over each hack day + 6 following days, so planted
// regression effects are recoverable. Keys are factor column names; relative
// shifts multiply by (1 + r), absolute shifts add. Throws SimError if a hack
// date falls outside the panel's date range.
struct HackShock {
    std::map<std::string, double> relative;
    std::map<std::string, double> absolute;
};

std::vector<FactorPanelRow> inject_hacks(std::vector<FactorPanelRow> rows,
                                         std::span<const Day> hack_dates, const HackShock& shock);

}  // namespace lprisk
