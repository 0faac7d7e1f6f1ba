#pragma once

#include "lprisk/ledger.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lprisk {

class MetricsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An actor is "new" in a role on the first day they performed that role's
// initiating action (deposit for depositors, borrow for borrowers), and
// "repeat" on every later day. Roles are independent: a long-time depositor
// borrowing for the first time is a new borrower.
enum class Role { Depositor, Borrower };
enum class ActorClass { New, Repeat };

class FirstSeenIndex {
public:
    void observe(Role role, const std::string& actor, Day date);
    std::optional<Day> first_seen(Role role, const std::string& actor) const;

private:
    std::map<std::pair<Role, std::string>, Day> first_;
};

FirstSeenIndex build_first_seen(std::span<const EventRecord> events);

// Throws MetricsError if the actor is unknown to the index (index incomplete).
ActorClass classify_actor(const FirstSeenIndex& index, Role role, const std::string& actor,
                          Day date);

// Eq-7-style sum over one day's snapshots. Unpriced assets are skipped and
// reported through `warnings` when given.
double protocol_liquidity_usd(std::span<const DailyAssetSnapshot> day,
                              std::vector<std::string>* warnings = nullptr);

// Value-weighted debt/deposit ratio across assets (not a mean of per-asset
// utilizations). nullopt when total USD deposits are zero.
std::optional<double> protocol_utilization(std::span<const DailyAssetSnapshot> day);

struct RepeatRatios {
    std::optional<double> deposit;  // missing on zero-deposit-volume days
    std::optional<double> loan;     // missing on zero-loan-volume days
};

// Share of the day's USD volume contributed by repeat actors. `first_seen`
// must cover all events up to and including `date`.
RepeatRatios repeat_ratios(std::span<const EventRecord> day_events, const FirstSeenIndex& first_seen,
                           Day date);

// One day of protocol-level metrics. USD sums are exact decimals (event
// amount times its own price); ratios and averages are reported as doubles.
struct DailyPanelRow {
    Day date = 0;

    Decimal liquidity_usd;
    std::optional<double> utilization;
    std::optional<double> repeat_deposit_ratio;
    std::optional<double> repeat_loan_ratio;

    // Loan details
    std::int64_t borrower = 0;
    Decimal loan_vol_usd;
    std::int64_t loan_cnt = 0;
    std::int64_t new_borrower = 0;
    Decimal new_loan_vol_usd;
    std::int64_t new_loan_cnt = 0;
    std::optional<double> avg_loan_usd;
    Decimal outstanding_loan_usd;
    Decimal liquidation_usd;
    std::int64_t repeat_borrower = 0;
    Decimal repeat_loan_vol_usd;
    std::int64_t repeat_loan_cnt = 0;

    // Deposit details
    std::int64_t depositor = 0;
    Decimal deposit_vol_usd;
    std::int64_t deposit_cnt = 0;
    std::int64_t new_depositor = 0;
    Decimal new_deposit_vol_usd;
    std::int64_t new_deposit_cnt = 0;
    std::optional<double> avg_deposit_usd;
    Decimal outstanding_deposit_usd;
    std::int64_t repeat_depositor = 0;
    Decimal repeat_deposit_vol_usd;
    std::int64_t repeat_deposit_cnt = 0;
};

struct PanelOptions {
    std::optional<std::set<std::string>> asset_filter;
    ReplayMode mode = ReplayMode::Lenient;
};

struct PanelResult {
    std::vector<DailyPanelRow> rows;  // one per day, first to last event day inclusive
    std::vector<std::string> warnings;
};

// Builds the full daily panel from a timestamp-sorted log. Days without
// events carry outstanding totals forward and report zero counts/volumes.
// Throws MetricsError on an empty (post-filter) log; ledger errors propagate.
PanelResult build_daily_panel(std::span<const EventRecord> events, const PanelOptions& options = {});

struct DescriptiveStats {
    double mean = 0;
    double median = 0;
    double maximum = 0;
    double minimum = 0;
    double stddev = 0;  // sample (n-1); NaN when n < 2
    std::size_t n = 0;
};

// Throws MetricsError on an empty series.
DescriptiveStats descriptive_stats(std::span<const double> series);
DescriptiveStats descriptive_stats(std::span<const std::optional<double>> series);

}  // namespace lprisk
