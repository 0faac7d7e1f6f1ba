#pragma once

#include "lprisk/events.hpp"

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lprisk {

// Strict replay refuses overdrafts (a healthy log never withdraws more than
// was supplied); lenient clamps at zero and records a warning, because real
// scrapes are lossy. Default for ingested logs is lenient, simulator output
// is replayed strict.
enum class ReplayMode { Strict, Lenient };

class LedgerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Per-asset pool ledger. Aggregates are maintained incrementally and satisfy
//   outstanding_deposit == sum of supply_by_user
//   outstanding_debt    == sum of debt_by_user - liquidator_repaid_total
// exactly at every step.
struct PoolState {
    std::string asset;
    std::map<std::string, Decimal> supply_by_user;
    std::map<std::string, Decimal> debt_by_user;
    Decimal liquidator_repaid_total;
    Decimal outstanding_deposit;
    Decimal outstanding_debt;
};

// Applies one event in place. Returns a warning message when lenient mode had
// to clamp; throws LedgerError on strict-mode violations or asset mismatch.
std::optional<std::string> apply_event(PoolState& state, const EventRecord& ev, ReplayMode mode);

// Cumulative net position of one actor; zero for actors the pool never saw.
Decimal user_supply(const PoolState& state, const std::string& actor);
Decimal user_demand(const PoolState& state, const std::string& actor);

// End-of-day per-asset marks emitted by replay. The close price is the last
// price observed for the asset on or before that day; it is absent only for
// snapshots built by hand without any priced event.
struct DailyAssetSnapshot {
    std::string asset;
    Day date = 0;
    Decimal outstanding_deposit_native;
    Decimal outstanding_debt_native;
    std::optional<Decimal> close_price_usd;
    Decimal liquidity_native;  // deposit - debt, may go negative in lenient replays
    std::optional<double> utilization;  // defined iff deposit > 0
};

DailyAssetSnapshot make_snapshot(const PoolState& state, Day date,
                                 std::optional<Decimal> close_price);

struct ReplayWarning {
    std::size_t event_index = 0;
    std::string message;
};

struct ReplayResult {
    std::map<std::string, PoolState> pools;
    // Ordered by (date, asset): one snapshot per asset per event day, for every
    // asset already seen by the end of that day.
    std::vector<DailyAssetSnapshot> snapshots;
    std::vector<ReplayWarning> warnings;
};

// Replays a timestamp-sorted log. Throws LedgerError naming the first
// out-of-order index if the input is unsorted, and propagates apply_event
// errors with their event index.
ReplayResult replay(std::span<const EventRecord> events, ReplayMode mode = ReplayMode::Lenient);

}  // namespace lprisk
