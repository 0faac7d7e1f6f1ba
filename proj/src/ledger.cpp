#include "lprisk/ledger.hpp"

#include <sstream>

namespace lprisk {

namespace {

std::string describe(const EventRecord& ev) {
    std::ostringstream os;
    os << to_string(ev.kind) << " " << ev.asset << " actor=" << ev.actor
       << " amount=" << ev.amount.str();
    return os.str();
}

}  // namespace

std::optional<EventKind> event_kind_from_string(std::string_view s) {
    if (s == "deposit") return EventKind::Deposit;
    if (s == "withdraw") return EventKind::Withdraw;
    if (s == "borrow") return EventKind::Borrow;
    if (s == "repay") return EventKind::Repay;
    if (s == "liquidation") return EventKind::Liquidation;
    return std::nullopt;
}

std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::Deposit: return "deposit";
        case EventKind::Withdraw: return "withdraw";
        case EventKind::Borrow: return "borrow";
        case EventKind::Repay: return "repay";
        case EventKind::Liquidation: return "liquidation";
    }
    return "?";
}

std::optional<std::string> apply_event(PoolState& state, const EventRecord& ev, ReplayMode mode) {
    if (ev.asset != state.asset) {
        throw LedgerError("event asset '" + ev.asset + "' does not match pool '" + state.asset +
                          "'");
    }
    if (ev.amount.is_negative()) {
        throw LedgerError("negative amount: " + describe(ev));
    }

    switch (ev.kind) {
        case EventKind::Deposit: {
            state.supply_by_user[ev.actor] += ev.amount;
            state.outstanding_deposit += ev.amount;
            return std::nullopt;
        }
        case EventKind::Withdraw: {
            Decimal& supply = state.supply_by_user[ev.actor];
            if (ev.amount > supply) {
                if (mode == ReplayMode::Strict) {
                    throw LedgerError("withdraw exceeds supply: " + describe(ev) +
                                      " supply=" + supply.str());
                }
                std::string warning = "withdraw clamped to supply: " + describe(ev) +
                                      " supply=" + supply.str();
                state.outstanding_deposit -= supply;
                supply = Decimal();
                return warning;
            }
            supply -= ev.amount;
            state.outstanding_deposit -= ev.amount;
            return std::nullopt;
        }
        case EventKind::Borrow: {
            state.debt_by_user[ev.actor] += ev.amount;
            state.outstanding_debt += ev.amount;
            return std::nullopt;
        }
        case EventKind::Repay: {
            Decimal& debt = state.debt_by_user[ev.actor];
            if (ev.amount > debt) {
                if (mode == ReplayMode::Strict) {
                    throw LedgerError("repay exceeds debt: " + describe(ev) +
                                      " debt=" + debt.str());
                }
                std::string warning =
                    "repay clamped to debt: " + describe(ev) + " debt=" + debt.str();
                state.outstanding_debt -= debt;
                debt = Decimal();
                return warning;
            }
            debt -= ev.amount;
            state.outstanding_debt -= ev.amount;
            return std::nullopt;
        }
        case EventKind::Liquidation: {
            if (ev.amount > state.outstanding_debt) {
                if (mode == ReplayMode::Strict) {
                    throw LedgerError("liquidation would drive outstanding debt negative: " +
                                      describe(ev) +
                                      " outstanding=" + state.outstanding_debt.str());
                }
                std::string warning = "liquidation clamped to outstanding debt: " + describe(ev) +
                                      " outstanding=" + state.outstanding_debt.str();
                state.liquidator_repaid_total += state.outstanding_debt;
                state.outstanding_debt = Decimal();
                return warning;
            }
            state.liquidator_repaid_total += ev.amount;
            state.outstanding_debt -= ev.amount;
            return std::nullopt;
        }
    }
    return std::nullopt;
}

Decimal user_supply(const PoolState& state, const std::string& actor) {
    auto it = state.supply_by_user.find(actor);
    return it == state.supply_by_user.end() ? Decimal() : it->second;
}

Decimal user_demand(const PoolState& state, const std::string& actor) {
    auto it = state.debt_by_user.find(actor);
    return it == state.debt_by_user.end() ? Decimal() : it->second;
}

DailyAssetSnapshot make_snapshot(const PoolState& state, Day date,
                                 std::optional<Decimal> close_price) {
    DailyAssetSnapshot s;
    s.asset = state.asset;
    s.date = date;
    s.outstanding_deposit_native = state.outstanding_deposit;
    s.outstanding_debt_native = state.outstanding_debt;
    s.close_price_usd = std::move(close_price);
    s.liquidity_native = state.outstanding_deposit - state.outstanding_debt;
    if (state.outstanding_deposit.is_positive()) {
        s.utilization =
            state.outstanding_debt.to_double() / state.outstanding_deposit.to_double();
    }
    return s;
}

ReplayResult replay(std::span<const EventRecord> events, ReplayMode mode) {
    ReplayResult result;
    std::map<std::string, Decimal> last_price;

    auto emit_day = [&](Day day) {
        for (const auto& [asset, pool] : result.pools) {
            std::optional<Decimal> price;
            if (auto it = last_price.find(asset); it != last_price.end()) price = it->second;
            result.snapshots.push_back(make_snapshot(pool, day, std::move(price)));
        }
    };

    std::optional<Day> current_day;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const EventRecord& ev = events[i];
        if (i > 0 && ev.time < events[i - 1].time) {
            throw LedgerError("events not sorted by timestamp: index " + std::to_string(i) +
                              " precedes index " + std::to_string(i - 1));
        }
        const Day day = ev.day();
        if (current_day && day != *current_day) {
            emit_day(*current_day);
        }
        current_day = day;

        auto [it, inserted] = result.pools.try_emplace(ev.asset);
        if (inserted) it->second.asset = ev.asset;
        try {
            if (auto warning = apply_event(it->second, ev, mode)) {
                result.warnings.push_back({i, std::move(*warning)});
            }
        } catch (const LedgerError& e) {
            throw LedgerError("event " + std::to_string(i) + ": " + e.what());
        }
        last_price[ev.asset] = ev.price_usd;
    }
    if (current_day) emit_day(*current_day);
    return result;
}

}  // namespace lprisk
