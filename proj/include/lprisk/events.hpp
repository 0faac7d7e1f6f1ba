#pragma once

#include "lprisk/dates.hpp"
#include "lprisk/decimal.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace lprisk {

// The five pool actions a lending-pool log records.
enum class EventKind { Deposit, Withdraw, Borrow, Repay, Liquidation };

std::optional<EventKind> event_kind_from_string(std::string_view s);
std::string_view to_string(EventKind k);

// One dated lending action in native units, priced in USD at event time.
struct EventRecord {
    Timestamp time;
    EventKind kind = EventKind::Deposit;
    std::string asset;
    std::string actor;
    Decimal amount;     // >= 0, native units
    Decimal price_usd;  // >= 0, USD per native unit

    Day day() const { return time.day(); }
};

}  // namespace lprisk
