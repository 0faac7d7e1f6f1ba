#pragma once

#include "lprisk/events.hpp"
#include "lprisk/metrics.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lprisk {

class IngestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class EventFormat { Csv, Jsonl };

struct Diagnostic {
    std::size_t line = 0;  // 1-based, header included
    std::string field;
    std::string reason;
};

std::string to_string(const Diagnostic& d);

enum class ParseMode { Strict, Lenient };

struct ParseEventsResult {
    std::vector<EventRecord> events;
    std::vector<Diagnostic> diagnostics;
    bool aborted = false;  // strict mode stopped at the first diagnostic
};

// Parses an event log. Lenient mode skips rows that produce a diagnostic;
// strict mode stops at the first one. Record order is checked, not fixed:
// an out-of-order timestamp is reported as a diagnostic on the offending row.
ParseEventsResult parse_events(std::istream& in, EventFormat format,
                               ParseMode mode = ParseMode::Lenient);

// One day of protocol factors; absent cells stay missing and are later
// listwise-deleted by the regression layer.
struct FactorPanelRow {
    Day date = 0;
    std::optional<double> mktc_f;
    std::optional<double> mktc_c;
    std::optional<double> token_price_usd;
    std::optional<double> tvl_usd;
    std::optional<double> revenue_usd;
    std::optional<std::int64_t> holder_count;
    std::optional<std::int64_t> active_users;
    std::optional<std::int64_t> developers;
};

// Throws IngestError on a missing/odd header, unparseable cell, negative
// count, or duplicate date. Output is sorted by date.
std::vector<FactorPanelRow> parse_factor_panel(std::istream& in);

// Per asset: last event price of each day, carried forward across gap days
// up to the last day of the log. No entries before an asset's first price.
std::map<std::string, std::map<Day, Decimal>> resolve_daily_prices(
    std::span<const EventRecord> events);

struct HackEvent {
    Day date = 0;
    std::string protocol;
};

// CSV with header "date,protocol".
std::vector<HackEvent> parse_hack_calendar(std::istream& in);

// Reads a daily panel previously written by write_daily_panel_csv.
std::vector<DailyPanelRow> parse_daily_panel(std::istream& in);

const char* daily_panel_header();

// One symbol per line; '#' comments and blank lines ignored.
std::set<std::string> parse_asset_list(std::istream& in);

}  // namespace lprisk
