#pragma once

#include "lprisk/ingest.hpp"

#include <iosfwd>
#include <span>
#include <string>

namespace lprisk {

// Shortest round-trip text for a double, locale-independent.
std::string format_double_full(double v);

// CSV header: timestamp,event_kind,asset,actor,amount,price_usd
void write_events_csv(std::ostream& out, std::span<const EventRecord> events);

// Same keys per line; amounts and prices are emitted as plain decimal
// literals so a re-parse reproduces them exactly.
void write_events_jsonl(std::ostream& out, std::span<const EventRecord> events);

void write_factor_csv(std::ostream& out, std::span<const FactorPanelRow> rows);

void write_daily_panel_csv(std::ostream& out, std::span<const DailyPanelRow> rows);

}  // namespace lprisk
