#include "lprisk/ingest.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <istream>
#include <sstream>

namespace lprisk {

namespace {

constexpr int kMaxSignificantDigits = 38;

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

// Validates one raw field set into an EventRecord, or explains why not.
struct RawEvent {
    std::string timestamp, kind, asset, actor, amount, price;
};

std::optional<Diagnostic> validate_event(const RawEvent& raw, std::size_t line, EventRecord& out) {
    const auto ts = parse_timestamp(raw.timestamp);
    if (!ts) return Diagnostic{line, "timestamp", "not an ISO-8601 UTC timestamp (YYYY-MM-DDTHH:MM:SSZ)"};
    const auto kind = event_kind_from_string(raw.kind);
    if (!kind) return Diagnostic{line, "event_kind", "unknown event_kind '" + raw.kind + "'"};
    if (raw.asset.empty()) return Diagnostic{line, "asset", "empty asset symbol"};
    if (raw.actor.empty()) return Diagnostic{line, "actor", "empty actor id"};
    const auto amount = Decimal::parse(raw.amount);
    if (!amount) return Diagnostic{line, "amount", "not a decimal number"};
    if (amount->is_negative()) return Diagnostic{line, "amount", "negative amount"};
    if (amount->significant_digits() > kMaxSignificantDigits)
        return Diagnostic{line, "amount", "more than 38 significant digits"};
    const auto price = Decimal::parse(raw.price);
    if (!price) return Diagnostic{line, "price_usd", "not a decimal number"};
    if (price->is_negative()) return Diagnostic{line, "price_usd", "negative price"};
    if (price->significant_digits() > kMaxSignificantDigits)
        return Diagnostic{line, "price_usd", "more than 38 significant digits"};

    out.time = *ts;
    out.kind = *kind;
    out.asset = raw.asset;
    out.actor = raw.actor;
    out.amount = *amount;
    out.price_usd = *price;
    return std::nullopt;
}

// SAX handler that keeps numeric literals as their raw source text, so
// decimals can be parsed exactly instead of via double.
struct FlatObjectSax {
    std::map<std::string, std::string> fields;
    std::string current_key;
    int depth = 0;
    std::string error;

    bool fail(const std::string& why) {
        if (error.empty()) error = why;
        return false;
    }
    bool set(std::string value) {
        if (depth != 1 || current_key.empty()) return fail("value outside object field");
        fields[current_key] = std::move(value);
        return true;
    }

    bool null() { return fail("null value"); }
    bool boolean(bool) { return fail("unexpected boolean"); }
    bool number_integer(std::int64_t v) { return set(std::to_string(v)); }
    bool number_unsigned(std::uint64_t v) { return set(std::to_string(v)); }
    bool number_float(double, const std::string& raw) { return set(raw); }
    bool string(std::string& v) { return set(v); }
    bool binary(nlohmann::json::binary_t&) { return fail("unexpected binary"); }
    bool start_object(std::size_t) {
        if (++depth > 1) return fail("nested object");
        return true;
    }
    bool key(std::string& k) {
        current_key = k;
        return true;
    }
    bool end_object() {
        --depth;
        return true;
    }
    bool start_array(std::size_t) { return fail("unexpected array"); }
    bool end_array() { return fail("unexpected array"); }
    bool parse_error(std::size_t, const std::string&, const nlohmann::json::exception& ex) {
        return fail(ex.what());
    }
};

const char* kEventHeader = "timestamp,event_kind,asset,actor,amount,price_usd";

}  // namespace

std::string to_string(const Diagnostic& d) {
    return "line " + std::to_string(d.line) + ", field '" + d.field + "': " + d.reason;
}

ParseEventsResult parse_events(std::istream& in, EventFormat format, ParseMode mode) {
    ParseEventsResult result;
    std::vector<std::size_t> event_lines;
    std::string line;
    std::size_t line_no = 0;

    auto report = [&](Diagnostic d) {
        result.diagnostics.push_back(std::move(d));
        if (mode == ParseMode::Strict) result.aborted = true;
    };

    if (format == EventFormat::Csv) {
        if (!std::getline(in, line)) {
            report({1, "header", "empty file"});
            return result;
        }
        ++line_no;
        if (strip_cr(line) != kEventHeader) {
            report({1, "header", std::string("expected header '") + kEventHeader + "'"});
            if (result.aborted) return result;
        }
    }

    while (!result.aborted && std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;

        RawEvent raw;
        if (format == EventFormat::Csv) {
            const auto fields = split_csv(line);
            if (fields.size() != 6) {
                report({line_no, "row", "expected 6 fields, got " + std::to_string(fields.size())});
                continue;
            }
            raw = {fields[0], fields[1], fields[2], fields[3], fields[4], fields[5]};
        } else {
            FlatObjectSax sax;
            if (!nlohmann::json::sax_parse(line, &sax) || !sax.error.empty()) {
                report({line_no, "row", sax.error.empty() ? "invalid JSON" : sax.error});
                continue;
            }
            bool missing = false;
            auto need = [&](const char* key) -> std::string {
                auto it = sax.fields.find(key);
                if (it == sax.fields.end()) {
                    report({line_no, key, "missing field"});
                    missing = true;
                    return {};
                }
                return it->second;
            };
            raw.timestamp = need("timestamp");
            raw.kind = need("event_kind");
            raw.asset = need("asset");
            raw.actor = need("actor");
            raw.amount = need("amount");
            raw.price = need("price_usd");
            if (missing) continue;
        }

        EventRecord ev;
        if (auto diag = validate_event(raw, line_no, ev)) {
            report(std::move(*diag));
            continue;
        }
        result.events.push_back(std::move(ev));
        event_lines.push_back(line_no);
    }

    // Order check only; the log is never re-sorted here.
    if (!result.aborted) {
        for (std::size_t i = 1; i < result.events.size(); ++i) {
            if (result.events[i].time < result.events[i - 1].time) {
                report({event_lines[i], "timestamp",
                        "events out of order at record " + std::to_string(i) + " (" +
                            format_timestamp(result.events[i].time) + " after " +
                            format_timestamp(result.events[i - 1].time) + ")"});
                break;
            }
        }
    }
    return result;
}

namespace {

const char* kFactorHeader =
    "date,mktc_f,mktc_c,token_price_usd,tvl_usd,revenue_usd,holder_count,active_users,developers";

std::optional<double> parse_opt_double(const std::string& cell, std::size_t line_no,
                                       const char* field) {
    if (cell.empty()) return std::nullopt;
    try {
        std::size_t pos = 0;
        const double v = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw IngestError("line " + std::to_string(line_no) + ": unparseable number in '" +
                          field + "': '" + cell + "'");
    }
}

std::optional<std::int64_t> parse_opt_count(const std::string& cell, std::size_t line_no,
                                            const char* field) {
    if (cell.empty()) return std::nullopt;
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument(cell);
        if (v < 0) {
            throw IngestError("line " + std::to_string(line_no) + ": negative count in '" +
                              field + "'");
        }
        return v;
    } catch (const IngestError&) {
        throw;
    } catch (const std::exception&) {
        throw IngestError("line " + std::to_string(line_no) + ": unparseable count in '" +
                          field + "': '" + cell + "'");
    }
}

}  // namespace

std::vector<FactorPanelRow> parse_factor_panel(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != kFactorHeader) {
        throw IngestError(std::string("missing factor panel header '") + kFactorHeader + "'");
    }
    std::vector<FactorPanelRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 9) {
            throw IngestError("line " + std::to_string(line_no) + ": expected 9 cells, got " +
                              std::to_string(cells.size()));
        }
        FactorPanelRow row;
        const auto date = parse_date(cells[0]);
        if (!date) {
            throw IngestError("line " + std::to_string(line_no) + ": bad date '" + cells[0] + "'");
        }
        row.date = *date;
        row.mktc_f = parse_opt_double(cells[1], line_no, "mktc_f");
        row.mktc_c = parse_opt_double(cells[2], line_no, "mktc_c");
        row.token_price_usd = parse_opt_double(cells[3], line_no, "token_price_usd");
        row.tvl_usd = parse_opt_double(cells[4], line_no, "tvl_usd");
        row.revenue_usd = parse_opt_double(cells[5], line_no, "revenue_usd");
        row.holder_count = parse_opt_count(cells[6], line_no, "holder_count");
        row.active_users = parse_opt_count(cells[7], line_no, "active_users");
        row.developers = parse_opt_count(cells[8], line_no, "developers");
        rows.push_back(row);
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const FactorPanelRow& a, const FactorPanelRow& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].date == rows[i - 1].date) {
            throw IngestError("duplicate date " + format_date(rows[i].date) + " in factor panel");
        }
    }
    return rows;
}

std::map<std::string, std::map<Day, Decimal>> resolve_daily_prices(
    std::span<const EventRecord> events) {
    std::map<std::string, std::map<Day, Decimal>> last_of_day;
    Day log_end = 0;
    for (const EventRecord& ev : events) {
        last_of_day[ev.asset][ev.day()] = ev.price_usd;  // last write of the day wins
        log_end = std::max(log_end, ev.day());
    }
    // Forward fill through the last day of the whole log.
    for (auto& [asset, days] : last_of_day) {
        if (days.empty()) continue;
        Decimal price = days.begin()->second;
        for (Day d = days.begin()->first; d <= log_end; ++d) {
            auto it = days.find(d);
            if (it != days.end()) {
                price = it->second;
            } else {
                days.emplace(d, price);
            }
        }
    }
    return last_of_day;
}

std::vector<HackEvent> parse_hack_calendar(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != "date,protocol") {
        throw IngestError("missing hack calendar header 'date,protocol'");
    }
    std::vector<HackEvent> hacks;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 2) {
            throw IngestError("line " + std::to_string(line_no) + ": expected 2 cells");
        }
        const auto date = parse_date(cells[0]);
        if (!date) {
            throw IngestError("line " + std::to_string(line_no) + ": bad date '" + cells[0] + "'");
        }
        hacks.push_back({*date, cells[1]});
    }
    return hacks;
}

std::set<std::string> parse_asset_list(std::istream& in) {
    std::set<std::string> assets;
    std::string line;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.pop_back();
        std::size_t start = 0;
        while (start < line.size() && (line[start] == ' ' || line[start] == '\t')) ++start;
        line.erase(0, start);
        if (!line.empty()) assets.insert(line);
    }
    return assets;
}

namespace {

Decimal require_decimal(const std::string& cell, std::size_t line_no, const char* field) {
    const auto v = Decimal::parse(cell);
    if (!v) {
        throw IngestError("line " + std::to_string(line_no) + ": bad decimal in '" + field +
                          "': '" + cell + "'");
    }
    return *v;
}

std::int64_t require_count(const std::string& cell, std::size_t line_no, const char* field) {
    const auto v = parse_opt_count(cell, line_no, field);
    if (!v) {
        throw IngestError("line " + std::to_string(line_no) + ": missing count in '" + field + "'");
    }
    return *v;
}

const char* kPanelHeader =
    "date,liquidity_usd,utilization,repeat_deposit_ratio,repeat_loan_ratio,"
    "borrower,loan_vol_usd,loan_cnt,new_borrower,new_loan_vol_usd,new_loan_cnt,avg_loan_usd,"
    "outstanding_loan_usd,liquidation_usd,repeat_borrower,repeat_loan_vol_usd,repeat_loan_cnt,"
    "depositor,deposit_vol_usd,deposit_cnt,new_depositor,new_deposit_vol_usd,new_deposit_cnt,"
    "avg_deposit_usd,outstanding_deposit_usd,repeat_depositor,repeat_deposit_vol_usd,"
    "repeat_deposit_cnt";

}  // namespace

const char* daily_panel_header() { return kPanelHeader; }

std::vector<DailyPanelRow> parse_daily_panel(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != kPanelHeader) {
        throw IngestError("missing or unexpected daily panel header");
    }
    std::vector<DailyPanelRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto c = split_csv(line);
        if (c.size() != 28) {
            throw IngestError("line " + std::to_string(line_no) + ": expected 28 cells, got " +
                              std::to_string(c.size()));
        }
        DailyPanelRow r;
        const auto date = parse_date(c[0]);
        if (!date) {
            throw IngestError("line " + std::to_string(line_no) + ": bad date '" + c[0] + "'");
        }
        r.date = *date;
        r.liquidity_usd = require_decimal(c[1], line_no, "liquidity_usd");
        r.utilization = parse_opt_double(c[2], line_no, "utilization");
        r.repeat_deposit_ratio = parse_opt_double(c[3], line_no, "repeat_deposit_ratio");
        r.repeat_loan_ratio = parse_opt_double(c[4], line_no, "repeat_loan_ratio");
        r.borrower = require_count(c[5], line_no, "borrower");
        r.loan_vol_usd = require_decimal(c[6], line_no, "loan_vol_usd");
        r.loan_cnt = require_count(c[7], line_no, "loan_cnt");
        r.new_borrower = require_count(c[8], line_no, "new_borrower");
        r.new_loan_vol_usd = require_decimal(c[9], line_no, "new_loan_vol_usd");
        r.new_loan_cnt = require_count(c[10], line_no, "new_loan_cnt");
        r.avg_loan_usd = parse_opt_double(c[11], line_no, "avg_loan_usd");
        r.outstanding_loan_usd = require_decimal(c[12], line_no, "outstanding_loan_usd");
        r.liquidation_usd = require_decimal(c[13], line_no, "liquidation_usd");
        r.repeat_borrower = require_count(c[14], line_no, "repeat_borrower");
        r.repeat_loan_vol_usd = require_decimal(c[15], line_no, "repeat_loan_vol_usd");
        r.repeat_loan_cnt = require_count(c[16], line_no, "repeat_loan_cnt");
        r.depositor = require_count(c[17], line_no, "depositor");
        r.deposit_vol_usd = require_decimal(c[18], line_no, "deposit_vol_usd");
        r.deposit_cnt = require_count(c[19], line_no, "deposit_cnt");
        r.new_depositor = require_count(c[20], line_no, "new_depositor");
        r.new_deposit_vol_usd = require_decimal(c[21], line_no, "new_deposit_vol_usd");
        r.new_deposit_cnt = require_count(c[22], line_no, "new_deposit_cnt");
        r.avg_deposit_usd = parse_opt_double(c[23], line_no, "avg_deposit_usd");
        r.outstanding_deposit_usd = require_decimal(c[24], line_no, "outstanding_deposit_usd");
        r.repeat_depositor = require_count(c[25], line_no, "repeat_depositor");
        r.repeat_deposit_vol_usd = require_decimal(c[26], line_no, "repeat_deposit_vol_usd");
        r.repeat_deposit_cnt = require_count(c[27], line_no, "repeat_deposit_cnt");
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace lprisk
