#include "lprisk/serialize.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <ostream>

namespace lprisk {

std::string format_double_full(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::string opt_cell(const std::optional<double>& v) {
    return v ? format_double_full(*v) : std::string();
}

}  // namespace

void write_events_csv(std::ostream& out, std::span<const EventRecord> events) {
    out << "timestamp,event_kind,asset,actor,amount,price_usd\n";
    for (const EventRecord& ev : events) {
        out << format_timestamp(ev.time) << ',' << to_string(ev.kind) << ',' << ev.asset << ','
            << ev.actor << ',' << ev.amount.str() << ',' << ev.price_usd.str() << '\n';
    }
}

void write_events_jsonl(std::ostream& out, std::span<const EventRecord> events) {
    for (const EventRecord& ev : events) {
        // Numeric literals written verbatim; strings escaped through json.
        out << "{\"timestamp\":" << nlohmann::json(format_timestamp(ev.time)).dump()
            << ",\"event_kind\":\"" << to_string(ev.kind) << "\""
            << ",\"asset\":" << nlohmann::json(ev.asset).dump()
            << ",\"actor\":" << nlohmann::json(ev.actor).dump()
            << ",\"amount\":" << ev.amount.str() << ",\"price_usd\":" << ev.price_usd.str()
            << "}\n";
    }
}

void write_factor_csv(std::ostream& out, std::span<const FactorPanelRow> rows) {
    out << "date,mktc_f,mktc_c,token_price_usd,tvl_usd,revenue_usd,holder_count,active_users,"
           "developers\n";
    for (const FactorPanelRow& r : rows) {
        out << format_date(r.date) << ',' << opt_cell(r.mktc_f) << ',' << opt_cell(r.mktc_c) << ','
            << opt_cell(r.token_price_usd) << ',' << opt_cell(r.tvl_usd) << ','
            << opt_cell(r.revenue_usd) << ',';
        if (r.holder_count) out << *r.holder_count;
        out << ',';
        if (r.active_users) out << *r.active_users;
        out << ',';
        if (r.developers) out << *r.developers;
        out << '\n';
    }
}

void write_daily_panel_csv(std::ostream& out, std::span<const DailyPanelRow> rows) {
    out << daily_panel_header() << '\n';
    for (const DailyPanelRow& r : rows) {
        out << format_date(r.date) << ',' << r.liquidity_usd.str() << ','
            << opt_cell(r.utilization) << ',' << opt_cell(r.repeat_deposit_ratio) << ','
            << opt_cell(r.repeat_loan_ratio) << ',' << r.borrower << ',' << r.loan_vol_usd.str()
            << ',' << r.loan_cnt << ',' << r.new_borrower << ',' << r.new_loan_vol_usd.str() << ','
            << r.new_loan_cnt << ',' << opt_cell(r.avg_loan_usd) << ','
            << r.outstanding_loan_usd.str() << ',' << r.liquidation_usd.str() << ','
            << r.repeat_borrower << ',' << r.repeat_loan_vol_usd.str() << ',' << r.repeat_loan_cnt
            << ',' << r.depositor << ',' << r.deposit_vol_usd.str() << ',' << r.deposit_cnt << ','
            << r.new_depositor << ',' << r.new_deposit_vol_usd.str() << ',' << r.new_deposit_cnt
            << ',' << opt_cell(r.avg_deposit_usd) << ',' << r.outstanding_deposit_usd.str() << ','
            << r.repeat_depositor << ',' << r.repeat_deposit_vol_usd.str() << ','
            << r.repeat_deposit_cnt << '\n';
    }
}

}  // namespace lprisk
