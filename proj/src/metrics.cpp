#include "lprisk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lprisk {

void FirstSeenIndex::observe(Role role, const std::string& actor, Day date) {
    auto key = std::make_pair(role, actor);
    auto it = first_.find(key);
    if (it == first_.end()) {
        first_.emplace(std::move(key), date);
    } else if (date < it->second) {
        it->second = date;
    }
}

std::optional<Day> FirstSeenIndex::first_seen(Role role, const std::string& actor) const {
    auto it = first_.find(std::make_pair(role, actor));
    if (it == first_.end()) return std::nullopt;
    return it->second;
}

FirstSeenIndex build_first_seen(std::span<const EventRecord> events) {
    FirstSeenIndex index;
    for (const EventRecord& ev : events) {
        if (ev.kind == EventKind::Deposit) {
            index.observe(Role::Depositor, ev.actor, ev.day());
        } else if (ev.kind == EventKind::Borrow) {
            index.observe(Role::Borrower, ev.actor, ev.day());
        }
    }
    return index;
}

ActorClass classify_actor(const FirstSeenIndex& index, Role role, const std::string& actor,
                          Day date) {
    const auto first = index.first_seen(role, actor);
    if (!first || *first > date) {
        throw MetricsError("first-seen index incomplete for actor '" + actor + "' on " +
                           format_date(date));
    }
    return *first == date ? ActorClass::New : ActorClass::Repeat;
}

double protocol_liquidity_usd(std::span<const DailyAssetSnapshot> day,
                              std::vector<std::string>* warnings) {
    std::set<std::string> seen;
    Decimal total;
    for (const DailyAssetSnapshot& s : day) {
        if (!seen.insert(s.asset).second) {
            throw MetricsError("asset '" + s.asset + "' appears twice in one day's snapshots");
        }
        if (!s.close_price_usd) {
            if (warnings) {
                warnings->push_back("asset '" + s.asset + "' has no price on " +
                                    format_date(s.date) + "; skipped");
            }
            continue;
        }
        total += s.liquidity_native * *s.close_price_usd;
    }
    return total.to_double();
}

std::optional<double> protocol_utilization(std::span<const DailyAssetSnapshot> day) {
    Decimal debt_usd;
    Decimal deposit_usd;
    for (const DailyAssetSnapshot& s : day) {
        if (!s.close_price_usd) continue;
        debt_usd += s.outstanding_debt_native * *s.close_price_usd;
        deposit_usd += s.outstanding_deposit_native * *s.close_price_usd;
    }
    if (!deposit_usd.is_positive()) return std::nullopt;
    return debt_usd.to_double() / deposit_usd.to_double();
}

namespace {

// Per-day loan- or deposit-side tallies, split by new/repeat.
struct SideTally {
    std::set<std::string> actors;
    std::set<std::string> new_actors;
    Decimal vol_usd;
    Decimal new_vol_usd;
    std::int64_t cnt = 0;
    std::int64_t new_cnt = 0;

    void add(const EventRecord& ev, ActorClass cls) {
        actors.insert(ev.actor);
        const Decimal usd = ev.amount * ev.price_usd;
        vol_usd += usd;
        ++cnt;
        if (cls == ActorClass::New) {
            new_actors.insert(ev.actor);
            new_vol_usd += usd;
            ++new_cnt;
        }
    }
};

struct DayActivity {
    SideTally loans;
    SideTally deposits;
    Decimal liquidation_usd;
};

DayActivity tally_day(std::span<const EventRecord> day_events, const FirstSeenIndex& first_seen,
                      Day date) {
    DayActivity act;
    for (const EventRecord& ev : day_events) {
        switch (ev.kind) {
            case EventKind::Borrow:
                act.loans.add(ev, classify_actor(first_seen, Role::Borrower, ev.actor, date));
                break;
            case EventKind::Deposit:
                act.deposits.add(ev, classify_actor(first_seen, Role::Depositor, ev.actor, date));
                break;
            case EventKind::Liquidation:
                act.liquidation_usd += ev.amount * ev.price_usd;
                break;
            default:
                break;
        }
    }
    return act;
}

std::optional<double> ratio_of(const Decimal& part, const Decimal& whole) {
    if (!whole.is_positive()) return std::nullopt;
    return part.to_double() / whole.to_double();
}

}  // namespace

RepeatRatios repeat_ratios(std::span<const EventRecord> day_events, const FirstSeenIndex& first_seen,
                           Day date) {
    const DayActivity act = tally_day(day_events, first_seen, date);
    RepeatRatios r;
    r.deposit = ratio_of(act.deposits.vol_usd - act.deposits.new_vol_usd, act.deposits.vol_usd);
    r.loan = ratio_of(act.loans.vol_usd - act.loans.new_vol_usd, act.loans.vol_usd);
    return r;
}

PanelResult build_daily_panel(std::span<const EventRecord> events, const PanelOptions& options) {
    std::vector<EventRecord> filtered;
    std::span<const EventRecord> work = events;
    if (options.asset_filter) {
        filtered.reserve(events.size());
        for (const EventRecord& ev : events) {
            if (options.asset_filter->count(ev.asset)) filtered.push_back(ev);
        }
        work = filtered;
    }
    if (work.empty()) {
        throw MetricsError("no events" +
                           std::string(options.asset_filter ? " after asset filter" : ""));
    }

    ReplayResult replayed = replay(work, options.mode);

    PanelResult result;
    for (const ReplayWarning& w : replayed.warnings) {
        result.warnings.push_back("event " + std::to_string(w.event_index) + ": " + w.message);
    }

    // Snapshots grouped by day, in replay order.
    std::map<Day, std::vector<const DailyAssetSnapshot*>> by_day;
    for (const DailyAssetSnapshot& s : replayed.snapshots) by_day[s.date].push_back(&s);

    const Day first_day = work.front().day();
    const Day last_day = work.back().day();

    FirstSeenIndex first_seen;
    std::map<std::string, DailyAssetSnapshot> carried;  // last snapshot per asset
    std::size_t next_event = 0;

    for (Day day = first_day; day <= last_day; ++day) {
        // Events of this day (work is sorted; replay verified that).
        const std::size_t begin = next_event;
        while (next_event < work.size() && work[next_event].day() == day) ++next_event;
        const std::span<const EventRecord> day_events = work.subspan(begin, next_event - begin);

        for (const EventRecord& ev : day_events) {
            if (ev.kind == EventKind::Deposit) first_seen.observe(Role::Depositor, ev.actor, day);
            if (ev.kind == EventKind::Borrow) first_seen.observe(Role::Borrower, ev.actor, day);
        }

        if (auto it = by_day.find(day); it != by_day.end()) {
            for (const DailyAssetSnapshot* s : it->second) carried[s->asset] = *s;
        } else {
            // Gap day: carry state forward under the prior close price.
            for (auto& [asset, snap] : carried) snap.date = day;
        }

        std::vector<DailyAssetSnapshot> snaps;
        snaps.reserve(carried.size());
        for (const auto& [asset, snap] : carried) snaps.push_back(snap);

        DailyPanelRow row;
        row.date = day;

        Decimal liquidity_usd;
        Decimal debt_usd;
        Decimal deposit_usd;
        for (const DailyAssetSnapshot& s : snaps) {
            if (!s.close_price_usd) {
                result.warnings.push_back("asset '" + s.asset + "' has no price on " +
                                          format_date(day) + "; skipped");
                continue;
            }
            liquidity_usd += s.liquidity_native * *s.close_price_usd;
            debt_usd += s.outstanding_debt_native * *s.close_price_usd;
            deposit_usd += s.outstanding_deposit_native * *s.close_price_usd;
            if (s.liquidity_native.is_negative()) {
                result.warnings.push_back("negative liquidity for asset '" + s.asset + "' on " +
                                          format_date(day));
            }
        }
        row.liquidity_usd = liquidity_usd;
        row.outstanding_loan_usd = debt_usd;
        row.outstanding_deposit_usd = deposit_usd;
        if (deposit_usd.is_positive()) {
            row.utilization = debt_usd.to_double() / deposit_usd.to_double();
        }

        const DayActivity act = tally_day(day_events, first_seen, day);

        row.borrower = static_cast<std::int64_t>(act.loans.actors.size());
        row.new_borrower = static_cast<std::int64_t>(act.loans.new_actors.size());
        row.repeat_borrower = row.borrower - row.new_borrower;
        row.loan_vol_usd = act.loans.vol_usd;
        row.new_loan_vol_usd = act.loans.new_vol_usd;
        row.repeat_loan_vol_usd = act.loans.vol_usd - act.loans.new_vol_usd;
        row.loan_cnt = act.loans.cnt;
        row.new_loan_cnt = act.loans.new_cnt;
        row.repeat_loan_cnt = act.loans.cnt - act.loans.new_cnt;
        if (act.loans.cnt > 0) {
            row.avg_loan_usd = act.loans.vol_usd.to_double() / static_cast<double>(act.loans.cnt);
        }
        row.liquidation_usd = act.liquidation_usd;

        row.depositor = static_cast<std::int64_t>(act.deposits.actors.size());
        row.new_depositor = static_cast<std::int64_t>(act.deposits.new_actors.size());
        row.repeat_depositor = row.depositor - row.new_depositor;
        row.deposit_vol_usd = act.deposits.vol_usd;
        row.new_deposit_vol_usd = act.deposits.new_vol_usd;
        row.repeat_deposit_vol_usd = act.deposits.vol_usd - act.deposits.new_vol_usd;
        row.deposit_cnt = act.deposits.cnt;
        row.new_deposit_cnt = act.deposits.new_cnt;
        row.repeat_deposit_cnt = act.deposits.cnt - act.deposits.new_cnt;
        if (act.deposits.cnt > 0) {
            row.avg_deposit_usd =
                act.deposits.vol_usd.to_double() / static_cast<double>(act.deposits.cnt);
        }

        row.repeat_loan_ratio = ratio_of(row.repeat_loan_vol_usd, row.loan_vol_usd);
        row.repeat_deposit_ratio = ratio_of(row.repeat_deposit_vol_usd, row.deposit_vol_usd);

        result.rows.push_back(std::move(row));
    }
    return result;
}

DescriptiveStats descriptive_stats(std::span<const double> series) {
    if (series.empty()) throw MetricsError("descriptive_stats: empty series");
    DescriptiveStats st;
    st.n = series.size();

    std::vector<double> sorted(series.begin(), series.end());
    std::sort(sorted.begin(), sorted.end());
    st.minimum = sorted.front();
    st.maximum = sorted.back();
    const std::size_t mid = sorted.size() / 2;
    st.median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);

    double sum = 0;
    for (double x : sorted) sum += x;
    st.mean = sum / static_cast<double>(st.n);

    if (st.n < 2) {
        st.stddev = std::numeric_limits<double>::quiet_NaN();
        return st;
    }
    double ss = 0;
    for (double x : sorted) ss += (x - st.mean) * (x - st.mean);
    st.stddev = std::sqrt(ss / static_cast<double>(st.n - 1));
    return st;
}

DescriptiveStats descriptive_stats(std::span<const std::optional<double>> series) {
    std::vector<double> present;
    present.reserve(series.size());
    for (const auto& v : series) {
        if (v) present.push_back(*v);
    }
    if (present.empty()) throw MetricsError("descriptive_stats: empty series after dropping missing");
    return descriptive_stats(std::span<const double>(present));
}

}  // namespace lprisk
