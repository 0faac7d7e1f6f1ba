#include "lprisk/metrics.hpp"

#include "support/random_log.hpp"

#include <doctest.h>

#include <cmath>

using namespace lprisk;

namespace {

Decimal dec(const char* s) { return *Decimal::parse(s); }

DailyAssetSnapshot snap(std::string asset, const char* deposit, const char* debt,
                        const char* price, Day date = 0) {
    DailyAssetSnapshot s;
    s.asset = std::move(asset);
    s.date = date;
    s.outstanding_deposit_native = dec(deposit);
    s.outstanding_debt_native = dec(debt);
    s.close_price_usd = dec(price);
    s.liquidity_native = s.outstanding_deposit_native - s.outstanding_debt_native;
    if (s.outstanding_deposit_native.is_positive()) {
        s.utilization =
            s.outstanding_debt_native.to_double() / s.outstanding_deposit_native.to_double();
    }
    return s;
}

EventRecord ev(const char* ts, EventKind kind, std::string asset, std::string actor,
               const char* amount, const char* price = "1") {
    EventRecord e;
    e.time = *parse_timestamp(ts);
    e.kind = kind;
    e.asset = std::move(asset);
    e.actor = std::move(actor);
    e.amount = dec(amount);
    e.price_usd = dec(price);
    return e;
}

}  // namespace

TEST_CASE("protocol liquidity sums liquidity times price") {
    std::vector<DailyAssetSnapshot> day{
        snap("A", "100", "30", "2"),  // liquidity 70 @ $2 = 140
        snap("B", "15", "5", "5"),    // liquidity 10 @ $5 = 50
    };
    CHECK(protocol_liquidity_usd(day) == doctest::Approx(190.0).epsilon(1e-12));

    std::vector<DailyAssetSnapshot> zero{snap("A", "50", "50", "3")};
    CHECK(protocol_liquidity_usd(zero) == doctest::Approx(0.0));
}

TEST_CASE("protocol liquidity skips unpriced assets with a warning") {
    auto unpriced = snap("C", "10", "0", "1");
    unpriced.close_price_usd.reset();
    std::vector<DailyAssetSnapshot> day{snap("A", "100", "30", "2"), unpriced};
    std::vector<std::string> warnings;
    CHECK(protocol_liquidity_usd(day, &warnings) == doctest::Approx(140.0));
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("C") != std::string::npos);
}

TEST_CASE("protocol liquidity rejects duplicate asset rows") {
    std::vector<DailyAssetSnapshot> day{snap("A", "1", "0", "1"), snap("A", "2", "0", "1")};
    CHECK_THROWS_AS(static_cast<void>(protocol_liquidity_usd(day)), MetricsError);
}

TEST_CASE("protocol utilization is value-weighted, not a mean of ratios") {
    std::vector<DailyAssetSnapshot> one{snap("A", "100", "30", "1")};
    CHECK(*protocol_utilization(one) == doctest::Approx(0.30).epsilon(1e-12));

    std::vector<DailyAssetSnapshot> even{snap("A", "100", "0", "1"), snap("B", "100", "100", "1")};
    CHECK(*protocol_utilization(even) == doctest::Approx(0.50).epsilon(1e-12));

    // Same balances, asymmetric prices: (0 + 100) / (300 + 100), the per-asset
    // mean would still be 0.50.
    std::vector<DailyAssetSnapshot> skewed{snap("A", "100", "0", "3"),
                                           snap("B", "100", "100", "1")};
    CHECK(*protocol_utilization(skewed) == doctest::Approx(0.25).epsilon(1e-12));

    std::vector<DailyAssetSnapshot> no_debt{snap("A", "10", "0", "1"), snap("B", "99", "0", "4")};
    CHECK(*protocol_utilization(no_debt) == doctest::Approx(0.0));
}

TEST_CASE("protocol utilization is undefined w/o deposits") {
    std::vector<DailyAssetSnapshot> empty_pool{snap("A", "0", "0", "5")};
    CHECK(!protocol_utilization(empty_pool).has_value());
}

TEST_CASE("utilization is invariant to a common price rescaling") {
    std::vector<DailyAssetSnapshot> day{snap("A", "100", "25", "2"), snap("B", "40", "10", "7"),
                                        snap("C", "3", "1", "11")};
    const double base = *protocol_utilization(day);
    for (auto& s : day) s.close_price_usd = *s.close_price_usd * dec("3.7");
    CHECK(*protocol_utilization(day) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("classify_actor marks first-day actors new, later repeat") {
    FirstSeenIndex index;
    const Day d1 = *parse_date("2021-01-01");
    const Day d2 = *parse_date("2021-01-02");
    index.observe(Role::Borrower, "b1", d1);
    CHECK(classify_actor(index, Role::Borrower, "b1", d1) == ActorClass::New);
    CHECK(classify_actor(index, Role::Borrower, "b1", d2) == ActorClass::Repeat);
    CHECK_THROWS_AS(static_cast<void>(classify_actor(index, Role::Borrower, "stranger", d1)),
                    MetricsError);
    // Roles are independent: depositing does not make a borrower known.
    index.observe(Role::Depositor, "d1", d1);
    CHECK_THROWS_AS(static_cast<void>(classify_actor(index, Role::Borrower, "d1", d1)),
                    MetricsError);
}

TEST_CASE("classification agrees with a brute-force first-occurrence scan") {
    testsupport::RandomLogConfig cfg;
    cfg.seed = 42;
    cfg.event_count = 800;
    const auto events = testsupport::make_random_valid_log(cfg);
    const FirstSeenIndex index = build_first_seen(events);

    // Brute force: earliest day per (role, actor) by linear scan.
    std::map<std::pair<int, std::string>, Day> earliest;
    for (const EventRecord& e : events) {
        int role = -1;
        if (e.kind == EventKind::Deposit) role = 0;
        if (e.kind == EventKind::Borrow) role = 1;
        if (role < 0) continue;
        auto key = std::make_pair(role, e.actor);
        auto it = earliest.find(key);
        if (it == earliest.end() || e.day() < it->second) earliest[key] = e.day();
    }
    for (const auto& [key, day] : earliest) {
        const Role role = key.first == 0 ? Role::Depositor : Role::Borrower;
        CHECK(index.first_seen(role, key.second) == day);
        CHECK(classify_actor(index, role, key.second, day) == ActorClass::New);
        CHECK(classify_actor(index, role, key.second, day + 1) == ActorClass::Repeat);
    }
}

TEST_CASE("repeat ratios split the day's volume by actor history") {
    const Day d1 = *parse_date("2021-01-01");
    const Day d2 = *parse_date("2021-01-02");
    FirstSeenIndex index;
    index.observe(Role::Borrower, "old1", d1);
    index.observe(Role::Borrower, "old2", d1);

    // All of day 2's loans come from repeat borrowers.
    std::vector<EventRecord> all_repeat{
        ev("2021-01-02T10:00:00Z", EventKind::Borrow, "ETH", "old1", "10", "2"),
        ev("2021-01-02T11:00:00Z", EventKind::Borrow, "ETH", "old2", "5", "2"),
    };
    for (const auto& e : all_repeat) index.observe(Role::Borrower, e.actor, e.day());
    CHECK(*repeat_ratios(all_repeat, index, d2).loan == doctest::Approx(1.0));

    // Day 1 of any log: everyone is new.
    FirstSeenIndex fresh;
    std::vector<EventRecord> first_day{
        ev("2021-01-01T10:00:00Z", EventKind::Borrow, "ETH", "a", "10", "2"),
        ev("2021-01-01T10:30:00Z", EventKind::Deposit, "ETH", "b", "50", "2"),
    };
    for (const auto& e : first_day) {
        fresh.observe(e.kind == EventKind::Borrow ? Role::Borrower : Role::Depositor, e.actor,
                      e.day());
    }
    const auto day1 = repeat_ratios(first_day, fresh, d1);
    CHECK(*day1.loan == doctest::Approx(0.0));
    CHECK(*day1.deposit == doctest::Approx(0.0));

    // Mixed day: repeat loans $80, new loans $20.
    FirstSeenIndex mixed_index;
    mixed_index.observe(Role::Borrower, "veteran", d1);
    std::vector<EventRecord> mixed{
        ev("2021-01-02T10:00:00Z", EventKind::Borrow, "ETH", "veteran", "40", "2"),
        ev("2021-01-02T11:00:00Z", EventKind::Borrow, "ETH", "rookie", "10", "2"),
    };
    for (const auto& e : mixed) mixed_index.observe(Role::Borrower, e.actor, e.day());
    CHECK(*repeat_ratios(mixed, mixed_index, d2).loan == doctest::Approx(0.80).epsilon(1e-12));

    // No volume at all: both ratios missing.
    std::vector<EventRecord> nothing;
    const auto quiet = repeat_ratios(nothing, index, d2);
    CHECK(!quiet.loan.has_value());
    CHECK(!quiet.deposit.has_value());
}

TEST_CASE("same-day first loans count once as new, all volume new") {
    const Day d1 = *parse_date("2021-01-01");
    std::vector<EventRecord> events{
        ev("2021-01-01T10:00:00Z", EventKind::Borrow, "ETH", "x", "10", "1"),
        ev("2021-01-01T12:00:00Z", EventKind::Borrow, "ETH", "x", "30", "1"),
    };
    const auto panel = build_daily_panel(events);
    REQUIRE(panel.rows.size() == 1);
    CHECK(panel.rows[0].borrower == 1);
    CHECK(panel.rows[0].new_borrower == 1);
    CHECK(panel.rows[0].repeat_borrower == 0);
    CHECK(panel.rows[0].new_loan_vol_usd == dec("40"));
    CHECK(panel.rows[0].new_loan_cnt == 2);
    CHECK(*panel.rows[0].repeat_loan_ratio == doctest::Approx(0.0));
    CHECK(panel.rows[0].date == d1);
}

TEST_CASE("daily panel covers every day and carries totals across gaps") {
    std::vector<EventRecord> events{
        ev("2021-01-01T10:00:00Z", EventKind::Deposit, "ETH", "u1", "100", "2"),
        ev("2021-01-01T11:00:00Z", EventKind::Borrow, "ETH", "b1", "30", "2"),
        // nothing on Jan 2 and Jan 3
        ev("2021-01-04T10:00:00Z", EventKind::Repay, "ETH", "b1", "30", "2.5"),
    };
    const auto panel = build_daily_panel(events);
    REQUIRE(panel.rows.size() == 4);

    const DailyPanelRow& gap = panel.rows[1];
    CHECK(gap.date == *parse_date("2021-01-02"));
    CHECK(gap.loan_cnt == 0);
    CHECK(gap.deposit_cnt == 0);
    CHECK(gap.loan_vol_usd == Decimal());
    CHECK(!gap.repeat_loan_ratio.has_value());   // no volume
    CHECK(!gap.avg_loan_usd.has_value());
    // carried state: deposit 100, debt 30 @ carried price 2
    CHECK(gap.outstanding_deposit_usd == dec("200"));
    CHECK(gap.outstanding_loan_usd == dec("60"));
    CHECK(gap.liquidity_usd == dec("140"));
    CHECK(*gap.utilization == doctest::Approx(0.3).epsilon(1e-12));

    // day 4 marks at the new price 2.5 with debt repaid
    const DailyPanelRow& last = panel.rows[3];
    CHECK(last.outstanding_loan_usd == Decimal());
    CHECK(last.outstanding_deposit_usd == dec("250"));
}

TEST_CASE("daily panel row identities hold") {
    testsupport::RandomLogConfig cfg;
    cfg.seed = 5;
    cfg.event_count = 500;
    const auto events = testsupport::make_random_valid_log(cfg);
    const auto panel = build_daily_panel(events);
    for (const DailyPanelRow& r : panel.rows) {
        CHECK(r.borrower == r.new_borrower + r.repeat_borrower);
        CHECK(r.depositor == r.new_depositor + r.repeat_depositor);
        CHECK(r.loan_cnt == r.new_loan_cnt + r.repeat_loan_cnt);
        CHECK(r.deposit_cnt == r.new_deposit_cnt + r.repeat_deposit_cnt);
        CHECK(r.loan_vol_usd == r.new_loan_vol_usd + r.repeat_loan_vol_usd);
        CHECK(r.deposit_vol_usd == r.new_deposit_vol_usd + r.repeat_deposit_vol_usd);
        if (r.loan_cnt > 0) {
            CHECK(*r.avg_loan_usd ==
                  doctest::Approx(r.loan_vol_usd.to_double() / static_cast<double>(r.loan_cnt)));
        }
        if (r.repeat_loan_ratio) {
            CHECK(*r.repeat_loan_ratio >= 0.0);
            CHECK(*r.repeat_loan_ratio <= 1.0);
        }
        if (r.utilization) CHECK(*r.utilization >= 0.0);
    }
}

TEST_CASE("asset filter restricts every sum to the listed symbols") {
    std::vector<EventRecord> events{
        ev("2021-01-01T10:00:00Z", EventKind::Deposit, "ETH", "u1", "10", "100"),
        ev("2021-01-01T11:00:00Z", EventKind::Deposit, "OBSCURE", "u2", "999", "3"),
        ev("2021-01-02T10:00:00Z", EventKind::Borrow, "OBSCURE", "b1", "100", "3"),
        ev("2021-01-02T11:00:00Z", EventKind::Borrow, "ETH", "b2", "2", "100"),
    };
    PanelOptions options;
    options.asset_filter = std::set<std::string>{"ETH"};
    const auto panel = build_daily_panel(events, options);
    REQUIRE(panel.rows.size() == 2);
    CHECK(panel.rows[0].deposit_vol_usd == dec("1000"));  // OBSCURE's 999*3 excluded
    CHECK(panel.rows[1].loan_vol_usd == dec("200"));
    CHECK(panel.rows[1].outstanding_deposit_usd == dec("1000"));
    CHECK(panel.rows[0].depositor == 1);
}

TEST_CASE("panel rebuild is a pure function of the log") {
    testsupport::RandomLogConfig cfg;
    cfg.seed = 17;
    cfg.event_count = 300;
    const auto events = testsupport::make_random_valid_log(cfg);
    const auto a = build_daily_panel(events);
    const auto b = build_daily_panel(events);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].liquidity_usd == b.rows[i].liquidity_usd);
        CHECK(a.rows[i].loan_vol_usd == b.rows[i].loan_vol_usd);
        CHECK(a.rows[i].utilization == b.rows[i].utilization);
    }
}

TEST_CASE("daily panel equals an independent day-sliced recomputation") {
    testsupport::RandomLogConfig cfg;
    cfg.seed = 31;
    cfg.event_count = 1000;
    const auto events = testsupport::make_random_valid_log(cfg);
    const auto panel = build_daily_panel(events);

    // Oracle: for each row day, recompute everything from raw events with
    // plain per-day scans.
    for (const DailyPanelRow& row : panel.rows) {
        // first-seen by brute force over all events up to the row's day
        std::map<std::string, Day> first_borrow, first_deposit;
        for (const EventRecord& e : events) {
            if (e.day() > row.date) continue;
            if (e.kind == EventKind::Borrow && !first_borrow.count(e.actor)) {
                first_borrow[e.actor] = e.day();
            }
            if (e.kind == EventKind::Deposit && !first_deposit.count(e.actor)) {
                first_deposit[e.actor] = e.day();
            }
        }
        Decimal loan_vol, new_loan_vol, dep_vol, new_dep_vol, liq_usd;
        std::set<std::string> borrowers, new_borrowers, depositors, new_depositors;
        std::int64_t loan_cnt = 0, dep_cnt = 0;
        std::map<std::string, std::pair<Decimal, Decimal>> native;  // asset -> (dep, debt)
        std::map<std::string, Decimal> price;
        for (const EventRecord& e : events) {
            if (e.day() > row.date) break;
            const Decimal usd = e.amount * e.price_usd;
            if (e.day() <= row.date) {
                auto& [dep, debt] = native[e.asset];
                switch (e.kind) {
                    case EventKind::Deposit: dep += e.amount; break;
                    case EventKind::Withdraw: dep -= e.amount; break;
                    case EventKind::Borrow: debt += e.amount; break;
                    case EventKind::Repay: debt -= e.amount; break;
                    case EventKind::Liquidation: debt -= e.amount; break;
                }
                price[e.asset] = e.price_usd;
            }
            if (e.day() != row.date) continue;
            switch (e.kind) {
                case EventKind::Borrow:
                    loan_vol += usd;
                    ++loan_cnt;
                    borrowers.insert(e.actor);
                    if (first_borrow[e.actor] == row.date) {
                        new_borrowers.insert(e.actor);
                        new_loan_vol += usd;
                    }
                    break;
                case EventKind::Deposit:
                    dep_vol += usd;
                    ++dep_cnt;
                    depositors.insert(e.actor);
                    if (first_deposit[e.actor] == row.date) {
                        new_depositors.insert(e.actor);
                        new_dep_vol += usd;
                    }
                    break;
                case EventKind::Liquidation: liq_usd += usd; break;
                default: break;
            }
        }
        CHECK(row.loan_vol_usd == loan_vol);
        CHECK(row.new_loan_vol_usd == new_loan_vol);
        CHECK(row.deposit_vol_usd == dep_vol);
        CHECK(row.new_deposit_vol_usd == new_dep_vol);
        CHECK(row.liquidation_usd == liq_usd);
        CHECK(row.loan_cnt == loan_cnt);
        CHECK(row.deposit_cnt == dep_cnt);
        CHECK(row.borrower == static_cast<std::int64_t>(borrowers.size()));
        CHECK(row.new_borrower == static_cast<std::int64_t>(new_borrowers.size()));
        CHECK(row.depositor == static_cast<std::int64_t>(depositors.size()));
        CHECK(row.new_depositor == static_cast<std::int64_t>(new_depositors.size()));

        Decimal liquidity_usd, deposit_usd, debt_usd;
        for (const auto& [asset, balances] : native) {
            const Decimal& p = price.at(asset);
            liquidity_usd += (balances.first - balances.second) * p;
            deposit_usd += balances.first * p;
            debt_usd += balances.second * p;
        }
        CHECK(row.liquidity_usd == liquidity_usd);
        CHECK(row.outstanding_deposit_usd == deposit_usd);
        CHECK(row.outstanding_loan_usd == debt_usd);
        // Eq: liquidity + debt = deposit, exactly.
        CHECK(row.liquidity_usd + row.outstanding_loan_usd == row.outstanding_deposit_usd);
    }
}

TEST_CASE("build_daily_panel rejects an empty log") {
    std::vector<EventRecord> none;
    CHECK_THROWS_WITH_AS(static_cast<void>(build_daily_panel(none)), doctest::Contains("no events"),
                         MetricsError);

    std::vector<EventRecord> events{
        ev("2021-01-01T10:00:00Z", EventKind::Deposit, "ETH", "u1", "1", "1")};
    PanelOptions options;
    options.asset_filter = std::set<std::string>{"NOPE"};
    CHECK_THROWS_AS(static_cast<void>(build_daily_panel(events, options)), MetricsError);
}

TEST_CASE("descriptive stats textbook cases") {
    const double simple[] = {1, 2, 3};
    const auto st = descriptive_stats(std::span<const double>(simple));
    CHECK(st.mean == doctest::Approx(2.0));
    CHECK(st.median == doctest::Approx(2.0));
    CHECK(st.maximum == doctest::Approx(3.0));
    CHECK(st.minimum == doctest::Approx(1.0));
    CHECK(st.stddev == doctest::Approx(1.0));

    const double constant[] = {5, 5, 5, 5};
    CHECK(descriptive_stats(std::span<const double>(constant)).stddev == doctest::Approx(0.0));

    const double even[] = {1, 2, 3, 4};
    CHECK(descriptive_stats(std::span<const double>(even)).median == doctest::Approx(2.5));

    CHECK_THROWS_AS(static_cast<void>(descriptive_stats(std::span<const double>())), MetricsError);

    std::vector<std::optional<double>> with_missing{1.0, std::nullopt, 3.0};
    const auto st2 = descriptive_stats(std::span<const std::optional<double>>(with_missing));
    CHECK(st2.n == 2);
    CHECK(st2.mean == doctest::Approx(2.0));

    std::vector<std::optional<double>> all_missing{std::nullopt, std::nullopt};
    CHECK_THROWS_AS(
        static_cast<void>(descriptive_stats(std::span<const std::optional<double>>(all_missing))),
        MetricsError);
}

TEST_CASE("descriptive stats match an independent two-pass computation") {
    std::mt19937_64 gen(1234);
    std::vector<double> xs;
    for (int i = 0; i < 100; ++i) {
        xs.push_back(static_cast<double>(gen() % 1000000) / 997.0 - 300.0);
    }
    const auto st = descriptive_stats(std::span<const double>(xs));

    double sum = 0;
    for (double x : xs) sum += x;
    const double mean = sum / static_cast<double>(xs.size());
    double ss = 0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    CHECK(st.mean == doctest::Approx(mean).epsilon(1e-12));
    CHECK(st.stddev == doctest::Approx(sd).epsilon(1e-12));
}
