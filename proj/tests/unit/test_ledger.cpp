#include "lprisk/ledger.hpp"

#include "support/random_log.hpp"

#include <doctest.h>

using namespace lprisk;

namespace {

Decimal dec(const char* s) { return *Decimal::parse(s); }

EventRecord make_event(const char* ts, EventKind kind, std::string asset, std::string actor,
                       const char* amount, const char* price = "1") {
    EventRecord ev;
    ev.time = *parse_timestamp(ts);
    ev.kind = kind;
    ev.asset = std::move(asset);
    ev.actor = std::move(actor);
    ev.amount = dec(amount);
    ev.price_usd = dec(price);
    return ev;
}

// Brute-force cumulative sums straight off the event list: supply per actor,
// demand per actor, and the two pool aggregates.
struct BruteTotals {
    std::map<std::string, Decimal> supply;
    std::map<std::string, Decimal> demand;
    Decimal liquidator_total;

    Decimal outstanding_deposit() const {
        Decimal t;
        for (const auto& [_, v] : supply) t += v;
        return t;
    }
    Decimal outstanding_debt() const {
        Decimal t;
        for (const auto& [_, v] : demand) t += v;
        return t - liquidator_total;
    }
};

BruteTotals brute_force_asset(std::span<const EventRecord> events, const std::string& asset) {
    BruteTotals totals;
    for (const EventRecord& ev : events) {
        if (ev.asset != asset) continue;
        switch (ev.kind) {
            case EventKind::Deposit: totals.supply[ev.actor] += ev.amount; break;
            case EventKind::Withdraw: totals.supply[ev.actor] -= ev.amount; break;
            case EventKind::Borrow: totals.demand[ev.actor] += ev.amount; break;
            case EventKind::Repay: totals.demand[ev.actor] -= ev.amount; break;
            case EventKind::Liquidation: totals.liquidator_total += ev.amount; break;
        }
    }
    return totals;
}

}  // namespace

TEST_CASE("single deposit accumulates") {
    PoolState pool;
    pool.asset = "ETH";
    apply_event(pool, make_event("2021-01-01T00:00:00Z", EventKind::Deposit, "ETH", "u1", "100"),
                ReplayMode::Strict);
    CHECK(pool.supply_by_user.at("u1") == dec("100"));
    CHECK(pool.outstanding_deposit == dec("100"));
    CHECK(user_supply(pool, "u1") == dec("100"));
    CHECK(user_supply(pool, "nobody") == Decimal());
}

TEST_CASE("full withdraw round-trips to zero") {
    PoolState pool;
    pool.asset = "ETH";
    apply_event(pool, make_event("2021-01-01T00:00:00Z", EventKind::Deposit, "ETH", "u1", "100"),
                ReplayMode::Strict);
    apply_event(pool, make_event("2021-01-01T01:00:00Z", EventKind::Withdraw, "ETH", "u1", "100"),
                ReplayMode::Strict);
    CHECK(pool.supply_by_user.at("u1") == Decimal());
    CHECK(pool.outstanding_deposit == Decimal());
}

TEST_CASE("user supply nets deposits against withdrawals") {
    PoolState pool;
    pool.asset = "ETH";
    apply_event(pool, make_event("2021-01-01T00:00:00Z", EventKind::Deposit, "ETH", "u1", "10"),
                ReplayMode::Strict);
    apply_event(pool, make_event("2021-01-01T01:00:00Z", EventKind::Deposit, "ETH", "u1", "5"),
                ReplayMode::Strict);
    apply_event(pool, make_event("2021-01-01T02:00:00Z", EventKind::Withdraw, "ETH", "u1", "3"),
                ReplayMode::Strict);
    CHECK(user_supply(pool, "u1") == dec("12"));
}

TEST_CASE("user demand nets borrows against repays") {
    PoolState pool;
    pool.asset = "DAI";
    apply_event(pool, make_event("2021-01-01T00:00:00Z", EventKind::Borrow, "DAI", "b1", "40"),
                ReplayMode::Strict);
    apply_event(pool, make_event("2021-01-01T01:00:00Z", EventKind::Repay, "DAI", "b1", "15"),
                ReplayMode::Strict);
    CHECK(user_demand(pool, "b1") == dec("25"));

    apply_event(pool, make_event("2021-01-01T02:00:00Z", EventKind::Repay, "DAI", "b1", "25"),
                ReplayMode::Strict);
    CHECK(user_demand(pool, "b1") == Decimal());  // closed loan
    CHECK(user_demand(pool, "unknown") == Decimal());
}

TEST_CASE("liquidation reduces outstanding debt via the aggregate") {
    PoolState pool;
    pool.asset = "DAI";
    apply_event(pool, make_event("2021-01-01T00:00:00Z", EventKind::Borrow, "DAI", "u2", "50"),
                ReplayMode::Strict);
    apply_event(pool,
                make_event("2021-01-01T01:00:00Z", EventKind::Liquidation, "DAI", "liq1", "20"),
                ReplayMode::Strict);
    CHECK(pool.liquidator_repaid_total == dec("20"));
    CHECK(pool.outstanding_debt == dec("30"));    // b=50, r=0, l=20
    CHECK(user_demand(pool, "u2") == dec("50"));  // per-user demand untouched
}

TEST_CASE("strict mode rejects overdrafts, lenient clamps with a warning") {
    auto overdraft = make_event("2021-01-01T00:00:00Z", EventKind::Withdraw, "ETH", "u1", "5");

    PoolState strict_pool;
    strict_pool.asset = "ETH";
    CHECK_THROWS_AS(apply_event(strict_pool, overdraft, ReplayMode::Strict), LedgerError);

    PoolState lenient_pool;
    lenient_pool.asset = "ETH";
    const auto warning = apply_event(lenient_pool, overdraft, ReplayMode::Lenient);
    REQUIRE(warning.has_value());
    CHECK(lenient_pool.supply_by_user.at("u1") == Decimal());
    CHECK(lenient_pool.outstanding_deposit == Decimal());

    PoolState p2;
    p2.asset = "ETH";
    auto over_repay = make_event("2021-01-01T00:00:00Z", EventKind::Repay, "ETH", "b1", "7");
    CHECK_THROWS_AS(apply_event(p2, over_repay, ReplayMode::Strict), LedgerError);
    CHECK(apply_event(p2, over_repay, ReplayMode::Lenient).has_value());
    CHECK(p2.outstanding_debt == Decimal());

    PoolState p3;
    p3.asset = "ETH";
    apply_event(p3, make_event("2021-01-01T00:00:00Z", EventKind::Borrow, "ETH", "b1", "10"),
                ReplayMode::Strict);
    auto over_liq = make_event("2021-01-01T01:00:00Z", EventKind::Liquidation, "ETH", "liq", "11");
    PoolState p3_strict = p3;
    CHECK_THROWS_AS(apply_event(p3_strict, over_liq, ReplayMode::Strict), LedgerError);
    CHECK(apply_event(p3, over_liq, ReplayMode::Lenient).has_value());
    CHECK(p3.outstanding_debt == Decimal());
    CHECK(p3.liquidator_repaid_total == dec("10"));  // clamped, identity preserved
}

TEST_CASE("apply_event is deterministic") {
    const auto ev = make_event("2021-01-01T00:00:00Z", EventKind::Deposit, "ETH", "u1", "3.14");
    PoolState a;
    a.asset = "ETH";
    PoolState b;
    b.asset = "ETH";
    apply_event(a, ev, ReplayMode::Strict);
    apply_event(b, ev, ReplayMode::Strict);
    CHECK(a.outstanding_deposit == b.outstanding_deposit);
    CHECK(a.supply_by_user == b.supply_by_user);
}

TEST_CASE("replay cardinality and snapshot shape") {
    std::vector<EventRecord> events{
        make_event("2021-01-01T10:00:00Z", EventKind::Deposit, "ETH", "u1", "10", "2000"),
        make_event("2021-01-02T10:00:00Z", EventKind::Deposit, "DAI", "u2", "500", "1"),
        make_event("2021-01-03T10:00:00Z", EventKind::Borrow, "ETH", "b1", "2", "2100"),
    };
    const auto result = replay(events, ReplayMode::Strict);
    CHECK(result.pools.size() == 2);
    CHECK(result.snapshots.size() <= 6);  // 2 assets x 3 days upper bound
    CHECK(result.snapshots.front().asset == "ETH");
    CHECK(result.snapshots.front().close_price_usd == dec("2000"));

    // DAI's day-3 snapshot carries its day-2 price forward
    bool found = false;
    for (const auto& s : result.snapshots) {
        if (s.asset == "DAI" && s.date == *parse_date("2021-01-03")) {
            CHECK(s.close_price_usd == dec("1"));
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("replay rejects unsorted input naming the first bad index") {
    std::vector<EventRecord> events{
        make_event("2021-01-02T10:00:00Z", EventKind::Deposit, "ETH", "u1", "10"),
        make_event("2021-01-01T10:00:00Z", EventKind::Deposit, "ETH", "u1", "10"),
    };
    CHECK_THROWS_WITH_AS(static_cast<void>(replay(events, ReplayMode::Strict)),
                         doctest::Contains("index 1"), LedgerError);
}

TEST_CASE("replay error carries the event index") {
    std::vector<EventRecord> events{
        make_event("2021-01-01T10:00:00Z", EventKind::Deposit, "ETH", "u1", "10"),
        make_event("2021-01-01T11:00:00Z", EventKind::Withdraw, "ETH", "u1", "11"),
    };
    CHECK_THROWS_WITH_AS(static_cast<void>(replay(events, ReplayMode::Strict)),
                         doctest::Contains("event 1"), LedgerError);
}

TEST_CASE("replay equals brute-force sums on random valid logs") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        testsupport::RandomLogConfig cfg;
        cfg.seed = seed;
        cfg.event_count = 1000;
        const auto events = testsupport::make_random_valid_log(cfg);
        const auto result = replay(events, ReplayMode::Strict);
        CHECK(result.warnings.empty());
        for (const auto& [asset, pool] : result.pools) {
            const auto brute = brute_force_asset(events, asset);
            CHECK(pool.outstanding_deposit == brute.outstanding_deposit());
            CHECK(pool.outstanding_debt == brute.outstanding_debt());
            for (const auto& [actor, expected] : brute.supply) {
                CHECK(user_supply(pool, actor) == expected);
            }
            for (const auto& [actor, expected] : brute.demand) {
                CHECK(user_demand(pool, actor) == expected);
            }
        }
    }
}

TEST_CASE("strict replay keeps every per-user balance non-negative") {
    testsupport::RandomLogConfig cfg;
    cfg.seed = 7;
    cfg.event_count = 600;
    const auto events = testsupport::make_random_valid_log(cfg);

    std::map<std::string, PoolState> pools;
    for (const EventRecord& ev : events) {
        auto [it, inserted] = pools.try_emplace(ev.asset);
        if (inserted) it->second.asset = ev.asset;
        apply_event(it->second, ev, ReplayMode::Strict);
        for (const auto& [_, v] : it->second.supply_by_user) CHECK(!v.is_negative());
        for (const auto& [_, v] : it->second.debt_by_user) CHECK(!v.is_negative());
        CHECK(!it->second.outstanding_debt.is_negative());
    }
}

TEST_CASE("replay is prefix-monotone") {
    testsupport::RandomLogConfig cfg;
    cfg.seed = 11;
    cfg.event_count = 400;
    const auto events = testsupport::make_random_valid_log(cfg);
    const std::span<const EventRecord> all(events);

    const auto whole = replay(all, ReplayMode::Strict);

    // Replay a prefix, then feed the suffix into the same pools.
    const std::size_t cut = events.size() / 3;
    auto partial = replay(all.subspan(0, cut), ReplayMode::Strict);
    for (std::size_t i = cut; i < events.size(); ++i) {
        auto [it, inserted] = partial.pools.try_emplace(events[i].asset);
        if (inserted) it->second.asset = events[i].asset;
        apply_event(it->second, events[i], ReplayMode::Strict);
    }
    REQUIRE(partial.pools.size() == whole.pools.size());
    for (const auto& [asset, pool] : whole.pools) {
        const PoolState& other = partial.pools.at(asset);
        CHECK(other.outstanding_deposit == pool.outstanding_deposit);
        CHECK(other.outstanding_debt == pool.outstanding_debt);
        CHECK(other.supply_by_user == pool.supply_by_user);
        CHECK(other.debt_by_user == pool.debt_by_user);
        CHECK(other.liquidator_repaid_total == pool.liquidator_repaid_total);
    }
}

TEST_CASE("deposit plus equal withdraw is a ledger no-op for aggregates") {
    testsupport::RandomLogConfig cfg;
    cfg.seed = 3;
    cfg.event_count = 100;
    cfg.span_days = 10;
    auto events = testsupport::make_random_valid_log(cfg);
    const auto before = replay(events, ReplayMode::Strict);

    auto paired = events;
    paired.push_back(
        make_event("2021-02-10T00:00:00Z", EventKind::Deposit, "AST0", "fresh", "123.456", "2"));
    paired.push_back(
        make_event("2021-02-10T00:00:01Z", EventKind::Withdraw, "AST0", "fresh", "123.456", "2"));
    const auto after = replay(paired, ReplayMode::Strict);
    CHECK(after.pools.at("AST0").outstanding_deposit ==
          before.pools.at("AST0").outstanding_deposit);
    CHECK(after.pools.at("AST0").outstanding_debt == before.pools.at("AST0").outstanding_debt);
}

TEST_CASE("pool invariants hold at every prefix of a valid log") {
    testsupport::RandomLogConfig cfg;
    cfg.seed = 21;
    cfg.event_count = 300;
    const auto events = testsupport::make_random_valid_log(cfg);

    std::map<std::string, PoolState> pools;
    for (const EventRecord& ev : events) {
        auto [it, inserted] = pools.try_emplace(ev.asset);
        if (inserted) it->second.asset = ev.asset;
        apply_event(it->second, ev, ReplayMode::Strict);

        const PoolState& p = it->second;
        Decimal supply_sum;
        for (const auto& [_, v] : p.supply_by_user) supply_sum += v;
        Decimal debt_sum;
        for (const auto& [_, v] : p.debt_by_user) debt_sum += v;
        CHECK(p.outstanding_deposit == supply_sum);
        CHECK(p.outstanding_debt == debt_sum - p.liquidator_repaid_total);
    }
}
