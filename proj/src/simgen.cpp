#include "lprisk/simgen.hpp"

#include "lprisk/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <random>
#include <set>
#include <sstream>

namespace lprisk {

namespace {

// All randomness flows through one engine with explicit transforms, so a
// config + seed pins the byte stream of the outputs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() {  // [0, 1)
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double normal() {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
    }

    int poisson(double lambda) {
        if (lambda <= 0) return 0;
        if (lambda > 30) {  // normal approximation is plenty for event counts
            return std::max(0, static_cast<int>(std::lround(lambda + std::sqrt(lambda) * normal())));
        }
        const double limit = std::exp(-lambda);
        int k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > limit);
        return k - 1;
    }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }

    double lognormal(double mean, double sigma) {
        return mean * std::exp(sigma * normal() - 0.5 * sigma * sigma);
    }

private:
    std::mt19937_64 gen_;
};

Decimal quantize(double v, int digits) {
    if (v <= 0 || !std::isfinite(v)) return Decimal();
    double scaled = v;
    for (int i = 0; i < digits; ++i) scaled *= 10.0;
    if (scaled > 9e18) scaled = 9e18;
    return Decimal::from_parts(static_cast<long long>(std::llround(scaled)), digits);
}

Decimal quantize_floor(double v, int digits) {
    if (v <= 0 || !std::isfinite(v)) return Decimal();
    double scaled = v;
    for (int i = 0; i < digits; ++i) scaled *= 10.0;
    if (scaled > 9e18) scaled = 9e18;
    return Decimal::from_parts(static_cast<long long>(std::floor(scaled)), digits);
}

constexpr int kAmountDigits = 6;
constexpr int kPriceDigits = 8;
constexpr double kCollateralHeadroom = 1.05;

struct PoolSim {
    Decimal deposit_total;
    Decimal debt_total;
    Decimal liquidity() const { return deposit_total - debt_total; }
};

std::string actor_name(const char* prefix, int i) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%s%03d", prefix, i + 1);
    return buf;
}

}  // namespace

std::vector<std::string> validate_config(const ScenarioConfig& c) {
    std::vector<std::string> errors;
    auto bad = [&](const std::string& m) { errors.push_back(m); };

    if (c.horizon_days < 1) bad("horizon_days must be >= 1");
    if (c.assets.empty()) bad("at least one asset is required");
    std::set<std::string> symbols;
    for (const AssetConfig& a : c.assets) {
        if (a.symbol.empty()) bad("asset symbol must not be empty");
        if (!symbols.insert(a.symbol).second) bad("duplicate asset symbol '" + a.symbol + "'");
        if (a.initial_price <= 0) bad("asset '" + a.symbol + "' needs a positive price");
        if (a.daily_volatility < 0) bad("asset '" + a.symbol + "' has negative volatility");
    }
    if (c.depositor_count < 0 || c.borrower_count < 0 || c.liquidator_count < 0) {
        bad("agent counts must be non-negative");
    }
    if (c.deposit_intensity < 0 || c.withdraw_intensity < 0 || c.borrow_intensity < 0 ||
        c.repay_intensity < 0) {
        bad("intensities must be non-negative");
    }
    if (c.deposit_intensity > 0 && c.depositor_count < 1) {
        bad("deposit intensity requires at least one depositor");
    }
    if (c.borrow_intensity > 0 && c.borrower_count < 1) {
        bad("borrow intensity requires at least one borrower");
    }
    if (c.borrow_intensity > 0 && c.depositor_count < 1) {
        bad("borrow intensity requires depositors to fund the pool");
    }
    if (c.repeat_activity_prob < 0 || c.repeat_activity_prob > 1) {
        bad("repeat_activity_prob must be in [0,1]");
    }
    if (c.deposit_amount_mean <= 0 || c.borrow_amount_mean <= 0) {
        bad("amount means must be positive");
    }
    if (c.deposit_amount_sigma < 0 || c.borrow_amount_sigma < 0) {
        bad("amount sigmas must be non-negative");
    }
    if (c.collateral_factor <= 0 || c.collateral_factor > 1) {
        bad("collateral_factor must be in (0,1]");
    }
    if (c.liquidation_bonus < 0 || c.liquidation_bonus > 0.5) {
        bad("liquidation_bonus must be in [0,0.5]");
    }
    if (c.close_factor <= 0 || c.close_factor > 1) {
        bad("close_factor must be in (0,1]");
    }
    if (c.stress) {
        const StressConfig& s = *c.stress;
        if (s.start_day < 0) bad("stress start_day must be >= 0");
        if (s.duration < 1) bad("stress duration must be >= 1");
        if (s.start_day + s.duration > c.horizon_days) bad("stress window exceeds horizon");
        if (s.top_k_depositors < 1) bad("stress top_k_depositors must be >= 1");
        if (s.withdrawal_fraction_per_day <= 0 || s.withdrawal_fraction_per_day > 1) {
            bad("stress withdrawal fraction must be in (0,1]");
        }
    }
    return errors;
}

GenerationResult generate(const ScenarioConfig& config) {
    const auto errors = validate_config(config);
    if (!errors.empty()) {
        std::string msg = "infeasible scenario config:";
        for (const auto& e : errors) msg += "\n  - " + e;
        throw SimError(msg);
    }

    Rng rng(config.seed);
    GenerationResult out;

    const std::size_t n_assets = config.assets.size();
    std::vector<double> price(n_assets);
    std::vector<Decimal> price_dec(n_assets);
    for (std::size_t a = 0; a < n_assets; ++a) price[a] = config.assets[a].initial_price;

    std::vector<PoolSim> pools(n_assets);
    // supply[depositor][asset], econ debt and collateral per borrower
    std::vector<std::vector<Decimal>> supply(config.depositor_count,
                                             std::vector<Decimal>(n_assets));
    std::vector<std::vector<Decimal>> debt(config.borrower_count, std::vector<Decimal>(n_assets));
    std::vector<double> collateral_usd(config.borrower_count, 0.0);

    std::vector<int> active_depositors;
    std::set<int> active_depositor_set;
    std::vector<int> active_borrowers;
    std::set<int> active_borrower_set;
    int next_liquidator = 0;

    auto pick_agent = [&](std::vector<int>& active, std::set<int>& active_set, int roster) {
        const double u = rng.uniform();
        if (!active.empty() && u < config.repeat_activity_prob) {
            return active[rng.index(active.size())];
        }
        const int who = static_cast<int>(rng.index(static_cast<std::size_t>(roster)));
        if (active_set.insert(who).second) active.push_back(who);
        return who;
    };
    auto mark_active = [&](std::vector<int>& active, std::set<int>& active_set, int who) {
        if (active_set.insert(who).second) active.push_back(who);
    };

    std::int64_t gov_holder = 5000;
    std::int64_t developers = 8;
    double gov_price = 80.0;
    double circ_supply = 13e6;
    const double max_supply = 16e6;

    for (int d = 0; d < config.horizon_days; ++d) {
        const Day today = config.start_date + d;
        std::int64_t secs = 28800;
        std::set<std::string> day_actors;
        double day_borrow_vol_usd = 0;

        auto emit = [&](EventKind kind, const std::string& actor, std::size_t asset,
                        const Decimal& amount) {
            EventRecord ev;
            ev.time = Timestamp{static_cast<std::int64_t>(today) * 86400 +
                                std::min<std::int64_t>(secs++, 86399)};
            ev.kind = kind;
            ev.asset = config.assets[asset].symbol;
            ev.actor = actor;
            ev.amount = amount;
            ev.price_usd = price_dec[asset];
            out.events.push_back(std::move(ev));
            day_actors.insert(actor);
        };

        for (std::size_t a = 0; a < n_assets; ++a) {
            const double z = rng.normal();
            if (d > 0) price[a] *= std::exp(config.assets[a].daily_volatility * z);
            price_dec[a] = quantize(price[a], kPriceDigits);
        }

        const bool in_stress = config.stress && d >= config.stress->start_day &&
                               d < config.stress->start_day + config.stress->duration;

        if (in_stress) {
            // Rank depositors by the USD value of what they still hold.
            std::vector<std::pair<double, int>> ranked;
            for (int i = 0; i < config.depositor_count; ++i) {
                double total = 0;
                for (std::size_t a = 0; a < n_assets; ++a) {
                    total += supply[i][a].to_double() * price_dec[a].to_double();
                }
                if (total > 0) ranked.emplace_back(-total, i);
            }
            std::stable_sort(ranked.begin(), ranked.end());
            const std::size_t k =
                std::min<std::size_t>(ranked.size(),
                                      static_cast<std::size_t>(config.stress->top_k_depositors));
            for (std::size_t r = 0; r < k; ++r) {
                const int who = ranked[r].second;
                for (std::size_t a = 0; a < n_assets; ++a) {
                    const Decimal& held = supply[who][a];
                    if (!held.is_positive()) continue;
                    Decimal amount = quantize_floor(
                        config.stress->withdrawal_fraction_per_day * held.to_double(),
                        kAmountDigits);
                    if (held < amount) amount = held;
                    const Decimal room = pools[a].liquidity();
                    if (room < amount) amount = room;
                    if (!amount.is_positive()) continue;
                    emit(EventKind::Withdraw, actor_name("dep", who), a, amount);
                    supply[who][a] -= amount;
                    pools[a].deposit_total -= amount;
                }
            }
        } else {
            const int n_dep = rng.poisson(config.deposit_intensity);
            for (int i = 0; i < n_dep; ++i) {
                const int who = pick_agent(active_depositors, active_depositor_set,
                                           config.depositor_count);
                const std::size_t a = rng.index(n_assets);
                const double usd = rng.lognormal(config.deposit_amount_mean,
                                                 config.deposit_amount_sigma);
                const Decimal amount = quantize(usd / price_dec[a].to_double(), kAmountDigits);
                if (!amount.is_positive()) continue;
                emit(EventKind::Deposit, actor_name("dep", who), a, amount);
                supply[who][a] += amount;
                pools[a].deposit_total += amount;
            }

            const int n_wd = rng.poisson(config.withdraw_intensity);
            for (int i = 0; i < n_wd; ++i) {
                std::vector<std::pair<int, std::size_t>> positions;
                for (int w : active_depositors) {
                    for (std::size_t a = 0; a < n_assets; ++a) {
                        if (supply[w][a].is_positive()) positions.emplace_back(w, a);
                    }
                }
                if (positions.empty()) break;
                const auto [who, a] = positions[rng.index(positions.size())];
                const double frac = 0.1 + 0.8 * rng.uniform();
                Decimal amount =
                    quantize_floor(frac * supply[who][a].to_double(), kAmountDigits);
                if (supply[who][a] < amount) amount = supply[who][a];
                const Decimal room = pools[a].liquidity();
                if (room < amount) amount = room;
                if (!amount.is_positive()) continue;
                emit(EventKind::Withdraw, actor_name("dep", who), a, amount);
                supply[who][a] -= amount;
                pools[a].deposit_total -= amount;
            }

            const int n_bor = rng.poisson(config.borrow_intensity);
            for (int i = 0; i < n_bor; ++i) {
                const int who =
                    pick_agent(active_borrowers, active_borrower_set, config.borrower_count);
                const std::size_t a = rng.index(n_assets);
                const double pd = price_dec[a].to_double();
                const double usd =
                    rng.lognormal(config.borrow_amount_mean, config.borrow_amount_sigma);
                Decimal amount = quantize_floor(usd / pd, kAmountDigits);
                const Decimal room = pools[a].liquidity();
                if (room < amount) amount = room;
                if (!amount.is_positive()) continue;

                double debt_usd_after = amount.to_double() * pd;
                for (std::size_t b = 0; b < n_assets; ++b) {
                    debt_usd_after += debt[who][b].to_double() * price_dec[b].to_double();
                }
                const double required = debt_usd_after / config.collateral_factor;
                if (collateral_usd[who] < required) {
                    collateral_usd[who] = required * kCollateralHeadroom;
                }
                emit(EventKind::Borrow, actor_name("bor", who), a, amount);
                debt[who][a] += amount;
                pools[a].debt_total += amount;
                day_borrow_vol_usd += amount.to_double() * pd;
            }

            const int n_rep = rng.poisson(config.repay_intensity);
            for (int i = 0; i < n_rep; ++i) {
                std::vector<std::pair<int, std::size_t>> positions;
                for (int w : active_borrowers) {
                    for (std::size_t a = 0; a < n_assets; ++a) {
                        if (debt[w][a].is_positive()) positions.emplace_back(w, a);
                    }
                }
                if (positions.empty()) break;
                const auto [who, a] = positions[rng.index(positions.size())];
                const double frac = 0.1 + 0.9 * rng.uniform();
                Decimal amount = quantize_floor(frac * debt[who][a].to_double(), kAmountDigits);
                if (debt[who][a] < amount) amount = debt[who][a];
                if (!amount.is_positive()) continue;
                emit(EventKind::Repay, actor_name("bor", who), a, amount);
                debt[who][a] -= amount;
                pools[a].debt_total -= amount;
            }
        }

        // Liquidation sweep: only positions the day's price moves have pushed
        // past the collateral threshold, at most close_factor of the debt.
        if (config.liquidator_count > 0) {
            for (int who = 0; who < config.borrower_count; ++who) {
                double debt_usd = 0;
                std::size_t worst = 0;
                double worst_usd = -1;
                for (std::size_t a = 0; a < n_assets; ++a) {
                    const double v = debt[who][a].to_double() * price_dec[a].to_double();
                    debt_usd += v;
                    if (v > worst_usd) {
                        worst_usd = v;
                        worst = a;
                    }
                }
                if (debt_usd <= 0 ||
                    debt_usd <= config.collateral_factor * collateral_usd[who]) {
                    continue;
                }
                const Decimal pre_debt = debt[who][worst];
                Decimal repaid = quantize_floor(
                    config.close_factor * pre_debt.to_double(), kAmountDigits);
                if (pre_debt < repaid) repaid = pre_debt;
                if (!repaid.is_positive()) continue;
                const std::string liq = actor_name("liq", next_liquidator);
                next_liquidator = (next_liquidator + 1) % config.liquidator_count;
                emit(EventKind::Liquidation, liq, worst, repaid);
                debt[who][worst] -= repaid;
                pools[worst].debt_total -= repaid;
                const double seized = repaid.to_double() * price_dec[worst].to_double() *
                                      (1.0 + config.liquidation_bonus);
                collateral_usd[who] = std::max(0.0, collateral_usd[who] - seized);
                out.liquidations.push_back(
                    {today, actor_name("bor", who), config.assets[worst].symbol, pre_debt, repaid});
                mark_active(active_borrowers, active_borrower_set, who);
            }
        }

        // Factor panel row for the day.
        FactorPanelRow f;
        f.date = today;
        gov_price *= std::exp(0.03 * rng.normal());
        circ_supply = std::min(max_supply,
                               std::max(1e6, circ_supply + 2000.0 * rng.normal()));
        f.token_price_usd = gov_price;
        f.mktc_f = gov_price * max_supply;
        f.mktc_c = gov_price * circ_supply;
        double deposits_usd = 0;
        for (std::size_t a = 0; a < n_assets; ++a) {
            deposits_usd += pools[a].deposit_total.to_double() * price_dec[a].to_double();
        }
        f.tvl_usd = deposits_usd * (1.0 + 0.01 * rng.normal());
        f.revenue_usd = std::max(
            0.0, 100.0 + 0.0005 * day_borrow_vol_usd * (1.0 + 0.05 * rng.normal()));
        gov_holder = std::max<std::int64_t>(
            1, gov_holder + std::llround(2.0 + 5.0 * rng.normal()));
        f.holder_count = gov_holder;
        f.active_users = static_cast<std::int64_t>(day_actors.size());
        developers = std::max<std::int64_t>(1, developers + std::llround(0.7 * rng.normal()));
        f.developers = developers;
        out.factors.push_back(f);
    }
    return out;
}

std::vector<FactorPanelRow> inject_hacks(std::vector<FactorPanelRow> rows,
                                         std::span<const Day> hack_dates, const HackShock& shock) {
    if (rows.empty()) throw SimError("inject_hacks: empty factor panel");
    const Day first = rows.front().date;
    const Day last = rows.back().date;
    for (Day h : hack_dates) {
        if (h < first || h > last) {
            throw SimError("hack date " + format_date(h) + " outside panel range " +
                           format_date(first) + ".." + format_date(last));
        }
    }

    auto apply = [&](FactorPanelRow& row, const std::string& field, double rel, double abs) {
        auto shift = [&](std::optional<double>& v) {
            if (v) *v = *v * (1.0 + rel) + abs;
        };
        auto shift_count = [&](std::optional<std::int64_t>& v) {
            if (v) {
                const double x = static_cast<double>(*v) * (1.0 + rel) + abs;
                *v = std::max<std::int64_t>(0, std::llround(x));
            }
        };
        if (field == "mktc_f") shift(row.mktc_f);
        else if (field == "mktc_c") shift(row.mktc_c);
        else if (field == "token_price_usd") shift(row.token_price_usd);
        else if (field == "tvl_usd") shift(row.tvl_usd);
        else if (field == "revenue_usd") shift(row.revenue_usd);
        else if (field == "holder_count") shift_count(row.holder_count);
        else if (field == "active_users") shift_count(row.active_users);
        else if (field == "developers") shift_count(row.developers);
        else throw SimError("inject_hacks: unknown factor field '" + field + "'");
    };

    std::set<std::string> fields;
    for (const auto& [f, _] : shock.relative) fields.insert(f);
    for (const auto& [f, _] : shock.absolute) fields.insert(f);

    auto in_window = [&](Day t) {
        for (Day h : hack_dates) {
            if (h <= t && t <= h + 6) return true;
        }
        return false;
    };

    for (FactorPanelRow& row : rows) {
        if (!in_window(row.date)) continue;
        for (const std::string& f : fields) {
            double rel = 0, abs = 0;
            if (auto it = shock.relative.find(f); it != shock.relative.end()) rel = it->second;
            if (auto it = shock.absolute.find(f); it != shock.absolute.end()) abs = it->second;
            apply(row, f, rel, abs);
        }
    }
    return rows;
}

ScenarioConfig parse_scenario_config(std::istream& in) {
    ScenarioConfig config;
    config.assets.clear();
    std::vector<std::string> errors;
    std::string line;
    std::size_t line_no = 0;

    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        if (a == std::string::npos) return std::string();
        return s.substr(a, b - a + 1);
    };

    auto ensure_stress = [&]() -> StressConfig& {
        if (!config.stress) config.stress.emplace();
        return *config.stress;
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(line_no) + ": expected key = value");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        auto as_double = [&](double& target) {
            try {
                std::size_t pos = 0;
                target = std::stod(value, &pos);
                if (pos != value.size()) throw std::invalid_argument(value);
            } catch (const std::exception&) {
                errors.push_back("line " + std::to_string(line_no) + ": bad number '" + value +
                                 "' for " + key);
            }
        };
        auto as_int = [&](auto& target) {
            try {
                std::size_t pos = 0;
                const long long v = std::stoll(value, &pos);
                if (pos != value.size()) throw std::invalid_argument(value);
                target = static_cast<std::decay_t<decltype(target)>>(v);
            } catch (const std::exception&) {
                errors.push_back("line " + std::to_string(line_no) + ": bad integer '" + value +
                                 "' for " + key);
            }
        };

        if (key == "seed") as_int(config.seed);
        else if (key == "horizon_days") as_int(config.horizon_days);
        else if (key == "start_date") {
            if (const auto d = parse_date(value)) config.start_date = *d;
            else errors.push_back("line " + std::to_string(line_no) + ": bad date '" + value + "'");
        }
        else if (key == "depositors") as_int(config.depositor_count);
        else if (key == "borrowers") as_int(config.borrower_count);
        else if (key == "liquidators") as_int(config.liquidator_count);
        else if (key == "deposit_intensity") as_double(config.deposit_intensity);
        else if (key == "withdraw_intensity") as_double(config.withdraw_intensity);
        else if (key == "borrow_intensity") as_double(config.borrow_intensity);
        else if (key == "repay_intensity") as_double(config.repay_intensity);
        else if (key == "repeat_activity_prob") as_double(config.repeat_activity_prob);
        else if (key == "deposit_amount_mean") as_double(config.deposit_amount_mean);
        else if (key == "deposit_amount_sigma") as_double(config.deposit_amount_sigma);
        else if (key == "borrow_amount_mean") as_double(config.borrow_amount_mean);
        else if (key == "borrow_amount_sigma") as_double(config.borrow_amount_sigma);
        else if (key == "collateral_factor") as_double(config.collateral_factor);
        else if (key == "liquidation_bonus") as_double(config.liquidation_bonus);
        else if (key == "close_factor") as_double(config.close_factor);
        else if (key == "stress_start_day") as_int(ensure_stress().start_day);
        else if (key == "stress_top_k") as_int(ensure_stress().top_k_depositors);
        else if (key == "stress_withdrawal_fraction") {
            as_double(ensure_stress().withdrawal_fraction_per_day);
        }
        else if (key == "stress_duration") as_int(ensure_stress().duration);
        else if (key == "asset") {
            std::istringstream tokens(value);
            AssetConfig asset;
            tokens >> asset.symbol;
            std::string tok;
            bool ok = !asset.symbol.empty();
            while (tokens >> tok) {
                const auto teq = tok.find('=');
                if (teq == std::string::npos) {
                    ok = false;
                    break;
                }
                const std::string tkey = tok.substr(0, teq);
                const std::string tval = tok.substr(teq + 1);
                try {
                    if (tkey == "price") asset.initial_price = std::stod(tval);
                    else if (tkey == "vol") asset.daily_volatility = std::stod(tval);
                    else ok = false;
                } catch (const std::exception&) {
                    ok = false;
                }
            }
            if (!ok) {
                errors.push_back("line " + std::to_string(line_no) +
                                 ": expected 'asset = SYMBOL price=P vol=V'");
            } else {
                config.assets.push_back(std::move(asset));
            }
        }
        else {
            errors.push_back("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }

    if (!errors.empty()) {
        std::string msg = "scenario config errors:";
        for (const auto& e : errors) msg += "\n  - " + e;
        throw SimError(msg);
    }
    return config;
}

}  // namespace lprisk
