// lprisk — replay lending-pool event logs, compute liquidity-risk metrics,
// run the preset regression suites, and generate synthetic scenarios.
#include "lprisk/econometrics.hpp"
#include "lprisk/ingest.hpp"
#include "lprisk/manifest.hpp"
#include "lprisk/metrics.hpp"
#include "lprisk/report.hpp"
#include "lprisk/serialize.hpp"
#include "lprisk/simgen.hpp"
#include "lprisk/version.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace fs = std::filesystem;
using namespace lprisk;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

EventFormat detect_format(const std::string& path, const std::string& flag) {
    if (flag == "csv") return EventFormat::Csv;
    if (flag == "jsonl") return EventFormat::Jsonl;
    return path.ends_with(".jsonl") ? EventFormat::Jsonl : EventFormat::Csv;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return in;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

std::vector<EventRecord> load_events(const std::string& path, const std::string& format_flag,
                                     bool strict) {
    auto in = open_input(path);
    const auto parsed =
        parse_events(in, detect_format(path, format_flag), strict ? ParseMode::Strict : ParseMode::Lenient);
    for (const Diagnostic& d : parsed.diagnostics) {
        std::cerr << path << ": " << to_string(d) << '\n';
    }
    if (strict && !parsed.diagnostics.empty()) {
        throw std::runtime_error("strict mode: input has diagnostics");
    }
    return parsed.events;
}

// ---------------------------------------------------------------------------

struct IngestCheckArgs {
    std::vector<std::string> paths;
    std::string format = "auto";
    bool strict = false;
};

int cmd_ingest_check(const IngestCheckArgs& args) {
    std::size_t total = 0;
    for (const std::string& path : args.paths) {
        auto in = open_input(path);
        // Always parse leniently here so every diagnostic gets listed.
        const auto parsed = parse_events(in, detect_format(path, args.format), ParseMode::Lenient);
        std::cout << path << ": " << parsed.diagnostics.size() << " diagnostics, "
                  << parsed.events.size() << " events\n";
        for (const Diagnostic& d : parsed.diagnostics) {
            std::cout << "  " << to_string(d) << '\n';
        }
        total += parsed.diagnostics.size();
    }
    return args.strict && total > 0 ? kExitDomain : kExitOk;
}

// ---------------------------------------------------------------------------

struct MetricsArgs {
    std::string events_path;
    std::string out_dir;
    std::string assets_path;
    std::string format = "auto";
    bool strict = false;
};

StatsRow stat_row(std::string name, const std::vector<std::optional<double>>& series) {
    bool any = false;
    for (const auto& v : series) {
        if (v) any = true;
    }
    if (!any) {
        // Renders as NA across the board, e.g. a log with no loans at all.
        const double nan = std::numeric_limits<double>::quiet_NaN();
        return {std::move(name), DescriptiveStats{nan, nan, nan, nan, nan, 0}};
    }
    return {std::move(name), descriptive_stats(std::span<const std::optional<double>>(series))};
}

std::string render_stats_doc(std::span<const DailyPanelRow> rows) {
    auto col = [&](auto getter) {
        std::vector<std::optional<double>> s;
        s.reserve(rows.size());
        for (const auto& r : rows) s.push_back(getter(r));
        return s;
    };
    auto dec = [](const Decimal& d) { return std::optional<double>(d.to_double()); };
    auto cnt = [](std::int64_t v) { return std::optional<double>(static_cast<double>(v)); };

    std::vector<StatsRow> risk{
        stat_row("Liquidity", col([&](const DailyPanelRow& r) { return dec(r.liquidity_usd); })),
        stat_row("Utilization", col([](const DailyPanelRow& r) { return r.utilization; })),
        stat_row("Repeat deposit ratio",
                 col([](const DailyPanelRow& r) { return r.repeat_deposit_ratio; })),
        stat_row("Repeat loan ratio",
                 col([](const DailyPanelRow& r) { return r.repeat_loan_ratio; })),
    };
    std::vector<StatsRow> loans{
        stat_row("Borrower", col([&](const DailyPanelRow& r) { return cnt(r.borrower); })),
        stat_row("Loan vol usd", col([&](const DailyPanelRow& r) { return dec(r.loan_vol_usd); })),
        stat_row("Loan cnt", col([&](const DailyPanelRow& r) { return cnt(r.loan_cnt); })),
        stat_row("New borrower", col([&](const DailyPanelRow& r) { return cnt(r.new_borrower); })),
        stat_row("New loan vol usd",
                 col([&](const DailyPanelRow& r) { return dec(r.new_loan_vol_usd); })),
        stat_row("New loan cnt", col([&](const DailyPanelRow& r) { return cnt(r.new_loan_cnt); })),
        stat_row("Avg loan usd", col([](const DailyPanelRow& r) { return r.avg_loan_usd; })),
        stat_row("Outstanding loan",
                 col([&](const DailyPanelRow& r) { return dec(r.outstanding_loan_usd); })),
        stat_row("Liquidation usd",
                 col([&](const DailyPanelRow& r) { return dec(r.liquidation_usd); })),
        stat_row("Repeat borrower",
                 col([&](const DailyPanelRow& r) { return cnt(r.repeat_borrower); })),
        stat_row("Repeat loan vol usd",
                 col([&](const DailyPanelRow& r) { return dec(r.repeat_loan_vol_usd); })),
        stat_row("Repeat loan cnt",
                 col([&](const DailyPanelRow& r) { return cnt(r.repeat_loan_cnt); })),
    };
    std::vector<StatsRow> deposits{
        stat_row("Depositor", col([&](const DailyPanelRow& r) { return cnt(r.depositor); })),
        stat_row("Deposit vol usd",
                 col([&](const DailyPanelRow& r) { return dec(r.deposit_vol_usd); })),
        stat_row("Deposit cnt", col([&](const DailyPanelRow& r) { return cnt(r.deposit_cnt); })),
        stat_row("New depositor",
                 col([&](const DailyPanelRow& r) { return cnt(r.new_depositor); })),
        stat_row("New deposit vol usd",
                 col([&](const DailyPanelRow& r) { return dec(r.new_deposit_vol_usd); })),
        stat_row("New deposit cnt",
                 col([&](const DailyPanelRow& r) { return cnt(r.new_deposit_cnt); })),
        stat_row("Avg deposit usd", col([](const DailyPanelRow& r) { return r.avg_deposit_usd; })),
        stat_row("Outstanding deposit",
                 col([&](const DailyPanelRow& r) { return dec(r.outstanding_deposit_usd); })),
        stat_row("Repeat depositor",
                 col([&](const DailyPanelRow& r) { return cnt(r.repeat_depositor); })),
        stat_row("Repeat deposit vol usd",
                 col([&](const DailyPanelRow& r) { return dec(r.repeat_deposit_vol_usd); })),
        stat_row("Repeat deposit cnt",
                 col([&](const DailyPanelRow& r) { return cnt(r.repeat_deposit_cnt); })),
    };

    std::string doc = "## Daily panel statistics\n\n";
    doc += render_stats_markdown("Liquidity risk measurements", risk);
    doc += "\n";
    doc += render_stats_markdown("Panel A: Loan details", loans);
    doc += "\n";
    doc += render_stats_markdown("Panel B: Deposit details", deposits);
    return doc;
}

int cmd_metrics(const MetricsArgs& args) {
    PanelOptions options;
    options.mode = args.strict ? ReplayMode::Strict : ReplayMode::Lenient;
    if (!args.assets_path.empty()) {
        auto in = open_input(args.assets_path);
        options.asset_filter = parse_asset_list(in);
    }

    const auto events = load_events(args.events_path, args.format, args.strict);
    const PanelResult panel = build_daily_panel(events, options);
    for (const std::string& w : panel.warnings) std::cerr << "warning: " << w << '\n';

    fs::create_directories(args.out_dir);
    const std::string panel_path = (fs::path(args.out_dir) / "daily_panel.csv").string();
    const std::string stats_path = (fs::path(args.out_dir) / "stats.md").string();

    std::ostringstream panel_csv;
    write_daily_panel_csv(panel_csv, panel.rows);
    write_file(panel_path, panel_csv.str());
    write_file(stats_path, render_stats_doc(panel.rows));

    RunManifest manifest;
    manifest.subcommand = "metrics";
    manifest.flags["strict"] = args.strict ? "true" : "false";
    manifest.input_paths.push_back(args.events_path);
    if (!args.assets_path.empty()) {
        manifest.flags["assets"] = args.assets_path;
        manifest.input_paths.push_back(args.assets_path);
    }
    manifest.output_paths = {panel_path, stats_path};
    write_manifest(manifest, (fs::path(args.out_dir) / "manifest.json").string());

    std::cout << "wrote " << panel_path << " (" << panel.rows.size() << " rows) and " << stats_path
              << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct RegressArgs {
    std::string panel_path;
    std::string factors_path;
    std::string suite = "eq10";
    std::string out_dir;
    std::string delta_map_path;
    std::string hacks_path;
    bool raw = false;
};

DeltaMap load_delta_map(const std::string& path) {
    DeltaMap dm = default_delta_map();
    if (path.empty()) return dm;
    auto in = open_input(path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos) {
                throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                         ": expected 'column = pct_change|first_diff'");
            }
            continue;
        }
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (value == "pct_change") dm[key] = TransformKind::PctChange;
        else if (value == "first_diff") dm[key] = TransformKind::FirstDiff;
        else {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": unknown delta '" +
                                     value + "'");
        }
    }
    return dm;
}

std::string risk_slug(const std::string& label) {
    std::string s;
    for (char c : label) s += c == ' ' ? '_' : static_cast<char>(std::tolower(c));
    return s;
}

int cmd_regress(const RegressArgs& args) {
    const DeltaMap dm = load_delta_map(args.delta_map_path);
    const auto suite = find_suite(args.suite, dm);
    if (!suite) throw std::runtime_error("unknown suite '" + args.suite + "'");

    const bool needs_hacks = std::any_of(suite->dummies.begin(), suite->dummies.end(),
                                         [](const DummySpec& d) { return d.kind == DummyKind::Hack; });
    std::vector<Day> hack_dates;
    if (needs_hacks) {
        if (args.hacks_path.empty()) {
            throw std::runtime_error("suite " + suite->id +
                                     " uses the hack dummy; pass --hacks <calendar.csv>");
        }
        auto in = open_input(args.hacks_path);
        for (const HackEvent& h : parse_hack_calendar(in)) hack_dates.push_back(h.date);
    }

    auto panel_in = open_input(args.panel_path);
    const auto metrics_rows = parse_daily_panel(panel_in);
    auto factors_in = open_input(args.factors_path);
    const auto factor_rows = parse_factor_panel(factors_in);
    const MergedPanel merged = merge_panels(metrics_rows, factor_rows);

    const std::size_t k = 2 + suite->dummies.size() + suite->controls.size();
    if (merged.dates.size() < k + 2) {
        throw std::runtime_error("merged panel has " + std::to_string(merged.dates.size()) +
                                 " rows; need at least " + std::to_string(k + 2));
    }

    fs::create_directories(args.out_dir);
    RunManifest manifest;
    manifest.subcommand = "regress";
    manifest.flags["suite"] = args.suite;
    manifest.flags["standardize"] = args.raw ? "false" : "true";
    manifest.input_paths = {args.panel_path, args.factors_path};
    if (!args.hacks_path.empty()) manifest.input_paths.push_back(args.hacks_path);
    if (!args.delta_map_path.empty()) manifest.input_paths.push_back(args.delta_map_path);

    for (std::size_t risk = 0; risk < suite->risks.size(); ++risk) {
        std::vector<ModelFit> fits;
        for (const TermSpec& dep : suite->dependents) {
            RegressionSpec spec;
            spec.suite = suite->id;
            spec.dependent = dep;
            spec.risk = suite->risks[risk];
            spec.dummies = suite->dummies;
            spec.controls = suite->controls;
            spec.standardize = !args.raw;
            fits.push_back(run_model(merged, spec, hack_dates));
        }
        const std::string base = suite->id + "_" + risk_slug(suite->risks[risk].label);
        const std::string tsv_path = (fs::path(args.out_dir) / (base + ".tsv")).string();
        const std::string md_path = (fs::path(args.out_dir) / (base + ".md")).string();
        write_file(tsv_path, render_panel_tsv(*suite, risk, fits));
        write_file(md_path, render_panel_markdown(*suite, risk, fits));
        manifest.output_paths.push_back(tsv_path);
        manifest.output_paths.push_back(md_path);
    }
    write_manifest(manifest, (fs::path(args.out_dir) / "manifest.json").string());
    std::cout << "wrote " << manifest.output_paths.size() << " tables for suite " << suite->id
              << " to " << args.out_dir << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string config_path;
    std::string out_dir;
};

int cmd_simulate(const SimulateArgs& args) {
    auto in = open_input(args.config_path);
    const ScenarioConfig config = parse_scenario_config(in);
    const GenerationResult gen = generate(config);

    fs::create_directories(args.out_dir);
    const std::string events_path = (fs::path(args.out_dir) / "events.csv").string();
    const std::string factors_path = (fs::path(args.out_dir) / "factors.csv").string();

    std::ostringstream events_csv;
    write_events_csv(events_csv, gen.events);
    write_file(events_path, events_csv.str());
    std::ostringstream factors_csv;
    write_factor_csv(factors_csv, gen.factors);
    write_file(factors_path, factors_csv.str());

    RunManifest manifest;
    manifest.subcommand = "simulate";
    manifest.seed = config.seed;
    manifest.input_paths = {args.config_path};
    manifest.output_paths = {events_path, factors_path};
    write_manifest(manifest, (fs::path(args.out_dir) / "manifest.json").string());

    std::cout << "wrote " << gen.events.size() << " events over " << config.horizon_days
              << " days to " << args.out_dir << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lending-pool liquidity risk toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    IngestCheckArgs ingest_args;
    auto* ingest = app.add_subcommand("ingest-check", "validate event logs and list diagnostics");
    ingest->add_option("paths", ingest_args.paths, "event log files")->required();
    ingest->add_option("--format", ingest_args.format, "csv|jsonl|auto (default auto)")
        ->check(CLI::IsMember({"csv", "jsonl", "auto"}));
    ingest->add_flag("--strict", ingest_args.strict, "nonzero exit on any diagnostic");

    MetricsArgs metrics_args;
    auto* metrics = app.add_subcommand("metrics", "build the daily panel and stats tables");
    metrics->add_option("events", metrics_args.events_path, "event log file")->required();
    metrics->add_option("--out", metrics_args.out_dir, "output directory")->required();
    metrics->add_option("--assets", metrics_args.assets_path,
                        "restrict to the symbols listed in this file");
    metrics->add_option("--format", metrics_args.format, "csv|jsonl|auto (default auto)")
        ->check(CLI::IsMember({"csv", "jsonl", "auto"}));
    metrics->add_flag("--strict", metrics_args.strict,
                      "strict parsing and replay (reject lossy logs)");

    RegressArgs regress_args;
    auto* regress = app.add_subcommand("regress", "run a preset regression suite");
    regress->add_option("--panel", regress_args.panel_path, "daily_panel.csv from `metrics`")
        ->required();
    regress->add_option("--factors", regress_args.factors_path, "protocol factor panel CSV")
        ->required();
    regress->add_option("--suite", regress_args.suite, "one of eq10..eq17")
        ->required()
        ->check(CLI::IsMember({"eq10", "eq11", "eq12", "eq13", "eq14", "eq15", "eq16", "eq17"}));
    regress->add_option("--out", regress_args.out_dir, "output directory")->required();
    regress->add_option("--delta-map", regress_args.delta_map_path,
                        "per-column Δ overrides (column = pct_change|first_diff)");
    regress->add_option("--hacks", regress_args.hacks_path, "hack calendar CSV (date,protocol)");
    auto* raw_flag = regress->add_flag("--raw", regress_args.raw,
                                       "skip z-scoring of model variables");
    regress->add_flag("--standardize", "z-score model variables (the default)")
        ->excludes(raw_flag);

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "generate a synthetic scenario");
    simulate->add_option("--config", sim_args.config_path, "scenario config file")->required();
    simulate->add_option("--out", sim_args.out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (ingest->parsed()) return cmd_ingest_check(ingest_args);
        if (metrics->parsed()) return cmd_metrics(metrics_args);
        if (regress->parsed()) return cmd_regress(regress_args);
        if (simulate->parsed()) return cmd_simulate(sim_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDomain;
    }
    return kExitUsage;
}
