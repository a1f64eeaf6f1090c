#include "see_cli/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "see/atomic_file.hpp"
#include "see/config.hpp"
#include "see/exports.hpp"
#include "see/feasible_zone.hpp"
#include "see/pruning.hpp"
#include "see/see_driver.hpp"
#include "see/uncertain_model.hpp"

namespace see::cli {

namespace fs = std::filesystem;
using nlohmann::json;

unsigned threads_from_env() {
    const char* raw = std::getenv("SEE_THREADS");
    if (!raw || !*raw) return std::max(1u, std::thread::hardware_concurrency());
    char* end = nullptr;
    const long v = std::strtol(raw, &end, 10);
    if (*end != '\0' || v < 0 || v > 4096) throw std::invalid_argument(std::string("SEE_THREADS: bad value '") + raw + "'");
    if (v == 0) return std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(v);
}

namespace {

std::string fixed(double v, int decimals) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(decimals) << v;
    return os.str();
}

std::string tuple(const IndexVec& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s + ")";
}

std::string describe(const DiscreteSystem& system, PairId p) {
    return "x=" + tuple(system.state_index(system.pair_state(p))) +
           " u=" + tuple(system.action_index(system.pair_action(p)));
}

json record_json(const IterationRecord& r) {
    return {{"k", r.k},
            {"zone_size", r.zone_size},
            {"zone_added", r.zone_added},
            {"region_size", r.region_size},
            {"candidate_count", r.candidate_count},
            {"vertex_count", r.vertex_count},
            {"ud_inside", r.ud_inside},
            {"ud_outside", r.ud_outside},
            {"recall", r.recall},
            {"prune_sweeps", r.prune_sweeps},
            {"pruned", r.pruned},
            {"equilibrium", r.equilibrium}};
}

json lipschitz_json(const LipschitzSpec& s) {
    return {{"L", s.L}, {"Lx", s.Lx ? json(*s.Lx) : json(nullptr)}, {"Lu", s.Lu ? json(*s.Lu) : json(nullptr)}};
}

json system_json(const DiscreteSystem& system) {
    return {{"kind", system_name(system.kind())},
            {"states", system.num_states()},
            {"actions", system.num_actions()},
            {"pairs", system.num_pairs()}};
}

std::string summary_line(const SummaryRow& row) {
    return "status=" + std::string(to_string(row.status)) + " iterations=" + std::to_string(row.iterations) +
           " recall=" + fixed(row.recall, 2) + " ud_inside=" + fixed(row.ud_inside, 1) +
           " ud_outside=" + fixed(row.ud_outside, 1);
}

std::string candidate_json(const Candidate& c, const DiscreteSystem& system) {
    if (c.kind == Candidate::Kind::sentinel) return "null";
    return json(to_index(c.point, system.state_dims())).dump();
}

struct RunOutcome {
    int code = kOk;
    std::optional<SeeResult> result;
    std::string error;
};

// Runs one experiment and writes its artifacts under `out`.
RunOutcome execute_run(const SeeConfig& config, const fs::path& out, unsigned threads, bool write_iterations) {
    const DiscreteSystem system = make_system(config);
    const FeasibleZone baseline = true_model_baseline(system);
    RunOptions options = run_options(config, threads);
    const ExportFormats formats{config.export_csv, config.export_pgm};

    std::string audit;
    if (config.audit_log) {
        options.audit = [&](std::size_t k, const RemovalRecord& r) {
            json line{{"iteration", k},
                      {"sweep", r.sweep},
                      {"x", system.state_index(system.pair_state(r.pair))},
                      {"u", system.action_index(system.pair_action(r.pair))},
                      {"x_next", json::parse(candidate_json(r.candidate, system))},
                      {"witness_pair",
                       {{"x", system.state_index(system.pair_state(r.witness))},
                        {"u", system.action_index(system.pair_action(r.witness))}}}};
            audit += line.dump() + "\n";
        };
    }
    if (write_iterations) {
        options.observer = [&](const IterationView& v) {
            const fs::path dir = out / ("iter_" + std::to_string(v.record.k));
            write_iteration_artifacts(dir, v.zone, v.model, system, formats);
            if (config.export_model) write_file_atomic(dir / "model.json", model_to_json(v.model, system).dump() + "\n");
        };
        write_file_atomic(out / "config.json", config_to_json(config).dump(2) + "\n");
        write_iteration_artifacts(out / "baseline", baseline, true_model(system), system, {config.export_csv, false});
        if (config.export_csv)
            write_file_atomic(out / "baseline" / "horizon.csv", horizon_csv(horizon_iteration(true_model(system), system), system));
    }

    json summary{{"config", config_to_json(config)},
                 {"effective_lipschitz", lipschitz_json(options.lipschitz)},
                 {"system", system_json(system)},
                 {"baseline", {{"pairs", baseline.size()}, {"states", baseline.projection_size()}}}};
    RunOutcome outcome;
    try {
        SeeResult result = run_see(system, options, baseline);
        const SummaryRow row = summarize_metrics(result);
        const auto& inv = result.invariants;
        summary["status"] = to_string(result.status);
        summary["iterations"] = row.iterations;
        summary["passes"] = result.passes;
        summary["summary"] = {{"iterations", row.iterations},
                              {"recall", row.recall},
                              {"ud_inside", row.ud_inside},
                              {"ud_outside", row.ud_outside}};
        json records = json::array();
        for (const auto& r : result.records) records.push_back(record_json(r));
        summary["records"] = std::move(records);
        summary["invariants"] = {{"ok", inv.ok()},
                                 {"zone_expansion", inv.zone_expansion},
                                 {"model_refinement", inv.model_refinement},
                                 {"feasible_zones", inv.feasible_zones},
                                 {"calibrated", inv.calibrated},
                                 {"violations", inv.violations},
                                 {"queried_pairs", inv.queried_pairs},
                                 {"failures", inv.failures}};
        if (!inv.ok()) outcome.code = kVerification;
        outcome.result = std::move(result);
    } catch (const CalibrationBreach& e) {
        summary["status"] = "calibration_breach";
        summary["error"] = e.what();
        outcome.code = kSolver;
        outcome.error = e.what();
    }
    write_file_atomic(out / "summary.json", summary.dump(2) + "\n");
    if (config.audit_log) write_file_atomic(out / "audit.jsonl", audit);
    return outcome;
}

SeeConfig load_config(const std::string& config_path, const fs::path& out, const std::vector<std::string>& sets) {
    if (!config_path.empty()) return parse_config(config_path, sets);
    const fs::path stored = out / "config.json";
    if (!fs::exists(stored)) throw ConfigError({"no --config given and " + stored.string() + " does not exist"});
    return parse_config(stored, sets);
}

int cmd_run(const SeeConfig& config, const fs::path& out, std::ostream& os, std::ostream& err) {
    const RunOutcome outcome = execute_run(config, out, threads_from_env(), true);
    if (!outcome.result) {
        err << "see: solver error: " << outcome.error << "\n";
        return outcome.code;
    }
    os << summary_line(summarize_metrics(*outcome.result)) << "\n";
    if (outcome.code == kVerification) {
        for (const auto& f : outcome.result->invariants.failures) err << "see: invariant failed: " << f << "\n";
        if (outcome.result->invariants.violations)
            err << "see: " << outcome.result->invariants.violations << " constraint violations\n";
    }
    return outcome.code;
}

int cmd_baseline(const SeeConfig& config, const fs::path& out, std::ostream& os) {
    const DiscreteSystem system = make_system(config);
    const UncertainModel truth = true_model(system);
    const HorizonField field = horizon_iteration(truth, system);
    const FeasibleZone zone = extract_zone(field, system);
    write_file_atomic(out / "baseline" / "zone.csv", zone_csv(zone, system));
    write_file_atomic(out / "baseline" / "horizon.csv", horizon_csv(field, system));
    if (config.export_pgm) {
        const Heatmap region = region_overlay(zone, system);
        write_file_atomic(out / "baseline" / "region.pgm", pgm_bytes(region));
        write_file_atomic(out / "baseline" / "region.pgm.json", region.meta.dump(2) + "\n");
    }
    json summary{{"system", system_json(system)},
                 {"baseline", {{"pairs", zone.size()}, {"states", zone.projection_size()}}}};
    write_file_atomic(out / "baseline" / "summary.json", summary.dump(2) + "\n");
    os << "baseline pairs=" << zone.size() << " states=" << zone.projection_size() << "\n";
    return kOk;
}

// Replays stored snapshots against the recursion that produced them.
int cmd_verify(const SeeConfig& config, const fs::path& out, bool replay, std::ostream& os, std::ostream& err) {
    const DiscreteSystem system = make_system(config);
    const auto dirs = iteration_dirs(out);
    std::vector<std::string> failures;
    auto fail = [&](std::size_t k, const std::string& what) {
        failures.push_back("iteration " + std::to_string(k) + ": " + what);
    };
    if (dirs.empty()) failures.push_back("no iteration snapshots under " + out.string());

    const RunOptions options = run_options(config, threads_from_env());
    PruneOptions prune_options;
    prune_options.threads = options.threads;
    prune_options.witnesses = options.witnesses;
    Pruner pruner(system, options.lipschitz, prune_options);

    UncertainModel prev_model = build_initial_model(system, options.initial);
    FeasibleZone prev_zone = FeasibleZone::empty_for(system);
    std::optional<UncertainModel> before_last;
    std::optional<FeasibleZone> before_last_zone;
    std::size_t k = 0;
    for (const auto& dir : dirs) {
        ++k;
        if (dir.filename() != "iter_" + std::to_string(k)) {
            fail(k, "snapshot directories are not numbered consecutively");
            break;
        }
        FeasibleZone zone;
        UncertainModel model;
        try {
            zone = parse_zone_csv(read_file(dir / "zone.csv"), system);
            model = model_from_json(json::parse(read_file(dir / "model.json")), system);
        } catch (const std::exception& e) {
            fail(k, std::string("unreadable snapshot: ") + e.what());
            break;
        }
        const FeasibleZone expected = extract_zone(horizon_iteration(prev_model, system), system);
        if (!(expected == zone)) fail(k, "zone is not the maximum feasible zone of the previous model");
        const ZoneCheck check = check_feasible_zone(zone, prev_model, system);
        if (!check.ok())
            fail(k, "zone violates the feasible-zone properties at " + describe(system, check.offending.front()));
        if (!prev_zone.subset_of(zone)) fail(k, "zone shrank");
        if (!model.subset_of(prev_model)) fail(k, "model grew");
        const CalibrationReport cal = check_well_calibrated(model, system);
        if (!cal.calibrated)
            fail(k, "calibration: true successor missing at " + describe(system, cal.violations.front()) + " (" +
                        std::to_string(cal.violations.size()) + " pairs)");
        std::size_t violations = 0;
        for (PairId p = 0; p < static_cast<PairId>(system.num_pairs()); ++p) {
            if (!zone.contains(p)) continue;
            if (!(model.set(p) == true_transition(system, p))) fail(k, "explored pair not collapsed at " + describe(system, p));
            const StateRef next = system.step(p);
            if (system.constraint_cost(next) != 0 || !zone.state_in_projection(next.id())) ++violations;
        }
        if (violations) fail(k, std::to_string(violations) + " constraint violations");
        if (replay) {
            try {
                const UncertainModel expected_model = pruner.prune(collapse_known(prev_model, zone, system), zone);
                if (!expected_model.same_sets(model)) fail(k, "model differs from the replayed pruning");
            } catch (const CalibrationBreach& e) {
                fail(k, std::string("replay: ") + e.what());
            }
        }
        before_last = std::move(prev_model);
        before_last_zone = std::move(prev_zone);
        prev_model = std::move(model);
        prev_zone = std::move(zone);
    }

    const fs::path summary_path = out / "summary.json";
    if (fs::exists(summary_path) && failures.empty()) {
        try {
            const json summary = json::parse(read_file(summary_path));
            if (summary.at("passes").get<std::size_t>() != k) failures.push_back("summary pass count does not match snapshots");
            if (summary.at("status") == "equilibrium" &&
                (k < 2 || !(*before_last_zone == prev_zone) || !before_last->same_sets(prev_model)))
                failures.push_back("summary claims equilibrium but the last two snapshots differ");
            const FeasibleZone baseline = true_model_baseline(system);
            const double recall = round_to(recall_metric(prev_zone, baseline), 2);
            if (summary.at("summary").at("recall").get<double>() != recall)
                failures.push_back("summary recall does not match the last zone");
        } catch (const std::exception& e) {
            failures.push_back(std::string("unreadable summary.json: ") + e.what());
        }
    }

    if (!failures.empty()) {
        for (const auto& f : failures) err << "see verify: " << f << "\n";
        return kVerification;
    }
    os << "verify: ok (" << k << " snapshots)\n";
    return kOk;
}

int cmd_export(const SeeConfig& config, const fs::path& out, const std::string& formats_text, std::ostream& os) {
    ExportFormats formats{false, false};
    std::stringstream ss(formats_text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "csv")
            formats.csv = true;
        else if (item == "pgm")
            formats.pgm = true;
        else
            throw ConfigError({"--formats: unknown format '" + item + "' (valid: csv, pgm)"});
    }
    const DiscreteSystem system = make_system(config);
    const std::size_t n = export_artifacts(out, system, formats);
    os << "exported " << n << " snapshots\n";
    return kOk;
}

int cmd_sweep(const std::string& config_path, const std::vector<std::string>& rows, const fs::path& out,
              std::ostream& os, std::ostream& err) {
    if (rows.empty()) throw ConfigError({"sweep needs at least one --set entry"});
    // Parse every row first so a typo fails before any work is done.
    std::vector<SeeConfig> configs;
    std::vector<std::vector<std::string>> assignments;
    for (const auto& row : rows) {
        std::vector<std::string> sets;
        std::stringstream ss(row);
        std::string item;
        while (std::getline(ss, item, ';'))
            if (!item.empty()) sets.push_back(item);
        configs.push_back(parse_config(config_path, sets));
        assignments.push_back(std::move(sets));
    }
    const unsigned threads = threads_from_env();
    json table = json::array();
    std::string csv = "row,overrides,status,iterations,recall,ud_inside,ud_outside\n";
    int code = kOk;
    std::vector<std::string> labels;
    std::size_t width = 12;
    for (const auto& sets : assignments) {
        std::string label;
        for (std::size_t j = 0; j < sets.size(); ++j) label += (j ? ";" : "") + sets[j];
        width = std::max(width, label.size() + 2);
        labels.push_back(std::move(label));
    }
    os << std::left << std::setw(4) << "row" << std::setw(static_cast<int>(width)) << "overrides" << std::setw(20) << "status"
       << std::setw(11) << "iterations" << std::setw(9) << "recall" << std::setw(10) << "ud_inside"
       << "ud_outside\n";
    for (std::size_t i = 0; i < configs.size(); ++i) {
        SeeConfig cfg = configs[i];
        const fs::path dir = out / ("row_" + std::to_string(i + 1));
        const RunOutcome outcome = execute_run(cfg, dir, threads, false);
        const std::string& label = labels[i];
        json entry{{"row", i + 1}, {"overrides", label}};
        std::string status = "calibration_breach";
        SummaryRow row;
        if (outcome.result) {
            row = summarize_metrics(*outcome.result);
            status = to_string(row.status);
            entry["iterations"] = row.iterations;
            entry["recall"] = row.recall;
            entry["ud_inside"] = row.ud_inside;
            entry["ud_outside"] = row.ud_outside;
        } else {
            entry["error"] = outcome.error;
            err << "see sweep: row " << i + 1 << ": " << outcome.error << "\n";
        }
        if (outcome.code != kOk && code == kOk) code = outcome.code;
        entry["status"] = status;
        table.push_back(entry);
        const bool ok = outcome.result.has_value();
        csv += std::to_string(i + 1) + "," + label + "," + status + "," +
               (ok ? std::to_string(row.iterations) + "," + fixed(row.recall, 2) + "," + fixed(row.ud_inside, 1) +
                         "," + fixed(row.ud_outside, 1)
                   : std::string(",,,")) +
               "\n";
        os << std::left << std::setw(4) << i + 1 << std::setw(static_cast<int>(width)) << label << std::setw(20) << status;
        if (ok)
            os << std::setw(11) << row.iterations << std::setw(9) << fixed(row.recall, 2) << std::setw(10)
               << fixed(row.ud_inside, 1) << fixed(row.ud_outside, 1);
        os << "\n";
    }
    write_file_atomic(out / "sweep.csv", csv);
    write_file_atomic(out / "sweep.json", table.dump(2) + "\n");
    return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Safe equilibrium exploration on discretised control systems", "see"};
    app.require_subcommand(1);

    std::string config_path, out_dir, formats = "csv,pgm";
    std::vector<std::string> sets;
    bool replay = false;

    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* opt = sub->add_option("--config", config_path, "JSON configuration file");
        if (config_required) opt->required();
        sub->add_option("--out", out_dir, "Output directory")->required();
        sub->add_option("--set", sets, "Override key=value (repeatable; in sweep, one row per --set, ';' joins keys)");
    };
    auto* run_cmd = app.add_subcommand("run", "Run safe equilibrium exploration and export every iteration");
    add_common(run_cmd, true);
    auto* baseline_cmd = app.add_subcommand("baseline", "Maximum feasible zone under the true model");
    add_common(baseline_cmd, true);
    auto* verify_cmd = app.add_subcommand("verify", "Re-check every invariant on a finished run");
    add_common(verify_cmd, false);
    verify_cmd->add_flag("--replay", replay, "Also replay the pruning step and compare models");
    auto* export_cmd = app.add_subcommand("export", "Re-render CSV/PGM artifacts from stored snapshots");
    add_common(export_cmd, false);
    export_cmd->add_option("--formats", formats, "Comma-separated list of csv, pgm");
    auto* sweep_cmd = app.add_subcommand("sweep", "Run one experiment per --set row and tabulate the results");
    add_common(sweep_cmd, true);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "see: " << e.what() << "\n";
        return kUsage;
    }

    try {
        threads_from_env();  // reject a malformed SEE_THREADS for every subcommand
        const fs::path out_path(out_dir);
        if (*run_cmd) return cmd_run(parse_config(config_path, sets), out_path, out, err);
        if (*baseline_cmd) return cmd_baseline(parse_config(config_path, sets), out_path, out);
        if (*verify_cmd) return cmd_verify(load_config(config_path, out_path, sets), out_path, replay, out, err);
        if (*export_cmd) return cmd_export(load_config(config_path, out_path, sets), out_path, formats, out);
        if (*sweep_cmd) return cmd_sweep(config_path, sets, out_path, out, err);
    } catch (const ConfigError& e) {
        err << "see: " << e.what() << "\n";
        return kUsage;
    } catch (const std::invalid_argument& e) {
        err << "see: " << e.what() << "\n";
        return kUsage;
    } catch (const CalibrationBreach& e) {
        err << "see: solver error: " << e.what() << "\n";
        return kSolver;
    } catch (const std::exception& e) {
        err << "see: solver error: " << e.what() << "\n";
        return kSolver;
    }
    return kUsage;
}

}  // namespace see::cli
