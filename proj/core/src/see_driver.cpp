#include "see/see_driver.hpp"

#include <cmath>
#include <string>

namespace see {

const char* to_string(RunStatus status) {
    switch (status) {
        case RunStatus::equilibrium: return "equilibrium";
        case RunStatus::cap_exhausted: return "cap_exhausted";
        case RunStatus::exploration_impossible: return "exploration_impossible";
    }
    return "unknown";
}

bool check_equilibrium(const FeasibleZone& prev_zone, const UncertainModel& prev_model,
                       const FeasibleZone& cur_zone, const UncertainModel& cur_model) {
    return prev_zone == cur_zone && prev_model.same_sets(cur_model);
}

double round_to(double value, int decimals) {
    const double scale = std::pow(10.0, decimals);
    return std::round(value * scale) / scale;
}

namespace {

// Data may only be collected at pairs whose true successor stays inside the
// verified region; anything else would be a constraint violation.
std::size_t collect_data(const DiscreteSystem& system, const FeasibleZone& zone, std::vector<std::uint8_t>& queried) {
    std::size_t violations = 0;
    for (PairId p = 0; p < static_cast<PairId>(zone.num_pairs()); ++p) {
        if (!zone.contains(p)) continue;
        queried[p] = 1;
        const StateRef next = system.step(p);
        if (system.constraint_cost(next) != 0 || !zone.state_in_projection(next.id())) ++violations;
        if (system.costs()[system.pair_state(p)]) ++violations;
    }
    return violations;
}

IterationRecord make_record(std::size_t k, const FeasibleZone& zone, std::size_t prev_size,
                            const UncertainModel& model, const FeasibleZone& baseline) {
    IterationRecord r;
    r.k = k;
    r.zone_size = zone.size();
    r.zone_added = zone.size() - prev_size;
    r.region_size = zone.projection_size();
    r.candidate_count = model.candidate_count();
    r.vertex_count = model.vertex_count();
    r.ud_inside = mean_uncertainty_inside(model, baseline);
    r.ud_outside = mean_uncertainty_outside(model, baseline);
    r.recall = baseline.empty() ? 0.0 : recall_metric(zone, baseline);
    return r;
}

}  // namespace

SeeResult run_see(const DiscreteSystem& system, const RunOptions& options, std::optional<FeasibleZone> baseline) {
    if (options.max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
    SeeResult result;
    result.baseline = baseline ? std::move(*baseline) : true_model_baseline(system);
    auto& inv = result.invariants;
    auto fail = [&](bool& flag, std::size_t k, const std::string& what) {
        flag = false;
        inv.failures.push_back("iteration " + std::to_string(k) + ": " + what);
    };

    PruneOptions prune_options;
    prune_options.threads = options.threads;
    prune_options.distance_cache = options.distance_cache;
    prune_options.witnesses = options.witnesses;
    std::size_t current_k = 0;
    if (options.audit)
        prune_options.audit = [&](const RemovalRecord& r) { options.audit(current_k, r); };
    Pruner pruner(system, options.lipschitz, prune_options);

    UncertainModel model = build_initial_model(system, options.initial);
    if (options.check_calibration && !check_well_calibrated(model, system).calibrated)
        fail(inv.calibrated, 0, "initial model is not well-calibrated");
    FeasibleZone zone = FeasibleZone::empty_for(system);
    std::vector<std::uint8_t> queried(system.num_pairs(), 0);

    for (std::size_t k = 1; k <= options.max_iterations; ++k) {
        current_k = k;
        FeasibleZone next_zone = extract_zone(horizon_iteration(model, system), system);
        if (!check_feasible_zone(next_zone, model, system).ok())
            fail(inv.feasible_zones, k, "zone violates the feasible-zone properties");
        if (!zone.subset_of(next_zone)) fail(inv.zone_expansion, k, "zone shrank");

        inv.violations += collect_data(system, next_zone, queried);
        UncertainModel collapsed = collapse_known(model, next_zone, system);
        UncertainModel next_model;
        std::size_t sweeps = 0;
        if (options.method == PruneMethod::exact) {
            next_model = exact_prune(collapsed, next_zone, system, options.lipschitz, options.oracle);
        } else {
            next_model = pruner.prune(collapsed, next_zone);
            sweeps = pruner.last_stats().sweeps;
        }
        if (!next_model.subset_of(model)) fail(inv.model_refinement, k, "model grew");
        if (options.check_calibration && !check_well_calibrated(next_model, system).calibrated)
            fail(inv.calibrated, k, "model lost the true successor");

        const bool same = k > 1 && check_equilibrium(zone, model, next_zone, next_model);
        IterationRecord record = make_record(k, next_zone, zone.size(), next_model, result.baseline);
        record.prune_sweeps = sweeps;
        record.pruned = model.vertex_count() - next_model.vertex_count();
        record.equilibrium = same;
        result.records.push_back(record);
        result.passes = k;
        zone = std::move(next_zone);
        model = std::move(next_model);
        if (options.observer) options.observer(IterationView{result.records.back(), zone, model});

        if (k == 1 && zone.empty()) {
            result.status = RunStatus::exploration_impossible;
            break;
        }
        if (same) {
            result.status = RunStatus::equilibrium;
            break;
        }
    }
    std::size_t q = 0;
    for (auto v : queried) q += v;
    inv.queried_pairs = q;
    result.zone = std::move(zone);
    result.model = std::move(model);
    return result;
}

SummaryRow summarize_metrics(const SeeResult& result) {
    SummaryRow row;
    row.status = result.status;
    row.iterations = result.iterations();
    if (result.records.empty()) return row;
    const IterationRecord& last = result.records.back();
    row.recall = round_to(last.recall, 2);
    row.ud_inside = round_to(last.ud_inside, 1);
    row.ud_outside = round_to(last.ud_outside, 1);
    return row;
}

}  // namespace see
