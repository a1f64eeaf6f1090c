#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "see/feasible_zone.hpp"
#include "see/pruning.hpp"
#include "see/system.hpp"
#include "see/uncertain_model.hpp"
#include "see/zone.hpp"

namespace see {

enum class PruneMethod { sweep, exact };

enum class RunStatus { equilibrium, cap_exhausted, exploration_impossible };

const char* to_string(RunStatus status);

struct IterationRecord {
    std::size_t k = 0;
    std::size_t zone_size = 0;
    std::size_t zone_added = 0;
    std::size_t region_size = 0;
    std::size_t candidate_count = 0;
    std::size_t vertex_count = 0;
    double ud_inside = 0.0;
    double ud_outside = 0.0;
    double recall = 0.0;
    std::size_t prune_sweeps = 0;
    std::size_t pruned = 0;
    bool equilibrium = false;
};

/// Invariant bookkeeping accumulated over a run. Every flag must stay true.
struct InvariantLedger {
    bool zone_expansion = true;
    bool model_refinement = true;
    bool feasible_zones = true;
    bool calibrated = true;
    std::size_t violations = 0;
    std::size_t queried_pairs = 0;
    std::vector<std::string> failures;

    bool ok() const {
        return zone_expansion && model_refinement && feasible_zones && calibrated && violations == 0;
    }
};

struct IterationView {
    const IterationRecord& record;
    const FeasibleZone& zone;
    const UncertainModel& model;
};

struct RunOptions {
    InitialModelSpec initial;
    LipschitzSpec lipschitz;
    std::size_t max_iterations = 50;
    PruneMethod method = PruneMethod::sweep;
    WitnessScope witnesses = WitnessScope::zone;
    OracleLimits oracle;
    unsigned threads = 1;
    bool distance_cache = true;
    /// Checks well-calibration of every iterate against the true dynamics.
    bool check_calibration = true;
    std::function<void(std::size_t iteration, const RemovalRecord&)> audit;
    std::function<void(const IterationView&)> observer;
};

struct SeeResult {
    RunStatus status = RunStatus::cap_exhausted;
    /// Completed zone+prune passes; the equilibrium pass is the last one.
    std::size_t passes = 0;
    std::vector<IterationRecord> records;
    FeasibleZone zone;
    UncertainModel model;
    FeasibleZone baseline;
    InvariantLedger invariants;

    /// Passes before the one that confirmed equilibrium.
    std::size_t iterations() const {
        return status == RunStatus::equilibrium && passes > 1 ? passes - 1 : passes;
    }
};

/// Alternates maximum feasible zone and model pruning until a pass leaves
/// both unchanged or the iteration cap is hit. `baseline` defaults to the
/// true-model maximum feasible zone. Throws CalibrationBreach from pruning.
SeeResult run_see(const DiscreteSystem& system, const RunOptions& options,
                  std::optional<FeasibleZone> baseline = std::nullopt);

bool check_equilibrium(const FeasibleZone& prev_zone, const UncertainModel& prev_model,
                       const FeasibleZone& cur_zone, const UncertainModel& cur_model);

/// One table row with recall rounded to 2 decimals and UD to 1 decimal.
struct SummaryRow {
    std::size_t iterations = 0;
    double recall = 0.0;
    double ud_inside = 0.0;
    double ud_outside = 0.0;
    RunStatus status = RunStatus::cap_exhausted;
};

SummaryRow summarize_metrics(const SeeResult& result);
double round_to(double value, int decimals);

}  // namespace see
