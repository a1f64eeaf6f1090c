#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "see/system.hpp"
#include "see/uncertain_model.hpp"
#include "see/zone.hpp"

namespace see {

/// Worst-case minimum number of steps to constraint violation for every
/// state-action pair, with an infinity sentinel for pairs that can be kept
/// safe forever. The constraint decay value gamma^N is a derived view.
class HorizonField {
public:
    static constexpr std::uint32_t kInfinite = std::numeric_limits<std::uint32_t>::max();

    HorizonField() = default;
    HorizonField(std::size_t num_pairs, std::uint32_t fill) : values_(num_pairs, fill) {}

    std::size_t size() const { return values_.size(); }
    std::uint32_t at(PairId p) const { return values_[p]; }
    bool is_infinite(PairId p) const { return values_[p] == kInfinite; }
    void set(PairId p, std::uint32_t v) { values_[p] = v; }
    std::span<const std::uint32_t> values() const { return values_; }

    /// gamma^N, or 0 for the infinite horizon.
    double cdf(PairId p, double gamma) const;

    friend bool operator==(const HorizonField&, const HorizonField&) = default;

private:
    std::vector<std::uint32_t> values_;
};

/// Exact fixed point of N(x,u) = 0 if c(x)=1, else
/// 1 + min_{x' in set(x,u)} max_{u'} N(x',u'), with the out-of-bounds
/// candidate contributing 0. Solved by processing states in order of
/// increasing horizon, so each entry is written once.
HorizonField horizon_iteration(const UncertainModel& model, const DiscreteSystem& system);

/// Same fixed point via synchronous sweeps from the all-zero field, entries
/// above |X|+1 saturating to infinity. Reference implementation.
HorizonField horizon_iteration_sweeps(const UncertainModel& model, const DiscreteSystem& system);

/// One application of the integer recursion to `field`.
HorizonField bellman_update(const HorizonField& field, const UncertainModel& model,
                            const DiscreteSystem& system);

/// Floating-point constraint decay function by fixed-point iteration of
/// G = c + (1-c) gamma max_{x'} min_{u'} G, started from G = 0 and run until
/// a sweep changes nothing.
std::vector<double> cdf_iteration(const UncertainModel& model, const DiscreteSystem& system, double gamma);

/// Pairs whose horizon is infinite.
FeasibleZone extract_zone(const HorizonField& field, const DiscreteSystem& system);

/// Zone from the zero set of a floating CDF.
FeasibleZone zone_from_cdf(std::span<const double> cdf, const DiscreteSystem& system);

struct ZoneCheck {
    bool constraint_ok = true;   // every projected state satisfies the constraint
    bool invariance_ok = true;   // every candidate successor stays in the projection
    std::vector<PairId> offending;

    bool ok() const { return constraint_ok && invariance_ok; }
};

ZoneCheck check_feasible_zone(const FeasibleZone& zone, const UncertainModel& model,
                              const DiscreteSystem& system);

/// horizon_iteration + extract_zone with the feasible-zone properties
/// asserted; a failed assertion throws std::logic_error.
FeasibleZone maximum_feasible_zone(const UncertainModel& model, const DiscreteSystem& system);

/// Model whose every set is the singleton truth.
UncertainModel true_model(const DiscreteSystem& system);

/// Maximum feasible zone under the true model.
FeasibleZone true_model_baseline(const DiscreteSystem& system);

/// 100 * |explored| / |baseline|. Throws std::domain_error on an empty
/// baseline.
double recall_metric(const FeasibleZone& explored, const FeasibleZone& baseline);

std::vector<ActionRef> feasible_actions(const FeasibleZone& zone, StateRef x);

}  // namespace see
