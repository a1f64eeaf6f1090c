#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "see/system.hpp"
#include "see/zone.hpp"

namespace see {

/// One candidate successor of a transition set.
///
/// Out-of-grid candidates keep their lattice coordinates (`exterior`) so the
/// Lipschitz pruning can measure them; a coordinate-less out-of-bounds
/// candidate (`sentinel`) arises only for custom tables whose true successor
/// has no coordinates.
struct Candidate {
    enum class Kind : std::uint8_t { grid, exterior, sentinel };

    Kind kind = Kind::grid;
    StateId state = -1;
    Coord point{};

    static Candidate grid_state(StateId s, const Coord& c) { return {Kind::grid, s, c}; }
    static Candidate exterior_point(const Coord& c) { return {Kind::exterior, -1, c}; }
    static Candidate out_of_bounds() { return {Kind::sentinel, -1, Coord{}}; }

    bool has_coordinates() const { return kind != Kind::sentinel; }
    StateRef state_ref() const {
        return kind == Kind::grid ? StateRef::in_grid(state) : StateRef::out_of_bounds();
    }
    friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// Finite set of candidate successors for one state-action pair. As a set of
/// StateRef values every out-of-grid candidate collapses into the single
/// out-of-bounds element.
struct TransitionSet {
    std::vector<StateId> states;  // sorted
    std::vector<Coord> exterior;  // sorted, lattice points outside the grid
    bool sentinel = false;

    bool contains_oob() const { return sentinel || !exterior.empty(); }
    /// |set| as a set of StateRef values.
    std::size_t cardinality() const { return states.size() + (contains_oob() ? 1 : 0); }
    /// Number of graph vertices carried by this set.
    std::size_t vertex_count() const { return states.size() + exterior.size() + (sentinel ? 1 : 0); }
    bool empty() const { return vertex_count() == 0; }

    bool contains(StateId s) const;
    bool contains(const Candidate& c) const;
    bool subset_of(const TransitionSet& other) const;
    std::vector<Candidate> candidates(const DiscreteSystem& system) const;
    /// Removes one candidate; returns false when it was not present.
    bool erase(const Candidate& c);

    static TransitionSet singleton(const Candidate& c);

    friend bool operator==(const TransitionSet& a, const TransitionSet& b) {
        return a.sentinel == b.sentinel && a.states == b.states && a.exterior == b.exterior;
    }
};

/// Set-valued transition model over every in-grid state-action pair, keyed by
/// dense pair id.
class UncertainModel {
public:
    UncertainModel() = default;
    explicit UncertainModel(std::size_t num_pairs) : sets_(num_pairs), known_(num_pairs, 0) {}

    std::size_t num_pairs() const { return sets_.size(); }
    const TransitionSet& set(PairId p) const { return sets_[p]; }
    TransitionSet& mutable_set(PairId p) { return sets_[p]; }
    bool known(PairId p) const { return known_[p] != 0; }
    void set_known(PairId p, bool k) { known_[p] = k ? 1 : 0; }

    /// Sum of |set| over all pairs.
    std::size_t candidate_count() const;
    /// Sum of graph vertex counts over all pairs.
    std::size_t vertex_count() const;

    bool subset_of(const UncertainModel& other) const;
    bool same_sets(const UncertainModel& other) const;

private:
    std::vector<TransitionSet> sets_;
    std::vector<std::uint8_t> known_;
};

struct InitialModelSpec {
    double r0 = 0.0;
    double rx = 0.0;
    double ru = 0.0;
    bool known_region = false;

    /// Throws std::invalid_argument when a radius is negative.
    void validate() const;
};

/// The singleton set holding the true successor of a pair.
TransitionSet true_transition(const DiscreteSystem& system, PairId p);
Candidate true_candidate(const DiscreteSystem& system, PairId p);

/// Every transition set is the lattice ball of radius r0 around the true
/// successor (un-clipped coordinates). Lattice points outside the grid become
/// out-of-bounds candidates. Pairs in the known region collapse to the truth.
UncertainModel build_initial_model(const DiscreteSystem& system, const InitialModelSpec& spec);

/// Replaces every set inside `zone` by the singleton truth.
UncertainModel collapse_known(const UncertainModel& model, const FeasibleZone& zone,
                              const DiscreteSystem& system);

/// Number of redundant candidates. Off-grid lattice points count one each,
/// as successors in Z^n rather than as a single out-of-bounds element.
int uncertainty_degree(const UncertainModel& model, PairId p);
/// Sum over actions of the pair uncertainty degree.
long long state_uncertainty_degree(const UncertainModel& model, const DiscreteSystem& system, StateId s);
/// Mean pair uncertainty degree over pairs inside / outside `reference`.
/// Returns 0 when the respective side is empty.
double mean_uncertainty_inside(const UncertainModel& model, const FeasibleZone& reference);
double mean_uncertainty_outside(const UncertainModel& model, const FeasibleZone& reference);

struct CalibrationReport {
    bool calibrated = true;
    std::vector<PairId> violations;  // canonical order
};

CalibrationReport check_well_calibrated(const UncertainModel& model, const DiscreteSystem& system);

/// {"pairs": [{"x", "u", "set", "oob", "known", "oob_points"}]}
nlohmann::json model_to_json(const UncertainModel& model, const DiscreteSystem& system);
/// Throws std::invalid_argument on a schema mismatch with `system`.
UncertainModel model_from_json(const nlohmann::json& j, const DiscreteSystem& system);

}  // namespace see
