#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "see/feasible_zone.hpp"
#include "see/pruning.hpp"
#include "see/system.hpp"
#include "see/uncertain_model.hpp"

namespace see::testing {

// x' = x + u on indices [-1, 1], actions {-1, 0, 1}.
inline DiscreteSystem line_toy() {
    TransitionTable t;
    for (int x = -1; x <= 1; ++x) t.states.push_back({x});
    for (int u = -1; u <= 1; ++u) t.actions.push_back({u});
    for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 3; ++a) {
            const int next = s + a - 1;
            t.transitions.push_back({s, a, next >= 0 && next < 3 ? next : -1});
        }
    return DiscreteSystem::from_table(t);
}

inline PairId pair_at(const DiscreteSystem& sys, const IndexVec& x, const IndexVec& u) {
    return sys.pair_id(*sys.find_state(x), *sys.find_action(u));
}

struct RandomInstance {
    DiscreteSystem system;
    UncertainModel model;
};

// Random table system on a small 1-D or 2-D lattice with a well-calibrated
// random model: each set holds the truth plus up to `max_set - 1` extra
// grid states.
inline RandomInstance random_instance(std::mt19937& rng, std::size_t max_states, std::size_t max_actions,
                                      std::size_t max_set) {
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    TransitionTable t;
    const bool two_d = pick(0, 1) == 1;
    const int ns = pick(2, static_cast<int>(max_states));
    const int na = pick(1, static_cast<int>(max_actions));
    while (static_cast<int>(t.states.size()) < ns) {
        IndexVec s = two_d ? IndexVec{pick(-2, 2), pick(-2, 2)} : IndexVec{pick(-5, 5)};
        if (std::find(t.states.begin(), t.states.end(), s) == t.states.end()) t.states.push_back(s);
    }
    for (int a = 0; a < na; ++a) t.actions.push_back({a - na / 2});
    for (int s = 0; s < ns; ++s)
        if (pick(0, 5) == 0) t.unsafe_states.push_back(s);
    for (int s = 0; s < ns; ++s)
        for (int a = 0; a < na; ++a) t.transitions.push_back({s, a, pick(0, 7) == 0 ? -1 : pick(0, ns - 1)});

    RandomInstance inst{DiscreteSystem::from_table(t), {}};
    const auto& sys = inst.system;
    inst.model = UncertainModel(sys.num_pairs());
    for (PairId p = 0; p < static_cast<PairId>(sys.num_pairs()); ++p) {
        TransitionSet set = true_transition(sys, p);
        const int extra = pick(0, static_cast<int>(max_set) - 1);
        for (int i = 0; i < extra; ++i) {
            const StateId s = pick(0, ns - 1);
            if (!set.contains(s)) {
                set.states.push_back(s);
                std::sort(set.states.begin(), set.states.end());
            }
        }
        inst.model.mutable_set(p) = std::move(set);
    }
    return inst;
}

// Greatest set of pairs closed under "safe state and every candidate lands on
// a state that keeps some pair", by repeated elimination.
inline FeasibleZone backward_elimination(const UncertainModel& model, const DiscreteSystem& sys) {
    const auto np = static_cast<PairId>(sys.num_pairs());
    std::vector<std::uint8_t> keep(np, 0);
    for (PairId p = 0; p < np; ++p) keep[p] = sys.costs()[sys.pair_state(p)] == 0;
    auto alive = [&](StateId s) {
        for (ActionId a = 0; a < static_cast<ActionId>(sys.num_actions()); ++a)
            if (keep[sys.pair_id(s, a)]) return true;
        return false;
    };
    bool changed = true;
    while (changed) {
        changed = false;
        for (PairId p = 0; p < np; ++p) {
            if (!keep[p]) continue;
            const auto& set = model.set(p);
            bool ok = !set.contains_oob();
            for (StateId s : set.states) ok = ok && alive(s);
            if (!ok) {
                keep[p] = 0;
                changed = true;
            }
        }
    }
    return FeasibleZone::from_mask(sys.num_states(), sys.num_actions(), keep);
}

}  // namespace see::testing
