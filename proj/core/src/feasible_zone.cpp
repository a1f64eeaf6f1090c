#include "see/feasible_zone.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace see {

// ---- FeasibleZone ---------------------------------------------------------

FeasibleZone::FeasibleZone(std::size_t num_states, std::size_t num_actions)
    : num_states_(num_states),
      num_actions_(num_actions),
      mask_(num_states * num_actions, 0),
      state_count_(num_states, 0) {}

FeasibleZone FeasibleZone::from_mask(std::size_t num_states, std::size_t num_actions,
                                     std::vector<std::uint8_t> mask) {
    if (mask.size() != num_states * num_actions)
        throw std::invalid_argument("zone mask length does not match the pair count");
    FeasibleZone z(num_states, num_actions);
    for (std::size_t p = 0; p < mask.size(); ++p)
        if (mask[p]) z.insert(static_cast<PairId>(p));
    return z;
}

void FeasibleZone::insert(PairId p) {
    if (mask_[p]) return;
    mask_[p] = 1;
    ++size_;
    ++state_count_[p / num_actions_];
}

void FeasibleZone::erase(PairId p) {
    if (!mask_[p]) return;
    mask_[p] = 0;
    --size_;
    --state_count_[p / num_actions_];
}

std::vector<ActionId> FeasibleZone::actions_at(StateId s) const {
    std::vector<ActionId> out;
    for (std::size_t a = 0; a < num_actions_; ++a)
        if (mask_[s * num_actions_ + a]) out.push_back(static_cast<ActionId>(a));
    return out;
}

std::size_t FeasibleZone::projection_size() const {
    return static_cast<std::size_t>(
        std::count_if(state_count_.begin(), state_count_.end(), [](auto c) { return c > 0; }));
}

bool FeasibleZone::subset_of(const FeasibleZone& other) const {
    if (other.mask_.size() != mask_.size()) return false;
    for (std::size_t p = 0; p < mask_.size(); ++p)
        if (mask_[p] && !other.mask_[p]) return false;
    return true;
}

// ---- HorizonField ---------------------------------------------------------

double HorizonField::cdf(PairId p, double gamma) const {
    const auto n = values_[p];
    if (n == kInfinite) return 0.0;
    return std::pow(gamma, static_cast<double>(n));
}

namespace {

void require_cover(const UncertainModel& model, const DiscreteSystem& system) {
    if (model.num_pairs() != system.num_pairs())
        throw std::invalid_argument("model does not cover every state-action pair of the system");
    for (PairId p = 0; p < static_cast<PairId>(model.num_pairs()); ++p)
        if (model.set(p).empty()) throw std::invalid_argument("model has an empty transition set");
}

std::uint32_t saturating_inc(std::uint32_t v) { return v == HorizonField::kInfinite ? v : v + 1; }

}  // namespace

HorizonField horizon_iteration(const UncertainModel& model, const DiscreteSystem& system) {
    require_cover(model, system);
    const std::size_t ns = system.num_states(), na = system.num_actions(), np = system.num_pairs();
    const auto costs = system.costs();

    // Reverse adjacency: for each in-grid state, the safe pairs listing it.
    std::vector<std::uint32_t> offsets(ns + 1, 0);
    for (PairId p = 0; p < static_cast<PairId>(np); ++p) {
        if (costs[system.pair_state(p)]) continue;
        for (StateId s : model.set(p).states) ++offsets[s + 1];
    }
    for (std::size_t s = 0; s < ns; ++s) offsets[s + 1] += offsets[s];
    std::vector<PairId> preds(offsets[ns]);
    {
        auto fill = offsets;
        for (PairId p = 0; p < static_cast<PairId>(np); ++p) {
            if (costs[system.pair_state(p)]) continue;
            for (StateId s : model.set(p).states) preds[fill[s]++] = p;
        }
    }

    HorizonField field(np, HorizonField::kInfinite);
    std::vector<std::uint32_t> finalized(ns, 0);
    std::vector<std::vector<StateId>> buckets(2);

    auto finalize = [&](PairId p, std::uint32_t value) {
        field.set(p, value);
        const StateId s = system.pair_state(p);
        if (++finalized[s] == na) {
            // Entries are written in nondecreasing order, so the last one
            // is the maximum over actions.
            if (buckets.size() <= value) buckets.resize(value + 1);
            buckets[value].push_back(s);
        }
    };

    for (StateId s = 0; s < static_cast<StateId>(ns); ++s) {
        if (!costs[s]) continue;
        for (ActionId a = 0; a < static_cast<ActionId>(na); ++a) field.set(system.pair_id(s, a), 0);
        finalized[s] = static_cast<std::uint32_t>(na);
        buckets[0].push_back(s);
    }
    // The out-of-bounds sentinel behaves as a level-0 state.
    for (PairId p = 0; p < static_cast<PairId>(np); ++p)
        if (!costs[system.pair_state(p)] && model.set(p).contains_oob()) finalize(p, 1);

    for (std::uint32_t level = 0; level < buckets.size(); ++level) {
        for (std::size_t i = 0; i < buckets[level].size(); ++i) {
            const StateId s = buckets[level][i];
            for (std::uint32_t k = offsets[s]; k < offsets[s + 1]; ++k) {
                const PairId p = preds[k];
                if (field.at(p) == HorizonField::kInfinite) finalize(p, level + 1);
            }
        }
    }
    return field;
}

HorizonField bellman_update(const HorizonField& field, const UncertainModel& model,
                            const DiscreteSystem& system) {
    const std::size_t ns = system.num_states(), na = system.num_actions();
    const auto costs = system.costs();
    std::vector<std::uint32_t> best(ns, 0);
    for (StateId s = 0; s < static_cast<StateId>(ns); ++s) {
        std::uint32_t m = 0;
        for (ActionId a = 0; a < static_cast<ActionId>(na); ++a) m = std::max(m, field.at(system.pair_id(s, a)));
        best[s] = m;
    }
    HorizonField next(field.size(), 0);
    for (PairId p = 0; p < static_cast<PairId>(field.size()); ++p) {
        if (costs[system.pair_state(p)]) continue;
        const TransitionSet& set = model.set(p);
        std::uint32_t worst = set.contains_oob() ? 0 : HorizonField::kInfinite;
        for (StateId s : set.states) worst = std::min(worst, best[s]);
        next.set(p, saturating_inc(worst));
    }
    return next;
}

HorizonField horizon_iteration_sweeps(const UncertainModel& model, const DiscreteSystem& system) {
    require_cover(model, system);
    const auto cap = static_cast<std::uint32_t>(system.num_states() + 1);
    HorizonField field(system.num_pairs(), 0);
    while (true) {
        HorizonField next = bellman_update(field, model, system);
        for (PairId p = 0; p < static_cast<PairId>(next.size()); ++p)
            if (next.at(p) != HorizonField::kInfinite && next.at(p) > cap) next.set(p, HorizonField::kInfinite);
        if (next == field) return field;
        field = std::move(next);
    }
}

std::vector<double> cdf_iteration(const UncertainModel& model, const DiscreteSystem& system, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0,1)");
    require_cover(model, system);
    const std::size_t ns = system.num_states(), na = system.num_actions(), np = system.num_pairs();
    const auto costs = system.costs();
    std::vector<double> g(np, 0.0), next(np, 0.0), state_min(ns, 0.0);
    // G_k is exact for every pair whose horizon is below k, so |X|+2 sweeps
    // always suffice.
    for (std::size_t sweep = 0; sweep < ns + 3; ++sweep) {
        for (StateId s = 0; s < static_cast<StateId>(ns); ++s) {
            double m = g[system.pair_id(s, 0)];
            for (ActionId a = 1; a < static_cast<ActionId>(na); ++a) m = std::min(m, g[system.pair_id(s, a)]);
            state_min[s] = m;
        }
        for (PairId p = 0; p < static_cast<PairId>(np); ++p) {
            if (costs[system.pair_state(p)]) {
                next[p] = 1.0;
                continue;
            }
            const TransitionSet& set = model.set(p);
            double worst = set.contains_oob() ? 1.0 : 0.0;
            for (StateId s : set.states) worst = std::max(worst, state_min[s]);
            next[p] = gamma * worst;
        }
        if (next == g) break;
        g.swap(next);
    }
    return g;
}

FeasibleZone extract_zone(const HorizonField& field, const DiscreteSystem& system) {
    FeasibleZone zone = FeasibleZone::empty_for(system);
    for (PairId p = 0; p < static_cast<PairId>(field.size()); ++p)
        if (field.is_infinite(p)) zone.insert(p);
    return zone;
}

FeasibleZone zone_from_cdf(std::span<const double> cdf, const DiscreteSystem& system) {
    FeasibleZone zone = FeasibleZone::empty_for(system);
    for (PairId p = 0; p < static_cast<PairId>(cdf.size()); ++p)
        if (cdf[p] == 0.0) zone.insert(p);
    return zone;
}

ZoneCheck check_feasible_zone(const FeasibleZone& zone, const UncertainModel& model,
                              const DiscreteSystem& system) {
    ZoneCheck check;
    for (PairId p = 0; p < static_cast<PairId>(zone.num_pairs()); ++p) {
        if (!zone.contains(p)) continue;
        bool bad = false;
        if (system.costs()[system.pair_state(p)]) {
            check.constraint_ok = false;
            bad = true;
        }
        const TransitionSet& set = model.set(p);
        bool escapes = set.contains_oob();
        for (StateId s : set.states)
            if (!zone.state_in_projection(s)) escapes = true;
        if (escapes) {
            check.invariance_ok = false;
            bad = true;
        }
        if (bad) check.offending.push_back(p);
    }
    return check;
}

FeasibleZone maximum_feasible_zone(const UncertainModel& model, const DiscreteSystem& system) {
    FeasibleZone zone = extract_zone(horizon_iteration(model, system), system);
    const ZoneCheck check = check_feasible_zone(zone, model, system);
    if (!check.ok())
        throw std::logic_error("extracted zone violates the feasible-zone properties at " +
                               std::to_string(check.offending.size()) + " pairs");
    return zone;
}

UncertainModel true_model(const DiscreteSystem& system) {
    UncertainModel model(system.num_pairs());
    for (PairId p = 0; p < static_cast<PairId>(system.num_pairs()); ++p) {
        model.mutable_set(p) = true_transition(system, p);
        model.set_known(p, true);
    }
    return model;
}

FeasibleZone true_model_baseline(const DiscreteSystem& system) {
    return maximum_feasible_zone(true_model(system), system);
}

double recall_metric(const FeasibleZone& explored, const FeasibleZone& baseline) {
    if (baseline.empty()) throw std::domain_error("recall is undefined for an empty baseline zone");
    return 100.0 * static_cast<double>(explored.size()) / static_cast<double>(baseline.size());
}

std::vector<ActionRef> feasible_actions(const FeasibleZone& zone, StateRef x) {
    std::vector<ActionRef> out;
    if (x.is_out_of_bounds()) return out;
    for (ActionId a : zone.actions_at(x.id())) out.push_back(ActionRef{a});
    return out;
}

}  // namespace see
