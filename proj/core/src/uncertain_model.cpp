#include "see/uncertain_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace see {

namespace {

std::vector<Coord> ball_offsets(double radius, std::size_t dims) {
    std::vector<Coord> out;
    if (radius < 0) return out;
    const int r = static_cast<int>(std::floor(radius + 1e-9));
    const double r2 = radius * radius + 1e-9;
    Coord cur{};
    for (std::size_t d = 0; d < dims; ++d) cur[d] = -r;
    bool done = dims == 0;
    while (!done) {
        if (static_cast<double>(squared_norm(cur)) <= r2) out.push_back(cur);
        done = true;
        for (std::size_t d = dims; d-- > 0;) {
            if (cur[d] < r) {
                ++cur[d];
                done = false;
                break;
            }
            cur[d] = -r;
        }
    }
    return out;
}

bool within_radius(const Coord& c, double radius) {
    return static_cast<double>(squared_norm(c)) <= radius * radius + 1e-9;
}

}  // namespace

bool TransitionSet::contains(StateId s) const { return std::binary_search(states.begin(), states.end(), s); }

bool TransitionSet::contains(const Candidate& c) const {
    switch (c.kind) {
        case Candidate::Kind::grid: return contains(c.state);
        case Candidate::Kind::exterior: return std::binary_search(exterior.begin(), exterior.end(), c.point);
        case Candidate::Kind::sentinel: return sentinel;
    }
    return false;
}

bool TransitionSet::subset_of(const TransitionSet& other) const {
    if (sentinel && !other.sentinel) return false;
    return std::includes(other.states.begin(), other.states.end(), states.begin(), states.end()) &&
           std::includes(other.exterior.begin(), other.exterior.end(), exterior.begin(), exterior.end());
}

std::vector<Candidate> TransitionSet::candidates(const DiscreteSystem& system) const {
    std::vector<Candidate> out;
    out.reserve(vertex_count());
    for (StateId s : states) out.push_back(Candidate::grid_state(s, system.state_coord(s)));
    for (const Coord& c : exterior) out.push_back(Candidate::exterior_point(c));
    if (sentinel) out.push_back(Candidate::out_of_bounds());
    return out;
}

bool TransitionSet::erase(const Candidate& c) {
    switch (c.kind) {
        case Candidate::Kind::grid: {
            auto it = std::lower_bound(states.begin(), states.end(), c.state);
            if (it == states.end() || *it != c.state) return false;
            states.erase(it);
            return true;
        }
        case Candidate::Kind::exterior: {
            auto it = std::lower_bound(exterior.begin(), exterior.end(), c.point);
            if (it == exterior.end() || *it != c.point) return false;
            exterior.erase(it);
            return true;
        }
        case Candidate::Kind::sentinel: {
            const bool had = sentinel;
            sentinel = false;
            return had;
        }
    }
    return false;
}

TransitionSet TransitionSet::singleton(const Candidate& c) {
    TransitionSet t;
    switch (c.kind) {
        case Candidate::Kind::grid: t.states.push_back(c.state); break;
        case Candidate::Kind::exterior: t.exterior.push_back(c.point); break;
        case Candidate::Kind::sentinel: t.sentinel = true; break;
    }
    return t;
}

std::size_t UncertainModel::candidate_count() const {
    std::size_t n = 0;
    for (const auto& s : sets_) n += s.cardinality();
    return n;
}

std::size_t UncertainModel::vertex_count() const {
    std::size_t n = 0;
    for (const auto& s : sets_) n += s.vertex_count();
    return n;
}

bool UncertainModel::subset_of(const UncertainModel& other) const {
    if (other.num_pairs() != num_pairs()) return false;
    for (std::size_t p = 0; p < sets_.size(); ++p)
        if (!sets_[p].subset_of(other.sets_[p])) return false;
    return true;
}

bool UncertainModel::same_sets(const UncertainModel& other) const {
    if (other.num_pairs() != num_pairs()) return false;
    for (std::size_t p = 0; p < sets_.size(); ++p)
        if (!(sets_[p] == other.sets_[p])) return false;
    return true;
}

void InitialModelSpec::validate() const {
    if (!(r0 >= 0) || !(rx >= 0) || !(ru >= 0))
        throw std::invalid_argument("initial model radii must be non-negative");
}

Candidate true_candidate(const DiscreteSystem& system, PairId p) {
    const StateRef next = system.step(p);
    if (next.in_grid()) return Candidate::grid_state(next.id(), system.state_coord(next.id()));
    const auto& point = system.successor_point(p);
    if (point) return Candidate::exterior_point(*point);
    return Candidate::out_of_bounds();
}

TransitionSet true_transition(const DiscreteSystem& system, PairId p) {
    return TransitionSet::singleton(true_candidate(system, p));
}

UncertainModel build_initial_model(const DiscreteSystem& system, const InitialModelSpec& spec) {
    spec.validate();
    UncertainModel model(system.num_pairs());
    const auto offsets = ball_offsets(spec.r0, system.state_dims());
    const bool keep_exterior = system.boundary() == BoundaryMode::violate;

    for (StateId s = 0; s < static_cast<StateId>(system.num_states()); ++s) {
        const bool state_known = spec.known_region && within_radius(system.state_coord(s), spec.rx);
        for (ActionId a = 0; a < static_cast<ActionId>(system.num_actions()); ++a) {
            const PairId p = system.pair_id(s, a);
            if (state_known && within_radius(system.action_coord(a), spec.ru)) {
                model.mutable_set(p) = true_transition(system, p);
                model.set_known(p, true);
                continue;
            }
            const auto& center = system.successor_point(p);
            TransitionSet& set = model.mutable_set(p);
            if (!center) {
                set.sentinel = true;
                continue;
            }
            for (const Coord& o : offsets) {
                Coord g = *center;
                for (std::size_t d = 0; d < system.state_dims(); ++d) g[d] += o[d];
                if (auto id = system.find_state(g))
                    set.states.push_back(*id);
                else if (keep_exterior)
                    set.exterior.push_back(g);
            }
            std::sort(set.states.begin(), set.states.end());
            std::sort(set.exterior.begin(), set.exterior.end());
        }
    }
    return model;
}

UncertainModel collapse_known(const UncertainModel& model, const FeasibleZone& zone,
                              const DiscreteSystem& system) {
    if (zone.num_pairs() != model.num_pairs())
        throw std::invalid_argument("zone and model cover different pair counts");
    UncertainModel out = model;
    for (PairId p = 0; p < static_cast<PairId>(model.num_pairs()); ++p) {
        if (!zone.contains(p)) continue;
        out.mutable_set(p) = true_transition(system, p);
        out.set_known(p, true);
    }
    return out;
}

int uncertainty_degree(const UncertainModel& model, PairId p) {
    return static_cast<int>(model.set(p).vertex_count()) - 1;
}

long long state_uncertainty_degree(const UncertainModel& model, const DiscreteSystem& system, StateId s) {
    long long sum = 0;
    for (ActionId a = 0; a < static_cast<ActionId>(system.num_actions()); ++a)
        sum += uncertainty_degree(model, system.pair_id(s, a));
    return sum;
}

namespace {

double mean_uncertainty(const UncertainModel& model, const FeasibleZone& reference, bool inside) {
    if (reference.num_pairs() != model.num_pairs())
        throw std::invalid_argument("reference zone and model cover different pair counts");
    long long sum = 0;
    std::size_t count = 0;
    for (PairId p = 0; p < static_cast<PairId>(model.num_pairs()); ++p) {
        if (reference.contains(p) != inside) continue;
        sum += uncertainty_degree(model, p);
        ++count;
    }
    return count == 0 ? 0.0 : static_cast<double>(sum) / static_cast<double>(count);
}

}  // namespace

double mean_uncertainty_inside(const UncertainModel& model, const FeasibleZone& reference) {
    return mean_uncertainty(model, reference, true);
}

double mean_uncertainty_outside(const UncertainModel& model, const FeasibleZone& reference) {
    return mean_uncertainty(model, reference, false);
}

CalibrationReport check_well_calibrated(const UncertainModel& model, const DiscreteSystem& system) {
    CalibrationReport report;
    for (PairId p = 0; p < static_cast<PairId>(model.num_pairs()); ++p) {
        const Candidate truth = true_candidate(system, p);
        const TransitionSet& set = model.set(p);
        bool ok = set.contains(truth);
        // A coordinate-less sentinel stands for every out-of-grid point.
        if (!ok && truth.kind != Candidate::Kind::grid) ok = set.sentinel;
        if (!ok) report.violations.push_back(p);
    }
    report.calibrated = report.violations.empty();
    return report;
}

nlohmann::json model_to_json(const UncertainModel& model, const DiscreteSystem& system) {
    nlohmann::json pairs = nlohmann::json::array();
    for (PairId p = 0; p < static_cast<PairId>(model.num_pairs()); ++p) {
        const TransitionSet& set = model.set(p);
        nlohmann::json entry;
        entry["x"] = system.state_index(system.pair_state(p));
        entry["u"] = system.action_index(system.pair_action(p));
        nlohmann::json members = nlohmann::json::array();
        for (StateId s : set.states) members.push_back(system.state_index(s));
        entry["set"] = std::move(members);
        entry["oob"] = set.contains_oob();
        entry["known"] = model.known(p);
        if (!set.exterior.empty()) {
            nlohmann::json pts = nlohmann::json::array();
            for (const Coord& c : set.exterior) pts.push_back(to_index(c, system.state_dims()));
            entry["oob_points"] = std::move(pts);
        }
        pairs.push_back(std::move(entry));
    }
    return nlohmann::json{{"pairs", std::move(pairs)}};
}

UncertainModel model_from_json(const nlohmann::json& j, const DiscreteSystem& system) {
    UncertainModel model(system.num_pairs());
    std::vector<std::uint8_t> seen(system.num_pairs(), 0);
    try {
        for (const auto& entry : j.at("pairs")) {
            const auto x = entry.at("x").get<IndexVec>();
            const auto u = entry.at("u").get<IndexVec>();
            const auto s = system.find_state(x);
            const auto a = system.find_action(u);
            if (!s || !a) throw std::invalid_argument("model pair references a state or action outside the grid");
            const PairId p = system.pair_id(*s, *a);
            if (seen[p]) throw std::invalid_argument("model lists a state-action pair twice");
            seen[p] = 1;
            TransitionSet& set = model.mutable_set(p);
            for (const auto& member : entry.at("set")) {
                const auto idx = member.get<IndexVec>();
                const auto id = system.find_state(idx);
                if (!id) throw std::invalid_argument("transition set member outside the grid");
                set.states.push_back(*id);
            }
            if (entry.contains("oob_points")) {
                for (const auto& pt : entry.at("oob_points")) {
                    const auto idx = pt.get<IndexVec>();
                    if (idx.size() != system.state_dims())
                        throw std::invalid_argument("oob point has the wrong dimension");
                    const Coord c = to_coord(idx);
                    if (system.find_state(c)) throw std::invalid_argument("oob point lies inside the grid");
                    set.exterior.push_back(c);
                }
            }
            const bool oob = entry.at("oob").get<bool>();
            if (oob && set.exterior.empty()) set.sentinel = true;
            if (!oob && !set.exterior.empty())
                throw std::invalid_argument("oob_points given for a set flagged oob=false");
            std::sort(set.states.begin(), set.states.end());
            set.states.erase(std::unique(set.states.begin(), set.states.end()), set.states.end());
            std::sort(set.exterior.begin(), set.exterior.end());
            set.exterior.erase(std::unique(set.exterior.begin(), set.exterior.end()), set.exterior.end());
            if (set.empty()) throw std::invalid_argument("empty transition set in model");
            model.set_known(p, entry.value("known", false));
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed model JSON: ") + e.what());
    }
    for (auto v : seen)
        if (!v) throw std::invalid_argument("model JSON does not cover every state-action pair");
    return model;
}

}  // namespace see
