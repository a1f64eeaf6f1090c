#include "see/system.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace see {

namespace {

constexpr std::size_t kMaxDenseLookup = std::size_t{1} << 24;

std::vector<Coord> enumerate_box(const std::vector<DimRange>& ranges) {
    std::vector<Coord> out;
    std::size_t total = 1;
    for (const auto& r : ranges) total *= static_cast<std::size_t>(r.size());
    out.reserve(total);
    Coord cur{};
    for (std::size_t d = 0; d < ranges.size(); ++d) cur[d] = ranges[d].lo;
    for (std::size_t n = 0; n < total; ++n) {
        out.push_back(cur);
        // Last dimension varies fastest: lexicographic order.
        for (std::size_t d = ranges.size(); d-- > 0;) {
            if (cur[d] < ranges[d].hi) {
                ++cur[d];
                break;
            }
            cur[d] = ranges[d].lo;
        }
    }
    return out;
}

bool in_box(const Coord& c, const std::vector<DimRange>& ranges) {
    for (std::size_t d = 0; d < ranges.size(); ++d)
        if (!ranges[d].contains(c[d])) return false;
    return true;
}

Coord clip_to_box(Coord c, const std::vector<DimRange>& ranges) {
    for (std::size_t d = 0; d < ranges.size(); ++d) c[d] = std::clamp(c[d], ranges[d].lo, ranges[d].hi);
    return c;
}

}  // namespace

Coord to_coord(std::span<const int> index) {
    if (index.size() > kMaxDims)
        throw std::invalid_argument("index vector has more than " + std::to_string(kMaxDims) +
                                    " dimensions");
    Coord c{};
    std::copy(index.begin(), index.end(), c.begin());
    return c;
}

IndexVec to_index(const Coord& c, std::size_t dims) { return IndexVec(c.begin(), c.begin() + dims); }

int project_to_index(double value, double scale) {
    const double q = value / scale;
    const double fl = std::floor(q);
    const double frac = q - fl;
    // Treat near-ties as exact ties so the tie rule is not at the mercy of
    // floating-point noise.
    if (std::abs(frac - 0.5) < 1e-9) return static_cast<int>(fl);
    return static_cast<int>(frac < 0.5 ? fl : fl + 1.0);
}

void GridSpec::validate() const {
    if (state_ranges.empty()) throw std::invalid_argument("grid has no state dimensions");
    if (action_ranges.empty()) throw std::invalid_argument("grid has no action dimensions");
    if (state_ranges.size() > kMaxDims || action_ranges.size() > kMaxDims)
        throw std::invalid_argument("grid exceeds the supported dimensionality");
    if (state_scales.size() != state_ranges.size() || action_scales.size() != action_ranges.size())
        throw std::invalid_argument("scale factors do not match grid dimensions");
    for (const auto& r : state_ranges)
        if (r.hi < r.lo) throw std::invalid_argument("empty state range");
    for (const auto& r : action_ranges)
        if (r.hi < r.lo) throw std::invalid_argument("empty action range");
    for (double s : state_scales)
        if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("state scale must be positive");
    for (double s : action_scales)
        if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("action scale must be positive");
}

void DiscreteSystem::init_lattice() {
    state_dims_ = grid_.state_ranges.size();
    action_dims_ = grid_.action_ranges.size();
    if (state_coords_.empty()) state_coords_ = enumerate_box(grid_.state_ranges);
    if (action_coords_.empty()) action_coords_ = enumerate_box(grid_.action_ranges);

    bbox_.assign(state_dims_, DimRange{});
    for (std::size_t d = 0; d < state_dims_; ++d) {
        int lo = state_coords_.front()[d], hi = lo;
        for (const auto& c : state_coords_) {
            lo = std::min(lo, c[d]);
            hi = std::max(hi, c[d]);
        }
        bbox_[d] = {lo, hi};
    }
    std::size_t volume = 1;
    for (const auto& r : bbox_) {
        volume *= static_cast<std::size_t>(r.size());
        if (volume > kMaxDenseLookup) break;
    }
    lookup_.clear();
    if (volume <= kMaxDenseLookup) {
        lookup_.assign(volume, -1);
        for (StateId s = 0; s < static_cast<StateId>(state_coords_.size()); ++s) {
            std::size_t off = 0;
            for (std::size_t d = 0; d < state_dims_; ++d)
                off = off * bbox_[d].size() + static_cast<std::size_t>(state_coords_[s][d] - bbox_[d].lo);
            lookup_[off] = s;
        }
    }
}

std::optional<StateId> DiscreteSystem::find_state(const Coord& c) const {
    for (std::size_t d = state_dims_; d < kMaxDims; ++d)
        if (c[d] != 0) return std::nullopt;
    if (!in_box(c, bbox_)) return std::nullopt;
    if (!lookup_.empty()) {
        std::size_t off = 0;
        for (std::size_t d = 0; d < state_dims_; ++d)
            off = off * bbox_[d].size() + static_cast<std::size_t>(c[d] - bbox_[d].lo);
        const StateId s = lookup_[off];
        if (s < 0) return std::nullopt;
        return s;
    }
    auto it = std::lower_bound(state_coords_.begin(), state_coords_.end(), c);
    if (it == state_coords_.end() || *it != c) return std::nullopt;
    return static_cast<StateId>(it - state_coords_.begin());
}

std::optional<StateId> DiscreteSystem::find_state(std::span<const int> index) const {
    if (index.size() != state_dims_) return std::nullopt;
    return find_state(to_coord(index));
}

std::optional<ActionId> DiscreteSystem::find_action(std::span<const int> index) const {
    if (index.size() != action_dims_) return std::nullopt;
    const Coord c = to_coord(index);
    auto it = std::lower_bound(action_coords_.begin(), action_coords_.end(), c);
    if (it == action_coords_.end() || *it != c) return std::nullopt;
    return static_cast<ActionId>(it - action_coords_.begin());
}

void DiscreteSystem::finalize_successors(const std::vector<std::optional<Coord>>& raw) {
    const std::size_t n = num_pairs();
    step_.assign(n, StateRef::out_of_bounds());
    successor_point_.assign(n, std::nullopt);
    for (std::size_t p = 0; p < n; ++p) {
        if (!raw[p]) continue;
        Coord c = *raw[p];
        if (boundary_ == BoundaryMode::clip && kind_ != SystemKind::custom_table) c = clip_to_box(c, grid_.state_ranges);
        successor_point_[p] = c;
        if (auto s = find_state(c)) step_[p] = StateRef::in_grid(*s);
    }
}

DiscreteSystem DiscreteSystem::double_integrator() {
    DiscreteSystem sys;
    sys.kind_ = SystemKind::double_integrator;
    sys.boundary_ = BoundaryMode::violate;
    sys.grid_.state_ranges = {{-20, 20}, {-15, 15}};
    sys.grid_.action_ranges = {{-2, 2}};
    sys.grid_.state_scales = {1.0, 1.0};
    sys.grid_.action_scales = {1.0};
    sys.grid_.state_labels = {"x1", "x2"};
    sys.grid_.action_labels = {"u"};
    sys.grid_.validate();
    sys.init_lattice();
    sys.cost_.assign(sys.num_states(), 0);

    std::vector<std::optional<Coord>> raw(sys.num_pairs());
    for (StateId s = 0; s < static_cast<StateId>(sys.num_states()); ++s) {
        const Coord& x = sys.state_coords_[s];
        for (ActionId a = 0; a < static_cast<ActionId>(sys.num_actions()); ++a) {
            const int u = sys.action_coords_[a][0];
            raw[sys.pair_id(s, a)] = Coord{x[0] + x[1], x[1] + u, 0, 0};
        }
    }
    sys.finalize_successors(raw);
    return sys;
}

DiscreteSystem DiscreteSystem::pendulum(const PendulumParams& params) {
    if (!(params.mass > 0) || !(params.length > 0) || !(params.dt > 0))
        throw std::invalid_argument("pendulum mass, length and dt must be positive");
    DiscreteSystem sys;
    sys.kind_ = SystemKind::pendulum;
    sys.boundary_ = BoundaryMode::violate;
    sys.pendulum_ = params;
    sys.grid_.state_ranges = {{-10, 10}, {-10, 10}};
    sys.grid_.action_ranges = {{-3, 3}};
    sys.grid_.state_scales = {0.05, 0.2};
    sys.grid_.action_scales = {1.0};
    sys.grid_.state_labels = {"theta", "theta_dot"};
    sys.grid_.action_labels = {"torque"};
    sys.grid_.validate();
    sys.init_lattice();
    sys.cost_.assign(sys.num_states(), 0);

    const auto& g = sys.grid_;
    const double m = params.mass, l = params.length, grav = params.gravity, dt = params.dt;
    std::vector<std::optional<Coord>> raw(sys.num_pairs());
    for (StateId s = 0; s < static_cast<StateId>(sys.num_states()); ++s) {
        const double theta = sys.state_coords_[s][0] * g.state_scales[0];
        const double omega = sys.state_coords_[s][1] * g.state_scales[1];
        for (ActionId a = 0; a < static_cast<ActionId>(sys.num_actions()); ++a) {
            const double u = sys.action_coords_[a][0] * g.action_scales[0];
            const double omega_next =
                omega + (-(3.0 * grav) / (2.0 * l) * std::sin(theta) + 3.0 / (m * l * l) * u) * dt;
            const double theta_next = params.integrator == PendulumIntegrator::semi_implicit
                                          ? theta + omega_next * dt
                                          : theta + omega * dt;
            raw[sys.pair_id(s, a)] = Coord{project_to_index(theta_next, g.state_scales[0]),
                                           project_to_index(omega_next, g.state_scales[1]), 0, 0};
        }
    }
    sys.finalize_successors(raw);
    return sys;
}

DiscreteSystem DiscreteSystem::unicycle(const UnicycleParams& params, BoundaryMode boundary) {
    if (!(params.velocity > 0) || !(params.dt > 0))
        throw std::invalid_argument("unicycle velocity and dt must be positive");
    if (params.obstacle_y.hi < params.obstacle_y.lo || params.obstacle_z.hi < params.obstacle_z.lo)
        throw std::invalid_argument("unicycle obstacle box is empty");
    DiscreteSystem sys;
    sys.kind_ = SystemKind::unicycle;
    sys.boundary_ = boundary;
    sys.unicycle_ = params;
    sys.grid_.state_ranges = {{-15, 15}, {-10, 10}, {-5, 5}};
    sys.grid_.action_ranges = {{-2, 2}};
    sys.grid_.state_scales = {0.05, 0.05, std::numbers::pi / 20.0};
    sys.grid_.action_scales = {std::numbers::pi / 8.0};
    sys.grid_.state_labels = {"y", "z", "heading"};
    sys.grid_.action_labels = {"turn_rate"};
    sys.grid_.validate();
    sys.init_lattice();

    sys.cost_.assign(sys.num_states(), 0);
    for (StateId s = 0; s < static_cast<StateId>(sys.num_states()); ++s) {
        const Coord& x = sys.state_coords_[s];
        if (params.obstacle_y.contains(x[0]) && params.obstacle_z.contains(x[1])) sys.cost_[s] = 1;
    }

    const auto& g = sys.grid_;
    std::vector<std::optional<Coord>> raw(sys.num_pairs());
    for (StateId s = 0; s < static_cast<StateId>(sys.num_states()); ++s) {
        const Coord& x = sys.state_coords_[s];
        const double y = x[0] * g.state_scales[0];
        const double z = x[1] * g.state_scales[1];
        const double heading = x[2] * g.state_scales[2];
        for (ActionId a = 0; a < static_cast<ActionId>(sys.num_actions()); ++a) {
            const double turn = sys.action_coords_[a][0] * g.action_scales[0];
            const double y_next = y + params.dt * params.velocity * std::cos(heading);
            const double z_next = z + params.dt * params.velocity * std::sin(heading);
            const double heading_next = heading + params.dt * turn;
            raw[sys.pair_id(s, a)] = Coord{project_to_index(y_next, g.state_scales[0]),
                                           project_to_index(z_next, g.state_scales[1]),
                                           project_to_index(heading_next, g.state_scales[2]), 0};
        }
    }
    sys.finalize_successors(raw);
    return sys;
}

DiscreteSystem DiscreteSystem::from_table(const TransitionTable& table) {
    if (table.states.empty()) throw std::invalid_argument("transition table has no states");
    if (table.actions.empty()) throw std::invalid_argument("transition table has no actions");
    const std::size_t sdim = table.states.front().size();
    const std::size_t adim = table.actions.front().size();
    if (sdim == 0 || sdim > kMaxDims || adim == 0 || adim > kMaxDims)
        throw std::invalid_argument("table index vectors must have 1.." + std::to_string(kMaxDims) +
                                    " entries");
    for (const auto& s : table.states)
        if (s.size() != sdim) throw std::invalid_argument("state index vectors differ in length");
    for (const auto& a : table.actions)
        if (a.size() != adim) throw std::invalid_argument("action index vectors differ in length");

    const std::size_t ns = table.states.size(), na = table.actions.size();
    std::vector<std::size_t> sorder(ns), aorder(na);
    std::iota(sorder.begin(), sorder.end(), 0);
    std::iota(aorder.begin(), aorder.end(), 0);
    std::sort(sorder.begin(), sorder.end(),
              [&](std::size_t i, std::size_t j) { return table.states[i] < table.states[j]; });
    std::sort(aorder.begin(), aorder.end(),
              [&](std::size_t i, std::size_t j) { return table.actions[i] < table.actions[j]; });
    std::vector<StateId> snew(ns);
    std::vector<ActionId> anew(na);
    for (std::size_t i = 0; i < ns; ++i) snew[sorder[i]] = static_cast<StateId>(i);
    for (std::size_t i = 0; i < na; ++i) anew[aorder[i]] = static_cast<ActionId>(i);

    DiscreteSystem sys;
    sys.kind_ = SystemKind::custom_table;
    sys.boundary_ = BoundaryMode::violate;
    for (std::size_t i = 0; i < ns; ++i) {
        if (i > 0 && table.states[sorder[i]] == table.states[sorder[i - 1]])
            throw std::invalid_argument("duplicate state index vector in table");
        sys.state_coords_.push_back(to_coord(table.states[sorder[i]]));
    }
    for (std::size_t i = 0; i < na; ++i) {
        if (i > 0 && table.actions[aorder[i]] == table.actions[aorder[i - 1]])
            throw std::invalid_argument("duplicate action index vector in table");
        sys.action_coords_.push_back(to_coord(table.actions[aorder[i]]));
    }

    auto& g = sys.grid_;
    for (std::size_t d = 0; d < sdim; ++d) {
        int lo = sys.state_coords_.front()[d], hi = lo;
        for (const auto& c : sys.state_coords_) lo = std::min(lo, c[d]), hi = std::max(hi, c[d]);
        g.state_ranges.push_back({lo, hi});
        g.state_scales.push_back(1.0);
        g.state_labels.push_back("x" + std::to_string(d));
    }
    for (std::size_t d = 0; d < adim; ++d) {
        int lo = sys.action_coords_.front()[d], hi = lo;
        for (const auto& c : sys.action_coords_) lo = std::min(lo, c[d]), hi = std::max(hi, c[d]);
        g.action_ranges.push_back({lo, hi});
        g.action_scales.push_back(1.0);
        g.action_labels.push_back("u" + std::to_string(d));
    }
    g.validate();
    sys.init_lattice();

    sys.cost_.assign(ns, 0);
    for (int u : table.unsafe_states) {
        if (u < 0 || static_cast<std::size_t>(u) >= ns)
            throw std::invalid_argument("unsafe state index out of range: " + std::to_string(u));
        sys.cost_[snew[u]] = 1;
    }

    std::vector<std::optional<Coord>> raw(sys.num_pairs());
    std::vector<std::uint8_t> seen(sys.num_pairs(), 0);
    for (const auto& t : table.transitions) {
        const int s = t[0], a = t[1], n = t[2];
        if (s < 0 || static_cast<std::size_t>(s) >= ns || a < 0 || static_cast<std::size_t>(a) >= na)
            throw std::invalid_argument("transition references an unknown state or action");
        if (n < -1 || n >= static_cast<int>(ns))
            throw std::invalid_argument("transition target out of range: " + std::to_string(n));
        const PairId p = sys.pair_id(snew[s], anew[a]);
        if (seen[p]) throw std::invalid_argument("duplicate transition for a state-action pair");
        seen[p] = 1;
        if (n >= 0) raw[p] = sys.state_coords_[snew[n]];
    }
    for (auto v : seen)
        if (!v) throw std::invalid_argument("transition table does not cover every state-action pair");
    sys.finalize_successors(raw);
    return sys;
}

DiscreteSystem DiscreteSystem::load_table_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open transition table: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("transition table " + path.string() + ": " + e.what());
    }
    TransitionTable t;
    try {
        t.states = j.at("states").get<std::vector<IndexVec>>();
        t.actions = j.at("actions").get<std::vector<IndexVec>>();
        t.transitions = j.at("transitions").get<std::vector<std::array<int, 3>>>();
        if (j.contains("unsafe_states")) t.unsafe_states = j.at("unsafe_states").get<std::vector<int>>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("transition table " + path.string() + ": " + e.what());
    }
    return from_table(t);
}

SpaceEnumeration enumerate_space(const DiscreteSystem& system) {
    SpaceEnumeration out;
    out.states.reserve(system.num_states());
    out.actions.reserve(system.num_actions());
    for (StateId s = 0; s < static_cast<StateId>(system.num_states()); ++s)
        out.states.push_back(system.state_index(s));
    for (ActionId a = 0; a < static_cast<ActionId>(system.num_actions()); ++a)
        out.actions.push_back(system.action_index(a));
    return out;
}

}  // namespace see
