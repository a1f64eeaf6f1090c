#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace see {

/// Upper bound on state and action dimensionality. Coordinates are stored
/// in fixed-size arrays padded with zeros so distance kernels stay branch-free.
inline constexpr std::size_t kMaxDims = 4;

using Coord = std::array<int, kMaxDims>;
using IndexVec = std::vector<int>;
using StateId = std::int32_t;
using ActionId = std::int32_t;
using PairId = std::int32_t;

/// Squared Euclidean distance between two integer lattice points.
inline long long squared_distance(const Coord& a, const Coord& b) {
    long long acc = 0;
    for (std::size_t i = 0; i < kMaxDims; ++i) {
        const long long d = static_cast<long long>(a[i]) - b[i];
        acc += d * d;
    }
    return acc;
}

inline long long squared_norm(const Coord& a) {
    long long acc = 0;
    for (int v : a) acc += static_cast<long long>(v) * v;
    return acc;
}

Coord to_coord(std::span<const int> index);
IndexVec to_index(const Coord& c, std::size_t dims);

struct DimRange {
    int lo = 0;
    int hi = 0;

    int size() const { return hi - lo + 1; }
    bool contains(int v) const { return v >= lo && v <= hi; }
    friend bool operator==(const DimRange&, const DimRange&) = default;
};

/// Integer index ranges and physical scale factors of the state and action
/// lattices.
struct GridSpec {
    std::vector<DimRange> state_ranges;
    std::vector<DimRange> action_ranges;
    std::vector<double> state_scales;
    std::vector<double> action_scales;
    std::vector<std::string> state_labels;
    std::vector<std::string> action_labels;

    /// Throws std::invalid_argument on an empty range, a non-positive scale,
    /// mismatched lengths or more than kMaxDims dimensions.
    void validate() const;
};

/// A successor state: either a grid state (dense id) or the single absorbing
/// out-of-bounds sentinel.
class StateRef {
public:
    static constexpr StateRef in_grid(StateId id) { return StateRef(id); }
    static constexpr StateRef out_of_bounds() { return StateRef(-1); }

    constexpr bool is_out_of_bounds() const { return id_ < 0; }
    constexpr bool in_grid() const { return id_ >= 0; }
    constexpr StateId id() const { return id_; }

    friend constexpr bool operator==(StateRef, StateRef) = default;

private:
    constexpr explicit StateRef(StateId id) : id_(id) {}
    StateId id_;
};

struct ActionRef {
    ActionId id = 0;
    friend constexpr bool operator==(ActionRef, ActionRef) = default;
};

enum class SystemKind { double_integrator, pendulum, unicycle, custom_table };

/// What happens to a successor that leaves the lattice. `violate` maps it to
/// the out-of-bounds sentinel (cost 1); `clip` saturates each coordinate.
enum class BoundaryMode { violate, clip };

enum class PendulumIntegrator { semi_implicit, explicit_euler };

struct PendulumParams {
    double mass = 1.0;
    double length = 1.0;
    double gravity = 9.8;
    double dt = 0.3;
    PendulumIntegrator integrator = PendulumIntegrator::semi_implicit;
};

struct UnicycleParams {
    double velocity = 1.0;
    double dt = 0.2;
    /// Obstacle box in grid-index units over (y, z).
    DimRange obstacle_y{6, 9};
    DimRange obstacle_z{-3, 3};
};

/// Explicit transition table over arbitrary integer index vectors.
struct TransitionTable {
    std::vector<IndexVec> states;
    std::vector<IndexVec> actions;
    /// (state_idx, action_idx, next_state_idx or -1 for out-of-bounds)
    std::vector<std::array<int, 3>> transitions;
    std::vector<int> unsafe_states;
};

/// Finite deterministic system over integer lattices with a binary
/// constraint indicator. Successors are precomputed at construction.
class DiscreteSystem {
public:
    static DiscreteSystem double_integrator();
    static DiscreteSystem pendulum(const PendulumParams& params = {});
    static DiscreteSystem unicycle(const UnicycleParams& params = {},
                                   BoundaryMode boundary = BoundaryMode::clip);
    /// Builds a custom system. States are re-sorted lexicographically.
    /// Throws std::invalid_argument on malformed tables.
    static DiscreteSystem from_table(const TransitionTable& table);
    static DiscreteSystem load_table_json(const std::filesystem::path& path);

    SystemKind kind() const { return kind_; }
    BoundaryMode boundary() const { return boundary_; }
    const GridSpec& grid() const { return grid_; }

    std::size_t num_states() const { return state_coords_.size(); }
    std::size_t num_actions() const { return action_coords_.size(); }
    std::size_t num_pairs() const { return num_states() * num_actions(); }
    std::size_t state_dims() const { return state_dims_; }
    std::size_t action_dims() const { return action_dims_; }

    PairId pair_id(StateId s, ActionId a) const {
        return static_cast<PairId>(s) * static_cast<PairId>(num_actions()) + a;
    }
    StateId pair_state(PairId p) const {
        return static_cast<StateId>(p / static_cast<PairId>(num_actions()));
    }
    ActionId pair_action(PairId p) const {
        return static_cast<ActionId>(p % static_cast<PairId>(num_actions()));
    }

    const Coord& state_coord(StateId s) const { return state_coords_[s]; }
    const Coord& action_coord(ActionId a) const { return action_coords_[a]; }
    IndexVec state_index(StateId s) const { return to_index(state_coords_[s], state_dims_); }
    IndexVec action_index(ActionId a) const { return to_index(action_coords_[a], action_dims_); }

    std::optional<StateId> find_state(const Coord& c) const;
    std::optional<StateId> find_state(std::span<const int> index) const;
    std::optional<ActionId> find_action(std::span<const int> index) const;

    /// True successor of an in-grid pair.
    StateRef step(StateId s, ActionId a) const { return step_[pair_id(s, a)]; }
    StateRef step(PairId p) const { return step_[p]; }

    /// True successor in un-clipped lattice coordinates; empty when the
    /// successor is out of bounds with no known coordinates (custom tables).
    const std::optional<Coord>& successor_point(PairId p) const { return successor_point_[p]; }

    int constraint_cost(StateRef x) const {
        return x.is_out_of_bounds() ? 1 : static_cast<int>(cost_[x.id()]);
    }
    std::span<const std::uint8_t> costs() const { return cost_; }

    const PendulumParams& pendulum_params() const { return pendulum_; }
    const UnicycleParams& unicycle_params() const { return unicycle_; }

private:
    DiscreteSystem() = default;
    void init_lattice();
    void finalize_successors(const std::vector<std::optional<Coord>>& raw);

    SystemKind kind_ = SystemKind::custom_table;
    BoundaryMode boundary_ = BoundaryMode::violate;
    GridSpec grid_;
    std::size_t state_dims_ = 0;
    std::size_t action_dims_ = 0;
    PendulumParams pendulum_;
    UnicycleParams unicycle_;

    std::vector<Coord> state_coords_;
    std::vector<Coord> action_coords_;
    // Dense lookup over the bounding box of the state coordinates.
    std::vector<DimRange> bbox_;
    std::vector<StateId> lookup_;

    std::vector<StateRef> step_;
    std::vector<std::optional<Coord>> successor_point_;
    std::vector<std::uint8_t> cost_;
};

/// Canonical iteration order over the state and action lattices.
struct SpaceEnumeration {
    std::vector<IndexVec> states;
    std::vector<IndexVec> actions;
};

SpaceEnumeration enumerate_space(const DiscreteSystem& system);

/// Projects a physical value onto the lattice: nearest index, ties toward the
/// smaller index.
int project_to_index(double value, double scale);

}  // namespace see
