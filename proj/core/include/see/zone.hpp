#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "see/system.hpp"

namespace see {

/// Boolean mask over state-action pairs together with its projection onto
/// states (the feasible region).
class FeasibleZone {
public:
    FeasibleZone() = default;
    FeasibleZone(std::size_t num_states, std::size_t num_actions);
    static FeasibleZone empty_for(const DiscreteSystem& system) {
        return FeasibleZone(system.num_states(), system.num_actions());
    }
    /// Throws std::invalid_argument when the mask length is not S*A.
    static FeasibleZone from_mask(std::size_t num_states, std::size_t num_actions,
                                  std::vector<std::uint8_t> mask);

    bool contains(PairId p) const { return mask_[p] != 0; }
    void insert(PairId p);
    void erase(PairId p);

    bool state_in_projection(StateId s) const { return state_count_[s] > 0; }
    /// Number of feasible actions at a state.
    std::size_t actions_at_count(StateId s) const { return state_count_[s]; }
    std::vector<ActionId> actions_at(StateId s) const;

    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }
    std::size_t projection_size() const;
    std::size_t num_pairs() const { return mask_.size(); }
    std::size_t num_states() const { return num_states_; }
    std::size_t num_actions() const { return num_actions_; }
    std::span<const std::uint8_t> mask() const { return mask_; }

    bool subset_of(const FeasibleZone& other) const;
    friend bool operator==(const FeasibleZone& a, const FeasibleZone& b) {
        return a.num_states_ == b.num_states_ && a.num_actions_ == b.num_actions_ && a.mask_ == b.mask_;
    }

private:
    std::size_t num_states_ = 0;
    std::size_t num_actions_ = 0;
    std::size_t size_ = 0;
    std::vector<std::uint8_t> mask_;
    std::vector<std::uint32_t> state_count_;
};

}  // namespace see
