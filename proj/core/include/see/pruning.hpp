#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "see/system.hpp"
#include "see/uncertain_model.hpp"
#include "see/zone.hpp"

namespace see {

/// Lipschitz constants used by the adjacency predicate. Distances are
/// Euclidean over integer index coordinates. When both `Lx` and `Lu` are set
/// the additive bound Lx*d(x1,x2) + Lu*d(u1,u2) must hold as well as the joint
/// bound L*d((x1,u1),(x2,u2)).
struct LipschitzSpec {
    double L = 1.0;
    std::optional<double> Lx;
    std::optional<double> Lu;

    bool separate() const { return Lx.has_value() && Lu.has_value(); }
    /// Throws std::invalid_argument on L <= 0, Lx <= 0, Lu < 0 or when only
    /// one of Lx / Lu is given.
    void validate() const;
};

/// Largest squared successor distance two pairs at squared state distance
/// `dx2` and squared action distance `du2` may have while staying adjacent.
double adjacency_bound_sq(long long dx2, long long du2, const LipschitzSpec& spec);

/// A candidate transition (x, u, x'). An empty `next` is the coordinate-less
/// out-of-bounds successor.
struct Vertex {
    IndexVec x;
    IndexVec u;
    std::optional<IndexVec> next;
};

bool lipschitz_adjacent(const Vertex& v1, const Vertex& v2, const LipschitzSpec& spec);

/// Pruning would empty a transition set: the model was not well-calibrated or
/// L is below the true Lipschitz constant.
class CalibrationBreach : public std::runtime_error {
public:
    CalibrationBreach(PairId pair, const std::string& what) : std::runtime_error(what), pair_(pair) {}
    PairId pair() const { return pair_; }

private:
    PairId pair_;
};

struct RemovalRecord {
    std::size_t sweep = 0;
    PairId pair = 0;
    Candidate candidate;
    PairId witness = 0;
};

/// Which pairs may witness a removal. `zone` restricts witnesses to explored
/// pairs, whose sets are the observed truth; `all` also lets unexplored pairs
/// witness through their whole candidate sets.
enum class WitnessScope { zone, all };

struct PruneOptions {
    unsigned threads = 1;
    WitnessScope witnesses = WitnessScope::zone;
    /// Tabulate the adjacency bound by (dx2, du2) instead of recomputing it.
    bool distance_cache = true;
    std::function<void(const RemovalRecord&)> audit;
};

struct PruneStats {
    std::size_t sweeps = 0;
    std::size_t removed = 0;
    std::size_t full_checks = 0;
    std::size_t incremental_checks = 0;
};

/// Second-kind pruning by the "neighbours of every colour" test.
///
/// Each sweep collects every candidate x1' of every pair outside the zone for
/// which some other pair (x2,u2) in the witness scope has no member within the
/// adjacency bound, removes them together, and repeats until a sweep removes
/// nothing.
///
/// The pruner remembers which pairs were fully checked against its previous
/// output. A later call on a sub-model of that output only re-tests those
/// pairs against the pairs whose sets changed, which yields the same result
/// as a full sweep because sets only shrink and zones only grow.
class Pruner {
public:
    Pruner(const DiscreteSystem& system, LipschitzSpec spec, PruneOptions options = {});

    UncertainModel prune(const UncertainModel& model, const FeasibleZone& zone);
    const PruneStats& last_stats() const { return stats_; }
    void reset();

private:
    struct Geometry;
    double bound(PairId p1, PairId p2) const;

    const DiscreteSystem* system_;
    LipschitzSpec spec_;
    PruneOptions options_;
    std::vector<double> bound_table_;
    std::size_t table_du_stride_ = 0;
    long long table_dx_max_ = -1;
    long long table_du_max_ = -1;

    std::optional<UncertainModel> last_output_;
    FeasibleZone last_zone_;
    std::vector<std::uint8_t> verified_;
    PruneStats stats_;
};

/// One-shot convenience wrapper around Pruner.
UncertainModel prune_second_kind(const UncertainModel& model, const FeasibleZone& zone,
                                 const DiscreteSystem& system, const LipschitzSpec& spec,
                                 const PruneOptions& options = {});

struct OracleLimits {
    std::size_t max_pairs = 10;
    std::size_t max_candidates = 4;
};

class InstanceTooLarge : public std::length_error {
public:
    using std::length_error::length_error;
};

/// True iff no choice of one candidate per pair that includes `candidate` at
/// `pair` is pairwise adjacent, i.e. the vertex lies in no clique spanning
/// every colour. Exhaustive; throws InstanceTooLarge above `limits`.
bool exact_removable(const UncertainModel& model, const DiscreteSystem& system, PairId pair,
                     const Candidate& candidate, const LipschitzSpec& spec, const OracleLimits& limits = {});

/// Removes every exactly-removable candidate of the pairs outside `zone`.
UncertainModel exact_prune(const UncertainModel& model, const FeasibleZone& zone,
                           const DiscreteSystem& system, const LipschitzSpec& spec,
                           const OracleLimits& limits = {});

/// Largest ratio d(f(p1), f(p2)) / d(p1, p2) over pairs whose true successors
/// carry coordinates.
double measured_lipschitz(const DiscreteSystem& system);

}  // namespace see
