#include "see/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

namespace see {

void LipschitzSpec::validate() const {
    if (!(L > 0) || !std::isfinite(L)) throw std::invalid_argument("Lipschitz constant L must be positive");
    if (Lx.has_value() != Lu.has_value())
        throw std::invalid_argument("Lx and Lu must be given together");
    if (Lx && (!(*Lx > 0) || !std::isfinite(*Lx))) throw std::invalid_argument("Lx must be positive");
    if (Lu && (!(*Lu >= 0) || !std::isfinite(*Lu))) throw std::invalid_argument("Lu must be non-negative");
}

double adjacency_bound_sq(long long dx2, long long du2, const LipschitzSpec& spec) {
    const double joint = spec.L * spec.L * static_cast<double>(dx2 + du2);
    if (!spec.separate()) return joint;
    const double additive = *spec.Lx * std::sqrt(static_cast<double>(dx2)) +
                            *spec.Lu * std::sqrt(static_cast<double>(du2));
    return std::min(joint, additive * additive);
}

bool lipschitz_adjacent(const Vertex& v1, const Vertex& v2, const LipschitzSpec& spec) {
    if (v1.x == v2.x && v1.u == v2.u) return false;
    if (!v1.next || !v2.next) return true;
    const long long dx2 = squared_distance(to_coord(v1.x), to_coord(v2.x));
    const long long du2 = squared_distance(to_coord(v1.u), to_coord(v2.u));
    const long long dn2 = squared_distance(to_coord(*v1.next), to_coord(*v2.next));
    return static_cast<double>(dn2) <= adjacency_bound_sq(dx2, du2, spec);
}

namespace {

std::string describe_pair(const DiscreteSystem& system, PairId p) {
    std::ostringstream os;
    auto put = [&](const IndexVec& v) {
        os << '(';
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
        os << ')';
    };
    os << "x=";
    put(system.state_index(system.pair_state(p)));
    os << " u=";
    put(system.action_index(system.pair_action(p)));
    return os.str();
}

Candidate candidate_at(const TransitionSet& set, const DiscreteSystem& system, std::size_t i) {
    if (i < set.states.size()) return Candidate::grid_state(set.states[i], system.state_coord(set.states[i]));
    return Candidate::exterior_point(set.exterior[i - set.states.size()]);
}

}  // namespace

struct Pruner::Geometry {
    std::vector<std::vector<Coord>> points;
    std::vector<std::uint8_t> sentinel;
    std::vector<Coord> anchor;
    std::vector<double> radius;

    explicit Geometry(std::size_t n) : points(n), sentinel(n, 0), anchor(n), radius(n, 0.0) {}

    void rebuild(PairId p, const TransitionSet& set, const DiscreteSystem& system) {
        auto& pts = points[p];
        pts.clear();
        for (StateId s : set.states) pts.push_back(system.state_coord(s));
        pts.insert(pts.end(), set.exterior.begin(), set.exterior.end());
        sentinel[p] = set.sentinel ? 1 : 0;
        if (pts.empty()) return;
        // Anchor at the member minimising the largest distance to the rest.
        long long best = -1;
        std::size_t best_i = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            long long far = 0;
            for (const Coord& q : pts) far = std::max(far, squared_distance(pts[i], q));
            if (best < 0 || far < best) best = far, best_i = i;
        }
        anchor[p] = pts[best_i];
        radius[p] = std::sqrt(static_cast<double>(best));
    }
};

Pruner::Pruner(const DiscreteSystem& system, LipschitzSpec spec, PruneOptions options)
    : system_(&system), spec_(spec), options_(std::move(options)) {
    spec_.validate();
    if (options_.threads == 0) options_.threads = 1;
    if (!options_.distance_cache) return;
    const auto& g = system.grid();
    long long dx_max = 0, du_max = 0;
    for (const auto& r : g.state_ranges) dx_max += static_cast<long long>(r.size() - 1) * (r.size() - 1);
    for (const auto& r : g.action_ranges) du_max += static_cast<long long>(r.size() - 1) * (r.size() - 1);
    const long long entries = (dx_max + 1) * (du_max + 1);
    if (entries > (1LL << 22)) return;
    table_dx_max_ = dx_max;
    table_du_max_ = du_max;
    table_du_stride_ = static_cast<std::size_t>(du_max + 1);
    bound_table_.resize(static_cast<std::size_t>(entries));
    for (long long dx2 = 0; dx2 <= dx_max; ++dx2)
        for (long long du2 = 0; du2 <= du_max; ++du2)
            bound_table_[static_cast<std::size_t>(dx2) * table_du_stride_ + static_cast<std::size_t>(du2)] =
                adjacency_bound_sq(dx2, du2, spec_);
}

void Pruner::reset() {
    last_output_.reset();
    last_zone_ = FeasibleZone();
    verified_.clear();
}

double Pruner::bound(PairId p1, PairId p2) const {
    const auto& sys = *system_;
    const long long dx2 = squared_distance(sys.state_coord(sys.pair_state(p1)), sys.state_coord(sys.pair_state(p2)));
    const long long du2 =
        squared_distance(sys.action_coord(sys.pair_action(p1)), sys.action_coord(sys.pair_action(p2)));
    if (!bound_table_.empty() && dx2 <= table_dx_max_ && du2 <= table_du_max_)
        return bound_table_[static_cast<std::size_t>(dx2) * table_du_stride_ + static_cast<std::size_t>(du2)];
    return adjacency_bound_sq(dx2, du2, spec_);
}

UncertainModel Pruner::prune(const UncertainModel& model, const FeasibleZone& zone) {
    const DiscreteSystem& sys = *system_;
    const std::size_t np = sys.num_pairs();
    if (model.num_pairs() != np || zone.num_pairs() != np)
        throw std::invalid_argument("model or zone does not match the system");

    stats_ = {};
    UncertainModel work = model;
    Geometry geo(np);
    for (PairId p = 0; p < static_cast<PairId>(np); ++p) geo.rebuild(p, work.set(p), sys);

    // Pairs whose sets differ from the previous output; everything else was
    // already tested against identical sets.
    // With zone witnesses a pair that just entered the zone is a new witness
    // even when its set is unchanged.
    const bool zone_witnesses = options_.witnesses == WitnessScope::zone;
    std::vector<PairId> changed;
    const bool resume = last_output_ && last_output_->num_pairs() == np && work.subset_of(*last_output_) &&
                        (!zone_witnesses || last_zone_.subset_of(zone));
    if (resume) {
        for (PairId p = 0; p < static_cast<PairId>(np); ++p)
            if (!(work.set(p) == last_output_->set(p)) || (zone_witnesses && zone.contains(p) != last_zone_.contains(p)))
                changed.push_back(p);
    } else {
        verified_.assign(np, 0);
    }

    std::vector<PairId> outer;
    for (PairId p = 0; p < static_cast<PairId>(np); ++p) {
        if (zone.contains(p)) {
            verified_[p] = 0;
            continue;
        }
        if (!geo.points[p].empty()) outer.push_back(p);
    }

    struct Removal {
        PairId pair;
        std::uint32_t index;
        PairId witness;
    };

    auto check_pair = [&](PairId p1, std::vector<Removal>& out, std::size_t& full, std::size_t& incr) {
        const auto& pts1 = geo.points[p1];
        std::vector<std::uint8_t> dead(pts1.size(), 0);
        std::size_t dead_count = 0;
        const Coord& anchor1 = geo.anchor[p1];
        const double radius1 = geo.radius[p1];

        auto test = [&](PairId p2) {
            if (p2 == p1 || geo.sentinel[p2]) return;
            if (zone_witnesses && !zone.contains(p2)) return;
            const auto& pts2 = geo.points[p2];
            if (pts2.empty()) return;
            const double b = bound(p1, p2);
            const Coord& anchor2 = geo.anchor[p2];
            // Every candidate of p1 lies within radius1 of anchor1, so none
            // can be farther than this from anchor2.
            const double reach = radius1 + std::sqrt(static_cast<double>(squared_distance(anchor1, anchor2)));
            if (reach * reach * (1.0 + 1e-12) + 1e-9 < b) return;
            for (std::size_t i = 0; i < pts1.size(); ++i) {
                if (dead[i]) continue;
                const Coord& c = pts1[i];
                if (static_cast<double>(squared_distance(c, anchor2)) <= b) continue;
                bool near = false;
                for (const Coord& m : pts2) {
                    if (static_cast<double>(squared_distance(c, m)) <= b) {
                        near = true;
                        break;
                    }
                }
                if (near) continue;
                dead[i] = 1;
                ++dead_count;
                out.push_back({p1, static_cast<std::uint32_t>(i), p2});
            }
        };

        if (verified_[p1]) {
            ++incr;
            for (PairId p2 : changed) {
                test(p2);
                if (dead_count == pts1.size()) break;
            }
        } else {
            ++full;
            for (PairId p2 = 0; p2 < static_cast<PairId>(np); ++p2) {
                test(p2);
                if (dead_count == pts1.size()) break;
            }
        }
        // Removals per pair must come out in candidate order.
        std::sort(out.end() - static_cast<std::ptrdiff_t>(dead_count), out.end(),
                  [](const Removal& a, const Removal& b) { return a.index < b.index; });
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(options_.threads,
                                                             static_cast<unsigned>(std::max<std::size_t>(outer.size(), 1))));
    for (std::size_t sweep = 1;; ++sweep) {
        stats_.sweeps = sweep;
        std::vector<std::vector<Removal>> parts(threads);
        std::vector<std::size_t> full(threads, 0), incr(threads, 0);
        auto run_chunk = [&](unsigned t) {
            const std::size_t lo = outer.size() * t / threads, hi = outer.size() * (t + 1) / threads;
            for (std::size_t i = lo; i < hi; ++i) check_pair(outer[i], parts[t], full[t], incr[t]);
        };
        if (threads == 1) {
            run_chunk(0);
        } else {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < threads; ++t) pool.emplace_back(run_chunk, t);
            for (auto& th : pool) th.join();
        }
        for (unsigned t = 0; t < threads; ++t) {
            stats_.full_checks += full[t];
            stats_.incremental_checks += incr[t];
        }
        for (PairId p : outer) verified_[p] = 1;

        std::vector<Removal> removals;
        for (auto& part : parts) removals.insert(removals.end(), part.begin(), part.end());
        if (removals.empty()) break;

        // Resolve candidates before mutating any set.
        std::vector<Candidate> resolved;
        resolved.reserve(removals.size());
        for (const auto& r : removals) resolved.push_back(candidate_at(work.set(r.pair), sys, r.index));
        changed.clear();
        for (std::size_t i = 0; i < removals.size(); ++i) {
            const auto& r = removals[i];
            work.mutable_set(r.pair).erase(resolved[i]);
            if (changed.empty() || changed.back() != r.pair) changed.push_back(r.pair);
            if (options_.audit) options_.audit(RemovalRecord{sweep, r.pair, resolved[i], r.witness});
        }
        stats_.removed += removals.size();
        for (PairId p : changed) {
            if (work.set(p).empty())
                throw CalibrationBreach(p, "pruning emptied the transition set of " + describe_pair(sys, p) +
                                               "; the model is not well-calibrated or L is too small");
            geo.rebuild(p, work.set(p), sys);
        }
    }

    last_output_ = work;
    last_zone_ = zone;
    return work;
}

UncertainModel prune_second_kind(const UncertainModel& model, const FeasibleZone& zone,
                                 const DiscreteSystem& system, const LipschitzSpec& spec,
                                 const PruneOptions& options) {
    Pruner pruner(system, spec, options);
    return pruner.prune(model, zone);
}

namespace {

struct OracleInstance {
    const DiscreteSystem& system;
    const LipschitzSpec& spec;
    std::vector<std::vector<Candidate>> cands;

    bool adjacent(PairId p1, const Candidate& c1, PairId p2, const Candidate& c2) const {
        if (!c1.has_coordinates() || !c2.has_coordinates()) return true;
        const long long dx2 =
            squared_distance(system.state_coord(system.pair_state(p1)), system.state_coord(system.pair_state(p2)));
        const long long du2 = squared_distance(system.action_coord(system.pair_action(p1)),
                                               system.action_coord(system.pair_action(p2)));
        return static_cast<double>(squared_distance(c1.point, c2.point)) <= adjacency_bound_sq(dx2, du2, spec);
    }

    bool extend(std::vector<const Candidate*>& chosen, PairId p, PairId fixed_pair, const Candidate& fixed) const {
        if (static_cast<std::size_t>(p) == cands.size()) return true;
        auto consistent = [&](const Candidate& c) {
            for (PairId q = 0; q < p; ++q)
                if (!adjacent(q, *chosen[q], p, c)) return false;
            return true;
        };
        if (p == fixed_pair) {
            if (!consistent(fixed)) return false;
            chosen[p] = &fixed;
            return extend(chosen, p + 1, fixed_pair, fixed);
        }
        for (const Candidate& c : cands[p]) {
            if (!consistent(c)) continue;
            chosen[p] = &c;
            if (extend(chosen, p + 1, fixed_pair, fixed)) return true;
        }
        return false;
    }
};

void check_limits(const UncertainModel& model, const OracleLimits& limits) {
    if (model.num_pairs() > limits.max_pairs)
        throw InstanceTooLarge("exact removability oracle limited to " + std::to_string(limits.max_pairs) +
                               " state-action pairs");
    for (PairId p = 0; p < static_cast<PairId>(model.num_pairs()); ++p)
        if (model.set(p).vertex_count() > limits.max_candidates)
            throw InstanceTooLarge("exact removability oracle limited to " + std::to_string(limits.max_candidates) +
                                   " candidates per pair");
}

}  // namespace

bool exact_removable(const UncertainModel& model, const DiscreteSystem& system, PairId pair,
                     const Candidate& candidate, const LipschitzSpec& spec, const OracleLimits& limits) {
    spec.validate();
    check_limits(model, limits);
    if (pair < 0 || static_cast<std::size_t>(pair) >= model.num_pairs() || !model.set(pair).contains(candidate))
        throw std::invalid_argument("vertex is not part of the model");
    OracleInstance inst{system, spec, {}};
    for (PairId p = 0; p < static_cast<PairId>(model.num_pairs()); ++p)
        inst.cands.push_back(model.set(p).candidates(system));
    std::vector<const Candidate*> chosen(model.num_pairs(), nullptr);
    return !inst.extend(chosen, 0, pair, candidate);
}

UncertainModel exact_prune(const UncertainModel& model, const FeasibleZone& zone, const DiscreteSystem& system,
                           const LipschitzSpec& spec, const OracleLimits& limits) {
    check_limits(model, limits);
    UncertainModel out = model;
    for (PairId p = 0; p < static_cast<PairId>(model.num_pairs()); ++p) {
        if (zone.contains(p)) continue;
        for (const Candidate& c : model.set(p).candidates(system))
            if (exact_removable(model, system, p, c, spec, limits)) out.mutable_set(p).erase(c);
        if (out.set(p).empty())
            throw CalibrationBreach(p, "exact pruning emptied the transition set of " + describe_pair(system, p));
    }
    return out;
}

double measured_lipschitz(const DiscreteSystem& system) {
    const auto np = static_cast<PairId>(system.num_pairs());
    double best = 0.0;
    for (PairId p1 = 0; p1 < np; ++p1) {
        const auto& f1 = system.successor_point(p1);
        if (!f1) continue;
        const Coord& x1 = system.state_coord(system.pair_state(p1));
        const Coord& u1 = system.action_coord(system.pair_action(p1));
        for (PairId p2 = p1 + 1; p2 < np; ++p2) {
            const auto& f2 = system.successor_point(p2);
            if (!f2) continue;
            const long long d2 = squared_distance(x1, system.state_coord(system.pair_state(p2))) +
                                 squared_distance(u1, system.action_coord(system.pair_action(p2)));
            const long long n2 = squared_distance(*f1, *f2);
            if (n2 == 0) continue;
            best = std::max(best, std::sqrt(static_cast<double>(n2) / static_cast<double>(d2)));
        }
    }
    return best;
}

}  // namespace see
