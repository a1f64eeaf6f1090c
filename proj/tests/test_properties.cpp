// Randomised checks against brute-force oracles.
#include <gtest/gtest.h>

#include <random>

#include "see/feasible_zone.hpp"
#include "see/pruning.hpp"
#include "see/see_driver.hpp"
#include "support.hpp"

namespace see {
namespace {

using testing::backward_elimination;
using testing::random_instance;

constexpr int kInstances = 150;

TEST(Oracle, ZoneMatchesBackwardElimination) {
    std::mt19937 rng(11);
    for (int i = 0; i < kInstances; ++i) {
        const auto inst = random_instance(rng, 8, 3, 4);
        const auto field = horizon_iteration(inst.model, inst.system);
        const auto zone = extract_zone(field, inst.system);
        ASSERT_EQ(zone, backward_elimination(inst.model, inst.system)) << "instance " << i;
        ASSERT_EQ(field, horizon_iteration_sweeps(inst.model, inst.system)) << "instance " << i;
        ASSERT_TRUE(check_feasible_zone(zone, inst.model, inst.system).ok());
        // N* = 0 exactly at violating states.
        for (PairId p = 0; p < static_cast<PairId>(inst.system.num_pairs()); ++p)
            ASSERT_EQ(field.at(p) == 0, inst.system.costs()[inst.system.pair_state(p)] == 1);
    }
}

TEST(Oracle, CdfSatisfiesBellmanAndIgnoresGamma) {
    std::mt19937 rng(12);
    for (int i = 0; i < kInstances; ++i) {
        const auto inst = random_instance(rng, 8, 3, 4);
        const auto& sys = inst.system;
        const auto field = horizon_iteration(inst.model, sys);
        const auto zone = extract_zone(field, sys);
        for (double gamma : {0.5, 0.9, 0.99}) {
            const auto cdf = cdf_iteration(inst.model, sys, gamma);
            ASSERT_EQ(zone_from_cdf(cdf, sys), zone) << "instance " << i << " gamma " << gamma;
            for (PairId p = 0; p < static_cast<PairId>(sys.num_pairs()); ++p) {
                const double g = field.cdf(p, gamma);
                ASSERT_NEAR(cdf[p], g, 1e-9);
                // Risky Bellman equation at p.
                const double c = sys.costs()[sys.pair_state(p)];
                double worst = inst.model.set(p).contains_oob() ? 1.0 : 0.0;
                for (StateId s : inst.model.set(p).states) {
                    double best = 1.0;
                    for (ActionId a = 0; a < static_cast<ActionId>(sys.num_actions()); ++a)
                        best = std::min(best, field.cdf(sys.pair_id(s, a), gamma));
                    worst = std::max(worst, best);
                }
                ASSERT_NEAR(g, c + (1 - c) * gamma * worst, 1e-12);
            }
        }
    }
}

TEST(Oracle, SweepRemovalsAreExactlyRemovable) {
    std::mt19937 rng(13);
    for (const auto scope : {WitnessScope::zone, WitnessScope::all}) {
        for (int i = 0; i < kInstances; ++i) {
            auto inst = random_instance(rng, 8, 3, 4);
            const auto& sys = inst.system;
            if (sys.num_pairs() > 10) continue;
            const LipschitzSpec spec{std::uniform_real_distribution<double>(0.5, 3.0)(rng), {}, {}};
            const auto zone = extract_zone(horizon_iteration(inst.model, sys), sys);
            const auto model = collapse_known(inst.model, zone, sys);
            PruneOptions opts;
            opts.witnesses = scope;
            UncertainModel swept;
            try {
                swept = prune_second_kind(model, zone, sys, spec, opts);
            } catch (const CalibrationBreach&) {
                // A breach means every candidate of some pair lies in no clique.
                continue;
            }
            for (PairId p = 0; p < static_cast<PairId>(sys.num_pairs()); ++p)
                for (const auto& c : model.set(p).candidates(sys))
                    if (!swept.set(p).contains(c))
                        ASSERT_TRUE(exact_removable(model, sys, p, c, spec)) << "instance " << i;
            // Every exact survivor also survives the sweep.
            try {
                ASSERT_TRUE(exact_prune(model, zone, sys, spec).subset_of(swept)) << "instance " << i;
            } catch (const CalibrationBreach&) {
            }
        }
    }
}

TEST(Oracle, TruthSurvivesWithSufficientConstant) {
    std::mt19937 rng(14);
    int checked = 0;
    for (int i = 0; i < kInstances; ++i) {
        auto inst = random_instance(rng, 8, 3, 4);
        const auto& sys = inst.system;
        const double lf = measured_lipschitz(sys);
        if (lf == 0.0) continue;
        const LipschitzSpec spec{lf * (1 + 1e-9), {}, {}};
        const auto zone = extract_zone(horizon_iteration(inst.model, sys), sys);
        const auto model = collapse_known(inst.model, zone, sys);
        for (const auto scope : {WitnessScope::zone, WitnessScope::all}) {
            PruneOptions opts;
            opts.witnesses = scope;
            const auto out = prune_second_kind(model, zone, sys, spec, opts);
            ASSERT_TRUE(check_well_calibrated(out, sys).calibrated) << "instance " << i;
        }
        if (sys.num_pairs() <= 10) {
            for (PairId p = 0; p < static_cast<PairId>(sys.num_pairs()); ++p)
                ASSERT_FALSE(exact_removable(model, sys, p, true_candidate(sys, p), spec));
        }
        ++checked;
    }
    EXPECT_GE(checked, 100);
}

TEST(Oracle, RunInvariantsOnRandomSystems) {
    std::mt19937 rng(15);
    for (int i = 0; i < kInstances; ++i) {
        auto inst = random_instance(rng, 8, 3, 1);
        const auto& sys = inst.system;
        RunOptions o;
        o.initial = {std::uniform_int_distribution<int>(0, 2)(rng) * 1.0, 0.0, 0.0, false};
        o.lipschitz = {std::max(measured_lipschitz(sys), 0.1) * (1 + 1e-9), {}, {}};
        const auto r = run_see(sys, o);
        ASSERT_TRUE(r.invariants.ok()) << "instance " << i;
        // The explored zone never leaves the true-model maximum zone.
        ASSERT_TRUE(r.zone.subset_of(r.baseline)) << "instance " << i;
        if (r.status == RunStatus::equilibrium) {
            // One more pass changes nothing.
            const auto zone = extract_zone(horizon_iteration(r.model, sys), sys);
            ASSERT_EQ(zone, r.zone);
            ASSERT_TRUE(prune_second_kind(collapse_known(r.model, zone, sys), zone, sys, o.lipschitz)
                            .same_sets(r.model));
        }
    }
}

TEST(Oracle, ExactMethodReachesAtLeastTheSweepZone) {
    std::mt19937 rng(16);
    int compared = 0;
    for (int i = 0; i < kInstances && compared < 60; ++i) {
        auto inst = random_instance(rng, 5, 2, 1);
        const auto& sys = inst.system;
        if (sys.num_pairs() > 10) continue;
        RunOptions o;
        o.initial = {1.0, 0.0, 0.0, false};
        o.oracle = {10, 6};
        o.lipschitz = {std::max(measured_lipschitz(sys), 0.1) * (1 + 1e-9), {}, {}};
        const auto swept = run_see(sys, o);
        o.method = PruneMethod::exact;
        const auto exact = run_see(sys, o);
        ASSERT_TRUE(exact.invariants.ok());
        ASSERT_TRUE(swept.zone.subset_of(exact.zone)) << "instance " << i;
        ASSERT_TRUE(exact.zone.subset_of(exact.baseline));
        ++compared;
    }
    EXPECT_GT(compared, 20);
}

TEST(Property, ThreadCountDoesNotChangeResults) {
    const auto sys = DiscreteSystem::pendulum();
    RunOptions o;
    o.initial = {3.0, 3.0, 2.0, true};
    o.lipschitz = {7.815, {}, {}};
    o.threads = 1;
    const auto one = run_see(sys, o);
    o.threads = 8;
    const auto eight = run_see(sys, o);
    o.distance_cache = false;
    const auto uncached = run_see(sys, o);
    EXPECT_EQ(one.zone, eight.zone);
    EXPECT_TRUE(one.model.same_sets(eight.model));
    EXPECT_EQ(one.passes, eight.passes);
    EXPECT_EQ(one.zone, uncached.zone);
    EXPECT_TRUE(one.model.same_sets(uncached.model));
}

TEST(Property, GammaIndependenceOnDoubleIntegrator) {
    const auto sys = DiscreteSystem::double_integrator();
    const auto model = build_initial_model(sys, {2.0, 2.0, 1.0, true});
    const auto zone = extract_zone(horizon_iteration(model, sys), sys);
    for (double gamma : {0.5, 0.9, 0.99})
        EXPECT_EQ(zone_from_cdf(cdf_iteration(model, sys, gamma), sys), zone) << gamma;
}

}  // namespace
}  // namespace see
