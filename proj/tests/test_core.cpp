#include <gtest/gtest.h>

#include <cmath>

#include "see/feasible_zone.hpp"
#include "see/system.hpp"
#include "see/uncertain_model.hpp"
#include "support.hpp"

namespace see {
namespace {

using testing::line_toy;
using testing::pair_at;

TEST(System, DoubleIntegratorEnumeration) {
    const auto sys = DiscreteSystem::double_integrator();
    EXPECT_EQ(sys.num_states(), 1271u);
    EXPECT_EQ(sys.num_actions(), 5u);
    EXPECT_EQ(sys.num_pairs(), 6355u);
    const auto e = enumerate_space(sys);
    EXPECT_EQ(e.states.size(), 1271u);
    EXPECT_EQ(e.actions.size(), 5u);
}

TEST(System, PendulumEnumeration) {
    const auto sys = DiscreteSystem::pendulum();
    EXPECT_EQ(sys.num_states(), 441u);
    EXPECT_EQ(sys.num_actions(), 7u);
}

TEST(System, SingleStateTable) {
    TransitionTable t;
    t.states = {{0}};
    t.actions = {{0}};
    t.transitions = {{0, 0, 0}};
    const auto sys = DiscreteSystem::from_table(t);
    const auto e = enumerate_space(sys);
    EXPECT_EQ(e.states.size(), 1u);
    EXPECT_EQ(e.actions.size(), 1u);
}

TEST(System, DoubleIntegratorSteps) {
    const auto sys = DiscreteSystem::double_integrator();
    auto next = [&](IndexVec x, int u) { return sys.step(pair_at(sys, x, {u})); };
    EXPECT_EQ(next({0, 0}, 0), StateRef::in_grid(*sys.find_state(IndexVec{0, 0})));
    EXPECT_EQ(next({1, 2}, -1), StateRef::in_grid(*sys.find_state(IndexVec{3, 1})));
    EXPECT_TRUE(next({20, 15}, 2).is_out_of_bounds());
}

TEST(System, ConstraintIndicator) {
    const auto di = DiscreteSystem::double_integrator();
    for (auto c : di.costs()) EXPECT_EQ(c, 0);
    EXPECT_EQ(di.constraint_cost(StateRef::out_of_bounds()), 1);
    const auto pend = DiscreteSystem::pendulum();
    for (auto c : pend.costs()) EXPECT_EQ(c, 0);
    const auto uni = DiscreteSystem::unicycle();
    for (int h = uni.grid().state_ranges[2].lo; h <= uni.grid().state_ranges[2].hi; ++h)
        EXPECT_EQ(uni.constraint_cost(StateRef::in_grid(*uni.find_state(IndexVec{7, 0, h}))), 1);
}

TEST(System, RejectsMalformedTables) {
    TransitionTable t;
    t.states = {{0}, {1}};
    t.actions = {{0}};
    t.transitions = {{0, 0, 1}};
    EXPECT_THROW(DiscreteSystem::from_table(t), std::invalid_argument);
    t.transitions.push_back({1, 0, 5});
    EXPECT_THROW(DiscreteSystem::from_table(t), std::invalid_argument);
}

TEST(InitialModel, ZeroRadiusIsExact) {
    const auto sys = DiscreteSystem::double_integrator();
    const auto model = build_initial_model(sys, {0.0, 0.0, 0.0, false});
    for (PairId p = 0; p < static_cast<PairId>(sys.num_pairs()); ++p) {
        ASSERT_EQ(model.set(p), true_transition(sys, p));
        ASSERT_EQ(uncertainty_degree(model, p), 0);
    }
}

TEST(InitialModel, InteriorBallHasThirteenCandidates) {
    const auto sys = DiscreteSystem::double_integrator();
    const auto model = build_initial_model(sys, {2.0, 0.0, 0.0, false});
    const PairId p = pair_at(sys, {0, 0}, {0});
    EXPECT_EQ(model.set(p).cardinality(), 13u);
    EXPECT_EQ(uncertainty_degree(model, p), 12);
    EXPECT_TRUE(model.set(p).contains(true_candidate(sys, p)));
}

TEST(InitialModel, KnownRegionCollapsesToTruth) {
    const auto sys = DiscreteSystem::double_integrator();
    const auto model = build_initial_model(sys, {2.0, 2.0, 1.0, true});
    const PairId p = pair_at(sys, {1, 0}, {1});
    ASSERT_EQ(model.set(p).cardinality(), 1u);
    EXPECT_TRUE(model.set(p).contains(*sys.find_state(IndexVec{1, 1})));
    EXPECT_TRUE(model.known(p));
}

TEST(InitialModel, OffGridPointsCountSeparately) {
    const auto sys = DiscreteSystem::double_integrator();
    const auto model = build_initial_model(sys, {2.0, 0.0, 0.0, false});
    const PairId p = pair_at(sys, {20, 15}, {2});
    EXPECT_EQ(model.set(p).vertex_count(), 13u);
    EXPECT_EQ(uncertainty_degree(model, p), 12);
    EXPECT_TRUE(model.set(p).contains_oob());
}

TEST(InitialModel, RejectsNegativeRadius) {
    const auto sys = DiscreteSystem::double_integrator();
    EXPECT_THROW(build_initial_model(sys, {-1.0, 0.0, 0.0, false}), std::invalid_argument);
}

TEST(CollapseKnown, SingletonAfterExploration) {
    const auto sys = DiscreteSystem::double_integrator();
    const auto model = build_initial_model(sys, {2.0, 0.0, 0.0, false});
    const PairId p = pair_at(sys, {0, 0}, {0});
    FeasibleZone zone = FeasibleZone::empty_for(sys);
    zone.insert(p);
    const auto once = collapse_known(model, zone, sys);
    EXPECT_EQ(uncertainty_degree(model, p), 12);
    EXPECT_EQ(uncertainty_degree(once, p), 0);
    EXPECT_TRUE(collapse_known(once, zone, sys).same_sets(once));
    EXPECT_TRUE(collapse_known(model, FeasibleZone::empty_for(sys), sys).same_sets(model));
}

TEST(Calibration, DetectsMissingTruth) {
    const auto sys = DiscreteSystem::double_integrator();
    auto model = build_initial_model(sys, {2.0, 2.0, 1.0, true});
    EXPECT_TRUE(check_well_calibrated(model, sys).calibrated);
    const PairId p = pair_at(sys, {5, 5}, {0});
    ASSERT_TRUE(model.mutable_set(p).erase(true_candidate(sys, p)));
    const auto report = check_well_calibrated(model, sys);
    EXPECT_FALSE(report.calibrated);
    EXPECT_EQ(report.violations, std::vector<PairId>{p});
}

TEST(ModelJson, RoundTrip) {
    const auto sys = DiscreteSystem::double_integrator();
    const auto model = build_initial_model(sys, {2.0, 2.0, 1.0, true});
    const auto back = model_from_json(model_to_json(model, sys), sys);
    EXPECT_TRUE(back.same_sets(model));
}

TEST(Horizon, AllViolatingSystem) {
    TransitionTable t;
    t.states = {{0}, {1}};
    t.actions = {{0}};
    t.transitions = {{0, 0, 1}, {1, 0, 0}};
    t.unsafe_states = {0, 1};
    const auto sys = DiscreteSystem::from_table(t);
    const auto field = horizon_iteration(true_model(sys), sys);
    for (PairId p = 0; p < 2; ++p) {
        EXPECT_EQ(field.at(p), 0u);
        EXPECT_EQ(field.cdf(p, 0.9), 1.0);
    }
    EXPECT_TRUE(extract_zone(field, sys).empty());
}

TEST(Horizon, LineToy) {
    const auto sys = line_toy();
    const auto field = horizon_iteration(true_model(sys), sys);
    EXPECT_EQ(field.at(pair_at(sys, {1}, {1})), 1u);
    EXPECT_TRUE(field.is_infinite(pair_at(sys, {0}, {0})));
    const auto zone = extract_zone(field, sys);
    EXPECT_EQ(zone.size(), 7u);
    for (int x = -1; x <= 1; ++x)
        for (int u = -1; u <= 1; ++u)
            EXPECT_EQ(zone.contains(pair_at(sys, {x}, {u})), std::abs(x + u) <= 1);
    EXPECT_EQ(maximum_feasible_zone(true_model(sys), sys), zone);
}

TEST(Horizon, OutOfBoundsCandidateGivesOne) {
    const auto sys = DiscreteSystem::double_integrator();
    const auto model = build_initial_model(sys, {2.0, 0.0, 0.0, false});
    const auto field = horizon_iteration(model, sys);
    for (PairId p = 0; p < static_cast<PairId>(sys.num_pairs()); ++p)
        if (model.set(p).contains_oob()) ASSERT_EQ(field.at(p), 1u);
}

TEST(Horizon, FiniteValuesAreBounded) {
    const auto sys = DiscreteSystem::pendulum();
    const auto model = build_initial_model(sys, {3.0, 3.0, 2.0, true});
    const auto field = horizon_iteration(model, sys);
    for (PairId p = 0; p < static_cast<PairId>(sys.num_pairs()); ++p)
        if (!field.is_infinite(p)) ASSERT_LE(field.at(p), sys.num_states() + 1);
    EXPECT_EQ(field, horizon_iteration_sweeps(model, sys));
    EXPECT_EQ(bellman_update(field, model, sys), field);
}

TEST(Zone, DoubleIntegratorEdgeActions) {
    const auto sys = DiscreteSystem::double_integrator();
    const auto zone = true_model_baseline(sys);
    // Full braking from (20,-15) moves x1 by -15-13-...-1 = -64, so no action
    // keeps that corner inside [-20,20].
    EXPECT_FALSE(zone.state_in_projection(*sys.find_state(IndexVec{20, -15})));
    // The lowest region state on the x1 = 20 edge can only brake.
    const StateId edge = *sys.find_state(IndexVec{20, -11});
    ASSERT_TRUE(zone.state_in_projection(edge));
    const auto actions = feasible_actions(zone, StateRef::in_grid(edge));
    ASSERT_EQ(actions.size(), 1u);
    EXPECT_EQ(sys.action_index(actions[0].id), IndexVec{2});
    EXPECT_FALSE(zone.state_in_projection(*sys.find_state(IndexVec{20, -12})));
    EXPECT_EQ(feasible_actions(zone, StateRef::in_grid(*sys.find_state(IndexVec{0, 0}))).size(), 5u);
    EXPECT_TRUE(feasible_actions(zone, StateRef::out_of_bounds()).empty());
    EXPECT_TRUE(check_feasible_zone(zone, true_model(sys), sys).ok());
}

TEST(Zone, InfeasibleStateHasNoActions) {
    const auto sys = DiscreteSystem::double_integrator();
    const auto zone = true_model_baseline(sys);
    const StateId s = *sys.find_state(IndexVec{20, 15});
    EXPECT_FALSE(zone.state_in_projection(s));
    EXPECT_TRUE(feasible_actions(zone, StateRef::in_grid(s)).empty());
}

TEST(Zone, CheckFlagsEscapingCandidate) {
    const auto sys = line_toy();
    auto zone = true_model_baseline(sys);
    zone.insert(pair_at(sys, {1}, {1}));
    const auto check = check_feasible_zone(zone, true_model(sys), sys);
    EXPECT_FALSE(check.invariance_ok);
    EXPECT_EQ(check.offending, std::vector<PairId>{pair_at(sys, {1}, {1})});
}

TEST(Recall, Basics) {
    const auto sys = line_toy();
    const auto base = true_model_baseline(sys);
    EXPECT_DOUBLE_EQ(recall_metric(base, base), 100.0);
    EXPECT_DOUBLE_EQ(recall_metric(FeasibleZone::empty_for(sys), base), 0.0);
    EXPECT_THROW(recall_metric(base, FeasibleZone::empty_for(sys)), std::domain_error);
}

}  // namespace
}  // namespace see
