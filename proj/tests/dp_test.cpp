#include <gtest/gtest.h>

#include <cmath>

#include "tabrl/dp.hpp"
#include "tabrl/environments.hpp"
#include "test_util.hpp"

using namespace tabrl;

namespace {

TabularPolicy half_half_2x2(const EnvSpec& env) {
    return TabularPolicy::uniform_over(env.model);
}

// --- analytic policy evaluation ---

TEST(AnalyticEvalTest, Grid2x2HalfHalfPolicy) {
    EnvSpec env = make_env("grid2x2");
    ValueTable v = analytic_policy_evaluation(env.model, half_half_2x2(env), 1.0);
    double expected[] = {0.0, 1.0, 1.0, 0.0};
    for (int s = 0; s < 4; ++s) EXPECT_NEAR(v[s], expected[s], 1e-9);
}

TEST(AnalyticEvalTest, Grid1d9ImprovedPolicyHitsOptimalValues) {
    EnvSpec env = make_env("grid1d9");
    ValueTable v =
        analytic_policy_evaluation(env.model, improved_policy(env), 1.0);
    double expected[] = {2, 3, 4, 5, 0, 5, 4, 3, 2};
    for (int s = 0; s < 9; ++s) EXPECT_NEAR(v[s], expected[s], 1e-9);
}

TEST(AnalyticEvalTest, ZeroRewardsGiveZeroValues) {
    EnvSpec env = make_env("grid2x2",
                           {{"terminal_reward", 0.0}, {"step_reward", 0.0}});
    ValueTable v = analytic_policy_evaluation(env.model, half_half_2x2(env), 1.0);
    for (int s = 0; s < v.size(); ++s) EXPECT_DOUBLE_EQ(v[s], 0.0);
}

TEST(AnalyticEvalTest, ImproperPolicyAtGammaOneNamesTheStuckStates) {
    EnvSpec env = make_env("grid1d9");
    try {
        analytic_policy_evaluation(env.model, table1_policy(env), 1.0);
        FAIL() << "expected SingularSystemError";
    } catch (const SingularSystemError& e) {
        std::string msg = e.what();
        for (const char* s : {"s6", "s7", "s8", "s9"})
            EXPECT_NE(msg.find(s), std::string::npos) << s;
        EXPECT_EQ(msg.find("s3"), std::string::npos);
    }
    // the same policy is evaluable when discounting
    ValueTable v =
        analytic_policy_evaluation(env.model, table1_policy(env), 0.9);
    EXPECT_TRUE(std::isfinite(v[env.model.state("s9").index]));
}

// Residual check: the analytic solution satisfies the Bellman equation at
// every state, on every environment, under several policies.
TEST(AnalyticEvalTest, BellmanResidualBelow1e9Everywhere) {
    for (const auto& name : env_names()) {
        EnvSpec env = make_env(name);
        std::vector<TabularPolicy> policies = {
            TabularPolicy::uniform_over(env.model)};
        if (name == "grid1d9" || name == "grid1d9_stochastic")
            policies.push_back(improved_policy(env));
        for (const auto& pi : policies) {
            ValueTable v = analytic_policy_evaluation(env.model, pi, 1.0);
            for (int s = 0; s < env.model.num_states(); ++s)
                EXPECT_NEAR(v[s], bellman_backup(env.model, pi, v, 1.0, s),
                            1e-9)
                    << name << " state " << s;
        }
    }
}

// --- iterative policy evaluation ---

TEST(IterativeEvalTest, OneSweepFromZerosOnGrid2x2) {
    EnvSpec env = make_env("grid2x2");
    IterativeEvalResult r = iterative_policy_evaluation(
        env.model, half_half_2x2(env), 1.0, 1e-10, 1);
    // one synchronous backup from v = 0:
    //   v(s1) = 0.5(-1) + 0.5(-1), v(s2) = v(s3) = 0.5(r_term) + 0.5(-1)
    EXPECT_DOUBLE_EQ(r.values[0], -1.0);
    EXPECT_DOUBLE_EQ(r.values[1], 1.0);
    EXPECT_DOUBLE_EQ(r.values[2], 1.0);
    EXPECT_DOUBLE_EQ(r.values[3], 0.0);
    EXPECT_EQ(r.sweeps, 1);
    EXPECT_FALSE(r.converged);
}

TEST(IterativeEvalTest, ConvergesToTheAnalyticSolution) {
    EnvSpec env = make_env("grid2x2");
    IterativeEvalResult r = iterative_policy_evaluation(
        env.model, half_half_2x2(env), 1.0, 1e-10, 10000);
    EXPECT_TRUE(r.converged);
    double expected[] = {0.0, 1.0, 1.0, 0.0};
    for (int s = 0; s < 4; ++s) EXPECT_NEAR(r.values[s], expected[s], 1e-8);
}

TEST(IterativeEvalTest, AnalyticStartConvergesInOneSweep) {
    EnvSpec env = make_env("grid2x2");
    TabularPolicy pi = half_half_2x2(env);
    ValueTable v0 = analytic_policy_evaluation(env.model, pi, 1.0);
    IterativeEvalResult r =
        iterative_policy_evaluation(env.model, pi, 1.0, 1e-10, 10000, v0);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.sweeps, 1);
}

TEST(IterativeEvalTest, SweepCapSetsNonConvergedFlag) {
    EnvSpec env = make_env("grid1d9");
    IterativeEvalResult r = iterative_policy_evaluation(
        env.model, improved_policy(env), 1.0, 1e-10, 2);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.sweeps, 2);
    EXPECT_THROW(iterative_policy_evaluation(env.model, improved_policy(env),
                                             1.0, -1.0, 10),
                 std::invalid_argument);
}

// Iterative and analytic evaluation agree on 100 random small MDPs.
TEST(IterativeEvalTest, AgreesWithAnalyticOnRandomMdps) {
    Rng rng(12345);
    for (int trial = 0; trial < 100; ++trial) {
        TransitionModel m = test::random_model(rng);
        TabularPolicy pi = test::random_policy(m, rng);
        ValueTable analytic = analytic_policy_evaluation(m, pi, 0.9);
        IterativeEvalResult iterative =
            iterative_policy_evaluation(m, pi, 0.9, 1e-9, 100000);
        ASSERT_TRUE(iterative.converged);
        EXPECT_LE(analytic.sup_distance(iterative.values), 1e-6);
    }
}

// --- q_from_v and greedy improvement ---

TEST(QFromVTest, OneStepLookaheadAtTheFork) {
    // corridor with reward 3 into the terminal; given v(s3) = 3, v(s5) = 0,
    // the fork at s4 backs up to q(left) = 2, q(right) = 3
    EnvSpec env = make_env("grid1d9", {{"terminal_reward", 3.0}});
    ValueTable v(9, 0.0);
    v[env.model.state("s3").index] = 3.0;
    QTable q = q_from_v(env.model, v, 1.0);
    int s4 = env.model.state("s4").index;
    EXPECT_DOUBLE_EQ(q.at(s4, env.model.action("left").index), 2.0);
    EXPECT_DOUBLE_EQ(q.at(s4, env.model.action("right").index), 3.0);
    TabularPolicy greedy = greedy_policy(q);
    EXPECT_EQ(test::chosen_action(greedy, s4),
              env.model.action("right").index);
}

TEST(QFromVTest, ZeroValuesBackUpImmediateRewards) {
    EnvSpec env = make_env("grid2x2");
    QTable q = q_from_v(env.model, ValueTable(4, 0.0), 1.0);
    int s3 = env.model.state("s3").index;
    EXPECT_DOUBLE_EQ(q.at(s3, env.model.action("right").index), 3.0);
    EXPECT_DOUBLE_EQ(q.at(s3, env.model.action("up").index), -1.0);
}

TEST(QFromVTest, GammaZeroCollapsesTheLookahead) {
    EnvSpec env = make_env("grid1d9");
    ValueTable v(9, 100.0);  // arbitrary; gamma = 0 must ignore it
    QTable q = q_from_v(env.model, v, 0.0);
    int s1 = env.model.state("s1").index;
    EXPECT_DOUBLE_EQ(q.at(s1, env.model.action("right").index), -1.0);
    int s4 = env.model.state("s4").index;
    EXPECT_DOUBLE_EQ(q.at(s4, env.model.action("right").index), 5.0);
}

TEST(GreedyPolicyTest, AllEqualRowPicksTheFirstAction) {
    EnvSpec env = make_env("grid3x3");
    QTable q(env.model);  // all zeros, four defined actions everywhere
    TabularPolicy pi = greedy_policy(q);
    for (int s : env.model.nonterminal_states())
        EXPECT_EQ(test::chosen_action(pi, s), 0) << "left has the lowest index";
}

TEST(GreedyPolicyTest, ValueIterationFixedPointGreedyMatchesImproved) {
    EnvSpec env = make_env("grid1d9");
    ValueIterationResult vi = value_iteration(env.model, 1.0, 1e-10, 1000);
    TabularPolicy greedy = greedy_policy(q_from_v(env.model, vi.values, 1.0));
    EXPECT_EQ(greedy, improved_policy(env));
}

// --- policy iteration ---

TEST(PolicyIterationTest, Grid1d9FromTable1ReachesTheImprovedPolicy) {
    EnvSpec env = make_env("grid1d9");
    PolicyIterationResult r =
        policy_iteration(env.model, 1.0, 1e-10, 10000, table1_policy(env));
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.policy, improved_policy(env));
    double expected[] = {2, 3, 4, 5, 0, 5, 4, 3, 2};
    for (int s = 0; s < 9; ++s) EXPECT_NEAR(r.values[s], expected[s], 1e-9);
}

TEST(PolicyIterationTest, Grid2x2MatchesExhaustiveEnumeration) {
    EnvSpec env = make_env("grid2x2");
    test::EnumerationOracle oracle = test::enumerate_optimal(env.model, 1.0);
    PolicyIterationResult r = policy_iteration(env.model, 1.0, 1e-10);
    for (int s = 0; s < 4; ++s)
        EXPECT_NEAR(r.values[s], oracle.best_values[s], 1e-8);
    // expected optimal values {2, 3, 3, 0}
    EXPECT_NEAR(r.values[0], 2.0, 1e-9);
    EXPECT_NEAR(r.values[1], 3.0, 1e-9);
    EXPECT_NEAR(r.values[2], 3.0, 1e-9);
    const TransitionModel& m = env.model;
    EXPECT_EQ(test::chosen_action(r.policy, m.state("s2").index),
              m.action("down").index);
    EXPECT_EQ(test::chosen_action(r.policy, m.state("s3").index),
              m.action("right").index);
    // s1 is a tie between right and down; both are enumerated as optimal
    auto s1_set = oracle.optimal_actions[m.state("s1").index];
    EXPECT_NE(std::find(s1_set.begin(), s1_set.end(),
                        test::chosen_action(r.policy, m.state("s1").index)),
              s1_set.end());
}

TEST(PolicyIterationTest, GreedyStartTerminatesInOneRound) {
    EnvSpec env = make_env("grid1d9");
    PolicyIterationResult r =
        policy_iteration(env.model, 1.0, 1e-10, 10000, improved_policy(env));
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations, 1);
    EXPECT_EQ(r.policy, improved_policy(env));
}

// v_{pi_{k+1}} >= v_{pi_k} pointwise, every round, on the paper
// environments and on random MDPs.
TEST(PolicyIterationTest, ImprovementIsMonotone) {
    for (const auto& name : env_names()) {
        EnvSpec env = make_env(name);
        PolicyIterationResult r = policy_iteration(env.model, 1.0, 1e-10);
        for (size_t k = 0; k + 1 < r.round_values.size(); ++k)
            for (int s = 0; s < env.model.num_states(); ++s)
                EXPECT_GE(r.round_values[k + 1][s],
                          r.round_values[k][s] - 1e-9)
                    << name;
    }
    Rng rng(777);
    for (int trial = 0; trial < 30; ++trial) {
        TransitionModel m = test::random_model(rng);
        PolicyIterationResult r = policy_iteration(m, 0.9, 1e-10);
        for (size_t k = 0; k + 1 < r.round_values.size(); ++k)
            for (int s = 0; s < m.num_states(); ++s)
                EXPECT_GE(r.round_values[k + 1][s],
                          r.round_values[k][s] - 1e-9);
    }
}

// --- value iteration ---

TEST(ValueIterationTest, Grid1d9OptimalValues) {
    EnvSpec env = make_env("grid1d9");
    ValueIterationResult r = value_iteration(env.model, 1.0, 1e-10, 1000);
    EXPECT_TRUE(r.converged);
    for (int s = 0; s < 9; ++s)
        EXPECT_NEAR(r.values[s], (*env.optimal_values)[s], 1e-9);
    EXPECT_EQ(r.policy, improved_policy(env));
}

TEST(ValueIterationTest, TwoTerminalGreedyDirectionsMatchEnumeration) {
    EnvSpec env = make_env("grid1d8_two_terminal");
    const TransitionModel& m = env.model;
    ValueIterationResult r = value_iteration(m, 0.9, 1e-10, 1000);
    EXPECT_EQ(test::chosen_action(r.policy, m.state("s7").index),
              m.action("right").index);
    EXPECT_EQ(test::chosen_action(r.policy, m.state("s5").index),
              m.action("left").index);
    test::EnumerationOracle oracle = test::enumerate_optimal(m, 0.9);
    for (int s = 0; s < m.num_states(); ++s)
        EXPECT_NEAR(r.values[s], oracle.best_values[s], 1e-8);
    for (int s : m.nonterminal_states()) {
        const auto& set = oracle.optimal_actions[s];
        EXPECT_NE(std::find(set.begin(), set.end(),
                            test::chosen_action(r.policy, s)),
                  set.end());
    }
}

TEST(ValueIterationTest, SingleStateModelConvergesInOneSweep) {
    TransitionModel::Builder b({"a", "goal"}, {"left", "right"});
    b.terminal("goal");
    b.add("a", "left", {{"goal", 1.0, 1.0}});
    b.add("a", "right", {{"goal", 5.0, 1.0}});
    TransitionModel m = std::move(b).build();
    ValueIterationResult r = value_iteration(m, 1.0, 1e-10, 100);
    EXPECT_DOUBLE_EQ(r.values[0], 5.0);
    EXPECT_LE(r.sweeps, 2);  // the second sweep only confirms the fixed point
}

// Successive sup-norm differences contract by at least gamma when gamma < 1.
TEST(ValueIterationTest, SweepDifferencesContract) {
    Rng rng(31337);
    for (int trial = 0; trial < 30; ++trial) {
        TransitionModel m = test::random_model(rng);
        ValueIterationResult r = value_iteration(m, 0.9, 1e-10, 10000);
        for (size_t k = 0; k + 1 < r.sup_diffs.size(); ++k)
            EXPECT_LE(r.sup_diffs[k + 1], 0.9 * r.sup_diffs[k] + 1e-12);
    }
}

// Policy iteration and value iteration land on the same fixed point.
TEST(ValueIterationTest, AgreesWithPolicyIterationEverywhere) {
    for (const auto& name : env_names()) {
        EnvSpec env = make_env(name);
        ValueIterationResult vi = value_iteration(env.model, 1.0, 1e-12, 10000);
        PolicyIterationResult pi = policy_iteration(env.model, 1.0, 1e-12);
        EXPECT_LE(vi.values.sup_distance(pi.values), 1e-8) << name;
        QTable q = q_from_v(env.model, vi.values, 1.0);
        for (int s : env.model.nonterminal_states())
            EXPECT_EQ(q.argmax_set_at(s),
                      q_from_v(env.model, pi.values, 1.0).argmax_set_at(s))
                << name;
    }
    Rng rng(2718);
    for (int trial = 0; trial < 30; ++trial) {
        TransitionModel m = test::random_model(rng);
        ValueIterationResult vi = value_iteration(m, 0.9, 1e-12, 100000);
        PolicyIterationResult pi = policy_iteration(m, 0.9, 1e-12);
        EXPECT_LE(vi.values.sup_distance(pi.values), 1e-8);
    }
}

// --- fixed-point iteration ---

TEST(FixedPointTest, CosineReaches0p7314AfterTenIterations) {
    FixedPointResult r =
        fixed_point([](double x) { return std::cos(x); }, 0.0, 1e-12, 10);
    EXPECT_EQ(r.iterations, 10);
    EXPECT_FALSE(r.converged);
    EXPECT_NEAR(r.x, 0.7314, 5e-5);
}

TEST(FixedPointTest, IdentityConvergesImmediately) {
    FixedPointResult r =
        fixed_point([](double x) { return x; }, 3.25, 1e-12, 100);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations, 1);
    EXPECT_DOUBLE_EQ(r.x, 3.25);
}

TEST(FixedPointTest, AffineMapConvergesToTwo) {
    FixedPointResult r =
        fixed_point([](double x) { return x / 2.0 + 1.0; }, 0.0, 1e-12, 1000);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.x, 2.0, 1e-10);
}

} // namespace
