#include <gtest/gtest.h>

#include "tabrl/dp.hpp"
#include "tabrl/environments.hpp"

using namespace tabrl;

namespace {

std::vector<TransitionModel::Outcome> row_of(const TransitionModel& m,
                                             const char* s, const char* a) {
    auto span = m.row(m.state(s).index, m.action(a).index);
    return {span.begin(), span.end()};
}

TEST(MakeEnvTest, UnknownNameListsTheFiveEnvironments) {
    try {
        make_env("nosuch");
        FAIL() << "expected UnknownNameError";
    } catch (const UnknownNameError& e) {
        std::string msg = e.what();
        for (const auto& name : env_names())
            EXPECT_NE(msg.find(name), std::string::npos) << name;
    }
}

TEST(MakeEnvTest, AllEnvironmentsValidateAndStartNonTerminal) {
    for (const auto& name : env_names()) {
        EnvSpec env = make_env(name);
        EXPECT_EQ(env.name, name);
        EXPECT_FALSE(env.start_states.empty());
        for (int s : env.start_states) EXPECT_FALSE(env.model.is_terminal(s));
        // uniform policy over the model must be valid
        EXPECT_TRUE(validate_policy(TabularPolicy::uniform_over(env.model),
                                    env.model)
                        .ok());
    }
}

TEST(MakeEnvTest, Grid1d9RewardArrowIntoTerminal) {
    EnvSpec env = make_env("grid1d9");
    auto row = row_of(env.model, "s4", "right");
    ASSERT_EQ(row.size(), 1u);
    EXPECT_EQ(env.model.state_label(row[0].next), "s5");
    EXPECT_DOUBLE_EQ(row[0].reward, 5.0);
    EXPECT_DOUBLE_EQ(row[0].prob, 1.0);

    auto from_right = row_of(env.model, "s6", "left");
    EXPECT_EQ(env.model.state_label(from_right[0].next), "s5");
    EXPECT_DOUBLE_EQ(from_right[0].reward, 5.0);
}

TEST(MakeEnvTest, Grid1d9BoundariesSelfTransition) {
    EnvSpec env = make_env("grid1d9");
    auto left_edge = row_of(env.model, "s1", "left");
    EXPECT_EQ(env.model.state_label(left_edge[0].next), "s1");
    EXPECT_DOUBLE_EQ(left_edge[0].prob, 1.0);
    auto right_edge = row_of(env.model, "s9", "right");
    EXPECT_EQ(env.model.state_label(right_edge[0].next), "s9");
    EXPECT_DOUBLE_EQ(right_edge[0].prob, 1.0);
    // interior row from the intuitive table
    auto s1_right = row_of(env.model, "s1", "right");
    EXPECT_EQ(env.model.state_label(s1_right[0].next), "s2");
}

TEST(MakeEnvTest, StochasticCorridorListing) {
    EnvSpec env = make_env("grid1d9_stochastic");
    auto s1_right = row_of(env.model, "s1", "right");
    ASSERT_EQ(s1_right.size(), 2u);
    EXPECT_EQ(env.model.state_label(s1_right[0].next), "s2");
    EXPECT_DOUBLE_EQ(s1_right[0].prob, 0.7);
    EXPECT_EQ(env.model.state_label(s1_right[1].next), "s1");
    EXPECT_DOUBLE_EQ(s1_right[1].prob, 0.3);

    auto s2_right = row_of(env.model, "s2", "right");
    EXPECT_EQ(env.model.state_label(s2_right[0].next), "s3");
    EXPECT_DOUBLE_EQ(s2_right[0].prob, 0.8);
    EXPECT_DOUBLE_EQ(s2_right[1].prob, 0.2);

    // the slip into the terminal still pays the terminal reward
    auto s6_right = row_of(env.model, "s6", "right");
    ASSERT_EQ(s6_right.size(), 2u);
    EXPECT_EQ(env.model.state_label(s6_right[1].next), "s5");
    EXPECT_DOUBLE_EQ(s6_right[1].reward, 5.0);
    EXPECT_DOUBLE_EQ(s6_right[1].prob, 0.4);
}

TEST(MakeEnvTest, Grid2x2RewardIntoTerminal) {
    EnvSpec env = make_env("grid2x2");
    auto row = row_of(env.model, "s3", "right");
    ASSERT_EQ(row.size(), 1u);
    EXPECT_EQ(env.model.state_label(row[0].next), "s4");
    EXPECT_DOUBLE_EQ(row[0].reward, 3.0);
    EXPECT_DOUBLE_EQ(row[0].prob, 1.0);
    EXPECT_DOUBLE_EQ(row_of(env.model, "s1", "right")[0].reward, -1.0);
}

TEST(MakeEnvTest, Grid3x3GeometryAndRewards) {
    EnvSpec env = make_env("grid3x3");
    const TransitionModel& m = env.model;
    EXPECT_TRUE(m.is_terminal(m.state("s7").index));
    // row-major moves
    EXPECT_EQ(m.state_label(row_of(m, "s3", "down")[0].next), "s6");
    EXPECT_EQ(m.state_label(row_of(m, "s6", "left")[0].next), "s5");
    EXPECT_EQ(m.state_label(row_of(m, "s5", "down")[0].next), "s8");
    // entering the terminal pays +3
    EXPECT_DOUBLE_EQ(row_of(m, "s4", "down")[0].reward, 3.0);
    EXPECT_DOUBLE_EQ(row_of(m, "s8", "left")[0].reward, 3.0);
    // off-grid moves self-transition at -1
    auto up_from_top = row_of(m, "s2", "up");
    EXPECT_EQ(m.state_label(up_from_top[0].next), "s2");
    EXPECT_DOUBLE_EQ(up_from_top[0].reward, -1.0);
}

TEST(MakeEnvTest, TwoTerminalCorridor) {
    EnvSpec env = make_env("grid1d8_two_terminal");
    const TransitionModel& m = env.model;
    EXPECT_TRUE(m.is_terminal(m.state("s4").index));
    EXPECT_TRUE(m.is_terminal(m.state("s8").index));
    EXPECT_DOUBLE_EQ(row_of(m, "s3", "right")[0].reward, 5.0);
    EXPECT_DOUBLE_EQ(row_of(m, "s5", "left")[0].reward, 5.0);
    EXPECT_DOUBLE_EQ(row_of(m, "s7", "right")[0].reward, 5.0);
    EXPECT_DOUBLE_EQ(row_of(m, "s6", "right")[0].reward, -1.0);
}

// The two-terminal corridor is mirror symmetric between the terminals:
// s5 <-> s7 with left and right exchanged, s6 fixed. Optimal values under
// the mirror agree.
TEST(MakeEnvTest, TwoTerminalMirrorSymmetry) {
    EnvSpec env = make_env("grid1d8_two_terminal");
    const TransitionModel& m = env.model;
    auto mirror_state = [&](int s) {
        // s_k <-> s_{12-k} on the sub-corridor s4..s8
        int k = s + 1;  // labels are 1-based
        return (k >= 4 && k <= 8) ? (12 - k) - 1 : s;
    };
    int left = m.action("left").index, right = m.action("right").index;
    for (const char* lbl : {"s5", "s6", "s7"}) {
        int s = m.state(lbl).index;
        auto fwd = m.row(s, right);
        auto mirrored = m.row(mirror_state(s), left);
        ASSERT_EQ(fwd.size(), mirrored.size());
        EXPECT_EQ(mirror_state(fwd[0].next), mirrored[0].next);
        EXPECT_DOUBLE_EQ(fwd[0].reward, mirrored[0].reward);
    }
    for (double gamma : {0.9, 1.0}) {
        ValueIterationResult vi = value_iteration(m, gamma, 1e-12, 10000);
        EXPECT_NEAR(vi.values[m.state("s5").index],
                    vi.values[m.state("s7").index], 1e-9);
    }
}

TEST(MakeEnvTest, OverridesChangeRewards) {
    EnvSpec env = make_env("grid1d9", {{"terminal_reward", 3.0}});
    EXPECT_DOUBLE_EQ(row_of(env.model, "s4", "right")[0].reward, 3.0);
    EXPECT_FALSE(env.optimal_values.has_value());
    EXPECT_THROW(make_env("grid1d9", {{"bogus", 1.0}}), std::invalid_argument);
}

TEST(MakeEnvTest, Grid1d9CarriesItsOptimalValues) {
    EnvSpec env = make_env("grid1d9");
    ASSERT_TRUE(env.optimal_values.has_value());
    ValueTable expected{2, 3, 4, 5, 0, 5, 4, 3, 2};
    for (int s = 0; s < 9; ++s)
        EXPECT_DOUBLE_EQ((*env.optimal_values)[s], expected[s]);
}

// --- step ---

TEST(StepTest, DeterministicRowsStepAsListed) {
    EnvSpec env = make_env("grid1d9");
    Rng rng(0);
    StepResult r = step(env, env.model.state("s1").index,
                        env.model.action("right").index, rng);
    EXPECT_EQ(env.model.state_label(r.next), "s2");
    EXPECT_DOUBLE_EQ(r.reward, -1.0);
    EXPECT_FALSE(r.done);

    r = step(env, env.model.state("s4").index,
             env.model.action("right").index, rng);
    EXPECT_EQ(env.model.state_label(r.next), "s5");
    EXPECT_DOUBLE_EQ(r.reward, 5.0);
    EXPECT_TRUE(r.done);
}

TEST(StepTest, SteppingFromTerminalIsRejected) {
    EnvSpec env = make_env("grid1d9");
    Rng rng(0);
    EXPECT_THROW(step(env, env.model.state("s5").index,
                      env.model.action("right").index, rng),
                 std::invalid_argument);
}

TEST(StepTest, StochasticFrequenciesMatchTheListing) {
    EnvSpec env = make_env("grid1d9_stochastic");
    Rng rng(99);
    int s2 = env.model.state("s2").index;
    int right = env.model.action("right").index;
    int s3 = env.model.state("s3").index;
    const int n = 100000;
    int hits = 0;
    for (int i = 0; i < n; ++i)
        if (step(env, s2, right, rng).next == s3) ++hits;
    EXPECT_NEAR(static_cast<double>(hits) / n, 0.8, 0.01);
}

// --- built-in policies ---

TEST(NamedPolicyTest, KnownNamesResolve) {
    EnvSpec env = make_env("grid1d9");
    EXPECT_TRUE(validate_policy(named_policy(env, "uniform"), env.model).ok());
    EXPECT_TRUE(validate_policy(named_policy(env, "table1"), env.model).ok());
    EXPECT_TRUE(validate_policy(named_policy(env, "improved"), env.model).ok());
    EXPECT_THROW(named_policy(env, "nope"), UnknownNameError);
    EnvSpec two = make_env("grid2x2");
    EXPECT_THROW(named_policy(two, "table1"), std::invalid_argument);
}

TEST(NamedPolicyTest, ImprovedPolicyWalksTowardTheTerminal) {
    EnvSpec env = make_env("grid1d9");
    TabularPolicy pi = improved_policy(env);
    int left = env.model.action("left").index;
    int right = env.model.action("right").index;
    for (const char* s : {"s1", "s2", "s3", "s4"})
        EXPECT_DOUBLE_EQ(pi.prob(env.model.state(s).index, right), 1.0);
    for (const char* s : {"s6", "s7", "s8", "s9"})
        EXPECT_DOUBLE_EQ(pi.prob(env.model.state(s).index, left), 1.0);
}

} // namespace
