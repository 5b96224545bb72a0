#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tabrl/mdp.hpp"

namespace tabrl {

/// A named, ready-to-use environment: its dynamics, the states episodes may
/// start from, and (where known in closed form) the optimal values.
struct EnvSpec {
    std::string name;
    TransitionModel model;
    std::vector<int> start_states;
    std::optional<ValueTable> optimal_values;
    double terminal_reward = 0.0;
    double step_reward = 0.0;
};

inline const std::vector<std::string>& env_names() {
    static const std::vector<std::string> names = {
        "grid1d9", "grid1d9_stochastic", "grid2x2", "grid3x3",
        "grid1d8_two_terminal"};
    return names;
}

namespace detail {

inline std::vector<std::string> state_labels(int n) {
    std::vector<std::string> out;
    for (int i = 1; i <= n; ++i) out.push_back("s" + std::to_string(i));
    return out;
}

// Canonical action order; greedy ties resolve to the lowest index.
inline std::vector<std::string> actions_lr() { return {"left", "right"}; }
inline std::vector<std::string> actions_lrud() {
    return {"left", "right", "up", "down"};
}

} // namespace detail

/// Builds one of the named environments. Recognized overrides:
///   terminal_reward — reward on any transition entering a terminal state
///   step_reward     — reward on every other transition
///   gamma           — the model's default discount
inline EnvSpec make_env(std::string_view name,
                        const std::map<std::string, double>& overrides = {}) {
    bool known = false;
    for (const auto& n : env_names()) known = known || n == name;
    if (!known) {
        std::string msg = "unknown environment '" + std::string(name) +
                          "'; valid environments: ";
        for (size_t i = 0; i < env_names().size(); ++i)
            msg += (i ? ", " : "") + env_names()[i];
        throw UnknownNameError(msg);
    }

    double terminal_reward = (name == "grid2x2" || name == "grid3x3") ? 3.0 : 5.0;
    double step_reward = -1.0;
    double gamma = 1.0;
    for (const auto& [key, value] : overrides) {
        if (key == "terminal_reward")
            terminal_reward = value;
        else if (key == "step_reward")
            step_reward = value;
        else if (key == "gamma")
            gamma = value;
        else
            throw std::invalid_argument(
                "unknown override '" + key +
                "'; valid overrides: terminal_reward, step_reward, gamma");
    }

    EnvSpec env;
    env.name = std::string(name);
    env.terminal_reward = terminal_reward;
    env.step_reward = step_reward;

    auto reward_into = [&](bool terminal) {
        return terminal ? terminal_reward : step_reward;
    };

    if (name == "grid1d9" || name == "grid1d9_stochastic") {
        TransitionModel::Builder b(detail::state_labels(9), detail::actions_lr(),
                                   gamma);
        b.terminal("s5");
        auto lbl = [](int i) { return "s" + std::to_string(i); };
        auto term = [](int i) { return i == 5; };
        if (name == "grid1d9") {
            for (int s = 1; s <= 9; ++s) {
                if (term(s)) continue;
                int left = s == 1 ? 1 : s - 1;
                int right = s == 9 ? 9 : s + 1;
                b.add(lbl(s), "left", {{lbl(left), reward_into(term(left)), 1.0}});
                b.add(lbl(s), "right",
                      {{lbl(right), reward_into(term(right)), 1.0}});
            }
        } else {
            // The stochastic variant keeps the same geometry but the "right"
            // action can slip; "left" stays deterministic.
            const std::map<int, std::vector<std::pair<int, double>>> right = {
                {1, {{2, 0.7}, {1, 0.3}}}, {2, {{3, 0.8}, {1, 0.2}}},
                {3, {{4, 0.9}, {2, 0.1}}}, {4, {{5, 1.0}}},
                {6, {{7, 0.6}, {5, 0.4}}}, {7, {{8, 0.7}, {6, 0.3}}},
                {8, {{9, 0.8}, {7, 0.2}}}, {9, {{9, 1.0}}}};
            const std::map<int, int> left = {{1, 1}, {2, 1}, {3, 2}, {4, 3},
                                             {6, 5}, {7, 6}, {8, 7}, {9, 8}};
            for (const auto& [s, outs] : right) {
                std::vector<std::tuple<std::string, double, double>> row;
                for (auto [next, p] : outs)
                    row.emplace_back(lbl(next), reward_into(term(next)), p);
                b.add(lbl(s), "right", std::move(row));
            }
            for (const auto& [s, next] : left)
                b.add(lbl(s), "left", {{lbl(next), reward_into(term(next)), 1.0}});
        }
        env.model = std::move(b).build();
        if (name == "grid1d9" && terminal_reward == 5.0 && step_reward == -1.0)
            env.optimal_values = ValueTable{2, 3, 4, 5, 0, 5, 4, 3, 2};
    } else if (name == "grid2x2") {
        TransitionModel::Builder b(detail::state_labels(4),
                                   detail::actions_lrud(), gamma);
        b.terminal("s4");
        b.add("s1", "right", {{"s2", step_reward, 1.0}});
        b.add("s1", "down", {{"s3", step_reward, 1.0}});
        b.add("s2", "left", {{"s1", step_reward, 1.0}});
        b.add("s2", "down", {{"s4", terminal_reward, 1.0}});
        b.add("s3", "right", {{"s4", terminal_reward, 1.0}});
        b.add("s3", "up", {{"s1", step_reward, 1.0}});
        env.model = std::move(b).build();
    } else if (name == "grid3x3") {
        // Row-major 3x3: s1..s3 / s4..s6 / s7..s9, terminal s7. All four
        // actions are defined everywhere; off-grid moves self-transition.
        TransitionModel::Builder b(detail::state_labels(9),
                                   detail::actions_lrud(), gamma);
        b.terminal("s7");
        auto lbl = [](int i) { return "s" + std::to_string(i); };
        for (int s = 1; s <= 9; ++s) {
            if (s == 7) continue;
            int row = (s - 1) / 3, col = (s - 1) % 3;
            const std::pair<std::string, std::pair<int, int>> moves[] = {
                {"left", {row, col - 1}},
                {"right", {row, col + 1}},
                {"up", {row - 1, col}},
                {"down", {row + 1, col}}};
            for (const auto& [action, rc] : moves) {
                auto [r, c] = rc;
                int next = (r < 0 || r > 2 || c < 0 || c > 2)
                               ? s
                               : r * 3 + c + 1;
                b.add(lbl(s), action,
                      {{lbl(next), reward_into(next == 7), 1.0}});
            }
        }
        env.model = std::move(b).build();
    } else {  // grid1d8_two_terminal
        TransitionModel::Builder b(detail::state_labels(8), detail::actions_lr(),
                                   gamma);
        b.terminal("s4").terminal("s8");
        auto lbl = [](int i) { return "s" + std::to_string(i); };
        auto term = [](int i) { return i == 4 || i == 8; };
        for (int s = 1; s <= 8; ++s) {
            if (term(s)) continue;
            int left = s == 1 ? 1 : s - 1;
            int right = s + 1;
            b.add(lbl(s), "left", {{lbl(left), reward_into(term(left)), 1.0}});
            b.add(lbl(s), "right", {{lbl(right), reward_into(term(right)), 1.0}});
        }
        env.model = std::move(b).build();
    }

    env.start_states = env.model.nonterminal_states();
    return env;
}

/// One interactive transition. Returns (next state, reward, episode done).
struct StepResult {
    int next;
    double reward;
    bool done;
};

inline StepResult step(const EnvSpec& env, int state, int action, Rng& rng) {
    if (env.model.is_terminal(state))
        throw std::invalid_argument("step: state " +
                                    env.model.state_label(state) +
                                    " is terminal");
    TransitionModel::Outcome o = env.model.sample(state, action, rng);
    return {o.next, o.reward, env.model.is_terminal(o.next)};
}

// ---------------------------------------------------------------------------
// Built-in named policies
// ---------------------------------------------------------------------------

/// "always right" start policy for the nine-cell corridor.
inline TabularPolicy table1_policy(const EnvSpec& env) {
    if (env.name != "grid1d9" && env.name != "grid1d9_stochastic")
        throw std::invalid_argument("policy 'table1' is defined for grid1d9 and "
                                    "grid1d9_stochastic only");
    TabularPolicy pi(env.model.num_states(), env.model.num_actions());
    int right = env.model.action("right").index;
    for (int s : env.model.nonterminal_states()) pi.set(s, right, 1.0);
    return pi;
}

/// Corridor policy that walks toward the terminal from both sides.
inline TabularPolicy improved_policy(const EnvSpec& env) {
    if (env.name != "grid1d9" && env.name != "grid1d9_stochastic")
        throw std::invalid_argument(
            "policy 'improved' is defined for grid1d9 and "
            "grid1d9_stochastic only");
    TabularPolicy pi(env.model.num_states(), env.model.num_actions());
    int left = env.model.action("left").index;
    int right = env.model.action("right").index;
    int terminal = env.model.state("s5").index;
    for (int s : env.model.nonterminal_states())
        pi.set(s, s < terminal ? right : left, 1.0);
    return pi;
}

/// Resolves a built-in policy name: uniform, table1, or improved.
inline TabularPolicy named_policy(const EnvSpec& env, std::string_view name) {
    if (name == "uniform") return TabularPolicy::uniform_over(env.model);
    if (name == "table1") return table1_policy(env);
    if (name == "improved") return improved_policy(env);
    throw UnknownNameError("unknown policy '" + std::string(name) +
                           "'; valid policies: uniform, table1, improved");
}

} // namespace tabrl
