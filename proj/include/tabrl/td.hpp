#pragma once

#include <cmath>
#include <vector>

#include "tabrl/dp.hpp"
#include "tabrl/environments.hpp"
#include "tabrl/mdp.hpp"

namespace tabrl {

enum class AlphaSchedule { fixed, one_over_visits, power_visits };

/// Exponent for the power_visits schedule, alpha = N(s)^-0.85. Plain 1/N(s)
/// averaging stalls on undiscounted bootstrapped targets; a slower decay in
/// (1/2, 1) keeps the Robbins-Monro conditions and tracks the moving targets.
inline constexpr double kPowerVisitsExponent = 0.85;

/// Shared knobs for the bootstrapped learners. Exploration is epsilon-greedy
/// with an optional multiplicative per-episode decay.
struct LearningConfig {
    double alpha = 0.1;      // step size, in [0, 1]
    double gamma = 1.0;      // discount, in [0, 1]
    double epsilon = 0.1;    // exploration rate, in [0, 1]
    long episodes = 1000;
    int max_steps = 100;
    std::uint64_t seed = 0;
    std::optional<double> epsilon_decay;  // multiplied in after each episode
    AlphaSchedule alpha_schedule = AlphaSchedule::fixed;
    double q_init = 0.0;                  // initial q (and v) estimate
    std::vector<int> start_states;        // empty: use the env's start states

    void validate() const {
        if (alpha < 0.0 || alpha > 1.0)
            throw std::invalid_argument("alpha must lie in [0, 1]");
        if (gamma < 0.0 || gamma > 1.0)
            throw std::invalid_argument("gamma must lie in [0, 1]");
        if (epsilon < 0.0 || epsilon > 1.0)
            throw std::invalid_argument("epsilon must lie in [0, 1]");
        if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
        if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
        if (epsilon_decay && (*epsilon_decay <= 0.0 || *epsilon_decay > 1.0))
            throw std::invalid_argument("epsilon_decay must lie in (0, 1]");
    }
};

namespace detail {

inline const std::vector<int>& effective_starts(const EnvSpec& env,
                                                const LearningConfig& cfg) {
    return cfg.start_states.empty() ? env.start_states : cfg.start_states;
}

/// Uniform start draw; a single candidate consumes no randomness.
inline int sample_start(const std::vector<int>& starts, Rng& rng) {
    if (starts.size() == 1) return starts[0];
    return starts[static_cast<size_t>(rng.uniform_int(
        static_cast<int>(starts.size())))];
}

/// Epsilon-greedy over the defined actions at s. The exploration draw is
/// skipped when epsilon is exactly zero, so greedy runs consume no
/// randomness beyond environment sampling.
inline int epsilon_greedy(const QTable& q, const TransitionModel& m, int s,
                          double epsilon, Rng& rng) {
    if (epsilon > 0.0 && rng.uniform() < epsilon) {
        const auto& acts = m.actions_at(s);
        return acts[static_cast<size_t>(
            rng.uniform_int(static_cast<int>(acts.size())))];
    }
    return q.argmax_at(s);
}

} // namespace detail

/// TD(0) prediction: after every transition,
///   v(s) <- v(s) + alpha (r + gamma v(s') - v(s)),
/// with terminal successors worth zero. With the one_over_visits schedule
/// the step size for a state is 1/N(s), N counting its updates so far.
inline ValueTable td0_evaluate(const EnvSpec& env, const TabularPolicy& pi,
                               const LearningConfig& cfg) {
    cfg.validate();
    const TransitionModel& m = env.model;
    Rng rng(cfg.seed);
    ValueTable v(m.num_states(), 0.0);
    std::vector<long> visits(m.num_states(), 0);
    const auto& starts = detail::effective_starts(env, cfg);

    for (long e = 0; e < cfg.episodes; ++e) {
        int s = detail::sample_start(starts, rng);
        for (int t = 0; t < cfg.max_steps; ++t) {
            int a = pi.sample(s, rng);
            TransitionModel::Outcome o = m.sample(s, a, rng);
            double next_v = m.is_terminal(o.next) ? 0.0 : v[o.next];
            double alpha = cfg.alpha;
            if (cfg.alpha_schedule == AlphaSchedule::one_over_visits)
                alpha = 1.0 / static_cast<double>(++visits[s]);
            else if (cfg.alpha_schedule == AlphaSchedule::power_visits)
                alpha = std::pow(static_cast<double>(++visits[s]),
                                 -kPowerVisitsExponent);
            v[s] += alpha * (o.reward + cfg.gamma * next_v - v[s]);
            s = o.next;
            if (m.is_terminal(s)) break;
        }
    }
    return v;
}

struct ControlResult {
    QTable q;
    TabularPolicy greedy;
    std::vector<double> episode_returns;  // discounted return per episode
};

namespace detail {

/// Shared SARSA / Q-learning loop; `use_max_backup` selects the off-policy
/// max target. Terminal successors bootstrap to zero in both.
inline ControlResult td_control(const EnvSpec& env, const LearningConfig& cfg,
                                bool use_max_backup) {
    cfg.validate();
    const TransitionModel& m = env.model;
    Rng rng(cfg.seed);
    QTable q(m, cfg.q_init);
    const auto& starts = effective_starts(env, cfg);
    std::vector<double> returns;
    returns.reserve(static_cast<size_t>(cfg.episodes));

    double epsilon = cfg.epsilon;
    for (long e = 0; e < cfg.episodes; ++e) {
        int s = sample_start(starts, rng);
        int a = epsilon_greedy(q, m, s, epsilon, rng);
        double episode_return = 0.0;
        double discount = 1.0;
        for (int t = 0; t < cfg.max_steps; ++t) {
            TransitionModel::Outcome o = m.sample(s, a, rng);
            episode_return += discount * o.reward;
            discount *= cfg.gamma;
            if (m.is_terminal(o.next)) {
                q.at(s, a) += cfg.alpha * (o.reward - q.at(s, a));
                break;
            }
            int next_a = epsilon_greedy(q, m, o.next, epsilon, rng);
            double target =
                use_max_backup ? q.max_at(o.next) : q.at(o.next, next_a);
            q.at(s, a) += cfg.alpha * (o.reward + cfg.gamma * target - q.at(s, a));
            s = o.next;
            a = next_a;
        }
        returns.push_back(episode_return);
        if (cfg.epsilon_decay) epsilon *= *cfg.epsilon_decay;
    }
    return {q, greedy_policy(q), std::move(returns)};
}

} // namespace detail

/// On-policy TD control: the update target uses the action actually selected
/// at the next state.
inline ControlResult sarsa(const EnvSpec& env, const LearningConfig& cfg) {
    return detail::td_control(env, cfg, /*use_max_backup=*/false);
}

/// Off-policy TD control: the update target maximizes over next actions.
inline ControlResult q_learning(const EnvSpec& env, const LearningConfig& cfg) {
    return detail::td_control(env, cfg, /*use_max_backup=*/true);
}

} // namespace tabrl
