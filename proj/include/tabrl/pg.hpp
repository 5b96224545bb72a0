#pragma once

#include <array>
#include <vector>

#include "tabrl/environments.hpp"
#include "tabrl/mdp.hpp"

namespace tabrl {

/// Clipping regime for the theta-parameterized grid policy. Training keeps
/// theta strictly inside (-1/2, 1/2) so both actions stay sampleable and the
/// log-gradient stays finite; paper_trace clips to exactly [-1/2, 1/2], which
/// can pin one action at probability zero.
enum class ClipMode { training, paper_trace };

inline constexpr double kClipMargin = 1e-3;

/// A single update may move theta by at most half its range. Near the clip
/// bounds the log-gradient of the rare action grows like 1/kClipMargin, and
/// an unclamped step would throw the parameter across the whole interval.
inline constexpr double kMaxThetaStep = 0.5;

struct ActionProbs {
    double left;
    double right;
};

/// Linear two-action grid policy: pi(left|s) = 1/2 + theta_s and
/// pi(right|s) = 1/2 - theta_s per non-terminal state. A row may instead be
/// pinned to "always right" (probabilities {0, 1}, no trainable parameter),
/// which is how the corridor's first cell is written in the two-terminal
/// task.
class ThetaPolicy {
  public:
    enum class RowKind { centered, fixed_right, terminal };

    ThetaPolicy(const TransitionModel& m, ClipMode mode)
        : mode_(mode), left_(m.action("left").index),
          right_(m.action("right").index), theta_(m.num_states(), 0.0),
          kind_(m.num_states(), RowKind::centered) {
        if (m.num_actions() != 2)
            throw std::invalid_argument(
                "ThetaPolicy requires a model with exactly the actions "
                "left and right");
        for (int s = 0; s < m.num_states(); ++s)
            if (m.is_terminal(s)) kind_[s] = RowKind::terminal;
    }

    ClipMode mode() const { return mode_; }
    double clip_lo() const {
        return mode_ == ClipMode::training ? -0.5 + kClipMargin : -0.5;
    }
    double clip_hi() const {
        return mode_ == ClipMode::training ? 0.5 - kClipMargin : 0.5;
    }

    int num_states() const { return static_cast<int>(theta_.size()); }
    int left_action() const { return left_; }
    int right_action() const { return right_; }

    RowKind kind(int s) const { return kind_.at(s); }
    void set_fixed_right(int s) {
        if (kind_.at(s) == RowKind::terminal)
            throw std::invalid_argument("cannot parameterize a terminal state");
        kind_[s] = RowKind::fixed_right;
        theta_[s] = 0.0;
    }

    double theta(int s) const { return theta_.at(s); }
    void set_theta(int s, double value) {
        if (kind_.at(s) != RowKind::centered)
            throw std::invalid_argument(
                "state has no trainable parameter");
        theta_[s] = std::clamp(value, clip_lo(), clip_hi());
    }

    /// Applies one clamped gradient step and clips into the bounds.
    void update_theta(int s, double delta) {
        if (kind_.at(s) != RowKind::centered) return;
        delta = std::clamp(delta, -kMaxThetaStep, kMaxThetaStep);
        theta_[s] = std::clamp(theta_[s] + delta, clip_lo(), clip_hi());
    }

    ActionProbs probs(int s) const {
        switch (kind_.at(s)) {
            case RowKind::fixed_right: return {0.0, 1.0};
            case RowKind::centered: return {0.5 + theta_[s], 0.5 - theta_[s]};
            case RowKind::terminal:
            default:
                throw std::invalid_argument("terminal state has no action "
                                            "distribution");
        }
    }

    double prob(int s, int a) const {
        ActionProbs p = probs(s);
        return a == left_ ? p.left : p.right;
    }

    int sample_action(int s, Rng& rng) const {
        return rng.uniform() < probs(s).left ? left_ : right_;
    }

    TabularPolicy to_tabular() const {
        TabularPolicy pi(num_states(), 2);
        for (int s = 0; s < num_states(); ++s) {
            if (kind_[s] == RowKind::terminal) continue;
            ActionProbs p = probs(s);
            pi.set(s, left_, p.left);
            pi.set(s, right_, p.right);
        }
        return pi;
    }

  private:
    ClipMode mode_;
    int left_;
    int right_;
    std::vector<double> theta_;
    std::vector<RowKind> kind_;
};

inline ActionProbs theta_policy_probs(const ThetaPolicy& pi, int s) {
    return pi.probs(s);
}

/// d log pi(a|s) / d theta_s: +1/(1/2 + theta) for left, -1/(1/2 - theta)
/// for right. Pinned "always right" rows carry no parameter, so their chosen
/// action has gradient zero. Requesting the gradient of a zero-probability
/// action is singular.
inline double log_policy_grad(const ThetaPolicy& pi, int s, int a) {
    if (pi.prob(s, a) <= 0.0)
        throw SingularGradientError(
            "log-gradient of a zero-probability action at state index " +
            std::to_string(s));
    if (pi.kind(s) == ThetaPolicy::RowKind::fixed_right) return 0.0;
    double theta = pi.theta(s);
    return a == pi.left_action() ? 1.0 / (0.5 + theta) : -1.0 / (0.5 - theta);
}

/// The parameterization the two-terminal corridor task uses: every
/// non-terminal cell is centered except the first, which is pinned to
/// "always right".
inline ThetaPolicy theta_policy_for_env(const EnvSpec& env, ClipMode mode) {
    ThetaPolicy pi(env.model, mode);
    if (env.name == "grid1d8_two_terminal")
        pi.set_fixed_right(env.model.state("s1").index);
    return pi;
}

namespace detail {

struct PgStep {
    int state;
    int action;
    double reward;
    int next;
};

inline std::vector<PgStep> sample_pg_episode(const EnvSpec& env,
                                             const ThetaPolicy& pi,
                                             int max_steps, Rng& rng) {
    const TransitionModel& m = env.model;
    const auto& starts = env.start_states;
    int s = starts.size() == 1
                ? starts[0]
                : starts[static_cast<size_t>(
                      rng.uniform_int(static_cast<int>(starts.size())))];
    std::vector<PgStep> steps;
    for (int t = 0; t < max_steps; ++t) {
        int a = pi.sample_action(s, rng);
        TransitionModel::Outcome o = m.sample(s, a, rng);
        steps.push_back({s, a, o.reward, o.next});
        s = o.next;
        if (m.is_terminal(s)) break;
    }
    return steps;
}

inline std::vector<PgStep> steps_from_trajectory(const EnvSpec& env,
                                                 const Trajectory& tr,
                                                 bool need_successors) {
    if (need_successors && !tr.terminated)
        throw std::invalid_argument(
            "supplied trajectory must be terminated; the successor of its "
            "last step is otherwise unknown");
    std::vector<PgStep> steps;
    for (size_t t = 0; t < tr.steps.size(); ++t) {
        int next = t + 1 < tr.steps.size() ? tr.steps[t + 1].state : -1;
        // -1 marks the terminal successor of the final step.
        steps.push_back({tr.steps[t].state, tr.steps[t].action,
                         tr.steps[t].reward, next});
    }
    (void)env;
    return steps;
}

inline std::vector<double> suffix_returns(const std::vector<PgStep>& steps,
                                          double gamma) {
    std::vector<double> g(steps.size(), 0.0);
    double acc = 0.0;
    for (int t = static_cast<int>(steps.size()) - 1; t >= 0; --t) {
        acc = steps[t].reward + gamma * acc;
        g[t] = acc;
    }
    return g;
}

} // namespace detail

struct ReinforceResult {
    ThetaPolicy policy;
    std::vector<double> episode_returns;  // G_0 per episode
};

/// Monte Carlo policy gradient: after each episode, every visited step t
/// applies theta_{s_t} <- clip(theta_{s_t} + alpha G_t d log pi(a_t|s_t)),
/// with G_t the discounted return from t. When trajectories are supplied
/// they are replayed once each, in order, and no randomness is consumed.
inline ReinforceResult reinforce(
    const EnvSpec& env, ThetaPolicy policy, double alpha, double gamma,
    long episodes, Rng& rng, int max_steps = 200,
    const std::vector<Trajectory>* supplied = nullptr) {
    if (alpha <= 0.0) throw std::invalid_argument("alpha must be positive");
    ReinforceResult res{std::move(policy), {}};
    long total = supplied ? static_cast<long>(supplied->size()) : episodes;
    for (long e = 0; e < total; ++e) {
        std::vector<detail::PgStep> steps =
            supplied ? detail::steps_from_trajectory(env, (*supplied)[e],
                                                     /*need_successors=*/false)
                     : detail::sample_pg_episode(env, res.policy, max_steps, rng);
        std::vector<double> g = detail::suffix_returns(steps, gamma);
        for (size_t t = 0; t < steps.size(); ++t) {
            if (res.policy.kind(steps[t].state) !=
                ThetaPolicy::RowKind::centered)
                continue;
            double grad =
                log_policy_grad(res.policy, steps[t].state, steps[t].action);
            res.policy.update_theta(steps[t].state, alpha * g[t] * grad);
        }
        res.episode_returns.push_back(steps.empty() ? 0.0 : g[0]);
    }
    return res;
}

/// Tabular critic: per-state value estimates with their own step size.
/// Terminal states stay at zero.
struct CriticTable {
    std::vector<double> values;
    double beta = 0.1;

    CriticTable(int num_states, double beta_) : values(num_states, 0.0),
                                                beta(beta_) {}
};

/// Everything one actor-critic step touched, before and after.
struct StepRecord {
    int state;
    int action;
    double reward;
    double delta;         // TD error driving the critic update
    double advantage;     // advantage used by the actor update
    double theta_before;
    double theta_after;
    double v_before;
    double v_after;
};

enum class AcMode { online, paper_trace };

struct ActorCriticResult {
    ThetaPolicy policy;
    CriticTable critic;
    std::vector<StepRecord> trace;
    std::vector<double> episode_returns;
};

/// Actor-critic on the theta-parameterized grid policy.
///
/// online: after each transition, the TD error delta = r + gamma v(s') - v(s)
/// updates the critic (v(s) += beta delta) and then, serving as the
/// advantage, the actor.
///
/// paper_trace: per trajectory, two passes. The first applies every critic
/// update along the trajectory in order; the second recomputes each step's
/// advantage from the updated critic and applies the actor updates. With a
/// supplied trajectory this consumes no randomness.
inline ActorCriticResult actor_critic(
    const EnvSpec& env, ThetaPolicy policy, CriticTable critic, double alpha,
    double beta, double gamma, long episodes, Rng& rng, AcMode mode,
    int max_steps = 200, const std::vector<Trajectory>* supplied = nullptr) {
    const TransitionModel& m = env.model;
    critic.beta = beta;
    ActorCriticResult res{std::move(policy), std::move(critic), {}, {}};

    auto next_value = [&](int next) {
        return (next < 0 || m.is_terminal(next)) ? 0.0 : res.critic.values[next];
    };
    auto actor_update = [&](detail::PgStep const& st, double advantage,
                            StepRecord& rec) {
        rec.advantage = advantage;
        rec.theta_before = res.policy.theta(st.state);
        if (res.policy.kind(st.state) == ThetaPolicy::RowKind::centered) {
            double grad = log_policy_grad(res.policy, st.state, st.action);
            res.policy.update_theta(st.state, alpha * advantage * grad);
        }
        rec.theta_after = res.policy.theta(st.state);
    };

    long total = supplied ? static_cast<long>(supplied->size()) : episodes;
    for (long e = 0; e < total; ++e) {
        std::vector<detail::PgStep> steps =
            supplied ? detail::steps_from_trajectory(env, (*supplied)[e],
                                                     /*need_successors=*/true)
                     : detail::sample_pg_episode(env, res.policy, max_steps, rng);
        size_t base = res.trace.size();
        if (mode == AcMode::online) {
            for (const auto& st : steps) {
                StepRecord rec{};
                rec.state = st.state;
                rec.action = st.action;
                rec.reward = st.reward;
                rec.v_before = res.critic.values[st.state];
                rec.delta = st.reward + gamma * next_value(st.next) -
                            res.critic.values[st.state];
                res.critic.values[st.state] += beta * rec.delta;
                rec.v_after = res.critic.values[st.state];
                actor_update(st, rec.delta, rec);
                res.trace.push_back(rec);
            }
        } else {
            // critic pass
            for (const auto& st : steps) {
                StepRecord rec{};
                rec.state = st.state;
                rec.action = st.action;
                rec.reward = st.reward;
                rec.v_before = res.critic.values[st.state];
                rec.delta = st.reward + gamma * next_value(st.next) -
                            res.critic.values[st.state];
                res.critic.values[st.state] += beta * rec.delta;
                rec.v_after = res.critic.values[st.state];
                res.trace.push_back(rec);
            }
            // advantage + actor pass against the updated critic
            for (size_t t = 0; t < steps.size(); ++t) {
                const auto& st = steps[t];
                double advantage = st.reward + gamma * next_value(st.next) -
                                   res.critic.values[st.state];
                actor_update(st, advantage, res.trace[base + t]);
            }
        }
        std::vector<double> g = detail::suffix_returns(steps, gamma);
        res.episode_returns.push_back(steps.empty() ? 0.0 : g[0]);
    }
    return res;
}

} // namespace tabrl
