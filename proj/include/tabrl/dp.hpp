#pragma once

#include <Eigen/Dense>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tabrl/mdp.hpp"

namespace tabrl {

/// Non-terminal states from which no terminal state is reachable along the
/// policy's support. Empty iff the policy is proper on this model.
inline std::vector<int> nonterminating_states(const TransitionModel& m,
                                              const TabularPolicy& pi) {
    int n = m.num_states();
    // reverse adjacency over positive-probability transitions under pi
    std::vector<std::vector<int>> rev(n);
    for (int s : m.nonterminal_states())
        for (const auto& [a, p] : pi.row(s)) {
            if (p <= 0.0 || !m.has_row(s, a)) continue;
            for (const auto& o : m.row(s, a))
                if (o.prob > 0.0) rev[o.next].push_back(s);
        }
    std::vector<char> reaches(n, 0);
    std::deque<int> queue;
    for (int s = 0; s < n; ++s)
        if (m.is_terminal(s)) {
            reaches[s] = 1;
            queue.push_back(s);
        }
    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        for (int p : rev[s])
            if (!reaches[p]) {
                reaches[p] = 1;
                queue.push_back(p);
            }
    }
    std::vector<int> out;
    for (int s : m.nonterminal_states())
        if (!reaches[s]) out.push_back(s);
    return out;
}

/// One synchronous Bellman backup for state s under pi:
///   sum_a pi(a|s) sum_{s',r} p(s',r|s,a) [r + gamma v(s')].
/// Terminal states back up to zero.
inline double bellman_backup(const TransitionModel& m, const TabularPolicy& pi,
                             const ValueTable& v, double gamma, int s) {
    if (m.is_terminal(s)) return 0.0;
    double out = 0.0;
    for (const auto& [a, p] : pi.row(s)) {
        if (p == 0.0) continue;
        if (!m.has_row(s, a))
            throw ModelInconsistencyError(
                "policy puts probability on (" + m.state_label(s) + ", " +
                m.action_label(a) + ") but the model has no such row");
        for (const auto& o : m.row(s, a))
            out += p * o.prob * (o.reward + gamma * v[o.next]);
    }
    return out;
}

/// Max-backup over the defined actions at s (terminal states give zero).
inline double optimal_backup(const TransitionModel& m, const ValueTable& v,
                             double gamma, int s) {
    if (m.is_terminal(s)) return 0.0;
    double best = 0.0;
    bool first = true;
    for (int a : m.actions_at(s)) {
        double q = 0.0;
        for (const auto& o : m.row(s, a))
            q += o.prob * (o.reward + gamma * v[o.next]);
        if (first || q > best) {
            best = q;
            first = false;
        }
    }
    return best;
}

/// Solves v = r_pi + gamma P_pi v exactly (dense LU) with terminal rows
/// pinned to zero. At gamma = 1 the policy must be proper; otherwise the
/// system is singular and the error names the states that cannot terminate.
inline ValueTable analytic_policy_evaluation(const TransitionModel& m,
                                             const TabularPolicy& pi,
                                             double gamma) {
    if (gamma >= 1.0) {
        std::vector<int> stuck = nonterminating_states(m, pi);
        if (!stuck.empty()) {
            std::string msg =
                "singular Bellman system at gamma = 1: no terminal state is "
                "reachable from";
            for (int s : stuck) msg += " " + m.state_label(s);
            throw SingularSystemError(msg);
        }
    }

    std::vector<int> free_states = m.nonterminal_states();
    int n = static_cast<int>(free_states.size());
    std::vector<int> pos(m.num_states(), -1);
    for (int i = 0; i < n; ++i) pos[free_states[i]] = i;

    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        int s = free_states[i];
        for (const auto& [a, p] : pi.row(s)) {
            if (p == 0.0) continue;
            if (!m.has_row(s, a))
                throw ModelInconsistencyError(
                    "policy puts probability on (" + m.state_label(s) + ", " +
                    m.action_label(a) + ") but the model has no such row");
            for (const auto& o : m.row(s, a)) {
                b(i) += p * o.prob * o.reward;
                if (pos[o.next] >= 0) A(i, pos[o.next]) -= gamma * p * o.prob;
            }
        }
    }

    Eigen::VectorXd x = A.partialPivLu().solve(b);
    if (!x.allFinite())
        throw SingularSystemError(
            "singular Bellman system: dense solve produced non-finite values");

    ValueTable v(m.num_states(), 0.0);
    for (int i = 0; i < n; ++i) v[free_states[i]] = x(i);
    return v;
}

struct IterativeEvalResult {
    ValueTable values;
    int sweeps = 0;
    bool converged = false;
    std::vector<double> sup_diffs;  // per-sweep max |v^{k+1} - v^k|
};

/// Synchronous (full-sweep) iterative policy evaluation from v0 (default all
/// zeros) until the sup-norm change drops below tol or max_sweeps runs out.
inline IterativeEvalResult iterative_policy_evaluation(
    const TransitionModel& m, const TabularPolicy& pi, double gamma, double tol,
    int max_sweeps, const std::optional<ValueTable>& v0 = std::nullopt) {
    if (tol <= 0.0) throw std::invalid_argument("tol must be positive");
    IterativeEvalResult res;
    res.values = v0 ? *v0 : ValueTable(m.num_states(), 0.0);
    ValueTable next(m.num_states(), 0.0);
    for (int k = 0; k < max_sweeps; ++k) {
        for (int s = 0; s < m.num_states(); ++s)
            next[s] = bellman_backup(m, pi, res.values, gamma, s);
        double diff = next.sup_distance(res.values);
        res.values = next;
        res.sup_diffs.push_back(diff);
        ++res.sweeps;
        if (diff < tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

/// One-step lookahead: q(s,a) = sum_{s',r} p(s',r|s,a) [r + gamma v(s')].
inline QTable q_from_v(const TransitionModel& m, const ValueTable& v,
                       double gamma) {
    QTable q(m);
    for (int s : m.nonterminal_states())
        for (int a : m.actions_at(s)) {
            double sum = 0.0;
            for (const auto& o : m.row(s, a))
                sum += o.prob * (o.reward + gamma * v[o.next]);
            q.at(s, a) = sum;
        }
    return q;
}

/// Deterministic policy putting probability 1 on argmax_a q(s,a); ties go to
/// the lowest action index.
inline TabularPolicy greedy_policy(const QTable& q) {
    TabularPolicy pi(q.num_states(), q.num_actions());
    for (int s = 0; s < q.num_states(); ++s)
        if (q.has_rows_at(s)) pi.set(s, q.argmax_at(s), 1.0);
    return pi;
}

struct PolicyIterationResult {
    TabularPolicy policy;
    ValueTable values;
    int iterations = 0;
    bool converged = false;
    std::vector<ValueTable> round_values;  // v_{pi_k} for each round
};

/// Alternates full policy evaluation and greedy improvement until the policy
/// is stable. Evaluation is analytic; when the current policy is improper at
/// gamma = 1 (where the linear system is singular) the round falls back to
/// capped synchronous backups, whose ever-sinking values on the
/// non-terminating states steer the next improvement out of them.
inline PolicyIterationResult policy_iteration(
    const TransitionModel& m, double gamma, double tol, int max_sweeps = 10000,
    std::optional<TabularPolicy> initial = std::nullopt) {
    PolicyIterationResult res;
    res.policy = initial ? *initial : TabularPolicy::uniform_over(m);
    const int max_rounds = 1000;
    for (int round = 0; round < max_rounds; ++round) {
        if (gamma >= 1.0 && !nonterminating_states(m, res.policy).empty())
            res.values =
                iterative_policy_evaluation(m, res.policy, gamma, tol, max_sweeps)
                    .values;
        else
            res.values = analytic_policy_evaluation(m, res.policy, gamma);
        res.round_values.push_back(res.values);
        ++res.iterations;
        TabularPolicy improved = greedy_policy(q_from_v(m, res.values, gamma));
        if (improved == res.policy) {
            res.converged = true;
            break;
        }
        res.policy = improved;
    }
    return res;
}

struct ValueIterationResult {
    ValueTable values;
    TabularPolicy policy;
    int sweeps = 0;
    bool converged = false;
    std::vector<double> sup_diffs;
};

/// Synchronous max-backups until the sup-norm change drops below tol; the
/// greedy policy is read off the final table.
inline ValueIterationResult value_iteration(const TransitionModel& m,
                                            double gamma, double tol,
                                            int max_sweeps = 10000) {
    if (tol <= 0.0) throw std::invalid_argument("tol must be positive");
    ValueIterationResult res;
    res.values = ValueTable(m.num_states(), 0.0);
    ValueTable next(m.num_states(), 0.0);
    for (int k = 0; k < max_sweeps; ++k) {
        for (int s = 0; s < m.num_states(); ++s)
            next[s] = optimal_backup(m, res.values, gamma, s);
        double diff = next.sup_distance(res.values);
        res.values = next;
        res.sup_diffs.push_back(diff);
        ++res.sweeps;
        if (diff < tol) {
            res.converged = true;
            break;
        }
    }
    res.policy = greedy_policy(q_from_v(m, res.values, gamma));
    return res;
}

struct FixedPointResult {
    double x = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Plain fixed-point iteration x_{k+1} = f(x_k), stopping when
/// |x_{k+1} - x_k| < tol or after max_iter steps.
inline FixedPointResult fixed_point(const std::function<double(double)>& f,
                                    double x0, double tol, int max_iter) {
    FixedPointResult res;
    res.x = x0;
    for (int k = 0; k < max_iter; ++k) {
        double next = f(res.x);
        double change = std::abs(next - res.x);
        res.x = next;
        ++res.iterations;
        if (change < tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

} // namespace tabrl
