#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tabrl/errors.hpp"
#include "tabrl/rng.hpp"

namespace tabrl {

/// Tolerance used everywhere a probability distribution must sum to one.
inline constexpr double kProbTolerance = 1e-12;

/// Resolved state handle: index into the model's state list plus its label.
struct StateId {
    int index = -1;
    std::string label;
    friend bool operator==(const StateId&, const StateId&) = default;
};

/// Resolved action handle.
struct ActionId {
    int index = -1;
    std::string label;
    friend bool operator==(const ActionId&, const ActionId&) = default;
};

// ---------------------------------------------------------------------------
// TransitionModel
// ---------------------------------------------------------------------------

/// Finite MDP dynamics: per (state, action) a list of (next state, reward,
/// probability) outcomes, a terminal-state set, and a default discount.
///
/// Rewards live on transitions, so "reward on entering the terminal" is
/// encoded on the arcs that lead into it. Construction validates the model
/// and rejects it rather than renormalizing: each non-terminal row must sum
/// to one within 1e-12, probabilities must be non-negative, rewards finite,
/// terminal states must have no outgoing rows, and every non-terminal state
/// must define at least one action.
class TransitionModel {
  public:
    struct Outcome {
        int next;
        double reward;
        double prob;
        friend bool operator==(const Outcome&, const Outcome&) = default;
    };

    class Builder;

    /// Empty model; assign one produced by a Builder before use.
    TransitionModel() = default;

    int num_states() const { return static_cast<int>(state_labels_.size()); }
    int num_actions() const { return static_cast<int>(action_labels_.size()); }

    const std::string& state_label(int s) const { return state_labels_.at(s); }
    const std::string& action_label(int a) const { return action_labels_.at(a); }

    /// Resolves a state label; throws UnknownNameError with the valid labels.
    StateId state(std::string_view label) const {
        for (int i = 0; i < num_states(); ++i)
            if (state_labels_[i] == label) return {i, state_labels_[i]};
        throw UnknownNameError("unknown state '" + std::string(label) +
                               "'; valid states: " + join(state_labels_));
    }

    ActionId action(std::string_view label) const {
        for (int i = 0; i < num_actions(); ++i)
            if (action_labels_[i] == label) return {i, action_labels_[i]};
        throw UnknownNameError("unknown action '" + std::string(label) +
                               "'; valid actions: " + join(action_labels_));
    }

    bool is_terminal(int s) const { return terminal_.at(s) != 0; }

    bool has_row(int s, int a) const {
        return s >= 0 && s < num_states() && a >= 0 && a < num_actions() &&
               !rows_[idx(s, a)].empty();
    }

    /// Outcome list for a defined (s, a) row.
    std::span<const Outcome> row(int s, int a) const {
        const auto& r = rows_.at(idx(s, a));
        if (r.empty())
            throw ModelInconsistencyError(
                "no transition row for (" + state_label(s) + ", " +
                action_label(a) + ")");
        return r;
    }

    /// Action indices defined at s, ascending. Empty for terminal states.
    const std::vector<int>& actions_at(int s) const { return actions_at_.at(s); }

    std::vector<int> nonterminal_states() const {
        std::vector<int> out;
        for (int s = 0; s < num_states(); ++s)
            if (!is_terminal(s)) out.push_back(s);
        return out;
    }

    double gamma_default() const { return gamma_default_; }

    /// Marginal next-state distribution p(s'|s,a), i.e. rewards summed out.
    std::vector<double> state_marginal(int s, int a) const {
        std::vector<double> p(num_states(), 0.0);
        for (const Outcome& o : row(s, a)) p[o.next] += o.prob;
        return p;
    }

    /// Samples (next, reward) from the row for (s, a). One uniform draw.
    Outcome sample(int s, int a, Rng& rng) const {
        std::span<const Outcome> r = row(s, a);
        double u = rng.uniform();
        double acc = 0.0;
        for (const Outcome& o : r) {
            acc += o.prob;
            if (u < acc) return o;
        }
        return r.back();
    }

    friend bool operator==(const TransitionModel&, const TransitionModel&) = default;

  private:
    friend class Builder;

    int idx(int s, int a) const { return s * num_actions() + a; }

    static std::string join(const std::vector<std::string>& v) {
        std::string out;
        for (size_t i = 0; i < v.size(); ++i) {
            if (i) out += ", ";
            out += v[i];
        }
        return out;
    }

    std::vector<std::string> state_labels_;
    std::vector<std::string> action_labels_;
    std::vector<char> terminal_;
    std::vector<std::vector<Outcome>> rows_;  // indexed s * num_actions + a
    std::vector<std::vector<int>> actions_at_;
    double gamma_default_ = 1.0;
};

class TransitionModel::Builder {
  public:
    Builder(std::vector<std::string> state_labels,
            std::vector<std::string> action_labels, double gamma_default = 1.0) {
        m_.state_labels_ = std::move(state_labels);
        m_.action_labels_ = std::move(action_labels);
        m_.gamma_default_ = gamma_default;
        m_.terminal_.assign(m_.num_states(), 0);
        m_.rows_.assign(
            static_cast<size_t>(m_.num_states()) * m_.num_actions(), {});
        m_.actions_at_.assign(m_.num_states(), {});
    }

    Builder& terminal(std::string_view state) {
        m_.terminal_[m_.state(state).index] = 1;
        return *this;
    }

    /// Adds the outcome list for one (state, action) row.
    /// Each outcome is (next label, reward, probability).
    Builder& add(std::string_view state, std::string_view action,
                 std::vector<std::tuple<std::string, double, double>> outcomes) {
        int s = m_.state(state).index;
        int a = m_.action(action).index;
        auto& row = m_.rows_[m_.idx(s, a)];
        for (auto& [next, reward, prob] : outcomes)
            row.push_back({m_.state(next).index, reward, prob});
        return *this;
    }

    /// Validates and produces the model; throws ValidationError on any defect.
    TransitionModel build() && {
        std::vector<std::string> defects;
        if (m_.gamma_default_ < 0.0 || m_.gamma_default_ > 1.0)
            defects.push_back("gamma_default outside [0, 1]");
        {
            auto sorted = m_.state_labels_;
            std::sort(sorted.begin(), sorted.end());
            if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
                defects.push_back("duplicate state labels");
        }
        for (int s = 0; s < m_.num_states(); ++s) {
            for (int a = 0; a < m_.num_actions(); ++a) {
                const auto& row = m_.rows_[m_.idx(s, a)];
                if (row.empty()) continue;
                if (m_.is_terminal(s)) {
                    defects.push_back("terminal state " + m_.state_label(s) +
                                      " has an outgoing row");
                    continue;
                }
                double sum = 0.0;
                for (const Outcome& o : row) {
                    if (o.prob < 0.0)
                        defects.push_back("negative probability at (" +
                                          m_.state_label(s) + ", " +
                                          m_.action_label(a) + ")");
                    if (!std::isfinite(o.reward))
                        defects.push_back("non-finite reward at (" +
                                          m_.state_label(s) + ", " +
                                          m_.action_label(a) + ")");
                    sum += o.prob;
                }
                if (std::abs(sum - 1.0) > kProbTolerance)
                    defects.push_back("probabilities at (" + m_.state_label(s) +
                                      ", " + m_.action_label(a) +
                                      ") sum to " + std::to_string(sum));
                m_.actions_at_[s].push_back(a);
            }
            if (!m_.is_terminal(s) && m_.actions_at_[s].empty())
                defects.push_back("non-terminal state " + m_.state_label(s) +
                                  " defines no actions");
        }
        if (!defects.empty()) {
            std::string msg = "invalid transition model:";
            for (const auto& d : defects) msg += "\n  - " + d;
            throw ValidationError(msg);
        }
        return std::move(m_);
    }

  private:
    TransitionModel m_;
};

// ---------------------------------------------------------------------------
// TabularPolicy
// ---------------------------------------------------------------------------

/// Per-state probability distribution over actions. Terminal states carry an
/// empty row. Rows keep their entries sorted by action index.
class TabularPolicy {
  public:
    TabularPolicy() = default;
    TabularPolicy(int num_states, int num_actions)
        : num_actions_(num_actions), rows_(num_states) {}

    int num_states() const { return static_cast<int>(rows_.size()); }
    int num_actions() const { return num_actions_; }

    void set(int s, int a, double p) {
        auto& row = rows_.at(s);
        auto it = std::lower_bound(
            row.begin(), row.end(), a,
            [](const auto& e, int key) { return e.first < key; });
        if (it != row.end() && it->first == a)
            it->second = p;
        else
            row.insert(it, {a, p});
    }

    double prob(int s, int a) const {
        for (const auto& [act, p] : rows_.at(s))
            if (act == a) return p;
        return 0.0;
    }

    const std::vector<std::pair<int, double>>& row(int s) const {
        return rows_.at(s);
    }

    /// Samples an action from the row at s. One uniform draw.
    int sample(int s, Rng& rng) const {
        const auto& row = rows_.at(s);
        if (row.empty())
            throw ModelInconsistencyError("policy has no row for state index " +
                                          std::to_string(s));
        double u = rng.uniform();
        double acc = 0.0;
        for (const auto& [a, p] : row) {
            acc += p;
            if (u < acc) return a;
        }
        return row.back().first;
    }

    /// Uniform distribution over the actions the model defines at each
    /// non-terminal state.
    static TabularPolicy uniform_over(const TransitionModel& m) {
        TabularPolicy pi(m.num_states(), m.num_actions());
        for (int s : m.nonterminal_states()) {
            const auto& acts = m.actions_at(s);
            for (int a : acts) pi.set(s, a, 1.0 / acts.size());
        }
        return pi;
    }

    /// Deterministic policy from a per-state action choice (-1 for terminal).
    static TabularPolicy deterministic(const TransitionModel& m,
                                       const std::vector<int>& choice) {
        TabularPolicy pi(m.num_states(), m.num_actions());
        for (int s = 0; s < m.num_states(); ++s)
            if (!m.is_terminal(s)) pi.set(s, choice.at(s), 1.0);
        return pi;
    }

    friend bool operator==(const TabularPolicy&, const TabularPolicy&) = default;

  private:
    int num_actions_ = 0;
    std::vector<std::vector<std::pair<int, double>>> rows_;
};

// ---------------------------------------------------------------------------
// Policy validation
// ---------------------------------------------------------------------------

struct PolicyIssue {
    enum class Kind { not_normalized, negative_probability, terminal_not_empty };
    int state;
    std::string state_label;
    Kind kind;
    std::string detail;
};

/// Diagnostic report from validate_policy. Empty iff the policy is valid.
struct PolicyValidationReport {
    std::vector<PolicyIssue> issues;
    bool ok() const { return issues.empty(); }
    bool names(int state) const {
        return std::any_of(issues.begin(), issues.end(),
                           [&](const PolicyIssue& i) { return i.state == state; });
    }
};

inline PolicyValidationReport validate_policy(const TabularPolicy& pi,
                                              const TransitionModel& m) {
    PolicyValidationReport report;
    for (int s = 0; s < m.num_states(); ++s) {
        const auto& row = pi.row(s);
        if (m.is_terminal(s)) {
            if (!row.empty())
                report.issues.push_back({s, m.state_label(s),
                                         PolicyIssue::Kind::terminal_not_empty,
                                         "terminal state must map to the empty "
                                         "distribution"});
            continue;
        }
        double sum = 0.0;
        bool negative = false;
        for (const auto& [a, p] : row) {
            if (p < 0.0) negative = true;
            sum += p;
        }
        if (negative)
            report.issues.push_back({s, m.state_label(s),
                                     PolicyIssue::Kind::negative_probability,
                                     "negative action probability"});
        if (std::abs(sum - 1.0) > kProbTolerance)
            report.issues.push_back({s, m.state_label(s),
                                     PolicyIssue::Kind::not_normalized,
                                     "probabilities sum to " +
                                         std::to_string(sum)});
    }
    return report;
}

// ---------------------------------------------------------------------------
// Value and action-value tables
// ---------------------------------------------------------------------------

/// Per-state scalar estimates. Terminal states are pinned to zero by the
/// algorithms that produce these; the container itself is a plain table.
class ValueTable {
  public:
    ValueTable() = default;
    explicit ValueTable(int num_states, double init = 0.0)
        : v_(num_states, init) {}
    ValueTable(std::initializer_list<double> init) : v_(init) {}

    int size() const { return static_cast<int>(v_.size()); }
    double operator[](int s) const { return v_.at(s); }
    double& operator[](int s) { return v_.at(s); }

    double sup_distance(const ValueTable& other) const {
        double d = 0.0;
        for (int s = 0; s < size(); ++s)
            d = std::max(d, std::abs(v_[s] - other.v_[s]));
        return d;
    }

    const std::vector<double>& data() const { return v_; }

    friend bool operator==(const ValueTable&, const ValueTable&) = default;

  private:
    std::vector<double> v_;
};

/// Per-(state, action) estimates. Rows exist exactly for the non-terminal
/// (s, a) pairs the model defines; access to any other pair throws.
class QTable {
  public:
    explicit QTable(const TransitionModel& m, double init = 0.0)
        : num_states_(m.num_states()), num_actions_(m.num_actions()),
          q_(static_cast<size_t>(num_states_) * num_actions_, 0.0),
          defined_(q_.size(), 0) {
        for (int s : m.nonterminal_states())
            for (int a : m.actions_at(s)) {
                defined_[idx(s, a)] = 1;
                q_[idx(s, a)] = init;
            }
    }

    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }

    bool defined(int s, int a) const {
        return s >= 0 && s < num_states_ && a >= 0 && a < num_actions_ &&
               defined_[idx(s, a)] != 0;
    }

    double at(int s, int a) const {
        check(s, a);
        return q_[idx(s, a)];
    }
    double& at(int s, int a) {
        check(s, a);
        return q_[idx(s, a)];
    }

    /// Max over the defined actions at s.
    double max_at(int s) const {
        return q_[idx(s, argmax_at(s))];
    }

    /// Argmax over the defined actions at s; ties go to the lowest index.
    int argmax_at(int s) const {
        int best = -1;
        double best_q = 0.0;
        for (int a = 0; a < num_actions_; ++a) {
            if (!defined_[idx(s, a)]) continue;
            if (best < 0 || q_[idx(s, a)] > best_q) {
                best = a;
                best_q = q_[idx(s, a)];
            }
        }
        if (best < 0)
            throw std::out_of_range("no defined actions at state index " +
                                    std::to_string(s));
        return best;
    }

    /// All defined actions at s whose value ties the maximum within tol.
    std::vector<int> argmax_set_at(int s, double tol = 1e-9) const {
        double m = max_at(s);
        std::vector<int> out;
        for (int a = 0; a < num_actions_; ++a)
            if (defined_[idx(s, a)] && q_[idx(s, a)] >= m - tol) out.push_back(a);
        return out;
    }

    bool has_rows_at(int s) const {
        for (int a = 0; a < num_actions_; ++a)
            if (defined_[idx(s, a)]) return true;
        return false;
    }

  private:
    int idx(int s, int a) const { return s * num_actions_ + a; }
    void check(int s, int a) const {
        if (!defined(s, a))
            throw std::out_of_range("QTable has no row for state index " +
                                    std::to_string(s) + ", action index " +
                                    std::to_string(a));
    }

    int num_states_;
    int num_actions_;
    std::vector<double> q_;
    std::vector<char> defined_;
};

// ---------------------------------------------------------------------------
// Trajectories, returns, rollouts
// ---------------------------------------------------------------------------

struct TrajectoryStep {
    int state;
    int action;
    double reward;  // steps[t].reward is r_{t+1}
    friend bool operator==(const TrajectoryStep&, const TrajectoryStep&) = default;
};

/// One episode: ordered (state, action, reward) records. If terminated is
/// set, the successor of the last step is a terminal state.
struct Trajectory {
    std::vector<TrajectoryStep> steps;
    int start_state = -1;
    bool terminated = false;
    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Discounted sum of a reward sequence: sum_k gamma^k rewards[k].
/// Evaluated backward (Horner), so the recursion G_t = r_{t+1} + gamma G_{t+1}
/// holds exactly for every suffix. Empty input returns 0.
inline double discounted_return(std::span<const double> rewards, double gamma) {
    double g = 0.0;
    for (auto it = rewards.rbegin(); it != rewards.rend(); ++it)
        g = *it + gamma * g;
    return g;
}

inline double discounted_return(const std::vector<double>& rewards, double gamma) {
    return discounted_return(std::span<const double>(rewards), gamma);
}

/// Samples one episode: a ~ pi(.|s), then (s', r) ~ p(.,.|s,a), until a
/// terminal state or max_steps transitions. Deterministic given the seed.
inline Trajectory rollout(const TransitionModel& m, const TabularPolicy& pi,
                          int start, int max_steps, Rng& rng) {
    if (start < 0 || start >= m.num_states())
        throw std::invalid_argument("rollout: start state out of range");
    if (m.is_terminal(start))
        throw std::invalid_argument("rollout: start state " +
                                    m.state_label(start) + " is terminal");
    if (max_steps < 1)
        throw std::invalid_argument("rollout: max_steps must be >= 1");

    Trajectory tr;
    tr.start_state = start;
    int s = start;
    for (int t = 0; t < max_steps; ++t) {
        int a = pi.sample(s, rng);
        if (!m.has_row(s, a))
            throw ModelInconsistencyError("rollout: no transition row for (" +
                                          m.state_label(s) + ", " +
                                          m.action_label(a) + ")");
        TransitionModel::Outcome o = m.sample(s, a, rng);
        tr.steps.push_back({s, a, o.reward});
        s = o.next;
        if (m.is_terminal(s)) {
            tr.terminated = true;
            break;
        }
    }
    return tr;
}

inline Trajectory rollout(const TransitionModel& m, const TabularPolicy& pi,
                          const StateId& start, int max_steps, Rng& rng) {
    return rollout(m, pi, start.index, max_steps, rng);
}

} // namespace tabrl
