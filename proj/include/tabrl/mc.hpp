#pragma once

#include <set>
#include <vector>

#include "tabrl/mdp.hpp"

namespace tabrl {

enum class VisitMode { first_visit, every_visit };

/// Running per-state return sums and visit counts. Merging two accumulators
/// is associative and commutative, so episode batches can be generated in
/// parallel and combined.
struct ReturnAccumulator {
    std::vector<double> sums;
    std::vector<long> counts;

    explicit ReturnAccumulator(int num_states)
        : sums(num_states, 0.0), counts(num_states, 0) {}

    void add(int s, double g) {
        sums[s] += g;
        counts[s] += 1;
    }

    void merge(const ReturnAccumulator& other) {
        for (size_t s = 0; s < sums.size(); ++s) {
            sums[s] += other.sums[s];
            counts[s] += other.counts[s];
        }
    }
};

struct McResult {
    ValueTable values;          // mean return per visited state
    std::vector<long> counts;   // N(s); zero where unvisited
    std::set<int> visited;      // states with counts > 0
    bool empty_estimate = false;
};

namespace detail {

/// Accumulates one episode's qualifying returns. Returns are formed backward
/// in a single pass, so G_t = r_{t+1} + gamma G_{t+1} holds step by step.
/// First-visit mode credits a state only at its earliest occurrence.
inline void accumulate_episode(const Trajectory& tr, double gamma,
                               VisitMode mode, ReturnAccumulator& acc,
                               std::vector<int>& first_seen_scratch) {
    const auto& steps = tr.steps;
    if (mode == VisitMode::first_visit) {
        for (size_t t = 0; t < steps.size(); ++t) {
            int& seen = first_seen_scratch[steps[t].state];
            if (seen < 0) seen = static_cast<int>(t);
        }
    }
    double g = 0.0;
    for (int t = static_cast<int>(steps.size()) - 1; t >= 0; --t) {
        g = steps[t].reward + gamma * g;
        int s = steps[t].state;
        if (mode == VisitMode::every_visit || first_seen_scratch[s] == t)
            acc.add(s, g);
    }
    if (mode == VisitMode::first_visit)
        for (const TrajectoryStep& st : steps) first_seen_scratch[st.state] = -1;
}

inline McResult finish(const ReturnAccumulator& acc) {
    McResult res;
    int n = static_cast<int>(acc.sums.size());
    res.values = ValueTable(n, 0.0);
    res.counts = acc.counts;
    for (int s = 0; s < n; ++s)
        if (acc.counts[s] > 0) {
            res.values[s] = acc.sums[s] / acc.counts[s];
            res.visited.insert(s);
        }
    res.empty_estimate = res.visited.empty();
    return res;
}

} // namespace detail

/// Start-state distribution: (state, probability) pairs.
using StartDistribution = std::vector<std::pair<int, double>>;

inline StartDistribution uniform_starts(const TransitionModel& m) {
    StartDistribution d;
    auto states = m.nonterminal_states();
    for (int s : states) d.emplace_back(s, 1.0 / states.size());
    return d;
}

/// Monte Carlo policy evaluation: samples episodes under pi and averages the
/// observed returns per state, first-visit or every-visit. States never
/// visited are absent from the result (reported via the visited set), not
/// zero-filled.
inline McResult mc_evaluate(const TransitionModel& m, const TabularPolicy& pi,
                            double gamma, long episodes, VisitMode mode,
                            int max_steps, Rng& rng,
                            const std::optional<StartDistribution>& starts =
                                std::nullopt) {
    if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
    StartDistribution start_dist = starts ? *starts : uniform_starts(m);

    ReturnAccumulator acc(m.num_states());
    std::vector<int> first_seen(m.num_states(), -1);
    for (long e = 0; e < episodes; ++e) {
        double u = rng.uniform();
        double cum = 0.0;
        int start = start_dist.back().first;
        for (const auto& [s, p] : start_dist) {
            cum += p;
            if (u < cum) {
                start = s;
                break;
            }
        }
        Trajectory tr = rollout(m, pi, start, max_steps, rng);
        detail::accumulate_episode(tr, gamma, mode, acc, first_seen);
    }
    return detail::finish(acc);
}

/// Same estimator over externally supplied trajectories; no sampling.
inline McResult mc_replay(const std::vector<Trajectory>& trajectories,
                          int num_states, double gamma, VisitMode mode) {
    ReturnAccumulator acc(num_states);
    std::vector<int> first_seen(num_states, -1);
    for (const Trajectory& tr : trajectories)
        detail::accumulate_episode(tr, gamma, mode, acc, first_seen);
    return detail::finish(acc);
}

} // namespace tabrl
