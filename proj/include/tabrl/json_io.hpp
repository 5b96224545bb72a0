#pragma once

#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabrl/mdp.hpp"

namespace tabrl {

using json = nlohmann::json;

/// Model schema mirrors the dictionary form the environments are written in:
/// state label -> action label -> list of [next, reward, probability]
/// outcomes, with terminal states carrying an empty object. "states" and
/// "actions" pin the index order.
inline json model_to_json(const TransitionModel& m) {
    json transitions = json::object();
    for (int s = 0; s < m.num_states(); ++s) {
        json row = json::object();
        for (int a : m.actions_at(s)) {
            json outcomes = json::array();
            for (const auto& o : m.row(s, a))
                outcomes.push_back(
                    {m.state_label(o.next), o.reward, o.prob});
            row[m.action_label(a)] = std::move(outcomes);
        }
        transitions[m.state_label(s)] = std::move(row);
    }
    return {{"states", [&] {
                 std::vector<std::string> v;
                 for (int s = 0; s < m.num_states(); ++s)
                     v.push_back(m.state_label(s));
                 return v;
             }()},
            {"actions", [&] {
                 std::vector<std::string> v;
                 for (int a = 0; a < m.num_actions(); ++a)
                     v.push_back(m.action_label(a));
                 return v;
             }()},
            {"gamma", m.gamma_default()},
            {"transitions", transitions}};
}

/// Accepts outcomes either as [next, reward, probability] or as the
/// shorthand [next, probability] (reward zero). A state with an empty
/// transitions object is terminal.
inline TransitionModel model_from_json(const json& j) {
    TransitionModel::Builder b(j.at("states").get<std::vector<std::string>>(),
                               j.at("actions").get<std::vector<std::string>>(),
                               j.value("gamma", 1.0));
    const json& transitions = j.at("transitions");
    for (const std::string& state :
         j.at("states").get<std::vector<std::string>>()) {
        const json& row = transitions.at(state);
        if (row.empty()) {
            b.terminal(state);
            continue;
        }
        for (const auto& [action, outcomes] : row.items()) {
            std::vector<std::tuple<std::string, double, double>> outs;
            for (const json& o : outcomes) {
                if (o.size() == 2)
                    outs.emplace_back(o.at(0).get<std::string>(), 0.0,
                                      o.at(1).get<double>());
                else
                    outs.emplace_back(o.at(0).get<std::string>(),
                                      o.at(1).get<double>(),
                                      o.at(2).get<double>());
            }
            b.add(state, action, std::move(outs));
        }
    }
    return std::move(b).build();
}

/// state label -> action label -> probability; terminals are empty objects.
inline json policy_to_json(const TransitionModel& m, const TabularPolicy& pi) {
    json out = json::object();
    for (int s = 0; s < m.num_states(); ++s) {
        json row = json::object();
        for (const auto& [a, p] : pi.row(s)) row[m.action_label(a)] = p;
        out[m.state_label(s)] = std::move(row);
    }
    return out;
}

inline TabularPolicy policy_from_json(const TransitionModel& m, const json& j) {
    TabularPolicy pi(m.num_states(), m.num_actions());
    for (const auto& [state, row] : j.items()) {
        int s = m.state(state).index;
        for (const auto& [action, p] : row.items())
            pi.set(s, m.action(action).index, p.get<double>());
    }
    return pi;
}

/// state label -> value. Pass `only` to restrict to a visited set.
inline json values_to_json(const TransitionModel& m, const ValueTable& v,
                           const std::set<int>* only = nullptr) {
    json out = json::object();
    for (int s = 0; s < v.size(); ++s) {
        if (only && !only->count(s)) continue;
        out[m.state_label(s)] = v[s];
    }
    return out;
}

inline json qtable_to_json(const TransitionModel& m, const QTable& q) {
    json out = json::object();
    for (int s = 0; s < m.num_states(); ++s) {
        if (!q.has_rows_at(s)) continue;
        json row = json::object();
        for (int a = 0; a < m.num_actions(); ++a)
            if (q.defined(s, a)) row[m.action_label(a)] = q.at(s, a);
        out[m.state_label(s)] = std::move(row);
    }
    return out;
}

inline json trajectory_to_json(const TransitionModel& m, const Trajectory& tr) {
    json steps = json::array();
    for (const TrajectoryStep& st : tr.steps)
        steps.push_back({m.state_label(st.state), m.action_label(st.action),
                         st.reward});
    return {{"start", m.state_label(tr.start_state)},
            {"terminated", tr.terminated},
            {"steps", steps}};
}

inline Trajectory trajectory_from_json(const TransitionModel& m, const json& j) {
    Trajectory tr;
    tr.terminated = j.value("terminated", false);
    for (const json& st : j.at("steps"))
        tr.steps.push_back({m.state(st.at(0).get<std::string>()).index,
                            m.action(st.at(1).get<std::string>()).index,
                            st.at(2).get<double>()});
    if (j.contains("start"))
        tr.start_state = m.state(j.at("start").get<std::string>()).index;
    else if (!tr.steps.empty())
        tr.start_state = tr.steps.front().state;
    return tr;
}

} // namespace tabrl
