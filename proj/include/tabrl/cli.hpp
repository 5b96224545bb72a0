#pragma once

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tabrl/dp.hpp"
#include "tabrl/environments.hpp"
#include "tabrl/json_io.hpp"
#include "tabrl/mc.hpp"
#include "tabrl/mdp.hpp"
#include "tabrl/pg.hpp"
#include "tabrl/qubit.hpp"
#include "tabrl/td.hpp"

namespace tabrl::cli {

/// Everything a single run needs, echoed verbatim into the result.
struct RunConfig {
    std::string subcommand;
    std::string env = "grid1d9";
    std::uint64_t seed = 0;
    std::string policy_name = "uniform";
    std::string policy_file;
    std::string trajectory_file;
    std::string method = "analytic";   // dp eval: analytic | iterative
    std::string mode;                  // mc: first|every; pg ac: online|paper-trace
    std::string alpha_schedule = "fixed";
    double gamma = 1.0;
    double alpha = 0.1;
    double beta = 0.1;
    double epsilon = 0.1;
    std::optional<double> epsilon_decay;
    double tol = 1e-10;
    double sigma0 = 1.0;
    double q_init = 0.0;
    long episodes = 1000;
    int max_steps = 100;
    int max_sweeps = 10000;
    std::map<std::string, double> overrides;
    bool strict = false;
    int repeat = 1;
    std::string out_path;
    std::string format = "json";

    json echo() const {
        json j = {{"subcommand", subcommand}, {"seed", seed},
                  {"gamma", gamma},           {"format", format}};
        if (!env.empty() && subcommand.rfind("quantum", 0) != 0) j["env"] = env;
        if (!overrides.empty()) j["overrides"] = overrides;
        auto is = [&](const char* prefix) {
            return subcommand.rfind(prefix, 0) == 0;
        };
        if (is("dp") || is("mc") || is("td eval")) {
            if (policy_file.empty())
                j["policy"] = policy_name;
            else
                j["policy_file"] = policy_file;
        }
        if (is("dp")) {
            j["tol"] = tol;
            j["max_sweeps"] = max_sweeps;
            if (subcommand == "dp eval") j["method"] = method;
        }
        if (is("mc")) {
            j["mode"] = mode;
            j["episodes"] = episodes;
            j["max_steps"] = max_steps;
        }
        if (is("td")) {
            j["alpha"] = alpha;
            j["episodes"] = episodes;
            j["max_steps"] = max_steps;
            if (subcommand == "td eval") j["alpha_schedule"] = alpha_schedule;
            if (subcommand != "td eval") {
                j["epsilon"] = epsilon;
                if (epsilon_decay) j["epsilon_decay"] = *epsilon_decay;
                j["q_init"] = q_init;
            }
        }
        if (is("pg")) {
            j["alpha"] = alpha;
            j["episodes"] = episodes;
            j["max_steps"] = max_steps;
            if (subcommand == "pg ac") {
                j["beta"] = beta;
                j["mode"] = mode;
            }
            if (!trajectory_file.empty()) j["trajectory_file"] = trajectory_file;
        }
        if (is("quantum")) {
            j["alpha"] = alpha;
            j["beta"] = beta;
            j["sigma0"] = sigma0;
            j["episodes"] = episodes;
        }
        return j;
    }
};

namespace detail {

inline TabularPolicy resolve_policy(const EnvSpec& env, const RunConfig& cfg) {
    if (!cfg.policy_file.empty()) {
        std::ifstream in(cfg.policy_file);
        if (!in)
            throw std::invalid_argument("cannot open policy file '" +
                                        cfg.policy_file + "'");
        return policy_from_json(env.model, json::parse(in));
    }
    return named_policy(env, cfg.policy_name);
}

inline std::vector<Trajectory> load_trajectories(const EnvSpec& env,
                                                 const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open trajectory file '" + path +
                                    "'");
    json j = json::parse(in);
    std::vector<Trajectory> out;
    if (j.is_array())
        for (const json& t : j) out.push_back(trajectory_from_json(env.model, t));
    else
        out.push_back(trajectory_from_json(env.model, j));
    return out;
}

inline json theta_to_json(const TransitionModel& m, const ThetaPolicy& pi) {
    json out = json::object();
    for (int s = 0; s < m.num_states(); ++s)
        if (pi.kind(s) == ThetaPolicy::RowKind::centered)
            out[m.state_label(s)] = pi.theta(s);
    return out;
}

inline json theta_probs_to_json(const TransitionModel& m,
                                const ThetaPolicy& pi) {
    json out = json::object();
    for (int s = 0; s < m.num_states(); ++s) {
        if (m.is_terminal(s)) continue;
        ActionProbs p = pi.probs(s);
        out[m.state_label(s)] = {{"left", p.left}, {"right", p.right}};
    }
    return out;
}

inline json trace_to_json(const TransitionModel& m,
                          const std::vector<StepRecord>& trace) {
    json out = json::array();
    for (const StepRecord& r : trace)
        out.push_back({{"state", m.state_label(r.state)},
                       {"action", m.action_label(r.action)},
                       {"reward", r.reward},
                       {"delta", r.delta},
                       {"advantage", r.advantage},
                       {"theta_before", r.theta_before},
                       {"theta_after", r.theta_after},
                       {"v_before", r.v_before},
                       {"v_after", r.v_after}});
    return out;
}

inline json bloch_to_json(const QubitState& psi) {
    BlochVector b = bloch(psi);
    return json::array({b.x, b.y, b.z});
}

/// Runs one configured experiment; fills `converged` for --strict handling.
inline json run_once(const RunConfig& cfg, bool& converged) {
    converged = true;
    json result;

    if (cfg.subcommand == "quantum train") {
        Rng rng(cfg.seed);
        GaussianActor actor(0.0, cfg.sigma0, cfg.alpha, cfg.beta);
        QubitState initial = QubitState::ket0();
        QubitState target = QubitState::ket1();
        QubitTrainResult r =
            train_qubit_controller(initial, target, actor, cfg.episodes, rng);
        result["mu"] = r.actor.mu();
        result["sigma"] = r.actor.sigma();
        result["final_fidelity"] = r.final_fidelity;
        result["fidelity_history"] = r.fidelity_history;
        result["bloch_initial"] = bloch_to_json(initial);
        result["bloch_final"] = bloch_to_json(apply(rx(r.actor.mu()), initial));
        result["bloch_target"] = bloch_to_json(target);
        return result;
    }

    EnvSpec env = make_env(cfg.env, cfg.overrides);
    const TransitionModel& m = env.model;

    if (cfg.subcommand == "dp eval") {
        TabularPolicy pi = resolve_policy(env, cfg);
        if (cfg.method == "analytic") {
            ValueTable v = analytic_policy_evaluation(m, pi, cfg.gamma);
            result["values"] = values_to_json(m, v);
            result["policy"] = policy_to_json(m, pi);
            result["sweeps"] = 0;
            result["converged"] = true;
        } else {
            IterativeEvalResult r = iterative_policy_evaluation(
                m, pi, cfg.gamma, cfg.tol, cfg.max_sweeps);
            converged = r.converged;
            result["values"] = values_to_json(m, r.values);
            result["policy"] = policy_to_json(m, pi);
            result["sweeps"] = r.sweeps;
            result["converged"] = r.converged;
        }
    } else if (cfg.subcommand == "dp pi") {
        std::optional<TabularPolicy> initial;
        if (!cfg.policy_file.empty() || cfg.policy_name != "uniform")
            initial = resolve_policy(env, cfg);
        PolicyIterationResult r = policy_iteration(m, cfg.gamma, cfg.tol,
                                                   cfg.max_sweeps, initial);
        converged = r.converged;
        result["values"] = values_to_json(m, r.values);
        result["policy"] = policy_to_json(m, r.policy);
        result["sweeps"] = r.iterations;
        result["converged"] = r.converged;
    } else if (cfg.subcommand == "dp vi") {
        ValueIterationResult r =
            value_iteration(m, cfg.gamma, cfg.tol, cfg.max_sweeps);
        converged = r.converged;
        result["values"] = values_to_json(m, r.values);
        result["policy"] = policy_to_json(m, r.policy);
        result["sweeps"] = r.sweeps;
        result["converged"] = r.converged;
    } else if (cfg.subcommand == "mc") {
        TabularPolicy pi = resolve_policy(env, cfg);
        Rng rng(cfg.seed);
        VisitMode mode = cfg.mode == "every" ? VisitMode::every_visit
                                             : VisitMode::first_visit;
        McResult r = mc_evaluate(m, pi, cfg.gamma, cfg.episodes, mode,
                                 cfg.max_steps, rng);
        result["values"] = values_to_json(m, r.values, &r.visited);
        json counts = json::object();
        for (int s : r.visited) counts[m.state_label(s)] = r.counts[s];
        result["counts"] = counts;
        result["empty_estimate"] = r.empty_estimate;
    } else if (cfg.subcommand == "td eval") {
        TabularPolicy pi = resolve_policy(env, cfg);
        LearningConfig lc;
        lc.alpha = cfg.alpha;
        lc.gamma = cfg.gamma;
        lc.episodes = cfg.episodes;
        lc.max_steps = cfg.max_steps;
        lc.seed = cfg.seed;
        lc.alpha_schedule = cfg.alpha_schedule == "visits"
                                ? AlphaSchedule::one_over_visits
                            : cfg.alpha_schedule == "visits-pow"
                                ? AlphaSchedule::power_visits
                                : AlphaSchedule::fixed;
        ValueTable v = td0_evaluate(env, pi, lc);
        result["values"] = values_to_json(m, v);
    } else if (cfg.subcommand == "td sarsa" || cfg.subcommand == "td qlearn") {
        LearningConfig lc;
        lc.alpha = cfg.alpha;
        lc.gamma = cfg.gamma;
        lc.epsilon = cfg.epsilon;
        lc.epsilon_decay = cfg.epsilon_decay;
        lc.episodes = cfg.episodes;
        lc.max_steps = cfg.max_steps;
        lc.seed = cfg.seed;
        lc.q_init = cfg.q_init;
        ControlResult r = cfg.subcommand == "td sarsa" ? sarsa(env, lc)
                                                       : q_learning(env, lc);
        result["q"] = qtable_to_json(m, r.q);
        result["greedy_policy"] = policy_to_json(m, r.greedy);
        result["episode_returns"] = r.episode_returns;
    } else if (cfg.subcommand == "pg reinforce") {
        Rng rng(cfg.seed);
        ThetaPolicy pi = theta_policy_for_env(env, ClipMode::training);
        std::vector<Trajectory> supplied;
        if (!cfg.trajectory_file.empty())
            supplied = load_trajectories(env, cfg.trajectory_file);
        ReinforceResult r = reinforce(
            env, pi, cfg.alpha, cfg.gamma, cfg.episodes, rng, cfg.max_steps,
            supplied.empty() ? nullptr : &supplied);
        result["theta"] = theta_to_json(m, r.policy);
        result["policy_probs"] = theta_probs_to_json(m, r.policy);
        result["episode_returns"] = r.episode_returns;
    } else if (cfg.subcommand == "pg ac") {
        Rng rng(cfg.seed);
        bool paper = cfg.mode == "paper-trace";
        ThetaPolicy pi = theta_policy_for_env(
            env, paper ? ClipMode::paper_trace : ClipMode::training);
        CriticTable critic(m.num_states(), cfg.beta);
        std::vector<Trajectory> supplied;
        if (!cfg.trajectory_file.empty())
            supplied = load_trajectories(env, cfg.trajectory_file);
        ActorCriticResult r = actor_critic(
            env, pi, critic, cfg.alpha, cfg.beta, cfg.gamma, cfg.episodes, rng,
            paper ? AcMode::paper_trace : AcMode::online, cfg.max_steps,
            supplied.empty() ? nullptr : &supplied);
        result["theta"] = theta_to_json(m, r.policy);
        result["policy_probs"] = theta_probs_to_json(m, r.policy);
        json critic_values = json::object();
        for (int s = 0; s < m.num_states(); ++s)
            critic_values[m.state_label(s)] = r.critic.values[s];
        result["critic"] = critic_values;
        result["trace"] = trace_to_json(m, r.trace);
        result["episode_returns"] = r.episode_returns;
    } else {
        throw std::invalid_argument("unknown subcommand '" + cfg.subcommand +
                                    "'");
    }
    return result;
}

/// Condensed per-run record used by --repeat.
inline json summarize_run(const json& result) {
    json out = json::object();
    if (result.contains("values")) out["values"] = result["values"];
    if (result.contains("final_fidelity"))
        out["final_fidelity"] = result["final_fidelity"];
    if (result.contains("greedy_policy"))
        out["greedy_policy"] = result["greedy_policy"];
    if (result.contains("theta")) out["theta"] = result["theta"];
    if (result.contains("converged")) out["converged"] = result["converged"];
    if (result.contains("episode_returns")) {
        const auto& returns = result["episode_returns"];
        size_t n = returns.size();
        size_t tail = std::max<size_t>(1, n / 10);
        double sum = 0.0;
        for (size_t i = n - tail; i < n; ++i) sum += returns[i].get<double>();
        out["mean_return_tail"] = sum / tail;
    }
    return out;
}

inline json aggregate_runs(const std::vector<json>& runs) {
    auto mean_std = [](const std::vector<double>& xs) {
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= xs.size();
        double var = 0.0;
        for (double x : xs) var += (x - mean) * (x - mean);
        return json{{"mean", mean},
                    {"std", xs.size() > 1 ? std::sqrt(var / (xs.size() - 1))
                                          : 0.0}};
    };
    json summary = json::object();
    if (runs.front().contains("values")) {
        json vals = json::object();
        for (const auto& [label, _] : runs.front()["values"].items()) {
            std::vector<double> xs;
            for (const json& r : runs)
                if (r["values"].contains(label))
                    xs.push_back(r["values"][label].get<double>());
            if (!xs.empty()) vals[label] = mean_std(xs);
        }
        summary["values"] = vals;
    }
    for (const char* key : {"final_fidelity", "mean_return_tail"}) {
        if (!runs.front().contains(key)) continue;
        std::vector<double> xs;
        for (const json& r : runs) xs.push_back(r[key].get<double>());
        summary[key] = mean_std(xs);
    }
    return summary;
}

inline void write_output(const RunConfig& cfg, const json& document,
                         std::ostream& out) {
    if (cfg.format == "csv") {
        const json* history = nullptr;
        if (document.contains("episode_returns"))
            history = &document["episode_returns"];
        else if (document.contains("fidelity_history"))
            history = &document["fidelity_history"];
        if (!history)
            throw std::invalid_argument(
                "--format csv requires a result with a per-episode history");
        std::string csv = "episode,value\n";
        for (size_t i = 0; i < history->size(); ++i)
            csv += std::to_string(i) + "," +
                   json((*history)[i]).dump() + "\n";
        if (!cfg.out_path.empty()) {
            std::ofstream f(cfg.out_path);
            f << csv;
        } else {
            out << csv;
        }
        return;
    }
    if (!cfg.out_path.empty()) {
        std::ofstream f(cfg.out_path);
        f << document.dump(2) << "\n";
    } else {
        out << document.dump(2) << "\n";
    }
}

} // namespace detail

/// Parses argv (without the program name), runs the experiment, writes the
/// result. Exit status: 0 success, 2 usage error, 3 non-convergence under
/// --strict, 1 any other failure.
inline int run(const std::vector<std::string>& args,
               std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    RunConfig cfg;
    std::vector<std::string> set_args;

    CLI::App app{"tabular reinforcement learning experiments"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--env", cfg.env, "environment name");
    app.add_option("--seed", cfg.seed, "random seed (default 0)");
    app.add_option("--out", cfg.out_path, "write the result to this file");
    app.add_option("--format", cfg.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--set", set_args,
                   "environment override key=value (terminal_reward, "
                   "step_reward, gamma)");
    app.add_flag("--strict", cfg.strict,
                 "exit with status 3 if the algorithm did not converge");
    app.add_option("--repeat", cfg.repeat,
                   "run this many consecutive seeds and aggregate")
        ->check(CLI::PositiveNumber);

    auto add_policy_options = [&](CLI::App* cmd) {
        cmd->add_option("--policy", cfg.policy_name,
                        "built-in policy: uniform, table1, improved");
        cmd->add_option("--policy-file", cfg.policy_file,
                        "JSON policy file (overrides --policy)");
    };

    CLI::App* dp = app.add_subcommand("dp", "model-based planning");
    dp->require_subcommand(1);
    dp->fallthrough();
    CLI::App* dp_eval = dp->add_subcommand("eval", "policy evaluation");
    CLI::App* dp_pi = dp->add_subcommand("pi", "policy iteration");
    CLI::App* dp_vi = dp->add_subcommand("vi", "value iteration");
    for (CLI::App* cmd : {dp_eval, dp_pi, dp_vi}) {
        cmd->fallthrough();
        cmd->add_option("--gamma", cfg.gamma, "discount factor");
        cmd->add_option("--tol", cfg.tol, "convergence tolerance");
        cmd->add_option("--max-sweeps", cfg.max_sweeps, "sweep cap");
    }
    add_policy_options(dp_eval);
    add_policy_options(dp_pi);
    dp_eval->add_option("--method", cfg.method, "solver")
        ->check(CLI::IsMember({"analytic", "iterative"}));

    CLI::App* mc_cmd = app.add_subcommand("mc", "Monte Carlo evaluation");
    mc_cmd->fallthrough();
    cfg.mode = "first";
    mc_cmd->add_option("--gamma", cfg.gamma, "discount factor");
    mc_cmd->add_option("--mode", cfg.mode, "visit mode")
        ->check(CLI::IsMember({"first", "every"}));
    mc_cmd->add_option("--episodes", cfg.episodes, "episode count");
    mc_cmd->add_option("--max-steps", cfg.max_steps, "episode length cap");
    add_policy_options(mc_cmd);

    CLI::App* td_cmd = app.add_subcommand("td", "temporal-difference learning");
    td_cmd->require_subcommand(1);
    td_cmd->fallthrough();
    CLI::App* td_eval = td_cmd->add_subcommand("eval", "TD(0) evaluation");
    CLI::App* td_sarsa = td_cmd->add_subcommand("sarsa", "SARSA control");
    CLI::App* td_qlearn = td_cmd->add_subcommand("qlearn", "Q-learning control");
    for (CLI::App* cmd : {td_eval, td_sarsa, td_qlearn}) {
        cmd->fallthrough();
        cmd->add_option("--alpha", cfg.alpha, "step size");
        cmd->add_option("--gamma", cfg.gamma, "discount factor");
        cmd->add_option("--episodes", cfg.episodes, "episode count");
        cmd->add_option("--max-steps", cfg.max_steps, "episode length cap");
    }
    add_policy_options(td_eval);
    td_eval->add_option("--alpha-schedule", cfg.alpha_schedule,
                        "fixed, visits (1/N(s)), or visits-pow (N(s)^-0.85)")
        ->check(CLI::IsMember({"fixed", "visits", "visits-pow"}));
    double epsilon_decay_arg = 0.0;
    for (CLI::App* cmd : {td_sarsa, td_qlearn}) {
        cmd->add_option("--epsilon", cfg.epsilon, "exploration rate");
        cmd->add_option("--epsilon-decay", epsilon_decay_arg,
                        "multiplicative per-episode decay");
        cmd->add_option("--q-init", cfg.q_init, "initial q value");
    }

    CLI::App* pg_cmd = app.add_subcommand("pg", "policy-gradient learning");
    pg_cmd->require_subcommand(1);
    pg_cmd->fallthrough();
    CLI::App* pg_reinforce = pg_cmd->add_subcommand("reinforce",
                                                    "Monte Carlo policy "
                                                    "gradient");
    CLI::App* pg_ac = pg_cmd->add_subcommand("ac", "actor-critic");
    for (CLI::App* cmd : {pg_reinforce, pg_ac}) {
        cmd->fallthrough();
        cmd->add_option("--alpha", cfg.alpha, "actor step size");
        cmd->add_option("--gamma", cfg.gamma, "discount factor");
        cmd->add_option("--episodes", cfg.episodes, "episode count");
        cmd->add_option("--max-steps", cfg.max_steps, "episode length cap");
        cmd->add_option("--trajectory", cfg.trajectory_file,
                        "replay trajectories from this JSON file");
    }
    pg_ac->add_option("--beta", cfg.beta, "critic step size");
    std::string ac_mode = "online";
    pg_ac->add_option("--mode", ac_mode, "update schedule")
        ->check(CLI::IsMember({"online", "paper-trace"}));

    CLI::App* quantum = app.add_subcommand("quantum", "qubit control");
    quantum->require_subcommand(1);
    quantum->fallthrough();
    CLI::App* quantum_train =
        quantum->add_subcommand("train", "learn the state-preparation angle");
    quantum_train->fallthrough();
    quantum_train->add_option("--episodes", cfg.episodes, "episode count");
    quantum_train->add_option("--alpha", cfg.alpha, "actor step size");
    quantum_train->add_option("--beta", cfg.beta, "baseline step size");
    quantum_train->add_option("--sigma0", cfg.sigma0,
                              "initial exploration stddev");

    std::vector<const char*> argv;
    argv.push_back("tabrl");
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    try {
        // resolve subcommand path and per-command defaults
        if (dp->parsed()) {
            cfg.subcommand = dp_eval->parsed() ? "dp eval"
                             : dp_pi->parsed() ? "dp pi"
                                               : "dp vi";
        } else if (mc_cmd->parsed()) {
            cfg.subcommand = "mc";
            if (!mc_cmd->count("--episodes")) cfg.episodes = 10000;
        } else if (td_cmd->parsed()) {
            cfg.subcommand = td_eval->parsed()    ? "td eval"
                             : td_sarsa->parsed() ? "td sarsa"
                                                  : "td qlearn";
            if (td_sarsa->count("--epsilon-decay") ||
                td_qlearn->count("--epsilon-decay"))
                cfg.epsilon_decay = epsilon_decay_arg;
        } else if (pg_cmd->parsed()) {
            CLI::App* sub = pg_reinforce->parsed() ? pg_reinforce : pg_ac;
            cfg.subcommand = pg_reinforce->parsed() ? "pg reinforce" : "pg ac";
            cfg.mode = ac_mode;
            if (!app.count("--env")) cfg.env = "grid1d8_two_terminal";
            if (!sub->count("--alpha"))
                cfg.alpha = pg_reinforce->parsed() ? 0.01 : 0.05;
            if (!sub->count("--episodes")) cfg.episodes = 5000;
            if (!sub->count("--max-steps")) cfg.max_steps = 200;
        } else if (quantum->parsed()) {
            cfg.subcommand = "quantum train";
            if (!quantum_train->count("--episodes")) cfg.episodes = 2000;
            if (!quantum_train->count("--alpha")) cfg.alpha = 0.05;
            if (!quantum_train->count("--beta")) cfg.beta = 0.1;
        }

        for (const std::string& kv : set_args) {
            size_t pos = kv.find('=');
            if (pos == std::string::npos)
                throw std::invalid_argument("--set expects key=value, got '" +
                                            kv + "'");
            cfg.overrides[kv.substr(0, pos)] = std::stod(kv.substr(pos + 1));
        }

        auto t0 = std::chrono::steady_clock::now();
        json document;
        bool converged = true;
        if (cfg.repeat <= 1) {
            document = detail::run_once(cfg, converged);
            document["config"] = cfg.echo();
        } else {
            std::vector<json> run_summaries;
            json seeds = json::array();
            for (int i = 0; i < cfg.repeat; ++i) {
                RunConfig one = cfg;
                one.seed = cfg.seed + static_cast<std::uint64_t>(i);
                bool one_converged = true;
                json r = detail::run_once(one, one_converged);
                converged = converged && one_converged;
                json s = detail::summarize_run(r);
                s["seed"] = one.seed;
                run_summaries.push_back(std::move(s));
                seeds.push_back(one.seed);
            }
            document["config"] = cfg.echo();
            document["repeat"] = cfg.repeat;
            document["seeds"] = seeds;
            document["runs"] = run_summaries;
            document["summary"] = detail::aggregate_runs(run_summaries);
        }
        double wall = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
        document["wall_time_s"] = wall;

        detail::write_output(cfg, document, out);
        if (cfg.strict && !converged) return 3;
        return 0;
    } catch (const UnknownNameError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace tabrl::cli
