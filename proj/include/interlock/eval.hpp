#pragma once

#include <interlock/client.hpp>
#include <interlock/datagen.hpp>
#include <interlock/mcts.hpp>
#include <interlock/parallel.hpp>
#include <interlock/planner.hpp>

#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

namespace interlock {

// One decision per call. Agents may read the full environment (the expert
// and MCTS are privileged); they must not mutate it.
class Agent {
  public:
    virtual ~Agent() = default;
    virtual Action decide(const Environment& env) = 0;
    // Extra per-step data (imagination trace, search stats) for the log.
    virtual Json last_plan() const { return Json(); }
};

class ExpertAgent : public Agent {
  public:
    explicit ExpertAgent(const TaskInstance& task) : ctx_(make_expert_context(task)) {}
    Action decide(const Environment& env) override { return expert_action(env.state(), ctx_); }

  private:
    ExpertContext ctx_;
};

// Executes the policy's top proposal; no imagination.
class ProposeAgent : public Agent {
  public:
    explicit ProposeAgent(std::unique_ptr<Policy> policy) : policy_(std::move(policy)) {}

    Action decide(const Environment& env) override {
        return policy_->propose(make_proposal_request(env.goal_observation(), env.observation()), 1)
            .first();
    }

  private:
    std::unique_ptr<Policy> policy_;
};

// Full reflective planning: imagine, reflect, execute.
class ReflectAgent : public Agent {
  public:
    ReflectAgent(std::unique_ptr<Policy> policy, std::unique_ptr<DynamicsModel> dynamics,
                 PlannerConfig cfg)
        : policy_(std::move(policy)), dynamics_(std::move(dynamics)), cfg_(cfg) {}

    Action decide(const Environment& env) override {
        auto [action, trace] =
            plan_step(*policy_, *dynamics_, env.goal_observation(), env.observation(), cfg_);
        Json imagined = Json::array();
        for (const Observation& obs : trace.imagined)
            imagined.push_back(observation_hash(obs).substr(0, kObsRefLength));
        last_plan_ = Json{{"actions", trace.plan}, {"imagined", imagined}};
        return action;
    }

    Json last_plan() const override { return last_plan_; }

  private:
    std::unique_ptr<Policy> policy_;
    std::unique_ptr<DynamicsModel> dynamics_;
    PlannerConfig cfg_;
    Json last_plan_;
};

// Replans with a fresh search at every real step.
class MctsAgent : public Agent {
  public:
    MctsAgent(const TaskInstance& task, std::unique_ptr<Policy> proposer, SearchConfig cfg)
        : ctx_(make_expert_context(task)), proposer_(std::move(proposer)), cfg_(cfg),
          goal_hash_(goal_hash(task)) {}

    Action decide(const Environment& env) override {
        return search(env.state(), env.task(), *proposer_, ctx_, cfg_, goal_hash_);
    }

  private:
    ExpertContext ctx_;
    std::unique_ptr<Policy> proposer_;
    SearchConfig cfg_;
    std::string goal_hash_;
};

struct EpisodeResult {
    std::string task_id;
    std::uint64_t seed = 0;         // replicate seed
    StepOutcome final_outcome = StepOutcome::timeout;
    int steps = 0;
    bool success = false;
    std::vector<double> step_seconds;  // decision latency per executed step
    std::vector<TrajectoryRecord> trajectory;
    std::string error;
};

inline EpisodeResult run_episode(const TaskInstance& task, const EnvConfig& cfg, Agent& agent,
                                 bool keep_trajectory = false) {
    Environment env = make_environment(task, cfg);
    EpisodeResult result;
    result.task_id = task.id;
    while (!env.terminated()) {
        auto started = std::chrono::steady_clock::now();
        Action a = agent.decide(env);
        auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started);
        auto [obs, outcome] = env.step(a);
        result.step_seconds.push_back(elapsed.count());
        result.steps += 1;
        result.final_outcome = outcome;
        if (keep_trajectory) {
            TrajectoryRecord rec;
            rec.t = result.steps;
            rec.action = env.grammar().format(a);
            rec.outcome = std::string(to_string(outcome));
            rec.obs = std::move(obs);
            rec.plan = agent.last_plan();
            result.trajectory.push_back(std::move(rec));
        }
        if (outcome == StepOutcome::success) result.success = true;
    }
    return result;
}

using AgentFactory =
    std::function<std::unique_ptr<Agent>(const TaskInstance&, std::uint64_t episode_seed)>;

struct EvalConfig {
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
    double epsilon = 0.0;
    int max_steps = 50;
    int history_len = 5;
    int workers = 1;
    bool keep_trajectories = false;

    EnvConfig env_config(std::uint64_t episode_seed) const {
        EnvConfig cfg;
        cfg.epsilon = epsilon;
        cfg.max_steps = max_steps;
        cfg.history_len = history_len;
        cfg.seed = episode_seed;
        return cfg;
    }
};

struct EvalReport {
    std::vector<EpisodeResult> episodes;  // seed-major, then task order
    std::vector<double> per_seed_success;
    double success_mean = 0.0;
    double success_stddev = 0.0;
    double mean_step_seconds = 0.0;
    Json config_echo;
};

// Derives the per-episode seed from (replicate seed, task identity).
inline std::uint64_t episode_seed_for(std::uint64_t replicate_seed, const TaskInstance& task) {
    return derive_seed(replicate_seed, {task.seed});
}

// Runs every (seed, task) episode; failures never abort the sweep. Results
// land in pre-assigned slots so worker count cannot change the report.
inline EvalReport run_eval(const std::vector<TaskInstance>& tasks, const AgentFactory& factory,
                           const EvalConfig& cfg) {
    EvalReport report;
    const std::size_t per_seed = tasks.size();
    report.episodes.resize(cfg.seeds.size() * per_seed);
    parallel_for(report.episodes.size(), cfg.workers, [&](std::size_t slot) {
        const std::size_t seed_index = slot / per_seed;
        const std::size_t task_index = slot % per_seed;
        const TaskInstance& task = tasks[task_index];
        const std::uint64_t replicate = cfg.seeds[seed_index];
        const std::uint64_t episode_seed = episode_seed_for(replicate, task);
        EpisodeResult result;
        try {
            auto agent = factory(task, episode_seed);
            result = run_episode(task, cfg.env_config(episode_seed), *agent,
                                 cfg.keep_trajectories);
        } catch (const std::exception& e) {
            result.task_id = task.id;
            result.error = e.what();
            result.success = false;
        }
        result.seed = replicate;
        report.episodes[slot] = std::move(result);
    });

    double step_time_total = 0.0;
    std::size_t step_count = 0;
    for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
        std::size_t wins = 0;
        for (std::size_t t = 0; t < per_seed; ++t) {
            const EpisodeResult& ep = report.episodes[s * per_seed + t];
            if (ep.success) ++wins;
            for (double v : ep.step_seconds) step_time_total += v;
            step_count += ep.step_seconds.size();
        }
        report.per_seed_success.push_back(per_seed == 0 ? 0.0 : double(wins) / double(per_seed));
    }
    const std::size_t n = report.per_seed_success.size();
    if (n > 0) {
        report.success_mean =
            std::accumulate(report.per_seed_success.begin(), report.per_seed_success.end(), 0.0) /
            double(n);
        double var = 0.0;
        for (double v : report.per_seed_success) var += (v - report.success_mean) * (v - report.success_mean);
        report.success_stddev = n > 1 ? std::sqrt(var / double(n - 1)) : 0.0;
    }
    report.mean_step_seconds = step_count == 0 ? 0.0 : step_time_total / double(step_count);
    return report;
}

// Deterministic report body. Wall-clock numbers are kept out unless asked
// for: identical configs must produce identical bytes.
inline Json report_to_json(const EvalReport& report, bool include_timing = false) {
    Json episodes = Json::array();
    for (const EpisodeResult& ep : report.episodes) {
        Json j{{"task", ep.task_id},
               {"seed", ep.seed},
               {"outcome", std::string(to_string(ep.final_outcome))},
               {"steps", ep.steps},
               {"success", ep.success}};
        if (!ep.error.empty()) j["error"] = ep.error;
        episodes.push_back(std::move(j));
    }
    Json j{{"version", std::string(kVersion)},
           {"config", report.config_echo},
           {"episodes", episodes},
           {"per_seed_success", report.per_seed_success},
           {"success_mean", report.success_mean},
           {"success_stddev", report.success_stddev}};
    if (include_timing) j["mean_step_seconds"] = report.mean_step_seconds;
    return j;
}

// --- agent specifications ---
//
// String form used by the CLI and config files:
//   expert
//   scripted
//   scripted+reflect:sim
//   scripted+reflect:corrupted:<delta>[:freeze|scramble]
//   mcts
//   external:cmd:<shell command>
//   external:tcp:<host>:<port>
struct AgentSpec {
    enum class Kind { expert, scripted, scripted_reflect, mcts, external };
    Kind kind = Kind::scripted;
    enum class Dynamics { sim, corrupted } dynamics = Dynamics::sim;
    double delta = 0.1;
    CorruptionConfig::Mode mode = CorruptionConfig::Mode::freeze;
    int horizon = 5;
    SearchConfig mcts_config;
    std::string endpoint;  // "cmd:..." or "tcp:host:port"
    std::string text;      // original spec string, echoed in reports
};

inline AgentSpec parse_agent_spec(const std::string& text) {
    AgentSpec spec;
    spec.text = text;
    if (text == "expert") {
        spec.kind = AgentSpec::Kind::expert;
    } else if (text == "scripted") {
        spec.kind = AgentSpec::Kind::scripted;
    } else if (text.rfind("scripted+reflect", 0) == 0) {
        spec.kind = AgentSpec::Kind::scripted_reflect;
        std::string rest = text.size() > 16 && text[16] == ':' ? text.substr(17) : "sim";
        if (rest == "sim") {
            spec.dynamics = AgentSpec::Dynamics::sim;
        } else if (rest.rfind("corrupted", 0) == 0) {
            spec.dynamics = AgentSpec::Dynamics::corrupted;
            std::size_t colon = rest.find(':');
            if (colon != std::string::npos) {
                std::string args = rest.substr(colon + 1);
                std::size_t second = args.find(':');
                spec.delta = std::stod(args.substr(0, second));
                if (second != std::string::npos) {
                    std::string mode = args.substr(second + 1);
                    if (mode == "freeze")
                        spec.mode = CorruptionConfig::Mode::freeze;
                    else if (mode == "scramble")
                        spec.mode = CorruptionConfig::Mode::scramble;
                    else
                        throw std::invalid_argument("unknown corruption mode: " + mode);
                }
            }
        } else {
            throw std::invalid_argument("unknown reflect dynamics: " + rest);
        }
    } else if (text == "mcts") {
        spec.kind = AgentSpec::Kind::mcts;
    } else if (text.rfind("external:", 0) == 0) {
        spec.kind = AgentSpec::Kind::external;
        spec.endpoint = text.substr(9);
        if (spec.endpoint.empty()) throw std::invalid_argument("empty external endpoint");
    } else {
        throw std::invalid_argument("unknown agent spec: " + text);
    }
    return spec;
}

inline std::unique_ptr<Policy> make_external_policy(const std::string& endpoint) {
    if (endpoint.rfind("cmd:", 0) == 0)
        return std::make_unique<ExternalPolicy>(
            std::make_unique<SubprocessTransport>(endpoint.substr(4)));
    if (endpoint.rfind("tcp:", 0) == 0) {
        std::string rest = endpoint.substr(4);
        std::size_t colon = rest.rfind(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("tcp endpoint must be tcp:host:port");
        return std::make_unique<ExternalPolicy>(std::make_unique<TcpTransport>(
            rest.substr(0, colon), std::stoi(rest.substr(colon + 1))));
    }
    throw std::invalid_argument("unknown endpoint scheme: " + endpoint);
}

inline AgentFactory make_agent_factory(const AgentSpec& spec, const EvalConfig& eval_cfg) {
    switch (spec.kind) {
        case AgentSpec::Kind::expert:
            return [](const TaskInstance& task, std::uint64_t) {
                return std::make_unique<ExpertAgent>(task);
            };
        case AgentSpec::Kind::scripted:
            return [](const TaskInstance&, std::uint64_t) {
                return std::make_unique<ProposeAgent>(std::make_unique<ScriptedLearner>());
            };
        case AgentSpec::Kind::scripted_reflect: {
            AgentSpec s = spec;
            int history_len = eval_cfg.history_len;
            return [s, history_len](const TaskInstance& task, std::uint64_t episode_seed) {
                std::unique_ptr<DynamicsModel> dynamics;
                if (s.dynamics == AgentSpec::Dynamics::sim) {
                    dynamics = std::make_unique<OracleDynamics>(task, history_len);
                } else {
                    CorruptionConfig cc;
                    cc.delta = s.delta;
                    cc.mode = s.mode;
                    cc.seed = derive_seed(episode_seed, {0xdd});
                    dynamics = std::make_unique<CorruptedDynamics>(task, cc, history_len);
                }
                auto policy =
                    std::make_unique<HeuristicReflector>(std::make_unique<ScriptedLearner>());
                PlannerConfig pc;
                pc.horizon = s.horizon;
                pc.reflection_enabled = true;
                return std::make_unique<ReflectAgent>(std::move(policy), std::move(dynamics), pc);
            };
        }
        case AgentSpec::Kind::mcts: {
            SearchConfig sc = spec.mcts_config;
            sc.history_len = eval_cfg.history_len;
            return [sc](const TaskInstance& task, std::uint64_t) {
                return std::make_unique<MctsAgent>(task, std::make_unique<ScriptedLearner>(), sc);
            };
        }
        case AgentSpec::Kind::external: {
            std::string endpoint = spec.endpoint;
            int horizon = spec.horizon;
            return [endpoint, horizon](const TaskInstance&, std::uint64_t) {
                // one connection per episode; the protocol is single in-flight
                (void)horizon;
                return std::make_unique<ProposeAgent>(make_external_policy(endpoint));
            };
        }
    }
    throw std::logic_error("unhandled agent spec");
}

// --- latency profiling (Table-style inference cost comparison) ---

struct TimingProfile {
    std::string label;
    std::size_t steps = 0;
    double mean_seconds = 0.0;
    double p50 = 0.0;
    double p90 = 0.0;
    double p99 = 0.0;
};

inline TimingProfile summarize_timing(std::string label, std::vector<double> samples) {
    TimingProfile profile;
    profile.label = std::move(label);
    profile.steps = samples.size();
    if (samples.empty()) return profile;
    profile.mean_seconds =
        std::accumulate(samples.begin(), samples.end(), 0.0) / double(samples.size());
    std::sort(samples.begin(), samples.end());
    auto pct = [&](double q) {
        return samples[std::min(samples.size() - 1, std::size_t(q * double(samples.size())))];
    };
    profile.p50 = pct(0.50);
    profile.p90 = pct(0.90);
    profile.p99 = pct(0.99);
    return profile;
}

// Measures per-step decision latency of one agent family over a task subset.
inline TimingProfile bench_agent(const std::vector<TaskInstance>& tasks,
                                 const AgentFactory& factory, const EvalConfig& cfg,
                                 const std::string& label) {
    std::vector<double> samples;
    for (const TaskInstance& task : tasks) {
        const std::uint64_t episode_seed = episode_seed_for(cfg.seeds.empty() ? 0 : cfg.seeds[0], task);
        auto agent = factory(task, episode_seed);
        EpisodeResult result = run_episode(task, cfg.env_config(episode_seed), *agent, false);
        samples.insert(samples.end(), result.step_seconds.begin(), result.step_seconds.end());
    }
    return summarize_timing(label, std::move(samples));
}

}  // namespace interlock
