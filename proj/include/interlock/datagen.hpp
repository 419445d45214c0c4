#pragma once

#include <interlock/expert.hpp>
#include <interlock/parallel.hpp>
#include <interlock/planner.hpp>
#include <interlock/policy.hpp>
#include <interlock/serialize.hpp>

#include <algorithm>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace interlock {

struct CollectionConfig {
    int iterations = 3;      // K
    int per_iteration = 10;  // N trajectories per iteration
    int max_steps = 50;      // T
    int horizon = 5;         // H
    double p_learner = 0.5;  // probability of executing the learner action
    int history_len = 5;     // h
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    int workers = 1;

    void validate() const {
        if (iterations < 0) throw std::invalid_argument("iterations must be >= 0");
        if (per_iteration < 1) throw std::invalid_argument("per_iteration must be >= 1");
        if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
        if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
        if (p_learner < 0.0 || p_learner > 1.0) throw std::invalid_argument("p outside [0,1]");
        if (history_len < 0) throw std::invalid_argument("history_len must be >= 0");
        if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("epsilon outside [0,1]");
    }
};

// Observations live once in a content-addressed store; examples carry refs.
class ObservationStore {
  public:
    std::string put(const Observation& obs) {
        std::string bytes = serialize_observation(obs);
        std::string hash = sha256_hex(bytes);
        entries_.emplace(hash, std::move(bytes));
        return hash;
    }

    const std::string& get(const std::string& hash) const {
        auto it = entries_.find(hash);
        if (it == entries_.end()) throw std::out_of_range("unknown observation ref: " + hash);
        return it->second;
    }

    Observation get_observation(const std::string& hash) const {
        return observation_from_json(Json::parse(get(hash)));
    }

    // Unique match for a hash prefix (as embedded in prompts).
    Observation resolve_prefix(const std::string& prefix) const {
        auto it = entries_.lower_bound(prefix);
        if (it == entries_.end() || it->first.compare(0, prefix.size(), prefix) != 0)
            throw std::out_of_range("no observation for prefix: " + prefix);
        return observation_from_json(Json::parse(it->second));
    }

    std::size_t size() const { return entries_.size(); }

    void save(const std::string& path) const {
        std::vector<Json> records;
        records.reserve(entries_.size());
        for (const auto& [hash, bytes] : entries_)
            records.push_back(Json{{"hash", hash}, {"obs", Json::parse(bytes)}});
        write_ndjson(path, records);
    }

    void load(const std::string& path) {
        for (const Json& j : read_ndjson(path))
            entries_[j.at("hash").get<std::string>()] = canonical(j.at("obs"));
    }

  private:
    std::map<std::string, std::string> entries_;
};

// One proposal or reflection record with the filled prompt and expert label.
struct TrainingExample {
    std::string kind;  // "proposal" | "reflection"
    std::string prompt;
    std::string goal_ref;
    std::string current_ref;
    std::string future_ref;         // reflection only
    std::vector<std::string> plan;  // reflection only: executed actions a_t..
    std::string label;              // expert action text a_t*
    std::string task_id;
    int episode = 0;
    int t = 0;

    Json to_json() const {
        Json refs{{"goal", goal_ref}, {"current", current_ref}};
        if (kind == "reflection") refs["future"] = future_ref;
        Json j{{"kind", kind}, {"prompt", prompt}, {"refs", refs},
               {"label", label}, {"task", task_id}, {"episode", episode}, {"t", t}};
        if (kind == "reflection") j["plan"] = plan;
        return j;
    }
};

// Realized rollout of one mixed-control episode.
struct EpisodeTrace {
    std::string task_id;
    int episode = 0;
    std::uint64_t episode_seed = 0;
    Observation goal;
    std::vector<Observation> observations;  // I_0 .. I_L
    std::vector<std::string> actions;       // executed a_0 .. a_{L-1}
    std::vector<std::string> labels;        // expert a*_0 .. a*_{L-1}
    std::vector<StepOutcome> outcomes;
    bool success = false;
    std::string error;  // nonempty when the episode aborted early

    int length() const { return int(actions.size()); }
};

// Rolls one episode executing the learner's action with probability p and
// the expert's otherwise; the expert labels every step either way. Policy or
// environment errors cut the episode short and leave a partial trace.
inline EpisodeTrace run_mixed_episode(const TaskInstance& task, Policy& learner,
                                      const CollectionConfig& cfg, std::uint64_t episode_seed,
                                      int episode_index) {
    EnvConfig env_cfg;
    env_cfg.epsilon = cfg.epsilon;
    env_cfg.max_steps = cfg.max_steps;
    env_cfg.history_len = cfg.history_len;
    env_cfg.seed = episode_seed;
    Environment env = make_environment(task, env_cfg);
    ExpertContext ctx = make_expert_context(task);
    ActionGrammar grammar = task.grammar();
    Rng mix_rng(derive_seed(episode_seed, {0x3c}));

    EpisodeTrace trace;
    trace.task_id = task.id;
    trace.episode = episode_index;
    trace.episode_seed = episode_seed;
    trace.goal = env.goal_observation();
    trace.observations.push_back(env.observation());
    while (!env.terminated()) {
        Action expert = expert_action(env.state(), ctx);
        Action executed = expert;
        try {
            if (mix_rng.bernoulli(cfg.p_learner)) {
                executed = learner
                               .propose(make_proposal_request(trace.goal, env.observation()), 1)
                               .first();
            }
        } catch (const std::exception& e) {
            trace.error = e.what();
            break;
        }
        auto [obs, outcome] = env.step(executed);
        trace.actions.push_back(grammar.format(executed));
        trace.labels.push_back(grammar.format(expert));
        trace.outcomes.push_back(outcome);
        trace.observations.push_back(std::move(obs));
        if (outcome == StepOutcome::success) trace.success = true;
    }
    return trace;
}

// Fig-2-style relabeling: each timestep yields one proposal example and one
// reflection example whose future observation and plan slice come from the
// realized trajectory, clamped at the episode end.
inline std::vector<TrainingExample> relabel_episode(const EpisodeTrace& trace,
                                                    const CollectionConfig& cfg,
                                                    ObservationStore& store) {
    std::vector<TrainingExample> out;
    if (trace.length() == 0) return out;
    const std::string goal_ref = store.put(trace.goal);
    const int length = trace.length();
    for (int t = 0; t < length; ++t) {
        const Observation& current = trace.observations[std::size_t(t)];
        const std::string current_ref = store.put(current);

        TrainingExample proposal;
        proposal.kind = "proposal";
        proposal.prompt = render_prompt(make_proposal_request(trace.goal, current));
        proposal.goal_ref = goal_ref;
        proposal.current_ref = current_ref;
        proposal.label = trace.labels[std::size_t(t)];
        proposal.task_id = trace.task_id;
        proposal.episode = trace.episode;
        proposal.t = t;
        out.push_back(std::move(proposal));

        const int future_index = std::min(t + cfg.horizon, length);
        const Observation& future = trace.observations[std::size_t(future_index)];
        TrainingExample reflection;
        reflection.kind = "reflection";
        reflection.plan.assign(trace.actions.begin() + t, trace.actions.begin() + future_index);
        reflection.prompt = render_prompt(
            make_reflection_request(trace.goal, current, future, reflection.plan));
        reflection.goal_ref = goal_ref;
        reflection.current_ref = current_ref;
        reflection.future_ref = store.put(future);
        reflection.label = trace.labels[std::size_t(t)];
        reflection.task_id = trace.task_id;
        reflection.episode = trace.episode;
        reflection.t = t;
        out.push_back(std::move(reflection));
    }
    return out;
}

using LearnerFactory =
    std::function<std::unique_ptr<Policy>(const TaskInstance&, std::uint64_t episode_seed)>;

inline LearnerFactory scripted_learner_factory() {
    return [](const TaskInstance&, std::uint64_t) { return std::make_unique<ScriptedLearner>(); };
}

// One iteration of the interactive collection loop: sample N tasks, roll
// mixed episodes, relabel. Output order is deterministic (task id, episode,
// timestep, proposal before reflection).
inline std::vector<TrainingExample> collect_iteration(const std::vector<TaskInstance>& tasks,
                                                      const LearnerFactory& learner_factory,
                                                      const CollectionConfig& cfg, int iteration,
                                                      ObservationStore& store) {
    cfg.validate();
    if (tasks.empty()) throw std::invalid_argument("task set is empty");
    Rng sampler(derive_seed(cfg.seed, {std::uint64_t(iteration), 0x5a}));
    std::vector<const TaskInstance*> chosen(std::size_t(cfg.per_iteration));
    for (auto& slot : chosen) slot = &tasks[sampler.bounded(tasks.size())];

    // episodes run in parallel into fixed slots; relabeling stays serial so
    // the store and the output order are schedule-independent
    std::vector<EpisodeTrace> traces(std::size_t(cfg.per_iteration));
    parallel_for(std::size_t(cfg.per_iteration), cfg.workers, [&](std::size_t n) {
        const TaskInstance& task = *chosen[n];
        const int episode_index = iteration * cfg.per_iteration + int(n);
        const std::uint64_t episode_seed =
            derive_seed(cfg.seed, {std::uint64_t(iteration), std::uint64_t(n)});
        auto learner = learner_factory(task, episode_seed);
        traces[n] = run_mixed_episode(task, *learner, cfg, episode_seed, episode_index);
    });
    std::vector<TrainingExample> dataset;
    for (const EpisodeTrace& trace : traces) {
        auto examples = relabel_episode(trace, cfg, store);
        dataset.insert(dataset.end(), std::make_move_iterator(examples.begin()),
                       std::make_move_iterator(examples.end()));
    }
    std::stable_sort(dataset.begin(), dataset.end(),
                     [](const TrainingExample& a, const TrainingExample& b) {
                         return std::tie(a.task_id, a.episode, a.t) <
                                std::tie(b.task_id, b.episode, b.t);
                     });
    return dataset;
}

// --- transition dataset for dynamics-model training ---

struct TransitionRecord {
    std::string obs_ref;
    std::string action;
    std::string next_obs_ref;
    int episode = 0;
    double noise = 0.0;  // p_rand of the behavior policy

    Json to_json() const {
        return Json{{"obs", obs_ref}, {"action", action}, {"next_obs", next_obs_ref},
                    {"episode", episode}, {"noise", noise}};
    }
};

struct TransitionDataset {
    std::vector<TransitionRecord> records;
    int episodes = 0;
};

// Rolls a noised expert on freshly generated boards at each noise level and
// records every transition. Episodes cap at max_len and stop on success.
inline TransitionDataset collect_transitions(const GenParams& params, int board_count,
                                             const std::vector<double>& noise_levels, int max_len,
                                             const CollectionConfig& cfg,
                                             ObservationStore& store) {
    cfg.validate();
    if (board_count < 1) throw std::invalid_argument("board_count must be >= 1");
    if (max_len < 1) throw std::invalid_argument("max_len must be >= 1");

    struct RawTransition {
        Observation obs;
        std::string action;
        Observation next;
    };
    const std::size_t episode_count = std::size_t(board_count) * noise_levels.size();
    std::vector<std::vector<RawTransition>> raw(episode_count);

    parallel_for(episode_count, cfg.workers, [&](std::size_t e) {
        const int b = int(e / noise_levels.size());
        const std::size_t level = e % noise_levels.size();
        TaskInstance task = make_task(params, derive_seed(cfg.seed, {0xb0, std::uint64_t(b)}),
                                      "board-" + std::to_string(b));
        ActionGrammar grammar = task.grammar();
        const std::uint64_t episode_seed =
            derive_seed(cfg.seed, {0xe0, std::uint64_t(b), std::uint64_t(level)});
        EnvConfig env_cfg;
        env_cfg.max_steps = max_len;
        env_cfg.history_len = cfg.history_len;
        env_cfg.seed = episode_seed;
        Environment env = make_environment(task, env_cfg);
        NoisedExpert behavior(task, noise_levels[level], episode_seed);
        Observation goal = env.goal_observation();
        Observation current = env.observation();
        while (!env.terminated()) {
            Action a = behavior.propose(make_proposal_request(goal, current), 1).first();
            auto [next, outcome] = env.step(a);
            raw[e].push_back({current, grammar.format(a), next});
            current = next;
            (void)outcome;
        }
    });

    // serial sink: store writes and record order are schedule-independent
    TransitionDataset dataset;
    for (std::size_t e = 0; e < episode_count; ++e) {
        const std::size_t level = e % noise_levels.size();
        for (RawTransition& rt : raw[e]) {
            TransitionRecord rec;
            rec.obs_ref = store.put(rt.obs);
            rec.action = std::move(rt.action);
            rec.next_obs_ref = store.put(rt.next);
            rec.episode = int(e);
            rec.noise = noise_levels[level];
            dataset.records.push_back(std::move(rec));
        }
    }
    dataset.episodes = int(episode_count);
    return dataset;
}

// Seeded eval/train split by sampling records without replacement.
inline std::pair<TransitionDataset, TransitionDataset> split_transitions(
    const TransitionDataset& dataset, std::size_t eval_count, std::uint64_t seed) {
    eval_count = std::min(eval_count, dataset.records.size());
    std::vector<std::size_t> order(dataset.records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(derive_seed(seed, {0x51}));
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.bounded(i)]);
    std::vector<bool> is_eval(order.size(), false);
    for (std::size_t i = 0; i < eval_count; ++i) is_eval[order[i]] = true;
    TransitionDataset train, eval;
    train.episodes = eval.episodes = dataset.episodes;
    for (std::size_t i = 0; i < dataset.records.size(); ++i)
        (is_eval[i] ? eval : train).records.push_back(dataset.records[i]);
    return {std::move(train), std::move(eval)};
}

inline void save_examples(const std::string& path, const std::vector<TrainingExample>& examples) {
    std::vector<Json> records;
    records.reserve(examples.size());
    for (const TrainingExample& e : examples) records.push_back(e.to_json());
    write_ndjson(path, records);
}

inline void save_transitions(const std::string& path, const TransitionDataset& dataset) {
    std::vector<Json> records;
    records.reserve(dataset.records.size());
    for (const TransitionRecord& r : dataset.records) records.push_back(r.to_json());
    write_ndjson(path, records);
}

}  // namespace interlock
