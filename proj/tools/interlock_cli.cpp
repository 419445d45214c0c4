// Command-line front end: task generation, expert rollouts, policy/planner
// evaluation, dataset collection, latency profiling, and trajectory replay.

#include <interlock/interlock.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace interlock;

namespace {

GenParams load_params(const std::string& path) {
    if (path.empty()) return GenParams{};
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open params file: " + path);
    Json j = Json::parse(in);
    return gen_params_from_json(j);
}

std::vector<TaskInstance> generate_tasks(const GenParams& params, int count, std::uint64_t seed,
                                         int workers) {
    std::vector<TaskInstance> tasks;
    tasks.resize(std::size_t(count));
    parallel_for(std::size_t(count), workers, [&](std::size_t i) {
        // bounded reseeding: generation may exhaust placement attempts or
        // (rarely) emit a board the expert cannot finish in time
        for (std::uint64_t retry = 0;; ++retry) {
            if (retry > 32) throw GenerationExhausted("no solvable board for task index " +
                                                      std::to_string(i));
            std::uint64_t task_seed = derive_seed(seed, {std::uint64_t(i), retry});
            try {
                TaskInstance task = make_task(params, task_seed, "task-" + std::to_string(i));
                if (!validate_solvable(task)) continue;
                tasks[i] = std::move(task);
                return;
            } catch (const GenerationExhausted&) {
                continue;
            }
        }
    });
    return tasks;
}

void write_trajectory(const std::string& path, const TaskInstance& task,
                      const EnvConfig& env_cfg, const std::vector<TrajectoryRecord>& records) {
    std::vector<Json> lines;
    lines.push_back(Json{{"task", to_json(task)},
                         {"epsilon", env_cfg.epsilon},
                         {"max_steps", env_cfg.max_steps},
                         {"history_len", env_cfg.history_len},
                         {"seed", env_cfg.seed}});
    for (const TrajectoryRecord& r : records) lines.push_back(r.to_record());
    write_ndjson(path, lines);
}

void print_report(const EvalReport& report, const std::string& agent, bool with_timing) {
    std::printf("agent: %s\n", agent.c_str());
    std::printf("%-8s%-10s\n", "seed", "success");
    const std::size_t per_seed =
        report.per_seed_success.empty() ? 0 : report.episodes.size() / report.per_seed_success.size();
    for (std::size_t s = 0; s < report.per_seed_success.size(); ++s) {
        unsigned long long seed = per_seed > 0 ? report.episodes[s * per_seed].seed : s;
        std::printf("%-8llu%-10.1f\n", seed, 100.0 * report.per_seed_success[s]);
    }
    std::printf("success rate: %.1f%% +/- %.1f%%\n", 100.0 * report.success_mean,
                100.0 * report.success_stddev);
    if (with_timing)
        std::printf("mean step time: %.6f s\n", report.mean_step_seconds);
}

int run_eval_command(const std::string& tasks_path, const std::string& agent_text,
                     EvalConfig cfg, SearchConfig mcts_cfg, int horizon,
                     const std::string& out_dir, bool record_timing) {
    std::vector<TaskInstance> tasks = load_task_set(tasks_path);
    AgentSpec spec = parse_agent_spec(agent_text);
    spec.horizon = horizon;
    spec.mcts_config = mcts_cfg;
    AgentFactory factory = make_agent_factory(spec, cfg);
    EvalReport report = run_eval(tasks, factory, cfg);
    report.config_echo = Json{{"agent", agent_text},
                              {"epsilon", cfg.epsilon},
                              {"max_steps", cfg.max_steps},
                              {"history_len", cfg.history_len},
                              {"horizon", horizon},
                              {"seeds", cfg.seeds},
                              {"tasks", fs::path(tasks_path).filename().string()},
                              {"task_count", tasks.size()}};
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream out(fs::path(out_dir) / "report.json", std::ios::binary);
        out << canonical(report_to_json(report, false)) << '\n';
        if (record_timing) {
            std::ofstream timing(fs::path(out_dir) / "timing.json", std::ios::binary);
            timing << canonical(Json{{"mean_step_seconds", report.mean_step_seconds}}) << '\n';
        }
    }
    print_report(report, agent_text, record_timing);
    return 0;
}

std::string render_layer(const VoxelGrid& grid, int z) {
    static constexpr char digits[] = "0123456789abcdefghijklmnopqrstuvwxyz";
    std::string out;
    for (int y = grid.dims.y - 1; y >= 0; --y) {
        for (int x = 0; x < grid.dims.x; ++x) {
            PieceId v = grid.at(x, y, z);
            out += v == kNoPiece ? '.' : digits[v % 36];
        }
        out += '\n';
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"interlocking-assembly planning toolkit"};
    app.require_subcommand(1);

    // --- gen ---
    auto* gen = app.add_subcommand("gen", "generate a task set");
    int gen_count = 10;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    std::string gen_params_path;
    int gen_workers = 1;
    gen->add_option("--count", gen_count, "number of tasks");
    gen->add_option("--seed", gen_seed, "master seed");
    gen->add_option("--out", gen_out, "output task-set file")->required();
    gen->add_option("--params", gen_params_path, "generation params JSON");
    gen->add_option("--workers", gen_workers, "worker threads");

    // --- expert-rollout ---
    auto* rollout = app.add_subcommand("expert-rollout", "run the expert on tasks");
    std::string ro_tasks;
    std::string ro_out;
    int ro_index = -1;
    double ro_epsilon = 0.0;
    int ro_max_steps = 50;
    std::uint64_t ro_seed = 0;
    rollout->add_option("--task", ro_tasks, "task-set file")->required();
    rollout->add_option("--index", ro_index, "run only this task index");
    rollout->add_option("--out", ro_out, "trajectory log output");
    rollout->add_option("--epsilon", ro_epsilon, "primitive failure rate");
    rollout->add_option("--max-steps", ro_max_steps, "episode length");
    rollout->add_option("--seed", ro_seed, "episode seed");

    // --- eval ---
    auto* eval_cmd = app.add_subcommand("eval", "evaluate an agent on a task set");
    std::string ev_tasks, ev_agent = "scripted", ev_out, ev_config;
    std::vector<std::uint64_t> ev_seeds;
    double ev_epsilon = 0.0;
    int ev_max_steps = 50, ev_history = 5, ev_horizon = 5, ev_workers = 1;
    bool ev_timing = false;
    eval_cmd->add_option("--tasks", ev_tasks, "task-set file");
    eval_cmd->add_option("--agent", ev_agent, "agent spec");
    eval_cmd->add_option("--seeds", ev_seeds, "replicate seeds");
    eval_cmd->add_option("--epsilon", ev_epsilon, "primitive failure rate");
    eval_cmd->add_option("--max-steps", ev_max_steps, "episode length");
    eval_cmd->add_option("--history", ev_history, "observation history length");
    eval_cmd->add_option("--horizon", ev_horizon, "imagination horizon");
    eval_cmd->add_option("--workers", ev_workers, "worker threads");
    eval_cmd->add_option("--out", ev_out, "output directory");
    eval_cmd->add_option("--config", ev_config, "JSON config file (flags override)");
    eval_cmd->add_flag("--record-timing", ev_timing, "write timing sidecar");

    // --- mcts-eval ---
    auto* mcts_cmd = app.add_subcommand("mcts-eval", "evaluate the MCTS baseline");
    std::string mc_tasks, mc_out;
    std::vector<std::uint64_t> mc_seeds = {0};
    int mc_iters = 50, mc_width = 5, mc_max_steps = 50, mc_workers = 1;
    double mc_cexplore = 0.5, mc_lambda = 0.1, mc_epsilon = 0.0;
    mcts_cmd->add_option("--tasks", mc_tasks, "task-set file")->required();
    mcts_cmd->add_option("--iters", mc_iters, "search iterations");
    mcts_cmd->add_option("--cexplore", mc_cexplore, "exploration constant");
    mcts_cmd->add_option("--lambda", mc_lambda, "value scale");
    mcts_cmd->add_option("--width", mc_width, "proposals per node");
    mcts_cmd->add_option("--seeds", mc_seeds, "replicate seeds");
    mcts_cmd->add_option("--epsilon", mc_epsilon, "primitive failure rate");
    mcts_cmd->add_option("--max-steps", mc_max_steps, "episode length");
    mcts_cmd->add_option("--workers", mc_workers, "worker threads");
    mcts_cmd->add_option("--out", mc_out, "output directory");

    // --- collect ---
    auto* collect_cmd = app.add_subcommand("collect", "interactive data collection");
    std::string co_tasks, co_out = "dataset";
    int co_iters = 3, co_per_iter = 10, co_horizon = 5, co_history = 5, co_max_steps = 50;
    int co_demos = 0, co_workers = 1;
    double co_p = 0.5, co_epsilon = 0.0;
    std::uint64_t co_seed = 0;
    std::string co_hook;
    collect_cmd->add_option("--tasks", co_tasks, "task-set file")->required();
    collect_cmd->add_option("--iterations", co_iters, "collection iterations K");
    collect_cmd->add_option("--per-iter", co_per_iter, "trajectories per iteration N");
    collect_cmd->add_option("--p", co_p, "probability of executing the learner action");
    collect_cmd->add_option("--horizon", co_horizon, "imagination horizon H");
    collect_cmd->add_option("--history", co_history, "history length h");
    collect_cmd->add_option("--max-steps", co_max_steps, "episode length T");
    collect_cmd->add_option("--seed-demos", co_demos, "expert demo episodes collected first");
    collect_cmd->add_option("--seed", co_seed, "master seed");
    collect_cmd->add_option("--epsilon", co_epsilon, "primitive failure rate");
    collect_cmd->add_option("--workers", co_workers, "worker threads");
    collect_cmd->add_option("--out", co_out, "output directory");
    collect_cmd->add_option("--hook", co_hook, "command run after each iteration: CMD <iter> <file>");

    // --- collect-transitions ---
    auto* trans_cmd = app.add_subcommand("collect-transitions", "noised-policy transition dataset");
    int tr_boards = 10, tr_max_len = 50, tr_workers = 1;
    std::vector<double> tr_levels = {0.2, 0.5, 0.7, 0.9, 1.0};
    std::uint64_t tr_seed = 0;
    std::string tr_out = "transitions";
    std::string tr_params_path;
    std::size_t tr_eval_count = 0;
    trans_cmd->add_option("--boards", tr_boards, "number of generated boards");
    trans_cmd->add_option("--levels", tr_levels, "noise levels");
    trans_cmd->add_option("--max-len", tr_max_len, "episode cap");
    trans_cmd->add_option("--seed", tr_seed, "master seed");
    trans_cmd->add_option("--eval-count", tr_eval_count, "transitions sampled for evaluation");
    trans_cmd->add_option("--params", tr_params_path, "generation params JSON");
    trans_cmd->add_option("--workers", tr_workers, "worker threads");
    trans_cmd->add_option("--out", tr_out, "output directory");

    // --- bench ---
    auto* bench_cmd = app.add_subcommand("bench", "per-step latency profile");
    std::string be_tasks;
    std::vector<std::string> be_agents = {"scripted", "scripted+reflect:sim", "mcts"};
    int be_limit = 20, be_max_steps = 50, be_horizon = 5;
    std::uint64_t be_seed = 0;
    bench_cmd->add_option("--tasks", be_tasks, "task-set file")->required();
    bench_cmd->add_option("--agents", be_agents, "agent specs to profile");
    bench_cmd->add_option("--limit", be_limit, "tasks used");
    bench_cmd->add_option("--max-steps", be_max_steps, "episode length");
    bench_cmd->add_option("--horizon", be_horizon, "imagination horizon");
    bench_cmd->add_option("--seed", be_seed, "replicate seed");

    // --- replay ---
    auto* replay_cmd = app.add_subcommand("replay", "re-render a trajectory log");
    std::string rp_log, rp_out;
    bool rp_boards = false;
    replay_cmd->add_option("--log", rp_log, "trajectory log file")->required();
    replay_cmd->add_option("--out", rp_out, "write rendering here instead of stdout");
    replay_cmd->add_flag("--boards", rp_boards, "render board layers per step");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            GenParams params = load_params(gen_params_path);
            std::vector<TaskInstance> tasks = generate_tasks(params, gen_count, gen_seed, gen_workers);
            save_task_set(gen_out, tasks);
            std::printf("wrote %d tasks to %s\n", gen_count, gen_out.c_str());
            return 0;
        }

        if (rollout->parsed()) {
            std::vector<TaskInstance> tasks = load_task_set(ro_tasks);
            EnvConfig cfg;
            cfg.epsilon = ro_epsilon;
            cfg.max_steps = ro_max_steps;
            std::vector<Json> lines;
            for (std::size_t i = 0; i < tasks.size(); ++i) {
                if (ro_index >= 0 && std::size_t(ro_index) != i) continue;
                const TaskInstance& task = tasks[i];
                cfg.seed = derive_seed(ro_seed, {task.seed});
                ExpertAgent agent(task);
                EpisodeResult result = run_episode(task, cfg, agent, true);
                std::printf("%s: %s in %d steps\n", task.id.c_str(),
                            std::string(to_string(result.final_outcome)).c_str(), result.steps);
                lines.push_back(Json{{"task", task.id},
                                     {"epsilon", cfg.epsilon},
                                     {"max_steps", cfg.max_steps},
                                     {"seed", cfg.seed}});
                for (const TrajectoryRecord& r : result.trajectory) lines.push_back(r.to_record());
            }
            if (!ro_out.empty()) write_ndjson(ro_out, lines);
            return 0;
        }

        if (eval_cmd->parsed()) {
            // config file supplies defaults; explicit flags win
            if (!ev_config.empty()) {
                std::ifstream in(ev_config);
                if (!in) throw std::runtime_error("cannot open config: " + ev_config);
                Json j = Json::parse(in);
                auto given = [&](const std::string& flag) {
                    return eval_cmd->count("--" + flag) > 0;
                };
                if (j.contains("tasks") && !given("tasks")) ev_tasks = j["tasks"].get<std::string>();
                if (j.contains("agent") && !given("agent")) ev_agent = j["agent"].get<std::string>();
                if (j.contains("seeds") && !given("seeds"))
                    ev_seeds = j["seeds"].get<std::vector<std::uint64_t>>();
                if (j.contains("epsilon") && !given("epsilon")) ev_epsilon = j["epsilon"].get<double>();
                if (j.contains("max_steps") && !given("max-steps"))
                    ev_max_steps = j["max_steps"].get<int>();
                if (j.contains("history_len") && !given("history"))
                    ev_history = j["history_len"].get<int>();
                if (j.contains("horizon") && !given("horizon")) ev_horizon = j["horizon"].get<int>();
                if (j.contains("workers") && !given("workers")) ev_workers = j["workers"].get<int>();
                if (j.contains("out") && !given("out")) ev_out = j["out"].get<std::string>();
            }
            if (ev_tasks.empty()) throw std::runtime_error("no task set given (--tasks or config)");
            EvalConfig cfg;
            if (!ev_seeds.empty()) cfg.seeds = ev_seeds;
            cfg.epsilon = ev_epsilon;
            cfg.max_steps = ev_max_steps;
            cfg.history_len = ev_history;
            cfg.workers = ev_workers;
            return run_eval_command(ev_tasks, ev_agent, cfg, SearchConfig{}, ev_horizon, ev_out,
                                    ev_timing);
        }

        if (mcts_cmd->parsed()) {
            EvalConfig cfg;
            cfg.seeds = mc_seeds;
            cfg.epsilon = mc_epsilon;
            cfg.max_steps = mc_max_steps;
            cfg.workers = mc_workers;
            SearchConfig sc;
            sc.iterations = mc_iters;
            sc.c_explore = mc_cexplore;
            sc.lambda = mc_lambda;
            sc.proposal_width = mc_width;
            int rc = run_eval_command(mc_tasks, "mcts", cfg, sc, 5, mc_out, false);
            return rc;
        }

        if (collect_cmd->parsed()) {
            std::vector<TaskInstance> tasks = load_task_set(co_tasks);
            CollectionConfig cfg;
            cfg.iterations = co_iters;
            cfg.per_iteration = co_per_iter;
            cfg.max_steps = co_max_steps;
            cfg.horizon = co_horizon;
            cfg.p_learner = co_p;
            cfg.history_len = co_history;
            cfg.epsilon = co_epsilon;
            cfg.seed = co_seed;
            cfg.workers = co_workers;
            fs::create_directories(co_out);
            ObservationStore store;
            std::vector<TrainingExample> dataset;
            Json manifest;
            manifest["iterations"] = Json::array();
            if (co_demos > 0) {
                CollectionConfig demo_cfg = cfg;
                demo_cfg.per_iteration = co_demos;
                demo_cfg.p_learner = 0.0;  // expert-only execution = demonstrations
                auto demos = collect_iteration(tasks, scripted_learner_factory(), demo_cfg, 0, store);
                std::string path = (fs::path(co_out) / "demos.ndjson").string();
                save_examples(path, demos);
                manifest["demos"] = Json{{"file", "demos.ndjson"}, {"examples", demos.size()}};
                dataset.insert(dataset.end(), demos.begin(), demos.end());
            }
            for (int k = 1; k <= cfg.iterations; ++k) {
                auto examples = collect_iteration(tasks, scripted_learner_factory(), cfg, k, store);
                std::string name = "iter-" + std::to_string(k) + ".ndjson";
                std::string path = (fs::path(co_out) / name).string();
                save_examples(path, examples);
                manifest["iterations"].push_back(Json{{"file", name}, {"examples", examples.size()}});
                dataset.insert(dataset.end(), examples.begin(), examples.end());
                if (!co_hook.empty()) {
                    std::string cmd = co_hook + " " + std::to_string(k) + " " + path;
                    int rc = std::system(cmd.c_str());
                    if (rc != 0) throw std::runtime_error("iteration hook failed: " + cmd);
                }
            }
            save_examples((fs::path(co_out) / "dataset.ndjson").string(), dataset);
            store.save((fs::path(co_out) / "store.ndjson").string());
            manifest["total_examples"] = dataset.size();
            manifest["observations"] = store.size();
            std::ofstream mf(fs::path(co_out) / "manifest.json", std::ios::binary);
            mf << canonical(manifest) << '\n';
            std::printf("collected %zu examples (%zu observations) into %s\n", dataset.size(),
                        store.size(), co_out.c_str());
            return 0;
        }

        if (trans_cmd->parsed()) {
            GenParams params = load_params(tr_params_path);
            CollectionConfig cfg;
            cfg.seed = tr_seed;
            cfg.workers = tr_workers;
            fs::create_directories(tr_out);
            ObservationStore store;
            TransitionDataset dataset =
                collect_transitions(params, tr_boards, tr_levels, tr_max_len, cfg, store);
            if (tr_eval_count > 0) {
                auto [train, eval] = split_transitions(dataset, tr_eval_count, tr_seed);
                save_transitions((fs::path(tr_out) / "transitions_train.ndjson").string(), train);
                save_transitions((fs::path(tr_out) / "transitions_eval.ndjson").string(), eval);
            }
            save_transitions((fs::path(tr_out) / "transitions.ndjson").string(), dataset);
            store.save((fs::path(tr_out) / "store.ndjson").string());
            std::printf("collected %zu transitions over %d episodes into %s\n",
                        dataset.records.size(), dataset.episodes, tr_out.c_str());
            return 0;
        }

        if (bench_cmd->parsed()) {
            std::vector<TaskInstance> tasks = load_task_set(be_tasks);
            if (int(tasks.size()) > be_limit) tasks.resize(std::size_t(be_limit));
            EvalConfig cfg;
            cfg.seeds = {be_seed};
            cfg.max_steps = be_max_steps;
            std::printf("%-28s%-10s%-12s%-12s%-12s%-12s\n", "agent", "steps", "mean(s)", "p50(s)",
                        "p90(s)", "p99(s)");
            for (const std::string& text : be_agents) {
                AgentSpec spec = parse_agent_spec(text);
                spec.horizon = be_horizon;
                TimingProfile profile =
                    bench_agent(tasks, make_agent_factory(spec, cfg), cfg, text);
                std::printf("%-28s%-10zu%-12.6f%-12.6f%-12.6f%-12.6f\n", profile.label.c_str(),
                            profile.steps, profile.mean_seconds, profile.p50, profile.p90,
                            profile.p99);
            }
            return 0;
        }

        if (replay_cmd->parsed()) {
            std::vector<Json> lines = read_ndjson(rp_log);
            std::string rendered;
            for (const Json& j : lines) {
                if (!j.contains("t")) {
                    rendered += "episode";
                    if (j.contains("task") && j["task"].is_string())
                        rendered += " task=" + j["task"].get<std::string>();
                    if (j.contains("task") && j["task"].is_object())
                        rendered += " task=" + j["task"]["id"].get<std::string>();
                    if (j.contains("seed"))
                        rendered += " seed=" + std::to_string(j["seed"].get<std::uint64_t>());
                    rendered += "\n";
                    continue;
                }
                rendered += "t=" + std::to_string(j["t"].get<int>());
                rendered += " action='" + j["action"].get<std::string>() + "'";
                rendered += " outcome=" + j["outcome"].get<std::string>();
                if (j.contains("plan") && j["plan"].contains("actions")) {
                    rendered += " plan=[";
                    bool first = true;
                    for (const Json& a : j["plan"]["actions"]) {
                        if (!first) rendered += ", ";
                        rendered += a.get<std::string>();
                        first = false;
                    }
                    rendered += "]";
                }
                rendered += "\n";
                if (rp_boards && j.contains("obs")) {
                    Observation obs = observation_from_json(j["obs"]);
                    for (int z = 0; z < obs.board.dims.z; ++z) {
                        if (occupied_layers(obs.board) <= z) break;
                        rendered += "layer z=" + std::to_string(z) + "\n";
                        rendered += render_layer(obs.board, z);
                    }
                }
            }
            if (rp_out.empty()) {
                std::fputs(rendered.c_str(), stdout);
            } else {
                std::ofstream out(rp_out, std::ios::binary);
                out << rendered;
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
