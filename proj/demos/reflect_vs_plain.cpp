// Compares the observation-only learner with and without reflective
// planning on tasks that start with a piece inserted out of order.

#include <interlock/interlock.hpp>

#include <cstdio>

using namespace interlock;

int main() {
    GenParams params;
    params.r_bad = 1.0;  // every start needs a removal first
    std::vector<TaskInstance> tasks;
    std::uint64_t seed = 0;
    while (tasks.size() < 10) {
        TaskInstance task = make_task(params, seed++);
        bool prebad = false;
        for (std::size_t i = 1; i < task.init.size(); ++i)
            if (task.init[i].location == Location::in_board) prebad = true;
        if (prebad && validate_solvable(task)) tasks.push_back(std::move(task));
    }

    EvalConfig cfg;
    cfg.seeds = {0};
    auto plain = run_eval(tasks, make_agent_factory(parse_agent_spec("scripted"), cfg), cfg);
    auto reflect =
        run_eval(tasks, make_agent_factory(parse_agent_spec("scripted+reflect:sim"), cfg), cfg);

    std::printf("%-10s%-12s%-12s\n", "task", "plain", "reflect");
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        std::printf("%-10s%-12s%-12s\n", tasks[i].id.c_str(),
                    plain.episodes[i].success ? "solved" : "failed",
                    reflect.episodes[i].success ? "solved" : "failed");
    }
    std::printf("success: plain %.0f%%, reflect %.0f%%\n", 100.0 * plain.success_mean,
                100.0 * reflect.success_mean);
    return 0;
}
