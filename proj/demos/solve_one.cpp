// Generates one task and lets the privileged expert solve it, printing each
// action and outcome.

#include <interlock/interlock.hpp>

#include <cstdio>

using namespace interlock;

int main() {
    GenParams params;
    TaskInstance task = make_task(params, 42);
    std::printf("task %s: %zu bricks, %zu dependency edges\n", task.id.c_str(),
                task.pieces.size() - 1, task.deps.edges.size());
    for (const auto& [a, b] : task.deps.edges)
        std::printf("  %s before %s\n", task.piece(a).color.c_str(), task.piece(b).color.c_str());

    Environment env = make_environment(task, EnvConfig{});
    ExpertContext ctx = make_expert_context(task);
    while (!env.terminated()) {
        Action a = expert_action(env.state(), ctx);
        auto [obs, outcome] = env.step(a);
        std::printf("t=%-3d %-18s -> %s\n", env.state().t, env.grammar().format(a).c_str(),
                    std::string(to_string(outcome)).c_str());
        if (outcome == StepOutcome::success) break;
    }
    return env.success() ? 0 : 1;
}
