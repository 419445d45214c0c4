#include "test_helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace interlock;
using testutil::make_peg_task;

TEST_CASE("disabled reflection degenerates to the top proposal") {
    TaskInstance task = make_peg_task(2, {});
    Environment env = make_environment(task, EnvConfig{});
    OracleDynamics dynamics(task);
    ScriptedLearner policy;
    PlannerConfig cfg;
    cfg.reflection_enabled = false;
    auto [action, trace] =
        plan_step(policy, dynamics, env.goal_observation(), env.observation(), cfg);
    auto req = make_proposal_request(env.goal_observation(), env.observation());
    REQUIRE(action == policy.propose(req, 1).first());
    REQUIRE(trace.plan.empty());
    REQUIRE(trace.imagined.empty());
}

TEST_CASE("one-step imagination with oracle dynamics matches the real next observation") {
    TaskInstance task = make_peg_task(2, {});
    EnvConfig env_cfg;
    Environment env = make_environment(task, env_cfg);
    OracleDynamics dynamics(task, env_cfg.history_len);
    ScriptedLearner policy;
    PlannerConfig cfg;
    cfg.horizon = 1;
    auto [action, trace] =
        plan_step(policy, dynamics, env.goal_observation(), env.observation(), cfg);
    REQUIRE(trace.plan.size() == 1);
    Action imagined = task.grammar().parse(trace.plan[0]);
    auto [real_next, outcome] = env.step(imagined);
    REQUIRE(serialize_observation(trace.imagined[0]) == serialize_observation(real_next));
}

TEST_CASE("trace keeps exactly one imagined observation per planned action") {
    TaskInstance task = make_peg_task(3, {});
    Environment env = make_environment(task, EnvConfig{});
    OracleDynamics dynamics(task);
    ScriptedLearner policy;
    for (int horizon : {1, 2, 5, 9}) {
        PlannerConfig cfg;
        cfg.horizon = horizon;
        auto [action, trace] =
            plan_step(policy, dynamics, env.goal_observation(), env.observation(), cfg);
        REQUIRE(trace.plan.size() == trace.imagined.size());
        REQUIRE(int(trace.plan.size()) <= horizon);
    }
}

TEST_CASE("imagination truncates after an imagined done") {
    // single piece already inserted: the learner immediately imagines done
    TaskInstance task = make_peg_task(
        1, {}, {InitPlacement{Location::in_board, Orientation::up},
                InitPlacement{Location::in_board, Orientation::up}});
    Environment env = make_environment(task, EnvConfig{});
    OracleDynamics dynamics(task);
    ScriptedLearner policy;
    PlannerConfig cfg;
    cfg.horizon = 5;
    auto [action, trace] =
        plan_step(policy, dynamics, env.goal_observation(), env.observation(), cfg);
    REQUIRE(trace.plan.size() == 1);
    REQUIRE(trace.plan[0] == "done");
    REQUIRE(trace.imagined.size() == 1);
}

TEST_CASE("endorsing reflector makes reflective planning equal non-reflective") {
    GenParams params;
    params.r_bad = 0.3;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        TaskInstance task = make_task(params, seed);
        EnvConfig env_cfg;
        Environment with = make_environment(task, env_cfg);
        Environment without = make_environment(task, env_cfg);
        OracleDynamics dynamics(task, env_cfg.history_len);
        EndorsingReflector policy(std::make_unique<ScriptedLearner>());
        PlannerConfig on;
        PlannerConfig off;
        off.reflection_enabled = false;
        while (!with.terminated() && !without.terminated()) {
            auto [a1, t1] = plan_step(policy, dynamics, with.goal_observation(),
                                      with.observation(), on);
            auto [a2, t2] = plan_step(policy, dynamics, without.goal_observation(),
                                      without.observation(), off);
            REQUIRE(a1 == a2);
            with.step(a1);
            without.step(a2);
        }
        REQUIRE(with.success() == without.success());
    }
}

TEST_CASE("plan_step leaves the live environment untouched") {
    TaskInstance task = make_task(GenParams{}, 5);
    EnvConfig cfg;
    cfg.epsilon = 0.5;  // live RNG state must survive planning untouched
    cfg.seed = 4;
    Environment env = make_environment(task, cfg);
    OracleDynamics dynamics(task, cfg.history_len);
    HeuristicReflector policy(std::make_unique<ScriptedLearner>());
    WorldState before = env.state();
    plan_step(policy, dynamics, env.goal_observation(), env.observation(), PlannerConfig{});
    REQUIRE(env.state() == before);
}

TEST_CASE("oracle reflector with oracle dynamics matches plain expert success") {
    GenParams params;
    params.r_bad = 0.4;
    int solved = 0;
    const int tasks = 40;
    for (std::uint64_t seed = 0; seed < tasks; ++seed) {
        TaskInstance task = make_task(params, seed);
        EnvConfig env_cfg;
        Environment env = make_environment(task, env_cfg);
        OracleDynamics dynamics(task, env_cfg.history_len);
        OracleReflector policy(task, std::make_unique<ScriptedLearner>());
        PlannerConfig cfg;
        while (!env.terminated()) {
            auto [action, trace] =
                plan_step(policy, dynamics, env.goal_observation(), env.observation(), cfg);
            auto [obs, outcome] = env.step(action);
            if (outcome == StepOutcome::success) break;
        }
        if (env.success()) ++solved;
    }
    REQUIRE(solved == tasks);  // expert itself solves 100% at epsilon=0
}
