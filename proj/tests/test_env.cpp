#include "test_helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace interlock;
using testutil::make_chain_task;
using testutil::make_peg_task;

TEST_CASE("reset mirrors the initial configuration") {
    TaskInstance task = make_chain_task(2);
    Environment env = make_environment(task, EnvConfig{});
    Observation obs = env.reset();
    for (PieceId v : obs.board.cells) REQUIRE((v == kNoPiece || v == kBasePiece));
    REQUIRE(obs.in_hand == kNoPiece);
    REQUIRE(obs.history.empty());

    TaskInstance prebad = make_peg_task(
        2, {{2, 3}},
        {InitPlacement{Location::in_board, Orientation::up},
         InitPlacement{Location::on_table, Orientation::up},
         InitPlacement{Location::in_board, Orientation::up}});
    Environment env2 = make_environment(prebad, EnvConfig{});
    Observation obs2 = env2.reset();
    for (const Coord& c : prebad.piece(3).cells) REQUIRE(obs2.board.at(c) == 3);
}

TEST_CASE("identical (task, seed) resets produce identical observation bytes") {
    TaskInstance task = make_task(GenParams{}, 31);
    EnvConfig cfg;
    cfg.seed = 9;
    Environment a = make_environment(task, cfg);
    Environment b = make_environment(task, cfg);
    REQUIRE(serialize_observation(a.observation()) == serialize_observation(b.observation()));
}

TEST_CASE("insert with an unmet predecessor is an invalid no-op") {
    TaskInstance task = make_chain_task(2);  // 2 -> 3
    Environment env = make_environment(task, EnvConfig{});
    env.step(Action{Verb::pick_up, 3});
    WorldState before = env.state();
    auto [obs, outcome] = env.step(Action{Verb::insert, 3});
    REQUIRE(outcome == StepOutcome::invalid);
    REQUIRE(env.state().in_hand == 3);
    REQUIRE(env.state().location == before.location);
    REQUIRE(env.state().t == before.t + 1);
}

TEST_CASE("insert also fails while a successor occupies the board") {
    TaskInstance task = make_peg_task(
        2, {{2, 3}},
        {InitPlacement{Location::in_board, Orientation::up},
         InitPlacement{Location::on_table, Orientation::up},
         InitPlacement{Location::in_board, Orientation::up}});
    Environment env = make_environment(task, EnvConfig{});
    env.step(Action{Verb::pick_up, 2});
    auto [obs, outcome] = env.step(Action{Verb::insert, 2});
    REQUIRE(outcome == StepOutcome::invalid);
    REQUIRE(env.state().in_hand == 2);
}

TEST_CASE("epsilon=1 freezes the world while the clock advances") {
    TaskInstance task = make_chain_task(2);
    EnvConfig cfg;
    cfg.epsilon = 1.0;
    Environment env = make_environment(task, cfg);
    WorldState initial = env.state();
    for (int i = 0; i < 5; ++i) {
        auto [obs, outcome] = env.step(Action{Verb::pick_up, 2});
        REQUIRE(outcome == StepOutcome::primitive_failed);
    }
    REQUIRE(env.state().location == initial.location);
    REQUIRE(env.state().t == 5);
}

TEST_CASE("expert action sequence on a 3-chain reaches success with all pieces DONE") {
    TaskInstance task = make_chain_task(3);
    Environment env = make_environment(task, EnvConfig{});
    ExpertContext ctx = make_expert_context(task);
    StepOutcome last = StepOutcome::ok;
    while (!env.terminated()) {
        auto [obs, outcome] = env.step(expert_action(env.state(), ctx));
        last = outcome;
    }
    REQUIRE(last == StepOutcome::success);
    auto status = classify_all(env.state(), task);
    for (PieceId id : task.brick_ids())
        REQUIRE(status[task.piece_index(id)] == PieceStatus::done);
}

TEST_CASE("piece classification follows the status rules") {
    TaskInstance task = make_peg_task(2, {{2, 3}});
    EnvConfig cfg;
    WorldState s = initial_state(task, cfg);

    SECTION("both inserted in order: DONE") {
        s.location[task.piece_index(2)] = Location::in_board;
        s.location[task.piece_index(3)] = Location::in_board;
        REQUIRE(classify_piece(s, task, 2) == PieceStatus::done);
        REQUIRE(classify_piece(s, task, 3) == PieceStatus::done);
        REQUIRE(global_status(s, task) == TaskStatus::done);
    }
    SECTION("only successor inserted: BAD_B, predecessor BLOCKED_S") {
        s.location[task.piece_index(3)] = Location::in_board;
        REQUIRE(classify_piece(s, task, 3) == PieceStatus::bad_b);
        REQUIRE(classify_piece(s, task, 2) == PieceStatus::blocked_s);
        REQUIRE(global_status(s, task) == TaskStatus::bad_b);
    }
    SECTION("successor waits for predecessor: BLOCKED_P") {
        REQUIRE(classify_piece(s, task, 3) == PieceStatus::blocked_p);
    }
    SECTION("down piece with no dependencies: BAD_D") {
        s.orientation[task.piece_index(2)] = Orientation::down;
        REQUIRE(classify_piece(s, task, 2) == PieceStatus::bad_d);
        REQUIRE(global_status(s, task) == TaskStatus::ready);
    }
    SECTION("fresh start: READY") {
        REQUIRE(classify_piece(s, task, 2) == PieceStatus::ready);
        REQUIRE(global_status(s, task) == TaskStatus::ready);
    }
}

TEST_CASE("pick up then put down restores table location and orientation") {
    TaskInstance task = make_peg_task(1, {});
    Environment env = make_environment(task, EnvConfig{});
    WorldState before = env.state();
    env.step(Action{Verb::pick_up, 2});
    env.step(Action{Verb::put_down, 2});
    REQUIRE(env.state().location == before.location);
    REQUIRE(env.state().orientation == before.orientation);
}

TEST_CASE("done claim: invalid when unsatisfied, success when assembled") {
    TaskInstance task = make_peg_task(1, {});
    Environment env = make_environment(task, EnvConfig{});
    auto [o1, r1] = env.step(Action{Verb::done, kNoPiece});
    REQUIRE(r1 == StepOutcome::invalid);
    env.step(Action{Verb::pick_up, 2});
    auto [o2, r2] = env.step(Action{Verb::insert, 2});
    REQUIRE(r2 == StepOutcome::success);  // auto-detected
}

TEST_CASE("base and malformed targets are rejected without state change") {
    TaskInstance task = make_peg_task(1, {});
    Environment env = make_environment(task, EnvConfig{});
    auto [o1, r1] = env.step(Action{Verb::pick_up, kBasePiece});
    REQUIRE(r1 == StepOutcome::invalid);
    auto [o2, r2] = env.step(Action{Verb::pick_up, 99});
    REQUIRE(r2 == StepOutcome::invalid);
    REQUIRE(env.state().in_hand == kNoPiece);
    REQUIRE(env.state().t == 2);
}

TEST_CASE("episode times out at T without success") {
    TaskInstance task = make_peg_task(1, {});
    EnvConfig cfg;
    cfg.max_steps = 3;
    Environment env = make_environment(task, cfg);
    StepOutcome last = StepOutcome::ok;
    for (int i = 0; i < 3; ++i) {
        auto [obs, outcome] = env.step(Action{Verb::done, kNoPiece});
        last = outcome;
    }
    REQUIRE(last == StepOutcome::timeout);
    REQUIRE(env.terminated());
}

TEST_CASE("trajectories are reproducible under primitive noise") {
    TaskInstance task = make_task(GenParams{}, 77);
    EnvConfig cfg;
    cfg.epsilon = 0.4;
    cfg.seed = 5;
    ExpertContext ctx = make_expert_context(task);
    auto run = [&] {
        Environment env = make_environment(task, cfg);
        std::vector<std::string> outcomes;
        while (!env.terminated()) {
            auto [obs, outcome] = env.step(expert_action(env.state(), ctx));
            outcomes.push_back(std::string(to_string(outcome)));
        }
        return outcomes;
    };
    REQUIRE(run() == run());
}

TEST_CASE("classification is total over random reachable states") {
    TaskInstance task = make_task(GenParams{}, 13);
    Environment env = make_environment(task, EnvConfig{.epsilon = 0.0, .max_steps = 200});
    Rng rng(3);
    ActionGrammar grammar = task.grammar();
    std::vector<Action> actions = grammar.all_actions();
    for (int i = 0; i < 200 && !env.terminated(); ++i) {
        env.step(actions[rng.bounded(actions.size())]);
        auto status = classify_all(env.state(), task);
        REQUIRE(status.size() == task.pieces.size());
        int in_board = 0, elsewhere = 0;
        for (PieceId id : task.brick_ids()) {
            Location loc = env.state().location[task.piece_index(id)];
            (loc == Location::in_board ? in_board : elsewhere) += 1;
            PieceStatus st = status[task.piece_index(id)];
            if (loc == Location::in_board)
                REQUIRE((st == PieceStatus::done || st == PieceStatus::bad_b));
            else
                REQUIRE((st == PieceStatus::ready || st == PieceStatus::bad_d ||
                         st == PieceStatus::blocked_p || st == PieceStatus::blocked_s));
        }
    }
}
