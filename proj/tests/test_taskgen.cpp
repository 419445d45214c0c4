#include "test_helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

using namespace interlock;

namespace {

// Independent cycle oracle (DFS three-coloring; the library uses Kahn's).
bool dfs_acyclic(const DependencyGraph& g) {
    std::map<PieceId, std::vector<PieceId>> adj;
    for (PieceId n : g.nodes) adj[n];
    for (const auto& [a, b] : g.edges) adj[a].push_back(b);
    std::map<PieceId, int> color;  // 0 white, 1 gray, 2 black
    std::function<bool(PieceId)> visit = [&](PieceId n) {
        color[n] = 1;
        for (PieceId m : adj[n]) {
            if (color[m] == 1) return false;
            if (color[m] == 0 && !visit(m)) return false;
        }
        color[n] = 2;
        return true;
    };
    for (PieceId n : g.nodes)
        if (color[n] == 0 && !visit(n)) return false;
    return true;
}

std::size_t nonzero_cells(const VoxelGrid& grid) {
    std::size_t n = 0;
    for (PieceId v : grid.cells)
        if (v != kNoPiece) ++n;
    return n;
}

}  // namespace

TEST_CASE("board generation is deterministic in (params, seed)") {
    GenParams params;
    for (std::uint64_t seed : {0ULL, 7ULL, 991ULL}) {
        BoardGeometry a = generate_board(params, seed);
        BoardGeometry b = generate_board(params, seed);
        REQUIRE(a.grid == b.grid);
        REQUIRE(a.pieces.size() == b.pieces.size());
        for (std::size_t i = 0; i < a.pieces.size(); ++i) {
            REQUIRE(a.pieces[i].id == b.pieces[i].id);
            REQUIRE(a.pieces[i].color == b.pieces[i].color);
            REQUIRE(a.pieces[i].cells == b.pieces[i].cells);
        }
        REQUIRE(a.max_height == b.max_height);
    }
}

TEST_CASE("a brick protruding above a (12,12,3) base raises max_height to 4") {
    GenParams params;
    params.base_x = {12, 12};
    params.base_y = {12, 12};
    params.base_z = {3, 3};
    params.brick_count = {1, 1};
    params.brick_z = {4, 4};
    BoardGeometry geom = generate_board(params, 5);
    REQUIRE(geom.max_height == 4);
    REQUIRE(occupied_layers(geom.grid) == 4);
}

TEST_CASE("zero brick count leaves only the base") {
    GenParams params;
    params.brick_count = {0, 0};
    BoardGeometry geom = generate_board(params, 3);
    REQUIRE(geom.pieces.size() == 1);
    for (PieceId v : geom.grid.cells) REQUIRE((v == kNoPiece || v == kBasePiece));
    REQUIRE(nonzero_cells(geom.grid) == geom.pieces[0].cells.size());
}

TEST_CASE("piece cells partition the occupied grid and stay connected") {
    GenParams params;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        BoardGeometry geom = generate_board(params, seed);
        std::size_t total = 0;
        for (const Piece& p : geom.pieces) {
            REQUIRE(!p.cells.empty());
            REQUIRE(is_face_connected(p.cells));
            total += p.cells.size();
        }
        REQUIRE(total == nonzero_cells(geom.grid));
    }
}

TEST_CASE("keeper of the critical voxels precedes the other piece") {
    BoardGeometry geom;
    geom.intersections.push_back({2, 3, 2});  // red kept the intersection with blue
    Piece base{kBasePiece, std::string(kBaseColor), {{0, 0, 0}}};
    Piece red{2, "red", {{1, 0, 0}}};
    Piece blue{3, "blue", {{2, 0, 0}}};
    geom.pieces = {base, red, blue};
    DependencyGraph deps = derive_dependencies(geom);
    REQUIRE(deps.edges == std::vector<std::pair<PieceId, PieceId>>{{2, 3}});

    geom.intersections[0].keeper = 3;  // flip the assignment, flip the edge
    deps = derive_dependencies(geom);
    REQUIRE(deps.edges == std::vector<std::pair<PieceId, PieceId>>{{3, 2}});
}

TEST_CASE("single-brick boards have no dependency edges") {
    GenParams params;
    params.brick_count = {1, 1};
    BoardGeometry geom = generate_board(params, 11);
    REQUIRE(derive_dependencies(geom).edges.empty());
}

TEST_CASE("dependency graphs pass an independent topological oracle") {
    GenParams params;
    params.brick_count = {6, 6};
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        BoardGeometry geom = generate_board(params, seed);
        DependencyGraph deps = derive_dependencies(geom);
        REQUIRE(dfs_acyclic(deps));
        REQUIRE(deps.topological_order().has_value());
    }
}

TEST_CASE("generation exhausts when no legal placement exists") {
    GenParams params;
    params.base_x = {2, 2};
    params.base_y = {2, 2};
    params.base_z = {1, 1};
    params.brick_count = {1, 1};
    params.brick_x = {2, 2};
    params.brick_y = {2, 2};
    params.brick_z = {2, 2};
    params.max_attempts = 3;
    // the only placement swallows the whole base, which is rejected
    REQUIRE_THROWS_AS(generate_board(params, 0), GenerationExhausted);
}

TEST_CASE("initial config degenerate probabilities") {
    GenParams params;
    params.q_down = 0.0;
    params.r_bad = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        TaskInstance task = make_task(params, seed);
        for (std::size_t i = 1; i < task.init.size(); ++i) {
            REQUIRE(task.init[i].location == Location::on_table);
            REQUIRE(task.init[i].orientation == Orientation::up);
        }
    }
}

TEST_CASE("r_bad=1 pre-inserts a piece that classifies BAD_B") {
    GenParams params;
    params.r_bad = 1.0;
    int prebad_seen = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        TaskInstance task = make_task(params, seed);
        if (task.deps.edges.empty()) continue;  // no eligible piece possible
        REQUIRE(testutil::has_preinserted_brick(task));
        ++prebad_seen;
        EnvConfig cfg;
        WorldState s = initial_state(task, cfg);
        bool bad_b_found = false;
        for (PieceId id : task.brick_ids()) {
            if (task.init[task.piece_index(id)].location != Location::in_board) continue;
            REQUIRE(classify_piece(s, task, id) == PieceStatus::bad_b);
            bad_b_found = true;
        }
        REQUIRE(bad_b_found);
    }
    REQUIRE(prebad_seen > 10);
}

TEST_CASE("identical (params, seed) yields byte-identical task records") {
    GenParams params;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        TaskInstance a = make_task(params, seed);
        TaskInstance b = make_task(params, seed);
        REQUIRE(canonical(to_json(a)) == canonical(to_json(b)));
    }
}

TEST_CASE("sampled tasks are expert-solvable") {
    GenParams params;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        TaskInstance task = make_task(params, seed);
        REQUIRE(validate_solvable(task));
    }
}

TEST_CASE("fully pre-assembled task counts as solvable with zero expert steps") {
    TaskInstance task = testutil::make_peg_task(
        2, {{2, 3}},
        {InitPlacement{Location::in_board, Orientation::up},
         InitPlacement{Location::in_board, Orientation::up},
         InitPlacement{Location::in_board, Orientation::up}});
    REQUIRE(validate_solvable(task));
    EnvConfig cfg;
    WorldState s = initial_state(task, cfg);
    REQUIRE(expert_rollout_length(s, make_expert_context(task)) == 0);
}

TEST_CASE("chain with successor pre-inserted is solvable via removal") {
    TaskInstance task = testutil::make_peg_task(
        2, {{2, 3}},
        {InitPlacement{Location::in_board, Orientation::up},
         InitPlacement{Location::on_table, Orientation::up},
         InitPlacement{Location::in_board, Orientation::up}});
    REQUIRE(validate_solvable(task));
    EnvConfig cfg;
    WorldState s = initial_state(task, cfg);
    ExpertContext ctx = make_expert_context(task);
    // first expert move must be removing the blocker
    REQUIRE(expert_action(s, ctx) == Action{Verb::pick_up, 3});
}
