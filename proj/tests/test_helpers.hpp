#pragma once

#include <interlock/interlock.hpp>

#include <string>
#include <vector>

namespace testutil {

using namespace interlock;

// Minimal legal task: a one-layer base with single-voxel pegs above it and
// an explicit dependency edge list over the pegs (geometry stays trivial;
// the environment only consults the edges).
inline TaskInstance make_peg_task(int pegs, std::vector<std::pair<PieceId, PieceId>> edges,
                                  std::vector<InitPlacement> init = {}) {
    TaskInstance task;
    task.id = "peg-" + std::to_string(pegs);
    task.seed = 0;
    task.goal = VoxelGrid(Dims{pegs + 2, 1, 2});
    for (int x = 0; x < pegs + 2; ++x) task.goal.at(x, 0, 0) = kBasePiece;

    Piece base;
    base.id = kBasePiece;
    base.color = std::string(kBaseColor);
    for (int x = 0; x < pegs + 2; ++x) base.cells.push_back({x, 0, 0});
    task.pieces.push_back(base);

    for (int k = 0; k < pegs; ++k) {
        Piece p;
        p.id = PieceId(k + 2);
        p.color = std::string(kBrickPalette[std::size_t(k)]);
        p.cells.push_back({k + 1, 0, 1});
        task.goal.at(k + 1, 0, 1) = p.id;
        task.pieces.push_back(p);
        task.deps.nodes.push_back(p.id);
    }
    task.deps.edges = std::move(edges);

    if (init.empty()) {
        task.init.assign(task.pieces.size(), InitPlacement{Location::on_table, Orientation::up});
        task.init[0] = InitPlacement{Location::in_board, Orientation::up};
    } else {
        task.init = std::move(init);
    }
    validate_task(task);
    return task;
}

inline TaskInstance make_chain_task(int pegs) {
    std::vector<std::pair<PieceId, PieceId>> edges;
    for (int k = 0; k < pegs - 1; ++k) edges.emplace_back(PieceId(k + 2), PieceId(k + 3));
    return make_peg_task(pegs, std::move(edges));
}

inline std::vector<TaskInstance> generated_tasks(int count, std::uint64_t seed,
                                                 GenParams params = GenParams{}) {
    std::vector<TaskInstance> tasks;
    tasks.reserve(std::size_t(count));
    for (int i = 0; i < count; ++i)
        tasks.push_back(make_task(params, derive_seed(seed, {std::uint64_t(i)}),
                                  "task-" + std::to_string(i)));
    return tasks;
}

inline bool has_preinserted_brick(const TaskInstance& task) {
    for (std::size_t i = 1; i < task.init.size(); ++i)
        if (task.init[i].location == Location::in_board) return true;
    return false;
}

}  // namespace testutil
