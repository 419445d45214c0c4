#pragma once

#include <interlock/env.hpp>

#include <algorithm>
#include <stdexcept>

namespace interlock {

struct Unsolvable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Privileged inputs for the oracle: the dependency graph plus a total
// tie-break order over bricks.
struct ExpertContext {
    const TaskInstance* task = nullptr;
    std::vector<PieceId> order;  // candidate preference, default ascending id
};

inline ExpertContext make_expert_context(const TaskInstance& task) {
    ExpertContext ctx;
    ctx.task = &task;
    ctx.order = task.brick_ids();
    std::sort(ctx.order.begin(), ctx.order.end());
    return ctx;
}

// Rule-based oracle over full state. With a piece in hand it reorients,
// inserts, or puts it back depending on its status; with an empty hand it
// picks up the preferred READY/BAD_D piece, removes a blocking piece, or
// claims done.
inline Action expert_action(const WorldState& s, const ExpertContext& ctx) {
    const TaskInstance& task = *ctx.task;
    auto status = classify_all(s, task);

    if (s.in_hand != kNoPiece) {
        const PieceId held = s.in_hand;
        bool preds_done = true;
        for (PieceId p : task.deps.predecessors_of(held))
            if (status[task.piece_index(p)] != PieceStatus::done) preds_done = false;
        if (!preds_done) return Action{Verb::put_down, held};
        PieceStatus held_status = status[task.piece_index(held)];
        if (held_status == PieceStatus::bad_d) return Action{Verb::reorient, held};
        if (held_status == PieceStatus::blocked_s) return Action{Verb::put_down, held};
        return Action{Verb::insert, held};
    }

    switch (global_status(s, task)) {
        case TaskStatus::ready:
            for (PieceId id : ctx.order) {
                PieceStatus st = status[task.piece_index(id)];
                if (st == PieceStatus::ready || st == PieceStatus::bad_d)
                    return Action{Verb::pick_up, id};
            }
            break;
        case TaskStatus::bad_b: {
            // Prefer the blocker with the fewest inserted successors.
            PieceId best = kNoPiece;
            std::size_t best_blockers = 0;
            for (PieceId id : ctx.order) {
                if (status[task.piece_index(id)] != PieceStatus::bad_b) continue;
                std::size_t inserted_succ = 0;
                for (PieceId succ : task.deps.successors_of(id))
                    if (s.location[task.piece_index(succ)] == Location::in_board) ++inserted_succ;
                if (best == kNoPiece || inserted_succ < best_blockers) {
                    best = id;
                    best_blockers = inserted_succ;
                }
            }
            if (best != kNoPiece) return Action{Verb::pick_up, best};
            break;
        }
        case TaskStatus::done: return Action{Verb::done, kNoPiece};
    }
    throw std::logic_error("expert_action: unreachable state classification");
}

// Number of noise-free steps the expert needs from `s`; 0 when `s` is
// already assembled. Throws Unsolvable past `cap` steps.
inline int expert_rollout_length(WorldState s, const ExpertContext& ctx, int cap = 50) {
    int steps = 0;
    while (!is_success(s)) {
        if (steps >= cap)
            throw Unsolvable("expert exceeded " + std::to_string(cap) + " steps");
        Action a = expert_action(s, ctx);
        detail::apply_action(s, a, *ctx.task);
        ++steps;
    }
    return steps;
}

// Taskgen's solvability gate: true iff the noise-free expert reaches
// success from the initial configuration within `max_steps`.
inline bool validate_solvable(const TaskInstance& task, int max_steps = 50) {
    EnvConfig cfg;
    cfg.max_steps = max_steps;
    WorldState s = initial_state(task, cfg);
    ExpertContext ctx = make_expert_context(task);
    try {
        return expert_rollout_length(std::move(s), ctx, max_steps) <= max_steps;
    } catch (const Unsolvable&) {
        return false;
    }
}

}  // namespace interlock
