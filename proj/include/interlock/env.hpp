#pragma once

#include <interlock/core.hpp>
#include <interlock/rng.hpp>
#include <interlock/task_gen.hpp>

#include <deque>
#include <string>
#include <vector>

namespace interlock {

struct EnvConfig {
    double epsilon = 0.0;  // per-primitive failure probability
    int max_steps = 50;    // episode length T
    int history_len = 5;   // actions kept in the observation history
    std::uint64_t seed = 0;

    void validate() const {
        if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("epsilon outside [0,1]");
        if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
        if (history_len < 0) throw std::invalid_argument("history_len must be >= 0");
    }
};

// Full privileged state. `recent` is the rolling action-text history that
// feeds the observation; it travels with the state so the observation map
// stays a pure function of it.
struct WorldState {
    std::vector<Location> location;        // by piece index (base included)
    std::vector<Orientation> orientation;  // meaningful while not in_board
    PieceId in_hand = kNoPiece;
    int t = 0;
    Rng failure_rng;
    std::deque<std::string> recent;

    bool operator==(const WorldState&) const = default;
};

inline WorldState initial_state(const TaskInstance& task, const EnvConfig& cfg) {
    WorldState s;
    s.location.reserve(task.pieces.size());
    s.orientation.reserve(task.pieces.size());
    for (const InitPlacement& p : task.init) {
        s.location.push_back(p.location);
        s.orientation.push_back(p.orientation);
    }
    s.failure_rng = Rng(derive_seed(cfg.seed, {0x9d}));
    return s;
}

inline bool is_success(const WorldState& s) {
    for (std::size_t i = 1; i < s.location.size(); ++i)
        if (s.location[i] != Location::in_board) return false;
    return true;
}

// Status of every piece in one pass; DONE propagates along the DAG.
inline std::vector<PieceStatus> classify_all(const WorldState& s, const TaskInstance& task) {
    const std::size_t n = task.pieces.size();
    std::vector<bool> done(n, false);
    done[0] = true;  // base
    auto order = task.deps.topological_order();
    if (!order) throw std::logic_error("classify_all: cyclic dependency graph");
    for (PieceId id : *order) {
        std::size_t i = task.piece_index(id);
        if (s.location[i] != Location::in_board) continue;
        bool preds_done = true;
        for (PieceId p : task.deps.predecessors_of(id))
            if (!done[task.piece_index(p)]) preds_done = false;
        done[i] = preds_done;
    }
    std::vector<PieceStatus> status(n, PieceStatus::done);
    for (PieceId id : task.brick_ids()) {
        std::size_t i = task.piece_index(id);
        if (s.location[i] == Location::in_board) {
            status[i] = done[i] ? PieceStatus::done : PieceStatus::bad_b;
            continue;
        }
        bool successor_in = false;
        for (PieceId succ : task.deps.successors_of(id))
            if (s.location[task.piece_index(succ)] == Location::in_board) successor_in = true;
        if (successor_in) {
            status[i] = PieceStatus::blocked_s;
            continue;
        }
        bool preds_done = true;
        for (PieceId p : task.deps.predecessors_of(id))
            if (!done[task.piece_index(p)]) preds_done = false;
        if (!preds_done)
            status[i] = PieceStatus::blocked_p;
        else if (s.orientation[i] == Orientation::down)
            status[i] = PieceStatus::bad_d;
        else
            status[i] = PieceStatus::ready;
    }
    return status;
}

inline PieceStatus classify_piece(const WorldState& s, const TaskInstance& task, PieceId id) {
    return classify_all(s, task)[task.piece_index(id)];
}

inline TaskStatus global_status(const WorldState& s, const TaskInstance& task) {
    auto status = classify_all(s, task);
    bool all_done = true;
    bool any_ready = false;
    for (PieceId id : task.brick_ids()) {
        PieceStatus st = status[task.piece_index(id)];
        if (st != PieceStatus::done) all_done = false;
        if (st == PieceStatus::ready || st == PieceStatus::bad_d) any_ready = true;
    }
    if (all_done) return TaskStatus::done;
    return any_ready ? TaskStatus::ready : TaskStatus::bad_b;
}

enum class StepOutcome { ok, primitive_failed, invalid, success, timeout };

inline std::string_view to_string(StepOutcome o) {
    switch (o) {
        case StepOutcome::ok: return "ok";
        case StepOutcome::primitive_failed: return "primitive_failed";
        case StepOutcome::invalid: return "invalid";
        case StepOutcome::success: return "success";
        case StepOutcome::timeout: return "timeout";
    }
    return "";
}

namespace detail {

// Transition rules without clock, RNG, or history bookkeeping. Returns ok,
// invalid, or success (the latter only for a satisfied `done` claim).
inline StepOutcome apply_action(WorldState& s, const Action& a, const TaskInstance& task) {
    if (a.verb == Verb::done) return is_success(s) ? StepOutcome::success : StepOutcome::invalid;
    if (a.target < 2 || std::size_t(a.target) > task.pieces.size()) return StepOutcome::invalid;
    const std::size_t i = task.piece_index(a.target);
    switch (a.verb) {
        case Verb::pick_up: {
            if (s.in_hand != kNoPiece) return StepOutcome::invalid;
            s.location[i] = Location::in_hand;
            s.in_hand = a.target;
            return StepOutcome::ok;
        }
        case Verb::put_down: {
            if (s.in_hand != a.target) return StepOutcome::invalid;
            s.location[i] = Location::on_table;
            s.in_hand = kNoPiece;
            return StepOutcome::ok;
        }
        case Verb::reorient: {
            if (s.in_hand != a.target) return StepOutcome::invalid;
            s.orientation[i] = Orientation::up;
            return StepOutcome::ok;
        }
        case Verb::insert: {
            if (s.in_hand != a.target) return StepOutcome::invalid;
            if (s.orientation[i] != Orientation::up) return StepOutcome::invalid;
            for (PieceId p : task.deps.predecessors_of(a.target))
                if (s.location[task.piece_index(p)] != Location::in_board)
                    return StepOutcome::invalid;
            for (PieceId succ : task.deps.successors_of(a.target))
                if (s.location[task.piece_index(succ)] == Location::in_board)
                    return StepOutcome::invalid;
            s.location[i] = Location::in_board;
            s.orientation[i] = Orientation::up;
            s.in_hand = kNoPiece;
            return StepOutcome::ok;
        }
        default: return StepOutcome::invalid;
    }
}

inline void push_history(WorldState& s, std::string text, int history_len) {
    s.recent.push_back(std::move(text));
    while (int(s.recent.size()) > history_len) s.recent.pop_front();
}

}  // namespace detail

// Partial observation: everything in the state except the dependency graph.
struct Observation {
    struct PieceView {
        PieceId id = kNoPiece;
        std::string color;
        Location location = Location::on_table;
        Orientation orientation = Orientation::up;
        bool operator==(const PieceView&) const = default;
    };
    VoxelGrid board;  // current occupancy, same dims as the goal grid
    std::vector<PieceView> pieces;
    PieceId in_hand = kNoPiece;
    std::string task_id;
    std::string goal_hash;  // content address of the goal board
    std::vector<std::string> history;

    bool operator==(const Observation&) const = default;
};

// The observation map Z. `goal_hash` is precomputed by the caller (it only
// depends on the task) so observing stays cheap.
inline Observation observe(const WorldState& s, const TaskInstance& task, std::string goal_hash) {
    Observation obs;
    obs.board = VoxelGrid(task.goal.dims);
    for (const Piece& p : task.pieces) {
        if (s.location[task.piece_index(p.id)] != Location::in_board) continue;
        for (const Coord& c : p.cells) obs.board.at(c) = p.id;
    }
    obs.pieces.reserve(task.pieces.size());
    for (const Piece& p : task.pieces) {
        std::size_t i = task.piece_index(p.id);
        obs.pieces.push_back({p.id, p.color, s.location[i], s.orientation[i]});
    }
    obs.in_hand = s.in_hand;
    obs.task_id = task.id;
    obs.goal_hash = std::move(goal_hash);
    obs.history.assign(s.recent.begin(), s.recent.end());
    return obs;
}

class Environment {
  public:
    Environment(const TaskInstance& task, EnvConfig cfg, std::string goal_hash)
        : task_(&task), cfg_(cfg), grammar_(task.pieces), goal_hash_(std::move(goal_hash)) {
        cfg_.validate();
        reset();
    }

    Observation reset() {
        state_ = initial_state(*task_, cfg_);
        return observation();
    }

    // Applies one action: clock always advances, primitives fail with
    // probability epsilon, success is auto-detected, and T expiring without
    // success reports timeout.
    std::pair<Observation, StepOutcome> step(const Action& a) {
        state_.t += 1;
        StepOutcome outcome;
        if (a.verb != Verb::done && cfg_.epsilon > 0.0 &&
            state_.failure_rng.bernoulli(cfg_.epsilon)) {
            outcome = StepOutcome::primitive_failed;
        } else {
            outcome = detail::apply_action(state_, a, *task_);
        }
        detail::push_history(state_, grammar_.format(a), cfg_.history_len);
        if (is_success(state_))
            outcome = StepOutcome::success;
        else if (state_.t >= cfg_.max_steps)
            outcome = StepOutcome::timeout;
        return {observation(), outcome};
    }

    Observation observation() const { return observe(state_, *task_, goal_hash_); }

    // Observation of the fully assembled board (the goal image).
    Observation goal_observation() const {
        WorldState g;
        g.location.assign(task_->pieces.size(), Location::in_board);
        g.orientation.assign(task_->pieces.size(), Orientation::up);
        return observe(g, *task_, goal_hash_);
    }

    bool success() const { return is_success(state_); }
    bool terminated() const { return success() || state_.t >= cfg_.max_steps; }

    const WorldState& state() const { return state_; }
    WorldState& mutable_state() { return state_; }
    const TaskInstance& task() const { return *task_; }
    const EnvConfig& config() const { return cfg_; }
    const ActionGrammar& grammar() const { return grammar_; }
    const std::string& goal_hash() const { return goal_hash_; }

  private:
    const TaskInstance* task_;
    EnvConfig cfg_;
    ActionGrammar grammar_;
    std::string goal_hash_;
    WorldState state_;
};

}  // namespace interlock
