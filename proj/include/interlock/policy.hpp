#pragma once

#include <interlock/dynamics.hpp>
#include <interlock/expert.hpp>
#include <interlock/prompts.hpp>

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace interlock {

struct PolicyUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Distinct actions, best first.
struct RankedActions {
    std::vector<Action> actions;

    const Action& first() const {
        if (actions.empty()) throw std::logic_error("empty RankedActions");
        return actions.front();
    }
};

// The two prompt-conditioned modes of one policy. Implementations either
// stay pure per call or are instantiated per episode by the harness.
class Policy {
  public:
    virtual ~Policy() = default;
    virtual RankedActions propose(const ProposalRequest& req, int k) = 0;
    virtual Action reflect(const ReflectionRequest& req) = 0;
};

inline ActionGrammar observation_grammar(const Observation& obs) {
    std::vector<Piece> pieces;
    pieces.reserve(obs.pieces.size());
    for (const Observation::PieceView& p : obs.pieces) {
        Piece piece;
        piece.id = p.id;
        piece.color = p.color;
        pieces.push_back(std::move(piece));
    }
    return ActionGrammar(pieces);
}

namespace detail {

inline std::vector<Coord> grid_cells_of(const VoxelGrid& grid, PieceId id) {
    std::vector<Coord> out;
    for (int z = 0; z < grid.dims.z; ++z)
        for (int y = 0; y < grid.dims.y; ++y)
            for (int x = 0; x < grid.dims.x; ++x)
                if (grid.at(x, y, z) == id) out.push_back({x, y, z});
    return out;
}

inline void push_unique(std::vector<Action>& list, const Action& a) {
    if (std::find(list.begin(), list.end(), a) == list.end()) list.push_back(a);
}

}  // namespace detail

// Reads interlocking structure off the goal board alone, with two sound
// signals: a brick protruding into another brick's bounding box kept the
// shared voxels, and in any single column the lower brick kept the shared
// segment. Both imply the first brick seats before the second. Openings
// that swallow a whole boundary slab of the loser stay invisible, so some
// true edges cannot be recovered from the goal image at all.
inline std::vector<std::pair<PieceId, PieceId>> infer_dependencies(const VoxelGrid& goal_board) {
    std::map<PieceId, std::vector<Coord>> cells;
    for (int z = 0; z < goal_board.dims.z; ++z)
        for (int y = 0; y < goal_board.dims.y; ++y)
            for (int x = 0; x < goal_board.dims.x; ++x) {
                PieceId v = goal_board.at(x, y, z);
                if (v >= 2) cells[v].push_back({x, y, z});
            }
    std::set<std::pair<PieceId, PieceId>> edges;
    for (const auto& [b, b_cells] : cells) {
        Coord lo = b_cells.front(), hi = b_cells.front();
        for (const Coord& c : b_cells) {
            lo = {std::min(lo.x, c.x), std::min(lo.y, c.y), std::min(lo.z, c.z)};
            hi = {std::max(hi.x, c.x), std::max(hi.y, c.y), std::max(hi.z, c.z)};
        }
        for (const auto& [a, a_cells] : cells) {
            if (a == b) continue;
            for (const Coord& c : a_cells) {
                if (c.x >= lo.x && c.x <= hi.x && c.y >= lo.y && c.y <= hi.y && c.z >= lo.z &&
                    c.z <= hi.z) {
                    edges.emplace(a, b);
                    break;
                }
            }
        }
    }
    for (int y = 0; y < goal_board.dims.y; ++y)
        for (int x = 0; x < goal_board.dims.x; ++x) {
            for (int z_low = 0; z_low < goal_board.dims.z; ++z_low) {
                PieceId below = goal_board.at(x, y, z_low);
                if (below < 2) continue;
                for (int z_high = z_low + 1; z_high < goal_board.dims.z; ++z_high) {
                    PieceId above = goal_board.at(x, y, z_high);
                    if (above >= 2 && above != below) edges.emplace(below, above);
                }
            }
        }
    return {edges.begin(), edges.end()};
}

// Observation-only baseline learner: greedy insertion in ascending goal
// height, reorient a held down piece, put a piece back after its insert
// visibly failed, and fall back to removing an inserted brick once every
// remaining brick's insert has failed within the visible history. Pure per
// call; all episode memory lives in the request's history window.
class ScriptedLearner : public Policy {
  public:
    RankedActions propose(const ProposalRequest& req, int k) override {
        if (k < 1) throw std::invalid_argument("k must be >= 1");
        ActionGrammar grammar = observation_grammar(req.current);
        std::vector<Action> ranked;

        if (req.current.in_hand != kNoPiece) {
            const PieceId held = req.current.in_hand;
            bool held_down = false;
            for (const Observation::PieceView& p : req.current.pieces)
                if (p.id == held) held_down = p.orientation == Orientation::down;
            bool insert_just_failed =
                !req.history.empty() &&
                req.history.back() == grammar.format(Action{Verb::insert, held});
            Action primary{Verb::insert, held};
            if (held_down)
                primary = Action{Verb::reorient, held};
            else if (insert_just_failed)
                primary = Action{Verb::put_down, held};
            detail::push_unique(ranked, primary);
            detail::push_unique(ranked, Action{Verb::insert, held});
            detail::push_unique(ranked, Action{Verb::reorient, held});
            detail::push_unique(ranked, Action{Verb::put_down, held});
        } else {
            std::vector<PieceId> remaining;
            std::vector<PieceId> inserted;
            for (const Observation::PieceView& p : req.current.pieces) {
                if (p.id == kBasePiece) continue;
                if (p.location == Location::in_board)
                    inserted.push_back(p.id);
                else
                    remaining.push_back(p.id);
            }
            if (remaining.empty()) {
                ranked.push_back(Action{Verb::done, kNoPiece});
            } else {
                auto failed_in_window = [&](PieceId id) {
                    std::string text = grammar.format(Action{Verb::insert, id});
                    for (const std::string& h : req.history)
                        if (h == text) return true;
                    return false;
                };
                std::map<PieceId, int> height;
                for (PieceId id : remaining) {
                    int top = 0;
                    for (const Coord& c : detail::grid_cells_of(req.goal.board, id))
                        top = std::max(top, c.z + 1);
                    height[id] = top;
                }
                auto by_height = [&](PieceId a, PieceId b) {
                    return std::pair(height[a], a) < std::pair(height[b], b);
                };
                std::sort(remaining.begin(), remaining.end(), by_height);
                std::vector<PieceId> cands;
                for (PieceId id : remaining)
                    if (!failed_in_window(id)) cands.push_back(id);
                if (cands.empty() && !inserted.empty()) {
                    // stuck: clear a spot and retry
                    PieceId out = *std::min_element(inserted.begin(), inserted.end());
                    detail::push_unique(ranked, Action{Verb::pick_up, out});
                }
                for (PieceId id : cands) detail::push_unique(ranked, Action{Verb::pick_up, id});
                for (PieceId id : remaining) detail::push_unique(ranked, Action{Verb::pick_up, id});
            }
        }
        if (int(ranked.size()) > k) ranked.resize(std::size_t(k));
        return RankedActions{std::move(ranked)};
    }

    // The bare learner ignores the imagined future.
    Action reflect(const ReflectionRequest& req) override {
        if (req.plan.empty()) throw std::invalid_argument("reflection plan is empty");
        return observation_grammar(req.current).parse(req.plan.front());
    }
};

// Privileged wrapper around the expert: each returned action is the expert's
// with probability 1-p_rand, else uniform over all syntactically valid
// actions. Collection/test tool only; never part of headline evaluations.
class NoisedExpert : public Policy {
  public:
    NoisedExpert(const TaskInstance& task, double p_rand, std::uint64_t seed)
        : ctx_(make_expert_context(task)), grammar_(task.pieces),
          goal_hash_(goal_hash(task)), all_actions_(grammar_.all_actions()), p_rand_(p_rand),
          rng_(derive_seed(seed, {0x4e})) {
        if (p_rand < 0.0 || p_rand > 1.0) throw std::invalid_argument("p_rand outside [0,1]");
    }

    RankedActions propose(const ProposalRequest& req, int k) override {
        if (k < 1) throw std::invalid_argument("k must be >= 1");
        WorldState s = reconstruct_state(req.current, *ctx_.task, goal_hash_);
        Action expert = expert_action(s, ctx_);
        std::vector<Action> ranked;
        for (int i = 0; i < k; ++i) detail::push_unique(ranked, draw(expert));
        return RankedActions{std::move(ranked)};
    }

    Action reflect(const ReflectionRequest& req) override {
        WorldState s = reconstruct_state(req.current, *ctx_.task, goal_hash_);
        return draw(expert_action(s, ctx_));
    }

  private:
    Action draw(const Action& expert) {
        if (rng_.bernoulli(p_rand_)) return all_actions_[rng_.bounded(all_actions_.size())];
        return expert;
    }

    ExpertContext ctx_;
    ActionGrammar grammar_;
    std::string goal_hash_;
    std::vector<Action> all_actions_;
    double p_rand_;
    Rng rng_;
};

// Baseline reflector: commit to the plan's first action unchanged.
class EndorsingReflector : public Policy {
  public:
    explicit EndorsingReflector(std::unique_ptr<Policy> base) : base_(std::move(base)) {}

    RankedActions propose(const ProposalRequest& req, int k) override {
        return base_->propose(req, k);
    }

    Action reflect(const ReflectionRequest& req) override {
        if (req.plan.empty()) throw std::invalid_argument("reflection plan is empty");
        return observation_grammar(req.current).parse(req.plan.front());
    }

  private:
    std::unique_ptr<Policy> base_;
};

// Observation-only reflector: endorse the plan while the imagined future
// shows at least one new insertion; otherwise remove the brick that the goal
// geometry says was inserted out of order.
class HeuristicReflector : public Policy {
  public:
    explicit HeuristicReflector(std::unique_ptr<Policy> base) : base_(std::move(base)) {}

    RankedActions propose(const ProposalRequest& req, int k) override {
        return base_->propose(req, k);
    }

    Action reflect(const ReflectionRequest& req) override {
        if (req.plan.empty()) throw std::invalid_argument("reflection plan is empty");
        ActionGrammar grammar = observation_grammar(req.current);
        auto inserted_count = [](const Observation& obs) {
            int n = 0;
            for (const Observation::PieceView& p : obs.pieces)
                if (p.id != kBasePiece && p.location == Location::in_board) ++n;
            return n;
        };
        if (inserted_count(req.future) > inserted_count(req.current))
            return grammar.parse(req.plan.front());

        auto edges = infer_dependencies(req.goal.board);
        std::vector<PieceId> blockers;
        for (const Observation::PieceView& p : req.current.pieces) {
            if (p.id == kBasePiece || p.location != Location::in_board) continue;
            for (const auto& [pred, succ] : edges) {
                if (succ != p.id) continue;
                for (const Observation::PieceView& q : req.current.pieces)
                    if (q.id == pred && q.location != Location::in_board) {
                        blockers.push_back(p.id);
                        break;
                    }
                if (!blockers.empty() && blockers.back() == p.id) break;
            }
        }
        if (blockers.empty()) return grammar.parse(req.plan.front());
        if (req.current.in_hand != kNoPiece)
            return Action{Verb::put_down, req.current.in_hand};
        return Action{Verb::pick_up, *std::min_element(blockers.begin(), blockers.end())};
    }

  private:
    std::unique_ptr<Policy> base_;
};

// Test-only upper bound: reflection answers with the expert action for the
// true current state, whatever the plan said.
class OracleReflector : public Policy {
  public:
    OracleReflector(const TaskInstance& task, std::unique_ptr<Policy> base)
        : ctx_(make_expert_context(task)), goal_hash_(goal_hash(task)), base_(std::move(base)) {}

    RankedActions propose(const ProposalRequest& req, int k) override {
        return base_->propose(req, k);
    }

    Action reflect(const ReflectionRequest& req) override {
        WorldState s = reconstruct_state(req.current, *ctx_.task, goal_hash_);
        return expert_action(s, ctx_);
    }

  private:
    ExpertContext ctx_;
    std::string goal_hash_;
    std::unique_ptr<Policy> base_;
};

}  // namespace interlock
