#pragma once

#include <interlock/expert.hpp>
#include <interlock/prompts.hpp>
#include <interlock/serialize.hpp>

#include <memory>
#include <stdexcept>

namespace interlock {

struct ReconstructionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rebuilds the full state behind an observation. The observation is lossless
// except for the dependency graph, which comes from `task` (the privileged
// channel the harness supplies, never the calling policy).
inline WorldState reconstruct_state(const Observation& obs, const TaskInstance& task,
                                    const std::string& expected_goal_hash) {
    if (!expected_goal_hash.empty() && obs.goal_hash != expected_goal_hash)
        throw ReconstructionError("observation goal hash does not match task");
    if (obs.pieces.size() != task.pieces.size())
        throw ReconstructionError("observation piece table size mismatch");
    WorldState s;
    s.location.resize(task.pieces.size());
    s.orientation.resize(task.pieces.size());
    PieceId held = kNoPiece;
    for (const Observation::PieceView& p : obs.pieces) {
        if (p.id < 1 || std::size_t(p.id) > task.pieces.size())
            throw ReconstructionError("observation references unknown piece");
        std::size_t i = task.piece_index(p.id);
        s.location[i] = p.location;
        s.orientation[i] = p.orientation;
        if (p.location == Location::in_hand) {
            if (held != kNoPiece) throw ReconstructionError("two pieces in hand");
            held = p.id;
        }
    }
    if (held != obs.in_hand) throw ReconstructionError("in-hand field disagrees with piece table");
    if (s.location[0] != Location::in_board) throw ReconstructionError("base not in board");
    s.in_hand = held;
    s.recent.assign(obs.history.begin(), obs.history.end());
    return s;
}

// Forward model interface: predicts the observation after applying exactly
// one action. Implementations must be pure in (observation, action, seed).
class DynamicsModel {
  public:
    virtual ~DynamicsModel() = default;
    virtual Observation predict(const Observation& obs, const Action& a) const = 0;
};

// Noise-free proxy backed by the real transition rules; equals what the
// environment itself would observe after the same action at epsilon = 0.
class OracleDynamics : public DynamicsModel {
  public:
    OracleDynamics(const TaskInstance& task, int history_len = 5)
        : task_(&task), grammar_(task.pieces), goal_hash_(goal_hash(task)),
          history_len_(history_len) {}

    Observation predict(const Observation& obs, const Action& a) const override {
        WorldState s = reconstruct_state(obs, *task_, goal_hash_);
        detail::apply_action(s, a, *task_);
        detail::push_history(s, grammar_.format(a), history_len_);
        return observe(s, *task_, goal_hash_);
    }

    const TaskInstance& task() const { return *task_; }
    const std::string& task_goal_hash() const { return goal_hash_; }

  private:
    const TaskInstance* task_;
    ActionGrammar grammar_;
    std::string goal_hash_;
    int history_len_;
};

struct CorruptionConfig {
    enum class Mode { freeze, scramble };
    double delta = 0.1;  // misprediction probability
    Mode mode = Mode::freeze;
    std::uint64_t seed = 0;

    void validate() const {
        if (delta < 0.0 || delta > 1.0) throw std::invalid_argument("delta outside [0,1]");
    }
};

// Stand-in for an imperfect learned dynamics model: with probability delta
// the prediction is wrong, either frozen (no-op) or the effect of a random
// other action. Pure per call: randomness is derived from (seed, obs, action).
class CorruptedDynamics : public DynamicsModel {
  public:
    CorruptedDynamics(const TaskInstance& task, CorruptionConfig cfg, int history_len = 5)
        : oracle_(task, history_len), grammar_(task.pieces), cfg_(cfg),
          history_len_(history_len) {
        cfg_.validate();
    }

    Observation predict(const Observation& obs, const Action& a) const override {
        Rng rng(call_seed(obs, a));
        if (!rng.bernoulli(cfg_.delta)) return oracle_.predict(obs, a);
        if (cfg_.mode == CorruptionConfig::Mode::freeze) {
            WorldState s = reconstruct_state(obs, oracle_.task(), oracle_.task_goal_hash());
            detail::push_history(s, grammar_.format(a), history_len_);
            return observe(s, oracle_.task(), oracle_.task_goal_hash());
        }
        // scramble: show the consequence of a different action while the
        // history still claims `a` was applied
        std::vector<Action> actions = grammar_.all_actions();
        std::erase(actions, a);
        const Action& wrong = actions[rng.bounded(actions.size())];
        WorldState s = reconstruct_state(obs, oracle_.task(), oracle_.task_goal_hash());
        detail::apply_action(s, wrong, oracle_.task());
        detail::push_history(s, grammar_.format(a), history_len_);
        return observe(s, oracle_.task(), oracle_.task_goal_hash());
    }

  private:
    std::uint64_t call_seed(const Observation& obs, const Action& a) const {
        std::string key = serialize_observation(obs);
        key += '\n';
        key += grammar_.format(a);
        std::string digest = sha256_hex(key);
        std::uint64_t h = 0;
        for (int i = 0; i < 16; ++i) {
            char c = digest[std::size_t(i)];
            h = (h << 4) | std::uint64_t(c <= '9' ? c - '0' : c - 'a' + 10);
        }
        return mix_u64(cfg_.seed, h);
    }

    OracleDynamics oracle_;
    ActionGrammar grammar_;
    CorruptionConfig cfg_;
    int history_len_;
};

}  // namespace interlock
