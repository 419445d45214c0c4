#pragma once

#include <interlock/dynamics.hpp>
#include <interlock/policy.hpp>

#include <utility>
#include <vector>

namespace interlock {

struct PlannerConfig {
    int horizon = 5;  // imagination depth H
    bool reflection_enabled = true;

    void validate() const {
        if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    }
};

// What the planner imagined for one real step; plan[i] produced imagined[i].
struct PlanTrace {
    std::vector<std::string> plan;
    std::vector<Observation> imagined;
};

// One decision of reflective planning: roll the policy forward H steps
// through the dynamics model, then let the policy reconsider its first
// action with the imagined end state in view. Touches neither the live
// environment nor its RNG; everything runs on imagined observations.
inline std::pair<Action, PlanTrace> plan_step(Policy& policy, const DynamicsModel& dynamics,
                                              const Observation& goal, const Observation& obs,
                                              const PlannerConfig& cfg) {
    cfg.validate();
    PlanTrace trace;
    if (!cfg.reflection_enabled) {
        Action a = policy.propose(make_proposal_request(goal, obs), 1).first();
        return {a, std::move(trace)};
    }
    ActionGrammar grammar = observation_grammar(obs);
    Observation imagined = obs;
    for (int k = 0; k < cfg.horizon; ++k) {
        Action a = policy.propose(make_proposal_request(goal, imagined), 1).first();
        trace.plan.push_back(grammar.format(a));
        imagined = dynamics.predict(imagined, a);
        trace.imagined.push_back(imagined);
        if (a.verb == Verb::done) break;  // no point imagining past a terminal claim
    }
    Action chosen = policy.reflect(
        make_reflection_request(goal, obs, trace.imagined.back(), trace.plan));
    return {chosen, std::move(trace)};
}

}  // namespace interlock
