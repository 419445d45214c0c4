#pragma once

// Umbrella header: task generation, the symbolic assembly environment, the
// privileged expert, policies, dynamics proxies, reflective planning, MCTS,
// data collection, and the evaluation harness.

#include <interlock/client.hpp>
#include <interlock/core.hpp>
#include <interlock/datagen.hpp>
#include <interlock/dynamics.hpp>
#include <interlock/env.hpp>
#include <interlock/eval.hpp>
#include <interlock/expert.hpp>
#include <interlock/mcts.hpp>
#include <interlock/parallel.hpp>
#include <interlock/planner.hpp>
#include <interlock/policy.hpp>
#include <interlock/prompts.hpp>
#include <interlock/rng.hpp>
#include <interlock/serialize.hpp>
#include <interlock/sha256.hpp>
#include <interlock/task_gen.hpp>
