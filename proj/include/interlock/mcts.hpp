#pragma once

#include <interlock/expert.hpp>
#include <interlock/policy.hpp>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace interlock {

// Per-edge statistics: visit count N, total value W, mean value Q = W/N.
struct EdgeStats {
    int visits = 0;
    double total_value = 0.0;
    double mean_value = 0.0;
};

struct SearchConfig {
    double c_explore = 0.5;
    double lambda = 0.1;     // value scale: V = exp(-lambda * expert steps to goal)
    int iterations = 50;
    int proposal_width = 5;  // top-likelihood actions requested per node
    int rollout_cap = 50;
    int history_len = 5;

    void validate() const {
        if (c_explore <= 0.0) throw std::invalid_argument("c_explore must be positive");
        if (lambda <= 0.0) throw std::invalid_argument("lambda must be positive");
        if (iterations < 0) throw std::invalid_argument("iterations must be >= 0");
        if (proposal_width < 1) throw std::invalid_argument("proposal_width must be >= 1");
    }
};

// Introspection for tests and reports: every edge's statistics plus the raw
// values that were backed up through it.
struct SearchDebug {
    struct EdgeView {
        std::string action;
        int depth = 0;
        EdgeStats stats;
        std::vector<double> backups;
    };
    int expansions = 0;
    std::vector<EdgeView> edges;
    std::vector<std::pair<std::string, EdgeStats>> root_edges;
};

namespace detail {

struct SearchNode {
    WorldState state;
    bool terminal = false;
    bool expanded = false;
    struct Edge {
        Action action;
        int child = -1;
        EdgeStats stats;
        std::vector<double> backups;
    };
    std::vector<Edge> edges;
};

}  // namespace detail

// One search from `root_state`, replanned from scratch every real step.
// Selection follows max Q + c*sqrt(sum_a' N)/(1+N); leaves are expanded by
// simulating the chosen action noise-free and valued by the length of an
// expert rollout from the child. Ties resolve to the earliest proposal.
inline Action search(const WorldState& root_state, const TaskInstance& task, Policy& proposer,
                     const ExpertContext& ctx, const SearchConfig& cfg,
                     const std::string& task_goal_hash, SearchDebug* debug = nullptr) {
    cfg.validate();
    if (is_success(root_state)) return Action{Verb::done, kNoPiece};

    const Observation goal_obs = [&] {
        WorldState g;
        g.location.assign(task.pieces.size(), Location::in_board);
        g.orientation.assign(task.pieces.size(), Orientation::up);
        return observe(g, task, task_goal_hash);
    }();
    ActionGrammar grammar(task.pieces);

    std::vector<detail::SearchNode> nodes;
    nodes.push_back({root_state, false, false, {}});

    auto attach_proposals = [&](int idx) {
        detail::SearchNode& node = nodes[std::size_t(idx)];
        Observation obs = observe(node.state, task, task_goal_hash);
        RankedActions ranked = proposer.propose(make_proposal_request(goal_obs, std::move(obs)),
                                                cfg.proposal_width);
        for (const Action& a : ranked.actions) node.edges.push_back({a, -1, {}, {}});
        node.expanded = true;
    };

    auto select_edge = [&](const detail::SearchNode& node) {
        int total_visits = 0;
        for (const auto& e : node.edges) total_visits += e.stats.visits;
        double best_score = -std::numeric_limits<double>::infinity();
        std::size_t best = 0;
        for (std::size_t i = 0; i < node.edges.size(); ++i) {
            const EdgeStats& st = node.edges[i].stats;
            double u = cfg.c_explore * std::sqrt(double(total_visits)) / (1.0 + st.visits);
            double score = st.mean_value + u;
            if (score > best_score) {
                best_score = score;
                best = i;
            }
        }
        return best;
    };

    int expansions = 0;
    for (int iter = 0; iter < cfg.iterations; ++iter) {
        int node_idx = 0;
        std::vector<std::pair<int, std::size_t>> path;
        int leaf = -1;
        while (true) {
            if (!nodes[std::size_t(node_idx)].expanded) attach_proposals(node_idx);
            std::size_t edge_idx = select_edge(nodes[std::size_t(node_idx)]);
            path.emplace_back(node_idx, edge_idx);
            int child = nodes[std::size_t(node_idx)].edges[edge_idx].child;
            if (child == -1) {
                // expand: simulate the action into a new child node
                detail::SearchNode next;
                next.state = nodes[std::size_t(node_idx)].state;
                const Action& a = nodes[std::size_t(node_idx)].edges[edge_idx].action;
                detail::apply_action(next.state, a, task);
                detail::push_history(next.state, grammar.format(a), cfg.history_len);
                next.terminal = is_success(next.state);
                nodes.push_back(std::move(next));
                leaf = int(nodes.size()) - 1;
                nodes[std::size_t(node_idx)].edges[edge_idx].child = leaf;
                break;
            }
            if (nodes[std::size_t(child)].terminal) {
                leaf = child;  // re-evaluate the terminal state
                break;
            }
            node_idx = child;
        }
        ++expansions;

        const int steps_to_goal = expert_rollout_length(nodes[std::size_t(leaf)].state, ctx,
                                                        cfg.rollout_cap);
        const double value = std::exp(-cfg.lambda * steps_to_goal);
        for (const auto& [n, e] : path) {
            auto& edge = nodes[std::size_t(n)].edges[e];
            edge.stats.visits += 1;
            edge.stats.total_value += value;
            edge.stats.mean_value = edge.stats.total_value / edge.stats.visits;
            if (debug != nullptr) edge.backups.push_back(value);
        }
    }

    if (!nodes[0].expanded) attach_proposals(0);  // zero-iteration budget

    std::size_t best = 0;
    double best_q = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes[0].edges.size(); ++i) {
        double q = nodes[0].edges[i].stats.mean_value;
        if (q > best_q) {
            best_q = q;
            best = i;
        }
    }

    if (debug != nullptr) {
        debug->expansions = expansions;
        std::vector<std::pair<int, int>> frontier = {{0, 0}};
        for (std::size_t f = 0; f < frontier.size(); ++f) {
            auto [idx, depth] = frontier[f];
            for (const auto& e : nodes[std::size_t(idx)].edges) {
                debug->edges.push_back({grammar.format(e.action), depth, e.stats, e.backups});
                if (e.child != -1) frontier.emplace_back(e.child, depth + 1);
            }
        }
        for (const auto& e : nodes[0].edges)
            debug->root_edges.emplace_back(grammar.format(e.action), e.stats);
    }
    return nodes[0].edges[best].action;
}

}  // namespace interlock
