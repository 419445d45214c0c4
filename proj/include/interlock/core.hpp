#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace interlock {

inline constexpr std::string_view kVersion = "0.1.0";

using PieceId = std::int32_t;
inline constexpr PieceId kNoPiece = 0;   // empty voxel / empty hand
inline constexpr PieceId kBasePiece = 1; // the immovable base board

// Colors used to address bricks in action text and prompts. Brick #k
// (piece id k+1) gets kBrickPalette[k-1]; the base is never addressed.
inline constexpr std::array<std::string_view, 16> kBrickPalette = {
    "red",  "green",   "blue",  "yellow", "purple", "orange", "cyan", "magenta",
    "brown", "pink",   "gray",  "olive",  "teal",   "navy",   "maroon", "lime"};
inline constexpr std::string_view kBaseColor = "white";

struct Coord {
    int x = 0, y = 0, z = 0;
    auto operator<=>(const Coord&) const = default;
};

struct Dims {
    int x = 0, y = 0, z = 0;
    bool operator==(const Dims&) const = default;
    std::size_t cell_count() const {
        return std::size_t(x) * std::size_t(y) * std::size_t(z);
    }
};

// Dense 3-D array of piece ids, x-fastest layout.
struct VoxelGrid {
    Dims dims;
    std::vector<PieceId> cells;

    VoxelGrid() = default;
    explicit VoxelGrid(Dims d) : dims(d), cells(d.cell_count(), kNoPiece) {}

    std::size_t index(int x, int y, int z) const {
        return std::size_t(x) + std::size_t(dims.x) * (std::size_t(y) + std::size_t(dims.y) * std::size_t(z));
    }
    PieceId at(int x, int y, int z) const { return cells[index(x, y, z)]; }
    PieceId& at(int x, int y, int z) { return cells[index(x, y, z)]; }
    PieceId at(const Coord& c) const { return at(c.x, c.y, c.z); }
    PieceId& at(const Coord& c) { return at(c.x, c.y, c.z); }
    bool in_bounds(const Coord& c) const {
        return c.x >= 0 && c.y >= 0 && c.z >= 0 && c.x < dims.x && c.y < dims.y && c.z < dims.z;
    }
    bool operator==(const VoxelGrid&) const = default;
};

// Number of layers up to and including the highest occupied one.
inline int occupied_layers(const VoxelGrid& grid) {
    for (int z = grid.dims.z - 1; z >= 0; --z) {
        for (int y = 0; y < grid.dims.y; ++y)
            for (int x = 0; x < grid.dims.x; ++x)
                if (grid.at(x, y, z) != kNoPiece) return z + 1;
    }
    return 0;
}

struct Piece {
    PieceId id = kNoPiece;
    std::string color;
    std::vector<Coord> cells;  // sorted, face-connected, disjoint across pieces
};

// True if the coordinate set forms a single face-connected component.
inline bool is_face_connected(const std::vector<Coord>& cells) {
    if (cells.empty()) return false;
    std::vector<Coord> sorted = cells;
    std::sort(sorted.begin(), sorted.end());
    std::vector<bool> seen(sorted.size(), false);
    std::vector<std::size_t> stack = {0};
    seen[0] = true;
    std::size_t visited = 1;
    auto find = [&](const Coord& c) -> std::optional<std::size_t> {
        auto it = std::lower_bound(sorted.begin(), sorted.end(), c);
        if (it != sorted.end() && *it == c) return std::size_t(it - sorted.begin());
        return std::nullopt;
    };
    while (!stack.empty()) {
        Coord c = sorted[stack.back()];
        stack.pop_back();
        const Coord nbrs[6] = {{c.x + 1, c.y, c.z}, {c.x - 1, c.y, c.z}, {c.x, c.y + 1, c.z},
                               {c.x, c.y - 1, c.z}, {c.x, c.y, c.z + 1}, {c.x, c.y, c.z - 1}};
        for (const Coord& n : nbrs) {
            if (auto idx = find(n); idx && !seen[*idx]) {
                seen[*idx] = true;
                ++visited;
                stack.push_back(*idx);
            }
        }
    }
    return visited == sorted.size();
}

// Directed edges (predecessor -> successor) over brick ids; the base is
// implicit and excluded. Edge a -> b: a must be inserted before b.
struct DependencyGraph {
    std::vector<PieceId> nodes;
    std::vector<std::pair<PieceId, PieceId>> edges;

    std::vector<PieceId> predecessors_of(PieceId id) const {
        std::vector<PieceId> out;
        for (const auto& [a, b] : edges)
            if (b == id) out.push_back(a);
        return out;
    }
    std::vector<PieceId> successors_of(PieceId id) const {
        std::vector<PieceId> out;
        for (const auto& [a, b] : edges)
            if (a == id) out.push_back(b);
        return out;
    }

    // Kahn's algorithm; nullopt when a cycle exists.
    std::optional<std::vector<PieceId>> topological_order() const {
        std::vector<PieceId> order;
        std::vector<std::pair<PieceId, int>> indegree;
        for (PieceId n : nodes) indegree.emplace_back(n, 0);
        auto slot = [&](PieceId id) -> int* {
            for (auto& [n, d] : indegree)
                if (n == id) return &d;
            return nullptr;
        };
        for (const auto& [a, b] : edges) {
            int* d = slot(b);
            if (d == nullptr || slot(a) == nullptr) return std::nullopt;
            ++*d;
        }
        std::vector<PieceId> ready;
        for (const auto& [n, d] : indegree)
            if (d == 0) ready.push_back(n);
        while (!ready.empty()) {
            std::sort(ready.begin(), ready.end(), std::greater<>());
            PieceId n = ready.back();
            ready.pop_back();
            order.push_back(n);
            for (const auto& [a, b] : edges) {
                if (a != n) continue;
                int* d = slot(b);
                if (--*d == 0) ready.push_back(b);
            }
        }
        if (order.size() != nodes.size()) return std::nullopt;
        return order;
    }
    bool is_acyclic() const { return topological_order().has_value(); }
};

enum class Verb { pick_up, insert, reorient, put_down, done };

inline std::string_view verb_text(Verb v) {
    switch (v) {
        case Verb::pick_up: return "pick up";
        case Verb::insert: return "insert";
        case Verb::reorient: return "reorient";
        case Verb::put_down: return "put down";
        case Verb::done: return "done";
    }
    return "";
}

// A primitive applied to one piece, or the terminal claim `done`.
struct Action {
    Verb verb = Verb::done;
    PieceId target = kNoPiece;  // kNoPiece for done
    bool operator==(const Action&) const = default;
};

enum class Location { on_table, in_board, in_hand };
enum class Orientation { up, down };

enum class PieceStatus { done, ready, bad_b, bad_d, blocked_p, blocked_s };
enum class TaskStatus { done, ready, bad_b };

inline std::string_view to_string(PieceStatus s) {
    switch (s) {
        case PieceStatus::done: return "DONE";
        case PieceStatus::ready: return "READY";
        case PieceStatus::bad_b: return "BAD_B";
        case PieceStatus::bad_d: return "BAD_D";
        case PieceStatus::blocked_p: return "BLOCKED_P";
        case PieceStatus::blocked_s: return "BLOCKED_S";
    }
    return "";
}

inline std::string_view to_string(TaskStatus s) {
    switch (s) {
        case TaskStatus::done: return "DONE";
        case TaskStatus::ready: return "READY";
        case TaskStatus::bad_b: return "BAD_B";
    }
    return "";
}

struct ActionParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Maps brick color names to ids for one task. Action text addresses
// pieces by color, exactly "[act] [color]" or "done".
class ActionGrammar {
  public:
    ActionGrammar() = default;
    explicit ActionGrammar(const std::vector<Piece>& pieces) {
        for (const Piece& p : pieces)
            if (p.id != kBasePiece) by_color_.emplace_back(p.color, p.id);
    }

    std::string format(const Action& a) const {
        if (a.verb == Verb::done) return "done";
        return std::string(verb_text(a.verb)) + " " + color_of(a.target);
    }

    Action parse(std::string_view text) const {
        if (text == "done") return Action{Verb::done, kNoPiece};
        for (Verb v : {Verb::pick_up, Verb::insert, Verb::reorient, Verb::put_down}) {
            std::string_view vt = verb_text(v);
            if (text.size() > vt.size() + 1 && text.substr(0, vt.size()) == vt &&
                text[vt.size()] == ' ') {
                std::string_view color = text.substr(vt.size() + 1);
                for (const auto& [c, id] : by_color_)
                    if (c == color) return Action{v, id};
                throw ActionParseError("unknown piece color: " + std::string(color));
            }
        }
        throw ActionParseError("unrecognized action text: " + std::string(text));
    }

    std::string color_of(PieceId id) const {
        for (const auto& [c, pid] : by_color_)
            if (pid == id) return c;
        return "piece-" + std::to_string(id);
    }

    bool valid_target(PieceId id) const {
        for (const auto& [c, pid] : by_color_)
            if (pid == id) return true;
        return false;
    }

    // All syntactically valid actions: every primitive on every brick, plus done.
    std::vector<Action> all_actions() const {
        std::vector<Action> out;
        for (const auto& [c, id] : by_color_)
            for (Verb v : {Verb::pick_up, Verb::insert, Verb::reorient, Verb::put_down})
                out.push_back(Action{v, id});
        out.push_back(Action{Verb::done, kNoPiece});
        return out;
    }

    std::size_t brick_count() const { return by_color_.size(); }

  private:
    std::vector<std::pair<std::string, PieceId>> by_color_;
};

}  // namespace interlock
