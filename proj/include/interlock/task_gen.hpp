#pragma once

#include <interlock/core.hpp>
#include <interlock/rng.hpp>

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace interlock {

struct GenerationExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RangeI {
    int lo = 0, hi = 0;
    bool contains(int v) const { return v >= lo && v <= hi; }
    bool valid() const { return lo <= hi; }
};

struct GenParams {
    RangeI base_x{8, 12};
    RangeI base_y{8, 12};
    RangeI base_z{2, 3};
    RangeI brick_count{2, 6};
    RangeI brick_x{2, 4};
    RangeI brick_y{2, 4};
    RangeI brick_z{2, 5};
    int max_attempts = 100;     // per brick
    double q_down = 0.3;        // P(table piece starts orientation-down)
    double r_bad = 0.2;         // P(one piece starts pre-inserted out of order)

    void validate() const {
        auto positive = [](const RangeI& r, const char* name) {
            if (!r.valid() || r.lo < 0)
                throw std::invalid_argument(std::string("bad range for ") + name);
        };
        positive(base_x, "base_x");
        positive(base_y, "base_y");
        positive(base_z, "base_z");
        positive(brick_count, "brick_count");
        positive(brick_x, "brick_x");
        positive(brick_y, "brick_y");
        positive(brick_z, "brick_z");
        if (base_x.lo < 1 || base_y.lo < 1 || base_z.lo < 1)
            throw std::invalid_argument("base dims must be >= 1");
        if (brick_x.lo < 1 || brick_y.lo < 1 || brick_z.lo < 1)
            throw std::invalid_argument("brick dims must be >= 1");
        if (brick_x.hi > base_x.lo || brick_y.hi > base_y.lo)
            throw std::invalid_argument("brick footprint must fit inside any base");
        if (brick_count.hi > int(kBrickPalette.size()))
            throw std::invalid_argument("brick count exceeds palette size");
        if (max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
        if (q_down < 0.0 || q_down > 1.0) throw std::invalid_argument("q_down outside [0,1]");
        if (r_bad < 0.0 || r_bad > 1.0) throw std::invalid_argument("r_bad outside [0,1]");
    }
};

// One resolved brick-brick intersection: `keeper` kept the critical voxels,
// so it must be seated before the other piece can slide in.
struct IntersectionRecord {
    PieceId earlier = kNoPiece;
    PieceId later = kNoPiece;
    PieceId keeper = kNoPiece;
    PieceId loser() const { return keeper == earlier ? later : earlier; }
};

struct BoardGeometry {
    VoxelGrid grid;
    std::vector<Piece> pieces;  // pieces[0] is the base
    std::vector<IntersectionRecord> intersections;
    int max_height = 0;  // highest occupied layer count
};

namespace detail {

inline std::vector<Coord> cells_of(const VoxelGrid& grid, PieceId id) {
    std::vector<Coord> out;
    for (int z = 0; z < grid.dims.z; ++z)
        for (int y = 0; y < grid.dims.y; ++y)
            for (int x = 0; x < grid.dims.x; ++x)
                if (grid.at(x, y, z) == id) out.push_back({x, y, z});
    return out;
}

inline bool acyclic(const std::vector<std::pair<PieceId, PieceId>>& edges,
                    const std::vector<PieceId>& nodes) {
    DependencyGraph g;
    g.nodes = nodes;
    g.edges = edges;
    return g.is_acyclic();
}

}  // namespace detail

// Builds a board by sampling a base slab and then bricks whose footprint
// lies inside the base and which intersect at least one earlier brick.
// Overlapped voxels are rewritten to exactly one side of each pair; the
// coin flip decides which piece ends up with the opening.
inline BoardGeometry generate_board(const GenParams& params, std::uint64_t seed) {
    params.validate();
    Rng rng(derive_seed(seed, {0}));

    const int bx = rng.uniform_int(params.base_x.lo, params.base_x.hi);
    const int by = rng.uniform_int(params.base_y.lo, params.base_y.hi);
    const int bz = rng.uniform_int(params.base_z.lo, params.base_z.hi);

    BoardGeometry geom;
    geom.grid = VoxelGrid(Dims{bx, by, bz + params.brick_z.hi});
    for (int z = 0; z < bz; ++z)
        for (int y = 0; y < by; ++y)
            for (int x = 0; x < bx; ++x) geom.grid.at(x, y, z) = kBasePiece;
    geom.max_height = bz;

    const int brick_count = rng.uniform_int(params.brick_count.lo, params.brick_count.hi);
    std::vector<PieceId> nodes;
    std::vector<std::pair<PieceId, PieceId>> edges;

    for (int k = 0; k < brick_count; ++k) {
        const PieceId id = PieceId(k + 2);
        bool placed = false;
        for (int attempt = 0; attempt < params.max_attempts && !placed; ++attempt) {
            const int sx = rng.uniform_int(params.brick_x.lo, params.brick_x.hi);
            const int sy = rng.uniform_int(params.brick_y.lo, params.brick_y.hi);
            const int sz = rng.uniform_int(params.brick_z.lo, params.brick_z.hi);
            const int px = rng.uniform_int(0, bx - sx);
            const int py = rng.uniform_int(0, by - sy);

            // Critical voxels per earlier brick found inside the new cuboid.
            std::map<PieceId, std::vector<Coord>> overlap;
            for (int z = 0; z < sz; ++z)
                for (int y = py; y < py + sy; ++y)
                    for (int x = px; x < px + sx; ++x) {
                        PieceId v = geom.grid.at(x, y, z);
                        if (v >= 2) overlap[v].push_back({x, y, z});
                    }
            if (k > 0 && overlap.empty()) continue;  // must interlock with some earlier brick

            std::vector<PieceId> partners;
            for (const auto& [pid, _] : overlap) partners.push_back(pid);
            std::vector<bool> keep_earlier(partners.size());
            for (std::size_t i = 0; i < partners.size(); ++i) keep_earlier[i] = rng.bernoulli(0.5);

            // Re-flip the most recent assignment (walking backwards) until the
            // combined edge set is acyclic; give up after 10 flips.
            std::vector<PieceId> new_nodes = nodes;
            new_nodes.push_back(id);
            auto candidate_edges = [&]() {
                auto all = edges;
                for (std::size_t i = 0; i < partners.size(); ++i) {
                    PieceId keeper = keep_earlier[i] ? partners[i] : id;
                    PieceId loser = keep_earlier[i] ? id : partners[i];
                    all.emplace_back(keeper, loser);
                }
                return all;
            };
            bool ok = detail::acyclic(candidate_edges(), new_nodes);
            for (int flip = 0; !ok && flip < 10 && !partners.empty(); ++flip) {
                std::size_t idx = partners.size() - 1 - (std::size_t(flip) % partners.size());
                keep_earlier[idx] = !keep_earlier[idx];
                ok = detail::acyclic(candidate_edges(), new_nodes);
            }
            if (!ok) continue;

            // Rewrite voxels on a scratch copy, then check the pieces survive.
            VoxelGrid scratch = geom.grid;
            for (int z = 0; z < sz; ++z)
                for (int y = py; y < py + sy; ++y)
                    for (int x = px; x < px + sx; ++x) {
                        PieceId v = scratch.at(x, y, z);
                        if (v == kNoPiece || v == kBasePiece) scratch.at(x, y, z) = id;
                    }
            for (std::size_t i = 0; i < partners.size(); ++i) {
                if (keep_earlier[i]) continue;
                for (const Coord& c : overlap[partners[i]]) scratch.at(c) = id;
            }

            bool shapes_ok = true;
            std::vector<PieceId> affected = partners;
            affected.push_back(kBasePiece);
            affected.push_back(id);
            for (PieceId pid : affected) {
                auto cells = detail::cells_of(scratch, pid);
                if (cells.empty() || !is_face_connected(cells)) {
                    shapes_ok = false;
                    break;
                }
            }
            if (!shapes_ok) continue;

            geom.grid = std::move(scratch);
            nodes = std::move(new_nodes);
            for (std::size_t i = 0; i < partners.size(); ++i) {
                IntersectionRecord rec;
                rec.earlier = partners[i];
                rec.later = id;
                rec.keeper = keep_earlier[i] ? partners[i] : id;
                geom.intersections.push_back(rec);
                edges.emplace_back(rec.keeper, rec.loser());
            }
            geom.max_height = std::max(geom.max_height, occupied_layers(geom.grid));
            placed = true;
        }
        if (!placed)
            throw GenerationExhausted("could not place brick " + std::to_string(id) + " after " +
                                      std::to_string(params.max_attempts) + " attempts");
    }

    Piece base;
    base.id = kBasePiece;
    base.color = std::string(kBaseColor);
    base.cells = detail::cells_of(geom.grid, kBasePiece);
    geom.pieces.push_back(std::move(base));
    for (int k = 0; k < brick_count; ++k) {
        Piece p;
        p.id = PieceId(k + 2);
        p.color = std::string(kBrickPalette[std::size_t(k)]);
        p.cells = detail::cells_of(geom.grid, p.id);
        geom.pieces.push_back(std::move(p));
    }
    return geom;
}

// Edges follow the keeper rule: the piece that kept the critical voxels
// protrudes through the other's opening, so it goes in first.
inline DependencyGraph derive_dependencies(const BoardGeometry& geom) {
    DependencyGraph deps;
    for (const Piece& p : geom.pieces)
        if (p.id != kBasePiece) deps.nodes.push_back(p.id);
    for (const IntersectionRecord& rec : geom.intersections)
        deps.edges.emplace_back(rec.keeper, rec.loser());
    if (!deps.is_acyclic())
        throw std::logic_error("generated dependency graph has a cycle");
    return deps;
}

struct InitPlacement {
    Location location = Location::on_table;
    Orientation orientation = Orientation::up;
};

struct TaskInstance {
    std::string id;
    std::uint64_t seed = 0;
    VoxelGrid goal;
    std::vector<Piece> pieces;          // base first, ids contiguous from 1
    DependencyGraph deps;
    std::vector<InitPlacement> init;    // indexed like pieces

    std::size_t piece_index(PieceId pid) const { return std::size_t(pid - 1); }
    const Piece& piece(PieceId pid) const { return pieces[piece_index(pid)]; }
    std::size_t piece_count() const { return pieces.size(); }

    std::vector<PieceId> brick_ids() const {
        std::vector<PieceId> out;
        for (const Piece& p : pieces)
            if (p.id != kBasePiece) out.push_back(p.id);
        return out;
    }

    ActionGrammar grammar() const { return ActionGrammar(pieces); }
};

// Structural checks shared by the generator and file loading.
inline void validate_task(const TaskInstance& task) {
    if (task.pieces.empty() || task.pieces.front().id != kBasePiece)
        throw std::invalid_argument("task must contain the base as piece 1");
    for (std::size_t i = 0; i < task.pieces.size(); ++i)
        if (task.pieces[i].id != PieceId(i + 1))
            throw std::invalid_argument("piece ids must be contiguous from 1");
    if (task.init.size() != task.pieces.size())
        throw std::invalid_argument("init table size mismatch");

    std::size_t nonzero = 0;
    for (PieceId v : task.goal.cells) {
        if (v == kNoPiece) continue;
        ++nonzero;
        if (v < 1 || std::size_t(v) > task.pieces.size())
            throw std::invalid_argument("goal grid references unknown piece");
    }
    std::size_t piece_cells = 0;
    for (const Piece& p : task.pieces) {
        piece_cells += p.cells.size();
        if (p.cells.empty()) throw std::invalid_argument("piece with no cells");
        if (!is_face_connected(p.cells)) throw std::invalid_argument("piece not face-connected");
        for (const Coord& c : p.cells) {
            if (!task.goal.in_bounds(c) || task.goal.at(c) != p.id)
                throw std::invalid_argument("piece cells disagree with goal grid");
        }
    }
    if (piece_cells != nonzero)
        throw std::invalid_argument("piece cells do not partition the goal grid");

    for (const auto& [a, b] : task.deps.edges) {
        auto known = [&](PieceId id) {
            return id >= 2 && std::size_t(id) <= task.pieces.size();
        };
        if (!known(a) || !known(b))
            throw std::invalid_argument("dependency edge references unknown brick");
    }
    if (!task.deps.is_acyclic()) throw std::invalid_argument("dependency graph has a cycle");

    if (task.init[0].location != Location::in_board)
        throw std::invalid_argument("base must start in the board");
    for (const InitPlacement& p : task.init)
        if (p.location == Location::in_hand)
            throw std::invalid_argument("no piece may start in hand");
}

// Places every brick on the table (down with probability q_down), then with
// probability r_bad pre-inserts one brick that has an unmet predecessor,
// which makes the start state require a removal to finish.
inline TaskInstance sample_initial_config(const BoardGeometry& geom, const DependencyGraph& deps,
                                          const GenParams& params, std::uint64_t seed,
                                          std::string task_id) {
    Rng rng(derive_seed(seed, {1}));
    TaskInstance task;
    task.id = std::move(task_id);
    task.seed = seed;
    task.goal = geom.grid;
    task.pieces = geom.pieces;
    task.deps = deps;
    task.init.resize(task.pieces.size());
    task.init[0] = InitPlacement{Location::in_board, Orientation::up};
    for (std::size_t i = 1; i < task.pieces.size(); ++i) {
        task.init[i].location = Location::on_table;
        task.init[i].orientation = rng.bernoulli(params.q_down) ? Orientation::down : Orientation::up;
    }
    if (rng.bernoulli(params.r_bad)) {
        std::vector<PieceId> eligible;
        for (PieceId id : task.brick_ids())
            if (!deps.predecessors_of(id).empty()) eligible.push_back(id);
        if (!eligible.empty()) {
            PieceId chosen = eligible[rng.bounded(eligible.size())];
            task.init[task.piece_index(chosen)] = InitPlacement{Location::in_board, Orientation::up};
        }
    }
    validate_task(task);
    return task;
}

inline TaskInstance make_task(const GenParams& params, std::uint64_t seed, std::string task_id) {
    BoardGeometry geom = generate_board(params, seed);
    DependencyGraph deps = derive_dependencies(geom);
    return sample_initial_config(geom, deps, params, seed, std::move(task_id));
}

inline TaskInstance make_task(const GenParams& params, std::uint64_t seed) {
    return make_task(params, seed, "task-" + std::to_string(seed));
}

}  // namespace interlock
