#pragma once

#include <interlock/env.hpp>
#include <interlock/sha256.hpp>
#include <interlock/task_gen.hpp>

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace interlock {

// nlohmann::json with default (ordered map) object storage: keys serialize
// sorted, so dump() of equal values is byte-equal. All wire and file formats
// in this project go through these helpers.
using Json = nlohmann::json;

inline std::string_view to_string(Location l) {
    switch (l) {
        case Location::on_table: return "on_table";
        case Location::in_board: return "in_board";
        case Location::in_hand: return "in_hand";
    }
    return "";
}

inline Location location_from_string(std::string_view s) {
    if (s == "on_table") return Location::on_table;
    if (s == "in_board") return Location::in_board;
    if (s == "in_hand") return Location::in_hand;
    throw std::invalid_argument("bad location: " + std::string(s));
}

inline std::string_view to_string(Orientation o) {
    return o == Orientation::up ? "up" : "down";
}

inline Orientation orientation_from_string(std::string_view s) {
    if (s == "up") return Orientation::up;
    if (s == "down") return Orientation::down;
    throw std::invalid_argument("bad orientation: " + std::string(s));
}

inline Json to_json(const Coord& c) { return Json::array({c.x, c.y, c.z}); }

inline Coord coord_from_json(const Json& j) {
    return Coord{j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>()};
}

inline Json to_json(const Piece& p) {
    Json cells = Json::array();
    for (const Coord& c : p.cells) cells.push_back(to_json(c));
    return Json{{"id", p.id}, {"color", p.color}, {"cells", cells}};
}

inline Piece piece_from_json(const Json& j) {
    Piece p;
    p.id = j.at("id").get<PieceId>();
    p.color = j.at("color").get<std::string>();
    for (const Json& c : j.at("cells")) p.cells.push_back(coord_from_json(c));
    return p;
}

inline Json to_json(const TaskInstance& task) {
    Json pieces = Json::array();
    for (const Piece& p : task.pieces) pieces.push_back(to_json(p));
    Json edges = Json::array();
    for (const auto& [a, b] : task.deps.edges) edges.push_back(Json::array({a, b}));
    Json init = Json::object();
    for (std::size_t i = 0; i < task.init.size(); ++i) {
        init[std::to_string(i + 1)] = Json{{"loc", to_string(task.init[i].location)},
                                           {"orient", to_string(task.init[i].orientation)}};
    }
    return Json{{"id", task.id},
                {"seed", task.seed},
                {"dims", Json{{"x", task.goal.dims.x}, {"y", task.goal.dims.y}, {"z", task.goal.dims.z}}},
                {"cells", task.goal.cells},
                {"pieces", pieces},
                {"edges", edges},
                {"init", init}};
}

inline TaskInstance task_from_json(const Json& j) {
    TaskInstance task;
    task.id = j.at("id").get<std::string>();
    task.seed = j.at("seed").get<std::uint64_t>();
    Dims dims{j.at("dims").at("x").get<int>(), j.at("dims").at("y").get<int>(),
              j.at("dims").at("z").get<int>()};
    task.goal = VoxelGrid(dims);
    task.goal.cells = j.at("cells").get<std::vector<PieceId>>();
    if (task.goal.cells.size() != dims.cell_count())
        throw std::invalid_argument("cell array does not match dims");
    for (const Json& p : j.at("pieces")) task.pieces.push_back(piece_from_json(p));
    for (const Piece& p : task.pieces)
        if (p.id != kBasePiece) task.deps.nodes.push_back(p.id);
    for (const Json& e : j.at("edges"))
        task.deps.edges.emplace_back(e.at(0).get<PieceId>(), e.at(1).get<PieceId>());
    task.init.resize(task.pieces.size());
    for (std::size_t i = 0; i < task.init.size(); ++i) {
        const Json& rec = j.at("init").at(std::to_string(i + 1));
        task.init[i].location = location_from_string(rec.at("loc").get<std::string>());
        task.init[i].orientation = orientation_from_string(rec.at("orient").get<std::string>());
    }
    validate_task(task);
    return task;
}

inline Json to_json(const RangeI& r) { return Json{{"lo", r.lo}, {"hi", r.hi}}; }

inline RangeI range_from_json(const Json& j) {
    return RangeI{j.at("lo").get<int>(), j.at("hi").get<int>()};
}

inline Json to_json(const GenParams& p) {
    return Json{{"base_x", to_json(p.base_x)},     {"base_y", to_json(p.base_y)},
                {"base_z", to_json(p.base_z)},     {"brick_count", to_json(p.brick_count)},
                {"brick_x", to_json(p.brick_x)},   {"brick_y", to_json(p.brick_y)},
                {"brick_z", to_json(p.brick_z)},   {"max_attempts", p.max_attempts},
                {"q_down", p.q_down},              {"r_bad", p.r_bad}};
}

inline GenParams gen_params_from_json(const Json& j) {
    GenParams p;
    if (j.contains("base_x")) p.base_x = range_from_json(j.at("base_x"));
    if (j.contains("base_y")) p.base_y = range_from_json(j.at("base_y"));
    if (j.contains("base_z")) p.base_z = range_from_json(j.at("base_z"));
    if (j.contains("brick_count")) p.brick_count = range_from_json(j.at("brick_count"));
    if (j.contains("brick_x")) p.brick_x = range_from_json(j.at("brick_x"));
    if (j.contains("brick_y")) p.brick_y = range_from_json(j.at("brick_y"));
    if (j.contains("brick_z")) p.brick_z = range_from_json(j.at("brick_z"));
    if (j.contains("max_attempts")) p.max_attempts = j.at("max_attempts").get<int>();
    if (j.contains("q_down")) p.q_down = j.at("q_down").get<double>();
    if (j.contains("r_bad")) p.r_bad = j.at("r_bad").get<double>();
    p.validate();
    return p;
}

inline Json to_json(const Observation& obs) {
    Json pieces = Json::array();
    for (const Observation::PieceView& p : obs.pieces) {
        pieces.push_back(Json{{"id", p.id},
                              {"color", p.color},
                              {"loc", to_string(p.location)},
                              {"orient", to_string(p.orientation)}});
    }
    return Json{{"board", Json{{"cells", obs.board.cells},
                               {"dims", Json{{"x", obs.board.dims.x},
                                             {"y", obs.board.dims.y},
                                             {"z", obs.board.dims.z}}}}},
                {"goal", Json{{"task", obs.task_id}, {"hash", obs.goal_hash}}},
                {"hand", obs.in_hand},
                {"history", obs.history},
                {"pieces", pieces}};
}

inline Observation observation_from_json(const Json& j) {
    Observation obs;
    const Json& board = j.at("board");
    obs.board = VoxelGrid(Dims{board.at("dims").at("x").get<int>(),
                               board.at("dims").at("y").get<int>(),
                               board.at("dims").at("z").get<int>()});
    obs.board.cells = board.at("cells").get<std::vector<PieceId>>();
    if (obs.board.cells.size() != obs.board.dims.cell_count())
        throw std::invalid_argument("observation board cells do not match dims");
    for (const Json& p : j.at("pieces")) {
        obs.pieces.push_back({p.at("id").get<PieceId>(), p.at("color").get<std::string>(),
                              location_from_string(p.at("loc").get<std::string>()),
                              orientation_from_string(p.at("orient").get<std::string>())});
    }
    obs.in_hand = j.at("hand").get<PieceId>();
    obs.task_id = j.at("goal").at("task").get<std::string>();
    obs.goal_hash = j.at("goal").at("hash").get<std::string>();
    obs.history = j.at("history").get<std::vector<std::string>>();
    return obs;
}

// Canonical bytes: sorted keys, no whitespace. Byte equality of dumps is
// semantic equality for everything serialized here.
inline std::string canonical(const Json& j) { return j.dump(); }

inline std::string serialize_observation(const Observation& obs) { return canonical(to_json(obs)); }

inline std::string observation_hash(const Observation& obs) {
    return sha256_hex(serialize_observation(obs));
}

// Content address of a task's goal board (grid + piece table only; the
// initial configuration does not change the goal image).
inline std::string goal_hash(const TaskInstance& task) {
    Json pieces = Json::array();
    for (const Piece& p : task.pieces) pieces.push_back(to_json(p));
    Json j{{"cells", task.goal.cells},
           {"dims", Json{{"x", task.goal.dims.x}, {"y", task.goal.dims.y}, {"z", task.goal.dims.z}}},
           {"pieces", pieces}};
    return sha256_hex(canonical(j));
}

inline Environment make_environment(const TaskInstance& task, const EnvConfig& cfg) {
    return Environment(task, cfg, goal_hash(task));
}

// --- newline-delimited JSON files ---

inline void write_ndjson(const std::string& path, const std::vector<Json>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (const Json& r : records) out << canonical(r) << '\n';
}

inline std::vector<Json> read_ndjson(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::vector<Json> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        records.push_back(Json::parse(line));
    }
    return records;
}

inline void save_task_set(const std::string& path, const std::vector<TaskInstance>& tasks) {
    std::vector<Json> records;
    records.reserve(tasks.size());
    for (const TaskInstance& t : tasks) records.push_back(to_json(t));
    write_ndjson(path, records);
}

inline std::vector<TaskInstance> load_task_set(const std::string& path) {
    std::vector<TaskInstance> tasks;
    for (const Json& j : read_ndjson(path)) tasks.push_back(task_from_json(j));
    return tasks;
}

// One line per step: clock, action text, outcome, and the post-step
// observation. `plan` is attached by planning agents.
struct TrajectoryRecord {
    int t = 0;
    std::string action;
    std::string outcome;
    Observation obs;
    Json plan;  // null when the agent did not plan

    Json to_record() const {
        Json j{{"t", t}, {"action", action}, {"outcome", outcome}, {"obs", to_json(obs)}};
        if (!plan.is_null()) j["plan"] = plan;
        return j;
    }
};

}  // namespace interlock
