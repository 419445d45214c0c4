#pragma once

#include <interlock/serialize.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace interlock {

// Inputs for the policy's two prompt-conditioned modes.
struct ProposalRequest {
    Observation goal;
    Observation current;
    std::vector<std::string> history;  // last h executed action texts
};

struct ReflectionRequest {
    Observation goal;
    Observation current;
    Observation future;             // imagined observation after the plan
    std::vector<std::string> plan;  // proposed action texts, first to be executed
    std::vector<std::string> history;
};

inline ProposalRequest make_proposal_request(Observation goal, Observation current) {
    ProposalRequest req;
    req.history = current.history;
    req.goal = std::move(goal);
    req.current = std::move(current);
    return req;
}

inline ReflectionRequest make_reflection_request(Observation goal, Observation current,
                                                 Observation future, std::vector<std::string> plan) {
    ReflectionRequest req;
    req.history = current.history;
    req.goal = std::move(goal);
    req.current = std::move(current);
    req.future = std::move(future);
    req.plan = std::move(plan);
    return req;
}

// Prompt templates, kept character-for-character as the model was trained on
// them (misspellings included). Slots: {history}, {colors}, {init_plan}.
inline constexpr std::string_view kProposalTemplate =
    "There is a puzzle consisting of a board and several pieces with different colors on the "
    "table. The goal is to assemble the puzzle with the robot arm. In each step, one of the "
    "following four actions can be taken: pick up [obj], put down [obj], reorient [obj], and "
    "insert [obj], where [obj] refers to the piece to be manipulataed. The image of the goal "
    "state is: <image>. The image of the current state is: <image>. The most recently executed "
    "actions are: {history}. What action should be taken next? Note that [obj] should be a color "
    "chosen from the following list: {colors}.";

inline constexpr std::string_view kReflectionTemplate =
    "There is a puzzle consisting of a board and several pieces with different colors on the "
    "table. The goal is to assemble the puzzle with the robot arm. In each step, one of the "
    "following four actions can be taken: pick up [obj], put down [obj], reorient [obj], and "
    "insert [obj], where [obj] refers to the piece to be manipulataed. The image of the goal "
    "state is: <image>. The image of the current state is: <image>. The most recently executed "
    "actions are: {history}. The next five steps planned by the model is {init_plan}, from which "
    "we are going to only execute the first action. Note that if the full plan was executed "
    "sequentially, the future state would be: <image>. What action should be taken for the "
    "immediate next step? Note that [obj] should be a color chosen from the following list: "
    "{colors}. You can modify the initial plan if it leads to an undesired future state.";

inline constexpr std::size_t kObsRefLength = 16;  // hex chars of the sha256 kept in image tags

namespace detail {

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += sep;
        out += parts[i];
    }
    return out;
}

inline void replace_all(std::string& text, std::string_view slot, std::string_view value) {
    std::size_t pos = 0;
    while ((pos = text.find(slot, pos)) != std::string::npos) {
        text.replace(pos, slot.size(), value);
        pos += value.size();
    }
}

// Appends "[obs:<hash prefix>]" after each <image> token, in order.
inline void tag_images(std::string& text, const std::vector<const Observation*>& images) {
    std::size_t pos = 0;
    for (const Observation* obs : images) {
        pos = text.find("<image>", pos);
        if (pos == std::string::npos)
            throw std::logic_error("prompt template has fewer <image> tokens than observations");
        pos += std::string_view("<image>").size();
        std::string tag = "[obs:" + observation_hash(*obs).substr(0, kObsRefLength) + "]";
        text.insert(pos, tag);
        pos += tag.size();
    }
}

}  // namespace detail

inline std::string render_history(const std::vector<std::string>& history) {
    return history.empty() ? "none" : detail::join(history, ", ");
}

// Brick colors in palette (generation) order, as the {colors} slot expects.
inline std::string render_colors(const Observation& obs) {
    std::vector<std::string> colors;
    for (const Observation::PieceView& p : obs.pieces)
        if (p.id != kBasePiece) colors.push_back(p.color);
    return detail::join(colors, ", ");
}

inline std::string render_prompt(const ProposalRequest& req) {
    std::string text(kProposalTemplate);
    detail::replace_all(text, "{history}", render_history(req.history));
    detail::replace_all(text, "{colors}", render_colors(req.current));
    detail::tag_images(text, {&req.goal, &req.current});
    return text;
}

inline std::string render_prompt(const ReflectionRequest& req) {
    std::string text(kReflectionTemplate);
    detail::replace_all(text, "{history}", render_history(req.history));
    detail::replace_all(text, "{init_plan}", detail::join(req.plan, ", "));
    detail::replace_all(text, "{colors}", render_colors(req.current));
    detail::tag_images(text, {&req.goal, &req.current, &req.future});
    return text;
}

}  // namespace interlock
