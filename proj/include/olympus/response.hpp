#pragma once

#include <string>
#include <variant>
#include <vector>

#include "olympus/task.hpp"

namespace olympus {

inline constexpr int kDefaultMaxChainLength = 5;

// One routed step: which specialist handles it and the distilled prompt
// handed to that specialist.
struct RoutingStep {
    TaskKind task;
    std::string refined_prompt;

    bool operator==(const RoutingStep&) const = default;
};

struct PlainText {
    std::string text;

    bool operator==(const PlainText&) const = default;
};

using Segment = std::variant<PlainText, RoutingStep>;

// A controller response: an ordered mix of plain text and routing steps.
// A pure-understanding answer has zero steps. The parser does not cap the
// step count; the pipeline planner rejects over-long chains.
struct RoutedResponse {
    std::vector<Segment> segments;

    std::vector<RoutingStep> steps() const {
        std::vector<RoutingStep> out;
        for (const Segment& segment : segments)
            if (const auto* step = std::get_if<RoutingStep>(&segment)) out.push_back(*step);
        return out;
    }

    std::vector<TaskKind> tasks() const {
        std::vector<TaskKind> out;
        for (const Segment& segment : segments)
            if (const auto* step = std::get_if<RoutingStep>(&segment)) out.push_back(step->task);
        return out;
    }

    size_t step_count() const { return tasks().size(); }

    std::string plain_text() const {
        std::string out;
        for (const Segment& segment : segments)
            if (const auto* text = std::get_if<PlainText>(&segment)) out += text->text;
        return out;
    }

    bool operator==(const RoutedResponse&) const = default;
};

}  // namespace olympus
