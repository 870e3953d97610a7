#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "olympus/response.hpp"

namespace olympus {

// Parse failure over the routing-token grammar. Unknown <...> sequences
// are never an error (they pass through as plain text); only known tags
// in illegal positions are.
class ParseError : public std::runtime_error {
public:
    enum class Kind {
        UnbalancedTag,  // open without matching close, or stray close
        NestedTag,      // a known tag inside a step body
        EmptyPrompt,    // open immediately followed by its close
    };

    ParseError(Kind kind, std::string tag, size_t position);

    Kind kind() const { return kind_; }
    const std::string& tag() const { return tag_; }
    size_t position() const { return position_; }

private:
    Kind kind_;
    std::string tag_;
    size_t position_;
};

// Raised by render_response when a refined prompt embeds a known routing
// tag (the rendered string would not parse back to the same structure).
class IllegalPromptError : public std::runtime_error {
public:
    IllegalPromptError(std::string tag, size_t step_index);

    const std::string& tag() const { return tag_; }
    size_t step_index() const { return step_index_; }

private:
    std::string tag_;
    size_t step_index_;
};

// Decomposes controller text into plain-text runs and routing steps.
// Every input character lands in exactly one segment; adjacent plain
// runs are merged and empty ones dropped, so output is canonical.
RoutedResponse parse_response(std::string_view text);

// Inverse of parse_response: open_tag + prompt + close_tag per step,
// plain segments verbatim. parse_response(render_response(r)) == r for
// every response that satisfies the segment invariants.
std::string render_response(const RoutedResponse& response);

// True if text contains any known open or close routing tag.
bool contains_routing_tag(std::string_view text);

}  // namespace olympus
