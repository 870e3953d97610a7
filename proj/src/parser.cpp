#include "olympus/parser.hpp"

#include <optional>

#include "olympus/tokens.hpp"

namespace olympus {

namespace {

std::string describe(ParseError::Kind kind, const std::string& tag, size_t position) {
    std::string what;
    switch (kind) {
        case ParseError::Kind::UnbalancedTag: what = "unbalanced routing tag"; break;
        case ParseError::Kind::NestedTag: what = "nested routing tag"; break;
        case ParseError::Kind::EmptyPrompt: what = "empty refined prompt"; break;
    }
    what += " '" + tag + "' at byte " + std::to_string(position);
    return what;
}

bool is_name_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_';
}

struct TagMatch {
    TaskKind task;
    bool is_close;
    size_t begin;  // position of '<'
    size_t end;    // one past '>'
    std::string name;
};

// Reads a known routing tag at position `at` (which must hold '<').
// Unknown names and malformed tags yield nullopt so the caller can fall
// back to plain text.
std::optional<TagMatch> read_known_tag(std::string_view text, size_t at) {
    size_t cursor = at + 1;
    bool is_close = cursor < text.size() && text[cursor] == '/';
    if (is_close) ++cursor;
    size_t name_begin = cursor;
    while (cursor < text.size() && is_name_char(text[cursor])) ++cursor;
    if (cursor == name_begin || cursor >= text.size() || text[cursor] != '>')
        return std::nullopt;
    std::string_view name = text.substr(name_begin, cursor - name_begin);
    std::optional<TaskKind> task = task_from_token_name(name);
    if (!task) return std::nullopt;
    return TagMatch{*task, is_close, at, cursor + 1, std::string(name)};
}

std::optional<TagMatch> find_known_tag(std::string_view text, size_t from) {
    for (size_t lt = text.find('<', from); lt != std::string_view::npos;
         lt = text.find('<', lt + 1)) {
        if (auto tag = read_known_tag(text, lt)) return tag;
    }
    return std::nullopt;
}

}  // namespace

ParseError::ParseError(Kind kind, std::string tag, size_t position)
    : std::runtime_error(describe(kind, tag, position)),
      kind_(kind),
      tag_(std::move(tag)),
      position_(position) {}

IllegalPromptError::IllegalPromptError(std::string tag, size_t step_index)
    : std::runtime_error(tag.empty()
                             ? "empty refined prompt in step " + std::to_string(step_index)
                             : "refined prompt in step " + std::to_string(step_index) +
                                   " embeds routing tag '" + tag + "'"),
      tag_(std::move(tag)),
      step_index_(step_index) {}

RoutedResponse parse_response(std::string_view text) {
    RoutedResponse response;
    std::string plain;

    auto flush_plain = [&] {
        if (!plain.empty()) {
            response.segments.emplace_back(PlainText{std::move(plain)});
            plain.clear();
        }
    };

    size_t pos = 0;
    while (pos < text.size()) {
        size_t lt = text.find('<', pos);
        if (lt == std::string_view::npos) {
            plain.append(text.substr(pos));
            break;
        }
        plain.append(text.substr(pos, lt - pos));

        std::optional<TagMatch> tag = read_known_tag(text, lt);
        if (!tag) {
            // Not a routing tag; literal angle brackets stay in prose.
            plain.push_back('<');
            pos = lt + 1;
            continue;
        }
        if (tag->is_close)
            throw ParseError(ParseError::Kind::UnbalancedTag, tag->name, lt);

        const TokenSpec& spec = token_for(tag->task);
        size_t close_pos = text.find(spec.close_tag, tag->end);
        if (close_pos == std::string_view::npos)
            throw ParseError(ParseError::Kind::UnbalancedTag, tag->name, lt);

        std::string_view body = text.substr(tag->end, close_pos - tag->end);
        if (auto inner = find_known_tag(body, 0)) {
            auto kind = inner->is_close ? ParseError::Kind::UnbalancedTag
                                        : ParseError::Kind::NestedTag;
            throw ParseError(kind, inner->name, tag->end + inner->begin);
        }
        if (body.empty())
            throw ParseError(ParseError::Kind::EmptyPrompt, tag->name, lt);

        flush_plain();
        response.segments.emplace_back(RoutingStep{tag->task, std::string(body)});
        pos = close_pos + spec.close_tag.size();
    }
    flush_plain();
    return response;
}

std::string render_response(const RoutedResponse& response) {
    std::string out;
    size_t step_index = 0;
    for (const Segment& segment : response.segments) {
        if (const auto* text = std::get_if<PlainText>(&segment)) {
            out += text->text;
            continue;
        }
        const auto& step = std::get<RoutingStep>(segment);
        if (step.refined_prompt.empty()) throw IllegalPromptError("", step_index);
        if (auto inner = find_known_tag(step.refined_prompt, 0))
            throw IllegalPromptError(inner->name, step_index);
        const TokenSpec& spec = token_for(step.task);
        out += spec.open_tag;
        out += step.refined_prompt;
        out += spec.close_tag;
        ++step_index;
    }
    return out;
}

bool contains_routing_tag(std::string_view text) {
    return find_known_tag(text, 0).has_value();
}

}  // namespace olympus
