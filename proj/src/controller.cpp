#include "olympus/controller.hpp"

#include <algorithm>
#include <cctype>

#include "olympus/parser.hpp"
#include "olympus/tokens.hpp"

namespace olympus {

namespace {

std::string to_lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(std::string_view text) {
    size_t begin = 0;
    size_t end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    return std::string(text.substr(begin, end - begin));
}

// Sentence-level clauses; the delimiter stays with its clause.
std::vector<std::string> split_clauses(std::string_view text) {
    std::vector<std::string> clauses;
    size_t start = 0;
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if ((c == '.' || c == '!' || c == '?' || c == ';') &&
            (i + 1 == text.size() ||
             std::isspace(static_cast<unsigned char>(text[i + 1])))) {
            std::string clause = trim(text.substr(start, i + 1 - start));
            if (!clause.empty()) clauses.push_back(std::move(clause));
            start = i + 1;
        }
    }
    std::string tail = trim(text.substr(start));
    if (!tail.empty()) clauses.push_back(std::move(tail));
    return clauses;
}

std::vector<std::string> word_tokens(std::string_view lower) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : lower) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            current += c;
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

// Word-bounded containment so "composed" never trips a "pose" veto.
bool contains_word_sequence(const std::vector<std::string>& tokens,
                            const std::vector<std::string>& sequence) {
    if (sequence.empty() || sequence.size() > tokens.size()) return false;
    for (size_t i = 0; i + sequence.size() <= tokens.size(); ++i) {
        bool all = true;
        for (size_t j = 0; j < sequence.size(); ++j)
            if (tokens[i + j] != sequence[j]) {
                all = false;
                break;
            }
        if (all) return true;
    }
    return false;
}

struct ClauseMatch {
    size_t rule_index;
    size_t keyword_begin;
    size_t keyword_length;
};

// First single-quoted span, with apostrophes in contractions ignored.
std::optional<std::string> quoted_span(const std::string& clause) {
    for (size_t i = 0; i < clause.size(); ++i) {
        if (clause[i] != '\'') continue;
        bool opens = (i == 0 || !std::isalnum(static_cast<unsigned char>(clause[i - 1]))) &&
                     i + 1 < clause.size() &&
                     !std::isspace(static_cast<unsigned char>(clause[i + 1]));
        if (!opens) continue;
        for (size_t j = i + 1; j < clause.size(); ++j) {
            if (clause[j] != '\'') continue;
            bool closes = !std::isspace(static_cast<unsigned char>(clause[j - 1])) &&
                          (j + 1 == clause.size() ||
                           !std::isalnum(static_cast<unsigned char>(clause[j + 1])));
            if (closes && j > i + 1) return clause.substr(i + 1, j - i - 1);
        }
    }
    return std::nullopt;
}

}  // namespace

RuleRouter::RuleRouter(std::vector<RouteRule> rules, RuleRouterOptions options)
    : rules_(std::move(rules)), options_(options) {
    // Keywords and vetoes are matched lowercase.
    for (RouteRule& rule : rules_) {
        for (std::string& keyword : rule.keywords) keyword = to_lower(keyword);
        for (std::string& veto : rule.vetoes) veto = to_lower(veto);
    }
}

RoutedResponse RuleRouter::route(const ControllerRequest& request) const {
    if (trim(request.instruction).empty())
        throw std::invalid_argument("instruction is empty");

    RoutedResponse response;
    std::string pending_plain;
    size_t steps_emitted = 0;
    bool matched_any = false;

    for (std::string& clause : split_clauses(request.instruction)) {
        std::string lower = to_lower(clause);
        std::vector<std::string> tokens = word_tokens(lower);

        std::optional<ClauseMatch> best;
        for (size_t r = 0; r < rules_.size(); ++r) {
            const RouteRule& rule = rules_[r];
            bool vetoed = false;
            for (const std::string& veto : rule.vetoes)
                if (contains_word_sequence(tokens, word_tokens(veto))) {
                    vetoed = true;
                    break;
                }
            if (vetoed) continue;
            for (const std::string& keyword : rule.keywords) {
                size_t at = lower.find(keyword);
                if (at == std::string::npos) continue;
                if (!best || keyword.size() > best->keyword_length)
                    best = ClauseMatch{r, at, keyword.size()};
            }
        }

        if (!best || steps_emitted >= static_cast<size_t>(options_.max_chain_length)) {
            pending_plain += pending_plain.empty() ? clause : " " + clause;
            continue;
        }

        matched_any = true;
        std::string prompt;
        if (auto quoted = quoted_span(clause)) {
            prompt = *quoted;
        } else {
            prompt = trim(clause.substr(best->keyword_begin + best->keyword_length));
            if (prompt.empty()) prompt = trim(clause);
        }
        if (!pending_plain.empty()) {
            response.segments.emplace_back(PlainText{std::move(pending_plain)});
            pending_plain.clear();
        }
        response.segments.emplace_back(
            RoutingStep{rules_[best->rule_index].task, std::move(prompt)});
        ++steps_emitted;
    }

    if (!matched_any) {
        if (!options_.direct_answer_fallback)
            throw NoRouteError("no rule matches instruction");
        return RoutedResponse{{PlainText{request.instruction}}};
    }
    if (!pending_plain.empty())
        response.segments.emplace_back(PlainText{std::move(pending_plain)});
    return response;
}

std::vector<RouteRule> RuleRouter::default_rules(const TemplateBank& bank) {
    // Condition-marker aliases catch freeform phrasings the full heads
    // miss; generation rules are vetoed whenever a condition marker is
    // present so the controllable variants win those clauses.
    static const std::vector<std::string> kGenVetoes = {
        "pose",          "canny",          "scribble",
        "normal map",    "normal sequence", "segmentation map",
        "segmentation sequence", "segmentation mask", "depth map",
        "depth sequence"};

    std::vector<RouteRule> rules;
    rules.reserve(kRoutableTaskCount);
    for (const TaskKind& task : all_tasks()) {
        RouteRule rule;
        rule.task = task;
        rule.keywords = bank.templates(task).phrases;

        switch (task.family()) {
            case TaskFamily::ImageGen:
                for (const char* extra : {"craft an image", "generate an image",
                                          "create an image", "make an image",
                                          "draw a picture"})
                    rule.keywords.push_back(extra);
                rule.vetoes = kGenVetoes;
                break;
            case TaskFamily::VideoGen:
                for (const char* extra : {"craft a video", "generate a video",
                                          "create a video", "make a video"})
                    rule.keywords.push_back(extra);
                rule.vetoes = kGenVetoes;
                break;
            case TaskFamily::ControllableImageGen:
            case TaskFamily::ControllableVideoGen: {
                bool video = task.family() == TaskFamily::ControllableVideoGen;
                switch (*task.condition()) {
                    case Condition::Pose:
                        if (video)
                            rule.keywords.insert(rule.keywords.end(),
                                                 {"pose sequence", "pose track"});
                        else
                            rule.keywords.insert(rule.keywords.end(),
                                                 {"pose map", "pose imagery",
                                                  "pose reference"});
                        break;
                    case Condition::Canny:
                        if (video)
                            rule.keywords.insert(rule.keywords.end(),
                                                 {"canny sequence",
                                                  "canny edge sequence"});
                        else
                            rule.keywords.insert(rule.keywords.end(),
                                                 {"canny map", "canny edge map"});
                        break;
                    case Condition::Normal:
                        if (video)
                            rule.keywords.insert(rule.keywords.end(),
                                                 {"normal map sequence",
                                                  "normal sequence"});
                        else
                            rule.keywords.push_back("normal map");
                        break;
                    case Condition::Scribble:
                        if (video)
                            rule.keywords.push_back("scribble sequence");
                        else
                            rule.keywords.insert(rule.keywords.end(),
                                                 {"scribble sketch", "scribble map",
                                                  "scribble"});
                        break;
                    case Condition::Segmentation:
                        if (video)
                            rule.keywords.push_back("segmentation sequence");
                        else
                            rule.keywords.insert(rule.keywords.end(),
                                                 {"segmentation map",
                                                  "segmentation layout"});
                        break;
                    case Condition::Depth:
                        if (video)
                            rule.keywords.push_back("depth sequence");
                        else
                            rule.keywords.insert(rule.keywords.end(),
                                                 {"depth map", "depth layout"});
                        break;
                }
                break;
            }
            default:
                break;
        }
        rules.push_back(std::move(rule));
    }
    return rules;
}

ReplayRouter::ReplayRouter(const std::vector<InstructionRecord>& corpus) {
    for (const InstructionRecord& record : corpus) {
        by_id_.emplace(record.id, record.gold_response);
        by_instruction_.emplace(record.instruction, record.gold_response);
    }
}

RoutedResponse ReplayRouter::route(const ControllerRequest& request) const {
    const std::string* gold = nullptr;
    if (request.record_id) {
        auto it = by_id_.find(*request.record_id);
        if (it != by_id_.end()) gold = &it->second;
    }
    if (!gold) {
        auto it = by_instruction_.find(request.instruction);
        if (it != by_instruction_.end()) gold = &it->second;
    }
    if (!gold) throw NoRouteError("no benchmark record for request");
    return parse_response(*gold);
}

}  // namespace olympus
