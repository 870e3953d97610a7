#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "olympus/artifact.hpp"
#include "olympus/dataset.hpp"
#include "olympus/response.hpp"

namespace olympus {

// One prior conversation exchange, both sides in wire text form.
struct Turn {
    std::string instruction;
    std::string response;
};

struct ControllerRequest {
    std::string instruction;
    std::vector<Artifact> attachments;
    std::vector<Turn> history;
    // Benchmark record id; the replay router keys on it when present.
    std::optional<std::string> record_id;
};

class NoRouteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Converts a user instruction into a routed response. Implementations
// are immutable after construction and safe to share across threads.
class Controller {
public:
    virtual ~Controller() = default;
    virtual RoutedResponse route(const ControllerRequest& request) const = 0;
};

// One routing rule: case-insensitive keyword alternatives, the longest
// match in a clause wins (earlier rules break ties). Veto word
// sequences suppress the rule for a clause, which keeps bare generation
// phrases from shadowing condition-guided generation.
struct RouteRule {
    TaskKind task = TaskKind::of(TaskFamily::ImageGen);
    std::vector<std::string> keywords;
    std::vector<std::string> vetoes;
};

struct RuleRouterOptions {
    // When nothing matches, answer directly with the instruction as
    // plain text instead of raising NoRoute.
    bool direct_answer_fallback = true;
    int max_chain_length = kDefaultMaxChainLength;
};

// Deterministic keyword router: splits the instruction into sentence
// clauses, picks at most one task per clause, and extracts the refined
// prompt from a quoted span or the text after the matched keyword.
class RuleRouter final : public Controller {
public:
    explicit RuleRouter(std::vector<RouteRule> rules, RuleRouterOptions options = {});

    // Rules derived from the template bank's phrase heads plus a small
    // alias table; covers every routable task.
    static std::vector<RouteRule> default_rules(
        const TemplateBank& bank = TemplateBank::default_bank());

    RoutedResponse route(const ControllerRequest& request) const override;

    const std::vector<RouteRule>& rules() const { return rules_; }

private:
    std::vector<RouteRule> rules_;
    RuleRouterOptions options_;
};

// Returns each benchmark record's gold response verbatim; the
// end-to-end identity baseline for the eval harness.
class ReplayRouter final : public Controller {
public:
    explicit ReplayRouter(const std::vector<InstructionRecord>& corpus);

    RoutedResponse route(const ControllerRequest& request) const override;

private:
    std::unordered_map<std::string, std::string> by_id_;
    std::unordered_map<std::string, std::string> by_instruction_;
};

}  // namespace olympus
