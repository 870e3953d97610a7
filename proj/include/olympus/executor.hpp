#pragma once

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "olympus/artifact.hpp"
#include "olympus/registry.hpp"
#include "olympus/response.hpp"

namespace olympus {

struct UserAttachment {
    size_t index;
    bool operator==(const UserAttachment&) const = default;
};

struct StepOutput {
    size_t step;
    size_t output;
    bool operator==(const StepOutput&) const = default;
};

using ArtifactRef = std::variant<UserAttachment, StepOutput>;

struct PlannedStep {
    TaskKind task;
    std::string refined_prompt;
    // One binding per required input modality, in signature order. Refs
    // only ever point at earlier steps or user attachments.
    std::vector<ArtifactRef> input_bindings;
};

struct Plan {
    std::vector<PlannedStep> steps;
    // The attachments the plan was resolved against; UserAttachment
    // refs index into this list.
    std::vector<Artifact> attachments;
};

class PlanError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ChainTooLongError : public PlanError {
public:
    ChainTooLongError(size_t actual, size_t max);
    size_t actual() const { return actual_; }
    size_t max() const { return max_; }

private:
    size_t actual_;
    size_t max_;
};

class UnsatisfiedInputError : public PlanError {
public:
    UnsatisfiedInputError(size_t step, Modality modality);
    size_t step() const { return step_; }
    Modality modality() const { return modality_; }

private:
    size_t step_;
    Modality modality_;
};

class EmptyResponseError : public PlanError {
public:
    EmptyResponseError();
};

// Resolves artifact flow for a routed response. Each required input
// binds to the most recent artifact of that modality: later step
// outputs beat user attachments, and among attachments the first match
// wins. Deterministic; returns a complete plan or throws.
Plan plan(const RoutedResponse& response, const std::vector<Artifact>& attachments,
          int max_chain_length = kDefaultMaxChainLength);

enum class StepStatus { Ok, Failed, Skipped };

std::string_view step_status_name(StepStatus status);

struct StepResult {
    TaskKind task = TaskKind::of(TaskFamily::ImageGen);
    std::string refined_prompt;
    StepStatus status = StepStatus::Skipped;
    std::vector<Artifact> outputs;
    double duration_ms = 0.0;
    std::string error;       // populated for Failed/Skipped steps
    std::string model_name;  // specialist documentation name
};

struct ExecuteOptions {
    bool continue_on_error = false;
    // Surface every step's outputs in final_artifacts, not just the
    // last successful step's.
    bool surface_all_outputs = false;
};

struct RunReport {
    std::vector<StepResult> steps;
    std::vector<Artifact> final_artifacts;
    std::string final_text;

    bool all_ok() const {
        for (const StepResult& step : steps)
            if (step.status != StepStatus::Ok) return false;
        return true;
    }
};

// Runs the plan strictly in order. Backend failures mark the step
// Failed and never abort the report; subsequent steps are Skipped
// unless continue_on_error is set (steps whose inputs came from a
// failed step are skipped regardless).
RunReport execute(const Plan& plan, const Registry& registry,
                  const ExecuteOptions& options = {});

// plan + execute for a full response; prepends the response's plain
// text to the report's final_text.
RunReport run_response(const RoutedResponse& response,
                       const std::vector<Artifact>& attachments, const Registry& registry,
                       const ExecuteOptions& options = {},
                       int max_chain_length = kDefaultMaxChainLength);

std::string report_to_text(const RunReport& report);
// One JSON object per line: a "step" record per step, then a "summary".
std::string report_to_json_lines(const RunReport& report);
std::string report_to_json(const RunReport& report);

}  // namespace olympus
