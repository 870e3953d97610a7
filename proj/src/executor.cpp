#include "olympus/executor.hpp"

#include <chrono>

#include <nlohmann/json.hpp>

namespace olympus {

namespace {

using nlohmann::ordered_json;

ordered_json artifact_to_json(const Artifact& artifact) {
    ordered_json out{{"modality", modality_name(artifact.modality)},
                     {"locator", artifact.locator}};
    if (artifact.producer)
        out["producer"] = {{"step", artifact.producer->first},
                           {"task", artifact.producer->second.name()}};
    return out;
}

ordered_json step_to_json(const StepResult& step, size_t index) {
    ordered_json out{{"index", index},
                     {"task", step.task.name()},
                     {"prompt", step.refined_prompt},
                     {"model", step.model_name},
                     {"status", step_status_name(step.status)},
                     {"duration_ms", step.duration_ms}};
    out["outputs"] = ordered_json::array();
    for (const Artifact& artifact : step.outputs)
        out["outputs"].push_back(artifact_to_json(artifact));
    if (!step.error.empty()) out["error"] = step.error;
    return out;
}

ordered_json report_body(const RunReport& report) {
    ordered_json out;
    out["steps"] = ordered_json::array();
    for (size_t i = 0; i < report.steps.size(); ++i)
        out["steps"].push_back(step_to_json(report.steps[i], i));
    out["final_artifacts"] = ordered_json::array();
    for (const Artifact& artifact : report.final_artifacts)
        out["final_artifacts"].push_back(artifact_to_json(artifact));
    out["final_text"] = report.final_text;
    return out;
}

std::string artifact_summary(const std::vector<Artifact>& artifacts) {
    std::string out;
    for (const Artifact& artifact : artifacts) {
        if (!out.empty()) out += "\n";
        out += "[";
        out += modality_name(artifact.modality);
        out += "] ";
        out += artifact.locator;
    }
    return out;
}

}  // namespace

ChainTooLongError::ChainTooLongError(size_t actual, size_t max)
    : PlanError("chain of " + std::to_string(actual) + " steps exceeds the maximum of " +
                std::to_string(max)),
      actual_(actual),
      max_(max) {}

UnsatisfiedInputError::UnsatisfiedInputError(size_t step, Modality modality)
    : PlanError("step " + std::to_string(step) + " needs a " +
                std::string(modality_name(modality)) + " input but none is available"),
      step_(step),
      modality_(modality) {}

EmptyResponseError::EmptyResponseError()
    : PlanError("response has no routing steps to plan") {}

std::string_view step_status_name(StepStatus status) {
    switch (status) {
        case StepStatus::Ok: return "ok";
        case StepStatus::Failed: return "failed";
        case StepStatus::Skipped: return "skipped";
    }
    return "unknown";
}

Plan plan(const RoutedResponse& response, const std::vector<Artifact>& attachments,
          int max_chain_length) {
    std::vector<RoutingStep> steps = response.steps();
    if (steps.empty()) throw EmptyResponseError();
    if (max_chain_length > 0 && steps.size() > static_cast<size_t>(max_chain_length))
        throw ChainTooLongError(steps.size(), static_cast<size_t>(max_chain_length));

    Plan result;
    result.steps.reserve(steps.size());
    result.attachments = attachments;
    for (size_t i = 0; i < steps.size(); ++i) {
        PlannedStep planned{steps[i].task, steps[i].refined_prompt, {}};
        for (Modality required : modality_signature(steps[i].task).inputs) {
            bool bound = false;
            // Latest step output of the right modality wins...
            for (size_t j = i; j-- > 0;) {
                if (modality_signature(steps[j].task).output == required) {
                    planned.input_bindings.emplace_back(StepOutput{j, 0});
                    bound = true;
                    break;
                }
            }
            // ...then the first matching user attachment.
            if (!bound)
                for (size_t k = 0; k < attachments.size(); ++k)
                    if (attachments[k].modality == required) {
                        planned.input_bindings.emplace_back(UserAttachment{k});
                        bound = true;
                        break;
                    }
            if (!bound) throw UnsatisfiedInputError(i, required);
        }
        result.steps.push_back(std::move(planned));
    }
    return result;
}

RunReport execute(const Plan& plan, const Registry& registry,
                  const ExecuteOptions& options) {
    RunReport report;
    report.steps.reserve(plan.steps.size());

    bool halted = false;
    for (size_t i = 0; i < plan.steps.size(); ++i) {
        const PlannedStep& planned = plan.steps[i];
        StepResult result;
        result.task = planned.task;
        result.refined_prompt = planned.refined_prompt;
        if (const SpecialistSpec* spec = registry.find(planned.task))
            result.model_name = spec->model_name;

        if (halted) {
            result.status = StepStatus::Skipped;
            result.error = "skipped after earlier failure";
            report.steps.push_back(std::move(result));
            continue;
        }

        // Resolve bindings; a source step that did not complete makes
        // this step unrunnable even under continue_on_error.
        std::vector<Artifact> inputs;
        std::string unavailable;
        for (const ArtifactRef& ref : planned.input_bindings) {
            if (const auto* attachment = std::get_if<UserAttachment>(&ref)) {
                inputs.push_back(plan.attachments.at(attachment->index));
                continue;
            }
            const auto& source = std::get<StepOutput>(ref);
            const StepResult& upstream = report.steps.at(source.step);
            if (upstream.status != StepStatus::Ok ||
                source.output >= upstream.outputs.size()) {
                unavailable = "input from step " + std::to_string(source.step) +
                              " is unavailable";
                break;
            }
            inputs.push_back(upstream.outputs[source.output]);
        }
        if (!unavailable.empty()) {
            result.status = StepStatus::Skipped;
            result.error = unavailable;
            report.steps.push_back(std::move(result));
            continue;
        }

        auto started = std::chrono::steady_clock::now();
        try {
            result.outputs = invoke(registry, planned.task, planned.refined_prompt, inputs);
            for (Artifact& artifact : result.outputs)
                artifact.producer = std::make_pair(i, planned.task);
            result.status = StepStatus::Ok;
        } catch (const std::runtime_error& failure) {
            result.status = StepStatus::Failed;
            result.error = failure.what();
            if (!options.continue_on_error) halted = true;
        }
        result.duration_ms = std::chrono::duration<double, std::milli>(
                                 std::chrono::steady_clock::now() - started)
                                 .count();
        report.steps.push_back(std::move(result));
    }

    for (size_t i = report.steps.size(); i-- > 0;) {
        if (report.steps[i].status == StepStatus::Ok) {
            report.final_artifacts = report.steps[i].outputs;
            break;
        }
    }
    if (options.surface_all_outputs) {
        report.final_artifacts.clear();
        for (const StepResult& step : report.steps)
            for (const Artifact& artifact : step.outputs)
                report.final_artifacts.push_back(artifact);
    }
    report.final_text = artifact_summary(report.final_artifacts);
    return report;
}

RunReport run_response(const RoutedResponse& response,
                       const std::vector<Artifact>& attachments, const Registry& registry,
                       const ExecuteOptions& options, int max_chain_length) {
    RunReport report = execute(plan(response, attachments, max_chain_length), registry,
                               options);
    std::string prose = response.plain_text();
    if (!prose.empty())
        report.final_text =
            report.final_text.empty() ? prose : prose + "\n" + report.final_text;
    return report;
}

std::string report_to_text(const RunReport& report) {
    std::string out;
    for (size_t i = 0; i < report.steps.size(); ++i) {
        const StepResult& step = report.steps[i];
        out += "step " + std::to_string(i + 1) + "/" +
               std::to_string(report.steps.size()) + "  " + step.task.name();
        out += "  [" + std::string(step_status_name(step.status)) + "]";
        if (!step.model_name.empty()) out += "  (" + step.model_name + ")";
        out += "\n  prompt: " + step.refined_prompt + "\n";
        for (const Artifact& artifact : step.outputs)
            out += "  -> [" + std::string(modality_name(artifact.modality)) + "] " +
                   artifact.locator + "\n";
        if (!step.error.empty()) out += "  !! " + step.error + "\n";
    }
    if (!report.final_text.empty()) out += report.final_text + "\n";
    return out;
}

std::string report_to_json_lines(const RunReport& report) {
    std::string out;
    for (size_t i = 0; i < report.steps.size(); ++i) {
        ordered_json line = step_to_json(report.steps[i], i);
        line["type"] = "step";
        out += line.dump() + "\n";
    }
    ordered_json summary{{"type", "summary"}};
    summary["final_artifacts"] = ordered_json::array();
    for (const Artifact& artifact : report.final_artifacts)
        summary["final_artifacts"].push_back(artifact_to_json(artifact));
    summary["final_text"] = report.final_text;
    out += summary.dump() + "\n";
    return out;
}

std::string report_to_json(const RunReport& report) { return report_body(report).dump(2); }

}  // namespace olympus
