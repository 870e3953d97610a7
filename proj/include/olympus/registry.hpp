#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "olympus/artifact.hpp"
#include "olympus/task.hpp"

namespace olympus {

// Input modalities a task consumes beyond the always-implicit text
// prompt, and the modality of its primary output. Fixed per task family.
struct ModalitySignature {
    std::vector<Modality> inputs;
    Modality output;
};

const ModalitySignature& modality_signature(const TaskKind& task);

struct StubBackend {
    int latency_ms = 0;
    uint64_t seed = 0;

    bool operator==(const StubBackend&) const = default;
};

struct CommandBackend {
    // argv template; "{prompt}" and "{inputN}" are the only placeholders.
    std::vector<std::string> argv;
    int timeout_ms = 30000;

    bool operator==(const CommandBackend&) const = default;
};

struct HttpBackend {
    std::string endpoint;
    int timeout_ms = 30000;

    bool operator==(const HttpBackend&) const = default;
};

using BackendKind = std::variant<StubBackend, CommandBackend, HttpBackend>;

struct SpecialistSpec {
    TaskKind task;
    BackendKind backend;
    std::string model_name;  // documentation only, surfaces in run reports
};

// Registry config failed validation; all problems are reported at once.
class RegistryError : public std::runtime_error {
public:
    RegistryError(std::vector<TaskKind> missing, std::vector<TaskKind> duplicate,
                  std::vector<std::string> bad_backends);

    const std::vector<TaskKind>& missing() const { return missing_; }
    const std::vector<TaskKind>& duplicate() const { return duplicate_; }
    const std::vector<std::string>& bad_backends() const { return bad_backends_; }

private:
    std::vector<TaskKind> missing_;
    std::vector<TaskKind> duplicate_;
    std::vector<std::string> bad_backends_;
};

class UnresolvedTaskError : public std::runtime_error {
public:
    explicit UnresolvedTaskError(const TaskKind& task);
    TaskKind task() const { return task_; }

private:
    TaskKind task_;
};

class ModalityMismatchError : public std::runtime_error {
public:
    ModalityMismatchError(const TaskKind& task, Modality missing);
    Modality missing() const { return missing_; }

private:
    Modality missing_;
};

class BackendFailure : public std::runtime_error {
public:
    BackendFailure(std::string detail, std::optional<int> code = std::nullopt);
    // Exit code for command backends, HTTP status for http backends.
    std::optional<int> code() const { return code_; }

private:
    std::optional<int> code_;
};

// Immutable task -> specialist mapping. Read-only after load; safe to
// share across concurrent invocations.
class Registry {
public:
    // Parses and validates a JSON config document (see README for the
    // schema). Unless allow_partial is set in the document, all 30
    // routable tasks must be covered exactly once.
    static Registry load(const std::string& config_json);
    static Registry load_file(const std::string& path);

    // The shipped default: deterministic stubs for all 30 tasks, named
    // after the reference specialist models.
    static Registry default_stub_registry(uint64_t seed = 0);

    const SpecialistSpec* find(const TaskKind& task) const;
    const SpecialistSpec& resolve(const TaskKind& task) const;  // throws UnresolvedTask
    size_t size() const { return specs_.size(); }
    const std::vector<SpecialistSpec>& specs() const { return specs_; }

private:
    explicit Registry(std::vector<SpecialistSpec> specs);

    std::vector<SpecialistSpec> specs_;               // sorted by task index
    std::vector<int> by_index_;                       // task index -> specs_ pos or -1
};

// Runs one specialist. Inputs must cover the task's required modalities
// (the text prompt is implicit). Returns at least one artifact whose
// first element carries the task's output modality.
std::vector<Artifact> invoke(const Registry& registry, const TaskKind& task,
                             const std::string& refined_prompt,
                             const std::vector<Artifact>& inputs);

}  // namespace olympus
