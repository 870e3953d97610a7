#include "olympus/registry.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "olympus/tokens.hpp"

namespace olympus {

namespace {

using nlohmann::json;

uint64_t fnv1a64(std::string_view data, uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex16(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) out[i] = digits[v & 0xf];
    return out;
}

std::string join_tasks(const std::vector<TaskKind>& tasks) {
    std::string out;
    for (const TaskKind& t : tasks) {
        if (!out.empty()) out += ", ";
        out += t.name();
    }
    return out;
}

struct CommandResult {
    int exit_code;
    std::string output;
    bool timed_out;
};

// fork/exec with a hard deadline; the child is killed if it overruns.
CommandResult run_command(const std::vector<std::string>& argv, int timeout_ms) {
    int fds[2];
    if (pipe(fds) != 0) throw BackendFailure("pipe() failed");

    pid_t pid = fork();
    if (pid < 0) {
        close(fds[0]);
        close(fds[1]);
        throw BackendFailure("fork() failed");
    }
    if (pid == 0) {
        close(fds[0]);
        dup2(fds[1], STDOUT_FILENO);
        close(fds[1]);
        std::vector<char*> args;
        args.reserve(argv.size() + 1);
        for (const std::string& a : argv) args.push_back(const_cast<char*>(a.c_str()));
        args.push_back(nullptr);
        execvp(args[0], args.data());
        _exit(127);
    }

    close(fds[1]);
    CommandResult result{0, {}, false};
    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    char buf[4096];
    bool open = true;
    while (open) {
        auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
                             deadline - std::chrono::steady_clock::now())
                             .count();
        if (remaining <= 0) {
            kill(pid, SIGKILL);
            result.timed_out = true;
            break;
        }
        struct pollfd pfd{fds[0], POLLIN, 0};
        int rc = poll(&pfd, 1, static_cast<int>(remaining));
        if (rc <= 0) continue;
        ssize_t n = read(fds[0], buf, sizeof(buf));
        if (n <= 0)
            open = false;
        else
            result.output.append(buf, static_cast<size_t>(n));
    }
    close(fds[0]);
    int status = 0;
    waitpid(pid, &status, 0);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    return result;
}

std::vector<Artifact> invoke_stub(const TokenSpec& token, const StubBackend& stub,
                                  const std::string& prompt, Modality output) {
    if (stub.latency_ms > 0)
        std::this_thread::sleep_for(std::chrono::milliseconds(stub.latency_ms));
    std::string key = token.name;
    key += '\x1f';
    key += prompt;
    key += '\x1f';
    key += hex16(stub.seed);
    return {Artifact{output, "stub://" + token.name + "/" + hex16(fnv1a64(key)), {}}};
}

std::vector<Artifact> invoke_command(const TokenSpec& token, const CommandBackend& backend,
                                     const std::string& prompt,
                                     const std::vector<Artifact>& inputs, Modality output) {
    std::vector<std::string> argv;
    argv.reserve(backend.argv.size());
    for (const std::string& part : backend.argv) {
        std::string expanded = part;
        size_t at;
        while ((at = expanded.find("{prompt}")) != std::string::npos)
            expanded.replace(at, 8, prompt);
        for (size_t i = 0; i < inputs.size(); ++i) {
            std::string key = "{input" + std::to_string(i) + "}";
            while ((at = expanded.find(key)) != std::string::npos)
                expanded.replace(at, key.size(), inputs[i].locator);
        }
        argv.push_back(std::move(expanded));
    }
    CommandResult result = run_command(argv, backend.timeout_ms);
    if (result.timed_out)
        throw BackendFailure(token.name + ": command timed out after " +
                             std::to_string(backend.timeout_ms) + " ms");
    if (result.exit_code != 0)
        throw BackendFailure(token.name + ": command exited with " +
                                 std::to_string(result.exit_code),
                             result.exit_code);
    std::vector<Artifact> artifacts;
    std::istringstream lines(result.output);
    for (std::string line; std::getline(lines, line);)
        if (!line.empty()) artifacts.push_back(Artifact{output, line, {}});
    return artifacts;
}

std::vector<Artifact> invoke_http(const TokenSpec& token, const HttpBackend& backend,
                                  const std::string& prompt,
                                  const std::vector<Artifact>& inputs) {
    std::string base = backend.endpoint;
    std::string path = "/";
    size_t scheme = base.find("://");
    size_t slash = base.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (slash != std::string::npos) {
        path = base.substr(slash);
        base = base.substr(0, slash);
    }

    json payload{{"task", token.name}, {"prompt", prompt}, {"inputs", json::array()}};
    for (const Artifact& input : inputs)
        payload["inputs"].push_back(
            {{"modality", modality_name(input.modality)}, {"locator", input.locator}});

    httplib::Client client(base);
    client.set_connection_timeout(0, backend.timeout_ms * 1000);
    client.set_read_timeout(0, backend.timeout_ms * 1000);
    client.set_write_timeout(0, backend.timeout_ms * 1000);

    auto res = client.Post(path, payload.dump(), "application/json");
    if (!res)
        throw BackendFailure(token.name + ": no response from " + backend.endpoint);
    if (res->status != 200)
        throw BackendFailure(token.name + ": HTTP " + std::to_string(res->status),
                             res->status);

    json body = json::parse(res->body, nullptr, false);
    if (body.is_discarded() || !body.contains("outputs") || !body["outputs"].is_array())
        throw BackendFailure(token.name + ": malformed backend response");
    std::vector<Artifact> artifacts;
    for (const json& entry : body["outputs"]) {
        auto modality = modality_from_name(entry.value("modality", ""));
        if (!modality || !entry.contains("locator"))
            throw BackendFailure(token.name + ": malformed output entry");
        artifacts.push_back(Artifact{*modality, entry["locator"].get<std::string>(), {}});
    }
    return artifacts;
}

}  // namespace

const ModalitySignature& modality_signature(const TaskKind& task) {
    static const std::array<ModalitySignature, kRoutableTaskCount> kTable = [] {
        std::array<ModalitySignature, kRoutableTaskCount> table;
        auto set = [&table](TaskKind t, std::vector<Modality> in, Modality out) {
            table[static_cast<size_t>(t.index())] = {std::move(in), out};
        };
        using F = TaskFamily;
        set(TaskKind::of(F::ImageGen), {}, Modality::Image);
        set(TaskKind::of(F::VideoGen), {}, Modality::Video);
        set(TaskKind::of(F::ImageEdit), {Modality::Image}, Modality::Image);
        set(TaskKind::of(F::VideoEdit), {Modality::Video}, Modality::Video);
        set(TaskKind::of(F::Text3D), {}, Modality::Mesh3D);
        set(TaskKind::of(F::Image3D), {Modality::Image}, Modality::Mesh3D);
        set(TaskKind::of(F::ImageDeblur), {Modality::Image}, Modality::Image);
        set(TaskKind::of(F::ImageDerain), {Modality::Image}, Modality::Image);
        set(TaskKind::of(F::ImageDenoise), {Modality::Image}, Modality::Image);
        set(TaskKind::of(F::ImageSR), {Modality::Image}, Modality::Image);
        set(TaskKind::of(F::PoseEst), {Modality::Image}, Modality::Map);
        set(TaskKind::of(F::NormalEst), {Modality::Image}, Modality::Map);
        set(TaskKind::of(F::CannyEst), {Modality::Image}, Modality::Map);
        set(TaskKind::of(F::DepthEst), {Modality::Image}, Modality::Map);
        set(TaskKind::of(F::ObjectDetect), {Modality::Image}, Modality::Boxes);
        set(TaskKind::of(F::ObjectSegment), {Modality::Image}, Modality::Mask);
        set(TaskKind::of(F::VisualGround), {Modality::Image}, Modality::Boxes);
        set(TaskKind::of(F::VideoRefSeg), {Modality::Video}, Modality::Mask);
        for (int c = 0; c < kConditionCount; ++c) {
            set(TaskKind::controllable(F::ControllableImageGen, static_cast<Condition>(c)),
                {Modality::Map}, Modality::Image);
            set(TaskKind::controllable(F::ControllableVideoGen, static_cast<Condition>(c)),
                {Modality::Map}, Modality::Video);
        }
        return table;
    }();
    return kTable[static_cast<size_t>(task.index())];
}

RegistryError::RegistryError(std::vector<TaskKind> missing, std::vector<TaskKind> duplicate,
                             std::vector<std::string> bad_backends)
    : std::runtime_error([&] {
          std::string what = "registry config invalid:";
          if (!missing.empty()) what += " missing [" + join_tasks(missing) + "]";
          if (!duplicate.empty()) what += " duplicate [" + join_tasks(duplicate) + "]";
          for (const std::string& bad : bad_backends) what += " " + bad + ";";
          return what;
      }()),
      missing_(std::move(missing)),
      duplicate_(std::move(duplicate)),
      bad_backends_(std::move(bad_backends)) {}

UnresolvedTaskError::UnresolvedTaskError(const TaskKind& task)
    : std::runtime_error("no specialist registered for task '" + task.name() + "'"),
      task_(task) {}

ModalityMismatchError::ModalityMismatchError(const TaskKind& task, Modality missing)
    : std::runtime_error("task '" + task.name() + "' requires a " +
                         std::string(modality_name(missing)) + " input"),
      missing_(missing) {}

BackendFailure::BackendFailure(std::string detail, std::optional<int> code)
    : std::runtime_error(std::move(detail)), code_(code) {}

Registry::Registry(std::vector<SpecialistSpec> specs)
    : specs_(std::move(specs)), by_index_(kRoutableTaskCount, -1) {
    std::sort(specs_.begin(), specs_.end(), [](const auto& a, const auto& b) {
        return a.task.index() < b.task.index();
    });
    for (size_t i = 0; i < specs_.size(); ++i)
        by_index_[static_cast<size_t>(specs_[i].task.index())] = static_cast<int>(i);
}

Registry Registry::load(const std::string& config_json) {
    json doc = json::parse(config_json, nullptr, false);
    if (doc.is_discarded())
        throw RegistryError({}, {}, {"config is not valid JSON"});
    if (!doc.contains("specialists") || !doc["specialists"].is_array())
        throw RegistryError({}, {}, {"config lacks a 'specialists' array"});

    bool allow_partial = doc.value("allow_partial", false);
    std::vector<SpecialistSpec> specs;
    std::vector<TaskKind> duplicates;
    std::vector<std::string> bad;
    std::unordered_set<int> seen;

    for (const json& entry : doc["specialists"]) {
        std::string token_name = entry.value("token_name", "");
        auto task = task_from_token_name(token_name);
        if (!task) {
            bad.push_back("unknown token_name '" + token_name + "'");
            continue;
        }
        if (!seen.insert(task->index()).second) {
            duplicates.push_back(*task);
            continue;
        }
        std::string backend_kind = entry.value("backend", "");
        BackendKind backend;
        if (backend_kind == "stub") {
            backend = StubBackend{entry.value("latency_ms", 0),
                                  entry.value("seed", uint64_t{0})};
        } else if (backend_kind == "command") {
            CommandBackend cmd;
            cmd.timeout_ms = entry.value("timeout_ms", 30000);
            if (!entry.contains("argv") || !entry["argv"].is_array() ||
                entry["argv"].empty()) {
                bad.push_back(token_name + ": command backend needs a non-empty argv");
                continue;
            }
            bool argv_ok = true;
            for (const json& part : entry["argv"]) {
                if (!part.is_string()) {
                    bad.push_back(token_name + ": argv entries must be strings");
                    argv_ok = false;
                    break;
                }
                // Only {prompt} and {inputN} may appear as placeholders.
                std::string s = part.get<std::string>();
                for (size_t open = s.find('{'); open != std::string::npos;
                     open = s.find('{', open + 1)) {
                    size_t close = s.find('}', open);
                    if (close == std::string::npos) break;
                    std::string placeholder = s.substr(open + 1, close - open - 1);
                    if (placeholder != "prompt" &&
                        !(placeholder.rfind("input", 0) == 0 &&
                          placeholder.size() > 5 &&
                          placeholder.find_first_not_of("0123456789", 5) ==
                              std::string::npos)) {
                        bad.push_back(token_name + ": unsupported placeholder {" +
                                      placeholder + "}");
                        argv_ok = false;
                    }
                }
                if (argv_ok) cmd.argv.push_back(s);
            }
            if (!argv_ok) continue;
            backend = std::move(cmd);
        } else if (backend_kind == "http") {
            std::string endpoint = entry.value("endpoint", "");
            if (endpoint.empty()) {
                bad.push_back(token_name + ": http backend needs an endpoint");
                continue;
            }
            backend = HttpBackend{endpoint, entry.value("timeout_ms", 30000)};
        } else {
            bad.push_back(token_name + ": unknown backend kind '" + backend_kind + "'");
            continue;
        }
        specs.push_back(SpecialistSpec{*task, std::move(backend),
                                       entry.value("model_name", token_name)});
    }

    std::vector<TaskKind> missing;
    if (!allow_partial)
        for (const TaskKind& task : all_tasks())
            if (!seen.contains(task.index())) missing.push_back(task);

    if (!missing.empty() || !duplicates.empty() || !bad.empty())
        throw RegistryError(std::move(missing), std::move(duplicates), std::move(bad));
    return Registry(std::move(specs));
}

Registry Registry::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw RegistryError({}, {}, {"cannot open config file '" + path + "'"});
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load(buffer.str());
}

Registry Registry::default_stub_registry(uint64_t seed) {
    static const std::array<std::string_view, kRoutableTaskCount> kModelNames = {
        "Stable Diffusion XL", "CogVideoX",       "InstructPix2Pix", "Text2Video-Zero",
        "LGM",                 "Wonder3D",        "InstructIR",      "InstructIR",
        "InstructIR",          "Swin2SR",         "DWPose",          "Sapiens",
        "OpenCV Canny Operator", "Depth Anything V2", "Co-DETR",     "SegFormer",
        "GroundingDINO",       "GLEE",
        // Controllable image generation, six conditions
        "ControlNet", "ControlNet", "ControlNet", "ControlNet", "ControlNet", "ControlNet",
        // Controllable video generation, six conditions
        "Text2Video-Zero", "Text2Video-Zero", "Text2Video-Zero",
        "Text2Video-Zero", "Text2Video-Zero", "Text2Video-Zero"};
    std::vector<SpecialistSpec> specs;
    specs.reserve(kRoutableTaskCount);
    for (const TaskKind& task : all_tasks())
        specs.push_back(SpecialistSpec{task, StubBackend{0, seed},
                                       std::string(kModelNames[task.index()])});
    return Registry(std::move(specs));
}

const SpecialistSpec* Registry::find(const TaskKind& task) const {
    int pos = by_index_[static_cast<size_t>(task.index())];
    return pos < 0 ? nullptr : &specs_[static_cast<size_t>(pos)];
}

const SpecialistSpec& Registry::resolve(const TaskKind& task) const {
    const SpecialistSpec* spec = find(task);
    if (!spec) throw UnresolvedTaskError(task);
    return *spec;
}

std::vector<Artifact> invoke(const Registry& registry, const TaskKind& task,
                             const std::string& refined_prompt,
                             const std::vector<Artifact>& inputs) {
    const SpecialistSpec& spec = registry.resolve(task);
    const ModalitySignature& signature = modality_signature(task);
    for (Modality required : signature.inputs) {
        bool found = false;
        for (const Artifact& input : inputs)
            if (input.modality == required) {
                found = true;
                break;
            }
        if (!found) throw ModalityMismatchError(task, required);
    }

    const TokenSpec& token = token_for(task);
    std::vector<Artifact> outputs;
    if (const auto* stub = std::get_if<StubBackend>(&spec.backend))
        outputs = invoke_stub(token, *stub, refined_prompt, signature.output);
    else if (const auto* command = std::get_if<CommandBackend>(&spec.backend))
        outputs = invoke_command(token, *command, refined_prompt, inputs, signature.output);
    else
        outputs = invoke_http(token, std::get<HttpBackend>(spec.backend), refined_prompt,
                              inputs);

    if (outputs.empty())
        throw BackendFailure(token.name + ": backend produced no outputs");
    if (outputs.front().modality != signature.output)
        throw BackendFailure(token.name + ": backend produced " +
                             std::string(modality_name(outputs.front().modality)) +
                             ", expected " + std::string(modality_name(signature.output)));
    return outputs;
}

}  // namespace olympus
