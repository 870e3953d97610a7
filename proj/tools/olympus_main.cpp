// olympus: route instructions, run chain-of-action pipelines over
// registered specialists, synthesize and profile instruction corpora,
// and evaluate routers.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "olympus/controller.hpp"
#include "olympus/dataset.hpp"
#include "olympus/eval.hpp"
#include "olympus/executor.hpp"
#include "olympus/parser.hpp"
#include "olympus/registry.hpp"
#include "olympus/remote.hpp"
#include "olympus/tokens.hpp"

using namespace olympus;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitController = 2;
constexpr int kExitPipeline = 3;
constexpr int kExitData = 4;

struct CliConfig {
    std::string registry_path;  // empty -> built-in stub registry
    std::string controller = "rule";
    std::string replay_dataset;
    RemoteEndpointConfig remote;
    int max_chain_length = kDefaultMaxChainLength;
    uint64_t seed = 0;
    bool json_output = false;
    bool strict_routing = false;  // disable the direct-answer fallback
    size_t workers = 1;
};

void apply_config_file(CliConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw IoError("config file '" + path + "' is not valid JSON");
    config.registry_path = doc.value("registry", config.registry_path);
    config.controller = doc.value("controller", config.controller);
    config.replay_dataset = doc.value("replay_dataset", config.replay_dataset);
    config.max_chain_length = doc.value("max_chain_length", config.max_chain_length);
    config.seed = doc.value("seed", config.seed);
    if (doc.value("format", "text") == "json") config.json_output = true;
    if (doc.contains("remote")) {
        const json& remote = doc["remote"];
        config.remote.endpoint = remote.value("endpoint", config.remote.endpoint);
        config.remote.timeout_ms = remote.value("timeout_ms", config.remote.timeout_ms);
        config.remote.max_retries = remote.value("max_retries", config.remote.max_retries);
        config.remote.backoff_base_ms =
            remote.value("backoff_base_ms", config.remote.backoff_base_ms);
    }
}

Registry open_registry(const CliConfig& config) {
    if (config.registry_path.empty())
        return Registry::default_stub_registry(config.seed);
    return Registry::load_file(config.registry_path);
}

std::shared_ptr<const Controller> open_controller(
    const CliConfig& config, const std::vector<InstructionRecord>* corpus = nullptr) {
    if (config.controller == "rule") {
        RuleRouterOptions options;
        options.direct_answer_fallback = !config.strict_routing;
        options.max_chain_length = config.max_chain_length;
        return std::make_shared<RuleRouter>(RuleRouter::default_rules(), options);
    }
    if (config.controller == "replay") {
        if (corpus) return std::make_shared<ReplayRouter>(*corpus);
        if (config.replay_dataset.empty())
            throw std::invalid_argument(
                "replay controller needs --replay-dataset (or an eval dataset)");
        return std::make_shared<ReplayRouter>(load_jsonl(config.replay_dataset));
    }
    if (config.controller == "remote") {
        if (config.remote.endpoint.empty())
            throw std::invalid_argument("remote controller needs --endpoint");
        // Credential comes from OLYMPUS_API_KEY only.
        return std::make_shared<LlmController>(make_http_transport(config.remote),
                                               config.remote);
    }
    throw std::invalid_argument("unknown controller '" + config.controller + "'");
}

std::vector<Artifact> parse_attachments(const std::vector<std::string>& specs) {
    std::vector<Artifact> attachments;
    for (const std::string& spec : specs) {
        size_t eq = spec.find('=');
        std::optional<Modality> modality;
        if (eq != std::string::npos) modality = modality_from_name(spec.substr(0, eq));
        if (!modality)
            throw CLI::ValidationError("--attach", "expected modality=locator, got '" +
                                                       spec + "'");
        attachments.push_back(Artifact{*modality, spec.substr(eq + 1), {}});
    }
    return attachments;
}

std::string explain_table(const RoutedResponse& response) {
    std::ostringstream out;
    out << "step | task            | refined prompt\n";
    size_t index = 0;
    for (const RoutingStep& step : response.steps()) {
        std::string name = step.task.name();
        name.resize(15, ' ');
        out << "   " << ++index << " | " << name << " | " << step.refined_prompt << "\n";
    }
    if (index == 0) out << "   - | (direct answer) | " << response.plain_text() << "\n";
    return out.str();
}

int classify_error(const std::exception& e) {
    if (dynamic_cast<const NoRouteError*>(&e) ||
        dynamic_cast<const ControllerUnavailableError*>(&e) ||
        dynamic_cast<const MalformedControllerOutputError*>(&e))
        return kExitController;
    if (dynamic_cast<const PlanError*>(&e) || dynamic_cast<const BackendFailure*>(&e) ||
        dynamic_cast<const UnresolvedTaskError*>(&e) ||
        dynamic_cast<const ModalityMismatchError*>(&e))
        return kExitPipeline;
    if (dynamic_cast<const SchemaError*>(&e) || dynamic_cast<const IoError*>(&e) ||
        dynamic_cast<const RegistryError*>(&e) ||
        dynamic_cast<const UnknownTaskError*>(&e) ||
        dynamic_cast<const ExhaustedGrammarError*>(&e) ||
        dynamic_cast<const ParseError*>(&e))
        return kExitData;
    if (dynamic_cast<const std::invalid_argument*>(&e)) return kExitController;
    return kExitData;
}

int cmd_tokens(const CliConfig& config) {
    if (config.json_output) {
        ordered_json out = ordered_json::array();
        for (const TokenSpec& spec : token_table()) {
            ordered_json row{{"family", family_name(spec.task.family())},
                             {"condition", nullptr},
                             {"open_tag", spec.open_tag},
                             {"close_tag", spec.close_tag}};
            if (spec.task.condition())
                row["condition"] = condition_name(*spec.task.condition());
            out.push_back(row);
        }
        std::cout << out.dump(2) << "\n";
        return kExitOk;
    }
    std::cout << "family                        | condition    | open tag           | "
                 "close tag\n";
    for (const TokenSpec& spec : token_table()) {
        std::string family(family_name(spec.task.family()));
        family.resize(29, ' ');
        std::string condition =
            spec.task.condition() ? std::string(condition_name(*spec.task.condition()))
                                  : "-";
        condition.resize(12, ' ');
        std::string open = spec.open_tag;
        open.resize(18, ' ');
        std::cout << family << " | " << condition << " | " << open << " | "
                  << spec.close_tag << "\n";
    }
    return kExitOk;
}

int cmd_route(const CliConfig& config, const std::string& instruction, bool explain) {
    std::shared_ptr<const Controller> controller = open_controller(config);
    ControllerRequest request;
    request.instruction = instruction;
    RoutedResponse response = controller->route(request);
    std::cout << render_response(response) << "\n";
    if (explain) std::cout << explain_table(response);
    return kExitOk;
}

int cmd_run(const CliConfig& config, const std::string& instruction,
            const std::vector<std::string>& attach_specs, bool continue_on_error,
            bool surface_all) {
    std::vector<Artifact> attachments = parse_attachments(attach_specs);
    std::shared_ptr<const Controller> controller = open_controller(config);

    ControllerRequest request;
    request.instruction = instruction;
    request.attachments = attachments;
    RoutedResponse response;
    try {
        response = controller->route(request);
    } catch (const std::exception& e) {
        std::cerr << "controller error: " << e.what() << "\n";
        return kExitController;
    }

    if (response.step_count() == 0) {
        // Solvable directly; nothing to schedule.
        std::cout << response.plain_text() << "\n";
        return kExitOk;
    }

    Registry registry = open_registry(config);
    ExecuteOptions options;
    options.continue_on_error = continue_on_error;
    options.surface_all_outputs = surface_all;
    RunReport report = run_response(response, attachments, registry, options,
                                    config.max_chain_length);
    std::cout << (config.json_output ? report_to_json_lines(report)
                                     : report_to_text(report));
    if (!report.all_ok() && !continue_on_error) return kExitPipeline;
    return kExitOk;
}

int cmd_eval(const CliConfig& config, const std::string& dataset_path) {
    std::vector<InstructionRecord> records = load_jsonl(dataset_path);
    std::shared_ptr<const Controller> controller = open_controller(config, &records);

    std::vector<InstructionRecord> singles;
    std::vector<InstructionRecord> chains;
    for (InstructionRecord& record : records) {
        if (record.kind == RecordKind::SingleTask)
            singles.push_back(std::move(record));
        else
            chains.push_back(std::move(record));
    }

    EvalReport single_report =
        eval_single(route_records(*controller, singles, config.workers), singles);
    ChainEvalReport chain_report =
        eval_chain(route_records(*controller, chains, config.workers), chains);

    if (config.json_output) {
        ordered_json out;
        out["single_task"] = json::parse(report_to_json(single_report));
        out["chain_of_action"] = json::parse(report_to_json(chain_report));
        std::cout << out.dump(2) << "\n";
        return kExitOk;
    }
    std::cout << "single-task (" << single_report.n_records << " records, "
              << single_report.n_malformed << " malformed)\n"
              << report_to_table(single_report);
    std::cout << "chain-of-action (" << chain_report.n_records << " records, "
              << chain_report.n_malformed << " malformed)\n"
              << report_to_table(chain_report);
    return kExitOk;
}

int cmd_synth(const CliConfig& config, const std::string& tasks_spec, double scale,
              const std::string& split_name, const std::string& out_path) {
    CorpusConfig corpus;
    corpus.scale = scale;
    corpus.seed = config.seed;
    corpus.split = split_name == "bench" ? Split::Bench : Split::Train;
    if (tasks_spec != "all") {
        corpus.tasks.clear();
        std::istringstream list(tasks_spec);
        for (std::string name; std::getline(list, name, ',');) {
            auto task = task_from_token_name(name);
            if (!task)
                throw CLI::ValidationError("--tasks", "unknown task '" + name + "'");
            corpus.tasks.push_back(*task);
        }
    }
    std::vector<InstructionRecord> records =
        synth_corpus(corpus, TemplateBank::default_bank());
    if (out_path.empty()) {
        std::cout << write_jsonl(records);
    } else {
        save_jsonl(records, out_path);
        std::cerr << "wrote " << records.size() << " records to " << out_path << "\n";
    }
    return kExitOk;
}

int cmd_stats(const CliConfig& config, const std::string& dataset_path) {
    DatasetStats s = stats(load_jsonl(dataset_path));
    std::cout << (config.json_output ? stats_to_json(s) + "\n" : stats_to_text(s));
    return kExitOk;
}

int cmd_sweep(const CliConfig& config, const std::vector<size_t>& sizes,
              size_t singles_per_task, size_t chains) {
    std::vector<std::vector<TaskKind>> subsets;
    for (size_t size : sizes) {
        std::vector<TaskKind> subset;
        for (size_t i = 0; i < size && i < all_tasks().size(); ++i)
            subset.push_back(all_tasks()[i]);
        subsets.push_back(std::move(subset));
    }
    SweepCorpusConfig sweep_config;
    sweep_config.singles_per_task = singles_per_task;
    sweep_config.chains = chains;
    sweep_config.seed = config.seed;

    RouterFactory factory;
    if (config.controller == "replay") {
        factory = [](const std::vector<InstructionRecord>& corpus) {
            return std::make_shared<ReplayRouter>(corpus);
        };
    } else {
        CliConfig rule_config = config;
        rule_config.controller = "rule";
        auto controller = open_controller(rule_config);
        factory = [controller](const std::vector<InstructionRecord>&) {
            return controller;
        };
    }
    std::vector<SweepRow> rows = sweep(subsets, factory, sweep_config);
    std::cout << sweep_to_table(rows);
    return kExitOk;
}

int cmd_repl(const CliConfig& config) {
    std::shared_ptr<const Controller> controller = open_controller(config);
    Registry registry = open_registry(config);
    std::cout << "interactive routing over " << (config.registry_path.empty()
                                                     ? "stub backends"
                                                     : config.registry_path)
              << "; :quit to exit\n";
    std::string line;
    while (true) {
        std::cout << "olympus> " << std::flush;
        if (!std::getline(std::cin, line)) break;
        if (line == ":quit" || line == ":q") break;
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        try {
            ControllerRequest request;
            request.instruction = line;
            RoutedResponse response = controller->route(request);
            std::cout << render_response(response) << "\n";
            if (response.step_count() == 0) continue;
            RunReport report = run_response(response, {}, registry, {},
                                            config.max_chain_length);
            std::cout << report_to_text(report);
        } catch (const std::exception& e) {
            std::cout << "error: " << e.what() << "\n";
        }
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"task-routing controller toolkit"};
    app.require_subcommand(1);

    CliConfig config;
    std::string config_path;
    if (const char* env = std::getenv("OLYMPUS_CONFIG")) config_path = env;

    app.add_option("--config", config_path, "JSON config file (env OLYMPUS_CONFIG)");
    app.add_option("--registry", config.registry_path,
                   "registry config path (default: built-in stubs)");
    app.add_option("--controller", config.controller, "rule | replay | remote");
    app.add_option("--replay-dataset", config.replay_dataset,
                   "JSONL corpus backing the replay controller");
    app.add_option("--endpoint", config.remote.endpoint, "remote controller URL");
    app.add_option("--seed", config.seed, "seed for stubs and synthesis");
    app.add_option("--max-chain-length", config.max_chain_length,
                   "maximum steps per pipeline");
    app.add_flag("--json", config.json_output, "machine-readable output");
    app.add_flag("--strict-routing", config.strict_routing,
                 "error instead of answering unroutable instructions directly");

    auto* tokens_cmd = app.add_subcommand("tokens", "dump the routing-token table");

    std::string instruction;
    bool explain = false;
    auto* route_cmd = app.add_subcommand("route", "route one instruction");
    route_cmd->add_option("instruction", instruction, "user instruction")->required();
    route_cmd->add_flag("--explain", explain, "also print the parsed step table");

    std::vector<std::string> attach_specs;
    bool continue_on_error = false;
    bool surface_all = false;
    auto* run_cmd = app.add_subcommand("run", "route, plan and execute one instruction");
    run_cmd->add_option("instruction", instruction, "user instruction")->required();
    run_cmd->add_option("--attach", attach_specs, "user artifact as modality=locator");
    run_cmd->add_flag("--continue-on-error", continue_on_error,
                      "keep running steps whose inputs survive a failure");
    run_cmd->add_flag("--surface-all", surface_all,
                      "surface every step's outputs, not just the last");

    std::string dataset_path;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate the controller on a corpus");
    eval_cmd->add_option("dataset", dataset_path, "JSONL corpus")->required();
    eval_cmd->add_option("--workers", config.workers, "routing worker threads");

    std::string tasks_spec = "all";
    double scale = 0.01;
    std::string split_name = "train";
    std::string out_path;
    auto* synth_cmd = app.add_subcommand("synth", "synthesize an instruction corpus");
    synth_cmd->add_option("--tasks", tasks_spec, "'all' or comma-separated token names");
    synth_cmd->add_option("--scale", scale, "fraction of the reference distribution");
    synth_cmd->add_option("--split", split_name, "train | bench")
        ->check(CLI::IsMember({"train", "bench"}));
    synth_cmd->add_option("--out", out_path, "output JSONL path (default: stdout)");

    auto* stats_cmd = app.add_subcommand("stats", "profile a JSONL corpus");
    stats_cmd->add_option("dataset", dataset_path, "JSONL corpus")->required();

    std::vector<size_t> sweep_sizes = {5, 10, 15, 20};
    size_t singles_per_task = 50;
    size_t sweep_chains = 100;
    auto* sweep_cmd =
        app.add_subcommand("sweep", "task-count sweep over synthesized corpora");
    sweep_cmd->add_option("--sizes", sweep_sizes, "subset sizes");
    sweep_cmd->add_option("--singles-per-task", singles_per_task,
                          "single-task records per task");
    sweep_cmd->add_option("--chains", sweep_chains, "chain records per subset");

    auto* repl_cmd = app.add_subcommand("repl", "interactive routing loop");

    // Global flags may follow the subcommand.
    for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (!config_path.empty()) apply_config_file(config, config_path);
        if (tokens_cmd->parsed()) return cmd_tokens(config);
        if (route_cmd->parsed()) return cmd_route(config, instruction, explain);
        if (run_cmd->parsed())
            return cmd_run(config, instruction, attach_specs, continue_on_error,
                           surface_all);
        if (eval_cmd->parsed()) return cmd_eval(config, dataset_path);
        if (synth_cmd->parsed())
            return cmd_synth(config, tasks_spec, scale, split_name, out_path);
        if (stats_cmd->parsed()) return cmd_stats(config, dataset_path);
        if (sweep_cmd->parsed())
            return cmd_sweep(config, sweep_sizes, singles_per_task, sweep_chains);
        if (repl_cmd->parsed()) return cmd_repl(config);
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return classify_error(e);
    }
    return kExitUsage;
}
