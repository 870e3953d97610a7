#include "olympus/dataset.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "bank_detail.hpp"
#include "olympus/parser.hpp"
#include "olympus/tokens.hpp"

namespace olympus {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

uint64_t mix(uint64_t a, uint64_t b, uint64_t c) {
    return splitmix64(splitmix64(splitmix64(a) ^ b) ^ c);
}

std::string padded(size_t n, int width = 5) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%0*zu", width, n);
    return buf;
}

// Lowercase the first letter unless the clause starts with the pronoun I.
std::string decapitalize(std::string clause) {
    if (clause.empty()) return clause;
    if (clause[0] == 'I' && (clause.size() == 1 || clause[1] == ' ' || clause[1] == '\''))
        return clause;
    clause[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(clause[0])));
    return clause;
}

std::vector<TaskKind> derive_tasks(const std::string& gold_response) {
    return parse_response(gold_response).tasks();
}

RecordKind kind_for_task_count(size_t count) {
    if (count == 1) return RecordKind::SingleTask;
    if (count >= 2 && count <= 5) return RecordKind::ChainOfAction;
    throw std::invalid_argument("gold response routes " + std::to_string(count) +
                                " steps; expected 1 for single or 2..5 for chain");
}

}  // namespace

char complexity_code(Complexity complexity) {
    switch (complexity) {
        case Complexity::Short: return 'S';
        case Complexity::Moderate: return 'M';
        case Complexity::Extended: return 'E';
    }
    return '?';
}

std::optional<Complexity> complexity_from_code(std::string_view code) {
    if (code == "S") return Complexity::Short;
    if (code == "M") return Complexity::Moderate;
    if (code == "E") return Complexity::Extended;
    return std::nullopt;
}

std::string_view record_kind_name(RecordKind kind) {
    return kind == RecordKind::SingleTask ? "single" : "chain";
}

std::string_view record_source_name(RecordSource source) {
    return source == RecordSource::Synthetic ? "synthetic" : "external";
}

Complexity complexity_for_word_count(size_t words) {
    if (words <= 12) return Complexity::Short;
    if (words <= 30) return Complexity::Moderate;
    return Complexity::Extended;
}

InstructionRecord make_record(std::string id, std::string instruction,
                              std::string gold_response, Complexity complexity,
                              RecordSource source) {
    if (id.empty()) throw std::invalid_argument("record id is empty");
    if (normalize_instruction(instruction).empty())
        throw std::invalid_argument("record instruction is empty");
    InstructionRecord record;
    record.id = std::move(id);
    record.instruction = std::move(instruction);
    record.gold_response = std::move(gold_response);
    try {
        record.gold_tasks = derive_tasks(record.gold_response);
    } catch (const ParseError& e) {
        throw std::invalid_argument(std::string("gold response does not parse: ") +
                                    e.what());
    }
    record.kind = kind_for_task_count(record.gold_tasks.size());
    record.complexity = complexity;
    record.source = source;
    return record;
}

std::vector<InstructionRecord> synth_single(const TaskKind& task, size_t count,
                                            uint64_t seed, const TemplateBank& bank) {
    if (!bank.covers(task)) throw UnknownTaskError(task);
    const TokenSpec& token = token_for(task);

    std::vector<InstructionRecord> records;
    records.reserve(count);
    std::unordered_set<std::string> seen;
    for (size_t ordinal = 0; ordinal < count; ++ordinal) {
        bool made = false;
        for (uint64_t attempt = 0; attempt < 200 && !made; ++attempt) {
            std::mt19937_64 rng(
                mix(seed, static_cast<uint64_t>(task.index()) * 0x10001 + ordinal,
                    attempt));
            auto complexity = static_cast<Complexity>(
                std::uniform_int_distribution<int>(0, 2)(rng));
            TemplateBank::Rendered rendered = bank.render(task, complexity, rng);
            if (!seen.insert(normalize_instruction(rendered.instruction)).second)
                continue;
            records.push_back(make_record(
                token.name + "-" + padded(ordinal), rendered.instruction,
                token.open_tag + rendered.prompt + token.close_tag, complexity,
                RecordSource::Synthetic));
            made = true;
        }
        if (!made) throw ExhaustedGrammarError(task, count);
    }
    return records;
}

std::vector<InstructionRecord> synth_chain(size_t count, uint64_t seed,
                                           const TemplateBank& bank,
                                           std::pair<int, int> n_range,
                                           const std::vector<TaskKind>& task_pool) {
    for (const TaskKind& task : task_pool)
        if (!bank.covers(task)) throw UnknownTaskError(task);
    if (task_pool.size() < 2 && count > 0)
        throw std::invalid_argument("chain synthesis needs at least two tasks");

    std::vector<InstructionRecord> records;
    records.reserve(count);
    std::unordered_set<std::string> seen;
    for (size_t ordinal = 0; ordinal < count; ++ordinal) {
        bool made = false;
        for (uint64_t attempt = 0; attempt < 200 && !made; ++attempt) {
            std::mt19937_64 rng(mix(seed, 0xC4A1Full + ordinal, attempt));
            int n = std::uniform_int_distribution<int>(n_range.first, n_range.second)(rng);
            n = std::min<int>(n, static_cast<int>(task_pool.size()));

            // Partial Fisher-Yates draw of n distinct tasks.
            std::vector<TaskKind> pool = task_pool;
            std::vector<TaskKind> chosen;
            chosen.reserve(static_cast<size_t>(n));
            for (int k = 0; k < n; ++k) {
                std::uniform_int_distribution<size_t> dist(k, pool.size() - 1);
                std::swap(pool[static_cast<size_t>(k)], pool[dist(rng)]);
                chosen.push_back(pool[static_cast<size_t>(k)]);
            }

            std::string instruction;
            std::string gold;
            for (int k = 0; k < n; ++k) {
                auto complexity = static_cast<Complexity>(
                    std::uniform_int_distribution<int>(0, 2)(rng));
                TemplateBank::Rendered rendered =
                    bank.render(chosen[static_cast<size_t>(k)], complexity, rng);
                const TokenSpec& token = token_for(chosen[static_cast<size_t>(k)]);
                if (k == 0) {
                    instruction = rendered.instruction;
                } else {
                    const auto& joiners = bank_detail::chain_connectives();
                    std::uniform_int_distribution<size_t> dist(0, joiners.size() - 1);
                    instruction += " " + joiners[dist(rng)] + " " +
                                   decapitalize(rendered.instruction);
                }
                gold += token.open_tag + rendered.prompt + token.close_tag;
            }
            if (!seen.insert(normalize_instruction(instruction)).second) continue;
            records.push_back(make_record(
                "chain-" + padded(ordinal), instruction, gold,
                complexity_for_word_count(bank_detail::word_count(instruction)),
                RecordSource::Synthetic));
            made = true;
        }
        if (!made) throw ExhaustedGrammarError("chain", count);
    }
    return records;
}

const SampleDistribution& sample_distribution() {
    static const SampleDistribution kDistribution = [] {
        SampleDistribution d;
        auto set = [&d](const TaskKind& task, size_t train, size_t bench) {
            d.per_task[static_cast<size_t>(task.index())] = {train, bench};
        };
        using F = TaskFamily;
        set(TaskKind::of(F::ImageGen), 45000, 5000);
        set(TaskKind::of(F::VideoGen), 35786, 3976);
        set(TaskKind::of(F::ImageEdit), 34927, 3880);
        set(TaskKind::of(F::VideoEdit), 32227, 3580);
        set(TaskKind::of(F::Text3D), 29250, 3250);
        set(TaskKind::of(F::Image3D), 10800, 1200);
        set(TaskKind::of(F::ImageDeblur), 6300, 700);
        set(TaskKind::of(F::ImageDerain), 7650, 850);
        set(TaskKind::of(F::ImageDenoise), 7574, 841);
        set(TaskKind::of(F::ImageSR), 6300, 700);
        set(TaskKind::of(F::PoseEst), 6300, 700);
        set(TaskKind::of(F::NormalEst), 6300, 700);
        set(TaskKind::of(F::CannyEst), 6300, 700);
        set(TaskKind::of(F::DepthEst), 6300, 700);
        set(TaskKind::of(F::ObjectDetect), 7200, 800);
        set(TaskKind::of(F::ObjectSegment), 7200, 800);
        set(TaskKind::of(F::VisualGround), 23040, 2560);
        set(TaskKind::of(F::VideoRefSeg), 21600, 2400);
        auto cig = [](Condition c) {
            return TaskKind::controllable(F::ControllableImageGen, c);
        };
        set(cig(Condition::Pose), 5946, 658);
        set(cig(Condition::Canny), 5950, 658);
        set(cig(Condition::Normal), 5896, 658);
        set(cig(Condition::Scribble), 5949, 658);
        set(cig(Condition::Segmentation), 5926, 658);
        set(cig(Condition::Depth), 5923, 658);
        for (int c = 0; c < kConditionCount; ++c)
            set(TaskKind::controllable(F::ControllableVideoGen, static_cast<Condition>(c)),
                7650, 850);
        d.chain = {64800, 7200};
        return d;
    }();
    return kDistribution;
}

std::vector<InstructionRecord> synth_corpus(const CorpusConfig& config,
                                            const TemplateBank& bank) {
    const SampleDistribution& distribution = sample_distribution();
    std::vector<InstructionRecord> out;
    for (const TaskKind& task : config.tasks) {
        auto count = static_cast<size_t>(std::llround(
            static_cast<double>(distribution.task_count(task, config.split)) *
            config.scale));
        std::vector<InstructionRecord> batch =
            synth_single(task, count, config.seed, bank);
        out.insert(out.end(), std::make_move_iterator(batch.begin()),
                   std::make_move_iterator(batch.end()));
    }
    auto chains = static_cast<size_t>(std::llround(
        static_cast<double>(distribution.chain_count(config.split)) * config.scale));
    std::vector<InstructionRecord> batch =
        synth_chain(chains, config.seed, bank, {2, 5}, config.tasks);
    out.insert(out.end(), std::make_move_iterator(batch.begin()),
               std::make_move_iterator(batch.end()));
    return out;
}

std::string normalize_instruction(std::string_view instruction) {
    std::string out;
    out.reserve(instruction.size());
    bool pending_space = false;
    for (char c : instruction) {
        auto uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc)) {
            if (pending_space && !out.empty()) out += ' ';
            pending_space = false;
            out += static_cast<char>(std::tolower(uc));
        } else if (std::isspace(uc)) {
            pending_space = true;
        }
        // punctuation is dropped entirely
    }
    return out;
}

std::pair<std::vector<InstructionRecord>, CleanReport> clean(
    std::vector<InstructionRecord> records, const ExternalFilter& filter) {
    std::vector<InstructionRecord> kept;
    kept.reserve(records.size());
    CleanReport report;
    std::unordered_set<std::string> exact;
    std::unordered_set<std::string> normalized;
    for (InstructionRecord& record : records) {
        if (filter && !filter(record)) {
            ++report.filtered;
            report.removed_ids.push_back(record.id);
            continue;
        }
        if (!exact.insert(record.instruction).second) {
            ++report.exact_duplicates;
            report.removed_ids.push_back(record.id);
            continue;
        }
        if (!normalized.insert(normalize_instruction(record.instruction)).second) {
            ++report.near_duplicates;
            report.removed_ids.push_back(record.id);
            continue;
        }
        kept.push_back(std::move(record));
    }
    return {std::move(kept), std::move(report)};
}

DatasetStats stats(const std::vector<InstructionRecord>& records) {
    DatasetStats out;
    out.total = records.size();
    if (records.empty()) return out;

    size_t instruction_words_sum = 0;
    size_t response_words_sum = 0;
    for (const InstructionRecord& record : records) {
        size_t words = bank_detail::word_count(record.instruction);
        instruction_words_sum += words;
        out.max_instruction_words = std::max(out.max_instruction_words, words);
        response_words_sum += bank_detail::word_count(record.gold_response);
        if (record.kind == RecordKind::SingleTask) {
            if (!record.gold_tasks.empty())
                ++out.per_task[static_cast<size_t>(record.gold_tasks[0].index())];
        } else {
            ++out.chain_records;
            size_t len = record.gold_tasks.size();
            if (len >= 2 && len <= 5) ++out.chain_length_histogram[len - 2];
        }
    }
    out.mean_instruction_words =
        static_cast<double>(instruction_words_sum) / static_cast<double>(records.size());
    out.mean_response_words =
        static_cast<double>(response_words_sum) / static_cast<double>(records.size());
    return out;
}

std::string stats_to_text(const DatasetStats& stats) {
    std::ostringstream out;
    out << "records: " << stats.total << "  (chains: " << stats.chain_records << ")\n";
    out << "instruction words: max " << stats.max_instruction_words << ", mean ";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f", stats.mean_instruction_words);
    out << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.1f", stats.mean_response_words);
    out << "response words: mean " << buf << "\n";
    out << "per-task counts:\n";
    for (const TaskKind& task : all_tasks()) {
        size_t count = stats.per_task[static_cast<size_t>(task.index())];
        if (count == 0) continue;
        out << "  " << task.name() << ": " << count << "\n";
    }
    if (stats.chain_records > 0) {
        out << "chain lengths:";
        for (size_t len = 2; len <= 5; ++len)
            out << "  " << len << "->" << stats.chain_length_histogram[len - 2];
        out << "\n";
    }
    return out.str();
}

std::string stats_to_json(const DatasetStats& stats) {
    ordered_json out;
    out["total"] = stats.total;
    out["chain_records"] = stats.chain_records;
    out["max_instruction_words"] = stats.max_instruction_words;
    out["mean_instruction_words"] = stats.mean_instruction_words;
    out["mean_response_words"] = stats.mean_response_words;
    out["per_task"] = ordered_json::object();
    for (const TaskKind& task : all_tasks())
        out["per_task"][task.name()] = stats.per_task[static_cast<size_t>(task.index())];
    out["chain_length_histogram"] = stats.chain_length_histogram;
    return out.dump(2);
}

std::string build_llm_prompt(const TaskKind& task, const TemplateBank& bank,
                             const PromptOptions& options) {
    const TaskTemplates& templates = bank.templates(task);
    const TokenSpec& token = token_for(task);
    std::string display(family_name(task.family()));
    if (task.condition()) display += " (" + std::string(condition_name(*task.condition())) + ")";

    std::ostringstream out;
    out << "You are collecting user instruction-response pairs for the task '"
        << display << "'.\n";
    out << "Each response must wrap the refined prompt in " << token.open_tag << "..."
        << token.close_tag << ".\n";
    out << "Generate natural, varied user instructions; keep responses practical and "
           "direct.\n";
    if (options.include_prefixes && !templates.prefixes.empty()) {
        out << "\nRotate through these opening prefixes:\n";
        for (size_t i = 0; i < templates.prefixes.size(); ++i)
            out << "  " << (i + 1) << ". " << templates.prefixes[i] << "\n";
    }
    if (options.include_phrases && !templates.phrases.empty()) {
        out << "\nRotate through these phrasing patterns:\n";
        for (size_t i = 0; i < templates.phrases.size(); ++i)
            out << "  " << (i + 1) << ". " << templates.phrases[i] << "\n";
    }
    if (options.include_complexities) {
        out << "\nComplexity levels (keep the three equally represented):\n";
        out << "  - short: at most 12 words.\n";
        out << "  - moderate: 13 to 30 words.\n";
        out << "  - extended: more than 30 words.\n";
    }
    if (options.include_examples && !templates.example_pairs.empty()) {
        out << "\nExample pairs:\n";
        for (const ExamplePair& pair : templates.example_pairs) {
            const char* level = pair.complexity == Complexity::Short ? "short"
                                : pair.complexity == Complexity::Moderate ? "moderate"
                                                                          : "extended";
            out << "  [" << level << "] instruction: " << pair.instruction << "\n";
            out << "             response: " << pair.response << "\n";
        }
    }
    return out.str();
}

SchemaError::SchemaError(std::vector<SchemaViolation> violations)
    : std::runtime_error([&] {
          std::string what = "dataset schema violations:";
          for (const SchemaViolation& v : violations)
              what += "\n  line " + std::to_string(v.line) + " [" + v.field + "]: " +
                      v.detail;
          return what;
      }()),
      violations_(std::move(violations)) {}

std::vector<InstructionRecord> parse_jsonl(std::string_view text) {
    std::vector<InstructionRecord> records;
    std::vector<SchemaViolation> violations;

    size_t line_no = 0;
    size_t start = 0;
    while (start <= text.size()) {
        if (start == text.size()) break;
        size_t end = text.find('\n', start);
        std::string_view line = text.substr(
            start, end == std::string_view::npos ? std::string_view::npos : end - start);
        start = end == std::string_view::npos ? text.size() : end + 1;
        ++line_no;

        if (line.empty()) {
            // A single trailing newline is fine; blank lines elsewhere are not.
            if (start < text.size())
                violations.push_back({line_no, "line", "blank line"});
            continue;
        }
        json doc = json::parse(line, nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) {
            violations.push_back({line_no, "line", "not a JSON object"});
            continue;
        }

        auto require_string = [&](const char* field) -> std::optional<std::string> {
            if (!doc.contains(field) || !doc[field].is_string()) {
                violations.push_back({line_no, field, "missing or not a string"});
                return std::nullopt;
            }
            return doc[field].get<std::string>();
        };

        auto id = require_string("id");
        auto instruction = require_string("instruction");
        auto gold_response = require_string("gold_response");
        auto complexity_str = require_string("complexity");
        auto kind_str = require_string("kind");
        auto source_str = require_string("source");
        if (!id || !instruction || !gold_response || !complexity_str || !kind_str ||
            !source_str)
            continue;

        bool ok = true;
        if (id->empty()) {
            violations.push_back({line_no, "id", "empty"});
            ok = false;
        }
        if (normalize_instruction(*instruction).empty()) {
            violations.push_back({line_no, "instruction", "empty"});
            ok = false;
        }
        auto complexity = complexity_from_code(*complexity_str);
        if (!complexity) {
            violations.push_back({line_no, "complexity", "expected S, M or E"});
            ok = false;
        }
        std::optional<RecordKind> kind;
        if (*kind_str == "single")
            kind = RecordKind::SingleTask;
        else if (*kind_str == "chain")
            kind = RecordKind::ChainOfAction;
        else {
            violations.push_back({line_no, "kind", "expected 'single' or 'chain'"});
            ok = false;
        }
        std::optional<RecordSource> source;
        if (*source_str == "synthetic")
            source = RecordSource::Synthetic;
        else if (*source_str == "external")
            source = RecordSource::External;
        else {
            violations.push_back({line_no, "source", "expected 'synthetic' or 'external'"});
            ok = false;
        }

        std::vector<TaskKind> tasks;
        if (ok) {
            try {
                tasks = derive_tasks(*gold_response);
            } catch (const ParseError& e) {
                violations.push_back({line_no, "gold_response", e.what()});
                ok = false;
            }
        }
        if (ok) {
            size_t n = tasks.size();
            if (n == 0 || n > 5) {
                violations.push_back({line_no, "gold_response",
                                      "routes " + std::to_string(n) +
                                          " steps; expected 1..5"});
                ok = false;
            } else if ((n == 1) != (*kind == RecordKind::SingleTask)) {
                violations.push_back(
                    {line_no, "kind",
                     "declared '" + *kind_str + "' but gold response routes " +
                         std::to_string(n) + " step(s)"});
                ok = false;
            }
        }
        if (!ok) continue;

        InstructionRecord record;
        record.id = std::move(*id);
        record.instruction = std::move(*instruction);
        record.gold_response = std::move(*gold_response);
        record.gold_tasks = std::move(tasks);
        record.complexity = *complexity;
        record.kind = *kind;
        record.source = *source;
        records.push_back(std::move(record));
    }

    if (!violations.empty()) throw SchemaError(std::move(violations));
    return records;
}

std::string write_jsonl(const std::vector<InstructionRecord>& records) {
    std::string out;
    for (const InstructionRecord& record : records) {
        ordered_json line{{"id", record.id},
                          {"instruction", record.instruction},
                          {"gold_response", record.gold_response},
                          {"complexity", std::string(1, complexity_code(record.complexity))},
                          {"kind", record_kind_name(record.kind)},
                          {"source", record_source_name(record.source)}};
        out += line.dump();
        out += '\n';
    }
    return out;
}

std::vector<InstructionRecord> load_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_jsonl(buffer.str());
}

void save_jsonl(const std::vector<InstructionRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << write_jsonl(records);
    if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace olympus
