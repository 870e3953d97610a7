#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "olympus/response.hpp"
#include "olympus/task.hpp"

namespace olympus {

enum class Complexity : uint8_t { Short, Moderate, Extended };
enum class RecordKind : uint8_t { SingleTask, ChainOfAction };
enum class RecordSource : uint8_t { Synthetic, External };

char complexity_code(Complexity complexity);  // 'S' | 'M' | 'E'
std::optional<Complexity> complexity_from_code(std::string_view code);
std::string_view record_kind_name(RecordKind kind);      // "single" | "chain"
std::string_view record_source_name(RecordSource source);  // "synthetic" | "external"

// One instruction-response pair. gold_tasks is derived from
// gold_response at construction and kept in sync by make_record.
struct InstructionRecord {
    std::string id;
    std::string instruction;
    std::string gold_response;
    std::vector<TaskKind> gold_tasks;
    Complexity complexity = Complexity::Short;
    RecordKind kind = RecordKind::SingleTask;
    RecordSource source = RecordSource::Synthetic;
};

// Validates and derives: gold_response must parse, its step count must
// be 1 (single) or 2..5 (chain). Throws std::invalid_argument.
InstructionRecord make_record(std::string id, std::string instruction,
                              std::string gold_response, Complexity complexity,
                              RecordSource source);

class UnknownTaskError : public std::runtime_error {
public:
    explicit UnknownTaskError(const TaskKind& task);
    TaskKind task() const { return task_; }

private:
    TaskKind task_;
};

class ExhaustedGrammarError : public std::runtime_error {
public:
    ExhaustedGrammarError(const TaskKind& task, size_t requested);
    ExhaustedGrammarError(const std::string& label, size_t requested);
};

// Complexity band by whitespace word count: Short <= 12, Moderate
// 13..30, Extended above.
Complexity complexity_for_word_count(size_t words);

struct ExamplePair {
    Complexity complexity;
    std::string instruction;
    std::string response;
};

struct TaskTemplates {
    std::vector<std::string> prefixes;        // shipped default: 7
    std::vector<std::string> phrases;         // shipped default: 12, instruction heads
    std::vector<ExamplePair> example_pairs;   // shipped default: 9, 3 per complexity
};

// Per-task instruction templates plus seeded content grammars. The
// shipped defaults embed task-discriminative phrase heads; the rule
// router derives its keyword rules from the same data.
class TemplateBank {
public:
    static const TemplateBank& default_bank();
    static TemplateBank make_default();

    bool covers(const TaskKind& task) const;
    const TaskTemplates& templates(const TaskKind& task) const;  // throws UnknownTask
    void remove(const TaskKind& task);

    struct Rendered {
        std::string instruction;  // one full sentence, ends with '.'
        std::string prompt;       // the refined-prompt body between tokens
    };
    Rendered render(const TaskKind& task, Complexity complexity,
                    std::mt19937_64& rng) const;

private:
    TemplateBank() = default;
    std::array<std::optional<TaskTemplates>, kRoutableTaskCount> tasks_;
};

std::vector<InstructionRecord> synth_single(const TaskKind& task, size_t count,
                                            uint64_t seed, const TemplateBank& bank);

std::vector<InstructionRecord> synth_chain(size_t count, uint64_t seed,
                                           const TemplateBank& bank,
                                           std::pair<int, int> n_range = {2, 5},
                                           const std::vector<TaskKind>& task_pool =
                                               all_tasks());

enum class Split : uint8_t { Train, Bench };

// Shipped per-task sample distribution (train / bench column per task,
// plus the chain-of-action row).
struct SampleDistribution {
    std::array<std::pair<size_t, size_t>, kRoutableTaskCount> per_task;
    std::pair<size_t, size_t> chain;

    size_t task_count(const TaskKind& task, Split split) const {
        const auto& pair = per_task[static_cast<size_t>(task.index())];
        return split == Split::Train ? pair.first : pair.second;
    }
    size_t chain_count(Split split) const {
        return split == Split::Train ? chain.first : chain.second;
    }
};

const SampleDistribution& sample_distribution();

struct CorpusConfig {
    double scale = 0.01;
    uint64_t seed = 7;
    Split split = Split::Train;
    std::vector<TaskKind> tasks = all_tasks();  // restriction, e.g. for sweeps
};

// Count-driven synthesis: per-task counts are the shipped distribution
// scaled by `scale` and rounded; chains are drawn from the task pool.
std::vector<InstructionRecord> synth_corpus(const CorpusConfig& config,
                                            const TemplateBank& bank);

struct CleanReport {
    std::vector<std::string> removed_ids;
    size_t exact_duplicates = 0;
    size_t near_duplicates = 0;
    size_t filtered = 0;  // removed by the external filter hook
};

// Lowercases, collapses whitespace and strips punctuation; the
// near-duplicate key.
std::string normalize_instruction(std::string_view instruction);

// Returns false to drop a record; stands in for an external
// grammaticality filter.
using ExternalFilter = std::function<bool(const InstructionRecord&)>;

std::pair<std::vector<InstructionRecord>, CleanReport> clean(
    std::vector<InstructionRecord> records, const ExternalFilter& filter = {});

struct DatasetStats {
    std::array<size_t, kRoutableTaskCount> per_task{};  // single-task records
    size_t chain_records = 0;
    size_t total = 0;
    size_t max_instruction_words = 0;
    double mean_instruction_words = 0.0;
    double mean_response_words = 0.0;
    std::array<size_t, 4> chain_length_histogram{};  // chains of length 2..5
};

DatasetStats stats(const std::vector<InstructionRecord>& records);
std::string stats_to_text(const DatasetStats& stats);
std::string stats_to_json(const DatasetStats& stats);

struct PromptOptions {
    bool include_prefixes = true;
    bool include_phrases = true;
    bool include_complexities = true;
    bool include_examples = true;
};

// Renders the full generation prompt (directive, style prefixes and
// phrases, complexity definitions, example pairs) for handing to an
// external instruction generator.
std::string build_llm_prompt(const TaskKind& task, const TemplateBank& bank,
                             const PromptOptions& options = {});

struct SchemaViolation {
    size_t line;  // 1-based
    std::string field;
    std::string detail;
};

class SchemaError : public std::runtime_error {
public:
    explicit SchemaError(std::vector<SchemaViolation> violations);
    const std::vector<SchemaViolation>& violations() const { return violations_; }

private:
    std::vector<SchemaViolation> violations_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::vector<InstructionRecord> parse_jsonl(std::string_view text);
std::string write_jsonl(const std::vector<InstructionRecord>& records);
std::vector<InstructionRecord> load_jsonl(const std::string& path);
void save_jsonl(const std::vector<InstructionRecord>& records, const std::string& path);

}  // namespace olympus
