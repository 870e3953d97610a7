#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "olympus/controller.hpp"
#include "olympus/dataset.hpp"
#include "olympus/response.hpp"

namespace olympus {

// Unit-cost insert/delete/substitute edit distance.
template <typename T>
size_t levenshtein(const std::vector<T>& a, const std::vector<T>& b) {
    if (a.empty()) return b.size();
    if (b.empty()) return a.size();
    std::vector<size_t> row(b.size() + 1);
    for (size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (size_t i = 0; i < a.size(); ++i) {
        size_t diagonal = row[0];
        row[0] = i + 1;
        for (size_t j = 0; j < b.size(); ++j) {
            size_t up = row[j + 1];
            size_t substitute = diagonal + (a[i] == b[j] ? 0 : 1);
            row[j + 1] = std::min({up + 1, row[j] + 1, substitute});
            diagonal = up;
        }
    }
    return row[b.size()];
}

// Every metric choice the tables depend on lives here, so alternate
// conventions can be added without touching callers.
struct MetricsPolicy {
    enum class Averaging { SupportWeighted };
    enum class EdNormalization { MaxLength };

    Averaging averaging = Averaging::SupportWeighted;
    EdNormalization ed_normalization = EdNormalization::MaxLength;
};

class LengthMismatchError : public std::runtime_error {
public:
    LengthMismatchError(size_t predictions, size_t golds);
};

// A routed prediction, or nothing when the controller failed or its
// output did not parse.
using Prediction = std::optional<RoutedResponse>;

// Gold-task by predicted-task counts, plus a reject column for
// predictions with no usable task label.
class ConfusionMatrix {
public:
    static constexpr int kRejectColumn = kRoutableTaskCount;

    void add(const TaskKind& gold, const std::optional<TaskKind>& predicted);
    void merge(const ConfusionMatrix& other);
    size_t at(int gold_index, int predicted_index) const {
        return cells_[static_cast<size_t>(gold_index)][static_cast<size_t>(predicted_index)];
    }
    size_t total() const;

private:
    std::array<std::array<size_t, kRoutableTaskCount + 1>, kRoutableTaskCount> cells_{};
};

struct ClassScores {
    TaskKind task = TaskKind::of(TaskFamily::ImageGen);
    size_t support = 0;
    size_t true_positives = 0;
    size_t false_positives = 0;
    size_t false_negatives = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct EvalReport {
    // Fractions in [0,1]; rendered as percentages.
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::vector<ClassScores> per_class;  // classes with gold support
    size_t n_records = 0;
    size_t n_malformed = 0;
    ConfusionMatrix confusion;
};

// Single-task scoring: the predicted label is the task of the first
// step; step-less or malformed predictions land in the reject column.
// Report-level metrics are support-weighted means over gold classes.
EvalReport eval_single(const std::vector<Prediction>& predictions,
                       const std::vector<InstructionRecord>& golds,
                       const MetricsPolicy& policy = {});

struct ChainEvalReport {
    double edit_distance = 0.0;  // mean normalized, in [0,1]
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    size_t n_records = 0;
    size_t n_malformed = 0;
    std::array<size_t, 4> gold_length_histogram{};  // gold chains of length 2..5
};

// Chain scoring: normalized Levenshtein over task sequences carries the
// order sensitivity; precision/recall/F1 compare task multisets.
ChainEvalReport eval_chain(const std::vector<Prediction>& predictions,
                           const std::vector<InstructionRecord>& golds,
                           const MetricsPolicy& policy = {});

// Routes every record through the controller; failures become empty
// predictions. workers > 1 shards the records across threads.
std::vector<Prediction> route_records(const Controller& controller,
                                      const std::vector<InstructionRecord>& records,
                                      size_t workers = 1);

struct SweepCorpusConfig {
    size_t singles_per_task = 100;
    size_t chains = 100;
    uint64_t seed = 7;
};

struct SweepRow {
    size_t subset_size = 0;
    EvalReport single_report;
    ChainEvalReport chain_report;
    std::string error;  // non-empty when this row failed
};

using RouterFactory = std::function<std::shared_ptr<const Controller>(
    const std::vector<InstructionRecord>& corpus)>;

// For each task subset: synthesize a restricted corpus, route it, and
// score both settings. Row failures are recorded without aborting the
// other rows.
std::vector<SweepRow> sweep(const std::vector<std::vector<TaskKind>>& task_subsets,
                            const RouterFactory& factory, const SweepCorpusConfig& config,
                            const TemplateBank& bank = TemplateBank::default_bank(),
                            const MetricsPolicy& policy = {});

// Fixed-width tables in the reporting column order:
// Acc | Pre | Recall | F1 for single-task, ED | Pre | Recall | F1 for chains.
std::string report_to_table(const EvalReport& report);
std::string report_to_table(const ChainEvalReport& report);
std::string report_to_json(const EvalReport& report);
std::string report_to_json(const ChainEvalReport& report);
std::string sweep_to_table(const std::vector<SweepRow>& rows);

}  // namespace olympus
