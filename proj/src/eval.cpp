#include "olympus/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace olympus {

namespace {

using nlohmann::ordered_json;

std::optional<TaskKind> predicted_label(const Prediction& prediction) {
    if (!prediction) return std::nullopt;
    std::vector<TaskKind> tasks = prediction->tasks();
    if (tasks.empty()) return std::nullopt;
    return tasks.front();
}

std::vector<TaskKind> predicted_sequence(const Prediction& prediction) {
    return prediction ? prediction->tasks() : std::vector<TaskKind>{};
}

std::string percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
    return buf;
}

std::string fixed(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", value);
    return buf;
}

}  // namespace

LengthMismatchError::LengthMismatchError(size_t predictions, size_t golds)
    : std::runtime_error("got " + std::to_string(predictions) + " predictions for " +
                         std::to_string(golds) + " gold records") {}

void ConfusionMatrix::add(const TaskKind& gold, const std::optional<TaskKind>& predicted) {
    int column = predicted ? predicted->index() : kRejectColumn;
    ++cells_[static_cast<size_t>(gold.index())][static_cast<size_t>(column)];
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
    for (size_t g = 0; g < cells_.size(); ++g)
        for (size_t p = 0; p < cells_[g].size(); ++p) cells_[g][p] += other.cells_[g][p];
}

size_t ConfusionMatrix::total() const {
    size_t sum = 0;
    for (const auto& row : cells_)
        for (size_t cell : row) sum += cell;
    return sum;
}

EvalReport eval_single(const std::vector<Prediction>& predictions,
                       const std::vector<InstructionRecord>& golds,
                       const MetricsPolicy& policy) {
    if (predictions.size() != golds.size())
        throw LengthMismatchError(predictions.size(), golds.size());
    for (const InstructionRecord& gold : golds)
        if (gold.kind != RecordKind::SingleTask)
            throw std::invalid_argument("record '" + gold.id +
                                        "' is not a single-task record");
    (void)policy;  // one averaging mode today

    EvalReport report;
    report.n_records = golds.size();
    if (golds.empty()) return report;

    for (size_t i = 0; i < golds.size(); ++i) {
        std::optional<TaskKind> label = predicted_label(predictions[i]);
        if (!label) ++report.n_malformed;
        report.confusion.add(golds[i].gold_tasks.front(), label);
    }

    // Weighted sums are accumulated as support * metric and divided by n
    // once, so perfect runs come out exactly 1.0 and weighted recall is
    // computed from the same integer numerator as accuracy.
    const double n = static_cast<double>(golds.size());
    size_t correct = 0;
    double precision_sum = 0.0;
    double f1_sum = 0.0;
    for (const TaskKind& task : all_tasks()) {
        int c = task.index();
        size_t tp = report.confusion.at(c, c);
        size_t fp = 0;
        for (const TaskKind& gold_task : all_tasks())
            if (gold_task.index() != c) fp += report.confusion.at(gold_task.index(), c);
        size_t support = 0;
        for (int p = 0; p <= ConfusionMatrix::kRejectColumn; ++p)
            support += report.confusion.at(c, p);
        correct += tp;
        if (support == 0) continue;

        ClassScores scores;
        scores.task = task;
        scores.support = support;
        scores.true_positives = tp;
        scores.false_positives = fp;
        scores.false_negatives = support - tp;
        scores.precision =
            (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        scores.recall = static_cast<double>(tp) / static_cast<double>(support);
        scores.f1 = (scores.precision + scores.recall) > 0
                        ? 2.0 * scores.precision * scores.recall /
                              (scores.precision + scores.recall)
                        : 0.0;

        precision_sum += static_cast<double>(support) * scores.precision;
        f1_sum += static_cast<double>(support) * scores.f1;
        report.per_class.push_back(scores);
    }
    report.accuracy = static_cast<double>(correct) / n;
    // Weighted recall: sum_c support_c * (tp_c / support_c) = sum_c tp_c.
    report.recall = static_cast<double>(correct) / n;
    report.precision = precision_sum / n;
    report.f1 = f1_sum / n;
    return report;
}

ChainEvalReport eval_chain(const std::vector<Prediction>& predictions,
                           const std::vector<InstructionRecord>& golds,
                           const MetricsPolicy& policy) {
    if (predictions.size() != golds.size())
        throw LengthMismatchError(predictions.size(), golds.size());
    for (const InstructionRecord& gold : golds)
        if (gold.kind != RecordKind::ChainOfAction)
            throw std::invalid_argument("record '" + gold.id +
                                        "' is not a chain-of-action record");
    (void)policy;  // one normalization mode today

    ChainEvalReport report;
    report.n_records = golds.size();
    if (golds.empty()) return report;

    double ed_sum = 0.0;
    double precision_sum = 0.0;
    double recall_sum = 0.0;
    double f1_sum = 0.0;
    for (size_t i = 0; i < golds.size(); ++i) {
        const std::vector<TaskKind>& gold_sequence = golds[i].gold_tasks;
        std::vector<TaskKind> pred_sequence = predicted_sequence(predictions[i]);
        if (!predictions[i]) ++report.n_malformed;

        size_t len = gold_sequence.size();
        if (len >= 2 && len <= 5) ++report.gold_length_histogram[len - 2];

        size_t longest = std::max(pred_sequence.size(), gold_sequence.size());
        ed_sum += longest == 0 ? 0.0
                               : static_cast<double>(levenshtein(pred_sequence,
                                                                 gold_sequence)) /
                                     static_cast<double>(longest);

        // Multiset overlap; order sensitivity lives in the edit distance.
        std::array<size_t, kRoutableTaskCount> pred_counts{};
        std::array<size_t, kRoutableTaskCount> gold_counts{};
        for (const TaskKind& task : pred_sequence)
            ++pred_counts[static_cast<size_t>(task.index())];
        for (const TaskKind& task : gold_sequence)
            ++gold_counts[static_cast<size_t>(task.index())];
        size_t overlap = 0;
        for (size_t c = 0; c < pred_counts.size(); ++c)
            overlap += std::min(pred_counts[c], gold_counts[c]);

        double precision = pred_sequence.empty()
                               ? 0.0
                               : static_cast<double>(overlap) /
                                     static_cast<double>(pred_sequence.size());
        double recall = gold_sequence.empty()
                            ? 0.0
                            : static_cast<double>(overlap) /
                                  static_cast<double>(gold_sequence.size());
        double f1 = (precision + recall) > 0
                        ? 2.0 * precision * recall / (precision + recall)
                        : 0.0;
        precision_sum += precision;
        recall_sum += recall;
        f1_sum += f1;
    }

    const double n = static_cast<double>(golds.size());
    report.edit_distance = ed_sum / n;
    report.precision = precision_sum / n;
    report.recall = recall_sum / n;
    report.f1 = f1_sum / n;
    return report;
}

std::vector<Prediction> route_records(const Controller& controller,
                                      const std::vector<InstructionRecord>& records,
                                      size_t workers) {
    std::vector<Prediction> predictions(records.size());
    auto work = [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            ControllerRequest request;
            request.instruction = records[i].instruction;
            request.record_id = records[i].id;
            try {
                predictions[i] = controller.route(request);
            } catch (const std::exception&) {
                predictions[i] = std::nullopt;
            }
        }
    };
    if (workers <= 1 || records.size() < 2 * workers) {
        work(0, records.size());
        return predictions;
    }
    std::vector<std::thread> threads;
    size_t chunk = (records.size() + workers - 1) / workers;
    for (size_t w = 0; w < workers; ++w) {
        size_t begin = w * chunk;
        size_t end = std::min(records.size(), begin + chunk);
        if (begin >= end) break;
        threads.emplace_back(work, begin, end);
    }
    for (std::thread& thread : threads) thread.join();
    return predictions;
}

std::vector<SweepRow> sweep(const std::vector<std::vector<TaskKind>>& task_subsets,
                            const RouterFactory& factory, const SweepCorpusConfig& config,
                            const TemplateBank& bank, const MetricsPolicy& policy) {
    std::vector<SweepRow> rows;
    rows.reserve(task_subsets.size());
    for (const std::vector<TaskKind>& subset : task_subsets) {
        SweepRow row;
        row.subset_size = subset.size();
        try {
            std::vector<InstructionRecord> singles;
            for (const TaskKind& task : subset) {
                std::vector<InstructionRecord> batch =
                    synth_single(task, config.singles_per_task, config.seed, bank);
                singles.insert(singles.end(), std::make_move_iterator(batch.begin()),
                               std::make_move_iterator(batch.end()));
            }
            std::vector<InstructionRecord> chains =
                synth_chain(config.chains, config.seed, bank, {2, 5}, subset);

            std::vector<InstructionRecord> corpus = singles;
            corpus.insert(corpus.end(), chains.begin(), chains.end());
            std::shared_ptr<const Controller> router = factory(corpus);

            row.single_report =
                eval_single(route_records(*router, singles), singles, policy);
            row.chain_report = eval_chain(route_records(*router, chains), chains, policy);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string report_to_table(const EvalReport& report) {
    std::ostringstream out;
    out << "  Acc  |  Pre  | Recall |  F1\n";
    out << percent(report.accuracy) << " | " << percent(report.precision) << " | "
        << percent(report.recall) << "  | " << percent(report.f1) << "\n";
    return out.str();
}

std::string report_to_table(const ChainEvalReport& report) {
    std::ostringstream out;
    out << "  ED  |  Pre  | Recall |  F1\n";
    out << fixed(report.edit_distance) << " | " << percent(report.precision) << " | "
        << percent(report.recall) << "  | " << percent(report.f1) << "\n";
    return out.str();
}

std::string report_to_json(const EvalReport& report) {
    ordered_json out{{"accuracy", report.accuracy},
                     {"precision", report.precision},
                     {"recall", report.recall},
                     {"f1", report.f1},
                     {"n_records", report.n_records},
                     {"n_malformed", report.n_malformed}};
    out["per_class"] = ordered_json::array();
    for (const ClassScores& scores : report.per_class)
        out["per_class"].push_back({{"task", scores.task.name()},
                                    {"support", scores.support},
                                    {"precision", scores.precision},
                                    {"recall", scores.recall},
                                    {"f1", scores.f1}});
    return out.dump(2);
}

std::string report_to_json(const ChainEvalReport& report) {
    ordered_json out{{"edit_distance", report.edit_distance},
                     {"precision", report.precision},
                     {"recall", report.recall},
                     {"f1", report.f1},
                     {"n_records", report.n_records},
                     {"n_malformed", report.n_malformed},
                     {"gold_length_histogram", report.gold_length_histogram}};
    return out.dump(2);
}

std::string sweep_to_table(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "# tasks |  Acc  |  Pre  | Recall |  F1   |  ED  |  Pre  | Recall |  F1\n";
    for (const SweepRow& row : rows) {
        if (!row.error.empty()) {
            out << row.subset_size << " | error: " << row.error << "\n";
            continue;
        }
        out << row.subset_size << " | " << percent(row.single_report.accuracy) << " | "
            << percent(row.single_report.precision) << " | "
            << percent(row.single_report.recall) << "  | "
            << percent(row.single_report.f1) << " | "
            << fixed(row.chain_report.edit_distance) << " | "
            << percent(row.chain_report.precision) << " | "
            << percent(row.chain_report.recall) << "  | "
            << percent(row.chain_report.f1) << "\n";
    }
    return out.str();
}

}  // namespace olympus
