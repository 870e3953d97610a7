#include <doctest.h>

#include <algorithm>
#include <random>

#include "olympus/eval.hpp"
#include "olympus/parser.hpp"
#include "olympus/tokens.hpp"
#include "oracles.hpp"

using namespace olympus;

namespace {

TaskKind task_at(int index) { return TaskKind::from_index(index); }

// Single-task gold record for a task.
InstructionRecord gold_single(int task_index, int ordinal) {
    const TokenSpec& token = token_for(task_at(task_index));
    return make_record("g-" + std::to_string(ordinal),
                       "instruction " + std::to_string(ordinal),
                       token.open_tag + "p" + std::to_string(ordinal) + token.close_tag,
                       Complexity::Short, RecordSource::Synthetic);
}

// Chain gold record over the given task indices.
InstructionRecord gold_chain(const std::vector<int>& task_indices, int ordinal) {
    std::string gold;
    for (int index : task_indices) {
        const TokenSpec& token = token_for(task_at(index));
        gold += token.open_tag + "p" + token.close_tag;
    }
    return make_record("c-" + std::to_string(ordinal),
                       "chain instruction " + std::to_string(ordinal), gold,
                       Complexity::Moderate, RecordSource::Synthetic);
}

// A prediction carrying the given task sequence.
Prediction predict(const std::vector<int>& task_indices) {
    RoutedResponse response;
    for (int index : task_indices)
        response.segments.emplace_back(RoutingStep{task_at(index), "p"});
    return response;
}

}  // namespace

TEST_CASE("levenshtein base cases") {
    std::vector<int> empty;
    CHECK(levenshtein(empty, empty) == 0);
    CHECK(levenshtein<int>({1}, {1, 2}) == 1);
    CHECK(levenshtein<int>({1, 2}, {1}) == 1);
    CHECK(levenshtein<int>({1, 2, 3}, {1, 2, 3}) == 0);
    CHECK(levenshtein<int>({1, 2, 3}, {2, 1, 3}) == 2);
    CHECK(levenshtein<int>({1, 2, 3}, {4, 5, 6}) == 3);
    CHECK(levenshtein<int>({}, {7, 8, 9}) == 3);
}

TEST_CASE("levenshtein matches the exhaustive recursive oracle") {
    std::mt19937_64 rng(4242);
    std::uniform_int_distribution<size_t> len(0, 8);
    std::uniform_int_distribution<int> symbol(0, 5);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<int> a(len(rng));
        std::vector<int> b(len(rng));
        for (int& x : a) x = symbol(rng);
        for (int& x : b) x = symbol(rng);
        size_t fast = levenshtein(a, b);
        size_t slow = oracles::levenshtein_recursive(a, b);
        REQUIRE(fast == slow);
        // Metric axioms on the same draws.
        CHECK(levenshtein(b, a) == fast);
        CHECK((fast == 0) == (a == b));
    }
}

TEST_CASE("single-task metrics on the worked three-record fixture") {
    // golds [A,A,B], preds [A,B,B]: accuracy 2/3, weighted precision
    // (2/3)*1 + (1/3)*(1/2) = 5/6, weighted recall = accuracy.
    std::vector<InstructionRecord> golds = {gold_single(0, 0), gold_single(0, 1),
                                            gold_single(1, 2)};
    std::vector<Prediction> preds = {predict({0}), predict({1}), predict({1})};
    EvalReport report = eval_single(preds, golds);
    CHECK(report.accuracy == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(report.precision == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(report.recall == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(report.recall == report.accuracy);
    // Against the independent per-class oracle.
    auto oracle = oracles::weighted_scores_bruteforce({0, 0, 1}, {0, 1, 1});
    CHECK(report.precision == doctest::Approx(oracle.precision).epsilon(1e-9));
    CHECK(report.recall == doctest::Approx(oracle.recall).epsilon(1e-9));
    CHECK(report.f1 == doctest::Approx(oracle.f1).epsilon(1e-9));
}

TEST_CASE("perfect predictions score 1.0 everywhere") {
    std::vector<InstructionRecord> golds;
    std::vector<Prediction> preds;
    for (int i = 0; i < 12; ++i) {
        golds.push_back(gold_single(i % 5, i));
        preds.push_back(predict({i % 5}));
    }
    EvalReport report = eval_single(preds, golds);
    CHECK(report.accuracy == 1.0);
    CHECK(report.precision == 1.0);
    CHECK(report.recall == 1.0);
    CHECK(report.f1 == 1.0);
    CHECK(report.n_malformed == 0);
}

TEST_CASE("malformed predictions land in the reject column") {
    std::vector<InstructionRecord> golds = {gold_single(0, 0), gold_single(1, 1)};
    std::vector<Prediction> preds = {std::nullopt, std::nullopt};
    EvalReport report = eval_single(preds, golds);
    CHECK(report.accuracy == 0.0);
    CHECK(report.recall == 0.0);
    CHECK(report.n_malformed == 2);
    CHECK(report.confusion.at(0, ConfusionMatrix::kRejectColumn) == 1);
    CHECK(report.confusion.at(1, ConfusionMatrix::kRejectColumn) == 1);
    CHECK(report.confusion.total() == 2);

    // A step-less plain-text response is also a reject.
    std::vector<Prediction> textual = {RoutedResponse{{PlainText{"hi"}}}, predict({1})};
    EvalReport mixed = eval_single(textual, golds);
    CHECK(mixed.accuracy == doctest::Approx(0.5));
    CHECK(mixed.confusion.at(0, ConfusionMatrix::kRejectColumn) == 1);
}

TEST_CASE("twelve-record confusion fixture matches the brute-force oracle") {
    // Hand-built: classes 2, 5, 9 with deliberate confusions and a reject.
    std::vector<int> gold_ix = {2, 2, 2, 2, 5, 5, 5, 9, 9, 9, 9, 9};
    std::vector<int> pred_ix = {2, 2, 5, -1, 5, 5, 2, 9, 9, 9, 5, 9};
    std::vector<InstructionRecord> golds;
    std::vector<Prediction> preds;
    for (size_t i = 0; i < gold_ix.size(); ++i) {
        golds.push_back(gold_single(gold_ix[i], static_cast<int>(i)));
        preds.push_back(pred_ix[i] < 0 ? Prediction{} : predict({pred_ix[i]}));
    }
    EvalReport report = eval_single(preds, golds);
    auto oracle = oracles::weighted_scores_bruteforce(gold_ix, pred_ix);
    CHECK(report.accuracy == doctest::Approx(oracle.accuracy).epsilon(1e-9));
    CHECK(report.precision == doctest::Approx(oracle.precision).epsilon(1e-9));
    CHECK(report.recall == doctest::Approx(oracle.recall).epsilon(1e-9));
    CHECK(report.f1 == doctest::Approx(oracle.f1).epsilon(1e-9));
    CHECK(report.confusion.total() == 12);
    CHECK(report.n_malformed == 1);
}

TEST_CASE("weighted recall equals accuracy exactly on random prediction sets") {
    std::mt19937_64 rng(20240401);
    std::uniform_int_distribution<int> n_dist(1, 60);
    std::uniform_int_distribution<int> class_dist(0, kRoutableTaskCount - 1);
    std::uniform_int_distribution<int> reject(0, 9);
    for (int trial = 0; trial < 100; ++trial) {
        int n = n_dist(rng);
        std::vector<InstructionRecord> golds;
        std::vector<Prediction> preds;
        for (int i = 0; i < n; ++i) {
            golds.push_back(gold_single(class_dist(rng), i));
            if (reject(rng) == 0)
                preds.push_back(std::nullopt);
            else
                preds.push_back(predict({class_dist(rng)}));
        }
        EvalReport report = eval_single(preds, golds);
        REQUIRE(report.recall == report.accuracy);  // exact, not approximate
    }
}

TEST_CASE("weighted metrics match the oracle on larger random fixtures") {
    std::mt19937_64 rng(777);
    std::uniform_int_distribution<int> class_dist(0, 7);
    std::uniform_int_distribution<int> reject(0, 11);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<InstructionRecord> golds;
        std::vector<Prediction> preds;
        std::vector<int> gold_ix, pred_ix;
        for (int i = 0; i < 300; ++i) {
            int g = class_dist(rng);
            int p = reject(rng) == 0 ? -1 : class_dist(rng);
            gold_ix.push_back(g);
            pred_ix.push_back(p);
            golds.push_back(gold_single(g, i));
            preds.push_back(p < 0 ? Prediction{} : predict({p}));
        }
        EvalReport report = eval_single(preds, golds);
        auto oracle = oracles::weighted_scores_bruteforce(gold_ix, pred_ix);
        REQUIRE(report.accuracy == doctest::Approx(oracle.accuracy).epsilon(1e-9));
        REQUIRE(report.precision == doctest::Approx(oracle.precision).epsilon(1e-9));
        REQUIRE(report.recall == doctest::Approx(oracle.recall).epsilon(1e-9));
        REQUIRE(report.f1 == doctest::Approx(oracle.f1).epsilon(1e-9));
    }
}

TEST_CASE("report values are stable under joint permutation") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> class_dist(0, 5);
    std::vector<InstructionRecord> golds;
    std::vector<Prediction> preds;
    for (int i = 0; i < 50; ++i) {
        golds.push_back(gold_single(class_dist(rng), i));
        preds.push_back(predict({class_dist(rng)}));
    }
    EvalReport before = eval_single(preds, golds);

    std::vector<size_t> order(golds.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<InstructionRecord> golds_shuffled;
    std::vector<Prediction> preds_shuffled;
    for (size_t i : order) {
        golds_shuffled.push_back(golds[i]);
        preds_shuffled.push_back(preds[i]);
    }
    EvalReport after = eval_single(preds_shuffled, golds_shuffled);
    CHECK(before.accuracy == after.accuracy);
    CHECK(before.precision == after.precision);
    CHECK(before.recall == after.recall);
    CHECK(before.f1 == after.f1);
}

TEST_CASE("eval_single rejects mismatched or non-single inputs") {
    std::vector<InstructionRecord> golds = {gold_single(0, 0)};
    CHECK_THROWS_AS(eval_single({}, golds), LengthMismatchError);
    std::vector<InstructionRecord> chains = {gold_chain({0, 1}, 0)};
    std::vector<Prediction> preds = {predict({0})};
    CHECK_THROWS_AS(eval_single(preds, chains), std::invalid_argument);
}

TEST_CASE("chain metrics: identical sequences") {
    std::vector<InstructionRecord> golds = {gold_chain({0, 1, 2}, 0)};
    std::vector<Prediction> preds = {predict({0, 1, 2})};
    ChainEvalReport report = eval_chain(preds, golds);
    CHECK(report.edit_distance == 0.0);
    CHECK(report.precision == 1.0);
    CHECK(report.recall == 1.0);
    CHECK(report.f1 == 1.0);
    CHECK(report.gold_length_histogram[1] == 1);
}

TEST_CASE("chain metrics: missing second step") {
    // pred [image_gen], gold [image_gen, image_edit]:
    // Levenshtein 1 -> ED 0.5; P 1.0, R 0.5, F1 2/3.
    std::vector<InstructionRecord> golds = {gold_chain({0, 2}, 0)};
    std::vector<Prediction> preds = {predict({0})};
    ChainEvalReport report = eval_chain(preds, golds);
    CHECK(report.edit_distance == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(report.precision == doctest::Approx(1.0));
    CHECK(report.recall == doctest::Approx(0.5));
    CHECK(report.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("chain metrics: transposed order is an ED hit but not a P/R hit") {
    // pred [A,B,C] vs gold [B,A,C]: Levenshtein 2 -> ED 2/3; multisets
    // equal so P = R = F1 = 1.
    std::vector<InstructionRecord> golds = {gold_chain({1, 0, 2}, 0)};
    std::vector<Prediction> preds = {predict({0, 1, 2})};
    ChainEvalReport report = eval_chain(preds, golds);
    CHECK(report.edit_distance == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(report.precision == 1.0);
    CHECK(report.recall == 1.0);
    CHECK(report.f1 == 1.0);
}

TEST_CASE("chain metrics: malformed prediction scores zero") {
    std::vector<InstructionRecord> golds = {gold_chain({0, 1}, 0)};
    std::vector<Prediction> preds = {std::nullopt};
    ChainEvalReport report = eval_chain(preds, golds);
    CHECK(report.edit_distance == 1.0);  // empty vs non-empty
    CHECK(report.precision == 0.0);
    CHECK(report.recall == 0.0);
    CHECK(report.f1 == 0.0);
    CHECK(report.n_malformed == 1);
}

TEST_CASE("normalized edit distance stays within bounds") {
    std::mt19937_64 rng(31337);
    std::uniform_int_distribution<int> len(2, 5);
    std::uniform_int_distribution<int> pred_len(0, 6);
    std::uniform_int_distribution<int> class_dist(0, kRoutableTaskCount - 1);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<int> gold_tasks;
        int n = len(rng);
        for (int i = 0; i < n; ++i) gold_tasks.push_back(class_dist(rng));
        std::vector<int> pred_tasks;
        int m = pred_len(rng);
        for (int i = 0; i < m; ++i) pred_tasks.push_back(class_dist(rng));
        std::vector<InstructionRecord> golds = {gold_chain(gold_tasks, trial)};
        std::vector<Prediction> preds = {pred_tasks.empty() ? Prediction{}
                                                            : predict(pred_tasks)};
        ChainEvalReport report = eval_chain(preds, golds);
        REQUIRE(report.edit_distance >= 0.0);
        REQUIRE(report.edit_distance <= 1.0);
        bool equal = pred_tasks == gold_tasks;
        REQUIRE((report.edit_distance == 0.0) == equal);
    }
}

TEST_CASE("report tables follow the fixed column order") {
    std::vector<InstructionRecord> golds = {gold_single(0, 0)};
    std::vector<Prediction> preds = {predict({0})};
    std::string single = report_to_table(eval_single(preds, golds));
    CHECK(single.find("Acc") != std::string::npos);
    CHECK(single.find("Acc") < single.find("Pre"));
    CHECK(single.find("Pre") < single.find("Recall"));
    CHECK(single.find("Recall") < single.find("F1"));
    CHECK(single.find("100.00") != std::string::npos);

    std::vector<InstructionRecord> chain_golds = {gold_chain({0, 1}, 0)};
    std::vector<Prediction> chain_preds = {predict({0, 1})};
    std::string chain = report_to_table(eval_chain(chain_preds, chain_golds));
    CHECK(chain.find("ED") != std::string::npos);
    CHECK(chain.find("ED") < chain.find("Pre"));
    CHECK(chain.find("0.00") != std::string::npos);
}
