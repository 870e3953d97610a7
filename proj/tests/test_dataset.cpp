#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <set>

#include "bank_detail.hpp"
#include "olympus/dataset.hpp"
#include "olympus/parser.hpp"
#include "olympus/tokens.hpp"

using namespace olympus;

namespace {

TaskKind image_gen() { return TaskKind::of(TaskFamily::ImageGen); }

InstructionRecord simple_record(const std::string& id, const std::string& instruction) {
    return make_record(id, instruction, "<image_gen>" + instruction + "</image_gen>",
                       Complexity::Short, RecordSource::Synthetic);
}

}  // namespace

TEST_CASE("synth_single produces distinct, parseable records") {
    auto records = synth_single(image_gen(), 3, 7, TemplateBank::default_bank());
    REQUIRE(records.size() == 3);
    std::set<std::string> instructions;
    for (const InstructionRecord& record : records) {
        instructions.insert(record.instruction);
        RoutedResponse parsed = parse_response(record.gold_response);
        REQUIRE(parsed.step_count() == 1);
        CHECK(parsed.tasks()[0] == image_gen());
        CHECK(parsed.tasks() == record.gold_tasks);
        CHECK(record.kind == RecordKind::SingleTask);
    }
    CHECK(instructions.size() == 3);

    CHECK(synth_single(image_gen(), 0, 1, TemplateBank::default_bank()).empty());
}

TEST_CASE("synthesis is deterministic in (seed, bank, count)") {
    const TemplateBank& bank = TemplateBank::default_bank();
    auto first = synth_single(image_gen(), 50, 42, bank);
    auto second = synth_single(image_gen(), 50, 42, bank);
    REQUIRE(first.size() == second.size());
    for (size_t i = 0; i < first.size(); ++i) {
        CHECK(first[i].instruction == second[i].instruction);
        CHECK(first[i].gold_response == second[i].gold_response);
    }
    // A different seed yields a different corpus.
    auto other = synth_single(image_gen(), 50, 43, bank);
    bool any_differ = false;
    for (size_t i = 0; i < first.size(); ++i)
        if (first[i].instruction != other[i].instruction) any_differ = true;
    CHECK(any_differ);
}

TEST_CASE("instruction style varies within a small sample") {
    auto records = synth_single(image_gen(), 20, 3, TemplateBank::default_bank());
    const auto& prefixes = TemplateBank::default_bank().templates(image_gen()).prefixes;
    std::set<std::string> seen;
    for (const InstructionRecord& record : records)
        for (const std::string& prefix : prefixes)
            if (record.instruction.rfind(prefix, 0) == 0) seen.insert(prefix);
    CHECK(seen.size() >= 3);
}

TEST_CASE("complexity levels respect the word-count bands") {
    const TemplateBank& bank = TemplateBank::default_bank();
    for (const TaskKind& task : all_tasks()) {
        auto records = synth_single(task, 30, 11, bank);
        for (const InstructionRecord& record : records) {
            size_t words = bank_detail::word_count(record.instruction);
            std::string diagnosis = task.name() + ": '" + record.instruction + "' has " +
                                    std::to_string(words) + " words";
            CHECK_MESSAGE(complexity_for_word_count(words) == record.complexity, diagnosis);
        }
    }
}

TEST_CASE("unknown task is rejected by synthesis and prompt building") {
    TemplateBank bank = TemplateBank::make_default();
    bank.remove(image_gen());
    CHECK(!bank.covers(image_gen()));
    CHECK_THROWS_AS(synth_single(image_gen(), 1, 1, bank), UnknownTaskError);
    CHECK_THROWS_AS(build_llm_prompt(image_gen(), bank), UnknownTaskError);
    CHECK_THROWS_AS(synth_chain(1, 1, bank), UnknownTaskError);
}

TEST_CASE("synth_chain: structure of a forced two-task chain") {
    TaskKind cig_pose =
        TaskKind::controllable(TaskFamily::ControllableImageGen, Condition::Pose);
    TaskKind image_edit = TaskKind::of(TaskFamily::ImageEdit);
    auto records = synth_chain(1, 3, TemplateBank::default_bank(), {2, 2},
                               {cig_pose, image_edit});
    REQUIRE(records.size() == 1);
    const InstructionRecord& record = records[0];
    CHECK(record.kind == RecordKind::ChainOfAction);
    REQUIRE(record.gold_tasks.size() == 2);
    // Both tasks appear exactly once, in instruction order.
    std::set<int> task_set = {record.gold_tasks[0].index(), record.gold_tasks[1].index()};
    CHECK(task_set == std::set<int>{cig_pose.index(), image_edit.index()});
    RoutedResponse parsed = parse_response(record.gold_response);
    CHECK(parsed.tasks() == record.gold_tasks);
    CHECK(parsed.segments.size() == 2);  // two steps, no stray text between tokens
}

TEST_CASE("chain lengths are uniform over 2..5 within two percent") {
    auto records = synth_chain(10000, 7, TemplateBank::default_bank());
    REQUIRE(records.size() == 10000);
    std::array<size_t, 4> histogram{};
    for (const InstructionRecord& record : records) {
        REQUIRE(record.gold_tasks.size() >= 2);
        REQUIRE(record.gold_tasks.size() <= 5);
        ++histogram[record.gold_tasks.size() - 2];
    }
    for (size_t count : histogram) {
        double share = static_cast<double>(count) / 10000.0;
        CHECK(share > 0.23);
        CHECK(share < 0.27);
    }
}

TEST_CASE("every chain gold response round-trips through the parser") {
    auto records = synth_chain(200, 5, TemplateBank::default_bank());
    for (const InstructionRecord& record : records) {
        RoutedResponse parsed = parse_response(record.gold_response);
        CHECK(render_response(parsed) == record.gold_response);
        CHECK(parsed.tasks() == record.gold_tasks);
    }
}

TEST_CASE("clean removes exact and near duplicates, first kept") {
    std::vector<InstructionRecord> records = {
        simple_record("a", "Make an image!"),
        simple_record("b", "Make an image!"),        // exact duplicate
        simple_record("c", "Make  an image"),        // near duplicate
        simple_record("d", "A different request."),
    };
    auto [kept, report] = clean(records);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].id == "a");
    CHECK(kept[1].id == "d");
    CHECK(report.exact_duplicates == 1);
    CHECK(report.near_duplicates == 1);
    CHECK(report.removed_ids == std::vector<std::string>{"b", "c"});

    // Disjoint corpus: nothing removed.
    std::vector<InstructionRecord> disjoint = {simple_record("x", "One request."),
                                               simple_record("y", "Another request.")};
    auto [kept2, report2] = clean(disjoint);
    CHECK(kept2.size() == 2);
    CHECK(report2.removed_ids.empty());
}

TEST_CASE("clean is idempotent") {
    auto records = synth_single(image_gen(), 100, 9, TemplateBank::default_bank());
    records.push_back(records[5]);  // plant one duplicate
    auto [once, first_report] = clean(records);
    CHECK(first_report.exact_duplicates == 1);
    auto [twice, second_report] = clean(once);
    CHECK(second_report.removed_ids.empty());
    CHECK(twice.size() == once.size());
}

TEST_CASE("external filter hook drops records") {
    std::vector<InstructionRecord> records = {simple_record("a", "Keep this request."),
                                              simple_record("b", "Drop this request.")};
    auto [kept, report] = clean(records, [](const InstructionRecord& r) {
        return r.instruction.rfind("Drop", 0) != 0;
    });
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].id == "a");
    CHECK(report.filtered == 1);
}

TEST_CASE("normalization rules") {
    CHECK(normalize_instruction("Make  an image!") == "make an image");
    CHECK(normalize_instruction("make an image") == "make an image");
    CHECK(normalize_instruction("  MAKE, an... IMAGE  ") == "make an image");
    CHECK(normalize_instruction("...") == "");
}

TEST_CASE("stats on an empty corpus are all zero") {
    DatasetStats s = stats({});
    CHECK(s.total == 0);
    CHECK(s.chain_records == 0);
    CHECK(s.max_instruction_words == 0);
    CHECK(s.mean_instruction_words == 0.0);
}

TEST_CASE("stats arithmetic on a hand-built fixture") {
    // Instruction word counts 4, 6, 8 -> max 8, mean 6.0.
    std::vector<InstructionRecord> records = {
        simple_record("a", "one two three four"),
        simple_record("b", "one two three four five six"),
        simple_record("c", "one two three four five six seven eight"),
    };
    DatasetStats s = stats(records);
    CHECK(s.total == 3);
    CHECK(s.max_instruction_words == 8);
    CHECK(s.mean_instruction_words == doctest::Approx(6.0));
    CHECK(s.per_task[static_cast<size_t>(image_gen().index())] == 3);
}

TEST_CASE("corpus synthesis follows the shipped distribution exactly") {
    CorpusConfig config;
    config.scale = 0.002;
    config.seed = 7;
    auto records = synth_corpus(config, TemplateBank::default_bank());
    DatasetStats s = stats(records);
    const SampleDistribution& distribution = sample_distribution();
    for (const TaskKind& task : all_tasks()) {
        auto expected = static_cast<size_t>(std::llround(
            static_cast<double>(distribution.task_count(task, Split::Train)) * 0.002));
        CHECK_MESSAGE(s.per_task[static_cast<size_t>(task.index())] == expected,
                      task.name());
    }
    auto expected_chains = static_cast<size_t>(
        std::llround(static_cast<double>(distribution.chain_count(Split::Train)) * 0.002));
    CHECK(s.chain_records == expected_chains);

    // The reference proportions themselves.
    CHECK(distribution.task_count(image_gen(), Split::Train) == 45000);
    CHECK(distribution.task_count(image_gen(), Split::Bench) == 5000);
    CHECK(distribution.task_count(TaskKind::of(TaskFamily::ImageDeblur), Split::Train) ==
          6300);
    size_t train_total = 0;
    size_t bench_total = 0;
    for (const TaskKind& task : all_tasks()) {
        train_total += distribution.task_count(task, Split::Train);
        bench_total += distribution.task_count(task, Split::Bench);
    }
    CHECK(train_total + distribution.chain_count(Split::Train) == 446344);
    CHECK(bench_total + distribution.chain_count(Split::Bench) == 49585);
}

TEST_CASE("generation prompt contains the full component recipe") {
    std::string prompt = build_llm_prompt(image_gen(), TemplateBank::default_bank());
    const TaskTemplates& templates =
        TemplateBank::default_bank().templates(image_gen());
    REQUIRE(templates.prefixes.size() == 7);
    REQUIRE(templates.phrases.size() == 12);
    REQUIRE(templates.example_pairs.size() == 9);
    for (const std::string& prefix : templates.prefixes)
        CHECK(prompt.find(prefix) != std::string::npos);
    for (const std::string& phrase : templates.phrases)
        CHECK(prompt.find(phrase) != std::string::npos);
    size_t pairs = 0;
    for (size_t at = prompt.find("instruction:"); at != std::string::npos;
         at = prompt.find("instruction:", at + 1))
        ++pairs;
    CHECK(pairs == 9);
    CHECK(prompt.find("short") != std::string::npos);
    CHECK(prompt.find("moderate") != std::string::npos);
    CHECK(prompt.find("extended") != std::string::npos);

    // Three example pairs per complexity level.
    int short_count = 0, moderate_count = 0, extended_count = 0;
    for (const ExamplePair& pair : templates.example_pairs) {
        if (pair.complexity == Complexity::Short) ++short_count;
        if (pair.complexity == Complexity::Moderate) ++moderate_count;
        if (pair.complexity == Complexity::Extended) ++extended_count;
    }
    CHECK(short_count == 3);
    CHECK(moderate_count == 3);
    CHECK(extended_count == 3);

    PromptOptions no_complexities;
    no_complexities.include_complexities = false;
    std::string trimmed = build_llm_prompt(image_gen(), TemplateBank::default_bank(),
                                           no_complexities);
    CHECK(trimmed.find("Complexity levels") == std::string::npos);
}

TEST_CASE("jsonl round-trip and schema validation") {
    auto records = synth_single(image_gen(), 3, 21, TemplateBank::default_bank());
    std::string text = write_jsonl(records);
    auto loaded = parse_jsonl(text);
    REQUIRE(loaded.size() == 3);
    for (size_t i = 0; i < loaded.size(); ++i) {
        CHECK(loaded[i].id == records[i].id);
        CHECK(loaded[i].instruction == records[i].instruction);
        CHECK(loaded[i].gold_tasks == records[i].gold_tasks);
    }
    // Byte stability: write(load(write(x))) == write(x).
    CHECK(write_jsonl(loaded) == text);
}

TEST_CASE("jsonl byte stability on a thousand-record corpus") {
    CorpusConfig config;
    config.scale = 0.0025;  // ~1100 records
    config.seed = 13;
    auto records = synth_corpus(config, TemplateBank::default_bank());
    REQUIRE(records.size() > 1000);
    std::string first = write_jsonl(records);
    std::string second = write_jsonl(parse_jsonl(first));
    CHECK(first == second);
}

TEST_CASE("jsonl violations are reported with line numbers, all at once") {
    std::string text =
        R"({"id":"a","instruction":"ok request","gold_response":"<image_gen>x</image_gen>","complexity":"S","kind":"single","source":"synthetic"})"
        "\n"
        R"({"id":"b","instruction":"bad gold","gold_response":"<image_gen>x","complexity":"S","kind":"single","source":"synthetic"})"
        "\n"
        R"({"id":"c","instruction":"bad kind","gold_response":"<image_gen>x</image_gen>","complexity":"S","kind":"chain","source":"synthetic"})"
        "\n"
        R"(not json at all)"
        "\n"
        R"({"id":"e","instruction":"bad complexity","gold_response":"<image_gen>x</image_gen>","complexity":"XL","kind":"single","source":"synthetic"})"
        "\n";
    try {
        parse_jsonl(text);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        REQUIRE(e.violations().size() == 4);
        CHECK(e.violations()[0].line == 2);
        CHECK(e.violations()[0].field == "gold_response");
        CHECK(e.violations()[1].line == 3);
        CHECK(e.violations()[1].field == "kind");
        CHECK(e.violations()[2].line == 4);
        CHECK(e.violations()[3].line == 5);
        CHECK(e.violations()[3].field == "complexity");
    }
}

TEST_CASE("jsonl file io") {
    namespace fs = std::filesystem;
    fs::path path = fs::temp_directory_path() / "olympus_dataset_test.jsonl";
    auto records = synth_single(image_gen(), 5, 2, TemplateBank::default_bank());
    save_jsonl(records, path.string());
    auto loaded = load_jsonl(path.string());
    CHECK(loaded.size() == 5);
    fs::remove(path);

    CHECK_THROWS_AS(load_jsonl("/nonexistent/path.jsonl"), IoError);
}

TEST_CASE("make_record validates its inputs") {
    CHECK_THROWS_AS(make_record("", "x", "<image_gen>y</image_gen>", Complexity::Short,
                                RecordSource::Synthetic),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_record("id", "  ", "<image_gen>y</image_gen>", Complexity::Short,
                                RecordSource::Synthetic),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_record("id", "x", "<image_gen>y", Complexity::Short,
                                RecordSource::Synthetic),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_record("id", "x", "no steps at all", Complexity::Short,
                                RecordSource::Synthetic),
                    std::invalid_argument);
    std::string six_steps;
    for (int i = 0; i < 6; ++i) six_steps += "<image_gen>x</image_gen>";
    CHECK_THROWS_AS(make_record("id", "x", six_steps, Complexity::Short,
                                RecordSource::Synthetic),
                    std::invalid_argument);
}
