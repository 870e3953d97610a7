#include <doctest.h>

#include <random>
#include <string>

#include "generators.hpp"
#include "olympus/parser.hpp"
#include "olympus/tokens.hpp"

using namespace olympus;

namespace {

TaskKind task(TaskFamily family) { return TaskKind::of(family); }
TaskKind cig(Condition condition) {
    return TaskKind::controllable(TaskFamily::ControllableImageGen, condition);
}

}  // namespace

TEST_CASE("single-step image generation response") {
    auto r = parse_response(
        "<image_gen>a chihuahua dog dressed in a vibrant, multicolored "
        "costume.</image_gen>");
    REQUIRE(r.segments.size() == 1);
    auto steps = r.steps();
    REQUIRE(steps.size() == 1);
    CHECK(steps[0].task == task(TaskFamily::ImageGen));
    CHECK(steps[0].refined_prompt ==
          "a chihuahua dog dressed in a vibrant, multicolored costume.");
}

TEST_CASE("two-step chain response") {
    auto r = parse_response(
        "<pose_to_image>a majestic castle</pose_to_image>"
        "<image_edit>adding green trees</image_edit>");
    auto steps = r.steps();
    REQUIRE(steps.size() == 2);
    CHECK(steps[0].task == cig(Condition::Pose));
    CHECK(steps[0].refined_prompt == "a majestic castle");
    CHECK(steps[1].task == task(TaskFamily::ImageEdit));
    CHECK(steps[1].refined_prompt == "adding green trees");
    CHECK(r.segments.size() == 2);
}

TEST_CASE("text-to-3D response renders with its routing tokens") {
    RoutedResponse r;
    r.segments.emplace_back(RoutingStep{
        task(TaskFamily::Text3D),
        "ancient library, a repository of books and scrolls from ancient times."});
    CHECK(render_response(r) ==
          "<3D_gen_text>ancient library, a repository of books and scrolls from "
          "ancient times.</3D_gen_text>");
    CHECK(parse_response(render_response(r)) == r);
}

TEST_CASE("plain answer passes through untouched") {
    auto r = parse_response("The answer is 42.");
    REQUIRE(r.segments.size() == 1);
    CHECK(r.plain_text() == "The answer is 42.");
    CHECK(r.step_count() == 0);

    RoutedResponse hello;
    hello.segments.emplace_back(PlainText{"hello"});
    CHECK(render_response(hello) == "hello");
}

TEST_CASE("missing close tag is unbalanced") {
    CHECK_THROWS_AS(parse_response("<image_gen>a cat"), ParseError);
    try {
        parse_response("<image_gen>a cat");
    } catch (const ParseError& e) {
        CHECK(e.kind() == ParseError::Kind::UnbalancedTag);
        CHECK(e.tag() == "image_gen");
        CHECK(e.position() == 0);
    }
}

TEST_CASE("stray close tag is unbalanced") {
    CHECK_THROWS_AS(parse_response("a cat</image_gen>"), ParseError);
    try {
        parse_response("oops </video_gen>");
    } catch (const ParseError& e) {
        CHECK(e.kind() == ParseError::Kind::UnbalancedTag);
        CHECK(e.tag() == "video_gen");
    }
}

TEST_CASE("known tag inside a step body is nested") {
    try {
        parse_response("<image_gen>a <video_gen>b</video_gen></image_gen>");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.kind() == ParseError::Kind::NestedTag);
        CHECK(e.tag() == "video_gen");
    }
    // A foreign close tag inside a body has no matching open.
    try {
        parse_response("<image_gen>a </video_gen> b</image_gen>");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.kind() == ParseError::Kind::UnbalancedTag);
        CHECK(e.tag() == "video_gen");
    }
}

TEST_CASE("empty step body is rejected") {
    try {
        parse_response("<image_gen></image_gen>");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.kind() == ParseError::Kind::EmptyPrompt);
        CHECK(e.tag() == "image_gen");
    }
}

TEST_CASE("unknown tags are plain text, not errors") {
    auto r = parse_response("see <b>bold</b> and <unknown_tag> here");
    CHECK(r.step_count() == 0);
    CHECK(r.plain_text() == "see <b>bold</b> and <unknown_tag> here");

    // Unknown tags around and inside steps survive verbatim.
    auto mixed = parse_response("<note><image_gen>a <sketch> of a fox</image_gen>");
    REQUIRE(mixed.segments.size() == 2);
    CHECK(std::get<PlainText>(mixed.segments[0]).text == "<note>");
    CHECK(std::get<RoutingStep>(mixed.segments[1]).refined_prompt == "a <sketch> of a fox");
}

TEST_CASE("angle brackets and partial tags stay in prose") {
    CHECK(parse_response("5 < 7 > 3").plain_text() == "5 < 7 > 3");
    CHECK(parse_response("a <image_gen b").plain_text() == "a <image_gen b");
    CHECK(parse_response("<<nope>>").plain_text() == "<<nope>>");
    // '<' immediately before a real tag still parses the tag.
    auto r = parse_response("<<image_gen>cat</image_gen>");
    REQUIRE(r.segments.size() == 2);
    CHECK(std::get<PlainText>(r.segments[0]).text == "<");
    CHECK(std::get<RoutingStep>(r.segments[1]).task == task(TaskFamily::ImageGen));
}

TEST_CASE("whitespace is preserved verbatim") {
    auto r = parse_response("<image_gen>  two  spaces \n kept </image_gen>");
    CHECK(r.steps()[0].refined_prompt == "  two  spaces \n kept ");

    // Whitespace-only runs between tags become plain segments.
    auto chain = parse_response(
        "<image_gen>a</image_gen> \n <image_edit>b</image_edit>");
    REQUIRE(chain.segments.size() == 3);
    CHECK(std::get<PlainText>(chain.segments[1]).text == " \n ");
}

TEST_CASE("every input character is accounted for") {
    std::string text = "lead <image_gen>fox</image_gen> mid <video_gen>sea</video_gen> tail";
    auto r = parse_response(text);
    CHECK(render_response(r) == text);
}

TEST_CASE("render rejects prompts embedding known tags") {
    RoutedResponse r;
    r.segments.emplace_back(RoutingStep{task(TaskFamily::ImageGen), "a <video_gen>x</video_gen>"});
    CHECK_THROWS_AS(render_response(r), IllegalPromptError);

    RoutedResponse empty_prompt;
    empty_prompt.segments.emplace_back(RoutingStep{task(TaskFamily::ImageGen), ""});
    CHECK_THROWS_AS(render_response(empty_prompt), IllegalPromptError);
}

TEST_CASE("round-trip: 1000 seeded random responses") {
    std::mt19937_64 rng(20240717);
    for (int i = 0; i < 1000; ++i) {
        RoutedResponse r = gen::random_response(rng);
        std::string text = render_response(r);
        RoutedResponse back = parse_response(text);
        REQUIRE(back == r);
    }
}

TEST_CASE("parser is total over arbitrary input") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> len(0, 60);
    // Bias toward tag-ish characters to stress the scanner.
    const std::string alphabet = "<>/_abgenimv 310克\t\n";
    std::vector<std::string> pieces;
    for (const TokenSpec& spec : token_table()) {
        pieces.push_back(spec.open_tag);
        pieces.push_back(spec.close_tag);
    }
    std::uniform_int_distribution<size_t> pick_char(0, alphabet.size() - 1);
    std::uniform_int_distribution<size_t> pick_piece(0, pieces.size() - 1);
    std::uniform_int_distribution<int> coin(0, 9);
    for (int trial = 0; trial < 2000; ++trial) {
        std::string text;
        int n = len(rng);
        for (int i = 0; i < n; ++i) {
            if (coin(rng) == 0)
                text += pieces[pick_piece(rng)];
            else
                text += alphabet[pick_char(rng)];
        }
        try {
            auto r = parse_response(text);
            // Accepted input must re-render to the original text.
            CHECK(render_response(r) == text);
        } catch (const ParseError&) {
            // Typed rejection is the other legal outcome.
        }
    }
}
