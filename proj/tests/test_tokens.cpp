#include <doctest.h>

#include <cctype>
#include <set>

#include "olympus/tokens.hpp"

using namespace olympus;

TEST_CASE("token table covers all 30 routable pairs in stable order") {
    const auto& table = token_table();
    REQUIRE(table.size() == 30);
    for (int i = 0; i < kRoutableTaskCount; ++i) {
        CHECK(table[i].task.index() == i);
        CHECK(table[i].task == TaskKind::from_index(i));
    }
    // Order-stable across calls.
    CHECK(&token_table() == &table);
}

TEST_CASE("token names are unique and form open/close pairs") {
    std::set<std::string> names;
    for (const TokenSpec& spec : token_table()) {
        CHECK(names.insert(spec.name).second);
        CHECK(spec.open_tag == "<" + spec.name + ">");
        CHECK(spec.close_tag == "</" + spec.name + ">");
        for (char c : spec.name) {
            bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_';
            CHECK(ok);
        }
    }
    CHECK(names.size() == 30);
}

TEST_CASE("quoted token strings") {
    CHECK(token_for(TaskKind::of(TaskFamily::ImageGen)).open_tag == "<image_gen>");
    CHECK(token_for(TaskKind::of(TaskFamily::ImageGen)).close_tag == "</image_gen>");
    CHECK(token_for(TaskKind::of(TaskFamily::VideoGen)).open_tag == "<video_gen>");
    CHECK(token_for(TaskKind::of(TaskFamily::Text3D)).open_tag == "<3D_gen_text>");
    CHECK(token_for(TaskKind::of(TaskFamily::Text3D)).close_tag == "</3D_gen_text>");
    CHECK(token_for(TaskKind::of(TaskFamily::ImageEdit)).open_tag == "<image_edit>");
    CHECK(token_for(TaskKind::of(TaskFamily::VideoRefSeg)).open_tag == "<video_ref_seg>");
    CHECK(token_for(TaskKind::controllable(TaskFamily::ControllableImageGen, Condition::Pose))
              .open_tag == "<pose_to_image>");
    CHECK(token_for(TaskKind::controllable(TaskFamily::ControllableVideoGen, Condition::Depth))
              .open_tag == "<depth_to_video>");
}

TEST_CASE("task to token name is a bijection") {
    for (const TaskKind& task : all_tasks()) {
        auto back = task_from_token_name(token_for(task).name);
        REQUIRE(back.has_value());
        CHECK(*back == task);
    }
    CHECK(!task_from_token_name("image_gne").has_value());
    CHECK(!task_from_token_name("").has_value());
}

TEST_CASE("TaskKind enforces the condition invariant") {
    CHECK_THROWS_AS(TaskKind::of(TaskFamily::ControllableImageGen), std::invalid_argument);
    CHECK_THROWS_AS(TaskKind::controllable(TaskFamily::ImageGen, Condition::Pose),
                    std::invalid_argument);
    CHECK(all_tasks().size() == 30);
    int with_condition = 0;
    for (const TaskKind& task : all_tasks()) {
        CHECK(task.condition().has_value() == is_controllable(task.family()));
        if (task.condition()) ++with_condition;
    }
    CHECK(with_condition == 12);
}

TEST_CASE("task index round-trips") {
    for (int i = 0; i < kRoutableTaskCount; ++i)
        CHECK(TaskKind::from_index(i).index() == i);
    CHECK_THROWS_AS(TaskKind::from_index(30), std::out_of_range);
    CHECK_THROWS_AS(TaskKind::from_index(-1), std::out_of_range);
}
