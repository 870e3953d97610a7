#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "olympus/task.hpp"

namespace olympus {

// One routing-token pair. open_tag is "<name>", close_tag is "</name>";
// the name doubles as the task's canonical identifier in configs and
// reports.
struct TokenSpec {
    TaskKind task;
    std::string name;       // e.g. "image_gen"
    std::string open_tag;   // "<image_gen>"
    std::string close_tag;  // "</image_gen>"
};

// The full static table of 30 token specs, in TaskKind index order.
const std::vector<TokenSpec>& token_table();

const TokenSpec& token_for(const TaskKind& task);
std::optional<TaskKind> task_from_token_name(std::string_view name);

}  // namespace olympus
