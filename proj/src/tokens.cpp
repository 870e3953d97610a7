#include "olympus/tokens.hpp"

#include <stdexcept>
#include <unordered_map>

namespace olympus {

const std::vector<TokenSpec>& token_table() {
    static const std::vector<TokenSpec> kTable = [] {
        std::vector<TokenSpec> table;
        table.reserve(kRoutableTaskCount);
        for (const TaskKind& task : all_tasks()) {
            std::string name = task.name();
            table.push_back(TokenSpec{task, name, "<" + name + ">", "</" + name + ">"});
        }
        return table;
    }();
    return kTable;
}

const TokenSpec& token_for(const TaskKind& task) {
    return token_table()[static_cast<size_t>(task.index())];
}

std::optional<TaskKind> task_from_token_name(std::string_view name) {
    static const std::unordered_map<std::string_view, int> kByName = [] {
        std::unordered_map<std::string_view, int> map;
        for (const TokenSpec& spec : token_table())
            map.emplace(spec.name, spec.task.index());
        return map;
    }();
    auto it = kByName.find(name);
    if (it == kByName.end()) return std::nullopt;
    return TaskKind::from_index(it->second);
}

}  // namespace olympus
