#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>

#include "olympus/task.hpp"

namespace olympus {

// A typed handle flowing between pipeline steps. Locators are opaque
// strings (stub://, file paths, URLs); the toolkit never loads media.
struct Artifact {
    Modality modality;
    std::string locator;
    // Set when a pipeline step created this artifact: (step index, task).
    std::optional<std::pair<size_t, TaskKind>> producer;

    bool operator==(const Artifact&) const = default;
};

}  // namespace olympus
