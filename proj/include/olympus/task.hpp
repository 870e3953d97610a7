#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace olympus {

// The 20 routable task families. Controllable generation additionally
// carries a condition discriminator (see TaskKind).
enum class TaskFamily : uint8_t {
    ImageGen,
    VideoGen,
    ImageEdit,
    VideoEdit,
    Text3D,
    Image3D,
    ImageDeblur,
    ImageDerain,
    ImageDenoise,
    ImageSR,
    PoseEst,
    NormalEst,
    CannyEst,
    DepthEst,
    ObjectDetect,
    ObjectSegment,
    VisualGround,
    VideoRefSeg,
    ControllableImageGen,
    ControllableVideoGen,
};

inline constexpr int kTaskFamilyCount = 20;

// Condition modalities for controllable image/video generation.
enum class Condition : uint8_t {
    Pose,
    Canny,
    Normal,
    Scribble,
    Segmentation,
    Depth,
};

inline constexpr int kConditionCount = 6;

enum class Modality : uint8_t {
    Text,
    Image,
    Video,
    Mesh3D,
    Mask,
    Boxes,
    Map,
};

std::string_view family_name(TaskFamily family);
std::string_view condition_name(Condition condition);
std::string_view modality_name(Modality modality);
std::optional<Modality> modality_from_name(std::string_view name);

inline bool is_controllable(TaskFamily family) {
    return family == TaskFamily::ControllableImageGen ||
           family == TaskFamily::ControllableVideoGen;
}

// A routable task: a family plus, for controllable generation only, the
// condition it is driven by. Construct via of() / controllable() so the
// condition-presence invariant cannot be violated.
class TaskKind {
public:
    static TaskKind of(TaskFamily family) {
        if (is_controllable(family))
            throw std::invalid_argument("controllable task requires a condition");
        return TaskKind(family, std::nullopt);
    }

    static TaskKind controllable(TaskFamily family, Condition condition) {
        if (!is_controllable(family))
            throw std::invalid_argument("condition given for non-controllable task");
        return TaskKind(family, condition);
    }

    TaskFamily family() const { return family_; }
    std::optional<Condition> condition() const { return condition_; }

    // Stable index in [0, 30): the 18 plain families first, then the six
    // CIG conditions, then the six CVG conditions.
    int index() const;
    static TaskKind from_index(int index);

    // Canonical display name, e.g. "image_gen" or "pose_to_image". Equals
    // the routing-token name (see tokens.hpp).
    std::string name() const;

    bool operator==(const TaskKind& other) const = default;
    auto operator<=>(const TaskKind& other) const = default;

private:
    TaskKind(TaskFamily family, std::optional<Condition> condition)
        : family_(family), condition_(condition) {}

    TaskFamily family_;
    std::optional<Condition> condition_;
};

inline constexpr int kRoutableTaskCount = 30;

// All 30 routable (family, condition) pairs in stable index order.
const std::vector<TaskKind>& all_tasks();

}  // namespace olympus

template <>
struct std::hash<olympus::TaskKind> {
    size_t operator()(const olympus::TaskKind& task) const noexcept {
        return static_cast<size_t>(task.index());
    }
};
