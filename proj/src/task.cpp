#include "olympus/task.hpp"

#include <array>

namespace olympus {

std::string_view family_name(TaskFamily family) {
    switch (family) {
        case TaskFamily::ImageGen: return "image_generation";
        case TaskFamily::VideoGen: return "video_generation";
        case TaskFamily::ImageEdit: return "image_editing";
        case TaskFamily::VideoEdit: return "video_editing";
        case TaskFamily::Text3D: return "text_to_3d";
        case TaskFamily::Image3D: return "image_to_3d";
        case TaskFamily::ImageDeblur: return "image_deblurring";
        case TaskFamily::ImageDerain: return "image_deraining";
        case TaskFamily::ImageDenoise: return "image_denoising";
        case TaskFamily::ImageSR: return "image_super_resolution";
        case TaskFamily::PoseEst: return "pose_estimation";
        case TaskFamily::NormalEst: return "normal_estimation";
        case TaskFamily::CannyEst: return "canny_estimation";
        case TaskFamily::DepthEst: return "depth_estimation";
        case TaskFamily::ObjectDetect: return "object_detection";
        case TaskFamily::ObjectSegment: return "object_segmentation";
        case TaskFamily::VisualGround: return "visual_grounding";
        case TaskFamily::VideoRefSeg: return "referring_video_segmentation";
        case TaskFamily::ControllableImageGen: return "controllable_image_generation";
        case TaskFamily::ControllableVideoGen: return "controllable_video_generation";
    }
    return "unknown";
}

std::string_view condition_name(Condition condition) {
    switch (condition) {
        case Condition::Pose: return "pose";
        case Condition::Canny: return "canny";
        case Condition::Normal: return "normal";
        case Condition::Scribble: return "scribble";
        case Condition::Segmentation: return "segmentation";
        case Condition::Depth: return "depth";
    }
    return "unknown";
}

std::string_view modality_name(Modality modality) {
    switch (modality) {
        case Modality::Text: return "text";
        case Modality::Image: return "image";
        case Modality::Video: return "video";
        case Modality::Mesh3D: return "mesh3d";
        case Modality::Mask: return "mask";
        case Modality::Boxes: return "boxes";
        case Modality::Map: return "map";
    }
    return "unknown";
}

std::optional<Modality> modality_from_name(std::string_view name) {
    static constexpr std::array<Modality, 7> kAll = {
        Modality::Text, Modality::Image, Modality::Video, Modality::Mesh3D,
        Modality::Mask, Modality::Boxes, Modality::Map};
    for (Modality m : kAll)
        if (modality_name(m) == name) return m;
    return std::nullopt;
}

int TaskKind::index() const {
    int f = static_cast<int>(family_);
    if (!is_controllable(family_)) return f;
    int base = kTaskFamilyCount - 2;  // 18 plain families precede CIG/CVG
    int block = family_ == TaskFamily::ControllableImageGen ? 0 : 1;
    return base + block * kConditionCount + static_cast<int>(*condition_);
}

TaskKind TaskKind::from_index(int index) {
    if (index < 0 || index >= kRoutableTaskCount)
        throw std::out_of_range("task index out of range");
    int base = kTaskFamilyCount - 2;
    if (index < base) return TaskKind(static_cast<TaskFamily>(index), std::nullopt);
    int rest = index - base;
    TaskFamily family = rest < kConditionCount ? TaskFamily::ControllableImageGen
                                               : TaskFamily::ControllableVideoGen;
    return TaskKind(family, static_cast<Condition>(rest % kConditionCount));
}

std::string TaskKind::name() const {
    // Matches the routing-token names; kept here so TaskKind prints
    // usefully without pulling in the token table.
    static constexpr std::array<std::string_view, 18> kPlain = {
        "image_gen",     "video_gen",    "image_edit",   "video_edit",
        "3D_gen_text",   "3D_gen_image", "image_deblur", "image_derain",
        "image_denoise", "image_sr",     "pose_est",     "normal_est",
        "canny_est",     "depth_est",    "obj_det",      "obj_seg",
        "visual_ground", "video_ref_seg"};
    static constexpr std::array<std::string_view, 6> kCondition = {
        "pose", "canny", "normal", "scribble", "seg", "depth"};
    if (!is_controllable(family_)) return std::string(kPlain[static_cast<int>(family_)]);
    std::string out(kCondition[static_cast<int>(*condition_)]);
    out += family_ == TaskFamily::ControllableImageGen ? "_to_image" : "_to_video";
    return out;
}

const std::vector<TaskKind>& all_tasks() {
    static const std::vector<TaskKind> kTasks = [] {
        std::vector<TaskKind> tasks;
        tasks.reserve(kRoutableTaskCount);
        for (int i = 0; i < kRoutableTaskCount; ++i)
            tasks.push_back(TaskKind::from_index(i));
        return tasks;
    }();
    return kTasks;
}

}  // namespace olympus
