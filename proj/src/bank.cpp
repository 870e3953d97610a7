#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>

#include "olympus/dataset.hpp"
#include "olympus/tokens.hpp"

// Shipped template bank: per-task instruction heads plus the seeded
// content grammar behind synth_single/synth_chain. The rule router
// derives its keyword rules from the same phrase data, which is what
// makes synthesized corpora routable by construction.

namespace olympus {

namespace {

const std::vector<std::string>& shared_prefixes() {
    static const std::vector<std::string> kPrefixes = {
        "Please",
        "Kindly",
        "Could you",
        "I'd appreciate it if you could",
        "I need you to",
        "Would you",
        "Hey, can you",
    };
    return kPrefixes;
}

// Condition markers used inside controllable-generation phrases.
std::string image_marker(Condition c) {
    switch (c) {
        case Condition::Pose: return "pose map";
        case Condition::Canny: return "canny edge map";
        case Condition::Normal: return "normal map";
        case Condition::Scribble: return "scribble sketch";
        case Condition::Segmentation: return "segmentation map";
        case Condition::Depth: return "depth map";
    }
    return {};
}

std::string video_marker(Condition c) {
    switch (c) {
        case Condition::Pose: return "pose sequence";
        case Condition::Canny: return "canny edge sequence";
        case Condition::Normal: return "normal map sequence";
        case Condition::Scribble: return "scribble sequence";
        case Condition::Segmentation: return "segmentation sequence";
        case Condition::Depth: return "depth sequence";
    }
    return {};
}

std::vector<std::string> controllable_image_phrases(Condition c) {
    std::string m = image_marker(c);
    return {
        "following the " + m + ", generate an image of",
        "using the " + m + ", create an image of",
        "conditioned on the " + m + ", render an image of",
        "guided by the " + m + ", produce an image of",
        "based on the " + m + ", craft an image of",
        "with the " + m + " as guidance, generate an image showing",
        "respecting the " + m + ", create a picture of",
        "from the " + m + ", synthesize an image of",
        "following the " + m + ", draw an image of",
        "using the " + m + ", generate a picture of",
        "aligned with the " + m + ", render a picture of",
        "matching the " + m + ", produce a picture of",
    };
}

std::vector<std::string> controllable_video_phrases(Condition c) {
    std::string m = video_marker(c);
    return {
        "following the " + m + ", generate a video of",
        "using the " + m + ", create a video of",
        "conditioned on the " + m + ", render a video of",
        "guided by the " + m + ", produce a video of",
        "based on the " + m + ", craft a video of",
        "with the " + m + " as guidance, generate a video showing",
        "respecting the " + m + ", create a clip of",
        "from the " + m + ", synthesize a video of",
        "following the " + m + ", animate a video of",
        "using the " + m + ", generate a clip of",
        "aligned with the " + m + ", render a clip of",
        "matching the " + m + ", produce a clip of",
    };
}

std::vector<std::string> phrases_for(const TaskKind& task) {
    using F = TaskFamily;
    if (task.family() == F::ControllableImageGen)
        return controllable_image_phrases(*task.condition());
    if (task.family() == F::ControllableVideoGen)
        return controllable_video_phrases(*task.condition());
    switch (task.family()) {
        case F::ImageGen:
            return {"craft an image displaying", "generate an image of",
                    "create an image of", "produce an image showing",
                    "make an image of", "render an image depicting",
                    "design an image of", "draw a picture of",
                    "create a picture of", "generate a picture showing",
                    "paint a scene of", "illustrate a scene featuring"};
        case F::VideoGen:
            return {"craft a video displaying", "generate a video of",
                    "create a video of", "produce a video showing",
                    "make a video of", "render a video depicting",
                    "design a video of", "film a clip of",
                    "create a clip of", "generate a clip showing",
                    "animate a scene of", "produce a short video featuring"};
        case F::ImageEdit:
            return {"refine the image by", "edit the image by",
                    "modify the image by", "adjust the picture by",
                    "retouch the image by", "update the image by",
                    "alter the image by", "rework the picture by",
                    "touch up the image by", "revise the image by",
                    "transform the image by", "polish the image by"};
        case F::VideoEdit:
            return {"refine the video by", "edit the video by",
                    "modify the video by", "adjust the footage by",
                    "retouch the video by", "update the video by",
                    "alter the video by", "rework the footage by",
                    "touch up the video by", "revise the video by",
                    "transform the video by", "polish the video by"};
        case F::Text3D:
            return {"design a 3D representation of", "create a 3D model of",
                    "generate a 3D asset of", "build a 3D model of",
                    "produce a 3D rendering of", "sculpt a 3D model of",
                    "craft a 3D representation of", "model a 3D version of",
                    "generate a 3D mesh of", "construct a 3D scene of",
                    "make a 3D model of", "design a 3D asset depicting"};
        case F::Image3D:
            return {"reconstruct a 3D model from the image of",
                    "turn the photo into a 3D model of",
                    "lift the image into a 3D model of",
                    "convert the picture into a 3D model of",
                    "build a 3D model from the photo of",
                    "create a 3D asset from the image of",
                    "derive a 3D mesh from the picture of",
                    "turn the image into a 3D rendering of",
                    "reconstruct 3D geometry from the photo of",
                    "generate a 3D model from the image of",
                    "convert the image into a 3D model of",
                    "produce a 3D model from the picture of"};
        case F::ImageDeblur:
            return {"deblur the image of", "remove the blur from the photo of",
                    "sharpen the blurry image of",
                    "fix the motion blur in the photo of",
                    "clean up the blur in the image of",
                    "restore sharpness to the photo of", "unblur the picture of",
                    "correct the blur in the image of", "recover a sharp image of",
                    "eliminate the blurriness from the photo of",
                    "deblur the photo of", "sharpen the out-of-focus shot of"};
        case F::ImageDerain:
            return {"derain the image of", "remove the rain from the photo of",
                    "clear the rain streaks from the image of",
                    "eliminate the rain effects in the picture of",
                    "take the rain out of the photo of",
                    "remove rain artifacts from the image of", "derain the photo of",
                    "clean the rain streaks off the picture of",
                    "restore the rainy photo of", "strip the rain from the image of",
                    "remove the downpour from the shot of",
                    "clear rain droplets from the photo of"};
        case F::ImageDenoise:
            return {"denoise the image of", "remove the noise from the photo of",
                    "clean up the grain in the image of",
                    "eliminate the noise in the picture of",
                    "reduce the graininess of the photo of",
                    "remove sensor noise from the image of", "denoise the photo of",
                    "smooth out the noise in the picture of",
                    "restore the noisy photo of",
                    "strip the speckle noise from the image of",
                    "clean the grainy shot of", "suppress the noise in the photo of"};
        case F::ImageSR:
            return {"upscale the image of", "super-resolve the photo of",
                    "increase the resolution of the image of",
                    "enhance the resolution of the picture of",
                    "upsample the photo of",
                    "produce a high-resolution version of the image of",
                    "upscale the photo of", "boost the resolution of the shot of",
                    "render a higher-resolution image of",
                    "sharpen and upscale the picture of",
                    "magnify the low-resolution photo of",
                    "super-resolve the image of"};
        case F::PoseEst:
            return {"estimate the pose of", "extract the body pose of",
                    "detect the pose keypoints of", "estimate the body posture of",
                    "compute the pose skeleton of", "identify the pose of",
                    "analyze the posture of", "locate the body joints of",
                    "estimate the skeletal pose of", "map the pose of",
                    "derive the pose keypoints of", "trace the body pose of"};
        case F::NormalEst:
            return {"estimate the surface normals of", "compute the normal map of",
                    "extract the surface normals from the image of",
                    "derive the normal map of", "generate the surface normal map of",
                    "predict the surface normals of",
                    "estimate surface orientation for", "compute per-pixel normals for",
                    "produce the normal map of", "infer the surface normals of",
                    "calculate the normal directions of", "map the surface normals of"};
        case F::CannyEst:
            return {"extract the canny edges of",
                    "detect the canny edges in the image of",
                    "compute the canny edge map of",
                    "run canny edge detection on the photo of",
                    "produce the canny edge map of", "trace the canny edges of",
                    "derive the canny contours of", "generate the canny edge map of",
                    "apply canny edge detection to the image of",
                    "outline the canny edges of", "extract the edge map of",
                    "compute the edge contours of"};
        case F::DepthEst:
            return {"estimate the depth map of",
                    "compute the depth of the scene showing",
                    "predict the depth map of", "derive the depth map of",
                    "estimate per-pixel depth for", "generate the depth map of",
                    "produce the depth map of", "infer the scene depth of",
                    "calculate the depth values of", "map the depth of",
                    "extract the depth map of", "measure the depth in the image of"};
        case F::ObjectDetect:
            return {"detect all instances of", "find every occurrence of",
                    "detect the objects matching", "locate all instances of",
                    "draw bounding boxes around", "detect and box",
                    "find and mark every", "spot all instances of",
                    "identify every instance of", "detect each appearance of",
                    "box all occurrences of", "run object detection for"};
        case F::ObjectSegment:
            return {"segment the region containing", "produce a segmentation mask for",
                    "segment out", "create a pixel mask for",
                    "segment every instance of", "isolate the mask of",
                    "generate a segmentation mask for",
                    "mask out the area covered by",
                    "segment the pixels belonging to",
                    "extract a segmentation mask of", "delineate the region of",
                    "run semantic segmentation on"};
        case F::VisualGround:
            return {"locate the region described by", "ground the phrase",
                    "find the image region referred to by",
                    "point out the region corresponding to",
                    "ground the referring expression",
                    "highlight the region described as",
                    "locate the area referred to as",
                    "find the part of the image described by",
                    "ground the description", "identify the region matching",
                    "mark the area described by",
                    "pinpoint the region referred to by"};
        case F::VideoRefSeg:
            return {"segment the object in the video described as",
                    "track and segment the video object matching",
                    "segment across the video frames the object described as",
                    "segment the video object referred to as",
                    "mask the object throughout the video matching",
                    "segment the subject in the footage described as",
                    "track the masked object in the video matching",
                    "produce video masks for the object described as",
                    "segment the referred object in the video matching",
                    "isolate the object across video frames described as",
                    "segment in every video frame the object described as",
                    "mask out the video object described as"};
        default:
            return {};
    }
}

// -- content grammar -------------------------------------------------

const std::vector<std::string>& scene_nouns() {
    static const std::vector<std::string> kNouns = {
        "lighthouse", "harbor",      "waterfall",   "meadow",     "orchard",
        "canyon",     "glacier",     "windmill",    "sailboat",   "observatory",
        "bakery",     "fountain",    "footbridge",  "temple",     "courtyard",
        "cottage",    "marketplace", "greenhouse",  "vineyard",   "archway",
        "lantern",    "carousel",    "treehouse",   "monastery",  "boardwalk",
        "aqueduct",   "amphitheater"};
    return kNouns;
}

const std::vector<std::string>& compound_nouns() {
    static const std::vector<std::string> kNouns = {
        "tide pool",     "wheat field",  "ice cave",    "paper kite",
        "stone bridge",  "clock tower",  "rose garden", "night bazaar",
        "river delta",   "mountain pass", "coral reef", "hot spring",
        "willow grove"};
    return kNouns;
}

const std::vector<std::string>& adjectives() {
    static const std::vector<std::string> kAdjectives = {
        "ancient", "vibrant",   "misty",   "sunlit",   "weathered", "ornate",
        "serene",  "bustling",  "crimson", "emerald",  "quiet",     "frosted",
        "golden",  "moonlit",   "rustic",  "gleaming", "overgrown", "painted",
        "marble",  "amber",     "silver",  "dusty",    "hidden",    "towering"};
    return kAdjectives;
}

const std::vector<std::string>& scene_details() {
    static const std::vector<std::string> kDetails = {
        "bathed in soft morning light",
        "framed by distant snowy peaks",
        "with lanterns strung overhead",
        "surrounded by wildflower fields",
        "reflected in a calm lake",
        "under a sky full of stars",
        "dusted with fresh snow",
        "wrapped in drifting fog",
        "lined with cobblestone paths",
        "shaded by old cypress trees",
        "decorated with paper garlands",
        "glowing warmly at dusk",
        "perched on a rocky cliff",
        "beside a winding river",
        "during a gentle autumn evening",
        "at the height of summer",
        "built from weathered timber",
        "overlooking a quiet bay",
        "with smoke curling from its chimney",
        "carved with intricate spiral patterns",
        "humming with evening activity",
        "strewn with fallen leaves"};
    return kDetails;
}

const std::vector<std::string>& person_nouns() {
    static const std::vector<std::string> kPeople = {
        "ballet dancer", "street performer", "violinist", "cyclist",
        "rock climber",  "gymnast",          "fencer",    "figure skater",
        "juggler",       "potter",           "archer",    "calligrapher"};
    return kPeople;
}

const std::vector<std::string>& short_person_nouns() {
    static const std::vector<std::string> kPeople = {
        "violinist", "cyclist", "gymnast", "fencer",
        "juggler",   "potter",  "archer",  "calligrapher"};
    return kPeople;
}

const std::vector<std::string>& target_objects() {
    static const std::vector<std::string> kObjects = {
        "red kayak",      "striped umbrella", "copper kettle", "wooden crate",
        "brass telescope", "vintage bicycle", "wicker basket", "stone statue",
        "glass bottle",   "paper crane",      "velvet armchair", "ceramic vase",
        "iron gate",      "canvas tent",      "rowing boat",   "tin robot"};
    return kObjects;
}

const std::vector<std::string>& short_target_objects() {
    static const std::vector<std::string> kObjects = {
        "kayak",  "umbrella", "kettle", "crate", "telescope", "bicycle",
        "basket", "statue",   "bottle", "vase",  "gate",      "tent"};
    return kObjects;
}

const std::vector<std::string>& locatives() {
    static const std::vector<std::string> kLocatives = {
        "near the fountain",    "by the old pier",     "in the courtyard",
        "at the market stall",  "beneath the archway", "on the terrace",
        "along the shoreline",  "beside the greenhouse", "under the awning",
        "at the trailhead"};
    return kLocatives;
}

const std::vector<std::string>& edit_actions() {
    static const std::vector<std::string> kActions = {
        "adding",    "removing", "recoloring", "brightening", "softening",
        "enlarging", "highlighting", "restyling", "tidying",   "warming up",
        "cooling down", "retinting"};
    return kActions;
}

const std::vector<std::string>& connectives() {
    static const std::vector<std::string> kConnectives = {
        "After that,",  "Next,",          "Then,",
        "In the following step,", "Following that,", "Subsequently,",
        "Once that is done,"};
    return kConnectives;
}

size_t count_words(std::string_view text) {
    size_t count = 0;
    bool in_word = false;
    for (char c : text) {
        bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!space && !in_word) ++count;
        in_word = !space;
    }
    return count;
}

template <typename T>
const T& pick(const std::vector<T>& pool, std::mt19937_64& rng) {
    std::uniform_int_distribution<size_t> dist(0, pool.size() - 1);
    return pool[dist(rng)];
}

std::string with_article(const std::string& np) {
    char first = static_cast<char>(std::tolower(static_cast<unsigned char>(np[0])));
    bool vowel = first == 'a' || first == 'e' || first == 'i' || first == 'o' ||
                 first == 'u';
    return (vowel ? "an " : "a ") + np;
}

enum class CoreStyle { Scene, Target, Person, EditAction };

CoreStyle core_style(const TaskKind& task) {
    switch (task.family()) {
        case TaskFamily::ImageEdit:
        case TaskFamily::VideoEdit:
            return CoreStyle::EditAction;
        case TaskFamily::PoseEst:
            return CoreStyle::Person;
        case TaskFamily::NormalEst:
        case TaskFamily::CannyEst:
        case TaskFamily::DepthEst:
        case TaskFamily::ObjectDetect:
        case TaskFamily::ObjectSegment:
        case TaskFamily::VisualGround:
        case TaskFamily::VideoRefSeg:
            return CoreStyle::Target;
        default:
            return CoreStyle::Scene;
    }
}

std::string scene_np(std::mt19937_64& rng, bool allow_adjective, bool allow_compound) {
    std::uniform_int_distribution<int> coin(0, 9);
    std::string noun = allow_compound && coin(rng) < 3 ? pick(compound_nouns(), rng)
                                                       : pick(scene_nouns(), rng);
    if (allow_adjective && coin(rng) < 7) noun = pick(adjectives(), rng) + " " + noun;
    return with_article(noun);
}

// Builds the refined-prompt body: at least target_words words, style
// matching what the task consumes.
std::string core_content(const TaskKind& task, size_t target_words,
                         std::mt19937_64& rng) {
    std::uniform_int_distribution<int> coin(0, 9);
    CoreStyle style = core_style(task);
    std::string out;
    // Tight budgets (the short band) fall back to single-word nouns.
    switch (style) {
        case CoreStyle::Scene:
            out = scene_np(rng, target_words >= 3, target_words >= 3);
            break;
        case CoreStyle::Person: {
            std::string np = target_words <= 2 ? pick(short_person_nouns(), rng)
                                               : pick(person_nouns(), rng);
            if (target_words >= 4) np = pick(adjectives(), rng) + " " + np;
            out = "the " + np;
            if (target_words >= 6) out += " " + pick(locatives(), rng);
            break;
        }
        case CoreStyle::Target: {
            if (target_words <= 2) {
                out = "the " + pick(short_target_objects(), rng);
                break;
            }
            std::string np = pick(target_objects(), rng);
            if (target_words >= 4 && coin(rng) < 6)
                np = pick(adjectives(), rng) + " " + np;
            out = "the " + np;
            if (target_words >= 6) out += " " + pick(locatives(), rng);
            break;
        }
        case CoreStyle::EditAction: {
            if (target_words <= 3) {
                out = pick(edit_actions(), rng) + " " +
                      with_article(pick(short_target_objects(), rng));
                break;
            }
            out = pick(edit_actions(), rng) + " " +
                  with_article(pick(target_objects(), rng));
            if (target_words >= 7) out += " " + pick(locatives(), rng);
            break;
        }
    }
    // One piece per pass keeps the overshoot below a band's width.
    while (count_words(out) < target_words) {
        if (style == CoreStyle::EditAction && coin(rng) < 4)
            out += ", and " + pick(edit_actions(), rng) + " " +
                   with_article(pick(target_objects(), rng));
        else
            out += ", " + pick(scene_details(), rng);
    }
    return out;
}

std::vector<std::string> short_prefixes() {
    std::vector<std::string> out;
    for (const std::string& prefix : shared_prefixes())
        if (count_words(prefix) == 1) out.push_back(prefix);
    return out;
}

}  // namespace

UnknownTaskError::UnknownTaskError(const TaskKind& task)
    : std::runtime_error("template bank does not cover task '" + task.name() + "'"),
      task_(task) {}

ExhaustedGrammarError::ExhaustedGrammarError(const TaskKind& task, size_t requested)
    : std::runtime_error("grammar for task '" + task.name() +
                         "' cannot produce " + std::to_string(requested) +
                         " distinct records") {}

ExhaustedGrammarError::ExhaustedGrammarError(const std::string& label, size_t requested)
    : std::runtime_error("grammar for '" + label + "' cannot produce " +
                         std::to_string(requested) + " distinct records") {}

bool TemplateBank::covers(const TaskKind& task) const {
    return tasks_[static_cast<size_t>(task.index())].has_value();
}

const TaskTemplates& TemplateBank::templates(const TaskKind& task) const {
    const auto& slot = tasks_[static_cast<size_t>(task.index())];
    if (!slot) throw UnknownTaskError(task);
    return *slot;
}

void TemplateBank::remove(const TaskKind& task) {
    tasks_[static_cast<size_t>(task.index())].reset();
}

TemplateBank::Rendered TemplateBank::render(const TaskKind& task, Complexity complexity,
                                            std::mt19937_64& rng) const {
    const TaskTemplates& templates_for_task = templates(task);
    bool edit_style = core_style(task) == CoreStyle::EditAction;
    size_t core_min = edit_style ? 3 : 2;

    std::string prefix;
    std::string phrase;
    if (complexity == Complexity::Short) {
        static const std::vector<std::string> kShortPrefixes = short_prefixes();
        prefix = pick(kShortPrefixes, rng);
        std::vector<std::string> eligible;
        for (const std::string& candidate : templates_for_task.phrases)
            if (count_words(candidate) + 1 + core_min <= 12) eligible.push_back(candidate);
        phrase = pick(eligible, rng);
    } else {
        prefix = pick(templates_for_task.prefixes, rng);
        phrase = pick(templates_for_task.phrases, rng);
    }

    size_t base = count_words(prefix) + count_words(phrase);
    size_t target;
    std::uniform_int_distribution<size_t> jitter(0, 7);
    switch (complexity) {
        case Complexity::Short:
            target = core_min;
            break;
        case Complexity::Moderate:
            target = std::max<size_t>(6, 20 - std::min<size_t>(base, 14));
            break;
        case Complexity::Extended:
        default:
            target = std::max<size_t>(26, 31 - std::min<size_t>(base, 31)) + jitter(rng);
            break;
    }

    std::string core = core_content(task, target, rng);
    Rendered out;
    out.instruction = prefix + " " + phrase + " " + core + ".";
    out.prompt = core + ".";
    return out;
}

TemplateBank TemplateBank::make_default() {
    TemplateBank bank;
    for (const TaskKind& task : all_tasks()) {
        TaskTemplates templates;
        templates.prefixes = shared_prefixes();
        templates.phrases = phrases_for(task);
        bank.tasks_[static_cast<size_t>(task.index())] = std::move(templates);
    }
    // Example pairs come from the grammar itself, three per complexity,
    // fixed seeds so the bank is identical across processes.
    for (const TaskKind& task : all_tasks()) {
        auto& templates = *bank.tasks_[static_cast<size_t>(task.index())];
        for (int k = 0; k < 9; ++k) {
            auto complexity = static_cast<Complexity>(k / 3);
            std::mt19937_64 rng(0xE7A3000000000000ull ^
                                (static_cast<uint64_t>(task.index()) << 8) ^
                                static_cast<uint64_t>(k));
            Rendered rendered = bank.render(task, complexity, rng);
            const TokenSpec& token = token_for(task);
            templates.example_pairs.push_back(ExamplePair{
                complexity, rendered.instruction,
                token.open_tag + rendered.prompt + token.close_tag});
        }
    }
    return bank;
}

const TemplateBank& TemplateBank::default_bank() {
    static const TemplateBank kBank = make_default();
    return kBank;
}

namespace bank_detail {

// Shared with the synthesizer and the rule router.
size_t word_count(std::string_view text) { return count_words(text); }

const std::vector<std::string>& chain_connectives() { return connectives(); }

}  // namespace bank_detail

}  // namespace olympus
