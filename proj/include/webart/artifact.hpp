#pragma once
// Artifact: an overlay payload mined from a web corpus. Either a text string
// (rendered at insertion time) or a pixel patch, possibly with alpha.

#include <optional>
#include <string>
#include <vector>

#include "webart/common.hpp"
#include "webart/image.hpp"
#include "webart/imaging.hpp"

namespace webart {

enum class ArtifactCategory { text, graphics_text, graphics_no_text };

inline const char* category_name(ArtifactCategory c) {
    switch (c) {
        case ArtifactCategory::text: return "text";
        case ArtifactCategory::graphics_text: return "graphics-text";
        case ArtifactCategory::graphics_no_text: return "graphics-no-text";
    }
    fail(ErrorKind::validation, "bad artifact category");
}

inline ArtifactCategory parse_category(std::string_view s) {
    if (s == "text") return ArtifactCategory::text;
    if (s == "graphics-text") return ArtifactCategory::graphics_text;
    if (s == "graphics-no-text") return ArtifactCategory::graphics_no_text;
    fail(ErrorKind::parse, "unknown artifact category '" + std::string(s) + "'");
}

struct Provenance {
    std::string source_id;    // corpus record the artifact came from
    double similarity = 0.0;  // retrieval similarity score

    bool operator==(const Provenance&) const = default;
};

struct Artifact {
    std::string id;
    ArtifactCategory category = ArtifactCategory::graphics_no_text;
    std::string text;                        // payload when category == text
    Image patch;                             // payload otherwise
    std::vector<std::string> detected_text;  // OCR spans found on the patch
    Provenance provenance;

    bool is_text() const { return category == ArtifactCategory::text; }

    bool operator==(const Artifact&) const = default;
};

inline void validate_artifact(const Artifact& a) {
    if (a.id.empty()) fail(ErrorKind::validation, "artifact: empty id");
    if (a.is_text()) {
        if (a.text.empty()) fail(ErrorKind::validation, "artifact '" + a.id + "': text payload empty");
        if (!a.patch.empty()) {
            fail(ErrorKind::validation, "artifact '" + a.id + "': text artifacts carry no patch");
        }
    } else {
        if (a.patch.empty()) fail(ErrorKind::validation, "artifact '" + a.id + "': missing patch");
        if (!a.text.empty()) {
            fail(ErrorKind::validation, "artifact '" + a.id + "': graphics artifacts carry no string");
        }
        if (a.category == ArtifactCategory::graphics_no_text && !a.detected_text.empty()) {
            fail(ErrorKind::validation,
                 "artifact '" + a.id + "': graphics-no-text must have empty detected_text");
        }
        if (a.category == ArtifactCategory::graphics_text && a.detected_text.empty()) {
            fail(ErrorKind::validation,
                 "artifact '" + a.id + "': graphics-text must have non-empty detected_text");
        }
    }
}

// The pixel payload the compositor inserts; text artifacts render on demand.
inline Image artifact_payload(const Artifact& a, const TextStyle& style = {}) {
    if (a.is_text()) return render_text_artifact(a.text, style);
    return a.patch;
}

inline Artifact make_text_artifact(const std::string& id, const std::string& text,
                                   Provenance provenance = {}) {
    Artifact a;
    a.id = id;
    a.category = ArtifactCategory::text;
    a.text = text;
    a.provenance = std::move(provenance);
    validate_artifact(a);
    return a;
}

inline Artifact make_graphics_artifact(const std::string& id, Image patch,
                                       std::vector<std::string> detected_text,
                                       Provenance provenance = {}) {
    Artifact a;
    a.id = id;
    a.category = detected_text.empty() ? ArtifactCategory::graphics_no_text
                                       : ArtifactCategory::graphics_text;
    a.patch = std::move(patch);
    a.detected_text = std::move(detected_text);
    a.provenance = std::move(provenance);
    validate_artifact(a);
    return a;
}

}  // namespace webart
