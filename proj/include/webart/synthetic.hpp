#pragma once
// Deterministic verification oracles. The trigger oracle predicts a fixed
// class whenever an exact pixel pattern appears anywhere in the image, which
// makes every downstream metric analytically checkable; the hash-embedding
// oracle is a contrastive stand-in whose embeddings are a pure function of
// content bytes.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "webart/common.hpp"
#include "webart/image.hpp"
#include "webart/imaging.hpp"
#include "webart/oracle.hpp"
#include "webart/sha256.hpp"

namespace webart {

// Normalized sub-rectangle of the image; used to restrict where a trigger may
// fire (e.g. top-center only).
struct NormRegion {
    double u0 = 0.0, v0 = 0.0, u1 = 1.0, v1 = 1.0;

    bool contains(double u, double v) const { return u >= u0 && u < u1 && v >= v0 && v < v1; }

    bool operator==(const NormRegion&) const = default;
};

struct TriggerRule {
    Image pattern;                     // exact pixel signature to scan for
    int class_id = 0;                  // predicted class when the pattern is found
    std::string text;                  // non-empty for text-channel triggers
    std::optional<NormRegion> region;  // restrict matches to this area (center test)

    bool operator==(const TriggerRule&) const = default;
};

struct SyntheticOracleSpec {
    std::vector<TriggerRule> triggers;  // precedence = list order
    std::vector<Rgb> base_colors;       // base rule: nearest mean color, one per class
    // When set, a trigger whose text appears quoted inside any prompt is
    // ignored; lets tests model defenders whose prompts neutralize known overlays.
    bool prompt_suppression = false;

    bool operator==(const SyntheticOracleSpec&) const = default;
};

inline TriggerRule make_text_trigger(const std::string& text, int class_id, int scale = 2) {
    TriggerRule rule;
    rule.pattern = render_text_artifact(text, TextStyle{scale});
    rule.class_id = class_id;
    rule.text = text;
    return rule;
}

namespace detail {

inline bool pattern_at(const Image& img, const Image& pat, int ox, int oy) {
    for (int y = 0; y < pat.height; ++y) {
        for (int x = 0; x < pat.width; ++x) {
            if (img.rgb(ox + x, oy + y) != pat.rgb(x, y)) return false;
        }
    }
    return true;
}

}  // namespace detail

// Exhaustive exact-match scan; returns the top-left of the first occurrence
// in row-major order.
inline std::optional<std::pair<int, int>> find_subpatch(const Image& img, const Image& pattern) {
    if (pattern.empty() || pattern.width > img.width || pattern.height > img.height) {
        return std::nullopt;
    }
    for (int y = 0; y + pattern.height <= img.height; ++y) {
        for (int x = 0; x + pattern.width <= img.width; ++x) {
            if (detail::pattern_at(img, pattern, x, y)) return std::make_pair(x, y);
        }
    }
    return std::nullopt;
}

class SyntheticOracle final : public ClassifierOracle {
public:
    explicit SyntheticOracle(SyntheticOracleSpec spec) : spec_(std::move(spec)) {
        if (spec_.base_colors.empty()) {
            fail(ErrorKind::validation, "synthetic oracle: base rule needs at least one class color");
        }
        for (std::size_t i = 0; i < spec_.triggers.size(); ++i) {
            const auto& t = spec_.triggers[i];
            if (t.pattern.empty()) fail(ErrorKind::validation, "synthetic oracle: empty trigger pattern");
            if (t.class_id < 0 || t.class_id >= static_cast<int>(spec_.base_colors.size())) {
                fail(ErrorKind::validation, "synthetic oracle: trigger class out of range");
            }
            // Identical patterns mapping to different classes have no
            // resolvable precedence; reject them.
            for (std::size_t j = 0; j < i; ++j) {
                if (spec_.triggers[j].pattern == t.pattern &&
                    spec_.triggers[j].class_id != t.class_id) {
                    fail(ErrorKind::validation,
                         "synthetic oracle: contradictory triggers share one pattern");
                }
            }
        }
        Sha256 h;
        for (const auto& t : spec_.triggers) {
            h.update(image_content_key(t.pattern));
            h.update(std::to_string(t.class_id));
            h.update(t.text);
            if (t.region) {
                h.update(format_double(t.region->u0) + format_double(t.region->v0) +
                         format_double(t.region->u1) + format_double(t.region->v1));
            }
        }
        for (const auto& c : spec_.base_colors) {
            h.update(std::to_string(c.r) + "," + std::to_string(c.g) + "," + std::to_string(c.b));
        }
        h.update(spec_.prompt_suppression ? "ps1" : "ps0");
        const auto digest = h.digest();
        identity_ = "synthetic:" + hex_string(digest.data(), 8);
    }

    OracleDescriptor descriptor() const override {
        return OracleDescriptor{OracleKind::synthetic, identity_};
    }

    std::vector<Prediction> classify(const std::vector<Image>& images,
                                     const ClassPromptSet& prompts) const override {
        std::vector<Prediction> out;
        out.reserve(images.size());
        for (const auto& img : images) out.push_back(classify_one(img, prompts));
        return out;
    }

    int base_class(const Image& img) const {
        const Rgb mean = mean_color(img);
        int best = 0;
        int best_d = color_distance2(mean, spec_.base_colors[0]);
        for (int c = 1; c < static_cast<int>(spec_.base_colors.size()); ++c) {
            const int d = color_distance2(mean, spec_.base_colors[static_cast<std::size_t>(c)]);
            if (d < best_d) {
                best = c;
                best_d = d;
            }
        }
        return best;
    }

    const SyntheticOracleSpec& spec() const { return spec_; }

private:
    bool trigger_suppressed(const TriggerRule& t, const ClassPromptSet& prompts) const {
        if (!spec_.prompt_suppression || t.text.empty()) return false;
        const std::string quoted = "\"" + to_lower(t.text) + "\"";
        for (const auto& p : prompts.prompts) {
            if (to_lower(p).find(quoted) != std::string::npos) return true;
        }
        return false;
    }

    Prediction classify_one(const Image& img, const ClassPromptSet& prompts) const {
        int chosen = -1;
        for (const auto& t : spec_.triggers) {
            if (trigger_suppressed(t, prompts)) continue;
            const auto hit = find_subpatch(img, t.pattern);
            if (!hit) continue;
            if (t.region) {
                const double cu = (hit->first + t.pattern.width / 2.0) / img.width;
                const double cv = (hit->second + t.pattern.height / 2.0) / img.height;
                if (!t.region->contains(cu, cv)) continue;
            }
            chosen = t.class_id;
            break;
        }
        if (chosen < 0) chosen = base_class(img);
        Prediction p;
        p.scores.assign(spec_.base_colors.size(), 0.0);
        p.scores[static_cast<std::size_t>(chosen)] = 1.0;
        p.argmax = chosen;
        return p;
    }

    SyntheticOracleSpec spec_;
    std::string identity_;
};

inline std::shared_ptr<SyntheticOracle> make_synthetic_oracle(SyntheticOracleSpec spec) {
    return std::make_shared<SyntheticOracle>(std::move(spec));
}

// Contrastive oracle whose embeddings are seeded hashes of the input bytes.
// No semantic content, but fully deterministic, which is what retrieval and
// scoring equivalence tests need.
class HashEmbeddingOracle final : public ClassifierOracle {
public:
    HashEmbeddingOracle(int dim, std::uint64_t seed, double logit_scale = 100.0)
        : dim_(dim), seed_(seed), logit_scale_(logit_scale) {
        if (dim_ < 2) fail(ErrorKind::validation, "hash embedding oracle: dim must be >= 2");
    }

    OracleDescriptor descriptor() const override {
        return OracleDescriptor{OracleKind::contrastive,
                                "hash-emb:" + std::to_string(dim_) + ":" + std::to_string(seed_)};
    }

    bool has_embeddings() const override { return true; }

    std::vector<Embedding> embed_images(const std::vector<Image>& images) const override {
        std::vector<Embedding> out;
        out.reserve(images.size());
        for (const auto& img : images) out.push_back(embed_bytes("img:" + image_content_key(img)));
        return out;
    }

    std::vector<Embedding> embed_texts(const std::vector<std::string>& texts) const override {
        std::vector<Embedding> out;
        out.reserve(texts.size());
        for (const auto& t : texts) out.push_back(embed_bytes("txt:" + t));
        return out;
    }

    std::vector<Prediction> classify(const std::vector<Image>& images,
                                     const ClassPromptSet& prompts) const override {
        const auto prompt_emb = embed_texts(prompts.prompts);
        const auto image_emb = embed_images(images);
        std::vector<Prediction> out;
        out.reserve(images.size());
        for (const auto& e : image_emb) {
            out.push_back(contrastive_prediction(e, prompt_emb, logit_scale_));
        }
        return out;
    }

private:
    Embedding embed_bytes(std::string_view bytes) const {
        Rng rng(seed_ ^ fnv1a64(bytes));
        Embedding v(static_cast<std::size_t>(dim_));
        for (double& x : v) x = rng.uniform01() * 2.0 - 1.0;
        l2_normalize(v);
        return v;
    }

    int dim_;
    std::uint64_t seed_;
    double logit_scale_;
};

}  // namespace webart
