#pragma once
// Classifier oracle abstraction: any black-box predictor mapping an image and
// a per-class prompt set to per-class scores. Realizations live in
// synthetic.hpp (deterministic verification oracles) and remote.hpp (HTTP
// adapters for contrastive / generative checkpoints).

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "webart/common.hpp"
#include "webart/image.hpp"
#include "webart/manifest.hpp"

namespace webart {

struct ClassPromptSet {
    std::vector<std::string> prompts;  // one per class, index == class id
    std::vector<std::string> names;    // bare class names; empty falls back to prompts
    // Question template for generative oracles; "{names}" expands to the
    // comma-separated class names.
    std::string instruction = "Answer with exactly one of: {names}.";

    int class_count() const { return static_cast<int>(prompts.size()); }

    const std::vector<std::string>& answer_names() const {
        return names.empty() ? prompts : names;
    }

    bool operator==(const ClassPromptSet&) const = default;
};

inline constexpr const char* kDefaultPromptTemplate = "a photo of a {name}";

inline std::string apply_prompt_template(const std::string& tmpl, const std::string& name) {
    std::string out = tmpl;
    const std::string slot = "{name}";
    std::size_t pos = 0;
    while ((pos = out.find(slot, pos)) != std::string::npos) {
        out.replace(pos, slot.size(), name);
        pos += name.size();
    }
    return out;
}

inline ClassPromptSet make_prompts(const std::vector<ClassLabel>& classes,
                                   const std::string& tmpl = kDefaultPromptTemplate) {
    ClassPromptSet set;
    for (const auto& c : classes) {
        set.prompts.push_back(apply_prompt_template(tmpl, c.name));
        set.names.push_back(c.name);
        if (set.prompts.back().empty()) {
            fail(ErrorKind::validation, "prompt for class '" + c.name + "' is empty");
        }
    }
    return set;
}

struct Prediction {
    std::vector<double> scores;  // per-class; probabilities or indicators
    std::vector<double> logits;  // raw similarities when the oracle has them
    int argmax = 0;
    bool unparseable = false;  // generative answer could not be mapped to a class
};

// Tie rule: lowest class id wins.
inline int argmax_class(const std::vector<double>& scores) {
    if (scores.empty()) fail(ErrorKind::validation, "argmax_class: empty scores");
    int best = 0;
    for (int i = 1; i < static_cast<int>(scores.size()); ++i) {
        if (scores[static_cast<std::size_t>(i)] > scores[static_cast<std::size_t>(best)]) best = i;
    }
    return best;
}

inline std::vector<double> softmax(const std::vector<double>& logits) {
    double max_logit = logits[0];
    for (double v : logits) max_logit = std::max(max_logit, v);
    std::vector<double> out(logits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - max_logit);
        total += out[i];
    }
    for (double& v : out) v /= total;
    return out;
}

using Embedding = std::vector<double>;

inline double dot(const Embedding& a, const Embedding& b) {
    if (a.size() != b.size()) fail(ErrorKind::validation, "dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline void l2_normalize(Embedding& v) {
    double norm = std::sqrt(dot(v, v));
    if (norm == 0.0) {
        // Zero vectors normalize to a fixed unit basis vector.
        if (!v.empty()) v[0] = 1.0;
        return;
    }
    for (double& x : v) x /= norm;
}

inline double cosine(const Embedding& a, const Embedding& b) { return dot(a, b); }

enum class OracleKind { contrastive, generative, synthetic };

inline const char* oracle_kind_name(OracleKind k) {
    switch (k) {
        case OracleKind::contrastive: return "contrastive";
        case OracleKind::generative: return "generative";
        case OracleKind::synthetic: return "synthetic";
    }
    fail(ErrorKind::validation, "bad oracle kind");
}

struct OracleDescriptor {
    OracleKind kind = OracleKind::synthetic;
    std::string identity;  // checkpoint name or synthetic spec hash

    bool operator==(const OracleDescriptor&) const = default;
};

class ClassifierOracle {
public:
    virtual ~ClassifierOracle() = default;

    virtual OracleDescriptor descriptor() const = 0;

    // Order-aligned predictions; deterministic for fixed oracle + inputs.
    virtual std::vector<Prediction> classify(const std::vector<Image>& images,
                                             const ClassPromptSet& prompts) const = 0;

    virtual bool has_embeddings() const { return false; }

    virtual std::vector<Embedding> embed_images(const std::vector<Image>&) const {
        fail(ErrorKind::oracle, "oracle '" + descriptor().identity + "' has no embedding support");
    }

    virtual std::vector<Embedding> embed_texts(const std::vector<std::string>&) const {
        fail(ErrorKind::oracle, "oracle '" + descriptor().identity + "' has no embedding support");
    }
};

inline std::vector<Prediction> classify_batch(const ClassifierOracle& oracle,
                                              const std::vector<Image>& images,
                                              const ClassPromptSet& prompts) {
    if (images.empty()) fail(ErrorKind::validation, "classify_batch: empty batch");
    if (prompts.prompts.empty()) fail(ErrorKind::validation, "classify_batch: empty prompt set");
    auto preds = oracle.classify(images, prompts);
    if (preds.size() != images.size()) {
        fail(ErrorKind::oracle, "classify_batch: oracle returned " + std::to_string(preds.size()) +
                                    " predictions for " + std::to_string(images.size()) + " images");
    }
    return preds;
}

// Contrastive scoring shared by adapters: scores = softmax(scale * cosine).
inline Prediction contrastive_prediction(const Embedding& image_embedding,
                                         const std::vector<Embedding>& prompt_embeddings,
                                         double logit_scale) {
    Prediction p;
    p.logits.reserve(prompt_embeddings.size());
    for (const auto& t : prompt_embeddings) {
        p.logits.push_back(logit_scale * cosine(image_embedding, t));
    }
    p.scores = softmax(p.logits);
    p.argmax = argmax_class(p.scores);
    return p;
}

}  // namespace webart
