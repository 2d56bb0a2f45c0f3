#pragma once
// Candidate extraction from an image-text corpus: prompt-based embedding
// retrieval with a top-fraction cutoff, then OCR-driven categorization into
// text / graphics-with-text / graphics-without-text artifact sets.

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "webart/artifact.hpp"
#include "webart/common.hpp"
#include "webart/image_io.hpp"
#include "webart/ocr.hpp"
#include "webart/oracle.hpp"
#include "webart/serialize.hpp"
#include "webart/sha256.hpp"

namespace webart {

struct CorpusRecord {
    std::string id;  // relative path or tar member name
    Image image;
    std::string caption;
};

// Streams (image, caption) pairs from a directory of image files or a tar
// shard. Captions come from a sibling .txt with the same stem. Iteration
// order is lexicographic by id, so corpus order is reproducible.
class CorpusReader {
public:
    static CorpusReader open(const std::filesystem::path& path) {
        CorpusReader reader;
        if (std::filesystem::is_directory(path)) {
            std::vector<std::filesystem::path> files;
            for (const auto& entry : std::filesystem::recursive_directory_iterator(path)) {
                if (entry.is_regular_file() && is_image_filename(entry.path())) {
                    files.push_back(entry.path());
                }
            }
            std::sort(files.begin(), files.end());
            for (const auto& f : files) {
                Entry e;
                e.id = std::filesystem::relative(f, path).generic_string();
                e.image_path = f;
                auto caption_path = f;
                caption_path.replace_extension(".txt");
                if (std::filesystem::exists(caption_path)) e.caption_path = caption_path;
                reader.entries_.push_back(std::move(e));
            }
        } else if (std::filesystem::is_regular_file(path)) {
            std::map<std::string, std::string> captions;
            std::map<std::string, std::string> images;
            for (auto& member : read_tar(path)) {
                const std::filesystem::path name(member.name);
                if (is_image_filename(name)) {
                    images[member.name] = std::move(member.bytes);
                } else if (to_lower(name.extension().string()) == ".txt") {
                    auto stem = name;
                    stem.replace_extension("");
                    captions[stem.generic_string()] = trim(member.bytes);
                }
            }
            for (auto& [name, bytes] : images) {
                Entry e;
                e.id = name;
                e.inline_bytes = std::move(bytes);
                auto stem = std::filesystem::path(name);
                stem.replace_extension("");
                const auto it = captions.find(stem.generic_string());
                if (it != captions.end()) e.inline_caption = it->second;
                reader.entries_.push_back(std::move(e));
            }
        } else {
            fail(ErrorKind::io, "corpus path not found: " + path.string());
        }
        return reader;
    }

    std::size_t size() const { return entries_.size(); }

    CorpusRecord record(std::size_t i) const {
        const Entry& e = entries_.at(i);
        CorpusRecord r;
        r.id = e.id;
        if (e.inline_bytes) {
            r.image = decode_image(*e.inline_bytes, e.id);
        } else {
            r.image = load_image(e.image_path);
        }
        if (e.inline_caption) {
            r.caption = *e.inline_caption;
        } else if (e.caption_path) {
            r.caption = trim(read_file_bytes(*e.caption_path));
        }
        return r;
    }

private:
    struct Entry {
        std::string id;
        std::filesystem::path image_path;
        std::optional<std::filesystem::path> caption_path;
        std::optional<std::string> inline_bytes;
        std::optional<std::string> inline_caption;
    };

    std::vector<Entry> entries_;
};

// Embedding cache keyed by (oracle identity, content hash). Corpus passes
// dominate mining runtime, so repeated runs hit this instead of the oracle.
class EmbeddingCache {
public:
    EmbeddingCache() = default;

    explicit EmbeddingCache(std::filesystem::path dir) : dir_(std::move(dir)) {
        if (!dir_.empty()) std::filesystem::create_directories(dir_);
    }

    bool enabled() const { return !dir_.empty(); }

    std::optional<Embedding> get(const std::string& oracle_identity,
                                 const std::string& content_hash) const {
        if (!enabled()) return std::nullopt;
        const auto path = entry_path(oracle_identity, content_hash);
        if (!std::filesystem::exists(path)) return std::nullopt;
        const json j = parse_json_file(path);
        return j.at("embedding").get<Embedding>();
    }

    void put(const std::string& oracle_identity, const std::string& content_hash,
             const Embedding& e) const {
        if (!enabled()) return;
        const auto path = entry_path(oracle_identity, content_hash);
        std::filesystem::create_directories(path.parent_path());
        write_json_file(path, json{{"v", 1}, {"embedding", e}});
    }

private:
    static std::string sanitize(const std::string& s) {
        std::string out;
        for (char c : s) {
            const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                            (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
            out.push_back(ok ? c : '_');
        }
        return out;
    }

    std::filesystem::path entry_path(const std::string& oracle_identity,
                                     const std::string& content_hash) const {
        return dir_ / sanitize(oracle_identity) / (content_hash + ".json");
    }

    std::filesystem::path dir_;
};

struct MiningConfig {
    std::vector<std::string> prompts;       // retrieval prompt set P
    double keep_fraction = 0.01;            // top fraction retained
    double ocr_threshold = kDefaultOcrThreshold;
    std::vector<std::string> class_names;   // downstream names to filter out
};

inline void validate_mining_config(const MiningConfig& cfg) {
    if (cfg.prompts.empty()) fail(ErrorKind::validation, "mining: prompt set is empty");
    if (!(cfg.keep_fraction > 0.0 && cfg.keep_fraction <= 1.0)) {
        fail(ErrorKind::validation, "mining: keep_fraction must be in (0, 1]");
    }
}

struct RetrievedCandidate {
    CorpusRecord record;
    double similarity = 0.0;  // max over prompts of cosine similarity
};

// Top ceil(keep_fraction * N) corpus images by prompt similarity. Ties break
// by corpus order, so the result is invariant to how records are streamed.
inline std::vector<RetrievedCandidate> retrieve_candidates(
    const CorpusReader& corpus, const MiningConfig& cfg, const ClassifierOracle& oracle,
    const EmbeddingCache& cache = {}) {
    validate_mining_config(cfg);
    if (corpus.size() == 0) fail(ErrorKind::validation, "mining: empty corpus");
    if (!oracle.has_embeddings()) {
        fail(ErrorKind::oracle, "mining: retrieval needs a contrastive oracle with embeddings");
    }
    const auto prompt_embeddings = oracle.embed_texts(cfg.prompts);
    const std::string oracle_id = oracle.descriptor().identity;

    struct Scored {
        std::size_t order;
        double similarity;
    };
    std::vector<Scored> scored;
    std::vector<CorpusRecord> records;
    scored.reserve(corpus.size());
    records.reserve(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        CorpusRecord rec = corpus.record(i);
        const std::string content_hash = sha256_hex(image_content_key(rec.image));
        Embedding emb;
        if (auto cached = cache.get(oracle_id, content_hash)) {
            emb = std::move(*cached);
        } else {
            emb = oracle.embed_images({rec.image}).at(0);
            cache.put(oracle_id, content_hash, emb);
        }
        double best = -2.0;
        for (const auto& p : prompt_embeddings) best = std::max(best, cosine(emb, p));
        scored.push_back(Scored{i, best});
        records.push_back(std::move(rec));
    }
    std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.order < b.order;
    });
    const auto keep = static_cast<std::size_t>(
        std::min<double>(static_cast<double>(corpus.size()),
                         std::ceil(cfg.keep_fraction * static_cast<double>(corpus.size()))));
    std::vector<RetrievedCandidate> out;
    out.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        out.push_back(RetrievedCandidate{std::move(records[scored[i].order]), scored[i].similarity});
    }
    return out;
}

struct MiningResult {
    std::vector<Artifact> text;
    std::vector<Artifact> graphics_text;
    std::vector<Artifact> graphics_no_text;
    bool degraded_ocr = false;  // detector unavailable; everything landed in graphics-no-text
};

inline bool matches_class_name(const std::string& text, const std::vector<std::string>& class_names) {
    const std::string probe = to_lower(trim(text));
    for (const auto& name : class_names) {
        if (probe == to_lower(trim(name))) return true;
    }
    return false;
}

// Splits retrieved candidates into the three artifact sets. Each detected
// span is also re-rendered as a standalone text artifact unless it exactly
// matches a downstream class name (the typographic-attack filter); a graphics
// candidate whose every span is such a match is dropped entirely.
inline MiningResult categorize(const std::vector<RetrievedCandidate>& candidates,
                               const std::vector<std::string>& class_names,
                               const TextDetector* detector,
                               double ocr_threshold = kDefaultOcrThreshold) {
    MiningResult result;
    const bool degraded = (detector == nullptr || !detector->available());
    result.degraded_ocr = degraded;
    std::map<std::string, std::string> text_seen;  // lowercase text -> artifact id
    for (const auto& cand : candidates) {
        Provenance prov{cand.record.id, cand.similarity};
        if (degraded) {
            result.graphics_no_text.push_back(
                make_graphics_artifact("g:" + cand.record.id, cand.record.image, {}, prov));
            continue;
        }
        const auto spans = detect_text(*detector, cand.record.image, ocr_threshold);
        if (spans.empty()) {
            result.graphics_no_text.push_back(
                make_graphics_artifact("g:" + cand.record.id, cand.record.image, {}, prov));
            continue;
        }
        std::vector<std::string> kept_spans;
        for (std::size_t k = 0; k < spans.size(); ++k) {
            const std::string& span_text = spans[k].text;
            if (matches_class_name(span_text, class_names)) continue;
            kept_spans.push_back(span_text);
            const std::string key = to_lower(trim(span_text));
            if (text_seen.count(key)) continue;  // one text artifact per distinct string
            const std::string id = "t:" + cand.record.id + ":" + std::to_string(k);
            text_seen[key] = id;
            result.text.push_back(make_text_artifact(id, span_text, prov));
        }
        if (kept_spans.empty()) continue;  // carried only class-name text
        result.graphics_text.push_back(
            make_graphics_artifact("g:" + cand.record.id, cand.record.image, kept_spans, prov));
    }
    return result;
}

inline std::vector<Artifact> all_artifacts(const MiningResult& r) {
    std::vector<Artifact> out;
    out.reserve(r.text.size() + r.graphics_text.size() + r.graphics_no_text.size());
    out.insert(out.end(), r.text.begin(), r.text.end());
    out.insert(out.end(), r.graphics_text.begin(), r.graphics_text.end());
    out.insert(out.end(), r.graphics_no_text.begin(), r.graphics_no_text.end());
    return out;
}

inline void to_json(json& j, const MiningResult& r) {
    j = json{{"schema", "v1"},
             {"text", r.text},
             {"graphics_text", r.graphics_text},
             {"graphics_no_text", r.graphics_no_text},
             {"degraded_ocr", r.degraded_ocr}};
}

inline void from_json(const json& j, MiningResult& r) {
    r.text = j.at("text").get<std::vector<Artifact>>();
    r.graphics_text = j.at("graphics_text").get<std::vector<Artifact>>();
    r.graphics_no_text = j.at("graphics_no_text").get<std::vector<Artifact>>();
    r.degraded_ocr = j.at("degraded_ocr").get<bool>();
}

}  // namespace webart
