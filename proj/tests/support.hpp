#pragma once
// Shared test fixtures: temp dirs, deterministic image builders, a synthetic
// four-class world (colored classes + pixel triggers), and a call-counting
// oracle wrapper.

#include <unistd.h>

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "webart/common.hpp"
#include "webart/image.hpp"
#include "webart/image_io.hpp"
#include "webart/manifest.hpp"
#include "webart/oracle.hpp"
#include "webart/synthetic.hpp"

namespace webart::test {

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("webart-" + tag + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }

    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }

    const std::filesystem::path& path() const { return path_; }

    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

private:
    std::filesystem::path path_;
};

inline Image random_image(int w, int h, Rng& rng) {
    Image img(w, h, 3);
    for (auto& b : img.data) b = static_cast<std::uint8_t>(rng.bounded(256));
    return img;
}

// Distinctive exact-match trigger: a two-color checkerboard.
inline Image checker_patch(int side, Rgb a, Rgb b) {
    Image img(side, side, 3);
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            img.set_rgb(x, y, ((x + y) % 2 == 0) ? a : b);
        }
    }
    return img;
}

inline void paste(Image& dst, const Image& src, int ox, int oy) {
    for (int y = 0; y < src.height; ++y) {
        for (int x = 0; x < src.width; ++x) {
            dst.set_rgb(ox + x, oy + y, src.rgb(x, y));
        }
    }
}

// Four well-separated class colors; masking a small region with mid-gray
// never flips the nearest-color base rule.
inline std::vector<Rgb> world_colors() {
    return {Rgb{220, 40, 40}, Rgb{40, 220, 40}, Rgb{40, 40, 220}, Rgb{220, 220, 40}};
}

inline Image class_image(int cls, int side = 64) {
    return Image::filled(side, side, world_colors().at(static_cast<std::size_t>(cls)));
}

inline ImageSample make_sample(int cls, Split split, const std::string& path, int side = 64) {
    ImageSample s;
    s.image = class_image(cls, side);
    s.label = ClassLabel{cls, "class" + std::to_string(cls)};
    s.split = split;
    s.source_path = path;
    return s;
}

inline std::vector<ClassLabel> world_classes(int k = 4) {
    std::vector<ClassLabel> classes;
    for (int i = 0; i < k; ++i) classes.push_back(ClassLabel{i, "class" + std::to_string(i)});
    return classes;
}

// Writes a ready-to-load dataset: per-class solid images + manifest.
inline std::filesystem::path write_world_dataset(const std::filesystem::path& dir, int classes,
                                                 int train_per_class, int test_per_class,
                                                 int side = 64) {
    std::filesystem::create_directories(dir / "img");
    DatasetManifest m;
    m.classes = world_classes(classes);
    for (int c = 0; c < classes; ++c) {
        for (int i = 0; i < train_per_class + test_per_class; ++i) {
            const Split split = i < train_per_class ? Split::train : Split::test;
            const std::string rel =
                "img/c" + std::to_string(c) + "_" + std::to_string(i) + ".ppm";
            save_image(dir / rel, class_image(c, side));
            m.records.push_back(ManifestRecord{rel, c, split});
        }
    }
    const auto path = dir / "manifest.tsv";
    save_manifest(m, path);
    return path;
}

class CountingOracle final : public ClassifierOracle {
public:
    explicit CountingOracle(std::shared_ptr<ClassifierOracle> inner) : inner_(std::move(inner)) {}

    OracleDescriptor descriptor() const override { return inner_->descriptor(); }

    std::vector<Prediction> classify(const std::vector<Image>& images,
                                     const ClassPromptSet& prompts) const override {
        classify_calls++;
        classified_images += images.size();
        return inner_->classify(images, prompts);
    }

    bool has_embeddings() const override { return inner_->has_embeddings(); }

    std::vector<Embedding> embed_images(const std::vector<Image>& images) const override {
        embedded_images += images.size();
        return inner_->embed_images(images);
    }

    std::vector<Embedding> embed_texts(const std::vector<std::string>& texts) const override {
        embedded_texts += texts.size();
        return inner_->embed_texts(texts);
    }

    mutable std::size_t classify_calls = 0;
    mutable std::size_t classified_images = 0;
    mutable std::size_t embedded_images = 0;
    mutable std::size_t embedded_texts = 0;

private:
    std::shared_ptr<ClassifierOracle> inner_;
};

}  // namespace webart::test
