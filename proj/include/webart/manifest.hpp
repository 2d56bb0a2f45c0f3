#pragma once
// Downstream dataset model: class labels, train/test records, sample loading,
// and opposing-set construction (every sample whose label differs from the
// attack's target class).

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "webart/common.hpp"
#include "webart/image.hpp"
#include "webart/image_io.hpp"

namespace webart {

struct ClassLabel {
    int id = 0;
    std::string name;

    bool operator==(const ClassLabel&) const = default;
};

enum class Split { train, test };

inline const char* split_name(Split s) { return s == Split::train ? "train" : "test"; }

inline Split parse_split(std::string_view s) {
    if (s == "train") return Split::train;
    if (s == "test") return Split::test;
    fail(ErrorKind::parse, "unknown split '" + std::string(s) + "'");
}

struct ManifestRecord {
    std::string path;  // relative to the manifest's root
    int label_id = 0;
    Split split = Split::train;

    bool operator==(const ManifestRecord&) const = default;
};

struct ImageSample {
    Image image;
    ClassLabel label;
    Split split = Split::train;
    std::string source_path;
};

inline constexpr int kMinSampleSide = 32;

struct DatasetManifest {
    std::vector<ClassLabel> classes;
    std::vector<ManifestRecord> records;
    std::filesystem::path root;  // directory record paths resolve against

    int class_count() const { return static_cast<int>(classes.size()); }

    const ClassLabel& class_by_id(int id) const {
        if (id < 0 || id >= class_count()) {
            fail(ErrorKind::validation, "class id out of range: " + std::to_string(id));
        }
        return classes[static_cast<std::size_t>(id)];
    }

    const ClassLabel& class_by_name(std::string_view name) const {
        const std::string lowered = to_lower(name);
        for (const auto& c : classes) {
            if (to_lower(c.name) == lowered) return c;
        }
        fail(ErrorKind::validation, "unknown class name '" + std::string(name) + "'");
    }

    std::vector<std::string> class_names() const {
        std::vector<std::string> names;
        names.reserve(classes.size());
        for (const auto& c : classes) names.push_back(c.name);
        return names;
    }
};

inline void validate_manifest(const DatasetManifest& m) {
    if (m.classes.empty()) fail(ErrorKind::validation, "manifest: no classes");
    std::set<std::string> seen_names;
    for (std::size_t i = 0; i < m.classes.size(); ++i) {
        if (m.classes[i].id != static_cast<int>(i)) {
            fail(ErrorKind::validation, "manifest: class ids must be dense 0..K-1");
        }
        if (m.classes[i].name.empty()) fail(ErrorKind::validation, "manifest: empty class name");
        if (!seen_names.insert(to_lower(m.classes[i].name)).second) {
            fail(ErrorKind::validation,
                 "manifest: duplicate class name '" + m.classes[i].name + "'");
        }
    }
    std::set<std::string> seen_paths;
    std::map<int, int> train_count, test_count;
    for (const auto& r : m.records) {
        if (r.label_id < 0 || r.label_id >= m.class_count()) {
            fail(ErrorKind::validation,
                 "manifest: record '" + r.path + "' has label " + std::to_string(r.label_id) +
                     " outside 0.." + std::to_string(m.class_count() - 1));
        }
        if (!seen_paths.insert(r.path).second) {
            fail(ErrorKind::validation, "manifest: duplicate record path '" + r.path + "'");
        }
        (r.split == Split::train ? train_count : test_count)[r.label_id]++;
    }
    for (const auto& c : m.classes) {
        if (train_count[c.id] == 0 || test_count[c.id] == 0) {
            fail(ErrorKind::validation,
                 "manifest: class '" + c.name + "' needs at least one train and one test record");
        }
    }
}

// Format: header line `#classes: name0,name1,...`, then one record per line
// `relative_path<TAB>label_id<TAB>split`.
inline DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "manifest file not found: " + path.string());
    DatasetManifest m;
    m.root = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    std::string line;
    int line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        if (line.rfind("#classes:", 0) == 0) {
            if (have_header) fail(ErrorKind::parse, path.string() + ": duplicate #classes header");
            have_header = true;
            const auto names = split(trim(line.substr(9)), ',');
            for (std::size_t i = 0; i < names.size(); ++i) {
                m.classes.push_back(ClassLabel{static_cast<int>(i), trim(names[i])});
            }
            continue;
        }
        if (line[0] == '#') continue;
        const auto fields = split(line, '\t');
        if (fields.size() != 3) {
            fail(ErrorKind::parse, path.string() + ":" + std::to_string(line_no) +
                                       ": expected path<TAB>label<TAB>split");
        }
        ManifestRecord rec;
        rec.path = fields[0];
        try {
            rec.label_id = std::stoi(fields[1]);
        } catch (const std::exception&) {
            fail(ErrorKind::parse, path.string() + ":" + std::to_string(line_no) +
                                       ": label '" + fields[1] + "' is not an integer");
        }
        rec.split = parse_split(trim(fields[2]));
        m.records.push_back(std::move(rec));
    }
    if (!have_header) fail(ErrorKind::parse, path.string() + ": missing #classes header");
    validate_manifest(m);
    return m;
}

inline void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
    validate_manifest(m);
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write manifest: " + path.string());
    out << "#classes: ";
    for (std::size_t i = 0; i < m.classes.size(); ++i) {
        if (i) out << ",";
        out << m.classes[i].name;
    }
    out << "\n";
    for (const auto& r : m.records) {
        out << r.path << "\t" << r.label_id << "\t" << split_name(r.split) << "\n";
    }
}

inline ImageSample load_sample(const DatasetManifest& m, const ManifestRecord& rec) {
    ImageSample s;
    s.image = load_image(m.root / rec.path);
    if (s.image.width < kMinSampleSide || s.image.height < kMinSampleSide) {
        fail(ErrorKind::validation, "sample '" + rec.path + "' smaller than " +
                                        std::to_string(kMinSampleSide) + "px per side");
    }
    s.label = m.class_by_id(rec.label_id);
    s.split = rec.split;
    s.source_path = rec.path;
    return s;
}

// Record selection for the opposing set: all records of `split` whose label
// differs from target, at most per_class_cap per class (uniform without
// replacement, seeded), output in manifest order.
inline std::vector<ManifestRecord> opposing_records(const DatasetManifest& m, int target_class,
                                                    Split split, std::size_t per_class_cap,
                                                    std::uint64_t seed) {
    m.class_by_id(target_class);  // validates target
    if (per_class_cap < 1) fail(ErrorKind::validation, "opposing_records: per_class_cap must be >= 1");
    std::vector<ManifestRecord> out;
    for (const auto& cls : m.classes) {
        if (cls.id == target_class) continue;
        std::vector<const ManifestRecord*> pool;
        for (const auto& r : m.records) {
            if (r.label_id == cls.id && r.split == split) pool.push_back(&r);
        }
        if (pool.empty()) continue;
        Rng rng(seed ^ fnv1a64("opposing/" + std::to_string(cls.id)));
        for (std::size_t i : sample_indices(pool.size(), per_class_cap, rng)) {
            out.push_back(*pool[i]);
        }
    }
    if (out.empty()) {
        fail(ErrorKind::validation, "opposing_records: no opposing samples for target class " +
                                        std::to_string(target_class));
    }
    return out;
}

inline std::vector<ImageSample> opposing_set(const DatasetManifest& m, int target_class,
                                             Split split, std::size_t per_class_cap,
                                             std::uint64_t seed) {
    std::vector<ImageSample> samples;
    for (const auto& rec : opposing_records(m, target_class, split, per_class_cap, seed)) {
        samples.push_back(load_sample(m, rec));
    }
    return samples;
}

}  // namespace webart
