// SPDX-FileCopyrightText: 2026 The mdrnet Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MDRNET_DATASET_HPP
#define MDRNET_DATASET_HPP

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mdrnet/binvox.hpp"
#include "mdrnet/error.hpp"
#include "mdrnet/io.hpp"
#include "mdrnet/synthetic.hpp"
#include "mdrnet/voxel_grid.hpp"

namespace mdrnet {

inline constexpr std::string_view kManifestName = "manifest.tsv";

enum class Split { train, test };

inline std::string_view to_string(Split s) { return s == Split::train ? "train" : "test"; }

struct ManifestEntry {
    std::string path;  // relative to the dataset directory
    std::string class_name;
    Split split = Split::train;
};

// A grid with its 1-based class label.
struct LabeledShape {
    std::string id;
    VoxelGrid grid;
    int label = 0;
    std::string class_name;
    Split split = Split::train;
};

// One line per shape: "<relative-path>\t<class-name>\t<train|test>".
inline std::vector<ManifestEntry> parse_manifest(std::string_view text) {
    std::vector<ManifestEntry> entries;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos) {
            throw FormatError("manifest line " + std::to_string(line_no) + ": expected 3 tab-separated fields");
        }
        ManifestEntry e;
        e.path = line.substr(0, t1);
        e.class_name = line.substr(t1 + 1, t2 - t1 - 1);
        const std::string split = line.substr(t2 + 1);
        if (split == "train") {
            e.split = Split::train;
        } else if (split == "test") {
            e.split = Split::test;
        } else {
            throw FormatError("manifest line " + std::to_string(line_no) + ": split must be train or test");
        }
        if (e.path.empty() || e.class_name.empty()) {
            throw FormatError("manifest line " + std::to_string(line_no) + ": empty field");
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

inline std::string format_manifest(const std::vector<ManifestEntry>& entries) {
    std::string out;
    for (const auto& e : entries) {
        out += e.path + '\t' + e.class_name + '\t' + std::string(to_string(e.split)) + '\n';
    }
    return out;
}

// Shape id: file name without directory or extension.
inline std::string shape_id_from_path(std::string_view path) {
    return std::filesystem::path(path).stem().string();
}

class ShapeDataset {
public:
    ShapeDataset() = default;

    ShapeDataset(std::vector<std::string> classes, std::vector<LabeledShape> shapes)
        : classes_(std::move(classes)), shapes_(std::move(shapes)) {
        std::vector<std::string> ids;
        for (const auto& s : shapes_) {
            if (s.label < 1 || s.label > static_cast<int>(classes_.size())) {
                throw FormatError("shape " + s.id + " has label outside [1, " + std::to_string(classes_.size()) + "]");
            }
            ids.push_back(s.id);
        }
        std::sort(ids.begin(), ids.end());
        if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
            throw FormatError("duplicate shape id in dataset");
        }
    }

    // Classes are numbered by first appearance in the manifest.
    static ShapeDataset from_manifest(const std::vector<ManifestEntry>& entries,
                                      const std::filesystem::path& root) {
        std::vector<std::string> classes;
        std::vector<LabeledShape> shapes;
        for (const auto& e : entries) {
            auto it = std::find(classes.begin(), classes.end(), e.class_name);
            if (it == classes.end()) {
                classes.push_back(e.class_name);
                it = classes.end() - 1;
            }
            LabeledShape s;
            s.id = shape_id_from_path(e.path);
            s.grid = read_binvox_file((root / e.path).string());
            s.label = static_cast<int>(it - classes.begin()) + 1;
            s.class_name = e.class_name;
            s.split = e.split;
            shapes.push_back(std::move(s));
        }
        return ShapeDataset(std::move(classes), std::move(shapes));
    }

    static ShapeDataset load(const std::filesystem::path& dir) {
        return from_manifest(parse_manifest(read_text_file(dir / kManifestName)), dir);
    }

    const std::vector<std::string>& classes() const noexcept { return classes_; }
    std::size_t num_classes() const noexcept { return classes_.size(); }
    const std::vector<LabeledShape>& shapes() const noexcept { return shapes_; }

    std::vector<std::size_t> indices(Split split) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < shapes_.size(); ++i) {
            if (shapes_[i].split == split) out.push_back(i);
        }
        return out;
    }

private:
    std::vector<std::string> classes_;
    std::vector<LabeledShape> shapes_;
};

// Per-class split: the last max(1, floor(per_class / 4)) shapes of each class are test.
inline std::size_t synthetic_test_count(std::size_t per_class) {
    if (per_class < 2) {
        throw ConfigError("per-class count must be at least 2 to form a train/test split");
    }
    return std::max<std::size_t>(1, per_class / 4);
}

inline std::uint64_t synthetic_shape_seed(std::uint64_t seed, std::size_t class_index, std::size_t i) {
    return detail::splitmix64(seed ^ detail::splitmix64((static_cast<std::uint64_t>(class_index) << 32) | i));
}

// Writes <id>.binvox files plus manifest.tsv into dir.
inline std::vector<ManifestEntry> write_synthetic_dataset(const std::filesystem::path& dir,
                                                          const std::vector<std::string>& classes,
                                                          std::size_t per_class, std::uint64_t seed) {
    const std::size_t test_count = synthetic_test_count(per_class);
    for (const auto& c : classes) parse_synthetic_class(c);
    ensure_directory(dir);

    std::vector<ManifestEntry> entries;
    for (std::size_t ci = 0; ci < classes.size(); ++ci) {
        for (std::size_t i = 0; i < per_class; ++i) {
            char id[64];
            std::snprintf(id, sizeof id, "%s_%03zu", classes[ci].c_str(), i);
            const std::string file = std::string(id) + ".binvox";
            const VoxelGrid grid = generate_synthetic(classes[ci], synthetic_shape_seed(seed, ci, i));
            write_bytes_atomic(dir / file, save_binvox(grid));
            entries.push_back({file, classes[ci], i + test_count < per_class ? Split::train : Split::test});
        }
    }
    write_file_atomic(dir / kManifestName, format_manifest(entries));
    return entries;
}

} // namespace mdrnet

#endif // MDRNET_DATASET_HPP
