// SPDX-FileCopyrightText: 2026 The mdrnet Authors
// SPDX-License-Identifier: Apache-2.0

// mdrnet: dataset synthesis, MDR export, training, descriptor extraction and evaluation.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mdrnet/binvox.hpp"
#include "mdrnet/dataset.hpp"
#include "mdrnet/descriptor_io.hpp"
#include "mdrnet/evaluation.hpp"
#include "mdrnet/io.hpp"
#include "mdrnet/mdr.hpp"
#include "mdrnet/training.hpp"

#ifndef MDRNET_VERSION
#define MDRNET_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace mdrnet;

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kNumeric = 3, kIo = 4 };

constexpr const char* kCheckpointName = "checkpoint.bin";
constexpr const char* kMetricsName = "metrics.csv";
constexpr const char* kRunManifestName = "run_manifest.txt";

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
    const std::string text = read_text_file(path);
    return {text.begin(), text.end()};
}

// ---- dataset-synth ----

struct SynthArgs {
    std::vector<std::string> classes{"sphere", "box", "cross", "pyramid"};
    std::size_t per_class = 50;
    std::uint64_t seed = 7;
    std::string out;
};

int run_synth(const SynthArgs& a) {
    const auto entries = write_synthetic_dataset(a.out, a.classes, a.per_class, a.seed);
    std::size_t train = 0;
    for (const auto& e : entries) train += e.split == Split::train ? 1 : 0;
    std::cout << "wrote " << entries.size() << " shapes (" << train << " train, " << entries.size() - train
              << " test) to " << a.out << "\n";
    return kOk;
}

// ---- mdr-export ----

struct ExportArgs {
    std::string in;
    long long k = 3;
    std::string out;
    bool images = false;
};

int run_export(const ExportArgs& a) {
    std::vector<std::pair<std::string, VoxelGrid>> shapes;
    if (fs::is_directory(a.in)) {
        const ShapeDataset data = ShapeDataset::load(a.in);
        for (const auto& s : data.shapes()) shapes.emplace_back(s.id, s.grid);
    } else {
        shapes.emplace_back(shape_id_from_path(a.in), read_binvox_file(a.in));
    }
    ensure_directory(a.out);
    std::size_t images = 0;
    for (const auto& [id, grid] : shapes) {
        const MdrSequence m = compute_mdr(grid, a.k);
        write_file_atomic(fs::path(a.out) / (id + ".mdr"), format_mdr(m));
        if (!a.images) continue;
        for (std::size_t s = 0; s < m.slice_count(); ++s) {
            write_bytes_atomic(fs::path(a.out) / slice_image_name(id, m, s), export_slice_pgm(m, s));
            ++images;
        }
    }
    std::cout << "exported " << shapes.size() << " MDR file(s)";
    if (a.images) std::cout << " and " << images << " slice image(s)";
    std::cout << " to " << a.out << "\n";
    return kOk;
}

// ---- train ----

struct TrainArgs {
    std::string config;
    std::string data;
    std::string out;
};

std::string run_manifest(const TrainArgs& a, const TrainConfig& cfg) {
    std::string out = "tool_version = " MDRNET_VERSION "\n";
    out += "seed = " + std::to_string(cfg.seed) + "\n";
    out += "config_path = " + a.config + "\n";
    out += "dataset_manifest = " + (fs::path(a.data) / kManifestName).string() + "\n";
    out += "checkpoint = " + (fs::path(a.out) / kCheckpointName).string() + "\n";
    out += "metrics = " + (fs::path(a.out) / kMetricsName).string() + "\n";
    out += "[config]\n" + format_config(cfg);
    return out;
}

int run_train(const TrainArgs& a) {
    const TrainConfig cfg = parse_config(read_text_file(a.config));
    const ShapeDataset data = ShapeDataset::load(a.data);
    if (data.num_classes() < 2) throw ConfigError("training needs at least two classes");
    ensure_directory(a.out);
    write_file_atomic(fs::path(a.out) / kRunManifestName, run_manifest(a, cfg));

    const PreparedSplit train = prepare_split(data, Split::train, cfg.k);
    TrainState state = build_model(cfg, data.num_classes());
    for (std::size_t e = 0; e < cfg.epochs; ++e) {
        train_epoch(state, cfg, train);
        write_bytes_atomic(fs::path(a.out) / kCheckpointName, save_train_state(state));
        write_file_atomic(fs::path(a.out) / kMetricsName, format_metrics_csv(state.log));
        const auto& m = state.log.back();
        std::printf("epoch %zu/%zu g_loss=%.6f d_loss=%.6f train_acc=%.4f\n", e + 1, cfg.epochs, m.g_loss, m.d_loss,
                    m.train_acc);
        std::fflush(stdout);
    }
    if (state.log.empty()) {
        write_bytes_atomic(fs::path(a.out) / kCheckpointName, save_train_state(state));
        write_file_atomic(fs::path(a.out) / kMetricsName, format_metrics_csv(state.log));
        std::cout << "final train accuracy = n/a (0 epochs)\n";
    } else {
        std::printf("final train accuracy = %.17g\n", state.log.back().train_acc);
    }
    return kOk;
}

// ---- extract / eval ----

TrainState load_checkpoint(const std::string& path) { return load_train_state(read_bytes(path)); }

void check_classes(const TrainState& s, const ShapeDataset& data) {
    if (s.num_classes() != data.num_classes()) {
        throw ShapeError("checkpoint was trained on " + std::to_string(s.num_classes()) + " classes, dataset has " +
                         std::to_string(data.num_classes()));
    }
}

std::vector<std::size_t> split_indices(const ShapeDataset& data, const std::string& split) {
    if (split == "train") return data.indices(Split::train);
    if (split == "test") return data.indices(Split::test);
    std::vector<std::size_t> all(data.shapes().size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
}

std::vector<DescriptorEntry> extract_entries(const TrainState& s, const ShapeDataset& data,
                                             const std::vector<std::size_t>& indices) {
    std::vector<NormalizedMdr> mdrs;
    for (std::size_t i : indices) mdrs.push_back(normalize_mdr(compute_mdr(data.shapes()[i].grid, static_cast<long long>(s.k))));
    std::vector<const NormalizedMdr*> ptrs;
    for (const auto& m : mdrs) ptrs.push_back(&m);
    const auto descriptors = generate_descriptors(s.params.generator, s.params.shape, ptrs);
    std::vector<DescriptorEntry> out;
    for (std::size_t j = 0; j < indices.size(); ++j) out.push_back({data.shapes()[indices[j]].id, descriptors[j]});
    return out;
}

struct ExtractArgs {
    std::string checkpoint;
    std::string data;
    std::string out;
    std::string split = "all";
};

int run_extract(const ExtractArgs& a) {
    const TrainState s = load_checkpoint(a.checkpoint);
    const ShapeDataset data = ShapeDataset::load(a.data);
    check_classes(s, data);
    const auto entries = extract_entries(s, data, split_indices(data, a.split));
    write_file_atomic(a.out, format_descriptor_file(entries));
    std::cout << "wrote " << entries.size() << " descriptors to " << a.out << "\n";
    return kOk;
}

struct EvalArgs {
    std::string descriptors;
    std::string checkpoint;
    std::string data;
    std::string out;
    std::string split = "test";
    std::string metric = "euclidean";
};

int run_eval(const EvalArgs& a) {
    if (a.descriptors.empty() && a.checkpoint.empty()) throw ConfigError("eval needs --descriptors or --checkpoint");
    const ShapeDataset data = ShapeDataset::load(a.data);
    const auto indices = split_indices(data, a.split);
    std::optional<TrainState> state;
    if (!a.checkpoint.empty()) {
        state = load_checkpoint(a.checkpoint);
        check_classes(*state, data);
    }

    std::vector<DescriptorEntry> entries;
    if (!a.descriptors.empty()) {
        std::map<std::string, std::vector<double>> by_id;
        for (auto& e : parse_descriptor_file(read_text_file(a.descriptors))) {
            if (!by_id.emplace(e.id, std::move(e.values)).second) throw FormatError("duplicate descriptor id " + e.id);
        }
        for (std::size_t i : indices) {
            const auto& id = data.shapes()[i].id;
            const auto it = by_id.find(id);
            if (it == by_id.end()) throw FormatError("descriptor file has no entry for shape " + id);
            entries.push_back({id, it->second});
        }
        if (state && !entries.empty() && entries.front().values.size() != state->params.shape.descriptor_dim()) {
            throw ShapeError("descriptor dimension " + std::to_string(entries.front().values.size()) +
                             " does not match the checkpoint's " + std::to_string(state->params.shape.descriptor_dim()));
        }
    } else {
        entries = extract_entries(*state, data, indices);
    }
    if (entries.empty()) throw ConfigError("no shapes in the selected split");

    std::vector<DescriptorRecord> records;
    for (std::size_t j = 0; j < entries.size(); ++j) {
        records.push_back({entries[j].id, data.shapes()[indices[j]].label, entries[j].values});
    }
    std::optional<double> acc;
    if (state) {
        std::vector<Descriptor> ds;
        std::vector<int> labels;
        for (const auto& r : records) {
            ds.push_back(r.values);
            labels.push_back(r.label);
        }
        acc = accuracy(predict(state->params, ds), labels);
    }
    const Metric metric = a.metric == "cosine" ? Metric::cosine : Metric::euclidean;
    const MeanApResult m = mean_ap(records, metric);
    std::vector<PrCurve> curves;
    for (const auto& r : m.results) {
        if (r.relevant_count() > 0) curves.push_back(pr_curve(r));
    }

    ensure_directory(a.out);
    const std::string summary = format_summary(acc, m);
    write_file_atomic(fs::path(a.out) / "summary.txt", summary);
    write_file_atomic(fs::path(a.out) / "pr.csv", emit_pr_csv(curves));
    write_file_atomic(fs::path(a.out) / "pr11.csv", emit_pr11_csv(curves));
    std::cout << summary;
    if (m.excluded_queries > 0) {
        std::cerr << "warning: " << m.excluded_queries << " quer" << (m.excluded_queries == 1 ? "y" : "ies")
                  << " had no relevant gallery items and were excluded from mAP\n";
    }
    return kOk;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ShapeError*>(&e)) return kUsage;
    if (dynamic_cast<const NumericError*>(&e)) return kNumeric;
    if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const FormatError*>(&e)) return kIo;
    if (dynamic_cast<const fs::filesystem_error*>(&e)) return kIo;
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"MDR + ConvLSTM shape descriptors with adversarial training"};
    app.set_version_flag("--version", std::string(MDRNET_VERSION));
    app.require_subcommand(1);

    SynthArgs synth;
    auto* cmd_synth = app.add_subcommand("dataset-synth", "Write a synthetic voxel dataset with a manifest");
    cmd_synth->add_option("--classes", synth.classes, "Comma-separated classes (sphere, box, cross, pyramid)")
        ->delimiter(',');
    cmd_synth->add_option("--per-class", synth.per_class, "Shapes per class (at least 2)");
    cmd_synth->add_option("--seed", synth.seed, "Random seed");
    cmd_synth->add_option("--out", synth.out, "Output directory")->required();

    ExportArgs exp;
    auto* cmd_export = app.add_subcommand("mdr-export", "Compute MDR sequences for a binvox file or dataset");
    cmd_export->add_option("--in", exp.in, "Binvox file or dataset directory")->required();
    cmd_export->add_option("--k", exp.k, "Segments per axis (must divide the grid size)");
    cmd_export->add_option("--out", exp.out, "Output directory")->required();
    cmd_export->add_flag("--images", exp.images, "Also write one PGM per slice");

    TrainArgs train;
    auto* cmd_train = app.add_subcommand("train", "Train a model");
    cmd_train->add_option("--config", train.config, "Config file (key = value lines)")->required();
    cmd_train->add_option("--data", train.data, "Dataset directory")->required();
    cmd_train->add_option("--out", train.out, "Run directory")->required();

    ExtractArgs ext;
    auto* cmd_extract = app.add_subcommand("extract", "Write descriptors for dataset shapes");
    cmd_extract->add_option("--checkpoint", ext.checkpoint, "Checkpoint file")->required();
    cmd_extract->add_option("--data", ext.data, "Dataset directory")->required();
    cmd_extract->add_option("--out", ext.out, "Descriptor file")->required();
    cmd_extract->add_option("--split", ext.split, "all, train or test")
        ->check(CLI::IsMember({"all", "train", "test"}));

    EvalArgs ev;
    auto* cmd_eval = app.add_subcommand("eval", "Accuracy, mAP and precision-recall curves");
    cmd_eval->add_option("--descriptors", ev.descriptors, "Descriptor file");
    cmd_eval->add_option("--checkpoint", ev.checkpoint, "Checkpoint (enables accuracy)");
    cmd_eval->add_option("--data", ev.data, "Dataset directory")->required();
    cmd_eval->add_option("--out", ev.out, "Output directory")->required();
    cmd_eval->add_option("--split", ev.split, "Query/gallery split: test, train or all")
        ->check(CLI::IsMember({"all", "train", "test"}));
    cmd_eval->add_option("--metric", ev.metric, "euclidean or cosine")
        ->check(CLI::IsMember({"euclidean", "cosine"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*cmd_synth) return run_synth(synth);
        if (*cmd_export) return run_export(exp);
        if (*cmd_train) return run_train(train);
        if (*cmd_extract) return run_extract(ext);
        if (*cmd_eval) return run_eval(ev);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return kUsage;
}
