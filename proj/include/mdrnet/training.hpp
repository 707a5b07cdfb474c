// SPDX-FileCopyrightText: 2026 The mdrnet Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MDRNET_TRAINING_HPP
#define MDRNET_TRAINING_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mdrnet/adam.hpp"
#include "mdrnet/checkpoint.hpp"
#include "mdrnet/dataset.hpp"
#include "mdrnet/error.hpp"
#include "mdrnet/evaluation.hpp"
#include "mdrnet/mdr.hpp"
#include "mdrnet/network.hpp"
#include "mdrnet/ops.hpp"

namespace mdrnet {

struct TrainConfig {
    Mode mode = Mode::full;
    std::size_t k = 3;
    std::size_t batch_size = 32;
    double lr_gen = 0.01;
    double lr_dis = 0.001;
    double decay = 0.995;
    std::size_t epochs = 60;
    std::uint64_t seed = 7;
    // When true the generator objective also updates the discriminator.
    bool g_updates_dis = true;
    Readout descriptor_readout = Readout::cell;

    void validate() const {
        if (k == 0) throw ConfigError("k must be positive");
        if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
        if (!(lr_gen > 0.0) || !std::isfinite(lr_gen)) throw ConfigError("lr_gen must be positive");
        if (!(lr_dis > 0.0) || !std::isfinite(lr_dis)) throw ConfigError("lr_dis must be positive");
        if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError("decay must be in (0, 1]");
        if (epochs == 0) throw ConfigError("epochs must be at least 1");
    }

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ConfigError("config: bad value for " + key + ": '" + value + "'");
    }
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config: " + key + " must be true or false");
}

} // namespace detail

// "key = value" lines; '#' starts a comment. Unknown keys are rejected.
inline TrainConfig parse_config(std::string_view text) {
    TrainConfig cfg;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        const std::string line = detail::trim(raw);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = detail::trim(std::string_view(line).substr(0, eq));
        const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
        if (key == "mode") cfg.mode = parse_mode(value);
        else if (key == "k") cfg.k = detail::parse_number<std::size_t>(key, value);
        else if (key == "batch_size") cfg.batch_size = detail::parse_number<std::size_t>(key, value);
        else if (key == "lr_gen") cfg.lr_gen = detail::parse_number<double>(key, value);
        else if (key == "lr_dis") cfg.lr_dis = detail::parse_number<double>(key, value);
        else if (key == "decay") cfg.decay = detail::parse_number<double>(key, value);
        else if (key == "epochs") cfg.epochs = detail::parse_number<std::size_t>(key, value);
        else if (key == "seed") cfg.seed = detail::parse_number<std::uint64_t>(key, value);
        else if (key == "g_updates_dis") cfg.g_updates_dis = detail::parse_bool(key, value);
        else if (key == "descriptor_readout") cfg.descriptor_readout = parse_readout(value);
        else throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

inline std::string format_config(const TrainConfig& c) {
    auto real = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    return "mode = " + std::string(to_string(c.mode)) + "\nk = " + std::to_string(c.k) +
           "\nbatch_size = " + std::to_string(c.batch_size) + "\nlr_gen = " + real(c.lr_gen) +
           "\nlr_dis = " + real(c.lr_dis) + "\ndecay = " + real(c.decay) + "\nepochs = " + std::to_string(c.epochs) +
           "\nseed = " + std::to_string(c.seed) + "\ng_updates_dis = " + (c.g_updates_dis ? "true" : "false") +
           "\ndescriptor_readout = " + std::string(to_string(c.descriptor_readout)) + "\n";
}

struct EpochMetrics {
    std::size_t epoch = 0;
    double g_loss = 0.0;
    double d_loss = 0.0;
    double train_acc = 0.0;

    friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

inline std::string format_metrics_csv(const std::vector<EpochMetrics>& log) {
    std::string out = "epoch,g_loss,d_loss,train_acc\n";
    char buf[128];
    for (const auto& m : log) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", m.epoch, m.g_loss, m.d_loss, m.train_acc);
        out += buf;
    }
    return out;
}

struct TrainState {
    ModelParams params;
    AdamState gen_opt;
    AdamState dis_opt;
    std::size_t k = 3;
    std::size_t epoch = 0;
    std::vector<EpochMetrics> log;

    std::size_t num_classes() const noexcept { return params.shape.num_classes; }
};

// Assembles the variant's parameters and fresh optimizer state.
inline TrainState build_model(Mode mode, std::size_t num_classes, std::size_t k, std::uint64_t seed,
                              NetworkShape shape = {}, Readout readout = Readout::cell) {
    if (num_classes < 1) throw ConfigError("build_model: need at least one class");
    if (k == 0) throw ConfigError("build_model: k must be positive");
    shape.num_classes = num_classes;
    TrainState s;
    s.params = init_params(seed, mode, shape);
    s.params.generator.readout = readout;
    s.k = k;
    return s;
}

inline TrainState build_model(const TrainConfig& cfg, std::size_t num_classes, NetworkShape shape = {}) {
    cfg.validate();
    TrainState s = build_model(cfg.mode, num_classes, cfg.k, cfg.seed, std::move(shape), cfg.descriptor_readout);
    s.gen_opt.base_lr = cfg.lr_gen;
    s.dis_opt.base_lr = cfg.lr_dis;
    return s;
}

// step-major slices for a batch of shapes plus their 1-based labels.
struct Batch {
    Tensor slices;
    std::size_t steps = 0;
    std::vector<int> labels;

    std::size_t size() const noexcept { return labels.size(); }
};

inline Batch make_batch(std::span<const NormalizedMdr* const> items, std::span<const int> labels) {
    if (items.empty() || items.size() != labels.size()) throw ShapeError("make_batch: need one label per shape");
    return Batch{stack_mdr_batch(items), items.front()->slice_count(), {labels.begin(), labels.end()}};
}

struct StepResult {
    double loss = 0.0;
    std::size_t correct = 0;
};

namespace detail {

inline std::vector<ParamGrad> generator_grads(TrainState& s, const Tape& tape, const GeneratorGraph& g) {
    std::vector<ParamGrad> out;
    std::size_t i = 0;
    for_each_generator_tensor(s.params.generator, [&](const std::string&, Tensor& t) {
        out.push_back({&t, tape.grad(g.bound()[i++])});
    });
    return out;
}

inline std::vector<ParamGrad> head_grads(TrainState& s, const Tape& tape, const HeadGraph& h) {
    std::vector<ParamGrad> out;
    std::size_t i = 0;
    for_each_head_tensor(s.params.head, [&](const std::string&, Tensor& t) {
        out.push_back({&t, tape.grad(h.bound()[i++])});
    });
    return out;
}

inline void check_finite_loss(double loss, const char* which) {
    if (!std::isfinite(loss)) throw NumericError(std::string("non-finite ") + which + " loss");
}

inline std::size_t count_correct(const Tensor& logits, std::span<const int> labels, std::size_t num_classes) {
    const std::size_t width = logits.dim(logits.rank() - 1);
    std::size_t correct = 0;
    for (std::size_t b = 0; b < labels.size(); ++b) {
        const auto row = logits.values().subspan(b * width, width);
        correct += classify(row, num_classes) == labels[b] ? 1 : 0;
    }
    return correct;
}

} // namespace detail

// Mean -log P(adversarial | descriptor) over the batch under the current parameters.
inline double adversarial_loss(const TrainState& state, const Batch& batch) {
    Tape tape;
    const GeneratorGraph gen(tape, state.params.generator, state.params.shape, false);
    const HeadGraph head(tape, state.params.head, false);
    const std::vector<int> targets(batch.size(), static_cast<int>(state.num_classes()));
    return softmax_cross_entropy(head.logits(gen.descriptors(tape.bind_constant(batch.slices), batch.steps)), targets)
        .value()[0];
}

// Mean -log P(y | descriptor) over the batch under the current parameters.
inline double label_loss(const TrainState& state, const Batch& batch) {
    Tape tape;
    const GeneratorGraph gen(tape, state.params.generator, state.params.shape, false);
    const HeadGraph head(tape, state.params.head, false);
    std::vector<int> targets;
    for (int l : batch.labels) targets.push_back(l - 1);
    return softmax_cross_entropy(head.logits(gen.descriptors(tape.bind_constant(batch.slices), batch.steps)), targets)
        .value()[0];
}

namespace detail {

inline std::vector<int> label_targets(const Batch& batch, std::size_t n) {
    std::vector<int> targets;
    for (int l : batch.labels) {
        if (l < 1 || static_cast<std::size_t>(l) > n) throw ShapeError("g_step: label outside [1, N]");
        targets.push_back(l - 1);
    }
    return targets;
}

// Head update toward the adversarial class on fixed descriptors [B, D].
inline StepResult discriminator_update(TrainState& state, const TrainConfig& cfg, const Tensor& descriptors,
                                       const Batch& batch) {
    Tape tape;
    const HeadGraph head(tape, state.params.head, true);
    const Var logits = head.logits(tape.bind_constant(descriptors));
    const std::vector<int> targets(batch.size(), static_cast<int>(state.num_classes()));
    const Var loss = softmax_cross_entropy(logits, targets);
    const double value = loss.value()[0];
    check_finite_loss(value, "discriminator");
    tape.backward(loss);
    const auto grads = head_grads(state, tape, head);
    adam_step(grads, state.dis_opt, decayed_rate(cfg.lr_dis, cfg.decay, state.epoch));
    return {value, count_correct(logits.value(), batch.labels, state.num_classes())};
}

struct GeneratorPass {
    Tape tape;
    std::optional<GeneratorGraph> gen;
    std::optional<Var> descriptors;
    bool update_gen = false;
};

inline void run_generator(GeneratorPass& pass, const TrainState& state, const TrainConfig& cfg, const Batch& batch) {
    pass.update_gen = cfg.lr_gen > 0.0;
    pass.gen.emplace(pass.tape, state.params.generator, state.params.shape, pass.update_gen);
    pass.descriptors = pass.gen->descriptors(pass.tape.bind_constant(batch.slices), batch.steps);
}

// Label objective on an existing generator pass, using the head as it is now.
inline StepResult label_update(TrainState& state, const TrainConfig& cfg, GeneratorPass& pass, const Batch& batch) {
    const std::size_t n = state.num_classes();
    const std::vector<int> targets = label_targets(batch, n);
    const bool update_head = (cfg.g_updates_dis || !is_adversarial(state.params.mode)) && cfg.lr_dis > 0.0;
    const HeadGraph head(pass.tape, state.params.head, update_head);
    const Var logits = head.logits(*pass.descriptors);
    const Var loss = softmax_cross_entropy(logits, targets);
    const double value = loss.value()[0];
    check_finite_loss(value, "generator");
    const std::size_t correct = count_correct(logits.value(), batch.labels, n);
    pass.tape.backward(loss);
    // Gradients are collected before either update so both see the same tape state.
    auto gen_grads = generator_grads(state, pass.tape, *pass.gen);
    auto hgrads = head_grads(state, pass.tape, head);
    if (pass.update_gen) adam_step(gen_grads, state.gen_opt, decayed_rate(cfg.lr_gen, cfg.decay, state.epoch));
    if (update_head) adam_step(hgrads, state.dis_opt, decayed_rate(cfg.lr_dis, cfg.decay, state.epoch));
    return {value, correct};
}

} // namespace detail

// Discriminator update toward the adversarial class with the generator frozen.
inline StepResult d_step(TrainState& state, const TrainConfig& cfg, const Batch& batch) {
    if (!is_adversarial(state.params.mode)) throw ConfigError("d_step requires an adversarial mode");
    if (batch.size() == 0) throw ShapeError("d_step: empty batch");
    Tape tape;
    const GeneratorGraph gen(tape, state.params.generator, state.params.shape, false);
    const Tensor descriptors = gen.descriptors(tape.bind_constant(batch.slices), batch.steps).value();
    return detail::discriminator_update(state, cfg, descriptors, batch);
}

// Label objective. Updates the generator (skipped when lr_gen is 0) and the
// head; in adversarial modes the head update is governed by g_updates_dis.
inline StepResult g_step(TrainState& state, const TrainConfig& cfg, const Batch& batch) {
    if (batch.size() == 0) throw ShapeError("g_step: empty batch");
    detail::label_targets(batch, state.num_classes());
    detail::GeneratorPass pass;
    detail::run_generator(pass, state, cfg, batch);
    return detail::label_update(state, cfg, pass, batch);
}

struct RoundResult {
    std::optional<StepResult> d;
    StepResult g;
};

// One d_step (adversarial modes) followed by one g_step. The generator is
// unchanged by the d_step, so its forward pass is shared by both.
inline RoundResult train_round(TrainState& state, const TrainConfig& cfg, const Batch& batch) {
    if (batch.size() == 0) throw ShapeError("train_round: empty batch");
    detail::label_targets(batch, state.num_classes());
    detail::GeneratorPass pass;
    detail::run_generator(pass, state, cfg, batch);
    RoundResult out;
    if (is_adversarial(state.params.mode)) {
        out.d = detail::discriminator_update(state, cfg, pass.descriptors->value(), batch);
    }
    out.g = detail::label_update(state, cfg, pass, batch);
    return out;
}

// Normalized MDRs and labels of one split, ready for batching.
struct PreparedSplit {
    std::vector<std::string> ids;
    std::vector<NormalizedMdr> mdrs;
    std::vector<int> labels;

    std::size_t size() const noexcept { return ids.size(); }

    std::vector<const NormalizedMdr*> pointers() const {
        std::vector<const NormalizedMdr*> out;
        for (const auto& m : mdrs) out.push_back(&m);
        return out;
    }
};

inline PreparedSplit prepare_split(const ShapeDataset& data, Split split, std::size_t k) {
    PreparedSplit out;
    for (std::size_t i : data.indices(split)) {
        const auto& s = data.shapes()[i];
        out.ids.push_back(s.id);
        out.mdrs.push_back(normalize_mdr(compute_mdr(s.grid, static_cast<long long>(k))));
        out.labels.push_back(s.label);
    }
    return out;
}

// Shuffle order of one epoch; a pure function of (seed, epoch, count).
inline std::vector<std::size_t> epoch_order(std::uint64_t seed, std::size_t epoch, std::size_t count) {
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(detail::splitmix64(seed) ^ detail::splitmix64(0x5eedULL + epoch));
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

// One pass over the training split. Adversarial modes run a d_step then a
// g_step per batch; supervised modes run the g_step only.
inline void train_epoch(TrainState& state, const TrainConfig& cfg, const PreparedSplit& train) {
    if (train.size() == 0) throw ShapeError("train_epoch: empty training split");
    const auto order = epoch_order(cfg.seed, state.epoch, train.size());
    const bool adversarial = is_adversarial(state.params.mode);
    double g_sum = 0.0, d_sum = 0.0;
    std::size_t correct = 0;
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_no) {
        const std::size_t end = std::min(order.size(), start + cfg.batch_size);
        std::vector<const NormalizedMdr*> items;
        std::vector<int> labels;
        for (std::size_t i = start; i < end; ++i) {
            items.push_back(&train.mdrs[order[i]]);
            labels.push_back(train.labels[order[i]]);
        }
        const Batch batch = make_batch(items, labels);
        try {
            const RoundResult r = train_round(state, cfg, batch);
            if (r.d) d_sum += r.d->loss * static_cast<double>(batch.size());
            g_sum += r.g.loss * static_cast<double>(batch.size());
            correct += r.g.correct;
        } catch (const NumericError& e) {
            throw NumericError(std::string(e.what()) + " at epoch " + std::to_string(state.epoch) + ", batch " +
                               std::to_string(batch_no));
        }
    }
    const double total = static_cast<double>(train.size());
    state.log.push_back({state.epoch, g_sum / total, adversarial ? d_sum / total : 0.0,
                         static_cast<double>(correct) / total});
    ++state.epoch;
}

// Predicted 1-based labels from the head for precomputed descriptors.
inline std::vector<int> predict(const ModelParams& params, std::span<const Descriptor> descriptors) {
    std::vector<int> out;
    for (const auto& d : descriptors) out.push_back(classify(discriminate(params.head, d), params.shape.num_classes));
    return out;
}

// ---- checkpoint mapping ----

namespace detail {

inline Tensor vector_tensor(const std::vector<double>& v) { return Tensor(Shape{v.size()}, v); }

template <class Range>
Tensor size_tensor(const Range& r) {
    std::vector<double> v;
    for (auto x : r) v.push_back(static_cast<double>(x));
    if (v.empty()) v.push_back(-1.0);  // empty list marker; dimensions must be positive
    return Tensor(Shape{v.size()}, v);
}

inline std::vector<std::size_t> read_sizes(const Tensor& t) {
    std::vector<std::size_t> out;
    if (t.size() == 1 && t[0] < 0) return out;
    for (double v : t.values()) {
        if (v < 0 || v != std::floor(v)) throw FormatError("checkpoint: bad integer metadata");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

inline void append_adam(std::vector<NamedTensor>& out, const std::string& prefix, const AdamState& s,
                        const std::vector<std::string>& names) {
    out.push_back({prefix + "step", Tensor::scalar(static_cast<double>(s.step))});
    out.push_back({prefix + "base_lr", Tensor::scalar(s.base_lr)});
    for (std::size_t i = 0; i < s.first_moment.size(); ++i) {
        out.push_back({prefix + "m/" + names[i], s.first_moment[i]});
        out.push_back({prefix + "v/" + names[i], s.second_moment[i]});
    }
}

} // namespace detail

// Parameters, optimizer state (under "/opt/"), and run metadata (under "/meta/").
inline std::vector<NamedTensor> state_records(const TrainState& s) {
    const auto& shape = s.params.shape;
    std::vector<NamedTensor> out;
    out.push_back({"/meta/mode", Tensor::scalar(static_cast<double>(s.params.mode))});
    out.push_back({"/meta/readout", Tensor::scalar(static_cast<double>(s.params.generator.readout))});
    out.push_back({"/meta/num_classes", Tensor::scalar(static_cast<double>(shape.num_classes))});
    out.push_back({"/meta/k", Tensor::scalar(static_cast<double>(s.k))});
    out.push_back({"/meta/epoch", Tensor::scalar(static_cast<double>(s.epoch))});
    out.push_back({"/meta/shape/input", detail::size_tensor(std::vector<std::size_t>{
                                            shape.input_size, shape.encoder_kernel, shape.encoder_stride,
                                            shape.lstm_kernel})});
    out.push_back({"/meta/shape/encoder_channels", detail::size_tensor(shape.encoder_channels)});
    out.push_back({"/meta/shape/dis_hidden", detail::size_tensor(shape.dis_hidden)});
    out.push_back({"/meta/shape/classifier_hidden", detail::size_tensor(shape.classifier_hidden)});
    if (!s.log.empty()) {
        std::vector<double> log;
        for (const auto& m : s.log) {
            log.insert(log.end(), {static_cast<double>(m.epoch), m.g_loss, m.d_loss, m.train_acc});
        }
        out.push_back({"/meta/log", Tensor(Shape{s.log.size(), 4}, log)});
    }
    std::vector<std::string> gen_names, dis_names;
    for_each_parameter(s.params, [&](const std::string& name, const Tensor& t, ParamGroup g) {
        out.push_back({name, t});
        (g == ParamGroup::generator ? gen_names : dis_names).push_back(name);
    });
    detail::append_adam(out, "/opt/gen/", s.gen_opt, gen_names);
    detail::append_adam(out, "/opt/dis/", s.dis_opt, dis_names);
    return out;
}

inline TrainState state_from_records(const std::vector<NamedTensor>& records) {
    std::map<std::string, const Tensor*> by_name;
    for (const auto& r : records) by_name[r.name] = &r.value;
    auto get = [&](const std::string& name) -> const Tensor& {
        const auto it = by_name.find(name);
        if (it == by_name.end()) throw FormatError("checkpoint: missing record " + name);
        return *it->second;
    };
    auto scalar = [&](const std::string& name) {
        const Tensor& t = get(name);
        if (t.size() != 1) throw FormatError("checkpoint: " + name + " must be a scalar");
        return t[0];
    };

    NetworkShape shape;
    const auto input = detail::read_sizes(get("/meta/shape/input"));
    const auto enc = detail::read_sizes(get("/meta/shape/encoder_channels"));
    if (input.size() != 4 || enc.size() != 4) throw FormatError("checkpoint: bad network shape metadata");
    shape.input_size = input[0];
    shape.encoder_kernel = input[1];
    shape.encoder_stride = input[2];
    shape.lstm_kernel = input[3];
    std::copy(enc.begin(), enc.end(), shape.encoder_channels.begin());
    shape.dis_hidden = detail::read_sizes(get("/meta/shape/dis_hidden"));
    shape.classifier_hidden = detail::read_sizes(get("/meta/shape/classifier_hidden"));
    shape.num_classes = static_cast<std::size_t>(scalar("/meta/num_classes"));

    const double mode = scalar("/meta/mode");
    if (mode < 0 || mode > 3) throw FormatError("checkpoint: bad mode");
    const double readout = scalar("/meta/readout");
    TrainState s = build_model(static_cast<Mode>(static_cast<int>(mode)), shape.num_classes,
                               static_cast<std::size_t>(scalar("/meta/k")), 0, shape,
                               readout == 0 ? Readout::cell : Readout::hidden);
    s.epoch = static_cast<std::size_t>(scalar("/meta/epoch"));
    if (by_name.count("/meta/log")) {
        const Tensor& log = get("/meta/log");
        if (log.rank() != 2 || log.dim(1) != 4) throw FormatError("checkpoint: bad metrics log");
        for (std::size_t r = 0; r < log.dim(0); ++r) {
            s.log.push_back({static_cast<std::size_t>(log[r * 4]), log[r * 4 + 1], log[r * 4 + 2], log[r * 4 + 3]});
        }
    }

    std::vector<std::string> gen_names, dis_names;
    for_each_parameter(s.params, [&](const std::string& name, Tensor& t, ParamGroup g) {
        const Tensor& stored = get(name);
        if (stored.shape() != t.shape()) {
            throw FormatError("checkpoint: " + name + " has shape " + shape_string(stored.shape()) + ", expected " +
                              shape_string(t.shape()));
        }
        t = stored;
        (g == ParamGroup::generator ? gen_names : dis_names).push_back(name);
    });
    auto load_adam = [&](const std::string& prefix, AdamState& opt, const std::vector<std::string>& names) {
        opt.step = static_cast<std::uint64_t>(scalar(prefix + "step"));
        opt.base_lr = scalar(prefix + "base_lr");
        if (!by_name.count(prefix + "m/" + names.front())) return;
        for (const auto& n : names) {
            opt.first_moment.push_back(get(prefix + "m/" + n));
            opt.second_moment.push_back(get(prefix + "v/" + n));
        }
    };
    load_adam("/opt/gen/", s.gen_opt, gen_names);
    load_adam("/opt/dis/", s.dis_opt, dis_names);
    return s;
}

inline std::vector<std::uint8_t> save_train_state(const TrainState& s) { return encode_checkpoint(state_records(s)); }

inline TrainState load_train_state(std::span<const std::uint8_t> bytes) {
    return state_from_records(decode_checkpoint(bytes));
}

} // namespace mdrnet

#endif // MDRNET_TRAINING_HPP
