// SPDX-FileCopyrightText: 2026 The mdrnet Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MDRNET_NETWORK_HPP
#define MDRNET_NETWORK_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mdrnet/error.hpp"
#include "mdrnet/mdr.hpp"
#include "mdrnet/ops.hpp"
#include "mdrnet/tape.hpp"
#include "mdrnet/tensor.hpp"

namespace mdrnet {

// Ablation variants.
//   cnn_only: encoder, slice-mean latent, supervised N-way head
//   cnn_rnn:  encoder + ConvLSTM, supervised N-way head
//   cnn_adv:  encoder, slice-mean latent, (N+1)-way adversarial discriminator
//   full:     encoder + ConvLSTM, (N+1)-way adversarial discriminator
enum class Mode { cnn_only, cnn_rnn, cnn_adv, full };

// Which ConvLSTM state is read out as the descriptor.
enum class Readout { cell, hidden };

inline bool is_adversarial(Mode m) noexcept { return m == Mode::cnn_adv || m == Mode::full; }
inline bool uses_recurrence(Mode m) noexcept { return m == Mode::cnn_rnn || m == Mode::full; }

inline std::string_view to_string(Mode m) {
    switch (m) {
    case Mode::cnn_only: return "cnn_only";
    case Mode::cnn_rnn: return "cnn_rnn";
    case Mode::cnn_adv: return "cnn_adv";
    case Mode::full: return "full";
    }
    return "?";
}

inline Mode parse_mode(std::string_view s) {
    if (s == "cnn_only") return Mode::cnn_only;
    if (s == "cnn_rnn") return Mode::cnn_rnn;
    if (s == "cnn_adv") return Mode::cnn_adv;
    if (s == "full") return Mode::full;
    throw ConfigError("unknown mode '" + std::string(s) + "' (expected cnn_only, cnn_rnn, cnn_adv, full)");
}

inline std::string_view to_string(Readout r) { return r == Readout::cell ? "cell" : "hidden"; }

inline Readout parse_readout(std::string_view s) {
    if (s == "cell" || s == "C") return Readout::cell;
    if (s == "hidden" || s == "H") return Readout::hidden;
    throw ConfigError("unknown descriptor_readout '" + std::string(s) + "' (expected cell or hidden)");
}

// Layer sizes. Defaults give 30x30 slices -> 256x2x2 features -> 1024-d descriptors;
// tests shrink the channel counts.
struct NetworkShape {
    std::size_t input_size = 30;
    std::array<std::size_t, 4> encoder_channels{32, 64, 128, 256};
    std::size_t encoder_kernel = 4;
    std::size_t encoder_stride = 2;
    std::size_t lstm_kernel = 3;
    std::vector<std::size_t> dis_hidden{128, 64};
    std::vector<std::size_t> classifier_hidden{128};
    std::size_t num_classes = 4;

    std::size_t layer_input_extent(std::size_t layer) const {
        std::size_t e = input_size;
        for (std::size_t l = 0; l < layer; ++l) e = (e + encoder_stride - 1) / encoder_stride;
        return e;
    }
    std::size_t feature_extent() const { return layer_input_extent(encoder_channels.size()); }
    std::size_t feature_channels() const { return encoder_channels.back(); }
    Shape feature_shape() const { return {feature_channels(), feature_extent(), feature_extent()}; }
    std::size_t descriptor_dim() const { return shape_size(feature_shape()); }

    // Output widths of the head: discriminator (N+1) or supervised classifier (N).
    std::vector<std::size_t> head_widths(Mode mode) const {
        std::vector<std::size_t> widths{descriptor_dim()};
        const auto& hidden = is_adversarial(mode) ? dis_hidden : classifier_hidden;
        widths.insert(widths.end(), hidden.begin(), hidden.end());
        widths.push_back(is_adversarial(mode) ? num_classes + 1 : num_classes);
        return widths;
    }

    friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

struct ConvLayerParams {
    Tensor kernel;  // [C_out, C_in, K, K]
    Tensor bias;    // [C_out]
};

struct DenseLayerParams {
    Tensor weight;  // [F_out, F_in]
    Tensor bias;    // [F_out]
};

// Four stride-2 conv layers shared by every slice.
struct SliceEncoderParams {
    std::vector<ConvLayerParams> layers;
};

// Input-to-gate (w_x*) and hidden-to-gate (w_h*) kernels are [C, C, 3, 3];
// peepholes (w_c*) are [C, h, w] and enter by Hadamard product.
struct ConvLstmParams {
    Tensor w_xi, w_xf, w_xc, w_xo;
    Tensor w_hi, w_hf, w_hc, w_ho;
    Tensor w_ci, w_cf, w_co;
    Tensor b_i, b_f, b_c, b_o;
};

// Fully-connected stack with a leaky rectifier between layers.
struct DiscriminatorParams {
    std::vector<DenseLayerParams> layers;

    std::size_t output_width() const { return layers.empty() ? 0 : layers.back().bias.size(); }
};

struct GeneratorParams {
    SliceEncoderParams encoder;
    std::optional<ConvLstmParams> lstm;  // absent in the CNN-only variants
    Readout readout = Readout::cell;
};

struct ModelParams {
    Mode mode = Mode::full;
    NetworkShape shape;
    GeneratorParams generator;
    DiscriminatorParams head;
};

enum class ParamGroup { generator, discriminator };

// Visits every tensor with a stable name, in a fixed order.
template <class Params, class Fn>
void for_each_generator_tensor(Params& g, Fn&& fn) {
    for (std::size_t l = 0; l < g.encoder.layers.size(); ++l) {
        const std::string p = "gen/enc" + std::to_string(l) + "/";
        fn(p + "kernel", g.encoder.layers[l].kernel);
        fn(p + "bias", g.encoder.layers[l].bias);
    }
    if (g.lstm) {
        auto& s = *g.lstm;
        fn("gen/lstm/w_xi", s.w_xi);
        fn("gen/lstm/w_xf", s.w_xf);
        fn("gen/lstm/w_xc", s.w_xc);
        fn("gen/lstm/w_xo", s.w_xo);
        fn("gen/lstm/w_hi", s.w_hi);
        fn("gen/lstm/w_hf", s.w_hf);
        fn("gen/lstm/w_hc", s.w_hc);
        fn("gen/lstm/w_ho", s.w_ho);
        fn("gen/lstm/w_ci", s.w_ci);
        fn("gen/lstm/w_cf", s.w_cf);
        fn("gen/lstm/w_co", s.w_co);
        fn("gen/lstm/b_i", s.b_i);
        fn("gen/lstm/b_f", s.b_f);
        fn("gen/lstm/b_c", s.b_c);
        fn("gen/lstm/b_o", s.b_o);
    }
}

template <class Params, class Fn>
void for_each_head_tensor(Params& d, Fn&& fn) {
    for (std::size_t l = 0; l < d.layers.size(); ++l) {
        const std::string p = "dis/fc" + std::to_string(l) + "/";
        fn(p + "weight", d.layers[l].weight);
        fn(p + "bias", d.layers[l].bias);
    }
}

template <class Model, class Fn>
void for_each_parameter(Model& m, Fn&& fn) {
    for_each_generator_tensor(m.generator, [&](const std::string& name, auto& t) {
        fn(name, t, ParamGroup::generator);
    });
    for_each_head_tensor(m.head, [&](const std::string& name, auto& t) {
        fn(name, t, ParamGroup::discriminator);
    });
}

// Weights ~ U(-s, s) with s = sqrt(1 / fan_in); biases zero except the
// forget-gate bias, which starts at 1.
inline ModelParams init_params(std::uint64_t seed, Mode mode, const NetworkShape& shape) {
    std::mt19937_64 rng(seed);
    auto uniform = [&rng](Shape s, std::size_t fan_in) {
        const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        Tensor t(std::move(s));
        for (auto& v : t.values()) v = dist(rng);
        return t;
    };

    ModelParams m;
    m.mode = mode;
    m.shape = shape;
    std::size_t in_ch = 1;
    const std::size_t k = shape.encoder_kernel;
    for (std::size_t c : shape.encoder_channels) {
        m.generator.encoder.layers.push_back({uniform({c, in_ch, k, k}, in_ch * k * k), Tensor(Shape{c})});
        in_ch = c;
    }
    if (uses_recurrence(mode)) {
        const std::size_t c = shape.feature_channels();
        const std::size_t lk = shape.lstm_kernel;
        const Shape kern{c, c, lk, lk};
        const Shape peep = shape.feature_shape();
        ConvLstmParams s;
        for (Tensor* t : {&s.w_xi, &s.w_xf, &s.w_xc, &s.w_xo, &s.w_hi, &s.w_hf, &s.w_hc, &s.w_ho}) {
            *t = uniform(kern, c * lk * lk);
        }
        for (Tensor* t : {&s.w_ci, &s.w_cf, &s.w_co}) *t = uniform(peep, 1);
        s.b_i = Tensor(Shape{c});
        s.b_f = Tensor(Shape{c}, 1.0);
        s.b_c = Tensor(Shape{c});
        s.b_o = Tensor(Shape{c});
        m.generator.lstm = std::move(s);
    }
    const auto widths = shape.head_widths(mode);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        m.head.layers.push_back({uniform({widths[l + 1], widths[l]}, widths[l]), Tensor(Shape{widths[l + 1]})});
    }
    return m;
}

// Generator parameters bound onto a tape.
class GeneratorGraph {
public:
    GeneratorGraph(Tape& tape, const GeneratorParams& params, const NetworkShape& shape, bool track)
        : shape_(shape), readout_(params.readout) {
        if (!params.encoder.layers.empty() && params.encoder.layers.size() != shape.encoder_channels.size()) {
            throw ShapeError("generator: encoder layer count does not match network shape");
        }
        std::vector<Var> leaves;
        for_each_generator_tensor(params, [&](const std::string&, const Tensor& t) {
            leaves.push_back(track ? tape.bind(t) : tape.bind_constant(t));
        });
        assemble(std::move(leaves), params.encoder.layers.size(), params.lstm.has_value());
    }

    // From leaves already on a tape, in for_each_generator_tensor order.
    GeneratorGraph(std::vector<Var> leaves, const NetworkShape& shape, Readout readout, std::size_t encoder_layers,
                   bool recurrent)
        : shape_(shape), readout_(readout) {
        assemble(std::move(leaves), encoder_layers, recurrent);
    }

    bool recurrent() const noexcept { return lstm_.has_value(); }

    // Leaves in for_each_generator_tensor order.
    const std::vector<Var>& bound() const noexcept { return bound_; }

    // [M,1,H,W] (or [1,H,W]) slices -> [M,C,h,w] features; leaky rectifier after every layer.
    Var encode(const Var& slices) const {
        Var x = slices;
        std::size_t extent = shape_.input_size;
        for (const auto& [kernel, bias] : encoder_) {
            const auto geo = same_ceil_geometry(extent, extent, shape_.encoder_kernel, shape_.encoder_stride);
            x = leaky_relu(conv2d(x, kernel, bias, geo));
            extent = (extent + shape_.encoder_stride - 1) / shape_.encoder_stride;
        }
        return x;
    }

    struct State {
        Var hidden;
        Var cell;
    };

    // One ConvLSTM step with Hadamard peepholes; input, H and C are [B, C, h, w]. Without a previous state the zero H and C terms are dropped.
    State lstm_step(const Var& input, const std::optional<State>& prev) const {
        if (!lstm_) throw ShapeError("generator has no ConvLSTM");
        const auto& s = *lstm_;
        const Shape full = input.shape();
        const Shape fs = shape_.feature_shape();
        if (full.size() != 4 || !std::equal(fs.begin(), fs.end(), full.begin() + 1)) {
            throw ShapeError("lstm_step: input " + shape_string(full) + " does not match state " + shape_string(fs));
        }
        const std::size_t batch = full[0];
        const std::size_t d = shape_.descriptor_dim();
        const Var x = reshape(input, {batch, d});
        std::optional<Var> h, c;
        if (prev) {
            h = reshape(prev->hidden, {batch, d});
            c = reshape(prev->cell, {batch, d});
        }
        auto gate_input = [&](const Var& wx, const Var& wh, const Var& b) {
            Var z = fully_connected(x, wx, b);
            if (h) z = add(z, fully_connected(*h, wh, std::nullopt));
            return z;
        };
        Var zi = gate_input(s.w_xi, s.w_hi, s.b_i);
        Var zf = gate_input(s.w_xf, s.w_hf, s.b_f);
        if (c) {
            zi = add(zi, hadamard_rows(*c, s.w_ci));
            zf = add(zf, hadamard_rows(*c, s.w_cf));
        }
        const Var i = sigmoid(zi);
        const Var f = sigmoid(zf);
        const Var candidate = tanh(gate_input(s.w_xc, s.w_hc, s.b_c));
        Var cell = hadamard(i, candidate);
        if (c) cell = add(hadamard(f, *c), cell);
        const Var o = sigmoid(add(gate_input(s.w_xo, s.w_ho, s.b_o), hadamard_rows(cell, s.w_co)));
        const Var hidden = hadamard(o, tanh(cell));
        return {reshape(hidden, full), reshape(cell, full)};
    }

    // slices: [steps*B, 1, H, W], step-major (row = step*B + b). Returns [B, D].
    Var descriptors(const Var& slices, std::size_t steps) const {
        const Var features = encode(slices);
        const std::size_t batch = features.shape()[0] / steps;
        if (!lstm_) return reshape(mean_over_steps(features, steps), {batch, shape_.descriptor_dim()});
        std::optional<State> state;
        for (std::size_t t = 0; t < steps; ++t) {
            state = lstm_step(slice_rows(features, t * batch, (t + 1) * batch), state);
        }
        const Var& out = readout_ == Readout::cell ? state->cell : state->hidden;
        return reshape(out, {batch, shape_.descriptor_dim()});
    }

private:
    void assemble(std::vector<Var> leaves, std::size_t encoder_layers, bool recurrent) {
        const std::size_t expected = 2 * encoder_layers + (recurrent ? 15 : 0);
        if (leaves.size() != expected) {
            throw ShapeError("generator: expected " + std::to_string(expected) + " parameter tensors, got " +
                             std::to_string(leaves.size()));
        }
        bound_ = std::move(leaves);
        for (std::size_t l = 0; l < encoder_layers; ++l) encoder_.push_back({bound_[2 * l], bound_[2 * l + 1]});
        if (!recurrent) return;
        const Var* s = bound_.data() + 2 * encoder_layers;
        // The state maps are tiny, so each kernel is lowered once to a dense
        // operator on flattened [C*h*w] states and reused at every step.
        const std::size_t e = shape_.feature_extent();
        const std::size_t pad = shape_.lstm_kernel / 2;
        const Conv2dGeometry geo{1, pad, pad, pad, pad};
        const std::size_t d = shape_.descriptor_dim();
        auto dense = [&](const Var& k) { return conv_matrix(k, e, e, geo); };
        auto spread = [&](const Var& b) { return repeat_elements(b, e * e); };
        lstm_ = Lstm{dense(s[0]),          dense(s[1]),          dense(s[2]),          dense(s[3]),
                     dense(s[4]),          dense(s[5]),          dense(s[6]),          dense(s[7]),
                     reshape(s[8], {d}),   reshape(s[9], {d}),   reshape(s[10], {d}),  spread(s[11]),
                     spread(s[12]),        spread(s[13]),        spread(s[14])};
    }

    struct Lstm {
        Var w_xi, w_xf, w_xc, w_xo, w_hi, w_hf, w_hc, w_ho, w_ci, w_cf, w_co, b_i, b_f, b_c, b_o;
    };

    NetworkShape shape_;
    Readout readout_;
    std::vector<Var> bound_;
    std::vector<std::pair<Var, Var>> encoder_;
    std::optional<Lstm> lstm_;
};

// Discriminator / classifier head bound onto a tape.
class HeadGraph {
public:
    HeadGraph(Tape& tape, const DiscriminatorParams& params, bool track) {
        for (const auto& l : params.layers) {
            const Var w = track ? tape.bind(l.weight) : tape.bind_constant(l.weight);
            const Var b = track ? tape.bind(l.bias) : tape.bind_constant(l.bias);
            layers_.push_back({w, b});
            bound_.push_back(w);
            bound_.push_back(b);
        }
    }

    // From leaves already on a tape, in for_each_head_tensor order.
    explicit HeadGraph(std::vector<Var> leaves) : bound_(std::move(leaves)) {
        if (bound_.size() % 2 != 0) throw ShapeError("head: expected weight/bias pairs");
        for (std::size_t i = 0; i < bound_.size(); i += 2) layers_.push_back({bound_[i], bound_[i + 1]});
    }

    // Leaves in for_each_head_tensor order.
    const std::vector<Var>& bound() const noexcept { return bound_; }

    std::size_t output_width() const { return layers_.empty() ? 0 : layers_.back().second.size(); }

    Var logits(const Var& descriptors) const {
        Var x = descriptors;
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            x = fully_connected(x, layers_[l].first, layers_[l].second);
            if (l + 1 < layers_.size()) x = leaky_relu(x);
        }
        return x;
    }

private:
    std::vector<std::pair<Var, Var>> layers_;
    std::vector<Var> bound_;
};

// Stacks normalized MDRs into a step-major [3k*B, 1, dim, dim] tensor.
inline Tensor stack_mdr_batch(std::span<const NormalizedMdr* const> items) {
    if (items.empty()) throw ShapeError("empty MDR batch");
    const std::size_t steps = items.front()->slice_count();
    const std::size_t dim = items.front()->dim;
    const std::size_t plane = dim * dim;
    const std::size_t batch = items.size();
    Tensor out(Shape{steps * batch, 1, dim, dim});
    for (std::size_t b = 0; b < batch; ++b) {
        const auto& m = *items[b];
        if (m.slice_count() != steps || m.dim != dim || m.values.size() != steps * plane) {
            throw ShapeError("MDR batch items disagree in slice count or size");
        }
        for (std::size_t t = 0; t < steps; ++t) {
            std::copy_n(m.values.data() + t * plane, plane, out.data() + (t * batch + b) * plane);
        }
    }
    return out;
}

using Descriptor = std::vector<double>;

// Feature map of one [1, H, W] slice.
inline Tensor encode_slice(const SliceEncoderParams& params, const NetworkShape& shape, const Tensor& slice) {
    if (slice.shape() != Shape{1, shape.input_size, shape.input_size}) {
        throw ShapeError("encode_slice: expected slice shape " +
                         shape_string({1, shape.input_size, shape.input_size}) + ", got " +
                         shape_string(slice.shape()));
    }
    Tape tape;
    GeneratorParams g;
    g.encoder = params;
    const GeneratorGraph graph(tape, g, shape, false);
    return graph.encode(tape.bind_constant(slice)).value();
}

// One unbatched ConvLSTM step; every tensor is [C, h, w]. Returns (H_t, C_t).
inline std::pair<Tensor, Tensor> convlstm_step(const ConvLstmParams& params, const NetworkShape& shape,
                                               const Tensor& input, const Tensor& hidden, const Tensor& cell) {
    const Shape fs = shape.feature_shape();
    if (input.shape() != fs || hidden.shape() != fs || cell.shape() != fs) {
        throw ShapeError("convlstm_step: all operands must have shape " + shape_string(fs));
    }
    Tape tape;
    GeneratorParams g;
    g.lstm = params;
    const GeneratorGraph graph(tape, g, shape, false);
    const auto batched = [&](const Tensor& t) {
        Shape s{1};
        s.insert(s.end(), fs.begin(), fs.end());
        return tape.constant(t.reshaped(s));
    };
    const auto next = graph.lstm_step(batched(input), GeneratorGraph::State{batched(hidden), batched(cell)});
    return {next.hidden.value().reshaped(fs), next.cell.value().reshaped(fs)};
}

inline constexpr std::size_t kExtractChunk = 32;

// Descriptors for many shapes, evaluated in chunks; H_0 = C_0 = 0.
inline std::vector<Descriptor> generate_descriptors(const GeneratorParams& params, const NetworkShape& shape,
                                                    std::span<const NormalizedMdr* const> items,
                                                    std::size_t chunk = kExtractChunk) {
    std::vector<Descriptor> out;
    for (std::size_t start = 0; start < items.size(); start += chunk) {
        const auto part = items.subspan(start, std::min(chunk, items.size() - start));
        for (const auto* m : part) {
            if (m->dim != shape.input_size) throw ShapeError("MDR slice size does not match the network input");
        }
        const Tensor input = stack_mdr_batch(part);
        Tape tape;
        const GeneratorGraph graph(tape, params, shape, false);
        const Var d = graph.descriptors(tape.bind_constant(input), part.front()->slice_count());
        const std::size_t dim = shape.descriptor_dim();
        for (std::size_t b = 0; b < part.size(); ++b) {
            out.emplace_back(d.value().data() + b * dim, d.value().data() + (b + 1) * dim);
        }
    }
    return out;
}

inline Descriptor generate_descriptor(const GeneratorParams& params, const NetworkShape& shape,
                                      const NormalizedMdr& mdr) {
    const NormalizedMdr* item = &mdr;
    return generate_descriptors(params, shape, std::span<const NormalizedMdr* const>(&item, 1)).front();
}

// Head logits for one descriptor.
inline std::vector<double> discriminate(const DiscriminatorParams& params, std::span<const double> descriptor) {
    if (params.layers.empty()) throw ShapeError("discriminate: empty head");
    const std::size_t width = params.layers.front().weight.dim(1);
    if (descriptor.size() != width) {
        throw ShapeError("discriminate: descriptor length " + std::to_string(descriptor.size()) + ", expected " +
                         std::to_string(width));
    }
    Tape tape;
    const HeadGraph head(tape, params, false);
    const Var logits =
        head.logits(tape.constant(Tensor(Shape{width}, std::vector<double>(descriptor.begin(), descriptor.end()))));
    return {logits.value().values().begin(), logits.value().values().end()};
}

} // namespace mdrnet

#endif // MDRNET_NETWORK_HPP
