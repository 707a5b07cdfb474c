// SPDX-FileCopyrightText: 2026 The mdrnet Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mdrnet/adam.hpp"
#include "mdrnet/checkpoint.hpp"
#include "mdrnet/grad_check.hpp"
#include "mdrnet/network.hpp"
#include "mdrnet/ops.hpp"
#include "test_support.hpp"

namespace mdrnet {
namespace {

using testing::random_tensor;

// Scalar loss sum_i w_i * y_i with fixed random weights, so every output
// coordinate contributes a distinct gradient.
Var project(const Var& y, std::uint64_t seed = 99) {
    std::mt19937_64 rng(seed);
    return weighted_sum(y, random_tensor(rng, y.shape()));
}

GradCheckReport check(const ScalarFunction& f, std::vector<Tensor> inputs, double tol = 1e-6) {
    return grad_check(f, std::move(inputs), tol);
}

TEST(Tensor, ShapeAndValidation) {
    const Tensor t({2, 3}, 1.5);
    EXPECT_EQ(t.size(), 6u);
    EXPECT_EQ(t.rank(), 2u);
    EXPECT_EQ(t.dim(1), 3u);
    EXPECT_EQ(t.reshaped({3, 2}).shape(), (Shape{3, 2}));
    EXPECT_THROW(t.reshaped({4, 2}), ShapeError);
    EXPECT_THROW(Tensor({2, 0}), ShapeError);
    EXPECT_THROW(Tensor({2}, std::vector<double>{1.0}), ShapeError);
    EXPECT_EQ(shape_string({256, 2, 2}), "[256,2,2]");
}

TEST(Tape, SingleSweepVisitsEachNodeOnce) {
    Tape tape;
    const Var a = tape.leaf(Tensor({3}, 0.5));
    const Var b = tape.constant(Tensor({3}, 2.0));
    const Var c = hadamard(a, b);
    const Var d = add(c, a);
    const Var loss = weighted_sum(d, Tensor({3}, 1.0));
    tape.backward(loss);
    EXPECT_EQ(tape.backward_visits(), 3u);  // hadamard, add, weighted_sum
    ASSERT_NE(tape.grad(a), nullptr);
    for (double g : tape.grad(a)->values()) EXPECT_DOUBLE_EQ(g, 3.0);
    EXPECT_EQ(tape.grad(b), nullptr);
    EXPECT_THROW(tape.backward(loss), Error);
}

TEST(Tape, RejectsNonScalarRootAndForeignOperands) {
    Tape t1, t2;
    const Var a = t1.leaf(Tensor({2}));
    EXPECT_THROW(t1.backward(a), ShapeError);
    const Var b = t2.leaf(Tensor({2}));
    EXPECT_THROW(add(a, b), ShapeError);
}

TEST(Pointwise, Values) {
    Tape tape;
    const Var z = tape.constant(Tensor({2}, 0.0));
    EXPECT_EQ(sigmoid(z).value()[0], 0.5);
    EXPECT_EQ(tanh(z).value()[0], 0.0);
    std::mt19937_64 rng(1);
    const Tensor a = random_tensor(rng, {4, 3});
    EXPECT_EQ(hadamard(tape.constant(a), tape.constant(Tensor({4, 3}, 1.0))).value(), a);
    const Var lr = leaky_relu(tape.constant(Tensor({2}, std::vector<double>{-2.0, 3.0})));
    EXPECT_DOUBLE_EQ(lr.value()[0], -0.4);
    EXPECT_DOUBLE_EQ(lr.value()[1], 3.0);
    EXPECT_THROW(add(tape.constant(Tensor({2})), tape.constant(Tensor({3}))), ShapeError);
    EXPECT_THROW(hadamard(tape.constant(Tensor({2})), tape.constant(Tensor({2, 1}))), ShapeError);
}

TEST(Pointwise, GradientsAtRandomPoints) {
    std::mt19937_64 rng(7);
    const Tensor x = random_tensor(rng, {100});
    const Tensor y = random_tensor(rng, {100});
    const std::vector<std::pair<const char*, ScalarFunction>> unary{
        {"sigmoid", [](Tape&, std::span<const Var> v) { return project(sigmoid(v[0])); }},
        {"tanh", [](Tape&, std::span<const Var> v) { return project(tanh(v[0])); }},
        {"leaky", [](Tape&, std::span<const Var> v) { return project(leaky_relu(v[0])); }},
    };
    for (const auto& [name, f] : unary) {
        const auto r = check(f, {x});
        EXPECT_TRUE(r.passed) << name << " " << r.max_relative_error;
        EXPECT_EQ(r.coordinates, 100u);
    }
    const auto add_r = check([](Tape&, std::span<const Var> v) { return project(add(v[0], v[1])); }, {x, y});
    EXPECT_TRUE(add_r.passed) << add_r.max_relative_error;
    const auto had_r = check([](Tape&, std::span<const Var> v) { return project(hadamard(v[0], v[1])); }, {x, y});
    EXPECT_TRUE(had_r.passed) << had_r.max_relative_error;
}

TEST(ShapeOps, Gradients) {
    std::mt19937_64 rng(8);
    const Tensor x = random_tensor(rng, {6, 2, 2});
    const Tensor w = random_tensor(rng, {2, 2});
    auto r = check([](Tape&, std::span<const Var> v) { return project(hadamard_rows(v[0], v[1])); }, {x, w});
    EXPECT_TRUE(r.passed) << r.max_relative_error;
    r = check([](Tape&, std::span<const Var> v) { return project(reshape(v[0], {4, 6})); }, {x});
    EXPECT_TRUE(r.passed) << r.max_relative_error;
    r = check([](Tape&, std::span<const Var> v) { return project(slice_rows(v[0], 2, 5)); }, {x});
    EXPECT_TRUE(r.passed) << r.max_relative_error;
    r = check([](Tape&, std::span<const Var> v) { return project(mean_over_steps(v[0], 3)); }, {x});
    EXPECT_TRUE(r.passed) << r.max_relative_error;
    const Tensor b = random_tensor(rng, {5});
    r = check([](Tape&, std::span<const Var> v) { return project(repeat_elements(v[0], 4)); }, {b});
    EXPECT_TRUE(r.passed) << r.max_relative_error;
}

TEST(ShapeOps, Values) {
    Tape tape;
    const Var x = tape.constant(Tensor({3, 2}, std::vector<double>{1, 2, 3, 4, 5, 6}));
    EXPECT_EQ(slice_rows(x, 1, 3).value(), Tensor({2, 2}, std::vector<double>{3, 4, 5, 6}));
    // Step-major rows: step 0 = row 0, step 1 = row 1, step 2 = row 2 for one item.
    EXPECT_EQ(mean_over_steps(x, 3).value(), Tensor({1, 2}, std::vector<double>{3, 4}));
    EXPECT_EQ(repeat_elements(tape.constant(Tensor({2}, std::vector<double>{1, 2})), 3).value(),
              Tensor({6}, std::vector<double>{1, 1, 1, 2, 2, 2}));
    EXPECT_THROW(slice_rows(x, 2, 4), ShapeError);
    EXPECT_THROW(mean_over_steps(x, 2), ShapeError);
}

TEST(Conv2d, ZeroInputGivesZeroOutput) {
    Tape tape;
    std::mt19937_64 rng(2);
    const auto geo = same_ceil_geometry(30, 30, 4, 2);
    const Var y = conv2d(tape.constant(Tensor({1, 30, 30})), tape.constant(random_tensor(rng, {1, 1, 4, 4})),
                         tape.constant(Tensor({1})), geo);
    EXPECT_EQ(y.shape(), (Shape{1, 15, 15}));
    for (double v : y.value().values()) EXPECT_EQ(v, 0.0);
}

TEST(Conv2d, DeltaImageIsShiftedAndStrided) {
    const auto geo = same_ceil_geometry(12, 12, 4, 2);
    for (std::size_t ti = 0; ti < 4; ++ti)
        for (std::size_t tj = 0; tj < 4; ++tj)
            for (std::size_t dr : {2u, 5u, 9u})
                for (std::size_t dc : {0u, 7u, 11u}) {
                    Tape tape;
                    Tensor img({1, 12, 12});
                    img[dr * 12 + dc] = 1.0;
                    Tensor k({1, 1, 4, 4});
                    k[ti * 4 + tj] = 1.0;
                    const Var y = conv2d(tape.constant(img), tape.constant(k), std::nullopt, geo);
                    // Output (oy, ox) reads input (2*oy + ti - pad, 2*ox + tj - pad).
                    for (std::size_t oy = 0; oy < 6; ++oy)
                        for (std::size_t ox = 0; ox < 6; ++ox) {
                            const bool hit = 2 * oy + ti == dr + geo.pad_top && 2 * ox + tj == dc + geo.pad_left;
                            ASSERT_EQ(y.value()[oy * 6 + ox], hit ? 1.0 : 0.0);
                        }
                }
}

TEST(Conv2d, MatchesLoopOracle) {
    std::mt19937_64 rng(3);
    for (std::size_t hw : {4u, 5u, 7u, 30u}) {
        const auto geo = same_ceil_geometry(hw, hw + 1, 4, 2);
        const Tensor x = random_tensor(rng, {3, hw, hw + 1});
        const Tensor k = random_tensor(rng, {2, 3, 4, 4});
        const Tensor b = random_tensor(rng, {2});
        const std::vector<double> bias(b.values().begin(), b.values().end());
        Tape tape;
        const Var y = conv2d(tape.constant(x), tape.constant(k), tape.constant(b), geo);
        const std::size_t ho = (hw + 1) / 2, wo = (hw + 2) / 2;
        ASSERT_EQ(y.shape(), (Shape{2, ho, wo}));
        const auto ref = testing::conv_ref(x, k, &bias, 2, geo.pad_top, geo.pad_left, ho, wo);
        for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(y.value()[i], ref[i], 1e-12);
    }
}

TEST(Conv2d, SameCeilShapes) {
    for (std::size_t h = 4; h <= 40; ++h)
        for (std::size_t w : {4u, 9u, 30u}) {
            const auto geo = same_ceil_geometry(h, w, 4, 2);
            EXPECT_EQ(conv_output_extent(h, 4, 2, geo.pad_top, geo.pad_bottom), (h + 1) / 2);
            EXPECT_EQ(conv_output_extent(w, 4, 2, geo.pad_left, geo.pad_right), (w + 1) / 2);
            EXPECT_LE(geo.pad_top, geo.pad_bottom);
            EXPECT_LE(geo.pad_bottom - geo.pad_top, 1u);
        }
    std::size_t e = 30;
    std::vector<std::size_t> chain{e};
    for (int l = 0; l < 4; ++l) {
        const auto geo = same_ceil_geometry(e, e, 4, 2);
        e = conv_output_extent(e, 4, 2, geo.pad_top, geo.pad_bottom);
        chain.push_back(e);
    }
    EXPECT_EQ(chain, (std::vector<std::size_t>{30, 15, 8, 4, 2}));
}

TEST(Conv2d, BatchedEqualsPerItem) {
    std::mt19937_64 rng(4);
    const Tensor x = random_tensor(rng, {3, 2, 9, 9});
    const Tensor k = random_tensor(rng, {4, 2, 4, 4});
    const Tensor b = random_tensor(rng, {4});
    const auto geo = same_ceil_geometry(9, 9, 4, 2);
    Tape tape;
    const Var all = conv2d(tape.constant(x), tape.constant(k), tape.constant(b), geo);
    for (std::size_t i = 0; i < 3; ++i) {
        const Var one = conv2d(slice_rows(tape.constant(x), i, i + 1), tape.constant(k), tape.constant(b), geo);
        for (std::size_t j = 0; j < one.size(); ++j) EXPECT_NEAR(one.value()[j], all.value()[i * one.size() + j], 1e-12);
    }
}

TEST(Conv2d, Gradients) {
    std::mt19937_64 rng(5);
    const auto geo = same_ceil_geometry(7, 6, 4, 2);
    const Tensor x = random_tensor(rng, {2, 2, 7, 6});
    const Tensor k = random_tensor(rng, {3, 2, 4, 4});
    const Tensor b = random_tensor(rng, {3});
    const auto r = check(
        [geo](Tape&, std::span<const Var> v) { return project(conv2d(v[0], v[1], v[2], geo)); }, {x, k, b});
    EXPECT_TRUE(r.passed) << r.max_relative_error;
    const Conv2dGeometry pad1{1, 1, 1, 1, 1};
    const Tensor s = random_tensor(rng, {2, 2, 2});
    const Tensor k3 = random_tensor(rng, {2, 2, 3, 3});
    const auto r2 = check([pad1](Tape&, std::span<const Var> v) { return project(conv2d(v[0], v[1], std::nullopt, pad1)); },
                          {s, k3});
    EXPECT_TRUE(r2.passed) << r2.max_relative_error;
}

TEST(Conv2d, RejectsChannelMismatch) {
    Tape tape;
    EXPECT_THROW(conv2d(tape.constant(Tensor({2, 8, 8})), tape.constant(Tensor({1, 3, 4, 4})), std::nullopt,
                        same_ceil_geometry(8, 8, 4, 2)),
                 ShapeError);
}

TEST(ConvMatrix, EquivalentToConv2d) {
    std::mt19937_64 rng(6);
    const Conv2dGeometry pad1{1, 1, 1, 1, 1};
    const Tensor x = random_tensor(rng, {5, 3, 2, 2});
    const Tensor k = random_tensor(rng, {4, 3, 3, 3});
    Tape tape;
    const Var direct = conv2d(tape.constant(x), tape.constant(k), std::nullopt, pad1);
    const Var m = conv_matrix(tape.constant(k), 2, 2, pad1);
    EXPECT_EQ(m.shape(), (Shape{16, 12}));
    const Var lowered = fully_connected(tape.constant(x.reshaped({5, 12})), m, std::nullopt);
    for (std::size_t i = 0; i < direct.size(); ++i) EXPECT_NEAR(lowered.value()[i], direct.value()[i], 1e-13);

    const auto geo = same_ceil_geometry(5, 5, 4, 2);
    const Tensor k2 = random_tensor(rng, {2, 3, 4, 4});
    const auto r = check([geo](Tape&, std::span<const Var> v) { return project(conv_matrix(v[0], 5, 5, geo)); }, {k2});
    EXPECT_TRUE(r.passed) << r.max_relative_error;
}

TEST(FullyConnected, ValuesAndOracle) {
    Tape tape;
    std::mt19937_64 rng(9);
    const Tensor x = random_tensor(rng, {4});
    Tensor eye({4, 4});
    for (std::size_t i = 0; i < 4; ++i) eye[i * 4 + i] = 1.0;
    EXPECT_EQ(fully_connected(tape.constant(x), tape.constant(eye), tape.constant(Tensor({4}))).value(), x);
    const Tensor b = random_tensor(rng, {3});
    EXPECT_EQ(fully_connected(tape.constant(x), tape.constant(Tensor({3, 4})), tape.constant(b)).value(), b);

    const Tensor w = random_tensor(rng, {3, 4});
    const Var y = fully_connected(tape.constant(x), tape.constant(w), tape.constant(b));
    for (std::size_t o = 0; o < 3; ++o) {
        double s = b[o];
        for (std::size_t i = 0; i < 4; ++i) s += w[o * 4 + i] * x[i];
        EXPECT_NEAR(y.value()[o], s, 1e-14);
    }
    EXPECT_THROW(fully_connected(tape.constant(Tensor({5})), tape.constant(w), tape.constant(b)), ShapeError);
    EXPECT_THROW(fully_connected(tape.constant(x), tape.constant(w), tape.constant(Tensor({4}))), ShapeError);
}

TEST(FullyConnected, Gradients) {
    std::mt19937_64 rng(10);
    const Tensor x = random_tensor(rng, {3, 5});
    const Tensor w = random_tensor(rng, {4, 5});
    const Tensor b = random_tensor(rng, {4});
    auto r = check([](Tape&, std::span<const Var> v) { return project(fully_connected(v[0], v[1], v[2])); }, {x, w, b});
    EXPECT_TRUE(r.passed) << r.max_relative_error;
    const Tensor x1 = random_tensor(rng, {5});
    r = check([](Tape&, std::span<const Var> v) { return project(fully_connected(v[0], v[1], std::nullopt)); }, {x1, w});
    EXPECT_TRUE(r.passed) << r.max_relative_error;
}

TEST(SoftmaxCrossEntropy, UniformLogits) {
    for (std::size_t c : {2u, 5u, 41u}) {
        Tape tape;
        const Var logits = tape.leaf(Tensor({c}, 0.3));
        const int target = 1;
        const Var loss = softmax_cross_entropy(logits, std::span<const int>(&target, 1));
        EXPECT_NEAR(loss.value()[0], std::log(static_cast<double>(c)), 1e-14);
        tape.backward(loss);
        for (std::size_t i = 0; i < c; ++i) {
            EXPECT_NEAR((*tape.grad(logits))[i], 1.0 / static_cast<double>(c) - (i == 1 ? 1.0 : 0.0), 1e-15);
        }
    }
}

TEST(SoftmaxCrossEntropy, PropertiesAndGradients) {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 20; ++t) {
        const Tensor l = random_tensor(rng, {6}, -30.0, 30.0);
        const auto p = softmax(l.values());
        double sum = 0.0;
        for (double v : p) sum += v;
        EXPECT_NEAR(sum, 1.0, 1e-12);
        Tape tape;
        const int target = t % 6;
        EXPECT_GE(softmax_cross_entropy(tape.constant(l), std::span<const int>(&target, 1)).value()[0], 0.0);
    }
    const Tensor logits = random_tensor(rng, {4, 5}, -3.0, 3.0);
    const std::vector<int> targets{0, 4, 2, 2};
    const auto r = check(
        [&](Tape&, std::span<const Var> v) { return softmax_cross_entropy(v[0], targets); }, {logits});
    EXPECT_TRUE(r.passed) << r.max_relative_error;

    Tape tape;
    const int bad = 5;
    EXPECT_THROW(softmax_cross_entropy(tape.constant(Tensor({5})), std::span<const int>(&bad, 1)), ShapeError);
    const int neg = -1;
    EXPECT_THROW(softmax_cross_entropy(tape.constant(Tensor({5})), std::span<const int>(&neg, 1)), ShapeError);
}

TEST(SoftmaxCrossEntropy, LargeLogitsStayFinite) {
    Tape tape;
    const Var l = tape.constant(Tensor({3}, std::vector<double>{1000.0, -1000.0, 0.0}));
    const int target = 1;
    const double loss = softmax_cross_entropy(l, std::span<const int>(&target, 1)).value()[0];
    EXPECT_TRUE(std::isfinite(loss));
    EXPECT_NEAR(loss, 2000.0, 1e-9);
}

TEST(Adam, FirstStepIsLrTimesSign) {
    std::mt19937_64 rng(12);
    Tensor w = random_tensor(rng, {50});
    const Tensor start = w;
    Tensor g = random_tensor(rng, {50}, -5.0, 5.0);
    AdamState s;
    const double lr = 0.01;
    const ParamGrad pg{&w, &g};
    adam_step(std::span<const ParamGrad>(&pg, 1), s, lr);
    for (std::size_t i = 0; i < 50; ++i) {
        const double sign = g[i] > 0 ? 1.0 : -1.0;
        EXPECT_NEAR(w[i] - start[i], -lr * sign, lr * 1e-6);
    }
    EXPECT_EQ(s.step, 1u);
}

TEST(Adam, ZeroGradientLeavesParameters) {
    Tensor w({3}, 2.0);
    Tensor g({3}, 0.0);
    AdamState s;
    const ParamGrad pgs[] = {{&w, &g}, {&w, nullptr}};
    adam_step(std::span<const ParamGrad>(pgs, 1), s, 0.1);
    EXPECT_EQ(w, Tensor({3}, 2.0));
    EXPECT_EQ(s.step, 1u);
    AdamState s2;
    adam_step(std::span<const ParamGrad>(pgs + 1, 1), s2, 0.1);
    EXPECT_EQ(w, Tensor({3}, 2.0));
    EXPECT_EQ(s2.step, 1u);
}

TEST(Adam, QuadraticMatchesScalarReference) {
    Tensor w({1}, 1.0);
    AdamState s;
    double rw = 1.0, m = 0.0, v = 0.0;
    double prev = 1.0;
    for (int t = 1; t <= 3; ++t) {
        Tensor g({1}, 2.0 * w[0]);
        const ParamGrad pg{&w, &g};
        adam_step(std::span<const ParamGrad>(&pg, 1), s, 0.1);
        const double rg = 2.0 * rw;
        m = 0.9 * m + 0.1 * rg;
        v = 0.999 * v + 0.001 * rg * rg;
        rw -= 0.1 * (m / (1.0 - std::pow(0.9, t))) / (std::sqrt(v / (1.0 - std::pow(0.999, t))) + 1e-8);
        EXPECT_NEAR(w[0], rw, 1e-15);
        EXPECT_LT(w[0], prev);
        EXPECT_GT(w[0], 0.0);
        prev = w[0];
    }
}

TEST(Adam, DeterministicAndValidated) {
    std::mt19937_64 rng(13);
    const Tensor w0 = random_tensor(rng, {10});
    const Tensor g = random_tensor(rng, {10});
    Tensor a = w0, b = w0;
    AdamState sa, sb;
    for (int i = 0; i < 3; ++i) {
        const ParamGrad pa{&a, &g}, pb{&b, &g};
        adam_step(std::span<const ParamGrad>(&pa, 1), sa, 0.05);
        adam_step(std::span<const ParamGrad>(&pb, 1), sb, 0.05);
    }
    EXPECT_EQ(a, b);
    EXPECT_EQ(sa, sb);
    for (const auto& v : sa.second_moment)
        for (double x : v.values()) EXPECT_GE(x, 0.0);

    Tensor bad = g;
    bad[3] = std::nan("");
    const Tensor before = a;
    const AdamState state_before = sa;
    const ParamGrad pbad{&a, &bad};
    EXPECT_THROW(adam_step(std::span<const ParamGrad>(&pbad, 1), sa, 0.05), NumericError);
    EXPECT_EQ(a, before);
    EXPECT_EQ(sa, state_before);
    const ParamGrad pa{&a, &g};
    EXPECT_THROW(adam_step(std::span<const ParamGrad>(&pa, 1), sa, 0.0), ConfigError);
    EXPECT_THROW(adam_step(std::span<const ParamGrad>(&pa, 1), sa, -1.0), ConfigError);
    Tensor wrong({3});
    const ParamGrad pw{&a, &wrong};
    EXPECT_THROW(adam_step(std::span<const ParamGrad>(&pw, 1), sa, 0.1), ShapeError);
}

TEST(Adam, DecayedRate) {
    for (std::size_t e : {0u, 1u, 7u, 59u}) {
        EXPECT_EQ(decayed_rate(0.01, 0.995, e), 0.01 * std::pow(0.995, static_cast<double>(e)));
    }
    EXPECT_EQ(decayed_rate(0.01, 0.995, 0), 0.01);
}

TEST(GradCheck, LinearIsExact) {
    std::mt19937_64 rng(14);
    const Tensor x = random_tensor(rng, {20});
    const auto r = check([](Tape&, std::span<const Var> v) { return project(v[0]); }, {x}, 1e-8);
    EXPECT_TRUE(r.passed);
    EXPECT_LT(r.max_relative_error, 1e-8);
}

TEST(GradCheck, ReportsWrongGradient) {
    // y = x^2 recorded with a deliberately wrong backward (factor 3 instead of 2).
    const ScalarFunction bad = [](Tape& tape, std::span<const Var> v) {
        const Var x = v[0];
        Tensor out({1}, x.value()[0] * x.value()[0]);
        const std::size_t id = x.id();
        return tape.record(std::move(out), {x}, [id](Tape& t, const Tensor& g) {
            (*t.grad_sink(id))[0] += 3.0 * t.value(id)[0] * g[0];
        });
    };
    const auto r = grad_check(bad, {Tensor({1}, 0.7)}, 1e-4);
    EXPECT_FALSE(r.passed);
    EXPECT_NEAR(r.max_relative_error, 1.0 / 3.0, 1e-6);
}

TEST(GradCheck, TinyEncoder) {
    NetworkShape shape;
    shape.input_size = 6;
    shape.encoder_channels = {2, 3, 2, 2};
    std::mt19937_64 rng(15);
    SliceEncoderParams enc = init_params(3, Mode::cnn_only, shape).generator.encoder;
    std::vector<Tensor> inputs{random_tensor(rng, {1, 1, 6, 6}, 0.0, 1.0)};
    for (const auto& l : enc.layers) {
        inputs.push_back(random_tensor(rng, l.kernel.shape()));
        inputs.push_back(random_tensor(rng, l.bias.shape()));
    }
    const auto r = grad_check(
        [](Tape&, std::span<const Var> v) {
            Var x = v[0];
            std::size_t e = 6;
            for (std::size_t l = 0; l < 4; ++l) {
                x = leaky_relu(conv2d(x, v[1 + 2 * l], v[2 + 2 * l], same_ceil_geometry(e, e, 4, 2)));
                e = (e + 1) / 2;
            }
            return project(x);
        },
        inputs, 1e-4);
    EXPECT_TRUE(r.passed) << r.max_relative_error;
}

TEST(GradCheck, ConvLstmStep) {
    std::mt19937_64 rng(16);
    const ConvLstmParams p = testing::random_lstm(rng, 4, 2, 0.5);
    std::vector<Tensor> inputs{p.w_xi, p.w_xf, p.w_xc, p.w_xo, p.w_hi, p.w_hf, p.w_hc, p.w_ho,
                               p.w_ci, p.w_cf, p.w_co, p.b_i,  p.b_f,  p.b_c,  p.b_o};
    for (int i = 0; i < 3; ++i) inputs.push_back(random_tensor(rng, {1, 4, 2, 2}));
    const auto r = grad_check(
        [](Tape&, std::span<const Var> v) {
            const Conv2dGeometry geo{1, 1, 1, 1, 1};
            auto gate = [&](std::size_t wx, std::size_t wh, std::size_t b) {
                return add(conv2d(v[15], v[wx], v[b], geo), conv2d(v[16], v[wh], std::nullopt, geo));
            };
            const Var c = v[17];
            const Var i = sigmoid(add(gate(0, 4, 11), hadamard_rows(c, v[8])));
            const Var f = sigmoid(add(gate(1, 5, 12), hadamard_rows(c, v[9])));
            const Var cell = add(hadamard(f, c), hadamard(i, tanh(gate(2, 6, 13))));
            const Var o = sigmoid(add(gate(3, 7, 14), hadamard_rows(cell, v[10])));
            return add(project(cell, 1), project(hadamard(o, tanh(cell)), 2));
        },
        inputs, 1e-4);
    EXPECT_TRUE(r.passed) << r.max_relative_error;
}

TEST(GradCheck, GeneratorLstmStep) {
    // Same check through the generator graph's lowered ConvLSTM.
    std::mt19937_64 rng(17);
    const NetworkShape shape = testing::small_shape();
    const ConvLstmParams p = testing::random_lstm(rng, 4, 2, 0.5);
    std::vector<Tensor> inputs{p.w_xi, p.w_xf, p.w_xc, p.w_xo, p.w_hi, p.w_hf, p.w_hc, p.w_ho,
                               p.w_ci, p.w_cf, p.w_co, p.b_i,  p.b_f,  p.b_c,  p.b_o};
    for (int i = 0; i < 3; ++i) inputs.push_back(random_tensor(rng, {2, 4, 2, 2}));
    const auto r = grad_check(
        [&](Tape&, std::span<const Var> v) {
            const GeneratorGraph graph(std::vector<Var>(v.begin(), v.begin() + 15), shape, Readout::cell, 0, true);
            const auto next = graph.lstm_step(v[15], GeneratorGraph::State{v[16], v[17]});
            return add(project(next.cell, 1), project(next.hidden, 2));
        },
        inputs, 1e-4);
    EXPECT_TRUE(r.passed) << r.max_relative_error;
}

TEST(Checkpoint, RoundTripAndLayout) {
    std::mt19937_64 rng(18);
    const std::vector<NamedTensor> records{{"gen/enc0/kernel", random_tensor(rng, {2, 1, 4, 4})},
                                           {"/meta/epoch", Tensor({1}, 3.0)}};
    const auto bytes = encode_checkpoint(records);
    ASSERT_GE(bytes.size(), 7u + 4u);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 7), "MDRNET1");
    EXPECT_EQ(bytes[7], 15);  // little-endian name length
    EXPECT_EQ(bytes[8], 0);
    EXPECT_EQ(decode_checkpoint(bytes), records);

    auto bad = bytes;
    bad[0] = 'X';
    EXPECT_THROW(decode_checkpoint(bad), FormatError);
    auto truncated = bytes;
    truncated.pop_back();
    EXPECT_THROW(decode_checkpoint(truncated), FormatError);
}

} // namespace
} // namespace mdrnet
