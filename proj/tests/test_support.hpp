// SPDX-FileCopyrightText: 2026 The mdrnet Authors
// SPDX-License-Identifier: Apache-2.0

// Independent reference implementations shared by the unit and acceptance tests.

#ifndef MDRNET_TESTS_TEST_SUPPORT_HPP
#define MDRNET_TESTS_TEST_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "mdrnet/mdr.hpp"
#include "mdrnet/network.hpp"
#include "mdrnet/tensor.hpp"
#include "mdrnet/voxel_grid.hpp"

namespace mdrnet::testing {

inline VoxelGrid random_grid(std::mt19937_64& rng, std::size_t n = 30, double density = -1.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double p = density < 0.0 ? u(rng) : density;
    VoxelGrid g = VoxelGrid::cube(n);
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y)
            for (std::size_t z = 0; z < n; ++z) g.set(x, y, z, u(rng) < p);
    return g;
}

inline Tensor random_tensor(std::mt19937_64& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Tensor t(std::move(shape));
    for (auto& v : t.values()) v = u(rng);
    return t;
}

// Cell (axis, i, r, c) by direct summation over the segment [i*n, (i+1)*n).
inline std::int32_t mdr_oracle_cell(const VoxelGrid& g, std::size_t k, int axis, std::size_t i, std::size_t r,
                                    std::size_t c) {
    const std::size_t n = g.dims().x / k;
    std::int32_t sum = 0;
    for (std::size_t t = i * n; t < (i + 1) * n; ++t) {
        switch (axis) {
        case 0: sum += g.at(r, c, t); break;  // z-slices: (x, y)
        case 1: sum += g.at(t, r, c); break;  // x-slices: (y, z)
        default: sum += g.at(r, t, c); break; // y-slices: (x, z)
        }
    }
    return sum;
}

inline bool mdr_matches_oracle(const VoxelGrid& g, const MdrSequence& m) {
    const std::size_t dim = g.dims().x, k = m.k();
    if (m.slice_count() != 3 * k) return false;
    for (int axis = 0; axis < 3; ++axis)
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t r = 0; r < dim; ++r)
                for (std::size_t c = 0; c < dim; ++c) {
                    if (m.at(axis * k + i, r, c) != mdr_oracle_cell(g, k, axis, i, r, c)) return false;
                }
    return true;
}

inline std::vector<std::size_t> divisors(std::size_t n) {
    std::vector<std::size_t> out;
    for (std::size_t d = 1; d <= n; ++d)
        if (n % d == 0) out.push_back(d);
    return out;
}

inline double sigmoid_ref(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Direct loop cross-correlation of x [Ci,H,W] with kernel [Co,Ci,Kh,Kw].
inline std::vector<double> conv_ref(const Tensor& x, const Tensor& k, const std::vector<double>* bias,
                                    std::size_t stride, std::size_t pad_top, std::size_t pad_left, std::size_t ho,
                                    std::size_t wo) {
    const std::size_t ci = x.dim(0), h = x.dim(1), w = x.dim(2);
    const std::size_t co = k.dim(0), kh = k.dim(2), kw = k.dim(3);
    std::vector<double> out(co * ho * wo, 0.0);
    for (std::size_t o = 0; o < co; ++o)
        for (std::size_t oy = 0; oy < ho; ++oy)
            for (std::size_t ox = 0; ox < wo; ++ox) {
                double s = bias ? (*bias)[o] : 0.0;
                for (std::size_t c = 0; c < ci; ++c)
                    for (std::size_t i = 0; i < kh; ++i)
                        for (std::size_t j = 0; j < kw; ++j) {
                            const long long r = static_cast<long long>(oy * stride + i) - static_cast<long long>(pad_top);
                            const long long q = static_cast<long long>(ox * stride + j) - static_cast<long long>(pad_left);
                            if (r < 0 || q < 0 || r >= static_cast<long long>(h) || q >= static_cast<long long>(w)) continue;
                            s += x[(c * h + r) * w + q] * k[((o * ci + c) * kh + i) * kw + j];
                        }
                out[(o * ho + oy) * wo + ox] = s;
            }
    return out;
}

struct LstmRef {
    std::vector<double> hidden, cell;
};

// Scalar-loop ConvLSTM step with 3x3 / pad-1 kernels and Hadamard peepholes.
inline LstmRef convlstm_ref(const ConvLstmParams& p, const Tensor& x, const Tensor& h, const Tensor& c) {
    const std::size_t ch = x.dim(0), e = x.dim(1), cells = ch * e * e;
    auto conv = [&](const Tensor& in, const Tensor& k) { return conv_ref(in, k, nullptr, 1, 1, 1, e, e); };
    const auto xi = conv(x, p.w_xi), xf = conv(x, p.w_xf), xc = conv(x, p.w_xc), xo = conv(x, p.w_xo);
    const auto hi = conv(h, p.w_hi), hf = conv(h, p.w_hf), hc = conv(h, p.w_hc), ho = conv(h, p.w_ho);
    LstmRef out{std::vector<double>(cells), std::vector<double>(cells)};
    for (std::size_t q = 0; q < cells; ++q) {
        const std::size_t ch_idx = q / (e * e);
        const double ig = sigmoid_ref(xi[q] + hi[q] + p.w_ci[q] * c[q] + p.b_i[ch_idx]);
        const double fg = sigmoid_ref(xf[q] + hf[q] + p.w_cf[q] * c[q] + p.b_f[ch_idx]);
        const double cand = std::tanh(xc[q] + hc[q] + p.b_c[ch_idx]);
        const double cell = fg * c[q] + ig * cand;
        const double og = sigmoid_ref(xo[q] + ho[q] + p.w_co[q] * cell + p.b_o[ch_idx]);
        out.cell[q] = cell;
        out.hidden[q] = og * std::tanh(cell);
    }
    return out;
}

inline ConvLstmParams random_lstm(std::mt19937_64& rng, std::size_t ch, std::size_t e, double scale = 1.0) {
    auto k = [&] { return random_tensor(rng, {ch, ch, 3, 3}, -scale, scale); };
    auto peep = [&] { return random_tensor(rng, {ch, e, e}, -scale, scale); };
    auto b = [&] { return random_tensor(rng, {ch}, -scale, scale); };
    ConvLstmParams p;
    p.w_xi = k(); p.w_xf = k(); p.w_xc = k(); p.w_xo = k();
    p.w_hi = k(); p.w_hf = k(); p.w_hc = k(); p.w_ho = k();
    p.w_ci = peep(); p.w_cf = peep(); p.w_co = peep();
    p.b_i = b(); p.b_f = b(); p.b_c = b(); p.b_o = b();
    return p;
}

// Downsized network: 30x30 slices, encoder channels {2, 2, 3, 4}, so the
// ConvLSTM runs on 4x2x2 states.
inline NetworkShape small_shape(std::size_t num_classes = 4) {
    NetworkShape s;
    s.encoder_channels = {2, 2, 3, 4};
    s.dis_hidden = {5, 3};
    s.classifier_hidden = {5};
    s.num_classes = num_classes;
    return s;
}

inline double relative_error(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path = std::filesystem::temp_directory_path() /
               ("mdrnet_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

} // namespace mdrnet::testing

#endif // MDRNET_TESTS_TEST_SUPPORT_HPP
