// SPDX-FileCopyrightText: 2026 The mdrnet Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MDRNET_OPS_HPP
#define MDRNET_OPS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mdrnet/error.hpp"
#include "mdrnet/tape.hpp"
#include "mdrnet/tensor.hpp"

// Differentiable primitives recorded on a Tape. Batched ops take the batch
// as the leading dimension; conv2d and fully_connected also accept a single
// unbatched sample.

namespace mdrnet {

namespace detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

inline void require_same_shape(const Var& a, const Var& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
    }
}

template <class Forward, class Derivative>
Var unary_map(const Var& x, Forward f, Derivative df_from_xy) {
    const Tensor& in = x.value();
    Tensor out(in.shape());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
    const std::size_t xid = x.id();
    const std::size_t yid = x.tape().size();
    return x.tape().record(std::move(out), {x}, [xid, yid, df_from_xy](Tape& t, const Tensor& g) {
        Tensor* gx = t.grad_sink(xid);
        const Tensor& xv = t.value(xid);
        const Tensor& yv = t.value(yid);
        for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i] * df_from_xy(xv[i], yv[i]);
    });
}

} // namespace detail

inline double sigmoid(double v) noexcept { return 1.0 / (1.0 + std::exp(-v)); }

inline Var add(const Var& a, const Var& b) {
    detail::require_same_shape(a, b, "add");
    Tensor out = a.value();
    const Tensor& bv = b.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
    const std::size_t aid = a.id(), bid = b.id();
    return a.tape().record(std::move(out), {a, b}, [aid, bid](Tape& t, const Tensor& g) {
        for (std::size_t id : {aid, bid}) {
            if (Tensor* s = t.grad_sink(id)) {
                for (std::size_t i = 0; i < g.size(); ++i) (*s)[i] += g[i];
            }
        }
    });
}

// Elementwise (Hadamard) product.
inline Var hadamard(const Var& a, const Var& b) {
    detail::require_same_shape(a, b, "hadamard");
    Tensor out = a.value();
    const Tensor& bv = b.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
    const std::size_t aid = a.id(), bid = b.id();
    return a.tape().record(std::move(out), {a, b}, [aid, bid](Tape& t, const Tensor& g) {
        const Tensor& av = t.value(aid);
        const Tensor& bv2 = t.value(bid);
        if (Tensor* s = t.grad_sink(aid)) {
            for (std::size_t i = 0; i < g.size(); ++i) (*s)[i] += g[i] * bv2[i];
        }
        if (Tensor* s = t.grad_sink(bid)) {
            for (std::size_t i = 0; i < g.size(); ++i) (*s)[i] += g[i] * av[i];
        }
    });
}

// Hadamard product of every batch row of x with a shared weight tensor w,
// where x.shape() == [B] ++ w.shape(). Also accepts x.shape() == w.shape().
inline Var hadamard_rows(const Var& x, const Var& w) {
    const Shape& xs = x.shape();
    const Shape& ws = w.shape();
    const bool batched = xs.size() == ws.size() + 1 && std::equal(ws.begin(), ws.end(), xs.begin() + 1);
    if (!batched && xs != ws) {
        throw ShapeError("hadamard_rows: shape mismatch " + shape_string(xs) + " vs " + shape_string(ws));
    }
    const std::size_t row = w.size();
    const std::size_t rows = x.size() / row;
    Tensor out = x.value();
    const Tensor& wv = w.value();
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t i = 0; i < row; ++i) out[r * row + i] *= wv[i];
    const std::size_t xid = x.id(), wid = w.id();
    return x.tape().record(std::move(out), {x, w}, [xid, wid, row, rows](Tape& t, const Tensor& g) {
        const Tensor& xv = t.value(xid);
        const Tensor& wv2 = t.value(wid);
        if (Tensor* s = t.grad_sink(xid)) {
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t i = 0; i < row; ++i) (*s)[r * row + i] += g[r * row + i] * wv2[i];
        }
        if (Tensor* s = t.grad_sink(wid)) {
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t i = 0; i < row; ++i) (*s)[i] += g[r * row + i] * xv[r * row + i];
        }
    });
}

inline Var sigmoid(const Var& x) {
    return detail::unary_map(
        x, [](double v) { return sigmoid(v); }, [](double, double y) { return y * (1.0 - y); });
}

inline Var tanh(const Var& x) {
    return detail::unary_map(
        x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

inline constexpr double kLeakySlope = 0.2;

inline Var leaky_relu(const Var& x, double slope = kLeakySlope) {
    return detail::unary_map(
        x, [slope](double v) { return v > 0.0 ? v : slope * v; },
        [slope](double v, double) { return v > 0.0 ? 1.0 : slope; });
}

// View with a different shape over the same values.
inline Var reshape(const Var& x, Shape shape) {
    Tensor out = x.value().reshaped(std::move(shape));
    const std::size_t xid = x.id();
    return x.tape().record(std::move(out), {x}, [xid](Tape& t, const Tensor& g) {
        Tensor* s = t.grad_sink(xid);
        for (std::size_t i = 0; i < g.size(); ++i) (*s)[i] += g[i];
    });
}

// Rows [begin, end) along the leading dimension.
inline Var slice_rows(const Var& x, std::size_t begin, std::size_t end) {
    const Shape& xs = x.shape();
    if (xs.empty() || begin >= end || end > xs[0]) throw ShapeError("slice_rows: bad range");
    const std::size_t row = x.size() / xs[0];
    Shape os = xs;
    os[0] = end - begin;
    const auto& xv = x.value();
    Tensor out(os, std::vector<double>(xv.data() + begin * row, xv.data() + end * row));
    const std::size_t xid = x.id();
    return x.tape().record(std::move(out), {x}, [xid, begin, row](Tape& t, const Tensor& g) {
        Tensor* s = t.grad_sink(xid);
        for (std::size_t i = 0; i < g.size(); ++i) (*s)[begin * row + i] += g[i];
    });
}

// x has leading dimension steps*B laid out step-major (row = step*B + b);
// returns the [B, ...] mean over steps.
inline Var mean_over_steps(const Var& x, std::size_t steps) {
    const Shape& xs = x.shape();
    if (xs.empty() || steps == 0 || xs[0] % steps != 0) throw ShapeError("mean_over_steps: bad step count");
    const std::size_t batch = xs[0] / steps;
    const std::size_t block = batch * (x.size() / xs[0]);
    Shape os = xs;
    os[0] = batch;
    Tensor out(os);
    const Tensor& xv = x.value();
    const double inv = 1.0 / static_cast<double>(steps);
    for (std::size_t s = 0; s < steps; ++s)
        for (std::size_t i = 0; i < block; ++i) out[i] += xv[s * block + i];
    for (std::size_t i = 0; i < block; ++i) out[i] *= inv;
    const std::size_t xid = x.id();
    return x.tape().record(std::move(out), {x}, [xid, steps, block, inv](Tape& t, const Tensor& g) {
        Tensor* sink = t.grad_sink(xid);
        for (std::size_t s = 0; s < steps; ++s)
            for (std::size_t i = 0; i < block; ++i) (*sink)[s * block + i] += g[i] * inv;
    });
}

// Scalar sum_i w_i * x_i with a constant weight tensor; used to reduce
// tensor outputs to a scalar for gradient checks.
inline Var weighted_sum(const Var& x, const Tensor& weights) {
    if (weights.size() != x.size()) throw ShapeError("weighted_sum: size mismatch");
    double acc = 0.0;
    const Tensor& xv = x.value();
    for (std::size_t i = 0; i < xv.size(); ++i) acc += weights[i] * xv[i];
    const std::size_t xid = x.id();
    return x.tape().record(Tensor::scalar(acc), {x}, [xid, weights](Tape& t, const Tensor& g) {
        Tensor* s = t.grad_sink(xid);
        for (std::size_t i = 0; i < weights.size(); ++i) (*s)[i] += g[0] * weights[i];
    });
}

// Spatial padding / stride for conv2d.
struct Conv2dGeometry {
    std::size_t stride = 1;
    std::size_t pad_top = 0;
    std::size_t pad_bottom = 0;
    std::size_t pad_left = 0;
    std::size_t pad_right = 0;
};

// "same-ceil": output size ceil(in / stride) with the total padding split
// low = floor(total / 2), high = total - low.
inline Conv2dGeometry same_ceil_geometry(std::size_t height, std::size_t width, std::size_t kernel,
                                         std::size_t stride) {
    auto split = [&](std::size_t in, std::size_t& lo, std::size_t& hi) {
        const std::size_t out = (in + stride - 1) / stride;
        const long long total = std::max<long long>(
            0, static_cast<long long>((out - 1) * stride + kernel) - static_cast<long long>(in));
        lo = static_cast<std::size_t>(total / 2);
        hi = static_cast<std::size_t>(total) - lo;
    };
    Conv2dGeometry g;
    g.stride = stride;
    split(height, g.pad_top, g.pad_bottom);
    split(width, g.pad_left, g.pad_right);
    return g;
}

inline std::size_t conv_output_extent(std::size_t in, std::size_t kernel, std::size_t stride, std::size_t lo,
                                      std::size_t hi) {
    if (in + lo + hi < kernel) throw ShapeError("conv2d: kernel larger than padded input");
    return (in + lo + hi - kernel) / stride + 1;
}

namespace detail {

struct ConvDims {
    std::size_t batch, ci, h, w, co, kh, kw, ho, wo;
    Conv2dGeometry geo;

    std::size_t plane() const { return ho * wo; }

    long long in_row(std::size_t oh, std::size_t i) const {
        return static_cast<long long>(oh * geo.stride + i) - static_cast<long long>(geo.pad_top);
    }
    long long in_col(std::size_t ow, std::size_t j) const {
        return static_cast<long long>(ow * geo.stride + j) - static_cast<long long>(geo.pad_left);
    }
    bool inside(long long r, long long c) const {
        return r >= 0 && c >= 0 && r < static_cast<long long>(h) && c < static_cast<long long>(w);
    }

};

// out [B, Co, P] from the [Co, B*P] product plus bias.
inline void write_output(Tensor& out, const RowMatrix& product, const ConvDims& d, const double* bias) {
    const std::size_t plane = d.plane(), cols = d.batch * plane;
    for (std::size_t b = 0; b < d.batch; ++b)
        for (std::size_t o = 0; o < d.co; ++o) {
            const double bo = bias ? bias[o] : 0.0;
            const double* src = product.data() + o * cols + b * plane;
            double* dst = out.data() + (b * d.co + o) * plane;
            for (std::size_t p = 0; p < plane; ++p) dst[p] = src[p] + bo;
        }
}

inline RowMatrix im2col(const double* x, const ConvDims& d) {
    const std::size_t plane = d.plane(), cols = d.batch * plane;
    RowMatrix m = RowMatrix::Zero(d.ci * d.kh * d.kw, cols);
    for (std::size_t c = 0; c < d.ci; ++c)
        for (std::size_t i = 0; i < d.kh; ++i)
            for (std::size_t j = 0; j < d.kw; ++j) {
                double* dst = m.data() + ((c * d.kh + i) * d.kw + j) * cols;
                for (std::size_t b = 0; b < d.batch; ++b) {
                    const double* src = x + (b * d.ci + c) * d.h * d.w;
                    for (std::size_t oh = 0; oh < d.ho; ++oh) {
                        const long long r = d.in_row(oh, i);
                        for (std::size_t ow = 0; ow < d.wo; ++ow) {
                            const long long cc = d.in_col(ow, j);
                            if (d.inside(r, cc)) dst[b * plane + oh * d.wo + ow] = src[r * static_cast<long long>(d.w) + cc];
                        }
                    }
                }
            }
    return m;
}

} // namespace detail

// Cross-correlation of x [B,Ci,H,W] (or [Ci,H,W]) with kernel [Co,Ci,Kh,Kw]
// plus optional per-channel bias [Co]. Padded cells are zero.
inline Var conv2d(const Var& x, const Var& kernel, const std::optional<Var>& bias, const Conv2dGeometry& geo) {
    const Shape& xs = x.shape();
    const Shape& ks = kernel.shape();
    const bool unbatched = xs.size() == 3;
    if ((xs.size() != 3 && xs.size() != 4) || ks.size() != 4) throw ShapeError("conv2d: expected [B,C,H,W] input");
    detail::ConvDims d{};
    d.batch = unbatched ? 1 : xs[0];
    d.ci = xs[xs.size() - 3];
    d.h = xs[xs.size() - 2];
    d.w = xs[xs.size() - 1];
    d.co = ks[0];
    d.kh = ks[2];
    d.kw = ks[3];
    d.geo = geo;
    if (ks[1] != d.ci) {
        throw ShapeError("conv2d: input has " + std::to_string(d.ci) + " channels, kernel expects " +
                         std::to_string(ks[1]));
    }
    if (bias && bias->shape() != Shape{d.co}) throw ShapeError("conv2d: bias must have shape [C_out]");
    if (geo.stride == 0) throw ShapeError("conv2d: stride must be positive");
    d.ho = conv_output_extent(d.h, d.kh, geo.stride, geo.pad_top, geo.pad_bottom);
    d.wo = conv_output_extent(d.w, d.kw, geo.stride, geo.pad_left, geo.pad_right);
    const std::size_t plane = d.plane();
    const std::size_t rows = d.ci * d.kh * d.kw;
    const std::size_t cols = d.batch * plane;

    const double* xv = x.value().data();
    const double* kv = kernel.value().data();
    const auto patches = std::make_shared<const detail::RowMatrix>(detail::im2col(xv, d));
    detail::RowMatrix product(d.co, cols);
    product.noalias() = detail::ConstMatrixMap(kv, d.co, rows) * *patches;
    Tensor out(unbatched ? Shape{d.co, d.ho, d.wo} : Shape{d.batch, d.co, d.ho, d.wo});
    detail::write_output(out, product, d, bias ? bias->value().data() : nullptr);

    const std::size_t xid = x.id(), kid = kernel.id();
    const std::optional<std::size_t> bid = bias ? std::optional<std::size_t>(bias->id()) : std::nullopt;
    auto backward = [d, xid, kid, bid, patches, rows, cols, plane](Tape& t, const Tensor& g) {
        detail::RowMatrix gmat(d.co, cols);
        for (std::size_t b = 0; b < d.batch; ++b)
            for (std::size_t o = 0; o < d.co; ++o) {
                const double* src = g.data() + (b * d.co + o) * plane;
                std::copy(src, src + plane, gmat.data() + o * cols + b * plane);
            }
        if (bid) {
            if (Tensor* gb = t.grad_sink(*bid)) {
                for (std::size_t o = 0; o < d.co; ++o) (*gb)[o] += gmat.row(o).sum();
            }
        }
        Tensor* gk = t.grad_sink(kid);
        Tensor* gx = t.grad_sink(xid);
        const double* kv2 = t.value(kid).data();
        if (gk) detail::MatrixMap(gk->data(), d.co, rows).noalias() += gmat * patches->transpose();
        if (gx) {
            const detail::RowMatrix dcol = detail::ConstMatrixMap(kv2, d.co, rows).transpose() * gmat;
            for (std::size_t c = 0; c < d.ci; ++c)
                for (std::size_t i = 0; i < d.kh; ++i)
                    for (std::size_t j = 0; j < d.kw; ++j) {
                        const double* src = dcol.data() + ((c * d.kh + i) * d.kw + j) * cols;
                        for (std::size_t b = 0; b < d.batch; ++b) {
                            double* dst = gx->data() + (b * d.ci + c) * d.h * d.w;
                            for (std::size_t oh = 0; oh < d.ho; ++oh) {
                                const long long r = d.in_row(oh, i);
                                for (std::size_t ow = 0; ow < d.wo; ++ow) {
                                    const long long cc = d.in_col(ow, j);
                                    if (d.inside(r, cc)) {
                                        dst[r * static_cast<long long>(d.w) + cc] += src[b * plane + oh * d.wo + ow];
                                    }
                                }
                            }
                        }
                    }
        }
    };
    if (bias) return x.tape().record(std::move(out), {x, kernel, *bias}, std::move(backward));
    return x.tape().record(std::move(out), {x, kernel}, std::move(backward));
}

// Dense [Co*Ho*Wo, Ci*H*W] operator of a cross-correlation with kernel
// [Co,Ci,Kh,Kw] over [Ci,H,W] inputs, so that fully_connected on flattened
// inputs reproduces conv2d without bias. Only sensible for small maps.
inline Var conv_matrix(const Var& kernel, std::size_t h, std::size_t w, const Conv2dGeometry& geo) {
    const Shape& ks = kernel.shape();
    if (ks.size() != 4) throw ShapeError("conv_matrix: kernel must be [Co,Ci,Kh,Kw]");
    if (geo.stride == 0) throw ShapeError("conv_matrix: stride must be positive");
    detail::ConvDims d{};
    d.batch = 1;
    d.co = ks[0];
    d.ci = ks[1];
    d.kh = ks[2];
    d.kw = ks[3];
    d.h = h;
    d.w = w;
    d.geo = geo;
    d.ho = conv_output_extent(h, d.kh, geo.stride, geo.pad_top, geo.pad_bottom);
    d.wo = conv_output_extent(w, d.kw, geo.stride, geo.pad_left, geo.pad_right);

    // (output position, input position, tap) triples that touch real input cells.
    struct Link {
        std::size_t out, in, tap;
    };
    auto links = std::make_shared<std::vector<Link>>();
    for (std::size_t oh = 0; oh < d.ho; ++oh)
        for (std::size_t ow = 0; ow < d.wo; ++ow)
            for (std::size_t i = 0; i < d.kh; ++i)
                for (std::size_t j = 0; j < d.kw; ++j) {
                    const long long r = d.in_row(oh, i), c = d.in_col(ow, j);
                    if (!d.inside(r, c)) continue;
                    links->push_back({oh * d.wo + ow, static_cast<std::size_t>(r) * w + static_cast<std::size_t>(c),
                                      i * d.kw + j});
                }

    const std::size_t plane_out = d.plane(), plane_in = h * w, taps = d.kh * d.kw;
    const std::size_t cols = d.ci * plane_in;
    Tensor out(Shape{d.co * plane_out, cols}, 0.0);
    const double* kv = kernel.value().data();
    for (std::size_t o = 0; o < d.co; ++o)
        for (std::size_t c = 0; c < d.ci; ++c) {
            const double* kt = kv + (o * d.ci + c) * taps;
            for (const Link& l : *links) out[(o * plane_out + l.out) * cols + c * plane_in + l.in] = kt[l.tap];
        }

    const std::size_t kid = kernel.id();
    return kernel.tape().record(std::move(out), {kernel}, [=](Tape& t, const Tensor& g) {
        Tensor* gk = t.grad_sink(kid);
        if (!gk) return;
        for (std::size_t o = 0; o < d.co; ++o)
            for (std::size_t c = 0; c < d.ci; ++c) {
                double* kt = gk->data() + (o * d.ci + c) * taps;
                for (const Link& l : *links) kt[l.tap] += g[(o * plane_out + l.out) * cols + c * plane_in + l.in];
            }
    });
}

// [C] -> [C*times], each element repeated times in a row.
inline Var repeat_elements(const Var& x, std::size_t times) {
    if (x.shape().size() != 1 || times == 0) throw ShapeError("repeat_elements: expected a vector and times > 0");
    const std::size_t n = x.size();
    Tensor out(Shape{n * times});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t r = 0; r < times; ++r) out[i * times + r] = x.value()[i];
    const std::size_t xid = x.id();
    return x.tape().record(std::move(out), {x}, [=](Tape& t, const Tensor& g) {
        Tensor* gx = t.grad_sink(xid);
        if (!gx) return;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t r = 0; r < times; ++r) (*gx)[i] += g[i * times + r];
    });
}

// y = W x + b for x [F_in] or each row of x [B, F_in]; W is [F_out, F_in].
inline Var fully_connected(const Var& x, const Var& weight, const std::optional<Var>& bias) {
    const Shape& xs = x.shape();
    const Shape& ws = weight.shape();
    if (ws.size() != 2 || (xs.size() != 1 && xs.size() != 2)) throw ShapeError("fully_connected: bad ranks");
    const std::size_t fo = ws[0], fi = ws[1];
    const bool unbatched = xs.size() == 1;
    const std::size_t batch = unbatched ? 1 : xs[0];
    if (xs.back() != fi) {
        throw ShapeError("fully_connected: input width " + std::to_string(xs.back()) + " does not match weight " +
                         shape_string(ws));
    }
    if (bias && bias->shape() != Shape{fo}) throw ShapeError("fully_connected: bias must have shape [F_out]");

    Tensor out(unbatched ? Shape{fo} : Shape{batch, fo});
    detail::MatrixMap y(out.data(), batch, fo);
    y.noalias() = detail::ConstMatrixMap(x.value().data(), batch, fi) *
                  detail::ConstMatrixMap(weight.value().data(), fo, fi).transpose();
    if (bias) {
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t o = 0; o < fo; ++o) y(b, o) += bias->value()[o];
    }

    const std::size_t xid = x.id(), wid = weight.id();
    const std::optional<std::size_t> bid = bias ? std::optional<std::size_t>(bias->id()) : std::nullopt;
    auto backward = [=](Tape& t, const Tensor& g) {
        const detail::ConstMatrixMap gm(g.data(), batch, fo);
        if (Tensor* gw = t.grad_sink(wid)) {
            detail::MatrixMap(gw->data(), fo, fi).noalias() +=
                gm.transpose() * detail::ConstMatrixMap(t.value(xid).data(), batch, fi);
        }
        if (bid) {
            if (Tensor* gb = t.grad_sink(*bid)) {
                for (std::size_t o = 0; o < fo; ++o) (*gb)[o] += gm.col(o).sum();
            }
        }
        if (Tensor* gx = t.grad_sink(xid)) {
            detail::MatrixMap(gx->data(), batch, fi).noalias() +=
                gm * detail::ConstMatrixMap(t.value(wid).data(), fo, fi);
        }
    };
    if (bias) return x.tape().record(std::move(out), {x, weight, *bias}, std::move(backward));
    return x.tape().record(std::move(out), {x, weight}, std::move(backward));
}

// Max-subtracted softmax of one logit row.
inline std::vector<double> softmax(std::span<const double> logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) z += (p[i] = std::exp(logits[i] - m));
    for (auto& v : p) v /= z;
    return p;
}

// Mean over rows of -log softmax(logits)[target]. logits is [C] with one
// target or [B, C] with B targets (0-based class indices).
inline Var softmax_cross_entropy(const Var& logits, std::span<const int> targets) {
    const Shape& ls = logits.shape();
    if (ls.size() != 1 && ls.size() != 2) throw ShapeError("softmax_cross_entropy: bad rank");
    const std::size_t classes = ls.back();
    const std::size_t batch = ls.size() == 1 ? 1 : ls[0];
    if (classes < 2) throw ShapeError("softmax_cross_entropy: need at least 2 classes");
    if (targets.size() != batch) throw ShapeError("softmax_cross_entropy: one target per row required");
    for (int tgt : targets) {
        if (tgt < 0 || static_cast<std::size_t>(tgt) >= classes) {
            throw ShapeError("softmax_cross_entropy: target " + std::to_string(tgt) + " outside [0, " +
                             std::to_string(classes) + ")");
        }
    }
    auto probs = std::make_shared<std::vector<double>>(batch * classes);
    std::vector<int> tg(targets.begin(), targets.end());
    double loss = 0.0;
    const double* lv = logits.value().data();
    for (std::size_t b = 0; b < batch; ++b) {
        const double* row = lv + b * classes;
        const double m = *std::max_element(row, row + classes);
        double z = 0.0;
        for (std::size_t c = 0; c < classes; ++c) z += std::exp(row[c] - m);
        const double log_z = m + std::log(z);
        for (std::size_t c = 0; c < classes; ++c) (*probs)[b * classes + c] = std::exp(row[c] - log_z);
        loss += log_z - row[tg[b]];
    }
    loss /= static_cast<double>(batch);
    const std::size_t lid = logits.id();
    return logits.tape().record(Tensor::scalar(loss), {logits}, [=](Tape& t, const Tensor& g) {
        Tensor* gl = t.grad_sink(lid);
        const double scale = g[0] / static_cast<double>(batch);
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t c = 0; c < classes; ++c) {
                const double onehot = static_cast<int>(c) == tg[b] ? 1.0 : 0.0;
                (*gl)[b * classes + c] += scale * ((*probs)[b * classes + c] - onehot);
            }
    });
}

} // namespace mdrnet

#endif // MDRNET_OPS_HPP
