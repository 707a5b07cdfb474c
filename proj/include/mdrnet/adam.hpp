// SPDX-FileCopyrightText: 2026 The mdrnet Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MDRNET_ADAM_HPP
#define MDRNET_ADAM_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mdrnet/error.hpp"
#include "mdrnet/tensor.hpp"

namespace mdrnet {

// Moment estimates for one parameter group.
struct AdamState {
    double base_lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t step = 0;
    std::vector<Tensor> first_moment;
    std::vector<Tensor> second_moment;

    friend bool operator==(const AdamState&, const AdamState&) = default;
};

// A parameter and the gradient of the loss w.r.t. it; a null gradient counts as zero.
struct ParamGrad {
    Tensor* param = nullptr;
    const Tensor* grad = nullptr;
};

// Per-epoch exponential decay: base * decay^epoch.
inline double decayed_rate(double base, double decay, std::size_t epoch) {
    return base * std::pow(decay, static_cast<double>(epoch));
}

// One bias-corrected Adam update. All gradients are validated first so a
// non-finite cell leaves parameters and state untouched.
inline void adam_step(std::span<const ParamGrad> params, AdamState& state, double lr) {
    if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("adam_step: learning rate must be positive");
    if (state.first_moment.empty()) {
        for (const auto& p : params) {
            state.first_moment.emplace_back(p.param->shape());
            state.second_moment.emplace_back(p.param->shape());
        }
    }
    if (state.first_moment.size() != params.size()) throw ShapeError("adam_step: parameter count changed");
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& p = params[i];
        if (state.first_moment[i].shape() != p.param->shape() || (p.grad && p.grad->shape() != p.param->shape())) {
            throw ShapeError("adam_step: shape mismatch for parameter " + std::to_string(i));
        }
        if (p.grad) {
            for (double g : p.grad->values()) {
                if (!std::isfinite(g)) {
                    throw NumericError("adam_step: non-finite gradient in parameter " + std::to_string(i));
                }
            }
        }
    }

    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& w = *params[i].param;
        Tensor& m = state.first_moment[i];
        Tensor& v = state.second_moment[i];
        const Tensor* g = params[i].grad;
        for (std::size_t j = 0; j < w.size(); ++j) {
            const double gj = g ? (*g)[j] : 0.0;
            m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * gj;
            v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * gj * gj;
            const double m_hat = m[j] / c1;
            const double v_hat = v[j] / c2;
            w[j] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    }
}

} // namespace mdrnet

#endif // MDRNET_ADAM_HPP
