// SPDX-FileCopyrightText: 2026 The mdrnet Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MDRNET_GRAD_CHECK_HPP
#define MDRNET_GRAD_CHECK_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "mdrnet/tape.hpp"
#include "mdrnet/tensor.hpp"

namespace mdrnet {

struct GradCheckReport {
    double max_relative_error = 0.0;
    std::size_t worst_input = 0;
    std::size_t worst_index = 0;
    std::size_t coordinates = 0;
    bool passed = false;
};

// Scalar-valued function built from tape primitives over the given inputs.
using ScalarFunction = std::function<Var(Tape&, std::span<const Var>)>;

// Gradients smaller than this are compared in absolute terms.
inline constexpr double kGradCheckFloor = 1e-4;

// Compares reverse-mode gradients with central differences at every input
// coordinate. Error = |analytic - numeric| / max(|analytic|, |numeric|, floor).
inline GradCheckReport grad_check(const ScalarFunction& f, std::vector<Tensor> inputs, double tolerance,
                                  double h = 1e-6) {
    std::vector<Tensor> analytic;
    {
        Tape tape;
        std::vector<Var> vars;
        for (const auto& in : inputs) vars.push_back(tape.bind(in));
        const Var out = f(tape, vars);
        tape.backward(out);
        for (const auto& v : vars) {
            const Tensor* g = tape.grad(v);
            analytic.push_back(g ? *g : Tensor(v.shape()));
        }
    }

    auto evaluate = [&]() {
        Tape tape;
        std::vector<Var> vars;
        for (const auto& in : inputs) vars.push_back(tape.bind_constant(in));
        return f(tape, vars).value()[0];
    };

    GradCheckReport report;
    for (std::size_t a = 0; a < inputs.size(); ++a) {
        for (std::size_t i = 0; i < inputs[a].size(); ++i) {
            const double saved = inputs[a][i];
            inputs[a][i] = saved + h;
            const double up = evaluate();
            inputs[a][i] = saved - h;
            const double down = evaluate();
            inputs[a][i] = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double exact = analytic[a][i];
            const double denom = std::max({std::abs(exact), std::abs(numeric), kGradCheckFloor});
            const double err = std::abs(exact - numeric) / denom;
            if (err > report.max_relative_error || !std::isfinite(err)) {
                report.max_relative_error = std::isfinite(err) ? err : HUGE_VAL;
                report.worst_input = a;
                report.worst_index = i;
            }
            ++report.coordinates;
        }
    }
    report.passed = report.max_relative_error <= tolerance;
    return report;
}

} // namespace mdrnet

#endif // MDRNET_GRAD_CHECK_HPP
