// SPDX-FileCopyrightText: 2026 The mdrnet Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MDRNET_TAPE_HPP
#define MDRNET_TAPE_HPP

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <optional>
#include <vector>

#include "mdrnet/error.hpp"
#include "mdrnet/tensor.hpp"

namespace mdrnet {

class Tape;

// Handle to a value recorded on a Tape.
class Var {
public:
    Var() = default;

    std::size_t id() const noexcept { return id_; }
    Tape& tape() const noexcept { return *tape_; }
    bool valid() const noexcept { return tape_ != nullptr; }

    inline const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
    std::size_t size() const { return value().size(); }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

// Reverse-mode gradient recorder.
//
// Nodes are appended in evaluation order, so the node list is already a
// topological order and backward() is a single reverse sweep. Nodes that do
// not depend on a tracked leaf carry no backward closure.
//
// bind()/bind_constant() reference tensors owned elsewhere; those tensors
// must outlive the tape.
class Tape {
public:
    // Receives the gradient flowing into a node's output and accumulates
    // into its inputs via grad_sink().
    using BackwardFn = std::function<void(Tape&, const Tensor& grad_out)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var leaf(Tensor value) { return push(std::move(value), nullptr, true, {}); }
    Var bind(const Tensor& external) { return push({}, &external, true, {}); }
    Var constant(Tensor value) { return push(std::move(value), nullptr, false, {}); }
    Var bind_constant(const Tensor& external) { return push({}, &external, false, {}); }

    Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
        bool tracked = false;
        for (const Var& v : inputs) {
            if (v.tape_ != this) throw ShapeError("operands recorded on different tapes");
            tracked = tracked || nodes_[v.id_].tracked;
        }
        return push(std::move(value), nullptr, tracked, tracked ? std::move(backward) : BackwardFn{});
    }

    const Tensor& value(std::size_t id) const {
        const Node& n = nodes_[id];
        return n.external ? *n.external : n.value;
    }

    bool tracked(std::size_t id) const { return nodes_[id].tracked; }
    bool tracked(const Var& v) const { return nodes_[v.id_].tracked; }

    // Gradient buffer of a tracked node, zero-filled on first use; nullptr for untracked nodes.
    Tensor* grad_sink(std::size_t id) {
        Node& n = nodes_[id];
        if (!n.tracked) return nullptr;
        if (!n.grad) n.grad.emplace(value(id).shape());
        return &*n.grad;
    }

    // Seeds d(root)/d(root) = 1 and sweeps the tape once in reverse.
    void backward(const Var& root) {
        if (root.tape_ != this) throw ShapeError("backward root belongs to another tape");
        if (value(root.id_).size() != 1) throw ShapeError("backward root must be a scalar");
        if (swept_) throw Error("backward already run on this tape");
        swept_ = true;
        Tensor* seed = grad_sink(root.id_);
        if (!seed) return;
        (*seed)[0] += 1.0;
        for (std::size_t i = root.id_ + 1; i-- > 0;) {
            Node& n = nodes_[i];
            if (n.backward && n.grad) {
                n.backward(*this, *n.grad);
                ++visits_;
            }
        }
    }

    // Gradient of the backward() root w.r.t. v, or nullptr when none reached it.
    const Tensor* grad(const Var& v) const {
        const Node& n = nodes_[v.id_];
        return n.grad ? &*n.grad : nullptr;
    }

    std::size_t size() const noexcept { return nodes_.size(); }
    // Number of backward closures run by the last sweep.
    std::size_t backward_visits() const noexcept { return visits_; }

private:
    struct Node {
        Tensor value;
        const Tensor* external = nullptr;
        bool tracked = false;
        BackwardFn backward;
        std::optional<Tensor> grad;
    };

    Var push(Tensor value, const Tensor* external, bool tracked, BackwardFn backward) {
        nodes_.push_back(Node{std::move(value), external, tracked, std::move(backward), std::nullopt});
        return Var(this, nodes_.size() - 1);
    }

    std::vector<Node> nodes_;
    bool swept_ = false;
    std::size_t visits_ = 0;
};

inline const Tensor& Var::value() const { return tape_->value(id_); }

} // namespace mdrnet

#endif // MDRNET_TAPE_HPP
