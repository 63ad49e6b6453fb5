#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hipcap/numerics/tensor.hpp"

namespace hipcap {

/// Handle to a value recorded on a Tape.
struct Var {
    static constexpr std::uint32_t kNone = 0xffffffffu;
    std::uint32_t id = kNone;
    bool valid() const noexcept { return id != kNone; }
};

/// Reverse-mode autodiff tape over dense double vectors.
///
/// Each recorded node owns its forward value. Nodes that depend on a
/// parameter or a variable carry a backward closure; backward() replays those
/// closures in reverse insertion order, so gradient accumulation order is
/// fixed by the order of the forward pass. Parameter gradients are added
/// into the owning Tensor's grad buffer.
///
/// A tape constructed with `record = false` keeps values only; it is meant
/// for inference and never accumulates into parameters.
class Tape {
public:
    using Backward = std::function<void(Tape&, std::uint32_t self)>;

    explicit Tape(bool record = true) : record_(record) {}
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    bool recording() const noexcept { return record_; }

    /// A value that never receives a gradient.
    Var constant(std::vector<double> values);
    /// A leaf whose gradient is kept on the tape (readable through grad()).
    Var variable(std::vector<double> values);
    /// A copy of `t`'s values whose gradient is added into `t` on backward.
    Var param(Tensor& t);

    std::span<const double> value(Var v) const { return nodes_[v.id].value; }
    double scalar(Var v) const { return nodes_[v.id].value.at(0); }
    std::size_t size(Var v) const { return nodes_[v.id].value.size(); }
    bool needs_grad(Var v) const { return nodes_[v.id].needs_grad; }
    bool needs_grad(std::uint32_t id) const { return nodes_[id].needs_grad; }

    /// Gradient of the last backward() target with respect to `v`. Empty for
    /// nodes that do not need a gradient.
    std::span<const double> grad(Var v) const { return nodes_[v.id].grad; }

    /// Seeds d(out)/d(out) = seed (scalar outputs) and propagates.
    void backward(Var out, double seed = 1.0);
    void backward(Var out, std::span<const double> seed);

    std::size_t node_count() const noexcept { return nodes_.size(); }
    void clear() { nodes_.clear(); }

    /// Test hook: makes the tanh backward rule deliberately wrong so that
    /// gradient-check harnesses can prove they detect a broken gradient.
    void set_fault_injection(bool on) noexcept { fault_injection_ = on; }
    bool fault_injection() const noexcept { return fault_injection_; }

    // Interface for primitive ops.
    Var push(std::vector<double> value, bool needs_grad, Backward backward);
    std::vector<double>& grad_buffer(std::uint32_t id) { return nodes_[id].grad; }
    const std::vector<double>& value_buffer(std::uint32_t id) const { return nodes_[id].value; }

private:
    struct Node {
        std::vector<double> value;
        std::vector<double> grad;
        Backward backward;
        bool needs_grad = false;
    };
    std::vector<Node> nodes_;
    bool record_ = true;
    bool fault_injection_ = false;
};

}  // namespace hipcap
