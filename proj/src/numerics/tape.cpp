#include "hipcap/numerics/tape.hpp"

#include <algorithm>

#include "hipcap/error.hpp"

namespace hipcap {

Var Tape::push(std::vector<double> value, bool needs_grad, Backward backward) {
    if (nodes_.size() >= Var::kNone) throw StateError("tape node limit exceeded");
    Node node;
    node.value = std::move(value);
    node.needs_grad = record_ && needs_grad;
    if (node.needs_grad) node.backward = std::move(backward);
    nodes_.push_back(std::move(node));
    return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::constant(std::vector<double> values) {
    return push(std::move(values), false, nullptr);
}

Var Tape::variable(std::vector<double> values) {
    // A leaf with no backward rule; its gradient buffer stays readable.
    return push(std::move(values), true, [](Tape&, std::uint32_t) {});
}

Var Tape::param(Tensor& t) {
    std::vector<double> v(t.values().begin(), t.values().end());
    Tensor* target = &t;
    return push(std::move(v), true, [target](Tape& tape, std::uint32_t self) {
        const auto& g = tape.grad_buffer(self);
        auto tg = target->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) tg[i] += g[i];
    });
}

void Tape::backward(Var out, double seed) {
    if (size(out) != 1) {
        throw DimensionError("backward with a scalar seed needs a length-1 output, got length " +
                             std::to_string(size(out)));
    }
    const double s[1] = {seed};
    backward(out, std::span<const double>(s, 1));
}

void Tape::backward(Var out, std::span<const double> seed) {
    if (!out.valid() || out.id >= nodes_.size()) throw StateError("backward on an invalid variable");
    if (seed.size() != size(out)) throw DimensionError("backward seed length does not match output");
    if (!record_) throw StateError("backward on a tape that does not record gradients");
    for (std::uint32_t i = 0; i <= out.id; ++i) {
        auto& n = nodes_[i];
        if (n.needs_grad) n.grad.assign(n.value.size(), 0.0);
        else n.grad.clear();
    }
    auto& root = nodes_[out.id];
    if (!root.needs_grad) return;
    std::copy(seed.begin(), seed.end(), root.grad.begin());
    for (std::uint32_t i = out.id + 1; i-- > 0;) {
        if (nodes_[i].needs_grad && nodes_[i].backward) nodes_[i].backward(*this, i);
    }
}

}  // namespace hipcap
