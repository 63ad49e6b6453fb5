#include "hipcap/numerics/adam.hpp"

#include <cmath>

#include "hipcap/error.hpp"

namespace hipcap {

void adam_step(ParamStore& store, const AdamConfig& config) {
    for (std::size_t k = 0; k < store.size(); ++k) {
        if (!store.tensor(k).has_grad()) {
            throw StateError("adam_step: parameter '" + store.name(k) + "' has no accumulated gradient");
        }
    }
    const std::uint64_t step = store.step_count() + 1;
    const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
    for (std::size_t k = 0; k < store.size(); ++k) {
        Tensor& p = store.tensor(k);
        auto values = p.values();
        auto grad = p.grad();
        auto& m = store.moment1(k);
        auto& v = store.moment2(k);
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double g = grad[i];
            m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
            v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
            const double mhat = m[i] / c1;
            const double vhat = v[i] / c2;
            values[i] -= config.lr * mhat / (std::sqrt(vhat) + config.eps);
            grad[i] = 0.0;
        }
    }
    store.set_step_count(step);
}

double grad_norm(const ParamStore& store) {
    double s = 0.0;
    for (std::size_t k = 0; k < store.size(); ++k) {
        const Tensor& p = store.tensor(k);
        if (!p.has_grad()) continue;
        for (double g : p.grad()) s += g * g;
    }
    return std::sqrt(s);
}

double clip_grad_norm(ParamStore& store, double max_norm) {
    const double norm = grad_norm(store);
    if (norm > max_norm && norm > 0.0) {
        const double f = max_norm / norm;
        for (std::size_t k = 0; k < store.size(); ++k) {
            Tensor& p = store.tensor(k);
            if (!p.has_grad()) continue;
            for (auto& g : p.grad()) g *= f;
        }
    }
    return norm;
}

}  // namespace hipcap
