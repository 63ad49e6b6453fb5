#include "hipcap/numerics/tensor.hpp"

#include <algorithm>
#include <sstream>

#include "hipcap/error.hpp"

namespace hipcap {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

Tensor::Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
    for (auto d : shape_) {
        if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_string());
    }
    values_.assign(shape_product(shape_), 0.0);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
    for (auto d : shape_) {
        if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_string());
    }
    if (values_.size() != shape_product(shape_)) {
        throw DimensionError("tensor of shape " + shape_string() + " given " +
                             std::to_string(values_.size()) + " values");
    }
}

Tensor Tensor::vector(std::vector<double> values) {
    const std::size_t n = values.size();
    return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
    return Tensor({rows, cols}, std::move(values));
}

std::span<double> Tensor::ensure_grad() {
    if (grad_.size() != values_.size()) grad_.assign(values_.size(), 0.0);
    return grad_;
}

std::span<double> Tensor::grad() {
    if (!has_grad()) throw StateError("tensor " + shape_string() + " has no gradient buffer");
    return grad_;
}

std::span<const double> Tensor::grad() const {
    if (!has_grad()) throw StateError("tensor " + shape_string() + " has no gradient buffer");
    return grad_;
}

void Tensor::zero_grad() {
    ensure_grad();
    std::fill(grad_.begin(), grad_.end(), 0.0);
}

std::string Tensor::shape_string() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) os << 'x';
        os << shape_[i];
    }
    os << ']';
    return os.str();
}

}  // namespace hipcap
