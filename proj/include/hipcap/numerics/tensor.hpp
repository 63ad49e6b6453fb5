#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace hipcap {

/// Dense row-major array of doubles with an optional gradient buffer of the
/// same length. Rank 1 and rank 2 are the only ranks the library produces.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, std::vector<double> values);

    static Tensor vector(std::vector<double> values);
    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t rows() const noexcept { return shape_.empty() ? 0 : shape_[0]; }
    /// Columns of a matrix; 1 for a vector.
    std::size_t cols() const noexcept { return shape_.size() < 2 ? 1 : shape_[1]; }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& at(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }

    bool has_grad() const noexcept { return !grad_.empty() || values_.empty(); }
    /// Allocates a zeroed gradient buffer if none exists.
    std::span<double> ensure_grad();
    std::span<double> grad();
    std::span<const double> grad() const;
    void zero_grad();
    void drop_grad() noexcept { grad_.clear(); }

    std::string shape_string() const;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> values_;
    std::vector<double> grad_;
};

std::size_t shape_product(const std::vector<std::size_t>& shape);

}  // namespace hipcap
