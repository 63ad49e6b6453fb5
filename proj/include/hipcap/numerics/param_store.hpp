#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "hipcap/numerics/tensor.hpp"

namespace hipcap {

/// Named trainable tensors in insertion order, plus Adam moment state.
/// Tensor addresses are stable for the lifetime of the store.
class ParamStore {
public:
    ParamStore() = default;
    ParamStore(const ParamStore&) = delete;
    ParamStore& operator=(const ParamStore&) = delete;
    ParamStore(ParamStore&&) = default;
    ParamStore& operator=(ParamStore&&) = default;

    /// Registers a zero-filled tensor. Throws ConfigError on a duplicate name.
    Tensor& add(const std::string& name, std::vector<std::size_t> shape);
    Tensor& add(const std::string& name, Tensor value);

    bool contains(const std::string& name) const;
    Tensor& get(const std::string& name);
    const Tensor& get(const std::string& name) const;

    std::size_t size() const noexcept { return entries_.size(); }
    const std::string& name(std::size_t i) const { return entries_[i]->name; }
    Tensor& tensor(std::size_t i) { return entries_[i]->value; }
    const Tensor& tensor(std::size_t i) const { return entries_[i]->value; }
    std::vector<double>& moment1(std::size_t i) { return entries_[i]->moment1; }
    std::vector<double>& moment2(std::size_t i) { return entries_[i]->moment2; }

    std::uint64_t step_count() const noexcept { return step_count_; }
    void set_step_count(std::uint64_t n) noexcept { step_count_ = n; }

    /// Allocates (if needed) and zeroes every gradient buffer.
    void zero_grad();
    /// Resets Adam moments and the step counter.
    void reset_optimizer_state();

    std::size_t scalar_count() const;

    /// Deep copy of values (and optimizer state).
    ParamStore clone() const;

private:
    struct Entry {
        std::string name;
        Tensor value;
        std::vector<double> moment1;
        std::vector<double> moment2;
    };
    std::vector<std::unique_ptr<Entry>> entries_;
    std::map<std::string, std::size_t> index_;
    std::uint64_t step_count_ = 0;
};

/// Fills `t` with uniform(-a, a), a = sqrt(6 / (fan_in + fan_out)).
/// For a matrix fan_out = rows and fan_in = cols; a vector uses fan_in = 1.
void glorot_uniform(Tensor& t, std::mt19937_64& rng);

/// Draws a uniform real in [0, 1) from the raw 64-bit engine output so that
/// streams are identical across standard-library implementations.
double uniform01(std::mt19937_64& rng);
double standard_normal(std::mt19937_64& rng);

}  // namespace hipcap
