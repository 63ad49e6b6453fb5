#include "hipcap/numerics/param_store.hpp"

#include <cmath>
#include <numbers>

#include "hipcap/error.hpp"

namespace hipcap {

Tensor& ParamStore::add(const std::string& name, std::vector<std::size_t> shape) {
    return add(name, Tensor(std::move(shape)));
}

Tensor& ParamStore::add(const std::string& name, Tensor value) {
    if (index_.count(name)) throw ConfigError("duplicate parameter name '" + name + "'");
    auto entry = std::make_unique<Entry>();
    entry->name = name;
    entry->value = std::move(value);
    entry->moment1.assign(entry->value.size(), 0.0);
    entry->moment2.assign(entry->value.size(), 0.0);
    index_[name] = entries_.size();
    entries_.push_back(std::move(entry));
    return entries_.back()->value;
}

bool ParamStore::contains(const std::string& name) const { return index_.count(name) != 0; }

Tensor& ParamStore::get(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
    return entries_[it->second]->value;
}

const Tensor& ParamStore::get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
    return entries_[it->second]->value;
}

void ParamStore::zero_grad() {
    for (auto& e : entries_) e->value.zero_grad();
}

void ParamStore::reset_optimizer_state() {
    for (auto& e : entries_) {
        std::fill(e->moment1.begin(), e->moment1.end(), 0.0);
        std::fill(e->moment2.begin(), e->moment2.end(), 0.0);
    }
    step_count_ = 0;
}

std::size_t ParamStore::scalar_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e->value.size();
    return n;
}

ParamStore ParamStore::clone() const {
    ParamStore out;
    for (const auto& e : entries_) {
        Tensor copy(e->value.shape(), std::vector<double>(e->value.values().begin(), e->value.values().end()));
        out.add(e->name, std::move(copy));
        out.entries_.back()->moment1 = e->moment1;
        out.entries_.back()->moment2 = e->moment2;
    }
    out.step_count_ = step_count_;
    return out;
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double standard_normal(std::mt19937_64& rng) {
    // Box-Muller; 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void glorot_uniform(Tensor& t, std::mt19937_64& rng) {
    const double fan_out = static_cast<double>(t.rows());
    const double fan_in = t.rank() >= 2 ? static_cast<double>(t.cols()) : 1.0;
    const double a = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& v : t.values()) v = (2.0 * uniform01(rng) - 1.0) * a;
}

}  // namespace hipcap
