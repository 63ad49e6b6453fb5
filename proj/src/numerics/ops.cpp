#include "hipcap/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hipcap/error.hpp"

namespace hipcap::ops {
namespace {

double dot_contiguous(const double* a, const double* b, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        s0 += a[j] * b[j];
        s1 += a[j + 1] * b[j + 1];
        s2 += a[j + 2] * b[j + 2];
        s3 += a[j + 3] * b[j + 3];
    }
    for (; j < n; ++j) s0 += a[j] * b[j];
    return (s0 + s1) + (s2 + s3);
}

void check_matrix(const Tensor& W, std::size_t n, const char* op) {
    if (W.rank() != 2 || W.cols() != n) {
        throw DimensionError(std::string(op) + ": weight " + W.shape_string() +
                             " does not accept input of length " + std::to_string(n));
    }
}

void check_same(std::size_t a, std::size_t b, const char* op) {
    if (a != b) {
        throw DimensionError(std::string(op) + ": operand lengths " + std::to_string(a) + " and " +
                             std::to_string(b) + " differ");
    }
}

// Shared backward for W x (+ b).
void matvec_backward(Tape& t, std::uint32_t self, std::uint32_t xid, Tensor* W, Tensor* b) {
    const auto& g = t.grad_buffer(self);
    const auto& x = t.value_buffer(xid);
    const std::size_t m = W->rows(), n = W->cols();
    auto wg = W->ensure_grad();
    const auto wv = W->values();
    const bool dx = t.needs_grad(xid);
    std::vector<double>* xg = dx ? &t.grad_buffer(xid) : nullptr;
    for (std::size_t i = 0; i < m; ++i) {
        const double gi = g[i];
        if (gi == 0.0) continue;
        double* wrow = wg.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) wrow[j] += gi * x[j];
        if (dx) {
            const double* vrow = wv.data() + i * n;
            for (std::size_t j = 0; j < n; ++j) (*xg)[j] += gi * vrow[j];
        }
    }
    if (b) {
        auto bg = b->ensure_grad();
        for (std::size_t i = 0; i < m; ++i) bg[i] += g[i];
    }
}

}  // namespace

void softmax_inplace(std::span<double> x) {
    if (x.empty()) throw DimensionError("softmax of an empty vector");
    const double mx = *std::max_element(x.begin(), x.end());
    double s = 0.0;
    for (auto& v : x) {
        v = std::exp(v - mx);
        s += v;
    }
    for (auto& v : x) v /= s;
}

double log_sum_exp(std::span<const double> x) {
    if (x.empty()) throw DimensionError("log-sum-exp of an empty vector");
    const double mx = *std::max_element(x.begin(), x.end());
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double v : x) s += std::exp(v - mx);
    return mx + std::log(s);
}

Var affine(Tape& t, Var x, Tensor& W, Tensor& b) {
    const auto xv = t.value(x);
    check_matrix(W, xv.size(), "affine");
    if (b.size() != W.rows()) {
        throw DimensionError("affine: bias " + b.shape_string() + " does not match weight " + W.shape_string());
    }
    const std::size_t m = W.rows(), n = W.cols();
    std::vector<double> out(m);
    const double* w = W.values().data();
    for (std::size_t i = 0; i < m; ++i) out[i] = b[i] + dot_contiguous(w + i * n, xv.data(), n);
    const std::uint32_t xid = x.id;
    Tensor* wp = &W;
    Tensor* bp = &b;
    return t.push(std::move(out), true, [xid, wp, bp](Tape& tape, std::uint32_t self) {
        matvec_backward(tape, self, xid, wp, bp);
    });
}

Var matvec(Tape& t, Var x, Tensor& W) {
    const auto xv = t.value(x);
    check_matrix(W, xv.size(), "matvec");
    const std::size_t m = W.rows(), n = W.cols();
    std::vector<double> out(m);
    const double* w = W.values().data();
    for (std::size_t i = 0; i < m; ++i) out[i] = dot_contiguous(w + i * n, xv.data(), n);
    const std::uint32_t xid = x.id;
    Tensor* wp = &W;
    return t.push(std::move(out), true, [xid, wp](Tape& tape, std::uint32_t self) {
        matvec_backward(tape, self, xid, wp, nullptr);
    });
}

Var embedding(Tape& t, Tensor& table, std::size_t row) {
    if (table.rank() != 2 || row >= table.rows()) {
        throw DimensionError("embedding: row " + std::to_string(row) + " outside table " + table.shape_string());
    }
    const std::size_t c = table.cols();
    const auto v = table.values();
    std::vector<double> out(v.begin() + static_cast<std::ptrdiff_t>(row * c),
                            v.begin() + static_cast<std::ptrdiff_t>((row + 1) * c));
    Tensor* tp = &table;
    return t.push(std::move(out), true, [tp, row, c](Tape& tape, std::uint32_t self) {
        const auto& g = tape.grad_buffer(self);
        auto tg = tp->ensure_grad();
        for (std::size_t j = 0; j < c; ++j) tg[row * c + j] += g[j];
    });
}

Var sigmoid(Tape& t, Var x) {
    const auto xv = t.value(x);
    std::vector<double> out(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) {
        const double z = xv[i];
        // Branching keeps exp() from overflowing for large |z|.
        if (z >= 0) {
            out[i] = 1.0 / (1.0 + std::exp(-z));
        } else {
            const double e = std::exp(z);
            out[i] = e / (1.0 + e);
        }
    }
    const std::uint32_t xid = x.id;
    return t.push(std::move(out), t.needs_grad(x), [xid](Tape& tape, std::uint32_t self) {
        const auto& g = tape.grad_buffer(self);
        const auto& y = tape.value_buffer(self);
        auto& xg = tape.grad_buffer(xid);
        for (std::size_t i = 0; i < g.size(); ++i) xg[i] += g[i] * y[i] * (1.0 - y[i]);
    });
}

Var tanh(Tape& t, Var x) {
    const auto xv = t.value(x);
    std::vector<double> out(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) out[i] = std::tanh(xv[i]);
    const std::uint32_t xid = x.id;
    return t.push(std::move(out), t.needs_grad(x), [xid](Tape& tape, std::uint32_t self) {
        const auto& g = tape.grad_buffer(self);
        const auto& y = tape.value_buffer(self);
        auto& xg = tape.grad_buffer(xid);
        if (tape.fault_injection()) {
            for (std::size_t i = 0; i < g.size(); ++i) xg[i] += g[i] * (1.0 - y[i]);
            return;
        }
        for (std::size_t i = 0; i < g.size(); ++i) xg[i] += g[i] * (1.0 - y[i] * y[i]);
    });
}

Var relu(Tape& t, Var x) {
    const auto xv = t.value(x);
    std::vector<double> out(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] > 0.0 ? xv[i] : 0.0;
    const std::uint32_t xid = x.id;
    return t.push(std::move(out), t.needs_grad(x), [xid](Tape& tape, std::uint32_t self) {
        const auto& g = tape.grad_buffer(self);
        const auto& xv = tape.value_buffer(xid);
        auto& xg = tape.grad_buffer(xid);
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (xv[i] > 0.0) xg[i] += g[i];
        }
    });
}

Var hadamard(Tape& t, Var a, Var b) {
    const auto av = t.value(a);
    const auto bv = t.value(b);
    check_same(av.size(), bv.size(), "hadamard");
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * bv[i];
    const std::uint32_t aid = a.id, bid = b.id;
    return t.push(std::move(out), t.needs_grad(a) || t.needs_grad(b), [aid, bid](Tape& tape, std::uint32_t self) {
        const auto& g = tape.grad_buffer(self);
        const auto& av = tape.value_buffer(aid);
        const auto& bv = tape.value_buffer(bid);
        if (tape.needs_grad(aid)) {
            auto& ag = tape.grad_buffer(aid);
            for (std::size_t i = 0; i < g.size(); ++i) ag[i] += g[i] * bv[i];
        }
        if (tape.needs_grad(bid)) {
            auto& bg = tape.grad_buffer(bid);
            for (std::size_t i = 0; i < g.size(); ++i) bg[i] += g[i] * av[i];
        }
    });
}

Var add(Tape& t, Var a, Var b) {
    const Var xs[2] = {a, b};
    return sum(t, xs);
}

Var sum(Tape& t, std::span<const Var> xs) {
    if (xs.empty()) throw DimensionError("sum of an empty list");
    const std::size_t n = t.size(xs[0]);
    std::vector<double> out(n, 0.0);
    bool needs = false;
    for (const Var& x : xs) {
        const auto v = t.value(x);
        check_same(n, v.size(), "sum");
        for (std::size_t i = 0; i < n; ++i) out[i] += v[i];
        needs = needs || t.needs_grad(x);
    }
    std::vector<std::uint32_t> ids;
    ids.reserve(xs.size());
    for (const Var& x : xs) ids.push_back(x.id);
    return t.push(std::move(out), needs, [ids = std::move(ids)](Tape& tape, std::uint32_t self) {
        const auto& g = tape.grad_buffer(self);
        for (auto id : ids) {
            if (!tape.needs_grad(id)) continue;
            auto& xg = tape.grad_buffer(id);
            for (std::size_t i = 0; i < g.size(); ++i) xg[i] += g[i];
        }
    });
}

Var scale(Tape& t, Var x, double factor) {
    const auto xv = t.value(x);
    std::vector<double> out(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) out[i] = factor * xv[i];
    const std::uint32_t xid = x.id;
    return t.push(std::move(out), t.needs_grad(x), [xid, factor](Tape& tape, std::uint32_t self) {
        const auto& g = tape.grad_buffer(self);
        auto& xg = tape.grad_buffer(xid);
        for (std::size_t i = 0; i < g.size(); ++i) xg[i] += factor * g[i];
    });
}

Var mean(Tape& t, std::span<const Var> xs) {
    return scale(t, sum(t, xs), 1.0 / static_cast<double>(xs.size()));
}

Var concat(Tape& t, std::span<const Var> xs) {
    std::vector<double> out;
    std::vector<std::uint32_t> ids;
    bool needs = false;
    for (const Var& x : xs) {
        const auto v = t.value(x);
        out.insert(out.end(), v.begin(), v.end());
        ids.push_back(x.id);
        needs = needs || t.needs_grad(x);
    }
    if (out.empty()) throw DimensionError("concat of empty inputs");
    return t.push(std::move(out), needs, [ids = std::move(ids)](Tape& tape, std::uint32_t self) {
        const auto& g = tape.grad_buffer(self);
        std::size_t off = 0;
        for (auto id : ids) {
            const std::size_t n = tape.value_buffer(id).size();
            if (tape.needs_grad(id)) {
                auto& xg = tape.grad_buffer(id);
                for (std::size_t i = 0; i < n; ++i) xg[i] += g[off + i];
            }
            off += n;
        }
    });
}

Var slice(Tape& t, Var x, std::size_t offset, std::size_t length) {
    const auto xv = t.value(x);
    if (length == 0 || offset + length > xv.size()) {
        throw DimensionError("slice [" + std::to_string(offset) + ", " + std::to_string(offset + length) +
                             ") outside vector of length " + std::to_string(xv.size()));
    }
    std::vector<double> out(xv.begin() + static_cast<std::ptrdiff_t>(offset),
                            xv.begin() + static_cast<std::ptrdiff_t>(offset + length));
    const std::uint32_t xid = x.id;
    return t.push(std::move(out), t.needs_grad(x), [xid, offset](Tape& tape, std::uint32_t self) {
        const auto& g = tape.grad_buffer(self);
        auto& xg = tape.grad_buffer(xid);
        for (std::size_t i = 0; i < g.size(); ++i) xg[offset + i] += g[i];
    });
}

Var softmax(Tape& t, Var x) {
    const auto xv = t.value(x);
    std::vector<double> out(xv.begin(), xv.end());
    softmax_inplace(out);
    const std::uint32_t xid = x.id;
    return t.push(std::move(out), t.needs_grad(x), [xid](Tape& tape, std::uint32_t self) {
        const auto& g = tape.grad_buffer(self);
        const auto& y = tape.value_buffer(self);
        double gy = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) gy += g[i] * y[i];
        auto& xg = tape.grad_buffer(xid);
        for (std::size_t i = 0; i < g.size(); ++i) xg[i] += y[i] * (g[i] - gy);
    });
}

Var log_softmax(Tape& t, Var x) {
    const auto xv = t.value(x);
    const double lse = log_sum_exp(xv);
    std::vector<double> out(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] - lse;
    const std::uint32_t xid = x.id;
    return t.push(std::move(out), t.needs_grad(x), [xid](Tape& tape, std::uint32_t self) {
        const auto& g = tape.grad_buffer(self);
        const auto& y = tape.value_buffer(self);
        double gs = 0.0;
        for (double v : g) gs += v;
        auto& xg = tape.grad_buffer(xid);
        for (std::size_t i = 0; i < g.size(); ++i) xg[i] += g[i] - std::exp(y[i]) * gs;
    });
}

Var pick(Tape& t, Var x, std::size_t index) {
    const auto xv = t.value(x);
    if (index >= xv.size()) {
        throw DimensionError("pick index " + std::to_string(index) + " outside vector of length " +
                             std::to_string(xv.size()));
    }
    const std::uint32_t xid = x.id;
    return t.push({xv[index]}, t.needs_grad(x), [xid, index](Tape& tape, std::uint32_t self) {
        tape.grad_buffer(xid)[index] += tape.grad_buffer(self)[0];
    });
}

Var sum_elements(Tape& t, Var x) {
    const auto xv = t.value(x);
    double s = 0.0;
    for (double v : xv) s += v;
    const std::uint32_t xid = x.id;
    return t.push({s}, t.needs_grad(x), [xid](Tape& tape, std::uint32_t self) {
        const double g = tape.grad_buffer(self)[0];
        for (auto& v : tape.grad_buffer(xid)) v += g;
    });
}

Var dot(Tape& t, Var a, Var b) {
    const auto av = t.value(a);
    const auto bv = t.value(b);
    check_same(av.size(), bv.size(), "dot");
    const double s = dot_contiguous(av.data(), bv.data(), av.size());
    const std::uint32_t aid = a.id, bid = b.id;
    return t.push({s}, t.needs_grad(a) || t.needs_grad(b), [aid, bid](Tape& tape, std::uint32_t self) {
        const double g = tape.grad_buffer(self)[0];
        const auto& av = tape.value_buffer(aid);
        const auto& bv = tape.value_buffer(bid);
        if (tape.needs_grad(aid)) {
            auto& ag = tape.grad_buffer(aid);
            for (std::size_t i = 0; i < ag.size(); ++i) ag[i] += g * bv[i];
        }
        if (tape.needs_grad(bid)) {
            auto& bg = tape.grad_buffer(bid);
            for (std::size_t i = 0; i < bg.size(); ++i) bg[i] += g * av[i];
        }
    });
}

Var weighted_sum(Tape& t, Var weights, std::span<const Var> items) {
    const auto w = t.value(weights);
    check_same(w.size(), items.size(), "weighted_sum");
    if (items.empty()) throw DimensionError("weighted_sum of an empty list");
    const std::size_t n = t.size(items[0]);
    std::vector<double> out(n, 0.0);
    bool needs = t.needs_grad(weights);
    std::vector<std::uint32_t> ids;
    ids.reserve(items.size());
    for (std::size_t k = 0; k < items.size(); ++k) {
        const auto v = t.value(items[k]);
        check_same(n, v.size(), "weighted_sum");
        for (std::size_t i = 0; i < n; ++i) out[i] += w[k] * v[i];
        needs = needs || t.needs_grad(items[k]);
        ids.push_back(items[k].id);
    }
    const std::uint32_t wid = weights.id;
    return t.push(std::move(out), needs, [wid, ids = std::move(ids)](Tape& tape, std::uint32_t self) {
        const auto& g = tape.grad_buffer(self);
        const auto& w = tape.value_buffer(wid);
        const bool dw = tape.needs_grad(wid);
        for (std::size_t k = 0; k < ids.size(); ++k) {
            const auto& v = tape.value_buffer(ids[k]);
            if (dw) tape.grad_buffer(wid)[k] += dot_contiguous(g.data(), v.data(), g.size());
            if (tape.needs_grad(ids[k])) {
                auto& vg = tape.grad_buffer(ids[k]);
                for (std::size_t i = 0; i < g.size(); ++i) vg[i] += w[k] * g[i];
            }
        }
    });
}

}  // namespace hipcap::ops
