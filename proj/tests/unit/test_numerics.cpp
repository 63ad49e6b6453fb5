#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <vector>

#include "hipcap/error.hpp"
#include "hipcap/numerics/adam.hpp"
#include "hipcap/numerics/checkpoint.hpp"
#include "hipcap/numerics/grad_check.hpp"
#include "hipcap/numerics/ops.hpp"
#include "hipcap/numerics/param_store.hpp"
#include "hipcap/numerics/tape.hpp"

using namespace hipcap;

namespace {

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = scale * standard_normal(rng);
    return v;
}

// Builds an op on the tape from leaf variables, contracts the output with a
// fixed random weight vector and compares d/dinput against central differences.
using OpBuilder = std::function<Var(Tape&, std::span<const Var>)>;

double op_max_rel_error(const OpBuilder& build, std::vector<std::vector<double>> inputs, std::uint64_t seed) {
    const double eps = 1e-6;
    std::mt19937_64 rng(seed);
    std::vector<double> weights;

    auto forward = [&](const std::vector<std::vector<double>>& in, std::vector<std::vector<double>>* grads) {
        Tape tape;
        std::vector<Var> leaves;
        for (const auto& x : in) leaves.push_back(tape.variable(x));
        Var out = build(tape, leaves);
        if (weights.empty()) weights = random_vector(tape.size(out), rng);
        auto v = tape.value(out);
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) s += weights[i] * v[i];
        if (grads) {
            tape.backward(out, weights);
            for (Var l : leaves) {
                auto g = tape.grad(l);
                grads->emplace_back(g.begin(), g.end());
            }
        }
        return s;
    };

    std::vector<std::vector<double>> analytic;
    forward(inputs, &analytic);
    double worst = 0.0;
    for (std::size_t a = 0; a < inputs.size(); ++a) {
        for (std::size_t i = 0; i < inputs[a].size(); ++i) {
            auto plus = inputs, minus = inputs;
            plus[a][i] += eps;
            minus[a][i] -= eps;
            double numeric = (forward(plus, nullptr) - forward(minus, nullptr)) / (2 * eps);
            double an = analytic[a].empty() ? 0.0 : analytic[a][i];
            worst = std::max(worst, relative_error(an, numeric, 1e-6));
        }
    }
    return worst;
}

}  // namespace

TEST(Tensor, ShapeAndGrad) {
    Tensor t({2, 3});
    EXPECT_EQ(t.size(), 6u);
    EXPECT_EQ(t.rows(), 2u);
    EXPECT_EQ(t.cols(), 3u);
    EXPECT_FALSE(t.has_grad());
    t.ensure_grad();
    EXPECT_EQ(t.grad().size(), t.size());
    EXPECT_THROW(Tensor({2, 0}), DimensionError);
    EXPECT_THROW(Tensor({2, 2}, {1.0, 2.0, 3.0}), DimensionError);
}

TEST(Affine, ZeroMap) {
    Tape tape;
    Tensor W({2, 3}), b({2});
    Var y = ops::affine(tape, tape.constant({4, -1, 7}), W, b);
    EXPECT_EQ(std::vector<double>(tape.value(y).begin(), tape.value(y).end()), (std::vector<double>{0, 0}));
}

TEST(Affine, Identity) {
    Tape tape;
    Tensor W = Tensor::matrix(2, 2, {1, 0, 0, 1});
    Tensor b({2});
    Var y = ops::affine(tape, tape.constant({1, 2}), W, b);
    EXPECT_DOUBLE_EQ(tape.value(y)[0], 1.0);
    EXPECT_DOUBLE_EQ(tape.value(y)[1], 2.0);
}

TEST(Affine, HandExample) {
    Tape tape;
    Tensor W = Tensor::matrix(2, 2, {1, 2, 3, 4});
    Tensor b = Tensor::vector({1, 1});
    Var y = ops::affine(tape, tape.constant({1, 1}), W, b);
    EXPECT_DOUBLE_EQ(tape.value(y)[0], 4.0);
    EXPECT_DOUBLE_EQ(tape.value(y)[1], 8.0);
}

TEST(Affine, ShapeMismatchNamesOperands) {
    Tape tape;
    Tensor W({2, 3}), b({2});
    try {
        ops::affine(tape, tape.constant({1, 2}), W, b);
        FAIL() << "expected DimensionError";
    } catch (const DimensionError& e) {
        std::string msg = e.what();
        EXPECT_NE(msg.find("weight"), std::string::npos) << msg;
        EXPECT_NE(msg.find("input"), std::string::npos) << msg;
    }
    Tensor bad_b({3});
    EXPECT_THROW(ops::affine(tape, tape.constant({1, 2, 3}), W, bad_b), DimensionError);
}

TEST(Affine, AccumulatesIntoParams) {
    Tape tape;
    Tensor W = Tensor::matrix(1, 2, {0.5, -1.0});
    Tensor b = Tensor::vector({0.25});
    W.ensure_grad();
    b.ensure_grad();
    Var x = tape.variable({3.0, 2.0});
    Var y = ops::affine(tape, x, W, b);
    tape.backward(y, 2.0);
    EXPECT_DOUBLE_EQ(W.grad()[0], 6.0);
    EXPECT_DOUBLE_EQ(W.grad()[1], 4.0);
    EXPECT_DOUBLE_EQ(b.grad()[0], 2.0);
    EXPECT_DOUBLE_EQ(tape.grad(x)[0], 1.0);
    EXPECT_DOUBLE_EQ(tape.grad(x)[1], -2.0);
}

TEST(Affine, LinearityProperty) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t m = 1 + rng() % 6, n = 1 + rng() % 6;
        Tensor W({m, n}, random_vector(m * n, rng));
        Tensor b({m}, random_vector(m, rng));
        auto x = random_vector(n, rng), y = random_vector(n, rng), xy = x;
        for (std::size_t i = 0; i < n; ++i) xy[i] += y[i];
        Tape tape(false);
        auto fx = tape.value(ops::affine(tape, tape.constant(x), W, b));
        auto fy = tape.value(ops::affine(tape, tape.constant(y), W, b));
        auto fxy = tape.value(ops::affine(tape, tape.constant(xy), W, b));
        for (std::size_t i = 0; i < m; ++i) EXPECT_NEAR(fxy[i], fx[i] + fy[i] - b[i], 1e-12);
    }
}

TEST(Elementwise, SigmoidAtZero) {
    Tape tape;
    EXPECT_DOUBLE_EQ(tape.scalar(ops::sigmoid(tape, tape.constant({0.0}))), 0.5);
}

TEST(Elementwise, SigmoidSaturatesWithoutOverflow) {
    Tape tape;
    auto v = tape.value(ops::sigmoid(tape, tape.constant({-800.0, 800.0})));
    EXPECT_TRUE(std::isfinite(v[0]));
    EXPECT_NEAR(v[0], 0.0, 1e-300);
    EXPECT_DOUBLE_EQ(v[1], 1.0);
}

TEST(Elementwise, ReluAndTanh) {
    Tape tape;
    auto r = tape.value(ops::relu(tape, tape.constant({-1.5, 0.0, 2.0})));
    EXPECT_EQ(std::vector<double>(r.begin(), r.end()), (std::vector<double>{0.0, 0.0, 2.0}));
    EXPECT_DOUBLE_EQ(tape.scalar(ops::tanh(tape, tape.constant({0.0}))), 0.0);
}

TEST(Elementwise, HadamardMismatch) {
    Tape tape;
    EXPECT_THROW(ops::hadamard(tape, tape.constant({1, 2}), tape.constant({1, 2, 3})), DimensionError);
    EXPECT_THROW(ops::add(tape, tape.constant({1}), tape.constant({1, 2})), DimensionError);
}

TEST(Softmax, UniformScores) {
    Tape tape;
    auto p = tape.value(ops::softmax(tape, tape.constant({3, 3, 3, 3})));
    for (double x : p) EXPECT_DOUBLE_EQ(x, 0.25);
}

TEST(Softmax, LnTwoExample) {
    Tape tape;
    auto p = tape.value(ops::softmax(tape, tape.constant({std::log(2.0), 0.0})));
    EXPECT_NEAR(p[0], 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(p[1], 1.0 / 3.0, 1e-15);
}

TEST(Softmax, EmptyInputRejected) {
    Tape tape;
    EXPECT_THROW(ops::softmax(tape, tape.constant({})), DimensionError);
}

TEST(Softmax, ProbabilityVectorProperty) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        std::size_t n = 1 + rng() % 20;
        double scale = trial % 5 == 0 ? 300.0 : 3.0;
        auto x = random_vector(n, rng, scale);
        Tape tape(false);
        auto p = tape.value(ops::softmax(tape, tape.constant(x)));
        double s = 0.0;
        for (double v : p) {
            EXPECT_GE(v, 0.0);
            s += v;
        }
        EXPECT_NEAR(s, 1.0, 1e-9);
        auto ax = std::max_element(x.begin(), x.end()) - x.begin();
        auto ap = std::max_element(p.begin(), p.end()) - p.begin();
        EXPECT_EQ(ax, ap);
    }
}

TEST(Softmax, LogSoftmaxIsNormalised) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        auto x = random_vector(1 + rng() % 12, rng, 50.0);
        Tape tape(false);
        auto lp = tape.value(ops::log_softmax(tape, tape.constant(x)));
        EXPECT_NEAR(ops::log_sum_exp(lp), 0.0, 1e-9);
    }
}

// Central differences at eps=1e-6 on each primitive in isolation.

TEST(OpGradients, AllPrimitivesMatchFiniteDifferences) {
    std::mt19937_64 rng(2024);
    auto v = [&](std::size_t n) { return random_vector(n, rng); };
    struct Case {
        const char* name;
        OpBuilder build;
        std::vector<std::vector<double>> inputs;
    };
    Tensor W({3, 4}, random_vector(12, rng)), b({3}, random_vector(3, rng));
    std::vector<Case> cases = {
        {"sigmoid", [](Tape& t, std::span<const Var> x) { return ops::sigmoid(t, x[0]); }, {v(5)}},
        {"tanh", [](Tape& t, std::span<const Var> x) { return ops::tanh(t, x[0]); }, {v(5)}},
        {"relu", [](Tape& t, std::span<const Var> x) { return ops::relu(t, x[0]); }, {{0.3, -0.7, 1.2, -2.0}}},
        {"hadamard", [](Tape& t, std::span<const Var> x) { return ops::hadamard(t, x[0], x[1]); }, {v(4), v(4)}},
        {"add", [](Tape& t, std::span<const Var> x) { return ops::add(t, x[0], x[1]); }, {v(4), v(4)}},
        {"sum", [](Tape& t, std::span<const Var> x) { return ops::sum(t, x); }, {v(3), v(3), v(3)}},
        {"mean", [](Tape& t, std::span<const Var> x) { return ops::mean(t, x); }, {v(3), v(3)}},
        {"scale", [](Tape& t, std::span<const Var> x) { return ops::scale(t, x[0], -1.7); }, {v(3)}},
        {"concat", [](Tape& t, std::span<const Var> x) { return ops::concat(t, x); }, {v(2), v(3)}},
        {"slice", [](Tape& t, std::span<const Var> x) { return ops::slice(t, x[0], 1, 3); }, {v(5)}},
        {"softmax", [](Tape& t, std::span<const Var> x) { return ops::softmax(t, x[0]); }, {v(6)}},
        {"log_softmax", [](Tape& t, std::span<const Var> x) { return ops::log_softmax(t, x[0]); }, {v(6)}},
        {"pick", [](Tape& t, std::span<const Var> x) { return ops::pick(t, ops::log_softmax(t, x[0]), 2); }, {v(4)}},
        {"sum_elements", [](Tape& t, std::span<const Var> x) { return ops::sum_elements(t, x[0]); }, {v(4)}},
        {"dot", [](Tape& t, std::span<const Var> x) { return ops::dot(t, x[0], x[1]); }, {v(4), v(4)}},
        {"weighted_sum",
         [](Tape& t, std::span<const Var> x) { return ops::weighted_sum(t, x[0], x.subspan(1)); },
         {v(3), v(4), v(4), v(4)}},
        {"affine_x", [&](Tape& t, std::span<const Var> x) { return ops::affine(t, x[0], W, b); }, {v(4)}},
        {"matvec_x", [&](Tape& t, std::span<const Var> x) { return ops::matvec(t, x[0], W); }, {v(4)}},
    };
    for (const auto& c : cases) {
        double err = op_max_rel_error(c.build, c.inputs, 77);
        EXPECT_LT(err, 1e-6) << c.name;
    }
}

TEST(OpGradients, ParameterGradientsMatchFiniteDifferences) {
    ParamStore store;
    std::mt19937_64 rng(3);
    Tensor& W = store.add("W", {3, 4});
    Tensor& b = store.add("b", {3});
    Tensor& E = store.add("E", {5, 4});
    for (std::size_t i = 0; i < store.size(); ++i)
        for (auto& x : store.tensor(i).values()) x = standard_normal(rng);
    auto x = random_vector(4, rng);
    Objective f = [&](ParamStore&, bool acc) {
        Tape tape;
        Var e = ops::embedding(tape, E, 2);
        Var in = ops::add(tape, tape.constant(x), e);
        Var h = ops::tanh(tape, ops::affine(tape, in, W, b));
        Var m = ops::matvec(tape, ops::sigmoid(tape, in), W);
        Var out = ops::dot(tape, h, m);
        if (acc) tape.backward(out);
        return tape.scalar(out);
    };
    // A composition of several ops: truncation error of the central
    // difference adds up, so this is held to the pipeline-level bound.
    auto report = grad_check(f, store, {1e-6, 1e-6});
    EXPECT_LT(report.max_rel_error, 1e-5) << report.worst_param;
    EXPECT_EQ(report.checked, 12u + 3u + 20u);
}

TEST(OpGradients, ParameterGradientsPerOpInIsolation) {
    ParamStore store;
    std::mt19937_64 rng(5);
    Tensor& W = store.add("W", {3, 4});
    Tensor& b = store.add("b", {3});
    Tensor& E = store.add("E", {5, 4});
    for (std::size_t i = 0; i < store.size(); ++i)
        for (auto& x : store.tensor(i).values()) x = standard_normal(rng);
    auto x = random_vector(4, rng);
    auto w3 = random_vector(3, rng), w4 = random_vector(4, rng);
    std::vector<std::function<Var(Tape&)>> ops_under_test = {
        [&](Tape& t) { return ops::dot(t, ops::affine(t, t.constant(x), W, b), t.constant(w3)); },
        [&](Tape& t) { return ops::dot(t, ops::matvec(t, t.constant(x), W), t.constant(w3)); },
        [&](Tape& t) { return ops::dot(t, ops::embedding(t, E, 3), t.constant(w4)); },
    };
    for (std::size_t k = 0; k < ops_under_test.size(); ++k) {
        Objective f = [&](ParamStore&, bool acc) {
            Tape tape;
            Var out = ops_under_test[k](tape);
            if (acc) tape.backward(out);
            return tape.scalar(out);
        };
        auto report = grad_check(f, store, {1e-6, 1e-6});
        EXPECT_LT(report.max_rel_error, 1e-6) << "op " << k << " " << report.worst_param;
    }
}

TEST(OpGradients, EmbeddingRowOutOfRange) {
    Tape tape;
    Tensor E({3, 2});
    EXPECT_THROW(ops::embedding(tape, E, 3), DimensionError);
}

TEST(Tape, NonRecordingLeavesParamsUntouched) {
    Tape tape(false);
    Tensor W = Tensor::matrix(1, 1, {2.0});
    Tensor b = Tensor::vector({0.0});
    Var y = ops::affine(tape, tape.constant({1.0}), W, b);
    EXPECT_DOUBLE_EQ(tape.scalar(y), 2.0);
    EXPECT_FALSE(W.has_grad());
}

TEST(Tape, FaultInjectionCorruptsTanh) {
    auto grad_of = [](bool fault) {
        Tape tape;
        tape.set_fault_injection(fault);
        Var x = tape.variable({0.4});
        tape.backward(ops::tanh(tape, x));
        return tape.grad(x)[0];
    };
    EXPECT_NEAR(grad_of(false), 1.0 - std::tanh(0.4) * std::tanh(0.4), 1e-15);
    EXPECT_GT(std::abs(grad_of(true) - grad_of(false)), 1e-3);
}

TEST(Adam, ZeroGradIsIdentity) {
    ParamStore store;
    std::mt19937_64 rng(1);
    Tensor& a = store.add("a", {3, 2});
    glorot_uniform(a, rng);
    std::vector<double> before(a.values().begin(), a.values().end());
    store.zero_grad();
    for (int i = 0; i < 5; ++i) adam_step(store, {});
    EXPECT_EQ(std::vector<double>(a.values().begin(), a.values().end()), before);
    EXPECT_EQ(store.step_count(), 5u);
}

TEST(Adam, FirstStepMovesByLearningRate) {
    ParamStore store;
    Tensor& p = store.add("p", Tensor::vector({1.0}));
    store.zero_grad();
    p.grad()[0] = 1.0;
    adam_step(store, {0.1, 0.9, 0.999, 1e-8});
    // m_hat = 1, v_hat = 1, so the step is lr / (1 + eps).
    EXPECT_NEAR(p[0], 1.0 - 0.1 / (1.0 + 1e-8), 1e-15);
    EXPECT_NEAR(p[0], 0.9, 1e-8);
    EXPECT_EQ(p.grad()[0], 0.0);
    EXPECT_EQ(store.step_count(), 1u);
}

TEST(Adam, SecondIdenticalStepWithinTenPercent) {
    ParamStore store;
    Tensor& p = store.add("p", Tensor::vector({1.0}));
    store.zero_grad();
    p.grad()[0] = 1.0;
    adam_step(store, {0.1});
    double first = 1.0 - p[0];
    double mid = p[0];
    p.grad()[0] = 1.0;
    adam_step(store, {0.1});
    double second = mid - p[0];
    EXPECT_NEAR(second / first, 1.0, 0.1);
}

TEST(Adam, MissingGradIsStateError) {
    ParamStore store;
    store.add("p", {2});
    EXPECT_THROW(adam_step(store, {}), StateError);
}

TEST(Adam, ClipGlobalNorm) {
    ParamStore store;
    Tensor& a = store.add("a", {2});
    Tensor& b = store.add("b", {1});
    store.zero_grad();
    a.grad()[0] = 3.0;
    a.grad()[1] = 0.0;
    b.grad()[0] = 4.0;
    EXPECT_DOUBLE_EQ(grad_norm(store), 5.0);
    EXPECT_DOUBLE_EQ(clip_grad_norm(store, 1.0), 5.0);
    EXPECT_NEAR(grad_norm(store), 1.0, 1e-15);
    EXPECT_NEAR(a.grad()[0], 0.6, 1e-15);
    clip_grad_norm(store, 10.0);
    EXPECT_NEAR(b.grad()[0], 0.8, 1e-15);
}

TEST(GradCheck, Quadratic) {
    ParamStore store;
    store.add("p", Tensor::vector({3.0}));
    Objective f = [](ParamStore& s, bool acc) {
        Tensor& p = s.get("p");
        if (acc) p.grad()[0] += p[0];
        return 0.5 * p[0] * p[0];
    };
    auto r = grad_check(f, store, {1e-5});
    EXPECT_LT(r.max_rel_error, 1e-8);
    EXPECT_NEAR(r.worst_analytic, 3.0, 1e-12);
    EXPECT_NEAR(r.worst_numeric, 3.0, 1e-8);
    EXPECT_EQ(store.get("p")[0], 3.0);
}

TEST(GradCheck, ConstantHasZeroError) {
    ParamStore store;
    store.add("p", Tensor::vector({1.0, -2.0}));
    auto r = grad_check([](ParamStore&, bool) { return 4.0; }, store);
    EXPECT_EQ(r.max_rel_error, 0.0);
    EXPECT_EQ(r.checked, 2u);
}

TEST(GradCheck, DetectsWrongGradient) {
    ParamStore store;
    store.add("p", Tensor::vector({3.0}));
    Objective f = [](ParamStore& s, bool acc) {
        Tensor& p = s.get("p");
        if (acc) p.grad()[0] += 2.0 * p[0];
        return 0.5 * p[0] * p[0];
    };
    auto r = grad_check(f, store);
    EXPECT_GT(r.max_rel_error, 0.4);
    EXPECT_EQ(r.worst_param, "p");
}

TEST(GradCheck, Errors) {
    ParamStore store;
    store.add("p", Tensor::vector({1.0}));
    auto ok = [](ParamStore&, bool) { return 0.0; };
    EXPECT_THROW(grad_check(ok, store, {0.0}), InputError);
    EXPECT_THROW(grad_check(ok, store, {0.02}), InputError);
    auto nan = [](ParamStore&, bool) { return std::nan(""); };
    EXPECT_THROW(grad_check(nan, store), NumericError);
}

TEST(ParamStore, InsertionOrderAndDuplicates) {
    ParamStore store;
    store.add("zeta", {1});
    store.add("alpha", {2});
    EXPECT_EQ(store.name(0), "zeta");
    EXPECT_EQ(store.name(1), "alpha");
    EXPECT_THROW(store.add("zeta", {1}), ConfigError);
    EXPECT_EQ(store.moment1(1).size(), 2u);
    EXPECT_EQ(store.scalar_count(), 3u);
    EXPECT_THROW(store.get("missing"), ConfigError);
}

TEST(ParamStore, GlorotBounds) {
    std::mt19937_64 rng(8);
    Tensor t({10, 30});
    glorot_uniform(t, rng);
    double a = std::sqrt(6.0 / 40.0);
    double lo = 1, hi = -1;
    for (double x : t.values()) {
        EXPECT_LE(std::abs(x), a);
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    EXPECT_LT(lo, -0.8 * a);
    EXPECT_GT(hi, 0.8 * a);
}

TEST(ParamStore, Uniform01IsReproducible) {
    std::mt19937_64 a(42), b(42);
    for (int i = 0; i < 100; ++i) {
        double x = uniform01(a);
        EXPECT_EQ(x, uniform01(b));
        EXPECT_GE(x, 0.0);
        EXPECT_LT(x, 1.0);
    }
}

TEST(Checkpoint, RoundTripIsBitExact) {
    ParamStore store;
    std::mt19937_64 rng(13);
    Tensor& w = store.add("enc.W", {3, 5});
    glorot_uniform(w, rng);
    Tensor& v = store.add("special", {5});
    v[0] = -0.0;
    v[1] = 5e-324;
    v[2] = 1.0 / 3.0;
    v[3] = -1e308;
    v[4] = 0.1;
    std::stringstream buf;
    write_checkpoint(buf, R"({"format":"unit"})", store);
    Checkpoint back = read_checkpoint(buf);
    EXPECT_EQ(back.manifest, R"({"format":"unit"})");
    ASSERT_EQ(back.params.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_EQ(back.params.name(i), store.name(i));
        EXPECT_EQ(back.params.tensor(i).shape(), store.tensor(i).shape());
        auto a = store.tensor(i).values(), b = back.params.tensor(i).values();
        EXPECT_EQ(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)), 0);
    }
    EXPECT_TRUE(std::signbit(back.params.get("special")[0]));
}

TEST(Checkpoint, RejectsGarbage) {
    std::stringstream bad("NOTACKPT....");
    EXPECT_THROW(read_checkpoint(bad), IoError);

    ParamStore store;
    store.add("a", {4});
    std::stringstream buf;
    write_checkpoint(buf, "{}", store);
    std::string bytes = buf.str();
    std::stringstream cut(bytes.substr(0, bytes.size() - 3));
    EXPECT_THROW(read_checkpoint(cut), IoError);
    EXPECT_THROW(load_checkpoint("/nonexistent/dir/x.ckpt"), IoError);
}
