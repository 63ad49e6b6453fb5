#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hipcap/error.hpp"
#include "hipcap/numerics/grad_check.hpp"
#include "hipcap/numerics/ops.hpp"
#include "hipcap/relation/gcn.hpp"
#include "test_support.hpp"

using namespace hipcap;
using hipcap::testing::make_region;
using hipcap::testing::random_regions;
using hipcap::testing::randomize_params;

namespace {

std::vector<Var> constants(Tape& tape, const std::vector<std::vector<double>>& xs) {
    std::vector<Var> out;
    for (const auto& x : xs) out.push_back(tape.constant(x));
    return out;
}

std::vector<std::vector<double>> random_features(std::size_t k, std::size_t d, std::mt19937_64& rng) {
    std::vector<std::vector<double>> out(k, std::vector<double>(d));
    for (auto& v : out)
        for (auto& x : v) x = standard_normal(rng);
    return out;
}

}  // namespace

TEST(SemanticGraph, RejectsInvalidEdges) {
    EXPECT_THROW(SemanticGraph(2, {{0, 2, 0}}), InputError);
    EXPECT_THROW(SemanticGraph(2, {{1, 1, 0}}), InputError);
    try {
        SemanticGraph(3, {{0, 1, 2}, {0, 1, 2}});
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("(0, 1, 2)"), std::string::npos) << e.what();
    }
    EXPECT_NO_THROW(SemanticGraph(3, {{0, 1, 2}, {0, 1, 1}, {1, 0, 2}}));
}

TEST(BuildGraph, EmptyExternalEdges) {
    std::mt19937_64 rng(0);
    auto regions = random_regions(4, 2, rng);
    auto g = build_graph(regions, std::vector<RelationEdge>{}, 2);
    EXPECT_EQ(g.vertex_count(), 4u);
    EXPECT_TRUE(g.edges().empty());
}

TEST(BuildGraph, ExternalEdgesPassThrough) {
    std::mt19937_64 rng(0);
    auto regions = random_regions(4, 2, rng);
    std::vector<RelationEdge> edges = {{3, 0, 4}, {0, 1, 0}, {2, 1, 1}};
    EXPECT_EQ(build_graph(regions, edges, 2).edges(), edges);
    EXPECT_THROW(build_graph(regions, std::vector<RelationEdge>{{0, 9, 0}}, 2), InputError);
}

TEST(BuildGraph, CollinearFallback) {
    std::mt19937_64 rng(0);
    std::vector<Region> regions = {make_region(0, Box(0, 0, 4, 4), 2, rng), make_region(1, Box(10, 0, 14, 4), 2, rng),
                                   make_region(2, Box(20, 0, 24, 4), 2, rng)};
    auto g = build_graph(regions, std::nullopt, 1);
    std::vector<RelationEdge> expected = {{0, 1, 0}, {1, 0, 0}, {2, 1, 0}};
    EXPECT_EQ(g.edges(), expected);
}

TEST(BuildGraph, FallbackDegreeCapped) {
    std::mt19937_64 rng(1);
    auto regions = random_regions(5, 2, rng);
    EXPECT_EQ(build_graph(regions, std::nullopt, 2).edges().size(), 10u);
    EXPECT_EQ(build_graph(regions, std::nullopt, 10).edges().size(), 20u);
    std::vector<Region> one = {regions[0]};
    one[0].index = 0;
    EXPECT_TRUE(build_graph(one, std::nullopt, 2).edges().empty());
}

TEST(GcnEnrich, ZeroParams) {
    ParamStore store;
    auto p = GcnParams::create(store, "gcn", 3, 2);
    Tape tape;
    std::mt19937_64 rng(4);
    auto out = gcn_enrich(tape, constants(tape, random_features(3, 3, rng)), SemanticGraph(3, {{0, 1, 1}, {2, 0, 0}}), p);
    for (Var v : out)
        for (double x : tape.value(v)) EXPECT_EQ(x, 0.0);
}

TEST(GcnEnrich, SelfLoopIdentityIsRelu) {
    ParamStore store;
    auto p = GcnParams::create(store, "gcn", 3, 1);
    for (std::size_t i = 0; i < 3; ++i) p.W_self->at(i, i) = 1.0;
    Tape tape;
    std::vector<std::vector<double>> xs = {{1.0, -2.0, 0.5}, {-0.1, 0.0, 3.0}};
    auto out = gcn_enrich(tape, constants(tape, xs), SemanticGraph(2, {}), p);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t d = 0; d < 3; ++d) EXPECT_EQ(tape.value(out[i])[d], std::max(0.0, xs[i][d]));
}

TEST(GcnEnrich, ScalarOracle) {
    ParamStore store;
    auto p = GcnParams::create(store, "gcn", 1, 2);
    (*p.W_self)[0] = 0.5;
    (*p.b)[0] = 0.1;
    (*p.W_in[1])[0] = 2.0;
    (*p.W_out[1])[0] = -3.0;
    (*p.W_in[0])[0] = 7.0;  // unused label
    Tape tape;
    auto out = gcn_enrich(tape, constants(tape, {{1.0}, {0.4}}), SemanticGraph(2, {{0, 1, 1}}), p);
    // v0: relu(0.5*1 + W_out*0.4 + 0.1) = relu(-0.6) = 0; v1: relu(0.5*0.4 + W_in*1 + 0.1) = 2.3
    EXPECT_DOUBLE_EQ(tape.scalar(out[0]), 0.0);
    EXPECT_NEAR(tape.scalar(out[1]), 2.3, 1e-15);
    (*p.W_out[1])[0] = 1.0;
    Tape t2;
    auto out2 = gcn_enrich(t2, constants(t2, {{1.0}, {0.4}}), SemanticGraph(2, {{0, 1, 1}}), p);
    EXPECT_NEAR(t2.scalar(out2[0]), 0.5 + 0.4 + 0.1, 1e-15);
}

TEST(GcnEnrich, Errors) {
    ParamStore store;
    auto p = GcnParams::create(store, "gcn", 2, 1);
    Tape tape;
    auto xs = constants(tape, {{1, 2}, {3, 4}});
    EXPECT_THROW(gcn_enrich(tape, xs, SemanticGraph(2, {{0, 1, 1}}), p), ConfigError);
    EXPECT_THROW(gcn_enrich(tape, xs, SemanticGraph(3, {}), p), DimensionError);
}

TEST(GcnEnrich, RelabelingEquivariance) {
    ParamStore store;
    auto p = GcnParams::create(store, "gcn", 4, 3);
    randomize_params(store, 2, 0.6);
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t k = 2 + rng() % 8;
        auto xs = random_features(k, 4, rng);
        std::vector<RelationEdge> edges;
        for (std::size_t s = 0; s < k; ++s)
            for (std::size_t d = 0; d < k; ++d)
                if (s != d && uniform01(rng) < 0.3) edges.push_back({s, d, rng() % 3});
        std::vector<std::size_t> perm(k);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<std::vector<double>> pxs(k);
        for (std::size_t i = 0; i < k; ++i) pxs[perm[i]] = xs[i];
        std::vector<RelationEdge> pedges;
        for (const auto& e : edges) pedges.push_back({perm[e.src], perm[e.dst], e.label});

        Tape tape;
        auto a = gcn_enrich(tape, constants(tape, xs), SemanticGraph(k, edges), p);
        auto b = gcn_enrich(tape, constants(tape, pxs), SemanticGraph(k, pedges), p);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t d = 0; d < 4; ++d) EXPECT_NEAR(tape.value(a[i])[d], tape.value(b[perm[i]])[d], 1e-12);
    }
}

TEST(GcnEnrich, AddingEdgeOnlyTouchesEndpoints) {
    ParamStore store;
    auto p = GcnParams::create(store, "gcn", 3, 2);
    randomize_params(store, 4, 0.6);
    // Keep pre-activations positive so ReLU does not hide a change.
    for (auto& x : p.b->values()) x = 5.0;
    std::mt19937_64 rng(5);
    auto xs = random_features(5, 3, rng);
    std::vector<RelationEdge> edges = {{0, 1, 0}, {3, 4, 1}};
    Tape tape;
    auto a = gcn_enrich(tape, constants(tape, xs), SemanticGraph(5, edges), p);
    edges.push_back({2, 4, 1});
    auto b = gcn_enrich(tape, constants(tape, xs), SemanticGraph(5, edges), p);
    for (std::size_t i = 0; i < 5; ++i) {
        double diff = 0;
        for (std::size_t d = 0; d < 3; ++d) diff = std::max(diff, std::abs(tape.value(a[i])[d] - tape.value(b[i])[d]));
        if (i == 2 || i == 4)
            EXPECT_GT(diff, 1e-9) << i;
        else
            EXPECT_EQ(diff, 0.0) << i;
    }
}

TEST(GcnEnrich, GradientMatchesFiniteDifferences) {
    ParamStore store;
    GcnParams::create(store, "gcn", 3, 2);
    randomize_params(store, 12, 0.5);
    for (auto& x : store.get("gcn.b").values()) x += 1.0;  // away from the ReLU kink
    std::mt19937_64 rng(3);
    auto xs = random_features(4, 3, rng);
    SemanticGraph g(4, {{0, 1, 0}, {1, 2, 1}, {3, 0, 1}, {2, 3, 0}});
    Objective f = [&](ParamStore& s, bool acc) {
        auto p = GcnParams::bind(s, "gcn", 2);
        Tape tape;
        auto out = gcn_enrich(tape, constants(tape, xs), g, p);
        std::vector<Var> parts;
        for (std::size_t i = 0; i < out.size(); ++i)
            parts.push_back(ops::dot(tape, out[i], tape.constant({0.3 * (i + 1), -0.7, 1.1})));
        Var y = ops::sum(tape, parts);
        if (acc) tape.backward(y);
        return tape.scalar(y);
    };
    auto r = grad_check(f, store, {1e-5, 1e-6});
    EXPECT_LT(r.max_rel_error, 1e-4) << r.worst_param;
}
