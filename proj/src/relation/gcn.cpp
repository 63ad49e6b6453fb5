#include "hipcap/relation/gcn.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>

#include "hipcap/error.hpp"
#include "hipcap/numerics/ops.hpp"

namespace hipcap {
namespace {

std::string triple(const RelationEdge& e) {
    return "(" + std::to_string(e.src) + ", " + std::to_string(e.dst) + ", " + std::to_string(e.label) + ")";
}

}  // namespace

SemanticGraph::SemanticGraph(std::size_t vertex_count, std::vector<RelationEdge> edges)
    : vertex_count_(vertex_count), edges_(std::move(edges)) {
    std::set<std::tuple<std::size_t, std::size_t, std::size_t>> seen;
    for (const auto& e : edges_) {
        if (e.src >= vertex_count_ || e.dst >= vertex_count_) {
            throw InputError("edge " + triple(e) + " references a vertex outside [0, " + std::to_string(vertex_count_) + ")");
        }
        if (e.src == e.dst) throw InputError("edge " + triple(e) + " is a self loop");
        if (!seen.emplace(e.src, e.dst, e.label).second) throw InputError("edge " + triple(e) + " is duplicated");
    }
}

std::size_t SemanticGraph::max_label() const {
    std::size_t m = 0;
    for (const auto& e : edges_) m = std::max(m, e.label);
    return m;
}

SemanticGraph build_graph(std::span<const Region> regions, const std::optional<std::vector<RelationEdge>>& external,
                          std::size_t k_fallback) {
    const std::size_t k = regions.size();
    if (external) return SemanticGraph(k, *external);

    std::vector<const Region*> by_index(k, nullptr);
    for (const auto& r : regions) {
        if (r.index >= k) throw InputError("region index outside [0, K)");
        by_index[r.index] = &r;
    }
    std::vector<RelationEdge> edges;
    std::vector<std::size_t> others;
    for (std::size_t i = 0; i < k; ++i) {
        others.clear();
        for (std::size_t j = 0; j < k; ++j) {
            if (j != i) others.push_back(j);
        }
        auto dist2 = [&](std::size_t j) {
            const double dx = by_index[i]->box.center_x() - by_index[j]->box.center_x();
            const double dy = by_index[i]->box.center_y() - by_index[j]->box.center_y();
            return dx * dx + dy * dy;
        };
        std::stable_sort(others.begin(), others.end(),
                         [&](std::size_t a, std::size_t b) { return dist2(a) < dist2(b); });
        const std::size_t take = std::min(k_fallback, others.size());
        for (std::size_t n = 0; n < take; ++n) edges.push_back({i, others[n], 0});
    }
    return SemanticGraph(k, std::move(edges));
}

GcnParams GcnParams::create(ParamStore& store, const std::string& prefix, std::size_t dim, std::size_t labels) {
    store.add(prefix + ".W_self", {dim, dim});
    store.add(prefix + ".b", {dim});
    for (std::size_t l = 0; l < labels; ++l) {
        store.add(prefix + ".W_in." + std::to_string(l), {dim, dim});
        store.add(prefix + ".W_out." + std::to_string(l), {dim, dim});
    }
    return bind(store, prefix, labels);
}

GcnParams GcnParams::bind(ParamStore& store, const std::string& prefix, std::size_t labels) {
    GcnParams p;
    p.W_self = &store.get(prefix + ".W_self");
    p.b = &store.get(prefix + ".b");
    for (std::size_t l = 0; l < labels; ++l) {
        p.W_in.push_back(&store.get(prefix + ".W_in." + std::to_string(l)));
        p.W_out.push_back(&store.get(prefix + ".W_out." + std::to_string(l)));
    }
    return p;
}

std::vector<Var> gcn_enrich(Tape& tape, std::span<const Var> features, const SemanticGraph& graph,
                            const GcnParams& params) {
    const std::size_t k = features.size();
    if (graph.vertex_count() != k) {
        throw DimensionError("gcn_enrich: graph has " + std::to_string(graph.vertex_count()) + " vertices, got " +
                             std::to_string(k) + " features");
    }
    for (const auto& e : graph.edges()) {
        if (e.label >= params.label_count()) {
            throw ConfigError("gcn_enrich: relation label " + std::to_string(e.label) + " has no parameters");
        }
    }
    std::vector<std::vector<Var>> terms(k);
    for (std::size_t i = 0; i < k; ++i) terms[i].push_back(ops::affine(tape, features[i], *params.W_self, *params.b));
    for (const auto& e : graph.edges()) {
        terms[e.dst].push_back(ops::matvec(tape, features[e.src], *params.W_in[e.label]));
        terms[e.src].push_back(ops::matvec(tape, features[e.dst], *params.W_out[e.label]));
    }
    std::vector<Var> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const Var pre = terms[i].size() == 1 ? terms[i][0] : ops::sum(tape, terms[i]);
        out.push_back(ops::relu(tape, pre));
    }
    return out;
}

}  // namespace hipcap
