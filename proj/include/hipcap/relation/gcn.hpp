#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hipcap/hierarchy/box.hpp"
#include "hipcap/numerics/param_store.hpp"
#include "hipcap/numerics/tape.hpp"

namespace hipcap {

/// Directed, labeled relation between two regions of the same scene.
struct RelationEdge {
    std::size_t src = 0;
    std::size_t dst = 0;
    std::size_t label = 0;
    friend bool operator==(const RelationEdge&, const RelationEdge&) = default;
};

class SemanticGraph {
public:
    SemanticGraph() = default;
    /// Throws InputError naming the first offending (src, dst, label) triple.
    SemanticGraph(std::size_t vertex_count, std::vector<RelationEdge> edges);

    std::size_t vertex_count() const noexcept { return vertex_count_; }
    const std::vector<RelationEdge>& edges() const noexcept { return edges_; }
    std::size_t max_label() const;

private:
    std::size_t vertex_count_ = 0;
    std::vector<RelationEdge> edges_;
};

/// Uses `external` edges when present; otherwise links every region to its
/// `k_fallback` nearest neighbours by box-center distance with label 0
/// (distance ties go to the lower index).
SemanticGraph build_graph(std::span<const Region> regions, const std::optional<std::vector<RelationEdge>>& external,
                          std::size_t k_fallback);

/// One label-aware graph-convolution layer:
///   out_i = relu(W_self v_i + sum_{j->i} W_in[l] v_j + sum_{i->j} W_out[l] v_j + b)
struct GcnParams {
    Tensor* W_self = nullptr;
    Tensor* b = nullptr;
    std::vector<Tensor*> W_in;
    std::vector<Tensor*> W_out;

    static GcnParams create(ParamStore& store, const std::string& prefix, std::size_t dim, std::size_t labels);
    static GcnParams bind(ParamStore& store, const std::string& prefix, std::size_t labels);

    std::size_t dim() const { return W_self->rows(); }
    std::size_t label_count() const { return W_in.size(); }
};

std::vector<Var> gcn_enrich(Tape& tape, std::span<const Var> features, const SemanticGraph& graph,
                            const GcnParams& params);

}  // namespace hipcap
