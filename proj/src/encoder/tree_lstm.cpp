#include "hipcap/encoder/tree_lstm.hpp"

#include <optional>

#include "hipcap/error.hpp"
#include "hipcap/numerics/ops.hpp"

namespace hipcap {

TreeLstmParams TreeLstmParams::create(ParamStore& store, const std::string& prefix, std::size_t feature_dim,
                                      std::size_t hidden) {
    const std::size_t in = feature_dim;
    for (const char* g : {"u", "i", "f", "o"}) {
        store.add(prefix + ".W_" + g, {hidden, in});
        store.add(prefix + ".U_" + g, {hidden, hidden});
        store.add(prefix + ".b_" + g, {hidden});
    }
    store.add(prefix + ".W_r", {in, feature_dim});
    store.add(prefix + ".W_m", {in, feature_dim});
    return bind(store, prefix);
}

TreeLstmParams TreeLstmParams::bind(ParamStore& store, const std::string& prefix) {
    TreeLstmParams p;
    p.W_u = &store.get(prefix + ".W_u");
    p.W_i = &store.get(prefix + ".W_i");
    p.W_f = &store.get(prefix + ".W_f");
    p.W_o = &store.get(prefix + ".W_o");
    p.U_u = &store.get(prefix + ".U_u");
    p.U_i = &store.get(prefix + ".U_i");
    p.U_f = &store.get(prefix + ".U_f");
    p.U_o = &store.get(prefix + ".U_o");
    p.b_u = &store.get(prefix + ".b_u");
    p.b_i = &store.get(prefix + ".b_i");
    p.b_f = &store.get(prefix + ".b_f");
    p.b_o = &store.get(prefix + ".b_o");
    p.W_r = &store.get(prefix + ".W_r");
    p.W_m = &store.get(prefix + ".W_m");
    return p;
}

TreeLstmState tree_lstm_node(Tape& tape, Var x, std::span<const TreeLstmState> children, const TreeLstmParams& p) {
    const std::size_t hidden = p.hidden();
    for (const auto& ch : children) {
        if (tape.size(ch.h) != hidden || tape.size(ch.c) != hidden) {
            throw DimensionError("tree_lstm_node: child state does not match hidden size " + std::to_string(hidden));
        }
    }

    // Gate pre-activation W x + b, plus U * h_sum when the node has children.
    std::optional<Var> h_sum;
    if (!children.empty()) {
        std::vector<Var> hs;
        hs.reserve(children.size());
        for (const auto& ch : children) hs.push_back(ch.h);
        h_sum = ops::sum(tape, hs);
    }
    auto gate = [&](Tensor* W, Tensor* U, Tensor* b) {
        Var pre = ops::affine(tape, x, *W, *b);
        if (h_sum) pre = ops::add(tape, pre, ops::matvec(tape, *h_sum, *U));
        return pre;
    };
    const Var u = ops::tanh(tape, gate(p.W_u, p.U_u, p.b_u));
    const Var i = ops::sigmoid(tape, gate(p.W_i, p.U_i, p.b_i));
    const Var o = ops::sigmoid(tape, gate(p.W_o, p.U_o, p.b_o));

    std::vector<Var> cell_terms{ops::hadamard(tape, u, i)};
    if (!children.empty()) {
        const Var wf = ops::affine(tape, x, *p.W_f, *p.b_f);
        for (const auto& ch : children) {
            const Var f = ops::sigmoid(tape, ops::add(tape, wf, ops::matvec(tape, ch.h, *p.U_f)));
            cell_terms.push_back(ops::hadamard(tape, ch.c, f));
        }
    }
    const Var c = cell_terms.size() == 1 ? cell_terms[0] : ops::sum(tape, cell_terms);
    const Var h = ops::hadamard(tape, ops::tanh(tape, c), o);
    return {h, c};
}

SceneFeatures load_features(Tape& tape, std::span<const Region> regions) {
    SceneFeatures f;
    f.regions.resize(regions.size());
    f.instances.resize(regions.size());
    for (const auto& r : regions) {
        if (r.index >= regions.size()) throw InputError("region index outside [0, K)");
        if (r.region_feature.size() != r.instance_feature.size()) {
            throw DimensionError("region " + std::to_string(r.index) + ": region and instance feature lengths differ");
        }
        f.regions[r.index] = tape.constant(r.region_feature);
        f.instances[r.index] = tape.constant(r.instance_feature);
    }
    return f;
}

EncodedScene mean_pool(Tape& tape, const SceneFeatures& features) {
    if (features.regions.empty()) throw InputError("encode: scene has no regions");
    EncodedScene out;
    out.regions = features.regions;
    out.instances = features.instances;
    out.mean_region = ops::mean(tape, features.regions);
    out.mean_instance = ops::mean(tape, features.instances);
    return out;
}

EncodedScene encode(Tape& tape, const SceneFeatures& features, const HierarchyTree& tree, const TreeLstmParams& params) {
    const std::size_t k = features.regions.size();
    if (k == 0) throw InputError("encode: scene has no regions");
    if (tree.region_count() != k) {
        throw InputError("encode: tree has " + std::to_string(tree.region_count()) + " regions, scene has " +
                         std::to_string(k));
    }
    EncodedScene out = mean_pool(tape, features);
    out.root_input = ops::add(tape, ops::matvec(tape, out.mean_region, *params.W_r),
                              ops::matvec(tape, out.mean_instance, *params.W_m));

    const auto& nodes = tree.nodes();
    std::vector<std::optional<TreeLstmState>> state(nodes.size());
    std::vector<TreeLstmState> child_states;
    for (std::size_t id : tree.bottom_up_order()) {
        const auto& n = nodes[id];
        child_states.clear();
        for (auto c : n.children) {
            if (!state[c]) throw StateError("encode: node " + std::to_string(id) + " visited before its children");
            child_states.push_back(*state[c]);
        }
        Var x;
        switch (n.kind) {
            case NodeKind::Root: x = out.root_input; break;
            case NodeKind::Region: x = features.regions[n.region]; break;
            case NodeKind::Instance: x = features.instances[n.region]; break;
        }
        state[id] = tree_lstm_node(tape, x, child_states, params);
    }
    out.refined_regions.resize(k);
    for (std::size_t r = 0; r < k; ++r) out.refined_regions[r] = state[tree.region_node(r)]->h;
    out.image_feature = state[HierarchyTree::kRoot]->h;
    return out;
}

}  // namespace hipcap
