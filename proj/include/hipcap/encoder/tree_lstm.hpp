#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hipcap/hierarchy/tree.hpp"
#include "hipcap/numerics/param_store.hpp"
#include "hipcap/numerics/tape.hpp"

namespace hipcap {

/// Weights of one child-sum Tree-LSTM unit shared by every node of the
/// hierarchy, plus the root fusion matrices that map the mean-pooled region
/// and instance features to the root input.
struct TreeLstmParams {
    Tensor* W_u = nullptr;
    Tensor* W_i = nullptr;
    Tensor* W_f = nullptr;
    Tensor* W_o = nullptr;
    Tensor* U_u = nullptr;
    Tensor* U_i = nullptr;
    Tensor* U_f = nullptr;
    Tensor* U_o = nullptr;
    Tensor* b_u = nullptr;
    Tensor* b_i = nullptr;
    Tensor* b_f = nullptr;
    Tensor* b_o = nullptr;
    Tensor* W_r = nullptr;
    Tensor* W_m = nullptr;

    /// Registers zero-initialized tensors named `<prefix>.W_u` and so on.
    static TreeLstmParams create(ParamStore& store, const std::string& prefix, std::size_t feature_dim,
                                 std::size_t hidden);
    /// Looks up tensors previously registered under `prefix`.
    static TreeLstmParams bind(ParamStore& store, const std::string& prefix);

    std::size_t hidden() const { return U_u->rows(); }
    std::size_t input_dim() const { return W_u->cols(); }
    std::size_t feature_dim() const { return W_r->cols(); }
};

struct TreeLstmState {
    Var h;
    Var c;
};

/// One child-sum Tree-LSTM update. With no children the summed hidden state
/// is zero and the forget-gate sum is empty.
TreeLstmState tree_lstm_node(Tape& tape, Var x, std::span<const TreeLstmState> children, const TreeLstmParams& params);

/// Tape-resident region and instance features of one scene, in region-index order.
struct SceneFeatures {
    std::vector<Var> regions;
    std::vector<Var> instances;
};

/// Records every region's features on the tape as constants.
SceneFeatures load_features(Tape& tape, std::span<const Region> regions);

struct EncodedScene {
    std::vector<Var> refined_regions;  // hidden state of each region node, by region index
    Var image_feature;                 // hidden state of the root
    Var mean_region;
    Var mean_instance;
    Var root_input;                    // W_r * mean_region + W_m * mean_instance
    std::vector<Var> regions;
    std::vector<Var> instances;
};

/// Mean-pooled features only; used when the Tree-LSTM is switched off.
EncodedScene mean_pool(Tape& tape, const SceneFeatures& features);

/// Runs the Tree-LSTM bottom-up over `tree`: instance leaves read m_i,
/// region nodes read r_i, the root reads the fused mean-pooled input.
/// Throws InputError for an empty scene or a tree that does not match.
EncodedScene encode(Tape& tape, const SceneFeatures& features, const HierarchyTree& tree,
                    const TreeLstmParams& params);

}  // namespace hipcap
