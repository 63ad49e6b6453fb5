#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hipcap/encoder/tree_lstm.hpp"
#include "hipcap/numerics/param_store.hpp"
#include "hipcap/numerics/tape.hpp"

namespace hipcap {

inline constexpr std::size_t kBos = 0;
inline constexpr std::size_t kEos = 1;
inline constexpr std::size_t kUnk = 2;
inline constexpr std::size_t kPad = 3;
inline constexpr std::size_t kSpecialTokens = 4;

/// Which feature families reach the decoder. Each switch drops the matching
/// per-region component of the attention descriptor and the matching
/// image-level vector of the first-layer input.
struct FeatureFlags {
    bool use_regions = true;     // r_i and mean r
    bool use_instances = true;   // m_i and mean m
    bool use_treelstm = true;    // r^h_i and I^h
    bool use_gcn = false;        // replace the descriptor triple by its GCN-enriched version
};

struct DecoderDims {
    std::size_t vocab = 0;
    std::size_t embed = 256;
    std::size_t hidden = 1000;
    std::size_t attention = 512;
    std::size_t descriptor = 0;  // length of v_i
    std::size_t global = 0;      // length of the image-level context
};

/// Two-layer attention LSTM. Each LSTM keeps one fused weight over
/// [input, previous hidden] with gate blocks ordered (input, forget, cell, output).
struct DecoderParams {
    Tensor* embed = nullptr;      // [V x D_s]
    Tensor* W_l1 = nullptr;       // [4H x (D_s + H + global + H)]
    Tensor* b_l1 = nullptr;
    Tensor* W_l2 = nullptr;       // [4H x (descriptor + H + H)]
    Tensor* b_l2 = nullptr;
    Tensor* W_va = nullptr;       // [A x descriptor]
    Tensor* W_ha = nullptr;       // [A x H]
    Tensor* w_a = nullptr;        // [A]
    Tensor* W_out = nullptr;      // [V x H]
    Tensor* b_out = nullptr;      // [V]

    static DecoderParams create(ParamStore& store, const std::string& prefix, const DecoderDims& dims);
    static DecoderParams bind(ParamStore& store, const std::string& prefix);

    std::size_t vocab() const { return W_out->rows(); }
    std::size_t hidden() const { return W_out->cols(); }
};

/// Per-scene inputs to the decoder, computed once and reused at every step.
struct DecoderContext {
    std::vector<Var> descriptors;        // v_i
    std::vector<Var> projected;          // W_va v_i
    Var global;                          // image-level features for layer 1
    Var w_a;                             // attention vector on this tape
};

/// Per-region component lists feeding region_descriptor(). Empty lists mean
/// the component is disabled.
struct DescriptorSources {
    std::vector<Var> refined;    // r^h_i (or its enriched version)
    std::vector<Var> regions;    // r_i
    std::vector<Var> instances;  // m_i
};

/// v_i = [r^h_i, r_i, m_i] restricted to the non-empty sources.
Var region_descriptor(Tape& tape, const DescriptorSources& sources, std::size_t i);

/// Picks descriptor components and the image-level context according to
/// `flags`. `enriched` holds the GCN outputs (r~^h, r~, m~) when present.
DecoderContext make_context(Tape& tape, const EncodedScene& scene, const DescriptorSources* enriched,
                            const FeatureFlags& flags, const DecoderParams& params);

struct DecodeState {
    Var h1, c1, h2, c2;
    std::size_t step = 0;
    std::vector<std::size_t> tokens;  // generated tokens, BOS excluded
    double log_prob = 0.0;
};

DecodeState initial_state(Tape& tape, const DecoderParams& params);

struct StepOutput {
    DecodeState state;  // tokens/log_prob are not advanced; callers append the chosen token
    Var log_probs;      // log-distribution over the vocabulary
    Var attention;      // lambda_t over regions
};

StepOutput decode_step(Tape& tape, const DecoderContext& ctx, const DecodeState& state, std::size_t prev_token,
                       const DecoderParams& params);

/// Teacher-forced total log-probability of `tokens` (BOS ... EOS).
Var score_caption(Tape& tape, const DecoderContext& ctx, std::span<const std::size_t> tokens,
                  const DecoderParams& params);

struct Hypothesis {
    std::vector<std::size_t> tokens;  // BOS excluded; EOS included when emitted
    double log_prob = 0.0;
};

Hypothesis greedy_decode(Tape& tape, const DecoderContext& ctx, const DecoderParams& params, std::size_t max_len);

/// Length-capped beam search ranked by total log-probability; candidate ties
/// go to the lower parent rank, then the lower token id.
Hypothesis beam_search(Tape& tape, const DecoderContext& ctx, const DecoderParams& params, std::size_t beam,
                       std::size_t max_len);

struct SampledCaption {
    std::vector<std::size_t> tokens;
    Var log_prob;  // differentiable total log-probability on the tape
};

/// Ancestral sampling at temperature 1.
SampledCaption sample_caption(Tape& tape, const DecoderContext& ctx, const DecoderParams& params,
                              std::mt19937_64& rng, std::size_t max_len);

/// Drops a trailing EOS.
std::vector<std::size_t> strip_eos(std::vector<std::size_t> tokens);

}  // namespace hipcap
