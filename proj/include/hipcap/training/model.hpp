#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hipcap/data/dataset.hpp"
#include "hipcap/data/vocab.hpp"
#include "hipcap/decoder/decoder.hpp"
#include "hipcap/encoder/tree_lstm.hpp"
#include "hipcap/relation/gcn.hpp"

namespace hipcap {

struct ModelConfig {
    std::size_t feature_dim = 0;        // D_r
    std::size_t encoder_hidden = 500;
    std::size_t decoder_hidden = 1000;
    std::size_t embed = 256;
    std::size_t attention = 512;
    FeatureFlags flags;
    double epsilon = 0.1;
    std::size_t relation_labels = 5;    // GCN label count (used with flags.use_gcn)
    std::size_t k_fallback = 2;
    std::size_t max_len = 20;

    /// Throws ConfigError on inconsistent settings.
    void validate() const;
    std::string to_json() const;
    static ModelConfig from_json(const std::string& text);
};

/// Encoder, optional relation pass and decoder sharing one parameter store.
class CaptionModel {
public:
    /// Fresh model with Glorot-uniform weights and zero biases.
    CaptionModel(ModelConfig config, Vocab vocab, std::uint64_t seed);
    /// Model around existing parameters (e.g. from a checkpoint).
    CaptionModel(ModelConfig config, Vocab vocab, ParamStore params);

    CaptionModel(CaptionModel&&) = default;
    CaptionModel& operator=(CaptionModel&&) = default;

    const ModelConfig& config() const noexcept { return config_; }
    const Vocab& vocab() const noexcept { return vocab_; }
    ParamStore& params() noexcept { return params_; }
    const ParamStore& params() const noexcept { return params_; }
    const DecoderParams& decoder() const noexcept { return decoder_; }

    /// Builds the tree, encodes and (optionally) enriches one scene and
    /// returns the decoder context on `tape`.
    DecoderContext context(Tape& tape, const SceneRecord& scene) const;

    /// Beam-search caption (beam 1 is greedy) on an inference tape.
    Hypothesis caption(const SceneRecord& scene, std::size_t beam) const;
    std::vector<std::string> caption_tokens(const SceneRecord& scene, std::size_t beam) const;

    /// Manifest stored alongside the parameters in a checkpoint.
    std::string manifest() const;
    void save(const std::string& path) const;
    static CaptionModel load(const std::string& path);

private:
    void bind();

    ModelConfig config_;
    Vocab vocab_;
    ParamStore params_;
    TreeLstmParams encoder_;
    DecoderParams decoder_;
    GcnParams gcn_refined_, gcn_regions_, gcn_instances_;
};

/// Descriptor and image-level context sizes implied by a configuration.
DecoderDims decoder_dims(const ModelConfig& config, std::size_t vocab_size);

/// Glorot-uniform for every matrix (and the attention vector), zeros for biases.
void initialize_params(ParamStore& store, std::uint64_t seed);

}  // namespace hipcap
