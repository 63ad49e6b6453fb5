#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hipcap/data/dataset.hpp"
#include "hipcap/encoder/tree_lstm.hpp"
#include "hipcap/metrics/caption_metrics.hpp"
#include "hipcap/numerics/param_store.hpp"
#include "hipcap/numerics/tape.hpp"

namespace hipcap {

/// Linear multi-label classifier over an image-level feature.
struct RecognitionHead {
    Tensor* W = nullptr;  // [C x feature]
    Tensor* b = nullptr;  // [C]

    static RecognitionHead create(ParamStore& store, const std::string& prefix, std::size_t classes,
                                  std::size_t feature);
    static RecognitionHead bind(ParamStore& store, const std::string& prefix);
    std::size_t classes() const { return W->rows(); }
};

/// -(1/|labels|) sum_{k in labels} log softmax(W f + b)_k. Throws InputError
/// for an empty label set or a label >= C.
Var recognition_loss(Tape& tape, Var feature, std::span<const std::size_t> labels, const RecognitionHead& head);

/// Indices of the k largest scores, highest first; ties go to the lower index.
std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k);

enum class RecognitionFeature {
    TreeLstm,    // root hidden state I^h of the hierarchy encoder
    MeanPooled,  // [mean r, mean m]
};

struct RecognitionConfig {
    RecognitionFeature feature = RecognitionFeature::TreeLstm;
    std::size_t classes = 0;
    std::size_t hidden = 500;
    double epsilon = 0.1;
    double lr = 5e-4;
    std::size_t batch_size = 50;
    std::size_t epochs = 30;
    std::uint64_t seed = 0;
    double clip_norm = 5.0;
    std::size_t top = 3;
};

struct RecognitionResult {
    std::vector<double> epoch_loss;  // mean training loss per epoch, index 0 before training
    MultilabelScores val;            // top-k scores on the "val" split after the last epoch
};

/// Encoder (for the Tree-LSTM feature) plus recognition head.
class RecognitionModel {
public:
    RecognitionModel(const RecognitionConfig& config, std::size_t feature_dim);
    RecognitionModel(RecognitionModel&&) = default;
    RecognitionModel& operator=(RecognitionModel&&) = default;

    const RecognitionConfig& config() const noexcept { return config_; }
    std::size_t feature_dim() const noexcept { return feature_dim_; }
    ParamStore& params() noexcept { return params_; }
    const RecognitionHead& head() const noexcept { return head_; }

    /// I^h or [mean r, mean m] for one scene.
    Var feature(Tape& tape, const SceneRecord& scene) const;
    /// Class scores ranked highest first, truncated to config().top.
    std::vector<std::size_t> predict(const SceneRecord& scene) const;

    void save(const std::string& path) const;
    static RecognitionModel load(const std::string& path);

private:
    RecognitionModel(const RecognitionConfig& config, std::size_t feature_dim, ParamStore params);

    RecognitionConfig config_;
    std::size_t feature_dim_ = 0;
    ParamStore params_;
    TreeLstmParams encoder_;
    RecognitionHead head_;
};

/// Trains `model` on the labeled "train" records and scores the "val" ones.
RecognitionResult train_recognition(RecognitionModel& model, std::span<const SceneRecord> dataset);

/// Convenience: fresh model sized from the data, trained and discarded.
RecognitionResult train_recognition(std::span<const SceneRecord> dataset, const RecognitionConfig& config);

}  // namespace hipcap
