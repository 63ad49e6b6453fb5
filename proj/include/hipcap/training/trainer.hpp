#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hipcap/metrics/caption_metrics.hpp"
#include "hipcap/metrics/report.hpp"
#include "hipcap/training/model.hpp"

namespace hipcap {

/// A scene with its reference captions encoded as BOS ... EOS token ids.
struct TrainingExample {
    const SceneRecord* scene = nullptr;
    std::vector<std::vector<std::size_t>> captions;
};

std::vector<TrainingExample> make_examples(const Vocab& vocab, std::span<const SceneRecord* const> scenes);

/// Mean of -score_caption over every (scene, caption) pair of the batch.
/// With `accumulate_grad` the gradient of that mean is added into the
/// model's parameter gradients. Throws InputError for an empty batch.
double ce_loss(CaptionModel& model, std::span<const TrainingExample> batch, bool accumulate_grad);

struct TrainConfig {
    double lr = 5e-4;
    std::size_t batch_size = 50;
    std::size_t epochs = 30;
    std::uint64_t seed = 0;      // batch order
    double clip_norm = 5.0;
    std::size_t beam = 3;        // validation decoding
    std::string checkpoint_path; // best-validation checkpoint; empty disables saving
    bool log_wall_time = true;

    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;       // 0 is the untrained model
    double ce_loss = 0.0;        // mean training loss over the epoch
    double val_bleu4 = 0.0;
    double val_cider = 0.0;
    double wall_seconds = 0.0;
};

struct TrainResult {
    std::vector<EpochRecord> log;
    std::size_t best_epoch = 0;
    double best_val_cider = 0.0;
    double best_val_bleu4 = 0.0;
};

inline constexpr const char* kEpochLogHeader = "epoch,ce_loss,val_bleu4,val_cider,wall_seconds";
void write_epoch_row(std::ostream& out, const EpochRecord& row);

/// Cross-entropy training over the "train" split with model selection by
/// validation CIDEr-D on the "val" split. Each epoch row is written to
/// `csv` (if given) as soon as it is complete.
TrainResult train(CaptionModel& model, std::span<const SceneRecord> dataset, const TrainConfig& config,
                  std::ostream* csv = nullptr);

/// Beam-decodes `scenes` and scores them against their own references.
CaptionReport evaluate_model(const CaptionModel& model, std::span<const SceneRecord* const> scenes, std::size_t beam);

/// Reward of a caption for a batch example; index is the position in the batch.
using RewardFn = std::function<double(std::size_t example, const Sentence& caption)>;

struct ScstStepResult {
    double pseudo_loss = 0.0;    // -mean(r * log p(sample))
    double mean_reward = 0.0;    // mean of r = score(sample) - score(greedy)
    double mean_sample_score = 0.0;
    double mean_greedy_score = 0.0;
};

/// One self-critical step: per scene, a sampled caption and the greedy
/// caption; the gradient of -mean_i r_i log p(sample_i) is accumulated with
/// r_i held constant. Parameters are not updated.
ScstStepResult scst_step(CaptionModel& model, std::span<const TrainingExample> batch, const RewardFn& reward,
                         std::mt19937_64& rng);

struct ScstConfig {
    double lr = 5e-5;
    std::size_t batch_size = 50;
    std::size_t epochs = 30;
    std::uint64_t seed = 0;      // batch order and sampling
    double clip_norm = 5.0;

    void validate() const;
};

struct ScstEpochRecord {
    std::size_t epoch = 0;
    double mean_reward = 0.0;
    double sample_cider = 0.0;
    double greedy_cider = 0.0;
    double wall_seconds = 0.0;
};

inline constexpr const char* kScstLogHeader = "epoch,mean_reward,sample_cider,greedy_cider,wall_seconds";
void write_scst_row(std::ostream& out, const ScstEpochRecord& row);

/// Self-critical fine-tuning on the "train" split with CIDEr-D rewards
/// against each scene's references (document frequencies over the split).
std::vector<ScstEpochRecord> train_scst(CaptionModel& model, std::span<const SceneRecord> dataset,
                                        const ScstConfig& config, std::ostream* csv = nullptr);

/// Worker count for parallel evaluation: HIPCAP_THREADS if set, else the
/// hardware concurrency (at least 1).
std::size_t thread_budget();

/// Runs fn(i) for i in [0, n) on up to `threads` threads.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace hipcap
