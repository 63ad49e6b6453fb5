#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "hipcap/training/model.hpp"
#include "hipcap/training/trainer.hpp"

namespace hipcap {

/// Vocabulary over the captions of the "train" split.
Vocab training_vocab(std::span<const SceneRecord> dataset, std::size_t min_count);

/// Builds a model sized for `dataset`, trains it and returns the result.
/// `model.feature_dim` is taken from the data when zero.
TrainResult train_fresh(std::span<const SceneRecord> dataset, ModelConfig model, const TrainConfig& train,
                        std::uint64_t model_seed, std::size_t min_count);

struct SweepRow {
    double epsilon = 0.0;
    double cider_d = 0.0;  // best validation CIDEr-D
    double bleu4 = 0.0;    // validation BLEU@4 at that epoch
};

inline const std::vector<double> kDefaultEpsilonGrid{0.05, 0.1, 0.2, 0.3, 0.4, 0.5};

/// One model per epsilon, all sharing the same seeds. Rows come back in
/// ascending epsilon. Throws InputError for fewer than two values,
/// duplicates, or values outside [0, 1).
std::vector<SweepRow> sweep_epsilon(std::span<const SceneRecord> dataset, std::span<const double> epsilons,
                                    const ModelConfig& model, const TrainConfig& train, std::uint64_t model_seed,
                                    std::size_t min_count, std::size_t threads);

inline constexpr const char* kSweepHeader = "epsilon,cider_d,bleu4";
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

/// Feature combinations in table order: R, M, T, R+M, R+T, M+T, R+M+T.
std::vector<FeatureFlags> ablation_configurations();

struct AblationCell {
    FeatureFlags flags;
    std::uint64_t seed = 0;
    double cider_d = 0.0;
    double bleu4 = 0.0;
};

std::vector<AblationCell> run_ablation(std::span<const SceneRecord> dataset, std::span<const FeatureFlags> configs,
                                       std::span<const std::uint64_t> seeds, const ModelConfig& model,
                                       const TrainConfig& train, std::size_t min_count, std::size_t threads);

inline constexpr const char* kAblationHeader = "regions,instances,treelstm,seed,cider_d,bleu4";
void write_ablation_csv(std::ostream& out, std::span<const AblationCell> cells);

}  // namespace hipcap
