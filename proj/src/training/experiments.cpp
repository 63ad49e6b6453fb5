#include "hipcap/training/experiments.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "hipcap/error.hpp"

namespace hipcap {

Vocab training_vocab(std::span<const SceneRecord> dataset, std::size_t min_count) {
    std::vector<SceneRecord> train_records;
    for (const auto& r : dataset) {
        if (r.split == "train") train_records.push_back(r);
    }
    return build_vocab(train_records, min_count);
}

TrainResult train_fresh(std::span<const SceneRecord> dataset, ModelConfig model, const TrainConfig& train_config,
                        std::uint64_t model_seed, std::size_t min_count) {
    if (dataset.empty()) throw InputError("empty dataset");
    if (model.feature_dim == 0) model.feature_dim = dataset.front().feature_dim();
    CaptionModel m(model, training_vocab(dataset, min_count), model_seed);
    return train(m, dataset, train_config);
}

std::vector<SweepRow> sweep_epsilon(std::span<const SceneRecord> dataset, std::span<const double> epsilons,
                                    const ModelConfig& model, const TrainConfig& train_config,
                                    std::uint64_t model_seed, std::size_t min_count, std::size_t threads) {
    if (epsilons.size() < 2) throw InputError("epsilon sweep needs at least two values");
    std::vector<double> grid(epsilons.begin(), epsilons.end());
    std::sort(grid.begin(), grid.end());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0 && grid[i] < 1.0)) throw InputError("epsilon values must lie in [0, 1)");
        if (i > 0 && grid[i] == grid[i - 1]) throw InputError("duplicate epsilon value in sweep");
    }
    TrainConfig tc = train_config;
    tc.checkpoint_path.clear();
    std::vector<SweepRow> rows(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        ModelConfig mc = model;
        mc.epsilon = grid[i];
        const TrainResult r = train_fresh(dataset, mc, tc, model_seed, min_count);
        rows[i] = {grid[i], r.best_val_cider, r.best_val_bleu4};
    });
    return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
    out << kSweepHeader << '\n';
    char buf[128];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%g,%.10f,%.10f\n", r.epsilon, r.cider_d, r.bleu4);
        out << buf;
    }
}

std::vector<FeatureFlags> ablation_configurations() {
    auto f = [](bool r, bool m, bool t) {
        FeatureFlags flags;
        flags.use_regions = r;
        flags.use_instances = m;
        flags.use_treelstm = t;
        return flags;
    };
    return {f(true, false, false), f(false, true, false), f(false, false, true), f(true, true, false),
            f(true, false, true),  f(false, true, true),  f(true, true, true)};
}

std::vector<AblationCell> run_ablation(std::span<const SceneRecord> dataset, std::span<const FeatureFlags> configs,
                                       std::span<const std::uint64_t> seeds, const ModelConfig& model,
                                       const TrainConfig& train_config, std::size_t min_count, std::size_t threads) {
    TrainConfig base = train_config;
    base.checkpoint_path.clear();
    std::vector<AblationCell> cells(configs.size() * seeds.size());
    parallel_for(cells.size(), threads, [&](std::size_t n) {
        const FeatureFlags& flags = configs[n / seeds.size()];
        const std::uint64_t seed = seeds[n % seeds.size()];
        ModelConfig mc = model;
        mc.flags.use_regions = flags.use_regions;
        mc.flags.use_instances = flags.use_instances;
        mc.flags.use_treelstm = flags.use_treelstm;
        TrainConfig tc = base;
        tc.seed = seed;
        const TrainResult r = train_fresh(dataset, mc, tc, seed, min_count);
        cells[n] = {mc.flags, seed, r.best_val_cider, r.best_val_bleu4};
    });
    return cells;
}

void write_ablation_csv(std::ostream& out, std::span<const AblationCell> cells) {
    out << kAblationHeader << '\n';
    char buf[160];
    for (const auto& c : cells) {
        std::snprintf(buf, sizeof buf, "%d,%d,%d,%llu,%.10f,%.10f\n", c.flags.use_regions ? 1 : 0,
                      c.flags.use_instances ? 1 : 0, c.flags.use_treelstm ? 1 : 0,
                      static_cast<unsigned long long>(c.seed), c.cider_d, c.bleu4);
        out << buf;
    }
}

}  // namespace hipcap
