#include "hipcap/training/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "hipcap/error.hpp"
#include "hipcap/numerics/adam.hpp"
#include "hipcap/numerics/ops.hpp"

namespace hipcap {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::mt19937_64& rng) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i)) % i;
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

std::size_t pair_count(std::span<const TrainingExample> batch) {
    std::size_t n = 0;
    for (const auto& ex : batch) n += ex.captions.size();
    return n;
}

std::vector<Sentence> reference_sentences(const SceneRecord& scene) {
    std::vector<Sentence> refs;
    for (const auto& c : scene.captions) refs.push_back(tokenize(c));
    return refs;
}

}  // namespace

std::vector<TrainingExample> make_examples(const Vocab& vocab, std::span<const SceneRecord* const> scenes) {
    std::vector<TrainingExample> out;
    out.reserve(scenes.size());
    for (const SceneRecord* s : scenes) {
        TrainingExample ex;
        ex.scene = s;
        for (const auto& c : s->captions) ex.captions.push_back(vocab.encode(c));
        out.push_back(std::move(ex));
    }
    return out;
}

double ce_loss(CaptionModel& model, std::span<const TrainingExample> batch, bool accumulate_grad) {
    if (batch.empty()) throw InputError("ce_loss: empty batch");
    const std::size_t pairs = pair_count(batch);
    if (pairs == 0) throw InputError("ce_loss: batch has no captions");
    double total = 0.0;
    for (const auto& ex : batch) {
        if (ex.captions.empty()) continue;
        Tape tape(accumulate_grad);
        const DecoderContext ctx = model.context(tape, *ex.scene);
        std::vector<Var> scores;
        scores.reserve(ex.captions.size());
        for (const auto& cap : ex.captions) scores.push_back(score_caption(tape, ctx, cap, model.decoder()));
        const Var s = ops::sum(tape, scores);
        total -= tape.scalar(s);
        if (accumulate_grad) tape.backward(s, -1.0 / static_cast<double>(pairs));
    }
    return total / static_cast<double>(pairs);
}

void TrainConfig::validate() const {
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("train: lr must be a nonnegative number");
    if (batch_size == 0) throw ConfigError("train: batch size must be positive");
    if (beam == 0) throw ConfigError("train: beam must be positive");
    if (!(clip_norm > 0.0)) throw ConfigError("train: clip norm must be positive");
}

void ScstConfig::validate() const {
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("scst: lr must be a nonnegative number");
    if (batch_size == 0) throw ConfigError("scst: batch size must be positive");
    if (!(clip_norm > 0.0)) throw ConfigError("scst: clip norm must be positive");
}

void write_epoch_row(std::ostream& out, const EpochRecord& row) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu,%.10f,%.10f,%.10f,%.3f\n", row.epoch, row.ce_loss, row.val_bleu4,
                  row.val_cider, row.wall_seconds);
    out << buf << std::flush;
}

void write_scst_row(std::ostream& out, const ScstEpochRecord& row) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu,%.10f,%.10f,%.10f,%.3f\n", row.epoch, row.mean_reward, row.sample_cider,
                  row.greedy_cider, row.wall_seconds);
    out << buf << std::flush;
}

CaptionReport evaluate_model(const CaptionModel& model, std::span<const SceneRecord* const> scenes, std::size_t beam) {
    std::vector<Sentence> candidates(scenes.size());
    std::vector<std::vector<Sentence>> references(scenes.size());
    std::vector<std::string> ids(scenes.size());
    parallel_for(scenes.size(), thread_budget(), [&](std::size_t i) {
        candidates[i] = model.caption_tokens(*scenes[i], beam);
        references[i] = reference_sentences(*scenes[i]);
        ids[i] = scenes[i]->image_id;
    });
    return evaluate_captions(candidates, references, ids);
}

TrainResult train(CaptionModel& model, std::span<const SceneRecord> dataset, const TrainConfig& config,
                  std::ostream* csv) {
    config.validate();
    const std::vector<SceneRecord> all(dataset.begin(), dataset.end());
    const auto train_scenes = select_split(all, "train");
    const auto val_scenes = select_split(all, "val");
    if (train_scenes.empty()) throw InputError("train: dataset has no \"train\" records");
    if (val_scenes.empty()) throw InputError("train: dataset has no \"val\" records");
    for (const SceneRecord* s : train_scenes) {
        if (s->captions.empty()) throw InputError("train: record " + s->image_id + " has no captions");
    }
    const std::vector<TrainingExample> examples = make_examples(model.vocab(), train_scenes);

    TrainResult result;
    const auto start = Clock::now();
    std::mt19937_64 rng(config.seed);
    AdamConfig adam;
    adam.lr = config.lr;
    if (csv) *csv << kEpochLogHeader << '\n';

    auto finish_epoch = [&](std::size_t epoch, double loss) {
        const CaptionReport val = evaluate_model(model, val_scenes, config.beam);
        EpochRecord row{epoch, loss, val.bleu[3], val.cider_d, config.log_wall_time ? seconds_since(start) : 0.0};
        if (epoch == 0 || row.val_cider > result.best_val_cider) {
            result.best_epoch = epoch;
            result.best_val_cider = row.val_cider;
            result.best_val_bleu4 = row.val_bleu4;
            if (!config.checkpoint_path.empty()) model.save(config.checkpoint_path);
        }
        result.log.push_back(row);
        if (csv) write_epoch_row(*csv, row);
    };

    finish_epoch(0, ce_loss(model, examples, false));
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto order = shuffled_indices(examples.size(), rng);
        double loss_sum = 0.0;
        std::size_t pairs = 0;
        std::vector<TrainingExample> batch;
        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
            batch.clear();
            for (std::size_t k = begin; k < std::min(order.size(), begin + config.batch_size); ++k) {
                batch.push_back(examples[order[k]]);
            }
            model.params().zero_grad();
            const std::size_t n = pair_count(batch);
            loss_sum += ce_loss(model, batch, true) * static_cast<double>(n);
            pairs += n;
            clip_grad_norm(model.params(), config.clip_norm);
            adam_step(model.params(), adam);
        }
        finish_epoch(epoch, loss_sum / static_cast<double>(pairs));
    }
    return result;
}

ScstStepResult scst_step(CaptionModel& model, std::span<const TrainingExample> batch, const RewardFn& reward,
                         std::mt19937_64& rng) {
    if (batch.empty()) throw InputError("scst_step: empty batch");
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    ScstStepResult out;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        Tape tape(true);
        const DecoderContext ctx = model.context(tape, *batch[i].scene);
        const SampledCaption sample = sample_caption(tape, ctx, model.decoder(), rng, model.config().max_len);
        // Greedy nodes are recorded after the sample's log-probability and
        // are therefore never visited by its backward pass.
        const Hypothesis greedy = greedy_decode(tape, ctx, model.decoder(), model.config().max_len);
        const double s = reward(i, model.vocab().decode_tokens(sample.tokens));
        const double g = reward(i, model.vocab().decode_tokens(greedy.tokens));
        const double r = s - g;
        out.mean_sample_score += s * inv_b;
        out.mean_greedy_score += g * inv_b;
        out.mean_reward += r * inv_b;
        out.pseudo_loss -= r * tape.scalar(sample.log_prob) * inv_b;
        if (r != 0.0) tape.backward(sample.log_prob, -r * inv_b);
    }
    return out;
}

std::vector<ScstEpochRecord> train_scst(CaptionModel& model, std::span<const SceneRecord> dataset,
                                        const ScstConfig& config, std::ostream* csv) {
    config.validate();
    const std::vector<SceneRecord> all(dataset.begin(), dataset.end());
    const auto train_scenes = select_split(all, "train");
    if (train_scenes.empty()) throw InputError("scst: dataset has no \"train\" records");
    const std::vector<TrainingExample> examples = make_examples(model.vocab(), train_scenes);
    std::vector<std::vector<Sentence>> refs;
    for (const SceneRecord* s : train_scenes) refs.push_back(reference_sentences(*s));
    const CiderD cider(refs);

    std::mt19937_64 order_rng(config.seed);
    std::mt19937_64 sample_rng(config.seed ^ 0x5C57ull);
    AdamConfig adam;
    adam.lr = config.lr;
    const auto start = Clock::now();
    std::vector<ScstEpochRecord> log;
    if (csv) *csv << kScstLogHeader << '\n';
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto order = shuffled_indices(examples.size(), order_rng);
        ScstEpochRecord row;
        row.epoch = epoch;
        std::vector<TrainingExample> batch;
        std::vector<std::size_t> batch_index;
        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
            batch.clear();
            batch_index.clear();
            for (std::size_t k = begin; k < std::min(order.size(), begin + config.batch_size); ++k) {
                batch.push_back(examples[order[k]]);
                batch_index.push_back(order[k]);
            }
            model.params().zero_grad();
            const ScstStepResult step = scst_step(
                model, batch,
                [&](std::size_t i, const Sentence& c) { return cider.score_image(batch_index[i], c); },
                sample_rng);
            const double w = static_cast<double>(batch.size()) / static_cast<double>(examples.size());
            row.mean_reward += step.mean_reward * w;
            row.sample_cider += step.mean_sample_score * w;
            row.greedy_cider += step.mean_greedy_score * w;
            clip_grad_norm(model.params(), config.clip_norm);
            adam_step(model.params(), adam);
        }
        row.wall_seconds = seconds_since(start);
        log.push_back(row);
        if (csv) write_scst_row(*csv, row);
    }
    return log;
}

std::size_t thread_budget() {
    if (const char* env = std::getenv("HIPCAP_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
        throw ConfigError(std::string("HIPCAP_THREADS must be a positive integer, got '") + env + "'");
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace hipcap
