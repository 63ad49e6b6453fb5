#include "hipcap/training/recognition.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <random>

#include "hipcap/error.hpp"
#include "hipcap/hierarchy/tree.hpp"
#include "hipcap/numerics/adam.hpp"
#include "hipcap/numerics/checkpoint.hpp"
#include "hipcap/numerics/ops.hpp"
#include "hipcap/training/model.hpp"

namespace hipcap {

RecognitionHead RecognitionHead::create(ParamStore& store, const std::string& prefix, std::size_t classes,
                                        std::size_t feature) {
    if (classes < 1 || feature < 1) throw ConfigError("recognition head needs positive class and feature counts");
    store.add(prefix + ".W", {classes, feature});
    store.add(prefix + ".b", {classes});
    return bind(store, prefix);
}

RecognitionHead RecognitionHead::bind(ParamStore& store, const std::string& prefix) {
    return {&store.get(prefix + ".W"), &store.get(prefix + ".b")};
}

Var recognition_loss(Tape& tape, Var feature, std::span<const std::size_t> labels, const RecognitionHead& head) {
    if (labels.empty()) throw InputError("recognition_loss: empty label set");
    for (auto l : labels) {
        if (l >= head.classes()) {
            throw InputError("recognition_loss: label " + std::to_string(l) + " outside " +
                             std::to_string(head.classes()) + " classes");
        }
    }
    const Var logp = ops::log_softmax(tape, ops::affine(tape, feature, *head.W, *head.b));
    std::vector<Var> picks;
    for (auto l : labels) picks.push_back(ops::pick(tape, logp, l));
    return ops::scale(tape, ops::sum(tape, picks), -1.0 / static_cast<double>(labels.size()));
}

std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k) {
    std::vector<std::size_t> idx(scores.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    idx.resize(std::min(k, idx.size()));
    return idx;
}

namespace {

void check_config(const RecognitionConfig& c, std::size_t feature_dim) {
    if (c.classes == 0) throw ConfigError("recognition: class count must be positive");
    if (feature_dim == 0) throw ConfigError("recognition: feature dimension must be positive");
    if (c.feature == RecognitionFeature::TreeLstm && c.hidden == 0) {
        throw ConfigError("recognition: hidden size must be positive");
    }
    if (!(c.epsilon >= 0.0 && c.epsilon < 1.0)) throw ConfigError("recognition: epsilon must lie in [0, 1)");
    if (c.batch_size == 0) throw ConfigError("recognition: batch size must be positive");
    if (c.top == 0) throw ConfigError("recognition: top must be positive");
}

const char* feature_name(RecognitionFeature f) { return f == RecognitionFeature::TreeLstm ? "treelstm" : "mean"; }

}  // namespace

RecognitionModel::RecognitionModel(const RecognitionConfig& config, std::size_t feature_dim)
    : config_(config), feature_dim_(feature_dim) {
    check_config(config_, feature_dim_);
    std::size_t head_input = 2 * feature_dim_;
    if (config_.feature == RecognitionFeature::TreeLstm) {
        encoder_ = TreeLstmParams::create(params_, "enc", feature_dim_, config_.hidden);
        head_input = config_.hidden;
    }
    head_ = RecognitionHead::create(params_, "rec", config_.classes, head_input);
    initialize_params(params_, config_.seed);
}

RecognitionModel::RecognitionModel(const RecognitionConfig& config, std::size_t feature_dim, ParamStore params)
    : config_(config), feature_dim_(feature_dim), params_(std::move(params)) {
    check_config(config_, feature_dim_);
    if (config_.feature == RecognitionFeature::TreeLstm) encoder_ = TreeLstmParams::bind(params_, "enc");
    head_ = RecognitionHead::bind(params_, "rec");
}

Var RecognitionModel::feature(Tape& tape, const SceneRecord& scene) const {
    if (scene.feature_dim() != feature_dim_) {
        throw InputError("scene " + scene.image_id + " has feature length " + std::to_string(scene.feature_dim()) +
                         ", recognizer expects " + std::to_string(feature_dim_));
    }
    const SceneFeatures f = load_features(tape, scene.regions);
    if (config_.feature == RecognitionFeature::TreeLstm) {
        return encode(tape, f, build_tree(scene.regions, config_.epsilon), encoder_).image_feature;
    }
    const EncodedScene pooled = mean_pool(tape, f);
    const Var parts[2] = {pooled.mean_region, pooled.mean_instance};
    return ops::concat(tape, parts);
}

std::vector<std::size_t> RecognitionModel::predict(const SceneRecord& scene) const {
    Tape tape(false);
    const Var logits = ops::affine(tape, feature(tape, scene), *head_.W, *head_.b);
    return top_k(tape.value(logits), config_.top);
}

void RecognitionModel::save(const std::string& path) const {
    nlohmann::ordered_json j;
    j["format"] = "hipcap-recognizer";
    j["version"] = 1;
    j["feature"] = feature_name(config_.feature);
    j["feature_dim"] = feature_dim_;
    j["classes"] = config_.classes;
    j["hidden"] = config_.hidden;
    j["epsilon"] = config_.epsilon;
    j["top"] = config_.top;
    save_checkpoint(path, j.dump(), params_);
}

RecognitionModel RecognitionModel::load(const std::string& path) {
    Checkpoint ck = load_checkpoint(path);
    RecognitionConfig c;
    std::size_t feature_dim = 0;
    try {
        const auto j = nlohmann::ordered_json::parse(ck.manifest);
        if (j.at("format").get<std::string>() != "hipcap-recognizer") {
            throw IoError(path + ": not a recognizer checkpoint");
        }
        c.feature = j.at("feature").get<std::string>() == "treelstm" ? RecognitionFeature::TreeLstm
                                                                     : RecognitionFeature::MeanPooled;
        feature_dim = j.at("feature_dim").get<std::size_t>();
        c.classes = j.at("classes").get<std::size_t>();
        c.hidden = j.at("hidden").get<std::size_t>();
        c.epsilon = j.at("epsilon").get<double>();
        c.top = j.at("top").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": bad recognizer manifest: " + e.what());
    }
    return RecognitionModel(c, feature_dim, std::move(ck.params));
}

RecognitionResult train_recognition(RecognitionModel& model, std::span<const SceneRecord> dataset) {
    const RecognitionConfig& config = model.config();
    std::vector<const SceneRecord*> train_set, val_set;
    for (const auto& r : dataset) {
        if (!r.labels || r.labels->empty() || r.regions.empty()) continue;
        if (r.split == "train") train_set.push_back(&r);
        else if (r.split == "val") val_set.push_back(&r);
    }
    if (train_set.empty()) throw InputError("recognition: no labeled \"train\" records");

    auto scene_loss = [&](const SceneRecord& s, bool grad, double seed) {
        Tape tape(grad);
        const Var loss = recognition_loss(tape, model.feature(tape, s), *s.labels, model.head());
        if (grad) tape.backward(loss, seed);
        return tape.scalar(loss);
    };

    RecognitionResult result;
    double initial = 0.0;
    for (const auto* s : train_set) initial += scene_loss(*s, false, 0.0);
    result.epoch_loss.push_back(initial / static_cast<double>(train_set.size()));

    std::mt19937_64 rng(config.seed);
    AdamConfig adam;
    adam.lr = config.lr;
    std::vector<std::size_t> order(train_set.size());
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (std::size_t i = order.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i)) % i;
            std::swap(order[i - 1], order[j]);
        }
        double sum = 0.0;
        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
            const std::size_t end = std::min(order.size(), begin + config.batch_size);
            model.params().zero_grad();
            const double inv = 1.0 / static_cast<double>(end - begin);
            for (std::size_t k = begin; k < end; ++k) sum += scene_loss(*train_set[order[k]], true, inv);
            clip_grad_norm(model.params(), config.clip_norm);
            adam_step(model.params(), adam);
        }
        result.epoch_loss.push_back(sum / static_cast<double>(train_set.size()));
    }

    std::vector<std::vector<std::size_t>> predicted, truth;
    for (const auto* s : val_set) {
        predicted.push_back(model.predict(*s));
        truth.push_back(*s->labels);
    }
    if (!val_set.empty()) result.val = multilabel_scores(predicted, truth, config.classes);
    return result;
}

RecognitionResult train_recognition(std::span<const SceneRecord> dataset, const RecognitionConfig& config) {
    if (dataset.empty()) throw InputError("recognition: empty dataset");
    RecognitionModel model(config, dataset.front().feature_dim());
    return train_recognition(model, dataset);
}

}  // namespace hipcap
