#include "hipcap/training/model.hpp"

#include <json.hpp>
#include <random>

#include "hipcap/error.hpp"
#include "hipcap/hierarchy/tree.hpp"
#include "hipcap/numerics/checkpoint.hpp"

namespace hipcap {

using nlohmann::ordered_json;

void ModelConfig::validate() const {
    if (feature_dim == 0) throw ConfigError("model: feature_dim must be positive");
    if (encoder_hidden == 0 || decoder_hidden == 0 || embed == 0 || attention == 0) {
        throw ConfigError("model: hidden, embedding and attention sizes must be positive");
    }
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ConfigError("model: epsilon must lie in [0, 1)");
    if (!flags.use_regions && !flags.use_instances && !flags.use_treelstm) {
        throw ConfigError("model: at least one of regions, instances, Tree-LSTM must be enabled");
    }
    if (flags.use_gcn && relation_labels == 0) throw ConfigError("model: GCN needs at least one relation label");
    if (max_len == 0) throw ConfigError("model: max_len must be positive");
}

std::string ModelConfig::to_json() const {
    ordered_json j;
    j["feature_dim"] = feature_dim;
    j["encoder_hidden"] = encoder_hidden;
    j["decoder_hidden"] = decoder_hidden;
    j["embed"] = embed;
    j["attention"] = attention;
    j["use_regions"] = flags.use_regions;
    j["use_instances"] = flags.use_instances;
    j["use_treelstm"] = flags.use_treelstm;
    j["use_gcn"] = flags.use_gcn;
    j["epsilon"] = epsilon;
    j["relation_labels"] = relation_labels;
    j["k_fallback"] = k_fallback;
    j["max_len"] = max_len;
    return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
    ModelConfig c;
    try {
        const auto j = ordered_json::parse(text);
        c.feature_dim = j.at("feature_dim").get<std::size_t>();
        c.encoder_hidden = j.at("encoder_hidden").get<std::size_t>();
        c.decoder_hidden = j.at("decoder_hidden").get<std::size_t>();
        c.embed = j.at("embed").get<std::size_t>();
        c.attention = j.at("attention").get<std::size_t>();
        c.flags.use_regions = j.at("use_regions").get<bool>();
        c.flags.use_instances = j.at("use_instances").get<bool>();
        c.flags.use_treelstm = j.at("use_treelstm").get<bool>();
        c.flags.use_gcn = j.at("use_gcn").get<bool>();
        c.epsilon = j.at("epsilon").get<double>();
        c.relation_labels = j.at("relation_labels").get<std::size_t>();
        c.k_fallback = j.at("k_fallback").get<std::size_t>();
        c.max_len = j.at("max_len").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("model config: ") + e.what());
    }
    c.validate();
    return c;
}

DecoderDims decoder_dims(const ModelConfig& c, std::size_t vocab_size) {
    DecoderDims d;
    d.vocab = vocab_size;
    d.embed = c.embed;
    d.hidden = c.decoder_hidden;
    d.attention = c.attention;
    if (c.flags.use_treelstm) {
        d.descriptor += c.encoder_hidden;
        d.global += c.encoder_hidden;
    }
    if (c.flags.use_regions) {
        d.descriptor += c.feature_dim;
        d.global += c.feature_dim;
    }
    if (c.flags.use_instances) {
        d.descriptor += c.feature_dim;
        d.global += c.feature_dim;
    }
    return d;
}

void initialize_params(ParamStore& store, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < store.size(); ++i) {
        Tensor& t = store.tensor(i);
        const std::string& name = store.name(i);
        const bool attention_vector = name.size() >= 4 && name.compare(name.size() - 4, 4, ".w_a") == 0;
        if (t.rank() == 2 || attention_vector) {
            glorot_uniform(t, rng);
        } else {
            for (auto& v : t.values()) v = 0.0;
        }
    }
}

CaptionModel::CaptionModel(ModelConfig config, Vocab vocab, std::uint64_t seed)
    : config_(std::move(config)), vocab_(std::move(vocab)) {
    config_.validate();
    if (config_.flags.use_treelstm) {
        TreeLstmParams::create(params_, "enc", config_.feature_dim, config_.encoder_hidden);
    }
    if (config_.flags.use_gcn) {
        if (config_.flags.use_treelstm) GcnParams::create(params_, "gcn_rh", config_.encoder_hidden, config_.relation_labels);
        if (config_.flags.use_regions) GcnParams::create(params_, "gcn_r", config_.feature_dim, config_.relation_labels);
        if (config_.flags.use_instances) GcnParams::create(params_, "gcn_m", config_.feature_dim, config_.relation_labels);
    }
    DecoderParams::create(params_, "dec", decoder_dims(config_, vocab_.size()));
    initialize_params(params_, seed);
    bind();
}

CaptionModel::CaptionModel(ModelConfig config, Vocab vocab, ParamStore params)
    : config_(std::move(config)), vocab_(std::move(vocab)), params_(std::move(params)) {
    config_.validate();
    bind();
    const DecoderDims d = decoder_dims(config_, vocab_.size());
    if (decoder_.vocab() != d.vocab || decoder_.W_va->cols() != d.descriptor ||
        decoder_.W_l1->cols() != d.embed + 2 * d.hidden + d.global) {
        throw ConfigError("model: parameter shapes do not match the configuration");
    }
}

void CaptionModel::bind() {
    try {
        if (config_.flags.use_treelstm) encoder_ = TreeLstmParams::bind(params_, "enc");
        if (config_.flags.use_gcn) {
            if (config_.flags.use_treelstm) gcn_refined_ = GcnParams::bind(params_, "gcn_rh", config_.relation_labels);
            if (config_.flags.use_regions) gcn_regions_ = GcnParams::bind(params_, "gcn_r", config_.relation_labels);
            if (config_.flags.use_instances) gcn_instances_ = GcnParams::bind(params_, "gcn_m", config_.relation_labels);
        }
        decoder_ = DecoderParams::bind(params_, "dec");
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("model: missing parameter: ") + e.what());
    }
}

DecoderContext CaptionModel::context(Tape& tape, const SceneRecord& scene) const {
    if (scene.regions.empty()) throw InputError("scene " + scene.image_id + " has no regions");
    if (scene.feature_dim() != config_.feature_dim) {
        throw InputError("scene " + scene.image_id + " has feature length " + std::to_string(scene.feature_dim()) +
                         ", model expects " + std::to_string(config_.feature_dim));
    }
    const SceneFeatures features = load_features(tape, scene.regions);
    EncodedScene encoded;
    if (config_.flags.use_treelstm) {
        const HierarchyTree tree = build_tree(scene.regions, config_.epsilon);
        encoded = encode(tape, features, tree, encoder_);
    } else {
        encoded = mean_pool(tape, features);
    }
    if (!config_.flags.use_gcn) return make_context(tape, encoded, nullptr, config_.flags, decoder_);

    const SemanticGraph graph = build_graph(scene.regions, scene.edges, config_.k_fallback);
    DescriptorSources enriched;
    if (config_.flags.use_treelstm) enriched.refined = gcn_enrich(tape, encoded.refined_regions, graph, gcn_refined_);
    if (config_.flags.use_regions) enriched.regions = gcn_enrich(tape, encoded.regions, graph, gcn_regions_);
    if (config_.flags.use_instances) enriched.instances = gcn_enrich(tape, encoded.instances, graph, gcn_instances_);
    return make_context(tape, encoded, &enriched, config_.flags, decoder_);
}

Hypothesis CaptionModel::caption(const SceneRecord& scene, std::size_t beam) const {
    Tape tape(false);
    const DecoderContext ctx = context(tape, scene);
    return beam_search(tape, ctx, decoder_, beam, config_.max_len);
}

std::vector<std::string> CaptionModel::caption_tokens(const SceneRecord& scene, std::size_t beam) const {
    return vocab_.decode_tokens(caption(scene, beam).tokens);
}

std::string CaptionModel::manifest() const {
    ordered_json j;
    j["format"] = "hipcap-model";
    j["version"] = 1;
    j["config"] = ordered_json::parse(config_.to_json());
    j["vocab"] = ordered_json::parse(vocab_.to_json());
    return j.dump();
}

void CaptionModel::save(const std::string& path) const { save_checkpoint(path, manifest(), params_); }

CaptionModel CaptionModel::load(const std::string& path) {
    Checkpoint ck = load_checkpoint(path);
    ordered_json j;
    try {
        j = ordered_json::parse(ck.manifest);
        if (j.at("format").get<std::string>() != "hipcap-model") throw ConfigError("not a hipcap model checkpoint");
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": bad checkpoint manifest: " + e.what());
    }
    ModelConfig config = ModelConfig::from_json(j.at("config").dump());
    Vocab vocab = Vocab::from_json(j.at("vocab").dump());
    return CaptionModel(std::move(config), std::move(vocab), std::move(ck.params));
}

}  // namespace hipcap
