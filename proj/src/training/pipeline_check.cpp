#include "hipcap/training/pipeline_check.hpp"

#include <json.hpp>
#include <random>

#include "hipcap/numerics/ops.hpp"

namespace hipcap {
namespace {

constexpr std::size_t kCheckFeatureDim = 8;
constexpr std::size_t kCheckHidden = 8;

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = standard_normal(rng);
    return v;
}

}  // namespace

SceneRecord pipeline_check_scene(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    SceneRecord s;
    s.image_id = "gradcheck";
    const Box boxes[2] = {Box(0, 0, 10, 10), Box(1, 1, 7, 7)};  // IoU 0.36: nested at epsilon 0.1
    for (std::size_t i = 0; i < 2; ++i) {
        Region r;
        r.index = i;
        r.box = boxes[i];
        r.confidence = 0.9;
        r.region_feature = random_vector(rng, kCheckFeatureDim);
        r.instance_feature = random_vector(rng, kCheckFeatureDim);
        s.regions.push_back(std::move(r));
    }
    s.edges = std::vector<RelationEdge>{{0, 1, 0}, {1, 0, 1}};
    s.captions = {"w0 w3 w5 w1", "w2 w7 w4"};
    return s;
}

CaptionModel pipeline_check_model(bool use_gcn, std::uint64_t seed) {
    ModelConfig c;
    c.feature_dim = kCheckFeatureDim;
    c.encoder_hidden = kCheckHidden;
    c.decoder_hidden = kCheckHidden;
    c.embed = kCheckHidden;
    c.attention = kCheckHidden;
    c.flags.use_gcn = use_gcn;
    c.relation_labels = 2;
    std::vector<std::string> words;
    for (int i = 0; i < 8; ++i) words.push_back("w" + std::to_string(i));
    CaptionModel model(c, Vocab::from_tokens(words, 1), seed);
    // Nonzero biases so their gradients are exercised with generic values.
    std::mt19937_64 rng(seed + 17);
    for (std::size_t i = 0; i < model.params().size(); ++i) {
        Tensor& t = model.params().tensor(i);
        if (t.rank() == 1) {
            for (auto& v : t.values()) v = 0.1 * standard_normal(rng);
        }
    }
    return model;
}

PipelineCheckResult run_pipeline_check(const PipelineCheckOptions& options) {
    const SceneRecord scene = pipeline_check_scene(options.seed);
    CaptionModel model = pipeline_check_model(options.use_gcn, options.seed);
    std::vector<std::vector<std::size_t>> captions;
    for (const auto& c : scene.captions) captions.push_back(model.vocab().encode(c));

    const Objective f = [&](ParamStore&, bool accumulate) {
        Tape tape(accumulate);
        tape.set_fault_injection(options.break_gradient);
        const DecoderContext ctx = model.context(tape, scene);
        std::vector<Var> scores;
        for (const auto& cap : captions) scores.push_back(score_caption(tape, ctx, cap, model.decoder()));
        const Var loss = ops::scale(tape, ops::sum(tape, scores), -1.0 / static_cast<double>(captions.size()));
        if (accumulate) tape.backward(loss);
        return tape.scalar(loss);
    };

    PipelineCheckResult result;
    result.loss = f(model.params(), false);
    result.report = grad_check(f, model.params(), {options.epsilon, options.floor});
    result.passed = result.report.max_rel_error < options.tolerance;
    return result;
}

std::string pipeline_check_json(const PipelineCheckOptions& options, const PipelineCheckResult& r) {
    nlohmann::ordered_json j;
    j["passed"] = r.passed;
    j["max_rel_error"] = r.report.max_rel_error;
    j["max_abs_error"] = r.report.max_abs_error;
    j["tolerance"] = options.tolerance;
    j["worst_param"] = r.report.worst_param;
    j["worst_index"] = r.report.worst_index;
    j["worst_analytic"] = r.report.worst_analytic;
    j["worst_numeric"] = r.report.worst_numeric;
    j["checked"] = r.report.checked;
    j["epsilon"] = options.epsilon;
    j["use_gcn"] = options.use_gcn;
    j["break_gradient"] = options.break_gradient;
    j["loss"] = r.loss;
    return j.dump();
}

}  // namespace hipcap
