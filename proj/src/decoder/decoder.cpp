#include "hipcap/decoder/decoder.hpp"

#include <cmath>

#include "hipcap/decoder/search.hpp"
#include "hipcap/error.hpp"
#include "hipcap/numerics/ops.hpp"

namespace hipcap {
namespace {

struct LstmOut {
    Var h;
    Var c;
};

// Standard LSTM cell over a fused [input, h_prev] weight.
LstmOut lstm_cell(Tape& tape, Var input, Var h_prev, Var c_prev, Tensor& W, Tensor& b) {
    const Var xs[2] = {input, h_prev};
    const Var gates = ops::affine(tape, ops::concat(tape, xs), W, b);
    const std::size_t h = tape.size(h_prev);
    const Var i = ops::sigmoid(tape, ops::slice(tape, gates, 0, h));
    const Var f = ops::sigmoid(tape, ops::slice(tape, gates, h, h));
    const Var g = ops::tanh(tape, ops::slice(tape, gates, 2 * h, h));
    const Var o = ops::sigmoid(tape, ops::slice(tape, gates, 3 * h, h));
    const Var c = ops::add(tape, ops::hadamard(tape, f, c_prev), ops::hadamard(tape, i, g));
    return {ops::hadamard(tape, o, ops::tanh(tape, c)), c};
}

}  // namespace

DecoderParams DecoderParams::create(ParamStore& store, const std::string& prefix, const DecoderDims& d) {
    if (d.vocab <= kSpecialTokens || d.embed == 0 || d.hidden == 0 || d.attention == 0 || d.descriptor == 0) {
        throw ConfigError("decoder dimensions must be positive and the vocabulary must exceed the special tokens");
    }
    const std::size_t h = d.hidden;
    store.add(prefix + ".embed", {d.vocab, d.embed});
    store.add(prefix + ".W_l1", {4 * h, d.embed + h + d.global + h});
    store.add(prefix + ".b_l1", {4 * h});
    store.add(prefix + ".W_l2", {4 * h, d.descriptor + h + h});
    store.add(prefix + ".b_l2", {4 * h});
    store.add(prefix + ".W_va", {d.attention, d.descriptor});
    store.add(prefix + ".W_ha", {d.attention, h});
    store.add(prefix + ".w_a", {d.attention});
    store.add(prefix + ".W_out", {d.vocab, h});
    store.add(prefix + ".b_out", {d.vocab});
    return bind(store, prefix);
}

DecoderParams DecoderParams::bind(ParamStore& store, const std::string& prefix) {
    DecoderParams p;
    p.embed = &store.get(prefix + ".embed");
    p.W_l1 = &store.get(prefix + ".W_l1");
    p.b_l1 = &store.get(prefix + ".b_l1");
    p.W_l2 = &store.get(prefix + ".W_l2");
    p.b_l2 = &store.get(prefix + ".b_l2");
    p.W_va = &store.get(prefix + ".W_va");
    p.W_ha = &store.get(prefix + ".W_ha");
    p.w_a = &store.get(prefix + ".w_a");
    p.W_out = &store.get(prefix + ".W_out");
    p.b_out = &store.get(prefix + ".b_out");
    return p;
}

Var region_descriptor(Tape& tape, const DescriptorSources& sources, std::size_t i) {
    std::vector<Var> parts;
    if (!sources.refined.empty()) parts.push_back(sources.refined.at(i));
    if (!sources.regions.empty()) parts.push_back(sources.regions.at(i));
    if (!sources.instances.empty()) parts.push_back(sources.instances.at(i));
    if (parts.empty()) throw ConfigError("region descriptor has no enabled components");
    if (parts.size() == 1) return parts[0];
    return ops::concat(tape, parts);
}

DecoderContext make_context(Tape& tape, const EncodedScene& scene, const DescriptorSources* enriched,
                            const FeatureFlags& flags, const DecoderParams& params) {
    if (!flags.use_regions && !flags.use_instances && !flags.use_treelstm) {
        throw ConfigError("at least one of regions, instances, Tree-LSTM features must be enabled");
    }
    if (flags.use_treelstm && scene.refined_regions.empty()) {
        throw ConfigError("Tree-LSTM features requested but the scene was not encoded with the Tree-LSTM");
    }
    const std::size_t k = scene.regions.size();
    if (k == 0) throw InputError("decoder needs at least one region");

    DescriptorSources src;
    const DescriptorSources& from = enriched ? *enriched
                                             : DescriptorSources{scene.refined_regions, scene.regions, scene.instances};
    if (flags.use_treelstm) src.refined = from.refined;
    if (flags.use_regions) src.regions = from.regions;
    if (flags.use_instances) src.instances = from.instances;

    DecoderContext ctx;
    ctx.descriptors.reserve(k);
    ctx.projected.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        ctx.descriptors.push_back(region_descriptor(tape, src, i));
        if (tape.size(ctx.descriptors.back()) != params.W_va->cols()) {
            throw ConfigError("descriptor length " + std::to_string(tape.size(ctx.descriptors.back())) +
                              " does not match attention weight " + params.W_va->shape_string());
        }
        ctx.projected.push_back(ops::matvec(tape, ctx.descriptors.back(), *params.W_va));
    }
    std::vector<Var> global;
    if (flags.use_treelstm) global.push_back(scene.image_feature);
    if (flags.use_regions) global.push_back(scene.mean_region);
    if (flags.use_instances) global.push_back(scene.mean_instance);
    ctx.global = global.size() == 1 ? global[0] : ops::concat(tape, global);
    ctx.w_a = tape.param(*params.w_a);
    return ctx;
}

DecodeState initial_state(Tape& tape, const DecoderParams& params) {
    const std::vector<double> zeros(params.hidden(), 0.0);
    DecodeState s;
    s.h1 = tape.constant(zeros);
    s.c1 = tape.constant(zeros);
    s.h2 = tape.constant(zeros);
    s.c2 = tape.constant(zeros);
    return s;
}

StepOutput decode_step(Tape& tape, const DecoderContext& ctx, const DecodeState& state, std::size_t prev_token,
                       const DecoderParams& params) {
    if (prev_token >= params.vocab()) {
        throw InputError("token " + std::to_string(prev_token) + " outside vocabulary of size " +
                         std::to_string(params.vocab()));
    }
    const std::size_t expected = params.embed->cols() + params.hidden() + tape.size(ctx.global) + params.hidden();
    if (params.W_l1->cols() != expected) {
        throw ConfigError("first-layer LSTM weight " + params.W_l1->shape_string() + " expects a different input (" +
                          std::to_string(expected) + ")");
    }

    const Var layer1_in[3] = {ops::embedding(tape, *params.embed, prev_token), state.h2, ctx.global};
    const LstmOut l1 = lstm_cell(tape, ops::concat(tape, layer1_in), state.h1, state.c1, *params.W_l1, *params.b_l1);

    const Var query = ops::matvec(tape, l1.h, *params.W_ha);
    std::vector<Var> scores;
    scores.reserve(ctx.projected.size());
    for (const Var& p : ctx.projected) {
        scores.push_back(ops::dot(tape, ops::tanh(tape, ops::add(tape, p, query)), ctx.w_a));
    }
    const Var attention = ops::softmax(tape, ops::concat(tape, scores));
    const Var attended = ops::weighted_sum(tape, attention, ctx.descriptors);

    const Var layer2_in[2] = {attended, l1.h};
    const LstmOut l2 = lstm_cell(tape, ops::concat(tape, layer2_in), state.h2, state.c2, *params.W_l2, *params.b_l2);
    const Var log_probs = ops::log_softmax(tape, ops::affine(tape, l2.h, *params.W_out, *params.b_out));

    StepOutput out;
    out.state = state;
    out.state.h1 = l1.h;
    out.state.c1 = l1.c;
    out.state.h2 = l2.h;
    out.state.c2 = l2.c;
    out.state.step = state.step + 1;
    out.log_probs = log_probs;
    out.attention = attention;
    return out;
}

Var score_caption(Tape& tape, const DecoderContext& ctx, std::span<const std::size_t> tokens,
                  const DecoderParams& params) {
    if (tokens.size() < 2 || tokens.front() != kBos || tokens.back() != kEos) {
        throw InputError("score_caption: caption must start with BOS and end with EOS");
    }
    for (auto t : tokens) {
        if (t >= params.vocab()) throw InputError("score_caption: token " + std::to_string(t) + " out of range");
    }
    DecodeState state = initial_state(tape, params);
    std::vector<Var> terms;
    terms.reserve(tokens.size() - 1);
    for (std::size_t t = 1; t < tokens.size(); ++t) {
        StepOutput out = decode_step(tape, ctx, state, tokens[t - 1], params);
        terms.push_back(ops::pick(tape, out.log_probs, tokens[t]));
        state = std::move(out.state);
    }
    return ops::sum(tape, terms);
}

namespace {

auto model_step(Tape& tape, const DecoderContext& ctx, const DecoderParams& params) {
    return [&tape, &ctx, &params](const DecodeState& s, std::size_t prev) {
        StepOutput out = decode_step(tape, ctx, s, prev, params);
        const auto lp = tape.value(out.log_probs);
        return std::pair<DecodeState, std::vector<double>>(std::move(out.state),
                                                           std::vector<double>(lp.begin(), lp.end()));
    };
}

}  // namespace

Hypothesis greedy_decode(Tape& tape, const DecoderContext& ctx, const DecoderParams& params, std::size_t max_len) {
    return beam_search(tape, ctx, params, 1, max_len);
}

Hypothesis beam_search(Tape& tape, const DecoderContext& ctx, const DecoderParams& params, std::size_t beam,
                       std::size_t max_len) {
    auto result = beam_search_over(initial_state(tape, params), model_step(tape, ctx, params), kBos, kEos, beam,
                                   max_len);
    return {std::move(result.tokens), result.log_prob};
}

SampledCaption sample_caption(Tape& tape, const DecoderContext& ctx, const DecoderParams& params,
                              std::mt19937_64& rng, std::size_t max_len) {
    SampledCaption out;
    DecodeState state = initial_state(tape, params);
    std::vector<Var> terms;
    std::size_t prev = kBos;
    for (std::size_t t = 0; t < max_len; ++t) {
        StepOutput step = decode_step(tape, ctx, state, prev, params);
        const auto lp = tape.value(step.log_probs);
        const double u = uniform01(rng);
        double acc = 0.0;
        std::size_t tok = lp.size() - 1;
        for (std::size_t v = 0; v < lp.size(); ++v) {
            acc += std::exp(lp[v]);
            if (u < acc) {
                tok = v;
                break;
            }
        }
        // Rounding can leave acc marginally below 1; fall back to the last
        // token with nonzero probability.
        if (acc <= u) {
            while (tok > 0 && std::exp(lp[tok]) == 0.0) --tok;
        }
        terms.push_back(ops::pick(tape, step.log_probs, tok));
        out.tokens.push_back(tok);
        state = std::move(step.state);
        prev = tok;
        if (tok == kEos) break;
    }
    out.log_prob = terms.empty() ? tape.constant({0.0}) : ops::sum(tape, terms);
    return out;
}

std::vector<std::size_t> strip_eos(std::vector<std::size_t> tokens) {
    if (!tokens.empty() && tokens.back() == kEos) tokens.pop_back();
    return tokens;
}

}  // namespace hipcap
