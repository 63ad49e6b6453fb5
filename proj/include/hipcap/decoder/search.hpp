#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace hipcap {

/// A finished or length-capped search result over an arbitrary decoder state.
struct SearchResult {
    std::vector<std::size_t> tokens;  // EOS included when emitted
    double log_prob = 0.0;
};

/// Length-capped beam search.
///
/// `step(state, prev_token)` returns {next_state, log_probs}, with log_probs
/// indexable by token id. Hypotheses leave the beam when they emit `eos`;
/// the ones still open at `max_len` are kept as unfinished results. The
/// highest total log-probability wins; candidate ties are broken by parent
/// rank, then token id, and result ties by completion order.
template <typename State, typename StepFn>
SearchResult beam_search_over(State initial, StepFn&& step, std::size_t bos, std::size_t eos, std::size_t beam,
                              std::size_t max_len) {
    struct Hyp {
        State state;
        std::vector<std::size_t> tokens;
        double log_prob;
    };
    struct Candidate {
        double score;
        std::size_t parent;
        std::size_t token;
    };
    if (beam == 0) beam = 1;

    std::vector<Hyp> live;
    live.push_back(Hyp{std::move(initial), {}, 0.0});
    std::vector<SearchResult> finished;
    std::vector<Candidate> candidates;

    for (std::size_t t = 0; t < max_len && !live.empty(); ++t) {
        candidates.clear();
        std::vector<State> next_states;
        next_states.reserve(live.size());
        for (std::size_t b = 0; b < live.size(); ++b) {
            const std::size_t prev = live[b].tokens.empty() ? bos : live[b].tokens.back();
            auto [next, log_probs] = step(live[b].state, prev);
            next_states.push_back(std::move(next));
            for (std::size_t tok = 0; tok < log_probs.size(); ++tok) {
                candidates.push_back({live[b].log_prob + log_probs[tok], b, tok});
            }
        }
        const std::size_t keep = std::min(beam, candidates.size());
        std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                          [](const Candidate& a, const Candidate& b) {
                              if (a.score != b.score) return a.score > b.score;
                              if (a.parent != b.parent) return a.parent < b.parent;
                              return a.token < b.token;
                          });
        std::vector<Hyp> next_live;
        for (std::size_t c = 0; c < keep; ++c) {
            const auto& cand = candidates[c];
            std::vector<std::size_t> tokens = live[cand.parent].tokens;
            tokens.push_back(cand.token);
            if (cand.token == eos) {
                finished.push_back({std::move(tokens), cand.score});
            } else {
                next_live.push_back(Hyp{next_states[cand.parent], std::move(tokens), cand.score});
            }
        }
        live = std::move(next_live);
    }
    for (auto& h : live) finished.push_back({std::move(h.tokens), h.log_prob});

    std::size_t best = 0;
    for (std::size_t i = 1; i < finished.size(); ++i) {
        if (finished[i].log_prob > finished[best].log_prob) best = i;
    }
    if (finished.empty()) return {};
    return finished[best];
}

}  // namespace hipcap
