#include "hipcap/metrics/caption_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>
#include <sstream>

#include "hipcap/error.hpp"

namespace hipcap {
namespace {

constexpr double kCiderSigma = 6.0;

std::string join_range(const Sentence& s, std::size_t start, std::size_t len) {
    std::string out = s[start];
    for (std::size_t k = 1; k < len; ++k) {
        out += ' ';
        out += s[start + k];
    }
    return out;
}

// Reference length closest to `c`; ties go to the shorter reference.
std::size_t closest_ref_length(std::size_t c, std::span<const Sentence> refs) {
    std::size_t best = refs.front().size();
    for (const auto& r : refs) {
        const auto d = [&](std::size_t len) { return len > c ? len - c : c - len; };
        if (d(r.size()) < d(best) || (d(r.size()) == d(best) && r.size() < best)) best = r.size();
    }
    return best;
}

struct BleuCounts {
    std::array<double, 4> matched{};
    std::array<double, 4> total{};
    double cand_len = 0.0;
    double ref_len = 0.0;
};

void accumulate_bleu(const Sentence& cand, std::span<const Sentence> refs, int max_n, BleuCounts& acc) {
    for (int n = 1; n <= max_n; ++n) {
        const auto cc = ngram_counts(cand, n);
        std::map<std::string, std::size_t> max_ref;
        for (const auto& r : refs) {
            for (const auto& [g, c] : ngram_counts(r, n)) max_ref[g] = std::max(max_ref[g], c);
        }
        for (const auto& [g, c] : cc) {
            auto it = max_ref.find(g);
            const std::size_t clip = it == max_ref.end() ? 0 : it->second;
            acc.matched[n - 1] += static_cast<double>(std::min(c, clip));
            acc.total[n - 1] += static_cast<double>(c);
        }
    }
    acc.cand_len += static_cast<double>(cand.size());
    acc.ref_len += static_cast<double>(closest_ref_length(cand.size(), refs));
}

double bleu_from_counts(const BleuCounts& acc, int n) {
    if (acc.cand_len == 0.0) return 0.0;
    double log_sum = 0.0;
    for (int k = 0; k < n; ++k) {
        if (acc.matched[k] == 0.0 || acc.total[k] == 0.0) return 0.0;
        log_sum += std::log(acc.matched[k] / acc.total[k]);
    }
    const double bp = acc.cand_len > acc.ref_len ? 1.0 : std::exp(1.0 - acc.ref_len / acc.cand_len);
    return bp * std::exp(log_sum / n);
}

}  // namespace

std::map<std::string, std::size_t> ngram_counts(const Sentence& s, int n) {
    std::map<std::string, std::size_t> out;
    const auto un = static_cast<std::size_t>(n);
    if (n <= 0 || s.size() < un) return out;
    for (std::size_t i = 0; i + un <= s.size(); ++i) ++out[join_range(s, i, un)];
    return out;
}

Sentence split_tokens(const std::string& text) {
    Sentence out;
    std::istringstream is(text);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

std::string join_tokens(const Sentence& s) {
    if (s.empty()) return {};
    return join_range(s, 0, s.size());
}

double bleu(const Sentence& candidate, std::span<const Sentence> references, int n) {
    if (n < 1 || n > 4) throw InputError("BLEU order must lie in 1..4");
    if (references.empty()) throw InputError("BLEU needs at least one reference");
    if (candidate.empty()) {
        std::clog << "warning: BLEU of an empty candidate is 0\n";
        return 0.0;
    }
    BleuCounts acc;
    accumulate_bleu(candidate, references, n, acc);
    return bleu_from_counts(acc, n);
}

std::array<double, 4> corpus_bleu(std::span<const Sentence> candidates,
                                  std::span<const std::vector<Sentence>> references) {
    if (candidates.size() != references.size()) throw InputError("corpus BLEU: candidate/reference count mismatch");
    BleuCounts acc;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (references[i].empty()) throw InputError("corpus BLEU: image " + std::to_string(i) + " has no references");
        accumulate_bleu(candidates[i], references[i], 4, acc);
    }
    std::array<double, 4> out{};
    for (int n = 1; n <= 4; ++n) out[n - 1] = bleu_from_counts(acc, n);
    return out;
}

std::size_t lcs_length(const Sentence& a, const Sentence& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double rouge_l(const Sentence& candidate, std::span<const Sentence> references) {
    constexpr double kBetaSq = 1.2;
    if (candidate.empty() || references.empty()) return 0.0;
    double best = 0.0;
    for (const auto& ref : references) {
        if (ref.empty()) continue;
        const double lcs = static_cast<double>(lcs_length(candidate, ref));
        if (lcs == 0.0) continue;
        const double p = lcs / static_cast<double>(candidate.size());
        const double r = lcs / static_cast<double>(ref.size());
        best = std::max(best, (1.0 + kBetaSq) * p * r / (r + kBetaSq * p));
    }
    return best;
}

CiderD::CiderD(std::span<const std::vector<Sentence>> corpus_references) {
    if (corpus_references.empty()) throw InputError("CIDEr-D corpus needs at least one image");
    for (std::size_t i = 0; i < corpus_references.size(); ++i) {
        if (corpus_references[i].empty()) {
            throw InputError("CIDEr-D corpus image " + std::to_string(i) + " has no references");
        }
        std::set<std::string> seen;
        for (const auto& ref : corpus_references[i]) {
            for (int n = 1; n <= 4; ++n) {
                for (const auto& [g, c] : ngram_counts(ref, n)) seen.insert(g);
            }
        }
        for (const auto& g : seen) document_frequency_[g] += 1.0;
    }
    log_image_count_ = std::log(static_cast<double>(corpus_references.size()));
    built_ = true;
    ref_vectors_.reserve(corpus_references.size());
    for (const auto& refs : corpus_references) {
        std::vector<NgramVector> vs;
        vs.reserve(refs.size());
        for (const auto& r : refs) vs.push_back(vectorize(r));
        ref_vectors_.push_back(std::move(vs));
    }
}

void CiderD::require_built() const {
    if (!built_) throw StateError("CIDEr-D document frequencies have not been built");
}

double CiderD::document_frequency(const std::string& ngram) const {
    require_built();
    auto it = document_frequency_.find(ngram);
    return it == document_frequency_.end() ? 0.0 : it->second;
}

CiderD::NgramVector CiderD::vectorize(const Sentence& s) const {
    NgramVector v;
    for (int n = 1; n <= 4; ++n) {
        double norm = 0.0;
        for (const auto& [g, tf] : ngram_counts(s, n)) {
            auto it = document_frequency_.find(g);
            const double df = std::log(std::max(1.0, it == document_frequency_.end() ? 0.0 : it->second));
            const double w = static_cast<double>(tf) * (log_image_count_ - df);
            v.weights[n - 1].emplace(g, w);
            norm += w * w;
        }
        v.norms[n - 1] = std::sqrt(norm);
    }
    v.length = s.size();
    return v;
}

double CiderD::similarity(const NgramVector& hyp, const NgramVector& ref) const {
    const double delta = static_cast<double>(hyp.length) - static_cast<double>(ref.length);
    const double penalty = std::exp(-(delta * delta) / (2.0 * kCiderSigma * kCiderSigma));
    double total = 0.0;
    for (int n = 0; n < 4; ++n) {
        double val = 0.0;
        for (const auto& [g, w] : hyp.weights[n]) {
            auto it = ref.weights[n].find(g);
            if (it == ref.weights[n].end()) continue;
            val += std::min(w, it->second) * it->second;
        }
        if (hyp.norms[n] != 0.0 && ref.norms[n] != 0.0) val /= hyp.norms[n] * ref.norms[n];
        total += val * penalty;
    }
    return total / 4.0;
}

double CiderD::score_vectors(const NgramVector& hyp, std::span<const NgramVector> refs) const {
    double s = 0.0;
    for (const auto& r : refs) s += similarity(hyp, r);
    return 10.0 * s / static_cast<double>(refs.size());
}

double CiderD::score(const Sentence& candidate, std::span<const Sentence> references) const {
    require_built();
    if (references.empty()) throw InputError("CIDEr-D needs at least one reference");
    std::vector<NgramVector> refs;
    refs.reserve(references.size());
    for (const auto& r : references) refs.push_back(vectorize(r));
    return score_vectors(vectorize(candidate), refs);
}

double CiderD::score_image(std::size_t image, const Sentence& candidate) const {
    require_built();
    if (image >= ref_vectors_.size()) throw InputError("CIDEr-D image index out of range");
    return score_vectors(vectorize(candidate), ref_vectors_[image]);
}

double CiderD::corpus_score(std::span<const Sentence> candidates) const {
    require_built();
    if (candidates.size() != ref_vectors_.size()) {
        throw InputError("CIDEr-D corpus score needs one candidate per corpus image");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) s += score_image(i, candidates[i]);
    return s / static_cast<double>(candidates.size());
}

MultilabelScores multilabel_scores(std::span<const std::vector<std::size_t>> predicted,
                                   std::span<const std::vector<std::size_t>> truth, std::size_t classes) {
    if (predicted.size() != truth.size()) throw InputError("multilabel: prediction/truth count mismatch");
    std::vector<double> tp(classes, 0.0), npred(classes, 0.0), ntrue(classes, 0.0);
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const std::set<std::size_t> p(predicted[i].begin(), predicted[i].end());
        const std::set<std::size_t> t(truth[i].begin(), truth[i].end());
        for (auto c : p) {
            if (c >= classes) throw InputError("multilabel: predicted class out of range");
            npred[c] += 1.0;
            if (t.count(c)) tp[c] += 1.0;
        }
        for (auto c : t) {
            if (c >= classes) throw InputError("multilabel: true class out of range");
            ntrue[c] += 1.0;
        }
    }
    auto f1 = [](double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; };
    MultilabelScores s;
    double sum_p = 0.0, sum_r = 0.0, counted = 0.0, tp_all = 0.0, pred_all = 0.0, true_all = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
        tp_all += tp[c];
        pred_all += npred[c];
        true_all += ntrue[c];
        if (ntrue[c] == 0.0) continue;
        sum_p += npred[c] > 0.0 ? tp[c] / npred[c] : 0.0;
        sum_r += tp[c] / ntrue[c];
        counted += 1.0;
    }
    if (counted > 0.0) {
        s.class_precision = sum_p / counted;
        s.class_recall = sum_r / counted;
    }
    s.class_f1 = f1(s.class_precision, s.class_recall);
    s.overall_precision = pred_all > 0.0 ? tp_all / pred_all : 0.0;
    s.overall_recall = true_all > 0.0 ? tp_all / true_all : 0.0;
    s.overall_f1 = f1(s.overall_precision, s.overall_recall);
    return s;
}

}  // namespace hipcap
