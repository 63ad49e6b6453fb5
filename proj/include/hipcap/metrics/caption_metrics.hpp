#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace hipcap {

using Sentence = std::vector<std::string>;

/// Sentence-level BLEU@n (n in 1..4): geometric mean of clipped n-gram
/// precisions times the brevity penalty against the closest reference
/// length. No smoothing, so any zero precision gives 0. An empty candidate
/// scores 0 and logs a warning.
double bleu(const Sentence& candidate, std::span<const Sentence> references, int n);

/// Corpus-level BLEU@1..4 with pooled n-gram counts and lengths.
std::array<double, 4> corpus_bleu(std::span<const Sentence> candidates,
                                  std::span<const std::vector<Sentence>> references);

/// LCS F-measure with beta^2 = 1.2, maximized over references.
double rouge_l(const Sentence& candidate, std::span<const Sentence> references);

/// Longest common subsequence length.
std::size_t lcs_length(const Sentence& a, const Sentence& b);

/// CIDEr-D over a fixed reference corpus: clipped TF-IDF n-gram cosine
/// similarity for n = 1..4, averaged over n and over references, with a
/// Gaussian length penalty (sigma = 6) and a factor of 10.
class CiderD {
public:
    CiderD() = default;
    /// Document frequencies are counted once per image over the union of
    /// that image's reference n-grams.
    explicit CiderD(std::span<const std::vector<Sentence>> corpus_references);

    bool built() const noexcept { return built_; }
    std::size_t image_count() const noexcept { return ref_vectors_.size(); }
    double document_frequency(const std::string& ngram) const;

    /// Candidate against arbitrary references, weighted by this corpus.
    double score(const Sentence& candidate, std::span<const Sentence> references) const;
    /// Candidate against the references of corpus image `image`.
    double score_image(std::size_t image, const Sentence& candidate) const;
    /// Mean score_image over all images; one candidate per corpus image.
    double corpus_score(std::span<const Sentence> candidates) const;

private:
    struct NgramVector {
        std::array<std::unordered_map<std::string, double>, 4> weights;
        std::array<double, 4> norms{};
        std::size_t length = 0;
    };
    NgramVector vectorize(const Sentence& s) const;
    double similarity(const NgramVector& hyp, const NgramVector& ref) const;
    double score_vectors(const NgramVector& hyp, std::span<const NgramVector> refs) const;
    void require_built() const;

    bool built_ = false;
    double log_image_count_ = 0.0;
    std::unordered_map<std::string, double> document_frequency_;
    std::vector<std::vector<NgramVector>> ref_vectors_;
};

/// All n-grams (n = 1..max_n) of a sentence, tokens joined by single spaces.
std::map<std::string, std::size_t> ngram_counts(const Sentence& s, int n);

/// Splits on whitespace.
Sentence split_tokens(const std::string& text);
std::string join_tokens(const Sentence& s);

struct MultilabelScores {
    double class_precision = 0.0;
    double class_recall = 0.0;
    double class_f1 = 0.0;
    double overall_precision = 0.0;
    double overall_recall = 0.0;
    double overall_f1 = 0.0;
};

/// Per-class (macro over classes with at least one true instance) and
/// overall (micro) precision, recall and F1. F1 is 0 when P + R = 0.
MultilabelScores multilabel_scores(std::span<const std::vector<std::size_t>> predicted,
                                   std::span<const std::vector<std::size_t>> truth, std::size_t classes);

}  // namespace hipcap
