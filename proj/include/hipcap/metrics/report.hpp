#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "hipcap/metrics/caption_metrics.hpp"

namespace hipcap {

struct ImageScores {
    std::string image_id;
    double bleu4 = 0.0;
    double rouge_l = 0.0;
    double cider_d = 0.0;
};

/// Corpus scores for one candidate per image. BLEU is corpus-level, ROUGE-L
/// and CIDEr-D are means of the per-image scores. CIDEr-D document
/// frequencies come from `references`.
struct CaptionReport {
    std::array<double, 4> bleu{};
    double rouge_l = 0.0;
    double cider_d = 0.0;
    std::vector<ImageScores> per_image;
};

CaptionReport evaluate_captions(std::span<const Sentence> candidates, std::span<const std::vector<Sentence>> references,
                                std::span<const std::string> image_ids);

std::string report_to_json(const CaptionReport& report, const MultilabelScores* recognition = nullptr);

}  // namespace hipcap
