#include "hipcap/metrics/report.hpp"

#include <json.hpp>

#include "hipcap/error.hpp"

namespace hipcap {

CaptionReport evaluate_captions(std::span<const Sentence> candidates, std::span<const std::vector<Sentence>> references,
                                std::span<const std::string> image_ids) {
    if (candidates.size() != references.size() || image_ids.size() != candidates.size()) {
        throw InputError("evaluate: candidates, references and image ids differ in count");
    }
    CaptionReport r;
    if (candidates.empty()) return r;
    r.bleu = corpus_bleu(candidates, references);
    const CiderD cider(references);
    double rouge_sum = 0.0, cider_sum = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        ImageScores s;
        s.image_id = image_ids[i];
        s.bleu4 = candidates[i].empty() ? 0.0 : bleu(candidates[i], references[i], 4);
        s.rouge_l = candidates[i].empty() ? 0.0 : rouge_l(candidates[i], references[i]);
        s.cider_d = cider.score_image(i, candidates[i]);
        rouge_sum += s.rouge_l;
        cider_sum += s.cider_d;
        r.per_image.push_back(std::move(s));
    }
    r.rouge_l = rouge_sum / static_cast<double>(candidates.size());
    r.cider_d = cider_sum / static_cast<double>(candidates.size());
    return r;
}

std::string report_to_json(const CaptionReport& report, const MultilabelScores* recognition) {
    nlohmann::ordered_json j;
    j["format"] = "hipcap-eval";
    j["version"] = 1;
    j["bleu1"] = report.bleu[0];
    j["bleu2"] = report.bleu[1];
    j["bleu3"] = report.bleu[2];
    j["bleu4"] = report.bleu[3];
    j["rouge_l"] = report.rouge_l;
    j["cider_d"] = report.cider_d;
    if (recognition) {
        j["recognition"] = {{"C-P", recognition->class_precision}, {"C-R", recognition->class_recall},
                            {"C-F1", recognition->class_f1},       {"O-P", recognition->overall_precision},
                            {"O-R", recognition->overall_recall},  {"O-F1", recognition->overall_f1}};
    }
    auto& images = j["images"] = nlohmann::ordered_json::array();
    for (const auto& s : report.per_image) {
        images.push_back({{"image_id", s.image_id}, {"bleu4", s.bleu4}, {"rouge_l", s.rouge_l}, {"cider_d", s.cider_d}});
    }
    return j.dump(2);
}

}  // namespace hipcap
