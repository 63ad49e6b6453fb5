#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>
#include <random>

#include "hipcap/error.hpp"
#include "hipcap/metrics/caption_metrics.hpp"
#include "hipcap/metrics/report.hpp"
#include "test_support.hpp"

using namespace hipcap;

namespace {

Sentence S(const std::string& text) { return split_tokens(text); }

std::vector<Sentence> refs(std::initializer_list<const char*> texts) {
    std::vector<Sentence> out;
    for (const char* t : texts) out.push_back(S(t));
    return out;
}

double rouge_oracle(double lcs, double cand_len, double ref_len) {
    double p = lcs / cand_len, r = lcs / ref_len;
    return 2.2 * p * r / (r + 1.2 * p);
}

}  // namespace

TEST(Bleu, PerfectMatch) {
    auto r = refs({"a red circle above a blue square"});
    for (int n = 1; n <= 4; ++n) EXPECT_DOUBLE_EQ(bleu(S("a red circle above a blue square"), r, n), 1.0);
}

TEST(Bleu, ClippedUnigramPrecision) {
    auto r = refs({"a b c d"});
    EXPECT_DOUBLE_EQ(bleu(S("a a a a"), r, 1), 0.25);
}

TEST(Bleu, BrevityPenalty) {
    auto r = refs({"a b c d"});
    EXPECT_DOUBLE_EQ(bleu(S("a b"), r, 1), std::exp(1.0 - 4.0 / 2.0));
    EXPECT_DOUBLE_EQ(bleu(S("a b"), r, 2), std::exp(1.0 - 4.0 / 2.0));
    // No penalty when the candidate is at least as long as the closest reference.
    EXPECT_DOUBLE_EQ(bleu(S("a b c d"), refs({"a b", "a b c d e f"}), 1), 1.0);
    // Clipping: the second "a" has no match.
    EXPECT_DOUBLE_EQ(bleu(S("a b c d a"), r, 1), 0.8);
}

TEST(Bleu, GeometricMeanWithoutSmoothing) {
    auto r = refs({"a b c d e"});
    // p1 = 5/5, p2 = 2/4, p3 = 1/3, p4 = 0/2 for "a b c e d".
    auto c = S("a b c e d");
    EXPECT_DOUBLE_EQ(bleu(c, r, 1), 1.0);
    EXPECT_NEAR(bleu(c, r, 2), std::sqrt(0.5), 1e-15);
    EXPECT_NEAR(bleu(c, r, 3), std::cbrt(0.5 / 3.0), 1e-15);
    EXPECT_EQ(bleu(c, r, 4), 0.0);
}

TEST(Bleu, EmptyCandidateAndBadOrder) {
    auto r = refs({"a b"});
    EXPECT_EQ(bleu({}, r, 1), 0.0);
    EXPECT_THROW(bleu(S("a"), r, 0), InputError);
    EXPECT_THROW(bleu(S("a"), r, 5), InputError);
}

TEST(Bleu, OrderSensitive) {
    auto r = refs({"w x y z"});
    EXPECT_DOUBLE_EQ(bleu(S("w x y z"), r, 4), 1.0);
    EXPECT_LT(bleu(S("z y x w"), r, 4), 1.0);
    EXPECT_DOUBLE_EQ(bleu(S("z y x w"), r, 1), 1.0);
}

TEST(Bleu, CorpusPoolsCounts) {
    std::vector<Sentence> cands = {S("a b"), S("c d e f")};
    std::vector<std::vector<Sentence>> rs = {refs({"a b"}), refs({"c d e g"})};
    auto b = corpus_bleu(cands, rs);
    // Unigrams: 2/2 + 3/4 = 5/6; bigrams: 1/1 + 2/3 = 3/4; lengths equal so no penalty.
    EXPECT_NEAR(b[0], 5.0 / 6.0, 1e-15);
    EXPECT_NEAR(b[1], std::sqrt(5.0 / 6.0 * 0.75), 1e-15);
    auto self = corpus_bleu(std::vector<Sentence>{S("a b c d"), S("e f g h i")},
                            std::vector<std::vector<Sentence>>{refs({"a b c d"}), refs({"e f g h i"})});
    EXPECT_DOUBLE_EQ(self[3], 1.0);
}

TEST(RougeL, HandExamples) {
    EXPECT_DOUBLE_EQ(rouge_l(S("a b c"), refs({"a b c"})), 1.0);
    EXPECT_DOUBLE_EQ(rouge_l(S("a b c"), refs({"x y z"})), 0.0);
    EXPECT_EQ(lcs_length(S("a b c"), S("a c")), 2u);
    EXPECT_DOUBLE_EQ(rouge_l(S("a b c"), refs({"a c"})), rouge_oracle(2, 3, 2));
    EXPECT_NEAR(rouge_l(S("a b c"), refs({"a c"})), 0.8148148148148148, 1e-15);
}

TEST(RougeL, MaxOverReferences) {
    auto r = refs({"q r s", "a c", "a b d e f"});
    double expected = std::max(rouge_oracle(2, 3, 2), rouge_oracle(2, 3, 5));
    EXPECT_DOUBLE_EQ(rouge_l(S("a b c"), r), expected);
}

TEST(RougeL, BoundedOnRandomInput) {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 200; ++t) {
        auto rand_sentence = [&] {
            Sentence s;
            for (std::size_t i = 0, n = 1 + rng() % 8; i < n; ++i) s.push_back(std::string(1, char('a' + rng() % 5)));
            return s;
        };
        std::vector<Sentence> rs = {rand_sentence(), rand_sentence()};
        double x = rouge_l(rand_sentence(), rs);
        EXPECT_GE(x, 0.0);
        EXPECT_LE(x, 1.0);
    }
}

TEST(CiderD, SingleImageCorpusIsZero) {
    std::vector<std::vector<Sentence>> corpus = {refs({"a red circle above a blue square"})};
    CiderD c(corpus);
    EXPECT_EQ(c.score_image(0, S("a red circle above a blue square")), 0.0);
}

TEST(CiderD, NoSharedNgramsIsZero) {
    std::vector<std::vector<Sentence>> corpus = {refs({"a red circle"}), refs({"a blue square"})};
    CiderD c(corpus);
    EXPECT_EQ(c.score_image(0, S("green hexagon")), 0.0);
}

TEST(CiderD, DocumentFrequencies) {
    std::vector<std::vector<Sentence>> corpus = {refs({"a red circle", "a red a"}), refs({"a blue square"})};
    CiderD c(corpus);
    EXPECT_EQ(c.document_frequency("a"), 2.0);
    EXPECT_EQ(c.document_frequency("red"), 1.0);
    EXPECT_EQ(c.document_frequency("a red"), 1.0);
    EXPECT_EQ(c.document_frequency("zebra"), 0.0);
    EXPECT_EQ(c.image_count(), 2u);
}

TEST(CiderD, UnbuiltAndInvalid) {
    CiderD empty;
    EXPECT_FALSE(empty.built());
    EXPECT_THROW(empty.score_image(0, S("a")), StateError);
    EXPECT_THROW(CiderD(std::vector<std::vector<Sentence>>{}), InputError);
    EXPECT_THROW(CiderD(std::vector<std::vector<Sentence>>{{}}), InputError);
}

TEST(CiderD, MatchesReferenceImplementation) {
    auto doc = nlohmann::json::parse(hipcap::testing::read_file(hipcap::testing::data_path("cider_oracle.json")));
    ASSERT_GE(doc["cases"].size(), 50u);
    for (std::size_t k = 0; k < doc["cases"].size(); ++k) {
        const auto& c = doc["cases"][k];
        std::vector<std::vector<Sentence>> corpus;
        for (const auto& img : c["references"]) {
            std::vector<Sentence> rs;
            for (const auto& r : img) rs.push_back(S(r.get<std::string>()));
            corpus.push_back(rs);
        }
        std::vector<Sentence> cands;
        for (const auto& s : c["candidates"]) cands.push_back(S(s.get<std::string>()));
        CiderD scorer(corpus);
        for (std::size_t i = 0; i < cands.size(); ++i)
            EXPECT_NEAR(scorer.score_image(i, cands[i]), c["per_image"][i].get<double>(), 1e-6) << "case " << k;
        EXPECT_NEAR(scorer.corpus_score(cands), c["mean"].get<double>(), 1e-6) << "case " << k;
    }
}

TEST(CiderD, BoundedByTen) {
    std::vector<std::vector<Sentence>> corpus = {refs({"a b c d"}), refs({"e f g h"}), refs({"i j k l"})};
    CiderD c(corpus);
    for (std::size_t i = 0; i < 3; ++i) {
        double x = c.score_image(i, corpus[i][0]);
        EXPECT_GT(x, 0.0);
        EXPECT_LE(x, 10.0 + 1e-9);
    }
}

TEST(Multilabel, Perfect) {
    std::vector<std::vector<std::size_t>> t = {{0, 1, 2}, {1, 3, 4}};
    auto s = multilabel_scores(t, t, 5);
    for (double x : {s.class_precision, s.class_recall, s.class_f1, s.overall_precision, s.overall_recall, s.overall_f1})
        EXPECT_DOUBLE_EQ(x, 1.0);
}

TEST(Multilabel, Disjoint) {
    std::vector<std::vector<std::size_t>> p = {{0, 1, 2}}, t = {{3, 4}};
    auto s = multilabel_scores(p, t, 6);
    for (double x : {s.class_precision, s.class_recall, s.class_f1, s.overall_precision, s.overall_recall, s.overall_f1})
        EXPECT_EQ(x, 0.0);
}

TEST(Multilabel, HandCountedCase) {
    // Truth {0,1}, {1,2}; predictions {0,2,3}, {1,2,3}. Class 3 never occurs in truth and is left out of the macro mean.
    std::vector<std::vector<std::size_t>> p = {{0, 2, 3}, {1, 2, 3}}, t = {{0, 1}, {1, 2}};
    auto s = multilabel_scores(p, t, 4);
    EXPECT_NEAR(s.class_precision, (1.0 + 1.0 + 0.5) / 3.0, 1e-15);
    EXPECT_NEAR(s.class_recall, (1.0 + 0.5 + 1.0) / 3.0, 1e-15);
    EXPECT_NEAR(s.class_f1, 2.5 / 3.0, 1e-15);
    EXPECT_NEAR(s.overall_precision, 3.0 / 6.0, 1e-15);
    EXPECT_NEAR(s.overall_recall, 3.0 / 4.0, 1e-15);
    EXPECT_NEAR(s.overall_f1, 0.6, 1e-15);
    EXPECT_THROW(multilabel_scores(p, t, 3), InputError);
}

TEST(Report, SelfEvaluation) {
    std::vector<std::vector<Sentence>> rs = {refs({"a red circle above a blue square", "a red circle"}),
                                             refs({"two shapes with a green star", "a green star"})};
    std::vector<Sentence> cands = {rs[0][0], rs[1][0]};
    std::vector<std::string> ids = {"x", "y"};
    auto rep = evaluate_captions(cands, rs, ids);
    EXPECT_DOUBLE_EQ(rep.bleu[3], 1.0);
    EXPECT_DOUBLE_EQ(rep.rouge_l, 1.0);
    ASSERT_EQ(rep.per_image.size(), 2u);
    EXPECT_EQ(rep.per_image[1].image_id, "y");
    auto j = nlohmann::json::parse(report_to_json(rep));
    EXPECT_EQ(j["format"], "hipcap-eval");
    EXPECT_FALSE(j.contains("recognition"));
    MultilabelScores m;
    m.overall_f1 = 0.5;
    auto j2 = nlohmann::json::parse(report_to_json(rep, &m));
    EXPECT_DOUBLE_EQ(j2["recognition"]["O-F1"].get<double>(), 0.5);
}

TEST(Report, EmptyCandidateScoresZero) {
    std::vector<std::vector<Sentence>> rs = {refs({"a b c d"}), refs({"e f g h"})};
    std::vector<Sentence> cands = {{}, S("e f g h")};
    std::vector<std::string> ids = {"x", "y"};
    auto rep = evaluate_captions(cands, rs, ids);
    EXPECT_EQ(rep.per_image[0].bleu4, 0.0);
    EXPECT_EQ(rep.per_image[0].cider_d, 0.0);
    EXPECT_EQ(rep.per_image[0].rouge_l, 0.0);
}
