#pragma once

#include <cstdint>
#include <string>

#include "hipcap/numerics/grad_check.hpp"
#include "hipcap/training/model.hpp"

namespace hipcap {

/// Tiny full-pipeline configuration: two overlapping regions, D_r = 8,
/// encoder and decoder hidden 8, vocabulary of 12 (8 words + specials).
struct PipelineCheckOptions {
    bool use_gcn = false;
    bool break_gradient = false;  // corrupts the tanh backward rule
    std::uint64_t seed = 1;
    double epsilon = 1e-5;
    // Denominator floor of the relative error. Central differences at
    // epsilon 1e-5 on a loss near 10 carry roundoff around 1e-10, so smaller
    // gradients are judged on absolute error (floor x tolerance = 1e-9).
    double floor = 1e-5;
    double tolerance = 1e-4;
};

struct PipelineCheckResult {
    GradCheckReport report;
    bool passed = false;
    double loss = 0.0;
};

/// The scene used by the pipeline check (exposed for tests).
SceneRecord pipeline_check_scene(std::uint64_t seed);
CaptionModel pipeline_check_model(bool use_gcn, std::uint64_t seed);

/// build_tree -> encode -> [gcn_enrich] -> score_caption -> ce_loss,
/// compared against central differences over every parameter scalar.
PipelineCheckResult run_pipeline_check(const PipelineCheckOptions& options);

std::string pipeline_check_json(const PipelineCheckOptions& options, const PipelineCheckResult& result);

}  // namespace hipcap
