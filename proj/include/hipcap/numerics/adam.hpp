#pragma once

#include "hipcap/numerics/param_store.hpp"

namespace hipcap {

struct AdamConfig {
    double lr = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// One bias-corrected Adam update over every parameter, then zeroes the
/// gradients and increments the step counter. Throws StateError if any
/// parameter has no gradient buffer.
void adam_step(ParamStore& store, const AdamConfig& config);

/// Global L2 norm of all gradients.
double grad_norm(const ParamStore& store);

/// Rescales gradients so their global norm is at most `max_norm`.
/// Returns the norm before clipping.
double clip_grad_norm(ParamStore& store, double max_norm);

}  // namespace hipcap
