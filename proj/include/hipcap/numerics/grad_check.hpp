#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "hipcap/numerics/param_store.hpp"

namespace hipcap {

/// Scalar objective over a parameter store. When `accumulate_grad` is true
/// the objective must also add d(objective)/d(param) into the store's grads.
using Objective = std::function<double(ParamStore&, bool accumulate_grad)>;

struct GradCheckOptions {
    double epsilon = 1e-5;
    /// Relative error is |a - n| / max(|a|, |n|, floor).
    double floor = 1e-7;
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    double max_abs_error = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    std::size_t checked = 0;
};

/// Compares analytic gradients with central differences for every scalar of
/// every parameter. Throws InputError for epsilon outside (0, 1e-2] and
/// NumericError if the objective is not finite.
GradCheckReport grad_check(const Objective& f, ParamStore& store, const GradCheckOptions& options = {});

double relative_error(double analytic, double numeric, double floor);

}  // namespace hipcap
