#include "hipcap/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "hipcap/error.hpp"

namespace hipcap {
namespace {

double evaluate(const Objective& f, ParamStore& store, bool with_grad) {
    const double v = f(store, with_grad);
    if (!std::isfinite(v)) throw NumericError("grad_check: objective is not finite");
    return v;
}

}  // namespace

double relative_error(double analytic, double numeric, double floor) {
    const double diff = std::abs(analytic - numeric);
    if (diff == 0.0) return 0.0;
    return diff / std::max({std::abs(analytic), std::abs(numeric), floor});
}

GradCheckReport grad_check(const Objective& f, ParamStore& store, const GradCheckOptions& options) {
    if (!(options.epsilon > 0.0 && options.epsilon <= 1e-2)) {
        throw InputError("grad_check: epsilon must lie in (0, 1e-2]");
    }
    store.zero_grad();
    evaluate(f, store, true);
    std::vector<std::vector<double>> analytic;
    analytic.reserve(store.size());
    for (std::size_t k = 0; k < store.size(); ++k) {
        const auto g = store.tensor(k).grad();
        analytic.emplace_back(g.begin(), g.end());
    }

    GradCheckReport report;
    const double eps = options.epsilon;
    for (std::size_t k = 0; k < store.size(); ++k) {
        auto values = store.tensor(k).values();
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double saved = values[i];
            values[i] = saved + eps;
            const double up = evaluate(f, store, false);
            values[i] = saved - eps;
            const double down = evaluate(f, store, false);
            values[i] = saved;
            const double numeric = (up - down) / (2.0 * eps);
            const double a = analytic[k][i];
            const double rel = relative_error(a, numeric, options.floor);
            const double abs_err = std::abs(a - numeric);
            report.max_abs_error = std::max(report.max_abs_error, abs_err);
            if (rel > report.max_rel_error || report.checked == 0) {
                report.max_rel_error = rel;
                report.worst_param = store.name(k);
                report.worst_index = i;
                report.worst_analytic = a;
                report.worst_numeric = numeric;
            }
            ++report.checked;
        }
    }
    store.zero_grad();
    return report;
}

}  // namespace hipcap
