#include "jca/gradcheck.hpp"

#include <cmath>
#include <cstdlib>

#include "jca/errors.hpp"

namespace jca {

GradCheckReport finite_diff_check(
    const std::function<double()>& eval,
    std::span<const std::pair<std::string, Mat*>> params,
    const std::vector<Mat>& analytic, double h) {
    if (h <= 0.0) throw ConfigError("finite_diff_check: h must be > 0");
    if (analytic.size() != params.size()) {
        throw DimError("finite_diff_check: " + std::to_string(params.size()) +
                       " params but " + std::to_string(analytic.size()) +
                       " analytic gradients");
    }

    GradCheckReport report;
    for (std::size_t p = 0; p < params.size(); ++p) {
        Mat& theta = *params[p].second;
        const Mat& grad = analytic[p];
        if (!theta.same_shape(grad)) {
            throw DimError("finite_diff_check: param " + params[p].first + " is " +
                           theta.shape_str() + " but gradient is " + grad.shape_str());
        }
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double saved = theta[i];
            theta[i] = saved + h;
            const double f_plus = eval();
            theta[i] = saved - h;
            const double f_minus = eval();
            theta[i] = saved;
            if (!std::isfinite(f_plus) || !std::isfinite(f_minus)) {
                throw EvalError("finite_diff_check: non-finite objective at param " +
                                params[p].first + "[" + std::to_string(i) + "]");
            }
            const double numeric = (f_plus - f_minus) / (2.0 * h);
            const double a = grad[i];
            const double rel =
                std::abs(a - numeric) / (std::abs(a) + std::abs(numeric) + 1e-12);
            ++report.entries_checked;
            if (rel > report.max_rel_err) {
                report.max_rel_err = rel;
                report.worst_param = params[p].first;
                report.worst_entry = i;
                report.analytic_at_worst = a;
                report.numeric_at_worst = numeric;
            }
        }
    }
    return report;
}

}  // namespace jca
