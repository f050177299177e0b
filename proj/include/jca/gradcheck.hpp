#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jca/mat.hpp"

namespace jca {

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::string worst_param;
    std::size_t worst_entry = 0;
    double analytic_at_worst = 0.0;
    double numeric_at_worst = 0.0;
    std::size_t entries_checked = 0;
};

// Central-difference check of analytic gradients.
//
// `eval` re-evaluates the scalar objective from the current contents of the
// parameter matrices; the checker perturbs each entry in place by +/-h,
// restores it, and compares (f+ - f-)/2h against the matching entry of
// `analytic`. Relative error uses |analytic| + |numeric| + 1e-12 in the
// denominator. Throws EvalError if the objective is non-finite and
// ConfigError if h <= 0.
GradCheckReport finite_diff_check(
    const std::function<double()>& eval,
    std::span<const std::pair<std::string, Mat*>> params,
    const std::vector<Mat>& analytic, double h);

}  // namespace jca
