#pragma once

#include <span>
#include <vector>

namespace gmclab {

// Pairwise summation in a fixed order (deterministic, O(log n) error growth).
double pairwise_sum(std::span<const double> v);

double log_sum_exp(std::span<const double> v);
// Same result, but uses `v` as scratch (its contents are overwritten).
double log_sum_exp_inplace(std::span<double> v);

double median(std::vector<double> v);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
};

// Weighted least squares y = a + b x. With weights from inverse variances the slope
// standard error is the model-based one; with equal weights it is the residual-based one.
LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> weights, bool weights_are_inverse_variances);

}  // namespace gmclab
