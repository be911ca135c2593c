#include "gmclab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gmclab/error.hpp"

namespace gmclab {

double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 64) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    std::size_t h = v.size() / 2;
    return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

double log_sum_exp_inplace(std::span<double> v) {
    if (v.empty()) return -std::numeric_limits<double>::infinity();
    double m = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(m)) return m;
    for (double& x : v) x = std::exp(x - m);
    return m + std::log(pairwise_sum(v));
}

double log_sum_exp(std::span<const double> v) {
    std::vector<double> e(v.begin(), v.end());
    return log_sum_exp_inplace(e);
}

double median(std::vector<double> v) {
    if (v.empty()) throw PreconditionError("median of empty sample");
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> w, bool inverse_variances) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n || w.size() != n) throw PreconditionError("fit_line: need >= 2 points");
    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
    }
    double mx = sx / sw, my = sy / sw;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (inverse_variances) {
        f.slope_stderr = std::sqrt(1.0 / sxx);
    } else if (n > 2) {
        double rss = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double r = y[i] - f.intercept - f.slope * x[i];
            rss += w[i] * r * r;
        }
        f.slope_stderr = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
    }
    return f;
}

}  // namespace gmclab
