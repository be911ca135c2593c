#include "gmclab/moments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "gmclab/error.hpp"
#include "gmclab/stats.hpp"

namespace gmclab {

double zeta_bar(double p, double gamma) {
    const double g2 = gamma * gamma;
    return (2.0 + 0.5 * g2) * p - g2 * p * p;
}

Threshold threshold_pc(double gamma) {
    GmcParams{gamma}.validate();
    Threshold t;
    t.pc = 2.0 / (gamma * gamma);
    if (gamma * gamma >= 2.0) t.crude_bound = std::min(t.pc, 0.5 + 1.0 / (gamma * gamma));
    return t;
}

double predicted_scan_slope(double p, double gamma) {
    return p > threshold_pc(gamma).pc ? 1.0 - zeta_bar(p, gamma) : 0.0;
}

std::string to_string(MomentMethod m) {
    return m == MomentMethod::plain ? "plain" : "median-of-means";
}

MomentEstimate estimate_from_log_terms(std::span<const double> terms, double p, MomentMethod method) {
    const std::size_t n = terms.size();
    if (n < 2) throw PreconditionError("moment estimate needs at least 2 samples");
    if (method == MomentMethod::median_of_means && n < 2 * kMomBuckets) method = MomentMethod::plain;
    double s = *std::max_element(terms.begin(), terms.end());
    if (!std::isfinite(s)) throw NumericalError("moment estimate: non-finite log term");
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::exp(terms[i] - s);

    auto mean_sd = [](std::span<const double> x) {
        double m = pairwise_sum(x) / static_cast<double>(x.size());
        std::vector<double> d(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) d[i] = (x[i] - m) * (x[i] - m);
        double var = x.size() > 1 ? pairwise_sum(d) / static_cast<double>(x.size() - 1) : 0.0;
        return std::pair<double, double>(m, std::sqrt(var));
    };

    MomentEstimate e;
    e.p = p;
    e.n_samples = n;
    e.method = method;
    double center, spread;
    if (method == MomentMethod::plain) {
        auto [m, sd] = mean_sd(v);
        center = m;
        spread = sd / std::sqrt(static_cast<double>(n));
    } else {
        std::vector<double> bucket_means;
        std::size_t start = 0;
        for (int b = 0; b < kMomBuckets; ++b) {
            std::size_t len = n / kMomBuckets + (static_cast<std::size_t>(b) < n % kMomBuckets ? 1 : 0);
            bucket_means.push_back(pairwise_sum(std::span<const double>(v).subspan(start, len)) /
                                   static_cast<double>(len));
            start += len;
        }
        auto [m, sd] = mean_sd(bucket_means);
        (void)m;
        center = median(bucket_means);
        // Asymptotic standard error of a sample median of approximately normal bucket means.
        spread = std::sqrt(std::numbers::pi / 2.0) * sd / std::sqrt(static_cast<double>(kMomBuckets));
    }
    e.log_mean = s + std::log(center);
    e.mean = std::exp(s) * center;
    e.std_err = std::exp(s) * spread;
    return e;
}

MomentMethod moment_method(double p, double gamma, std::size_t n) {
    if (n < 2 * kMomBuckets) return MomentMethod::plain;
    return p >= 0.8 * threshold_pc(gamma).pc ? MomentMethod::median_of_means : MomentMethod::plain;
}

MomentEstimate estimate_moment(std::span<const double> log_masses, double p, double gamma) {
    if (log_masses.empty()) throw PreconditionError("estimate_moment: empty input");
    if (!std::isfinite(p)) throw PreconditionError("estimate_moment: p must be finite");
    std::vector<double> t(log_masses.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = p * log_masses[i];
    return estimate_from_log_terms(t, p, moment_method(p, gamma, t.size()));
}

MomentEstimate estimate_moment(std::span<const MassResult> masses, double p) {
    if (masses.empty()) throw PreconditionError("estimate_moment: empty input");
    std::vector<double> l(masses.size());
    for (std::size_t i = 0; i < l.size(); ++i) l[i] = masses[i].log_mass;
    return estimate_moment(l, p, masses.front().params.gamma);
}

MomentEstimate estimate_cross_moment(std::span<const double> log_a, std::span<const double> log_b,
                                     double k, double q, double gamma, bool same_region) {
    if (log_a.size() != log_b.size()) throw PreconditionError("cross moment: sample counts differ");
    if (!(k > 0.0) || !(q > 0.0)) throw PreconditionError("cross moment: k and q must be > 0");
    if (same_region) return estimate_moment(log_a, k + q, gamma);
    std::vector<double> t(log_a.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = k * log_a[i] + q * log_b[i];
    return estimate_from_log_terms(t, k + q, moment_method(k + q, gamma, t.size()));
}

double deterministic_first_moment(const UHPRect& region, double gamma, double epsilon) {
    GmcParams params{gamma};
    params.validate();
    // The grid geometry (and its alignment checks) without materializing cells.
    auto grid = build_grid(region, epsilon, 0);
    std::vector<double> rows(grid.ny());
    for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
        UHPRect row(region.x0(), region.x1(), grid.y_edge(iy), grid.y_edge(iy + 1));
        rows[iy] = grid_cell_weight(row, params, epsilon);
    }
    return pairwise_sum(rows);
}

FirstMomentDivergence first_moment_divergence(const UHPRect& region, double gamma,
                                              const std::vector<double>& epsilons) {
    if (epsilons.size() < 3) throw PreconditionError("first_moment_divergence: need >= 3 scales");
    FirstMomentDivergence d;
    d.epsilons = epsilons;
    for (double e : epsilons) d.moments.push_back(deterministic_first_moment(region, gamma, e));
    std::vector<double> x, y, w;
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        x.push_back(std::log(1.0 / epsilons[i]));
        y.push_back(std::log(d.moments[i]));
        w.push_back(1.0);
    }
    d.raw_slope = fit_line(x, y, w, false).slope;
    std::vector<double> xi, yi, wi;
    bool growth = false;
    for (std::size_t i = 1; i < epsilons.size(); ++i) {
        double inc = d.moments[i] - d.moments[i - 1];
        if (std::abs(inc) > 1e-12 * std::abs(d.moments[i])) growth = true;
        xi.push_back(x[i]);
        yi.push_back(std::log(std::abs(inc)));
        wi.push_back(1.0);
    }
    d.diverging = growth;
    d.increment_slope = growth ? fit_line(xi, yi, wi, false).slope : 0.0;
    return d;
}

std::size_t default_hill_k(std::size_t n) {
    return static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(n), 2.0 / 3.0)));
}

TailIndexEstimate tail_index(std::span<const double> log_values, std::size_t k) {
    const std::size_t n = log_values.size();
    if (k < 20) throw PreconditionError("tail_index: k must be >= 20");
    if (n < 10 * k) throw PreconditionError("tail_index: need n_samples >= 10 k");
    std::vector<double> l(log_values.begin(), log_values.end());
    std::nth_element(l.begin(), l.begin() + static_cast<std::ptrdiff_t>(k), l.end(), std::greater<>());
    const double ref = l[k];
    std::vector<double> top(l.begin(), l.begin() + static_cast<std::ptrdiff_t>(k));
    for (double& v : top) v -= ref;
    std::sort(top.begin(), top.end());
    const double mean_excess = pairwise_sum(top) / static_cast<double>(k);
    if (!(mean_excess > 0.0)) throw NumericalError("tail_index: tied order statistics make the estimator undefined");
    TailIndexEstimate t;
    t.k = k;
    t.n_samples = n;
    t.alpha_hat = 1.0 / mean_excess;
    const double h = 1.96 / std::sqrt(static_cast<double>(k));
    t.ci_low = t.alpha_hat * (1.0 - h);
    t.ci_high = t.alpha_hat * (1.0 + h);
    return t;
}

std::vector<std::size_t> default_stability_ks(std::size_t n) {
    std::vector<std::size_t> ks;
    for (double e : {0.5, 0.55, 0.6, 2.0 / 3.0, 0.7, 0.75, 0.8}) {
        auto k = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(n), e)));
        if (k >= 20 && 10 * k <= n && (ks.empty() || ks.back() != k)) ks.push_back(k);
    }
    return ks;
}

HillStability hill_stability(std::span<const double> log_values, const std::vector<std::size_t>& ks) {
    HillStability s;
    double lo = -HUGE_VAL, hi = HUGE_VAL;
    for (std::size_t k : ks) {
        s.estimates.push_back(tail_index(log_values, k));
        lo = std::max(lo, s.estimates.back().ci_low);
        hi = std::min(hi, s.estimates.back().ci_high);
    }
    s.stable = !s.estimates.empty() && lo <= hi;
    return s;
}

}  // namespace gmclab
