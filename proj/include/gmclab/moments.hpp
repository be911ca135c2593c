#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gmclab/geometry.hpp"
#include "gmclab/gmc.hpp"

namespace gmclab {

// (2 + gamma^2/2) p - gamma^2 p^2
double zeta_bar(double p, double gamma);

struct Threshold {
    double pc = 0.0;                    // 2 / gamma^2
    std::optional<double> crude_bound;  // min(pc, 1/2 + 1/gamma^2), reported for gamma >= sqrt 2
};

Threshold threshold_pc(double gamma);

// Growth rate of E[mu_eps(Q)^p] in log(1/eps): 1 - zeta_bar(p) above p_c, 0 below.
double predicted_scan_slope(double p, double gamma);

enum class MomentMethod { plain, median_of_means };
std::string to_string(MomentMethod m);

struct MomentEstimate {
    double p = 0.0;
    std::size_t n_samples = 0;
    double mean = 0.0;
    double std_err = 0.0;
    double log_mean = 0.0;
    MomentMethod method = MomentMethod::plain;
};

inline constexpr int kMomBuckets = 16;

// Mean of exp(terms) computed in the log domain.
MomentEstimate estimate_from_log_terms(std::span<const double> terms, double p, MomentMethod method);

// The method rule: median-of-means when p >= 0.8 p_c(gamma) (and at least 2 per bucket).
MomentMethod moment_method(double p, double gamma, std::size_t n);

MomentEstimate estimate_moment(std::span<const double> log_masses, double p, double gamma);
MomentEstimate estimate_moment(std::span<const MassResult> masses, double p);

// E[mass(A)^k mass(B)^q] from coupled log masses. When the two spans hold the same
// replicates of the same region, pass same_region = true: the result is then bitwise equal to
// estimate_moment(log_a, k + q, gamma).
MomentEstimate estimate_cross_moment(std::span<const double> log_a, std::span<const double> log_b,
                                     double k, double q, double gamma, bool same_region = false);

// Sum of grid_cell_weight over the eps-grid of `region`: the exact expected mass.
double deterministic_first_moment(const UHPRect& region, double gamma, double epsilon);

struct FirstMomentDivergence {
    std::vector<double> epsilons;
    std::vector<double> moments;
    double increment_slope = 0.0;  // slope of log(E_eps - E_{2 eps}) vs log(1/eps); 0 if no growth
    double raw_slope = 0.0;        // slope of log E_eps vs log(1/eps)
    bool diverging = false;
};

FirstMomentDivergence first_moment_divergence(const UHPRect& region, double gamma,
                                              const std::vector<double>& epsilons);

struct TailIndexEstimate {
    double alpha_hat = 0.0;
    std::size_t k = 0;
    std::size_t n_samples = 0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

// Hill estimator on the upper order statistics of exp(log_values).
TailIndexEstimate tail_index(std::span<const double> log_values, std::size_t k);
std::size_t default_hill_k(std::size_t n);

struct HillStability {
    std::vector<TailIndexEstimate> estimates;
    bool stable = false;  // all confidence intervals share a common point
};

HillStability hill_stability(std::span<const double> log_values, const std::vector<std::size_t>& ks);
std::vector<std::size_t> default_stability_ks(std::size_t n);

}  // namespace gmclab
