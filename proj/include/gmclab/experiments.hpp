#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gmclab/moments.hpp"
#include "gmclab/report.hpp"
#include "gmclab/sampler.hpp"

namespace gmclab {

enum class Backend { automatic, dense, spectral };
Backend parse_backend(const std::string& s);
std::string to_string(Backend b);

// Grids up to this many cells use the dense factor when the backend is automatic.
inline constexpr std::size_t kAutoDenseCells = 1024;

struct MonteCarloOptions {
    std::uint64_t seed = 20240611;
    unsigned workers = 0;
    std::optional<double> lambda_shift;  // unset: smallest value the chosen backends accept
    double nugget = kDefaultNugget;
    Backend backend = Backend::automatic;
    bool zero_noise = false;  // deterministic field: every mass equals its expectation
    std::string cache_dir;
    std::uint64_t first_id = 0;
};

double resolve_lambda(const std::vector<GridDiscretization>& grids, const MonteCarloOptions& opts);
FieldModelPtr build_field_model(const GridDiscretization& grid, double lambda,
                                const MonteCarloOptions& opts);

// Log masses of each region (outer index) for replicates first_id .. first_id + n - 1.
std::vector<std::vector<double>> sample_log_masses(const FieldModel& model,
                                                   const std::vector<UHPRect>& regions,
                                                   const GmcParams& params, std::uint64_t seed,
                                                   std::uint64_t first_id, std::size_t n,
                                                   unsigned workers);

DecompositionReport scaling_check(const UHPRect& a, double r, double p, double gamma,
                                  double epsilon, std::size_t n_samples,
                                  const MonteCarloOptions& opts = {});

struct ScanResult {
    std::vector<DecompositionReport> per_p;
    std::vector<double> slopes;  // fitted slope per p, in input order
    std::vector<double> slope_errors;
    std::optional<double> pc_estimate;
    double pc_ci_low = 0.0;
    double pc_ci_high = 0.0;
    std::vector<double> finest_log_masses;
    double lambda = 0.0;
};

struct ScanOptions {
    double slope_tolerance = 0.1;
};

ScanResult divergence_scan(const CarlesonCube& q, const std::vector<double>& ps, double gamma,
                           const std::vector<double>& epsilons, std::size_t n_samples,
                           const MonteCarloOptions& opts = {}, const ScanOptions& scan = {});

// Fits the crossing point x of s_x(p) = gamma^2 (p - 1/2)(p - x) 1{p > x} to measured slopes.
struct CrossingFit {
    double pc = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};
CrossingFit fit_threshold_crossing(const std::vector<double>& ps, const std::vector<double>& slopes,
                                   const std::vector<double>& slope_errors, double gamma);

// epsilon = 0 picks r 2^{-(n_max+2)}.
DecompositionReport slice_moment_sequence(const CarlesonCube& q, double p, double gamma, int n_max,
                                          std::size_t n_samples, double epsilon = 0.0,
                                          const MonteCarloOptions& opts = {});

enum class Coupling { shared_field, independent_fields };

MomentEstimate cross_moment(const UHPRect& a, const UHPRect& b, double k, double q, double gamma,
                            double epsilon, std::size_t n_samples, const MonteCarloOptions& opts = {},
                            Coupling coupling = Coupling::shared_field);

// Grid covering both regions (their bounding box) unless grid_region is given.
DecompositionReport decorrelation_check(const UHPRect& ql, const UHPRect& qr_far, double k, double q,
                                        double gamma, double delta, double epsilon,
                                        std::size_t n_samples, const MonteCarloOptions& opts = {},
                                        std::optional<UHPRect> grid_region = std::nullopt);

struct SokobanOptions {
    int moves = 4;                     // j = 1..moves
    std::vector<int> fit_ns = {2, 4, 8};  // N values for the delta^q fit
};

// ql must be a Carleson-cube half [c - r, c] x [0, r]; the delta-strips lie to its right.
DecompositionReport sokoban_check(const UHPRect& ql, int n, double k, double q, double gamma,
                                  double epsilon, std::size_t n_samples,
                                  const MonteCarloOptions& opts = {}, const SokobanOptions& so = {});

}  // namespace gmclab
