#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gmclab/geometry.hpp"

namespace gmclab {

// The clamp-regularized kernel alone is indefinite on eps-grids (min eigenvalue about -0.6
// independent of lambda); a diagonal nugget restores positivity.
inline constexpr double kDefaultNugget = 1.25;

struct CovarianceSpec {
    double epsilon = 0.0;
    double lambda_shift = 0.0;
    double nugget = kDefaultNugget;

    void validate() const;
};

// -ln max(|z-w|, eps) - ln max(|z-conj w|, eps) + lambda. The nugget is not part of it.
double kernel_value(Point z, Point w, const CovarianceSpec& spec);

inline constexpr std::size_t kDefaultDenseCellCap = 16384;

class GridDiscretization {
public:
    GridDiscretization(UHPRect region, double cell_size, std::size_t nx, std::size_t ny);

    const UHPRect& region() const { return region_; }
    double cell_size() const { return cell_size_; }
    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    std::size_t cell_count() const { return nx_ * ny_; }
    // Row index of the bottom row counted from y = 0 (region.y0 / eps).
    std::size_t row_offset() const { return row_offset_; }

    // Cells are numbered row by row from the bottom: index = iy * nx + ix.
    std::size_t index(std::size_t ix, std::size_t iy) const { return iy * nx_ + ix; }
    Point center(std::size_t i) const;
    UHPRect cell(std::size_t i) const;
    double x_edge(std::size_t ix) const;
    double y_edge(std::size_t iy) const;

private:
    UHPRect region_;
    double cell_size_;
    std::size_t nx_, ny_;
    std::size_t row_offset_;
};

// max_cells = 0 disables the cap.
GridDiscretization build_grid(const UHPRect& region, double epsilon,
                              std::size_t max_cells = kDefaultDenseCellCap);

Eigen::MatrixXd assemble_covariance(const GridDiscretization& grid, const CovarianceSpec& spec);
std::vector<double> cell_variances(const GridDiscretization& grid, const CovarianceSpec& spec);

struct FactorizedCovariance {
    GridDiscretization grid;
    CovarianceSpec spec;
    // Lower factor stored row by row: row i holds entries (i,0..i) at offset i(i+1)/2.
    std::vector<double> packed_lower;
    std::vector<double> diag_variances;
    double jitter_used = 0.0;
    double min_pivot = 0.0;

    double lower(std::size_t i, std::size_t j) const {
        return packed_lower[i * (i + 1) / 2 + j];
    }
    Eigen::MatrixXd lower_matrix() const;
};

struct FactorizeOptions {
    // Directory for the binary factor cache; empty disables caching.
    std::string cache_dir;
};

FactorizedCovariance factorize(const GridDiscretization& grid, const CovarianceSpec& spec,
                               const FactorizeOptions& opts = {});

// Cache key for (region, eps, lambda, nugget).
std::uint64_t factor_cache_key(const GridDiscretization& grid, const CovarianceSpec& spec);

struct ShiftSelection {
    double lambda = 0.0;
    double distortion = 1.0;  // exp(gamma^2 lambda p (p-1) / 2)
};

ShiftSelection validate_psd_shift(const GridDiscretization& grid,
                                  const std::vector<double>& lambda_candidates, double gamma,
                                  double p, double nugget = kDefaultNugget);

}  // namespace gmclab
