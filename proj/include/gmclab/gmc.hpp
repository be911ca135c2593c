#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gmclab/geometry.hpp"
#include "gmclab/kernel.hpp"
#include "gmclab/sampler.hpp"

namespace gmclab {

struct GmcParams {
    double gamma = 1.0;
    void validate() const;
    // gamma >= sqrt 2: the bottom row is cut at eps/2 (the weight is not integrable at 0).
    bool needs_floor() const { return gamma * gamma >= 2.0 - 1e-12; }
};

struct MassResult {
    double log_mass = 0.0;
    UHPRect region;
    GmcParams params;
    std::uint64_t replicate_id = 0;
};

// dx * integral_{y0}^{y1} y^{-gamma^2/2} dy.
double cell_weight(const UHPRect& cell, double gamma);

// Weight actually attached to a grid cell: as cell_weight, except that bottom-row cells only
// integrate over [eps/2, eps] when gamma >= sqrt 2.
double grid_cell_weight(const UHPRect& cell, const GmcParams& params, double epsilon);

// The cells of a grid lying in `region` and their constant log terms
// log w_i - gamma^2/2 sigma_i^2. Precompute once, evaluate per sample.
class RegionEvaluator {
public:
    RegionEvaluator(const GridDiscretization& grid, const UHPRect& region, const GmcParams& params,
                    std::span<const double> variances);

    double log_mass(std::span<const double> values) const;
    // log sum_i w_i (the mass of the zero field).
    double log_weight_sum() const { return log_weight_sum_; }
    const std::vector<std::size_t>& cells() const { return cells_; }
    const UHPRect& region() const { return region_; }

private:
    UHPRect region_;
    double gamma_;
    std::vector<std::size_t> cells_;
    std::vector<double> offset_;
    double log_weight_sum_;
};

// Throws PreconditionError naming the offending edge if `region` is not a union of cells.
void check_alignment(const GridDiscretization& grid, const UHPRect& region);

MassResult gmc_log_mass(const FieldSample& field, const UHPRect& region, const GmcParams& params);
std::vector<MassResult> gmc_masses_multi(const FieldSample& field, const std::vector<UHPRect>& regions,
                                         const GmcParams& params);

}  // namespace gmclab
