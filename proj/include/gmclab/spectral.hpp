#pragma once

#include <cstddef>
#include <vector>

#include "gmclab/sampler.hpp"

namespace gmclab {

inline constexpr std::size_t kDefaultSpectralCellCap = std::size_t{1} << 20;

// Exact sampler for the same covariance as the dense factor, through the reflection
// X(z) = (Y(z) + Y(conj z)) / sqrt 2 with Y stationary of covariance ln_+(T/|h|) (plus the
// nugget at h = 0) embedded in a periodic torus. Requires lambda >= 2 ln T where T is the
// diameter of the cell centres together with their mirror images; the remainder
// lambda - 2 ln T is added as one shared normal per replicate.
struct SpectralInfo {
    std::size_t torus_nx = 0;
    std::size_t torus_ny = 0;
    double truncation = 0.0;     // T
    double global_shift = 0.0;   // lambda - 2 ln T
    double min_eigenvalue = 0.0; // before clipping, relative to the largest one
};

// Smallest lambda the spectral backend accepts on this grid.
double spectral_min_lambda(const GridDiscretization& grid);

FieldModelPtr make_spectral_model(const GridDiscretization& grid, const CovarianceSpec& spec,
                                  SpectralInfo* info = nullptr);

// Covariance implied by the spectral model between two cells (for cross-checks).
std::vector<double> spectral_implied_covariance(const GridDiscretization& grid,
                                                const CovarianceSpec& spec);

}  // namespace gmclab
