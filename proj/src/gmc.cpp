#include "gmclab/gmc.hpp"

#include <cmath>

#include "gmclab/error.hpp"
#include "gmclab/format.hpp"
#include "gmclab/stats.hpp"

namespace gmclab {

void GmcParams::validate() const {
    if (!(gamma > 0.0 && gamma < 2.0))
        throw PreconditionError("gamma must lie in the open interval (0,2), got " + format_double(gamma));
}

double cell_weight(const UHPRect& cell, double gamma) {
    GmcParams{gamma}.validate();
    const double a = 1.0 - 0.5 * gamma * gamma;
    const double y0 = cell.y0(), y1 = cell.y1();
    double integral;
    if (y0 == 0.0) {
        if (a <= 1e-12)
            throw PreconditionError("cell_weight: y^{-gamma^2/2} is not integrable at y = 0 for gamma >= sqrt 2");
        integral = std::pow(y1, a) / a;
    } else {
        const double l = std::log(y1 / y0);
        if (std::abs(a) < 1e-12)
            integral = l;
        else
            integral = std::pow(y0, a) * std::expm1(a * l) / a;
    }
    return cell.width() * integral;
}

double grid_cell_weight(const UHPRect& cell, const GmcParams& params, double epsilon) {
    if (cell.y0() == 0.0 && params.needs_floor())
        return cell_weight(UHPRect(cell.x0(), cell.x1(), 0.5 * epsilon, cell.y1()), params.gamma);
    return cell_weight(cell, params.gamma);
}

void check_alignment(const GridDiscretization& grid, const UHPRect& region) {
    const double eps = grid.cell_size();
    const UHPRect& g = grid.region();
    const double tol = 1e-9;
    auto on_lattice = [&](double v, double origin) {
        double t = (v - origin) / eps;
        return std::abs(t - std::round(t)) <= tol;
    };
    auto fail = [&](const char* edge, double v) {
        throw PreconditionError(std::string("region edge ") + edge + " = " + format_double(v) +
                                " is not aligned with the grid (cell size " + format_double(eps) + ")");
    };
    if (!on_lattice(region.x0(), g.x0())) fail("x0", region.x0());
    if (!on_lattice(region.x1(), g.x0())) fail("x1", region.x1());
    if (!on_lattice(region.y0(), 0.0)) fail("y0", region.y0());
    if (!on_lattice(region.y1(), 0.0)) fail("y1", region.y1());
    const double slack = tol * eps;
    if (region.x0() < g.x0() - slack || region.x1() > g.x1() + slack || region.y0() < g.y0() - slack ||
        region.y1() > g.y1() + slack)
        throw PreconditionError("region " + region.csv_row() + " is not contained in the grid region " +
                                g.csv_row());
}

RegionEvaluator::RegionEvaluator(const GridDiscretization& grid, const UHPRect& region,
                                 const GmcParams& params, std::span<const double> variances)
    : region_(region), gamma_(params.gamma) {
    params.validate();
    check_alignment(grid, region);
    if (variances.size() != grid.cell_count())
        throw PreconditionError("RegionEvaluator: variance vector does not match the grid");
    const double eps = grid.cell_size();
    const auto ix0 = static_cast<std::size_t>(std::llround((region.x0() - grid.region().x0()) / eps));
    const auto ix1 = static_cast<std::size_t>(std::llround((region.x1() - grid.region().x0()) / eps));
    const auto iy0 = static_cast<std::size_t>(std::llround(region.y0() / eps)) - grid.row_offset();
    const auto iy1 = static_cast<std::size_t>(std::llround(region.y1() / eps)) - grid.row_offset();
    const double half_g2 = 0.5 * gamma_ * gamma_;
    std::vector<double> log_w;
    for (std::size_t iy = iy0; iy < iy1; ++iy) {
        for (std::size_t ix = ix0; ix < ix1; ++ix) {
            std::size_t i = grid.index(ix, iy);
            double lw = std::log(grid_cell_weight(grid.cell(i), params, eps));
            cells_.push_back(i);
            log_w.push_back(lw);
            offset_.push_back(lw - half_g2 * variances[i]);
        }
    }
    log_weight_sum_ = log_sum_exp(log_w);
}

double RegionEvaluator::log_mass(std::span<const double> values) const {
    const std::size_t n = cells_.size();
    thread_local std::vector<double> t;
    t.resize(n);
    for (std::size_t k = 0; k < n; ++k) t[k] = offset_[k] + gamma_ * values[cells_[k]];
    return log_sum_exp_inplace(t);
}

MassResult gmc_log_mass(const FieldSample& field, const UHPRect& region, const GmcParams& params) {
    if (!field.grid) throw PreconditionError("field sample has no grid");
    RegionEvaluator ev(*field.grid, region, params, *field.variances);
    return MassResult{ev.log_mass(field.values), region, params, field.replicate_id};
}

std::vector<MassResult> gmc_masses_multi(const FieldSample& field, const std::vector<UHPRect>& regions,
                                         const GmcParams& params) {
    std::vector<MassResult> out;
    out.reserve(regions.size());
    for (const auto& r : regions) out.push_back(gmc_log_mass(field, r, params));
    return out;
}

}  // namespace gmclab
