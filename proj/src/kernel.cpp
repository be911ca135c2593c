#include "gmclab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "gmclab/error.hpp"
#include "gmclab/format.hpp"

namespace gmclab {

void CovarianceSpec::validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw PreconditionError("epsilon must be > 0");
    if (!(lambda_shift >= 0.0) || !std::isfinite(lambda_shift))
        throw PreconditionError("lambda_shift must be finite and >= 0");
    if (!(nugget >= 0.0) || !std::isfinite(nugget))
        throw PreconditionError("nugget must be finite and >= 0");
}

double kernel_value(Point z, Point w, const CovarianceSpec& spec) {
    if (!std::isfinite(z.x) || !std::isfinite(z.y) || !std::isfinite(w.x) || !std::isfinite(w.y))
        throw PreconditionError("kernel_value: non-finite coordinates");
    if (z.y < 0.0 || w.y < 0.0) throw PreconditionError("kernel_value: points must lie in closed H");
    double dx = z.x - w.x;
    double d = std::hypot(dx, z.y - w.y);
    double dbar = std::hypot(dx, z.y + w.y);
    return -std::log(std::max(d, spec.epsilon)) - std::log(std::max(dbar, spec.epsilon)) +
           spec.lambda_shift;
}

GridDiscretization::GridDiscretization(UHPRect region, double cell_size, std::size_t nx,
                                       std::size_t ny)
    : region_(region), cell_size_(cell_size), nx_(nx), ny_(ny) {
    row_offset_ = static_cast<std::size_t>(std::llround(region.y0() / cell_size));
}

double GridDiscretization::x_edge(std::size_t ix) const {
    return ix == nx_ ? region_.x1() : region_.x0() + static_cast<double>(ix) * cell_size_;
}

double GridDiscretization::y_edge(std::size_t iy) const {
    return iy == ny_ ? region_.y1() : static_cast<double>(row_offset_ + iy) * cell_size_;
}

Point GridDiscretization::center(std::size_t i) const {
    std::size_t ix = i % nx_, iy = i / nx_;
    return {region_.x0() + (static_cast<double>(ix) + 0.5) * cell_size_,
            (static_cast<double>(row_offset_ + iy) + 0.5) * cell_size_};
}

UHPRect GridDiscretization::cell(std::size_t i) const {
    std::size_t ix = i % nx_, iy = i / nx_;
    return UHPRect(x_edge(ix), x_edge(ix + 1), y_edge(iy), y_edge(iy + 1));
}

namespace {

std::size_t cells_along(double length, double eps, const char* what) {
    double n = length / eps;
    double rn = std::round(n);
    if (rn < 1.0 || std::abs(n - rn) > 1e-9 * std::max(1.0, n))
        throw PreconditionError(std::string("build_grid: epsilon does not divide region ") + what);
    return static_cast<std::size_t>(rn);
}

}  // namespace

GridDiscretization build_grid(const UHPRect& region, double epsilon, std::size_t max_cells) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw PreconditionError("epsilon must be > 0");
    if (epsilon > region.width() * (1 + 1e-12) || epsilon > region.height() * (1 + 1e-12))
        throw PreconditionError("build_grid: epsilon exceeds region width or height");
    std::size_t nx = cells_along(region.width(), epsilon, "width");
    std::size_t ny = cells_along(region.height(), epsilon, "height");
    double off = region.y0() / epsilon;
    if (std::abs(off - std::round(off)) > 1e-9 * std::max(1.0, off))
        throw PreconditionError("build_grid: region bottom must lie on the epsilon lattice");
    std::size_t cells = nx * ny;
    if (max_cells != 0 && cells > max_cells) {
        double gib = static_cast<double>(cells) * static_cast<double>(cells) * 8.0 / (1u << 30);
        throw PreconditionError("build_grid: " + std::to_string(cells) + " cells exceed the cap of " +
                                std::to_string(max_cells) + " (dense covariance would need " +
                                format_double(std::round(gib * 100) / 100) + " GiB)");
    }
    return GridDiscretization(region, epsilon, nx, ny);
}

std::vector<double> cell_variances(const GridDiscretization& grid, const CovarianceSpec& spec) {
    std::vector<double> v(grid.cell_count());
    for (std::size_t i = 0; i < v.size(); ++i) {
        Point c = grid.center(i);
        v[i] = kernel_value(c, c, spec) + spec.nugget;
    }
    return v;
}

Eigen::MatrixXd assemble_covariance(const GridDiscretization& grid, const CovarianceSpec& spec) {
    spec.validate();
    const std::size_t n = grid.cell_count();
    Eigen::MatrixXd m(n, n);
    std::vector<Point> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = grid.center(i);
    for (std::size_t j = 0; j < n; ++j) {
        m(j, j) = kernel_value(c[j], c[j], spec) + spec.nugget;
        for (std::size_t i = j + 1; i < n; ++i) {
            double k = kernel_value(c[i], c[j], spec);
            m(i, j) = k;
            m(j, i) = k;
        }
    }
    return m;
}

Eigen::MatrixXd FactorizedCovariance::lower_matrix() const {
    const std::size_t n = grid.cell_count();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) l(i, j) = lower(i, j);
    return l;
}

std::uint64_t factor_cache_key(const GridDiscretization& grid, const CovarianceSpec& spec) {
    const double fields[] = {grid.region().x0(), grid.region().x1(), grid.region().y0(),
                             grid.region().y1(), spec.epsilon,       spec.lambda_shift,
                             spec.nugget,        static_cast<double>(grid.nx()),
                             static_cast<double>(grid.ny())};
    std::uint64_t h = 1469598103934665603ull;
    const auto* bytes = reinterpret_cast<const unsigned char*>(fields);
    for (std::size_t i = 0; i < sizeof(fields); ++i) {
        h ^= bytes[i];
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

constexpr char kCacheMagic[8] = {'G', 'M', 'C', 'F', 'A', 'C', '0', '1'};

std::filesystem::path cache_path(const std::string& dir, std::uint64_t key) {
    char name[32];
    std::snprintf(name, sizeof(name), "%016llx.fac", static_cast<unsigned long long>(key));
    return std::filesystem::path(dir) / name;
}

bool load_cached(const std::filesystem::path& path, std::uint64_t key, FactorizedCovariance& fac) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    char magic[8];
    std::uint64_t stored_key = 0, n = 0;
    double jitter = 0, pivot = 0;
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(&stored_key), sizeof(stored_key));
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    in.read(reinterpret_cast<char*>(&jitter), sizeof(jitter));
    in.read(reinterpret_cast<char*>(&pivot), sizeof(pivot));
    if (!in || std::memcmp(magic, kCacheMagic, 8) != 0 || stored_key != key ||
        n != fac.grid.cell_count())
        return false;
    std::vector<double> packed(n * (n + 1) / 2);
    in.read(reinterpret_cast<char*>(packed.data()),
            static_cast<std::streamsize>(packed.size() * sizeof(double)));
    if (!in) return false;
    fac.packed_lower = std::move(packed);
    fac.jitter_used = jitter;
    fac.min_pivot = pivot;
    return true;
}

void store_cached(const std::filesystem::path& path, std::uint64_t key,
                  const FactorizedCovariance& fac) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) return;
        std::uint64_t n = fac.grid.cell_count();
        out.write(kCacheMagic, 8);
        out.write(reinterpret_cast<const char*>(&key), sizeof(key));
        out.write(reinterpret_cast<const char*>(&n), sizeof(n));
        out.write(reinterpret_cast<const char*>(&fac.jitter_used), sizeof(double));
        out.write(reinterpret_cast<const char*>(&fac.min_pivot), sizeof(double));
        out.write(reinterpret_cast<const char*>(fac.packed_lower.data()),
                  static_cast<std::streamsize>(fac.packed_lower.size() * sizeof(double)));
        if (!out) return;
    }
    std::filesystem::rename(tmp, path, ec);
}

}  // namespace

FactorizedCovariance factorize(const GridDiscretization& grid, const CovarianceSpec& spec,
                               const FactorizeOptions& opts) {
    spec.validate();
    FactorizedCovariance fac{grid, spec, {}, cell_variances(grid, spec), 0.0, 0.0};
    const std::size_t n = grid.cell_count();
    for (double v : fac.diag_variances)
        if (!(v > 0.0))
            throw PreconditionError("factorize: non-positive cell variance; raise lambda_shift");

    const std::uint64_t key = factor_cache_key(grid, spec);
    if (!opts.cache_dir.empty() && load_cached(cache_path(opts.cache_dir, key), key, fac)) return fac;

    Eigen::MatrixXd m = assemble_covariance(grid, spec);
    const double max_diag = m.diagonal().maxCoeff();
    const double jitters[] = {0.0, 1e-12, 1e-10, 1e-8, 1e-6};
    for (double j : jitters) {
        Eigen::MatrixXd a = m;
        if (j > 0.0) a.diagonal().array() += j * max_diag;
        Eigen::LLT<Eigen::MatrixXd> llt(a);
        if (llt.info() != Eigen::Success) continue;
        const Eigen::MatrixXd& l = llt.matrixLLT();
        double min_pivot = l(0, 0) * l(0, 0);
        bool ok = true;
        for (std::size_t i = 0; i < n; ++i) {
            double d = l(i, i);
            if (!(d > 0.0) || !std::isfinite(d)) ok = false;
            min_pivot = std::min(min_pivot, d * d);
        }
        if (!ok) continue;
        fac.packed_lower.resize(n * (n + 1) / 2);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k <= i; ++k) fac.packed_lower[i * (i + 1) / 2 + k] = l(i, k);
        fac.jitter_used = j * max_diag;
        fac.min_pivot = min_pivot;
        if (!opts.cache_dir.empty()) store_cached(cache_path(opts.cache_dir, key), key, fac);
        return fac;
    }
    throw NumericalError("kernel not PSD on this domain; shrink region or raise lambda");
}

ShiftSelection validate_psd_shift(const GridDiscretization& grid,
                                  const std::vector<double>& lambda_candidates, double gamma,
                                  double p, double nugget) {
    if (lambda_candidates.empty()) throw PreconditionError("validate_psd_shift: no candidates");
    if (!std::is_sorted(lambda_candidates.begin(), lambda_candidates.end()))
        throw PreconditionError("validate_psd_shift: candidates must be ascending");
    for (double lam : lambda_candidates) {
        CovarianceSpec spec{grid.cell_size(), lam, nugget};
        try {
            factorize(grid, spec);
            return {lam, std::exp(gamma * gamma * lam * p * (p - 1.0) / 2.0)};
        } catch (const NumericalError&) {
        } catch (const PreconditionError&) {
        }
    }
    throw NumericalError("validate_psd_shift: no candidate lambda yields a PSD covariance");
}

}  // namespace gmclab
