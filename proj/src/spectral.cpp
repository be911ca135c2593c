#include "gmclab/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>

#include "gmclab/error.hpp"
#include "gmclab/format.hpp"
#include "gmclab/rng.hpp"

namespace gmclab {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::size_t next_smooth(std::size_t n) {
    for (std::size_t m = std::max<std::size_t>(n, 1);; ++m) {
        std::size_t r = m;
        for (std::size_t f : {2u, 3u, 5u, 7u})
            while (r % f == 0) r /= f;
        if (r == 1) return m;
    }
}

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n)
        : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
        if (!data) throw NumericalError("fftw_malloc failed");
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    fftw_complex* data;
};

struct Plan {
    Plan(int ny, int nx, fftw_complex* buf, int sign) {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_2d(ny, nx, buf, buf, sign, FFTW_ESTIMATE);
        if (!plan) throw NumericalError("FFTW planning failed");
    }
    ~Plan() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
    fftw_plan plan;
};

// Geometry of the reflected lattice: rows m = 0..2M-1 sit at y = (m - M + 1/2) eps, so the
// cell in absolute row a maps to m = M + a and its mirror image to m = M - 1 - a.
struct Layout {
    std::size_t nx, rows;  // rows = 2M
    std::size_t M;
    double diameter;
};

Layout layout_of(const GridDiscretization& grid) {
    Layout l;
    l.nx = grid.nx();
    l.M = grid.row_offset() + grid.ny();
    l.rows = 2 * l.M;
    double eps = grid.cell_size();
    l.diameter = std::hypot((static_cast<double>(l.nx) - 1.0) * eps,
                            (static_cast<double>(l.rows) - 1.0) * eps);
    return l;
}

struct Embedding {
    std::size_t tnx = 0, tny = 0;
    double T = 0.0;
    double extra = 0.0;
    double min_rel = 0.0;
    std::vector<double> eigen;  // clipped eigenvalues of the torus covariance
};

std::vector<double> torus_eigenvalues(std::size_t tnx, std::size_t tny, double eps, double T,
                                      double nugget) {
    const std::size_t N = tnx * tny;
    FftwBuffer buf(N);
    for (std::size_t m = 0; m < tny; ++m) {
        double dy = static_cast<double>(std::min(m, tny - m));
        for (std::size_t j = 0; j < tnx; ++j) {
            double dx = static_cast<double>(std::min(j, tnx - j));
            double c;
            if (m == 0 && j == 0) {
                c = std::log(T / eps) + nugget;
            } else {
                double r = eps * std::hypot(dx, dy);
                c = r < T ? std::log(T / r) : 0.0;
            }
            buf.data[m * tnx + j][0] = c;
            buf.data[m * tnx + j][1] = 0.0;
        }
    }
    Plan plan(static_cast<int>(tny), static_cast<int>(tnx), buf.data, FFTW_FORWARD);
    fftw_execute(plan.plan);
    std::vector<double> ev(N);
    for (std::size_t k = 0; k < N; ++k) ev[k] = buf.data[k][0];
    return ev;
}

Embedding build_embedding(const GridDiscretization& grid, const CovarianceSpec& spec) {
    spec.validate();
    const Layout l = layout_of(grid);
    const double eps = grid.cell_size();
    const double min_lambda = std::max(0.0, 2.0 * std::log(l.diameter));
    if (spec.lambda_shift + 1e-12 < min_lambda)
        throw PreconditionError("spectral backend needs lambda_shift >= " + format_double(min_lambda) +
                                " on this grid (got " + format_double(spec.lambda_shift) + ")");
    // Torus sides of at least twice the lattice extent make wrapped distances exact for
    // every pair of lattice points; larger sides (extent + T) are the classical sufficient
    // condition for positivity. Try the cheap sizes first and check the spectrum.
    for (double f : {1.0, 1.05, 1.1, 1.25, 1.5, 2.0}) {
        double T = l.diameter * f;
        if (T < eps) T = eps;
        if (2.0 * std::log(T) > spec.lambda_shift + 1e-12 && f > 1.0) break;
        const double min_x = 2.0 * static_cast<double>(l.nx - 1) + 1.0;
        const double min_y = 2.0 * static_cast<double>(l.rows - 1) + 1.0;
        const double gen_x = std::max(min_x, static_cast<double>(l.nx - 1) + T / eps + 1.0);
        const double gen_y = std::max(min_y, static_cast<double>(l.rows - 1) + T / eps + 1.0);
        std::size_t last_nx = 0, last_ny = 0;
        for (double s : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            Embedding e;
            e.T = T;
            e.extra = std::max(0.0, spec.lambda_shift - 2.0 * std::log(T));
            const double tx = min_x + s * (gen_x - min_x);
            const double ty = min_y + s * (gen_y - min_y);
            e.tnx = next_smooth(static_cast<std::size_t>(std::ceil(tx - 1e-9)));
            e.tny = next_smooth(static_cast<std::size_t>(std::ceil(ty - 1e-9)));
            if (e.tnx == last_nx && e.tny == last_ny) continue;
            last_nx = e.tnx;
            last_ny = e.tny;
            e.eigen = torus_eigenvalues(e.tnx, e.tny, eps, T, spec.nugget);
            double mx = *std::max_element(e.eigen.begin(), e.eigen.end());
            double mn = *std::min_element(e.eigen.begin(), e.eigen.end());
            e.min_rel = mn / mx;
            if (mn >= -1e-9 * mx) {
                for (double& v : e.eigen) v = std::max(v, 0.0);
                return e;
            }
        }
    }
    throw NumericalError("spectral embedding is not positive semidefinite; raise the nugget or lambda");
}

class SpectralScratch : public SamplerScratch {
public:
    explicit SpectralScratch(std::size_t n) : buf(n) {}
    FftwBuffer buf;
};

class SpectralModel : public FieldModel {
public:
    SpectralModel(const GridDiscretization& grid, const CovarianceSpec& spec, Embedding e)
        : grid_(grid), spec_(spec), e_(std::move(e)), layout_(layout_of(grid)),
          variances_(std::make_shared<const std::vector<double>>(cell_variances(grid, spec))) {
        const double N = static_cast<double>(e_.tnx * e_.tny);
        scale_.resize(e_.eigen.size());
        for (std::size_t k = 0; k < scale_.size(); ++k) scale_[k] = std::sqrt(e_.eigen[k] / N);
        e_.eigen.clear();
        e_.eigen.shrink_to_fit();
        FftwBuffer tmp(e_.tnx * e_.tny);
        plan_ = std::make_unique<Plan>(static_cast<int>(e_.tny), static_cast<int>(e_.tnx), tmp.data,
                                       FFTW_FORWARD);
        // Torus offsets of each cell and its mirror image.
        const std::size_t n = grid_.cell_count();
        upper_.resize(n);
        lower_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t ix = i % grid_.nx(), iy = i / grid_.nx();
            std::size_t a = grid_.row_offset() + iy;
            upper_[i] = (layout_.M + a) * e_.tnx + ix;
            lower_[i] = (layout_.M - 1 - a) * e_.tnx + ix;
        }
        shift_sd_ = std::sqrt(e_.extra);
    }

    const GridDiscretization& grid() const override { return grid_; }
    const CovarianceSpec& spec() const override { return spec_; }
    std::shared_ptr<const std::vector<double>> variances() const override { return variances_; }
    std::size_t group_size() const override { return 2; }
    std::string backend() const override { return "spectral"; }

    std::unique_ptr<SamplerScratch> make_scratch() const override {
        return std::make_unique<SpectralScratch>(e_.tnx * e_.tny);
    }

    void draw_group(std::uint64_t seed, std::uint64_t group, std::span<double> out,
                    SamplerScratch* scratch) const override {
        fftw_complex* buf = static_cast<SpectralScratch*>(scratch)->buf.data;
        const std::size_t N = e_.tnx * e_.tny;
        std::span<double> raw(reinterpret_cast<double*>(buf), 2 * N);
        fill_normals(seed, group, NormalDomain::spectral_field, raw);
        for (std::size_t k = 0; k < N; ++k) {
            buf[k][0] *= scale_[k];
            buf[k][1] *= scale_[k];
        }
        fftw_execute_dft(plan_->plan, buf, buf);

        double shift[2] = {0.0, 0.0};
        if (shift_sd_ > 0.0) {
            for (int m = 0; m < 2; ++m) {
                double g;
                fill_normals(seed, group * 2 + m, NormalDomain::global_shift, std::span<double>(&g, 1));
                shift[m] = shift_sd_ * g;
            }
        }
        const std::size_t n = grid_.cell_count();
        const double h = std::sqrt(0.5);
        for (std::size_t i = 0; i < n; ++i) {
            const double* u = buf[upper_[i]];
            const double* d = buf[lower_[i]];
            out[i] = h * (u[0] + d[0]) + shift[0];
            out[n + i] = h * (u[1] + d[1]) + shift[1];
        }
    }

private:
    GridDiscretization grid_;
    CovarianceSpec spec_;
    Embedding e_;
    Layout layout_;
    std::shared_ptr<const std::vector<double>> variances_;
    std::vector<double> scale_;
    std::unique_ptr<Plan> plan_;
    std::vector<std::size_t> upper_, lower_;
    double shift_sd_ = 0.0;
};

}  // namespace

double spectral_min_lambda(const GridDiscretization& grid) {
    return std::max(0.0, 2.0 * std::log(layout_of(grid).diameter));
}

FieldModelPtr make_spectral_model(const GridDiscretization& grid, const CovarianceSpec& spec,
                                  SpectralInfo* info) {
    if (grid.cell_count() > kDefaultSpectralCellCap)
        throw PreconditionError("spectral backend: " + std::to_string(grid.cell_count()) +
                                " cells exceed the cap of " + std::to_string(kDefaultSpectralCellCap));
    Embedding e = build_embedding(grid, spec);
    if (info) *info = {e.tnx, e.tny, e.T, e.extra, e.min_rel};
    return std::make_shared<SpectralModel>(grid, spec, std::move(e));
}

std::vector<double> spectral_implied_covariance(const GridDiscretization& grid,
                                                const CovarianceSpec& spec) {
    Embedding e = build_embedding(grid, spec);
    const std::size_t N = e.tnx * e.tny;
    FftwBuffer buf(N);
    for (std::size_t k = 0; k < N; ++k) {
        buf.data[k][0] = e.eigen[k] / static_cast<double>(N);
        buf.data[k][1] = 0.0;
    }
    Plan plan(static_cast<int>(e.tny), static_cast<int>(e.tnx), buf.data, FFTW_BACKWARD);
    fftw_execute(plan.plan);
    auto c = [&](long dm, long dj) {
        std::size_t m = static_cast<std::size_t>((dm % static_cast<long>(e.tny) + e.tny) % e.tny);
        std::size_t j = static_cast<std::size_t>((dj % static_cast<long>(e.tnx) + e.tnx) % e.tnx);
        return buf.data[m * e.tnx + j][0];
    };
    const Layout l = layout_of(grid);
    const std::size_t n = grid.cell_count();
    std::vector<long> up(n), dn(n), col(n);
    for (std::size_t i = 0; i < n; ++i) {
        long a = static_cast<long>(grid.row_offset() + i / grid.nx());
        up[i] = static_cast<long>(l.M) + a;
        dn[i] = static_cast<long>(l.M) - 1 - a;
        col[i] = static_cast<long>(i % grid.nx());
    }
    std::vector<double> cov(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            long dj = col[i] - col[k];
            double v = 0.5 * (c(up[i] - up[k], dj) + c(up[i] - dn[k], dj) + c(dn[i] - up[k], dj) +
                              c(dn[i] - dn[k], dj));
            cov[i * n + k] = v + e.extra;
        }
    }
    return cov;
}

}  // namespace gmclab
