#include "gmclab/sampler.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "gmclab/error.hpp"
#include "gmclab/rng.hpp"

namespace gmclab {

namespace {

class DenseScratch : public SamplerScratch {
public:
    explicit DenseScratch(std::size_t n) : normals(n) {}
    std::vector<double> normals;
};

class DenseModel : public FieldModel {
public:
    explicit DenseModel(FactorizedCovariance fac)
        : fac_(std::move(fac)),
          variances_(std::make_shared<const std::vector<double>>(fac_.diag_variances)) {}

    const GridDiscretization& grid() const override { return fac_.grid; }
    const CovarianceSpec& spec() const override { return fac_.spec; }
    std::shared_ptr<const std::vector<double>> variances() const override { return variances_; }
    std::size_t group_size() const override { return 1; }
    std::string backend() const override { return "dense"; }

    std::unique_ptr<SamplerScratch> make_scratch() const override {
        return std::make_unique<DenseScratch>(fac_.grid.cell_count());
    }

    void draw_group(std::uint64_t seed, std::uint64_t group, std::span<double> out,
                    SamplerScratch* scratch) const override {
        auto& g = static_cast<DenseScratch*>(scratch)->normals;
        fill_normals(seed, group, NormalDomain::dense_field, g);
        const std::size_t n = g.size();
        const double* row = fac_.packed_lower.data();
        for (std::size_t i = 0; i < n; ++i) {
            // Four interleaved partial sums in a fixed order: fast and still deterministic.
            double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
            std::size_t k = 0;
            const std::size_t len = i + 1;
            for (; k + 4 <= len; k += 4) {
                s0 += row[k] * g[k];
                s1 += row[k + 1] * g[k + 1];
                s2 += row[k + 2] * g[k + 2];
                s3 += row[k + 3] * g[k + 3];
            }
            for (; k < len; ++k) s0 += row[k] * g[k];
            out[i] = (s0 + s1) + (s2 + s3);
            row += len;
        }
    }

private:
    FactorizedCovariance fac_;
    std::shared_ptr<const std::vector<double>> variances_;
};

class ZeroNoiseModel : public FieldModel {
public:
    ZeroNoiseModel(GridDiscretization grid, CovarianceSpec spec,
                   std::shared_ptr<const std::vector<double>> variances, std::string name = "zero-noise")
        : grid_(std::move(grid)), spec_(spec), variances_(std::move(variances)), name_(std::move(name)) {}

    const GridDiscretization& grid() const override { return grid_; }
    const CovarianceSpec& spec() const override { return spec_; }
    std::shared_ptr<const std::vector<double>> variances() const override { return variances_; }
    std::size_t group_size() const override { return 1; }
    std::string backend() const override { return name_; }
    std::unique_ptr<SamplerScratch> make_scratch() const override { return nullptr; }
    void draw_group(std::uint64_t, std::uint64_t, std::span<double> out,
                    SamplerScratch*) const override {
        std::fill(out.begin(), out.end(), 0.0);
    }

private:
    GridDiscretization grid_;
    CovarianceSpec spec_;
    std::shared_ptr<const std::vector<double>> variances_;
    std::string name_;
};

}  // namespace

FieldModelPtr make_dense_model(FactorizedCovariance fac) {
    return std::make_shared<DenseModel>(std::move(fac));
}

FieldModelPtr make_zero_noise_model(const FieldModel& inner) {
    return std::make_shared<ZeroNoiseModel>(inner.grid(), inner.spec(), inner.variances());
}

FieldModelPtr make_zero_noise_model(const GridDiscretization& grid, const CovarianceSpec& spec) {
    spec.validate();
    return std::make_shared<ZeroNoiseModel>(
        grid, spec, std::make_shared<const std::vector<double>>(cell_variances(grid, spec)));
}

FieldModelPtr make_deterministic_model(const GridDiscretization& grid, const CovarianceSpec& spec) {
    spec.validate();
    return std::make_shared<ZeroNoiseModel>(
        grid, spec, std::make_shared<const std::vector<double>>(grid.cell_count(), 0.0), "deterministic");
}

unsigned resolve_workers(unsigned workers) {
    if (workers != 0) return workers;
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

FieldSample sample_field(const FieldModel& model, std::uint64_t seed, std::uint64_t replicate_id) {
    FieldSample s;
    for_each_sample(model, seed, replicate_id, 1, 1, [&](const FieldSample& x) { s = x; });
    return s;
}

void for_each_sample(const FieldModel& model, std::uint64_t seed, std::uint64_t first_id,
                     std::uint64_t count, unsigned workers,
                     const std::function<void(const FieldSample&)>& fn) {
    if (count == 0) return;
    const std::uint64_t gs = model.group_size();
    const std::uint64_t g_first = first_id / gs;
    const std::uint64_t g_last = (first_id + count - 1) / gs;
    const std::uint64_t n_groups = g_last - g_first + 1;
    const std::size_t n = model.grid().cell_count();
    const auto variances = model.variances();

    std::atomic<std::uint64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto body = [&]() {
        try {
            auto scratch = model.make_scratch();
            std::vector<double> buf(gs * n);
            FieldSample s;
            s.grid = &model.grid();
            s.variances = variances;
            s.seed = seed;
            s.values.resize(n);
            for (;;) {
                std::uint64_t k = next.fetch_add(1);
                if (k >= n_groups) break;
                std::uint64_t g = g_first + k;
                model.draw_group(seed, g, buf, scratch.get());
                for (std::uint64_t m = 0; m < gs; ++m) {
                    std::uint64_t id = g * gs + m;
                    if (id < first_id || id >= first_id + count) continue;
                    std::copy(buf.begin() + m * n, buf.begin() + (m + 1) * n, s.values.begin());
                    s.replicate_id = id;
                    fn(s);
                }
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
            next.store(n_groups);
        }
    };

    unsigned w = static_cast<unsigned>(
        std::min<std::uint64_t>(resolve_workers(workers), n_groups));
    if (w <= 1) {
        body();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(w);
        for (unsigned t = 0; t < w; ++t) threads.emplace_back(body);
        for (auto& t : threads) t.join();
    }
    if (error) std::rethrow_exception(error);
}

std::vector<FieldSample> sample_batch(const FieldModel& model, std::uint64_t seed,
                                      std::uint64_t first_id, std::uint64_t count,
                                      unsigned workers) {
    if (count == 0) throw PreconditionError("sample_batch: count must be >= 1");
    return map_samples<FieldSample>(model, seed, first_id, count, workers,
                                    [](const FieldSample& s) { return s; });
}

void dump_samples(const FieldModel& model, std::uint64_t seed, std::uint64_t first_id,
                  std::uint64_t count, unsigned workers, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw PreconditionError("cannot open sample dump file: " + path);
    // Process in blocks so memory stays bounded; output order is by id.
    const std::uint64_t block = 256;
    for (std::uint64_t start = 0; start < count; start += block) {
        std::uint64_t m = std::min(block, count - start);
        auto samples = sample_batch(model, seed, first_id + start, m, workers);
        for (const auto& s : samples)
            out.write(reinterpret_cast<const char*>(s.values.data()),
                      static_cast<std::streamsize>(s.values.size() * sizeof(double)));
    }
}

}  // namespace gmclab
