#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gmclab/kernel.hpp"

namespace gmclab {

// Per-thread scratch owned by the caller of FieldModel::draw_group.
class SamplerScratch {
public:
    virtual ~SamplerScratch() = default;
};

// A Gaussian field on grid cell centres. Replicates are produced in groups of group_size()
// consecutive ids (group g covers ids g*size .. g*size+size-1); draw_group writes them
// back to back into `out`.
class FieldModel {
public:
    virtual ~FieldModel() = default;
    virtual const GridDiscretization& grid() const = 0;
    virtual const CovarianceSpec& spec() const = 0;
    virtual std::shared_ptr<const std::vector<double>> variances() const = 0;
    virtual std::size_t group_size() const = 0;
    virtual std::unique_ptr<SamplerScratch> make_scratch() const = 0;
    virtual void draw_group(std::uint64_t seed, std::uint64_t group, std::span<double> out,
                            SamplerScratch* scratch) const = 0;
    virtual std::string backend() const = 0;
};

using FieldModelPtr = std::shared_ptr<const FieldModel>;

// values = L g with L the dense lower factor.
FieldModelPtr make_dense_model(FactorizedCovariance fac);

// Every draw is identically zero (the "zero noise" test hook); variances are kept.
FieldModelPtr make_zero_noise_model(const FieldModel& inner);
FieldModelPtr make_zero_noise_model(const GridDiscretization& grid, const CovarianceSpec& spec);
// Zero values and zero variances: every mass equals its weight sum, the expected mass.
FieldModelPtr make_deterministic_model(const GridDiscretization& grid, const CovarianceSpec& spec);

struct FieldSample {
    const GridDiscretization* grid = nullptr;
    std::vector<double> values;
    std::shared_ptr<const std::vector<double>> variances;
    std::uint64_t seed = 0;
    std::uint64_t replicate_id = 0;
};

FieldSample sample_field(const FieldModel& model, std::uint64_t seed, std::uint64_t replicate_id);

// Runs fn on each sample with id in [first_id, first_id + count) using `workers` threads
// (0 = hardware concurrency). fn may be called concurrently for different ids; results must
// only depend on the sample.
void for_each_sample(const FieldModel& model, std::uint64_t seed, std::uint64_t first_id,
                     std::uint64_t count, unsigned workers,
                     const std::function<void(const FieldSample&)>& fn);

// Ordered per-id results of fn.
template <class T, class F>
std::vector<T> map_samples(const FieldModel& model, std::uint64_t seed, std::uint64_t first_id,
                           std::uint64_t count, unsigned workers, F&& fn) {
    std::vector<T> out(count);
    for_each_sample(model, seed, first_id, count, workers, [&](const FieldSample& s) {
        out[s.replicate_id - first_id] = fn(s);
    });
    return out;
}

std::vector<FieldSample> sample_batch(const FieldModel& model, std::uint64_t seed,
                                      std::uint64_t first_id, std::uint64_t count,
                                      unsigned workers);

// Raw dump of field values (little-endian doubles, one record per replicate, id order).
void dump_samples(const FieldModel& model, std::uint64_t seed, std::uint64_t first_id,
                  std::uint64_t count, unsigned workers, const std::string& path);

unsigned resolve_workers(unsigned workers);

}  // namespace gmclab
