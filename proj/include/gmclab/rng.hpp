#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace gmclab {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds.
PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key);

// Inverse standard normal CDF (Wichura's algorithm AS 241, double precision branch).
double inverse_normal_cdf(double p);

// Independent normal streams are addressed by (seed, stream id, domain). Different
// consumers of the same replicate use different domains so their draws never overlap.
enum class NormalDomain : std::uint16_t {
    dense_field = 1,
    spectral_field = 2,
    global_shift = 3,
    synthetic = 4,
    fuzz = 5,
};

// Fills out[j] with the normals at positions j = first, first+1, ... of the stream.
void fill_normals(std::uint64_t seed, std::uint64_t stream, NormalDomain domain,
                  std::span<double> out, std::uint64_t first = 0);

// Uniforms in (0,1) with 53 random bits, same addressing as fill_normals.
void fill_uniforms(std::uint64_t seed, std::uint64_t stream, NormalDomain domain,
                   std::span<double> out, std::uint64_t first = 0);

}  // namespace gmclab
