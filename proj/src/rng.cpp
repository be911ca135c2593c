#include "gmclab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace gmclab {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Philox over a run of consecutive blocks, structure-of-arrays so the rounds vectorize.
// Writes two 53-bit uniforms per block.
constexpr std::size_t kLanes = 16;

void philox_uniform_blocks(std::uint64_t first_block, std::size_t count, PhiloxKey key,
                           std::uint32_t tag, std::uint64_t stream, double* out) {
    const std::uint32_t s0 = static_cast<std::uint32_t>(stream);
    const std::uint32_t s1 = static_cast<std::uint32_t>(stream >> 32);
    std::uint32_t c0[kLanes], c1[kLanes], c2[kLanes], c3[kLanes];
    for (std::size_t base = 0; base < count; base += kLanes) {
        const std::size_t lanes = std::min(kLanes, count - base);
        for (std::size_t i = 0; i < kLanes; ++i) {
            std::uint64_t b = first_block + base + i;
            c0[i] = static_cast<std::uint32_t>(b);
            c1[i] = static_cast<std::uint32_t>(b >> 32) ^ tag;
            c2[i] = s0;
            c3[i] = s1;
        }
        std::uint32_t k0 = key[0], k1 = key[1];
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                k0 += kW0;
                k1 += kW1;
            }
            for (std::size_t i = 0; i < kLanes; ++i) {
                std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c0[i];
                std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c2[i];
                std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1[i] ^ k0;
                std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3[i] ^ k1;
                c1[i] = static_cast<std::uint32_t>(p1);
                c3[i] = static_cast<std::uint32_t>(p0);
                c0[i] = n0;
                c2[i] = n2;
            }
        }
        for (std::size_t i = 0; i < lanes; ++i) {
            out[2 * (base + i)] = to_open_unit(c0[i], c1[i]);
            out[2 * (base + i) + 1] = to_open_unit(c2[i], c3[i]);
        }
    }
}

void uniforms_at(std::uint64_t seed, std::uint64_t stream, NormalDomain domain,
                 std::span<double> out, std::uint64_t first) {
    if (out.empty()) return;
    PhiloxKey key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    const std::uint32_t tag = static_cast<std::uint32_t>(domain) << 16;
    std::size_t j = 0;
    std::uint64_t pos = first;
    double pair[2];
    if (pos & 1) {
        philox_uniform_blocks(pos >> 1, 1, key, tag, stream, pair);
        out[j++] = pair[1];
        ++pos;
    }
    const std::size_t full = (out.size() - j) / 2;
    philox_uniform_blocks(pos >> 1, full, key, tag, stream, out.data() + j);
    j += 2 * full;
    pos += 2 * full;
    if (j < out.size()) {
        philox_uniform_blocks(pos >> 1, 1, key, tag, stream, pair);
        out[j] = pair[0];
    }
}

// Central branch of AS 241, valid for |u - 0.5| <= 0.425.
inline double icdf_central(double u) {
    const double q = u - 0.5;
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
}

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter c, PhiloxKey k) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += kW0;
            k[1] += kW1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kM0, c[0], hi0, lo0);
        mulhilo(kM1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -HUGE_VAL;
        if (p == 1.0) return HUGE_VAL;
        return std::nan("");
    }
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) return icdf_central(p);
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                  3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
                4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
                2.05319162663775882187e+0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
                5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

void fill_normals(std::uint64_t seed, std::uint64_t stream, NormalDomain domain,
                  std::span<double> out, std::uint64_t first) {
    thread_local std::vector<double> u;
    u.resize(out.size());
    uniforms_at(seed, stream, domain, u, first);
    // Branch-free pass for the central region, then the tails one by one.
    const std::size_t n = out.size();
    double* v = out.data();
    const double* w = u.data();
    for (std::size_t i = 0; i < n; ++i) v[i] = icdf_central(w[i]);
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(w[i] - 0.5) > 0.425) v[i] = inverse_normal_cdf(w[i]);
}

void fill_uniforms(std::uint64_t seed, std::uint64_t stream, NormalDomain domain,
                   std::span<double> out, std::uint64_t first) {
    uniforms_at(seed, stream, domain, out, first);
}

}  // namespace gmclab
