#include <doctest.h>

#include <cmath>
#include <vector>

#include "gmclab/rng.hpp"

using namespace gmclab;

TEST_CASE("philox known answers") {
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) ==
          PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("inverse normal cdf against reference values") {
    struct Case { double p, z; };
    const Case cases[] = {
        {1e-300, -37.0470962993612},   {1e-20, -9.262340089798409},
        {1e-08, -5.612001244174789},   {0.001, -3.090232306167813},
        {0.02425, -1.972961051311885}, {0.3, -0.5244005127080409},
        {0.5, 0.0},                    {0.500000000001, 2.5065728237018607e-12},
        {0.7, 0.5244005127080407},     {0.97575, 1.972961051311885},
        {0.999, 3.090232306167813},    {0.9999999999, 6.361340889697422},
    };
    for (const auto& c : cases) {
        double z = inverse_normal_cdf(c.p);
        CHECK(std::abs(z - c.z) <= 1e-13 * std::max(1.0, std::abs(c.z)) + 1e-25);
    }
    CHECK(std::isinf(inverse_normal_cdf(0.0)));
    CHECK(std::isnan(inverse_normal_cdf(1.5)));
}

TEST_CASE("normal streams are reproducible and addressable") {
    std::vector<double> a(101), b(101), c(50);
    fill_normals(42, 7, NormalDomain::dense_field, a);
    fill_normals(42, 7, NormalDomain::dense_field, b);
    CHECK(a == b);
    fill_normals(42, 7, NormalDomain::dense_field, c, 51);
    for (int i = 0; i < 50; ++i) CHECK(c[i] == a[51 + i]);
    fill_normals(42, 7, NormalDomain::spectral_field, b);
    CHECK(a != b);
    fill_normals(43, 7, NormalDomain::dense_field, b);
    CHECK(a != b);
}

TEST_CASE("normal moments") {
    const std::size_t n = 200000;
    std::vector<double> x(n);
    fill_normals(1, 0, NormalDomain::synthetic, x);
    double m1 = 0, m2 = 0, m4 = 0;
    for (double v : x) {
        m1 += v;
        m2 += v * v;
        m4 += v * v * v * v;
    }
    m1 /= n;
    m2 /= n;
    m4 /= n;
    CHECK(std::abs(m1) < 5 * std::sqrt(1.0 / n));
    CHECK(std::abs(m2 - 1) < 5 * std::sqrt(2.0 / n));
    CHECK(std::abs(m4 - 3) < 5 * std::sqrt(96.0 / n));
}
