#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gmclab/error.hpp"
#include "gmclab/gmc.hpp"
#include "gmclab/stats.hpp"

using namespace gmclab;

namespace {

FieldModelPtr dense_model(const UHPRect& region, double eps) {
    auto g = build_grid(region, eps);
    return make_dense_model(factorize(g, {eps, 0.0, kDefaultNugget}));
}

}  // namespace

TEST_CASE("gamma validation") {
    CHECK_NOTHROW(GmcParams{1.0}.validate());
    CHECK_THROWS_AS(GmcParams{0.0}.validate(), PreconditionError);
    CHECK_THROWS_AS(GmcParams{2.0}.validate(), PreconditionError);
    CHECK_THROWS_WITH_AS(GmcParams{2.5}.validate(), doctest::Contains("(0,2)"), PreconditionError);
}

TEST_CASE("cell weight closed forms") {
    CHECK(cell_weight(UHPRect(0, 1, 0, 1), 1.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(cell_weight(UHPRect(0, 1, 0.5, 1), std::sqrt(2.0)) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(cell_weight(UHPRect(0, 1, 0, 1), 1e-4) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(cell_weight(UHPRect(0, 3, 1, 4), 1.0) == doctest::Approx(3.0 * 2.0 * (2.0 - 1.0)).epsilon(1e-14));
    // gamma > sqrt 2 away from the boundary: y^{-gamma^2/2} with exponent a = 1 - gamma^2/2 < 0.
    const double g = 1.8, a = 1.0 - 0.5 * g * g;
    CHECK(cell_weight(UHPRect(0, 1, 0.25, 0.5), g) ==
          doctest::Approx((std::pow(0.5, a) - std::pow(0.25, a)) / a).epsilon(1e-14));
    CHECK_THROWS_AS(cell_weight(UHPRect(0, 1, 0, 1), std::sqrt(2.0)), PreconditionError);
    CHECK_THROWS_AS(cell_weight(UHPRect(0, 1, 0, 1), 1.8), PreconditionError);
}

TEST_CASE("bottom row floor for gamma at least sqrt 2") {
    const double eps = 0.125;
    UHPRect bottom(0, eps, 0, eps);
    CHECK(grid_cell_weight(bottom, GmcParams{1.0}, eps) == cell_weight(bottom, 1.0));
    CHECK(grid_cell_weight(bottom, GmcParams{1.8}, eps) == cell_weight(UHPRect(0, eps, eps / 2, eps), 1.8));
    UHPRect upper(0, eps, eps, 2 * eps);
    CHECK(grid_cell_weight(upper, GmcParams{1.8}, eps) == cell_weight(upper, 1.8));
}

TEST_CASE("deterministic field mass is the weight sum") {
    const double eps = 1.0 / 16;
    auto g = build_grid(UHPRect(-1, 1, 0, 1), eps);
    CovarianceSpec spec{eps, 0.0, kDefaultNugget};
    auto s = sample_field(*make_deterministic_model(g, spec), 1, 0);
    auto m = gmc_log_mass(s, UHPRect(-1, 1, 0, 1), GmcParams{1.0});
    CHECK(std::exp(m.log_mass) == doctest::Approx(4.0).epsilon(1e-13));
    // The zero-noise hook keeps the variances, so the mass carries the renormalization.
    auto z = sample_field(*make_zero_noise_model(g, spec), 1, 0);
    RegionEvaluator ev(g, UHPRect(-1, 1, 0, 1), GmcParams{1.0}, *z.variances);
    CHECK(ev.log_weight_sum() == doctest::Approx(m.log_mass).epsilon(1e-14));
    CHECK(ev.log_mass(z.values) < ev.log_weight_sum());
}

TEST_CASE("alignment errors name the edge") {
    auto g = build_grid(UHPRect(-1, 1, 0, 1), 0.25);
    CHECK_NOTHROW(check_alignment(g, UHPRect(-0.5, 0.25, 0.25, 1)));
    CHECK_THROWS_WITH_AS(check_alignment(g, UHPRect(-0.4, 0.25, 0.25, 1)), doctest::Contains("x0"),
                         PreconditionError);
    CHECK_THROWS_WITH_AS(check_alignment(g, UHPRect(-0.5, 0.3, 0.25, 1)), doctest::Contains("x1"),
                         PreconditionError);
    CHECK_THROWS_WITH_AS(check_alignment(g, UHPRect(-0.5, 0.25, 0.1, 1)), doctest::Contains("y0"),
                         PreconditionError);
    CHECK_THROWS_WITH_AS(check_alignment(g, UHPRect(-0.5, 0.25, 0.25, 0.9)), doctest::Contains("y1"),
                         PreconditionError);
    CHECK_THROWS_AS(check_alignment(g, UHPRect(-0.5, 1.25, 0, 1)), PreconditionError);
}

TEST_CASE("additivity and monotonicity per replicate") {
    auto q = carleson(-0.25, 0.25);
    auto m = dense_model(q.rect(), 1.0 / 16);
    auto w = whitney_split(q);
    for (double gamma : {0.5, 1.0, 1.8}) {
        GmcParams params{gamma};
        for (std::uint64_t id = 0; id < 20; ++id) {
            auto s = sample_field(*m, 7, id);
            auto parts = gmc_masses_multi(s, {w.left, w.right, w.upper, q.rect()}, params);
            double sum = std::exp(parts[0].log_mass) + std::exp(parts[1].log_mass) + std::exp(parts[2].log_mass);
            CHECK(sum == doctest::Approx(std::exp(parts[3].log_mass)).epsilon(1e-12));
            for (int i = 0; i < 3; ++i) CHECK(parts[i].log_mass <= parts[3].log_mass);
            auto single = gmc_log_mass(s, w.upper, params);
            CHECK(single.log_mass == parts[2].log_mass);
        }
    }
}

TEST_CASE("normalization of the renormalized exponential") {
    const UHPRect region(-0.25, 0.25, 0, 0.5);
    auto m = dense_model(region, 1.0 / 16);
    for (double gamma : {0.5, 1.0}) {
        GmcParams params{gamma};
        RegionEvaluator ev(m->grid(), region, params, *m->variances());
        const std::size_t n = 10000;
        auto logs = map_samples<double>(*m, 11, 0, n, 0, [&](const FieldSample& s) { return ev.log_mass(s.values); });
        std::vector<double> v(n), sq(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = std::exp(logs[i]);
        const double mean = pairwise_sum(v) / n;
        for (std::size_t i = 0; i < n; ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
        const double se = std::sqrt(pairwise_sum(sq) / (n - 1) / n);
        CHECK(std::abs(mean - std::exp(ev.log_weight_sum())) < 5 * se);
    }
}
