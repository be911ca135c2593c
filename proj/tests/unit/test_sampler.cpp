#include <doctest.h>

#include <cmath>

#include "gmclab/error.hpp"
#include "gmclab/sampler.hpp"
#include "gmclab/spectral.hpp"

using namespace gmclab;

namespace {

FieldModelPtr dense_model(const UHPRect& region, double eps, double lambda) {
    auto g = build_grid(region, eps);
    return make_dense_model(factorize(g, {eps, lambda, kDefaultNugget}));
}

// Entrywise check of the empirical covariance against `target` within 5 standard errors.
void check_covariance(const FieldModel& model, const Eigen::MatrixXd& target, std::size_t reps) {
    const std::size_t n = model.grid().cell_count();
    auto samples = sample_batch(model, 99, 0, reps, 1);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
    for (const auto& s : samples) {
        Eigen::Map<const Eigen::VectorXd> v(s.values.data(), n);
        sum += v * v.transpose();
        mean += v;
    }
    sum /= double(reps);
    mean /= double(reps);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::abs(mean(i)) < 5 * std::sqrt(target(i, i) / reps));
        for (std::size_t j = 0; j < n; ++j) {
            // Var(X_i X_j) = C_ii C_jj + C_ij^2 for centred Gaussians.
            double se = std::sqrt((target(i, i) * target(j, j) + target(i, j) * target(i, j)) / reps);
            CHECK(std::abs(sum(i, j) - target(i, j)) < 5 * se);
        }
    }
}

}  // namespace

TEST_CASE("dense sampler determinism and zero hook") {
    auto m = dense_model(UHPRect(-0.25, 0.25, 0, 0.5), 0.125, 0.0);
    auto a = sample_field(*m, 5, 17);
    auto b = sample_field(*m, 5, 17);
    CHECK(a.values == b.values);
    CHECK(a.replicate_id == 17);
    CHECK(a.values.size() == m->grid().cell_count());
    CHECK(*a.variances == *m->variances());
    auto z = sample_field(*make_zero_noise_model(*m), 5, 17);
    for (double v : z.values) CHECK(v == 0.0);
    CHECK(sample_field(*m, 5, 18).values != a.values);
}

TEST_CASE("batch equals single calls independent of workers") {
    auto m = dense_model(UHPRect(-0.25, 0.25, 0, 0.5), 0.125, 0.0);
    auto one = sample_batch(*m, 3, 10, 100, 1);
    auto eight = sample_batch(*m, 3, 10, 100, 8);
    REQUIRE(one.size() == 100);
    for (std::size_t k = 0; k < 100; ++k) {
        CHECK(one[k].replicate_id == 10 + k);
        CHECK(one[k].values == eight[k].values);
    }
    CHECK(sample_batch(*m, 3, 10, 1, 4)[0].values == sample_field(*m, 3, 10).values);
    CHECK_THROWS_AS(sample_batch(*m, 3, 0, 0, 1), PreconditionError);
}

TEST_CASE("dense sampler covariance on a 4-cell grid") {
    auto g = build_grid(UHPRect(0, 0.5, 0, 0.5), 0.25);
    CovarianceSpec s{0.25, 0.0, kDefaultNugget};
    auto m = make_dense_model(factorize(g, s));
    check_covariance(*m, assemble_covariance(g, s), 10000);
}

TEST_CASE("replicates are uncorrelated") {
    auto m = dense_model(UHPRect(0, 0.5, 0, 0.5), 0.25, 0.0);
    const std::size_t n = 10000;
    auto samples = sample_batch(*m, 11, 0, 2 * n, 1);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t k = 0; k < n; ++k) {
        double x = samples[2 * k].values[1], y = samples[2 * k + 1].values[1];
        sxy += x * y;
        sxx += x * x;
        syy += y * y;
    }
    double corr = sxy / std::sqrt(sxx * syy);
    CHECK(std::abs(corr) < 5.0 / std::sqrt(double(n)));
}

TEST_CASE("spectral embedding reproduces the dense covariance") {
    UHPRect region(-0.5, 0.5, 0, 0.5);
    double eps = 0.125;
    auto g = build_grid(region, eps);
    double lam = spectral_min_lambda(g) + 0.3;
    CovarianceSpec s{eps, lam, kDefaultNugget};
    auto implied = spectral_implied_covariance(g, s);
    auto dense = assemble_covariance(g, s);
    const std::size_t n = g.cell_count();
    double worst = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) worst = std::max(worst, std::abs(implied[i * n + j] - dense(i, j)));
    CHECK(worst < 1e-10);

    // also with the grid lifted off the boundary
    auto lifted = build_grid(UHPRect(0, 0.5, 0.25, 0.75), eps);
    CovarianceSpec s2{eps, spectral_min_lambda(lifted), kDefaultNugget};
    auto implied2 = spectral_implied_covariance(lifted, s2);
    auto dense2 = assemble_covariance(lifted, s2);
    const std::size_t n2 = lifted.cell_count();
    worst = 0;
    for (std::size_t i = 0; i < n2; ++i)
        for (std::size_t j = 0; j < n2; ++j) worst = std::max(worst, std::abs(implied2[i * n2 + j] - dense2(i, j)));
    CHECK(worst < 1e-10);

    CHECK_THROWS_AS(make_spectral_model(g, {eps, 0.0, kDefaultNugget}), PreconditionError);
}

TEST_CASE("spectral sampler statistics and determinism") {
    auto g = build_grid(UHPRect(0, 0.5, 0, 0.5), 0.25);
    CovarianceSpec s{0.25, spectral_min_lambda(g) + 0.5, kDefaultNugget};
    SpectralInfo info;
    auto m = make_spectral_model(g, s, &info);
    CHECK(info.global_shift >= 0.0);
    CHECK(info.truncation > 0.0);
    check_covariance(*m, assemble_covariance(g, s), 10000);

    // odd first id, pairs split across calls
    auto a = sample_batch(*m, 2, 3, 7, 1);
    auto b = sample_batch(*m, 2, 3, 7, 8);
    for (std::size_t k = 0; k < 7; ++k) {
        CHECK(a[k].values == b[k].values);
        CHECK(a[k].values == sample_field(*m, 2, 3 + k).values);
    }
}
