#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "gmclab/error.hpp"
#include "gmclab/kernel.hpp"

using namespace gmclab;

TEST_CASE("kernel values") {
    CovarianceSpec s{1e-3, 0.0, kDefaultNugget};
    // |z - conj z| = 2 Im z
    CHECK(kernel_value({0, 1}, {0, 1}, s) == doctest::Approx(-std::log(1e-3) - std::log(2.0)).epsilon(1e-15));
    CHECK(kernel_value({0, 1}, {0, 1}, s) == doctest::Approx(6.2146080984).epsilon(1e-10));
    double expect = -std::log(0.3) - std::log(std::sqrt(0.09 + 1.0));
    CHECK(kernel_value({0, 0.5}, {0.3, 0.5}, s) == doctest::Approx(expect).epsilon(1e-14));
    CHECK(kernel_value({0, 0.5}, {0.3, 0.5}, s) == doctest::Approx(1.1609).epsilon(1e-4));
    CovarianceSpec shifted{1e-3, 0.7, 0.0};
    CHECK(kernel_value({0, 0.5}, {0.3, 0.5}, shifted) == doctest::Approx(expect + 0.7).epsilon(1e-14));
    CHECK_THROWS_AS(kernel_value({NAN, 0}, {0, 1}, s), PreconditionError);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0, 2);
    for (int i = 0; i < 200; ++i) {
        Point z{u(rng) - 1, u(rng)}, w{u(rng) - 1, u(rng)};
        CHECK(kernel_value(z, w, s) == kernel_value(w, z, s));
    }
}

TEST_CASE("spec validation") {
    CHECK_THROWS_AS((CovarianceSpec{0.0, 0.0, 1.0}.validate()), PreconditionError);
    CHECK_THROWS_AS((CovarianceSpec{0.1, -1.0, 1.0}.validate()), PreconditionError);
    CHECK_THROWS_AS((CovarianceSpec{0.1, INFINITY, 1.0}.validate()), PreconditionError);
}

TEST_CASE("grid construction") {
    auto g = build_grid(UHPRect(0, 1, 0, 1), 0.25);
    CHECK(g.cell_count() == 16);
    CHECK(g.center(0).y == 0.125);
    CHECK(g.center(0).x == 0.125);
    CHECK(g.center(5).x == 0.375);
    CHECK(g.center(5).y == 0.375);
    CHECK(g.cell(15) == UHPRect(0.75, 1, 0.75, 1));
    CHECK(build_grid(UHPRect(-1, 1, 0, 1), 0.125).cell_count() == 128);
    CHECK_THROWS_AS(build_grid(UHPRect(0, 1, 0, 0.1), 0.25), PreconditionError);
    CHECK_THROWS_AS(build_grid(UHPRect(0, 1, 0, 1), 0.3), PreconditionError);
    CHECK_THROWS_AS(build_grid(UHPRect(-2, 2, 0, 4), 1.0 / 64), PreconditionError);
    auto lifted = build_grid(UHPRect(0, 1, 0.5, 1), 0.25);
    CHECK(lifted.row_offset() == 2);
    CHECK(lifted.center(0).y == 0.625);
}

TEST_CASE("assembled covariance is bitwise symmetric") {
    auto g = build_grid(UHPRect(-0.5, 0.5, 0, 0.5), 0.125);
    auto m = assemble_covariance(g, {0.125, 0.3, kDefaultNugget});
    CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
    auto v = cell_variances(g, {0.125, 0.3, kDefaultNugget});
    for (std::size_t i = 0; i < g.cell_count(); ++i) CHECK(m(i, i) == v[i]);
}

TEST_CASE("diagonal law under refinement") {
    // Refinement by 3 keeps the coarse centres; diagonals differ by ln(eps_c / eps_f).
    UHPRect region(0, 1, 0, 1);
    double ec = 1.0 / 4, ef = 1.0 / 12;
    auto gc = build_grid(region, ec);
    auto gf = build_grid(region, ef);
    CovarianceSpec sc{ec, 0.2, kDefaultNugget}, sf{ef, 0.2, kDefaultNugget};
    auto vc = cell_variances(gc, sc);
    auto vf = cell_variances(gf, sf);
    for (std::size_t i = 0; i < gc.cell_count(); ++i) {
        std::size_t ix = i % gc.nx(), iy = i / gc.nx();
        std::size_t j = gf.index(3 * ix + 1, 3 * iy + 1);
        CHECK(gf.center(j).x == doctest::Approx(gc.center(i).x).epsilon(1e-15));
        CHECK(gf.center(j).y == doctest::Approx(gc.center(i).y).epsilon(1e-15));
        CHECK(vf[j] - vc[i] == doctest::Approx(std::log(ec / ef)).epsilon(1e-13));
    }
}

TEST_CASE("factorization small cases") {
    auto g1 = build_grid(UHPRect(0, 0.5, 0, 0.5), 0.5);
    CovarianceSpec s{0.5, 0.0, kDefaultNugget};
    auto f1 = factorize(g1, s);
    double var = kernel_value(g1.center(0), g1.center(0), s) + s.nugget;
    CHECK(f1.lower(0, 0) == doctest::Approx(std::sqrt(var)).epsilon(1e-15));
    CHECK(f1.diag_variances[0] == var);

    auto g2 = build_grid(UHPRect(0, 1, 0, 0.5), 0.5);
    auto f2 = factorize(g2, s);
    double s1 = f2.diag_variances[0], s2 = f2.diag_variances[1];
    double k12 = kernel_value(g2.center(0), g2.center(1), s);
    double l11 = std::sqrt(s1), l21 = k12 / l11, l22 = std::sqrt(s2 - l21 * l21);
    CHECK(f2.lower(0, 0) == doctest::Approx(l11).epsilon(1e-14));
    CHECK(f2.lower(1, 0) == doctest::Approx(l21).epsilon(1e-14));
    CHECK(f2.lower(1, 1) == doctest::Approx(l22).epsilon(1e-14));
    CHECK(f2.min_pivot == doctest::Approx(std::min(l11 * l11, l22 * l22)).epsilon(1e-14));
}

TEST_CASE("regression fixture factorizes without jitter") {
    auto g = build_grid(UHPRect(-0.2, 0.2, 0, 0.4), 0.05);
    CovarianceSpec s{0.05, 0.0, kDefaultNugget};
    auto f = factorize(g, s);
    CHECK(f.jitter_used == 0.0);
    CHECK(f.min_pivot > 0.0);
    Eigen::MatrixXd l = f.lower_matrix();
    Eigen::MatrixXd m = assemble_covariance(g, s);
    CHECK((l * l.transpose() - m).norm() / m.norm() < 1e-8);
}

TEST_CASE("bare clamp kernel is indefinite") {
    // Without the nugget the same fixture is not PSD; jitter up to 1e-6 cannot fix it.
    auto g = build_grid(UHPRect(-0.2, 0.2, 0, 0.4), 0.05);
    CHECK_THROWS_AS(factorize(g, {0.05, 0.0, 0.0}), NumericalError);
}

TEST_CASE("psd shift selection") {
    auto g = build_grid(UHPRect(-0.5, 0.5, 0, 0.5), 0.125);
    auto sel = validate_psd_shift(g, {0.0, 0.5, 1.0}, 1.0, 2.0);
    CHECK(sel.lambda == 0.0);
    CHECK(sel.distortion == 1.0);

    auto g2 = build_grid(UHPRect(-0.5, 0.5, 0, 0.5), 0.125);
    auto sel2 = validate_psd_shift(g2, {std::log(2.0)}, 1.0, 2.0);
    CHECK(sel2.distortion == doctest::Approx(2.0).epsilon(1e-15));

    // A wide, flat domain: the log kernel goes strongly negative at large separations.
    auto wide = build_grid(UHPRect(-16, 16, 0, 0.5), 0.5);
    CHECK_THROWS_AS(validate_psd_shift(wide, {0.0, 0.5, 1.0}, 1.0, 0.5), NumericalError);
    auto ok = validate_psd_shift(wide, {0.0, 0.5, 1.0, 2.0, 4.0, 8.0}, 1.0, 0.5);
    CHECK(ok.lambda > 1.0);

    CHECK_THROWS_AS(validate_psd_shift(g, {}, 1.0, 2.0), PreconditionError);
    CHECK_THROWS_AS(validate_psd_shift(g, {1.0, 0.0}, 1.0, 2.0), PreconditionError);
}

TEST_CASE("factor cache round trip") {
    auto dir = std::filesystem::temp_directory_path() / "gmclab_cache_test";
    std::filesystem::remove_all(dir);
    auto g = build_grid(UHPRect(-0.25, 0.25, 0, 0.5), 0.125);
    CovarianceSpec s{0.125, 0.1, kDefaultNugget};
    auto a = factorize(g, s, {dir.string()});
    CHECK(std::filesystem::exists(dir));
    auto b = factorize(g, s, {dir.string()});
    CHECK(a.packed_lower == b.packed_lower);
    CHECK(a.min_pivot == b.min_pivot);
    CHECK(factor_cache_key(g, s) != factor_cache_key(g, {0.125, 0.2, kDefaultNugget}));
    std::filesystem::remove_all(dir);
}
