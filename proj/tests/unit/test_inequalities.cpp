#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gmclab/error.hpp"
#include "gmclab/inequalities.hpp"

using namespace gmclab;

TEST_CASE("muirhead examples") {
    auto r = check_muirhead(4, 1, 0, 2, 1, 1);
    CHECK(r.rhs == 17.0);
    CHECK(r.lhs == 8.0);
    CHECK(r.holds);
    auto eq = check_muirhead(2.5, 2.5, 0.3, 1.7, 0.8, 1.2);
    CHECK(std::abs(eq.slack) <= eq.tolerance);
    auto same = check_muirhead(3, 7, 0.5, 1.5, 0.5, 1.5);
    CHECK(same.slack == 0.0);
    CHECK_THROWS_AS(check_muirhead(1, 2, 1, 1, 0, 2), PreconditionError);
    CHECK_THROWS_AS(check_muirhead(1, 2, 0, 2, 1, 1.5), PreconditionError);
    CHECK_THROWS_AS(check_muirhead(-1, 2, 0, 2, 1, 1), PreconditionError);
}

TEST_CASE("converse superadditivity examples") {
    auto r = check_converse_super(1, 1, 1, 1);
    CHECK(r.lhs == 4.0);
    CHECK(r.rhs == 4.0);
    CHECK(r.holds);
    auto z = check_converse_super(3.5, 0, 2, 0.5);
    CHECK(z.slack == 0.0);
    CHECK(check_converse_super(2, 5, 3, 0.3).holds);
    CHECK_THROWS_AS(check_converse_super(1, 1, 0, 0.5), PreconditionError);
    CHECK_THROWS_AS(check_converse_super(1, 1, 1, 1.5), PreconditionError);
}

TEST_CASE("converse subadditivity examples") {
    auto r = check_converse_sub(1, 1, 0.25, 0.25);
    CHECK(r.rhs == doctest::Approx(std::numbers::sqrt2).epsilon(1e-15));
    CHECK(r.lhs == -2.0);
    CHECK(r.holds);
    auto z = check_converse_sub(5, 0, 0.3, 0.4);
    CHECK(std::abs(z.slack) <= z.tolerance);
    auto sharp = check_converse_sub_sharp(1, 1, 0.25);
    CHECK(sharp.holds);
    CHECK(sharp.lhs == 2.0);
    CHECK_THROWS_AS(check_converse_sub(1, 1, 0.1, 0.1), PreconditionError);
    CHECK_THROWS_AS(check_converse_sub(1, 1, 0.0, 0.6), PreconditionError);
    CHECK_THROWS_AS(check_converse_sub_sharp(1, 1, 0.6), PreconditionError);
}

TEST_CASE("elementary fuzz suite has no violations") {
    auto sums = fuzz_elementary(20000, 7);
    REQUIRE(sums.size() == 4);
    for (const auto& s : sums) {
        INFO(s.proposition);
        CHECK(s.cases >= 19000);
        CHECK(s.violations == 0);
    }
    CHECK(failures_csv(sums) == "proposition,inputs,lhs,rhs,slack\n");
    CHECK(fuzz_elementary(100, 7)[0].worst_relative_slack == fuzz_elementary(100, 7)[0].worst_relative_slack);
}

TEST_CASE("gauss hermite rule integrates polynomials") {
    auto [x, w] = gauss_hermite_normal(32);
    double m0 = 0, m2 = 0, m4 = 0, m6 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        m0 += w[i];
        m2 += w[i] * x[i] * x[i];
        m4 += w[i] * std::pow(x[i], 4);
        m6 += w[i] * std::pow(x[i], 6);
    }
    CHECK(m0 == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(m2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m4 == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(m6 == doctest::Approx(15.0).epsilon(1e-12));
}

TEST_CASE("gaussian expectation backends") {
    Eigen::Matrix2d c;
    c << 1.0, 0.3, 0.3, 0.5;
    GaussianVectorSpec g(c);
    auto f = [](std::span<const double> v) { return std::exp(v[0] + 2 * v[1]); };
    const double exact = std::exp(0.5 * (1.0 + 4 * 0.5 + 4 * 0.3));
    auto q = gaussian_expectation(g, f, IntegrationMethod::quadrature);
    CHECK(q.value == doctest::Approx(exact).epsilon(1e-12));
    auto m = gaussian_expectation(g, f, IntegrationMethod::quasi_mc);
    CHECK(std::abs(m.value - exact) <= 5 * m.error);
    CHECK(m.error > 0.0);
    Eigen::VectorXd mu(2);
    mu << 1.0, -0.5;
    auto shifted = gaussian_expectation(GaussianVectorSpec(c, mu), f, IntegrationMethod::quadrature);
    CHECK(shifted.value == doctest::Approx(exact).epsilon(1e-12));
    CHECK_THROWS_AS(GaussianVectorSpec(Eigen::MatrixXd::Identity(7, 7)), PreconditionError);
    Eigen::Matrix2d bad;
    bad << 1, 2, 2, 1;
    CHECK_THROWS_AS(GaussianVectorSpec{bad}, PreconditionError);
}

TEST_CASE("slepian closed form example and preconditions") {
    Eigen::Matrix2d x = Eigen::Matrix2d::Identity(), y;
    y << 1, 0.5, 0.5, 1;
    auto r = slepian_verify(GaussianVectorSpec(x), GaussianVectorSpec(y), {{0, 1}}, {}, ExpLinear{{1, 1}});
    CHECK(r.lhs == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
    CHECK(r.rhs == doctest::Approx(std::exp(1.5)).epsilon(1e-15));
    CHECK(r.method == IntegrationMethod::closed_form);
    CHECK(r.holds);
    // Domination fails when the pair is not declared in A.
    CHECK_THROWS_AS(slepian_verify(GaussianVectorSpec(x), GaussianVectorSpec(y), {}, {}, ExpLinear{{1, 1}}),
                    PreconditionError);
    CHECK_THROWS_AS(slepian_verify(GaussianVectorSpec(x), GaussianVectorSpec(y), {{0, 1}}, {{0, 0}}, ExpLinear{{1, 1}}),
                    PreconditionError);
    CHECK_THROWS_AS(slepian_verify(GaussianVectorSpec(x), GaussianVectorSpec(y), {{0, 1}}, {}, ExpLinear{{-1, 1}}),
                    PreconditionError);
    // Within one group of exponent < 1 the mixed derivative is negative: not allowed in A.
    PowerProduct concave{1.0, {0, 0}, {1, 1}, {0.5}};
    CHECK_THROWS_AS(slepian_verify(GaussianVectorSpec(x), GaussianVectorSpec(y), {{0, 1}}, {}, concave),
                    PreconditionError);
    // ... but it may sit in B with the domination reversed.
    auto rev = slepian_verify(GaussianVectorSpec(y), GaussianVectorSpec(x), {}, {{0, 1}}, concave);
    CHECK(rev.holds);
    CHECK(rev.slack > 0.0);
}

TEST_CASE("decorrelation boost factor") {
    auto b = decorrelation_boost(1.0, 1.0, 1.0, 0.5, 1.0, 1.0, 0.0);
    CHECK(b.slepian.holds);
    CHECK(b.boost_ratio == doctest::Approx(std::exp(2.0 * std::log(2.0))).epsilon(1e-13));
    CHECK(b.predicted_factor == doctest::Approx(4.0).epsilon(1e-15));
    // With an uncorrelated field the Slepian ratio itself is the boost factor.
    CHECK(b.slepian.rhs / b.slepian.lhs == doctest::Approx(4.0).epsilon(1e-13));
    CHECK_THROWS_AS(decorrelation_boost(1.0, 1.0, 1.0, 0.5, 1.0, 1.0, 2.0), PreconditionError);
}

TEST_CASE("kahane verifier") {
    Eigen::Matrix2d x = Eigen::Matrix2d::Identity(), y;
    y << 1, 0.5, 0.5, 1;
    GaussianVectorSpec gx(x), gy(y);
    auto r = kahane_verify(gx, gy, {1, 1}, PowerFunctional{2.0});
    CHECK(r.lhs == doctest::Approx(2 * std::exp(1.0) + 2).epsilon(1e-15));
    CHECK(r.rhs == doctest::Approx(2 * std::exp(1.0) + 2 * std::exp(0.5)).epsilon(1e-15));
    CHECK(r.holds);
    auto eq = kahane_verify(gx, gx, {1, 2}, HingeFunctional{1.5});
    CHECK(std::abs(eq.slack) <= eq.tolerance);
    CHECK(kahane_verify(gx, gy, {1, 1}, PowerFunctional{-1.0}).holds);
    CHECK(kahane_verify(gx, gy, {1, 1}, ExpFunctional{-2.0}).holds);
    CHECK_THROWS_WITH_AS(kahane_verify(gx, gy, {1, 1}, PowerFunctional{0.5}), doctest::Contains("concave"),
                         PreconditionError);
    CHECK_THROWS_AS(kahane_verify(gx, gy, {1, 1}, ExpFunctional{1.0}), PreconditionError);
    CHECK_THROWS_AS(kahane_verify(gy, gx, {1, 1}, PowerFunctional{2.0}), PreconditionError);
    CHECK_THROWS_AS(kahane_verify(gx, gy, {0, 0}, PowerFunctional{2.0}), PreconditionError);
}

TEST_CASE("kahane shift constant") {
    CHECK(kahane_shift_constant(0.0, 1.0, 3.0) == 1.0);
    CHECK(kahane_shift_constant(std::log(2.0), 1.0, 2.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(kahane_shift_constant(5.0, 1.7, 1.0) == 1.0);
    CHECK_THROWS_AS(kahane_shift_constant(-1.0, 1.0, 2.0), PreconditionError);
}

TEST_CASE("gaussian suite passes") {
    for (const auto& c : gaussian_suite(3)) {
        INFO(c.name << " value " << c.value << " tol " << c.tolerance << " " << c.detail);
        CHECK(c.passed);
    }
}
