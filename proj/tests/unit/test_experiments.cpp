#include <doctest.h>

#include <cmath>

#include "gmclab/error.hpp"
#include "gmclab/experiments.hpp"

using namespace gmclab;

namespace {

MonteCarloOptions deterministic() {
    MonteCarloOptions o;
    o.zero_noise = true;
    o.workers = 1;
    return o;
}

}  // namespace

TEST_CASE("backend names") {
    CHECK(parse_backend("auto") == Backend::automatic);
    CHECK(parse_backend("dense") == Backend::dense);
    CHECK(to_string(parse_backend("spectral")) == "spectral");
    CHECK_THROWS_AS(parse_backend("fft"), PreconditionError);
}

TEST_CASE("lambda resolution") {
    auto small = build_grid(UHPRect(-0.25, 0.25, 0, 0.5), 1.0 / 16);
    auto big = build_grid(UHPRect(-1, 1, 0, 2), 1.0 / 32, 0);
    MonteCarloOptions o;
    CHECK(resolve_lambda({small}, o) == 0.0);
    CHECK(resolve_lambda({small, big}, o) > 0.0);
    // Wide dense-bound grids get the smallest shift that factorizes.
    auto wide = build_grid(carleson(-1, 1).rect(), 1.0 / 16);
    const double lw = resolve_lambda({wide}, o);
    CHECK(lw > 0.0);
    CHECK_NOTHROW(build_field_model(wide, lw, o));
    CHECK_THROWS_AS(factorize(wide, CovarianceSpec{1.0 / 16, lw - 0.25, kDefaultNugget}), NumericalError);
    o.backend = Backend::dense;
    CHECK(resolve_lambda({big}, o) == 0.0);
    o.lambda_shift = 0.5;
    CHECK(resolve_lambda({big}, o) == 0.5);
    o.lambda_shift = -1.0;
    CHECK_THROWS_AS(resolve_lambda({big}, o), PreconditionError);
}

TEST_CASE("scaling check exact cases") {
    const UHPRect a(-0.25, 0.25, 0, 0.5);
    auto zero = scaling_check(a, 0.5, 0.0, 1.0, 1.0 / 16, 64);
    REQUIRE(zero.find("ratio_matches_r_pow_zeta"));
    CHECK(zero.find("ratio_matches_r_pow_zeta")->passed);
    CHECK(zero.rows[1].estimate == 1.0);

    for (double g : {0.5, 1.0, 1.3}) {
        auto det = scaling_check(a, 0.5, 1.0, g, 1.0 / 16, 4, deterministic());
        CHECK(det.passed());
        CHECK(det.rows[1].estimate == doctest::Approx(std::pow(0.5, 2 - g * g / 2)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(scaling_check(a, 0.5, 0.6, 1.8, 1.0 / 16, 64), PreconditionError);
    CHECK_THROWS_AS(scaling_check(a, 1.5, 0.5, 1.0, 1.0 / 16, 64), PreconditionError);
}

TEST_CASE("scaling check small Monte Carlo run") {
    auto rep = scaling_check(carleson(-0.25, 0.25).rect(), 0.5, 0.8, 1.0, 1.0 / 16, 2000);
    CHECK(rep.passed());
    CHECK(rep.to_csv().rfind("label,scale,estimate,stderr,log_estimate,n_samples\n", 0) == 0);
}

TEST_CASE("divergence scan deterministic slopes") {
    std::vector<double> eps{1.0 / 8, 1.0 / 16, 1.0 / 32};
    auto res = divergence_scan(carleson(-0.5, 0.5), {1.0}, 1.0, eps, 4, deterministic());
    REQUIRE(res.per_p.size() == 1);
    CHECK(std::abs(res.slopes[0]) < 1e-12);
    CHECK(res.per_p[0].passed());
    CHECK_FALSE(res.pc_estimate.has_value());
    CHECK_THROWS_AS(divergence_scan(carleson(-0.5, 0.5), {1.0}, 1.0, {0.25, 0.125}, 4), PreconditionError);
    CHECK_THROWS_AS(divergence_scan(carleson(-0.5, 0.5), {1.0}, 1.0, {0.25, 0.1, 0.05}, 4), PreconditionError);
}

TEST_CASE("threshold crossing fit recovers a planted crossing") {
    const double g = 1.8, x = 0.62;
    std::vector<double> ps{0.4, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75}, s, e;
    for (double p : ps) {
        s.push_back(p > x ? g * g * (p - 0.5) * (p - x) : 0.0);
        e.push_back(0.01);
    }
    auto f = fit_threshold_crossing(ps, s, e, g);
    CHECK(f.pc == doctest::Approx(x).epsilon(1e-3));
    CHECK(f.ci_low <= x);
    CHECK(f.ci_high >= x);
}

TEST_CASE("slice sequence deterministic law") {
    const double g = 1.8;
    auto rep = slice_moment_sequence(carleson(-1, 1), 1.0, g, 4, 4, 0.0, deterministic());
    REQUIRE(rep.rows.size() == 5);
    // rows are sorted by scale, finest slice first
    for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i)
        CHECK(rep.rows[i].estimate / rep.rows[i + 1].estimate ==
              doctest::Approx(std::exp2(g * g / 2 - 1)).epsilon(1e-12));
    REQUIRE(rep.fit);
    CHECK(rep.fit->slope == doctest::Approx(g * g / 2 - 1).epsilon(1e-10));
    CHECK(rep.passed());
}

TEST_CASE("cross moment identities") {
    const double eps = 1.0 / 16;
    UHPRect a(-0.5, 0, 0, 0.5), b(0.25, 0.5, 0, 0.5);
    auto det = cross_moment(a, b, 0.4, 0.6, 1.0, eps, 2, deterministic());
    double wa = deterministic_first_moment(a, 1.0, eps), wb = deterministic_first_moment(b, 1.0, eps);
    CHECK(det.mean == doctest::Approx(std::pow(wa, 0.4) * std::pow(wb, 0.6)).epsilon(1e-12));

    MonteCarloOptions o;
    o.workers = 1;
    auto same = cross_moment(a, a, 0.3, 0.5, 1.0, eps, 500, o);
    auto grid = build_grid(a, eps);
    auto model = build_field_model(grid, 0.0, o);
    auto logs = sample_log_masses(*model, {a}, GmcParams{1.0}, o.seed, 0, 500, 1)[0];
    auto direct = estimate_moment(logs, 0.8, 1.0);
    CHECK(same.mean == direct.mean);
    CHECK(same.std_err == direct.std_err);

    const std::size_t n = 4000;
    auto ind = cross_moment(a, b, 0.4, 0.4, 0.5, eps, n, o, Coupling::independent_fields);
    auto big = build_grid(UHPRect(-0.5, 0.5, 0, 0.5), eps);
    auto bm = build_field_model(big, 0.0, o);
    auto la = sample_log_masses(*bm, {a}, GmcParams{0.5}, o.seed, 0, n, 1)[0];
    auto lb = sample_log_masses(*bm, {b}, GmcParams{0.5}, o.seed ^ 0x9E3779B97F4A7C15ull, 0, n, 1)[0];
    auto ea = estimate_moment(la, 0.4, 0.5), eb = estimate_moment(lb, 0.4, 0.5);
    const double prod = ea.mean * eb.mean;
    const double se = std::hypot(ind.std_err, prod * std::hypot(ea.std_err / ea.mean, eb.std_err / eb.mean));
    CHECK(std::abs(ind.mean - prod) <= 3 * se);
}

TEST_CASE("decorrelation check preconditions and a small run") {
    UHPRect ql(-0.5, 0, 0, 0.5), qr(0.25, 0.5, 0, 0.5);
    CHECK_THROWS_AS(decorrelation_check(ql, qr, 0.4, 0.4, 1.0, 0.5, 1.0 / 16, 10), PreconditionError);
    MonteCarloOptions o;
    o.backend = Backend::dense;
    auto rep = decorrelation_check(ql, qr, 0.4, 0.4, 1.0, 0.25, 1.0 / 16, 2000, o,
                                   UHPRect(-0.5, 0.5, 0, 0.5));
    CHECK(rep.passed());
    REQUIRE(rep.find("cross_le_bound"));
}

TEST_CASE("sokoban check geometry and deterministic symmetry") {
    UHPRect ql(-0.5, 0, 0, 0.5);
    auto det = sokoban_check(ql, 8, 0.4, 0.4, 1.0, 1.0 / 16, 2, deterministic());
    REQUIRE(det.find("zero_noise_mirror_symmetry"));
    CHECK(det.find("zero_noise_mirror_symmetry")->passed);
    CHECK(det.find("reflection_dominates_adjacent")->passed);
    CHECK(det.find("move_away_1_to_2"));
    CHECK(det.find("move_away_3_to_4"));
    CHECK_THROWS_AS(sokoban_check(UHPRect(-0.5, 0, 0, 0.25), 4, 0.4, 0.4, 1.0, 1.0 / 16, 2), PreconditionError);
}
