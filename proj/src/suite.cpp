#include "gmclab/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include "gmclab/error.hpp"
#include "gmclab/experiments.hpp"
#include "gmclab/format.hpp"
#include "gmclab/inequalities.hpp"
#include "gmclab/moments.hpp"
#include "gmclab/rng.hpp"

namespace gmclab {

namespace {

using Clock = std::chrono::steady_clock;

Assertion make_assertion(const std::string& name, bool passed, double value, double target,
                         double tolerance, const std::string& detail, bool diagnostic = false) {
    Assertion a;
    a.name = name;
    a.passed = passed;
    a.value = value;
    a.target = target;
    a.tolerance = tolerance;
    a.detail = detail;
    a.diagnostic = diagnostic;
    return a;
}

Assertion within(const std::string& name, double value, double target, double tol,
                 const std::string& detail, bool diagnostic = false) {
    return make_assertion(name, std::abs(value - target) <= tol, value, target, tol, detail, diagnostic);
}

void append_report(CriterionResult& res, const DecompositionReport& rep, const std::string& prefix) {
    for (auto a : rep.assertions) {
        a.name = prefix + a.name;
        res.assertions.push_back(std::move(a));
    }
}

MonteCarloOptions mc_options(const SuiteOptions& o) {
    MonteCarloOptions m;
    m.seed = o.seed;
    m.workers = o.workers;
    m.cache_dir = o.cache_dir;
    return m;
}

std::string fmt(double v) { return format_double(v); }

std::vector<double> dyadic(int k0, int k1) {
    std::vector<double> out;
    for (int k = k0; k <= k1; ++k) out.push_back(std::ldexp(1.0, -k));
    return out;
}

// Scaling-exponent algebra on random gamma.
void run_c1(CriterionResult& res, const SuiteOptions& o) {
    const int n_gamma = 100, n_grid = 200;
    std::vector<double> u(n_gamma);
    fill_uniforms(o.seed, 1, NormalDomain::synthetic, u);
    double worst_root = 0.0;
    std::size_t mismatches = 0, crude_violations = 0;
    std::string csv = "gamma,zeta_half_minus_1,zeta_pc_minus_1,sign_mismatches\n";
    for (int i = 0; i < n_gamma; ++i) {
        const double g = 0.05 + 1.9 * u[i];
        const double pc = 2.0 / (g * g);
        const double e1 = zeta_bar(0.5, g) - 1.0;
        const double e2 = zeta_bar(pc, g) - 1.0;
        worst_root = std::max({worst_root, std::abs(e1), std::abs(e2)});
        // 1 - zeta_bar(p) < 0 exactly on (1/2, pc); roots excluded from the grid.
        const double lo = -0.5, hi = std::max(pc, 0.5) + 1.0;
        std::size_t local = 0;
        for (int j = 0; j < n_grid; ++j) {
            const double p = lo + (hi - lo) * (j + 0.5) / n_grid;
            if (std::abs(p - 0.5) < 1e-9 || std::abs(p - pc) < 1e-9) continue;
            const bool negative = 1.0 - zeta_bar(p, g) < 0.0;
            const bool expected = p > 0.5 && p < pc;
            if (negative != expected) ++local;
        }
        mismatches += local;
        auto th = threshold_pc(g);
        if (th.crude_bound && *th.crude_bound > th.pc) ++crude_violations;
        csv += fmt(g) + "," + fmt(e1) + "," + fmt(e2) + "," + std::to_string(local) + "\n";
    }
    res.assertions.push_back(make_assertion("roots_at_half_and_pc", worst_root <= 1e-12, worst_root, 0.0,
                                            1e-12, "max |zeta_bar(root) - 1| over 100 gamma"));
    res.assertions.push_back(make_assertion("sign_pattern", mismatches == 0, double(mismatches), 0.0, 0.0,
                                            "grid points where 1 - zeta_bar < 0 disagrees with p in (1/2, pc)"));
    res.assertions.push_back(make_assertion("crude_bound_at_most_pc", crude_violations == 0,
                                            double(crude_violations), 0.0, 0.0,
                                            "reported crude bound never exceeds pc"));
    res.csv.emplace_back("c1_zeta.csv", csv);
    res.summary = "max root error " + fmt(worst_root) + ", sign mismatches " + std::to_string(mismatches);
}

// Deterministic first moments against closed forms.
void run_c2(CriterionResult& res, const SuiteOptions&) {
    const UHPRect base(-1, 1, 0, 1);
    const auto eps = dyadic(4, 10);
    std::string csv = "label,epsilon,value,target\n";
    std::vector<double> m;
    for (double e : eps) {
        m.push_back(deterministic_first_moment(base, 1.0, e));
        csv += "base," + fmt(e) + "," + fmt(m.back()) + ",4\n";
    }
    // First-order Richardson on the two finest scales.
    const double extrap = 2.0 * m.back() - m[m.size() - 2];
    res.assertions.push_back(within("extrapolated_base_moment", extrap, 4.0, 1e-3,
                                    "gamma=1 on [-1,1]x[0,1], eps=2^-4..2^-10"));
    double worst = 0.0;
    for (double v : m) worst = std::max(worst, std::abs(v - 4.0));
    res.assertions.push_back(within("every_scale_base_moment", 4.0 + worst, 4.0, 1e-3,
                                    "max |E_eps - 4| over all scales"));
    const double cube = deterministic_first_moment(carleson(-1, 1).rect(), 1.0, eps.back());
    csv += "cube," + fmt(eps.back()) + "," + fmt(cube) + "," + fmt(4.0 * std::sqrt(2.0)) + "\n";
    res.assertions.push_back(within("full_cube_moment", cube, 4.0 * std::sqrt(2.0), 1e-10,
                                    "gamma=1 on [-1,1]x[0,2]"));
    const int n_max = 8;
    auto slices = horizontal_slices(carleson(-1, 1), n_max);
    const double target = 2.0 * std::log(2.0);
    double worst_slice = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        double v = deterministic_first_moment(slices[n], std::sqrt(2.0), std::ldexp(1.0, -(n_max + 2)));
        worst_slice = std::max(worst_slice, std::abs(v - target));
        csv += "slice_" + std::to_string(n) + "," + fmt(std::ldexp(1.0, -(n_max + 2))) + "," + fmt(v) + "," +
               fmt(target) + "\n";
    }
    res.assertions.push_back(within("slice_law_constant", target + worst_slice, target, 1e-12,
                                    "gamma=sqrt2, E[mu(L_{1,n})] = 2 ln 2 for n=0..8"));
    res.csv.emplace_back("c2_first_moments.csv", csv);
    res.summary = "extrapolated " + fmt(extrap) + " (target 4), slice error " + fmt(worst_slice);
}

// Exact scaling relation by Monte Carlo.
void run_c3(CriterionResult& res, const SuiteOptions& o) {
    const double eps = o.reduced ? std::ldexp(1.0, -5) : std::ldexp(1.0, -7);
    const std::size_t n = o.reduced ? 200 : 20000;
    auto rep = scaling_check(carleson(-1, 1).rect(), 0.5, 0.8, 1.0, eps, n, mc_options(o));
    append_report(res, rep, "");
    res.csv.emplace_back("c3_scaling.csv", rep.to_csv());
    const auto* a = rep.find("ratio_matches_r_pow_zeta");
    for (const auto& row : rep.rows)
        if (row.label == "ratio")
            res.summary = "ratio " + fmt(row.estimate) + " +- " + fmt(row.std_err) + ", target " + fmt(a->target) +
                          ", z " + fmt(a->value);
}

// Moment threshold localization: divergence scan and tail index.
void run_c4(CriterionResult& res, const SuiteOptions& o) {
    const double gamma = 1.8;
    const double pc = 2.0 / (gamma * gamma);
    const std::vector<double> ps{0.4, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75};
    const auto eps = o.reduced ? dyadic(4, 6) : dyadic(5, 9);
    const std::size_t n = o.reduced ? 500 : 100000;
    auto scan = divergence_scan(carleson(-0.125, 0.125), ps, gamma, eps, n, mc_options(o));
    std::string slopes = "p,slope,slope_stderr,predicted\n";
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const double pred = predicted_scan_slope(ps[i], gamma);
        res.assertions.push_back(within("slope_p" + fmt(ps[i]), scan.slopes[i], pred, 0.1,
                                        "slope of log E[mu^p] vs log(1/eps)"));
        slopes += fmt(ps[i]) + "," + fmt(scan.slopes[i]) + "," + fmt(scan.slope_errors[i]) + "," + fmt(pred) + "\n";
        res.csv.emplace_back("c4_scan_p" + fmt(ps[i]) + ".csv", scan.per_p[i].to_csv());
    }
    res.csv.emplace_back("c4_slopes.csv", slopes);
    const double pc_hat = scan.pc_estimate.value_or(std::nan(""));
    res.assertions.push_back(within("pc_zero_crossing", pc_hat, pc, 0.08,
                                    "crossing fit, CI [" + fmt(scan.pc_ci_low) + "," + fmt(scan.pc_ci_high) + "]"));

    const auto& logs = scan.finest_log_masses;
    std::size_t k = default_hill_k(logs.size());
    if (o.reduced) k = std::min(k, logs.size() / 10);
    auto hill = tail_index(logs, k);
    res.assertions.push_back(within("hill_alpha", hill.alpha_hat, pc, 0.15, "k=" + std::to_string(k)));
    res.assertions.push_back(make_assertion("hill_ci_covers_pc", hill.ci_low <= pc && pc <= hill.ci_high,
                                            hill.alpha_hat, pc, 0.0,
                                            "CI [" + fmt(hill.ci_low) + "," + fmt(hill.ci_high) + "]"));
    auto ks = default_stability_ks(logs.size());
    if (o.reduced) {
        std::erase_if(ks, [&](std::size_t v) { return v > logs.size() / 10 || v < 2; });
        if (ks.empty()) ks.push_back(k);
    }
    auto stab = hill_stability(logs, ks);
    res.assertions.push_back(make_assertion("hill_stable_across_k", stab.stable, stab.stable ? 1.0 : 0.0, 1.0,
                                            0.0, "all Hill CIs share a point", true));
    std::string hcsv = "k,alpha_hat,ci_low,ci_high\n";
    for (const auto& e : stab.estimates)
        hcsv += std::to_string(e.k) + "," + fmt(e.alpha_hat) + "," + fmt(e.ci_low) + "," + fmt(e.ci_high) + "\n";
    hcsv += std::to_string(hill.k) + "," + fmt(hill.alpha_hat) + "," + fmt(hill.ci_low) + "," + fmt(hill.ci_high) + "\n";
    res.csv.emplace_back("c4_hill.csv", hcsv);
    res.summary = "pc_hat " + fmt(pc_hat) + ", hill " + fmt(hill.alpha_hat) + " [" + fmt(hill.ci_low) + "," +
                  fmt(hill.ci_high) + "], pc " + fmt(pc);
}

// First-moment dichotomy in the deterministic computation.
void run_c5(CriterionResult& res, const SuiteOptions&) {
    const UHPRect region(-1, 1, 0, 1);
    const auto eps = dyadic(4, 10);
    std::string csv = "gamma,epsilon,first_moment\n";
    auto fin = first_moment_divergence(region, 1.0, eps);
    auto div = first_moment_divergence(region, 1.8, eps);
    for (std::size_t i = 0; i < eps.size(); ++i) csv += "1," + fmt(eps[i]) + "," + fmt(fin.moments[i]) + "\n";
    for (std::size_t i = 0; i < eps.size(); ++i) csv += "1.8," + fmt(eps[i]) + "," + fmt(div.moments[i]) + "\n";
    res.assertions.push_back(within("finite_slope_gamma_1", fin.raw_slope, 0.0, 1e-6,
                                    "slope of log E_eps vs log(1/eps)"));
    res.assertions.push_back(make_assertion("finite_not_diverging", !fin.diverging, fin.increment_slope, 0.0, 0.0,
                                            "increments vanish for gamma < sqrt 2"));
    res.assertions.push_back(within("divergence_slope_gamma_1.8", div.increment_slope, 1.8 * 1.8 / 2 - 1, 1e-6,
                                    "slope of log(E_eps - E_2eps) vs log(1/eps)"));
    res.assertions.push_back(within("raw_slope_gamma_1.8", div.raw_slope, 1.8 * 1.8 / 2 - 1, 1.0,
                                    "raw fit, not exactly linear (diagnostic)", true));
    res.csv.emplace_back("c5_first_moment.csv", csv);
    res.summary = "slopes " + fmt(fin.raw_slope) + " (gamma 1), " + fmt(div.increment_slope) + " (gamma 1.8)";
}

// Decorrelation bound on the dense backend with lambda = 0.
void run_c6(CriterionResult& res, const SuiteOptions& o) {
    const std::size_t n = o.reduced ? 500 : 20000;
    auto mc = mc_options(o);
    mc.backend = Backend::dense;
    mc.lambda_shift = 0.0;
    const UHPRect ql(-0.5, 0, 0, 0.5), grid(-0.5, 0.5, 0, 0.5);
    std::string summary;
    std::uint64_t id = 0;
    for (double delta : {0.25, 0.125}) {
        mc.first_id = id;
        id += n;
        auto rep = decorrelation_check(ql, UHPRect(delta, 0.5, 0, 0.5), 0.4, 0.4, 1.0, delta, 1.0 / 32, n, mc, grid);
        const std::string tag = "delta_" + fmt(delta);
        append_report(res, rep, tag + ":");
        res.csv.emplace_back("c6_decorrelation_" + tag + ".csv", rep.to_csv());
        double cross = 0.0, bound = 0.0;
        for (const auto& row : rep.rows) {
            if (row.label == "cross") cross = row.estimate;
            if (row.label == "bound") bound = row.estimate;
        }
        summary += (summary.empty() ? "" : "; ") + tag + " cross " + fmt(cross) + " vs bound " + fmt(bound);
    }
    res.summary = summary;
}

// Sokoban monotonicity and the deterministic mirror symmetry.
void run_c7(CriterionResult& res, const SuiteOptions& o) {
    const std::size_t n = o.reduced ? 500 : 20000;
    auto rep = sokoban_check(UHPRect(-0.5, 0, 0, 0.5), 8, 0.4, 0.4, 1.0, 1.0 / 32, n, mc_options(o));
    append_report(res, rep, "");
    res.csv.emplace_back("c7_sokoban.csv", rep.to_csv());
    std::size_t ok = 0, total = 0;
    for (const auto& a : rep.assertions)
        if (!a.diagnostic) {
            ++total;
            ok += a.passed;
        }
    res.summary = std::to_string(ok) + "/" + std::to_string(total) + " comparisons hold";
}

// Elementary inequality fuzzing.
void run_c8(CriterionResult& res, const SuiteOptions& o) {
    const std::size_t cases = o.reduced ? 2000 : 100000;
    auto sums = fuzz_elementary(cases, o.seed);
    std::string csv = "proposition,cases,violations,worst_relative_slack\n";
    std::size_t viol = 0;
    for (const auto& s : sums) {
        res.assertions.push_back(make_assertion(s.proposition + "_no_violations", s.violations == 0,
                                                double(s.violations), 0.0, 1e-12,
                                                std::to_string(s.cases) + " cases"));
        csv += s.proposition + "," + std::to_string(s.cases) + "," + std::to_string(s.violations) + "," +
               fmt(s.worst_relative_slack) + "\n";
        viol += s.violations;
    }
    res.csv.emplace_back("c8_fuzz.csv", csv);
    res.csv.emplace_back("c8_failures.csv", failures_csv(sums));
    res.summary = std::to_string(sums.size()) + " propositions x " + std::to_string(cases) + " cases, " +
                  std::to_string(viol) + " violations";
}

// Gaussian comparison verifiers.
void run_c9(CriterionResult& res, const SuiteOptions& o) {
    auto checks = gaussian_suite(o.seed);
    std::string csv = "name,passed,value,target,tolerance\n";
    std::size_t ok = 0;
    for (const auto& c : checks) {
        res.assertions.push_back(make_assertion(c.name, c.passed, c.value, c.target, c.tolerance, c.detail));
        csv += c.name + "," + (c.passed ? "1" : "0") + "," + fmt(c.value) + "," + fmt(c.target) + "," +
               fmt(c.tolerance) + "\n";
        ok += c.passed;
    }
    res.csv.emplace_back("c9_gaussian.csv", csv);
    res.summary = std::to_string(ok) + "/" + std::to_string(checks.size()) + " checks";
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

using CsvSet = std::vector<std::pair<std::string, std::string>>;

CsvSet reduced_suite(const SuiteOptions& base, unsigned workers) {
    SuiteOptions o = base;
    o.reduced = true;
    o.workers = workers;
    CsvSet all;
    for (const auto& id : criterion_ids()) {
        if (id == "C10") continue;
        auto r = run_criterion(id, o);
        for (auto& f : r.csv) all.emplace_back(id + "/" + f.first, std::move(f.second));
    }
    return all;
}

// Byte identity of every CSV across repeated runs and worker counts.
void run_c10(CriterionResult& res, const SuiteOptions& o) {
    auto a = reduced_suite(o, 1);
    auto b = reduced_suite(o, 1);
    auto c = reduced_suite(o, 8);
    auto compare = [](const CsvSet& x, const CsvSet& y) {
        std::size_t diff = x.size() == y.size() ? 0 : std::max(x.size(), y.size());
        for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i)
            if (x[i] != y[i]) ++diff;
        return diff;
    };
    const std::size_t d_seed = compare(a, b), d_workers = compare(a, c);
    res.assertions.push_back(make_assertion("same_seed_identical", d_seed == 0, double(d_seed), 0.0, 0.0,
                                            "differing CSV files between two runs"));
    res.assertions.push_back(make_assertion("workers_1_vs_8_identical", d_workers == 0, double(d_workers), 0.0,
                                            0.0, "differing CSV files between workers=1 and workers=8"));
    std::string csv = "file,bytes,fnv1a\n";
    for (const auto& f : a) csv += f.first + "," + std::to_string(f.second.size()) + "," + std::to_string(fnv1a(f.second)) + "\n";
    res.csv.emplace_back("c10_digests.csv", csv);
    res.summary = std::to_string(a.size()) + " CSV files compared, " + std::to_string(d_seed + d_workers) +
                  " differences";
}

struct Spec {
    const char* title;
    void (*run)(CriterionResult&, const SuiteOptions&);
    double budget_seconds;
    bool gate_runtime;  // false where the budget assumes more cores than are available
};

const std::map<std::string, Spec>& specs() {
    static const std::map<std::string, Spec> m{
        {"C1", {"scaling-exponent algebra", run_c1, 1.0, true}},
        {"C2", {"deterministic first moments", run_c2, 1.0, true}},
        {"C3", {"exact scaling relation", run_c3, 300.0, false}},
        {"C4", {"moment-threshold localization", run_c4, 1800.0, false}},
        {"C5", {"first-moment dichotomy", run_c5, 1.0, true}},
        {"C6", {"decorrelation bound", run_c6, 300.0, false}},
        {"C7", {"sokoban monotonicity", run_c7, 300.0, false}},
        {"C8", {"elementary inequality fuzz", run_c8, 10.0, true}},
        {"C9", {"gaussian comparison verifiers", run_c9, 60.0, true}},
        {"C10", {"reproducibility", run_c10, 0.0, false}},
    };
    return m;
}

}  // namespace

std::vector<std::string> criterion_ids() {
    return {"C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8", "C9", "C10"};
}

CriterionResult run_criterion(const std::string& id, const SuiteOptions& opts) {
    auto it = specs().find(id);
    if (it == specs().end()) throw PreconditionError("run_criterion: unknown criterion '" + id + "'");
    CriterionResult res;
    res.id = id;
    res.title = it->second.title;
    const auto t0 = Clock::now();
    it->second.run(res, opts);
    res.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    if (it->second.budget_seconds > 0.0) {
        const bool gate = it->second.gate_runtime && !opts.reduced;
        res.assertions.push_back(make_assertion("runtime_seconds", res.seconds <= it->second.budget_seconds,
                                                res.seconds, it->second.budget_seconds, 0.0,
                                                gate ? "wall time" : "wall time (budget assumes 8 cores)", !gate));
    }
    res.passed = true;
    for (const auto& a : res.assertions)
        if (!a.diagnostic && !a.passed) res.passed = false;
    return res;
}

}  // namespace gmclab
