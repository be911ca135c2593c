// gmclab: config-driven experiment runner. Exit codes: 0 all assertions pass, 1 an assertion
// failed, 2 invalid configuration or precondition.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gmclab/error.hpp"
#include "gmclab/experiments.hpp"
#include "gmclab/format.hpp"
#include "gmclab/inequalities.hpp"
#include "gmclab/moments.hpp"
#include "gmclab/suite.hpp"

#ifndef GMCLAB_VERSION
#define GMCLAB_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace gmclab;

namespace {

constexpr int kSchemaVersion = 1;

// JSON config: top-level keys are global flags, nested objects keyed by subcommand name hold
// that subcommand's flags. Flags on the command line win.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

    std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw CLI::ConversionError("config file is not valid JSON: " + std::string(e.what()));
        }
        std::vector<CLI::ConfigItem> items;
        walk(j, {}, items);
        return items;
    }

private:
    static std::string scalar(const json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        return v.dump();
    }

    static void walk(const json& j, std::vector<std::string> parents, std::vector<CLI::ConfigItem>& out) {
        if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
        for (const auto& [key, v] : j.items()) {
            if (v.is_object()) {
                auto p = parents;
                p.push_back(key);
                walk(v, p, out);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (v.is_array())
                for (const auto& e : v) item.inputs.push_back(scalar(e));
            else
                item.inputs.push_back(scalar(v));
            out.push_back(std::move(item));
        }
    }
};

struct Config {
    std::optional<double> gamma, p, epsilon, lambda_shift, r, k, q, delta;
    std::vector<double> p_grid, epsilon_list;
    std::optional<std::string> region, region_b, grid_region;
    std::optional<std::size_t> samples;
    std::uint64_t seed = 20240611;
    unsigned workers = 0;
    std::string out = "out";
    std::string backend = "auto";
    double nugget = kDefaultNugget;
    std::string cache;
    // subcommand specific
    int n_max = 4;
    std::size_t hill_k = 0;
    std::size_t dump_samples = 0;
    std::string mode = "cross";
    std::string coupling = "shared";
    int n = 8;
    std::size_t cases = 100000;
    bool reduced = false;
    std::vector<std::string> only;
};

struct Outcome {
    std::vector<Assertion> assertions;
    json parameters = json::object();
    json results = json::object();
    json criteria;
    std::vector<std::string> outputs;
};

void write_file(const fs::path& dir, const std::string& name, const std::string& text, Outcome& o) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    f << text;
    o.outputs.push_back(name);
}

std::vector<double> dyadic(int k0, int k1) {
    std::vector<double> v;
    for (int k = k0; k <= k1; ++k) v.push_back(std::ldexp(1.0, -k));
    return v;
}

CarlesonCube parse_cube(const std::string& text) {
    UHPRect r = parse_region(text);
    if (r.y0() != 0.0 || std::abs(r.height() - r.width()) > 1e-12 * r.width())
        throw PreconditionError("region '" + text + "' is not a Carleson cube [a,b]x[0,b-a]");
    return carleson(r.x0(), r.x1());
}

MonteCarloOptions mc_options(const Config& c) {
    MonteCarloOptions m;
    m.seed = c.seed;
    m.workers = c.workers;
    m.lambda_shift = c.lambda_shift;
    m.nugget = c.nugget;
    m.backend = parse_backend(c.backend);
    m.cache_dir = c.cache;
    return m;
}

json assertion_json(const Assertion& a) {
    return json{{"name", a.name},       {"passed", a.passed},       {"value", a.value},
                {"target", a.target},   {"tolerance", a.tolerance}, {"detail", a.detail},
                {"diagnostic", a.diagnostic}};
}

void take_report(const DecompositionReport& rep, const std::string& prefix, Outcome& o) {
    for (const auto& [k, v] : rep.parameters) o.parameters[prefix + k] = v;
    for (auto a : rep.assertions) {
        a.name = prefix + a.name;
        o.assertions.push_back(a);
    }
    if (rep.fit) o.results[prefix + "slope"] = json{{"slope", rep.fit->slope},
                                                    {"ci_low", rep.fit->ci_low},
                                                    {"ci_high", rep.fit->ci_high}};
}

Assertion assertion(const std::string& name, bool passed, double value, double target, double tol,
                    const std::string& detail, bool diagnostic = false) {
    Assertion a;
    a.name = name;
    a.passed = passed;
    a.value = value;
    a.target = target;
    a.tolerance = tol;
    a.detail = detail;
    a.diagnostic = diagnostic;
    return a;
}

void run_first_moment(const Config& c, const fs::path& dir, Outcome& o) {
    const UHPRect region = parse_region(c.region.value_or("-1,1,0,1"));
    const double gamma = c.gamma.value_or(1.0);
    const auto eps = c.epsilon_list.empty() ? dyadic(4, 10) : c.epsilon_list;
    std::string csv = "epsilon,first_moment\n";
    std::vector<double> m;
    for (double e : eps) {
        m.push_back(deterministic_first_moment(region, gamma, e));
        csv += format_double(e) + "," + format_double(m.back()) + "\n";
    }
    write_file(dir, "first_moment.csv", csv, o);
    if (eps.size() >= 3) {
        auto d = first_moment_divergence(region, gamma, eps);
        o.results["raw_slope"] = d.raw_slope;
        o.results["increment_slope"] = d.increment_slope;
        o.results["diverging"] = d.diverging;
        const double pred = gamma * gamma >= 2.0 ? gamma * gamma / 2 - 1 : 0.0;
        const double got = gamma * gamma >= 2.0 ? d.increment_slope : d.raw_slope;
        o.assertions.push_back(assertion("dichotomy_slope", std::abs(got - pred) <= 1e-6, got, pred, 1e-6,
                                         gamma * gamma >= 2.0 ? "slope of log increments" : "raw slope"));
    }
}

void run_scaling(const Config& c, const fs::path& dir, Outcome& o) {
    const UHPRect a = parse_region(c.region.value_or("-1,1"));
    auto rep = scaling_check(a, c.r.value_or(0.5), c.p.value_or(0.8), c.gamma.value_or(1.0),
                             c.epsilon.value_or(1.0 / 32), c.samples.value_or(2000), mc_options(c));
    take_report(rep, "", o);
    write_file(dir, "scaling.csv", rep.to_csv(), o);
}

void run_scan(const Config& c, const fs::path& dir, Outcome& o) {
    const auto cube = parse_cube(c.region.value_or("-0.125,0.125"));
    const double gamma = c.gamma.value_or(1.8);
    const auto ps = c.p_grid.empty() ? std::vector<double>{0.4, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75} : c.p_grid;
    const auto eps = c.epsilon_list.empty() ? dyadic(5, 7) : c.epsilon_list;
    auto res = divergence_scan(cube, ps, gamma, eps, c.samples.value_or(2000), mc_options(c));
    std::string slopes = "p,slope,slope_stderr,predicted\n";
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const std::string tag = "p=" + format_double(ps[i]) + ":";
        take_report(res.per_p[i], tag, o);
        write_file(dir, "scan_p" + format_double(ps[i]) + ".csv", res.per_p[i].to_csv(), o);
        slopes += format_double(ps[i]) + "," + format_double(res.slopes[i]) + "," +
                  format_double(res.slope_errors[i]) + "," + format_double(predicted_scan_slope(ps[i], gamma)) + "\n";
    }
    write_file(dir, "slopes.csv", slopes, o);
    o.results["lambda"] = res.lambda;
    if (res.pc_estimate)
        o.results["pc_estimate"] = json{{"value", *res.pc_estimate},
                                        {"ci_low", res.pc_ci_low},
                                        {"ci_high", res.pc_ci_high},
                                        {"theory", 2.0 / (gamma * gamma)}};
}

void run_slices(const Config& c, const fs::path& dir, Outcome& o) {
    const auto cube = parse_cube(c.region.value_or("-1,1"));
    auto rep = slice_moment_sequence(cube, c.p.value_or(0.55), c.gamma.value_or(1.0), c.n_max,
                                     c.samples.value_or(2000), c.epsilon.value_or(0.0), mc_options(c));
    take_report(rep, "", o);
    write_file(dir, "slices.csv", rep.to_csv(), o);
}

void run_tail(const Config& c, const fs::path& dir, Outcome& o) {
    const UHPRect region = parse_region(c.region.value_or("-0.125,0.125"));
    const double gamma = c.gamma.value_or(1.8);
    GmcParams params{gamma};
    params.validate();
    const std::size_t n = c.samples.value_or(10000);
    const auto opts = mc_options(c);
    auto grid = build_grid(region, c.epsilon.value_or(1.0 / 64), 0);
    const double lambda = resolve_lambda({grid}, opts);
    auto model = build_field_model(grid, lambda, opts);
    auto logs = sample_log_masses(*model, {region}, params, c.seed, 0, n, c.workers)[0];
    const std::size_t k = c.hill_k ? c.hill_k : std::min(default_hill_k(n), n / 10);
    auto t = tail_index(logs, k);
    auto stab = hill_stability(logs, default_stability_ks(n));
    std::string csv = "k,alpha_hat,ci_low,ci_high\n";
    for (const auto& e : stab.estimates)
        csv += std::to_string(e.k) + "," + format_double(e.alpha_hat) + "," + format_double(e.ci_low) + "," +
               format_double(e.ci_high) + "\n";
    write_file(dir, "tail.csv", csv, o);
    std::string lm = "replicate,log_mass\n";
    for (std::size_t i = 0; i < logs.size(); ++i) lm += std::to_string(i) + "," + format_double(logs[i]) + "\n";
    write_file(dir, "log_masses.csv", lm, o);
    if (c.dump_samples > 0) {
        dump_samples(*model, c.seed, 0, c.dump_samples, c.workers, (dir / "field_samples.bin").string());
        o.outputs.push_back("field_samples.bin");
    }
    const double pc = 2.0 / (gamma * gamma);
    o.parameters["backend"] = model->backend();
    o.parameters["lambda_shift"] = lambda;
    o.results["hill"] = json{{"k", t.k}, {"alpha_hat", t.alpha_hat}, {"ci_low", t.ci_low}, {"ci_high", t.ci_high},
                             {"stable_across_k", stab.stable}, {"pc", pc}};
    o.assertions.push_back(assertion("hill_ci_covers_pc", t.ci_low <= pc && pc <= t.ci_high, t.alpha_hat, pc, 0.0,
                                     "finite-eps tail index; diagnostic", true));
}

void run_cross(const Config& c, const fs::path& dir, Outcome& o) {
    const double gamma = c.gamma.value_or(1.0), k = c.k.value_or(0.4), q = c.q.value_or(0.4);
    const double eps = c.epsilon.value_or(1.0 / 32);
    const std::size_t n = c.samples.value_or(2000);
    const UHPRect a = parse_region(c.region.value_or("-0.5,0,0,0.5"));
    const auto opts = mc_options(c);
    if (c.mode == "cross") {
        const UHPRect b = parse_region(c.region_b.value_or("0.25,0.5,0,0.5"));
        Coupling cp;
        if (c.coupling == "shared")
            cp = Coupling::shared_field;
        else if (c.coupling == "independent")
            cp = Coupling::independent_fields;
        else
            throw PreconditionError("--coupling must be shared or independent");
        auto e = cross_moment(a, b, k, q, gamma, eps, n, opts, cp);
        write_file(dir, "cross.csv",
                   "k,q,coupling,estimate,stderr,log_estimate,n_samples\n" + format_double(k) + "," +
                       format_double(q) + "," + c.coupling + "," + format_double(e.mean) + "," +
                       format_double(e.std_err) + "," + format_double(e.log_mean) + "," +
                       std::to_string(e.n_samples) + "\n",
                   o);
        o.results["cross_moment"] = json{{"estimate", e.mean}, {"stderr", e.std_err}, {"method", to_string(e.method)}};
    } else if (c.mode == "decorrelation") {
        const UHPRect b = parse_region(c.region_b.value_or("0.25,0.5,0,0.5"));
        std::optional<UHPRect> grid;
        if (c.grid_region) grid = parse_region(*c.grid_region);
        auto rep = decorrelation_check(a, b, k, q, gamma, c.delta.value_or(a.distance_to(b)), eps, n, opts, grid);
        take_report(rep, "", o);
        write_file(dir, "decorrelation.csv", rep.to_csv(), o);
    } else if (c.mode == "sokoban") {
        auto rep = sokoban_check(a, c.n, k, q, gamma, eps, n, opts);
        take_report(rep, "", o);
        write_file(dir, "sokoban.csv", rep.to_csv(), o);
    } else {
        throw PreconditionError("--mode must be cross, decorrelation or sokoban");
    }
}

void run_ineq(const Config& c, const fs::path& dir, Outcome& o) {
    auto sums = fuzz_elementary(c.cases, c.seed);
    std::string csv = "proposition,cases,violations,worst_relative_slack\n";
    for (const auto& s : sums) {
        o.assertions.push_back(assertion(s.proposition + "_no_violations", s.violations == 0, double(s.violations),
                                         0.0, 1e-12, std::to_string(s.cases) + " cases"));
        csv += s.proposition + "," + std::to_string(s.cases) + "," + std::to_string(s.violations) + "," +
               format_double(s.worst_relative_slack) + "\n";
    }
    write_file(dir, "ineq_fuzz.csv", csv, o);
    write_file(dir, "ineq_failures.csv", failures_csv(sums), o);
    std::string g = "name,passed,value,target,tolerance\n";
    for (const auto& s : gaussian_suite(c.seed)) {
        o.assertions.push_back(assertion(s.name, s.passed, s.value, s.target, s.tolerance, s.detail));
        g += s.name + "," + (s.passed ? "1" : "0") + "," + format_double(s.value) + "," + format_double(s.target) +
             "," + format_double(s.tolerance) + "\n";
    }
    write_file(dir, "ineq_gaussian.csv", g, o);
}

void run_all(const Config& c, const fs::path& dir, Outcome& o) {
    SuiteOptions so;
    so.seed = c.seed;
    so.workers = c.workers;
    so.cache_dir = c.cache;
    so.reduced = c.reduced;
    o.criteria = json::array();
    for (const auto& id : c.only.empty() ? criterion_ids() : c.only) {
        auto r = run_criterion(id, so);
        std::printf("%s %s %s (%.2f s): %s\n", r.passed ? "PASS" : "FAIL", r.id.c_str(), r.title.c_str(), r.seconds,
                    r.summary.c_str());
        std::fflush(stdout);
        fs::create_directories(dir / r.id);
        json cj{{"id", r.id}, {"title", r.title}, {"passed", r.passed}, {"wall_time_seconds", r.seconds},
                {"summary", r.summary}, {"assertions", json::array()}, {"outputs", json::array()}};
        for (auto a : r.assertions) {
            cj["assertions"].push_back(assertion_json(a));
            a.name = r.id + ":" + a.name;
            o.assertions.push_back(a);
        }
        for (const auto& [name, text] : r.csv) {
            write_file(dir / r.id, name, text, o);
            o.outputs.back() = r.id + "/" + name;
            cj["outputs"].push_back(r.id + "/" + name);
        }
        o.criteria.push_back(cj);
    }
}

json config_echo(const Config& c, const std::string& experiment) {
    json j{{"experiment", experiment}, {"seed", c.seed},       {"workers", c.workers},
           {"out", c.out},             {"backend", c.backend}, {"nugget", c.nugget}};
    auto opt = [&](const char* key, const auto& v) {
        if (v) j[key] = *v;
    };
    opt("gamma", c.gamma);
    opt("p", c.p);
    opt("epsilon", c.epsilon);
    opt("lambda-shift", c.lambda_shift);
    opt("r", c.r);
    opt("k", c.k);
    opt("q", c.q);
    opt("delta", c.delta);
    opt("region", c.region);
    opt("region-b", c.region_b);
    opt("grid-region", c.grid_region);
    opt("samples", c.samples);
    if (!c.p_grid.empty()) j["p-grid"] = c.p_grid;
    if (!c.epsilon_list.empty()) j["epsilon-list"] = c.epsilon_list;
    if (!c.cache.empty()) j["cache"] = c.cache;
    if (experiment == "slices") j["n-max"] = c.n_max;
    if (experiment == "tail") {
        j["hill-k"] = c.hill_k;
        j["dump-samples"] = c.dump_samples;
    }
    if (experiment == "cross") {
        j["mode"] = c.mode;
        j["coupling"] = c.coupling;
        j["n"] = c.n;
    }
    if (experiment == "ineq") j["cases"] = c.cases;
    if (experiment == "all") {
        j["reduced"] = c.reduced;
        j["only"] = c.only;
    }
    return j;
}

const char* kFooter = R"(
CSV outputs (one directory per experiment under --out):
  first-moment  first_moment.csv   epsilon,first_moment
  scaling       scaling.csv        label,scale,estimate,stderr,log_estimate,n_samples
                                   (rows A, ratio, rA; scale = r for rA and ratio)
  scan          scan_p<p>.csv      label,scale,estimate,stderr,log_estimate,n_samples (scale = eps)
                slopes.csv         p,slope,slope_stderr,predicted
  slices        slices.csv         label,scale,estimate,stderr,log_estimate,n_samples (one row per slice)
  tail          tail.csv           k,alpha_hat,ci_low,ci_high
                log_masses.csv     replicate,log_mass
                field_samples.bin  raw little-endian doubles (only with --dump-samples)
  cross         cross.csv          k,q,coupling,estimate,stderr,log_estimate,n_samples
                decorrelation.csv  label,scale,estimate,stderr,log_estimate,n_samples (scale = delta)
                sokoban.csv        label,scale,estimate,stderr,log_estimate,n_samples
  ineq          ineq_fuzz.csv      proposition,cases,violations,worst_relative_slack
                ineq_failures.csv  proposition,<inputs>,lhs,rhs,slack
                ineq_gaussian.csv  name,passed,value,target,tolerance
  all           <criterion>/*.csv  per-criterion tables
Every run also writes summary.json (schema_version, version, config, seed, workers,
wall_time_seconds, parameters, results, assertions, passed, outputs). CSVs never contain
timings, so identical config and seed reproduce them byte for byte for any --workers.
Exit codes: 0 all assertions pass, 1 an assertion failed, 2 invalid configuration.
Environment: GMC_LAB_CACHE sets the default factorization cache directory.
)";

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gmclab: Monte Carlo lab for regularized boundary Gaussian multiplicative chaos"};
    app.footer(kFooter);
    app.require_subcommand(1);
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON config file; command-line flags win");
    app.allow_config_extras(false);

    Config c;
    if (const char* env = std::getenv("GMC_LAB_CACHE")) c.cache = env;

    app.add_option("--gamma", c.gamma, "coupling constant in (0,2)");
    app.add_option("--p", c.p, "moment order");
    app.add_option("--p-grid", c.p_grid, "comma-separated moment orders")->delimiter(',');
    app.add_option("--region", c.region, "region: 'a,b' (Carleson cube) or 'x0,x1,y0,y1'");
    app.add_option("--r", c.r, "scaling factor in (0,1]");
    app.add_option("--epsilon", c.epsilon, "regularization scale");
    app.add_option("--epsilon-list", c.epsilon_list, "comma-separated dyadic scales, descending")->delimiter(',');
    app.add_option("--samples", c.samples, "Monte Carlo replicates");
    app.add_option("--seed", c.seed, "master seed")->capture_default_str();
    app.add_option("--workers", c.workers, "worker threads, 0 = all cores (outputs do not depend on it)")
        ->capture_default_str();
    app.add_option("--out", c.out, "output root directory")->capture_default_str();
    app.add_option("--lambda-shift", c.lambda_shift, "kernel shift lambda >= 0 (default: smallest admissible)");
    app.add_option("--backend", c.backend, "field backend: auto, dense or spectral")->capture_default_str();
    app.add_option("--nugget", c.nugget, "diagonal nugget added to cell variances")->capture_default_str();
    app.add_option("--cache", c.cache, "factorization cache directory (default $GMC_LAB_CACHE)");
    app.fallthrough();

    auto* fm = app.add_subcommand("first-moment", "exact expected mass over a list of scales");
    auto* sc = app.add_subcommand("scaling", "E[mu(rA)^p] / E[mu(A)^p] against r^zeta(p)");
    auto* sn = app.add_subcommand("scan", "moment growth in log(1/eps) across a p-grid and the threshold estimate");
    auto* sl = app.add_subcommand("slices", "moments of the horizontal slices of a Carleson cube");
    sl->add_option("--n-max", c.n_max, "deepest slice index")->capture_default_str();
    auto* tl = app.add_subcommand("tail", "Hill tail index of the total mass");
    tl->add_option("--hill-k", c.hill_k, "upper order statistics (0 = n^{2/3}, capped at n/10)");
    tl->add_option("--dump-samples", c.dump_samples, "also dump this many raw field samples");
    auto* cr = app.add_subcommand("cross", "cross moments, decorrelation bound, sokoban comparisons");
    cr->add_option("--mode", c.mode, "cross, decorrelation or sokoban")->capture_default_str();
    cr->add_option("--region-b", c.region_b, "second region (cross, decorrelation)");
    cr->add_option("--grid-region", c.grid_region, "grid covering both regions (decorrelation)");
    cr->add_option("--k", c.k, "exponent on the first region");
    cr->add_option("--q", c.q, "exponent on the second region");
    cr->add_option("--delta", c.delta, "separation (decorrelation; default: region distance)");
    cr->add_option("--coupling", c.coupling, "shared or independent (cross)")->capture_default_str();
    cr->add_option("--n", c.n, "strip count N (sokoban)")->capture_default_str();
    auto* iq = app.add_subcommand("ineq", "elementary inequality fuzz and Gaussian comparison checks");
    iq->add_option("--cases", c.cases, "random cases per proposition")->capture_default_str();
    auto* al = app.add_subcommand("all", "the full acceptance suite");
    al->add_flag("--reduced", c.reduced, "small budget (code paths only)");
    al->add_option("--only", c.only, "criteria to run, e.g. C1,C5")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "gmclab: " << e.what() << "\n";
        return 2;
    }

    std::string experiment;
    for (auto* s : {fm, sc, sn, sl, tl, cr, iq, al})
        if (s->parsed()) experiment = s->get_name();

    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    const fs::path dir = fs::path(c.out) / experiment;
    try {
        if (c.gamma) GmcParams{*c.gamma}.validate();
        parse_backend(c.backend);
        fs::create_directories(dir);
        if (experiment == "first-moment") run_first_moment(c, dir, o);
        else if (experiment == "scaling") run_scaling(c, dir, o);
        else if (experiment == "scan") run_scan(c, dir, o);
        else if (experiment == "slices") run_slices(c, dir, o);
        else if (experiment == "tail") run_tail(c, dir, o);
        else if (experiment == "cross") run_cross(c, dir, o);
        else if (experiment == "ineq") run_ineq(c, dir, o);
        else run_all(c, dir, o);
    } catch (const PreconditionError& e) {
        std::cerr << "gmclab: invalid configuration: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "gmclab: error: " << e.what() << "\n";
        return 2;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    bool passed = true;
    json assertions = json::array();
    for (const auto& a : o.assertions) {
        if (!a.diagnostic && !a.passed) passed = false;
        assertions.push_back(assertion_json(a));
    }
    json summary{{"schema_version", kSchemaVersion},
                 {"tool", "gmclab"},
                 {"version", GMCLAB_VERSION},
                 {"experiment", experiment},
                 {"config", config_echo(c, experiment)},
                 {"seed", c.seed},
                 {"workers", c.workers},
                 {"wall_time_seconds", wall},
                 {"parameters", o.parameters},
                 {"results", o.results},
                 {"assertions", assertions},
                 {"passed", passed},
                 {"outputs", o.outputs}};
    if (!o.criteria.is_null()) summary["criteria"] = o.criteria;
    std::ofstream(dir / "summary.json") << summary.dump(2) << "\n";

    std::size_t failed = 0;
    for (const auto& a : o.assertions)
        if (!a.diagnostic && !a.passed) {
            ++failed;
            std::cerr << "FAIL " << a.name << ": value " << format_double(a.value) << ", target "
                      << format_double(a.target) << ", tolerance " << format_double(a.tolerance) << " (" << a.detail
                      << ")\n";
        }
    std::printf("%s: %zu assertions, %zu failed; outputs in %s\n", experiment.c_str(), o.assertions.size(), failed,
                dir.string().c_str());
    return passed ? 0 : 1;
}
