#include "gmclab/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/random/sobol.hpp>

#include "gmclab/error.hpp"
#include "gmclab/format.hpp"
#include "gmclab/rng.hpp"
#include "gmclab/stats.hpp"

namespace gmclab {

std::string to_string(IntegrationMethod m) {
    switch (m) {
        case IntegrationMethod::closed_form: return "closed-form";
        case IntegrationMethod::quadrature: return "quadrature";
        default: return "quasi-MC";
    }
}

namespace {

constexpr double kRelSlack = 1e-12;

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

// 0^0 is 1 here, matching the limit of the monomials.
double mono(double x, double p, double y, double q) { return std::pow(x, p) * std::pow(y, q); }

ComparisonResult exact_compare(double lhs, double rhs, double scale) {
    ComparisonResult r;
    r.lhs = lhs;
    r.rhs = rhs;
    r.slack = rhs - lhs;
    r.method = IntegrationMethod::closed_form;
    r.tolerance = kRelSlack * std::max(scale, 1.0);
    r.holds = r.slack >= -r.tolerance;
    return r;
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw PreconditionError(msg);
}

}  // namespace

ComparisonResult check_muirhead(double x, double y, double p1, double q1, double p2, double q2) {
    require(finite_nonneg(x) && finite_nonneg(y), "muirhead: x, y must be finite and >= 0");
    require(std::isfinite(p1) && std::isfinite(q1) && std::isfinite(p2) && std::isfinite(q2),
            "muirhead: exponents must be finite");
    require(0.0 <= p1 && p1 <= q1 && 0.0 <= p2 && p2 <= q2, "muirhead: need 0 <= p1 <= q1 and 0 <= p2 <= q2");
    const double s = std::max(p1 + q1, 1.0);
    require(std::abs((p1 + q1) - (p2 + q2)) <= 1e-12 * s, "muirhead: need p1 + q1 = p2 + q2");
    require(q1 - p1 >= (q2 - p2) - 1e-12 * s, "muirhead: need |p1 - q1| >= |p2 - q2|");
    const double big = mono(x, p1, y, q1) + mono(x, q1, y, p1);
    const double small = mono(x, p2, y, q2) + mono(x, q2, y, p2);
    return exact_compare(small, big, std::max(big, small));
}

ComparisonResult check_converse_super(double x, double y, int k, double q) {
    require(finite_nonneg(x) && finite_nonneg(y), "converse super: x, y must be finite and >= 0");
    require(k >= 1, "converse super: k must be an integer >= 1");
    require(q >= 0.0 && q <= 1.0, "converse super: q must lie in [0,1]");
    const double ck = std::ldexp(1.0, k) - 1.0;
    const double s = k + q;
    const double lhs = std::pow(x + y, s);
    const double cross = mono(x, k, y, q) + mono(x, q, y, k);
    const double rhs = std::pow(x, s) + std::pow(y, s) + ck * cross;
    return exact_compare(lhs, rhs, std::max(lhs, rhs));
}

ComparisonResult check_converse_sub(double x, double y, double p, double q) {
    require(finite_nonneg(x) && finite_nonneg(y), "converse sub: x, y must be finite and >= 0");
    require(p > 0.0 && q > 0.0 && std::isfinite(p) && std::isfinite(q), "converse sub: p, q must be > 0");
    const double s = p + q;
    require(s >= 0.5 && s <= 1.0, "converse sub: need 1/2 <= p + q <= 1");
    const double pure = std::pow(x, s) + std::pow(y, s);
    const double cross = 2.0 * (mono(x, p, y, q) + mono(x, q, y, p));
    const double rhs = std::pow(x + y, s);
    return exact_compare(pure - cross, rhs, std::max(pure + cross, rhs));
}

ComparisonResult check_converse_sub_sharp(double x, double y, double p) {
    require(finite_nonneg(x) && finite_nonneg(y), "converse sub: x, y must be finite and >= 0");
    require(p >= 0.25 && p <= 0.5, "converse sub (sqrt 2 constant): need 1/4 <= p <= 1/2");
    const double lhs = std::pow(x, 2 * p) + std::pow(y, 2 * p);
    const double rhs = std::pow(x + y, 2 * p) + std::numbers::sqrt2 * mono(x, p, y, p);
    return exact_compare(lhs, rhs, std::max(lhs, rhs));
}

namespace {

// Deterministic uniform source for the fuzzers: one stream per proposition.
class FuzzStream {
public:
    FuzzStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}
    double next() {
        if (pos_ == buf_.size()) {
            fill_uniforms(seed_, stream_, NormalDomain::fuzz, buf_, offset_);
            offset_ += buf_.size();
            pos_ = 0;
        }
        return buf_[pos_++];
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * next(); }

private:
    std::uint64_t seed_, stream_, offset_ = 0;
    std::vector<double> buf_ = std::vector<double>(4096);
    std::size_t pos_ = 4096;
};

// Magnitudes spread over the regimes where the inequalities are tight or degenerate.
std::pair<double, double> draw_xy(FuzzStream& s) {
    const double mode = s.next();
    if (mode < 0.3) return {s.uniform(0, 1000), s.uniform(0, 1000)};
    if (mode < 0.55) return {std::pow(10.0, s.uniform(-6, 3)), std::pow(10.0, s.uniform(-6, 3))};
    if (mode < 0.7) return {s.uniform(0, 1), s.uniform(0, 1)};
    if (mode < 0.85) {
        double v = std::pow(10.0, s.uniform(-3, 3));
        return {v, v};
    }
    double v = s.uniform(0, 1000);
    return s.next() < 0.5 ? std::pair{v, 0.0} : std::pair{0.0, v};
}

void record(FuzzSummary& sum, const ComparisonResult& r, std::vector<std::pair<std::string, double>> inputs) {
    ++sum.cases;
    const double rel = r.slack / (r.tolerance / kRelSlack);
    if (sum.cases == 1 || rel < sum.worst_relative_slack) sum.worst_relative_slack = rel;
    if (!r.holds) {
        ++sum.violations;
        if (sum.failures.size() < 1000) sum.failures.push_back({sum.proposition, std::move(inputs), r});
    }
}

}  // namespace

std::vector<FuzzSummary> fuzz_elementary(std::size_t cases, std::uint64_t seed) {
    std::vector<FuzzSummary> out;
    {
        FuzzSummary sum;
        sum.proposition = "muirhead";
        FuzzStream s(seed, 1);
        for (std::size_t i = 0; i < cases; ++i) {
            auto [x, y] = draw_xy(s);
            const double total = s.uniform(0, 6);
            const double p1 = s.uniform(0, total / 2);
            const double p2 = s.next() < 0.1 ? p1 : s.uniform(p1, total / 2);
            const double q1 = total - p1, q2 = total - p2;
            record(sum, check_muirhead(x, y, p1, q1, p2, q2),
                   {{"x", x}, {"y", y}, {"p1", p1}, {"q1", q1}, {"p2", p2}, {"q2", q2}});
        }
        out.push_back(std::move(sum));
    }
    {
        FuzzSummary sum;
        sum.proposition = "converse_super";
        FuzzStream s(seed, 2);
        for (std::size_t i = 0; i < cases; ++i) {
            auto [x, y] = draw_xy(s);
            const int k = 1 + static_cast<int>(std::min(2.0, std::floor(3.0 * s.next())));
            const double m = s.next();
            const double q = m < 0.05 ? 0.0 : (m < 0.1 ? 1.0 : s.uniform(0, 1));
            record(sum, check_converse_super(x, y, k, q), {{"x", x}, {"y", y}, {"k", k}, {"q", q}});
        }
        out.push_back(std::move(sum));
    }
    {
        FuzzSummary sum;
        sum.proposition = "converse_sub";
        FuzzStream s(seed, 3);
        for (std::size_t i = 0; i < cases; ++i) {
            auto [x, y] = draw_xy(s);
            const double m = s.next();
            const double total = m < 0.05 ? 0.5 : (m < 0.1 ? 1.0 : s.uniform(0.5, 1.0));
            double p = total * s.next();
            if (p <= 0.0) p = 0.5 * total;
            const double q = total - p;
            if (!(q > 0.0)) continue;
            record(sum, check_converse_sub(x, y, p, q), {{"x", x}, {"y", y}, {"p", p}, {"q", q}});
        }
        out.push_back(std::move(sum));
    }
    {
        FuzzSummary sum;
        sum.proposition = "converse_sub_sqrt2";
        FuzzStream s(seed, 4);
        for (std::size_t i = 0; i < cases; ++i) {
            auto [x, y] = draw_xy(s);
            const double m = s.next();
            const double p = m < 0.05 ? 0.25 : (m < 0.1 ? 0.5 : s.uniform(0.25, 0.5));
            record(sum, check_converse_sub_sharp(x, y, p), {{"x", x}, {"y", y}, {"p", p}});
        }
        out.push_back(std::move(sum));
    }
    return out;
}

std::string failures_csv(const std::vector<FuzzSummary>& summaries) {
    std::ostringstream os;
    os << "proposition,inputs,lhs,rhs,slack\n";
    for (const auto& s : summaries)
        for (const auto& f : s.failures) {
            os << f.proposition << ',';
            for (std::size_t i = 0; i < f.inputs.size(); ++i)
                os << (i ? ";" : "") << f.inputs[i].first << '=' << format_double(f.inputs[i].second);
            os << ',' << format_double(f.result.lhs) << ',' << format_double(f.result.rhs) << ','
               << format_double(f.result.slack) << '\n';
        }
    return os.str();
}

GaussianVectorSpec::GaussianVectorSpec(Eigen::MatrixXd c, Eigen::VectorXd m) : cov(std::move(c)), mean(std::move(m)) {
    const auto n = cov.rows();
    require(n >= 1 && n <= 6 && cov.cols() == n, "Gaussian vector: covariance must be square with 1 <= n <= 6");
    require(cov.allFinite(), "Gaussian vector: covariance must be finite");
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    require((cov - cov.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
            "Gaussian vector: covariance must be symmetric");
    cov = 0.5 * (cov + cov.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
    require(es.eigenvalues().minCoeff() >= -1e-12 * scale, "Gaussian vector: covariance is not PSD");
    require(mean.size() == 0 || mean.size() == n, "Gaussian vector: mean has the wrong dimension");
    require(mean.size() == 0 || mean.allFinite(), "Gaussian vector: mean must be finite");
}

bool GaussianVectorSpec::centered() const { return mean.size() == 0 || mean.isZero(0.0); }

std::pair<std::vector<double>, std::vector<double>> gauss_hermite_normal(int n) {
    require(n >= 1 && n <= 256, "Gauss-Hermite: node count must lie in [1,256]");
    // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials.
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) j(i, i - 1) = j(i - 1, i) = std::sqrt(static_cast<double>(i));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    std::vector<double> x(n), w(n);
    for (int i = 0; i < n; ++i) {
        x[i] = es.eigenvalues()(i);
        w[i] = es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
    }
    return {x, w};
}

namespace {

// cov = L L^T with L = V sqrt(max(Lambda, 0)); valid for singular covariances.
Eigen::MatrixXd root_of(const Eigen::MatrixXd& cov) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    Eigen::VectorXd s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * s.asDiagonal();
}

double tensor_quadrature(const GaussianVectorSpec& x, const std::function<double(std::span<const double>)>& f,
                         int m) {
    const auto [nodes, weights] = gauss_hermite_normal(m);
    const auto n = static_cast<int>(x.dim());
    const Eigen::MatrixXd l = root_of(x.cov);
    const Eigen::VectorXd mu = x.mean.size() ? x.mean : Eigen::VectorXd::Zero(n);
    std::size_t total = 1;
    for (int d = 0; d < n; ++d) total *= static_cast<std::size_t>(m);
    std::vector<double> terms(total);
    std::vector<int> idx(n, 0);
    Eigen::VectorXd z(n), v(n);
    for (std::size_t t = 0; t < total; ++t) {
        double w = 1.0;
        for (int d = 0; d < n; ++d) {
            z(d) = nodes[idx[d]];
            w *= weights[idx[d]];
        }
        v = mu + l * z;
        terms[t] = w == 0.0 ? 0.0 : w * f(std::span<const double>(v.data(), n));
        for (int d = n - 1; d >= 0; --d) {
            if (++idx[d] < m) break;
            idx[d] = 0;
        }
    }
    return pairwise_sum(terms);
}

Expectation quasi_mc(const GaussianVectorSpec& x, const std::function<double(std::span<const double>)>& f,
                     const IntegrationOptions& opts) {
    require(opts.qmc_log2_points >= 1 && opts.qmc_log2_points <= 24, "quasi-MC: log2 points must lie in [1,24]");
    require(opts.qmc_shifts >= 2, "quasi-MC: need at least 2 shifts");
    const auto n = static_cast<int>(x.dim());
    const Eigen::MatrixXd l = root_of(x.cov);
    const Eigen::VectorXd mu = x.mean.size() ? x.mean : Eigen::VectorXd::Zero(n);
    const std::size_t points = std::size_t{1} << opts.qmc_log2_points;
    std::vector<double> shift_u(static_cast<std::size_t>(opts.qmc_shifts) * n);
    fill_uniforms(opts.seed, 0, NormalDomain::fuzz, shift_u, std::uint64_t{1} << 40);
    std::vector<double> means(opts.qmc_shifts), terms(points);
    Eigen::VectorXd z(n), v(n);
    for (int s = 0; s < opts.qmc_shifts; ++s) {
        std::vector<std::uint32_t> shift(n);
        for (int d = 0; d < n; ++d) shift[d] = static_cast<std::uint32_t>(std::ldexp(shift_u[s * n + d], 32));
        boost::random::sobol_engine<std::uint32_t, 32> eng(static_cast<std::size_t>(n));
        for (std::size_t i = 0; i < points; ++i) {
            for (int d = 0; d < n; ++d) {
                const std::uint32_t b = eng() ^ shift[d];
                z(d) = inverse_normal_cdf((static_cast<double>(b) + 0.5) * 0x1p-32);
            }
            v = mu + l * z;
            terms[i] = f(std::span<const double>(v.data(), n));
        }
        means[s] = pairwise_sum(terms) / static_cast<double>(points);
    }
    const double m = pairwise_sum(means) / opts.qmc_shifts;
    std::vector<double> sq(means.size());
    for (std::size_t i = 0; i < means.size(); ++i) sq[i] = (means[i] - m) * (means[i] - m);
    const double se = std::sqrt(pairwise_sum(sq) / (opts.qmc_shifts - 1) / opts.qmc_shifts);
    return {m, se, IntegrationMethod::quasi_mc};
}

}  // namespace

Expectation gaussian_expectation(const GaussianVectorSpec& x, const std::function<double(std::span<const double>)>& f,
                                 IntegrationMethod method, const IntegrationOptions& opts) {
    if (method == IntegrationMethod::quadrature) {
        require(x.dim() <= 3, "tensor quadrature is limited to n <= 3");
        require(opts.quadrature_nodes >= 2 && opts.quadrature_nodes % 2 == 0,
                "quadrature node count must be even and >= 2");
        const double fine = tensor_quadrature(x, f, opts.quadrature_nodes);
        const double coarse = tensor_quadrature(x, f, opts.quadrature_nodes / 2);
        return {fine, std::abs(fine - coarse), IntegrationMethod::quadrature};
    }
    if (method == IntegrationMethod::quasi_mc) return quasi_mc(x, f, opts);
    throw PreconditionError("gaussian_expectation: closed forms are functional specific");
}

namespace {

struct PairSets {
    std::vector<std::vector<char>> a, b;
};

PairSets pair_sets(std::size_t n, const IndexPairs& a, const IndexPairs& b) {
    PairSets s{std::vector<std::vector<char>>(n, std::vector<char>(n, 0)),
               std::vector<std::vector<char>>(n, std::vector<char>(n, 0))};
    auto mark = [&](std::vector<std::vector<char>>& m, const IndexPairs& ps) {
        for (auto [i, j] : ps) {
            require(i >= 0 && j >= 0 && static_cast<std::size_t>(i) < n && static_cast<std::size_t>(j) < n,
                    "index pair out of range");
            m[i][j] = m[j][i] = 1;
        }
    };
    mark(s.a, a);
    mark(s.b, b);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) require(!(s.a[i][j] && s.b[i][j]), "pair sets A and B must be disjoint");
    return s;
}

Expectation numeric(const GaussianVectorSpec& g, const std::function<double(std::span<const double>)>& f,
                    const IntegrationOptions& opts) {
    IntegrationMethod m = opts.force.value_or(g.dim() <= 3 ? IntegrationMethod::quadrature : IntegrationMethod::quasi_mc);
    require(m != IntegrationMethod::closed_form, "no closed form is available for this functional");
    return gaussian_expectation(g, f, m, opts);
}

ComparisonResult numeric_compare(const Expectation& l, const Expectation& r) {
    ComparisonResult c;
    c.lhs = l.value;
    c.rhs = r.value;
    c.slack = r.value - l.value;
    c.method = l.method;
    c.error_estimate = l.error + r.error;
    c.tolerance = 5.0 * c.error_estimate + kRelSlack * std::max({std::abs(l.value), std::abs(r.value), 1.0});
    c.holds = c.slack >= -c.tolerance;
    return c;
}

bool use_closed(const IntegrationOptions& opts) {
    return !opts.force || *opts.force == IntegrationMethod::closed_form;
}

}  // namespace

ComparisonResult slepian_verify(const GaussianVectorSpec& x, const GaussianVectorSpec& y, const IndexPairs& a,
                                const IndexPairs& b, const SlepianFunctional& f, const IntegrationOptions& opts) {
    const std::size_t n = x.dim();
    require(y.dim() == n, "slepian: X and Y must have the same dimension");
    require(x.centered() && y.centered(), "slepian: both Gaussian vectors must be centered");
    const auto sets = pair_sets(n, a, b);
    const double scale = std::max({1.0, x.cov.cwiseAbs().maxCoeff(), y.cov.cwiseAbs().maxCoeff()});
    const double tol = 1e-12 * scale;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double cx = x.cov(i, j), cy = y.cov(i, j);
            if (!sets.b[i][j] && cx > cy + tol)
                throw PreconditionError("slepian: Y does not dominate X at (" + std::to_string(i) + "," +
                                        std::to_string(j) + ") outside B");
            if (!sets.a[i][j] && cx < cy - tol)
                throw PreconditionError("slepian: X does not dominate Y at (" + std::to_string(i) + "," +
                                        std::to_string(j) + ") outside A");
        }

    if (const auto* e = std::get_if<ExpLinear>(&f)) {
        require(e->c.size() == n, "slepian: coefficient vector has the wrong dimension");
        for (double c : e->c) require(std::isfinite(c) && c >= 0.0, "slepian: exponential-linear needs c >= 0");
        require(b.empty(), "slepian: exponential-linear functionals have nonnegative mixed derivatives; B must be empty");
        Eigen::Map<const Eigen::VectorXd> c(e->c.data(), static_cast<Eigen::Index>(n));
        auto closed = [&](const GaussianVectorSpec& g) { return std::exp(0.5 * c.dot(g.cov * c)); };
        if (use_closed(opts)) {
            const double l = closed(x), r = closed(y);
            return exact_compare(l, r, std::max(l, r));
        }
        auto fn = [&](std::span<const double> v) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += e->c[i] * v[i];
            return std::exp(s);
        };
        return numeric_compare(numeric(x, fn, opts), numeric(y, fn, opts));
    }

    const auto& pp = std::get<PowerProduct>(f);
    require(pp.gamma > 0.0 && std::isfinite(pp.gamma), "slepian: gamma must be > 0");
    require(pp.group.size() == n && pp.weights.size() == n, "slepian: group and weight vectors need one entry per coordinate");
    const std::size_t groups = pp.exponents.size();
    std::vector<std::size_t> members(groups, 0);
    for (std::size_t i = 0; i < n; ++i) {
        require(pp.group[i] >= 0 && static_cast<std::size_t>(pp.group[i]) < groups, "slepian: group id out of range");
        require(pp.weights[i] > 0.0 && std::isfinite(pp.weights[i]), "slepian: weights must be > 0");
        ++members[pp.group[i]];
    }
    for (double e : pp.exponents) require(e > 0.0 && std::isfinite(e), "slepian: exponents must be > 0");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const bool same = pp.group[i] == pp.group[j];
            const double ag = pp.exponents[pp.group[i]];
            // Diagonal and cross-group mixed derivatives are >= 0; within a group they carry sign(a_g - 1).
            if (sets.a[i][j] && i != j && same && ag < 1.0)
                throw PreconditionError("slepian: pair in A has a negative mixed derivative (group exponent < 1)");
            if (sets.b[i][j] && (i == j || !same || ag > 1.0))
                throw PreconditionError("slepian: pair in B has a positive mixed derivative");
        }
    const double g = pp.gamma;
    Eigen::VectorXd s = x.cov.diagonal();  // renormalization uses the X-side variances
    const bool singletons = std::all_of(members.begin(), members.end(), [](std::size_t m) { return m <= 1; });
    if (singletons && use_closed(opts)) {
        // Then F = exp(const + gamma sum a_i x_i).
        Eigen::VectorXd c(n);
        double konst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double a_i = pp.exponents[pp.group[i]];
            c(i) = g * a_i;
            konst += a_i * (std::log(pp.weights[i]) - 0.5 * g * g * s(i));
        }
        auto closed = [&](const GaussianVectorSpec& v) { return std::exp(konst + 0.5 * c.dot(v.cov * c)); };
        const double l = closed(x), r = closed(y);
        return exact_compare(l, r, std::max(l, r));
    }
    require(!opts.force || *opts.force != IntegrationMethod::closed_form,
            "slepian: no closed form for grouped power products");
    auto fn = [&](std::span<const double> v) {
        std::vector<double> sums(groups, 0.0);
        for (std::size_t i = 0; i < n; ++i) sums[pp.group[i]] += pp.weights[i] * std::exp(g * v[i] - 0.5 * g * g * s(i));
        double logf = 0.0;
        for (std::size_t k = 0; k < groups; ++k)
            if (members[k]) logf += pp.exponents[k] * std::log(sums[k]);
        return std::exp(logf);
    };
    return numeric_compare(numeric(x, fn, opts), numeric(y, fn, opts));
}

ComparisonResult kahane_verify(const GaussianVectorSpec& x, const GaussianVectorSpec& y,
                               const std::vector<double>& weights, const KahaneFunctional& f,
                               const IntegrationOptions& opts) {
    const std::size_t n = x.dim();
    require(y.dim() == n, "kahane: X and Y must have the same dimension");
    require(x.centered() && y.centered(), "kahane: both Gaussian vectors must be centered");
    require(weights.size() == n, "kahane: need one weight per coordinate");
    bool any = false;
    for (double w : weights) {
        require(std::isfinite(w) && w >= 0.0, "kahane: weights must be >= 0");
        any = any || w > 0.0;
    }
    require(any, "kahane: weights must not all vanish");
    const double scale = std::max({1.0, x.cov.cwiseAbs().maxCoeff(), y.cov.cwiseAbs().maxCoeff()});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (x.cov(i, j) > y.cov(i, j) + 1e-12 * scale)
                throw PreconditionError("kahane: Y does not dominate X in covariance at (" + std::to_string(i) +
                                        "," + std::to_string(j) + ")");

    std::function<double(double)> phi;
    std::optional<std::function<double(const Eigen::MatrixXd&)>> closed;
    if (const auto* pw = std::get_if<PowerFunctional>(&f)) {
        const double p = pw->p;
        require(std::isfinite(p), "kahane: exponent must be finite");
        if (p > 0.0 && p < 1.0)
            throw PreconditionError("kahane: t^p with 0 < p < 1 is concave; the inequality reverses and is not checked");
        phi = [p](double t) { return std::pow(t, p); };
        if (p == 0.0) closed = [](const Eigen::MatrixXd&) { return 1.0; };
        if (p == 1.0) closed = [&weights](const Eigen::MatrixXd&) {
            double s = 0.0;
            for (double w : weights) s += w;
            return s;
        };
        if (p == 2.0) closed = [&weights, n](const Eigen::MatrixXd& c) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) s += weights[i] * weights[j] * std::exp(c(i, j));
            return s;
        };
    } else if (const auto* ex = std::get_if<ExpFunctional>(&f)) {
        const double c = ex->c;
        require(std::isfinite(c) && c <= 0.0,
                "kahane: exp(c t) with c > 0 has no expectation on lognormal sums (growth condition fails)");
        phi = [c](double t) { return std::exp(c * t); };
        if (c == 0.0) closed = [](const Eigen::MatrixXd&) { return 1.0; };
    } else {
        const double a = std::get<HingeFunctional>(f).a;
        require(std::isfinite(a), "kahane: hinge location must be finite");
        phi = [a](double t) { return std::max(t - a, 0.0); };
        if (a <= 0.0) closed = [&weights, a](const Eigen::MatrixXd&) {
            double s = 0.0;
            for (double w : weights) s += w;
            return s - a;
        };
    }

    if (closed && use_closed(opts)) {
        const double l = (*closed)(x.cov), r = (*closed)(y.cov);
        return exact_compare(l, r, std::max(std::abs(l), std::abs(r)));
    }
    require(!opts.force || *opts.force != IntegrationMethod::closed_form, "kahane: no closed form for this functional");
    auto integrand = [&](const GaussianVectorSpec& g) {
        Eigen::VectorXd var = g.cov.diagonal();
        return [&, var](std::span<const double> v) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += weights[i] * std::exp(v[i] - 0.5 * var(i));
            return phi(s);
        };
    };
    return numeric_compare(numeric(x, integrand(x), opts), numeric(y, integrand(y), opts));
}

double kahane_shift_constant(double r, double gamma, double p) {
    require(std::isfinite(r) && r >= 0.0, "kahane_shift_constant: R must be finite and >= 0");
    require(std::isfinite(gamma) && std::isfinite(p), "kahane_shift_constant: gamma and p must be finite");
    return std::exp(0.5 * gamma * gamma * r * p * (p - 1.0));
}

BoostComparison decorrelation_boost(double gamma, double k, double q, double delta, double var_l, double var_r,
                                    double cov_lr) {
    require(delta > 0.0 && delta < 1.0, "decorrelation boost: delta must lie in (0,1)");
    require(k > 0.0 && q > 0.0, "decorrelation boost: k and q must be > 0");
    const double s2 = -2.0 * std::log(delta);
    require(cov_lr <= s2, "decorrelation boost: the common boost must dominate the cross covariance");
    Eigen::Matrix2d copies, coupled;
    copies << var_l + s2, s2, s2, var_r + s2;
    coupled << var_l + s2, cov_lr, cov_lr, var_r + s2;
    PowerProduct f{gamma, {0, 1}, {1.0, 1.0}, {k, q}};
    BoostComparison out;
    out.slepian = slepian_verify(GaussianVectorSpec(coupled), GaussianVectorSpec(copies), {{0, 1}}, {}, f);
    auto boost = [&](double a) { return std::exp(0.5 * a * a * gamma * gamma * s2); };  // E[e^{gamma a s N}]
    out.boost_ratio = boost(k + q) / (boost(k) * boost(q));
    out.predicted_factor = std::pow(delta, -2.0 * gamma * gamma * k * q);
    return out;
}

namespace {

Eigen::MatrixXd random_cov(FuzzStream& s, int n) {
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = s.uniform(-1, 1);
    return a * a.transpose() / n + 0.1 * Eigen::MatrixXd::Identity(n, n);
}

bool is_psd(const Eigen::MatrixXd& c) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= 0.0;
}

SuiteCheck from_comparison(const std::string& name, const ComparisonResult& r, const std::string& detail) {
    return SuiteCheck{name, r.holds, r.slack, 0.0, r.tolerance, detail + " [" + to_string(r.method) + "]"};
}

// |a - b| within 5 combined error estimates (exact when both are closed forms).
SuiteCheck agreement(const std::string& name, double a, double b, double err, const std::string& detail) {
    const double tol = 5.0 * err + 1e-12 * std::max({std::abs(a), std::abs(b), 1.0});
    return SuiteCheck{name, std::abs(a - b) <= tol, a - b, 0.0, tol, detail};
}

}  // namespace

SuiteCheck kahane_monotonicity_trials(int trials, std::uint64_t seed) {
    FuzzStream s(seed, 10);
    int ok = 0;
    double worst = HUGE_VAL;
    for (int t = 0; t < trials; ++t) {
        const int n = 2 + static_cast<int>(std::min(4.0, std::floor(5.0 * s.next())));
        Eigen::MatrixXd c = random_cov(s, n);
        std::vector<double> w(n);
        for (double& v : w) v = s.uniform(0.1, 2.0);
        int i = static_cast<int>(std::min<double>(n - 1, std::floor(n * s.next())));
        int j = (i + 1 + static_cast<int>(std::min<double>(n - 2, std::floor((n - 1) * s.next())))) % n;
        double inc = s.uniform(0.01, 0.5) * std::sqrt(c(i, i) * c(j, j));
        Eigen::MatrixXd d = c;
        for (int h = 0; h < 60; ++h, inc *= 0.5) {
            d = c;
            d(i, j) += inc;
            d(j, i) += inc;
            if (is_psd(d)) break;
        }
        if (!is_psd(d)) {
            ++ok;  // no admissible increase: nothing to compare
            continue;
        }
        auto r = kahane_verify(GaussianVectorSpec(c), GaussianVectorSpec(d), w, PowerFunctional{2.0});
        worst = std::min(worst, r.slack);
        if (r.holds && r.slack >= 0.0) ++ok;
    }
    return SuiteCheck{"kahane_t2_monotone_under_perturbation", ok == trials, static_cast<double>(ok),
                      static_cast<double>(trials), 0.0,
                      "trials where E[(sum)^2] did not decrease; worst slack " + format_double(worst)};
}

std::vector<SuiteCheck> gaussian_suite(std::uint64_t seed) {
    std::vector<SuiteCheck> out;
    IntegrationOptions qmc;
    qmc.force = IntegrationMethod::quasi_mc;
    qmc.seed = seed;
    IntegrationOptions quad;
    quad.force = IntegrationMethod::quadrature;

    Eigen::Matrix2d id = Eigen::Matrix2d::Identity(), corr;
    corr << 1, 0.5, 0.5, 1;
    const GaussianVectorSpec x2(id), y2(corr);
    {
        auto r = slepian_verify(x2, y2, {{0, 1}}, {}, ExpLinear{{1, 1}});
        const double err = std::max(std::abs(r.lhs - std::exp(1.0)), std::abs(r.rhs - std::exp(1.5)));
        out.push_back(SuiteCheck{"slepian_closed_form_example", r.holds && err <= 1e-15 * std::exp(1.5), err, 0.0,
                                 1e-15 * std::exp(1.5),
                                 "E[e^{x1+x2}]: " + format_double(r.lhs) + " <= " + format_double(r.rhs)});
        auto q = slepian_verify(x2, y2, {{0, 1}}, {}, ExpLinear{{1, 1}}, qmc);
        out.push_back(agreement("slepian_qmc_matches_closed_form", q.lhs, r.lhs, q.error_estimate, "lhs, n=2"));
        out.push_back(agreement("slepian_qmc_matches_closed_form_rhs", q.rhs, r.rhs, q.error_estimate, "rhs, n=2"));
    }
    FuzzStream s(seed, 20);
    {
        Eigen::MatrixXd c5 = random_cov(s, 5);
        GaussianVectorSpec g5(c5);
        std::vector<double> coef{0.3, 0.1, 0.5, 0.2, 0.4};
        auto r = slepian_verify(g5, g5, {}, {}, ExpLinear{coef});
        auto q = slepian_verify(g5, g5, {}, {}, ExpLinear{coef}, qmc);
        out.push_back(agreement("slepian_qmc_matches_closed_form_n5", q.lhs, r.lhs, q.error_estimate / 2, "n=5"));
        out.push_back(from_comparison("slepian_equal_laws_exp_linear", r, "cov_X = cov_Y, n=5"));
        PowerProduct pp{1.0, {0, 0, 1, 1, 1}, {1, 2, 1, 0.5, 1}, {0.4, 1.5}};
        auto e = slepian_verify(g5, g5, {}, {}, pp);
        out.push_back(SuiteCheck{"slepian_equal_laws_power_product", std::abs(e.slack) <= e.tolerance, e.slack, 0.0,
                                 e.tolerance, "cov_X = cov_Y, n=5 [" + to_string(e.method) + "]"});
    }
    {
        // Grouped power product on n=3: quadrature and quasi-MC against each other, then a strict comparison.
        Eigen::Matrix3d cx, cy;
        cx << 1.0, 0.2, 0.1, 0.2, 1.0, 0.0, 0.1, 0.0, 1.0;
        cy = cx;
        cy(0, 2) = cy(2, 0) = 0.5;
        cy(1, 2) = cy(2, 1) = 0.3;
        PowerProduct pp{1.0, {0, 0, 1}, {1, 1, 1}, {0.6, 0.4}};
        auto qd = slepian_verify(GaussianVectorSpec(cx), GaussianVectorSpec(cy), {{0, 2}, {1, 2}}, {}, pp, quad);
        auto qm = slepian_verify(GaussianVectorSpec(cx), GaussianVectorSpec(cy), {{0, 2}, {1, 2}}, {}, pp, qmc);
        out.push_back(from_comparison("slepian_power_product_quadrature", qd, "cross-group covariance raised"));
        out.push_back(from_comparison("slepian_power_product_qmc", qm, "cross-group covariance raised"));
        out.push_back(agreement("slepian_quadrature_matches_qmc", qd.rhs, qm.rhs, qd.error_estimate + qm.error_estimate,
                                "rhs of the grouped comparison"));
    }
    {
        auto b = decorrelation_boost(1.0, 1.0, 1.0, 0.5, 1.0, 1.0, 0.3);
        out.push_back(from_comparison("slepian_boost_construction", b.slepian, "coupled vs copies with common boost"));
        out.push_back(agreement("boost_ratio_matches_delta_factor", b.boost_ratio, b.predicted_factor, 0.0,
                                "E[e^{g(k+q)sN}] / (E[e^{gksN}] E[e^{gqsN}]) vs delta^{-2 g^2 k q}"));
    }
    {
        const double c = kahane_shift_constant(std::log(2.0), 1.0, 2.0);
        out.push_back(SuiteCheck{"kahane_shift_constant_ln2", std::abs(c - 2.0) <= 4.0 * 0x1p-52, c, 2.0,
                                 4.0 * 0x1p-52, "e^{gamma^2 R p(p-1)/2} at R = ln 2, gamma = 1, p = 2"});
        out.push_back(SuiteCheck{"kahane_shift_constant_identities",
                                 kahane_shift_constant(0.0, 1.3, 2.5) == 1.0 && kahane_shift_constant(3.0, 1.3, 1.0) == 1.0,
                                 0.0, 0.0, 0.0, "R = 0 and p = 1 give 1"});
    }
    {
        std::vector<double> w{1.0, 1.0};
        auto cf = kahane_verify(x2, y2, w, PowerFunctional{2.0});
        out.push_back(from_comparison("kahane_t2_closed_form", cf, "E[(e^{X1-1/2}+e^{X2-1/2})^2]"));
        auto qm = kahane_verify(x2, y2, w, PowerFunctional{2.0}, qmc);
        out.push_back(agreement("kahane_t2_qmc_matches_closed_form", qm.lhs, cf.lhs, qm.error_estimate, "lhs"));
        out.push_back(agreement("kahane_t2_qmc_matches_closed_form_rhs", qm.rhs, cf.rhs, qm.error_estimate, "rhs"));
        auto qd = kahane_verify(x2, y2, w, PowerFunctional{2.0}, quad);
        out.push_back(agreement("kahane_t2_quadrature_matches_closed_form", qd.rhs, cf.rhs, qd.error_estimate, "rhs"));
        auto inv = kahane_verify(x2, y2, w, PowerFunctional{-1.0}, qmc);
        out.push_back(from_comparison("kahane_inverse_qmc", inv, "F(t) = 1/t, n=2"));
    }
    {
        Eigen::MatrixXd c4 = random_cov(s, 4);
        GaussianVectorSpec g4(c4);
        std::vector<double> w{0.5, 1.0, 0.25, 2.0};
        std::vector<std::pair<std::string, KahaneFunctional>> fs{
            {"t^2", PowerFunctional{2.0}}, {"t^3", PowerFunctional{3.0}}, {"t^-1", PowerFunctional{-1.0}},
            {"exp(-t)", ExpFunctional{-1.0}}, {"max(t-1,0)", HingeFunctional{1.0}}};
        for (const auto& [label, fn] : fs) {
            auto r = kahane_verify(g4, g4, w, fn, qmc);
            out.push_back(SuiteCheck{"kahane_equal_laws_" + label, std::abs(r.slack) <= r.tolerance, r.slack, 0.0,
                                     r.tolerance, "cov_X = cov_Y, n=4 [quasi-MC]"});
        }
    }
    out.push_back(kahane_monotonicity_trials(100, seed));
    return out;
}

}  // namespace gmclab
