#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace gmclab {

enum class IntegrationMethod { closed_form, quadrature, quasi_mc };
std::string to_string(IntegrationMethod m);

// The claim checked is always lhs <= rhs; slack = rhs - lhs.
struct ComparisonResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    IntegrationMethod method = IntegrationMethod::closed_form;
    double tolerance = 0.0;       // slack >= -tolerance counts as holding
    double error_estimate = 0.0;  // integration error of rhs - lhs (0 for closed forms)
    bool holds = false;
};

// x^{p2} y^{q2} + x^{q2} y^{p2} <= x^{p1} y^{q1} + x^{q1} y^{p1}
ComparisonResult check_muirhead(double x, double y, double p1, double q1, double p2, double q2);
// (x+y)^{k+q} <= x^{k+q} + y^{k+q} + (2^k - 1)(x^k y^q + x^q y^k)
ComparisonResult check_converse_super(double x, double y, int k, double q);
// x^{p+q} + y^{p+q} - 2(x^p y^q + x^q y^p) <= (x+y)^{p+q}
ComparisonResult check_converse_sub(double x, double y, double p, double q);
// x^{2p} + y^{2p} <= (x+y)^{2p} + sqrt 2 x^p y^p, for 1/4 <= p <= 1/2
ComparisonResult check_converse_sub_sharp(double x, double y, double p);

struct FuzzFailure {
    std::string proposition;
    std::vector<std::pair<std::string, double>> inputs;
    ComparisonResult result;
};

struct FuzzSummary {
    std::string proposition;
    std::size_t cases = 0;
    std::size_t violations = 0;
    double worst_relative_slack = 0.0;  // min over cases of slack / scale
    std::vector<FuzzFailure> failures;
};

// Random cases per proposition (including exact equality configurations), seeded.
std::vector<FuzzSummary> fuzz_elementary(std::size_t cases, std::uint64_t seed);
// proposition,<input columns>,lhs,rhs,slack
std::string failures_csv(const std::vector<FuzzSummary>& summaries);

struct GaussianVectorSpec {
    Eigen::MatrixXd cov;
    Eigen::VectorXd mean;  // empty means centered

    explicit GaussianVectorSpec(Eigen::MatrixXd c, Eigen::VectorXd m = {});
    std::size_t dim() const { return static_cast<std::size_t>(cov.rows()); }
    bool centered() const;
};

struct IntegrationOptions {
    std::optional<IntegrationMethod> force;  // unset: closed form, else quadrature (n <= 3), else quasi-MC
    int quadrature_nodes = 64;
    int qmc_log2_points = 12;  // points per shift
    int qmc_shifts = 16;
    std::uint64_t seed = 1;
};

struct Expectation {
    double value = 0.0;
    double error = 0.0;
    IntegrationMethod method = IntegrationMethod::quadrature;
};

// E[f(X)] by tensor Gauss-Hermite (error |Q_n - Q_{n/2}|) or shifted Sobol points
// (error = standard error across shifts).
Expectation gaussian_expectation(const GaussianVectorSpec& x,
                                 const std::function<double(std::span<const double>)>& f,
                                 IntegrationMethod method, const IntegrationOptions& opts = {});

// Nodes and weights for E[f(Z)], Z standard normal.
std::pair<std::vector<double>, std::vector<double>> gauss_hermite_normal(int n);

// exp(sum c_i x_i), c >= 0: every mixed second derivative is >= 0.
struct ExpLinear {
    std::vector<double> c;
};

// prod_g (sum_{i in g} w_i e^{gamma x_i - gamma^2 s_i / 2})^{a_g}, s_i the X-side variances.
// Cross-group mixed derivatives are >= 0; within group g they carry the sign of a_g - 1.
struct PowerProduct {
    double gamma = 1.0;
    std::vector<int> group;         // group id per coordinate, ids 0..G-1
    std::vector<double> weights;    // w_i > 0
    std::vector<double> exponents;  // a_g > 0
};

using SlepianFunctional = std::variant<ExpLinear, PowerProduct>;
using IndexPairs = std::vector<std::pair<int, int>>;  // unordered pairs; (i,j) also covers (j,i)

// E[F(X)] <= E[F(Y)] given Y dominates X off B, X dominates Y off A, and the sign of the
// mixed derivatives of F (>= 0 on A, <= 0 on B).
ComparisonResult slepian_verify(const GaussianVectorSpec& x, const GaussianVectorSpec& y,
                                const IndexPairs& a, const IndexPairs& b, const SlepianFunctional& f,
                                const IntegrationOptions& opts = {});

struct PowerFunctional {
    double p = 2.0;  // p >= 1 or p <= 0
};
struct ExpFunctional {
    double c = -1.0;  // c <= 0: exp(c t) of a lognormal sum has no expectation for c > 0
};
struct HingeFunctional {
    double a = 0.0;
};
using KahaneFunctional = std::variant<PowerFunctional, ExpFunctional, HingeFunctional>;

// E[F(sum p_i e^{X_i - Var X_i / 2})] <= same with Y, for Y dominating X everywhere.
ComparisonResult kahane_verify(const GaussianVectorSpec& x, const GaussianVectorSpec& y,
                               const std::vector<double>& weights, const KahaneFunctional& f,
                               const IntegrationOptions& opts = {});

// E[(e^{gamma sqrt(R) N - gamma^2 R / 2})^p] = e^{gamma^2 R p (p-1) / 2}
double kahane_shift_constant(double r, double gamma, double p);

// The boost construction for two boxes at distance delta: independent copies plus a common
// boost sqrt(-2 ln delta) N against the coupled field plus independent boosts.
struct BoostComparison {
    ComparisonResult slepian;  // E[F(coupled + independent boosts)] <= E[F(copies + common boost)]
    double boost_ratio = 0.0;  // E[e^{gamma(k+q) s N}] / (E[e^{gamma k s N}] E[e^{gamma q s N}])
    double predicted_factor = 0.0;  // delta^{-2 gamma^2 k q}
};
BoostComparison decorrelation_boost(double gamma, double k, double q, double delta, double var_l,
                                    double var_r, double cov_lr);

struct SuiteCheck {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

// Monotonicity of the closed-form Kahane t^2 right side under single off-diagonal increases.
SuiteCheck kahane_monotonicity_trials(int trials, std::uint64_t seed);
// The fixed Gaussian comparison checks: closed-form examples, equal-law identities and the
// agreement of numerical paths with closed forms.
std::vector<SuiteCheck> gaussian_suite(std::uint64_t seed);

}  // namespace gmclab
