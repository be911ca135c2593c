#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gmclab {

struct ReportRow {
    std::string label;
    double scale = 0.0;
    double estimate = 0.0;
    double std_err = 0.0;
    double log_estimate = 0.0;
    std::size_t n_samples = 0;
};

struct Assertion {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    std::string detail;
    // Diagnostics are reported but never decide pass/fail.
    bool diagnostic = false;
};

struct SlopeFit {
    double slope = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

struct DecompositionReport {
    std::string experiment;
    std::vector<std::pair<std::string, std::string>> parameters;
    std::vector<ReportRow> rows;
    std::optional<SlopeFit> fit;
    std::vector<Assertion> assertions;

    void add_parameter(const std::string& key, double value);
    void add_parameter(const std::string& key, const std::string& value);
    const Assertion* find(const std::string& name) const;
    bool passed() const;
    // label,scale,estimate,stderr,log_estimate,n_samples
    std::string to_csv() const;
};

}  // namespace gmclab
