#include "gmclab/report.hpp"

#include "gmclab/format.hpp"

namespace gmclab {

void DecompositionReport::add_parameter(const std::string& key, double value) {
    parameters.emplace_back(key, format_double(value));
}

void DecompositionReport::add_parameter(const std::string& key, const std::string& value) {
    parameters.emplace_back(key, value);
}

const Assertion* DecompositionReport::find(const std::string& name) const {
    for (const auto& a : assertions)
        if (a.name == name) return &a;
    return nullptr;
}

bool DecompositionReport::passed() const {
    for (const auto& a : assertions)
        if (!a.diagnostic && !a.passed) return false;
    return true;
}

std::string DecompositionReport::to_csv() const {
    std::string out = "label,scale,estimate,stderr,log_estimate,n_samples\n";
    for (const auto& r : rows) {
        out += r.label + "," + format_double(r.scale) + "," + format_double(r.estimate) + "," +
               format_double(r.std_err) + "," + format_double(r.log_estimate) + "," +
               std::to_string(r.n_samples) + "\n";
    }
    return out;
}

}  // namespace gmclab
