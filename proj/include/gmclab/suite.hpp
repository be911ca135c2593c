#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gmclab/report.hpp"

namespace gmclab {

struct SuiteOptions {
    std::uint64_t seed = 20240611;
    unsigned workers = 0;
    std::string cache_dir;
    // Small sample counts and coarse grids: exercises every code path in seconds. Statistical
    // assertions are not meaningful at this budget.
    bool reduced = false;
};

struct CriterionResult {
    std::string id;
    std::string title;
    bool passed = false;
    double seconds = 0.0;
    std::string summary;  // one line of headline numbers
    std::vector<Assertion> assertions;
    std::vector<std::pair<std::string, std::string>> csv;  // file name, contents
};

// C1 .. C10
std::vector<std::string> criterion_ids();
CriterionResult run_criterion(const std::string& id, const SuiteOptions& opts);

}  // namespace gmclab
