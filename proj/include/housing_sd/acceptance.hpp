#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "housing_sd/params.hpp"
#include "housing_sd/scenarios.hpp"

namespace hsd {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    std::vector<std::string> details;  // one line per sub-check, prefixed ok/FAIL
    double seconds = 0;
};

struct AcceptanceOptions {
    std::string self_consistency_spec;  // calibration spec with planted values; empty skips that sub-check (fails)
    unsigned workers = 0;
    SimClock clock;
    std::uint64_t seed = 7;  // for the randomized property checks
};

/// Runs the six release criteria against a parameter set and the run1..run4a
/// scenario definitions.
std::vector<CriterionResult> run_acceptance(const ModelParams& params, const std::vector<Scenario>& scenarios,
                                            const AcceptanceOptions& options = {});

/// "PASS  criterion 1: title" style line.
std::string format_criterion(const CriterionResult& r);

}  // namespace hsd
