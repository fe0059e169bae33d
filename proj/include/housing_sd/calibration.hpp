#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "housing_sd/params.hpp"
#include "housing_sd/scenarios.hpp"
#include "housing_sd/validation.hpp"

namespace hsd {

struct FreeParameter {
    std::string name;
    double lower = 0;
    double upper = 0;
};

/// One term of the calibration loss.
///   kind "metric": metric of `scenario`, optionally transformed against
///                  `relative_to` ("pct_change" or "difference").
///   kind "theil":  Theil's U of `scenario` against the reference series
///                  `series`; target is the U to stay under.
struct CalibrationTarget {
    enum class Mode { Equal, AtLeast, AtMost };

    std::string kind = "metric";
    std::string scenario;
    std::string metric;
    std::string relative_to;
    std::string transform = "value";  // value | pct_change | difference
    std::string series;
    double target = 0;
    double scale = 0;  // residual divisor; 0 means |target| (or 1)
    double weight = 1;
    Mode mode = Mode::Equal;

    std::string describe() const;
};

struct CalibrationSpec {
    std::vector<FreeParameter> free;
    std::vector<CalibrationTarget> targets;
    bool equilibrate = true;  // re-solve the stationary constants per evaluation
    int max_evaluations = 3000;
    int restarts = 2;
    int initial_samples = 0;  // uniform draws over the box before the simplex starts
    std::uint64_t seed = 20200301;
    double tolerance = 1e-10;
    std::string reference_dir;  // for theil targets
    // Synthetic-target mode: when set, every target value is replaced by what
    // the model produces with these parameter values planted.
    std::vector<std::pair<std::string, double>> planted;
};

CalibrationSpec parse_calibration_spec(const std::string& json_text);
CalibrationSpec load_calibration_spec(const std::string& path);

struct TargetReport {
    std::string description;
    double value = 0;
    double target = 0;
    double loss = 0;
};

struct CalibrationResult {
    ModelParams params;
    double initial_loss = 0;
    double final_loss = 0;
    int evaluations = 0;
    bool converged = false;
    std::vector<std::string> warnings;
    std::vector<TargetReport> report;
};

/// Value of every target for one parameter set, plus the weighted loss.
/// Scenarios not named in `scenarios` fall back to the defaults.
std::vector<TargetReport> evaluate_targets(const CalibrationSpec& spec, const ModelParams& params,
                                           const std::vector<Scenario>& scenarios, const SimClock& clock,
                                           const std::vector<ReferenceMode>& references, double* loss = nullptr);

/// Fills target values from a run with the planted parameters; no-op when
/// spec.planted is empty.
CalibrationSpec resolve_planted(CalibrationSpec spec, const ModelParams& start, const std::vector<Scenario>& scenarios,
                                const SimClock& clock = {});

/// Bounded Nelder-Mead over the free parameters with seeded restarts. Never
/// throws on a poor fit: the best point found is returned with a warning.
CalibrationResult calibrate(const CalibrationSpec& spec, const ModelParams& start,
                            const std::vector<Scenario>& scenarios, const SimClock& clock = {});

}  // namespace hsd
