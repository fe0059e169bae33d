#pragma once

#include <span>
#include <string>
#include <vector>

#include "housing_sd/engine.hpp"
#include "housing_sd/params.hpp"
#include "housing_sd/scenarios.hpp"

namespace hsd {

// ---------------------------------------------------------------------------
// Theil inequality statistics

/// U = RMSE / (RMS(sim) + RMS(obs)); the three shares split the mean squared
/// error into bias (U_M), unequal variation (U_S) and imperfect covariation
/// (U_C) and sum to one whenever mse > 0. Population moments throughout.
struct TheilResult {
    double U = 0;
    double U_M = 0;
    double U_S = 0;
    double U_C = 0;
    double mse = 0;
};

/// Throws std::invalid_argument on length mismatch or fewer than two points,
/// std::domain_error when both series are identically zero.
TheilResult theils_u(std::span<const double> simulated, std::span<const double> observed);

/// Historical series to compare against. Loaded from CSV with columns
/// calendar_month,value,units,source; the series name is the file stem.
struct ReferenceMode {
    std::string series;
    std::vector<double> times;  // months since January 2018
    std::vector<double> values;
    std::string units;
    std::string source;  // AHAR | Eviction Lab | Pulse | NLIHC
};

ReferenceMode parse_reference_mode(const std::string& series, const std::string& csv_text);
ReferenceMode load_reference_mode(const std::string& path);
/// Every *.csv in dir, sorted by series name; empty when dir does not exist.
std::vector<ReferenceMode> load_reference_dir(const std::string& dir);

/// Model series and units a reference series maps onto
/// (homeless -> H_lh, evictions -> e_p, arrears -> R, ...).
struct SeriesMapping {
    std::string model_series;
    std::string units;
};
SeriesMapping reference_mapping(const std::string& series);

struct SeriesFit {
    std::string series;
    std::string model_series;
    std::size_t points = 0;
    TheilResult theil;
};

SeriesFit fit_reference(const RunResult& run, const ReferenceMode& mode);

// ---------------------------------------------------------------------------
// Invariant checks

/// Non-negativity, finiteness, unit and household conservation per step,
/// effect-curve bounds and assistance accounting. Returns one message per
/// violation; empty means the run is clean.
std::vector<std::string> check_invariants(const RunResult& run);

// ---------------------------------------------------------------------------
// Sensitivity

struct SensitivityEntry {
    std::string parameter;
    double base_value = 0;
    double low_value = 0;
    double high_value = 0;
    MetricSet low;
    MetricSet high;
    std::vector<std::pair<std::string, double>> elasticity;  // per headline metric
    double max_abs_elasticity = 0;
    std::vector<std::string> violations;  // invariant breaches on either run
    std::string error;                    // set if a perturbed run failed outright
};

struct SensitivityReport {
    std::string scenario;
    double delta = 0.15;
    MetricSet baseline;
    std::vector<SensitivityEntry> entries;  // ranked by max_abs_elasticity, descending
    std::size_t runs = 0;

    std::vector<std::string> flagged() const;
    const SensitivityEntry& entry(const std::string& parameter) const;
};

/// Headline metrics used for elasticities and rankings.
const std::vector<std::string>& headline_metrics();

/// One-at-a-time perturbation of every sweepable parameter by (1 - delta)
/// and (1 + delta), clipped to the parameter's valid range. Runs execute on
/// `workers` threads (0 = default_workers()).
SensitivityReport sensitivity_sweep(const ModelParams& params, const Scenario& scenario, double delta = 0.15,
                                    const SimClock& clock = {}, unsigned workers = 0);

// ---------------------------------------------------------------------------
// Extreme conditions

struct ExtremeCase {
    std::string name;
    bool passed = false;
    std::string detail;
};

std::vector<ExtremeCase> extreme_conditions(const ModelParams& params, const SimClock& clock = {});

/// Worker count: HOUSING_SD_WORKERS if set, else hardware concurrency.
unsigned default_workers();

}  // namespace hsd
