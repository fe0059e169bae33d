#pragma once

#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "housing_sd/engine.hpp"
#include "housing_sd/model.hpp"
#include "housing_sd/params.hpp"

namespace hsd {

/// Policy and shock switches for one run. Overrides are applied last and use
/// registry names ("era.start_time", "covid.magnitude", ...).
struct Scenario {
    std::string name;
    std::string label;
    bool covid_on = false;
    bool moratorium_on = false;
    bool era_on = false;
    double era_rate_multiplier = 1.0;
    std::vector<std::pair<std::string, double>> overrides;

    ModelParams apply(ModelParams p) const;
};

/// run1 (pre-pandemic), run2 (COVID only), run3 (+ moratorium),
/// run4 (+ rental assistance), run4a (run4 with faster disbursement).
std::vector<Scenario> default_scenarios(double run4a_multiplier = 3.0);
std::vector<Scenario> load_scenarios(const std::string& path);
std::vector<Scenario> parse_scenarios(const std::string& json_text);
const Scenario& find_scenario(const std::vector<Scenario>& all, const std::string& name);

class ScenarioError : public std::runtime_error {
public:
    ScenarioError(const std::string& scenario, const std::string& what)
        : std::runtime_error(scenario + ": " + what), scenario_(scenario) {}
    const std::string& scenario() const { return scenario_; }

private:
    std::string scenario_;
};

/// Headline metrics over the analytical window [burn_in, horizon].
struct MetricSet {
    double total_evictions = 0;   // processed evictions in window, units
    double total_filings = 0;     // filings in window, units
    double arrears_end = 0;       // rent due at horizon, dollars
    double arrears_growth_36m = 0;  // rent due at horizon minus 36 months earlier
    double peak_arrears = 0;      // max rent due in window
    double mean_crowding = 0;     // households per occupied unit, window mean
    double homeless_end = 0;      // literally homeless households at horizon
    double mean_homeless = 0;
    double insecure_end = 0;
    double era_disbursed = 0;     // cumulative assistance paid by horizon
    double era_disbursed_feb2022 = 0;  // cumulative assistance paid by February 2022 (or horizon)
    double era_remaining = 0;
    double era_exhausted_at = std::numeric_limits<double>::quiet_NaN();  // first time funds hit zero

    std::vector<std::pair<std::string, double>> items() const;
    double get(const std::string& name) const;
};

const std::vector<std::string>& metric_names();

struct RunResult {
    std::string scenario;
    SimClock clock;
    ModelParams params;  // after scenario switches
    std::vector<double> times;
    std::vector<StateVector> states;
    std::vector<housing::FlowSet> flows;  // evaluated at each sample
    MetricSet metrics;
    std::vector<std::string> diagnostics;  // clamp events and epsilon guards

    double accumulated_arrears_at(double t) const;
    std::size_t index_at(double t) const;
    double series_value(const std::string& name, std::size_t i) const;
};

RunResult run_scenario(const Scenario& scenario, const ModelParams& params, const SimClock& clock = {});
MetricSet compute_metrics(const RunResult& r);

struct MetricDelta {
    std::string metric;
    double baseline = 0;
    double variant = 0;
    double absolute = 0;
    double percent = 0;  // relative change, NaN when the baseline is zero
};

struct Comparison {
    std::string baseline;
    std::string variant;
    std::vector<MetricDelta> deltas;
    const MetricDelta& operator[](const std::string& metric) const;
};

/// Throws std::invalid_argument when the runs used different clocks.
Comparison compare(const RunResult& baseline, const RunResult& variant);

/// Relative change (variant - baseline) / baseline.
double pct_change(double baseline, double variant);

struct Table {
    std::vector<std::string> columns;
    std::vector<std::string> labels;  // calendar label per row
    std::vector<std::vector<double>> rows;
    std::string to_csv() const;
};

/// One row per sample: t, calendar month, then each selected stock, flow or
/// auxiliary in selection order. Unknown names throw std::invalid_argument.
Table emit_timeseries(const RunResult& r, const std::vector<std::string>& selection);

}  // namespace hsd
