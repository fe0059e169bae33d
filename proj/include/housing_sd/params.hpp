#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <string_view>
#include <vector>

#include "housing_sd/engine.hpp"

namespace hsd {

struct CovidParams {
    bool on = true;
    double magnitude = 0.35;      // fractional income loss at onset
    double start_time = 26.75;    // months
    double recovery_delay = 8.0;  // months, smoothing delay of the recovery
};

struct MoratoriumParams {
    bool on = false;
    double effect_size = 0.9;                 // share of processing halted
    double start_time = 26.75;                // months
    double duration = 18.0;                   // months
    double filing_reduction = 0.5;            // drop in filing propensity
    double filing_recovery_delay = 36.0;      // months
    double filing_lead = 0.5;                 // filings fall this long before start
    double filing_resume_lag = 3.0;           // recovery begins this long after end
};

struct EraParams {
    bool on = false;
    double total_funds = 46.5e9;       // dollars
    double start_time = 36.0;          // months (January 2021)
    double disbursement_time = 33.3;   // months to pay out total_funds at the base rate
    double rate_multiplier = 1.0;
};

struct InitialStocks {
    double units_occupied = 9.0e6;
    double units_pending = 5.0e5;
    double units_unoccupied = 6.0e5;
    double units_foreclosed = 1.0e5;
    double households_insecure = 10.5e6;
    double households_homeless = 5.68e5;
    double rent_due = 9.0e9;
    double mortgage_due = 5.5e9;
};

/// Every constant of the housing model. Monetary values are dollars, times
/// are months, fractional rates are per month.
struct ModelParams {
    double avg_monthly_rent = 1000.0;
    double avg_household_income = 3500.0;
    double rent_burden_threshold = 0.30;
    double at_rent_base = 1.0;
    double landlord_tolerance = 1000.0;
    double avg_monthly_mortgage = 600.0;
    double at_mortgage_base = 1.0;
    double eviction_proc_proportion = 0.38;
    double at_process = 1.0;
    double filing_resolution_time = 2.5;
    double baseline_turnover_fraction = 0.02;
    double baseline_filing_fraction = 0.03;
    double foreclosure_fraction_occupied = 5e-4;
    double foreclosure_fraction_unoccupied = 1e-3;
    double foreclosure_sale_time = 12.0;
    double move_in_time = 1.0;
    double stock_decline_fraction = 5e-4;
    double crowding_reference = 1.0;
    double homeless_entry_fraction = 0.05;
    double doubled_up_homeless_fraction = 2e-3;
    double rate_new_insecurity = 4e5;
    double rate_new_homelessness = 2e4;
    double fr_stabilize_insecure = 0.04;
    double fr_stabilize_homeless = 0.02;
    double fr_exit_homeless = 0.05;
    double fr_double_up_homeless = 0.05;

    InitialStocks initial;
    CovidParams covid;
    MoratoriumParams moratorium;
    EraParams era;

    GompertzCurve stress_curve{3.0, -108.2, 1.4, 1.0};
    GompertzCurve rent_delay_curve{3.0, 1.0, 0.405, 1.0};
    LogisticCurve mortgage_delay_curve{3.0, 1.0, 1.5, 10.0};
    LogisticCurve crowding_curve{2.0, 1.0, 1.5, 5.0};

    /// Provenance tag per parameter name: paper | cited-source | assumption | calibrated.
    std::map<std::string, std::string, std::less<>> provenance;

    /// Share of displaced households that stay housing insecure (double up or
    /// move somewhere cheaper) rather than entering homelessness.
    double doubling_up_fraction() const { return 1.0 - homeless_entry_fraction; }

    /// Throws std::invalid_argument naming the first violated constraint.
    void validate() const;
};

enum class ParamKind { Real, Flag };

struct ParamInfo {
    std::string_view name;
    std::string_view units;
    ParamKind kind;
    bool sweepable;  // included in +/- perturbation sweeps
};

/// All parameters in file order.
const std::vector<ParamInfo>& param_registry();
const ParamInfo& param_info(std::string_view name);
/// Valid closed range {lower, upper} for a parameter.
std::pair<double, double> param_bounds(std::string_view name);

double get_param(const ModelParams& p, std::string_view name);
void set_param(ModelParams& p, std::string_view name, double value);
std::string provenance_of(const ModelParams& p, std::string_view name);

/// Parameter file: TOML with one inline table per entry,
///   name = { value = 1000.0, units = "dollars/unit/month", source = "cited-source" }
/// grouped under [section] headers for dotted names.
ModelParams read_params(std::istream& in);
ModelParams load_params(const std::string& path);
void write_params(std::ostream& out, const ModelParams& p);
std::string params_to_string(const ModelParams& p);

}  // namespace hsd
