#pragma once

#include <string>
#include <vector>

#include "housing_sd/engine.hpp"
#include "housing_sd/params.hpp"

namespace hsd::housing {

enum Stock : std::size_t {
    RentDue,
    MortgageDue,
    UnitsOccupied,
    UnitsPending,
    UnitsUnoccupied,
    UnitsForeclosed,
    HouseholdsInsecure,
    HouseholdsHomeless,
    EraFunds,
    EraDisbursed,
    CumulativeEvictions,
    CumulativeFilings,
    CovidSmooth,
    FilingRecoverySmooth,
    kStockCount
};

/// Guard for per-unit and per-household divisions.
inline constexpr double kEpsilon = 1e-9;

const std::shared_ptr<const StockLayout>& stock_layout();
StateVector initial_state(const ModelParams& p);

/// Every flow (per month) and auxiliary of one derivative evaluation.
struct FlowSet {
    // rent and mortgage, dollars/month
    double r_d = 0, r_p = 0, era_payment = 0, arrears_writeoff = 0;
    double m_d = 0, m_p = 0, mortgage_writeoff = 0;
    // rental units/month
    double e_f = 0, e_r = 0, e_p = 0, t_m = 0, t_n = 0;
    double f_o = 0, f_o_occupied = 0, f_o_pending = 0, f_uo = 0, f_s = 0, s_d = 0;
    // households/month
    double i_new = 0, i_stbl = 0, h_new = 0, h_ent = 0, h_exit = 0, h_du = 0, h_stbl = 0;

    // auxiliaries
    double covid_effect = 0;
    double burden_ratio = 0;
    double crowding = 0;
    double doubled_up = 0;
    double E_r = 1, E_es = 1, E_m = 1, E_cr = 1, E_or = 1, conflict = 1;
    double processing_factor = 1, filing_factor = 1;
    double covid_smooth_rate = 0, filing_smooth_rate = 0;
    int guard_hits = 0;  // epsilon guards that fired
};

/// Flow and auxiliary names in emit order; value_of() reads them back.
const std::vector<std::string>& flow_names();
double value_of(const FlowSet& f, const std::string& name);

// Individual model relations, usable on their own.

double covid_shock(const ModelParams& p, double covid_smooth, double t);

struct RentFlows {
    double r_d = 0, r_p = 0, arrears_writeoff = 0, burden_ratio = 0, E_r = 1;
};
/// `departures` is processed evictions plus move-outs (units/month); departing
/// tenants leave their share of arrears behind.
RentFlows rent_flows(const StateVector& s, const ModelParams& p, double covid_effect, double departures = 0.0);

double economic_stress_effect(const StateVector& s, const ModelParams& p);

struct MortgageFlows {
    double m_d = 0, m_p = 0, ratio = 0, E_m = 1;
};
/// `landlord_income` is rent collected (tenant payments plus assistance), dollars/month.
MortgageFlows mortgage_flows(const StateVector& s, const ModelParams& p, double landlord_income);

struct Filing {
    double e_f = 0, E_or = 1;
};
Filing eviction_filing_flow(const StateVector& s, const ModelParams& p, double mortgage_pressure, double conflict,
                            double filing_factor);

double eviction_processing_flow(const StateVector& s, const ModelParams& p, double covid_effect,
                                double processing_factor);

struct Crowding {
    double c = 0, E_cr = 1, conflict = 1;
};
Crowding crowding_and_conflict(const StateVector& s, const ModelParams& p);

struct MoratoriumFactors {
    double processing = 1, filing = 1;
};
MoratoriumFactors moratorium_factors(const ModelParams& p, double filing_smooth, double t);

/// Assistance paid against arrears this month (before the rent-stock drain limit).
double era_flows(const StateVector& s, const ModelParams& p, double t, double dt);

struct UnitFlows {
    double e_r = 0, t_m = 0, t_n = 0, f_o = 0, f_uo = 0, f_s = 0, s_d = 0;
};
UnitFlows unit_flows(const StateVector& s, const ModelParams& p, double stress_effect, double mortgage_effect);

struct HouseholdFlows {
    double i_new = 0, i_stbl = 0, h_new = 0, h_ent = 0, h_exit = 0, h_du = 0, h_stbl = 0;
};
HouseholdFlows household_flows(const StateVector& s, const ModelParams& p, double covid_effect, double e_p,
                               double f_o, double conflict);

/// Full flow evaluation with drain limits applied so no stock can go
/// negative within one step of length dt.
FlowSet compute_flows(const StateVector& s, const ModelParams& p, double t, double dt);

/// Net derivative of every stock, in Stock order.
std::vector<double> net_derivatives(const FlowSet& f);
std::vector<double> derivatives(const StateVector& s, const ModelParams& p, double t, double dt);

/// Solves the constants and initial stocks that make the pre-shock model
/// stationary: initial rent and mortgage due, foreclosed stock, baseline
/// filing fraction, move-in time and the two exogenous entry rates.
/// Throws std::runtime_error if the chosen stocks admit no stationary point.
ModelParams equilibrate(ModelParams p);

}  // namespace hsd::housing
