#include "housing_sd/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace hsd::housing {

namespace {

double occupied(const StateVector& s) { return s[UnitsOccupied] + s[UnitsPending]; }
double mortgaged(const StateVector& s) { return occupied(s) + s[UnitsUnoccupied]; }
double doubled_up(const StateVector& s) { return std::max(0.0, s[HouseholdsInsecure] - occupied(s)); }

// Scales every listed outflow by the same factor so the stock cannot go negative.
void limit(double stock, double dt, std::initializer_list<double*> outflows) {
    double total = 0.0;
    for (double* f : outflows) total += *f;
    const double k = drain_limit(stock, total, dt);
    if (k < 1.0)
        for (double* f : outflows) *f *= k;
}

// Smallest positive root of a function that is positive at 0, by scan then bisection.
double smallest_root(const std::function<double(double)>& g, double scale, const char* what) {
    if (!(scale > 0.0)) return 0.0;
    double lo = 0.0;
    double glo = g(lo);
    if (glo <= 0.0) return 0.0;
    const double step = scale * 0.01;
    for (int i = 1; i <= 5000; ++i) {
        double hi = step * i;
        const double ghi = g(hi);
        if (ghi <= 0.0) {
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (g(mid) > 0.0)
                    lo = mid;
                else
                    hi = mid;
            }
            return 0.5 * (lo + hi);
        }
        lo = hi;
    }
    throw std::runtime_error(std::string("equilibrate: no stationary ") + what);
}

}  // namespace

const std::shared_ptr<const StockLayout>& stock_layout() {
    static const auto layout = std::make_shared<const StockLayout>(StockLayout{
        {"R", "dollars", true},
        {"M", "dollars", true},
        {"U_occ", "rental units", true},
        {"U_pend", "rental units", true},
        {"U_unocc", "rental units", true},
        {"U_fore", "rental units", true},
        {"H_hi", "households", true},
        {"H_lh", "households", true},
        {"era_funds", "dollars", true},
        {"era_disbursed", "dollars", true},
        {"cum_evictions", "rental units", true},
        {"cum_filings", "rental units", true},
        {"covid_smooth", "dimensionless", false},
        {"filing_recovery_smooth", "dimensionless", false},
    });
    return layout;
}

StateVector initial_state(const ModelParams& p) {
    StateVector s(stock_layout());
    s[RentDue] = p.initial.rent_due;
    s[MortgageDue] = p.initial.mortgage_due;
    s[UnitsOccupied] = p.initial.units_occupied;
    s[UnitsPending] = p.initial.units_pending;
    s[UnitsUnoccupied] = p.initial.units_unoccupied;
    s[UnitsForeclosed] = p.initial.units_foreclosed;
    s[HouseholdsInsecure] = p.initial.households_insecure;
    s[HouseholdsHomeless] = p.initial.households_homeless;
    s[EraFunds] = p.era.on ? p.era.total_funds : 0.0;
    return s;
}

const std::vector<std::string>& flow_names() {
    static const std::vector<std::string> names = {
        "r_d", "r_p", "era_payment", "arrears_writeoff", "m_d", "m_p", "mortgage_writeoff",
        "e_f", "e_r", "e_p", "t_m", "t_n", "f_o", "f_uo", "f_s", "s_d",
        "i_new", "i_stbl", "h_new", "h_ent", "h_exit", "h_du", "h_stbl",
        "covid_effect", "burden_ratio", "crowding", "doubled_up",
        "E_r", "E_es", "E_m", "E_cr", "E_or", "conflict", "processing_factor", "filing_factor",
    };
    return names;
}

double value_of(const FlowSet& f, const std::string& name) {
    static const std::vector<double FlowSet::*> members = {
        &FlowSet::r_d, &FlowSet::r_p, &FlowSet::era_payment, &FlowSet::arrears_writeoff, &FlowSet::m_d,
        &FlowSet::m_p, &FlowSet::mortgage_writeoff, &FlowSet::e_f, &FlowSet::e_r, &FlowSet::e_p,
        &FlowSet::t_m, &FlowSet::t_n, &FlowSet::f_o, &FlowSet::f_uo, &FlowSet::f_s, &FlowSet::s_d,
        &FlowSet::i_new, &FlowSet::i_stbl, &FlowSet::h_new, &FlowSet::h_ent, &FlowSet::h_exit,
        &FlowSet::h_du, &FlowSet::h_stbl, &FlowSet::covid_effect, &FlowSet::burden_ratio,
        &FlowSet::crowding, &FlowSet::doubled_up, &FlowSet::E_r, &FlowSet::E_es, &FlowSet::E_m,
        &FlowSet::E_cr, &FlowSet::E_or, &FlowSet::conflict, &FlowSet::processing_factor,
        &FlowSet::filing_factor,
    };
    const auto& names = flow_names();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return f.*members[i];
    throw std::out_of_range("unknown flow '" + name + "'");
}

double covid_shock(const ModelParams& p, double covid_smooth, double t) {
    if (!p.covid.on) return 0.0;
    return eval_step({p.covid.magnitude, p.covid.start_time}, t) - covid_smooth;
}

RentFlows rent_flows(const StateVector& s, const ModelParams& p, double covid_effect, double departures) {
    RentFlows out;
    const double units = occupied(s);
    const double R = s[RentDue];
    out.r_d = p.avg_monthly_rent * units;
    if (units > kEpsilon) {
        const double income = p.avg_household_income * std::max(0.0, 1.0 - covid_effect);
        const double due_per_unit = R / units;
        if (income > kEpsilon)
            out.burden_ratio = due_per_unit / income;
        else
            out.burden_ratio = due_per_unit > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        out.arrears_writeoff = due_per_unit * std::max(0.0, departures);
    }
    const double excess = std::max(0.0, out.burden_ratio - p.rent_burden_threshold) / p.rent_burden_threshold;
    out.E_r = std::max(1.0, eval_gompertz(p.rent_delay_curve, excess));
    out.r_p = R / (p.at_rent_base * out.E_r);
    return out;
}

double economic_stress_effect(const StateVector& s, const ModelParams& p) {
    const double due = p.avg_monthly_rent * occupied(s);
    if (!(due > kEpsilon)) return 1.0;
    return eval_gompertz(p.stress_curve, s[RentDue] / due);
}

MortgageFlows mortgage_flows(const StateVector& s, const ModelParams& p, double landlord_income) {
    MortgageFlows out;
    const double units = mortgaged(s);
    const double M = s[MortgageDue];
    out.m_d = p.avg_monthly_mortgage * units;
    if (units > kEpsilon && M > 0.0) {
        // mortgage due per unit over collected rent per unit
        const double income_per_unit = std::max(0.0, landlord_income) / units;
        out.ratio = income_per_unit > kEpsilon ? (M / units) / income_per_unit : std::numeric_limits<double>::infinity();
    }
    out.E_m = eval_logistic(p.mortgage_delay_curve, out.ratio);
    out.m_p = M / (p.at_mortgage_base * out.E_m);
    return out;
}

Filing eviction_filing_flow(const StateVector& s, const ModelParams& p, double mortgage_pressure, double conflict,
                            double filing_factor) {
    Filing out;
    const double units = occupied(s);
    const double due_per_unit = units > kEpsilon ? s[RentDue] / units : 0.0;
    out.E_or = std::max(1.0, due_per_unit / std::max(p.landlord_tolerance, kEpsilon));
    out.e_f = p.baseline_filing_fraction * s[UnitsOccupied] * out.E_or * mortgage_pressure * conflict *
              std::max(0.0, filing_factor);
    return out;
}

double eviction_processing_flow(const StateVector& s, const ModelParams& p, double covid_effect,
                                double processing_factor) {
    const double proportion =
        p.eviction_proc_proportion * std::max(0.0, 1.0 - covid_effect) * std::max(0.0, processing_factor);
    return proportion / p.at_process * s[UnitsPending];
}

Crowding crowding_and_conflict(const StateVector& s, const ModelParams& p) {
    Crowding out;
    const double units = occupied(s);
    if (units > kEpsilon) out.c = s[HouseholdsInsecure] / units / p.crowding_reference;
    out.E_cr = out.c <= 1.0 ? 1.0 : eval_logistic(p.crowding_curve, out.c);
    out.conflict = out.E_cr * economic_stress_effect(s, p);
    return out;
}

MoratoriumFactors moratorium_factors(const ModelParams& p, double filing_smooth, double t) {
    MoratoriumFactors out;
    if (!p.moratorium.on) return out;
    const auto& m = p.moratorium;
    const double end = m.start_time + m.duration;
    out.processing = 1.0 - eval_step({m.effect_size, m.start_time}, t) + eval_step({m.effect_size, end}, t);
    out.filing = 1.0 - eval_step({m.filing_reduction, m.start_time - m.filing_lead}, t) + filing_smooth;
    return out;
}

double era_flows(const StateVector& s, const ModelParams& p, double t, double dt) {
    if (!p.era.on || t + 1e-9 < p.era.start_time) return 0.0;
    const double rate = p.era.total_funds * p.era.rate_multiplier / p.era.disbursement_time;
    return std::max(0.0, std::min({rate, s[EraFunds] / dt, s[RentDue] / dt}));
}

UnitFlows unit_flows(const StateVector& s, const ModelParams& p, double stress_effect, double mortgage_effect) {
    UnitFlows out;
    out.e_r = s[UnitsPending] / p.filing_resolution_time;
    out.t_m = p.baseline_turnover_fraction * s[UnitsOccupied] * stress_effect;
    out.f_o = p.foreclosure_fraction_occupied * occupied(s) * mortgage_effect;
    out.f_uo = p.foreclosure_fraction_unoccupied * s[UnitsUnoccupied];
    out.f_s = s[UnitsForeclosed] / p.foreclosure_sale_time;
    out.s_d = p.stock_decline_fraction * s[UnitsUnoccupied];
    out.t_n = std::min(s[UnitsUnoccupied], doubled_up(s)) / p.move_in_time;
    return out;
}

HouseholdFlows household_flows(const StateVector& s, const ModelParams& p, double covid_effect, double e_p,
                               double f_o, double conflict) {
    HouseholdFlows out;
    const double units = occupied(s);
    const double per_unit = units > kEpsilon ? s[HouseholdsInsecure] / units : 0.0;
    const double shock_up = 1.0 + covid_effect;
    const double shock_down = std::max(0.0, 1.0 - covid_effect);
    out.i_new = p.rate_new_insecurity * shock_up;
    out.h_new = p.rate_new_homelessness * shock_up;
    out.i_stbl = p.fr_stabilize_insecure * s[HouseholdsInsecure] * shock_down;
    out.h_stbl = p.fr_stabilize_homeless * s[HouseholdsHomeless] * shock_down;
    out.h_ent = p.homeless_entry_fraction * (e_p + f_o) * per_unit +
                p.doubled_up_homeless_fraction * doubled_up(s) * conflict;
    out.h_exit = p.fr_exit_homeless * s[HouseholdsHomeless];
    out.h_du = p.fr_double_up_homeless * s[HouseholdsHomeless];
    return out;
}

FlowSet compute_flows(const StateVector& s, const ModelParams& p, double t, double dt) {
    FlowSet f;
    const double units = occupied(s);
    const double all_units = mortgaged(s);
    if (!(units > kEpsilon)) ++f.guard_hits;

    f.covid_effect = covid_shock(p, s[CovidSmooth], t);
    const auto mor = moratorium_factors(p, s[FilingRecoverySmooth], t);
    f.processing_factor = mor.processing;
    f.filing_factor = mor.filing;

    f.E_es = economic_stress_effect(s, p);
    const auto crowd = crowding_and_conflict(s, p);
    f.crowding = crowd.c;
    f.E_cr = crowd.E_cr;
    f.conflict = crowd.conflict;
    f.doubled_up = doubled_up(s);

    const auto rent = rent_flows(s, p, f.covid_effect);
    f.r_d = rent.r_d;
    f.r_p = rent.r_p;
    f.E_r = rent.E_r;
    f.burden_ratio = rent.burden_ratio;
    f.era_payment = era_flows(s, p, t, dt);

    const auto mort = mortgage_flows(s, p, f.r_p + f.era_payment);
    f.m_d = mort.m_d;
    f.m_p = mort.m_p;
    f.E_m = mort.E_m;

    const auto uf = unit_flows(s, p, f.E_es, f.E_m);
    f.e_r = uf.e_r;
    f.t_m = uf.t_m;
    f.t_n = uf.t_n;
    f.f_uo = uf.f_uo;
    f.f_s = uf.f_s;
    f.s_d = uf.s_d;
    f.f_o_occupied = units > kEpsilon ? uf.f_o * s[UnitsOccupied] / units : 0.0;
    f.f_o_pending = units > kEpsilon ? uf.f_o * s[UnitsPending] / units : 0.0;
    f.e_p = eviction_processing_flow(s, p, f.covid_effect, f.processing_factor);
    const auto filing = eviction_filing_flow(s, p, f.E_m, f.conflict, f.filing_factor);
    f.e_f = filing.e_f;
    f.E_or = filing.E_or;

    limit(s[UnitsOccupied], dt, {&f.t_m, &f.f_o_occupied, &f.e_f});
    limit(s[UnitsPending], dt, {&f.e_p, &f.e_r, &f.f_o_pending});
    limit(s[UnitsUnoccupied], dt, {&f.t_n, &f.f_uo, &f.s_d});
    limit(s[UnitsForeclosed], dt, {&f.f_s});
    f.f_o = f.f_o_occupied + f.f_o_pending;

    if (units > kEpsilon) f.arrears_writeoff = s[RentDue] / units * (f.e_p + f.t_m);
    limit(s[RentDue], dt, {&f.r_p, &f.era_payment, &f.arrears_writeoff});
    limit(s[EraFunds], dt, {&f.era_payment});

    if (all_units > kEpsilon) f.mortgage_writeoff = s[MortgageDue] / all_units * (f.f_o + f.f_uo);
    limit(s[MortgageDue], dt, {&f.m_p, &f.mortgage_writeoff});

    const auto hh = household_flows(s, p, f.covid_effect, f.e_p, f.f_o, f.conflict);
    f.i_new = hh.i_new;
    f.i_stbl = hh.i_stbl;
    f.h_new = hh.h_new;
    f.h_ent = hh.h_ent;
    f.h_exit = hh.h_exit;
    f.h_du = hh.h_du;
    f.h_stbl = hh.h_stbl;
    limit(s[HouseholdsInsecure], dt, {&f.h_ent, &f.i_stbl});
    limit(s[HouseholdsHomeless], dt, {&f.h_exit, &f.h_du, &f.h_stbl});

    const double covid_input = p.covid.on ? eval_step({p.covid.magnitude, p.covid.start_time}, t) : 0.0;
    f.covid_smooth_rate = (covid_input - s[CovidSmooth]) / p.covid.recovery_delay;
    const auto& m = p.moratorium;
    const double filing_input =
        m.on ? eval_step({m.filing_reduction, m.start_time + m.duration + m.filing_resume_lag}, t) : 0.0;
    f.filing_smooth_rate = (filing_input - s[FilingRecoverySmooth]) / m.filing_recovery_delay;
    return f;
}

std::vector<double> net_derivatives(const FlowSet& f) {
    std::vector<double> d(kStockCount, 0.0);
    d[RentDue] = f.r_d - f.r_p - f.era_payment - f.arrears_writeoff;
    d[MortgageDue] = f.m_d - f.m_p - f.mortgage_writeoff;
    d[UnitsOccupied] = f.t_n + f.e_r - f.t_m - f.f_o_occupied - f.e_f;
    d[UnitsPending] = f.e_f - f.e_p - f.e_r - f.f_o_pending;
    d[UnitsUnoccupied] = f.e_p + f.t_m + f.f_s - f.t_n - f.f_uo - f.s_d;
    d[UnitsForeclosed] = f.f_o + f.f_uo - f.f_s;
    d[HouseholdsInsecure] = f.i_new + f.h_exit + f.h_du - f.h_ent - f.i_stbl;
    d[HouseholdsHomeless] = f.h_new + f.h_ent - f.h_exit - f.h_du - f.h_stbl;
    d[EraFunds] = -f.era_payment;
    d[EraDisbursed] = f.era_payment;
    d[CumulativeEvictions] = f.e_p;
    d[CumulativeFilings] = f.e_f;
    d[CovidSmooth] = f.covid_smooth_rate;
    d[FilingRecoverySmooth] = f.filing_smooth_rate;
    return d;
}

std::vector<double> derivatives(const StateVector& s, const ModelParams& p, double t, double dt) {
    return net_derivatives(compute_flows(s, p, t, dt));
}

ModelParams equilibrate(ModelParams p) {
    StateVector s = initial_state(p);
    const double units = occupied(s);
    const double all_units = mortgaged(s);
    const double r_d = p.avg_monthly_rent * units;
    const double e_p = eviction_processing_flow(s, p, 0.0, 1.0);

    // Rent due: dues in balance with payments and write-offs on departure.
    auto rent_balance = [&](double R) {
        s[RentDue] = R;
        const double t_m = p.baseline_turnover_fraction * s[UnitsOccupied] * economic_stress_effect(s, p);
        const auto rf = rent_flows(s, p, 0.0, e_p + t_m);
        return rf.r_d - rf.r_p - rf.arrears_writeoff;
    };
    s[RentDue] = units > kEpsilon ? smallest_root(rent_balance, r_d, "rent due") : 0.0;
    const double income = rent_flows(s, p, 0.0).r_p;

    auto mortgage_balance = [&](double M) {
        s[MortgageDue] = M;
        const auto mf = mortgage_flows(s, p, income);
        const double f_o = p.foreclosure_fraction_occupied * units * mf.E_m;
        const double f_uo = p.foreclosure_fraction_unoccupied * s[UnitsUnoccupied];
        const double writeoff = all_units > kEpsilon ? M / all_units * (f_o + f_uo) : 0.0;
        return mf.m_d - mf.m_p - writeoff;
    };
    s[MortgageDue] = all_units > kEpsilon
                         ? smallest_root(mortgage_balance, p.avg_monthly_mortgage * all_units, "mortgage due")
                         : 0.0;

    const double E_es = economic_stress_effect(s, p);
    const double E_m = mortgage_flows(s, p, income).E_m;
    const auto uf = unit_flows(s, p, E_es, E_m);
    s[UnitsForeclosed] = (uf.f_o + uf.f_uo) * p.foreclosure_sale_time;

    // Pending cases: filings replace what is processed, resolved or foreclosed.
    const double f_o_pending = units > kEpsilon ? uf.f_o * s[UnitsPending] / units : 0.0;
    const double filings_needed = e_p + uf.e_r + f_o_pending;
    const auto crowd = crowding_and_conflict(s, p);
    const double per_fraction = eviction_filing_flow(s, p, E_m, crowd.conflict, 1.0).e_f /
                                std::max(p.baseline_filing_fraction, std::numeric_limits<double>::min());
    if (filings_needed > 0.0) {
        if (!(per_fraction > 0.0)) throw std::runtime_error("equilibrate: filings needed but no occupied units");
        p.baseline_filing_fraction = filings_needed / per_fraction;
    }

    // Occupied plus pending: move-ins replace every departure.
    const double move_ins = uf.t_m + uf.f_o + e_p;
    if (move_ins > 0.0) {
        const double matchable = std::min(s[UnitsUnoccupied], doubled_up(s));
        if (!(matchable > 0.0))
            throw std::runtime_error("equilibrate: move-ins needed but no vacant units or unhoused households");
        p.move_in_time = matchable / move_ins;
    }

    const auto hh = household_flows(s, p, 0.0, e_p, uf.f_o, crowd.conflict);
    const double homeless_out = hh.h_exit + hh.h_du + hh.h_stbl;
    p.rate_new_homelessness = homeless_out - hh.h_ent;
    p.rate_new_insecurity = hh.i_stbl + hh.h_ent - hh.h_exit - hh.h_du;
    if (p.rate_new_homelessness < 0.0)
        throw std::runtime_error("equilibrate: homeless entries from displacement exceed exits");
    if (p.rate_new_insecurity < 0.0)
        throw std::runtime_error("equilibrate: returns from homelessness exceed insecure-household exits");

    p.initial.rent_due = s[RentDue];
    p.initial.mortgage_due = s[MortgageDue];
    p.initial.units_foreclosed = s[UnitsForeclosed];
    for (auto name : {"initial.rent_due", "initial.mortgage_due", "initial.units_foreclosed", "baseline_filing_fraction",
                      "move_in_time", "rate_new_homelessness", "rate_new_insecurity"})
        p.provenance[name] = "calibrated";
    return p;
}

}  // namespace hsd::housing
