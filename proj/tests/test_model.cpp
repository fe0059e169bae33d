#include "doctest.h"

#include <cmath>

#include "housing_sd/model.hpp"

using namespace hsd;
using namespace hsd::housing;

namespace {

ModelParams base() {
    ModelParams p;
    p.covid.on = false;
    return p;
}

StateVector market(double occupied = 1000.0, double pending = 100.0) {
    StateVector s(stock_layout());
    s[UnitsOccupied] = occupied;
    s[UnitsPending] = pending;
    s[UnitsUnoccupied] = 50.0;
    s[HouseholdsInsecure] = occupied + pending;
    return s;
}

}  // namespace

TEST_CASE("covid shock is the step minus its lagging smooth") {
    ModelParams p = base();
    p.covid.on = true;
    p.covid.start_time = 24.0;
    p.covid.magnitude = 0.35;
    p.covid.recovery_delay = 8.0;
    CHECK(covid_shock(p, 0.0, 23.0) == 0.0);
    CHECK(covid_shock(p, 0.0, 24.0) == doctest::Approx(0.35));

    // after five delays the smooth has almost caught up with the step
    double smooth = 0.0;
    const double dt = 0.25;
    for (double t = 24.0; t < 24.0 + 5 * 8.0 - 1e-9; t += dt) smooth += dt * (0.35 - smooth) / 8.0;
    const double effect = covid_shock(p, smooth, 64.0);
    CHECK(effect < 0.01 * 0.35);
    CHECK(effect == doctest::Approx(0.35 * std::exp(-5.0)).epsilon(0.2));
    p.covid.on = false;
    CHECK(covid_shock(p, 0.0, 30.0) == 0.0);
}

TEST_CASE("rent payment slows only above the burden threshold") {
    ModelParams p = base();
    p.avg_monthly_rent = 700.0;
    auto s = market(1000.0, 0.0);
    s[RentDue] = 700.0 * 1000.0;  // one month of rent per unit
    p.avg_household_income = 2800.0;  // burden 0.25
    auto calm = rent_flows(s, p, 0.0);
    CHECK(calm.E_r == 1.0);
    CHECK(calm.r_p == doctest::Approx(s[RentDue] / p.at_rent_base));

    p.avg_household_income = 2000.0;
    const auto shocked = rent_flows(s, p, 0.35);
    CHECK(shocked.burden_ratio == doctest::Approx(700.0 / 1300.0));
    CHECK(shocked.E_r > 1.0);
    CHECK(shocked.r_p < s[RentDue] / p.at_rent_base);

    const auto empty = rent_flows(StateVector(stock_layout()), p, 0.0, 10.0);
    CHECK(empty.r_d == 0.0);
    CHECK(empty.arrears_writeoff == 0.0);
}

TEST_CASE("economic stress follows the gompertz curve in months of rent owed") {
    ModelParams p = base();
    auto s = market();
    const double month = p.avg_monthly_rent * (s[UnitsOccupied] + s[UnitsPending]);
    s[RentDue] = 0.0;
    CHECK(economic_stress_effect(s, p) == 1.0);
    s[RentDue] = month;
    CHECK(economic_stress_effect(s, p) == doctest::Approx(1.074).epsilon(2e-3));
    s[RentDue] = 2.0 * month;
    CHECK(economic_stress_effect(s, p) == doctest::Approx(2.967).epsilon(1e-3));
}

TEST_CASE("mortgage payment time follows the logistic curve") {
    ModelParams p = base();
    auto s = market();
    const double units = s[UnitsOccupied] + s[UnitsPending] + s[UnitsUnoccupied];
    const double income = 1e6;
    s[MortgageDue] = 0.0;
    auto m = mortgage_flows(s, p, income);
    CHECK(m.E_m == 1.0);
    s[MortgageDue] = 1.5 * income;
    m = mortgage_flows(s, p, income);
    CHECK(m.ratio == doctest::Approx(1.5));
    CHECK(m.E_m == doctest::Approx(2.0));
    CHECK(m.m_p == doctest::Approx(s[MortgageDue] / 2.0));
    s[MortgageDue] = 3.0 * income;
    CHECK(mortgage_flows(s, p, income).E_m == doctest::Approx(2.998).epsilon(1e-4));
    CHECK(mortgage_flows(s, p, income).m_d == doctest::Approx(p.avg_monthly_mortgage * units));
}

TEST_CASE("filings scale with arrears past landlord tolerance") {
    ModelParams p = base();
    auto s = market();
    const double units = s[UnitsOccupied] + s[UnitsPending];
    const auto calm = eviction_filing_flow(s, p, 1.0, 1.0, 1.0);
    CHECK(calm.E_or == 1.0);
    CHECK(calm.e_f == doctest::Approx(p.baseline_filing_fraction * s[UnitsOccupied]));

    s[RentDue] = 2.0 * p.landlord_tolerance * units;
    const auto pressed = eviction_filing_flow(s, p, 1.0, 1.0, 1.0);
    CHECK(pressed.E_or == doctest::Approx(2.0));
    CHECK(pressed.e_f == doctest::Approx(2.0 * calm.e_f));

    CHECK(eviction_filing_flow(s, p, 1.0, 1.0, 0.2).e_f == doctest::Approx(0.2 * pressed.e_f));
}

TEST_CASE("processing clears 38% of pending cases per processing time") {
    ModelParams p = base();
    p.at_process = 1.0;
    auto s = market(1000.0, 100.0);
    CHECK(eviction_processing_flow(s, p, 0.0, 1.0) == doctest::Approx(38.0));
    CHECK(eviction_processing_flow(s, p, 0.0, 0.1) == doctest::Approx(3.8));
    s[UnitsPending] = 0.0;
    CHECK(eviction_processing_flow(s, p, 0.0, 1.0) == 0.0);
}

TEST_CASE("unit flows") {
    ModelParams p = base();
    auto s = market();
    const auto a = unit_flows(s, p, 1.0, 1.0);
    const auto b = unit_flows(s, p, 3.0, 1.0);
    CHECK(b.t_m == doctest::Approx(3.0 * a.t_m));

    // with no foreclosure and no stock decline the four unit stocks are a closed chain
    p.foreclosure_fraction_occupied = 0.0;
    p.foreclosure_fraction_unoccupied = 0.0;
    p.stock_decline_fraction = 0.0;
    s[UnitsForeclosed] = 20.0;
    s[RentDue] = 3e5;
    const double total0 = s[UnitsOccupied] + s[UnitsPending] + s[UnitsUnoccupied] + s[UnitsForeclosed];
    for (int i = 0; i < 400; ++i) s = euler_step(s, derivatives(s, p, i * 0.25, 0.25), 0.25);
    const double total1 = s[UnitsOccupied] + s[UnitsPending] + s[UnitsUnoccupied] + s[UnitsForeclosed];
    CHECK(total1 == doctest::Approx(total0).epsilon(1e-12));
}

TEST_CASE("household flows respond to the covid effect") {
    ModelParams p = base();
    auto s = market();
    s[HouseholdsHomeless] = 30.0;
    const auto calm = household_flows(s, p, 0.0, 5.0, 1.0, 1.0);
    CHECK(calm.i_new == p.rate_new_insecurity);
    CHECK(calm.h_new == p.rate_new_homelessness);
    const auto shocked = household_flows(s, p, 0.35, 5.0, 1.0, 1.0);
    CHECK(shocked.i_new == doctest::Approx(1.35 * calm.i_new));
    CHECK(shocked.i_stbl == doctest::Approx(0.65 * calm.i_stbl));

    p.homeless_entry_fraction = 0.0;
    p.doubled_up_homeless_fraction = 0.0;
    CHECK(household_flows(s, p, 0.0, 50.0, 10.0, 1.0).h_ent == 0.0);
}

TEST_CASE("crowding effect") {
    ModelParams p = base();
    auto s = market(1000.0, 0.0);
    s[HouseholdsInsecure] = 1000.0;
    CHECK(crowding_and_conflict(s, p).E_cr == 1.0);
    s[HouseholdsInsecure] = 1500.0;
    CHECK(crowding_and_conflict(s, p).E_cr == doctest::Approx(1.5));
    s[HouseholdsInsecure] = 1e9;
    CHECK(crowding_and_conflict(s, p).E_cr == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("moratorium factors") {
    ModelParams p = base();
    p.moratorium.on = true;
    const auto& m = p.moratorium;
    const auto before = moratorium_factors(p, 0.0, m.start_time - m.filing_lead - 0.25);
    CHECK(before.processing == 1.0);
    CHECK(before.filing == 1.0);
    const auto inside = moratorium_factors(p, 0.0, m.start_time + 1.0);
    CHECK(inside.processing == doctest::Approx(0.1));
    CHECK(inside.filing == doctest::Approx(1.0 - m.filing_reduction));
    CHECK(moratorium_factors(p, 0.0, m.start_time + m.duration).processing == 1.0);

    // filing recovery 36 months after the end, following the model's own smooth
    p.moratorium.filing_reduction = 0.8;
    StateVector s(stock_layout());
    const double dt = 0.25;
    const double end = m.start_time + m.duration;
    double t = 0.0;
    for (; t < end + 36.0 - 1e-9; t += dt) s[FilingRecoverySmooth] += dt * compute_flows(s, p, t, dt).filing_smooth_rate;
    const double f = moratorium_factors(p, s[FilingRecoverySmooth], t).filing;
    CHECK(f > 0.6);
    CHECK(f == doctest::Approx(1.0 - 0.8 * std::exp(-(36.0 - m.filing_resume_lag) / 36.0)).epsilon(0.01));
}

TEST_CASE("rental assistance drains at its disbursement rate") {
    ModelParams p = base();
    auto s = market();
    s[RentDue] = 1e12;
    s[EraFunds] = p.era.total_funds;
    CHECK(era_flows(s, p, 40.0, 0.25) == 0.0);
    p.era.on = true;
    CHECK(era_flows(s, p, p.era.start_time - 1.0, 0.25) == 0.0);
    CHECK(era_flows(s, p, p.era.start_time, 0.25) == doctest::Approx(p.era.total_funds / p.era.disbursement_time));
    s[RentDue] = 0.0;
    CHECK(era_flows(s, p, p.era.start_time, 0.25) == 0.0);
}

TEST_CASE("equilibrium initialization is stationary") {
    const ModelParams p = equilibrate(base());
    const auto s = initial_state(p);
    const auto f = compute_flows(s, p, 0.0, 0.25);
    const auto d = net_derivatives(f);
    // stock decline has no offsetting construction flow, so vacant units drift down by s_d
    CHECK(d[UnitsUnoccupied] == doctest::Approx(-f.s_d).epsilon(1e-9));
    CHECK(f.s_d == doctest::Approx(p.stock_decline_fraction * s[UnitsUnoccupied]));
    for (std::size_t i = 0; i < EraFunds; ++i) {
        if (i == UnitsUnoccupied) continue;
        INFO(stock_layout()->at(i).name);
        CHECK(std::abs(d[i]) <= 1e-9 * std::max(1.0, s[i]));
    }
}

TEST_CASE("an empty market only has exogenous entries") {
    ModelParams p = base();
    const auto f = compute_flows(StateVector(stock_layout()), p, 0.0, 0.25);
    const auto d = net_derivatives(f);
    CHECK(f.i_new == p.rate_new_insecurity);
    CHECK(f.h_new == p.rate_new_homelessness);
    for (auto i : {RentDue, MortgageDue, UnitsOccupied, UnitsPending, UnitsUnoccupied, UnitsForeclosed})
        CHECK(d[i] == 0.0);
    CHECK(d[HouseholdsInsecure] == doctest::Approx(p.rate_new_insecurity));
    CHECK(d[HouseholdsHomeless] == doctest::Approx(p.rate_new_homelessness));
}
