#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "housing_sd/model.hpp"
#include "housing_sd/validation.hpp"

using namespace hsd;

namespace {

const ModelParams& shipped() {
    static const ModelParams p = load_params(std::string(HSD_SOURCE_DIR) + "/params/default.toml");
    return p;
}

const Scenario& scenario(const std::string& name) {
    static const auto all = default_scenarios();
    return find_scenario(all, name);
}

// Direct-formula Theil statistics, written independently of the library.
TheilResult theil_oracle(const std::vector<double>& s, const std::vector<double>& o) {
    const double n = static_cast<double>(s.size());
    double ms = 0, mo = 0, ss = 0, so = 0, mse = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        ms += s[i] / n;
        mo += o[i] / n;
        ss += s[i] * s[i] / n;
        so += o[i] * o[i] / n;
        mse += (s[i] - o[i]) * (s[i] - o[i]) / n;
    }
    const double vs = ss - ms * ms, vo = so - mo * mo;
    double cov = 0;
    for (std::size_t i = 0; i < s.size(); ++i) cov += (s[i] - ms) * (o[i] - mo) / n;
    const double sds = std::sqrt(std::max(0.0, vs)), sdo = std::sqrt(std::max(0.0, vo));
    TheilResult r;
    r.mse = mse;
    r.U = std::sqrt(mse) / (std::sqrt(ss) + std::sqrt(so));
    if (mse > 0) {
        r.U_M = (ms - mo) * (ms - mo) / mse;
        r.U_S = (sds - sdo) * (sds - sdo) / mse;
        r.U_C = 2.0 * (sds * sdo - cov) / mse;
    }
    return r;
}

}  // namespace

TEST_CASE("theil: perfect fit, pure bias and a hand-checked pair") {
    const std::vector<double> a{1, 2, 3, 4};
    CHECK(theils_u(a, a).U == 0.0);

    const std::vector<double> biased{3, 4, 5, 6};
    const auto b = theils_u(biased, a);
    CHECK(b.U_M == doctest::Approx(1.0));
    CHECK(b.U_S == doctest::Approx(0.0));
    CHECK(b.U_C == doctest::Approx(0.0).epsilon(1e-12));

    const std::vector<double> swapped{1, 3, 2, 4};
    const auto t = theils_u(a, swapped);
    CHECK(t.U == doctest::Approx(0.12909944).epsilon(1e-8));
    CHECK(t.U_M == doctest::Approx(0.0));
    CHECK(t.U_S == doctest::Approx(0.0));
    CHECK(t.U_C == doctest::Approx(1.0));
}

TEST_CASE("theil: matches an independent oracle, stays in [0,1] and is symmetric") {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> g(0.0, 3.0);
    for (int k = 0; k < 1000; ++k) {
        std::vector<double> s(2 + k % 30), o;
        for (auto& v : s) v = g(rng);
        for (double v : s) o.push_back(0.7 * v + g(rng));
        const auto r = theils_u(s, o);
        const auto x = theil_oracle(s, o);
        CHECK(r.U == doctest::Approx(x.U).epsilon(1e-9));
        CHECK(r.U_M == doctest::Approx(x.U_M).epsilon(1e-7));
        CHECK(r.U_S == doctest::Approx(x.U_S).epsilon(1e-7));
        CHECK(std::abs(r.U_M + r.U_S + r.U_C - 1.0) <= 1e-9);
        CHECK(r.U >= 0.0);
        CHECK(r.U <= 1.0);
        CHECK(theils_u(o, s).U == doctest::Approx(r.U).epsilon(1e-12));
    }
}

TEST_CASE("theil: errors") {
    const std::vector<double> z{0, 0, 0};
    CHECK_THROWS_AS(theils_u(z, z), std::domain_error);
    CHECK_THROWS_AS(theils_u(std::vector<double>{1}, std::vector<double>{1}), std::invalid_argument);
    CHECK_THROWS_AS(theils_u(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}), std::invalid_argument);
}

TEST_CASE("reference modes") {
    const auto m = parse_reference_mode(
        "homeless", "calendar_month,value,units,source\n2018-01,552830,households,AHAR\n2019-01,567715,households,AHAR\n");
    CHECK(m.times == std::vector<double>{0.0, 12.0});
    CHECK(m.units == "households");
    const std::string head = "calendar_month,value,units,source\n";
    CHECK_THROWS(parse_reference_mode("x", "month,value\n2018-01,1\n"));
    CHECK_THROWS(parse_reference_mode("x", head + "2018-01,1,households,Census\n"));
    CHECK_THROWS(parse_reference_mode("x", head + "2019-01,1,households,AHAR\n2018-01,1,households,AHAR\n"));
    CHECK_THROWS(parse_reference_mode("x", head + "2018-01,1,households,AHAR\n2019-01,1,people,AHAR\n"));
    CHECK_THROWS(parse_reference_mode("x", head));

    CHECK(load_reference_dir("/nonexistent/reference").empty());
    const auto shipped_refs = load_reference_dir(std::string(HSD_SOURCE_DIR) + "/reference");
    REQUIRE_FALSE(shipped_refs.empty());
    const auto run = run_scenario(scenario("run1"), shipped());
    for (const auto& ref : shipped_refs) {
        const auto fit = fit_reference(run, ref);
        CHECK(fit.points == ref.times.size());
        CHECK(fit.theil.U < 0.2);
    }
    auto wrong = m;
    wrong.units = "dollars";
    CHECK_THROWS(fit_reference(run, wrong));
}

TEST_CASE("invariant checks catch tampering") {
    auto run = run_scenario(scenario("run4"), shipped());
    CHECK(check_invariants(run).empty());
    auto broken = run;
    broken.states[10][housing::UnitsOccupied] += 1000.0;
    CHECK_FALSE(check_invariants(broken).empty());
    broken = run;
    broken.states[80][housing::EraFunds] *= 1.01;
    CHECK_FALSE(check_invariants(broken).empty());
    broken = run;
    broken.states[5][housing::HouseholdsHomeless] = -1.0;
    CHECK_FALSE(check_invariants(broken).empty());
}

TEST_CASE("sensitivity sweep") {
    SUBCASE("zero delta reproduces the baseline") {
        const auto rep = sensitivity_sweep(shipped(), scenario("run2"), 0.0);
        for (const auto& e : rep.entries) {
            for (const auto& m : headline_metrics()) {
                CHECK(e.low.get(m) == rep.baseline.get(m));
                CHECK(e.high.get(m) == rep.baseline.get(m));
            }
        }
    }
    SUBCASE("coverage and directional findings") {
        const auto rep = sensitivity_sweep(shipped(), scenario("run2"), 0.15);
        std::size_t sweepable = 0;
        for (const auto& info : param_registry()) sweepable += info.sweepable;
        CHECK(rep.entries.size() == sweepable);
        CHECK(rep.runs == 1 + 2 * sweepable);
        CHECK(rep.flagged().empty());
        for (std::size_t i = 1; i < rep.entries.size(); ++i)
            CHECK(rep.entries[i - 1].max_abs_elasticity >= rep.entries[i].max_abs_elasticity);

        const auto& cref = rep.entry("crowding_reference");
        CHECK(cref.high.mean_crowding < cref.low.mean_crowding);

        std::vector<double> all;
        for (const auto& e : rep.entries) all.push_back(e.max_abs_elasticity);
        std::nth_element(all.begin(), all.begin() + all.size() / 2, all.end());
        const double median = all[all.size() / 2];
        CHECK(rep.entry("initial.units_occupied").max_abs_elasticity > median);
    }
}

TEST_CASE("extreme-condition battery") {
    for (const auto* p : {&shipped(), static_cast<const ModelParams*>(nullptr)}) {
        const ModelParams params = p ? *p : housing::equilibrate(ModelParams{});
        const auto cases = extreme_conditions(params);
        CHECK(cases.size() >= 6);
        for (const auto& c : cases) {
            INFO(c.name << ": " << c.detail);
            CHECK(c.passed);
        }
    }
}

TEST_CASE("worker count honours the environment") {
    CHECK(default_workers() >= 1);
}
