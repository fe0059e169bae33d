#include "doctest.h"

#include <cmath>

#include "housing_sd/engine.hpp"

using namespace hsd;

namespace {

std::shared_ptr<const StockLayout> one_stock() {
    return std::make_shared<const StockLayout>(StockLayout{{"R", "dollars", true}});
}

}  // namespace

TEST_CASE("step input switches on at its start time") {
    CHECK(eval_step({0.35, 24.0}, 23.75) == 0.0);
    CHECK(eval_step({0.35, 24.0}, 24.0) == 0.35);
    CHECK(eval_step({-0.9, 26.75}, 30.0) == -0.9);
}

TEST_CASE("first-order smooth") {
    CHECK(advance_smooth({0.0, 2.0}, 1.0, 0.25).current == doctest::Approx(0.125));
    CHECK(advance_smooth({1.0, 2.0}, 1.0, 0.25).current == 1.0);
    SmoothState s{0.0, 2.0};
    for (int i = 0; i < 8; ++i) s = advance_smooth(s, 1.0, 0.25);
    CHECK(s.current == doctest::Approx(0.65639108).epsilon(1e-8));
}

TEST_CASE("logistic effect curve") {
    const LogisticCurve m{3.0, 1.0, 1.5, 10.0};
    CHECK(eval_logistic(m, 0.0) == 1.0);
    CHECK(eval_logistic(m, 1.5) == doctest::Approx(2.0));
    CHECK(eval_logistic(m, 3.0) == doctest::Approx(2.99804878).epsilon(1e-8));
    CHECK(eval_logistic({2.0, 1.0, 1.5, 5.0}, 1.0) == doctest::Approx(1.11636364).epsilon(1e-8));
    CHECK(eval_logistic({2.0, 1.0, 1.5, 5.0}, 1e9) == doctest::Approx(2.0));
}

TEST_CASE("gompertz effect curve clamps to its floor and ceiling") {
    const GompertzCurve g{3.0, -108.2, 1.4, 1.0};
    CHECK(eval_gompertz(g, 0.0) == 1.0);
    CHECK(eval_gompertz(g, 1.0) == doctest::Approx(1.07268004).epsilon(1e-8));
    CHECK(eval_gompertz(g, 1.0) == doctest::Approx(1.074).epsilon(2e-3));
    CHECK(eval_gompertz(g, 2.0) == doctest::Approx(2.96659566).epsilon(1e-8));
    CHECK(eval_gompertz(g, 50.0) <= 3.0);
    CHECK(eval_gompertz(g, -5.0) == 1.0);
}

TEST_CASE("euler step and drain limiter") {
    StateVector s(one_stock());
    s[0] = 100.0;
    CHECK(euler_step(s, {-50.0}, 0.25)[0] == doctest::Approx(87.5));
    CHECK(euler_step(s, {0.0}, 0.25)[0] == 100.0);

    const double k = drain_limit(1.0, 10.0, 0.25);
    CHECK(k == doctest::Approx(0.4));
    CHECK(1.0 - 0.25 * 10.0 * k >= 0.0);
    CHECK(drain_limit(5.0, 0.0, 0.25) == 1.0);

    std::vector<ClampEvent> clamps;
    s[0] = 1.0;
    CHECK(euler_step(s, {-10.0}, 0.25, 3.0, &clamps)[0] == 0.0);
    REQUIRE(clamps.size() == 1);
    CHECK(clamps[0].stock == "R");
    CHECK_THROWS_AS(euler_step(s, {1.0, 2.0}, 0.25), std::invalid_argument);
}

TEST_CASE("simulate: constant, exponential drain and smoothed step") {
    const SimClock clock;
    CHECK(clock.steps() == 200);
    StateVector s(one_stock());
    s[0] = 42.0;

    auto flat = simulate([](const StateVector& x, double, double) { return std::vector<double>(x.size(), 0.0); },
                         clock, s);
    REQUIRE(flat.states.size() == 201);
    for (const auto& st : flat.states) CHECK(st[0] == 42.0);

    s[0] = 100.0;
    auto drain =
        simulate([](const StateVector& x, double, double) { return std::vector<double>{-x[0] / 2.0}; }, clock, s);
    for (std::size_t i = 0; i < drain.times.size(); ++i)
        CHECK(drain.states[i][0] == doctest::Approx(std::pow(1.0 - 0.25 / 2.0, drain.times[i] / 0.25) * 100.0));

    s[0] = 0.0;
    auto smooth = simulate(
        [](const StateVector& x, double t, double) {
            return std::vector<double>{(eval_step({1.0, 24.0}, t) - x[0]) / 6.0};
        },
        clock, s);
    const auto at30 = static_cast<std::size_t>(30.0 / 0.25);
    CHECK(smooth.times[at30] == 30.0);
    CHECK(smooth.states[at30][0] >= 0.63);
}

TEST_CASE("non-finite derivatives are reported with the stock name") {
    StateVector s(one_stock());
    s[0] = 1.0;
    try {
        simulate([](const StateVector&, double t, double) { return std::vector<double>{t > 1 ? NAN : 0.0}; },
                 SimClock{}, s);
        FAIL("expected NonFiniteError");
    } catch (const NonFiniteError& e) {
        CHECK(e.stock() == "R");
        CHECK(e.time() > 1.0);
    }
}

TEST_CASE("clock validation") {
    CHECK_THROWS(SimClock{0.0, 50.0, 24.0}.validate());
    CHECK_THROWS(SimClock{0.3, 50.0, 24.0}.validate());
    CHECK_THROWS(SimClock{0.25, 50.0, 50.0}.validate());
    CHECK_NOTHROW(SimClock{0.125, 50.0, 24.0}.validate());
}

TEST_CASE("calendar labels") {
    CHECK(calendar_label(0.0) == "2018-01");
    CHECK(calendar_label(11.75) == "2018-12");
    CHECK(calendar_label(24.0) == "2020-01");
    CHECK(calendar_label(26.75) == "2020-03");
    CHECK(calendar_label(49.0) == "2022-02");
    CHECK(months_from_label("2020-01") == 24.0);
    CHECK(months_from_label("2022-02") == 49.0);
    CHECK_THROWS(months_from_label("2020/01"));
}

TEST_CASE("state vector lookups by name") {
    StateVector s(one_stock());
    s.at("R") = 7.0;
    CHECK(s[0] == 7.0);
    CHECK(s.has("R"));
    CHECK_FALSE(s.has("M"));
    CHECK_THROWS_AS(s.at("M"), std::out_of_range);
}
