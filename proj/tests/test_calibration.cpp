#include "doctest.h"

#include <cmath>

#include "housing_sd/calibration.hpp"
#include "housing_sd/model.hpp"

using namespace hsd;

namespace {

const ModelParams& shipped() {
    static const ModelParams p = load_params(std::string(HSD_SOURCE_DIR) + "/params/default.toml");
    return p;
}

const std::vector<Scenario>& scenarios() {
    static const auto s = default_scenarios();
    return s;
}

}  // namespace

TEST_CASE("spec parsing rejects bad input") {
    CHECK_NOTHROW(parse_calibration_spec("{}"));
    CHECK_THROWS(parse_calibration_spec(R"({"free":[{"name":"nope","lower":0,"upper":1}]})"));
    CHECK_THROWS(parse_calibration_spec(R"({"free":[{"name":"landlord_tolerance","lower":5,"upper":1}]})"));
    CHECK_THROWS(parse_calibration_spec(R"({"free":[{"name":"covid.on","lower":0,"upper":1}]})"));
    CHECK_THROWS(parse_calibration_spec(R"({"targets":[{"scenario":"run1","metric":"nope","target":1}]})"));
    CHECK_THROWS(parse_calibration_spec(
        R"({"targets":[{"scenario":"run1","metric":"arrears_end","transform":"pct_change","target":1}]})"));
    CHECK_THROWS(parse_calibration_spec(
        R"({"targets":[{"scenario":"run1","metric":"arrears_end","target":1,"mode":"roughly"}]})"));
    CHECK_THROWS(parse_calibration_spec(R"({"max_evaluations":0})"));
    CHECK_NOTHROW(load_calibration_spec(std::string(HSD_SOURCE_DIR) + "/calibration/paper_targets.json"));
}

TEST_CASE("target residuals") {
    auto spec = parse_calibration_spec(R"({"targets":[
        {"scenario":"run2","metric":"total_evictions","transform":"pct_change","relative_to":"run1",
         "target":0.25,"scale":0.05,"mode":"at_least"},
        {"scenario":"run2","metric":"arrears_end","target":1e9}]})");
    double loss = 0;
    const auto rep = evaluate_targets(spec, shipped(), scenarios(), SimClock{}, {}, &loss);
    REQUIRE(rep.size() == 2);
    CHECK(rep[0].loss == 0.0);  // comfortably above the floor
    const double rel = (rep[1].value - 1e9) / 1e9;
    CHECK(rep[1].loss == doctest::Approx(rel * rel));
    CHECK(loss == doctest::Approx(rep[0].loss + rep[1].loss));
}

TEST_CASE("zero free parameters return the input unchanged") {
    auto spec = parse_calibration_spec(R"({"targets":[{"scenario":"run2","metric":"arrears_end","target":2e10}]})");
    const auto res = calibrate(spec, shipped(), scenarios());
    CHECK(res.evaluations == 1);
    CHECK(res.final_loss == res.initial_loss);
    for (const auto& info : param_registry()) CHECK(get_param(res.params, info.name) == get_param(shipped(), info.name));
}

TEST_CASE("one planted parameter is recovered from synthetic targets") {
    auto spec = parse_calibration_spec(R"({
        "seed": 3, "max_evaluations": 400, "restarts": 1,
        "planted": {"covid.recovery_delay": 12.0},
        "free": [{"name": "covid.recovery_delay", "lower": 4, "upper": 24}],
        "targets": [{"scenario": "run2", "metric": "arrears_end"}, {"scenario": "run2", "metric": "homeless_end"}]})");
    const auto res = calibrate(spec, shipped(), scenarios());
    CHECK(get_param(res.params, "covid.recovery_delay") == doctest::Approx(12.0).epsilon(0.01));
    CHECK(provenance_of(res.params, "covid.recovery_delay") == "calibrated");
    CHECK(res.final_loss < res.initial_loss);

    const auto again = calibrate(spec, shipped(), scenarios());
    CHECK(get_param(again.params, "covid.recovery_delay") == get_param(res.params, "covid.recovery_delay"));
}

TEST_CASE("the shipped self-consistency spec recovers its planted values") {
    const auto spec = load_calibration_spec(std::string(HSD_SOURCE_DIR) + "/calibration/self_consistency.json");
    REQUIRE_FALSE(spec.planted.empty());
    const auto res = calibrate(spec, shipped(), scenarios());
    for (const auto& [name, value] : spec.planted) CHECK(get_param(res.params, name) == doctest::Approx(value).epsilon(0.01));
}

TEST_CASE("budget exhaustion returns the best point with a warning") {
    auto spec = parse_calibration_spec(R"({
        "max_evaluations": 5, "restarts": 0,
        "free": [{"name": "landlord_tolerance", "lower": 500, "upper": 5000}],
        "targets": [{"scenario": "run2", "metric": "arrears_end", "target": 1e3}]})");
    const auto res = calibrate(spec, shipped(), scenarios());
    CHECK(res.evaluations <= 5);
    CHECK_FALSE(res.warnings.empty());
    CHECK(res.final_loss <= res.initial_loss);
}
