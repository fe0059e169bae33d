#include "doctest.h"

#include <cmath>
#include <set>
#include <sstream>

#include "housing_sd/params.hpp"
#include "housing_sd/text_format.hpp"

using namespace hsd;

TEST_CASE("parameter files round-trip exactly") {
    ModelParams p;
    p.landlord_tolerance = 1234.5678901234567;
    p.covid.magnitude = 0.1 + 0.2;
    p.provenance["landlord_tolerance"] = "calibrated";
    std::istringstream in(params_to_string(p));
    const ModelParams q = read_params(in);
    for (const auto& info : param_registry()) CHECK(get_param(q, info.name) == get_param(p, info.name));
    CHECK(provenance_of(q, "landlord_tolerance") == "calibrated");
}

TEST_CASE("shipped parameter files load and carry valid provenance") {
    const std::set<std::string> tags{"paper", "cited-source", "assumption", "calibrated"};
    for (auto file : {"/params/default.toml", "/params/prior.toml"}) {
        const ModelParams p = load_params(std::string(HSD_SOURCE_DIR) + file);
        CHECK_NOTHROW(p.validate());
        for (const auto& info : param_registry()) CHECK(tags.count(provenance_of(p, info.name)) == 1);
        CHECK(p.eviction_proc_proportion == 0.38);
        CHECK(p.era.total_funds == 46.5e9);
    }
}

TEST_CASE("malformed parameter files are rejected") {
    const std::string good = params_to_string(ModelParams{});
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return read_params(in);
    };
    CHECK_NOTHROW(parse(good));
    CHECK_THROWS(parse(good + "no_such_parameter = 1.0\n"));
    CHECK_THROWS(parse(good + "avg_monthly_rent = 5.0\n"));  // duplicate
    CHECK_THROWS(parse("avg_monthly_rent = 1000.0\n"));       // everything else missing

    std::string wrong_units = good;
    const auto pos = wrong_units.find("dollars/unit/month");
    REQUIRE(pos != std::string::npos);
    wrong_units.replace(pos, 18, "euros");
    CHECK_THROWS(parse(wrong_units));
}

TEST_CASE("validation names the offending parameter") {
    ModelParams p;
    p.at_process = 0.0;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("at_process"), std::invalid_argument);
    p = ModelParams{};
    p.covid.magnitude = NAN;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = ModelParams{};
    p.provenance["avg_monthly_rent"] = "folklore";
    CHECK_THROWS(p.validate());
}

TEST_CASE("registry get and set by dotted name") {
    ModelParams p;
    set_param(p, "moratorium.duration", 12.0);
    CHECK(p.moratorium.duration == 12.0);
    set_param(p, "era.on", 1.0);
    CHECK(p.era.on);
    CHECK(get_param(p, "initial.households_homeless") == p.initial.households_homeless);
    CHECK_THROWS_AS(get_param(p, "bogus"), std::out_of_range);
    const auto [lo, hi] = param_bounds("covid.magnitude");
    CHECK(lo <= 0.0);
    CHECK(hi >= 1.0);
}

TEST_CASE("text helpers") {
    CHECK(text::format_number(0.1) == "0.1");
    CHECK(text::format_number(46.5e9) == "4.65e+10");
    CHECK(std::stod(text::format_number(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(text::fnv1a_hex("") == "cbf29ce484222325");
    CHECK(text::fnv1a_hex("a") == "af63dc4c8601ec8c");
    const auto cells = text::split_csv_line("2019-01,567715,households,AHAR");
    REQUIRE(cells.size() == 4);
    CHECK(cells[3] == "AHAR");
}
