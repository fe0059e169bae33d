// Release gate: one PASS/FAIL line per acceptance criterion, nonzero exit on any failure.

#include <iostream>

#include "CLI11.hpp"

#include "housing_sd/acceptance.hpp"
#include "housing_sd/params.hpp"
#include "housing_sd/scenarios.hpp"

int main(int argc, char** argv) {
    CLI::App app{"housing-sd acceptance criteria"};
    std::string params_path, scenarios_path, spec_path;
    bool verbose = false;
    app.add_option("--params", params_path)->required()->check(CLI::ExistingFile);
    app.add_option("--scenarios", scenarios_path)->required()->check(CLI::ExistingFile);
    app.add_option("--spec", spec_path, "Planted-parameter calibration spec")->required()->check(CLI::ExistingFile);
    app.add_flag("-v,--verbose", verbose, "Print every sub-check");
    CLI11_PARSE(app, argc, argv);

    try {
        const auto params = hsd::load_params(params_path);
        const auto scenarios = hsd::load_scenarios(scenarios_path);
        hsd::AcceptanceOptions opts;
        opts.self_consistency_spec = spec_path;
        bool ok = true;
        for (const auto& r : hsd::run_acceptance(params, scenarios, opts)) {
            ok = ok && r.passed;
            std::cout << hsd::format_criterion(r) << "\n";
            if (verbose || !r.passed)
                for (const auto& d : r.details) std::cout << "        " << d << "\n";
        }
        return ok ? 0 : 1;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
}
