#include "housing_sd/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "housing_sd/calibration.hpp"
#include "housing_sd/text_format.hpp"
#include "housing_sd/validation.hpp"

namespace hsd {

namespace {

struct Checker {
    CriterionResult& out;
    void check(bool ok, const std::string& what) {
        out.details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
        if (!ok) out.passed = false;
    }
};

std::string num(double v, int digits = 4) {
    std::ostringstream s;
    s.precision(digits);
    s << v;
    return s.str();
}

std::string pct(double v) { return num(100.0 * v, 4) + "%"; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::string format_criterion(const CriterionResult& r) {
    std::ostringstream s;
    s << (r.passed ? "PASS" : "FAIL") << "  criterion " << r.id << ": " << r.title;
    return s.str();
}

std::vector<CriterionResult> run_acceptance(const ModelParams& params, const std::vector<Scenario>& scenarios,
                                            const AcceptanceOptions& options) {
    std::vector<CriterionResult> results;
    const SimClock clock = options.clock;
    std::map<std::string, RunResult> runs;
    std::string load_error;
    try {
        for (auto name : {"run1", "run2", "run3", "run4", "run4a"})
            runs.emplace(name, run_scenario(find_scenario(scenarios, name), params, clock));
    } catch (const std::exception& ex) {
        load_error = ex.what();
    }
    auto metric = [&](const char* run, const char* m) { return runs.at(run).metrics.get(m); };
    auto begin = [&](int id, const char* title) -> CriterionResult& {
        results.push_back({id, title, true, {}, 0});
        if (!load_error.empty()) {
            results.back().passed = false;
            results.back().details.push_back("FAIL " + load_error);
        }
        return results.back();
    };

    // 1. Moratorium effect
    {
        auto t0 = std::chrono::steady_clock::now();
        auto& r = begin(1, "moratorium cuts processed evictions by 51% +/- 5 pp");
        if (load_error.empty()) {
            Checker c{r};
            const double change = pct_change(metric("run2", "total_evictions"), metric("run3", "total_evictions"));
            c.check(std::abs(change + 0.51) <= 0.05, "run3 vs run2 evictions " + pct(change));
            auto w0 = std::chrono::steady_clock::now();
            run_scenario(find_scenario(scenarios, "run2"), params, clock);
            const double secs = seconds_since(w0);
            c.check(secs < 10.0, "single national run took " + num(secs, 3) + " s");
        }
        r.seconds = seconds_since(t0);
    }

    // 2. No-intervention fallout
    {
        auto t0 = std::chrono::steady_clock::now();
        auto& r = begin(2, "COVID without intervention: arrears, evictions, crowding, homelessness");
        if (load_error.empty()) {
            Checker c{r};
            const double arrears = metric("run2", "arrears_end");
            c.check(std::abs(arrears / 20.4e9 - 1.0) <= 0.15, "run2 arrears at horizon $" + num(arrears / 1e9) + "B");
            const double excess = metric("run2", "total_evictions") - metric("run1", "total_evictions");
            c.check(std::abs(excess / 1.5e6 - 1.0) <= 0.15, "excess evictions " + num(excess / 1e6) + "M");
            const double ev = pct_change(metric("run1", "total_evictions"), metric("run2", "total_evictions"));
            c.check(ev >= 0.25, "evictions vs run1 " + pct(ev));
            const double crowd = pct_change(metric("run1", "mean_crowding"), metric("run2", "mean_crowding"));
            c.check(std::abs(crowd - 0.45) <= 0.10, "crowding vs run1 " + pct(crowd));
            const double home = pct_change(metric("run1", "homeless_end"), metric("run2", "homeless_end"));
            c.check(std::abs(home - 1.20) <= 0.20, "homelessness vs run1 " + pct(home));
        }
        r.seconds = seconds_since(t0);
    }

    // 3. Moratorium residue
    {
        auto t0 = std::chrono::steady_clock::now();
        auto& r = begin(3, "arrears under the moratorium stay at or above $18B");
        if (load_error.empty()) {
            Checker c{r};
            const double arrears = metric("run3", "arrears_end");
            c.check(arrears >= 18e9, "run3 arrears at horizon $" + num(arrears / 1e9) + "B");
        }
        r.seconds = seconds_since(t0);
    }

    // 4. Assistance pacing
    {
        auto t0 = std::chrono::steady_clock::now();
        auto& r = begin(4, "rental assistance pacing and the accelerated variant");
        if (load_error.empty()) {
            Checker c{r};
            const double total = runs.at("run4").params.era.total_funds;
            const double share = metric("run4", "era_disbursed_feb2022") / total;
            c.check(std::abs(share - 0.42) <= 0.03, "run4 disbursed by 2022-02 " + pct(share));
            const double a4 = metric("run4", "arrears_end");
            const double a4a = metric("run4a", "arrears_end");
            c.check(a4a < a4, "run4a arrears $" + num(a4a / 1e9) + "B vs run4 $" + num(a4 / 1e9) + "B");
            const double exhausted = metric("run4a", "era_exhausted_at");
            c.check(std::isfinite(exhausted) && exhausted < clock.horizon,
                    "run4a funds exhausted at t=" + num(exhausted));
        }
        r.seconds = seconds_since(t0);
    }

    // 5. Pre-pandemic processing
    {
        auto t0 = std::chrono::steady_clock::now();
        auto& r = begin(5, "pre-pandemic processing equals 0.38 / AT_proc of pending cases");
        if (load_error.empty()) {
            Checker c{r};
            const auto& run = runs.at("run1");
            c.check(run.params.eviction_proc_proportion == 0.38,
                    "eviction_proc_proportion = " + num(run.params.eviction_proc_proportion));
            double worst = 0.0;
            for (std::size_t i = 0; i < run.times.size(); ++i) {
                const double expect = 0.38 / run.params.at_process * run.states[i][housing::UnitsPending];
                worst = std::max(worst, std::abs(run.flows[i].e_p - expect) / std::max(1.0, expect));
            }
            c.check(worst <= 1e-9, "max relative deviation " + num(worst, 3));
        }
        r.seconds = seconds_since(t0);
    }

    // 6. Property suite
    {
        auto t0 = std::chrono::steady_clock::now();
        auto& r = begin(6, "property suite");
        r.passed = true;
        r.details.clear();
        Checker c{r};
        std::mt19937_64 rng(options.seed);

        {  // effect-curve bounds on random states
            std::uniform_real_distribution<double> u(0.0, 1.0);
            ModelParams p = params;
            p.covid.on = true;
            p.moratorium.on = true;
            p.era.on = true;
            int bad = 0;
            for (int k = 0; k < 10000; ++k) {
                StateVector s = housing::initial_state(p);
                for (std::size_t i = 0; i < housing::EraFunds; ++i) {
                    const double scale = std::max(1.0, s[i]);
                    s[i] = u(rng) < 0.05 ? 0.0 : scale * 4.0 * u(rng);
                }
                s[housing::CovidSmooth] = p.covid.magnitude * u(rng);
                const auto f = housing::compute_flows(s, p, 60.0 * u(rng), 0.25);
                const auto& mc = p.mortgage_delay_curve;
                const bool ok = f.E_or >= 1.0 && f.E_es >= p.stress_curve.floor &&
                                f.E_es <= p.stress_curve.y_f + 1e-12 && f.E_m >= mc.y_min - 1e-12 &&
                                f.E_m <= mc.y_max + 1e-12 && f.E_cr >= 1.0 &&
                                f.E_cr <= std::max(1.0, p.crowding_curve.y_max) + 1e-12 && f.E_r >= 1.0 &&
                                f.E_r <= std::max(1.0, p.rent_delay_curve.y_f) + 1e-12;
                bad += !ok;
            }
            c.check(bad == 0, "effect bounds on 10^4 random states (" + std::to_string(bad) + " violations)");
        }

        {  // conservation, non-negativity, ERA accounting on every run
            std::size_t violations = 0;
            std::string first;
            for (const auto& [name, run] : runs) {
                const auto v = check_invariants(run);
                violations += v.size();
                if (!v.empty() && first.empty()) first = v.front();
            }
            c.check(load_error.empty() && violations == 0,
                    "conservation, non-negativity and assistance accounting on all runs" +
                        (first.empty() ? std::string() : " (" + first + ")"));
        }

        {  // +/-15% sweep on every run
            std::size_t total_runs = 0, flagged = 0, params_swept = 0;
            std::string first;
            try {
                for (auto name : {"run1", "run2", "run3", "run4", "run4a"}) {
                    const auto rep =
                        sensitivity_sweep(params, find_scenario(scenarios, name), 0.15, clock, options.workers);
                    total_runs += rep.runs - 1;
                    params_swept += rep.entries.size();
                    const auto f = rep.flagged();
                    flagged += f.size();
                    if (!f.empty() && first.empty()) first = f.front();
                }
            } catch (const std::exception& ex) {
                first = ex.what();
                ++flagged;
            }
            c.check(flagged == 0 && total_runs == 2 * params_swept,
                    "+/-15% sweep: " + std::to_string(total_runs) + " perturbed runs, " + std::to_string(flagged) +
                        " flagged" + (first.empty() ? std::string() : " (" + first + ")"));
        }

        {  // Theil decomposition
            std::uniform_real_distribution<double> u(-5.0, 5.0);
            std::uniform_int_distribution<int> len(2, 40);
            double worst = 0.0;
            for (int k = 0; k < 1000; ++k) {
                std::vector<double> a(len(rng)), b;
                for (auto& v : a) v = u(rng);
                for (double v : a) b.push_back(v + u(rng));
                const auto t = theils_u(a, b);
                if (t.mse > 0) worst = std::max(worst, std::abs(t.U_M + t.U_S + t.U_C - 1.0));
            }
            c.check(worst <= 1e-9, "Theil shares sum to 1 on 10^3 random pairs (max error " + num(worst, 3) + ")");
        }

        {  // dt halving
            SimClock fine;
            fine.dt = clock.dt / 2.0;
            double worst = 0.0;
            std::string where;
            try {
                for (const auto& [name, run] : runs) {
                    const auto other = run_scenario(find_scenario(scenarios, name), params, fine);
                    for (const auto& m : headline_metrics()) {
                        const double d = std::abs(pct_change(run.metrics.get(m), other.metrics.get(m)));
                        if (!(d <= worst)) {
                            worst = d;
                            where = name + " " + m;
                        }
                    }
                }
            } catch (const std::exception& ex) {
                worst = INFINITY;
                where = ex.what();
            }
            c.check(load_error.empty() && worst < 0.02, "halving dt moves headline metrics by at most " + pct(worst) +
                                                            (where.empty() ? "" : " (" + where + ")"));
        }

        if (load_error.empty()) {  // moratorium suppression
            const auto& run = runs.at("run3");
            const auto& m = run.params.moratorium;
            double worst = 0.0;
            for (std::size_t i = 0; i < run.times.size(); ++i) {
                const double t = run.times[i];
                if (t < m.start_time + 1e-9 || t >= m.start_time + m.duration - 1e-9) continue;
                const double cap = 0.1 * run.params.eviction_proc_proportion / run.params.at_process *
                                   run.states[i][housing::UnitsPending];
                if (cap > 0) worst = std::max(worst, run.flows[i].e_p / cap);
            }
            c.check(worst <= 1.0 + 1e-9,
                    "moratorium processing at most 10% of baseline (peak at " + pct(worst) + " of that cap)");

            const auto& era = runs.at("run4");
            const auto& last = era.states.back();
            const double total = era.params.era.total_funds;
            const double gap = std::abs(last[housing::EraFunds] + last[housing::EraDisbursed] - total) / total;
            c.check(gap <= 1e-6, "assistance disbursed + remaining = allocated (relative gap " + num(gap, 3) + ")");
        }

        {  // calibration self-consistency
            if (options.self_consistency_spec.empty()) {
                c.check(false, "calibration self-consistency: no spec given");
            } else {
                try {
                    auto spec = load_calibration_spec(options.self_consistency_spec);
                    const auto planted = spec.planted;
                    const auto fit = calibrate(spec, params, scenarios, clock);
                    bool ok = !planted.empty();
                    std::string msg;
                    for (const auto& [name, value] : planted) {
                        const double got = get_param(fit.params, name);
                        ok = ok && std::abs(got / value - 1.0) <= 0.01;
                        msg += " " + name + " planted " + num(value, 6) + " recovered " + num(got, 6);
                    }
                    c.check(ok, "calibration self-consistency:" + msg);
                } catch (const std::exception& ex) {
                    c.check(false, std::string("calibration self-consistency: ") + ex.what());
                }
            }
        }

        {  // extreme conditions
            const auto cases = extreme_conditions(params, clock);
            bool ok = !cases.empty();
            std::string msg;
            for (const auto& e : cases) {
                ok = ok && e.passed;
                if (!e.passed) msg += " " + e.name + ": " + e.detail;
            }
            c.check(ok, "extreme-condition battery (" + std::to_string(cases.size()) + " cases)" + msg);
        }
        r.seconds = seconds_since(t0);
    }
    return results;
}

}  // namespace hsd
