#include "housing_sd/validation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "housing_sd/text_format.hpp"

namespace hsd {

namespace fs = std::filesystem;
using namespace housing;

TheilResult theils_u(std::span<const double> sim, std::span<const double> obs) {
    if (sim.size() != obs.size()) throw std::invalid_argument("theils_u: series lengths differ");
    if (sim.size() < 2) throw std::invalid_argument("theils_u: need at least two points");
    const double n = static_cast<double>(sim.size());
    double ms = 0, mo = 0, ss = 0, so = 0;
    for (std::size_t i = 0; i < sim.size(); ++i) {
        ms += sim[i];
        mo += obs[i];
        ss += sim[i] * sim[i];
        so += obs[i] * obs[i];
    }
    if (ss == 0.0 && so == 0.0) throw std::domain_error("theils_u: both series are identically zero");
    ms /= n;
    mo /= n;
    double mse = 0, vs = 0, vo = 0, cov = 0;
    for (std::size_t i = 0; i < sim.size(); ++i) {
        const double d = sim[i] - obs[i];
        mse += d * d;
        vs += (sim[i] - ms) * (sim[i] - ms);
        vo += (obs[i] - mo) * (obs[i] - mo);
        cov += (sim[i] - ms) * (obs[i] - mo);
    }
    mse /= n;
    vs /= n;
    vo /= n;
    cov /= n;

    TheilResult r;
    r.mse = mse;
    r.U = std::sqrt(mse) / (std::sqrt(ss / n) + std::sqrt(so / n));
    if (mse > 0.0) {
        const double sd_s = std::sqrt(vs);
        const double sd_o = std::sqrt(vo);
        const double corr = (sd_s > 0 && sd_o > 0) ? cov / (sd_s * sd_o) : 0.0;
        r.U_M = (ms - mo) * (ms - mo) / mse;
        r.U_S = (sd_s - sd_o) * (sd_s - sd_o) / mse;
        r.U_C = 2.0 * (1.0 - corr) * sd_s * sd_o / mse;
    }
    return r;
}

// ---------------------------------------------------------------------------

namespace {

const std::vector<std::string> kSources = {"AHAR", "Eviction Lab", "Pulse", "NLIHC"};

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

ReferenceMode parse_reference_mode(const std::string& series, const std::string& csv_text) {
    ReferenceMode m;
    m.series = series;
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument(series + ": empty reference file");
    const auto header = text::split_csv_line(trim(line));
    if (header != std::vector<std::string>{"calendar_month", "value", "units", "source"})
        throw std::invalid_argument(series + ": header must be calendar_month,value,units,source");
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto cells = text::split_csv_line(line);
        const std::string where = series + " row " + std::to_string(row);
        if (cells.size() != 4) throw std::invalid_argument(where + ": expected 4 columns");
        const double t = months_from_label(trim(cells[0]));
        char* end = nullptr;
        const std::string vtext = trim(cells[1]);
        const double v = std::strtod(vtext.c_str(), &end);
        if (vtext.empty() || *end != '\0' || !std::isfinite(v)) throw std::invalid_argument(where + ": bad value");
        const std::string units = trim(cells[2]);
        const std::string source = trim(cells[3]);
        if (std::find(kSources.begin(), kSources.end(), source) == kSources.end())
            throw std::invalid_argument(where + ": unknown source '" + source + "'");
        if (m.times.empty()) {
            m.units = units;
            m.source = source;
        } else {
            if (units != m.units) throw std::invalid_argument(where + ": units change from '" + m.units + "'");
            if (!(t > m.times.back())) throw std::invalid_argument(where + ": months must be strictly increasing");
        }
        m.times.push_back(t);
        m.values.push_back(v);
    }
    if (m.times.empty()) throw std::invalid_argument(series + ": no observations");
    return m;
}

ReferenceMode load_reference_mode(const std::string& path) {
    return parse_reference_mode(fs::path(path).stem().string(), text::read_file(path));
}

std::vector<ReferenceMode> load_reference_dir(const std::string& dir) {
    std::vector<ReferenceMode> out;
    if (dir.empty() || !fs::is_directory(dir)) return out;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) out.push_back(load_reference_mode(f.string()));
    return out;
}

SeriesMapping reference_mapping(const std::string& series) {
    if (series == "homeless") return {"H_lh", "households"};
    if (series == "insecure") return {"H_hi", "households"};
    if (series == "evictions") return {"e_p", "rental units/month"};
    if (series == "filings") return {"e_f", "rental units/month"};
    if (series == "arrears") return {"R", "dollars"};
    if (series == "crowding") return {"crowding", "households/unit"};
    throw std::invalid_argument("no model series for reference '" + series + "'");
}

SeriesFit fit_reference(const RunResult& run, const ReferenceMode& mode) {
    const auto map = reference_mapping(mode.series);
    if (mode.units != map.units)
        throw std::invalid_argument(mode.series + ": units '" + mode.units + "' do not match model units '" +
                                    map.units + "'");
    SeriesFit fit{mode.series, map.model_series, 0, {}};
    std::vector<double> sim;
    for (double t : mode.times) sim.push_back(run.series_value(map.model_series, run.index_at(t)));
    fit.points = sim.size();
    fit.theil = theils_u(sim, mode.values);
    return fit;
}

// ---------------------------------------------------------------------------

std::vector<std::string> check_invariants(const RunResult& run) {
    std::vector<std::string> bad;
    auto report = [&](const std::string& msg) {
        if (bad.size() < 64) bad.push_back(run.scenario + ": " + msg);
    };
    const auto& p = run.params;
    const double dt = run.clock.dt;
    const auto& layout = *stock_layout();

    for (std::size_t i = 0; i < run.states.size(); ++i) {
        const auto& s = run.states[i];
        const std::string at = " at t=" + text::format_number(run.times[i]);
        for (std::size_t k = 0; k < s.size(); ++k) {
            if (!std::isfinite(s[k])) report(layout[k].name + " not finite" + at);
            else if (layout[k].nonnegative && s[k] < 0.0) report(layout[k].name + " negative" + at);
        }
        const auto& f = run.flows[i];
        if (f.E_or < 1.0) report("E_or below 1" + at);
        if (f.E_r < 1.0 || f.E_r > std::max(1.0, p.rent_delay_curve.y_f) + 1e-12) report("E_r out of range" + at);
        if (f.E_es < p.stress_curve.floor || f.E_es > p.stress_curve.y_f + 1e-12) report("E_es out of range" + at);
        const auto& mc = p.mortgage_delay_curve;
        if (f.E_m < mc.y_min - 1e-12 || f.E_m > mc.y_max + 1e-12) report("E_m out of range" + at);
        if (f.E_cr < 1.0 || f.E_cr > std::max(1.0, p.crowding_curve.y_max) + 1e-12) report("E_cr out of range" + at);

        if (i + 1 < run.states.size()) {
            const auto& n = run.states[i + 1];
            auto units = [](const StateVector& x) {
                return x[UnitsOccupied] + x[UnitsPending] + x[UnitsUnoccupied] + x[UnitsForeclosed];
            };
            const double du = units(n) - units(s) + dt * f.s_d;
            if (std::abs(du) > 1e-9 * std::max(1.0, units(s))) report("rental units not conserved" + at);
            auto households = [](const StateVector& x) { return x[HouseholdsInsecure] + x[HouseholdsHomeless]; };
            const double dh = households(n) - households(s) - dt * (f.i_new + f.h_new - f.i_stbl - f.h_stbl);
            if (std::abs(dh) > 1e-9 * std::max(1.0, households(s))) report("households not conserved" + at);
        }
    }
    if (p.era.on) {
        for (std::size_t i = 0; i < run.states.size(); ++i) {
            const double total = run.states[i][EraFunds] + run.states[i][EraDisbursed];
            if (std::abs(total - p.era.total_funds) > 1e-9 * std::max(1.0, p.era.total_funds))
                report("assistance funds not conserved at t=" + text::format_number(run.times[i]));
        }
    }
    return bad;
}

// ---------------------------------------------------------------------------

unsigned default_workers() {
    if (const char* env = std::getenv("HOUSING_SD_WORKERS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    for (auto& t : pool) t.join();
}

}  // namespace

const std::vector<std::string>& headline_metrics() {
    static const std::vector<std::string> names = {"total_evictions", "arrears_end", "mean_crowding",
                                                   "homeless_end"};
    return names;
}

std::vector<std::string> SensitivityReport::flagged() const {
    std::vector<std::string> out;
    for (const auto& e : entries) {
        if (!e.error.empty()) out.push_back(e.parameter + ": " + e.error);
        for (const auto& v : e.violations) out.push_back(e.parameter + ": " + v);
    }
    return out;
}

const SensitivityEntry& SensitivityReport::entry(const std::string& parameter) const {
    for (const auto& e : entries)
        if (e.parameter == parameter) return e;
    throw std::invalid_argument("parameter '" + parameter + "' not in sweep");
}

SensitivityReport sensitivity_sweep(const ModelParams& params, const Scenario& scenario, double delta,
                                    const SimClock& clock, unsigned workers) {
    if (!(delta >= 0.0 && delta < 1.0)) throw std::invalid_argument("sensitivity delta must be in [0, 1)");
    SensitivityReport rep;
    rep.scenario = scenario.name;
    rep.delta = delta;
    const auto base = run_scenario(scenario, params, clock);
    rep.baseline = base.metrics;

    // Parameters that the scenario itself pins are left alone.
    std::vector<std::string> names;
    for (const auto& info : param_registry()) {
        if (!info.sweepable || info.kind != ParamKind::Real) continue;
        const std::string name(info.name);
        const bool pinned = std::any_of(scenario.overrides.begin(), scenario.overrides.end(),
                                        [&](const auto& o) { return o.first == name; });
        if (!pinned) names.push_back(name);
    }
    rep.entries.resize(names.size());

    parallel_for(names.size(), workers ? workers : default_workers(), [&](std::size_t i) {
        auto& e = rep.entries[i];
        e.parameter = names[i];
        e.base_value = get_param(params, e.parameter);
        const auto [lo, hi] = param_bounds(e.parameter);
        e.low_value = std::clamp(e.base_value * (1.0 - delta), lo, hi);
        e.high_value = std::clamp(e.base_value * (1.0 + delta), lo, hi);
        if (e.low_value > e.high_value) std::swap(e.low_value, e.high_value);
        try {
            ModelParams a = params, b = params;
            set_param(a, e.parameter, e.low_value);
            set_param(b, e.parameter, e.high_value);
            const auto ra = run_scenario(scenario, a, clock);
            const auto rb = run_scenario(scenario, b, clock);
            e.low = ra.metrics;
            e.high = rb.metrics;
            for (auto* r : {&ra, &rb})
                for (auto& v : check_invariants(*r)) e.violations.push_back(std::move(v));
        } catch (const std::exception& ex) {
            e.error = ex.what();
            return;
        }
        const double dp = e.base_value != 0.0 ? (e.high_value - e.low_value) / e.base_value : 0.0;
        for (const auto& m : headline_metrics()) {
            const double m0 = rep.baseline.get(m);
            double el = 0.0;
            if (dp != 0.0 && m0 != 0.0) el = (e.high.get(m) - e.low.get(m)) / m0 / dp;
            e.elasticity.emplace_back(m, el);
            e.max_abs_elasticity = std::max(e.max_abs_elasticity, std::abs(el));
        }
    });
    rep.runs = 1 + 2 * names.size();
    std::stable_sort(rep.entries.begin(), rep.entries.end(), [](const auto& a, const auto& b) {
        if (a.max_abs_elasticity != b.max_abs_elasticity) return a.max_abs_elasticity > b.max_abs_elasticity;
        return a.parameter < b.parameter;
    });
    return rep;
}

// ---------------------------------------------------------------------------

namespace {

Scenario everything_on() { return default_scenarios()[3]; }

}  // namespace

std::vector<ExtremeCase> extreme_conditions(const ModelParams& params, const SimClock& clock) {
    std::vector<ExtremeCase> out;
    auto run_case = [&](const std::string& name, const Scenario& sc, const std::function<void(ModelParams&)>& edit,
                        const std::function<std::string(const RunResult&)>& check) {
        ExtremeCase c{name, false, ""};
        try {
            ModelParams p = params;
            edit(p);
            const auto r = run_scenario(sc, p, clock);
            const auto bad = check_invariants(r);
            if (!bad.empty())
                c.detail = bad.front();
            else
                c.detail = check(r);
            c.passed = c.detail.empty();
            if (c.passed) c.detail = "ok";
        } catch (const std::exception& ex) {
            c.detail = ex.what();
        }
        out.push_back(std::move(c));
    };
    auto ok = [](const RunResult&) { return std::string(); };

    // No shock: the COVID run must reproduce the pre-pandemic run.
    {
        ExtremeCase c{"covid.magnitude=0", false, ""};
        try {
            ModelParams p = params;
            p.covid.magnitude = 0.0;
            const auto scen = default_scenarios();
            const auto a = run_scenario(scen[0], p, clock);
            const auto b = run_scenario(scen[1], p, clock);
            double worst = 0.0;
            for (std::size_t i = 0; i < a.states.size(); ++i)
                for (std::size_t k = 0; k < a.states[i].size(); ++k)
                    worst = std::max(worst, std::abs(a.states[i][k] - b.states[i][k]) /
                                                std::max(1.0, std::abs(a.states[i][k])));
            c.passed = worst <= 1e-12 && check_invariants(b).empty();
            c.detail = c.passed ? "ok" : "runs differ by " + text::format_number(worst);
        } catch (const std::exception& ex) {
            c.detail = ex.what();
        }
        out.push_back(std::move(c));
    }
    run_case("covid.magnitude=1", everything_on(), [](ModelParams& p) { p.covid.magnitude = 1.0; }, ok);
    run_case("avg_household_income=0", everything_on(), [](ModelParams& p) { p.avg_household_income = 0.0; },
             [](const RunResult& r) {
                 for (const auto& f : r.flows)
                     if (f.E_r < r.params.rent_delay_curve.y_f - 1e-9)
                         return std::string("payment delay not saturated with zero income");
                 return std::string();
             });
    run_case("zero stocks", everything_on(),
             [](ModelParams& p) {
                 p.initial = InitialStocks{0, 0, 0, 0, 0, 0, 0, 0};
                 p.rate_new_insecurity = 0;
                 p.rate_new_homelessness = 0;
             },
             [](const RunResult& r) {
                 const auto& s = r.states.back();
                 for (auto k : {UnitsOccupied, UnitsPending, UnitsUnoccupied, HouseholdsInsecure, HouseholdsHomeless})
                     if (s[k] != 0.0) return std::string("empty system did not stay empty");
                 return std::string();
             });
    run_case("landlord_tolerance->0", everything_on(), [](ModelParams& p) { p.landlord_tolerance = 1e-12; }, ok);
    run_case("moratorium.effect_size=1", everything_on(), [](ModelParams& p) { p.moratorium.effect_size = 1.0; },
             [](const RunResult& r) {
                 const auto& m = r.params.moratorium;
                 for (std::size_t i = 0; i < r.times.size(); ++i) {
                     const double t = r.times[i];
                     if (t >= m.start_time + 1e-9 && t < m.start_time + m.duration - 1e-9 && r.flows[i].e_p != 0.0)
                         return "evictions processed during a full moratorium at t=" + text::format_number(t);
                 }
                 return std::string();
             });
    return out;
}

}  // namespace hsd
