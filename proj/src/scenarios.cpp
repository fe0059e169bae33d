#include "housing_sd/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "housing_sd/text_format.hpp"

namespace hsd {

using housing::FlowSet;

ModelParams Scenario::apply(ModelParams p) const {
    p.covid.on = covid_on;
    p.moratorium.on = moratorium_on;
    p.era.on = era_on;
    p.era.rate_multiplier = era_rate_multiplier;
    for (const auto& [name, value] : overrides) set_param(p, name, value);
    return p;
}

std::vector<Scenario> default_scenarios(double run4a_multiplier) {
    return {
        {"run1", "pre-pandemic baseline", false, false, false, 1.0, {}},
        {"run2", "COVID-19 shock, no intervention", true, false, false, 1.0, {}},
        {"run3", "COVID-19 shock with eviction moratorium", true, true, false, 1.0, {}},
        {"run4", "moratorium plus emergency rental assistance", true, true, true, 1.0, {}},
        {"run4a", "moratorium plus accelerated rental assistance", true, true, true, run4a_multiplier, {}},
    };
}

std::vector<Scenario> parse_scenarios(const std::string& json_text) {
    const auto doc = nlohmann::json::parse(json_text);
    std::vector<Scenario> out;
    for (const auto& item : doc.at("scenarios")) {
        Scenario s;
        s.name = item.at("name").get<std::string>();
        s.label = item.value("label", "");
        s.covid_on = item.value("covid", false);
        s.moratorium_on = item.value("moratorium", false);
        s.era_on = item.value("era", false);
        s.era_rate_multiplier = item.value("era_rate_multiplier", 1.0);
        if (!(s.era_rate_multiplier > 0.0)) throw std::invalid_argument(s.name + ": era_rate_multiplier must be > 0");
        if (item.contains("overrides")) {
            for (const auto& [key, value] : item.at("overrides").items()) {
                param_info(key);  // rejects unknown names
                s.overrides.emplace_back(key, value.get<double>());
            }
        }
        for (const auto& prev : out)
            if (prev.name == s.name) throw std::invalid_argument("duplicate scenario '" + s.name + "'");
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<Scenario> load_scenarios(const std::string& path) {
    try {
        return parse_scenarios(text::read_file(path));
    } catch (const std::exception& ex) {
        throw std::runtime_error(path + ": " + ex.what());
    }
}

const Scenario& find_scenario(const std::vector<Scenario>& all, const std::string& name) {
    for (const auto& s : all)
        if (s.name == name) return s;
    throw std::invalid_argument("unknown scenario '" + name + "'");
}

const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names = {
        "total_evictions", "total_filings", "arrears_end",   "arrears_growth_36m", "peak_arrears",  "mean_crowding",
        "homeless_end",    "mean_homeless", "insecure_end",  "era_disbursed",      "era_disbursed_feb2022", "era_remaining", "era_exhausted_at",
    };
    return names;
}

std::vector<std::pair<std::string, double>> MetricSet::items() const {
    const double values[] = {total_evictions, total_filings, arrears_end,   arrears_growth_36m,
                             peak_arrears,    mean_crowding, homeless_end,  mean_homeless,
                             insecure_end,    era_disbursed, era_disbursed_feb2022, era_remaining, era_exhausted_at};
    std::vector<std::pair<std::string, double>> out;
    const auto& names = metric_names();
    for (std::size_t i = 0; i < names.size(); ++i) out.emplace_back(names[i], values[i]);
    return out;
}

double MetricSet::get(const std::string& name) const {
    for (const auto& [k, v] : items())
        if (k == name) return v;
    throw std::invalid_argument("unknown metric '" + name + "'");
}

std::size_t RunResult::index_at(double t) const {
    if (times.empty()) throw std::out_of_range("empty run");
    const double k = std::round(t / clock.dt);
    if (k < 0 || k >= static_cast<double>(times.size()) || std::abs(k * clock.dt - t) > 1e-9)
        throw std::out_of_range("time " + std::to_string(t) + " is not a sample of this run");
    return static_cast<std::size_t>(k);
}

double RunResult::accumulated_arrears_at(double t) const { return states[index_at(t)][housing::RentDue]; }

double RunResult::series_value(const std::string& name, std::size_t i) const {
    const auto& state = states.at(i);
    if (state.has(name)) return state.at(name);
    return housing::value_of(flows.at(i), name);
}

MetricSet compute_metrics(const RunResult& r) {
    using namespace housing;
    MetricSet m;
    const std::size_t first = r.index_at(r.clock.burn_in);
    const std::size_t last = r.times.size() - 1;
    const auto& s0 = r.states[first];
    const auto& s1 = r.states[last];
    m.total_evictions = s1[CumulativeEvictions] - s0[CumulativeEvictions];
    m.total_filings = s1[CumulativeFilings] - s0[CumulativeFilings];
    m.arrears_end = s1[RentDue];
    const double back = std::max(0.0, r.times[last] - 36.0);
    m.arrears_growth_36m = s1[RentDue] - r.accumulated_arrears_at(std::round(back / r.clock.dt) * r.clock.dt);
    double crowd = 0.0;
    double homeless = 0.0;
    for (std::size_t i = first; i <= last; ++i) {
        m.peak_arrears = std::max(m.peak_arrears, r.states[i][RentDue]);
        crowd += r.flows[i].crowding;
        homeless += r.states[i][HouseholdsHomeless];
    }
    const double n = static_cast<double>(last - first + 1);
    m.mean_crowding = crowd / n;
    m.mean_homeless = homeless / n;
    m.homeless_end = s1[HouseholdsHomeless];
    m.insecure_end = s1[HouseholdsInsecure];
    m.era_disbursed = s1[EraDisbursed];
    const double feb2022 = std::min(r.times[last], months_from_label("2022-02"));
    m.era_disbursed_feb2022 = r.states[r.index_at(std::round(feb2022 / r.clock.dt) * r.clock.dt)][EraDisbursed];
    m.era_remaining = s1[EraFunds];
    if (r.params.era.on && r.params.era.total_funds > 0.0) {
        for (std::size_t i = 0; i <= last; ++i) {
            if (r.states[i][EraFunds] <= 1e-9 * r.params.era.total_funds) {
                m.era_exhausted_at = r.times[i];
                break;
            }
        }
    }
    return m;
}

RunResult run_scenario(const Scenario& scenario, const ModelParams& params, const SimClock& clock) {
    RunResult r;
    r.scenario = scenario.name;
    r.clock = clock;
    try {
        r.params = scenario.apply(params);
        r.params.validate();
        const ModelParams& p = r.params;
        auto model = [&p](const StateVector& s, double t, double dt) { return housing::derivatives(s, p, t, dt); };
        const std::size_t n = clock.steps() + 1;
        r.flows.reserve(n);
        auto observe = [&](double t, const StateVector& s) {
            r.flows.push_back(housing::compute_flows(s, p, t, clock.dt));
            if (r.flows.back().guard_hits > 0 && r.diagnostics.size() < 32)
                r.diagnostics.push_back(scenario.name + ": empty-market guard active at t=" + text::format_number(t));
        };
        auto traj = simulate(model, clock, housing::initial_state(p), observe);
        r.times = std::move(traj.times);
        r.states = std::move(traj.states);
        for (const auto& c : traj.clamps)
            r.diagnostics.push_back(scenario.name + ": clamped " + c.stock + " from " + text::format_number(c.value) +
                                    " at t=" + text::format_number(c.t));
    } catch (const NonFiniteError& ex) {
        throw ScenarioError(scenario.name, ex.what());
    } catch (const std::invalid_argument& ex) {
        throw ScenarioError(scenario.name, ex.what());
    }
    r.metrics = compute_metrics(r);
    return r;
}

double pct_change(double baseline, double variant) {
    if (baseline == 0.0) return variant == 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
    return (variant - baseline) / baseline;
}

const MetricDelta& Comparison::operator[](const std::string& metric) const {
    for (const auto& d : deltas)
        if (d.metric == metric) return d;
    throw std::invalid_argument("unknown metric '" + metric + "'");
}

Comparison compare(const RunResult& baseline, const RunResult& variant) {
    const auto& a = baseline.clock;
    const auto& b = variant.clock;
    if (a.dt != b.dt || a.horizon != b.horizon || a.burn_in != b.burn_in)
        throw std::invalid_argument("compare: " + baseline.scenario + " and " + variant.scenario +
                                    " use different analytical windows");
    Comparison c{baseline.scenario, variant.scenario, {}};
    const auto base = baseline.metrics.items();
    const auto var = variant.metrics.items();
    for (std::size_t i = 0; i < base.size(); ++i) {
        const double x = base[i].second;
        const double y = var[i].second;
        c.deltas.push_back({base[i].first, x, y, y - x, pct_change(x, y)});
    }
    return c;
}

std::string Table::to_csv() const {
    std::string out;
    for (std::size_t j = 0; j < columns.size(); ++j) out += (j ? "," : "") + columns[j];
    out += '\n';
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        out += text::format_number(row[0]);
        out += ',';
        out += labels[i];
        for (std::size_t j = 1; j < row.size(); ++j) {
            out += ',';
            out += text::format_number(row[j]);
        }
        out += '\n';
    }
    return out;
}

Table emit_timeseries(const RunResult& r, const std::vector<std::string>& selection) {
    const auto& flow_list = housing::flow_names();
    const StateVector probe(housing::stock_layout());
    for (const auto& name : selection) {
        if (!probe.has(name) && std::find(flow_list.begin(), flow_list.end(), name) == flow_list.end())
            throw std::invalid_argument("unknown series '" + name + "'");
    }
    Table t;
    t.columns = {"t", "calendar"};
    if (selection.empty()) return t;
    t.columns.insert(t.columns.end(), selection.begin(), selection.end());
    for (std::size_t i = 0; i < r.times.size(); ++i) {
        std::vector<double> row{r.times[i]};
        for (const auto& name : selection) row.push_back(r.series_value(name, i));
        t.rows.push_back(std::move(row));
        t.labels.push_back(calendar_label(r.times[i]));
    }
    return t;
}

}  // namespace hsd
