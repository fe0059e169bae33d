// housing-sd: command line front end for the housing system dynamics model.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "housing_sd/acceptance.hpp"
#include "housing_sd/calibration.hpp"
#include "housing_sd/model.hpp"
#include "housing_sd/params.hpp"
#include "housing_sd/scenarios.hpp"
#include "housing_sd/text_format.hpp"
#include "housing_sd/validation.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace hsd;

namespace {

enum Exit { kOk = 0, kAcceptanceFailed = 1, kInputError = 2, kInvariantBreach = 3 };

struct Config {
    std::string params_path;
    std::string scenarios_path;
    std::string reference_dir = "reference";
    std::string out_dir = "out";
    std::string format = "csv";
    std::optional<double> dt;
    std::optional<std::uint64_t> seed;
    std::optional<double> era_multiplier;
};

struct Loaded {
    ModelParams params;
    std::string params_source;
    std::string params_hash;
    std::vector<Scenario> scenarios;
    std::string scenarios_source;
    SimClock clock;
};

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Loaded load(const Config& cfg) {
    Loaded l;
    std::string params_path = cfg.params_path;
    if (params_path.empty() && fs::exists("params/default.toml")) params_path = "params/default.toml";
    if (params_path.empty()) {
        l.params_source = "built-in defaults";
        l.params_hash = text::fnv1a_hex(params_to_string(l.params));
    } else {
        const std::string contents = text::read_file(params_path);
        l.params = load_params(params_path);
        l.params_source = params_path;
        l.params_hash = text::fnv1a_hex(contents);
    }

    std::string scen_path = cfg.scenarios_path;
    if (scen_path.empty() && fs::exists("scenarios/runs.json")) scen_path = "scenarios/runs.json";
    if (scen_path.empty()) {
        l.scenarios = default_scenarios();
        l.scenarios_source = "built-in defaults";
    } else {
        l.scenarios = load_scenarios(scen_path);
        l.scenarios_source = scen_path;
    }
    if (cfg.era_multiplier) {
        if (!(*cfg.era_multiplier > 0)) throw std::invalid_argument("--era-multiplier must be > 0");
        // Only the accelerated variants carry a multiplier other than one.
        for (auto& s : l.scenarios)
            if (s.era_rate_multiplier != 1.0) s.era_rate_multiplier = *cfg.era_multiplier;
    }
    if (cfg.dt) {
        if (!(*cfg.dt > 0)) throw std::invalid_argument("--dt must be > 0");
        l.clock.dt = *cfg.dt;
    }
    l.clock.validate();
    return l;
}

/// Everything a command produces, written in one go once the command has
/// succeeded far enough to have outputs.
struct Batch {
    std::vector<std::pair<std::string, std::string>> files;
    void add(const std::string& name, std::string contents) { files.emplace_back(name, std::move(contents)); }
};

json params_json(const ModelParams& p) {
    json out = json::object();
    for (const auto& info : param_registry()) {
        out[info.name] = {{"value", get_param(p, info.name)}, {"provenance", provenance_of(p, info.name)}};
    }
    return out;
}

void write_batch(const Config& cfg, const Loaded& l, const std::string& command, const std::string& started,
                 const std::vector<std::string>& scenario_names, Batch batch) {
    json manifest;
    manifest["tool"] = "housing-sd";
    manifest["version"] = HOUSING_SD_VERSION;
    manifest["command"] = command;
    manifest["params_source"] = l.params_source;
    manifest["params_hash"] = l.params_hash;
    manifest["scenarios_source"] = l.scenarios_source;
    manifest["scenarios"] = scenario_names;
    manifest["clock"] = {{"dt", l.clock.dt}, {"horizon", l.clock.horizon}, {"burn_in", l.clock.burn_in}};
    manifest["seed"] = cfg.seed ? json(*cfg.seed) : json(nullptr);
    manifest["workers"] = default_workers();
    manifest["started_at"] = started;
    manifest["finished_at"] = utc_now();
    json outputs = json::array();
    for (const auto& [name, _] : batch.files) outputs.push_back(name);
    manifest["outputs"] = outputs;
    manifest["parameters"] = params_json(l.params);
    batch.add("manifest.json", manifest.dump(2) + "\n");

    fs::create_directories(cfg.out_dir);
    for (const auto& [name, contents] : batch.files) text::write_file_atomic((fs::path(cfg.out_dir) / name).string(), contents);
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json metrics_json(const MetricSet& m) {
    json out = json::object();
    for (const auto& [k, v] : m.items()) out[k] = num(v);
    return out;
}

json comparison_json(const Comparison& c) {
    json out = json::object();
    for (const auto& d : c.deltas)
        out[d.metric] = {{"baseline", num(d.baseline)}, {"variant", num(d.variant)},
                         {"absolute", num(d.absolute)}, {"percent", num(d.percent)}};
    return out;
}

/// Columns of equal length as CSV or as a column-keyed JSON object.
std::string render_table(const std::vector<std::string>& columns, const std::vector<std::vector<json>>& rows,
                         const std::string& format) {
    if (format == "json") {
        json out = json::object();
        for (std::size_t j = 0; j < columns.size(); ++j) {
            json col = json::array();
            for (const auto& r : rows) col.push_back(r[j]);
            out[columns[j]] = col;
        }
        return out.dump(2) + "\n";
    }
    std::string s;
    for (std::size_t j = 0; j < columns.size(); ++j) s += (j ? "," : "") + columns[j];
    s += '\n';
    for (const auto& r : rows) {
        for (std::size_t j = 0; j < r.size(); ++j) {
            if (j) s += ',';
            if (r[j].is_string()) s += r[j].get<std::string>();
            else if (r[j].is_null()) s += "";
            else if (r[j].is_boolean()) s += r[j].get<bool>() ? "true" : "false";
            else if (r[j].is_number_integer() || r[j].is_number_unsigned()) s += r[j].dump();
            else s += text::format_number(r[j].get<double>());
        }
        s += '\n';
    }
    return s;
}

std::vector<std::string> all_series() {
    std::vector<std::string> names;
    for (const auto& spec : *housing::stock_layout()) names.push_back(spec.name);
    for (const auto& f : housing::flow_names()) names.push_back(f);
    return names;
}

std::string timeseries(const RunResult& r, const std::vector<std::string>& selection, const std::string& format) {
    const Table t = emit_timeseries(r, selection);
    if (format == "csv") return t.to_csv();
    std::vector<std::vector<json>> rows;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        std::vector<json> row{t.rows[i][0], t.labels[i]};
        for (std::size_t j = 1; j < t.rows[i].size(); ++j) row.push_back(num(t.rows[i][j]));
        rows.push_back(std::move(row));
    }
    return render_table(t.columns, rows, format);
}

std::string ext(const std::string& format) { return format == "json" ? ".json" : ".csv"; }

std::string compare_table(const std::vector<Comparison>& comps, const std::string& format) {
    std::vector<std::vector<json>> rows;
    for (const auto& c : comps)
        for (const auto& d : c.deltas)
            rows.push_back({c.baseline, c.variant, d.metric, num(d.baseline), num(d.variant), num(d.absolute),
                            num(d.percent)});
    return render_table({"baseline", "variant", "metric", "baseline_value", "variant_value", "absolute", "percent"},
                        rows, format);
}

std::string sweep_table(const SensitivityReport& rep, const std::string& format) {
    std::vector<std::string> cols{"rank", "parameter", "base", "low", "high"};
    for (const auto& m : headline_metrics()) {
        cols.push_back(m + "_low");
        cols.push_back(m + "_high");
        cols.push_back(m + "_elasticity");
    }
    cols.insert(cols.end(), {"max_abs_elasticity", "flagged", "issue"});
    std::vector<std::vector<json>> rows;
    int rank = 0;
    for (const auto& e : rep.entries) {
        std::vector<json> row{++rank, e.parameter, e.base_value, e.low_value, e.high_value};
        for (const auto& m : headline_metrics()) {
            row.push_back(num(e.low.get(m)));
            row.push_back(num(e.high.get(m)));
            double el = NAN;
            for (const auto& [k, v] : e.elasticity)
                if (k == m) el = v;
            row.push_back(num(el));
        }
        const bool flagged = !e.error.empty() || !e.violations.empty();
        std::string issue = !e.error.empty() ? e.error : e.violations.empty() ? "" : e.violations.front();
        for (auto& ch : issue)
            if (ch == ',' || ch == '\n') ch = ';';
        row.insert(row.end(), {num(e.max_abs_elasticity), flagged, issue});
        rows.push_back(std::move(row));
    }
    return render_table(cols, rows, format);
}

struct ValidationOutcome {
    bool skipped = true;
    json report = json::object();
    std::string table;
};

ValidationOutcome validate_against(const std::string& dir, const RunResult& run, const std::string& format) {
    ValidationOutcome v;
    const auto refs = load_reference_dir(dir);
    v.report["reference_dir"] = dir;
    v.report["scenario"] = run.scenario;
    if (refs.empty()) {
        v.report["status"] = "SKIPPED";
        v.report["reason"] = "no reference CSVs found";
        return v;
    }
    v.skipped = false;
    v.report["status"] = "RAN";
    json fits = json::array();
    std::vector<std::vector<json>> rows;
    for (const auto& ref : refs) {
        const auto fit = fit_reference(run, ref);
        fits.push_back({{"series", fit.series}, {"model_series", fit.model_series}, {"points", fit.points},
                        {"source", ref.source}, {"U", fit.theil.U}, {"U_M", fit.theil.U_M},
                        {"U_S", fit.theil.U_S}, {"U_C", fit.theil.U_C}});
        rows.push_back({fit.series, fit.model_series, fit.points, ref.source, fit.theil.U, fit.theil.U_M,
                        fit.theil.U_S, fit.theil.U_C});
    }
    v.report["fits"] = fits;
    v.table = render_table({"series", "model_series", "points", "source", "U", "U_M", "U_S", "U_C"}, rows, format);
    return v;
}

/// Scenario that a run is naturally compared with: the one listed before it.
const Scenario* predecessor(const std::vector<Scenario>& all, const std::string& name) {
    for (std::size_t i = 1; i < all.size(); ++i)
        if (all[i].name == name) return &all[i - 1];
    return nullptr;
}

std::vector<std::string> names_of(const std::vector<Scenario>& s) {
    std::vector<std::string> out;
    for (const auto& x : s) out.push_back(x.name);
    return out;
}

// ---------------------------------------------------------------------------

int cmd_simulate(const Config& cfg, std::vector<std::string> requested, const std::vector<std::string>& series) {
    const auto started = utc_now();
    const Loaded l = load(cfg);
    if (requested.size() == 1 && requested[0] == "all") requested = names_of(l.scenarios);
    for (const auto& name : requested) find_scenario(l.scenarios, name);  // fail before any output
    const auto selection = series.empty() ? all_series() : series;
    emit_timeseries(RunResult{}, selection);                             // validates names

    Batch batch;
    int status = kOk;
    std::map<std::string, RunResult> cache;
    auto run = [&](const Scenario& s) -> const RunResult& {
        auto it = cache.find(s.name);
        if (it == cache.end()) it = cache.emplace(s.name, run_scenario(s, l.params, l.clock)).first;
        return it->second;
    };
    for (const auto& name : requested) {
        const auto& sc = find_scenario(l.scenarios, name);
        const auto& r = run(sc);
        json doc;
        doc["scenario"] = sc.name;
        doc["label"] = sc.label;
        doc["metrics"] = metrics_json(r.metrics);
        if (const auto* prev = predecessor(l.scenarios, name)) {
            doc["compared_to"] = prev->name;
            doc["comparison"] = comparison_json(compare(run(*prev), r));
        }
        const auto violations = check_invariants(r);
        doc["diagnostics"] = r.diagnostics;
        doc["invariant_violations"] = violations;
        if (!violations.empty()) {
            std::cerr << name << ": invariant breach: " << violations.front() << "\n";
            status = kInvariantBreach;
        }
        batch.add(name + ext(cfg.format), timeseries(r, selection, cfg.format));
        batch.add(name + ".metrics.json", doc.dump(2) + "\n");
        std::cout << name << ": evictions " << text::format_number(r.metrics.total_evictions) << ", arrears_end "
                  << text::format_number(r.metrics.arrears_end) << "\n";
    }
    write_batch(cfg, l, "simulate", started, requested, std::move(batch));
    return status;
}

int cmd_compare(const Config& cfg, const std::string& baseline, const std::string& variant) {
    const auto started = utc_now();
    const Loaded l = load(cfg);
    const auto& b = find_scenario(l.scenarios, baseline);
    const auto& v = find_scenario(l.scenarios, variant);
    const auto c = compare(run_scenario(b, l.params, l.clock), run_scenario(v, l.params, l.clock));
    for (const auto& d : c.deltas)
        std::cout << d.metric << ": " << text::format_number(d.baseline) << " -> " << text::format_number(d.variant)
                  << " (" << (std::isfinite(d.percent) ? text::format_number(100 * d.percent) + "%" : "n/a") << ")\n";
    Batch batch;
    batch.add("compare_" + baseline + "_" + variant + ext(cfg.format), compare_table({c}, cfg.format));
    write_batch(cfg, l, "compare", started, {baseline, variant}, std::move(batch));
    return kOk;
}

int cmd_sweep(const Config& cfg, const std::string& scenario, double delta) {
    const auto started = utc_now();
    const Loaded l = load(cfg);
    const auto& sc = find_scenario(l.scenarios, scenario);
    const auto rep = sensitivity_sweep(l.params, sc, delta, l.clock);
    std::cout << scenario << ": " << rep.runs << " runs over " << rep.entries.size() << " parameters\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(5, rep.entries.size()); ++i)
        std::cout << "  " << i + 1 << ". " << rep.entries[i].parameter << " (max |elasticity| "
                  << text::format_number(rep.entries[i].max_abs_elasticity) << ")\n";
    const auto flagged = rep.flagged();
    for (const auto& f : flagged) std::cerr << "flagged: " << f << "\n";
    Batch batch;
    batch.add("sweep_" + scenario + ext(cfg.format), sweep_table(rep, cfg.format));
    write_batch(cfg, l, "sweep", started, {scenario}, std::move(batch));
    return flagged.empty() ? kOk : kInvariantBreach;
}

int cmd_validate(const Config& cfg, const std::string& scenario) {
    const auto started = utc_now();
    const Loaded l = load(cfg);
    const auto& sc = find_scenario(l.scenarios, scenario);
    const auto v = validate_against(cfg.reference_dir, run_scenario(sc, l.params, l.clock), cfg.format);
    Batch batch;
    if (v.skipped) {
        std::cout << "validation SKIPPED: no reference CSVs in " << cfg.reference_dir << "\n";
    } else {
        for (const auto& f : v.report["fits"])
            std::cout << f["series"].get<std::string>() << ": U = " << text::format_number(f["U"].get<double>())
                      << "\n";
        batch.add("validation" + ext(cfg.format), v.table);
    }
    batch.add("validation.json", v.report.dump(2) + "\n");
    write_batch(cfg, l, "validate", started, {scenario}, std::move(batch));
    return kOk;
}

int cmd_calibrate(const Config& cfg, const std::string& spec_path, std::string params_out,
                  std::optional<int> max_evaluations) {
    const auto started = utc_now();
    const Loaded l = load(cfg);
    auto spec = load_calibration_spec(spec_path);
    if (cfg.seed) spec.seed = *cfg.seed;
    if (max_evaluations) spec.max_evaluations = *max_evaluations;
    const auto res = calibrate(spec, l.params, l.scenarios, l.clock);

    std::cout << "loss " << text::format_number(res.initial_loss) << " -> " << text::format_number(res.final_loss)
              << " after " << res.evaluations << " evaluations\n";
    for (const auto& t : res.report)
        std::cout << "  " << t.description << ": got " << text::format_number(t.value) << "\n";
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";

    json report;
    report["spec"] = spec_path;
    report["seed"] = spec.seed;
    report["initial_loss"] = num(res.initial_loss);
    report["final_loss"] = num(res.final_loss);
    report["evaluations"] = res.evaluations;
    report["converged"] = res.converged;
    json free = json::object();
    for (const auto& f : spec.free)
        free[f.name] = {{"value", get_param(res.params, f.name)}, {"lower", f.lower}, {"upper", f.upper}};
    report["fitted"] = free;
    json targets = json::array();
    for (const auto& t : res.report)
        targets.push_back({{"target", t.description}, {"value", num(t.value)}, {"loss", num(t.loss)}});
    report["targets"] = targets;
    report["warnings"] = res.warnings;

    Batch batch;
    batch.add("calibration_report.json", report.dump(2) + "\n");
    Loaded fitted = l;
    fitted.params = res.params;
    write_batch(cfg, fitted, "calibrate", started, names_of(l.scenarios), std::move(batch));
    if (params_out.empty()) params_out = (fs::path(cfg.out_dir) / "calibrated.toml").string();
    text::write_file_atomic(params_out, params_to_string(res.params));
    std::cout << "wrote " << params_out << "\n";
    return kOk;
}

int cmd_suite(const Config& cfg, const std::string& spec_path, const std::string& sweep_scenario,
              const std::string& validate_scenario) {
    const auto started = utc_now();
    const Loaded l = load(cfg);
    Batch batch;
    json summary;
    summary["tasks"] = json::object();

    std::map<std::string, RunResult> runs;
    json all_metrics = json::object();
    bool breach = false;
    for (const auto& s : l.scenarios) {
        try {
            auto r = run_scenario(s, l.params, l.clock);
            const auto violations = check_invariants(r);
            breach = breach || !violations.empty();
            all_metrics[s.name] = metrics_json(r.metrics);
            batch.add(s.name + ext(cfg.format), timeseries(r, all_series(), cfg.format));
            summary["tasks"]["simulate " + s.name] = violations.empty() ? "PASS" : "FAIL: " + violations.front();
            runs.emplace(s.name, std::move(r));
        } catch (const std::exception& ex) {
            summary["tasks"]["simulate " + s.name] = std::string("FAIL: ") + ex.what();
            breach = true;
        }
    }
    batch.add("metrics.json", all_metrics.dump(2) + "\n");

    std::vector<Comparison> comps;
    for (std::size_t i = 1; i < l.scenarios.size(); ++i) {
        const auto& a = l.scenarios[i - 1].name;
        const auto& b = l.scenarios[i].name;
        if (runs.count(a) && runs.count(b)) comps.push_back(compare(runs.at(a), runs.at(b)));
        if (i > 1 && runs.count(l.scenarios[0].name) && runs.count(b))
            comps.push_back(compare(runs.at(l.scenarios[0].name), runs.at(b)));
    }
    batch.add("compare" + ext(cfg.format), compare_table(comps, cfg.format));

    try {
        const auto rep = sensitivity_sweep(l.params, find_scenario(l.scenarios, sweep_scenario), 0.15, l.clock);
        batch.add("sweep_" + sweep_scenario + ext(cfg.format), sweep_table(rep, cfg.format));
        const auto flagged = rep.flagged();
        summary["tasks"]["sweep " + sweep_scenario] = flagged.empty() ? "PASS" : "FAIL: " + flagged.front();
        breach = breach || !flagged.empty();
    } catch (const std::exception& ex) {
        summary["tasks"]["sweep " + sweep_scenario] = std::string("FAIL: ") + ex.what();
        breach = true;
    }

    json extremes = json::array();
    for (const auto& e : extreme_conditions(l.params, l.clock)) {
        extremes.push_back({{"case", e.name}, {"passed", e.passed}, {"detail", e.detail}});
        summary["tasks"]["extreme " + e.name] = e.passed ? "PASS" : "FAIL: " + e.detail;
    }
    summary["extreme_conditions"] = extremes;

    if (runs.count(validate_scenario)) {
        const auto v = validate_against(cfg.reference_dir, runs.at(validate_scenario), cfg.format);
        summary["validation"] = v.report;
        summary["tasks"]["validation"] = v.skipped ? "SKIPPED" : "RAN";
        if (!v.skipped) batch.add("validation" + ext(cfg.format), v.table);
    } else {
        summary["tasks"]["validation"] = "SKIPPED";
    }

    AcceptanceOptions opts;
    opts.self_consistency_spec = spec_path;
    opts.clock = l.clock;
    if (cfg.seed) opts.seed = *cfg.seed;
    const auto results = run_acceptance(l.params, l.scenarios, opts);
    bool all_pass = true;
    json criteria = json::array();
    for (const auto& r : results) {
        all_pass = all_pass && r.passed;
        criteria.push_back({{"id", r.id}, {"title", r.title}, {"status", r.passed ? "PASS" : "FAIL"},
                            {"details", r.details}, {"seconds", r.seconds}});
    }
    summary["acceptance"] = criteria;
    summary["overall"] = all_pass ? "PASS" : "FAIL";
    batch.add("summary.json", summary.dump(2) + "\n");
    write_batch(cfg, l, "suite", started, names_of(l.scenarios), std::move(batch));

    for (const auto& [task, status] : summary["tasks"].items())
        std::cout << status.get<std::string>() << "  " << task << "\n";
    for (const auto& r : results) {
        std::cout << format_criterion(r) << "\n";
        for (const auto& d : r.details) std::cout << "        " << d << "\n";
    }
    if (!all_pass) return kAcceptanceFailed;
    return breach ? kInvariantBreach : kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Housing system dynamics model: scenario runs, sweeps, validation and calibration"};
    app.set_version_flag("--version", std::string(HOUSING_SD_VERSION));
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    Config cfg;
    double dt = 0;
    std::uint64_t seed = 0;
    double era_multiplier = 0;
    app.add_option("--params", cfg.params_path, "Parameter file (default params/default.toml when present)");
    app.add_option("--scenarios", cfg.scenarios_path, "Scenario definitions (default scenarios/runs.json when present)");
    auto* dt_opt = app.add_option("--dt", dt, "Euler step in months")->check(CLI::PositiveNumber);
    auto* seed_opt = app.add_option("--seed", seed, "Seed for calibration and randomized checks");
    auto* era_opt = app.add_option("--era-multiplier", era_multiplier, "Disbursement multiplier of accelerated runs")
                        ->check(CLI::PositiveNumber);
    app.add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
    app.add_option("--format", cfg.format, "Table format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    app.add_option("--reference", cfg.reference_dir, "Directory of reference-mode CSVs")->capture_default_str();

    std::vector<std::string> sim_names, sim_series;
    auto* sim = app.add_subcommand("simulate", "Run scenarios and write trajectories and metrics");
    sim->add_option("--scenario", sim_names, "Scenario name (repeatable, or 'all')")->required();
    sim->add_option("--series", sim_series, "Stocks and flows to emit (default: all)")->delimiter(',');

    std::string spec_path = "calibration/self_consistency.json";
    std::string sweep_scenario = "run2";
    std::string validate_scenario = "run4";
    auto* suite = app.add_subcommand("suite", "Run every scenario, comparisons, sweep, validation and acceptance");
    suite->add_option("--spec", spec_path, "Planted-parameter calibration spec")->capture_default_str();
    suite->add_option("--sweep-scenario", sweep_scenario)->capture_default_str();
    suite->add_option("--validate-scenario", validate_scenario)->capture_default_str();

    std::string baseline, variant;
    auto* cmp = app.add_subcommand("compare", "Metric deltas between two scenarios");
    cmp->add_option("--baseline", baseline)->required();
    cmp->add_option("--variant", variant)->required();

    std::string sweep_name = "run2";
    double delta = 0.15;
    auto* sweep = app.add_subcommand("sweep", "One-at-a-time +/- delta parameter sweep");
    sweep->add_option("--scenario", sweep_name)->capture_default_str();
    sweep->add_option("--delta", delta)->check(CLI::Range(0.0, 0.99))->capture_default_str();

    std::string val_name = "run4";
    auto* val = app.add_subcommand("validate", "Theil statistics against reference modes");
    val->add_option("--scenario", val_name)->capture_default_str();

    std::string cal_spec, params_out;
    int max_evals = 0;
    auto* cal = app.add_subcommand("calibrate", "Fit free parameters to targets");
    cal->add_option("--spec", cal_spec, "Calibration spec (JSON)")->required();
    cal->add_option("--params-out", params_out, "Where to write the fitted parameters (default <out>/calibrated.toml)");
    auto* evals_opt = cal->add_option("--max-evaluations", max_evals)->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);
    if (*dt_opt) cfg.dt = dt;
    if (*seed_opt) cfg.seed = seed;
    if (*era_opt) cfg.era_multiplier = era_multiplier;

    try {
        if (*sim) return cmd_simulate(cfg, sim_names, sim_series);
        if (*suite) return cmd_suite(cfg, spec_path, sweep_scenario, validate_scenario);
        if (*cmp) return cmd_compare(cfg, baseline, variant);
        if (*sweep) return cmd_sweep(cfg, sweep_name, delta);
        if (*val) return cmd_validate(cfg, val_name);
        if (*cal) return cmd_calibrate(cfg, cal_spec, params_out, *evals_opt ? std::optional<int>(max_evals) : std::nullopt);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kInputError;
    }
    return kInputError;
}
