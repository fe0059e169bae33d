#include "housing_sd/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

#include "json.hpp"

#include "housing_sd/text_format.hpp"

namespace hsd {

namespace {

constexpr double kPenalty = 1e12;

CalibrationTarget::Mode parse_mode(const std::string& s) {
    if (s == "equal") return CalibrationTarget::Mode::Equal;
    if (s == "at_least") return CalibrationTarget::Mode::AtLeast;
    if (s == "at_most") return CalibrationTarget::Mode::AtMost;
    throw std::invalid_argument("unknown target mode '" + s + "'");
}

}  // namespace

std::string CalibrationTarget::describe() const {
    std::string d = kind == "theil" ? "theil_u(" + scenario + ", " + series + ")" : metric + "(" + scenario + ")";
    if (kind != "theil" && transform != "value") d = transform + " " + d + " vs " + relative_to;
    const char* op = mode == Mode::Equal ? " = " : mode == Mode::AtLeast ? " >= " : " <= ";
    return d + op + text::format_number(target);
}

CalibrationSpec parse_calibration_spec(const std::string& json_text) {
    const auto doc = nlohmann::json::parse(json_text);
    CalibrationSpec spec;
    if (doc.contains("free")) {
        for (const auto& f : doc.at("free")) {
            FreeParameter fp{f.at("name").get<std::string>(), 0, 0};
            if (param_info(fp.name).kind != ParamKind::Real)
                throw std::invalid_argument(fp.name + ": switches cannot be calibrated");
            const auto [lo, hi] = param_bounds(fp.name);
            fp.lower = f.value("lower", lo);
            fp.upper = f.value("upper", hi);
            if (!(fp.lower < fp.upper) || !std::isfinite(fp.lower) || !std::isfinite(fp.upper))
                throw std::invalid_argument(fp.name + ": calibration bounds must be finite with lower < upper");
            if (fp.lower < lo || fp.upper > hi) throw std::invalid_argument(fp.name + ": bounds exceed valid range");
            spec.free.push_back(fp);
        }
    }
    for (const auto& t : doc.value("targets", nlohmann::json::array())) {
        CalibrationTarget ct;
        ct.kind = t.value("kind", "metric");
        ct.scenario = t.at("scenario").get<std::string>();
        ct.target = doc.contains("planted") ? t.value("target", 0.0) : t.at("target").get<double>();
        ct.scale = t.value("scale", 0.0);
        ct.weight = t.value("weight", 1.0);
        ct.mode = parse_mode(t.value("mode", "equal"));
        if (ct.kind == "metric") {
            ct.metric = t.at("metric").get<std::string>();
            MetricSet{}.get(ct.metric);  // rejects unknown metrics
            ct.transform = t.value("transform", "value");
            ct.relative_to = t.value("relative_to", "");
            if (ct.transform != "value" && ct.transform != "pct_change" && ct.transform != "difference")
                throw std::invalid_argument("unknown transform '" + ct.transform + "'");
            if (ct.transform != "value" && ct.relative_to.empty())
                throw std::invalid_argument(ct.describe() + ": transform needs relative_to");
        } else if (ct.kind == "theil") {
            ct.series = t.at("series").get<std::string>();
            ct.mode = CalibrationTarget::Mode::AtMost;
        } else {
            throw std::invalid_argument("unknown target kind '" + ct.kind + "'");
        }
        if (!(ct.weight >= 0.0)) throw std::invalid_argument(ct.describe() + ": weight must be >= 0");
        spec.targets.push_back(std::move(ct));
    }
    spec.equilibrate = doc.value("equilibrate", true);
    spec.max_evaluations = doc.value("max_evaluations", spec.max_evaluations);
    spec.restarts = doc.value("restarts", spec.restarts);
    spec.initial_samples = doc.value("initial_samples", spec.initial_samples);
    spec.seed = doc.value("seed", spec.seed);
    spec.tolerance = doc.value("tolerance", spec.tolerance);
    spec.reference_dir = doc.value("reference_dir", "");
    if (doc.contains("planted")) {
        for (const auto& [name, value] : doc.at("planted").items()) {
            param_info(name);
            spec.planted.emplace_back(name, value.get<double>());
        }
    }
    if (spec.max_evaluations < 1) throw std::invalid_argument("max_evaluations must be >= 1");
    if (spec.restarts < 0) throw std::invalid_argument("restarts must be >= 0");
    if (spec.initial_samples < 0) throw std::invalid_argument("initial_samples must be >= 0");
    return spec;
}

CalibrationSpec load_calibration_spec(const std::string& path) {
    try {
        return parse_calibration_spec(text::read_file(path));
    } catch (const std::exception& ex) {
        throw std::runtime_error(path + ": " + ex.what());
    }
}

std::vector<TargetReport> evaluate_targets(const CalibrationSpec& spec, const ModelParams& params,
                                           const std::vector<Scenario>& scenarios, const SimClock& clock,
                                           const std::vector<ReferenceMode>& references, double* loss) {
    const auto defaults = default_scenarios();
    std::map<std::string, RunResult> runs;
    auto run_of = [&](const std::string& name) -> const RunResult& {
        auto it = runs.find(name);
        if (it != runs.end()) return it->second;
        const Scenario* sc = nullptr;
        for (const auto& s : scenarios)
            if (s.name == name) sc = &s;
        if (!sc) sc = &find_scenario(defaults, name);
        return runs.emplace(name, run_scenario(*sc, params, clock)).first->second;
    };

    std::vector<TargetReport> out;
    double total = 0.0;
    for (const auto& t : spec.targets) {
        TargetReport r{t.describe(), 0, t.target, 0};
        if (t.kind == "theil") {
            const ReferenceMode* mode = nullptr;
            for (const auto& m : references)
                if (m.series == t.series) mode = &m;
            if (!mode) throw std::invalid_argument("no reference data for series '" + t.series + "'");
            r.value = fit_reference(run_of(t.scenario), *mode).theil.U;
        } else {
            const double v = run_of(t.scenario).metrics.get(t.metric);
            if (t.transform == "value") {
                r.value = v;
            } else {
                const double b = run_of(t.relative_to).metrics.get(t.metric);
                r.value = t.transform == "difference" ? v - b : pct_change(b, v);
            }
        }
        const double scale = t.scale > 0 ? t.scale : (t.target != 0 ? std::abs(t.target) : 1.0);
        double res = (r.value - t.target) / scale;
        if (t.mode == CalibrationTarget::Mode::AtLeast) res = std::min(0.0, res);
        if (t.mode == CalibrationTarget::Mode::AtMost) res = std::max(0.0, res);
        r.loss = std::isfinite(res) ? t.weight * res * res : kPenalty;
        total += r.loss;
        out.push_back(r);
    }
    if (loss) *loss = total;
    return out;
}

namespace {

// Minimises f over the unit cube. Points are clamped to the cube on every move.
struct NelderMead {
    std::function<double(const std::vector<double>&)> f;
    int budget = 0;
    int used = 0;
    double tol = 1e-10;

    struct Exhausted {};

    double eval(std::vector<double>& x) {
        if (used >= budget) throw Exhausted{};
        for (auto& v : x) v = std::clamp(v, 0.0, 1.0);
        ++used;
        return f(x);
    }

    // Returns true if the simplex collapsed before the budget ran out.
    bool run(std::vector<double>& best, double& fbest, const std::vector<double>& steps) {
        const std::size_t n = best.size();
        std::vector<std::vector<double>> simplex(n + 1, best);
        std::vector<double> fx(n + 1, std::numeric_limits<double>::infinity());
        fx[0] = fbest;
        bool converged = false;
        try {
            for (std::size_t i = 0; i < n; ++i) {
                auto x = simplex[i + 1];
                x[i] += best[i] + steps[i] <= 1.0 ? steps[i] : -steps[i];
                fx[i + 1] = eval(x);
                simplex[i + 1] = x;
            }
            converged = iterate(simplex, fx);
        } catch (const Exhausted&) {
        }
        const auto it = std::min_element(fx.begin(), fx.end());
        const auto k = static_cast<std::size_t>(it - fx.begin());
        if (fx[k] < fbest) {
            fbest = fx[k];
            best = simplex[k];
        }
        return converged;
    }

    bool iterate(std::vector<std::vector<double>>& simplex, std::vector<double>& fx) {
        const std::size_t n = simplex.size() - 1;
        bool converged = false;
        while (used < budget) {
            std::vector<std::size_t> order(n + 1);
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](auto a, auto b) { return fx[a] < fx[b]; });
            std::vector<std::vector<double>> s2;
            std::vector<double> f2;
            for (auto i : order) {
                s2.push_back(simplex[i]);
                f2.push_back(fx[i]);
            }
            simplex.swap(s2);
            fx.swap(f2);

            double size = 0.0;
            for (std::size_t i = 1; i <= n; ++i)
                for (std::size_t j = 0; j < n; ++j) size = std::max(size, std::abs(simplex[i][j] - simplex[0][j]));
            if (std::abs(fx[n] - fx[0]) <= tol * (1.0 + std::abs(fx[0])) && size < 1e-6) {
                converged = true;
                break;
            }
            if (size < 1e-9) {
                converged = true;
                break;
            }

            std::vector<double> centroid(n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / static_cast<double>(n);
            auto along = [&](double coef) {
                std::vector<double> x(n);
                for (std::size_t j = 0; j < n; ++j) x[j] = centroid[j] + coef * (simplex[n][j] - centroid[j]);
                return x;
            };
            auto xr = along(-1.0);
            const double fr = eval(xr);
            if (fr < fx[0]) {
                auto xe = along(-2.0);
                const double fe = eval(xe);
                if (fe < fr) {
                    simplex[n] = xe;
                    fx[n] = fe;
                } else {
                    simplex[n] = xr;
                    fx[n] = fr;
                }
            } else if (fr < fx[n - 1]) {
                simplex[n] = xr;
                fx[n] = fr;
            } else {
                auto xc = fr < fx[n] ? along(-0.5) : along(0.5);
                const double fc = eval(xc);
                if (fc < std::min(fr, fx[n])) {
                    simplex[n] = xc;
                    fx[n] = fc;
                } else {
                    for (std::size_t i = 1; i <= n; ++i) {
                        auto x = simplex[i];
                        for (std::size_t j = 0; j < n; ++j) x[j] = simplex[0][j] + 0.5 * (x[j] - simplex[0][j]);
                        fx[i] = eval(x);
                        simplex[i] = x;
                    }
                }
            }
        }
        return converged;
    }
};

}  // namespace

CalibrationSpec resolve_planted(CalibrationSpec spec, const ModelParams& start, const std::vector<Scenario>& scenarios,
                                const SimClock& clock) {
    if (spec.planted.empty()) return spec;
    ModelParams p = start;
    for (const auto& [name, value] : spec.planted) set_param(p, name, value);
    if (spec.equilibrate) p = housing::equilibrate(p);
    const auto values = evaluate_targets(spec, p, scenarios, clock, load_reference_dir(spec.reference_dir));
    for (std::size_t i = 0; i < values.size(); ++i) spec.targets[i].target = values[i].value;
    spec.planted.clear();
    return spec;
}

CalibrationResult calibrate(const CalibrationSpec& input, const ModelParams& start,
                            const std::vector<Scenario>& scenarios, const SimClock& clock) {
    const auto spec = resolve_planted(input, start, scenarios, clock);
    const auto references = load_reference_dir(spec.reference_dir);
    CalibrationResult res;
    res.params = start;

    auto build = [&](const std::vector<double>& u) {
        ModelParams p = start;
        for (std::size_t i = 0; i < spec.free.size(); ++i) {
            const auto& fp = spec.free[i];
            set_param(p, fp.name, fp.lower + u[i] * (fp.upper - fp.lower));
        }
        if (spec.equilibrate && !spec.free.empty()) p = housing::equilibrate(p);
        return p;
    };
    auto loss_of = [&](const std::vector<double>& u) {
        try {
            double loss = 0.0;
            evaluate_targets(spec, build(u), scenarios, clock, references, &loss);
            return std::isfinite(loss) ? loss : kPenalty;
        } catch (const std::exception&) {
            return kPenalty;
        }
    };

    std::vector<double> x0;
    for (const auto& fp : spec.free) {
        const double v = get_param(start, fp.name);
        x0.push_back(std::clamp((v - fp.lower) / (fp.upper - fp.lower), 0.0, 1.0));
    }
    res.initial_loss = loss_of(x0);
    res.evaluations = 1;

    if (spec.free.empty()) {
        res.final_loss = res.initial_loss;
        res.converged = true;
    } else {
        std::vector<double> best = x0;
        double fbest = res.initial_loss;
        std::mt19937_64 rng(spec.seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        int used = 1;

        // Global phase: uniform samples over the box, keep the best.
        for (int k = 0; k < spec.initial_samples && used < spec.max_evaluations; ++k, ++used) {
            std::vector<double> x(best.size());
            for (auto& v : x) v = unit(rng);
            const double fx = loss_of(x);
            if (fx < fbest) {
                fbest = fx;
                best = x;
            }
        }

        // Local phase: simplex rounds share what is left of the budget.
        std::vector<double> steps(best.size(), 0.1);
        const int rounds = spec.restarts + 1;
        for (int round = 0; round < rounds && used < spec.max_evaluations; ++round) {
            const int share = (spec.max_evaluations - used) / (rounds - round);
            NelderMead nm{loss_of, std::max(share, 1), 0, spec.tolerance};
            res.converged = nm.run(best, fbest, steps);
            used += nm.used;
            for (auto& s : steps) s = 0.05 + 0.2 * unit(rng);
        }
        res.evaluations = used;
        if (!res.converged) res.warnings.push_back("evaluation budget exhausted before the simplex converged");
        res.final_loss = fbest;
        res.params = build(best);
        for (const auto& fp : spec.free) res.params.provenance[fp.name] = "calibrated";
    }

    try {
        res.report = evaluate_targets(spec, res.params, scenarios, clock, references);
    } catch (const std::exception& ex) {
        res.warnings.push_back(std::string("best point could not be evaluated: ") + ex.what());
    }
    if (res.final_loss >= kPenalty) res.warnings.push_back("no feasible parameter set found");
    for (const auto& r : res.report) {
        if (r.loss > 0.01) res.warnings.push_back("target missed: " + r.description + " (got " +
                                                  text::format_number(r.value) + ")");
    }
    return res;
}

}  // namespace hsd
