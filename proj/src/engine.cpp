#include "housing_sd/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace hsd {

namespace {

constexpr int kStartYear = 2018;
constexpr double kGridTolerance = 1e-9;

}  // namespace

void SimClock::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("clock: dt must be positive");
    if (!(horizon > 0.0)) throw std::invalid_argument("clock: horizon must be positive");
    const double n = horizon / dt;
    if (std::abs(n - std::round(n)) > kGridTolerance * std::max(1.0, n))
        throw std::invalid_argument("clock: horizon must be a whole number of dt steps");
    if (!(burn_in >= 0.0 && burn_in < horizon))
        throw std::invalid_argument("clock: burn_in must lie in [0, horizon)");
}

std::size_t SimClock::steps() const { return static_cast<std::size_t>(std::llround(horizon / dt)); }

std::string calendar_label(double t) {
    const long month = static_cast<long>(std::floor(t + kGridTolerance));
    const long year = kStartYear + (month >= 0 ? month / 12 : (month - 11) / 12);
    const long m = ((month % 12) + 12) % 12 + 1;
    char buf[48];
    std::snprintf(buf, sizeof buf, "%04ld-%02ld", year, m);
    return buf;
}

double months_from_label(std::string_view label) {
    int year = 0;
    int month = 0;
    const std::string s(label);
    if (std::sscanf(s.c_str(), "%d-%d", &year, &month) != 2 || month < 1 || month > 12)
        throw std::invalid_argument("bad calendar month '" + s + "', expected YYYY-MM");
    return static_cast<double>((year - kStartYear) * 12 + (month - 1));
}

double eval_logistic(const LogisticCurve& curve, double ratio) {
    if (!(ratio > 0.0)) return curve.y_min;
    if (std::isinf(ratio)) return curve.y_max;
    const double r = std::pow(ratio / curve.inflection, curve.slope);
    const double y = curve.y_max + (curve.y_min - curve.y_max) / (1.0 + r);
    return std::clamp(y, curve.y_min, curve.y_max);
}

double eval_gompertz(const GompertzCurve& curve, double x) {
    if (std::isnan(x)) return curve.floor;
    const double raw = curve.y_f + (curve.y_0 - curve.y_f) * std::exp(-std::exp(curve.alpha) * std::max(x, 0.0));
    return std::clamp(raw, curve.floor, curve.y_f);
}

double eval_step(const StepInput& input, double t) {
    return t + kGridTolerance < input.start_time ? 0.0 : input.magnitude;
}

SmoothState advance_smooth(SmoothState state, double input_value, double dt) {
    state.current += dt * (input_value - state.current) / state.delay;
    return state;
}

StateVector::StateVector(std::shared_ptr<const StockLayout> layout)
    : layout_(std::move(layout)), values_(layout_->size(), 0.0) {}

std::size_t StateVector::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < layout_->size(); ++i)
        if ((*layout_)[i].name == name) return i;
    throw std::out_of_range("unknown stock '" + std::string(name) + "'");
}

bool StateVector::has(std::string_view name) const {
    return std::any_of(layout_->begin(), layout_->end(), [&](const StockSpec& s) { return s.name == name; });
}

double& StateVector::at(std::string_view name) { return values_[index_of(name)]; }
double StateVector::at(std::string_view name) const { return values_[index_of(name)]; }

NonFiniteError::NonFiniteError(double t, std::string stock)
    : std::runtime_error("non-finite value in stock '" + stock + "' at t=" + std::to_string(t)),
      time_(t),
      stock_(std::move(stock)) {}

StateVector euler_step(const StateVector& state, const std::vector<double>& derivatives, double dt, double t,
                       std::vector<ClampEvent>* clamps) {
    if (derivatives.size() != state.size())
        throw std::invalid_argument("euler_step: derivative count does not match stock count");
    StateVector next = state;
    const auto& layout = state.layout();
    for (std::size_t i = 0; i < state.size(); ++i) {
        double v = state[i] + dt * derivatives[i];
        if (layout[i].nonnegative && v < 0.0) {
            // Anything beyond round-off means a flow was not drain-limited.
            if (clamps && v < -1e-9 * std::max(1.0, std::abs(state[i])))
                clamps->push_back({t, layout[i].name, v});
            v = 0.0;
        }
        next[i] = v;
    }
    return next;
}

double drain_limit(double stock, double outflow, double dt) {
    if (!(outflow > 0.0)) return 1.0;
    const double cap = std::max(stock, 0.0) / dt;
    return outflow <= cap ? 1.0 : cap / outflow;
}

Trajectory simulate(const DerivativeFn& model, const SimClock& clock, const StateVector& initial,
                    const Observer& observer) {
    clock.validate();
    const std::size_t n = clock.steps();
    Trajectory out;
    out.times.reserve(n + 1);
    out.states.reserve(n + 1);

    StateVector state = initial;
    for (std::size_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * clock.dt;
        for (std::size_t i = 0; i < state.size(); ++i)
            if (!std::isfinite(state[i])) throw NonFiniteError(t, state.layout()[i].name);
        out.times.push_back(t);
        out.states.push_back(state);
        if (observer) observer(t, state);
        if (k == n) break;
        const auto d = model(state, t, clock.dt);
        for (std::size_t i = 0; i < d.size(); ++i)
            if (!std::isfinite(d[i])) throw NonFiniteError(t, state.layout()[i].name);
        state = euler_step(state, d, clock.dt, t, &out.clamps);
    }
    return out;
}

}  // namespace hsd
