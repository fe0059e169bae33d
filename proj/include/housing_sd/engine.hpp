#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hsd {

/// Fixed-step simulation clock. Times are in months, t = 0 is January 2018.
struct SimClock {
    double dt = 0.25;
    double horizon = 50.0;
    double burn_in = 24.0;

    /// Throws std::invalid_argument unless dt > 0, horizon is a whole number
    /// of steps and burn_in < horizon.
    void validate() const;
    std::size_t steps() const;
    double analytical_window() const { return horizon - burn_in; }
};

/// "YYYY-MM" label of the calendar month containing simulation time t.
std::string calendar_label(double t);
/// Inverse of calendar_label for whole months ("2020-01" -> 24.0).
double months_from_label(std::string_view label);

struct LogisticCurve {
    double y_max = 2.0;
    double y_min = 1.0;
    double inflection = 1.5;
    double slope = 5.0;
};

/// y_max + (y_min - y_max) / (1 + (ratio / inflection)^slope).
/// Tends to y_min as ratio -> 0 and y_max as ratio -> infinity.
double eval_logistic(const LogisticCurve& curve, double ratio);

struct GompertzCurve {
    double y_f = 3.0;
    double y_0 = -108.2;
    double alpha = 1.4;
    double floor = 1.0;
};

/// max(floor, y_f + (y_0 - y_f) * exp(-exp(alpha) * x)), never above y_f.
double eval_gompertz(const GompertzCurve& curve, double x);

struct StepInput {
    double magnitude = 0.0;
    double start_time = 0.0;
};

double eval_step(const StepInput& input, double t);

/// First-order exponential smooth held as an auxiliary state.
struct SmoothState {
    double current = 0.0;
    double delay = 1.0;
};

SmoothState advance_smooth(SmoothState state, double input_value, double dt);

struct StockSpec {
    std::string name;
    std::string units;
    bool nonnegative = true;
};

using StockLayout = std::vector<StockSpec>;

/// Named stock levels sharing an immutable layout.
class StateVector {
public:
    StateVector() = default;
    explicit StateVector(std::shared_ptr<const StockLayout> layout);

    std::size_t size() const { return values_.size(); }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    double& at(std::string_view name);
    double at(std::string_view name) const;
    std::size_t index_of(std::string_view name) const;
    bool has(std::string_view name) const;

    const StockLayout& layout() const { return *layout_; }
    const std::shared_ptr<const StockLayout>& layout_ptr() const { return layout_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

private:
    std::shared_ptr<const StockLayout> layout_;
    std::vector<double> values_;
};

/// Raised when a stock becomes NaN or infinite.
class NonFiniteError : public std::runtime_error {
public:
    NonFiniteError(double t, std::string stock);
    double time() const { return time_; }
    const std::string& stock() const { return stock_; }

private:
    double time_;
    std::string stock_;
};

struct ClampEvent {
    double t = 0.0;
    std::string stock;
    double value = 0.0;  // pre-clamp level
};

/// stock + dt * derivative for every stock. Non-negative stocks that end up
/// below zero are clamped; clamps larger than round-off are appended to
/// `clamps` when it is supplied.
StateVector euler_step(const StateVector& state, const std::vector<double>& derivatives, double dt,
                       double t = 0.0, std::vector<ClampEvent>* clamps = nullptr);

/// Largest multiplier in [0, 1] that keeps `stock - dt * outflow` non-negative.
double drain_limit(double stock, double outflow, double dt);

using DerivativeFn = std::function<std::vector<double>(const StateVector&, double t, double dt)>;
using Observer = std::function<void(double t, const StateVector&)>;

struct Trajectory {
    std::vector<double> times;
    std::vector<StateVector> states;
    std::vector<ClampEvent> clamps;
};

/// Integrates from t = 0 to clock.horizon, storing one sample per dt
/// (steps() + 1 samples). The observer, if any, sees every sample.
Trajectory simulate(const DerivativeFn& model, const SimClock& clock, const StateVector& initial,
                    const Observer& observer = {});

}  // namespace hsd
