#include "housing_sd/params.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "housing_sd/text_format.hpp"

namespace hsd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Entry {
    ParamInfo info;
    double lower;
    double upper;
    double* (*real)(ModelParams&);
    bool* (*flag)(ModelParams&);
};

#define HSD_REAL(name, units, sweep, lo, hi, member) \
    Entry { {name, units, ParamKind::Real, sweep}, lo, hi, [](ModelParams& p) { return &p.member; }, nullptr }
#define HSD_FLAG(name, member) \
    Entry { {name, "switch", ParamKind::Flag, false}, 0.0, 1.0, nullptr, [](ModelParams& p) { return &p.member; } }

const std::vector<Entry>& entries() {
    static const std::vector<Entry> table = {
        HSD_REAL("avg_monthly_rent", "dollars/unit/month", true, 0.0, kInf, avg_monthly_rent),
        HSD_REAL("avg_household_income", "dollars/household/month", true, 0.0, kInf, avg_household_income),
        HSD_REAL("rent_burden_threshold", "dimensionless", true, 0.0, 1.0, rent_burden_threshold),
        HSD_REAL("at_rent_base", "months", true, 0.0, kInf, at_rent_base),
        HSD_REAL("landlord_tolerance", "dollars/unit", true, 0.0, kInf, landlord_tolerance),
        HSD_REAL("avg_monthly_mortgage", "dollars/unit/month", true, 0.0, kInf, avg_monthly_mortgage),
        HSD_REAL("at_mortgage_base", "months", true, 0.0, kInf, at_mortgage_base),
        HSD_REAL("eviction_proc_proportion", "dimensionless", true, 0.0, 1.0, eviction_proc_proportion),
        HSD_REAL("at_process", "months", true, 0.0, kInf, at_process),
        HSD_REAL("filing_resolution_time", "months", true, 0.0, kInf, filing_resolution_time),
        HSD_REAL("baseline_turnover_fraction", "1/month", true, 0.0, 1.0, baseline_turnover_fraction),
        HSD_REAL("baseline_filing_fraction", "1/month", true, 0.0, 1.0, baseline_filing_fraction),
        HSD_REAL("foreclosure_fraction_occupied", "1/month", true, 0.0, 1.0, foreclosure_fraction_occupied),
        HSD_REAL("foreclosure_fraction_unoccupied", "1/month", true, 0.0, 1.0, foreclosure_fraction_unoccupied),
        HSD_REAL("foreclosure_sale_time", "months", true, 0.0, kInf, foreclosure_sale_time),
        HSD_REAL("move_in_time", "months", true, 0.0, kInf, move_in_time),
        HSD_REAL("stock_decline_fraction", "1/month", true, 0.0, 1.0, stock_decline_fraction),
        HSD_REAL("crowding_reference", "households/unit", true, 0.0, kInf, crowding_reference),
        HSD_REAL("homeless_entry_fraction", "dimensionless", true, 0.0, 1.0, homeless_entry_fraction),
        HSD_REAL("doubled_up_homeless_fraction", "1/month", true, 0.0, 1.0, doubled_up_homeless_fraction),
        HSD_REAL("rate_new_insecurity", "households/month", true, 0.0, kInf, rate_new_insecurity),
        HSD_REAL("rate_new_homelessness", "households/month", true, 0.0, kInf, rate_new_homelessness),
        HSD_REAL("fr_stabilize_insecure", "1/month", true, 0.0, 1.0, fr_stabilize_insecure),
        HSD_REAL("fr_stabilize_homeless", "1/month", true, 0.0, 1.0, fr_stabilize_homeless),
        HSD_REAL("fr_exit_homeless", "1/month", true, 0.0, 1.0, fr_exit_homeless),
        HSD_REAL("fr_double_up_homeless", "1/month", true, 0.0, 1.0, fr_double_up_homeless),

        HSD_REAL("initial.units_occupied", "rental units", true, 0.0, kInf, initial.units_occupied),
        HSD_REAL("initial.units_pending", "rental units", true, 0.0, kInf, initial.units_pending),
        HSD_REAL("initial.units_unoccupied", "rental units", true, 0.0, kInf, initial.units_unoccupied),
        HSD_REAL("initial.units_foreclosed", "rental units", true, 0.0, kInf, initial.units_foreclosed),
        HSD_REAL("initial.households_insecure", "households", true, 0.0, kInf, initial.households_insecure),
        HSD_REAL("initial.households_homeless", "households", true, 0.0, kInf, initial.households_homeless),
        HSD_REAL("initial.rent_due", "dollars", true, 0.0, kInf, initial.rent_due),
        HSD_REAL("initial.mortgage_due", "dollars", true, 0.0, kInf, initial.mortgage_due),

        HSD_FLAG("covid.on", covid.on),
        HSD_REAL("covid.magnitude", "dimensionless", true, 0.0, 1.0, covid.magnitude),
        HSD_REAL("covid.start_time", "months", false, 0.0, kInf, covid.start_time),
        HSD_REAL("covid.recovery_delay", "months", true, 0.0, kInf, covid.recovery_delay),

        HSD_FLAG("moratorium.on", moratorium.on),
        HSD_REAL("moratorium.effect_size", "dimensionless", true, 0.0, 1.0, moratorium.effect_size),
        HSD_REAL("moratorium.start_time", "months", false, 0.0, kInf, moratorium.start_time),
        HSD_REAL("moratorium.duration", "months", true, 0.0, kInf, moratorium.duration),
        HSD_REAL("moratorium.filing_reduction", "dimensionless", true, 0.0, 1.0, moratorium.filing_reduction),
        HSD_REAL("moratorium.filing_recovery_delay", "months", true, 0.0, kInf, moratorium.filing_recovery_delay),
        HSD_REAL("moratorium.filing_lead", "months", false, 0.0, kInf, moratorium.filing_lead),
        HSD_REAL("moratorium.filing_resume_lag", "months", false, 0.0, kInf, moratorium.filing_resume_lag),

        HSD_FLAG("era.on", era.on),
        HSD_REAL("era.total_funds", "dollars", true, 0.0, kInf, era.total_funds),
        HSD_REAL("era.start_time", "months", false, 0.0, kInf, era.start_time),
        HSD_REAL("era.disbursement_time", "months", true, 0.0, kInf, era.disbursement_time),
        HSD_REAL("era.rate_multiplier", "dimensionless", false, 0.0, kInf, era.rate_multiplier),

        HSD_REAL("stress_curve.y_f", "dimensionless", true, 0.0, kInf, stress_curve.y_f),
        HSD_REAL("stress_curve.y_0", "dimensionless", true, -kInf, kInf, stress_curve.y_0),
        HSD_REAL("stress_curve.alpha", "dimensionless", true, -kInf, kInf, stress_curve.alpha),
        HSD_REAL("stress_curve.floor", "dimensionless", false, 0.0, kInf, stress_curve.floor),
        HSD_REAL("rent_delay_curve.y_f", "dimensionless", true, 0.0, kInf, rent_delay_curve.y_f),
        HSD_REAL("rent_delay_curve.y_0", "dimensionless", true, -kInf, kInf, rent_delay_curve.y_0),
        HSD_REAL("rent_delay_curve.alpha", "dimensionless", true, -kInf, kInf, rent_delay_curve.alpha),
        HSD_REAL("rent_delay_curve.floor", "dimensionless", false, 0.0, kInf, rent_delay_curve.floor),
        HSD_REAL("mortgage_delay_curve.y_max", "dimensionless", true, 0.0, kInf, mortgage_delay_curve.y_max),
        HSD_REAL("mortgage_delay_curve.y_min", "dimensionless", false, 0.0, kInf, mortgage_delay_curve.y_min),
        HSD_REAL("mortgage_delay_curve.inflection", "dimensionless", true, 0.0, kInf, mortgage_delay_curve.inflection),
        HSD_REAL("mortgage_delay_curve.slope", "dimensionless", true, 0.0, kInf, mortgage_delay_curve.slope),
        HSD_REAL("crowding_curve.y_max", "dimensionless", true, 0.0, kInf, crowding_curve.y_max),
        HSD_REAL("crowding_curve.y_min", "dimensionless", false, 0.0, kInf, crowding_curve.y_min),
        HSD_REAL("crowding_curve.inflection", "dimensionless", true, 0.0, kInf, crowding_curve.inflection),
        HSD_REAL("crowding_curve.slope", "dimensionless", true, 0.0, kInf, crowding_curve.slope),
    };
    return table;
}

#undef HSD_REAL
#undef HSD_FLAG

const Entry& find_entry(std::string_view name) {
    for (const auto& e : entries())
        if (e.info.name == name) return e;
    throw std::out_of_range("unknown parameter '" + std::string(name) + "'");
}

// Parameters that divide somewhere in the model.
constexpr std::string_view kStrictlyPositive[] = {
    "at_rent_base",          "at_mortgage_base",        "at_process",
    "filing_resolution_time", "foreclosure_sale_time",  "move_in_time",
    "crowding_reference",    "covid.recovery_delay",    "moratorium.filing_recovery_delay",
    "era.disbursement_time", "rent_burden_threshold",   "mortgage_delay_curve.inflection",
    "mortgage_delay_curve.slope", "crowding_curve.inflection", "crowding_curve.slope",
};

std::string format_value(double v) {
    std::string s = text::format_number(v);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

}  // namespace

const std::vector<ParamInfo>& param_registry() {
    static const std::vector<ParamInfo> infos = [] {
        std::vector<ParamInfo> v;
        for (const auto& e : entries()) v.push_back(e.info);
        return v;
    }();
    return infos;
}

const ParamInfo& param_info(std::string_view name) { return find_entry(name).info; }

std::pair<double, double> param_bounds(std::string_view name) {
    const auto& e = find_entry(name);
    return {e.lower, e.upper};
}

double get_param(const ModelParams& p, std::string_view name) {
    const auto& e = find_entry(name);
    auto& mp = const_cast<ModelParams&>(p);
    if (e.info.kind == ParamKind::Flag) return *e.flag(mp) ? 1.0 : 0.0;
    return *e.real(mp);
}

void set_param(ModelParams& p, std::string_view name, double value) {
    const auto& e = find_entry(name);
    if (e.info.kind == ParamKind::Flag)
        *e.flag(p) = value != 0.0;
    else
        *e.real(p) = value;
}

std::string provenance_of(const ModelParams& p, std::string_view name) {
    auto it = p.provenance.find(name);
    return it == p.provenance.end() ? std::string("assumption") : it->second;
}

void ModelParams::validate() const {
    for (const auto& e : entries()) {
        if (e.info.kind == ParamKind::Flag) continue;
        const double v = get_param(*this, e.info.name);
        if (!std::isfinite(v)) throw std::invalid_argument("parameter " + std::string(e.info.name) + " is not finite");
        if (v < e.lower || v > e.upper)
            throw std::invalid_argument("parameter " + std::string(e.info.name) + " = " + format_value(v) +
                                        " outside [" + format_value(e.lower) + ", " + format_value(e.upper) + "]");
    }
    for (auto name : kStrictlyPositive)
        if (!(get_param(*this, name) > 0.0))
            throw std::invalid_argument("parameter " + std::string(name) + " must be > 0");
    if (!(rent_burden_threshold < 1.0)) throw std::invalid_argument("rent_burden_threshold must be < 1");
    if (mortgage_delay_curve.y_max < mortgage_delay_curve.y_min)
        throw std::invalid_argument("mortgage_delay_curve: y_max < y_min");
    if (crowding_curve.y_max < crowding_curve.y_min) throw std::invalid_argument("crowding_curve: y_max < y_min");
    if (!(stress_curve.y_f > stress_curve.floor)) throw std::invalid_argument("stress_curve: y_f must exceed floor");
    if (!(rent_delay_curve.y_f > rent_delay_curve.floor))
        throw std::invalid_argument("rent_delay_curve: y_f must exceed floor");
    for (const auto& [name, tag] : provenance) {
        if (tag != "paper" && tag != "cited-source" && tag != "assumption" && tag != "calibrated")
            throw std::invalid_argument("parameter " + name + ": unknown provenance tag '" + tag + "'");
    }
}

ModelParams read_params(std::istream& in) {
    const auto doc = text::parse_toml(in);
    ModelParams p;
    std::vector<std::string> seen;
    for (const auto& [key, value] : doc) {
        const auto& e = find_entry(key);
        if (e.info.kind == ParamKind::Flag) {
            if (!value.is_bool) throw std::invalid_argument("parameter " + key + " must be true or false");
            *e.flag(p) = value.boolean;
        } else {
            if (value.is_bool) throw std::invalid_argument("parameter " + key + " must be numeric");
            *e.real(p) = value.number;
        }
        if (!value.source.empty()) p.provenance[key] = value.source;
        if (!value.units.empty() && value.units != e.info.units)
            throw std::invalid_argument("parameter " + key + ": units '" + value.units + "' do not match '" +
                                        std::string(e.info.units) + "'");
        seen.push_back(key);
    }
    for (const auto& e : entries()) {
        if (std::find(seen.begin(), seen.end(), e.info.name) == seen.end())
            throw std::invalid_argument("parameter file is missing '" + std::string(e.info.name) + "'");
    }
    p.validate();
    return p;
}

ModelParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open parameter file " + path);
    try {
        return read_params(in);
    } catch (const std::exception& ex) {
        throw std::runtime_error(path + ": " + ex.what());
    }
}

void write_params(std::ostream& out, const ModelParams& p) {
    out << "# Housing market model parameters.\n"
        << "# source: paper | cited-source | assumption | calibrated\n";
    std::string section;
    for (const auto& e : entries()) {
        const std::string name(e.info.name);
        const auto dot = name.find('.');
        const std::string sec = dot == std::string::npos ? "" : name.substr(0, dot);
        const std::string key = dot == std::string::npos ? name : name.substr(dot + 1);
        if (sec != section) {
            out << "\n[" << sec << "]\n";
            section = sec;
        }
        const double v = get_param(p, name);
        const std::string val = e.info.kind == ParamKind::Flag ? (v != 0.0 ? "true" : "false") : format_value(v);
        out << key << " = { value = " << val << ", units = \"" << e.info.units << "\", source = \""
            << provenance_of(p, name) << "\" }\n";
    }
}

std::string params_to_string(const ModelParams& p) {
    std::ostringstream os;
    write_params(os, p);
    return os.str();
}

}  // namespace hsd
