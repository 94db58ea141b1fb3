#include "pxcald/io.hpp"

#include <cmath>

namespace pxcald {

using nlohmann::json;

namespace {

std::vector<double> number_array(const json& doc, const std::string& path) {
    if (!doc.is_array()) throw ValidationError(path, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        if (!doc[i].is_number()) throw ValidationError(path + "/" + std::to_string(i), "expected a number");
        const double v = doc[i].get<double>();
        if (!std::isfinite(v)) throw ValidationError(path + "/" + std::to_string(i), "must be finite");
        out.push_back(v);
    }
    return out;
}

const json& member(const json& doc, const char* key, const std::string& path) {
    if (!doc.is_object()) throw ValidationError(path.empty() ? "/" : path, "expected an object");
    auto it = doc.find(key);
    if (it == doc.end()) throw ValidationError(path + "/" + key, "missing field");
    return *it;
}

struct RawProfile {
    std::vector<double> breaks;
    std::vector<double> values;
};

RawProfile raw_profile(const json& doc, const std::string& path, const Interval& interval, bool exponent) {
    RawProfile raw{number_array(member(doc, "breaks", path), path + "/breaks"),
                   number_array(member(doc, "values", path), path + "/values")};
    const std::string bpath = path + "/breaks";
    const std::string vpath = path + "/values";
    if (raw.breaks.size() < 2) throw ValidationError(bpath, "need at least two breakpoints");
    if (raw.breaks.front() != interval.a()) throw ValidationError(bpath + "/0", "must equal interval start");
    if (raw.breaks.back() != interval.b()) {
        throw ValidationError(bpath + "/" + std::to_string(raw.breaks.size() - 1), "must equal interval end");
    }
    for (std::size_t i = 1; i < raw.breaks.size(); ++i) {
        if (!(raw.breaks[i] > raw.breaks[i - 1])) {
            throw ValidationError(bpath + "/" + std::to_string(i), "breakpoints must be strictly increasing");
        }
    }
    if (raw.values.size() + 1 != raw.breaks.size()) {
        throw ValidationError(vpath, "expected " + std::to_string(raw.breaks.size() - 1) + " values");
    }
    for (std::size_t i = 0; i < raw.values.size(); ++i) {
        const bool ok = exponent ? raw.values[i] > 1.0 : raw.values[i] > 0.0;
        if (!ok) throw ValidationError(vpath + "/" + std::to_string(i), exponent ? "exponent must exceed 1" : "conductivity must be positive");
    }
    return raw;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json number_list(const std::vector<double>& v) {
    json out = json::array();
    for (double x : v) out.push_back(finite_or_null(x));
    return out;
}

}  // namespace

ProfilePair profiles_from_json(const json& doc, bool require_gamma, const std::string& base_path) {
    const std::string ipath = base_path + "/interval";
    const auto iv = number_array(member(doc, "interval", base_path), ipath);
    if (iv.size() != 2) throw ValidationError(ipath, "expected [a, b]");
    if (!(iv[0] < iv[1])) throw ValidationError(ipath, "need a < b");
    const Interval interval(iv[0], iv[1]);

    auto p_raw = raw_profile(member(doc, "p", base_path), base_path + "/p", interval, true);
    ProfilePair out{interval, ExponentProfile(std::move(p_raw.breaks), std::move(p_raw.values)), std::nullopt};
    if (doc.contains("gamma")) {
        auto g_raw = raw_profile(doc["gamma"], base_path + "/gamma", interval, false);
        out.gamma.emplace(std::move(g_raw.breaks), std::move(g_raw.values));
    } else if (require_gamma) {
        throw ValidationError(base_path + "/gamma", "missing field");
    }
    return out;
}

const char* to_string(DerivativeSource mode) noexcept {
    return mode == DerivativeSource::Oracle ? "oracle" : "measured";
}

const char* to_string(ExtremalSide side) noexcept { return side == ExtremalSide::MaxQ ? "max-q" : "min-q"; }

json to_json(const MomentVector& mu) { return number_list(mu.values); }

json to_json(const ProjectedFunction& fn) {
    json levels = json::array();
    for (std::size_t l = 0; l < fn.partition.size(); ++l) {
        levels.push_back({{"level_p", fn.partition[l].p},
                          {"measure", fn.partition[l].measure},
                          {"value", finite_or_null(fn.values[l])}});
    }
    return levels;
}

json to_json(const ExtremalEstimate& est) {
    json history = json::array();
    for (const auto& s : est.history) {
        history.push_back({{"m", s.m},
                           {"unit_flux", finite_or_null(s.unit_flux)},
                           {"scaled_value", finite_or_null(s.scaled_value)},
                           {"recovered_average", finite_or_null(s.recovered_average)}});
    }
    return {{"side", to_string(est.side)},
            {"level_p", est.level_p},
            {"level_measure", est.level_measure},
            {"m_used", est.m_used},
            {"scaled_value", finite_or_null(est.scaled_value)},
            {"recovered_average", finite_or_null(est.recovered_average)},
            {"diagnostic_bound", finite_or_null(est.diagnostic_bound)},
            {"history", history}};
}

json to_json(const ReconstructionReport& rep) {
    json levels = json::array();
    for (std::size_t l = 0; l < rep.reconstructed.partition.size(); ++l) {
        const Level& lv = rep.reconstructed.partition[l];
        levels.push_back({{"level_p", lv.p},
                          {"g", lv.g},
                          {"measure", lv.measure},
                          {"f_integral", finite_or_null(rep.levels.integrals[l])},
                          {"f_average", finite_or_null(rep.levels.averages[l])},
                          {"conductivity", finite_or_null(rep.reconstructed.values[l])}});
    }
    return {{"mode", to_string(rep.mode)},
            {"order", rep.order},
            {"fixed_point", rep.fixed_point},
            {"dlambda_dm", number_list(rep.dlambda_dm)},
            {"derivative_error", number_list(rep.derivative_error)},
            {"moments", to_json(rep.mu)},
            {"levels", levels},
            {"residuals", number_list(rep.levels.residuals)},
            {"condition_estimate", finite_or_null(rep.levels.condition)},
            {"least_squares", rep.levels.least_squares},
            {"warnings", rep.levels.warnings}};
}

}  // namespace pxcald
