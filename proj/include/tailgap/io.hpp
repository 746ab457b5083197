#pragma once

// Wire formats: JSON for distribution specs, payoff term lists, score reports,
// tail classifications and simulation configs/results; CSV for conflation
// tables, forecast series and long-form simulation traces.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tailgap/conflation.hpp"
#include "tailgap/distributions.hpp"
#include "tailgap/errors.hpp"
#include "tailgap/payoffs.hpp"
#include "tailgap/scoring.hpp"
#include "tailgap/simulate.hpp"

namespace tailgap::io {

using json = nlohmann::json;

namespace detail {

inline double number_field(const json& j, const std::string& key, const std::string& context) {
    if (!j.contains(key)) throw ValidationError(context + ": missing field '" + key + "'");
    const auto& v = j.at(key);
    if (!v.is_number()) throw ValidationError(context + ": field '" + key + "' must be a number");
    return v.get<double>();
}

inline double number_or(const json& j, const std::string& key, double fallback, const std::string& context) {
    return j.contains(key) ? number_field(j, key, context) : fallback;
}

inline void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed, const std::string& context) {
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) throw ValidationError(context + ": unknown field '" + key + "'");
    }
}

}  // namespace detail

// ---------------------------------------------------------------- distributions

inline Family parse_family(std::string_view name) {
    for (auto f : {Family::Gaussian, Family::Pareto, Family::Lognormal, Family::Exponential, Family::StudentT}) {
        if (family_name(f) == name) return f;
    }
    if (name == "normal") return Family::Gaussian;
    throw ValidationError("unknown distribution family '" + std::string(name) + "'");
}

/// Builds a spec from a family and a name -> value map; absent optional
/// parameters take their defaults.
inline DistributionSpec make_distribution(Family family, const json& params) {
    if (!params.is_object()) throw ValidationError("distribution 'params' must be an object");
    const std::string ctx = "params of " + std::string(family_name(family));
    using detail::number_field;
    using detail::number_or;
    switch (family) {
        case Family::Gaussian:
            detail::reject_unknown(params, {"mean", "sigma"}, ctx);
            return Gaussian{number_or(params, "mean", 0.0, ctx), number_or(params, "sigma", 1.0, ctx)};
        case Family::Pareto:
            detail::reject_unknown(params, {"alpha", "x_min"}, ctx);
            return Pareto{number_field(params, "alpha", ctx), number_or(params, "x_min", 1.0, ctx)};
        case Family::Lognormal:
            detail::reject_unknown(params, {"x0", "sigma"}, ctx);
            return Lognormal{number_or(params, "x0", 1.0, ctx), number_field(params, "sigma", ctx)};
        case Family::Exponential:
            detail::reject_unknown(params, {"rate"}, ctx);
            return Exponential{number_or(params, "rate", 1.0, ctx)};
        case Family::StudentT:
            detail::reject_unknown(params, {"dof", "scale"}, ctx);
            return StudentT{number_field(params, "dof", ctx), number_or(params, "scale", 1.0, ctx)};
    }
    throw ValidationError("unsupported family");
}

inline json to_json(const DistributionSpec& d) {
    json params = std::visit(
        [](const auto& p) -> json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, Gaussian>) return {{"mean", p.mean}, {"sigma", p.sigma}};
            else if constexpr (std::is_same_v<T, Pareto>) return {{"alpha", p.alpha}, {"x_min", p.x_min}};
            else if constexpr (std::is_same_v<T, Lognormal>) return {{"x0", p.x0}, {"sigma", p.sigma}};
            else if constexpr (std::is_same_v<T, Exponential>) return {{"rate", p.rate}};
            else return {{"dof", p.dof}, {"scale", p.scale}};
        },
        d.params());
    return {{"family", family_name(d.family())}, {"params", params}};
}

inline DistributionSpec distribution_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("distribution spec must be a JSON object");
    detail::reject_unknown(j, {"family", "params"}, "distribution");
    if (!j.contains("family") || !j.at("family").is_string()) {
        throw ValidationError("distribution: field 'family' must be a string");
    }
    return make_distribution(parse_family(j.at("family").get<std::string>()), j.value("params", json::object()));
}

// ---------------------------------------------------------------- payoffs

inline json to_json(const Kernel& k) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Heaviside>) return {{"type", "heaviside"}, {"K", v.K}};
            else if constexpr (std::is_same_v<T, Linear>) return {{"type", "linear"}};
            else if constexpr (std::is_same_v<T, Softplus>) {
                json j{{"type", "softplus"}, {"K", v.K}};
                if (v.sharpness == infinity) j["p"] = "inf";
                else j["p"] = v.sharpness;
                return j;
            } else if constexpr (std::is_same_v<T, Square>) return {{"type", "square"}};
            else return {{"type", "constant"}, {"c", v.c}};
        },
        k);
}

inline Kernel kernel_from_json(const json& j) {
    if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
        throw ValidationError("kernel: field 'type' must be a string");
    }
    const auto type = j.at("type").get<std::string>();
    const std::string ctx = "kernel '" + type + "'";
    if (type == "heaviside") {
        detail::reject_unknown(j, {"type", "K"}, ctx);
        return Heaviside{detail::number_field(j, "K", ctx)};
    }
    if (type == "linear") {
        detail::reject_unknown(j, {"type"}, ctx);
        return Linear{};
    }
    if (type == "softplus") {
        detail::reject_unknown(j, {"type", "K", "p"}, ctx);
        double sharpness = infinity;
        if (j.contains("p")) {
            const auto& p = j.at("p");
            if (p.is_string()) {
                if (p.get<std::string>() != "inf") throw ValidationError(ctx + ": field 'p' must be a number or \"inf\"");
            } else {
                sharpness = detail::number_field(j, "p", ctx);
            }
        }
        return Softplus{detail::number_field(j, "K", ctx), sharpness};
    }
    if (type == "square") {
        detail::reject_unknown(j, {"type"}, ctx);
        return Square{};
    }
    if (type == "constant") {
        detail::reject_unknown(j, {"type", "c"}, ctx);
        return Constant{detail::number_field(j, "c", ctx)};
    }
    throw ValidationError("kernel: unknown type '" + type + "'");
}

inline json to_json(const PayoffFunction& g) {
    json terms = json::array();
    for (const auto& t : g.terms()) terms.push_back({{"w", t.weight}, {"kernel", to_json(t.kernel)}});
    return terms;
}

inline Structure structure_from_json(const json& j) {
    const std::string ctx = "structure";
    if (!j.at("structure").is_string()) throw ValidationError("structure: field 'structure' must be a string");
    const auto name = j.at("structure").get<std::string>();
    using detail::number_field;
    if (name == "call") return Call{number_field(j, "K", ctx)};
    if (name == "put") return Put{number_field(j, "K", ctx)};
    if (name == "christmas_tree") {
        return ChristmasTree{number_field(j, "K", ctx), number_field(j, "delta1", ctx), number_field(j, "delta2", ctx)};
    }
    if (name == "butterfly") {
        return Butterfly{number_field(j, "K1", ctx), number_field(j, "K2", ctx), number_field(j, "K3", ctx)};
    }
    if (name == "variance_swap_short_vol") return VarianceSwapShortVol{};
    throw ValidationError("structure: unknown structure '" + name + "'");
}

/// A payoff is either a term list [{"w": .., "kernel": {..}}, ..] or a named
/// structure {"structure": "christmas_tree", "K": .., ...}.
inline PayoffFunction payoff_from_json(const json& j) {
    if (j.is_object() && j.contains("structure")) {
        detail::reject_unknown(j, {"structure", "K", "delta1", "delta2", "K1", "K2", "K3", "sharpness"}, "structure");
        double sharpness = infinity;
        if (j.contains("sharpness") && !j.at("sharpness").is_string()) {
            sharpness = detail::number_field(j, "sharpness", "structure");
        }
        return build_structure(structure_from_json(j), sharpness);
    }
    const json& terms = j.is_object() && j.contains("terms") ? j.at("terms") : j;
    if (!terms.is_array()) throw ValidationError("payoff must be a term list or a structure object");
    PayoffFunction g;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const auto& t = terms[i];
        const std::string ctx = "payoff term " + std::to_string(i + 1);
        if (!t.is_object()) throw ValidationError(ctx + ": must be an object");
        detail::reject_unknown(t, {"w", "kernel"}, ctx);
        if (!t.contains("kernel")) throw ValidationError(ctx + ": missing field 'kernel'");
        g.add(detail::number_or(t, "w", 1.0, ctx), kernel_from_json(t.at("kernel")));
    }
    return g;
}

// ---------------------------------------------------------------- reports

inline json to_json(const ScoreReport& r) {
    json j{{"metric", metric_name(r.metric)},
           {"value", r.value},
           {"n", r.n},
           {"absorbed", r.absorbed},
           {"absorbed_at", r.absorbed_at ? json(*r.absorbed_at) : json(nullptr)}};
    if (r.skipped > 0) j["skipped"] = r.skipped;
    return j;
}

inline json to_json(const TailClassification& c) {
    json ladder = json::array();
    for (const auto& pt : c.ladder) {
        ladder.push_back({{"p", pt.p}, {"K", pt.K}, {"lambda", pt.lambda}, {"excess", pt.excess}});
    }
    return {{"class", tail_class_name(c.tail_class)},
            {"lambda", c.lambda_estimate},
            {"diverging", c.diverging},
            {"mu_excess", c.mu_excess ? json(*c.mu_excess) : json(nullptr)},
            {"ladder", ladder}};
}

inline json to_json(const ConflationReport& r) {
    return {{"p", r.p},           {"K_p", r.K_p},     {"I1", r.I1},
            {"I2", r.I2},         {"p_star", r.p_star}, {"ratio", r.ratio},
            {"diagnostic_overflow", r.diagnostic_overflow}};
}

inline json to_json(const std::vector<ConflationReport>& rows) {
    json out = json::array();
    for (const auto& r : rows) out.push_back(to_json(r));
    return out;
}

/// %.6g, the significant-digit format of the table CSV.
inline std::string format_sig6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline constexpr std::string_view conflation_csv_header = "p,K_p,I1,I2,p_star,ratio";

inline void write_csv(std::ostream& os, const std::vector<ConflationReport>& rows) {
    os << conflation_csv_header << '\n';
    for (const auto& r : rows) {
        os << format_sig6(r.p) << ',' << format_sig6(r.K_p) << ',' << format_sig6(r.I1) << ','
           << format_sig6(r.I2) << ',' << format_sig6(r.p_star) << ',' << format_sig6(r.ratio) << '\n';
    }
}

// ---------------------------------------------------------------- CSV tables

/// A numeric CSV: header names and one column vector per name.
struct CsvTable {
    std::vector<std::string> header;
    std::map<std::string, std::vector<double>> columns;
    std::size_t rows = 0;

    bool has(const std::string& name) const { return columns.count(name) > 0; }
    const std::vector<double>& column(const std::string& name) const {
        auto it = columns.find(name);
        if (it == columns.end()) throw ValidationError("csv: missing column '" + name + "'");
        return it->second;
    }
};

namespace detail {

inline std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace detail

inline CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    while (std::getline(in, line)) {
        if (!detail::trim(line).empty()) break;
    }
    t.header = detail::split(line);
    if (t.header.empty() || t.header.front().empty()) throw ValidationError("csv: missing header row");
    for (const auto& h : t.header) {
        if (t.columns.count(h)) throw ValidationError("csv: duplicate column '" + h + "'");
        t.columns[h];
    }
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split(line);
        if (cells.size() != t.header.size()) {
            throw ValidationError("csv: row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                                  " fields, expected " + std::to_string(t.header.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            char* end = nullptr;
            const double v = std::strtod(cells[c].c_str(), &end);
            if (cells[c].empty() || end != cells[c].c_str() + cells[c].size()) {
                throw ValidationError("csv: row " + std::to_string(row) + ", column '" + t.header[c] +
                                      "': not a number ('" + cells[c] + "')");
            }
            t.columns[t.header[c]].push_back(v);
        }
        ++t.rows;
    }
    return t;
}

inline int as_indicator(double v, std::size_t row, const std::string& column) {
    if (v != 0.0 && v != 1.0) {
        throw ValidationError("row " + std::to_string(row) + ", column '" + column + "': indicator must be 0 or 1");
    }
    return static_cast<int>(v);
}

/// `f,hit` rows become probability forecasts; `forecast,realized` rows point forecasts.
inline ForecastSeries series_from_csv(const CsvTable& t) {
    if (t.has("f") && t.has("hit")) {
        std::vector<ProbabilityForecast> recs;
        for (std::size_t i = 0; i < t.rows; ++i) {
            const ProbabilityForecast r{t.column("f")[i], as_indicator(t.column("hit")[i], i + 2, "hit")};
            validate_probability_record(r, i);
            recs.push_back(r);
        }
        return ForecastSeries(std::move(recs));
    }
    if (t.has("forecast") && t.has("realized")) {
        std::vector<PointForecast> recs;
        for (std::size_t i = 0; i < t.rows; ++i) recs.push_back({t.column("forecast")[i], t.column("realized")[i]});
        return ForecastSeries(std::move(recs));
    }
    throw ValidationError("csv: expected header 'f,hit' or 'forecast,realized'");
}

/// JSON array of {"f", "hit"} or {"forecast", "realized"} objects.
inline ForecastSeries series_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw ValidationError("forecast series must be a non-empty JSON array");
    if (j.front().contains("f")) {
        std::vector<ProbabilityForecast> recs;
        for (std::size_t i = 0; i < j.size(); ++i) {
            const std::string ctx = "record " + std::to_string(i + 1);
            const double hit = detail::number_field(j[i], "hit", ctx);
            const ProbabilityForecast r{detail::number_field(j[i], "f", ctx), as_indicator(hit, i + 1, "hit")};
            validate_probability_record(r, i);
            recs.push_back(r);
        }
        return ForecastSeries(std::move(recs));
    }
    std::vector<PointForecast> recs;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string ctx = "record " + std::to_string(i + 1);
        recs.push_back({detail::number_field(j[i], "forecast", ctx), detail::number_field(j[i], "realized", ctx)});
    }
    return ForecastSeries(std::move(recs));
}

// ---------------------------------------------------------------- simulation

inline SimulationConfig simulation_config_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("simulation config must be a JSON object");
    detail::reject_unknown(j,
                           {"generator", "streams", "payoffs", "payoff_ids", "horizon", "paths", "seed", "survival",
                            "center", "threads", "record_paths"},
                           "simulation config");
    SimulationConfig cfg;
    if (j.contains("generator")) cfg.generator = distribution_from_json(j.at("generator"));
    if (j.contains("streams")) {
        if (!j.at("streams").is_array()) throw ValidationError("simulation config: 'streams' must be an array");
        for (const auto& s : j.at("streams")) {
            if (!s.is_array()) throw ValidationError("simulation config: each stream must be an array of numbers");
            std::vector<double> v;
            for (const auto& x : s) {
                if (!x.is_number()) throw ValidationError("simulation config: stream values must be numbers");
                v.push_back(x.get<double>());
            }
            cfg.streams.push_back(std::move(v));
        }
    }
    if (!j.contains("payoffs") || !j.at("payoffs").is_array()) {
        throw ValidationError("simulation config: field 'payoffs' must be an array");
    }
    for (const auto& p : j.at("payoffs")) cfg.payoffs.push_back(payoff_from_json(p));
    if (j.contains("payoff_ids")) cfg.payoff_ids = j.at("payoff_ids").get<std::vector<std::string>>();
    auto count = [&](const char* key, std::size_t fallback) -> std::size_t {
        if (!j.contains(key)) return fallback;
        const auto& v = j.at(key);
        if (!v.is_number_integer() || v.get<long long>() < 0) {
            throw ValidationError(std::string("simulation config: field '") + key + "' must be a non-negative integer");
        }
        return v.get<std::size_t>();
    };
    cfg.horizon = count("horizon", 1);
    cfg.paths = count("paths", 1);
    cfg.seed = count("seed", 0);
    cfg.threads = static_cast<unsigned>(count("threads", 1));
    if (j.contains("survival")) {
        const auto& s = j.at("survival");
        detail::reject_unknown(s, {"b", "initial"}, "survival");
        SurvivalConfig sc;
        sc.b = detail::number_or(s, "b", -infinity, "survival");
        sc.initial = detail::number_or(s, "initial", 0.0, "survival");
        cfg.survival = sc;
    }
    cfg.center = j.value("center", false);
    cfg.record_paths = j.value("record_paths", false);
    return cfg;
}

inline json to_json(const SimulationResult& r) {
    json payoffs = json::array();
    for (const auto& s : r.payoffs) {
        payoffs.push_back({{"id", s.id},
                           {"mean", s.mean},
                           {"stddev", s.stddev},
                           {"min", s.min},
                           {"max", s.max},
                           {"absorption_frequency", s.absorption_frequency},
                           {"ensemble_mean", s.ensemble_mean},
                           {"ensemble_stddev", s.ensemble_stddev},
                           {"final_values", s.final_values},
                           {"per_period_mean", s.per_period_mean}});
    }
    return {{"paths", r.paths},
            {"horizon", r.horizon},
            {"payoffs", payoffs},
            {"path_mean_abs_draw", r.path_mean_abs_draw},
            {"warnings", r.warnings}};
}

/// Long-form `path,period,payoff_id,value` rows; needs record_paths.
inline void write_traces_csv(std::ostream& os, const SimulationResult& r) {
    os << "path,period,payoff_id,value\n";
    for (const auto& s : r.payoffs) {
        if (s.traces.empty()) throw ValidationError("simulation traces were not recorded (set record_paths)");
    }
    for (std::size_t path = 0; path < r.paths; ++path) {
        for (std::size_t t = 0; t < r.horizon; ++t) {
            for (const auto& s : r.payoffs) {
                os << path << ',' << t + 1 << ',' << s.id << ',' << json(s.traces[path][t]).dump() << '\n';
            }
        }
    }
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("'" + path + "': malformed JSON: " + e.what());
    }
}

}  // namespace tailgap::io
