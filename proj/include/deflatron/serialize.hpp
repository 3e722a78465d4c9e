#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "deflatron/analysis.hpp"
#include "deflatron/solvers.hpp"
#include "deflatron/subspaces.hpp"

namespace deflatron {

using nlohmann::json;

inline std::string format_number(double v, int significant = 17) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", significant, v);
    return buf;
}

/// NaN-safe numeric JSON value (NaN maps to null).
inline json json_number(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

inline json to_json(const BoundReport& r) {
    return json{{"lambda_max", r.lambda_max},
                {"lambda_min", r.lambda_min},
                {"kappa", r.kappa},
                {"mu_1", r.mu_1},
                {"mu_ell", r.mu_ell},
                {"kappa_eff", r.kappa_eff},
                {"K", r.K},
                {"gamma", r.gamma},
                {"xi", r.xi},
                {"bound", r.bound},
                {"rank_deficiency", r.rank_deficiency}};
}

inline json to_json(const SolveReport& r) {
    return json{{"iterations", r.iterations},
                {"converged", r.converged},
                {"final_residual", r.final_residual},
                {"inner_iterations_total", r.inner_iterations_total},
                {"residual_history", r.residual_history}};
}

inline json to_json(const SweepRecord& r) {
    return json{{"e1_frob", r.e1_frob},
                {"delta_measured", json_number(r.delta_measured)},
                {"delta_bound", json_number(r.delta_bound)},
                {"kappa_eff_actual", json_number(r.kappa_eff_actual)},
                {"kappa_eff_estimate", json_number(r.kappa_eff_estimate)},
                {"kappa_opt", r.kappa_opt}};
}

inline json to_json(const PerturbationSweep& s) {
    json rows = json::array();
    for (const auto& r : s.records) rows.push_back(to_json(r));
    return json{{"kappa", s.kappa}, {"kappa_opt", s.kappa_opt}, {"records", rows}};
}

inline constexpr const char* sweep_csv_header =
    "e1_frob,delta_measured,delta_bound,kappa_eff_actual,kappa_eff_estimate,kappa_opt";

inline std::string to_csv(const PerturbationSweep& s) {
    std::string out = sweep_csv_header;
    out += "\n";
    for (const auto& r : s.records) {
        out += format_number(r.e1_frob) + "," + format_number(r.delta_measured) + "," +
               format_number(r.delta_bound) + "," + format_number(r.kappa_eff_actual) + "," +
               format_number(r.kappa_eff_estimate) + "," + format_number(r.kappa_opt) + "\n";
    }
    return out;
}

inline json to_json(const AggregateSet& agg) {
    return json{{"assignments", agg.assignments}, {"count", agg.count}};
}

inline AggregateSet aggregate_set_from_json(const json& j) {
    AggregateSet agg;
    agg.assignments = j.at("assignments").get<std::vector<std::size_t>>();
    if (j.contains("count")) {
        agg.count = j.at("count").get<std::size_t>();
    } else {
        agg.count = 0;
        for (std::size_t a : agg.assignments) agg.count = std::max(agg.count, a + 1);
    }
    agg.validate();
    return agg;
}

inline json to_json(const CfSplitting& split) {
    std::vector<int> flags(split.coarse.size());
    for (std::size_t i = 0; i < flags.size(); ++i) flags[i] = split.coarse[i] ? 1 : 0;
    json out{{"coarse", flags}};
    if (split.grid_shape)
        out["grid_shape"] = {split.grid_shape->first, split.grid_shape->second};
    return out;
}

inline CfSplitting cf_splitting_from_json(const json& j) {
    CfSplitting split;
    for (int f : j.at("coarse").get<std::vector<int>>()) split.coarse.push_back(f != 0);
    if (j.contains("grid_shape")) {
        const auto shape = j.at("grid_shape").get<std::vector<std::size_t>>();
        require(shape.size() == 2, "CfSplitting: grid_shape must have two entries");
        split.grid_shape = {shape[0], shape[1]};
    }
    split.validate();
    return split;
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) numerical_error("cannot open JSON file " + path);
    json j;
    in >> j;
    return j;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) numerical_error("cannot write " + path);
    out << content;
    if (!out) numerical_error("write failed for " + path);
}

} // namespace deflatron
