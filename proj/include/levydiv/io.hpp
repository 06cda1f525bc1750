#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "levydiv/barrier.hpp"
#include "levydiv/generator.hpp"
#include "levydiv/model.hpp"
#include "levydiv/scale.hpp"
#include "levydiv/simulate.hpp"

namespace levydiv {

using ordered_json = nlohmann::ordered_json;

/// Shortest round-trip decimal representation, the same one the JSON writer
/// uses; keeps golden files portable.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Model files
// ---------------------------------------------------------------------------

namespace detail_io {

inline JumpSide parse_jump_side(const ordered_json& j, const std::string& key) {
    if (!j.contains(key)) return JumpSide::none();
    const auto& side = j.at(key);
    double lambda = side.value("lambda", 0.0);
    if (lambda == 0.0) return JumpSide::none();
    if (!side.contains("weights") || !side.contains("rates"))
        throw std::runtime_error("model file: '" + key + "' needs 'weights' and 'rates' when lambda > 0");
    std::vector<double> w = side.at("weights").get<std::vector<double>>();
    std::vector<double> rates = side.at("rates").get<std::vector<double>>();
    double sum = 0.0;
    for (double x : w) sum += x;
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::runtime_error("model file: '" + key + "' weights sum to " + format_double(sum) +
                                 ", expected 1 within 1e-9");
    for (auto& x : w) x /= sum;
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) s += w[i];
    if (!w.empty()) w.back() = 1.0 - s;
    return JumpSide(lambda, MixedExponentialDensity(std::move(w), std::move(rates)));
}

}  // namespace detail_io

/// Parse a model document: flat keys `drift`, `sigma`, `discount` plus
/// `neg_jumps` / `pos_jumps` objects `{lambda, weights[], rates[]}`.
/// `drift` is the total linear drift (premium rate); the small-jump
/// compensator is already absorbed into it.
inline ModelSpec model_from_json(const ordered_json& j) {
    for (const char* key : {"drift", "sigma", "discount"})
        if (!j.contains(key)) throw std::runtime_error(std::string("model file: missing key '") + key + "'");
    try {
        return ModelSpec(j.at("drift").get<double>(), j.at("sigma").get<double>(),
                         detail_io::parse_jump_side(j, "neg_jumps"), detail_io::parse_jump_side(j, "pos_jumps"),
                         j.at("discount").get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("model file: ") + e.what());
    }
}

inline ModelSpec load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("model file '" + path + "': " + e.what());
    }
    return model_from_json(j);
}

inline ordered_json model_to_json(const ModelSpec& m) {
    ordered_json j;
    j["drift"] = m.drift();
    j["sigma"] = m.sigma();
    j["discount"] = m.discount();
    auto side = [](const JumpSide& s) {
        ordered_json o;
        o["lambda"] = s.intensity;
        if (s.active()) {
            o["weights"] = s.density->weights();
            o["rates"] = s.density->rates();
        }
        return o;
    };
    j["neg_jumps"] = side(m.negative_jumps());
    j["pos_jumps"] = side(m.positive_jumps());
    return j;
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

inline ordered_json expansion_to_json(const TiltedRuinExpansion& ex) {
    ordered_json j;
    j["rho"] = ex.rho;
    j["roots"] = ex.roots;
    j["coeffs"] = ex.coeffs;
    j["sum_coeffs"] = ex.coeff_sum();
    return j;
}

inline ordered_json solve_to_json(const ScaleFunction& sf, const OptimalBarrier& ob) {
    ordered_json j = expansion_to_json(sf.expansion());
    j["b_star"] = ob.b_star;
    j["hprime_min"] = ob.hprime_min;
    j["search_grid"] = ob.search_grid;
    BarrierValueFunction v(sf, ob.b_star);
    j["value_at_b_star"] = value_at(v, ob.b_star);
    return j;
}

inline ordered_json report_to_json(const DiagnosticsReport& rep) {
    ordered_json j;
    j["pass"] = rep.all_pass();
    ordered_json checks = ordered_json::array();
    for (const auto& c : rep.checks) {
        ordered_json o;
        o["name"] = c.name;
        o["grid"] = c.grid;
        o["max_residual"] = c.max_residual;
        o["tolerance"] = c.tolerance;
        o["pass"] = c.pass;
        o["residuals"] = c.residuals;
        checks.push_back(std::move(o));
    }
    j["checks"] = std::move(checks);
    return j;
}

inline ordered_json estimate_to_json(const SimulationEstimate& e) {
    ordered_json j;
    j["mean"] = e.mean;
    j["std_error"] = e.std_error;
    j["n_paths"] = e.n_paths;
    j["horizon"] = e.horizon;
    j["seed"] = e.seed;
    j["bias_bound"] = e.bias_bound;
    return j;
}

inline ordered_json dominance_to_json(const DominanceResult& d) {
    ordered_json j;
    j["base"] = d.base_label;
    j["base_mean"] = d.base_mean;
    j["base_std_error"] = d.base_std_error;
    j["n_paths"] = d.n_paths;
    j["horizon"] = d.horizon;
    j["seed"] = d.seed;
    j["pass"] = d.pass();
    ordered_json rows = ordered_json::array();
    for (const auto& r : d.rivals) {
        ordered_json o;
        o["strategy"] = r.label;
        o["mean"] = r.mean;
        o["std_error"] = r.std_error;
        o["diff_vs_base"] = r.diff;
        o["diff_std_error"] = r.diff_std_error;
        o["exceeds_base"] = r.exceeds_base;
        rows.push_back(std::move(o));
    }
    j["rivals"] = std::move(rows);
    return j;
}

inline std::string scale_table_csv(const ScaleFunction& sf, const std::vector<double>& grid) {
    std::ostringstream os;
    os << "x,h,h_prime,h_second\n";
    for (double x : grid)
        os << format_double(x) << ',' << format_double(sf.value(x, 0)) << ',' << format_double(sf.value(x, 1))
           << ',' << format_double(sf.value(x, 2)) << '\n';
    return os.str();
}

inline std::string value_table_csv(const BarrierValueFunction& v, const std::vector<double>& grid) {
    std::ostringstream os;
    os << "x,value,value_prime\n";
    for (double x : grid)
        os << format_double(x) << ',' << format_double(value_at(v, x)) << ','
           << format_double(value_gradient(v, x)) << '\n';
    return os.str();
}

inline std::string paths_csv(const std::vector<PathRecord>& recs) {
    std::ostringstream os;
    os << "path,discounted_dividends,ruined,ruin_time\n";
    for (std::size_t i = 0; i < recs.size(); ++i) {
        os << i << ',' << format_double(recs[i].discounted_dividends) << ','
           << (recs[i].terminal == PathRecord::End::Ruined ? 1 : 0) << ',';
        if (recs[i].ruin_time) os << format_double(*recs[i].ruin_time);
        os << '\n';
    }
    return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

}  // namespace levydiv
