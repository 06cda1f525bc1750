// Command-line front end: solve / check / simulate / dominance over a model
// file, emitting machine-readable JSON and CSV reports.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "levydiv/io.hpp"
#include "levydiv/levydiv.hpp"

namespace fs = std::filesystem;
using namespace levydiv;

namespace {

struct GridSpec {
    double lo = 0.0;
    double hi = 0.0;
    int n = 0;
    bool automatic = true;
};

GridSpec parse_grid(const std::string& s) {
    GridSpec g;
    if (s == "auto") return g;
    std::istringstream is(s);
    char c1 = 0, c2 = 0;
    if (!(is >> g.lo >> c1 >> g.hi >> c2 >> g.n) || c1 != ':' || c2 != ':' || g.n < 3 || g.lo < 0.0 ||
        g.hi <= g.lo)
        throw CLI::ValidationError("--grid", "expected MIN:MAX:N with 0 <= MIN < MAX and N >= 3");
    g.automatic = false;
    return g;
}

ModelSpec load_checked_model(const std::string& path) {
    ModelSpec m = load_model(path);
    LundbergReport lr = lundberg_check(m);
    if (!lr.ok()) {
        std::ostringstream os;
        os << "model '" << path << "' fails the standing assumptions:";
        if (!lr.drift_positive)
            os << " mean drift Psi'(0+) = " << lr.mean_drift << " must be positive (process must drift to +inf);";
        if (!lr.limit_divergence) os << " exponent does not diverge at theta_sup;";
        throw std::runtime_error(os.str());
    }
    return m;
}

int cmd_solve(const std::string& model_path, const std::string& out_dir, const GridSpec& grid_in) {
    ModelSpec m = load_checked_model(model_path);
    ScaleFunction sf = ScaleFunction::solve(m);
    OptimalBarrier ob = find_bstar(sf);
    BarrierValueFunction v(sf, ob.b_star);

    GridSpec grid = grid_in;
    if (grid.automatic) {
        grid.lo = 0.0;
        grid.hi = 3.0 * ob.b_star + 5.0;
        grid.n = 201;
    }
    auto xs = make_grid(grid.lo, grid.hi, grid.n);

    write_file((fs::path(out_dir) / "solve.json").string(), solve_to_json(sf, ob).dump(2) + "\n");
    write_file((fs::path(out_dir) / "scale.csv").string(), scale_table_csv(sf, xs));
    write_file((fs::path(out_dir) / "value.csv").string(), value_table_csv(v, xs));
    std::cout << "rho = " << format_double(sf.expansion().rho) << ", " << sf.expansion().roots.size()
              << " roots, b* = " << format_double(ob.b_star)
              << ", V(b*) = " << format_double(value_at(v, ob.b_star)) << "\n";
    return 0;
}

int cmd_check(const std::string& model_path, const std::string& out_dir, const GridSpec& grid_in, double tol) {
    ModelSpec m = load_checked_model(model_path);
    ScaleFunction sf = ScaleFunction::solve(m);
    OptimalBarrier ob = find_bstar(sf);
    BarrierValueFunction v(sf, ob.b_star);
    GeneratorQuadrature q(m);

    GridSpec grid = grid_in;
    if (grid.automatic) {
        grid.lo = 0.01;
        grid.hi = 3.0 * ob.b_star + 5.0;
        grid.n = 200;
    }
    auto xs = make_grid(grid.lo, grid.hi, grid.n);

    DiagnosticsReport rep;

    // Defining equation of the scale function, relative to delta*h.
    {
        GeneratorFn g = GeneratorFn::from_scale(sf);
        CheckResult c{"scale_equation", "", 0.0, tol, true, {}};
        for (double x : xs) {
            double r = (apply_generator(q, g, x) - m.discount() * sf.value(x, 0)) /
                       (m.discount() * sf.value(x, 0));
            c.residuals.push_back(r);
            c.max_residual = std::max(c.max_residual, std::abs(r));
        }
        std::ostringstream os;
        os << xs.size() << " points on [" << xs.front() << ", " << xs.back() << "]";
        c.grid = os.str();
        c.pass = c.max_residual <= tol;
        rep.add(std::move(c));
    }

    for (auto& c : check_hjb(q, v, xs, tol).checks) rep.add(std::move(c));

    // Shape diagnostics on a moderate window.
    auto zs = make_grid(0.0, ob.b_star + 5.0, 301);
    {
        std::vector<double> psi_vals;
        for (double z : zs) psi_vals.push_back(ruin_probability_tilted(sf.expansion(), z));
        rep.add(check_convexity(zs, psi_vals, ShapeCheck::Decreasing));
        auto c = check_convexity(zs, psi_vals, ShapeCheck::Convex);
        c.name = "ruin_probability_convex";
        rep.add(std::move(c));

        std::vector<std::vector<double>> rows(5);
        for (int k = 0; k <= 4; ++k)
            for (double z : zs) rows[k].push_back(ruin_probability_tilted_deriv(sf.expansion(), z, k));
        rep.add(check_sign_alternation(zs, rows));
    }
    {
        std::vector<double> hp;
        for (double z : zs) hp.push_back(sf.value(z, 1));
        auto c = check_convexity(zs, hp, ShapeCheck::Convex);
        c.name = "scale_derivative_convex";
        rep.add(std::move(c));

        auto ws = make_grid(ob.b_star + 1e-3, ob.b_star + 8.0, 301);
        std::vector<double> hv, hpv;
        for (double w : ws) {
            hv.push_back(sf.value(w, 0));
            hpv.push_back(sf.value(w, 1));
        }
        auto ch = check_convexity(ws, hv, ShapeCheck::Convex);
        ch.name = "scale_convex_above_b_star";
        rep.add(std::move(ch));
        auto chp = check_convexity(ws, hpv, ShapeCheck::Convex);
        chp.name = "scale_derivative_convex_above_b_star";
        rep.add(std::move(chp));
    }
    if (m.negative_jumps().active())
        rep.add(check_logconvexity(*m.negative_jumps().density, make_grid(1e-3, 10.0, 200)));

    write_file((fs::path(out_dir) / "check.json").string(), report_to_json(rep).dump(2) + "\n");
    for (const auto& c : rep.checks)
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << "  max residual " << c.max_residual
                  << " (tol " << c.tolerance << ")\n";
    return rep.all_pass() ? 0 : 1;
}

Strategy make_strategy(const ModelSpec& m, const std::optional<double>& barrier,
                       const std::optional<std::pair<double, double>>& threshold, bool no_dividends) {
    if (no_dividends) return NoDividendsStrategy{};
    if (threshold) return ThresholdStrategy{threshold->first, threshold->second};
    if (barrier) return BarrierStrategy{*barrier};
    ScaleFunction sf = ScaleFunction::solve(m);
    return BarrierStrategy{find_bstar(sf).b_star};
}

int cmd_simulate(const std::string& model_path, const std::string& out_dir, double x0, long paths,
                 double horizon, std::uint64_t seed, const std::optional<double>& barrier,
                 const std::optional<std::pair<double, double>>& threshold, bool no_dividends,
                 bool dump_paths, bool ruin) {
    ModelSpec m = load_checked_model(model_path);
    SimConfig cfg;
    cfg.n_paths = paths;
    cfg.seed = seed;

    if (ruin) {
        cfg.horizon = horizon > 0.0 ? horizon : 400.0;
        SimulationEstimate est = simulate_ruin_probability(m, x0, cfg);
        write_file((fs::path(out_dir) / "simulate.json").string(), estimate_to_json(est).dump(2) + "\n");
        std::cout << "ruin frequency " << format_double(est.mean) << " +- " << format_double(est.std_error)
                  << " (bias bound " << format_double(est.bias_bound) << ")\n";
        return 0;
    }

    Strategy strat = make_strategy(m, barrier, threshold, no_dividends);
    cfg.horizon = horizon > 0.0 ? horizon : suggest_horizon(m, strat, x0, 1e-4 * std::max(1.0, x0));
    std::vector<PathRecord> recs;
    SimulationEstimate est = simulate_value(m, strat, x0, cfg, dump_paths ? &recs : nullptr);
    ordered_json j = estimate_to_json(est);
    j["strategy"] = strategy_label(strat);
    j["x0"] = x0;
    write_file((fs::path(out_dir) / "simulate.json").string(), j.dump(2) + "\n");
    if (dump_paths) write_file((fs::path(out_dir) / "paths.csv").string(), paths_csv(recs));
    std::cout << strategy_label(strat) << " from x0 = " << format_double(x0) << ": "
              << format_double(est.mean) << " +- " << format_double(est.std_error) << "\n";
    return 0;
}

int cmd_dominance(const std::string& model_path, const std::string& out_dir, double x0, long paths,
                  double horizon, std::uint64_t seed, const std::vector<double>& rival_barriers,
                  const std::vector<std::string>& rival_thresholds) {
    ModelSpec m = load_checked_model(model_path);
    ScaleFunction sf = ScaleFunction::solve(m);
    double b_star = find_bstar(sf).b_star;
    Strategy base = BarrierStrategy{b_star};

    std::vector<Strategy> rivals;
    if (rival_barriers.empty() && rival_thresholds.empty()) {
        for (double d : {-1.0, -0.5, 0.5, 1.0}) rivals.push_back(BarrierStrategy{std::max(0.0, b_star + d)});
        rivals.push_back(ThresholdStrategy{b_star, 0.5 * m.drift()});
    } else {
        for (double b : rival_barriers) rivals.push_back(BarrierStrategy{b});
        for (const auto& t : rival_thresholds) {
            std::istringstream is(t);
            double level = 0.0, rate = 0.0;
            char c = 0;
            if (!(is >> level >> c >> rate) || c != ':')
                throw std::runtime_error("--rival-threshold expects LEVEL:RATE, got '" + t + "'");
            rivals.push_back(ThresholdStrategy{level, rate});
        }
    }

    SimConfig cfg;
    cfg.n_paths = paths;
    cfg.seed = seed;
    cfg.horizon = horizon > 0.0 ? horizon : suggest_horizon(m, base, x0, 1e-4 * std::max(1.0, x0));
    DominanceResult res = dominance_experiment(m, base, rivals, x0, cfg);
    write_file((fs::path(out_dir) / "dominance.json").string(), dominance_to_json(res).dump(2) + "\n");
    std::cout << res.base_label << ": " << format_double(res.base_mean) << " +- "
              << format_double(res.base_std_error) << "\n";
    for (const auto& r : res.rivals)
        std::cout << (r.exceeds_base ? "[FAIL] " : "[ ok ] ") << r.label << "  diff "
                  << format_double(r.diff) << " +- " << format_double(r.diff_std_error) << "\n";
    return res.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal dividend barriers for two-sided jump-diffusion risk models"};
    app.require_subcommand(1);

    std::string model_path;
    const char* env_out = std::getenv("LEVYDIV_OUT_DIR");
    std::string out_dir = env_out ? env_out : ".";
    std::string grid_str = "auto";
    double tol = 1e-6;
    double x0 = 0.0;
    long paths = 100000;
    double horizon = 0.0;  // 0 = choose from the truncation-bias bound
    std::uint64_t seed = 1;
    std::optional<double> barrier;
    std::optional<std::pair<double, double>> threshold;
    double threshold_level = 0.0, threshold_rate = 0.0;
    bool no_dividends = false, dump_paths = false, ruin = false;
    std::vector<double> rival_barriers;
    std::vector<std::string> rival_thresholds;

    app.add_option("--model", model_path, "model file (JSON)")->required();
    app.add_option("--out", out_dir, "output directory (env LEVYDIV_OUT_DIR)");

    auto* solve = app.add_subcommand("solve", "scale function, expansion and optimal barrier");
    solve->add_option("--grid", grid_str, "table grid MIN:MAX:N (default auto)");

    auto* check = app.add_subcommand("check", "generator, optimality and shape diagnostics");
    check->add_option("--grid", grid_str, "diagnostic grid MIN:MAX:N (default auto)");
    check->add_option("--tol", tol, "relative tolerance for generator residuals");

    auto* sim = app.add_subcommand("simulate", "Monte Carlo dividend value (or ruin frequency)");
    sim->add_option("--x0", x0, "initial capital")->required();
    sim->add_option("--paths", paths, "number of paths");
    sim->add_option("--horizon", horizon, "time horizon (default from bias bound)");
    sim->add_option("--seed", seed, "master seed");
    auto* bopt = sim->add_option("--barrier", barrier, "barrier strategy at this level");
    auto* topt = sim->add_option("--threshold", threshold_level, "threshold strategy level");
    auto* ropt = sim->add_option("--rate", threshold_rate, "threshold payout rate");
    sim->add_flag("--no-dividends", no_dividends, "simulate the uncontrolled surplus");
    sim->add_flag("--ruin", ruin, "estimate the ruin probability instead of dividends");
    sim->add_flag("--dump-paths", dump_paths, "write per-path records to paths.csv");
    topt->needs(ropt);
    bopt->excludes(topt);

    auto* dom = app.add_subcommand("dominance", "compare the optimal barrier against rival strategies");
    dom->add_option("--x0", x0, "initial capital")->required();
    dom->add_option("--paths", paths, "number of common-random-number paths");
    dom->add_option("--horizon", horizon, "time horizon (default from bias bound)");
    dom->add_option("--seed", seed, "master seed");
    dom->add_option("--rival-barrier", rival_barriers, "rival barrier level (repeatable)");
    dom->add_option("--rival-threshold", rival_thresholds, "rival threshold LEVEL:RATE (repeatable)");

    CLI11_PARSE(app, argc, argv);

    try {
        fs::create_directories(out_dir);
        GridSpec grid = parse_grid(grid_str);
        if (solve->parsed()) return cmd_solve(model_path, out_dir, grid);
        if (check->parsed()) return cmd_check(model_path, out_dir, grid, tol);
        if (sim->parsed()) {
            if (topt->count() > 0) threshold = std::make_pair(threshold_level, threshold_rate);
            return cmd_simulate(model_path, out_dir, x0, paths, horizon, seed, barrier, threshold,
                                no_dividends, dump_paths, ruin);
        }
        if (dom->parsed())
            return cmd_dominance(model_path, out_dir, x0, paths, horizon, seed, rival_barriers,
                                 rival_thresholds);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
