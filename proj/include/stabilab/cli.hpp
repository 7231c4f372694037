#pragma once

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "control.hpp"
#include "duality.hpp"
#include "errors.hpp"
#include "estimates.hpp"
#include "lattice.hpp"
#include "regimes.hpp"
#include "report.hpp"
#include "symbols.hpp"
#include "thickset.hpp"
#include "util.hpp"

namespace stabilab {

namespace cli {

struct Common {
    std::string config_path;
    std::string symbol_config;
    std::string out_dir = ".";
    std::vector<std::string> overrides;
    std::uint64_t seed = 1;
    bool plot = false;
};

inline RunConfig load_config(const Common& c) {
    RunConfig cfg;
    if (!c.config_path.empty()) cfg = RunConfig::from_file(c.config_path);
    if (!c.symbol_config.empty()) {
        RunConfig extra = RunConfig::from_file(c.symbol_config);
        for (auto& e : extra.entries) cfg.entries.push_back(std::move(e));
    }
    for (const auto& ov : c.overrides) {
        const std::size_t eq = ov.find('=');
        if (eq == std::string::npos)
            throw PreconditionError("--set expects key=value, got '" + ov + "'");
        cfg.set(trim(ov.substr(0, eq)), trim(ov.substr(eq + 1)));
    }
    return cfg;
}

inline std::string out_path(const Common& c, const std::string& name) {
    std::filesystem::create_directories(c.out_dir);
    return (std::filesystem::path(c.out_dir) / name).string();
}

inline void stamp_config(CsvReport& rep, const RunConfig& cfg) {
    for (const auto& [k, v] : cfg.entries) rep.set(k, v);
}

inline std::vector<double> lambda_list(const std::vector<double>& flag, const RunConfig& cfg,
                                       const std::string& key) {
    if (!flag.empty()) return flag;
    std::vector<double> out;
    for (const auto& raw : cfg.get_all(key)) out.push_back(parse_double(raw, key));
    return out;
}

// ---- subcommand bodies ----

inline int cmd_symbol_check(const Common& com) {
    const RunConfig cfg = load_config(com);
    const GridSpec grid = grid_from_config(cfg);
    const FractionalSymbol sym = fractional_from_config(cfg, "symbol", grid);
    const double threshold = dissipation_lambda_threshold(sym);

    CsvReport rep;
    stamp_config(rep, cfg);
    rep.columns = {"quantity", "value"};
    rep.add_row_strings({"power", format_double(sym.power())});
    rep.add_row_strings({"degree_cap", std::to_string(perturbation_degree_cap(sym.s, sym.base.degree))});
    rep.add_row_strings({"cert_c", format_double(sym.cert.c)});
    rep.add_row_strings({"cert_omega", format_double(sym.cert.omega)});
    rep.add_row_strings({"cert_xi_max", format_double(sym.cert.xi_max)});
    rep.add_row_strings({"nu", format_double(sym.nu)});
    rep.add_row_strings({"lambda_threshold", format_double(threshold)});
    rep.add_row_strings({"grid_nyquist", format_double(grid.nyquist())});
    rep.write(out_path(com, "symbol_check.csv"));

    std::cout << "symbol order " << format_double(sym.power()) << ", nu " << format_double(sym.nu)
              << ", dissipation threshold " << format_double(threshold) << ", grid Nyquist "
              << format_double(grid.nyquist()) << "\n";
    if (threshold > grid.nyquist())
        std::cout << "warning: threshold exceeds Nyquist, no admissible lambda on this grid\n";
    return 0;
}

inline int cmd_uncertainty(const Common& com, const std::vector<double>& lambda_flag) {
    const RunConfig cfg = load_config(com);
    const GridSpec grid = grid_from_config(cfg);
    ThickSet set = set_from_config(cfg, grid);
    const auto lambdas = lambda_list(lambda_flag, cfg, "sweep.lambda");
    if (lambdas.empty()) throw PreconditionError("no lambda values given (--lambda or sweep.lambda)");
    const int trials = cfg.get_int_or("uncertainty.trials", 64);

    CsvReport rep;
    stamp_config(rep, cfg);
    rep.set("set.rho_used", set.rho);
    rep.columns = {"lambda", "c1_hat", "majorant"};

    std::vector<UncertaintyEstimate> ests;
    for (double lam : lambdas) ests.push_back(estimate_uncertainty(set, lam, grid.p, trials, com.seed));

    bool all_finite = true;
    for (const auto& e : ests) all_finite = all_finite && !std::isinf(e.c1_hat);
    std::optional<UncertaintyFit> fit;
    if (lambdas.size() >= 2 && all_finite) {
        fit = fit_uncertainty_growth(set, lambdas, grid.p, trials, com.seed);
        rep.set("fit.d0", fit->d0);
        rep.set("fit.d1", fit->d1);
    }
    for (const auto& e : ests) {
        const double maj = fit ? fit->d0 * std::exp(fit->d1 * e.lambda) : kInf;
        rep.add_row({e.lambda, e.c1_hat, maj});
    }
    rep.write(out_path(com, "uncertainty.csv"));

    if (com.plot && all_finite) {
        SvgPlot plot;
        plot.title = "uncertainty constant sweep";
        plot.x_label = "lambda";
        plot.y_label = "c1";
        plot.log_y = true;
        plot.x = lambdas;
        std::vector<double> ys, ms;
        for (const auto& e : ests) ys.push_back(e.c1_hat);
        if (fit)
            for (double lam : lambdas) ms.push_back(fit->d0 * std::exp(fit->d1 * lam));
        plot.add_series("measured", ys);
        if (fit) plot.add_series("majorant", ms);
        plot.write(out_path(com, "uncertainty.svg"));
    }
    for (const auto& e : ests)
        std::cout << "lambda " << format_double(e.lambda) << "  c1 " << format_double(e.c1_hat)
                  << "  (" << e.method << ")\n";
    if (fit)
        std::cout << "majorant c1(lambda) <= " << format_double(fit->d0) << " * exp("
                  << format_double(fit->d1) << " * lambda)\n";
    return 0;
}

inline int cmd_dissipation(const Common& com, const std::vector<double>& lambda_flag) {
    const RunConfig cfg = load_config(com);
    const GridSpec grid = grid_from_config(cfg);
    const FractionalSymbol sym = fractional_from_config(cfg, "symbol", grid);
    const auto lambdas = lambda_list(lambda_flag, cfg, "sweep.lambda");
    if (lambdas.empty()) throw PreconditionError("no lambda values given (--lambda or sweep.lambda)");
    const double t_min = cfg.get_double_or("time.min", 0.01);
    const double t_max = cfg.get_double_or("time.max", 1.0);
    const int t_count = cfg.get_int_or("time.count", 16);
    const auto ts = linspace(t_min, t_max, t_count);

    CsvReport rep;
    stamp_config(rep, cfg);
    rep.columns = {"lambda", "t", "measured", "envelope", "K", "rate"};
    std::vector<DissipationEstimate> ests;
    for (double lam : lambdas) {
        auto est = verify_dissipation(sym, grid, lam, ts, grid.p);
        for (const auto& smp : est.samples)
            rep.add_row({lam, smp.t, smp.measured, est.K * std::exp(-est.rate * smp.t), est.K,
                         est.rate});
        ests.push_back(std::move(est));
    }
    rep.set("lambda_threshold", ests.front().lambda_threshold);
    rep.write(out_path(com, "dissipation.csv"));

    if (com.plot) {
        SvgPlot plot;
        plot.title = "high-band decay";
        plot.x_label = "t";
        plot.y_label = "norm";
        plot.log_y = true;
        plot.x = ts;
        for (const auto& est : ests) {
            std::vector<double> ys, env;
            for (const auto& smp : est.samples) {
                ys.push_back(std::max(smp.measured, 1e-300));
                env.push_back(est.K * std::exp(-est.rate * smp.t));
            }
            plot.add_series("measured l=" + format_double(est.lambda), ys);
            plot.add_series("envelope l=" + format_double(est.lambda), env);
        }
        plot.write(out_path(com, "dissipation.svg"));
    }
    for (const auto& est : ests)
        std::cout << "lambda " << format_double(est.lambda) << "  K " << format_double(est.K)
                  << "  rate " << format_double(est.rate) << "\n";
    return 0;
}

inline int cmd_observability(const Common& com, const std::vector<double>& lambda_flag,
                             double period, int nt_flag) {
    const RunConfig cfg = load_config(com);
    const GridSpec grid = grid_from_config(cfg);
    const FractionalSymbol sym = fractional_from_config(cfg, "symbol", grid);
    ThickSet set = set_from_config(cfg, grid);
    const auto lambdas = lambda_list(lambda_flag, cfg, "obs.lambda");
    if (lambdas.empty()) throw PreconditionError("no lambda given (--lambda or obs.lambda)");
    const double lambda = lambdas.front();
    const double T = period > 0.0 ? period : cfg.get_double_or("obs.T", 1.0);
    const double delta = cfg.get_double_or("obs.delta", 0.5);
    const double r = cfg.get_double_or("obs.r", 2.0);
    const int trials = cfg.get_int_or("obs.trials", 100);
    const int n_t = nt_flag > 0 ? nt_flag : cfg.get_int_or("obs.nt", 33);
    const int unc_trials = cfg.get_int_or("uncertainty.trials", 64);

    const ChainConstants ch = chain_constants(sym, set, lambda, T, delta, r, grid.p, unc_trials, com.seed);
    const ObservabilityReport orep = verify_weak_observability(
        sym, set, T, r, ch.obs.C_obs, ch.obs.alpha, trials, n_t, grid.p, com.seed);

    CsvReport rep;
    stamp_config(rep, cfg);
    rep.columns = {"lambda", "T",     "delta",     "r",     "c1_hat",    "K",
                   "rate",   "M",     "omega",     "C_obs", "alpha",     "max_ratio",
                   "trials", "violations"};
    rep.add_row({lambda, T, delta, r, ch.uncertainty.c1_hat, ch.dissipation.K,
                 ch.dissipation.rate, ch.growth.M, ch.growth.omega, ch.obs.C_obs, ch.obs.alpha,
                 orep.empirical_max_ratio, static_cast<double>(orep.trials),
                 static_cast<double>(orep.violations)});
    rep.write(out_path(com, "observability.csv"));

    std::cout << "C_obs " << format_double(ch.obs.C_obs) << "  alpha " << format_double(ch.obs.alpha)
              << "  max empirical ratio " << format_double(orep.empirical_max_ratio) << "  violations "
              << orep.violations << "/" << orep.trials << "\n";
    return 0;
}

inline int cmd_regimes(const Common& com, double period, const std::vector<double>& lambda_flag) {
    const RunConfig cfg = load_config(com);
    std::optional<double> T_hint, lambda_hint;
    if (period > 0.0) T_hint = period;
    if (!lambda_flag.empty()) lambda_hint = lambda_flag.front();
    if (cfg.has("hint.T")) T_hint = cfg.get_double("hint.T");
    if (cfg.has("hint.lambda")) lambda_hint = cfg.get_double("hint.lambda");

    RegimeDecision dec;
    const std::string mode = cfg.get_or("mode", "params");
    if (mode == "schedule") {
        const GridSpec grid = grid_from_config(cfg);
        const FractionalSymbol sym = fractional_from_config(cfg, "symbol", grid);
        dec = fractional_schedule(sym, cfg.get_double("schedule.d0"), cfg.get_double("schedule.d1"),
                                  cfg.get_double("schedule.K"), cfg.get_double_or("schedule.M", 1.0),
                                  cfg.get_double_or("schedule.omega", 0.0),
                                  cfg.get_double_or("schedule.norm_C", 1.0),
                                  cfg.get_double_or("schedule.delta", 0.5), T_hint, lambda_hint);
    } else if (mode == "params") {
        RegimeParams p;
        p.d0 = cfg.get_double_or("regime.d0", 1.0);
        p.d1 = cfg.get_double_or("regime.d1", 1.0);
        p.d2 = cfg.get_double_or("regime.d2", 1.0);
        p.d3 = cfg.get_double_or("regime.d3", 1.0);
        p.gamma1 = cfg.get_double_or("regime.gamma1", 1.0);
        p.gamma2 = cfg.get_double_or("regime.gamma2", 1.0);
        p.gamma3 = cfg.get_double_or("regime.gamma3", 1.0);
        p.M = cfg.get_double_or("regime.M", 1.0);
        p.omega = cfg.get_double_or("regime.omega", 0.0);
        p.norm_C = cfg.get_double_or("regime.norm_C", 1.0);
        p.delta = cfg.get_double_or("regime.delta", 0.5);
        dec = select_regime(p, T_hint, lambda_hint);
    } else {
        throw PreconditionError("mode must be 'params' or 'schedule', got '" + mode + "'");
    }

    CsvReport rep;
    stamp_config(rep, cfg);
    rep.set("justification", dec.justification);
    rep.columns = {"case", "lambda", "T", "alpha"};
    rep.add_row_strings({regime_case_name(dec.case_id),
                         dec.lambda ? format_double(*dec.lambda) : "nan",
                         dec.T ? format_double(*dec.T) : "nan", format_double(dec.alpha)});
    rep.write(out_path(com, "regimes.csv"));

    std::cout << "case " << regime_case_name(dec.case_id);
    if (dec.lambda) std::cout << "  lambda " << format_double(*dec.lambda);
    if (dec.T) std::cout << "  T " << format_double(*dec.T);
    std::cout << "  alpha " << format_double(dec.alpha) << "\n" << dec.justification << "\n";
    return dec.case_id == RegimeCase::Infeasible ? 3 : 0;
}

inline StateVector initial_state_from_config(const RunConfig& cfg, const GridSpec& grid,
                                             std::uint64_t seed) {
    const std::string kind = cfg.get_or("x0.kind", "gaussian");
    StateVector x = zero_state(grid);
    if (kind == "gaussian") {
        const double sigma = cfg.get_double_or("x0.sigma", grid.ell / 16.0);
        for (long j = 0; j < grid.total(); ++j) {
            const auto pt = grid_point(j, grid);
            double q = 0.0;
            for (int a = 0; a < grid.d; ++a) {
                const double dx = pt[a] - grid.ell / 2.0;
                q += dx * dx;
            }
            x.v[j] = std::exp(-q / (2.0 * sigma * sigma));
        }
    } else if (kind == "random") {
        Rng rng(seed, 4000);
        x = random_normal_state(grid, rng);
    } else if (kind == "file") {
        x = load_state(cfg.get("x0.path"));
        if (!same_geometry(x.grid, grid))
            throw PreconditionError("x0 file geometry does not match the configured grid");
    } else {
        throw PreconditionError("x0.kind must be gaussian, random, or file, got '" + kind + "'");
    }
    const double nx = lp_norm(x, grid.p);
    if (nx > 0.0)
        for (cd& z : x.v) z /= nx;
    return x;
}

inline int cmd_stabilize(const Common& com, double period, double alpha_flag, int periods_flag,
                         int nt_flag) {
    const RunConfig cfg = load_config(com);
    const GridSpec grid = grid_from_config(cfg);
    const FractionalSymbol sym = fractional_from_config(cfg, "symbol", grid);
    ThickSet set = set_from_config(cfg, grid);
    const double T = period > 0.0 ? period : cfg.get_double("control.T");
    const double alpha = alpha_flag >= 0.0 ? alpha_flag : cfg.get_double_or("control.alpha", 0.5);
    const int K = periods_flag > 0 ? periods_flag : cfg.get_int_or("control.periods", 8);
    const int n_t = nt_flag > 0 ? nt_flag : cfg.get_int_or("control.nt", 17);
    const double r = cfg.get_double_or("control.r", 2.0);
    std::optional<double> cost_bound;
    if (cfg.has("control.cost_bound")) cost_bound = cfg.get_double("control.cost_bound");

    const ControlProblem pb = make_control_problem(sym, set, T, n_t, alpha, r, grid.p, cost_bound);
    const StateVector x0 = initial_state_from_config(cfg, grid, com.seed);
    const StabilizeResult res = stabilize(pb, x0, K);
    const Trajectory& tr = res.trajectory;
    const double cost = total_cost(res, r, grid.p);

    CsvReport rep;
    stamp_config(rep, cfg);
    rep.set("alpha_achieved", tr.alpha_achieved);
    rep.set("C_achieved", tr.C_achieved);
    rep.set("M_S", tr.M_S);
    rep.set("M_cert", tr.M_cert);
    rep.set("omega_cert", tr.omega_cert);
    rep.set("total_cost", cost);
    rep.columns = {"time", "norm"};
    for (std::size_t i = 0; i < tr.times.size(); ++i) rep.add_row({tr.times[i], tr.norms[i]});
    rep.write(out_path(com, "trajectory.csv"));

    CsvReport per;
    stamp_config(per, cfg);
    per.columns = {"period", "factor", "cost"};
    for (std::size_t k = 0; k < tr.factors.size(); ++k)
        per.add_row({static_cast<double>(k + 1), tr.factors[k], tr.period_costs[k]});
    per.write(out_path(com, "periods.csv"));

    save_state(x0, out_path(com, "initial_state.bin"));

    if (com.plot) {
        SvgPlot plot;
        plot.title = "closed trajectory decay";
        plot.x_label = "t";
        plot.y_label = "norm";
        plot.log_y = true;
        plot.x = tr.times;
        std::vector<double> ys, env;
        const double nx0 = tr.norms.empty() ? 1.0 : tr.norms.front();
        for (std::size_t i = 0; i < tr.times.size(); ++i) {
            ys.push_back(std::max(tr.norms[i], 1e-300));
            env.push_back(std::max(tr.M_cert * std::exp(tr.omega_cert * tr.times[i]) * nx0, 1e-300));
        }
        plot.add_series("trajectory", ys);
        plot.add_series("certificate", env);
        plot.write(out_path(com, "trajectory.svg"));
    }

    std::cout << "alpha_achieved " << format_double(tr.alpha_achieved) << "  C_achieved "
              << format_double(tr.C_achieved) << "  M_cert " << format_double(tr.M_cert)
              << "  omega_cert " << format_double(tr.omega_cert) << "  total_cost "
              << format_double(cost) << "\n";
    return 0;
}

inline MatC matrix_from_config(const RunConfig& cfg, const std::string& key, int rows, int cols) {
    MatC A = MatC::Zero(rows, cols);
    for (const auto& raw : cfg.get_all(key)) {
        const std::size_t colon = raw.find(':');
        if (colon == std::string::npos)
            throw PreconditionError(key + ": expected 'i j : re [im]', got '" + raw + "'");
        std::istringstream left(raw.substr(0, colon));
        int i = -1, j = -1;
        if (!(left >> i >> j))
            throw PreconditionError(key + ": expected two indices in '" + raw + "'");
        if (i < 0 || i >= rows || j < 0 || j >= cols)
            throw PreconditionError(key + ": index (" + std::to_string(i) + "," +
                                    std::to_string(j) + ") out of range");
        std::istringstream right(raw.substr(colon + 1));
        double re = 0.0, im = 0.0;
        if (!(right >> re)) throw PreconditionError(key + ": missing value in '" + raw + "'");
        right >> im;
        A(i, j) += cd(re, im);
    }
    return A;
}

inline int cmd_duality_check(const Common& com) {
    const RunConfig cfg = load_config(com);
    const int n = cfg.get_int("system.n");
    const int m = cfg.get_int("system.m");
    const MatC A = matrix_from_config(cfg, "system.A", n, n);
    const MatC B = matrix_from_config(cfg, "system.B", n, m);
    const double T = cfg.get_double_or("system.T", 1.0);
    const double r = cfg.get_double_or("system.r", 2.0);
    const int n_t = cfg.get_int_or("system.nt", 128);
    const std::string pairing_name = cfg.get_or("system.pairing", "euclidean");
    StateNorm pairing = StateNorm::Euclidean;
    if (pairing_name == "l1") pairing = StateNorm::L1;
    else if (pairing_name == "linf") pairing = StateNorm::Linf;
    else if (pairing_name != "euclidean")
        throw PreconditionError("system.pairing must be euclidean, l1, or linf");
    const double C = cfg.get_double("check.C");
    const double alpha = cfg.get_double("check.alpha");
    const int dirs = cfg.get_int_or("check.dirs", 20);

    const FiniteSystem sys = make_finite_system(A, B, T, r, n_t, pairing);
    const EquivalenceVerdict v = check_equivalence(sys, C, alpha, dirs, com.seed);

    nlohmann::json out;
    out["pass"] = v.pass;
    out["alpha_primal"] = v.alpha_primal;
    out["alpha_dual"] = v.alpha_dual;
    out["tolerance"] = v.tolerance;
    out["primal_holds"] = v.primal_holds;
    out["dual_holds"] = v.dual_holds;
    const auto vec_json = [](const VecC& x) {
        nlohmann::json arr = nlohmann::json::array();
        for (int i = 0; i < x.size(); ++i)
            arr.push_back({{"re", x[i].real()}, {"im", x[i].imag()}});
        return arr;
    };
    out["worst_primal_direction"] = vec_json(v.worst_primal_direction);
    out["worst_dual_direction"] = vec_json(v.worst_dual_direction);
    std::ofstream f(out_path(com, "duality.json"), std::ios::binary);
    f << out.dump(2) << "\n";

    std::cout << (v.pass ? "PASS" : "FAIL") << "  alpha_primal " << format_double(v.alpha_primal)
              << "  alpha_dual " << format_double(v.alpha_dual) << "  tolerance "
              << format_double(v.tolerance) << "\n";
    return v.pass ? 0 : 1;
}

}  // namespace cli

inline int run_cli(int argc, char** argv) {
    CLI::App app{"spectral stabilizability toolkit"};
    app.require_subcommand(1);

    cli::Common com;
    std::vector<double> lambda_flag;
    double period = -1.0, alpha_flag = -1.0;
    int periods_flag = -1, nt_flag = -1;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", com.config_path, "configuration file (key=value or JSON)");
        sub->add_option("--symbol-config", com.symbol_config, "extra config merged after --config");
        sub->add_option("--out-dir", com.out_dir, "output directory");
        sub->add_option("--set", com.overrides, "override entries, key=value")->take_all();
        sub->add_option("--seed", com.seed, "random seed");
        sub->add_flag("--plot", com.plot, "emit SVG plots");
    };

    auto* sc_symbol = app.add_subcommand("symbol-check", "certify a symbol on the grid");
    add_common(sc_symbol);
    auto* sc_unc = app.add_subcommand("uncertainty", "sweep the spectral uncertainty constant");
    add_common(sc_unc);
    sc_unc->add_option("--lambda", lambda_flag, "band radii")->take_all();
    auto* sc_dis = app.add_subcommand("dissipation", "verify high-band decay envelopes");
    add_common(sc_dis);
    sc_dis->add_option("--lambda", lambda_flag, "band radii")->take_all();
    auto* sc_obs = app.add_subcommand("observability", "measured constants plus a random-state check");
    add_common(sc_obs);
    sc_obs->add_option("--lambda", lambda_flag, "band radius")->take_all();
    sc_obs->add_option("--period", period, "time horizon T");
    sc_obs->add_option("--nt", nt_flag, "time nodes");
    auto* sc_reg = app.add_subcommand("regimes", "pick (lambda, T) from growth/decay exponents");
    add_common(sc_reg);
    sc_reg->add_option("--period", period, "horizon hint");
    sc_reg->add_option("--lambda", lambda_flag, "band radius hint")->take_all();
    auto* sc_stab = app.add_subcommand("stabilize", "periodic control run with certificate");
    add_common(sc_stab);
    sc_stab->add_option("--period", period, "period length T");
    sc_stab->add_option("--alpha", alpha_flag, "per-period contraction target");
    sc_stab->add_option("--periods", periods_flag, "number of periods");
    sc_stab->add_option("--nt", nt_flag, "time nodes per period");
    auto* sc_dual = app.add_subcommand("duality-check", "finite-dimensional duality cross-check");
    add_common(sc_dual);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(sc_symbol)) return cli::cmd_symbol_check(com);
        if (app.got_subcommand(sc_unc)) return cli::cmd_uncertainty(com, lambda_flag);
        if (app.got_subcommand(sc_dis)) return cli::cmd_dissipation(com, lambda_flag);
        if (app.got_subcommand(sc_obs)) return cli::cmd_observability(com, lambda_flag, period, nt_flag);
        if (app.got_subcommand(sc_reg)) return cli::cmd_regimes(com, period, lambda_flag);
        if (app.got_subcommand(sc_stab))
            return cli::cmd_stabilize(com, period, alpha_flag, periods_flag, nt_flag);
        if (app.got_subcommand(sc_dual)) return cli::cmd_duality_check(com);
        return 2;
    } catch (const PreconditionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace stabilab
