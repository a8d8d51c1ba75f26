#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sparsedetect/sparsedetect.hpp"

// ============================================================================
// Command-line front end: boundary | simulate | sweep | oracle | selftest.
// All numeric work is delegated to the library; this layer only parses
// flags, formats CSV/JSON and writes run manifests.
// ============================================================================

namespace sparsedetect::cli {

using nlohmann::json;

// Floats are printed with 9 significant digits: enough to check 1e-6
// tolerances without trailing noise, and stable across runs.
inline std::string fmt9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

inline std::string iso8601_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline constexpr const char* csv_header =
    "beta,x,n,p,k,test,alpha_hat,beta_hat,gamma_hat,se_alpha,se_beta,reps,seed";

inline std::string csv_row(const model::ProblemConfig& cfg, const std::string& test,
                           const montecarlo::CellResult& cell, std::size_t reps) {
    std::ostringstream os;
    os << fmt9(cell.beta) << ',' << fmt9(cell.x) << ',' << cfg.n << ',' << cfg.p << ','
       << cfg.k << ',' << test << ',' << fmt9(cell.alpha_hat) << ','
       << fmt9(cell.beta_hat) << ',' << fmt9(cell.gamma_hat) << ','
       << fmt9(cell.se_alpha) << ',' << fmt9(cell.se_beta) << ',' << reps << ','
       << cfg.seed;
    return os.str();
}

struct OutputTarget {
    std::optional<std::string> path;

    // Body goes to the file when --out is set, else to out_stream. Files get
    // a sidecar manifest at <path>.manifest.json.
    void deliver(const std::string& body, const json& manifest, std::ostream& out) const {
        if (path) {
            std::ofstream f(*path, std::ios::binary);
            if (!f) throw std::runtime_error("cannot open output file " + *path);
            f << body;
            std::ofstream mf(*path + ".manifest.json", std::ios::binary);
            mf << manifest.dump(2) << '\n';
        } else {
            out << body;
        }
    }
};

struct CommonFlags {
    std::string config_path;
    std::size_t n = 0, p = 0;
    std::int64_t k = -1;
    double beta = -1.0;
    double r = -1.0, x = -1.0;
    double alpha = 0.05;
    double a = 0.1;
    double cutoff = 0.5;
    std::string test = "psi_hc";
    std::string design = "gaussian";
    std::string sigma_mode = "known";
    bool sigma_unknown_flag = false;
    double sigma_value = 1.0;
    std::size_t reps = 1000;
    std::uint64_t seed = 1;
    std::size_t threads = 0;
    bool fixed_theta = false;
    bool as_json = false;
    std::string out_path;
};

inline void add_model_flags(CLI::App* cmd, CommonFlags& f, bool need_signal) {
    cmd->add_option("--n", f.n, "sample size")->required();
    cmd->add_option("--p", f.p, "dimension")->required();
    cmd->add_option("--k", f.k, "sparsity (or use --beta)");
    cmd->add_option("--beta", f.beta, "sparsity index, k = round(p^(1-beta))");
    if (need_signal) {
        cmd->add_option("--r", f.r, "separation radius");
        cmd->add_option("--x", f.x, "rescaled intensity, r = x sqrt(k log p / n)");
    }
    cmd->add_option("--design", f.design, "design family")
        ->check(CLI::IsMember({"gaussian", "rademacher", "uniform"}));
    cmd->add_option("--sigma", f.sigma_mode, "noise variance mode")
        ->check(CLI::IsMember({"known", "unknown"}));
    cmd->add_flag("--sigma-unknown", f.sigma_unknown_flag, "alias for --sigma unknown");
    cmd->add_option("--sigma-value", f.sigma_value, "noise standard deviation");
    cmd->add_option("--seed", f.seed, "base seed");
    cmd->add_option("--config", f.config_path,
                    "flat key=value config file; explicit flags override it");
}

/// Expand a flat key=value config file into trailing CLI arguments, skipping
/// keys the user already passed explicitly (flags override the file).
inline std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    std::vector<std::string> expanded = args;
    if (path.empty()) return expanded;

    std::ifstream file(path);
    if (!file) throw std::domain_error("cannot read config file " + path);
    std::string line;
    while (std::getline(file, line)) {
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line.erase(comment);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return (a == std::string::npos) ? std::string{} : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) continue;
        const std::string flag = "--" + key;
        bool already = false;
        for (const auto& a : args) {
            if (a == flag || a.rfind(flag + "=", 0) == 0) already = true;
        }
        if (already) continue;
        if (value == "true") {
            expanded.push_back(flag);
        } else if (value == "false" || value.empty()) {
            continue;
        } else {
            expanded.push_back(flag);
            expanded.push_back(value);
        }
    }
    return expanded;
}

inline void add_test_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--test", f.test, "decision rule")
        ->check(CLI::IsMember({"psi0", "psi0_T", "psi1", "psi_hc", "psi_max",
                               "psi_star", "psi_star_hc", "psi_triple"}));
    cmd->add_option("--alpha", f.alpha, "level for u_alpha-calibrated rules");
    cmd->add_option("--a", f.a, "HC threshold margin");
    cmd->add_option("--cutoff", f.cutoff, "HC p-value cutoff");
    cmd->add_option("--reps", f.reps, "replications per phase");
    cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)");
    cmd->add_flag("--fixed-theta", f.fixed_theta, "reuse one theta across replications");
}

inline model::DesignKind parse_design(const std::string& name) {
    if (name == "gaussian") return model::DesignKind::gaussian_iid;
    if (name == "rademacher") return model::DesignKind::rademacher_iid;
    return model::DesignKind::uniform_iid;
}

inline model::ProblemConfig build_config(const CommonFlags& f, bool need_signal) {
    model::ConfigInput in;
    in.n = f.n;
    in.p = f.p;
    if (f.k >= 0) in.k = static_cast<std::size_t>(f.k);
    if (f.beta >= 0.0) in.beta = f.beta;
    if (need_signal) {
        if (f.r >= 0.0) in.r = f.r;
        if (f.x >= 0.0) in.x = f.x;
    } else {
        in.r = 0.0;
    }
    in.sigma = f.sigma_value;
    in.variance_known = !(f.sigma_mode == "unknown" || f.sigma_unknown_flag);
    in.design = parse_design(f.design);
    in.seed = f.seed;
    return model::resolve_config(in);
}

inline rules::TestSpec build_spec(const CommonFlags& f) {
    const auto kind = rules::test_from_name(f.test);
    if (!kind) throw std::domain_error("unknown test " + f.test);
    rules::TestSpec spec;
    spec.name = *kind;
    spec.alpha = f.alpha;
    spec.a = f.a;
    spec.cutoff = f.cutoff;
    if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) {
        throw std::domain_error("alpha must lie in (0,1)");
    }
    return spec;
}

inline json manifest_for(const std::string& command, const CommonFlags& f,
                         const std::string& started) {
    json m;
    m["command"] = command;
    m["tool_version"] = version;
    m["seed"] = f.seed;
    m["started"] = started;
    m["finished"] = iso8601_now();
    json cfg;
    cfg["n"] = f.n;
    cfg["p"] = f.p;
    if (f.k >= 0) cfg["k"] = f.k;
    if (f.beta >= 0.0) cfg["beta"] = f.beta;
    if (f.r >= 0.0) cfg["r"] = f.r;
    if (f.x >= 0.0) cfg["x"] = f.x;
    cfg["test"] = f.test;
    cfg["alpha"] = f.alpha;
    cfg["a"] = f.a;
    cfg["cutoff"] = f.cutoff;
    cfg["design"] = f.design;
    cfg["sigma_mode"] = (f.sigma_mode == "unknown" || f.sigma_unknown_flag) ? "unknown"
                                                                            : "known";
    cfg["sigma_value"] = f.sigma_value;
    cfg["reps"] = f.reps;
    cfg["threads"] = f.threads;
    cfg["fixed_theta"] = f.fixed_theta;
    m["config"] = cfg;
    return m;
}

// ---------------------------------------------------------------------------
// boundary
// ---------------------------------------------------------------------------
inline int cmd_boundary(const CommonFlags& f, std::ostream& out) {
    const std::string started = iso8601_now();
    if (f.k < 0 && f.beta < 0.0) throw std::domain_error("boundary: give --k or --beta");

    model::ProblemConfig cfg;
    cfg.n = f.n;
    cfg.p = f.p;
    if (f.p < 2 || f.n < 2) throw std::domain_error("boundary: need n, p >= 2");
    if (f.k >= 0) {
        cfg.k = static_cast<std::size_t>(f.k);
        cfg.beta = (f.beta >= 0.0) ? f.beta : model::beta_from_sparsity(f.p, cfg.k);
    } else {
        if (!(f.beta > 0.0 && f.beta < 1.0)) {
            throw std::domain_error("boundary: need beta in (0,1)");
        }
        cfg.beta = f.beta;
        cfg.k = model::sparsity_from_beta(f.p, f.beta);
    }
    cfg.variance_known = !(f.sigma_mode == "unknown" || f.sigma_unknown_flag);

    const boundary::RegimeReport rep = boundary::classify_regime(cfg);

    json j;
    j["beta"] = cfg.beta;
    j["k"] = cfg.k;
    j["rate"] = rep.boundary_rate;
    j["regime"] = boundary::regime_name(rep.regime);
    if (rep.regime == boundary::Regime::highly_sparse) {
        j["phi"] = boundary::phi_boundary(cfg.beta);
        j["sharp_radius"] = *rep.sharp_radius;
    }
    j["ratios"] = {{"sharp_condition", rep.sharp_condition_ratio},
                   {"unknown_variance", rep.unknown_variance_ratio}};
    j["sharp_constant_applicable"] = rep.sharp_constant_applicable;
    j["unknown_variance_detectable"] = rep.unknown_variance_detectable;

    OutputTarget target{f.out_path.empty() ? std::nullopt
                                           : std::optional<std::string>(f.out_path)};
    const json manifest = manifest_for("boundary", f, started);
    if (f.as_json || target.path) {
        json with_manifest = j;
        with_manifest["manifest"] = manifest;
        target.deliver(with_manifest.dump(2) + "\n", manifest, out);
        if (target.path && f.as_json) out << with_manifest.dump(2) << "\n";
    }
    if (!f.as_json) {
        std::ostringstream os;
        os << "detection boundary report\n"
           << "  n = " << cfg.n << "  p = " << cfg.p << "  k = " << cfg.k
           << "  beta = " << fmt9(cfg.beta) << "\n"
           << "  regime             : " << boundary::regime_name(rep.regime) << "\n"
           << "  boundary rate      : " << fmt9(rep.boundary_rate) << "\n";
        if (rep.sharp_radius) {
            os << "  phi(beta)          : " << fmt9(boundary::phi_boundary(cfg.beta))
               << "\n"
               << "  sharp radius       : " << fmt9(*rep.sharp_radius) << "\n";
        }
        os << "  k log p / sqrt(n)  : " << fmt9(rep.sharp_condition_ratio)
           << (rep.sharp_constant_applicable ? "  (sharp constant applies)" : "") << "\n"
           << "  k log p / n        : " << fmt9(rep.unknown_variance_ratio)
           << (rep.unknown_variance_detectable ? "" : "  (undetectable: unknown sigma)")
           << "\n";
        out << os.str();
    }
    return 0;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------
inline int cmd_simulate(const CommonFlags& f, std::ostream& out) {
    const std::string started = iso8601_now();
    const model::ProblemConfig cfg = build_config(f, true);
    const rules::TestSpec spec = build_spec(f);

    montecarlo::EngineOptions opts;
    opts.threads = f.threads;
    opts.fixed_theta = f.fixed_theta;
    if (!cfg.variance_known) opts.uv_scale = cfg.sigma;
    const montecarlo::CellResult cell =
        montecarlo::estimate_errors(cfg, spec, f.reps, opts);

    const json manifest = manifest_for("simulate", f, started);
    OutputTarget target{f.out_path.empty() ? std::nullopt
                                           : std::optional<std::string>(f.out_path)};
    if (f.as_json) {
        json j;
        j["beta"] = cell.beta;
        j["x"] = cell.x;
        j["n"] = cfg.n;
        j["p"] = cfg.p;
        j["k"] = cfg.k;
        j["test"] = f.test;
        j["alpha_hat"] = cell.alpha_hat;
        j["beta_hat"] = cell.beta_hat;
        j["gamma_hat"] = cell.gamma_hat;
        j["se_alpha"] = cell.se_alpha;
        j["se_beta"] = cell.se_beta;
        j["reps"] = f.reps;
        j["seed"] = f.seed;
        j["manifest"] = manifest;
        target.deliver(j.dump(2) + "\n", manifest, out);
        if (target.path) out << j.dump(2) << "\n";
    } else {
        std::string body = std::string(csv_header) + "\n" +
                           csv_row(cfg, f.test, cell, f.reps) + "\n";
        target.deliver(body, manifest, out);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------
inline int cmd_sweep(const CommonFlags& f, const std::vector<double>& betas,
                     const std::vector<double>& xs, std::ostream& out) {
    const std::string started = iso8601_now();
    montecarlo::SweepGrid grid;
    grid.beta_values = betas;
    grid.x_values = xs;
    grid.n = f.n;
    grid.p = f.p;
    grid.design = parse_design(f.design);
    grid.sigma = f.sigma_value;
    grid.variance_known = !(f.sigma_mode == "unknown" || f.sigma_unknown_flag);
    grid.reps_per_cell = f.reps;
    grid.base_seed = f.seed;

    const rules::TestSpec spec = build_spec(f);
    const std::vector<montecarlo::CellResult> cells =
        montecarlo::run_sweep(grid, spec, f.threads);

    std::ostringstream body;
    body << csv_header << "\n";
    std::size_t idx = 0;
    for (std::size_t bi = 0; bi < betas.size(); ++bi) {
        for (std::size_t xi = 0; xi < xs.size(); ++xi, ++idx) {
            body << csv_row(grid.cell_config(bi, xi), f.test, cells[idx], f.reps)
                 << "\n";
        }
    }
    const json manifest = manifest_for("sweep", f, started);
    OutputTarget target{f.out_path.empty() ? std::nullopt
                                           : std::optional<std::string>(f.out_path)};
    target.deliver(body.str(), manifest, out);
    return 0;
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------
inline int cmd_oracle(const CommonFlags& f, const std::string& prior, double c,
                      std::ostream& out) {
    const std::string started = iso8601_now();
    if (f.p > lowerbound::p_max_exact) {
        throw std::domain_error("oracle: exact enumeration is capped at p = " +
                                std::to_string(lowerbound::p_max_exact));
    }
    const model::ProblemConfig cfg = build_config(f, true);
    const lowerbound::PriorChoice choice = (prior == "uniform_support")
                                               ? lowerbound::PriorChoice::uniform_support
                                               : lowerbound::PriorChoice::three_point;
    const lowerbound::GammaEstimate est =
        lowerbound::bayes_risk_oracle(cfg, choice, f.reps, c);

    json j;
    j["gamma_hat"] = est.gamma_hat;
    j["stderr"] = est.stderr_;
    j["reps"] = est.reps;
    j["prior"] = prior;
    j["c"] = c;
    if (choice == lowerbound::PriorChoice::three_point && cfg.r > 0.0) {
        const auto pr = lowerbound::ThreePointPrior::from_radius(cfg.p, cfg.k, cfg.r, c);
        j["h"] = pr.h;
        j["b"] = pr.b;
    }
    const json manifest = manifest_for("oracle", f, started);
    OutputTarget target{f.out_path.empty() ? std::nullopt
                                           : std::optional<std::string>(f.out_path)};
    if (f.as_json) {
        json with_manifest = j;
        with_manifest["manifest"] = manifest;
        target.deliver(with_manifest.dump(2) + "\n", manifest, out);
        if (target.path) out << with_manifest.dump(2) << "\n";
    } else {
        std::ostringstream os;
        os << "bayes-risk oracle (" << prior << " prior)\n"
           << "  gamma_hat = " << fmt9(est.gamma_hat) << "  (stderr "
           << fmt9(est.stderr_) << ", reps " << est.reps << ")\n";
        if (j.contains("h")) {
            os << "  prior: h = " << fmt9(j["h"].get<double>())
               << "  b = " << fmt9(j["b"].get<double>()) << "  c = " << fmt9(c) << "\n";
        }
        target.deliver(os.str(), manifest, out);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// selftest
// ---------------------------------------------------------------------------
struct CheckResult {
    std::string name;
    bool pass = true;
    std::string detail;
};

inline std::vector<CheckResult> run_selftest_checks(const std::string& force_fail);

inline int cmd_selftest(bool as_json, const std::string& force_fail, std::ostream& out) {
    const auto checks = run_selftest_checks(force_fail);
    bool all = true;
    for (const auto& c : checks) all = all && c.pass;
    if (as_json) {
        json j;
        j["all_pass"] = all;
        j["checks"] = json::array();
        for (const auto& c : checks) {
            json e;
            e["name"] = c.name;
            e["pass"] = c.pass;
            if (!c.detail.empty()) e["detail"] = c.detail;
            j["checks"].push_back(e);
        }
        out << j.dump(2) << "\n";
    } else {
        for (const auto& c : checks) {
            out << (c.pass ? "[pass] " : "[FAIL] ") << c.name;
            if (!c.pass && !c.detail.empty()) out << "  (" << c.detail << ")";
            out << "\n";
        }
        out << (all ? "selftest: all checks passed\n" : "selftest: FAILURES\n");
    }
    return all ? 0 : 1;
}

// ---------------------------------------------------------------------------
// entry point
// ---------------------------------------------------------------------------
inline int run_app(int argc, const char* const* argv, std::ostream& out,
                   std::ostream& err) {
    CLI::App app{"sparse signal detection in high-dimensional regression"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(version));

    CommonFlags f;
    std::vector<double> betas, xs;
    std::string prior = "three_point";
    double prior_c = 0.9;
    bool selftest_json = false;
    std::string force_fail;

    CLI::App* boundary_cmd = app.add_subcommand("boundary", "closed-form boundary report");
    add_model_flags(boundary_cmd, f, false);
    boundary_cmd->add_flag("--json", f.as_json, "emit JSON");
    boundary_cmd->add_option("--out", f.out_path, "write output to file");

    CLI::App* simulate_cmd = app.add_subcommand("simulate", "estimate test errors");
    add_model_flags(simulate_cmd, f, true);
    add_test_flags(simulate_cmd, f);
    simulate_cmd->add_flag("--json", f.as_json, "emit JSON instead of CSV");
    simulate_cmd->add_option("--out", f.out_path, "write output to file");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "(beta, x) phase-diagram sweep");
    add_model_flags(sweep_cmd, f, false);
    add_test_flags(sweep_cmd, f);
    sweep_cmd->add_option("--betas", betas, "beta grid (strictly increasing)")
        ->required()
        ->delimiter(',');
    sweep_cmd->add_option("--xs", xs, "x grid (strictly increasing)")
        ->required()
        ->delimiter(',');
    sweep_cmd->add_option("--out", f.out_path, "write CSV to file");

    CLI::App* oracle_cmd = app.add_subcommand("oracle", "Bayes-risk lower-bound oracle");
    add_model_flags(oracle_cmd, f, true);
    oracle_cmd->add_option("--reps", f.reps, "Monte Carlo replications");
    oracle_cmd->add_option("--prior", prior, "prior family")
        ->check(CLI::IsMember({"three_point", "uniform_support"}));
    oracle_cmd->add_option("--c", prior_c, "three-point prior constant in (0,1)");
    oracle_cmd->add_flag("--json", f.as_json, "emit JSON");
    oracle_cmd->add_option("--out", f.out_path, "write output to file");

    CLI::App* selftest_cmd = app.add_subcommand("selftest", "fast invariant suite");
    selftest_cmd->add_flag("--json", selftest_json, "machine-readable pass list");
    selftest_cmd->add_option("--force-fail", force_fail, "test fixture: fail one check")
        ->group("");  // hidden

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = expand_config(args);
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    std::vector<const char*> argv_expanded{argv[0]};
    for (const auto& a : args) argv_expanded.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv_expanded.size()), argv_expanded.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    try {
        if (boundary_cmd->parsed()) return cmd_boundary(f, out);
        if (simulate_cmd->parsed()) return cmd_simulate(f, out);
        if (sweep_cmd->parsed()) return cmd_sweep(f, betas, xs, out);
        if (oracle_cmd->parsed()) return cmd_oracle(f, prior, prior_c, out);
        if (selftest_cmd->parsed()) return cmd_selftest(selftest_json, force_fail, out);
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace sparsedetect::cli

#include "selftest_checks.hpp"
