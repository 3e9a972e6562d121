#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fexpbayes/errors.hpp"
#include "fexpbayes/experiment.hpp"
#include "fexpbayes/posterior.hpp"
#include "fexpbayes/simulate.hpp"

namespace {

using namespace fexpbayes;

// preset first, config file second, command-line seed/out last
ExperimentConfig assemble_config(const std::string& preset,
                                 const std::string& config_path) {
    ExperimentConfig cfg =
        preset.empty() ? ExperimentConfig{} : experiment_preset(preset);
    if (!config_path.empty()) {
        const KeyValueConfig file = KeyValueConfig::load(config_path);
        KeyValueConfig merged = to_kv(cfg);
        for (const auto& [k, v] : file.entries()) merged.set(k, v);
        cfg = experiment_config_from_kv(merged);
    }
    return cfg;
}

int cmd_simulate(const std::string& config_path, std::uint64_t n,
                 std::uint64_t replicates, std::uint64_t seed, bool has_seed,
                 const std::string& method, const std::string& out_dir) {
    ExperimentConfig cfg = assemble_config("", config_path);
    SimRequest req;
    req.n = n;
    req.replicates = replicates;
    req.seed = has_seed ? seed : cfg.seed;
    if (method == "auto") req.method = SimMethod::automatic;
    else if (method == "circulant") req.method = SimMethod::circulant;
    else if (method == "cholesky") req.method = SimMethod::cholesky;
    else throw config_error("unknown method: " + method);

    const FexpParams truth = cfg.truth.params();
    const SimResult sim = simulate_gaussian(SpectralFn::fexp(truth), req);

    std::filesystem::create_directories(out_dir);
    std::ostringstream name;
    name << "series_n" << n << "_seed" << req.seed << ".csv";
    const auto path = std::filesystem::path(out_dir) / name.str();
    std::ofstream os(path);
    if (!os) throw domain_error("cannot write " + path.string());
    std::ostringstream model;
    model << "fexp d=" << truth.d << " K=" << truth.order();
    write_series_csv(os, sim, model.str(), req.seed);

    std::cout << "wrote " << path.string() << " (" << sim.replicates << " x "
              << sim.n << ", method=" << sim.method_used << ")\n";
    return 0;
}

int cmd_fit(const std::string& config_path, const std::string& data_path,
            std::uint64_t row, std::uint64_t seed, bool has_seed,
            const std::string& out_dir) {
    ExperimentConfig cfg = assemble_config("", config_path);
    SamplerConfig sc = cfg.sampler;
    if (has_seed) sc.seed = seed;

    const std::vector<double> x = read_series_csv_row(data_path, row);
    const PosteriorSamples ps = run_mcmc(x, cfg.prior, sc);

    std::filesystem::create_directories(out_dir);
    const auto path = std::filesystem::path(out_dir) / "samples.csv";
    std::ofstream os(path);
    if (!os) throw domain_error("cannot write " + path.string());
    write_samples_csv(os, ps);

    const MeanResult d = estimate_d(ps);
    std::cout << "n = " << x.size() << ", draws = " << ps.draws.size() << "\n";
    std::cout << "d_hat = " << d.value << " (mc se " << d.se << ", ess "
              << ps.ess_d << ")\n";
    std::cout << "K histogram:";
    for (const auto& [k, c] : ps.k_counts) std::cout << ' ' << k << ':' << c;
    std::cout << "\nacceptance:";
    for (const auto& m : ps.moves)
        std::cout << ' ' << m.name << '=' << m.acceptance();
    std::cout << "\nwrote " << path.string() << "\n";
    return 0;
}

int cmd_experiment(const std::string& preset, const std::string& config_path,
                   std::uint64_t seed, bool has_seed, const std::string& out_dir) {
    ExperimentConfig cfg = assemble_config(preset, config_path);
    if (has_seed) cfg.seed = seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;

    const ExperimentReport rep = run_experiment(cfg);
    std::cout << "kind = " << to_string(rep.kind) << ", wrote " << cfg.out_dir
              << "/report.csv and summary.json\n";
    if (rep.kind == ExperimentKind::consistency ||
        rep.kind == ExperimentKind::rate) {
        for (const auto& s : rep.per_n)
            std::cout << "n = " << s.n << ": median |d_hat - d0| = "
                      << s.median_abs_err_d << ", median l(fhat, f0) = "
                      << s.median_l_fhat << "\n";
        std::cout << "slope of log median l vs log n = " << rep.slope_log_l
                  << ", monotone error = "
                  << (rep.monotone_median_abs_err ? "yes" : "no") << "\n";
        std::cout << "failures = " << rep.failures << " / " << rep.rows.size()
                  << "\n";
    } else if (rep.kind == ExperimentKind::trace_limits) {
        for (const auto& s : rep.trace_summary)
            std::cout << "pair " << s.pair << ": trace gap monotone = "
                      << (s.monotone_trace_gap ? "yes" : "no")
                      << ", kl gap monotone = "
                      << (s.monotone_kl_gap ? "yes" : "no") << "\n";
    } else {
        std::cout << "cases = " << rep.property_rows.size()
                  << ", violations = " << rep.violations
                  << ", small-h cases = " << rep.regime_cases << "\n";
    }
    return rep.exit_code();
}

int cmd_validate(std::uint64_t seed, std::uint64_t cases,
                 const std::string& out_dir) {
    if (!out_dir.empty()) {
        ExperimentConfig cfg;
        cfg.kind = ExperimentKind::divergence_properties;
        cfg.seed = seed;
        cfg.case_count = cases;
        cfg.out_dir = out_dir;
        const ExperimentReport rep = run_experiment(cfg);
        std::cout << "cases = " << rep.property_rows.size() << ", violations = "
                  << rep.violations << ", wrote " << out_dir << "/report.csv\n";
        for (const auto& r : rep.property_rows)
            if (!r.ok) std::cout << "case " << r.case_id << ": " << r.status << "\n";
        return rep.exit_code();
    }
    const ExperimentReport rep = validate_properties(seed, cases);
    std::cout << "cases = " << rep.property_rows.size() << ", violations = "
              << rep.violations << ", small-h cases = " << rep.regime_cases
              << "\n";
    for (const auto& r : rep.property_rows)
        if (!r.ok) std::cout << "case " << r.case_id << ": " << r.status << "\n";
    return rep.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Bayesian spectral density and long-memory estimation for stationary "
        "Gaussian time series (exponential-model priors, exact Toeplitz "
        "likelihood)"};
    app.set_version_flag("--version", "0.1.0");
    app.require_subcommand(1);

    // one variable set per subcommand: CLI11 default_val assigns at
    // definition time, so sharing variables leaks defaults across commands
    std::string config_path, preset, data_path, method = "auto";
    std::string sim_out = ".", fit_out = ".", exp_out, val_out;
    std::uint64_t n = 256, replicates = 1, seed = 0, row = 0, cases = 200;
    std::uint64_t val_seed = 7;

    CLI::App* sim = app.add_subcommand("simulate",
                                       "draw stationary Gaussian series and "
                                       "write series_*.csv");
    sim->add_option("--config", config_path, "key=value config (truth.* keys)");
    sim->add_option("--n", n, "series length")->check(CLI::Range(1, 1 << 20));
    sim->add_option("--replicates", replicates, "number of series");
    CLI::Option* sim_seed = sim->add_option("--seed", seed, "rng seed");
    sim->add_option("--method", method, "auto | circulant | cholesky");
    sim->add_option("--out", sim_out, "output directory");

    CLI::App* fit = app.add_subcommand("fit",
                                       "run the sampler on one series and "
                                       "write samples.csv");
    fit->add_option("--config", config_path, "key=value config (prior.*, sampler.*)");
    fit->add_option("--data", data_path, "series csv (from simulate)")->required();
    fit->add_option("--row", row, "replicate row to fit");
    CLI::Option* fit_seed = fit->add_option("--seed", seed, "sampler seed");
    fit->add_option("--out", fit_out, "output directory");

    CLI::App* exp = app.add_subcommand("experiment",
                                       "run a configured experiment, write "
                                       "report.csv and summary.json");
    exp->add_option("--preset", preset,
                    "consistency | consistency-smoke | rate | trace-limits | "
                    "divergence-properties");
    exp->add_option("--config", config_path, "key=value config overlaying the preset");
    CLI::Option* exp_seed = exp->add_option("--seed", seed, "seed override");
    exp->add_option("--out", exp_out, "output directory override");

    CLI::App* val = app.add_subcommand("validate",
                                       "randomized divergence property suite");
    val->add_option("--seed", val_seed, "case generator seed");
    val->add_option("--cases", cases, "number of random pairs");
    val->add_option("--out", val_out, "also write report files here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // help/version exit 0, usage errors exit 1
    }

    try {
        if (sim->parsed())
            return cmd_simulate(config_path, n, replicates, seed,
                                sim_seed->count() > 0, method, sim_out);
        if (fit->parsed())
            return cmd_fit(config_path, data_path, row, seed,
                           fit_seed->count() > 0, fit_out);
        if (exp->parsed()) {
            if (preset.empty() && config_path.empty()) {
                std::cerr << "experiment: need --preset or --config\n";
                return 1;
            }
            return cmd_experiment(preset, config_path, seed,
                                  exp_seed->count() > 0, exp_out);
        }
        if (val->parsed()) return cmd_validate(val_seed, cases, val_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
