#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "fexpbayes/config.hpp"
#include "fexpbayes/posterior.hpp"
#include "fexpbayes/prior.hpp"
#include "fexpbayes/spectral.hpp"

namespace fexpbayes {

enum class ExperimentKind { consistency, rate, trace_limits, divergence_properties };

const char* to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

// data-generating spectral density, an exponential-model member; the
// default is the fractional-noise case d0 = 0.3 with unit innovation
// variance (theta_0 = -log(2 pi))
struct TruthSpec {
    double d0 = 0.3;
    std::vector<double> theta0 = {-std::log(2.0 * std::numbers::pi)};

    FexpParams params() const { return FexpParams(d0, theta0); }
};

struct FexpPair {
    FexpParams left = FexpParams(0.0, {0.0});
    FexpParams right = FexpParams(0.0, {0.0});
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::consistency;
    TruthSpec truth;
    std::vector<std::uint64_t> n_list = {128, 256, 512, 1024};
    std::uint64_t replicates = 10;
    PriorSpec prior;
    SamplerConfig sampler;
    std::uint64_t seed = 314159;
    std::string out_dir = ".";
    std::uint64_t threads = 0;      // 0 = hardware concurrency
    bool dump_series = false;       // write series_*.csv per replicate
    std::uint64_t case_count = 200; // divergence_properties only
    std::vector<FexpPair> pairs;    // trace_limits only

    void validate() const;  // throws domain_error / config_error
};

// key=value serialization; keys mirror the field names, nested specs use
// dotted keys (prior.mu, sampler.iterations, truth.d0, pairs.0.left.d).
// from_kv rejects unknown keys.
KeyValueConfig to_kv(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_kv(const KeyValueConfig& kv);

// built-in configurations: consistency, consistency-smoke, rate,
// trace-limits, divergence-properties
ExperimentConfig experiment_preset(const std::string& name);
std::vector<std::string> experiment_preset_names();

struct ReplicateRow {
    std::uint64_t n = 0;
    std::uint64_t rep = 0;
    bool ok = false;
    std::string status = "pending";
    double d_hat = std::numeric_limits<double>::quiet_NaN();
    double abs_err_d = std::numeric_limits<double>::quiet_NaN();
    double l_fhat = std::numeric_limits<double>::quiet_NaN();
    double l_fhat2 = std::numeric_limits<double>::quiet_NaN();
    double h_fhat2 = std::numeric_limits<double>::quiet_NaN();
    double prob_gt_005 = std::numeric_limits<double>::quiet_NaN();
    double prob_gt_01 = std::numeric_limits<double>::quiet_NaN();
    double prob_gt_025 = std::numeric_limits<double>::quiet_NaN();
    double ess_d = std::numeric_limits<double>::quiet_NaN();
    // kept out of report.csv so reruns stay byte-identical; reported in
    // summary.json instead
    double runtime_s = 0.0;
};

struct TraceRow {
    std::uint64_t pair = 0;
    std::uint64_t n = 0;
    double trace_value = 0.0;  // (1/n) tr(T(left) T(right)^{-1})
    double trace_limit = 0.0;  // (1/2pi) integral of left/right
    double trace_gap = 0.0;
    double kl_value = 0.0;
    double kl_limit = 0.0;     // n -> infinity limit of kl_n
    double kl_gap = 0.0;
};

struct PropertyRow {
    std::uint64_t case_id = 0;
    double d0 = 0.0, d1 = 0.0;
    int k0 = 0, k1 = 0;
    double h = 0.0, l = 0.0, b = 0.0;
    bool bh_in_regime = false;
    bool holds_hl = false;
    bool holds_bh = false;
    bool holds_nonneg = false;
    bool holds_scaling = false;
    bool ok = false;
    std::string status = "pending";
};

struct NSummary {
    std::uint64_t n = 0;
    std::uint64_t ok_count = 0;
    double median_abs_err_d = std::numeric_limits<double>::quiet_NaN();
    double median_l_fhat = std::numeric_limits<double>::quiet_NaN();
    double median_l_fhat2 = std::numeric_limits<double>::quiet_NaN();
    double median_h_fhat2 = std::numeric_limits<double>::quiet_NaN();
    double median_prob_gt_005 = std::numeric_limits<double>::quiet_NaN();
    double median_prob_gt_01 = std::numeric_limits<double>::quiet_NaN();
    double median_prob_gt_025 = std::numeric_limits<double>::quiet_NaN();
    double mean_ess_d = std::numeric_limits<double>::quiet_NaN();
};

struct TracePairSummary {
    std::uint64_t pair = 0;
    bool monotone_trace_gap = false;
    bool monotone_kl_gap = false;
};

struct ExperimentReport {
    ExperimentKind kind = ExperimentKind::consistency;
    std::vector<ReplicateRow> rows;
    std::vector<TraceRow> trace_rows;
    std::vector<PropertyRow> property_rows;
    std::vector<NSummary> per_n;
    std::vector<TracePairSummary> trace_summary;
    double slope_log_l = std::numeric_limits<double>::quiet_NaN();
    bool monotone_median_abs_err = false;
    std::uint64_t failures = 0;
    double failure_fraction = 0.0;
    std::uint64_t violations = 0;     // property-suite counterexamples
    std::uint64_t regime_cases = 0;   // property cases with small h
    double total_runtime_s = 0.0;

    // 0, or 2 when more than 20% of replicates failed or any property
    // counterexample was found
    int exit_code() const;
};

// Runs the configured experiment and writes report.csv and summary.json
// into cfg.out_dir (created if missing). Deterministic given cfg.seed:
// every (n, replicate) task derives its own simulation and sampler streams
// from (seed, n, rep), so thread scheduling cannot change any output.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// The randomized divergence property suite alone (no files written):
// h_paper >= l / 2pi, the small-h regime bound b <= h |log h|,
// nonnegativity, and the constant-scaling identities, over case_count
// seeded pairs. Every 10th case is a near pair so the small-h regime is
// exercised.
ExperimentReport validate_properties(std::uint64_t seed, std::uint64_t case_count);

void write_report_csv(std::ostream& os, const ExperimentReport& report);
void write_summary_json(std::ostream& os, const ExperimentConfig& cfg,
                        const ExperimentReport& report);

// reads one replicate row from a series_*.csv produced by write_series_csv
std::vector<double> read_series_csv_row(const std::string& path, std::size_t row);

}  // namespace fexpbayes
