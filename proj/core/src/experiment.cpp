#include "fexpbayes/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "fexpbayes/divergences.hpp"
#include "fexpbayes/errors.hpp"
#include "fexpbayes/quadrature.hpp"
#include "fexpbayes/simulate.hpp"
#include "fexpbayes/stats.hpp"
#include "fexpbayes/toeplitz.hpp"

namespace fexpbayes {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// quote a CSV field that may contain commas or quotes
std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += "\"\"";
        out += c;
    }
    out += '"';
    return out;
}

std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// per-task stream derivation: deterministic in (seed, n, rep, purpose) and
// independent of scheduling
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) {
    std::uint64_t x = mix64(seed + 0x9e3779b97f4a7c15ULL);
    x = mix64(x ^ (a + 0x9e3779b97f4a7c15ULL));
    x = mix64(x ^ (b + 0x6a09e667f3bcc909ULL));
    x = mix64(x ^ (c + 0xbb67ae8584caa73bULL));
    return x;
}

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// ---- fexp_beta / dirichlet parameter serialization helpers ----

void params_to_kv(KeyValueConfig& kv, const std::string& prefix,
                  const FexpParams& p) {
    kv.set_double(prefix + ".d", p.d);
    kv.set_double_list(prefix + ".theta", p.theta);
}

FexpParams params_from_kv(const KeyValueConfig& kv, const std::string& prefix,
                          const FexpParams& fallback) {
    const double d = kv.get_double(prefix + ".d", fallback.d);
    std::vector<double> th = fallback.theta;
    if (kv.has(prefix + ".theta")) th = kv.get_double_list(prefix + ".theta");
    return FexpParams(d, std::move(th));
}

// ---- log fhat2 on a frequency: sqrt(E[f]/E[1/f]) over posterior draws ----

class LogFhat2 {
  public:
    explicit LogFhat2(const PosteriorSamples& s) : draws_(&s.draws) {
        for (const auto& p : *draws_) kmax_ = std::max(kmax_, p.order());
    }

    double operator()(double lam) const {
        // shared basis: cos(j lam) by recurrence, pole term
        const double u = -2.0 * std::log(2.0 * std::sin(0.5 * lam));
        std::vector<double> c(static_cast<std::size_t>(kmax_) + 1);
        const double c1 = std::cos(lam);
        for (int j = 0; j <= kmax_; ++j) {
            if (j == 0) c[j] = 1.0;
            else if (j == 1) c[j] = c1;
            else c[j] = 2.0 * c1 * c[j - 1] - c[j - 2];
        }
        double mplus = -std::numeric_limits<double>::infinity();
        double mminus = mplus;
        std::vector<double> lg(draws_->size());
        for (std::size_t i = 0; i < draws_->size(); ++i) {
            const auto& p = (*draws_)[i];
            double v = p.d * u;
            for (std::size_t j = 0; j < p.theta.size(); ++j) v += p.theta[j] * c[j];
            lg[i] = v;
            mplus = std::max(mplus, v);
            mminus = std::max(mminus, -v);
        }
        double sp = 0.0, sm = 0.0;
        for (const double v : lg) {
            sp += std::exp(v - mplus);
            sm += std::exp(-v - mminus);
        }
        // log E[f] and log E[1/f] share the 1/count factor, which cancels
        return 0.5 * ((mplus + std::log(sp)) - (mminus + std::log(sm)));
    }

  private:
    const std::vector<FexpParams>* draws_;
    int kmax_ = 0;
};

// ---- fit-kind task ----

ReplicateRow run_fit_task(const ExperimentConfig& cfg, std::uint64_t n,
                          std::uint64_t rep) {
    ReplicateRow row;
    row.n = n;
    row.rep = rep;
    const double t0 = now_s();
    try {
        const FexpParams truth = cfg.truth.params();
        SimRequest req;
        req.n = n;
        req.replicates = 1;
        req.seed = derive_seed(cfg.seed, n, rep, 0);
        const SimResult sim = simulate_gaussian(SpectralFn::fexp(truth), req);
        if (cfg.dump_series) {
            std::ostringstream name;
            name << "series_n" << n << "_r" << rep << ".csv";
            std::ofstream os(std::filesystem::path(cfg.out_dir) / name.str());
            std::ostringstream model;
            model << "fexp d=" << truth.d;
            write_series_csv(os, sim, model.str(), req.seed);
        }

        SamplerConfig sc = cfg.sampler;
        sc.seed = derive_seed(cfg.seed, n, rep, 1);
        const PosteriorSamples ps = run_mcmc(sim.row(0), cfg.prior, sc);

        const double d0 = cfg.truth.d0;
        row.d_hat = estimate_d(ps).value;
        row.abs_err_d = std::abs(row.d_hat - d0);
        row.l_fhat = log_l2_fexp(posterior_mean_params(ps), truth);
        row.prob_gt_005 = posterior_prob(ps, [d0](const FexpParams& p) {
                              return std::abs(p.d - d0) > 0.05;
                          }).value;
        row.prob_gt_01 = posterior_prob(ps, [d0](const FexpParams& p) {
                             return std::abs(p.d - d0) > 0.1;
                         }).value;
        row.prob_gt_025 = posterior_prob(ps, [d0](const FexpParams& p) {
                              return std::abs(p.d - d0) > 0.25;
                          }).value;
        row.ess_d = ps.ess_d;

        const LogFhat2 lf2(ps);
        const auto log_f0 = [&truth](double lam) { return log_fexp(truth, lam); };
        row.l_fhat2 =
            2.0 * integrate_singular0(
                      [&](double lam) {
                          const double x = lf2(lam) - log_f0(lam);
                          return x * x;
                      },
                      std::numbers::pi, 1e-6)
                      .value;
        const double sh = integrate_singular0(
                              [&](double lam) {
                                  const double x = log_f0(lam) - lf2(lam);
                                  const double s = std::sinh(0.5 * x);
                                  return 4.0 * s * s;
                              },
                              std::numbers::pi, 1e-9)
                              .value;
        row.h_fhat2 = sh / std::numbers::pi;  // paper constant 1/2pi over [-pi,pi]

        row.ok = true;
        row.status = "ok";
    } catch (const std::exception& e) {
        row.ok = false;
        row.status = e.what();
    }
    row.runtime_s = now_s() - t0;
    return row;
}

void aggregate_fit(const ExperimentConfig& cfg, ExperimentReport& rep) {
    std::vector<double> log_n, log_l;
    rep.monotone_median_abs_err = true;
    double prev = std::numeric_limits<double>::infinity();
    for (const std::uint64_t n : cfg.n_list) {
        NSummary s;
        s.n = n;
        std::vector<double> ae, lf, lf2, hf2, p005, p01, p025, essv;
        for (const auto& r : rep.rows) {
            if (r.n != n || !r.ok) continue;
            ae.push_back(r.abs_err_d);
            lf.push_back(r.l_fhat);
            lf2.push_back(r.l_fhat2);
            hf2.push_back(r.h_fhat2);
            p005.push_back(r.prob_gt_005);
            p01.push_back(r.prob_gt_01);
            p025.push_back(r.prob_gt_025);
            essv.push_back(r.ess_d);
        }
        s.ok_count = ae.size();
        if (!ae.empty()) {
            s.median_abs_err_d = median(ae);
            s.median_l_fhat = median(lf);
            s.median_l_fhat2 = median(lf2);
            s.median_h_fhat2 = median(hf2);
            s.median_prob_gt_005 = median(p005);
            s.median_prob_gt_01 = median(p01);
            s.median_prob_gt_025 = median(p025);
            s.mean_ess_d = mean(essv);
            if (s.median_abs_err_d > prev) rep.monotone_median_abs_err = false;
            prev = s.median_abs_err_d;
            if (s.median_l_fhat > 0.0) {
                log_n.push_back(std::log(static_cast<double>(n)));
                log_l.push_back(std::log(s.median_l_fhat));
            }
        } else {
            rep.monotone_median_abs_err = false;
        }
        rep.per_n.push_back(s);
    }
    if (log_n.size() >= 2) rep.slope_log_l = ols_slope(log_n, log_l);
}

// ---- trace-limits kind ----

void run_trace_limits(const ExperimentConfig& cfg, ExperimentReport& rep) {
    for (std::size_t pi = 0; pi < cfg.pairs.size(); ++pi) {
        const SpectralFn f0 = SpectralFn::fexp(cfg.pairs[pi].left);
        const SpectralFn f1 = SpectralFn::fexp(cfg.pairs[pi].right);
        // (1/2pi) integral of f0/f1 over [-pi, pi]; the ratio is even
        const auto ratio = [&](double lam) {
            return std::exp(f0.log_value(lam) - f1.log_value(lam));
        };
        const double tlimit =
            integrate_singular0(ratio, std::numbers::pi, 1e-10).value /
            std::numbers::pi;
        const double klimit = kl_int(f0, f1, ConstantMode::szego);
        TracePairSummary ts;
        ts.pair = pi;
        ts.monotone_trace_gap = true;
        ts.monotone_kl_gap = true;
        double prev_tgap = std::numeric_limits<double>::infinity();
        double prev_kgap = prev_tgap;
        for (const std::uint64_t n : cfg.n_list) {
            TraceRow r;
            r.pair = pi;
            r.n = n;
            r.trace_value = trace_ratio(f0, f1, n).value;
            r.trace_limit = tlimit;
            r.trace_gap = std::abs(r.trace_value - tlimit);
            r.kl_value = kl_n(f0, f1, n);
            r.kl_limit = klimit;
            r.kl_gap = std::abs(r.kl_value - klimit);
            if (r.trace_gap > prev_tgap) ts.monotone_trace_gap = false;
            if (r.kl_gap > prev_kgap) ts.monotone_kl_gap = false;
            prev_tgap = r.trace_gap;
            prev_kgap = r.kl_gap;
            rep.trace_rows.push_back(r);
        }
        rep.trace_summary.push_back(ts);
    }
}

// ---- divergence-properties kind ----

FexpParams random_params(Rng& rng, double d, int k, double theta0_sd,
                         double theta_sd) {
    std::vector<double> th(static_cast<std::size_t>(k) + 1);
    th[0] = theta0_sd * rng.normal();
    for (int j = 1; j <= k; ++j) th[j] = theta_sd * rng.normal() / (1.0 + j);
    return FexpParams(d, std::move(th));
}

PropertyRow run_property_case(std::uint64_t seed, std::uint64_t case_id) {
    PropertyRow row;
    row.case_id = case_id;
    try {
        Rng rng(seed, case_id);
        const bool near = case_id % 10 == 9;  // exercise the small-h regime
        const double d0 = rng.uniform(-0.4, 0.4);
        double delta;
        do {
            delta = near ? rng.uniform(-0.01, 0.01) : rng.uniform(-0.1, 0.1);
        } while (std::abs(d0 + delta) > 0.44);
        const double d1 = d0 + delta;
        const int k0 = static_cast<int>(rng.next_u64() % 4);
        const int k1 = static_cast<int>(rng.next_u64() % 4);
        const FexpParams p0 = random_params(rng, d0, k0, 0.5, 0.3);
        FexpParams p1 = near ? p0 : random_params(rng, d1, k1, 0.5, 0.3);
        if (near) {
            std::vector<double> th = p0.theta;
            for (auto& t : th) t += 0.02 * rng.normal();
            p1 = FexpParams(d1, std::move(th));
        }
        row.d0 = d0;
        row.d1 = p1.d;
        row.k0 = p0.order();
        row.k1 = p1.order();

        const SpectralFn f0 = SpectralFn::fexp(p0);
        const SpectralFn f1 = SpectralFn::fexp(p1);
        row.h = h_int(f0, f1, ConstantMode::paper);
        row.l = log_l2_fexp(p0, p1);
        const BHCheck bh = check_b_h_inequality(f1, f0);
        row.b = bh.b;
        row.bh_in_regime = bh.in_regime;
        row.holds_bh = bh.holds;
        row.holds_hl = row.h >= row.l / (2.0 * std::numbers::pi) - 1e-12;
        row.holds_nonneg = row.h >= -1e-12 && row.b >= -1e-12 &&
                           kl_int(f0, f1) >= -1e-12;

        // constant-scaling identities at a small matrix size
        const double c = std::exp(rng.uniform(-2.0, 2.0));
        const SpectralFn fc = SpectralFn::scaled(c, f0);
        const double kl_exp = 0.5 * (1.0 / c - 1.0 + std::log(c));
        const double b_exp = (1.0 / c - 1.0) * (1.0 / c - 1.0);
        const double l_exp = 2.0 * std::numbers::pi * std::log(c) * std::log(c);
        const double tol = 1e-9;
        row.holds_scaling =
            std::abs(kl_n(f0, fc, 16) - kl_exp) <= tol * std::max(1.0, kl_exp) &&
            std::abs(b_n(f0, fc, 16) - b_exp) <= tol * std::max(1.0, b_exp) &&
            std::abs(log_l2(f0, fc) - l_exp) <= 1e-6 * std::max(1.0, l_exp);

        const bool all = row.holds_hl && row.holds_nonneg && row.holds_scaling &&
                         (!row.bh_in_regime || row.holds_bh);
        row.ok = all;
        if (all) {
            row.status = "ok";
        } else {
            std::ostringstream what;
            what << "violation:";
            if (!row.holds_hl) what << " h>=l/2pi";
            if (row.bh_in_regime && !row.holds_bh) what << " b<=h|log h|";
            if (!row.holds_nonneg) what << " nonnegativity";
            if (!row.holds_scaling) what << " scaling";
            what << " d0=" << fmt(row.d0) << " d1=" << fmt(row.d1)
                 << " h=" << fmt(row.h) << " l=" << fmt(row.l)
                 << " b=" << fmt(row.b);
            row.status = what.str();
        }
    } catch (const std::exception& e) {
        row.ok = false;
        row.status = e.what();
    }
    return row;
}

void dispatch_indexed(std::uint64_t count, std::uint64_t threads,
                      const std::function<void(std::uint64_t)>& work) {
    std::uint64_t nthreads = threads
                                 ? threads
                                 : std::max(1u, std::thread::hardware_concurrency());
    nthreads = std::min<std::uint64_t>(nthreads, count);
    if (nthreads <= 1) {
        for (std::uint64_t i = 0; i < count; ++i) work(i);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (std::uint64_t t = 0; t < nthreads; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const std::uint64_t i = next.fetch_add(1);
                if (i >= count) return;
                work(i);
            }
        });
    for (auto& th : pool) th.join();
}

}  // namespace

const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::consistency: return "consistency";
        case ExperimentKind::rate: return "rate";
        case ExperimentKind::trace_limits: return "trace_limits";
        case ExperimentKind::divergence_properties: return "divergence_properties";
    }
    return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
    if (s == "consistency") return ExperimentKind::consistency;
    if (s == "rate") return ExperimentKind::rate;
    if (s == "trace_limits") return ExperimentKind::trace_limits;
    if (s == "divergence_properties") return ExperimentKind::divergence_properties;
    throw config_error("unknown experiment kind: " + s);
}

void ExperimentConfig::validate() const {
    if (n_list.empty()) throw domain_error("experiment: n_list must not be empty");
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        if (n_list[i] < 8 || n_list[i] > 2048)
            throw domain_error("experiment: n must lie in [8, 2048]");
        if (i && n_list[i] <= n_list[i - 1])
            throw domain_error("experiment: n_list must be strictly increasing");
    }
    if (kind == ExperimentKind::consistency || kind == ExperimentKind::rate) {
        if (replicates == 0) throw domain_error("experiment: need replicates >= 1");
        prior.validate();
        sampler.validate();
    }
    if (kind == ExperimentKind::trace_limits) {
        if (pairs.empty())
            throw domain_error("experiment: trace_limits needs at least one pair");
        if (n_list.back() > kTraceExactCap)
            throw domain_error("experiment: trace_limits needs n <= " +
                               std::to_string(kTraceExactCap));
    }
    if (out_dir.empty()) throw domain_error("experiment: out_dir must not be empty");
}

KeyValueConfig to_kv(const ExperimentConfig& cfg) {
    KeyValueConfig kv;
    kv.set("kind", to_string(cfg.kind));
    kv.set_u64("seed", cfg.seed);
    kv.set("out_dir", cfg.out_dir);
    kv.set_u64("replicates", cfg.replicates);
    kv.set_u64("threads", cfg.threads);
    kv.set_bool("dump_series", cfg.dump_series);
    kv.set_u64("case_count", cfg.case_count);
    kv.set_u64_list("n_list", cfg.n_list);
    kv.set_double("truth.d0", cfg.truth.d0);
    kv.set_double_list("truth.theta", cfg.truth.theta0);

    kv.set("prior.variant", to_string(cfg.prior.variant));
    kv.set_double("prior.mu", cfg.prior.mu);
    kv.set_double("prior.t", cfg.prior.t);
    kv.set_double("prior.bound_b", cfg.prior.bound_b);
    kv.set_double("prior.alpha_scale", cfg.prior.alpha_scale);
    kv.set_double("prior.theta0_sd", cfg.prior.theta0_sd);
    kv.set_double("prior.beta", cfg.prior.beta);
    kv.set_double("prior.bound_a", cfg.prior.bound_a);
    params_to_kv(kv, "prior.point", cfg.prior.point);

    kv.set_u64("sampler.iterations", cfg.sampler.iterations);
    kv.set_u64("sampler.burn_in", cfg.sampler.burn_in);
    kv.set_u64("sampler.thin", cfg.sampler.thin);
    kv.set_double("sampler.step_d", cfg.sampler.step_d);
    kv.set_double("sampler.step_ridge", cfg.sampler.step_ridge);
    kv.set_double("sampler.step_theta", cfg.sampler.step_theta);
    kv.set_double("sampler.birth_rate", cfg.sampler.birth_rate);
    kv.set_u64("sampler.adapt_window", cfg.sampler.adapt_window);
    kv.set_double("sampler.target_scalar", cfg.sampler.target_scalar);
    kv.set_double("sampler.target_block", cfg.sampler.target_block);
    kv.set_int("sampler.k_max", cfg.sampler.k_max);
    kv.set_bool("sampler.prior_only", cfg.sampler.prior_only);
    kv.set_bool("sampler.pmc_enabled", cfg.sampler.pmc_enabled);
    kv.set_u64("sampler.pmc_population", cfg.sampler.pmc_population);
    kv.set_u64("sampler.pmc_rounds", cfg.sampler.pmc_rounds);

    kv.set_u64("pairs.count", cfg.pairs.size());
    for (std::size_t i = 0; i < cfg.pairs.size(); ++i) {
        const std::string p = "pairs." + std::to_string(i);
        params_to_kv(kv, p + ".left", cfg.pairs[i].left);
        params_to_kv(kv, p + ".right", cfg.pairs[i].right);
    }
    return kv;
}

ExperimentConfig experiment_config_from_kv(const KeyValueConfig& kv) {
    ExperimentConfig cfg;
    std::set<std::string> known = {
        "kind", "seed", "out_dir", "replicates", "threads", "dump_series",
        "case_count", "n_list", "truth.d0", "truth.theta",
        "prior.variant", "prior.mu", "prior.t", "prior.bound_b",
        "prior.alpha_scale", "prior.theta0_sd", "prior.beta", "prior.bound_a",
        "prior.point.d", "prior.point.theta",
        "sampler.iterations", "sampler.burn_in", "sampler.thin",
        "sampler.step_d", "sampler.step_ridge", "sampler.step_theta",
        "sampler.birth_rate", "sampler.adapt_window", "sampler.target_scalar",
        "sampler.target_block", "sampler.k_max", "sampler.prior_only",
        "sampler.pmc_enabled", "sampler.pmc_population", "sampler.pmc_rounds",
        "pairs.count"};
    const std::uint64_t pair_count = kv.get_u64("pairs.count", 0);
    for (std::uint64_t i = 0; i < pair_count; ++i) {
        const std::string p = "pairs." + std::to_string(i);
        known.insert(p + ".left.d");
        known.insert(p + ".left.theta");
        known.insert(p + ".right.d");
        known.insert(p + ".right.theta");
    }
    for (const auto& [key, value] : kv.entries())
        if (!known.count(key)) throw config_error("unknown config key: " + key);

    if (kv.has("kind")) cfg.kind = experiment_kind_from_string(kv.get_string("kind"));
    cfg.seed = kv.get_u64("seed", cfg.seed);
    cfg.out_dir = kv.get_string("out_dir", cfg.out_dir);
    cfg.replicates = kv.get_u64("replicates", cfg.replicates);
    cfg.threads = kv.get_u64("threads", cfg.threads);
    cfg.dump_series = kv.get_bool("dump_series", cfg.dump_series);
    cfg.case_count = kv.get_u64("case_count", cfg.case_count);
    if (kv.has("n_list")) cfg.n_list = kv.get_u64_list("n_list");
    cfg.truth.d0 = kv.get_double("truth.d0", cfg.truth.d0);
    if (kv.has("truth.theta")) cfg.truth.theta0 = kv.get_double_list("truth.theta");

    if (kv.has("prior.variant"))
        cfg.prior.variant = prior_variant_from_string(kv.get_string("prior.variant"));
    cfg.prior.mu = kv.get_double("prior.mu", cfg.prior.mu);
    cfg.prior.t = kv.get_double("prior.t", cfg.prior.t);
    cfg.prior.bound_b = kv.get_double("prior.bound_b", cfg.prior.bound_b);
    cfg.prior.alpha_scale = kv.get_double("prior.alpha_scale", cfg.prior.alpha_scale);
    cfg.prior.theta0_sd = kv.get_double("prior.theta0_sd", cfg.prior.theta0_sd);
    cfg.prior.beta = kv.get_double("prior.beta", cfg.prior.beta);
    cfg.prior.bound_a = kv.get_double("prior.bound_a", cfg.prior.bound_a);
    cfg.prior.point = params_from_kv(kv, "prior.point", cfg.prior.point);

    cfg.sampler.iterations = kv.get_u64("sampler.iterations", cfg.sampler.iterations);
    cfg.sampler.burn_in = kv.get_u64("sampler.burn_in", cfg.sampler.burn_in);
    cfg.sampler.thin = kv.get_u64("sampler.thin", cfg.sampler.thin);
    cfg.sampler.step_d = kv.get_double("sampler.step_d", cfg.sampler.step_d);
    cfg.sampler.step_ridge =
        kv.get_double("sampler.step_ridge", cfg.sampler.step_ridge);
    cfg.sampler.step_theta =
        kv.get_double("sampler.step_theta", cfg.sampler.step_theta);
    cfg.sampler.birth_rate =
        kv.get_double("sampler.birth_rate", cfg.sampler.birth_rate);
    cfg.sampler.adapt_window =
        kv.get_u64("sampler.adapt_window", cfg.sampler.adapt_window);
    cfg.sampler.target_scalar =
        kv.get_double("sampler.target_scalar", cfg.sampler.target_scalar);
    cfg.sampler.target_block =
        kv.get_double("sampler.target_block", cfg.sampler.target_block);
    cfg.sampler.k_max =
        static_cast<int>(kv.get_int("sampler.k_max", cfg.sampler.k_max));
    cfg.sampler.prior_only = kv.get_bool("sampler.prior_only", cfg.sampler.prior_only);
    cfg.sampler.pmc_enabled =
        kv.get_bool("sampler.pmc_enabled", cfg.sampler.pmc_enabled);
    cfg.sampler.pmc_population =
        kv.get_u64("sampler.pmc_population", cfg.sampler.pmc_population);
    cfg.sampler.pmc_rounds = kv.get_u64("sampler.pmc_rounds", cfg.sampler.pmc_rounds);

    cfg.pairs.clear();
    const FexpPair dflt;
    for (std::uint64_t i = 0; i < pair_count; ++i) {
        const std::string p = "pairs." + std::to_string(i);
        FexpPair pr;
        pr.left = params_from_kv(kv, p + ".left", dflt.left);
        pr.right = params_from_kv(kv, p + ".right", dflt.right);
        cfg.pairs.push_back(std::move(pr));
    }
    return cfg;
}

std::vector<std::string> experiment_preset_names() {
    return {"consistency", "consistency-smoke", "rate", "trace-limits",
            "divergence-properties"};
}

ExperimentConfig experiment_preset(const std::string& name) {
    ExperimentConfig cfg;  // defaults already describe the consistency run
    if (name == "consistency") return cfg;
    if (name == "consistency-smoke") {
        cfg.n_list = {64, 128};
        cfg.replicates = 2;
        cfg.sampler.iterations = 800;
        cfg.sampler.burn_in = 300;
        cfg.sampler.thin = 2;
        cfg.seed = 11;
        return cfg;
    }
    if (name == "rate") {
        cfg.kind = ExperimentKind::rate;
        cfg.seed = 271828;
        return cfg;
    }
    if (name == "trace-limits") {
        cfg.kind = ExperimentKind::trace_limits;
        cfg.n_list = {64, 128, 256, 512};
        cfg.pairs = {
            {FexpParams(0.30, {0.0}), FexpParams(0.25, {0.1})},
            {FexpParams(0.10, {0.3, 0.2}), FexpParams(0.18, {0.2, 0.1})},
            {FexpParams(0.45, {0.0, 0.5}), FexpParams(0.40, {0.2, 0.3})},
            {FexpParams(-0.20, {0.5}), FexpParams(-0.12, {0.4, -0.1})},
            {FexpParams(0.00, {0.0, 0.3, -0.2}), FexpParams(0.08, {0.1, 0.2, -0.1})},
        };
        return cfg;
    }
    if (name == "divergence-properties") {
        cfg.kind = ExperimentKind::divergence_properties;
        cfg.case_count = 200;
        cfg.seed = 7;
        return cfg;
    }
    throw config_error("unknown preset: " + name +
                       " (known: consistency, consistency-smoke, rate, "
                       "trace-limits, divergence-properties)");
}

int ExperimentReport::exit_code() const {
    if (failure_fraction > 0.2) return 2;
    if (violations > 0) return 2;
    return 0;
}

ExperimentReport validate_properties(std::uint64_t seed, std::uint64_t case_count) {
    ExperimentReport rep;
    rep.kind = ExperimentKind::divergence_properties;
    const double t0 = now_s();
    rep.property_rows.resize(case_count);
    for (std::uint64_t i = 0; i < case_count; ++i)
        rep.property_rows[i] = run_property_case(seed, i);
    for (const auto& r : rep.property_rows) {
        if (!r.ok) ++rep.violations;
        if (r.bh_in_regime) ++rep.regime_cases;
    }
    rep.total_runtime_s = now_s() - t0;
    return rep;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const double t0 = now_s();
    std::filesystem::create_directories(cfg.out_dir);

    ExperimentReport rep;
    rep.kind = cfg.kind;
    switch (cfg.kind) {
        case ExperimentKind::consistency:
        case ExperimentKind::rate: {
            const std::uint64_t tasks = cfg.n_list.size() * cfg.replicates;
            rep.rows.resize(tasks);
            dispatch_indexed(tasks, cfg.threads, [&](std::uint64_t i) {
                const std::uint64_t n = cfg.n_list[i / cfg.replicates];
                const std::uint64_t r = i % cfg.replicates;
                rep.rows[i] = run_fit_task(cfg, n, r);
            });
            for (const auto& r : rep.rows)
                if (!r.ok) ++rep.failures;
            rep.failure_fraction =
                tasks ? static_cast<double>(rep.failures) / tasks : 0.0;
            aggregate_fit(cfg, rep);
            break;
        }
        case ExperimentKind::trace_limits:
            run_trace_limits(cfg, rep);
            break;
        case ExperimentKind::divergence_properties: {
            ExperimentReport inner = validate_properties(cfg.seed, cfg.case_count);
            rep.property_rows = std::move(inner.property_rows);
            rep.violations = inner.violations;
            rep.regime_cases = inner.regime_cases;
            break;
        }
    }
    rep.total_runtime_s = now_s() - t0;

    {
        std::ofstream os(std::filesystem::path(cfg.out_dir) / "report.csv");
        if (!os) throw domain_error("cannot write report.csv in " + cfg.out_dir);
        write_report_csv(os, rep);
    }
    {
        std::ofstream os(std::filesystem::path(cfg.out_dir) / "summary.json");
        if (!os) throw domain_error("cannot write summary.json in " + cfg.out_dir);
        write_summary_json(os, cfg, rep);
    }
    return rep;
}

void write_report_csv(std::ostream& os, const ExperimentReport& report) {
    switch (report.kind) {
        case ExperimentKind::consistency:
        case ExperimentKind::rate: {
            os << "n,rep,ok,status,d_hat,abs_err_d,l_fhat,l_fhat2,h_fhat2,"
                  "prob_gt_005,prob_gt_01,prob_gt_025,ess_d\n";
            for (const auto& r : report.rows) {
                os << r.n << ',' << r.rep << ',' << (r.ok ? 1 : 0) << ','
                   << csv_quote(r.status) << ',' << fmt(r.d_hat) << ','
                   << fmt(r.abs_err_d) << ',' << fmt(r.l_fhat) << ','
                   << fmt(r.l_fhat2) << ',' << fmt(r.h_fhat2) << ','
                   << fmt(r.prob_gt_005) << ',' << fmt(r.prob_gt_01) << ','
                   << fmt(r.prob_gt_025) << ',' << fmt(r.ess_d) << '\n';
            }
            break;
        }
        case ExperimentKind::trace_limits: {
            os << "pair,n,trace_value,trace_limit,trace_gap,kl_value,kl_limit,"
                  "kl_gap\n";
            for (const auto& r : report.trace_rows) {
                os << r.pair << ',' << r.n << ',' << fmt(r.trace_value) << ','
                   << fmt(r.trace_limit) << ',' << fmt(r.trace_gap) << ','
                   << fmt(r.kl_value) << ',' << fmt(r.kl_limit) << ','
                   << fmt(r.kl_gap) << '\n';
            }
            break;
        }
        case ExperimentKind::divergence_properties: {
            os << "case,d0,k0,d1,k1,h,l,b,bh_in_regime,holds_hl,holds_bh,"
                  "holds_nonneg,holds_scaling,ok,status\n";
            for (const auto& r : report.property_rows) {
                os << r.case_id << ',' << fmt(r.d0) << ',' << r.k0 << ','
                   << fmt(r.d1) << ',' << r.k1 << ',' << fmt(r.h) << ','
                   << fmt(r.l) << ',' << fmt(r.b) << ',' << (r.bh_in_regime ? 1 : 0)
                   << ',' << (r.holds_hl ? 1 : 0) << ',' << (r.holds_bh ? 1 : 0)
                   << ',' << (r.holds_nonneg ? 1 : 0) << ','
                   << (r.holds_scaling ? 1 : 0) << ',' << (r.ok ? 1 : 0) << ','
                   << csv_quote(r.status) << '\n';
            }
            break;
        }
    }
}

void write_summary_json(std::ostream& os, const ExperimentConfig& cfg,
                        const ExperimentReport& report) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(report.kind);
    j["seed"] = cfg.seed;
    j["n_list"] = cfg.n_list;
    j["replicates"] = cfg.replicates;
    j["failures"] = report.failures;
    j["failure_fraction"] = report.failure_fraction;
    j["exit_code"] = report.exit_code();

    if (report.kind == ExperimentKind::consistency ||
        report.kind == ExperimentKind::rate) {
        nlohmann::ordered_json pn = nlohmann::ordered_json::array();
        for (const auto& s : report.per_n) {
            nlohmann::ordered_json e;
            e["n"] = s.n;
            e["ok_count"] = s.ok_count;
            e["median_abs_err_d"] = s.median_abs_err_d;
            e["median_l_fhat"] = s.median_l_fhat;
            e["median_l_fhat2"] = s.median_l_fhat2;
            e["median_h_fhat2"] = s.median_h_fhat2;
            e["median_prob_gt_005"] = s.median_prob_gt_005;
            e["median_prob_gt_01"] = s.median_prob_gt_01;
            e["median_prob_gt_025"] = s.median_prob_gt_025;
            e["mean_ess_d"] = s.mean_ess_d;
            pn.push_back(std::move(e));
        }
        j["per_n"] = std::move(pn);
        j["slope_log_median_l_vs_log_n"] = report.slope_log_l;
        j["monotone_median_abs_err_d"] = report.monotone_median_abs_err;
        if (!report.per_n.empty()) {
            j["final_median_abs_err_d"] = report.per_n.back().median_abs_err_d;
            j["final_median_prob_gt_025"] = report.per_n.back().median_prob_gt_025;
        }
        nlohmann::ordered_json times = nlohmann::ordered_json::array();
        for (const auto& r : report.rows) times.push_back(r.runtime_s);
        j["timings"] = {{"total_s", report.total_runtime_s},
                        {"per_row_s", std::move(times)}};
    } else if (report.kind == ExperimentKind::trace_limits) {
        nlohmann::ordered_json ts = nlohmann::ordered_json::array();
        for (const auto& s : report.trace_summary) {
            nlohmann::ordered_json e;
            e["pair"] = s.pair;
            e["monotone_trace_gap"] = s.monotone_trace_gap;
            e["monotone_kl_gap"] = s.monotone_kl_gap;
            ts.push_back(std::move(e));
        }
        j["trace"] = std::move(ts);
        j["timings"] = {{"total_s", report.total_runtime_s}};
    } else {
        j["properties"] = {{"cases", report.property_rows.size()},
                           {"violations", report.violations},
                           {"regime_cases", report.regime_cases}};
        j["timings"] = {{"total_s", report.total_runtime_s}};
    }
    os << j.dump(2) << '\n';
}

std::vector<double> read_series_csv_row(const std::string& path, std::size_t row) {
    std::ifstream is(path);
    if (!is) throw domain_error("cannot open series file: " + path);
    std::string line;
    std::size_t seen = 0;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (seen++ != row) continue;
        std::vector<double> out;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str())
                throw domain_error("bad number in series file: '" + cell + "'");
            out.push_back(v);
        }
        return out;
    }
    throw domain_error("series file has no row " + std::to_string(row));
}

}  // namespace fexpbayes
