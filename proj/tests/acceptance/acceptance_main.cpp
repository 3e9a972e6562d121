// Acceptance suite: one check per numbered criterion, each printing a
// single [PASS]/[FAIL] line. Exit status is the number of failures. The
// heavyweight consistency run (criteria 7-9) executes once and is shared.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fexpbayes/autocov.hpp"
#include "fexpbayes/divergences.hpp"
#include "fexpbayes/experiment.hpp"
#include "fexpbayes/posterior.hpp"
#include "fexpbayes/prior.hpp"
#include "fexpbayes/rng.hpp"
#include "fexpbayes/simulate.hpp"
#include "fexpbayes/stats.hpp"
#include "fexpbayes/toeplitz.hpp"
#include "support/oracles.hpp"

using namespace fexpbayes;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

FexpParams random_params(Rng& rng, double dmax) {
    const double d = rng.uniform(-dmax, dmax);
    const int k = static_cast<int>(rng.next_u64() % 4);
    std::vector<double> theta(k + 1);
    theta[0] = 0.5 * rng.normal();
    for (int j = 1; j <= k; ++j) theta[j] = 0.4 * rng.normal() / (1.0 + j);
    return FexpParams(d, std::move(theta));
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

// ---- criterion 1: Levinson paths vs dense factorization oracles ----------
Outcome criterion_1() {
    Rng rng(4001);
    const std::size_t sizes[] = {8, 32, 64, 256};
    int systems = 0;
    double worst = 0.0;
    for (int rep = 0; systems < 50; ++rep) {
        const std::size_t n = sizes[rep % 4];
        const FexpParams pf = random_params(rng, 0.42);
        const FexpParams pg = random_params(rng, 0.42);
        const AutocovSeq af = autocov_analytic(pf, n);
        const auto dense = oracles::toeplitz_dense(af.gamma, n);
        const auto l = oracles::cholesky(dense, n);

        const ToeplitzSolver lev = ToeplitzSolver::factor(af);
        const double ld_err = std::abs(lev.logdet() - oracles::chol_logdet(l, n)) /
                              std::max(1.0, std::abs(lev.logdet()));
        worst = std::max(worst, ld_err);

        std::vector<double> b(n);
        for (auto& v : b) v = rng.normal();
        const auto got = lev.solve(b);
        const auto want = oracles::chol_solve(l, n, b);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            num += (got[i] - want[i]) * (got[i] - want[i]);
            den += want[i] * want[i];
        }
        worst = std::max(worst, std::sqrt(num / std::max(1e-300, den)));

        double qf_want = 0.0;
        for (std::size_t i = 0; i < n; ++i) qf_want += b[i] * want[i];
        worst = std::max(worst, std::abs(lev.quadform(b) - qf_want) /
                                    std::max(1.0, std::abs(qf_want)));

        const double ll = gauss_loglik(af, b);
        const double ll_want = -0.5 * qf_want - 0.5 * oracles::chol_logdet(l, n) -
                               0.5 * n * std::log(2.0 * kPi);
        worst = std::max(worst, std::abs(ll - ll_want) / std::max(1.0, std::abs(ll_want)));

        if (n <= 64) {  // keep the dense trace oracle cheap
            const AutocovSeq ag = autocov_analytic(pg, n);
            const auto lg = oracles::cholesky(oracles::toeplitz_dense(ag.gamma, n), n);
            const auto prod = oracles::matmul(dense, oracles::inverse(lg, n), n);
            const double tr_want = oracles::trace(prod, n) / static_cast<double>(n);
            const double tr =
                trace_ratio(SpectralFn::fexp(pf), SpectralFn::fexp(pg), n).value;
            worst = std::max(worst, std::abs(tr - tr_want) / std::max(1.0, std::abs(tr_want)));
        }
        ++systems;
    }
    return {worst < 1e-8,
            "50 systems, worst relative error " + fmt(worst) + " (tol 1e-8)"};
}

// ---- criterion 2: closed-form divergence values ---------------------------
Outcome criterion_2() {
    const SpectralFn f = SpectralFn::fexp(FexpParams(0.3, {0.2, 0.3, -0.1}));
    double worst = 0.0;
    for (double c : {0.5, 2.0, 10.0}) {
        const SpectralFn cf = SpectralFn::scaled(c, f);
        const double kl_want = 0.5 * (1.0 / c - 1.0 + std::log(c));
        const double b_want = (1.0 / c - 1.0) * (1.0 / c - 1.0);
        for (std::size_t n : {8u, 64u, 256u}) {
            worst = std::max(worst, std::abs(kl_n(f, cf, n) - kl_want));
            worst = std::max(worst, std::abs(b_n(f, cf, n) - b_want));
        }
        FexpParams pc = *f.as_fexp();
        pc.theta[0] += std::log(c);
        const double l_want = 2.0 * kPi * std::log(c) * std::log(c);
        worst = std::max(worst, std::abs(log_l2_fexp(*f.as_fexp(), pc) - l_want));
    }
    return {worst < 1e-10, "worst absolute gap " + fmt(worst) + " (tol 1e-10)"};
}

// ---- criterion 3: kl_n converges monotonically to the integral limit ------
Outcome criterion_3() {
    ExperimentConfig cfg = experiment_preset("trace-limits");
    cfg.out_dir = (std::filesystem::temp_directory_path() / "fexp_acc_c3").string();
    const ExperimentReport rep = run_experiment(cfg);
    int bad = 0;
    std::ostringstream detail;
    for (const auto& s : rep.trace_summary) {
        if (!s.monotone_kl_gap || !s.monotone_trace_gap) {
            ++bad;
            detail << " pair " << s.pair;
        }
    }
    std::filesystem::remove_all(cfg.out_dir);
    if (bad) return {false, "non-monotone gap for" + detail.str()};
    return {true, "5 pairs, |kl_n - limit| and |trace_n - limit| monotone over n = 64..512"};
}

// ---- criterion 4: inequality properties over random pairs -----------------
Outcome criterion_4() {
    const ExperimentReport rep = validate_properties(7, 200);
    std::size_t hl_bad = 0, bh_bad = 0, regime = 0;
    for (const auto& r : rep.property_rows) {
        if (!r.holds_hl) ++hl_bad;
        if (r.bh_in_regime) {
            ++regime;
            if (!r.holds_bh) ++bh_bad;
        }
    }
    const bool pass = hl_bad == 0 && bh_bad == 0 && rep.violations == 0 && regime > 0;
    return {pass, "200 pairs: h >= l/2pi violations " + std::to_string(hl_bad) +
                      ", small-h cases " + std::to_string(regime) +
                      ", b <= h|log h| violations " + std::to_string(bh_bad)};
}

// ---- criterion 5: simulator covariances at Monte Carlo scale --------------
Outcome criterion_5() {
    const FexpParams p(0.3, {-std::log(2.0 * kPi)});
    const std::vector<double> gamma = fractional_autocov(0.3, p.theta[0], 6);
    SimRequest req;
    req.n = 32;
    req.replicates = 100000;
    req.seed = 5005;
    req.method = SimMethod::circulant;
    const SimResult sim = simulate_gaussian(SpectralFn::fexp(p), req);

    double worst_z = 0.0;
    int worst_tau = -1;
    for (std::size_t tau = 0; tau <= 5; ++tau) {
        std::vector<double> per_rep(sim.replicates);
        for (std::size_t r = 0; r < sim.replicates; ++r) {
            const auto x = sim.row(r);
            double s = 0.0;
            for (std::size_t t = 0; t + tau < sim.n; ++t) s += x[t] * x[t + tau];
            per_rep[r] = s / static_cast<double>(sim.n - tau);
        }
        const double m = mean(per_rep);
        const double se = std::sqrt(variance(per_rep) / per_rep.size());
        const double z = std::abs(m - gamma[tau]) / se;
        if (z > worst_z) {
            worst_z = z;
            worst_tau = static_cast<int>(tau);
        }
    }
    return {worst_z < 5.0, "1e5 draws at n = 32: worst |z| " + fmt(worst_z) +
                               " at lag " + std::to_string(worst_tau) + " (tol 5)"};
}

// ---- criterion 6: prior-only sampler invariance ----------------------------
Outcome criterion_6() {
    std::ostringstream detail;
    bool pass = true;
    for (PriorVariant v : {PriorVariant::fexp_beta, PriorVariant::dirichlet_fexp}) {
        PriorSpec prior;
        prior.variant = v;
        SamplerConfig cfg;
        cfg.iterations = 152000;
        cfg.burn_in = 2000;
        cfg.thin = 10;
        cfg.seed = 606;
        cfg.prior_only = true;
        const PosteriorSamples ps = run_mcmc({}, prior, cfg);

        const int bins = 10;
        std::vector<double> counts(bins, 0.0);
        for (const auto& pr : ps.draws) {
            const double u = (pr.d - prior.d_lo()) / (prior.d_hi() - prior.d_lo());
            counts[std::min(bins - 1, static_cast<int>(u * bins))] += 1.0;
        }
        const GofResult gof_d = chi2_gof(counts, std::vector<double>(bins, 1.0 / bins));

        std::vector<double> kc(9, 0.0);
        for (const auto& pr : ps.draws) kc[std::min(pr.order(), 8)] += 1.0;
        std::vector<double> expect(9);
        double tail = 1.0;
        for (int k = 0; k < 8; ++k) {
            expect[k] = std::exp(-prior.mu + k * std::log(prior.mu) -
                                 std::lgamma(k + 1.0));
            tail -= expect[k];
        }
        expect[8] = tail;
        const GofResult gof_k = chi2_gof(kc, expect);

        const bool ok = gof_d.p_value > 0.01 && gof_k.p_value > 0.01 &&
                        ps.ess_d >= 10000.0;
        pass = pass && ok;
        detail << " " << to_string(v) << ": d p = " << fmt(gof_d.p_value)
               << ", K p = " << fmt(gof_k.p_value) << ", ess " << fmt(ps.ess_d)
               << ";";
    }
    return {pass, "chi-square vs prior marginals (need p > 0.01, ess >= 1e4):" +
                      detail.str()};
}

// ---- criteria 7-9 share one consistency run --------------------------------
struct ConsistencyRuns {
    ExperimentReport first;
    std::string report_path_1, report_path_2;
};

ConsistencyRuns run_consistency_twice(const std::string& out_root) {
    ExperimentConfig cfg = experiment_preset("consistency");
    cfg.out_dir = out_root + "/run1";
    ConsistencyRuns out;
    out.first = run_experiment(cfg);
    out.report_path_1 = cfg.out_dir + "/report.csv";
    cfg.out_dir = out_root + "/run2";
    run_experiment(cfg);
    out.report_path_2 = cfg.out_dir + "/report.csv";
    return out;
}

Outcome criterion_7(const ExperimentReport& rep) {
    std::ostringstream detail;
    bool monotone = rep.monotone_median_abs_err;
    double final_err = std::numeric_limits<double>::quiet_NaN();
    double final_prob = std::numeric_limits<double>::quiet_NaN();
    for (const auto& s : rep.per_n) {
        detail << " n=" << s.n << ": med|d_hat-d0| = " << fmt(s.median_abs_err_d)
               << ", med P(|d-d0|>0.25) = " << fmt(s.median_prob_gt_025) << ";";
        if (s.n == 1024) {
            final_err = s.median_abs_err_d;
            final_prob = s.median_prob_gt_025;
        }
    }
    const bool pass = monotone && final_err <= 0.1 && final_prob <= 0.1 &&
                      rep.failures == 0;
    detail << " monotone = " << (monotone ? "yes" : "no") << ", failures = "
           << rep.failures;
    return {pass, detail.str()};
}

Outcome criterion_8(const ExperimentReport& rep) {
    const double slope = rep.slope_log_l;
    const bool pass = slope >= -1.2 && slope <= -0.2;
    return {pass, "log-log slope of median l(fhat, f0) vs n = " + fmt(slope) +
                      " (band [-1.2, -0.2])"};
}

Outcome criterion_9(const ConsistencyRuns& runs) {
    std::ifstream a(runs.report_path_1, std::ios::binary);
    std::ifstream b(runs.report_path_2, std::ios::binary);
    std::ostringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    const bool same = a.good() && b.good() && sa.str() == sb.str() &&
                      !sa.str().empty();
    return {same, same ? "repeated run produced byte-identical report.csv"
                       : "reports differ between identical runs"};
}

}  // namespace

int main(int argc, char** argv) {
    std::string out_root =
        (std::filesystem::temp_directory_path() / "fexp_acceptance").string();
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--out") == 0 && i + 1 < argc) {
            out_root = argv[++i];
        } else {
            selected.insert(std::atoi(argv[i]));
        }
    }
    std::filesystem::create_directories(out_root);

    const auto want = [&](int id) { return selected.empty() || selected.count(id); };
    int failures = 0;
    const auto report = [&](int id, const char* label, const Outcome& o,
                            double seconds) {
        std::cout << (o.pass ? "[PASS]" : "[FAIL]") << " criterion " << id << " ("
                  << label << ", " << fmt(seconds) << "s): " << o.detail << "\n";
        std::cout.flush();
        if (!o.pass) ++failures;
    };
    const auto run = [&](int id, const char* label, const std::function<Outcome()>& fn) {
        if (!want(id)) return;
        const double t0 = now_s();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = Outcome{false, std::string("exception: ") + e.what()};
        }
        report(id, label, o, now_s() - t0);
    };

    run(1, "solver oracle equivalence", criterion_1);
    run(2, "closed-form divergences", criterion_2);
    run(3, "matrix-to-integral limits", criterion_3);
    run(4, "divergence inequalities", criterion_4);
    run(5, "simulator exactness", criterion_5);
    run(6, "sampler prior invariance", criterion_6);

    if (want(7) || want(8) || want(9)) {
        const double t0 = now_s();
        ConsistencyRuns runs;
        bool ran = false;
        std::string err;
        try {
            runs = run_consistency_twice(out_root);
            ran = true;
        } catch (const std::exception& e) {
            err = e.what();
        }
        const double elapsed = now_s() - t0;
        if (!ran) {
            const Outcome o{false, "consistency run failed: " + err};
            if (want(7)) report(7, "posterior consistency", o, elapsed);
            if (want(8)) report(8, "loss rate trend", o, elapsed);
            if (want(9)) report(9, "byte-identical reruns", o, elapsed);
        } else {
            if (want(7)) report(7, "posterior consistency", criterion_7(runs.first), elapsed);
            if (want(8)) report(8, "loss rate trend", criterion_8(runs.first), 0.0);
            if (want(9)) report(9, "byte-identical reruns", criterion_9(runs), 0.0);
        }
    }

    std::cout << (failures ? "ACCEPTANCE: FAILED (" : "ACCEPTANCE: OK (")
              << failures << " failing)\n";
    return failures;
}
