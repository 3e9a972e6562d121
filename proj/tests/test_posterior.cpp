#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "fexpbayes/errors.hpp"
#include "fexpbayes/posterior.hpp"
#include "fexpbayes/prior.hpp"
#include "fexpbayes/simulate.hpp"
#include "fexpbayes/stats.hpp"
#include "fexpbayes/toeplitz.hpp"

using namespace fexpbayes;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> white_noise(std::size_t n, std::uint64_t seed) {
    const FexpParams p(0.0, {-std::log(2.0 * kPi)});
    SimRequest req;
    req.n = n;
    req.replicates = 1;
    req.seed = seed;
    const SimResult sim = simulate_gaussian(SpectralFn::fexp(p), req);
    return {sim.row(0).begin(), sim.row(0).end()};
}

std::vector<double> long_memory_series(std::size_t n, std::uint64_t seed) {
    const FexpParams p(0.3, {-std::log(2.0 * kPi)});
    SimRequest req;
    req.n = n;
    req.replicates = 1;
    req.seed = seed;
    const SimResult sim = simulate_gaussian(SpectralFn::fexp(p), req);
    return {sim.row(0).begin(), sim.row(0).end()};
}

PriorSpec default_prior() {
    PriorSpec s;
    s.variant = PriorVariant::fexp_beta;
    return s;
}

SamplerConfig quick_config(std::uint64_t seed) {
    SamplerConfig c;
    c.iterations = 1200;
    c.burn_in = 400;
    c.thin = 2;
    c.seed = seed;
    return c;
}

PosteriorSamples hand_samples(std::vector<FexpParams> draws) {
    PosteriorSamples s;
    for (std::size_t i = 0; i < draws.size(); ++i) {
        s.iters.push_back(i);
        s.log_posterior.push_back(0.0);
    }
    s.draws = std::move(draws);
    return s;
}

}  // namespace

TEST_CASE("config validation rejects inconsistent settings") {
    SamplerConfig c;
    CHECK_NOTHROW(c.validate());
    c.burn_in = c.iterations;
    CHECK_THROWS_AS(c.validate(), domain_error);
    c = SamplerConfig{};
    c.thin = 0;
    CHECK_THROWS_AS(c.validate(), domain_error);
    c = SamplerConfig{};
    c.k_max = -1;
    CHECK_THROWS_AS(c.validate(), domain_error);
    c = SamplerConfig{};
    c.birth_rate = 1.5;
    CHECK_THROWS_AS(c.validate(), domain_error);
}

TEST_CASE("population mode is declared, not implemented") {
    SamplerConfig c = quick_config(1);
    c.pmc_enabled = true;
    c.pmc_population = 16;
    c.pmc_rounds = 4;
    const std::vector<double> x = white_noise(32, 1);
    CHECK_THROWS_AS(run_mcmc(x, default_prior(), c), not_implemented);
}

TEST_CASE("likelihood mode needs data") {
    SamplerConfig c = quick_config(1);
    const std::vector<double> x = {1.0};
    CHECK_THROWS_AS(run_mcmc(x, default_prior(), c), domain_error);
}

TEST_CASE("point mass prior yields a degenerate chain") {
    PriorSpec s;
    s.variant = PriorVariant::point_mass;
    s.point = FexpParams(0.2, {0.1, -0.05});
    SamplerConfig c = quick_config(3);
    const std::vector<double> x = white_noise(48, 3);
    const PosteriorSamples ps = run_mcmc(x, s, c);
    REQUIRE(!ps.draws.empty());
    for (const auto& p : ps.draws) {
        CHECK(p.d == 0.2);
        CHECK(p.theta == std::vector<double>{0.1, -0.05});
    }
    // mean and se accumulate in floating point, so allow rounding slack
    const MeanResult d = estimate_d(ps);
    CHECK(d.value == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(d.se <= 1e-12);
    CHECK(ps.k_counts.size() == 1);
    CHECK(ps.k_counts.at(1) == ps.draws.size());
}

TEST_CASE("sampling is deterministic in the seed") {
    const std::vector<double> x = long_memory_series(64, 17);
    const PosteriorSamples a = run_mcmc(x, default_prior(), quick_config(9));
    const PosteriorSamples b = run_mcmc(x, default_prior(), quick_config(9));
    REQUIRE(a.draws.size() == b.draws.size());
    for (std::size_t i = 0; i < a.draws.size(); ++i) {
        CHECK(a.draws[i].d == b.draws[i].d);
        CHECK(a.draws[i].theta == b.draws[i].theta);
        CHECK(a.log_posterior[i] == b.log_posterior[i]);
    }
    const PosteriorSamples c = run_mcmc(x, default_prior(), quick_config(10));
    CHECK(a.draws.front().d != c.draws.front().d);
}

TEST_CASE("stored log posterior recomputes at every retained draw") {
    const std::vector<double> x = long_memory_series(64, 23);
    const PriorSpec prior = default_prior();
    const PosteriorSamples ps = run_mcmc(x, prior, quick_config(4));
    REQUIRE(!ps.draws.empty());
    for (std::size_t i = 0; i < ps.draws.size(); ++i) {
        const double lp = log_unnormalized_posterior(x, prior, ps.draws[i]);
        CHECK(std::abs(lp - ps.log_posterior[i]) <= 1e-8 * std::max(1.0, std::abs(lp)));
    }
    CHECK(ps.likelihood_failures == 0);
}

TEST_CASE("retention bookkeeping matches the config") {
    SamplerConfig c = quick_config(6);
    const std::vector<double> x = white_noise(32, 6);
    const PosteriorSamples ps = run_mcmc(x, default_prior(), c);
    CHECK(ps.draws.size() == (c.iterations - c.burn_in + c.thin - 1) / c.thin);
    CHECK(ps.iters.size() == ps.draws.size());
    CHECK(ps.log_posterior.size() == ps.draws.size());
    for (std::size_t i = 0; i < ps.iters.size(); ++i) {
        CHECK(ps.iters[i] >= c.burn_in);
        if (i > 0) CHECK(ps.iters[i] - ps.iters[i - 1] == c.thin);
    }
    std::uint64_t total_k = 0;
    for (const auto& [k, cnt] : ps.k_counts) {
        CHECK(k >= 0);
        CHECK(k <= c.k_max);
        total_k += cnt;
    }
    CHECK(total_k == ps.draws.size());
    CHECK(ps.moves.size() == 5);
    for (const auto& m : ps.moves) CHECK(m.accepted <= m.proposed);
}

TEST_CASE("estimators on hand-built samples") {
    const PosteriorSamples s = hand_samples(
        {FexpParams(0.2, {0.1, 0.4}), FexpParams(0.4, {0.3})});
    const MeanResult d = estimate_d(s);
    CHECK(d.value == doctest::Approx(0.3).epsilon(1e-15));
    const FexpParams pm = posterior_mean_params(s);
    CHECK(pm.d == doctest::Approx(0.3));
    CHECK(pm.theta.size() == 2);
    CHECK(pm.theta[0] == doctest::Approx(0.2));
    CHECK(pm.theta[1] == doctest::Approx(0.2));  // zero-padded second draw

    const MeanResult pr = posterior_prob(s, [](const FexpParams& p) {
        return p.d > 0.3;
    });
    CHECK(pr.value == doctest::Approx(0.5));
    CHECK(pr.se > 0.0);
}

TEST_CASE("log loss and root ratio estimators coincide on two-point scale mixtures") {
    // draws f and c f: exp(mean log f) = sqrt(c) f and
    // sqrt(E f / E 1/f) = sqrt(c) f as well
    const double c = 4.0;
    const FexpParams base(0.1, {0.2, -0.1});
    FexpParams scaled = base;
    scaled.theta[0] += std::log(c);
    const PosteriorSamples s = hand_samples({base, scaled});
    const std::vector<double> grid = {0.3, 1.0, 2.2, 3.0};
    const std::vector<double> fl = estimate_f_log(s, grid);
    const std::vector<double> fh = estimate_f_h(s, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double want = std::sqrt(c) * eval_fexp(base, grid[i]);
        CHECK(fl[i] == doctest::Approx(want).epsilon(1e-12));
        CHECK(fh[i] == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("prior-only chain reproduces the prior marginals") {
    for (PriorVariant v : {PriorVariant::fexp_beta, PriorVariant::dirichlet_fexp}) {
        PriorSpec prior;
        prior.variant = v;
        SamplerConfig c;
        c.iterations = 42000;
        c.burn_in = 2000;
        c.thin = 10;
        c.seed = 1234;
        c.prior_only = true;
        const PosteriorSamples ps = run_mcmc({}, prior, c);
        REQUIRE(ps.draws.size() == 4000);

        // d uniform on the truncated interval
        const int bins = 8;
        std::vector<double> counts(bins, 0.0);
        for (const auto& p : ps.draws) {
            const double u = (p.d - prior.d_lo()) / (prior.d_hi() - prior.d_lo());
            counts[std::min(bins - 1, static_cast<int>(u * bins))] += 1.0;
        }
        const GofResult gof_d = chi2_gof(counts, std::vector<double>(bins, 1.0 / bins));
        INFO("variant ", to_string(v), " d chi2 = ", gof_d.statistic,
             " p = ", gof_d.p_value);
        CHECK(gof_d.p_value > 0.01);

        // K Poisson(mu)
        std::vector<double> kc(8, 0.0);
        for (const auto& p : ps.draws) kc[std::min(p.order(), 7)] += 1.0;
        std::vector<double> expect(8);
        double tail = 1.0;
        for (int k = 0; k < 7; ++k) {
            expect[k] = std::exp(-prior.mu + k * std::log(prior.mu) -
                                 std::lgamma(k + 1.0));
            tail -= expect[k];
        }
        expect[7] = tail;
        const GofResult gof_k = chi2_gof(kc, expect);
        INFO("variant ", to_string(v), " K chi2 = ", gof_k.statistic,
             " p = ", gof_k.p_value);
        CHECK(gof_k.p_value > 0.01);
    }
}

TEST_CASE("posterior concentrates near zero memory on white noise") {
    SamplerConfig c;
    c.iterations = 3000;
    c.burn_in = 1000;
    c.thin = 2;
    int hits = 0;
    const int reps = 6;
    for (int r = 0; r < reps; ++r) {
        c.seed = 100 + r;
        const std::vector<double> x = white_noise(256, 900 + r);
        const PosteriorSamples ps = run_mcmc(x, default_prior(), c);
        const double dh = estimate_d(ps).value;
        INFO("rep ", r, " d_hat = ", dh);
        if (std::abs(dh) < 0.12) ++hits;
    }
    CHECK(hits >= reps - 1);
}

TEST_CASE("whittle likelihood matches a brute force periodogram") {
    const std::vector<double> x = white_noise(40, 55);
    const std::size_t n = x.size();
    // f identically 1: whittle = -sum_j I_j
    double want = 0.0;
    for (std::size_t j = 1; j <= (n - 1) / 2; ++j) {
        const double lam = 2.0 * kPi * j / n;
        double re = 0.0, im = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            re += x[t] * std::cos(lam * t);
            im -= x[t] * std::sin(lam * t);
        }
        want -= (re * re + im * im) / (2.0 * kPi * n);
    }
    const SpectralFn unit = SpectralFn::fexp(FexpParams(0.0, {0.0}));
    CHECK(whittle_loglik(x, unit) == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("whittle scaling identity") {
    const std::vector<double> x = white_noise(64, 66);
    const std::size_t m = (x.size() - 1) / 2;
    const SpectralFn f = SpectralFn::fexp(FexpParams(0.1, {0.2, 0.1}));
    const double c = 3.0;
    const SpectralFn cf = SpectralFn::scaled(c, f);
    // W(c f) = W(f) - m log c + (1 - 1/c) sum_j I_j / f_j; recover the sum
    const double sum_if = -(whittle_loglik(x, f) + [&] {
        double s = 0.0;
        for (std::size_t j = 1; j <= m; ++j)
            s += std::log(f(2.0 * kPi * j / x.size()));
        return s;
    }());
    const double want = whittle_loglik(x, f) - m * std::log(c) +
                        (1.0 - 1.0 / c) * sum_if;
    CHECK(whittle_loglik(x, cf) == doctest::Approx(want).epsilon(1e-11));
}

TEST_CASE("whittle gap to the exact likelihood shrinks per observation") {
    const SpectralFn f1 = SpectralFn::fexp(FexpParams(0.25, {-1.5}));
    const SpectralFn f2 = SpectralFn::fexp(FexpParams(0.15, {-1.7, 0.1}));
    double prev_gap = 1e300;
    for (std::size_t n : {128u, 256u, 512u}) {
        const std::vector<double> x = long_memory_series(n, 7);
        const auto* p1 = f1.as_fexp();
        const auto* p2 = f2.as_fexp();
        const double exact_diff = gauss_loglik(autocov_analytic(*p1, n), x) -
                                  gauss_loglik(autocov_analytic(*p2, n), x);
        const double whittle_diff = whittle_loglik(x, f1) - whittle_loglik(x, f2);
        const double gap = std::abs(exact_diff - whittle_diff) / n;
        INFO("n = ", n, " per-obs gap = ", gap);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
}

TEST_CASE("samples csv has a stable rectangular schema") {
    const PosteriorSamples s = hand_samples(
        {FexpParams(0.2, {0.1}), FexpParams(0.3, {0.2, -0.1, 0.05})});
    std::ostringstream os;
    write_samples_csv(os, s);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header == "iter,K,d,theta_0,theta_1,theta_2,log_posterior");
    std::string row1, row2;
    std::getline(is, row1);
    std::getline(is, row2);
    // short draw is padded with empty cells
    CHECK(std::count(row1.begin(), row1.end(), ',') ==
          std::count(row2.begin(), row2.end(), ','));
}

TEST_CASE("adaptation settles acceptance near the targets") {
    const std::vector<double> x = long_memory_series(96, 31);
    SamplerConfig c;
    c.iterations = 4000;
    c.burn_in = 1500;
    c.thin = 2;
    c.seed = 77;
    const PosteriorSamples ps = run_mcmc(x, default_prior(), c);
    for (const auto& m : ps.moves) {
        if (m.name == "d_walk")
            CHECK(std::abs(m.acceptance() - c.target_scalar) < 0.15);
        if (m.name == "theta_block")
            CHECK(std::abs(m.acceptance() - c.target_block) < 0.12);
    }
    CHECK(ps.ess_d > 20.0);
}
