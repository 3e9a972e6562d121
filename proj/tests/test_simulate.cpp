#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <vector>

#include "fexpbayes/autocov.hpp"
#include "fexpbayes/errors.hpp"
#include "fexpbayes/experiment.hpp"
#include "fexpbayes/simulate.hpp"
#include "fexpbayes/stats.hpp"

using namespace fexpbayes;

namespace {

SimRequest request(std::size_t n, std::size_t reps, std::uint64_t seed,
                   SimMethod m = SimMethod::automatic) {
    SimRequest r;
    r.n = n;
    r.replicates = reps;
    r.seed = seed;
    r.method = m;
    return r;
}

// mean over replicates of the per-series lag-tau product average, plus the
// Monte Carlo standard error of that mean
std::pair<double, double> lag_product(const SimResult& sim, std::size_t tau) {
    std::vector<double> per_rep(sim.replicates);
    for (std::size_t r = 0; r < sim.replicates; ++r) {
        const auto x = sim.row(r);
        double s = 0.0;
        for (std::size_t t = 0; t + tau < sim.n; ++t) s += x[t] * x[t + tau];
        per_rep[r] = s / static_cast<double>(sim.n - tau);
    }
    const double m = mean(per_rep);
    const double se = std::sqrt(variance(per_rep) / per_rep.size());
    return {m, se};
}

}  // namespace

TEST_CASE("simulation is deterministic in the seed") {
    const SpectralFn f = SpectralFn::fexp(FexpParams(0.3, {0.1}));
    const SimResult a = simulate_gaussian(f, request(64, 3, 11));
    const SimResult b = simulate_gaussian(f, request(64, 3, 11));
    CHECK(a.data == b.data);
    const SimResult c = simulate_gaussian(f, request(64, 3, 12));
    CHECK(a.data != c.data);
}

TEST_CASE("replicate r depends only on (seed, r)") {
    const SpectralFn f = SpectralFn::fexp(FexpParams(0.2, {0.0, 0.1}));
    const SimResult many = simulate_gaussian(f, request(32, 4, 5));
    const SimResult one = simulate_gaussian(f, request(32, 1, 5));
    const auto r0 = many.row(0);
    const auto o0 = one.row(0);
    for (std::size_t t = 0; t < 32; ++t) CHECK(r0[t] == o0[t]);
    // distinct replicates are distinct streams
    const auto r1 = many.row(1);
    bool differ = false;
    for (std::size_t t = 0; t < 32; ++t) differ = differ || r0[t] != r1[t];
    CHECK(differ);
}

TEST_CASE("circulant draws reproduce the long memory covariances") {
    // d = 0.3 fractional noise with unit innovation variance
    const FexpParams p(0.3, {-std::log(2.0 * std::numbers::pi)});
    const std::vector<double> gamma = fractional_autocov(0.3, p.theta[0], 6);
    const SimResult sim =
        simulate_gaussian(SpectralFn::fexp(p), request(32, 4000, 2024, SimMethod::circulant));
    CHECK(sim.method_used == "circulant");
    CHECK(sim.embedding_size >= 31);
    for (std::size_t tau = 0; tau <= 3; ++tau) {
        const auto [m, se] = lag_product(sim, tau);
        INFO("tau = ", tau, " m = ", m, " want = ", gamma[tau], " se = ", se);
        CHECK(std::abs(m - gamma[tau]) < 5.0 * se);
    }
}

TEST_CASE("cholesky route agrees with the circulant route statistically") {
    const SpectralFn f = SpectralFn::fexp(FexpParams(0.25, {0.2}));
    const SimResult a = simulate_gaussian(f, request(16, 2000, 31, SimMethod::circulant));
    const SimResult b = simulate_gaussian(f, request(16, 2000, 47, SimMethod::cholesky));
    CHECK(b.method_used == "cholesky");
    CHECK(b.embedding_size == 0);
    const auto [ma, sa] = lag_product(a, 0);
    const auto [mb, sb] = lag_product(b, 0);
    CHECK(std::abs(ma - mb) < 5.0 * std::hypot(sa, sb));
}

TEST_CASE("unembeddable covariance falls back or fails by request") {
    // valid 3x3 Toeplitz sequence whose minimal circulant extension is
    // indefinite
    const AutocovSeq acov({1.0, 0.6, 0.0}, AutocovProvenance::analytic, 0.0);
    CHECK_THROWS_AS(simulate_gaussian(acov, request(3, 1, 1, SimMethod::circulant)),
                    embedding_failed);
    const SimResult fb = simulate_gaussian(acov, request(3, 1, 1));
    CHECK(fb.method_used == "cholesky");
    CHECK(fb.n == 3);
}

TEST_CASE("fixed covariance input must cover the requested length") {
    const AutocovSeq acov({1.0, 0.3}, AutocovProvenance::analytic, 0.0);
    CHECK_THROWS_AS(simulate_gaussian(acov, request(8, 1, 1)), domain_error);
    // exactly n lags: too short for any power-of-two embedding, so the
    // forced circulant route reports that, while automatic falls back
    const AutocovSeq tight(autocov_analytic(FexpParams(0.1, {0.0}), 8).gamma,
                           AutocovProvenance::analytic, 0.0);
    CHECK_THROWS_AS(simulate_gaussian(tight, request(8, 1, 1, SimMethod::circulant)),
                    embedding_failed);
    CHECK(simulate_gaussian(tight, request(8, 1, 1)).method_used == "cholesky");
}

TEST_CASE("series csv round-trips exactly") {
    const SpectralFn f = SpectralFn::fexp(FexpParams(-0.1, {0.3, -0.2}));
    const SimResult sim = simulate_gaussian(f, request(20, 3, 77));
    std::ostringstream os;
    write_series_csv(os, sim, "test model", 77);
    const std::string text = os.str();
    CHECK(text.find("# ") == 0);
    CHECK(text.find("seed=77") != std::string::npos);

    // write to a temp file and read rows back
    const std::string path = "test_simulate_roundtrip.csv";
    {
        std::ofstream file(path);
        file << text;
    }
    for (std::size_t r = 0; r < 3; ++r) {
        const std::vector<double> row = read_series_csv_row(path, r);
        REQUIRE(row.size() == 20);
        const auto want = sim.row(r);
        for (std::size_t t = 0; t < 20; ++t) CHECK(row[t] == want[t]);
    }
    CHECK_THROWS(read_series_csv_row(path, 3));
    CHECK_THROWS(read_series_csv_row("no_such_file.csv", 0));
    std::remove(path.c_str());
}

TEST_CASE("request validation") {
    const SpectralFn f = SpectralFn::fexp(FexpParams(0.1, {0.0}));
    CHECK_THROWS_AS(simulate_gaussian(f, request(0, 1, 1)), domain_error);
    CHECK_THROWS_AS(simulate_gaussian(f, request(8, 0, 1)), domain_error);
}

TEST_CASE("short memory white noise draws have unit variance") {
    // f constant 1/(2pi): gamma(0) = 1, gamma(tau != 0) = 0
    const FexpParams p(0.0, {-std::log(2.0 * std::numbers::pi)});
    const SimResult sim = simulate_gaussian(SpectralFn::fexp(p), request(64, 600, 8));
    const auto [m0, se0] = lag_product(sim, 0);
    CHECK(std::abs(m0 - 1.0) < 5.0 * se0);
    const auto [m1, se1] = lag_product(sim, 1);
    CHECK(std::abs(m1) < 5.0 * se1);
}
