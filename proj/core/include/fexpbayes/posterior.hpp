#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fexpbayes/prior.hpp"
#include "fexpbayes/spectral.hpp"

namespace fexpbayes {

// Trans-dimensional Metropolis-Hastings settings. Each sweep applies four
// moves in order: (a) random walk on d through a scaled logit map, (b) a
// ridge shear d -> d + delta, theta_j -> theta_j - 2 delta / j that follows
// the near-flat direction created by the cepstral expansion of the pole
// factor, (c) a joint random walk on theta, (d) one birth or death step
// changing K by one. Under the weighted-sphere prior the birth coordinate
// is drawn from a centered normal whose scale matches the prior marginal at
// that index. Under the simplex prior the density is unbounded near every
// face (V_j^{alpha_j - 1} with alpha_j < 1), which a normal increment can
// neither reach nor leave, so dimension steps instead use the
// stick-breaking conditional: W ~ Beta(alpha_{K+1}, sum_{j<=K} alpha_j),
// theta_j -> (1-W) theta_j, |theta_{K+1}| = S W/(K+1) with a fresh sign;
// the K = 0 <-> 1 step proposes S from its own prior law. The Beta factors
// cancel the target's face singularities in the acceptance ratio, and the
// theta walk moves the j >= 1 coordinates on the log scale for the same
// reason. Step sizes adapt toward the target rates during burn-in only.
struct SamplerConfig {
    std::uint64_t iterations = 4000;  // total sweeps
    std::uint64_t burn_in = 1000;
    std::uint64_t thin = 2;
    double step_d = 0.5;       // logit-space sd
    double step_ridge = 0.1;   // shear sd in d units
    double step_theta = 1.0;   // global factor on per-coordinate scales
    double birth_rate = 0.5;   // probability the dimension step is a birth
    std::uint64_t adapt_window = 50;  // gain horizon: g_i = (1 + i/window)^-0.6
    double target_scalar = 0.44;
    double target_block = 0.23;
    int k_max = 30;
    std::uint64_t seed = 1;
    bool prior_only = false;  // drop the likelihood term (invariance checks)
    // population Monte Carlo mode: accepted in configs for forward
    // compatibility, not implemented by this sampler
    bool pmc_enabled = false;
    std::uint64_t pmc_population = 0;
    std::uint64_t pmc_rounds = 0;

    void validate() const;  // throws domain_error on inconsistent settings
};

struct MoveStats {
    std::string name;
    std::uint64_t proposed = 0;
    std::uint64_t accepted = 0;
    double final_step = 0.0;  // 0 for moves without a tunable step

    double acceptance() const {
        return proposed ? static_cast<double>(accepted) / proposed : 0.0;
    }
};

struct PosteriorSamples {
    std::vector<FexpParams> draws;        // post burn-in, thinned
    std::vector<std::uint64_t> iters;     // sweep index of each draw
    std::vector<double> log_posterior;    // unnormalized, aligned with draws
    std::vector<MoveStats> moves;
    std::map<int, std::uint64_t> k_counts;
    double ess_d = 0.0;
    std::uint64_t likelihood_failures = 0;

    std::vector<double> d_values() const;
};

struct MeanResult {
    double value = 0.0;
    double se = 0.0;  // autocorrelation-adjusted Monte Carlo error
};

// Runs the chain against the exact Gaussian likelihood of x (zero-mean
// model) times the prior. Likelihood failures reject the move and are
// counted, never thrown. Deterministic given cfg.seed.
PosteriorSamples run_mcmc(std::span<const double> x, const PriorSpec& prior,
                          const SamplerConfig& cfg);

// The sampler's target at a point: log prior + exact Gaussian log-likelihood
// (the latter dropped when prior_only). -infinity off the prior support.
double log_unnormalized_posterior(std::span<const double> x, const PriorSpec& prior,
                                  const FexpParams& params, bool prior_only = false);

MeanResult estimate_d(const PosteriorSamples& s);

// Mean of d and of theta (zero-padded to the largest K seen); by linearity
// of log f in (d, theta) this point evaluates the log-loss estimator.
FexpParams posterior_mean_params(const PosteriorSamples& s);

// exp of the pointwise posterior mean of log f
std::vector<double> estimate_f_log(const PosteriorSamples& s,
                                   std::span<const double> grid);

// pointwise sqrt(E[f] / E[1/f])
std::vector<double> estimate_f_h(const PosteriorSamples& s,
                                 std::span<const double> grid);

MeanResult posterior_prob(const PosteriorSamples& s,
                          const std::function<bool(const FexpParams&)>& pred);

// Whittle approximation -sum_j [log f(l_j) + I(l_j)/f(l_j)] over Fourier
// frequencies l_j = 2 pi j / n, 1 <= j <= floor((n-1)/2), with periodogram
// I(l) = |sum_t x_t e^{-i t l}|^2 / (2 pi n). Additive constants that do
// not involve f are dropped.
double whittle_loglik(std::span<const double> x, const SpectralFn& f);

// columns: iter, K, d, theta_0..theta_Kmax (short rows padded empty),
// log_posterior
void write_samples_csv(std::ostream& os, const PosteriorSamples& s);

}  // namespace fexpbayes
