#pragma once

#include <string>
#include <vector>

#include "fexpbayes/rng.hpp"
#include "fexpbayes/spectral.hpp"

namespace fexpbayes {

enum class PriorVariant { dirichlet_fexp, fexp_beta, point_mass };

// Hierarchical prior on (K, d, theta). Both proper variants put
// K ~ Poisson(mu) and d ~ Uniform[-1/2+t, 1/2-t].
//
// dirichlet_fexp: theta_0 ~ Normal(0, theta0_sd^2); given K >= 1,
//   S ~ bound_b * Beta(2,2), (V_1..V_K) ~ Dirichlet(alpha_j) with
//   alpha_j = alpha_scale * (1+j)^-2, and theta_j = sign_j * S * V_j / j
//   with iid Rademacher signs, so sum_{j>=1} j|theta_j| = S <= bound_b
//   by construction.
//
// fexp_beta: S ~ Uniform(0, bound_a); u uniform on the unit sphere in
//   R^(K+1); theta_j = S * u_j / max(1,j)^beta for j = 0..K, so
//   sum_j theta_j^2 max(1,j)^(2 beta) = S^2 <= bound_a^2.
//
// point_mass: degenerate at `point`; used to exercise the sampler with no
//   free coordinates.
struct PriorSpec {
    PriorVariant variant = PriorVariant::fexp_beta;
    double mu = 2.0;           // Poisson mean for K
    double t = 0.05;           // edge gap for d
    // dirichlet_fexp
    double bound_b = 5.0;      // bound on sum_j j|theta_j|
    double alpha_scale = 1.0;  // alpha_j = alpha_scale * (1+j)^-2
    double theta0_sd = 10.0;
    // fexp_beta
    double beta = 1.5;         // weight exponent
    double bound_a = 3.0;      // S in (0, bound_a)
    // point_mass
    FexpParams point = FexpParams(0.0, {0.0});

    double d_lo() const { return -0.5 + t; }
    double d_hi() const { return 0.5 - t; }
    void validate() const;  // throws domain_error on bad hyperparameters
};

struct PriorDraw {
    FexpParams params;
    double log_density = 0.0;  // always equals log_prior_density(spec, params)
};

PriorDraw sample_prior(const PriorSpec& spec, Rng& rng);

// Same draw with K held at k; the K-pmf term still enters log_density.
PriorDraw sample_prior_given_k(const PriorSpec& spec, int k, Rng& rng);

// Log density of (K, d, theta) w.r.t. counting measure on K and Lebesgue
// measure on (d, theta_0..theta_K); -infinity off the support. The theta
// block is evaluated by change of variables from the (scale, direction)
// coordinates, Jacobian included.
double log_prior_density(const PriorSpec& spec, const FexpParams& params);

// Approximate prior marginal standard deviation of theta_j (j >= 1); sets
// the scale of the sampler's birth proposal.
double prior_marginal_scale(const PriorSpec& spec, int j);

const char* to_string(PriorVariant v);
PriorVariant prior_variant_from_string(const std::string& s);

}  // namespace fexpbayes
