#include "fexpbayes/prior.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "fexpbayes/errors.hpp"

namespace fexpbayes {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_poisson_pmf(int k, double mu) {
    return -mu + k * std::log(mu) - std::lgamma(k + 1.0);
}

// log surface area of the unit sphere in R^dim
double log_sphere_area(int dim) {
    return std::numbers::ln2 + 0.5 * dim * std::log(std::numbers::pi) -
           std::lgamma(0.5 * dim);
}

double log_density_dirichlet_fexp(const PriorSpec& spec, const FexpParams& p) {
    const int k = p.order();
    double lp = log_poisson_pmf(k, spec.mu) - std::log(1.0 - 2.0 * spec.t);
    const double t0 = p.theta[0];
    lp += -0.5 * std::log(2.0 * std::numbers::pi) - std::log(spec.theta0_sd) -
          0.5 * t0 * t0 / (spec.theta0_sd * spec.theta0_sd);
    if (k == 0) return lp;

    // recover (S, V, signs) from theta; the simplex is open, so any
    // theta_j = 0 with j >= 1 is off the support
    double s = 0.0;
    for (int j = 1; j <= k; ++j) {
        if (p.theta[j] == 0.0) return kNegInf;
        s += j * std::abs(p.theta[j]);
    }
    if (!(s > 0.0) || !(s < spec.bound_b)) return kNegInf;

    // S ~ bound_b * Beta(2,2)
    const double x = s / spec.bound_b;
    lp += std::log(6.0) + std::log(x) + std::log1p(-x) - std::log(spec.bound_b);

    // V ~ Dirichlet(alpha), V_j = j|theta_j|/S
    double alpha_sum = 0.0;
    for (int j = 1; j <= k; ++j) {
        const double aj = spec.alpha_scale / ((1.0 + j) * (1.0 + j));
        alpha_sum += aj;
        lp -= std::lgamma(aj);
        lp += (aj - 1.0) * std::log(j * std::abs(p.theta[j]) / s);
    }
    lp += std::lgamma(alpha_sum);

    // signs and the (S, V_1..V_{K-1}) -> (theta_1..theta_K) Jacobian
    lp -= k * std::numbers::ln2;
    for (int j = 1; j <= k; ++j) lp += std::log(static_cast<double>(j));
    lp -= (k - 1) * std::log(s);
    return lp;
}

double log_density_fexp_beta(const PriorSpec& spec, const FexpParams& p) {
    const int k = p.order();
    double lp = log_poisson_pmf(k, spec.mu) - std::log(1.0 - 2.0 * spec.t);

    double s2 = 0.0;
    double sum_log_w = 0.0;
    for (int j = 0; j <= k; ++j) {
        const double w = j >= 1 ? std::pow(static_cast<double>(j), spec.beta) : 1.0;
        const double e = p.theta[j] * w;
        s2 += e * e;
        if (j >= 1) sum_log_w += std::log(w);
    }
    const double s = std::sqrt(s2);
    if (!(s > 0.0) || !(s < spec.bound_a)) return kNegInf;

    // S ~ Uniform(0, A); direction uniform on the sphere in R^(K+1); the
    // eta -> theta rescaling contributes +sum_j log w_j
    lp += -std::log(spec.bound_a) - log_sphere_area(k + 1) - k * std::log(s) +
          sum_log_w;
    return lp;
}

bool same_point(const FexpParams& a, const FexpParams& b) {
    if (a.d != b.d || a.theta.size() != b.theta.size()) return false;
    for (std::size_t i = 0; i < a.theta.size(); ++i)
        if (a.theta[i] != b.theta[i]) return false;
    return true;
}

FexpParams sample_given_k_impl(const PriorSpec& spec, int k, Rng& rng) {
    const double d = rng.uniform(spec.d_lo(), spec.d_hi());
    std::vector<double> theta(static_cast<std::size_t>(k) + 1, 0.0);
    if (spec.variant == PriorVariant::dirichlet_fexp) {
        theta[0] = spec.theta0_sd * rng.normal();
        if (k >= 1) {
            const double s = spec.bound_b * rng.beta(2.0, 2.0);
            std::vector<double> alpha(k);
            for (int j = 1; j <= k; ++j)
                alpha[j - 1] = spec.alpha_scale / ((1.0 + j) * (1.0 + j));
            const std::vector<double> v = rng.dirichlet(alpha);
            for (int j = 1; j <= k; ++j)
                theta[j] = rng.rademacher() * s * v[j - 1] / j;
        }
    } else {
        const double s = rng.uniform(0.0, spec.bound_a);
        std::vector<double> g(static_cast<std::size_t>(k) + 1);
        double norm2 = 0.0;
        for (auto& gi : g) {
            gi = rng.normal();
            norm2 += gi * gi;
        }
        const double norm = std::sqrt(norm2);
        for (int j = 0; j <= k; ++j) {
            const double w = j >= 1 ? std::pow(static_cast<double>(j), spec.beta) : 1.0;
            theta[j] = s * (g[j] / norm) / w;
        }
    }
    return FexpParams(d, std::move(theta));
}

}  // namespace

void PriorSpec::validate() const {
    if (variant == PriorVariant::point_mass) return;
    if (!(mu > 0.0)) throw domain_error("prior: need mu > 0");
    if (!(t > 0.0) || !(t < 0.5)) throw domain_error("prior: need 0 < t < 1/2");
    if (variant == PriorVariant::dirichlet_fexp) {
        if (!(bound_b > 0.0)) throw domain_error("prior: need bound_b > 0");
        if (!(alpha_scale > 0.0)) throw domain_error("prior: need alpha_scale > 0");
        if (!(theta0_sd > 0.0)) throw domain_error("prior: need theta0_sd > 0");
    } else {
        if (!(bound_a > 0.0)) throw domain_error("prior: need bound_a > 0");
        if (!(beta >= 0.0)) throw domain_error("prior: need beta >= 0");
    }
}

PriorDraw sample_prior(const PriorSpec& spec, Rng& rng) {
    spec.validate();
    if (spec.variant == PriorVariant::point_mass)
        return PriorDraw{spec.point, 0.0};
    const int k = rng.poisson(spec.mu);
    FexpParams p = sample_given_k_impl(spec, k, rng);
    const double lp = log_prior_density(spec, p);
    return PriorDraw{std::move(p), lp};
}

PriorDraw sample_prior_given_k(const PriorSpec& spec, int k, Rng& rng) {
    spec.validate();
    if (k < 0) throw domain_error("prior: need k >= 0");
    if (spec.variant == PriorVariant::point_mass)
        return PriorDraw{spec.point, 0.0};
    FexpParams p = sample_given_k_impl(spec, k, rng);
    const double lp = log_prior_density(spec, p);
    return PriorDraw{std::move(p), lp};
}

double log_prior_density(const PriorSpec& spec, const FexpParams& params) {
    switch (spec.variant) {
        case PriorVariant::point_mass:
            return same_point(params, spec.point) ? 0.0 : kNegInf;
        case PriorVariant::dirichlet_fexp:
        case PriorVariant::fexp_beta: {
            if (params.d < spec.d_lo() || params.d > spec.d_hi()) return kNegInf;
            return spec.variant == PriorVariant::dirichlet_fexp
                       ? log_density_dirichlet_fexp(spec, params)
                       : log_density_fexp_beta(spec, params);
        }
    }
    return kNegInf;
}

double prior_marginal_scale(const PriorSpec& spec, int j) {
    if (j < 1) throw domain_error("prior: marginal scale needs j >= 1");
    switch (spec.variant) {
        case PriorVariant::point_mass:
            return 1.0;
        case PriorVariant::dirichlet_fexp: {
            // rms of S is sqrt(0.3) B; E[V_j] is approximated by the
            // infinite-K limit alpha_j / sum_i alpha_i
            const double zeta = std::numbers::pi * std::numbers::pi / 6.0 - 1.0;
            const double ev = 1.0 / ((1.0 + j) * (1.0 + j)) / zeta;
            return std::sqrt(0.3) * spec.bound_b * ev / j;
        }
        case PriorVariant::fexp_beta: {
            // E[S^2] = A^2/3 and E[u_j^2] ~ 1/(j+1) at the typical dimension
            return spec.bound_a / std::sqrt(3.0 * (j + 1.0)) /
                   std::pow(static_cast<double>(j), spec.beta);
        }
    }
    return 1.0;
}

const char* to_string(PriorVariant v) {
    switch (v) {
        case PriorVariant::dirichlet_fexp: return "dirichlet_fexp";
        case PriorVariant::fexp_beta: return "fexp_beta";
        case PriorVariant::point_mass: return "point_mass";
    }
    return "?";
}

PriorVariant prior_variant_from_string(const std::string& s) {
    if (s == "dirichlet_fexp") return PriorVariant::dirichlet_fexp;
    if (s == "fexp_beta") return PriorVariant::fexp_beta;
    if (s == "point_mass") return PriorVariant::point_mass;
    throw domain_error("unknown prior variant: " + s);
}

}  // namespace fexpbayes
