#include "fexpbayes/autocov.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fexpbayes/errors.hpp"
#include "fexpbayes/quadrature.hpp"

namespace fexpbayes {

namespace {
constexpr double kPi = std::numbers::pi;
}

AutocovSeq::AutocovSeq(std::vector<double> g, AutocovProvenance prov, double tol)
    : gamma(std::move(g)), provenance(prov), tol_achieved(tol) {
    if (gamma.empty()) throw domain_error("autocovariance sequence is empty");
    if (!(gamma[0] > 0.0)) throw domain_error("gamma(0) must be positive");
    const double slack = gamma[0] * (1.0 + 1e-10) + tol_achieved;
    for (double v : gamma) {
        if (!std::isfinite(v)) throw domain_error("autocovariance must be finite");
        if (std::abs(v) > slack)
            throw domain_error("|gamma(tau)| exceeds gamma(0)");
    }
}

std::vector<double> fractional_autocov(double d, double theta0, std::size_t n) {
    if (!(d > -0.5 && d < 0.5)) throw domain_error("d must lie in (-1/2, 1/2)");
    std::vector<double> g(n);
    if (n == 0) return g;
    const double sigma2 = 2.0 * kPi * std::exp(theta0);
    // gamma(0) = sigma2 * Gamma(1-2d) / Gamma(1-d)^2, then a two-term ratio
    // recursion in the lag
    g[0] = sigma2 * std::exp(std::lgamma(1.0 - 2.0 * d) - 2.0 * std::lgamma(1.0 - d));
    for (std::size_t t = 1; t < n; ++t) {
        const double td = static_cast<double>(t);
        g[t] = g[t - 1] * (td - 1.0 + d) / (td - d);
    }
    return g;
}

namespace {

// MA coefficients of exp(sum_{j>=1} (theta_j/2) z^j); super-exponentially
// decaying, truncated once 8 consecutive terms fall below 1e-18 * max.
std::vector<double> cepstral_weights(const std::vector<double>& theta) {
    const int K = static_cast<int>(theta.size()) - 1;
    std::vector<double> a{1.0};
    if (K < 1) return a;
    double amax = 1.0;
    int small_run = 0;
    const int cap = 16384;
    for (int k = 1; k < cap; ++k) {
        double s = 0.0;
        const int jmax = std::min(k, K);
        for (int j = 1; j <= jmax; ++j)
            s += j * (theta[j] / 2.0) * a[k - j];
        a.push_back(s / k);
        amax = std::max(amax, std::abs(a.back()));
        if (std::abs(a.back()) < 1e-18 * amax) {
            if (++small_run >= 8 && k > 2 * K) break;
        } else {
            small_run = 0;
        }
    }
    if (static_cast<int>(a.size()) >= cap)
        throw domain_error("cepstral expansion did not converge");
    return a;
}

}  // namespace

AutocovSeq autocov_analytic(const FexpParams& p, std::size_t n) {
    if (n == 0) throw domain_error("need n >= 1");
    const std::vector<double> a = cepstral_weights(p.theta);
    const std::size_t M = a.size();

    // Fourier coefficients of the squared modulus of the MA transfer
    std::vector<double> s(M);
    for (std::size_t m = 0; m < M; ++m) {
        double acc = 0.0;
        for (std::size_t k = 0; k + m < M; ++k) acc += a[k] * a[k + m];
        s[m] = acc;
    }
    std::size_t mcut = M;
    while (mcut > 1 && std::abs(s[mcut - 1]) < 1e-17 * std::abs(s[0])) --mcut;

    const std::vector<double> gd = fractional_autocov(p.d, p.theta[0], n + mcut + 1);
    const double gdmax = *std::max_element(gd.begin(), gd.end(),
        [](double x, double y) { return std::abs(x) < std::abs(y); });

    std::vector<double> g(n);
    for (std::size_t tau = 0; tau < n; ++tau) {
        double acc = s[0] * gd[tau];
        for (std::size_t m = 1; m < mcut; ++m) {
            const std::size_t lo = tau >= m ? tau - m : m - tau;
            acc += s[m] * (gd[lo] + gd[tau + m]);
        }
        g[tau] = acc;
    }

    // dropped-tail estimate; the cepstral tail decays far faster than
    // geometrically so this is loose in the safe direction
    double tail = 0.0;
    if (mcut < M) tail = std::abs(s[mcut]) * std::abs(gdmax) * 4.0;
    const double tol = std::max(tail, 8e-16 * std::abs(g[0]));
    return AutocovSeq(std::move(g), AutocovProvenance::analytic, tol);
}

namespace {

// W(tau, d) = integral_0^pi l^{-2d} cos(tau l) dl for tau = 1..tau_max,
// evaluated through G(x, 2d) = integral_0^x u^{-2d} cos u du at x = tau*pi:
// shared half-period panel integrals and prefix sums, then
// W(tau, d) = tau^{2d-1} G(tau pi, 2d).
std::vector<double> w_values(std::size_t tau_max, double d) {
    const double a = 2.0 * d;
    std::vector<double> P(std::max<std::size_t>(tau_max, 1));
    // P_0 = integral_0^pi u^{-a} cos u du by the alternating power series
    {
        double p0 = 0.0, fact = 1.0;
        for (int k = 0; k < 80; ++k) {
            if (k > 0) fact *= (2.0 * k - 1.0) * (2.0 * k);
            const double expo = 2.0 * k + 1.0 - a;
            const double term = ((k % 2 == 0) ? 1.0 : -1.0) *
                                std::pow(kPi, expo) / (fact * expo);
            p0 += term;
            if (std::abs(term) < 1e-18 * std::max(1.0, std::abs(p0)) && k > 3) break;
        }
        P[0] = p0;
    }
    const GaussLegendre& rule = gauss_legendre(20);
    for (std::size_t k = 1; k < tau_max; ++k) {
        const double lo = static_cast<double>(k) * kPi;
        const double hi = lo + kPi;
        double acc = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double u = 0.5 * (hi - lo) * rule.nodes[i] + 0.5 * (hi + lo);
            acc += rule.weights[i] * std::pow(u, -a) * std::cos(u);
        }
        P[k] = 0.5 * (hi - lo) * acc;
    }
    std::vector<double> W(tau_max + 1, 0.0);
    double G = 0.0;
    for (std::size_t tau = 1; tau <= tau_max; ++tau) {
        G += P[tau - 1];
        W[tau] = std::pow(static_cast<double>(tau), a - 1.0) * G;
    }
    return W;
}

}  // namespace

AutocovSeq autocov_quadrature(const SpectralFn& f, std::size_t n, double tol) {
    if (n == 0) throw domain_error("need n >= 1");
    if (!(tol > 0.0)) throw domain_error("tol must be positive");
    const double d = f.memory();
    const double c0 = f.smooth_at_zero();

    // residual after removing the power-law part; stable near 0
    std::function<double(double)> resid;
    if (const FexpParams* p = f.as_fexp()) {
        const FexpParams params = *p;
        resid = [params, c0](double l) {
            // q = 2d log(l / (2 sin(l/2))) + sum_j theta_j (cos(j l) - 1)
            double q = 0.0;
            const double sl = 2.0 * std::sin(l / 2.0);
            q += 2.0 * params.d * (-std::log1p((sl - l) / l));
            for (std::size_t j = 1; j < params.theta.size(); ++j) {
                const double half = 0.5 * static_cast<double>(j) * l;
                q += params.theta[j] * (-2.0 * std::sin(half) * std::sin(half));
            }
            return c0 * std::pow(l, -2.0 * params.d) * std::expm1(q);
        };
    } else {
        resid = [&f, d, c0](double l) {
            return std::pow(l, -2.0 * d) * (f(l) * std::pow(l, 2.0 * d) - c0);
        };
    }

    const std::vector<double> W = w_values(n > 1 ? n - 1 : 1, d);
    const double w0 = std::pow(kPi, 1.0 - 2.0 * d) / (1.0 - 2.0 * d);

    std::vector<double> g(n);
    double worst = 0.0;
    for (std::size_t tau = 0; tau < n; ++tau) {
        std::vector<double> breaks;
        double x = kPi;
        for (int k = 0; k <= 50; ++k) {
            breaks.push_back(x);
            x *= 0.5;
        }
        for (std::size_t j = 1; j < tau; ++j)
            breaks.push_back(static_cast<double>(j) * kPi / static_cast<double>(tau));
        const double td = static_cast<double>(tau);
        auto integrand = [&resid, td](double l) { return resid(l) * std::cos(td * l); };
        const QuadResult r = integrate_adaptive(integrand, breaks, tol / 4.0);
        const double wv = (tau == 0) ? w0 : W[tau];
        g[tau] = 2.0 * (r.value + c0 * wv);
        worst = std::max(worst, 2.0 * r.error_estimate + 1e-14 * std::abs(c0 * wv));
        if (2.0 * r.error_estimate > tol)
            throw quadrature_error("autocovariance tolerance not met at lag " +
                                   std::to_string(tau));
    }
    return AutocovSeq(std::move(g), AutocovProvenance::quadrature, worst);
}

AutocovSeq autocov(const SpectralFn& f, std::size_t n, double tol) {
    if (const FexpParams* p = f.as_fexp()) {
        (void)tol;
        return autocov_analytic(*p, n);
    }
    return autocov_quadrature(f, n, tol);
}

}  // namespace fexpbayes
