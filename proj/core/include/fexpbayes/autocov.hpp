#pragma once

#include <cstddef>
#include <vector>

#include "fexpbayes/spectral.hpp"

namespace fexpbayes {

enum class AutocovProvenance { analytic, quadrature };

// Autocovariances gamma(0..n-1) of a stationary process with spectral
// density f, under gamma(tau) = integral_{-pi}^{pi} f(l) e^{i tau l} dl.
// Invariants checked at construction: gamma(0) > 0 and |gamma(tau)| <=
// gamma(0) up to roundoff slack. Positive definiteness of the implied
// Toeplitz matrices is certified later by a successful factorization.
struct AutocovSeq {
    std::vector<double> gamma;
    AutocovProvenance provenance = AutocovProvenance::analytic;
    double tol_achieved = 0.0;

    AutocovSeq(std::vector<double> g, AutocovProvenance prov, double tol);
    std::size_t lags() const { return gamma.size(); }
};

// Dispatches on the representation: exponential-model members take the exact
// series route; anything else integrates numerically. tol is an absolute
// tolerance per lag.
AutocovSeq autocov(const SpectralFn& f, std::size_t n, double tol = 1e-10);

// Exact route: fractional-difference autocovariances combined with the
// cepstral expansion of the smooth factor.
AutocovSeq autocov_analytic(const FexpParams& p, std::size_t n);

// Numerical route, usable for every representation; serves as an
// independent cross-check of the exact route.
AutocovSeq autocov_quadrature(const SpectralFn& f, std::size_t n, double tol = 1e-10);

// Autocovariances of the pure fractional-difference model with spectral
// density e^{theta0} |1 - e^{i l}|^{-2d}, lags 0..n-1.
std::vector<double> fractional_autocov(double d, double theta0, std::size_t n);

}  // namespace fexpbayes
