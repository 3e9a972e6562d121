#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fexpbayes/autocov.hpp"
#include "fexpbayes/spectral.hpp"

namespace fexpbayes {

// Levinson-Durbin factorization of the symmetric Toeplitz matrix
// T[i][j] = gamma(|i-j|). Stores reflection coefficients and innovation
// variances only, so memory stays O(n); prediction coefficient rows are
// regenerated on the fly during solves. Factorization succeeds iff every
// innovation variance stays above 1e-13 * gamma(0), which certifies
// positive definiteness; otherwise not_positive_definite carries the
// failing order.
class ToeplitzSolver {
  public:
    static ToeplitzSolver factor(const AutocovSeq& acov);

    std::size_t order() const { return gamma_.size(); }
    double logdet() const { return logdet_; }
    double min_innovation() const { return min_innov_; }

    // T^{-1} b
    std::vector<double> solve(std::span<const double> b) const;
    // x' T^{-1} x; streaming, no solution vector is formed
    double quadform(std::span<const double> x) const;
    // x' T^{-1} y, symmetric in its arguments by construction
    double bilinear(std::span<const double> x, std::span<const double> y) const;

  private:
    ToeplitzSolver() = default;
    // walks the recursion, calling visit(k, e_k, v_k, phi) per step where
    // phi holds the order-k prediction coefficients phi[1..k]
    template <typename Visit>
    void walk(std::span<const double> b, Visit&& visit) const;

    std::vector<double> gamma_;
    std::vector<double> refl_;   // reflection coefficients, index 1..n-1
    std::vector<double> innov_;  // innovation variances v_0..v_{n-1}
    double logdet_ = 0.0;
    double min_innov_ = 0.0;
};

// exact Gaussian log likelihood of one stationary series under the
// covariance sequence acov:
//   -x' T^{-1} x / 2 - logdet(T)/2 - (n/2) log(2 pi)
double gauss_loglik(const AutocovSeq& acov, std::span<const double> x);

// T(gamma) x through a power-of-two circulant embedding and the FFT
std::vector<double> toeplitz_matvec(const AutocovSeq& acov, std::span<const double> x);

struct TraceResult {
    double value = 0.0;
    double std_error = 0.0;  // 0 in exact mode
};

enum class TraceMode { exact, stochastic };

// largest n the exact O(n^3) trace paths accept
inline constexpr std::size_t kTraceExactCap = 512;

// (1/n) tr( T_n(f) T_n(g)^{-1} ). Exact mode runs n solves; stochastic mode
// uses Rademacher probes and reports a Monte Carlo standard error.
TraceResult trace_ratio(const SpectralFn& f, const SpectralFn& g, std::size_t n,
                        TraceMode mode = TraceMode::exact, int probes = 64,
                        std::uint64_t seed = 0, double tol = 1e-10);

// (1/n) tr( prod_i T_n(f_i) T_n(g_i)^{-1} ), exact mode only
double trace_product(std::span<const SpectralFn> fs, std::span<const SpectralFn> gs,
                     std::size_t n, double tol = 1e-10);

}  // namespace fexpbayes
