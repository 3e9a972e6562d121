#pragma once

#include <cstddef>

#include "fexpbayes/spectral.hpp"

namespace fexpbayes {

// Constant conventions for the integral divergences. szego normalizes so
// the value is the n -> infinity limit of the matching matrix form below;
// paper applies the larger constants common in the long-memory literature
// (4x the limit for the KL form, 2x for the symmetrized form).
enum class ConstantMode { szego, paper };

// Matrix forms, built from T_n(.) factorizations (exact trace path, so n is
// capped; see kTraceExactCap):
//   kl_n = (1/2n) [ tr(T(f0) T(f)^{-1}) - n - log det(T(f0) T(f)^{-1}) ]
//   h_n  = kl_n(f0; f) + kl_n(f; f0)
//   d_n  = min of the two kl_n orientations
//   b_n  = (1/n) tr( (I - T(f0) T(f)^{-1})^2 )
double kl_n(const SpectralFn& f0, const SpectralFn& f, std::size_t n);
double h_n(const SpectralFn& f0, const SpectralFn& f, std::size_t n);
double d_n(const SpectralFn& f0, const SpectralFn& f, std::size_t n);
double b_n(const SpectralFn& f0, const SpectralFn& f, std::size_t n);

struct DivergenceReport {
    std::size_t n = 0;
    double kl_fwd = 0.0;  // kl_n(f0; f)
    double kl_rev = 0.0;  // kl_n(f; f0)
    double h = 0.0;
    double d = 0.0;
    double b = 0.0;
};
// one pass sharing the factorizations
DivergenceReport divergence_report_n(const SpectralFn& f0, const SpectralFn& f,
                                     std::size_t n);

// Integral forms. All integrands are written in terms of the log ratio
// x = log f0 - log f for numerical stability:
//   kl integrand  e^x - 1 - x
//   h  integrand  e^x + e^{-x} - 2 = 4 sinh^2(x/2)
//   b  integrand  (e^x - 1)^2
// kl_int throws when f0/f is not integrable (memory(f0) - memory(f) >= 1/2);
// h_int when |memory gap| >= 1/2; b_int when 4*(memory gap) >= 1. Accuracy
// degrades as the gap approaches those walls.
double kl_int(const SpectralFn& f0, const SpectralFn& f,
              ConstantMode mode = ConstantMode::szego);
double h_int(const SpectralFn& f0, const SpectralFn& f,
             ConstantMode mode = ConstantMode::szego);
double b_int(const SpectralFn& f0, const SpectralFn& f);

// integral of (log f - log f')^2 over [-pi, pi]
double log_l2(const SpectralFn& f, const SpectralFn& fp);
// closed form for two exponential-model members
double log_l2_fexp(const FexpParams& a, const FexpParams& b);

// b(f, f0) <= h(f, f0) |log h(f, f0)| with h in ConstantMode::paper. in_regime
// is false when h >= threshold or when h is numerically 0 (where the bound
// is vacuous); holds is reported regardless.
struct BHCheck {
    double b = 0.0;
    double h = 0.0;
    bool in_regime = false;
    bool holds = true;
};
BHCheck check_b_h_inequality(const SpectralFn& f, const SpectralFn& f0,
                             double threshold = 0.05);

}  // namespace fexpbayes
