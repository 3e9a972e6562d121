#pragma once

#include <functional>
#include <vector>

namespace fexpbayes {

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t evaluations = 0;
};

// Gauss-Legendre rule on [-1,1]; nodes and weights computed by Newton
// iteration and cached per order.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussLegendre& gauss_legendre(int order);

double gl_panel(const std::function<double(double)>& f, double a, double b,
                const GaussLegendre& rule);

// Adaptive quadrature: start from the given ordered breakpoints, bisect the
// worst panel until the summed error estimate drops below abs_tol or the
// panel budget is exhausted. Panel error is estimated by comparing rules of
// order 8 and 16.
QuadResult integrate_adaptive(const std::function<double(double)>& f,
                              std::vector<double> breaks, double abs_tol,
                              int max_panels = 4000);

// Integral over (0, b] for integrands with an integrable power-law blowup at
// 0 (|f| ~ c lambda^{-s}, s < 1). Geometric panels toward 0; the remaining
// mass below the smallest breakpoint is estimated by geometric-ratio
// extrapolation of the last panels and folded into value and error.
QuadResult integrate_singular0(const std::function<double(double)>& f, double b,
                               double abs_tol, int geo_panels = 240,
                               int max_panels = 6000);

}  // namespace fexpbayes
