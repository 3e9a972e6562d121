#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace fexpbayes {

// Exponential-model spectral density with a fractional pole at 0:
//   f(lambda) = |1 - e^{i lambda}|^{-2d} * exp(sum_{j=0}^{K} theta[j] cos(j lambda))
// on [-pi, pi]. d in (-1/2, 1/2). theta[0] sets the scale:
// sigma2() = 2*pi*exp(theta[0]) is the innovation variance of the d = 0,
// K = 0 member. Autocovariances use the convention
//   gamma(tau) = integral_{-pi}^{pi} f(lambda) e^{i tau lambda} d lambda.
struct FexpParams {
    double d = 0.0;
    std::vector<double> theta;  // theta[0..K], K = theta.size() - 1

    FexpParams(double d_, std::vector<double> theta_);
    int order() const { return static_cast<int>(theta.size()) - 1; }
    double sigma2() const;
};

double eval_fexp(const FexpParams& p, double lambda);
double log_fexp(const FexpParams& p, double lambda);

// Spectral density as a closed union: an explicit exponential-model member,
// or a power-law factor |lambda|^{-2d} times a smooth positive callback.
// Scaling by a positive constant stays inside the union.
class SpectralFn {
  public:
    static SpectralFn fexp(FexpParams p);
    static SpectralFn power_law_times_smooth(double d,
                                             std::function<double(double)> smooth);
    static SpectralFn scaled(double c, const SpectralFn& inner);

    double operator()(double lambda) const;
    double log_value(double lambda) const;

    // memory parameter d
    double memory() const { return d_; }
    // c0 = lim_{lambda->0} |lambda|^{2d} f(lambda)
    double smooth_at_zero() const;
    // non-null when this member is an explicit exponential model
    const FexpParams* as_fexp() const { return params_ ? params_.get() : nullptr; }

  private:
    SpectralFn() = default;
    double d_ = 0.0;
    std::shared_ptr<const FexpParams> params_;
    std::function<double(double)> smooth_;  // set iff params_ is null
};

// log f on a grid. Grid points must lie in [-pi, pi] and avoid 0 whenever
// d != 0; otherwise throws domain_error.
std::vector<double> log_spectrum_grid(const SpectralFn& f, std::span<const double> grid);

// Sobolev-type ball: sum_j theta_j^2 (1+j)^{2 beta} <= radius
struct SmoothnessClassSpec {
    double beta = 1.5;
    double radius = 10.0;
};
double class_weighted_norm(const FexpParams& p, double beta);
bool in_class_S(const FexpParams& p, const SmoothnessClassSpec& cls);

}  // namespace fexpbayes
