#include "fexpbayes/spectral.hpp"

#include <cmath>
#include <numbers>

#include "fexpbayes/errors.hpp"

namespace fexpbayes {

namespace {
constexpr double kPi = std::numbers::pi;

void check_lambda(double lambda) {
    if (!(std::abs(lambda) <= kPi + 1e-12))
        throw domain_error("lambda outside [-pi, pi]");
}
}  // namespace

FexpParams::FexpParams(double d_, std::vector<double> theta_)
    : d(d_), theta(std::move(theta_)) {
    if (!(d > -0.5 && d < 0.5)) throw domain_error("d must lie in (-1/2, 1/2)");
    if (theta.empty()) throw domain_error("theta must contain at least theta[0]");
    for (double t : theta)
        if (!std::isfinite(t)) throw domain_error("theta coefficients must be finite");
}

double FexpParams::sigma2() const { return 2.0 * kPi * std::exp(theta[0]); }

double log_fexp(const FexpParams& p, double lambda) {
    check_lambda(lambda);
    const double al = std::abs(lambda);
    if (al == 0.0 && p.d != 0.0)
        throw domain_error("log spectrum undefined at lambda = 0 when d != 0");
    double s = p.theta[0];
    for (std::size_t j = 1; j < p.theta.size(); ++j)
        s += p.theta[j] * std::cos(static_cast<double>(j) * lambda);
    if (al == 0.0) return s;
    return -2.0 * p.d * std::log(2.0 * std::sin(al / 2.0)) + s;
}

double eval_fexp(const FexpParams& p, double lambda) {
    check_lambda(lambda);
    if (lambda == 0.0) {
        if (p.d > 0.0) throw domain_error("f has a pole at lambda = 0 when d > 0");
        if (p.d < 0.0) return 0.0;
    }
    return std::exp(log_fexp(p, lambda));
}

SpectralFn SpectralFn::fexp(FexpParams p) {
    SpectralFn f;
    f.d_ = p.d;
    f.params_ = std::make_shared<const FexpParams>(std::move(p));
    return f;
}

SpectralFn SpectralFn::power_law_times_smooth(double d,
                                              std::function<double(double)> smooth) {
    if (!(d > -0.5 && d < 0.5)) throw domain_error("d must lie in (-1/2, 1/2)");
    if (!smooth) throw domain_error("smooth factor callback required");
    SpectralFn f;
    f.d_ = d;
    f.smooth_ = std::move(smooth);
    return f;
}

// Scaling folds into the representation, so the result stays in the union:
// for the exponential model c*f shifts theta[0] by log c.
SpectralFn SpectralFn::scaled(double c, const SpectralFn& inner) {
    if (!(c > 0.0) || !std::isfinite(c)) throw domain_error("scale must be positive");
    SpectralFn f;
    f.d_ = inner.d_;
    if (inner.params_) {
        FexpParams p = *inner.params_;
        p.theta[0] += std::log(c);
        f.params_ = std::make_shared<const FexpParams>(std::move(p));
    } else {
        auto base = inner.smooth_;
        f.smooth_ = [c, base](double l) { return c * base(l); };
    }
    return f;
}

double SpectralFn::operator()(double lambda) const {
    if (params_) return eval_fexp(*params_, lambda);
    check_lambda(lambda);
    const double al = std::abs(lambda);
    if (al == 0.0) {
        if (d_ > 0.0) throw domain_error("f has a pole at lambda = 0 when d > 0");
        if (d_ < 0.0) return 0.0;
        return smooth_(0.0);
    }
    return std::pow(al, -2.0 * d_) * smooth_(lambda);
}

double SpectralFn::log_value(double lambda) const {
    if (params_) return log_fexp(*params_, lambda);
    check_lambda(lambda);
    const double al = std::abs(lambda);
    if (al == 0.0 && d_ != 0.0)
        throw domain_error("log spectrum undefined at lambda = 0 when d != 0");
    if (al == 0.0) return std::log(smooth_(0.0));
    return -2.0 * d_ * std::log(al) + std::log(smooth_(lambda));
}

double SpectralFn::smooth_at_zero() const {
    if (params_) {
        double s = 0.0;
        for (double t : params_->theta) s += t;
        return std::exp(s);
    }
    return smooth_(0.0);
}

std::vector<double> log_spectrum_grid(const SpectralFn& f,
                                      std::span<const double> grid) {
    std::vector<double> out;
    out.reserve(grid.size());
    for (double l : grid) out.push_back(f.log_value(l));
    return out;
}

double class_weighted_norm(const FexpParams& p, double beta) {
    double s = 0.0;
    for (std::size_t j = 0; j < p.theta.size(); ++j) {
        const double w = std::pow(1.0 + static_cast<double>(j), beta);
        s += p.theta[j] * p.theta[j] * w * w;
    }
    return s;
}

bool in_class_S(const FexpParams& p, const SmoothnessClassSpec& cls) {
    if (!(cls.beta > 0.0) || !(cls.radius > 0.0))
        throw domain_error("smoothness class needs beta > 0 and radius > 0");
    return class_weighted_norm(p, cls.beta) <= cls.radius;
}

}  // namespace fexpbayes
