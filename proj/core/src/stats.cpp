#include "fexpbayes/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fexpbayes/errors.hpp"

namespace fexpbayes {

namespace {

// series expansion, valid for x < a + 1
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// continued fraction (modified Lentz), valid for x >= a + 1
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_p(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw domain_error("gamma_p: bad arguments");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw domain_error("gamma_q: bad arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double chi2_sf(double x, double df) { return gamma_q(0.5 * df, 0.5 * x); }

GofResult chi2_gof(const std::vector<double>& observed,
                   const std::vector<double>& expected_prob, double min_expected) {
    if (observed.size() != expected_prob.size() || observed.size() < 2)
        throw domain_error("chi2_gof: size mismatch");
    double n = 0.0;
    for (double o : observed) n += o;

    std::vector<double> obs, exp;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double e = n * expected_prob[i];
        if (!exp.empty() && (e < min_expected || exp.back() < min_expected)) {
            obs.back() += observed[i];
            exp.back() += e;
        } else {
            obs.push_back(observed[i]);
            exp.push_back(e);
        }
    }
    GofResult r;
    if (obs.size() < 2) return r;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (exp[i] <= 0.0) continue;
        const double d = obs[i] - exp[i];
        r.statistic += d * d / exp[i];
    }
    r.df = static_cast<int>(obs.size()) - 1;
    r.p_value = chi2_sf(r.statistic, r.df);
    return r;
}

double mean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

double ess(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 4) return static_cast<double>(n);
    const double m = mean(x);
    double var0 = 0.0;
    for (double v : x) var0 += (v - m) * (v - m);
    var0 /= static_cast<double>(n);
    if (var0 <= 0.0) return static_cast<double>(n);

    auto acov = [&](std::size_t lag) {
        double s = 0.0;
        for (std::size_t t = 0; t + lag < n; ++t) s += (x[t] - m) * (x[t + lag] - m);
        return s / static_cast<double>(n);
    };

    // initial monotone positive sequence over lag pairs
    double sum = var0;
    double prev_pair = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k + 1 < n; k += 2) {
        double pair = acov(k) + acov(k + 1);
        if (pair < 0.0) break;
        pair = std::min(pair, prev_pair);
        prev_pair = pair;
        sum += 2.0 * pair;
        if (k > n / 2) break;
    }
    const double essv = static_cast<double>(n) * var0 / sum;
    return std::clamp(essv, 1.0, static_cast<double>(n));
}

double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

double quantile(std::vector<double> x, double q) {
    if (x.empty()) throw domain_error("quantile of empty set");
    std::sort(x.begin(), x.end());
    const double pos = q * static_cast<double>(x.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= x.size()) return x.back();
    const double frac = pos - static_cast<double>(i);
    return x[i] * (1.0 - frac) + x[i + 1] * frac;
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw domain_error("ols_slope: need matching series of length >= 2");
    const double mx = mean(x), my = mean(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    return sxy / sxx;
}

}  // namespace fexpbayes
