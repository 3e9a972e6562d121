#include "fexpbayes/toeplitz.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "fexpbayes/errors.hpp"
#include "fexpbayes/fft.hpp"
#include "fexpbayes/rng.hpp"

namespace fexpbayes {

ToeplitzSolver ToeplitzSolver::factor(const AutocovSeq& acov) {
    const std::size_t n = acov.lags();
    ToeplitzSolver s;
    s.gamma_ = acov.gamma;
    s.refl_.assign(n, 0.0);
    s.innov_.assign(n, 0.0);

    const double g0 = s.gamma_[0];
    const double floor_v = 1e-13 * g0;
    if (!(g0 > 0.0)) throw not_positive_definite(0);
    s.innov_[0] = g0;
    s.logdet_ = std::log(g0);
    s.min_innov_ = g0;

    std::vector<double> phi(n, 0.0);  // phi[1..k] at step k
    double v = g0;
    for (std::size_t k = 1; k < n; ++k) {
        double num = s.gamma_[k];
        for (std::size_t j = 1; j < k; ++j) num -= phi[j] * s.gamma_[k - j];
        const double kk = num / v;
        s.refl_[k] = kk;
        // in-place symmetric update of phi[1..k-1]
        for (std::size_t j = 1, m = k - 1; j < m; ++j, --m) {
            const double pj = phi[j], pm = phi[m];
            phi[j] = pj - kk * pm;
            phi[m] = pm - kk * pj;
        }
        if (k >= 2 && k % 2 == 0) phi[k / 2] *= (1.0 - kk);
        phi[k] = kk;
        v *= (1.0 - kk * kk);
        if (!(v > floor_v)) throw not_positive_definite(static_cast<int>(k));
        s.innov_[k] = v;
        s.logdet_ += std::log(v);
        s.min_innov_ = std::min(s.min_innov_, v);
    }
    return s;
}

template <typename Visit>
void ToeplitzSolver::walk(std::span<const double> b, Visit&& visit) const {
    const std::size_t n = gamma_.size();
    if (b.size() != n) throw domain_error("vector length does not match order");
    std::vector<double> phi(n, 0.0);
    visit(std::size_t{0}, b[0], innov_[0], phi);
    for (std::size_t k = 1; k < n; ++k) {
        const double kk = refl_[k];
        for (std::size_t j = 1, m = k - 1; j < m; ++j, --m) {
            const double pj = phi[j], pm = phi[m];
            phi[j] = pj - kk * pm;
            phi[m] = pm - kk * pj;
        }
        if (k >= 2 && k % 2 == 0) phi[k / 2] *= (1.0 - kk);
        phi[k] = kk;
        double e = b[k];
        for (std::size_t j = 1; j <= k; ++j) e -= phi[j] * b[k - j];
        visit(k, e, innov_[k], phi);
    }
}

std::vector<double> ToeplitzSolver::solve(std::span<const double> b) const {
    std::vector<double> x(gamma_.size(), 0.0);
    walk(b, [&x](std::size_t k, double e, double v, const std::vector<double>& phi) {
        const double w = e / v;
        x[k] += w;
        for (std::size_t j = 1; j <= k; ++j) x[k - j] -= w * phi[j];
    });
    return x;
}

double ToeplitzSolver::quadform(std::span<const double> x) const {
    double acc = 0.0;
    walk(x, [&acc](std::size_t, double e, double v, const std::vector<double>&) {
        acc += e * e / v;
    });
    return acc;
}

double ToeplitzSolver::bilinear(std::span<const double> x,
                                std::span<const double> y) const {
    // innovations of x and y share the same coefficient rows, so run the
    // recursion once and form the y-innovation from the same phi
    double acc = 0.0;
    walk(x, [&acc, y](std::size_t k, double ex, double v,
                      const std::vector<double>& phi) {
        double ey = y[k];
        for (std::size_t j = 1; j <= k; ++j) ey -= phi[j] * y[k - j];
        acc += ex * ey / v;
    });
    return acc;
}

double gauss_loglik(const AutocovSeq& acov, std::span<const double> x) {
    const ToeplitzSolver s = ToeplitzSolver::factor(acov);
    const double q = s.quadform(x);
    const double n = static_cast<double>(x.size());
    return -0.5 * q - 0.5 * s.logdet() - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

std::vector<double> toeplitz_matvec(const AutocovSeq& acov, std::span<const double> x) {
    const std::size_t n = acov.lags();
    if (x.size() != n) throw domain_error("vector length does not match order");
    if (n == 1) return {acov.gamma[0] * x[0]};
    const std::size_t M = next_pow2(2 * n - 1);
    std::vector<std::complex<double>> c(M, 0.0), xv(M, 0.0);
    for (std::size_t j = 0; j < n; ++j) c[j] = acov.gamma[j];
    for (std::size_t j = 1; j < n; ++j) c[M - j] = acov.gamma[j];
    for (std::size_t j = 0; j < n; ++j) xv[j] = x[j];
    fft(c, false);
    fft(xv, false);
    for (std::size_t j = 0; j < M; ++j) c[j] *= xv[j];
    fft(c, true);
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = c[j].real() / static_cast<double>(M);
    return out;
}

namespace {

void check_exact_cap(std::size_t n) {
    if (n > kTraceExactCap)
        throw domain_error("exact trace mode is capped at n = " +
                           std::to_string(kTraceExactCap) +
                           "; use the stochastic mode for larger n");
}

}  // namespace

TraceResult trace_ratio(const SpectralFn& f, const SpectralFn& g, std::size_t n,
                        TraceMode mode, int probes, std::uint64_t seed, double tol) {
    if (n == 0) throw domain_error("need n >= 1");
    const AutocovSeq af = autocov(f, n, tol);
    const AutocovSeq ag = autocov(g, n, tol);
    const ToeplitzSolver sg = ToeplitzSolver::factor(ag);

    TraceResult r;
    if (mode == TraceMode::exact) {
        check_exact_cap(n);
        std::vector<double> col(n);
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i)
                col[i] = af.gamma[i >= j ? i - j : j - i];
            acc += sg.solve(col)[j];
        }
        r.value = acc / static_cast<double>(n);
        return r;
    }

    if (probes < 2) throw domain_error("stochastic mode needs at least 2 probes");
    Rng rng(seed, 0xabcdULL);
    std::vector<double> z(n);
    double sum = 0.0, sumsq = 0.0;
    for (int p = 0; p < probes; ++p) {
        for (auto& v : z) v = rng.rademacher();
        const std::vector<double> az = toeplitz_matvec(af, z);
        const std::vector<double> w = sg.solve(z);
        double est = 0.0;
        for (std::size_t i = 0; i < n; ++i) est += az[i] * w[i];
        est /= static_cast<double>(n);
        sum += est;
        sumsq += est * est;
    }
    const double m = sum / probes;
    const double var = (sumsq - probes * m * m) / (probes - 1);
    r.value = m;
    r.std_error = std::sqrt(std::max(var, 0.0) / probes);
    return r;
}

double trace_product(std::span<const SpectralFn> fs, std::span<const SpectralFn> gs,
                     std::size_t n, double tol) {
    if (fs.empty() || fs.size() != gs.size())
        throw domain_error("need matching nonempty factor lists");
    if (n == 0) throw domain_error("need n >= 1");
    check_exact_cap(n);

    const std::size_t p = fs.size();
    std::vector<AutocovSeq> af, ag;
    std::vector<ToeplitzSolver> sg;
    af.reserve(p);
    ag.reserve(p);
    sg.reserve(p);
    for (std::size_t i = 0; i < p; ++i) {
        af.push_back(autocov(fs[i], n, tol));
        ag.push_back(autocov(gs[i], n, tol));
        sg.push_back(ToeplitzSolver::factor(ag.back()));
    }

    auto tmatvec = [n](const AutocovSeq& a, const std::vector<double>& v) {
        std::vector<double> out(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                acc += a.gamma[i >= j ? i - j : j - i] * v[j];
            out[i] = acc;
        }
        return out;
    };

    double acc = 0.0;
    std::vector<double> v(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::fill(v.begin(), v.end(), 0.0);
        v[j] = 1.0;
        for (std::size_t i = p; i-- > 0;) {
            v = sg[i].solve(v);
            v = tmatvec(af[i], v);
        }
        acc += v[j];
    }
    return acc / static_cast<double>(n);
}

}  // namespace fexpbayes
