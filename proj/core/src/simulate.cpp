#include "fexpbayes/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <ostream>

#include "fexpbayes/errors.hpp"
#include "fexpbayes/fft.hpp"
#include "fexpbayes/rng.hpp"

namespace fexpbayes {

namespace {

constexpr std::size_t kCholeskyCap = 2048;

struct Embedding {
    std::size_t m = 0;
    std::vector<double> eigenvalues;  // of the circulant, length 2m
    std::size_t clamped = 0;
};

// try to embed gamma(0..m) in a nonnegative circulant of size 2m
bool try_embedding(std::span<const double> gamma, std::size_t m, Embedding& out) {
    const std::size_t M = 2 * m;
    std::vector<std::complex<double>> c(M, 0.0);
    for (std::size_t j = 0; j <= m; ++j) c[j] = gamma[j];
    for (std::size_t j = 1; j < m; ++j) c[M - j] = gamma[j];
    fft(c, false);
    double maxev = 0.0;
    for (const auto& z : c) maxev = std::max(maxev, z.real());
    const double floor_ev = -1e-10 * maxev;
    out.m = m;
    out.eigenvalues.resize(M);
    out.clamped = 0;
    for (std::size_t j = 0; j < M; ++j) {
        double ev = c[j].real();
        if (ev < floor_ev) return false;
        if (ev < 0.0) {
            ev = 0.0;
            ++out.clamped;
        }
        out.eigenvalues[j] = ev;
    }
    return true;
}

void draw_circulant(const Embedding& emb, Rng& rng, std::span<double> out) {
    const std::size_t m = emb.m;
    const std::size_t M = 2 * m;
    std::vector<std::complex<double>> xi(M);
    xi[0] = std::sqrt(emb.eigenvalues[0]) * rng.normal();
    xi[m] = std::sqrt(emb.eigenvalues[m]) * rng.normal();
    for (std::size_t k = 1; k < m; ++k) {
        const double sd = std::sqrt(0.5 * emb.eigenvalues[k]);
        const double u = rng.normal(), v = rng.normal();
        xi[k] = std::complex<double>(sd * u, sd * v);
        xi[M - k] = std::conj(xi[k]);
    }
    fft(xi, true);  // unnormalized inverse; scale by 1/sqrt(M)
    const double scale = 1.0 / std::sqrt(static_cast<double>(M));
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = xi[t].real() * scale;
}

// lower Cholesky factor of the dense Toeplitz matrix
std::vector<double> dense_toeplitz_chol(std::span<const double> gamma, std::size_t n) {
    std::vector<double> L(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = gamma[i - j];
            for (std::size_t k = 0; k < j; ++k) s -= L[i * n + k] * L[j * n + k];
            if (i == j) {
                if (!(s > 0.0)) throw not_positive_definite(static_cast<int>(i));
                L[i * n + i] = std::sqrt(s);
            } else {
                L[i * n + j] = s / L[j * n + j];
            }
        }
    }
    return L;
}

SimResult run(const SimRequest& req,
              const std::function<const std::vector<double>&(std::size_t)>& gamma_to,
              std::size_t max_lags) {
    if (req.n == 0) throw domain_error("need n >= 1");
    if (req.replicates == 0) throw domain_error("need replicates >= 1");

    SimResult res;
    res.n = req.n;
    res.replicates = req.replicates;
    res.data.assign(req.n * req.replicates, 0.0);

    Embedding emb;
    bool embedded = false;
    if (req.method != SimMethod::cholesky) {
        const std::size_t mcap = next_pow2(8 * req.n);
        std::size_t m = next_pow2(req.n > 1 ? req.n - 1 : 1);
        std::size_t last_tried = 0;
        while (m <= mcap && m + 1 <= max_lags) {
            last_tried = m;
            if (try_embedding(gamma_to(m + 1), m, emb)) {
                embedded = true;
                break;
            }
            m *= 2;
        }
        if (!embedded && req.method == SimMethod::circulant) {
            if (last_tried == 0)
                throw embedding_failed(
                    "covariance sequence too short for a circulant embedding");
            throw embedding_failed("circulant embedding stayed indefinite up to m = " +
                                   std::to_string(last_tried));
        }
    }

    if (embedded) {
        res.method_used = "circulant";
        res.embedding_size = emb.m;
        res.clamped_eigenvalues = emb.clamped;
        for (std::size_t r = 0; r < req.replicates; ++r) {
            Rng rng(req.seed, r);
            draw_circulant(emb, rng, std::span<double>(res.data).subspan(r * req.n, req.n));
        }
        return res;
    }

    if (req.n > kCholeskyCap)
        throw domain_error("dense fallback is capped at n = " +
                           std::to_string(kCholeskyCap));
    const std::vector<double>& g = gamma_to(req.n);
    const std::vector<double> L = dense_toeplitz_chol(g, req.n);
    res.method_used = "cholesky";
    std::vector<double> z(req.n);
    for (std::size_t r = 0; r < req.replicates; ++r) {
        Rng rng(req.seed, r);
        for (auto& v : z) v = rng.normal();
        double* x = res.data.data() + r * req.n;
        for (std::size_t i = 0; i < req.n; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k <= i; ++k) s += L[i * req.n + k] * z[k];
            x[i] = s;
        }
    }
    return res;
}

}  // namespace

SimResult simulate_gaussian(const SpectralFn& f, const SimRequest& req) {
    // cache per requested order so embedding retries do not recompute
    std::vector<double> cache;
    auto gamma_to = [&f, &req, &cache](std::size_t lags) -> const std::vector<double>& {
        if (cache.size() < lags)
            cache = autocov(f, lags, req.autocov_tol).gamma;
        return cache;
    };
    return run(req, gamma_to, next_pow2(8 * req.n) + 1);
}

SimResult simulate_gaussian(const AutocovSeq& acov, const SimRequest& req) {
    if (acov.lags() < req.n)
        throw domain_error("covariance sequence shorter than requested n");
    auto gamma_to = [&acov](std::size_t) -> const std::vector<double>& {
        return acov.gamma;
    };
    return run(req, gamma_to, acov.lags());
}

void write_series_csv(std::ostream& os, const SimResult& sim,
                      const std::string& model_desc, std::uint64_t seed) {
    os << "# simulated stationary gaussian series, one replicate per row\n";
    os << "# n=" << sim.n << " replicates=" << sim.replicates << " seed=" << seed
       << " method=" << sim.method_used << " model=" << model_desc << "\n";
    char buf[32];
    for (std::size_t r = 0; r < sim.replicates; ++r) {
        const auto row = sim.row(r);
        for (std::size_t t = 0; t < row.size(); ++t) {
            std::snprintf(buf, sizeof buf, "%.17g", row[t]);
            os << buf << (t + 1 == row.size() ? "\n" : ",");
        }
    }
}

}  // namespace fexpbayes
