#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fexpbayes/autocov.hpp"
#include "fexpbayes/spectral.hpp"

namespace fexpbayes {

enum class SimMethod { automatic, circulant, cholesky };

struct SimRequest {
    std::size_t n = 0;
    std::size_t replicates = 1;
    std::uint64_t seed = 0;
    SimMethod method = SimMethod::automatic;
    double autocov_tol = 1e-10;
};

// Replicate r is drawn from the stream (seed, r), so any single replicate
// can be regenerated without the others and results do not depend on
// evaluation order.
struct SimResult {
    std::size_t n = 0;
    std::size_t replicates = 0;
    std::vector<double> data;  // row-major, replicates x n
    std::string method_used;
    std::size_t embedding_size = 0;  // circulant half-size m, 0 for cholesky
    std::size_t clamped_eigenvalues = 0;

    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(data).subspan(r * n, n);
    }
};

// Exact draws from the stationary Gaussian law of f. The circulant route
// embeds T_n in a circulant of half-size m (power of two), doubling m up to
// 8n while the embedding stays indefinite; eigenvalues above -1e-10 * max
// are clamped to zero. With method = automatic an unembeddable covariance
// falls back to dense Cholesky (n <= 2048).
SimResult simulate_gaussian(const SpectralFn& f, const SimRequest& req);

// Same, from a fixed covariance sequence; no extension beyond acov.lags()
// is possible, so the circulant route uses at most that information.
SimResult simulate_gaussian(const AutocovSeq& acov, const SimRequest& req);

// One row per replicate, comma separated; '#' header lines carry n,
// replicates, seed, method, and the model descriptor.
void write_series_csv(std::ostream& os, const SimResult& sim,
                      const std::string& model_desc, std::uint64_t seed);

}  // namespace fexpbayes
