#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace fexpbayes {

// xoshiro256++ with splitmix64 seeding. A (seed, stream) pair selects a
// reproducible stream; distinct streams are statistically independent for
// our purposes. All distributions are implemented here so draws do not
// depend on the standard library's unspecified algorithms.
class Rng {
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
        std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
        for (auto& s : state_) s = splitmix64(x);
        // avoid the all-zero state
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform on (0,1), never exactly 0 or 1
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal, polar method
    double normal() {
        if (have_cache_) {
            have_cache_ = false;
            return cache_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        cache_ = v * m;
        have_cache_ = true;
        return u * m;
    }

    double exponential() { return -std::log(uniform()); }

    int rademacher() { return (next_u64() & 1) ? 1 : -1; }

    // inversion by sequential search; fine for the small means used here
    int poisson(double mu) {
        double p = std::exp(-mu), c = p;
        const double u = uniform();
        int k = 0;
        while (u > c && k < 10000) {
            ++k;
            p *= mu / k;
            c += p;
        }
        return k;
    }

    // Marsaglia-Tsang, with the standard shape boost for alpha < 1
    double gamma(double alpha) {
        if (alpha < 1.0) {
            const double u = uniform();
            const double g = gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
            // u^(1/alpha) can underflow for tiny alpha; keep draws positive
            return g > 0.0 ? g : 5e-324;
        }
        const double d = alpha - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double beta(double a, double b) {
        const double x = gamma(a);
        const double y = gamma(b);
        return x / (x + y);
    }

    std::vector<double> dirichlet(const std::vector<double>& alpha) {
        std::vector<double> g(alpha.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < alpha.size(); ++i) {
            g[i] = gamma(alpha[i]);
            sum += g[i];
        }
        for (auto& v : g) v /= sum;
        return g;
    }

  private:
    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
    double cache_ = 0.0;
    bool have_cache_ = false;
};

}  // namespace fexpbayes
