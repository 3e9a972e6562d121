#include "fexpbayes/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <utility>

#include "fexpbayes/autocov.hpp"
#include "fexpbayes/errors.hpp"
#include "fexpbayes/stats.hpp"
#include "fexpbayes/toeplitz.hpp"

namespace fexpbayes {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double normal_logpdf(double x, double sd) {
    return -0.5 * std::log(2.0 * std::numbers::pi) - std::log(sd) -
           0.5 * x * x / (sd * sd);
}

// one_minus_w passed separately; near the simplex faces 1 - w cancels badly
double beta_logpdf(double w, double one_minus_w, double a, double b) {
    return (a - 1.0) * std::log(w) + (b - 1.0) * std::log(one_minus_w) +
           std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
}

struct State {
    FexpParams params;
    double lp;  // log prior
    double ll;  // log likelihood, 0 in prior-only mode
    double lpost() const { return lp + ll; }
};

class Sampler {
  public:
    Sampler(std::span<const double> x, const PriorSpec& prior, const SamplerConfig& cfg)
        : x_(x), prior_(prior), cfg_(cfg), rng_(cfg.seed),
          ls_d_(std::log(cfg.step_d)), ls_r_(std::log(cfg.step_ridge)),
          ls_t_(std::log(cfg.step_theta)),
          cur_{FexpParams(0.0, {0.0}), 0.0, 0.0} {
        out_.moves.resize(5);
        out_.moves[0].name = "d_walk";
        out_.moves[1].name = "ridge";
        out_.moves[2].name = "theta_block";
        out_.moves[3].name = "birth";
        out_.moves[4].name = "death";
        init_state();
    }

    PosteriorSamples run() {
        for (std::uint64_t it = 0; it < cfg_.iterations; ++it) {
            const bool adapting = it < cfg_.burn_in;
            const double g = adapting ? gain(it) : 0.0;

            double a = move_d();
            if (adapting) nudge(ls_d_, g, a, cfg_.target_scalar);
            a = move_ridge();
            if (adapting) nudge(ls_r_, g, a, cfg_.target_scalar);
            a = move_theta();
            if (adapting) nudge(ls_t_, g, a, cfg_.target_block);
            move_dimension();

            if (it >= cfg_.burn_in && (it - cfg_.burn_in) % cfg_.thin == 0) {
                out_.draws.push_back(cur_.params);
                out_.iters.push_back(it);
                out_.log_posterior.push_back(cur_.lpost());
                ++out_.k_counts[cur_.params.order()];
            }
        }
        out_.moves[0].final_step = std::exp(ls_d_);
        out_.moves[1].final_step = std::exp(ls_r_);
        out_.moves[2].final_step = std::exp(ls_t_);
        out_.ess_d = ess(out_.d_values());
        return std::move(out_);
    }

  private:
    double gain(std::uint64_t it) const {
        return std::pow(1.0 + static_cast<double>(it) / cfg_.adapt_window, -0.6);
    }

    static void nudge(double& log_step, double g, double alpha, double target) {
        log_step = std::clamp(log_step + g * (alpha - target), -20.0, 5.0);
    }

    double log_lik(const FexpParams& p) {
        if (cfg_.prior_only) return 0.0;
        try {
            return gauss_loglik(autocov_analytic(p, x_.size()), x_);
        } catch (const std::exception&) {
            ++out_.likelihood_failures;
            return kNegInf;
        }
    }

    void init_state() {
        for (int tries = 0; tries < 20; ++tries) {
            PriorDraw pd = sample_prior(prior_, rng_);
            const double ll = log_lik(pd.params);
            cur_ = State{std::move(pd.params), pd.log_density, ll};
            if (std::isfinite(cur_.lpost())) return;
        }
    }

    // generic MH step; returns the observed acceptance probability
    double attempt(FexpParams prop, double log_corr, MoveStats& ms) {
        ++ms.proposed;
        const double lp = log_prior_density(prior_, prop);
        if (!std::isfinite(lp)) return 0.0;
        const double ll = log_lik(prop);
        const double la = (lp + ll) - cur_.lpost() + log_corr;
        if (!(la > kNegInf)) return 0.0;  // rejects NaN as well
        const double alpha = la >= 0.0 ? 1.0 : std::exp(la);
        if (std::log(rng_.uniform()) < la) {
            cur_ = State{std::move(prop), lp, ll};
            ++ms.accepted;
        }
        return alpha;
    }

    double move_d() {
        const double lo = prior_.d_lo(), hi = prior_.d_hi();
        const double d = cur_.params.d;
        if (!(d > lo && d < hi)) {  // point-mass priors may sit outside
            ++out_.moves[0].proposed;
            return 0.0;
        }
        const double z = std::log((d - lo) / (hi - d)) + std::exp(ls_d_) * rng_.normal();
        const double d2 = lo + (hi - lo) / (1.0 + std::exp(-z));
        const double corr = std::log((d2 - lo) * (hi - d2)) -
                            std::log((d - lo) * (hi - d));
        return attempt(FexpParams(d2, cur_.params.theta), corr, out_.moves[0]);
    }

    // shear along the near-flat direction: the pole factor satisfies
    // -2d log|1 - e^{il}| = d sum_j (2/j) cos(jl), so d + delta paired with
    // theta_j - 2 delta / j moves f very little and decorrelates d from theta
    double move_ridge() {
        const double delta = std::exp(ls_r_) * rng_.normal();
        const double d2 = cur_.params.d + delta;
        if (!(d2 > -0.5 && d2 < 0.5)) {
            ++out_.moves[1].proposed;
            return 0.0;
        }
        std::vector<double> th = cur_.params.theta;
        for (std::size_t j = 1; j < th.size(); ++j) th[j] -= 2.0 * delta / j;
        return attempt(FexpParams(d2, std::move(th)), 0.0, out_.moves[1]);
    }

    double move_theta() {
        const double s = std::exp(ls_t_);
        std::vector<double> th = cur_.params.theta;
        th[0] += s * 0.25 * rng_.normal();
        if (prior_.variant == PriorVariant::dirichlet_fexp) {
            // |theta_j| spans many orders of magnitude near the simplex
            // faces, so the j >= 1 coordinates walk on the log scale; the
            // multiplicative Jacobian enters the correction
            double corr = 0.0;
            for (std::size_t j = 1; j < th.size(); ++j) {
                const double step = s * 0.5 * rng_.normal();
                th[j] *= std::exp(step);
                corr += step;
                if (!std::isfinite(th[j])) {  // overflow lands off support
                    ++out_.moves[2].proposed;
                    return 0.0;
                }
            }
            return attempt(FexpParams(cur_.params.d, std::move(th)), corr,
                           out_.moves[2]);
        }
        for (std::size_t j = 1; j < th.size(); ++j)
            th[j] += s * prior_marginal_scale(prior_, static_cast<int>(j)) * rng_.normal();
        return attempt(FexpParams(cur_.params.d, std::move(th)), 0.0, out_.moves[2]);
    }

    void move_dimension() {
        if (prior_.variant == PriorVariant::dirichlet_fexp) {
            move_dimension_stick();
            return;
        }
        const double br = cfg_.birth_rate;
        const int k = cur_.params.order();
        if (rng_.uniform() < br) {
            if (k >= cfg_.k_max) {  // impossible move, automatic rejection
                ++out_.moves[3].proposed;
                return;
            }
            const double sb = prior_marginal_scale(prior_, k + 1);
            const double v = sb * rng_.normal();
            std::vector<double> th = cur_.params.theta;
            th.push_back(v);
            const double corr = std::log1p(-br) - std::log(br) - normal_logpdf(v, sb);
            attempt(FexpParams(cur_.params.d, std::move(th)), corr, out_.moves[3]);
        } else {
            if (k == 0) {
                ++out_.moves[4].proposed;
                return;
            }
            const double v = cur_.params.theta.back();
            const double sb = prior_marginal_scale(prior_, k);
            std::vector<double> th(cur_.params.theta.begin(),
                                   cur_.params.theta.end() - 1);
            const double corr = std::log(br) - std::log1p(-br) + normal_logpdf(v, sb);
            attempt(FexpParams(cur_.params.d, std::move(th)), corr, out_.moves[4]);
        }
    }

    double alpha_coef(int j) const {
        return prior_.alpha_scale / ((1.0 + j) * (1.0 + j));
    }

    double alpha_head(int m) const {  // sum of alpha_1..alpha_m
        double s = 0.0;
        for (int j = 1; j <= m; ++j) s += alpha_coef(j);
        return s;
    }

    // Dimension step for the simplex prior. Birth K -> K+1 keeps
    // S = sum_j j|theta_j| fixed: draw W ~ Beta(alpha_{K+1}, alpha_1+..+
    // alpha_K), the exact conditional of the incoming simplex coordinate;
    // shrink theta_j by (1-W), append |theta_{K+1}| = S W/(K+1) with a
    // Rademacher sign. The map (theta, W) -> theta' has Jacobian
    // S (1-W)^{K-1}/(K+1), and the Beta density cancels the target's
    // V^{alpha-1} face singularities exactly, so under the prior alone the
    // step accepts at the K-pmf ratio. The K = 0 <-> 1 step proposes S from
    // its own prior law instead. Death inverts the map deterministically.
    void move_dimension_stick() {
        const double br = cfg_.birth_rate;
        const int k = cur_.params.order();
        constexpr double ln2 = std::numbers::ln2;
        if (rng_.uniform() < br) {
            if (k >= cfg_.k_max) {  // impossible move, automatic rejection
                ++out_.moves[3].proposed;
                return;
            }
            std::vector<double> th = cur_.params.theta;
            double corr = std::log1p(-br) - std::log(br) + ln2;
            if (k == 0) {
                const double ga = rng_.gamma(2.0), gb = rng_.gamma(2.0);
                const double x = ga / (ga + gb);  // Beta(2,2)
                if (!(x > 0.0) || !(x < 1.0)) {
                    ++out_.moves[3].proposed;
                    return;
                }
                const double s = prior_.bound_b * x;
                th.push_back(rng_.rademacher() * s);
                corr -= std::log(6.0) + std::log(x) + std::log1p(-x) -
                        std::log(prior_.bound_b);
            } else {
                const double a = alpha_coef(k + 1), b = alpha_head(k);
                const double ga = rng_.gamma(a), gb = rng_.gamma(b);
                const double w = ga / (ga + gb), r = gb / (ga + gb);
                if (!(w > 0.0) || !(r > 0.0)) {
                    ++out_.moves[3].proposed;
                    return;
                }
                double s = 0.0;
                for (int j = 1; j <= k; ++j) s += j * std::abs(th[j]);
                for (int j = 1; j <= k; ++j) th[j] *= r;
                th.push_back(rng_.rademacher() * s * w / (k + 1));
                corr += -beta_logpdf(w, r, a, b) + std::log(s) +
                        (k - 1) * std::log(r) - std::log(k + 1.0);
            }
            attempt(FexpParams(cur_.params.d, std::move(th)), corr, out_.moves[3]);
        } else {
            if (k == 0) {
                ++out_.moves[4].proposed;
                return;
            }
            std::vector<double> th(cur_.params.theta.begin(),
                                   cur_.params.theta.end() - 1);
            double corr = std::log(br) - std::log1p(-br) - ln2;
            if (k == 1) {
                const double x = std::abs(cur_.params.theta[1]) / prior_.bound_b;
                if (!(x > 0.0) || !(x < 1.0)) {
                    ++out_.moves[4].proposed;
                    return;
                }
                corr += std::log(6.0) + std::log(x) + std::log1p(-x) -
                        std::log(prior_.bound_b);
            } else {
                double rest = 0.0;
                for (int j = 1; j < k; ++j) rest += j * std::abs(th[j]);
                const double tail = k * std::abs(cur_.params.theta[k]);
                const double s = rest + tail;
                const double w = tail / s, r = rest / s;
                if (!(w > 0.0) || !(r > 0.0)) {
                    ++out_.moves[4].proposed;
                    return;
                }
                bool finite = true;
                for (int j = 1; j < k; ++j) {
                    th[j] /= r;
                    finite = finite && std::isfinite(th[j]);
                }
                if (!finite) {
                    ++out_.moves[4].proposed;
                    return;
                }
                const double a = alpha_coef(k), b = alpha_head(k - 1);
                corr += beta_logpdf(w, r, a, b) - std::log(s) -
                        (k - 2) * std::log(r) + std::log(static_cast<double>(k));
            }
            attempt(FexpParams(cur_.params.d, std::move(th)), corr, out_.moves[4]);
        }
    }

    std::span<const double> x_;
    const PriorSpec& prior_;
    const SamplerConfig& cfg_;
    Rng rng_;
    double ls_d_, ls_r_, ls_t_;  // log step sizes
    State cur_;
    PosteriorSamples out_;
};

void check_grid(std::span<const double> grid) {
    for (const double g : grid)
        if (g == 0.0) throw domain_error("grid must avoid frequency 0");
}

}  // namespace

void SamplerConfig::validate() const {
    if (iterations == 0 || iterations <= burn_in)
        throw domain_error("sampler: need iterations > burn_in");
    if (thin < 1) throw domain_error("sampler: need thin >= 1");
    if (!(step_d > 0.0) || !(step_ridge > 0.0) || !(step_theta > 0.0))
        throw domain_error("sampler: step scales must be positive");
    if (!(birth_rate > 0.0) || !(birth_rate < 1.0))
        throw domain_error("sampler: need 0 < birth_rate < 1");
    if (adapt_window < 1) throw domain_error("sampler: need adapt_window >= 1");
    if (!(target_scalar > 0.0) || !(target_scalar < 1.0) ||
        !(target_block > 0.0) || !(target_block < 1.0))
        throw domain_error("sampler: target rates must lie in (0,1)");
    if (k_max < 0) throw domain_error("sampler: need k_max >= 0");
}

std::vector<double> PosteriorSamples::d_values() const {
    std::vector<double> d(draws.size());
    for (std::size_t i = 0; i < draws.size(); ++i) d[i] = draws[i].d;
    return d;
}

PosteriorSamples run_mcmc(std::span<const double> x, const PriorSpec& prior,
                          const SamplerConfig& cfg) {
    prior.validate();
    cfg.validate();
    if (cfg.pmc_enabled)
        throw not_implemented("population Monte Carlo mode is declared but not "
                              "implemented; disable pmc_enabled");
    if (!cfg.prior_only && x.size() < 2)
        throw domain_error("sampler: need at least 2 observations");
    Sampler s(x, prior, cfg);
    return s.run();
}

double log_unnormalized_posterior(std::span<const double> x, const PriorSpec& prior,
                                  const FexpParams& params, bool prior_only) {
    const double lp = log_prior_density(prior, params);
    if (!std::isfinite(lp) || prior_only) return lp;
    return lp + gauss_loglik(autocov_analytic(params, x.size()), x);
}

MeanResult estimate_d(const PosteriorSamples& s) {
    if (s.draws.empty()) throw domain_error("estimate_d: empty samples");
    const std::vector<double> d = s.d_values();
    const double v = variance(d);
    return MeanResult{mean(d), std::sqrt(v / ess(d))};
}

FexpParams posterior_mean_params(const PosteriorSamples& s) {
    if (s.draws.empty()) throw domain_error("posterior_mean_params: empty samples");
    std::size_t width = 1;
    for (const auto& p : s.draws) width = std::max(width, p.theta.size());
    std::vector<double> th(width, 0.0);
    double d = 0.0;
    for (const auto& p : s.draws) {
        d += p.d;
        for (std::size_t j = 0; j < p.theta.size(); ++j) th[j] += p.theta[j];
    }
    const double inv = 1.0 / static_cast<double>(s.draws.size());
    d *= inv;
    for (auto& t : th) t *= inv;
    return FexpParams(d, std::move(th));
}

std::vector<double> estimate_f_log(const PosteriorSamples& s,
                                   std::span<const double> grid) {
    if (s.draws.empty()) throw domain_error("estimate_f_log: empty samples");
    check_grid(grid);
    // log f is linear in (d, theta), so the mean of log f over draws is
    // log f at the mean parameters
    const FexpParams pm = posterior_mean_params(s);
    std::vector<double> out = log_spectrum_grid(SpectralFn::fexp(pm), grid);
    for (auto& v : out) v = std::exp(v);
    return out;
}

std::vector<double> estimate_f_h(const PosteriorSamples& s,
                                 std::span<const double> grid) {
    if (s.draws.empty()) throw domain_error("estimate_f_h: empty samples");
    check_grid(grid);
    std::vector<double> mf(grid.size(), 0.0), mrf(grid.size(), 0.0);
    for (const auto& p : s.draws) {
        const std::vector<double> lg =
            log_spectrum_grid(SpectralFn::fexp(p), grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            mf[i] += std::exp(lg[i]);
            mrf[i] += std::exp(-lg[i]);
        }
    }
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        out[i] = std::sqrt(mf[i] / mrf[i]);
    return out;
}

MeanResult posterior_prob(const PosteriorSamples& s,
                          const std::function<bool(const FexpParams&)>& pred) {
    if (s.draws.empty()) throw domain_error("posterior_prob: empty samples");
    std::vector<double> ind(s.draws.size());
    for (std::size_t i = 0; i < s.draws.size(); ++i)
        ind[i] = pred(s.draws[i]) ? 1.0 : 0.0;
    const double p = mean(ind);
    return MeanResult{p, std::sqrt(p * (1.0 - p) / ess(ind))};
}

double whittle_loglik(std::span<const double> x, const SpectralFn& f) {
    const std::size_t n = x.size();
    if (n < 4) throw domain_error("whittle_loglik: need n >= 4");
    double out = 0.0;
    for (std::size_t j = 1; j <= (n - 1) / 2; ++j) {
        const double lam = 2.0 * std::numbers::pi * j / n;
        const std::complex<double> w = std::polar(1.0, -lam);
        std::complex<double> rot = 1.0, sum = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            sum += x[t] * rot;
            rot *= w;
        }
        const double per = std::norm(sum) / (2.0 * std::numbers::pi * n);
        const double fv = f(lam);
        out -= std::log(fv) + per / fv;
    }
    return out;
}

void write_samples_csv(std::ostream& os, const PosteriorSamples& s) {
    int kmax = 0;
    for (const auto& p : s.draws) kmax = std::max(kmax, p.order());
    os << "iter,K,d";
    for (int j = 0; j <= kmax; ++j) os << ",theta_" << j;
    os << ",log_posterior\n";
    char buf[32];
    for (std::size_t i = 0; i < s.draws.size(); ++i) {
        const auto& p = s.draws[i];
        os << s.iters[i] << ',' << p.order() << ',';
        std::snprintf(buf, sizeof buf, "%.17g", p.d);
        os << buf;
        for (int j = 0; j <= kmax; ++j) {
            os << ',';
            if (j <= p.order()) {
                std::snprintf(buf, sizeof buf, "%.17g", p.theta[j]);
                os << buf;
            }
        }
        std::snprintf(buf, sizeof buf, "%.17g", s.log_posterior[i]);
        os << ',' << buf << "\n";
    }
}

}  // namespace fexpbayes
