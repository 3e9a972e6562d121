#include "fexpbayes/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>

#include "fexpbayes/errors.hpp"

namespace fexpbayes {

namespace {

GaussLegendre compute_gl(int n) {
    GaussLegendre r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        r.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        r.weights[n - 1 - i] = r.weights[i];
    }
    return r;
}

}  // namespace

const GaussLegendre& gauss_legendre(int order) {
    static std::mutex mu;
    static std::map<int, GaussLegendre> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_gl(order)).first;
    return it->second;
}

double gl_panel(const std::function<double(double)>& f, double a, double b,
                const GaussLegendre& rule) {
    const double h = 0.5 * (b - a);
    const double c = 0.5 * (a + b);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        acc += rule.weights[i] * f(c + h * rule.nodes[i]);
    return h * acc;
}

namespace {

struct Panel {
    double a, b, value, err;
    bool operator<(const Panel& o) const { return err < o.err; }
};

Panel make_panel(const std::function<double(double)>& f, double a, double b,
                 std::size_t& evals) {
    static const GaussLegendre& lo = gauss_legendre(8);
    static const GaussLegendre& hi = gauss_legendre(16);
    const double vhi = gl_panel(f, a, b, hi);
    const double vlo = gl_panel(f, a, b, lo);
    evals += 24;
    return Panel{a, b, vhi, std::abs(vhi - vlo)};
}

}  // namespace

QuadResult integrate_adaptive(const std::function<double(double)>& f,
                              std::vector<double> breaks, double abs_tol,
                              int max_panels) {
    if (breaks.size() < 2) throw quadrature_error("need at least two breakpoints");
    std::sort(breaks.begin(), breaks.end());

    QuadResult out;
    std::priority_queue<Panel> q;
    double total_err = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (breaks[i + 1] <= breaks[i]) continue;
        Panel p = make_panel(f, breaks[i], breaks[i + 1], out.evaluations);
        total_err += p.err;
        q.push(p);
    }
    int panels = static_cast<int>(q.size());
    while (total_err > 0.9 * abs_tol && panels < max_panels) {
        Panel worst = q.top();
        q.pop();
        total_err -= worst.err;
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {  // interval at rounding limit
            total_err += worst.err;
            q.push(worst);
            break;
        }
        Panel l = make_panel(f, worst.a, mid, out.evaluations);
        Panel r = make_panel(f, mid, worst.b, out.evaluations);
        total_err += l.err + r.err;
        q.push(l);
        q.push(r);
        ++panels;
    }
    double value = 0.0;
    std::vector<double> vals;
    vals.reserve(q.size());
    while (!q.empty()) {
        vals.push_back(q.top().value);
        q.pop();
    }
    // sum small-to-large magnitude for a little extra accuracy
    std::sort(vals.begin(), vals.end(),
              [](double x, double y) { return std::abs(x) < std::abs(y); });
    for (double v : vals) value += v;
    out.value = value;
    out.error_estimate = total_err;
    return out;
}

QuadResult integrate_singular0(const std::function<double(double)>& f, double b,
                               double abs_tol, int geo_panels, int max_panels) {
    std::vector<double> breaks;
    breaks.reserve(geo_panels + 1);
    double lo = b;
    for (int k = 0; k <= geo_panels; ++k) {
        breaks.push_back(lo);
        lo *= 0.5;
    }
    std::reverse(breaks.begin(), breaks.end());

    QuadResult res = integrate_adaptive(f, breaks, abs_tol, max_panels);

    // geometric-ratio tail below the smallest breakpoint: for a power-law
    // integrand the halving panels have exactly geometric integrals
    static const GaussLegendre& rule = gauss_legendre(16);
    const double a0 = breaks[0];
    const double i1 = gl_panel(f, a0 / 2.0, a0, rule);
    const double i2 = gl_panel(f, a0 / 4.0, a0 / 2.0, rule);
    const double i3 = gl_panel(f, a0 / 8.0, a0 / 4.0, rule);
    res.evaluations += 48;
    double tail = 0.0, tail_err = 0.0;
    if (i1 != 0.0 && i2 != 0.0) {
        const double r = i2 / i1;
        const double r2 = (i2 != 0.0) ? i3 / i2 : r;
        if (r > 0.0 && r < 0.999) {
            tail = i2 * r / (1.0 - r);
            tail_err = std::abs(tail) * (std::abs(r - r2) / (1.0 - r) + 1e-12);
        } else if (std::abs(i1) > 0.0) {
            tail_err = std::abs(i1);  // no safe extrapolation; report as error
        }
    }
    res.value += i1 + i2 + tail;
    res.error_estimate += tail_err;
    return res;
}

}  // namespace fexpbayes
