#include "warptree/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "warptree/error.hpp"
#include "warptree/format.hpp"

namespace warptree {

namespace {

GaussLegendreRule build_rule(int order) {
    GaussLegendreRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const int half = (order + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Tricomi initial guess, then Newton on P_order.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int m = 2; m <= order; ++m) {
                const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
                p0 = p1;
                p1 = p2;
            }
            const double p = order == 1 ? x : p1;
            const double pm1 = order == 1 ? 1.0 : p0;
            dp = order * (x * p - pm1) / (x * x - 1.0);
            const double step = p / dp;
            x -= step;
            if (std::abs(step) < 1e-16) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[order - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[i] = w;
        rule.weights[order - 1 - i] = w;
    }
    return rule;
}

double apply(const GaussLegendreRule& rule, const std::function<double(double)>& fn, double a, double b) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * fn(mid + half * rule.nodes[i]);
    return sum * half;
}

struct Adaptive {
    const std::function<double(double)>& fn;
    const GaussLegendreRule& coarse;
    const GaussLegendreRule& fine;
    double tolerance_density;  // allowed error per unit length
    double min_width;
    double forced_error = 0.0;
    long budget = 1L << 18;  // subdivisions before giving up

    double run(double a, double b) {
        const double lo = apply(coarse, fn, a, b);
        const double hi = apply(fine, fn, a, b);
        if (!std::isfinite(hi)) fail(ErrorCode::quadrature, "non-finite integrand on [" + format_double(a) + "," + format_double(b) + "]");
        const double delta = std::abs(hi - lo);
        if (delta <= tolerance_density * (b - a)) return hi;
        const double mid = 0.5 * (a + b);
        if (b - a <= min_width || !(mid > a && mid < b)) {
            forced_error += delta;
            return hi;
        }
        if (--budget < 0) fail(ErrorCode::quadrature, "quadrature did not converge (subdivision budget exhausted)");
        return run(a, mid) + run(mid, b);
    }
};

}  // namespace

const GaussLegendreRule& gauss_legendre(int order) {
    if (order < 1) fail(ErrorCode::invalid_argument, "quadrature order must be >= 1");
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<GaussLegendreRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[order];
    if (!slot) slot = std::make_unique<GaussLegendreRule>(build_rule(order));
    return *slot;
}

double integrate(const std::function<double(double)>& fn, double a, double b, std::vector<double> breakpoints,
                 const QuadratureOptions& options) {
    if (!(b >= a)) fail(ErrorCode::invalid_argument, "integration range reversed");
    if (b == a) return 0.0;
    breakpoints.erase(std::remove_if(breakpoints.begin(), breakpoints.end(),
                                     [&](double t) { return !(t > a && t < b); }),
                      breakpoints.end());
    breakpoints.push_back(a);
    breakpoints.push_back(b);
    std::sort(breakpoints.begin(), breakpoints.end());
    breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());

    Adaptive adaptive{fn, gauss_legendre(options.order), gauss_legendre(2 * options.order),
                      options.tolerance / (b - a), (b - a) * 1e-15};
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) total += adaptive.run(breakpoints[i], breakpoints[i + 1]);
    if (adaptive.forced_error > options.tolerance)
        fail(ErrorCode::quadrature, "quadrature did not converge (residual " + format_double(adaptive.forced_error) + ")");
    return total;
}

}  // namespace warptree
