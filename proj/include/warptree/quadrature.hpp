#pragma once

#include <functional>
#include <vector>

namespace warptree {

/// Nodes and weights on [-1,1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Cached, thread-safe; order >= 1.
const GaussLegendreRule& gauss_legendre(int order);

struct QuadratureOptions {
    int order = 16;           // base Gauss-Legendre order; the check uses 2*order
    double tolerance = 1e-10; // absolute, over the whole range
};

/// Composite Gauss-Legendre over [a,b] split at `breakpoints` (values outside
/// (a,b) are ignored). Each piece is accepted when the order-m and order-2m
/// results agree to its share of the tolerance, otherwise it is bisected.
/// Throws Error{quadrature} when the estimated error cannot be brought below
/// the tolerance.
double integrate(const std::function<double(double)>& fn, double a, double b, std::vector<double> breakpoints = {},
                 const QuadratureOptions& options = {});

}  // namespace warptree
