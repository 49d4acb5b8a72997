#pragma once

#include <cstddef>
#include <vector>

namespace tlhedge {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point rule, computed by Newton iteration on P_n and cached per n.
/// Throws std::invalid_argument for n == 0.
const GaussLegendreRule& gauss_legendre(std::size_t n);

/// Integral of f over [lo, hi] with the n-point rule.
template <class F>
double integrate_gl(const GaussLegendreRule& rule, double lo, double hi, F&& f) {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return half * sum;
}

}  // namespace tlhedge
