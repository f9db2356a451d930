#include "csdrf/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss.hpp>

#include "csdrf/errors.hpp"

namespace csdrf {

double QuadratureGrid::integrate(const std::function<double(double)>& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
}

std::vector<double> sorted_unique(std::vector<double> values, double tol) {
    std::sort(values.begin(), values.end());
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values) {
        if (out.empty() || v - out.back() > tol) out.push_back(v);
    }
    return out;
}

namespace {

std::vector<double> panel_edges(double a, double b, std::span<const double> breakpoints) {
    std::vector<double> edges{a, b};
    const double tol = 1e-12 * std::max(1.0, b - a);
    for (double x : breakpoints) {
        if (x > a + tol && x < b - tol) edges.push_back(x);
    }
    return sorted_unique(std::move(edges), tol);
}

} // namespace

QuadratureGrid midpoint_grid(double a, double b, std::size_t n,
                             std::span<const double> breakpoints) {
    if (!(b > a)) throw InvalidArgument("midpoint_grid: empty interval");
    if (n == 0) throw InvalidArgument("midpoint_grid: zero nodes requested");
    const auto edges = panel_edges(a, b, breakpoints);
    const double length = b - a;

    QuadratureGrid grid;
    grid.nodes.reserve(n + edges.size());
    grid.weights.reserve(n + edges.size());
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double lo = edges[p];
        const double hi = edges[p + 1];
        const auto cells = static_cast<std::size_t>(
            std::max<long long>(1, std::llround(static_cast<double>(n) * (hi - lo) / length)));
        const double h = (hi - lo) / static_cast<double>(cells);
        for (std::size_t c = 0; c < cells; ++c) {
            grid.nodes.push_back(lo + (static_cast<double>(c) + 0.5) * h);
            grid.weights.push_back(h);
        }
    }
    return grid;
}

std::vector<double> fold_breakpoints(std::span<const double> frequencies, double scale) {
    std::vector<double> out;
    out.reserve(frequencies.size());
    for (double f : frequencies) {
        if (!std::isfinite(f)) continue;
        const double phi = scale * f;
        out.push_back(phi - std::round(phi));
    }
    return sorted_unique(std::move(out));
}

double integrate_panels(const std::function<double(double)>& f, double a, double b,
                        std::span<const double> breakpoints, int subdivisions) {
    if (b <= a) return 0.0;
    using Rule = boost::math::quadrature::gauss<double, 20>;
    const auto edges = panel_edges(a, b, breakpoints);
    const int sub = std::max(1, subdivisions);
    double sum = 0.0;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double h = (edges[p + 1] - edges[p]) / sub;
        for (int s = 0; s < sub; ++s) {
            const double lo = edges[p] + s * h;
            sum += Rule::integrate(f, lo, lo + h);
        }
    }
    return sum;
}

} // namespace csdrf
