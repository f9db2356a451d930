// Quadrature grids and integration helpers used by the spectral code.
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace csdrf {

/// Nodes and weights of a composite quadrature rule. Weights sum to the
/// length of the integration interval.
struct QuadratureGrid {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
    double integrate(const std::function<double(double)>& f) const;
};

/// Composite midpoint rule on [a, b] with roughly n nodes in total.
///
/// Breakpoints inside (a, b) split the interval into panels and every panel
/// gets its own midpoint cells (at least one), with nodes allotted in
/// proportion to panel length. Discontinuities supplied as breakpoints
/// therefore fall on cell boundaries.
QuadratureGrid midpoint_grid(double a, double b, std::size_t n,
                             std::span<const double> breakpoints = {});

/// Maps frequencies f to normalized frequencies scale * f reduced modulo 1 into
/// [-1/2, 1/2]; sorted, with near-duplicates removed.
std::vector<double> fold_breakpoints(std::span<const double> frequencies, double scale);

/// Gauss-Legendre integral of f over [a, b], split at breakpoints and with
/// each panel subdivided `subdivisions` times.
double integrate_panels(const std::function<double(double)>& f, double a, double b,
                        std::span<const double> breakpoints = {}, int subdivisions = 4);

/// Sorted copy with entries closer than tol merged.
std::vector<double> sorted_unique(std::vector<double> values, double tol = 1e-12);

} // namespace csdrf
