#include "csdrf/waterfilling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>
#include <lapacke.h>

#include "csdrf/errors.hpp"

namespace csdrf {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kRateTol = 1e-9;

} // namespace

bool DrfCurve::is_convex(double tol) const {
    if (points.size() < 3) return true;
    double scale = 0.0;
    for (const auto& p : points) scale = std::max(scale, p.distortion);
    const double eps = tol * std::max(scale, 1e-300);
    for (std::size_t i = 1; i < points.size(); ++i)
        if (points[i].distortion > points[i - 1].distortion + eps) return false;
    for (std::size_t i = 1; i + 1 < points.size(); ++i) {
        const auto& a = points[i - 1];
        const auto& b = points[i];
        const auto& c = points[i + 1];
        if (c.rate <= a.rate) continue;
        const double interp = a.distortion + (c.distortion - a.distortion) * (b.rate - a.rate) / (c.rate - a.rate);
        if (b.distortion > interp + eps) return false;
    }
    return true;
}

Eigen::VectorXd hermitian_eigenvalues(const CMatrix& matrix, double eps_psd) {
    const auto n = matrix.rows();
    if (n != matrix.cols()) throw InvalidArgument("hermitian_eigenvalues: matrix not square");
    Eigen::VectorXd values(n);
    double trace = 0.0;
    if (n == 1) {
        values(0) = matrix(0, 0).real();
        trace = std::abs(values(0));
    } else {
        const CMatrix sym = 0.5 * (matrix + matrix.adjoint());
        Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym, Eigen::EigenvaluesOnly);
        if (solver.info() == Eigen::Success) {
            values = solver.eigenvalues();
        } else {
            CMatrix work = sym;
            const auto ln = static_cast<lapack_int>(n);
            const lapack_int info = LAPACKE_zheevd(
                LAPACK_COL_MAJOR, 'N', 'L', ln, reinterpret_cast<lapack_complex_double*>(work.data()),
                ln, values.data());
            if (info != 0)
                throw NumericError(fmt::format(
                    "hermitian_eigenvalues: no convergence on {}x{} matrix (info {})", n, n, info));
        }
        for (Eigen::Index i = 0; i < n; ++i) trace += std::abs(sym(i, i).real());
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (values(i) >= 0.0) continue;
        if (values(i) < -eps_psd * trace)
            throw NumericError(fmt::format(
                "hermitian_eigenvalues: eigenvalue {:.3e} below -eps * trace ({:.3e})", values(i), trace));
        values(i) = 0.0;
    }
    std::sort(values.data(), values.data() + n);
    return values;
}

Eigen::VectorXd hermitian_eigenvalues(const PsdPcMatrix& matrix, double phi, double eps_psd) {
    try {
        return hermitian_eigenvalues(matrix.eval(phi), eps_psd);
    } catch (const NumericError& e) {
        throw NumericError(fmt::format("{} at phi = {}", e.what(), phi));
    }
}

EigenField EigenField::from_matrix(const PsdPcMatrix& matrix, const QuadratureGrid& grid) {
    EigenField field;
    field.dim_ = matrix.dim;
    field.weights_ = grid.weights;
    field.values_.reserve(grid.size() * static_cast<std::size_t>(matrix.dim));
    field.traces_.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const CMatrix A = matrix.eval(grid.nodes[i]);
        double tr = 0.0;
        for (int m = 0; m < matrix.dim; ++m) tr += A(m, m).real();
        Eigen::VectorXd ev;
        try {
            ev = hermitian_eigenvalues(A);
        } catch (const NumericError& e) {
            throw NumericError(fmt::format("{} at phi = {}", e.what(), grid.nodes[i]));
        }
        for (int m = 0; m < matrix.dim; ++m) {
            if (ev(m) == 0.0 && tr > 0.0) ++field.clamped_;
            field.values_.push_back(ev(m));
        }
        field.traces_.push_back(tr);
        field.max_ = std::max(field.max_, ev(matrix.dim - 1));
    }
    return field;
}

EigenField EigenField::from_scalar(const std::function<double(double)>& density,
                                   const QuadratureGrid& grid) {
    std::vector<double> values;
    values.reserve(grid.size());
    for (double x : grid.nodes) values.push_back(density(x));
    return from_values(1, grid.weights, std::move(values));
}

EigenField EigenField::from_values(int dim, std::vector<double> weights, std::vector<double> values) {
    if (dim < 1) throw InvalidArgument("EigenField: dim must be positive");
    if (values.size() != weights.size() * static_cast<std::size_t>(dim))
        throw InvalidArgument("EigenField: value count does not match nodes * dim");
    EigenField field;
    field.dim_ = dim;
    field.weights_ = std::move(weights);
    field.values_ = std::move(values);
    const auto d = static_cast<std::size_t>(dim);
    for (std::size_t i = 0; i < field.weights_.size(); ++i) {
        auto first = field.values_.begin() + static_cast<std::ptrdiff_t>(i * d);
        double tr = 0.0;
        for (auto it = first; it != first + dim; ++it) {
            tr += *it;
            if (*it < 0.0) {
                *it = 0.0;
                ++field.clamped_;
            }
        }
        std::sort(first, first + dim);
        field.traces_.push_back(tr);
        field.max_ = std::max(field.max_, *(first + dim - 1));
    }
    return field;
}

double EigenField::integrated_trace() const {
    double sum = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        double node = 0.0;
        for (double v : at(i)) node += v;
        sum += weights_[i] * node;
    }
    return sum;
}

RateDistortionPoint waterfill_eval(const EigenField& field, double theta, RateNormalizer norm) {
    if (!(theta >= 0.0)) throw InvalidArgument("waterfill_eval: theta must be nonnegative");
    double dist = 0.0;
    double nats = 0.0;
    bool unbounded = false;
    for (std::size_t i = 0; i < field.nodes(); ++i) {
        const double w = field.weight(i);
        double d_node = 0.0;
        double r_node = 0.0;
        for (double lam : field.at(i)) {
            d_node += std::min(lam, theta);
            if (lam > theta) {
                if (theta == 0.0) {
                    if (w > 0.0) unbounded = true;
                } else {
                    r_node += std::log(lam / theta);
                }
            }
        }
        dist += w * d_node;
        nats += w * r_node;
    }
    RateDistortionPoint p;
    p.theta = theta;
    p.distortion = norm.distortion_scale * dist;
    p.rate = unbounded ? kInf : norm.rate_scale * nats / kLn2;
    return p;
}

RateDistortionPoint solve_water_level(const EigenField& field, double target_rate,
                                      RateNormalizer norm) {
    if (!(target_rate >= 0.0) || !std::isfinite(target_rate))
        throw InvalidArgument(fmt::format("solve_water_level: bad target rate {}", target_rate));
    const double top = field.max_eigenvalue();
    if (top <= 0.0) return {0.0, 0.0, 0.0};
    if (target_rate == 0.0) return waterfill_eval(field, top, norm);

    const double tol = std::max(kRateTol, kRateTol * target_rate);
    double hi = std::log(top);
    double lo = hi - 120.0 * kLn2;
    // widen downwards until the rate at the lower end exceeds the target
    int widen = 0;
    while (waterfill_eval(field, std::exp(lo), norm).rate < target_rate) {
        if (++widen > 8 || std::exp(lo - 120.0 * kLn2) == 0.0)
            throw RateUnreachable(fmt::format(
                "solve_water_level: rate {} bits needs theta below {:.3e}", target_rate, std::exp(lo)));
        hi = lo;
        lo -= 120.0 * kLn2;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (waterfill_eval(field, std::exp(mid), norm).rate > target_rate)
            lo = mid;
        else
            hi = mid;
    }
    const auto a = waterfill_eval(field, std::exp(lo), norm);
    const auto b = waterfill_eval(field, std::exp(hi), norm);
    const auto& best = std::abs(a.rate - target_rate) <= std::abs(b.rate - target_rate) ? a : b;
    if (std::abs(best.rate - target_rate) > tol)
        throw NumericError(fmt::format("solve_water_level: rate {} missed target {} by more than {:.1e}",
                                       best.rate, target_rate, tol));
    return best;
}

DrfCurve drf_curve(const EigenField& field, std::span<const double> rates, RateNormalizer norm) {
    DrfCurve curve;
    curve.M = field.dim();
    curve.grid_points = field.nodes();
    for (double r : rates) curve.points.push_back(solve_water_level(field, r, norm));
    std::sort(curve.points.begin(), curve.points.end(),
              [](const auto& x, const auto& y) { return x.rate < y.rate; });
    return curve;
}

QuadratureGrid stationary_grid(const StationaryPsd& psd, std::size_t grid_points) {
    const double fb = psd.support_radius();
    if (!std::isfinite(fb)) throw InvalidArgument("stationary_drf: needs finite support");
    if (fb == 0.0) return {{0.0}, {0.0}};
    const double scale = 2.0 * fb;
    std::vector<double> phi_breaks;
    for (double b : psd.breakpoints()) phi_breaks.push_back(b / scale);
    auto grid = midpoint_grid(-0.5, 0.5, grid_points, phi_breaks);
    for (auto& x : grid.nodes) x *= scale;
    for (auto& w : grid.weights) w *= scale;
    return grid;
}

RateDistortionPoint stationary_drf(const StationaryPsd& psd, BitsPerSecond rate,
                                   std::size_t grid_points) {
    const auto grid = stationary_grid(psd, grid_points);
    const auto field = EigenField::from_scalar([&](double f) { return psd(f); }, grid);
    return solve_water_level(field, rate.value, RateNormalizer::stationary());
}

} // namespace csdrf
