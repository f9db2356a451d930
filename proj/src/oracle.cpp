#include "csdrf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>
#include <lapacke.h>

#include "csdrf/errors.hpp"

namespace csdrf {

namespace {

std::vector<double> window_grid(double T, std::size_t N) {
    std::vector<double> t(N);
    const double h = 2.0 * T / static_cast<double>(N);
    for (std::size_t i = 0; i < N; ++i) t[i] = -T + (static_cast<double>(i) + 0.5) * h;
    return t;
}

void check_window(const CyclicSpectrum& spec, double T, std::size_t N) {
    if (N < 2) throw InvalidArgument("build_kernel: need at least two grid points");
    const double ratio = T / spec.period();
    if (!(T > 0.0) || std::abs(ratio - std::round(ratio)) > 1e-9 || std::round(ratio) < 1.0)
        throw InvalidArgument(fmt::format("build_kernel: T = {} is not a multiple of T0 = {}", T,
                                          spec.period()));
}

Eigen::VectorXd descending_eigenvalues(const Eigen::MatrixXd& A) {
    Eigen::MatrixXd sym = 0.5 * (A + A.transpose());
    const double trace = std::abs(sym.trace());
    const auto n = static_cast<lapack_int>(sym.rows());
    Eigen::VectorXd ascending(sym.rows());
    const lapack_int info =
        LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, sym.data(), n, ascending.data());
    if (info != 0) throw NumericError(fmt::format("kl_eigenvalues: dsyevd failed with info {}", info));
    Eigen::VectorXd ev = ascending.reverse();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) >= 0.0) continue;
        if (ev(i) < -1e-9 * trace)
            throw NumericError(fmt::format("kl_eigenvalues: eigenvalue {:.3e} below tolerance", ev(i)));
        ev(i) = 0.0;
    }
    return ev;
}

// Parametric pair over a finite eigenvalue list, solved by its own bisection.
RateDistortionPoint finite_waterfill(const Eigen::VectorXd& ev, double rate_scale, double target) {
    if (!(target >= 0.0) || !std::isfinite(target)) throw InvalidArgument("kl_drf: bad target rate");
    const double top = ev.size() ? ev.maxCoeff() : 0.0;
    auto eval = [&](double theta) {
        double d = 0.0, r = 0.0;
        for (Eigen::Index i = 0; i < ev.size(); ++i) {
            d += std::min(theta, ev(i));
            if (ev(i) > theta) r += std::log(ev(i) / theta);
        }
        return RateDistortionPoint{theta, rate_scale * r / std::numbers::ln2, d};
    };
    if (top <= 0.0) return {0.0, 0.0, 0.0};
    if (target == 0.0) return eval(top);
    double lo = 0.0, hi = top;
    // geometric bisection once a positive lower end with rate above target is found
    double floor_theta = top;
    while (eval(floor_theta).rate < target) {
        floor_theta *= 1e-3;
        if (floor_theta < 1e-300) throw RateUnreachable("kl_drf: rate out of range");
    }
    lo = floor_theta;
    for (int it = 0; it < 300; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (mid <= lo || mid >= hi) break;
        if (eval(mid).rate > target)
            lo = mid;
        else
            hi = mid;
    }
    const auto a = eval(lo);
    const auto b = eval(hi);
    return std::abs(a.rate - target) <= std::abs(b.rate - target) ? a : b;
}

} // namespace

KernelGrid build_kernel(const CyclicSpectrum& spec, double T, std::size_t N, KernelRoute route) {
    check_window(spec, T, N);
    KernelGrid k;
    k.times = window_grid(T, N);
    k.half_window = T;
    k.weight = 1.0 / static_cast<double>(N);
    k.values.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    const bool analytic = route == KernelRoute::Analytic ||
                          (route == KernelRoute::Auto && spec.has_closed_form_covariance());
    if (route == KernelRoute::Analytic && !spec.has_closed_form_covariance())
        throw InvalidArgument("build_kernel: spectrum has no closed-form covariance");

    if (analytic) {
        for (std::size_t j = 0; j < N; ++j)
            for (std::size_t i = j; i < N; ++i)
                k.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    spec.covariance(k.times[j], k.times[i] - k.times[j]);
    } else {
        if (!spec.max_index()) throw TruncationError("build_kernel: cyclic index set is unbounded", kInf);
        const int nmax = *spec.max_index();
        const double h = 2.0 * T / static_cast<double>(N);
        // cyclic autocorrelation per lag index
        std::vector<std::vector<Complex>> ca(static_cast<std::size_t>(2 * nmax + 1),
                                             std::vector<Complex>(N));
        for (int n = -nmax; n <= nmax; ++n)
            for (std::size_t l = 0; l < N; ++l)
                ca[static_cast<std::size_t>(n + nmax)][l] =
                    spec.cyclic_autocorrelation(n, static_cast<double>(l) * h);
        const double w = 2.0 * std::numbers::pi / spec.period();
        for (std::size_t j = 0; j < N; ++j) {
            for (std::size_t i = j; i < N; ++i) {
                Complex sum = 0.0;
                for (int n = -nmax; n <= nmax; ++n)
                    sum += ca[static_cast<std::size_t>(n + nmax)][i - j] *
                           std::polar(1.0, w * n * k.times[j]);
                k.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sum.real();
            }
        }
    }
    for (Eigen::Index j = 0; j < k.values.cols(); ++j)
        for (Eigen::Index i = j + 1; i < k.values.rows(); ++i) k.values(j, i) = k.values(i, j);
    return k;
}

KernelGrid build_step_kernel(const CyclicSpectrum& spec, double T, std::size_t N, int M) {
    check_window(spec, T, N);
    if (M < 1) throw InvalidArgument("build_step_kernel: M must be positive");
    KernelGrid k;
    k.times = window_grid(T, N);
    k.half_window = T;
    k.weight = 1.0 / static_cast<double>(N);
    const double step = spec.period() / M;
    std::vector<double> q(N);
    for (std::size_t i = 0; i < N; ++i) q[i] = std::floor(k.times[i] / step) * step;
    const auto n = static_cast<Eigen::Index>(N);
    k.values.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = j; i < n; ++i) {
            const double v = spec.covariance(q[static_cast<std::size_t>(j)],
                                             q[static_cast<std::size_t>(i)] - q[static_cast<std::size_t>(j)]);
            k.values(i, j) = v;
            k.values(j, i) = v;
        }
    return k;
}

BlockCovariance build_block_covariance(const DiscreteCsProcess& proc, std::size_t N) {
    if (N < 1) throw InvalidArgument("build_block_covariance: empty block");
    BlockCovariance b;
    b.N = N;
    const auto n = static_cast<Eigen::Index>(N);
    b.matrix.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            b.matrix(i, j) = proc.covariance(static_cast<long>(j), static_cast<long>(i - j));
    return b;
}

Eigen::VectorXd kl_eigenvalues(const KernelGrid& kernel) {
    return descending_eigenvalues(kernel.weight * kernel.values);
}

Eigen::VectorXd kl_eigenvalues(const BlockCovariance& block) {
    return descending_eigenvalues(block.matrix / static_cast<double>(block.N));
}

RateDistortionPoint kl_drf(const KernelGrid& kernel, BitsPerSecond rate) {
    return finite_waterfill(kl_eigenvalues(kernel), 0.5 / (2.0 * kernel.half_window), rate.value);
}

RateDistortionPoint kl_drf(const BlockCovariance& block, BitsPerSymbol rate) {
    return finite_waterfill(kl_eigenvalues(block), 0.5 / static_cast<double>(block.N), rate.value);
}

WeylCheck weyl_gap(const KernelGrid& a, const KernelGrid& b) {
    if (a.size() != b.size() || a.weight != b.weight)
        throw InvalidArgument("weyl_gap: kernels live on different grids");
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.times[i] != b.times[i]) throw InvalidArgument("weyl_gap: kernels live on different grids");
    const auto ea = kl_eigenvalues(a);
    const auto eb = kl_eigenvalues(b);
    WeylCheck w;
    w.max_gap = (ea - eb).cwiseAbs().maxCoeff();
    w.sup_bound = 2.0 * (a.values - b.values).cwiseAbs().maxCoeff();
    w.holds = w.max_gap <= w.sup_bound + 1e-9;
    return w;
}

} // namespace csdrf
