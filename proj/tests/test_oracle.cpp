#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "csdrf/drf.hpp"
#include "csdrf/errors.hpp"
#include "csdrf/oracle.hpp"

using namespace csdrf;

namespace {

constexpr double kPi = std::numbers::pi;

double sinc_ref(double x) { return x == 0.0 ? 1.0 : std::sin(kPi * x) / (kPi * x); }

} // namespace

TEST(BuildKernel, StationaryIsToeplitz) {
    const auto spec = stationary_spectrum(StationaryPsd::triangular(1.0, 1.0), 0.5);
    const auto k = build_kernel(spec, 2.0, 64);
    EXPECT_DOUBLE_EQ(k.weight, 1.0 / 64);
    for (int i = 1; i < 64; ++i)
        for (int j = 1; j < 64; ++j) EXPECT_NEAR(k.values(i, j), k.values(i - 1, j - 1), 1e-13);
}

TEST(BuildKernel, AmDiagonalAndOffDiagonal) {
    const double f0 = 1.2;
    const auto spec = am_cpsd(StationaryPsd::flat(1.0, 1.0), f0, 0.0);
    const double T = 5.0 * spec.period();
    const auto k = build_kernel(spec, T, 48);
    for (std::size_t i = 0; i < k.size(); ++i) {
        const double t = k.times[i];
        EXPECT_NEAR(k.values(i, i), 2.0 * std::pow(std::cos(2 * kPi * f0 * t), 2), 1e-13);
        for (std::size_t j = 0; j < k.size(); j += 7) {
            const double s = k.times[j];
            const double direct = 2.0 * std::cos(2 * kPi * f0 * t) * std::cos(2 * kPi * f0 * s) * sinc_ref(2.0 * (t - s));
            EXPECT_NEAR(k.values(i, j), direct, 1e-13);
        }
    }
}

TEST(BuildKernel, InverseTransformMatchesClosedForm) {
    const auto spec = am_cpsd(StationaryPsd::triangular(1.0, 1.0), 1.2, 0.4);
    const double T = 2.0 * spec.period();
    const auto a = build_kernel(spec, T, 40, KernelRoute::Analytic);
    const auto b = build_kernel(spec, T, 40, KernelRoute::InverseTransform);
    EXPECT_LE((a.values - b.values).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(BuildKernel, StaircaseIsPiecewiseConstant) {
    const double T0 = 1.0;
    const auto spec = pam_cpsd(StationaryPsd::flat(1.0, 1.0), PulseShape::rectangular(T0), T0);
    const auto k = build_kernel(spec, 4.0, 64);
    auto cell = [&](std::size_t i) { return std::floor(k.times[i] / T0); };
    for (std::size_t i = 1; i < k.size(); ++i)
        for (std::size_t j = 0; j < k.size(); ++j)
            if (cell(i) == cell(i - 1)) EXPECT_NEAR(k.values(i, j), k.values(i - 1, j), 1e-13);
}

TEST(BuildKernel, RejectsBadWindows) {
    const auto spec = am_cpsd(StationaryPsd::flat(1.0), 4.0, 0.0);
    EXPECT_THROW(build_kernel(spec, 0.3, 64), InvalidArgument);
    EXPECT_THROW(build_kernel(spec, 1.0, 1), InvalidArgument);
}

TEST(KlDrf, WhiteSymbols) {
    for (std::size_t N : {16u, 64u}) {
        const auto block = build_block_covariance(DiscreteCsProcess::white({1.0}), N);
        for (double R : {0.25, 1.0, 3.0})
            EXPECT_NEAR(kl_drf(block, BitsPerSymbol{R}).distortion, std::pow(2.0, -2 * R), 1e-9) << N << " " << R;
    }
}

TEST(KlDrf, AlternatingVariances) {
    const auto block = build_block_covariance(DiscreteCsProcess::white({1.0, 4.0}), 64);
    EXPECT_NEAR(kl_drf(block, BitsPerSymbol{0.5}).distortion, 1.0, 1e-3);
    const auto ev = kl_eigenvalues(block);
    EXPECT_NEAR(ev(0), 4.0 / 64, 1e-14);
    EXPECT_NEAR(ev(63), 1.0 / 64, 1e-14);
}

TEST(KlDrf, FlatStationaryConvergesWithWindow) {
    const auto psd = StationaryPsd::flat(1.0, 1.0);
    const auto spec = stationary_spectrum(psd, 0.5);
    const double ref = stationary_drf(psd, BitsPerSecond{1.0}).distortion;
    std::vector<double> gaps;
    for (double T : {4.0, 8.0, 16.0}) {
        const auto k = build_kernel(spec, T, static_cast<std::size_t>(16 * T));
        gaps.push_back(std::abs(kl_drf(k, BitsPerSecond{1.0}).distortion - ref));
    }
    for (std::size_t i = 1; i < gaps.size(); ++i) {
        const double ratio = gaps[i - 1] / gaps[i];
        EXPECT_GT(ratio, 1.5) << i;
        EXPECT_LT(ratio, 2.8) << i;
    }
}

TEST(WeylGap, IdenticalKernels) {
    const auto spec = am_cpsd(StationaryPsd::flat(1.0), 1.2, 0.0);
    const auto k = build_kernel(spec, spec.period() * 4, 32);
    const auto w = weyl_gap(k, k);
    EXPECT_EQ(w.max_gap, 0.0);
    EXPECT_TRUE(w.holds);
}

TEST(WeylGap, DiagonalShift) {
    const auto spec = am_cpsd(StationaryPsd::flat(1.0), 1.2, 0.0);
    const auto a = build_kernel(spec, spec.period() * 4, 32);
    auto b = a;
    const double eps = 1e-3;
    b.values += eps * Eigen::MatrixXd::Identity(32, 32);
    const auto w = weyl_gap(a, b);
    // the operator is weight * values, so the shift seen by its eigenvalues is eps / N
    EXPECT_NEAR(w.max_gap, eps / 32, 1e-14);
    EXPECT_NEAR(w.sup_bound, 2 * eps, 1e-15);
    EXPECT_TRUE(w.holds);
}

TEST(WeylGap, StepApproximationOfAm) {
    const auto spec = am_cpsd(StationaryPsd::triangular(1.0, 1.0), 1.2, 0.0);
    const double T = 2.0 * spec.period();
    const auto exact = build_kernel(spec, T, 512);
    double previous = 0.0;
    for (int M : {16, 32}) {
        const auto w = weyl_gap(exact, build_step_kernel(spec, T, 512, M));
        EXPECT_TRUE(w.holds) << M;
        if (previous > 0.0) EXPECT_GE(previous / w.max_gap, 1.8);
        previous = w.max_gap;
    }
}

TEST(WeylGap, RejectsMismatchedGrids) {
    const auto spec = am_cpsd(StationaryPsd::flat(1.0), 1.2, 0.0);
    EXPECT_THROW(weyl_gap(build_kernel(spec, spec.period(), 16), build_kernel(spec, spec.period(), 32)),
                 InvalidArgument);
}
