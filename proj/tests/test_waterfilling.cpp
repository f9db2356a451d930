#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "csdrf/drf.hpp"
#include "csdrf/errors.hpp"
#include "csdrf/quadrature.hpp"
#include "csdrf/waterfilling.hpp"

using namespace csdrf;

namespace {

// roots of det(x I - A) for a 3x3 Hermitian A, by sign scan and bisection
std::vector<double> charpoly_roots(const CMatrix& A) {
    const double tr = A.trace().real();
    double minors = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) minors += (A(i, i) * A(j, j) - A(i, j) * A(j, i)).real();
    const double det = A.determinant().real();
    auto p = [&](double x) { return ((x - tr) * x + minors) * x - det; };
    const double bound = A.cwiseAbs().rowwise().sum().maxCoeff() + 1.0;
    std::vector<double> roots;
    const int n = 20000;
    double a = -bound, pa = p(a);
    for (int i = 1; i <= n; ++i) {
        const double b = -bound + 2.0 * bound * i / n;
        const double pb = p(b);
        if (pa == 0.0) roots.push_back(a);
        else if ((pa < 0) != (pb < 0)) {
            double lo = a, hi = b;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if ((p(mid) < 0) == (pa < 0)) lo = mid;
                else hi = mid;
            }
            roots.push_back(0.5 * (lo + hi));
        }
        a = b;
        pa = pb;
    }
    return roots;
}

EigenField constant_field(std::vector<double> eigs, std::size_t nodes = 16) {
    const int dim = static_cast<int>(eigs.size());
    std::vector<double> weights(nodes, 1.0 / static_cast<double>(nodes));
    std::vector<double> values;
    for (std::size_t i = 0; i < nodes; ++i) values.insert(values.end(), eigs.begin(), eigs.end());
    return EigenField::from_values(dim, weights, values);
}

} // namespace

TEST(HermitianEigenvalues, TwoByTwoClosedForm) {
    const double a = 2.0;
    const Complex b(0.6, -0.8);
    CMatrix A(2, 2);
    A << a, b, std::conj(b), a;
    const auto ev = hermitian_eigenvalues(A);
    EXPECT_NEAR(ev(0), a - std::abs(b), 1e-14);
    EXPECT_NEAR(ev(1), a + std::abs(b), 1e-14);
}

TEST(HermitianEigenvalues, ScaledIdentity) {
    const auto ev = hermitian_eigenvalues(CMatrix(3.5 * CMatrix::Identity(4, 4)));
    for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(ev(i), 3.5);
}

TEST(HermitianEigenvalues, RandomPsdMatchesCharacteristicPolynomial) {
    std::mt19937 rng(5);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 10; ++trial) {
        CMatrix B(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) B(i, j) = Complex(g(rng), g(rng));
        const CMatrix A = B * B.adjoint();
        const auto ev = hermitian_eigenvalues(A);
        const auto roots = charpoly_roots(A);
        ASSERT_EQ(roots.size(), 3u);
        for (int i = 0; i < 3; ++i) EXPECT_NEAR(ev(i), roots[static_cast<std::size_t>(i)], 1e-9 * (1.0 + roots[2]));
    }
}

TEST(HermitianEigenvalues, ClampsRoundoffAndRejectsIndefinite) {
    CMatrix A = CMatrix::Zero(2, 2);
    A(0, 0) = 1.0;
    A(1, 1) = -1e-13;
    EXPECT_EQ(hermitian_eigenvalues(A)(0), 0.0);
    CMatrix B(2, 2);
    B << 1.0, 2.0, 2.0, 1.0;
    EXPECT_THROW(hermitian_eigenvalues(B), NumericError);
}

TEST(EigenField, SortsAndIsPermutationInvariant) {
    const auto a = EigenField::from_values(3, {0.5, 0.5}, {3.0, 1.0, 2.0, 0.2, 5.0, 0.1});
    const auto b = EigenField::from_values(3, {0.5, 0.5}, {1.0, 2.0, 3.0, 5.0, 0.1, 0.2});
    EXPECT_EQ(a.at(0)[0], 1.0);
    EXPECT_EQ(a.at(1)[2], 5.0);
    for (double theta : {0.05, 0.7, 2.5}) {
        const auto pa = waterfill_eval(a, theta, RateNormalizer::per_symbol(3));
        const auto pb = waterfill_eval(b, theta, RateNormalizer::per_symbol(3));
        EXPECT_EQ(pa.rate, pb.rate);
        EXPECT_EQ(pa.distortion, pb.distortion);
    }
}

TEST(WaterfillEval, LevelAboveSpectrumGivesZeroRate) {
    const auto field = constant_field({1.0, 4.0});
    const auto p = waterfill_eval(field, 4.0, RateNormalizer::per_symbol(2));
    EXPECT_EQ(p.rate, 0.0);
    EXPECT_DOUBLE_EQ(p.distortion, 2.5);
}

TEST(WaterfillEval, AlternatingVariancesHandValue) {
    const auto p = waterfill_eval(constant_field({1.0, 4.0}), 1.0, RateNormalizer::per_symbol(2));
    EXPECT_NEAR(p.distortion, 1.0, 1e-15);
    EXPECT_NEAR(p.rate, 0.5, 1e-15);
}

TEST(WaterfillEval, FlatBandClosedForm) {
    // lambda = c on a phi-band of measure 2 W, zero elsewhere
    const double W = 0.3, c = 1.7;
    const auto grid = midpoint_grid(-0.5, 0.5, 1000, std::vector<double>{-W, W});
    const auto field = EigenField::from_scalar([&](double phi) { return std::abs(phi) < W ? c : 0.0; }, grid);
    for (double R : {0.1, 0.6, 2.0}) {
        const auto p = solve_water_level(field, R, RateNormalizer::stationary());
        EXPECT_NEAR(p.distortion, 2 * W * c * std::pow(2.0, -R / W), 1e-9) << R;
    }
}

TEST(SolveWaterLevel, ZeroRate) {
    const auto field = constant_field({1.0, 4.0});
    const auto p = solve_water_level(field, 0.0, RateNormalizer::per_symbol(2));
    EXPECT_DOUBLE_EQ(p.theta, 4.0);
    EXPECT_DOUBLE_EQ(p.distortion, 2.5);
}

TEST(SolveWaterLevel, InvertsHandValue) {
    const auto p = solve_water_level(constant_field({1.0, 4.0}), 0.5, RateNormalizer::per_symbol(2));
    EXPECT_NEAR(p.theta, 1.0, 1e-9);
    EXPECT_NEAR(p.distortion, 1.0, 1e-9);
}

TEST(SolveWaterLevel, RejectsBadTargets) {
    const auto field = constant_field({1.0});
    EXPECT_THROW(solve_water_level(field, -1.0, RateNormalizer::stationary()), InvalidArgument);
    EXPECT_THROW(solve_water_level(field, std::nan(""), RateNormalizer::stationary()), InvalidArgument);
}

TEST(SolveWaterLevel, UnreachableRate) {
    const auto field = EigenField::from_values(1, {1e-9}, {1.0});
    EXPECT_THROW(solve_water_level(field, 1e3, RateNormalizer::stationary()), RateUnreachable);
}

TEST(StationaryDrf, FlatClosedForm) {
    const auto psd = StationaryPsd::flat(1.0, 1.0);
    EXPECT_NEAR(stationary_drf(psd, BitsPerSecond{1.0}).distortion, 0.5, 1e-12);
    EXPECT_NEAR(stationary_drf(psd, BitsPerSecond{0.0}).distortion, 1.0, 1e-12);
    for (double R : {0.0, 1.0, 3.0})
        EXPECT_NEAR(stationary_drf(StationaryPsd::flat(1.0, 2.0), BitsPerSecond{R}).distortion,
                    2.0 * std::pow(2.0, -R), 1e-9);
}

TEST(StationaryDrf, TriangularMatchesNyquistSampledSequence) {
    const auto psd = StationaryPsd::triangular(1.0, 1.0);
    const double fs = 2.0;
    const auto seq = DiscreteCsProcess::stationary([&](double phi) { return fs * psd(fs * phi); },
                                                   std::vector<double>{0.0});
    const double R = 1.0;
    const auto a = stationary_drf(psd, BitsPerSecond{R});
    const auto b = drf_cs_discrete(seq, BitsPerSymbol{R / fs});
    EXPECT_NEAR(a.distortion, b.distortion, 1e-12 * a.distortion);
}

TEST(DrfCurve, MonotoneAndConvex) {
    const auto field = constant_field({0.3, 1.0, 4.0});
    std::vector<double> rates;
    for (int i = 0; i <= 20; ++i) rates.push_back(0.25 * i);
    const auto curve = drf_curve(field, rates, RateNormalizer::per_symbol(3));
    EXPECT_TRUE(curve.is_convex());
    for (std::size_t i = 1; i < curve.points.size(); ++i)
        EXPECT_LT(curve.points[i].distortion, curve.points[i - 1].distortion);
}

TEST(RateUnits, Conversions) {
    EXPECT_DOUBLE_EQ(to_bits_per_second(BitsPerSymbol{0.5}, 4.0).value, 2.0);
    EXPECT_DOUBLE_EQ(to_bits_per_symbol(BitsPerSecond{3.0}, 2.0).value, 1.5);
}
