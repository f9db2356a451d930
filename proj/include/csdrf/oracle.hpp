// Finite-window Karhunen-Loeve ground truth: Nystrom eigenvalues of
// discretized covariance kernels and the parametric DRF they induce.
#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "csdrf/spectral_models.hpp"
#include "csdrf/waterfilling.hpp"

namespace csdrf {

/// K(t_i, t_j) on the midpoint grid of [-T, T]. The 1/(2T) normalization and
/// the cell width are folded into `weight` = 1/N, so the operator
/// eigenvalues are those of weight * values.
struct KernelGrid {
    std::vector<double> times;
    Eigen::MatrixXd values;
    double weight = 0.0;
    double half_window = 0.0;

    std::size_t size() const { return times.size(); }
};

/// Covariance matrix of (X[0], ..., X[N-1]).
struct BlockCovariance {
    std::size_t N = 0;
    Eigen::MatrixXd matrix;
};

enum class KernelRoute { Auto, Analytic, InverseTransform };

/// K(t, s) = E X(t) X(s) = R_X(s, t - s). T must be a positive multiple of T0.
KernelGrid build_kernel(const CyclicSpectrum& spec, double T, std::size_t N,
                        KernelRoute route = KernelRoute::Auto);

/// Step approximation K(q(t), q(s)) with q(t) = floor(t M / T0) T0 / M, on the
/// same grid as build_kernel.
KernelGrid build_step_kernel(const CyclicSpectrum& spec, double T, std::size_t N, int M);

BlockCovariance build_block_covariance(const DiscreteCsProcess& proc, std::size_t N);

/// Eigenvalues of weight * values, descending.
Eigen::VectorXd kl_eigenvalues(const KernelGrid& kernel);
/// Eigenvalues of matrix / N, descending.
Eigen::VectorXd kl_eigenvalues(const BlockCovariance& block);

/// Rate in bits per second over the window.
RateDistortionPoint kl_drf(const KernelGrid& kernel, BitsPerSecond rate);
/// Rate in bits per symbol over the block.
RateDistortionPoint kl_drf(const BlockCovariance& block, BitsPerSymbol rate);

struct WeylCheck {
    double max_gap = 0.0;
    double sup_bound = 0.0;
    bool holds = false;
};

/// max_l |lambda_l(A) - lambda_l(B)| of the weighted, descending-sorted
/// eigenvalues against 2 sup |K_A - K_B|.
WeylCheck weyl_gap(const KernelGrid& a, const KernelGrid& b);

} // namespace csdrf
