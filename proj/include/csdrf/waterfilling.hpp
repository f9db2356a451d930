// Parametric reverse waterfilling over eigenvalue fields.
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "csdrf/quadrature.hpp"
#include "csdrf/spectral_models.hpp"

namespace csdrf {

/// One point of a parametric curve. `theta` is in the units of the field the
/// point came from; `rate` is in bits per symbol or bits per second.
struct RateDistortionPoint {
    double theta = 0.0;
    double rate = 0.0;
    double distortion = 0.0;
};

struct DrfCurve {
    std::vector<RateDistortionPoint> points;
    int M = 1;
    std::size_t grid_points = 0;
    std::string note;

    /// Nonnegative second differences in rate (up to tol * sigma^2), and
    /// distortion non-increasing.
    bool is_convex(double tol = 1e-9) const;
};

/// Strong rate kinds; conversion needs an explicit period or sampling rate.
struct BitsPerSymbol {
    double value = 0.0;
};
struct BitsPerSecond {
    double value = 0.0;
};
inline BitsPerSecond to_bits_per_second(BitsPerSymbol r, double symbol_rate) {
    return {r.value * symbol_rate};
}
inline BitsPerSymbol to_bits_per_symbol(BitsPerSecond r, double symbol_rate) {
    return {r.value / symbol_rate};
}

/// D = distortion_scale * sum_m int min(lambda_m, theta)
/// R = rate_scale * sum_m int log+(lambda_m / theta)   (reported in bits)
struct RateNormalizer {
    double distortion_scale = 1.0;
    double rate_scale = 0.5;

    static RateNormalizer per_symbol(int M) { return {1.0 / M, 0.5 / M}; }
    static RateNormalizer per_second(int M, double period) { return {1.0 / M, 0.5 / period}; }
    static RateNormalizer stationary() { return {1.0, 0.5}; }
};

/// Eigenvalues of a PSD-PC matrix sampled on a quadrature grid. Storage is
/// node-major with eigenvalues ascending at every node.
class EigenField {
public:
    static EigenField from_matrix(const PsdPcMatrix& matrix, const QuadratureGrid& grid);
    /// dim = 1 field from a scalar spectral density on the grid.
    static EigenField from_scalar(const std::function<double(double)>& density,
                                  const QuadratureGrid& grid);
    /// Arbitrary nonnegative values, `values[i * dim + m]`; sorted per node here.
    static EigenField from_values(int dim, std::vector<double> weights, std::vector<double> values);

    int dim() const { return dim_; }
    std::size_t nodes() const { return weights_.size(); }
    double weight(std::size_t i) const { return weights_[i]; }
    double eigenvalue(std::size_t i, int m) const { return values_[i * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(m)]; }
    std::span<const double> at(std::size_t i) const {
        return {values_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
    }
    double trace(std::size_t i) const { return traces_[i]; }
    double max_eigenvalue() const { return max_; }
    /// sum_i w_i sum_m lambda_m
    double integrated_trace() const;
    /// Number of negative eigenvalues clamped to zero.
    std::size_t clamped() const { return clamped_; }

private:
    int dim_ = 1;
    std::vector<double> weights_;
    std::vector<double> values_;
    std::vector<double> traces_;
    double max_ = 0.0;
    std::size_t clamped_ = 0;
};

/// Ascending real eigenvalues of (A + A^*)/2. Values in [-eps_psd * trace, 0)
/// are clamped to 0; anything lower throws NumericError.
Eigen::VectorXd hermitian_eigenvalues(const CMatrix& matrix, double eps_psd = 1e-9);
Eigen::VectorXd hermitian_eigenvalues(const PsdPcMatrix& matrix, double phi, double eps_psd = 1e-9);

RateDistortionPoint waterfill_eval(const EigenField& field, double theta, RateNormalizer norm);

/// Bisection on log(theta) until the rate matches target within
/// max(1e-9, 1e-9 * target).
RateDistortionPoint solve_water_level(const EigenField& field, double target_rate,
                                      RateNormalizer norm);

DrfCurve drf_curve(const EigenField& field, std::span<const double> rates, RateNormalizer norm);

/// Pinsker pair over the support of the psd, rate in bits per second.
RateDistortionPoint stationary_drf(const StationaryPsd& psd, BitsPerSecond rate,
                                   std::size_t grid_points = 2048);
/// Frequency grid used by stationary_drf: the phi grid on [-1/2, 1/2] mapped
/// to [-f_B, f_B].
QuadratureGrid stationary_grid(const StationaryPsd& psd, std::size_t grid_points);

} // namespace csdrf
