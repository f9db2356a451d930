// Distortion-rate functions of cyclostationary Gaussian processes, the PAM and
// AM closed forms, polyphase lower bounds and combined sampling and coding.
#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "csdrf/quadrature.hpp"
#include "csdrf/spectral_models.hpp"
#include "csdrf/waterfilling.hpp"

namespace csdrf {

struct GridOptions {
    std::size_t phi_points = 2048;
};

/// Midpoint grid on [-1/2, 1/2] aligned with the given phi breakpoints.
QuadratureGrid phi_grid(std::span<const double> breakpoints, const GridOptions& opt);

struct ContinuousDrfConfig {
    int m_start = 4;
    int m_max = 64;
    /// Lipschitz constant of R_X(t, .); estimated when absent.
    std::optional<double> lipschitz_C;
    double convergence_tol = 1e-6;

    void validate() const;
};

struct ContinuousIterate {
    int M = 0;
    RateDistortionPoint point;
    /// |D_M - D_{M/2}|, NaN for the first iterate.
    double gap = 0.0;
};

struct ContinuousDrfReport {
    RateDistortionPoint point;
    int M = 0;
    bool converged = false;
    double final_gap = 0.0;
    double lipschitz_C = 0.0;
    /// 4 C T0 / M at the final M.
    double weyl_bound = 0.0;
    std::vector<ContinuousIterate> iterates;
};

RateDistortionPoint drf_cs_discrete(const DiscreteCsProcess& proc, BitsPerSymbol rate,
                                    const GridOptions& opt = {});
DrfCurve drf_cs_discrete_curve(const DiscreteCsProcess& proc, std::span<const double> rates,
                               const GridOptions& opt = {});

/// D_M at M = m_start, 2 m_start, ... until |D_{2M} - D_M| <= tol * sigma^2.
ContinuousDrfReport drf_cs_continuous(const CyclicSpectrum& spec, BitsPerSecond rate,
                                      const ContinuousDrfConfig& cfg = {},
                                      const GridOptions& opt = {});
/// Same sweep for several rates, building each eigenvalue field once per M.
std::vector<ContinuousDrfReport> drf_cs_continuous_curve(const CyclicSpectrum& spec,
                                                         std::span<const double> rates,
                                                         const ContinuousDrfConfig& cfg = {},
                                                         const GridOptions& opt = {});
/// D_M at a single M.
RateDistortionPoint drf_cs_continuous_at(const CyclicSpectrum& spec, int M, BitsPerSecond rate,
                                         const GridOptions& opt = {});

/// Max finite-difference slope of R_X(t, .) over tau in [-T0, T0].
double estimate_lipschitz(const CyclicSpectrum& spec, int tau_points = 256, int t_points = 8);

/// Pinsker waterfilling of S~(f) / T0 over |f| < 1/(2 T0), where
/// S~(f) = S_sym(f) sum_k |P(f - k/T0)|^2.
RateDistortionPoint drf_pam(const StationaryPsd& base, const PulseShape& pulse, double period,
                            BitsPerSecond rate, const GridOptions& opt = {});

struct AmResult {
    RateDistortionPoint point;
    /// true when the carrier exceeds twice the base bandwidth and the baseband
    /// DRF is returned; false for the numeric sweep.
    bool exact = false;
    std::optional<ContinuousDrfReport> report;
};

AmResult drf_am(const StationaryPsd& base, double f0, BitsPerSecond rate, double phase = 0.0,
                const ContinuousDrfConfig& cfg = {}, const GridOptions& opt = {});
/// A uniformly random carrier phase leaves the DRF unchanged; this forwards to drf_am.
AmResult drf_am_random_phase(const StationaryPsd& base, double f0, BitsPerSecond rate,
                             const ContinuousDrfConfig& cfg = {}, const GridOptions& opt = {});
/// DRF of the stationary Gaussian process with the time-averaged PSD
/// (S_U(f - f0) + S_U(f + f0)) / 2; an upper bound for the AM process.
RateDistortionPoint am_gaussian_upper_bound(const StationaryPsd& base, double f0,
                                            BitsPerSecond rate, const GridOptions& opt = {});
StationaryPsd am_average_psd(const StationaryPsd& base, double f0);

/// Each polyphase component is waterfilled on its own at M * rate bits per
/// component symbol; returns the mean distortion.
double lower_bound_discrete(const DiscreteCsProcess& proc, BitsPerSymbol rate,
                            const GridOptions& opt = {});
/// Mean over a midpoint t-grid on [0, T0) of the Pinsker distortion of
/// S_{X^t}(phi) at `rate` bits per second.
double lower_bound_continuous(const CyclicSpectrum& spec, BitsPerSecond rate, int t_points = 64,
                              const GridOptions& opt = {});

struct MmseFilter {
    double fs = 1.0;
    std::function<double(double)> response;
    double mmse = 0.0;
    /// J(f) on |f| < fs/2.
    std::function<double(double)> folded_J;
};

MmseFilter mmse_filter(const StationaryPsd& base, double fs);

struct SampledCodingResult {
    double distortion = 0.0;
    double mmse = 0.0;
    double coding = 0.0;
    RateDistortionPoint coding_point;
};

/// mmse(U | samples) plus the Pinsker distortion of J over |f| < fs/2.
SampledCodingResult sampled_source_coding(const StationaryPsd& base, double fs, BitsPerSecond rate,
                                          const GridOptions& opt = {});

} // namespace csdrf
