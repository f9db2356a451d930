// Spectral descriptions of stationary and cyclostationary Gaussian processes
// and the polyphase spectral (PSD-PC) matrices built from them.
//
// Conventions:
//   R_X(t, tau) = E[X(t + tau) X(t)]
//   cpsd(n, f)  = Fourier transform in tau of the n-th Fourier coefficient in t
//                 of R_X(t, tau), the period being T0
//   phi         = normalized frequency in [-1/2, 1/2]; physical Hz only appear
//                 at the API boundary.
//
// The symmetric convention R_X(t + tau/2, tau) is not supported. A spectrum in
// that convention converts with S_asym^n(f) = S_sym^n(f - n/(2 T0)).
#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace csdrf {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// sin(pi x) / (pi x)
double sinc(double x);

/// Nonnegative even spectral density of a stationary source.
class StationaryPsd {
public:
    using Density = std::function<double(double)>;
    using Autocorrelation = std::function<double(double)>;

    /// `breakpoints` lists frequencies where the density is not smooth.
    /// Without `autocorrelation` R_U is obtained by numeric cosine transform;
    /// without `total_power` the density is integrated over its support.
    StationaryPsd(Density density, double support_radius, std::vector<double> breakpoints,
                  Autocorrelation autocorrelation = {},
                  std::optional<double> total_power = std::nullopt);

    /// Constant level on [-F, F] carrying `power`.
    static StationaryPsd flat(double half_width, double power = 1.0);
    /// Triangle of half-width F carrying `power`.
    static StationaryPsd triangular(double half_width, double power = 1.0);
    /// Raised-cosine shape with nominal half-width B and rolloff beta in [0, 1].
    static StationaryPsd raised_cosine(double half_width, double rolloff, double power = 1.0);
    /// Linear interpolation of samples at nonnegative frequencies, mirrored to
    /// negative ones and zero past the last sample. Negative samples are clamped.
    static StationaryPsd tabulated(std::vector<double> frequencies, std::vector<double> values);
    static StationaryPsd zero();

    double operator()(double f) const { return eval(f); }
    double eval(double f) const;
    double support_radius() const { return support_radius_; }
    double total_power() const { return total_power_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    double autocorrelation(double tau) const;
    bool has_analytic_autocorrelation() const { return static_cast<bool>(autocorrelation_); }
    /// Number of negative tabulated samples that were clamped to zero.
    std::size_t clamped_count() const { return clamped_; }

private:
    Density density_;
    double support_radius_;
    std::vector<double> breakpoints_;
    Autocorrelation autocorrelation_;
    double total_power_ = 0.0;
    std::size_t clamped_ = 0;
};

/// Real pulse described by its Fourier transform, optionally with a
/// time-domain form on a compact support.
class PulseShape {
public:
    struct TimeForm {
        std::function<double(double)> value;
        double lo = 0.0;
        double hi = 0.0;
        std::vector<double> breakpoints;
    };

    PulseShape(std::function<Complex(double)> fourier, double energy, double support_radius,
               std::vector<double> breakpoints, std::optional<TimeForm> time = std::nullopt);

    /// p(t) = 1 on [0, w).
    static PulseShape rectangular(double width);
    /// p(t) = A (1 - |t|/a) on [-a, a].
    static PulseShape triangular(double half_width, double amplitude = 1.0);
    /// P(f) = T times the raised-cosine spectrum of symbol period T and rolloff beta.
    static PulseShape raised_cosine(double period, double rolloff);
    /// Arbitrary real-even frequency response supported on [-radius, radius].
    static PulseShape from_frequency_response(std::function<double(double)> response,
                                              double radius, std::vector<double> breakpoints);
    static PulseShape zero();

    PulseShape scaled(double factor) const;

    Complex fourier(double f) const { return fourier_(f); }
    double energy() const { return energy_; }
    double support_radius() const { return support_radius_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    bool time_compact() const { return time_.has_value(); }
    const std::optional<TimeForm>& time_form() const { return time_; }
    double time_value(double t) const;

    /// r_p(tau) = integral of p(t) p(t + tau) dt; needs the time form.
    double autocorrelation(double tau) const;

    /// f -> sum_k |P(f - k/T)|^2.
    std::function<double(double)> lattice_energy(double period) const;

    /// B_t(phi) = T sum_j p(t - jT) e^{2 pi i j phi}
    ///          = sum_k P((phi - k)/T) e^{2 pi i (phi - k) t / T}.
    Complex polyphase_gain(double t, double phi, double period) const;

private:
    std::function<Complex(double)> fourier_;
    double energy_;
    double support_radius_;
    std::vector<double> breakpoints_;
    std::optional<TimeForm> time_;
};

/// Full second-order description of a continuous-time CS Gaussian process.
class CyclicSpectrum {
public:
    struct Description {
        double period = 1.0;
        std::function<Complex(int, double)> cpsd;
        /// cpsd(n, .) vanishes for |n| > max_index; nullopt if unbounded.
        std::optional<int> max_index;
        /// Every cpsd(n, f) vanishes for |f| > support_radius.
        double support_radius = kInf;
        /// Frequencies (Hz) where some cpsd(n, .) is not smooth.
        std::vector<double> breakpoints;
        std::optional<double> average_power;
        /// Closed-form cross spectrum S_{X^{t1} X^{t2}}(phi) of polyphase components.
        std::function<Complex(double, double, double)> cross_psd;
        /// Closed-form PSD-PC matrix (M, phi).
        std::function<CMatrix(int, double)> polyphase_matrix;
        /// Closed-form R_X(t, tau).
        std::function<double(double, double)> covariance;
    };

    explicit CyclicSpectrum(Description d);

    double period() const { return d_.period; }
    Complex cpsd(int n, double f) const;
    std::optional<int> max_index() const { return d_.max_index; }
    double support_radius() const { return d_.support_radius; }
    const std::vector<double>& breakpoints() const { return d_.breakpoints; }
    const Description& description() const { return d_; }

    /// sum_n cpsd(n, f) e^{2 pi i n t / T0}
    Complex tpsd(double t, double f) const;
    /// Inverse transform of cpsd(n, .) at lag tau.
    Complex cyclic_autocorrelation(int n, double tau) const;
    /// R_X(t, tau); closed form when available, numeric inverse transform otherwise.
    double covariance(double t, double tau) const;
    double covariance_by_inverse_transform(double t, double tau) const;
    bool has_closed_form_covariance() const { return static_cast<bool>(d_.covariance); }

    /// S_{X^{t1} X^{t2}}(phi): closed form when available, else the series.
    Complex polyphase_cross_psd(double t1, double t2, double phi) const;
    Complex polyphase_cross_psd_series(double t1, double t2, double phi) const;

    /// Breakpoints folded into phi.
    std::vector<double> phi_breakpoints() const;

    double average_power() const;

private:
    Description d_;
    double average_power_ = 0.0;
};

/// Spectrum of the symbol sequence U(n T0) as a function of f:
/// (1/T0) sum_k S_U(f - k/T0).
std::function<double(double)> symbol_spectrum(const StationaryPsd& base, double period);

/// Stationary process seen as CS with an arbitrary period.
CyclicSpectrum stationary_spectrum(const StationaryPsd& psd, double period);
/// sqrt(2) U(t) cos(2 pi f0 t + phase).
CyclicSpectrum am_cpsd(const StationaryPsd& base, double f0, double phase);
/// sum_n U(n T0) p(t - n T0).
CyclicSpectrum pam_cpsd(const StationaryPsd& base, const PulseShape& pulse, double period);

/// Discrete-time CS Gaussian process of period M.
class DiscreteCsProcess {
public:
    /// tpsd(n, psi) = sum_k R[n, k] e^{-2 pi i k psi}, psi the normalized frequency.
    DiscreteCsProcess(int period, std::function<Complex(int, double)> tpsd,
                      std::vector<double> phi_breakpoints, double average_power);

    /// Independent samples with variances sigma_n^2 repeating with period M.
    static DiscreteCsProcess white(std::vector<double> variances);
    /// X[n] = sum_b h_{n mod M}[b] w[n - b], w unit white noise.
    static DiscreteCsProcess periodic_filter(std::vector<std::vector<double>> taps);
    /// R[n][k + K] = E X[n + k] X[n] for n in 0..M-1 and |k| <= K.
    static DiscreteCsProcess from_covariance(std::vector<std::vector<double>> table);
    /// M = 1 process with the given spectral density over phi in [-1/2, 1/2].
    static DiscreteCsProcess stationary(std::function<double(double)> density,
                                        std::vector<double> phi_breakpoints);

    int period() const { return period_; }
    Complex tpsd(int n, double psi) const;
    const std::vector<double>& phi_breakpoints() const { return breakpoints_; }
    double average_power() const { return average_power_; }

    /// E X[n + k] X[n]; requires a covariance table.
    double covariance(long n, long k) const;
    bool has_covariance() const { return !table_.empty(); }
    long max_lag() const { return max_lag_; }

private:
    int period_;
    std::function<Complex(int, double)> tpsd_;
    std::vector<double> breakpoints_;
    double average_power_;
    std::vector<std::vector<double>> table_;
    long max_lag_ = 0;
};

/// M x M Hermitian polyphase spectral matrix as a function of phi.
struct PsdPcMatrix {
    int dim = 0;
    std::function<CMatrix(double)> eval;
    std::vector<double> breakpoints;

    Complex entry(int m, int r, double phi) const { return eval(phi)(m, r); }
};

PsdPcMatrix psd_pc_matrix_discrete(const DiscreteCsProcess& proc);
/// Uses the closed form attached to the spectrum when available.
PsdPcMatrix psd_pc_matrix_continuous(const CyclicSpectrum& spec, int M);
/// Always evaluates the double series; throws TruncationError if it cannot be truncated.
PsdPcMatrix psd_pc_matrix_series(const CyclicSpectrum& spec, int M);

double average_power(const CyclicSpectrum& spec);
double average_power(const DiscreteCsProcess& proc);

} // namespace csdrf
