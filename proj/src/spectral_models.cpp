#include "csdrf/spectral_models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "csdrf/errors.hpp"
#include "csdrf/quadrature.hpp"

namespace csdrf {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Complex expi(double x) { return {std::cos(x), std::sin(x)}; }

// Integral of g over [a, b] split at breaks, with enough Gauss panels to
// resolve oscillations of frequency `oscillation` (cycles per unit).
template <class G>
Complex integrate_oscillatory(G&& g, double a, double b, const std::vector<double>& breaks,
                              double oscillation) {
    std::vector<double> edges{a, b};
    for (double x : breaks) {
        if (x > a && x < b) edges.push_back(x);
    }
    edges = sorted_unique(std::move(edges), 1e-13 * std::max(1.0, b - a));
    Complex sum = 0.0;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double len = edges[p + 1] - edges[p];
        const int sub = std::max(2, static_cast<int>(std::ceil(len * std::abs(oscillation) * 2.0)));
        const double h = len / sub;
        for (int s = 0; s < sub; ++s) {
            const double lo = edges[p] + s * h;
            const double re = integrate_panels([&](double x) { return g(x).real(); }, lo, lo + h, {}, 1);
            const double im = integrate_panels([&](double x) { return g(x).imag(); }, lo, lo + h, {}, 1);
            sum += Complex(re, im);
        }
    }
    return sum;
}

std::vector<double> symmetric(std::initializer_list<double> positive) {
    std::vector<double> out;
    for (double x : positive) {
        out.push_back(x);
        out.push_back(-x);
    }
    return sorted_unique(std::move(out));
}

// Integer range [ceil(lo), floor(hi)].
std::pair<long, long> int_range(double lo, double hi) {
    return {static_cast<long>(std::ceil(lo - 1e-12)), static_cast<long>(std::floor(hi + 1e-12))};
}

} // namespace

double sinc(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - (kPi * x) * (kPi * x) / 6.0;
    return std::sin(kPi * x) / (kPi * x);
}

// ---------------------------------------------------------------- StationaryPsd

StationaryPsd::StationaryPsd(Density density, double support_radius,
                             std::vector<double> breakpoints, Autocorrelation autocorrelation,
                             std::optional<double> total_power)
    : density_(std::move(density)),
      support_radius_(support_radius),
      breakpoints_(sorted_unique(std::move(breakpoints))),
      autocorrelation_(std::move(autocorrelation)) {
    if (!(support_radius_ >= 0.0)) throw InvalidArgument("StationaryPsd: negative support radius");
    if (total_power) {
        total_power_ = *total_power;
    } else if (support_radius_ == 0.0) {
        total_power_ = 0.0;
    } else if (std::isfinite(support_radius_)) {
        total_power_ = integrate_panels(density_, -support_radius_, support_radius_, breakpoints_, 8);
    } else {
        throw InvalidArgument("StationaryPsd: infinite support needs an explicit total power");
    }
}

double StationaryPsd::eval(double f) const {
    if (std::abs(f) > support_radius_) return 0.0;
    return density_(f);
}

double StationaryPsd::autocorrelation(double tau) const {
    if (autocorrelation_) return autocorrelation_(tau);
    if (support_radius_ == 0.0) return 0.0;
    if (!std::isfinite(support_radius_))
        throw TruncationError("StationaryPsd: numeric autocorrelation needs finite support", kInf);
    const auto value = integrate_oscillatory(
        [&](double f) { return Complex(density_(f) * std::cos(kTwoPi * f * tau), 0.0); },
        -support_radius_, support_radius_, breakpoints_, tau);
    return value.real();
}

StationaryPsd StationaryPsd::flat(double half_width, double power) {
    if (!(half_width > 0.0)) throw InvalidArgument("flat: half width must be positive");
    const double level = power / (2.0 * half_width);
    return StationaryPsd([level](double) { return level; }, half_width,
                         symmetric({half_width}),
                         [=](double tau) { return power * sinc(2.0 * half_width * tau); }, power);
}

StationaryPsd StationaryPsd::triangular(double half_width, double power) {
    if (!(half_width > 0.0)) throw InvalidArgument("triangular: half width must be positive");
    const double peak = power / half_width;
    return StationaryPsd(
        [=](double f) { return std::max(0.0, peak * (1.0 - std::abs(f) / half_width)); },
        half_width, symmetric({0.0, half_width}),
        [=](double tau) {
            const double s = sinc(half_width * tau);
            return power * s * s;
        },
        power);
}

StationaryPsd StationaryPsd::raised_cosine(double half_width, double rolloff, double power) {
    if (!(half_width > 0.0)) throw InvalidArgument("raised_cosine: half width must be positive");
    if (rolloff < 0.0 || rolloff > 1.0) throw InvalidArgument("raised_cosine: rolloff outside [0, 1]");
    const double level = power / (2.0 * half_width);
    const double inner = half_width * (1.0 - rolloff);
    const double outer = half_width * (1.0 + rolloff);
    auto density = [=](double f) {
        const double a = std::abs(f);
        if (a <= inner) return level;
        if (a > outer) return 0.0;
        return level * 0.5 * (1.0 + std::cos(kPi * (a - inner) / (2.0 * rolloff * half_width)));
    };
    auto acf = [=](double tau) {
        const double u = 4.0 * rolloff * half_width * tau;
        const double shape = std::abs(std::abs(u) - 1.0) < 1e-9
                                 ? kPi / 4.0
                                 : std::cos(kPi * u / 2.0) / (1.0 - u * u);
        return power * sinc(2.0 * half_width * tau) * shape;
    };
    return StationaryPsd(density, outer, symmetric({inner, outer}), acf, power);
}

StationaryPsd StationaryPsd::tabulated(std::vector<double> frequencies, std::vector<double> values) {
    if (frequencies.size() != values.size() || frequencies.size() < 2)
        throw InvalidArgument("tabulated: need at least two matching samples");
    if (frequencies.front() < 0.0 || !std::is_sorted(frequencies.begin(), frequencies.end()))
        throw InvalidArgument("tabulated: frequencies must be nonnegative and ascending");
    std::size_t clamped = 0;
    for (double& v : values) {
        if (v < 0.0) {
            v = 0.0;
            ++clamped;
        }
    }
    auto fs = std::make_shared<std::vector<double>>(std::move(frequencies));
    auto vs = std::make_shared<std::vector<double>>(std::move(values));
    auto density = [fs, vs](double f) {
        const double a = std::abs(f);
        if (a < fs->front()) return vs->front();
        if (a >= fs->back()) return a == fs->back() ? vs->back() : 0.0;
        const auto it = std::upper_bound(fs->begin(), fs->end(), a);
        const std::size_t i = static_cast<std::size_t>(it - fs->begin());
        const double x0 = (*fs)[i - 1], x1 = (*fs)[i];
        const double w = (a - x0) / (x1 - x0);
        return (1.0 - w) * (*vs)[i - 1] + w * (*vs)[i];
    };
    std::vector<double> breaks;
    for (double f : *fs) {
        breaks.push_back(f);
        breaks.push_back(-f);
    }
    StationaryPsd psd(density, fs->back(), std::move(breaks));
    psd.clamped_ = clamped;
    return psd;
}

StationaryPsd StationaryPsd::zero() {
    return StationaryPsd([](double) { return 0.0; }, 0.0, {}, [](double) { return 0.0; }, 0.0);
}

// ---------------------------------------------------------------- PulseShape

PulseShape::PulseShape(std::function<Complex(double)> fourier, double energy,
                       double support_radius, std::vector<double> breakpoints,
                       std::optional<TimeForm> time)
    : fourier_(std::move(fourier)),
      energy_(energy),
      support_radius_(support_radius),
      breakpoints_(sorted_unique(std::move(breakpoints))),
      time_(std::move(time)) {
    if (!(energy_ >= 0.0) || !std::isfinite(energy_))
        throw InvalidArgument("PulseShape: energy must be finite and nonnegative");
}

PulseShape PulseShape::rectangular(double width) {
    if (!(width > 0.0)) throw InvalidArgument("rectangular: width must be positive");
    TimeForm tf{[width](double t) { return (t >= 0.0 && t < width) ? 1.0 : 0.0; }, 0.0, width,
                {0.0, width}};
    return PulseShape(
        [width](double f) { return width * expi(-kPi * f * width) * sinc(f * width); }, width, kInf,
        {}, tf);
}

PulseShape PulseShape::triangular(double half_width, double amplitude) {
    if (!(half_width > 0.0)) throw InvalidArgument("triangular pulse: half width must be positive");
    const double a = half_width;
    TimeForm tf{[=](double t) { return std::max(0.0, amplitude * (1.0 - std::abs(t) / a)); }, -a, a,
                {-a, 0.0, a}};
    return PulseShape(
        [=](double f) {
            const double s = sinc(f * a);
            return Complex(amplitude * a * s * s, 0.0);
        },
        amplitude * amplitude * 2.0 * a / 3.0, kInf, {}, tf);
}

PulseShape PulseShape::raised_cosine(double period, double rolloff) {
    if (!(period > 0.0)) throw InvalidArgument("raised_cosine pulse: period must be positive");
    if (rolloff < 0.0 || rolloff > 1.0)
        throw InvalidArgument("raised_cosine pulse: rolloff outside [0, 1]");
    const double inner = (1.0 - rolloff) / (2.0 * period);
    const double outer = (1.0 + rolloff) / (2.0 * period);
    auto response = [=](double f) {
        const double a = std::abs(f);
        if (a <= inner) return period;
        if (a > outer) return 0.0;
        return period * 0.5 * (1.0 + std::cos(kPi * period / rolloff * (a - inner)));
    };
    return PulseShape([response](double f) { return Complex(response(f), 0.0); },
                      period * (1.0 - rolloff / 4.0), outer, symmetric({inner, outer}));
}

PulseShape PulseShape::from_frequency_response(std::function<double(double)> response,
                                               double radius, std::vector<double> breakpoints) {
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw InvalidArgument("from_frequency_response: radius must be positive and finite");
    auto r = [response, radius](double f) { return std::abs(f) > radius ? 0.0 : response(f); };
    const double energy =
        integrate_panels([&](double f) { return r(f) * r(f); }, -radius, radius, breakpoints, 8);
    return PulseShape([r](double f) { return Complex(r(f), 0.0); }, energy, radius,
                      std::move(breakpoints));
}

PulseShape PulseShape::zero() {
    return PulseShape([](double) { return Complex(0.0, 0.0); }, 0.0, 0.0, {});
}

PulseShape PulseShape::scaled(double factor) const {
    auto fourier = fourier_;
    std::optional<TimeForm> tf;
    if (time_) {
        tf = *time_;
        auto v = time_->value;
        tf->value = [v, factor](double t) { return factor * v(t); };
    }
    return PulseShape([fourier, factor](double f) { return factor * fourier(f); },
                      energy_ * factor * factor, support_radius_, breakpoints_, tf);
}

double PulseShape::time_value(double t) const {
    if (!time_) throw InvalidArgument("PulseShape: no time-domain form");
    if (t < time_->lo || t > time_->hi) return 0.0;
    return time_->value(t);
}

double PulseShape::autocorrelation(double tau) const {
    if (!time_) throw InvalidArgument("PulseShape: autocorrelation needs the time-domain form");
    const double lo = std::max(time_->lo, time_->lo - tau);
    const double hi = std::min(time_->hi, time_->hi - tau);
    if (hi <= lo) return 0.0;
    std::vector<double> breaks = time_->breakpoints;
    for (double b : time_->breakpoints) breaks.push_back(b - tau);
    return integrate_panels([&](double t) { return time_value(t) * time_value(t + tau); }, lo, hi,
                            breaks, 1);
}

std::function<double(double)> PulseShape::lattice_energy(double period) const {
    if (!(period > 0.0)) throw InvalidArgument("lattice_energy: period must be positive");
    if (support_radius_ == 0.0) return [](double) { return 0.0; };
    if (time_) {
        const double span = time_->hi - time_->lo;
        const auto J = static_cast<long>(std::ceil(span / period));
        std::vector<double> r;
        for (long j = 0; j <= J; ++j) r.push_back(autocorrelation(static_cast<double>(j) * period));
        return [r, period](double f) {
            double sum = r[0];
            for (std::size_t j = 1; j < r.size(); ++j)
                sum += 2.0 * r[j] * std::cos(kTwoPi * f * static_cast<double>(j) * period);
            return period * sum;
        };
    }
    if (std::isfinite(support_radius_)) {
        const double fp = support_radius_;
        auto fourier = fourier_;
        return [fourier, fp, period](double f) {
            const auto [k0, k1] = int_range((f - fp) * period, (f + fp) * period);
            double sum = 0.0;
            for (long k = k0; k <= k1; ++k) sum += std::norm(fourier(f - static_cast<double>(k) / period));
            return sum;
        };
    }
    throw TruncationError("lattice_energy: pulse is neither time- nor band-limited", kInf);
}

Complex PulseShape::polyphase_gain(double t, double phi, double period) const {
    if (support_radius_ == 0.0) return 0.0;
    if (time_) {
        const auto [j0, j1] = int_range((t - time_->hi) / period, (t - time_->lo) / period);
        Complex sum = 0.0;
        for (long j = j0; j <= j1; ++j) {
            const double jj = static_cast<double>(j);
            sum += time_value(t - jj * period) * expi(kTwoPi * jj * phi);
        }
        return period * sum;
    }
    if (std::isfinite(support_radius_)) {
        const double fp = support_radius_ * period;
        const auto [k0, k1] = int_range(phi - fp, phi + fp);
        Complex sum = 0.0;
        for (long k = k0; k <= k1; ++k) {
            const double nu = (phi - static_cast<double>(k)) / period;
            sum += fourier_(nu) * expi(kTwoPi * nu * t);
        }
        return sum;
    }
    throw TruncationError("polyphase_gain: pulse is neither time- nor band-limited", kInf);
}

// ---------------------------------------------------------------- CyclicSpectrum

CyclicSpectrum::CyclicSpectrum(Description d) : d_(std::move(d)) {
    if (!(d_.period > 0.0)) throw InvalidArgument("CyclicSpectrum: period must be positive");
    if (!d_.cpsd) throw InvalidArgument("CyclicSpectrum: cpsd callable missing");
    d_.breakpoints = sorted_unique(std::move(d_.breakpoints));
    if (d_.average_power) {
        average_power_ = *d_.average_power;
    } else if (d_.support_radius == 0.0) {
        average_power_ = 0.0;
    } else if (std::isfinite(d_.support_radius)) {
        const double R = d_.support_radius;
        average_power_ = integrate_panels([&](double f) { return cpsd(0, f).real(); }, -R, R,
                                          d_.breakpoints, 8);
    } else {
        throw NumericError("CyclicSpectrum: average power diverges or needs a closed form");
    }
}

Complex CyclicSpectrum::cpsd(int n, double f) const {
    if (d_.max_index && std::abs(n) > *d_.max_index) return 0.0;
    if (std::abs(f) > d_.support_radius) return 0.0;
    return d_.cpsd(n, f);
}

Complex CyclicSpectrum::tpsd(double t, double f) const {
    if (!d_.max_index) throw TruncationError("tpsd: cyclic index set is unbounded", kInf);
    Complex sum = 0.0;
    for (int n = -*d_.max_index; n <= *d_.max_index; ++n)
        sum += cpsd(n, f) * expi(kTwoPi * n * t / d_.period);
    return sum;
}

Complex CyclicSpectrum::cyclic_autocorrelation(int n, double tau) const {
    if (d_.max_index && std::abs(n) > *d_.max_index) return 0.0;
    const double R = d_.support_radius;
    if (R == 0.0) return 0.0;
    if (!std::isfinite(R))
        throw TruncationError("cyclic_autocorrelation: spectrum has unbounded support", kInf);
    // breakpoints of cpsd(n, .) repeat on the 1/T0 lattice
    std::vector<double> breaks;
    const double step = 1.0 / d_.period;
    const auto shifts = static_cast<long>(std::ceil(2.0 * R / step)) + 1;
    for (double b : d_.breakpoints) {
        for (long j = -shifts; j <= shifts; ++j) {
            const double x = b + static_cast<double>(j) * step;
            if (std::abs(x) < R) breaks.push_back(x);
        }
    }
    return integrate_oscillatory([&](double f) { return cpsd(n, f) * expi(kTwoPi * f * tau); }, -R,
                                 R, breaks, tau);
}

double CyclicSpectrum::covariance(double t, double tau) const {
    if (d_.covariance) return d_.covariance(t, tau);
    return covariance_by_inverse_transform(t, tau);
}

double CyclicSpectrum::covariance_by_inverse_transform(double t, double tau) const {
    if (!d_.max_index) throw TruncationError("covariance: cyclic index set is unbounded", kInf);
    Complex sum = 0.0;
    for (int n = -*d_.max_index; n <= *d_.max_index; ++n)
        sum += cyclic_autocorrelation(n, tau) * expi(kTwoPi * n * t / d_.period);
    return sum.real();
}

Complex CyclicSpectrum::polyphase_cross_psd(double t1, double t2, double phi) const {
    if (d_.cross_psd) return d_.cross_psd(t1, t2, phi);
    return polyphase_cross_psd_series(t1, t2, phi);
}

Complex CyclicSpectrum::polyphase_cross_psd_series(double t1, double t2, double phi) const {
    const double T0 = d_.period;
    const double R = d_.support_radius;
    if (!std::isfinite(R))
        throw TruncationError("polyphase series: spectrum has unbounded support", kInf);
    const auto [k0, k1] = int_range(phi - R * T0, phi + R * T0);
    Complex sum = 0.0;
    for (long k = k0; k <= k1; ++k) {
        const double fk = (phi - static_cast<double>(k)) / T0;
        sum += tpsd(t2, fk) * expi(kTwoPi * (t1 - t2) * fk);
    }
    return sum / T0;
}

std::vector<double> CyclicSpectrum::phi_breakpoints() const {
    return fold_breakpoints(d_.breakpoints, d_.period);
}

double CyclicSpectrum::average_power() const { return average_power_; }

CyclicSpectrum stationary_spectrum(const StationaryPsd& psd, double period) {
    CyclicSpectrum::Description d;
    d.period = period;
    d.cpsd = [psd](int n, double f) { return n == 0 ? Complex(psd(f), 0.0) : Complex(0.0, 0.0); };
    d.max_index = 0;
    d.support_radius = psd.support_radius();
    d.breakpoints = psd.breakpoints();
    d.average_power = psd.total_power();
    d.covariance = [psd](double, double tau) { return psd.autocorrelation(tau); };
    return CyclicSpectrum(std::move(d));
}

CyclicSpectrum am_cpsd(const StationaryPsd& base, double f0, double phase) {
    if (!(f0 > 0.0)) throw InvalidArgument(fmt::format("am_cpsd: carrier {} must be positive", f0));
    CyclicSpectrum::Description d;
    d.period = 1.0 / f0;
    d.cpsd = [base, f0, phase](int n, double f) -> Complex {
        switch (n) {
        case 0: return 0.5 * (base(f + f0) + base(f - f0));
        case 2: return 0.5 * base(f - f0) * expi(2.0 * phase);
        case -2: return 0.5 * base(f + f0) * expi(-2.0 * phase);
        default: return 0.0;
        }
    };
    d.max_index = 2;
    d.support_radius = base.support_radius() + f0;
    for (double b : base.breakpoints()) {
        d.breakpoints.push_back(b + f0);
        d.breakpoints.push_back(b - f0);
    }
    d.average_power = base.total_power();
    d.covariance = [base, f0, phase](double t, double tau) {
        return 2.0 * std::cos(kTwoPi * f0 * (t + tau) + phase) * std::cos(kTwoPi * f0 * t + phase) *
               base.autocorrelation(tau);
    };
    return CyclicSpectrum(std::move(d));
}

std::function<double(double)> symbol_spectrum(const StationaryPsd& base, double period) {
    const double T0 = period;
    const double fb = base.support_radius();
    if (!std::isfinite(fb))
        throw TruncationError("symbol_spectrum: needs a band-limited source", kInf);
    return [base, T0, fb](double f) {
        const auto [k0, k1] = int_range((f - fb) * T0, (f + fb) * T0);
        double sum = 0.0;
        for (long k = k0; k <= k1; ++k) sum += base(f - static_cast<double>(k) / T0);
        return sum / T0;
    };
}

CyclicSpectrum pam_cpsd(const StationaryPsd& base, const PulseShape& pulse, double period) {
    if (!(period > 0.0))
        throw InvalidArgument(fmt::format("pam_cpsd: period {} must be positive", period));
    const double T0 = period;
    const double fb = base.support_radius();
    if (!std::isfinite(fb))
        throw TruncationError("pam_cpsd: symbol spectrum needs a band-limited source", kInf);

    const auto symbols = symbol_spectrum(base, T0);

    CyclicSpectrum::Description d;
    d.period = T0;
    d.cpsd = [pulse, symbols, T0](int n, double f) {
        return pulse.fourier(f) * std::conj(pulse.fourier(f - n / T0)) * symbols(f) / T0;
    };
    const double fp = pulse.support_radius();
    if (std::isfinite(fp)) d.max_index = static_cast<int>(std::floor(2.0 * fp * T0)) + 1;
    d.support_radius = fp;
    d.breakpoints = base.breakpoints();
    d.breakpoints.insert(d.breakpoints.end(), pulse.breakpoints().begin(), pulse.breakpoints().end());

    if (fp == 0.0) {
        d.average_power = 0.0;
    } else {
        const auto lattice = pulse.lattice_energy(T0);
        const double half = 0.5 / T0;
        std::vector<double> fold = fold_breakpoints(d.breakpoints, T0);
        for (double& x : fold) x /= T0;
        d.average_power = integrate_panels([&](double f) { return symbols(f) * lattice(f); }, -half,
                                           half, fold, 8) /
                          T0;
    }

    if (pulse.time_compact() || std::isfinite(fp)) {
        d.cross_psd = [pulse, symbols, T0](double t1, double t2, double phi) {
            const double s = symbols(phi / T0) / (T0 * T0);
            return s * pulse.polyphase_gain(t1, phi, T0) * std::conj(pulse.polyphase_gain(t2, phi, T0));
        };
        d.polyphase_matrix = [pulse, symbols, T0](int M, double phi) {
            const double s = symbols(phi / T0) / (T0 * T0);
            Eigen::VectorXcd b(M);
            for (int m = 0; m < M; ++m) b(m) = pulse.polyphase_gain(m * T0 / M, phi, T0);
            CMatrix out = s * (b * b.adjoint());
            return out;
        };
    }
    if (pulse.time_compact()) {
        const auto& tf = *pulse.time_form();
        const double lo = tf.lo, hi = tf.hi;
        d.covariance = [base, pulse, T0, lo, hi](double t, double tau) {
            const auto [n0, n1] = int_range((t + tau - hi) / T0, (t + tau - lo) / T0);
            const auto [m0, m1] = int_range((t - hi) / T0, (t - lo) / T0);
            double sum = 0.0;
            for (long n = n0; n <= n1; ++n) {
                const double pn = pulse.time_value(t + tau - static_cast<double>(n) * T0);
                if (pn == 0.0) continue;
                for (long m = m0; m <= m1; ++m) {
                    const double pm = pulse.time_value(t - static_cast<double>(m) * T0);
                    if (pm == 0.0) continue;
                    sum += base.autocorrelation(static_cast<double>(n - m) * T0) * pn * pm;
                }
            }
            return sum;
        };
    }
    return CyclicSpectrum(std::move(d));
}

// ---------------------------------------------------------------- DiscreteCsProcess

DiscreteCsProcess::DiscreteCsProcess(int period, std::function<Complex(int, double)> tpsd,
                                     std::vector<double> phi_breakpoints, double average_power)
    : period_(period),
      tpsd_(std::move(tpsd)),
      breakpoints_(sorted_unique(std::move(phi_breakpoints))),
      average_power_(average_power) {
    if (period_ < 1) throw InvalidArgument("DiscreteCsProcess: period must be at least 1");
}

DiscreteCsProcess DiscreteCsProcess::white(std::vector<double> variances) {
    if (variances.empty()) throw InvalidArgument("white: no variances");
    std::vector<std::vector<double>> table;
    for (double v : variances) {
        if (v < 0.0) throw InvalidArgument("white: negative variance");
        table.push_back({v});
    }
    return from_covariance(std::move(table));
}

DiscreteCsProcess DiscreteCsProcess::periodic_filter(std::vector<std::vector<double>> taps) {
    if (taps.empty()) throw InvalidArgument("periodic_filter: no taps");
    const long M = static_cast<long>(taps.size());
    std::size_t L = 0;
    for (const auto& h : taps) L = std::max(L, h.size());
    if (L == 0) throw InvalidArgument("periodic_filter: empty filters");
    const long K = static_cast<long>(L) - 1;
    auto tap = [&](long n, long b) -> double {
        const auto& h = taps[static_cast<std::size_t>(((n % M) + M) % M)];
        return (b >= 0 && b < static_cast<long>(h.size())) ? h[static_cast<std::size_t>(b)] : 0.0;
    };
    std::vector<std::vector<double>> table(static_cast<std::size_t>(M),
                                           std::vector<double>(static_cast<std::size_t>(2 * K + 1)));
    for (long n = 0; n < M; ++n) {
        for (long k = -K; k <= K; ++k) {
            double sum = 0.0;
            for (long b = 0; b < static_cast<long>(L); ++b) sum += tap(n + k, b + k) * tap(n, b);
            table[static_cast<std::size_t>(n)][static_cast<std::size_t>(k + K)] = sum;
        }
    }
    return from_covariance(std::move(table));
}

DiscreteCsProcess DiscreteCsProcess::from_covariance(std::vector<std::vector<double>> table) {
    if (table.empty()) throw InvalidArgument("from_covariance: empty table");
    const std::size_t width = table.front().size();
    if (width % 2 == 0) throw InvalidArgument("from_covariance: rows need odd length 2K+1");
    for (const auto& row : table)
        if (row.size() != width) throw InvalidArgument("from_covariance: ragged table");
    const long M = static_cast<long>(table.size());
    const long K = static_cast<long>(width / 2);
    auto at = [&](long n, long k) {
        return table[static_cast<std::size_t>(((n % M) + M) % M)][static_cast<std::size_t>(k + K)];
    };
    double scale = 0.0;
    for (long n = 0; n < M; ++n) scale = std::max(scale, std::abs(at(n, 0)));
    for (long n = 0; n < M; ++n) {
        for (long k = 1; k <= K; ++k) {
            if (std::abs(at(n, -k) - at(n - k, k)) > 1e-12 * std::max(1.0, scale))
                throw InvalidArgument(
                    fmt::format("from_covariance: R[{}, {}] != R[{}, {}]", n, -k, n - k, k));
        }
    }
    double power = 0.0;
    for (long n = 0; n < M; ++n) power += at(n, 0);
    power /= static_cast<double>(M);

    auto shared = std::make_shared<std::vector<std::vector<double>>>(table);
    auto tpsd = [shared, K](int n, double psi) {
        const auto& row = (*shared)[static_cast<std::size_t>(n)];
        Complex sum = 0.0;
        for (long k = -K; k <= K; ++k)
            sum += row[static_cast<std::size_t>(k + K)] * expi(-kTwoPi * static_cast<double>(k) * psi);
        return sum;
    };
    DiscreteCsProcess proc(static_cast<int>(M), tpsd, {}, power);
    proc.table_ = std::move(table);
    proc.max_lag_ = K;
    return proc;
}

DiscreteCsProcess DiscreteCsProcess::stationary(std::function<double(double)> density,
                                                std::vector<double> phi_breakpoints) {
    const double power = integrate_panels(density, -0.5, 0.5, phi_breakpoints, 8);
    auto tpsd = [density](int, double psi) {
        return Complex(density(psi - std::round(psi)), 0.0);
    };
    return DiscreteCsProcess(1, tpsd, std::move(phi_breakpoints), power);
}

Complex DiscreteCsProcess::tpsd(int n, double psi) const {
    if (n < 0 || n >= period_) throw InvalidArgument("tpsd: phase index outside 0..M-1");
    return tpsd_(n, psi);
}

double DiscreteCsProcess::covariance(long n, long k) const {
    if (table_.empty()) throw InvalidArgument("covariance: process has no covariance table");
    if (std::abs(k) > max_lag_) return 0.0;
    const long M = period_;
    return table_[static_cast<std::size_t>(((n % M) + M) % M)][static_cast<std::size_t>(k + max_lag_)];
}

// ---------------------------------------------------------------- PSD-PC matrices

PsdPcMatrix psd_pc_matrix_discrete(const DiscreteCsProcess& proc) {
    const int M = proc.period();
    PsdPcMatrix out;
    out.dim = M;
    std::vector<double> scaled;
    for (double b : proc.phi_breakpoints()) scaled.push_back(M * b);
    out.breakpoints = fold_breakpoints(scaled, 1.0);
    out.eval = [proc, M](double phi) {
        CMatrix A = CMatrix::Zero(M, M);
        for (int n = 0; n < M; ++n) {
            const double psi = (phi - n) / M;
            const Complex w = expi(kTwoPi * psi);
            for (int r = 0; r < M; ++r) {
                const Complex s = proc.tpsd(r, psi);
                // e^{2 pi i (m - r) psi}, starting from m = 0
                Complex ph = expi(-kTwoPi * r * psi);
                for (int m = 0; m < M; ++m) {
                    A(m, r) += s * ph;
                    ph *= w;
                }
            }
        }
        A /= static_cast<double>(M);
        return A;
    };
    return out;
}

PsdPcMatrix psd_pc_matrix_series(const CyclicSpectrum& spec, int M) {
    if (M < 1) throw InvalidArgument("psd_pc_matrix: M must be positive");
    if (!spec.max_index())
        throw TruncationError("psd_pc_matrix: cyclic index set is unbounded", kInf);
    if (!std::isfinite(spec.support_radius()))
        throw TruncationError("psd_pc_matrix: spectrum has unbounded support", kInf);
    PsdPcMatrix out;
    out.dim = M;
    out.breakpoints = spec.phi_breakpoints();
    out.eval = [spec, M](double phi) {
        const double T0 = spec.period();
        const int N = *spec.max_index();
        const double R = spec.support_radius();
        const auto [k0, k1] = int_range(phi - R * T0, phi + R * T0);
        CMatrix A = CMatrix::Zero(M, M);
        std::vector<Complex> c(static_cast<std::size_t>(2 * N + 1));
        std::vector<Complex> v(static_cast<std::size_t>(M));
        std::vector<Complex> lag(static_cast<std::size_t>(2 * M - 1));
        for (long k = k0; k <= k1; ++k) {
            const double u = phi - static_cast<double>(k);
            const double fk = u / T0;
            bool any = false;
            for (int n = -N; n <= N; ++n) {
                c[static_cast<std::size_t>(n + N)] = spec.cpsd(n, fk);
                any = any || c[static_cast<std::size_t>(n + N)] != Complex(0.0, 0.0);
            }
            if (!any) continue;
            for (int r = 0; r < M; ++r) {
                Complex s = 0.0;
                for (int n = -N; n <= N; ++n)
                    s += c[static_cast<std::size_t>(n + N)] * expi(kTwoPi * n * r / static_cast<double>(M));
                v[static_cast<std::size_t>(r)] = s;
            }
            for (int d = -(M - 1); d <= M - 1; ++d)
                lag[static_cast<std::size_t>(d + M - 1)] = expi(kTwoPi * d * u / M);
            for (int r = 0; r < M; ++r)
                for (int m = 0; m < M; ++m)
                    A(m, r) += lag[static_cast<std::size_t>(m - r + M - 1)] * v[static_cast<std::size_t>(r)];
        }
        A /= T0;
        return A;
    };
    return out;
}

PsdPcMatrix psd_pc_matrix_continuous(const CyclicSpectrum& spec, int M) {
    if (M < 1) throw InvalidArgument("psd_pc_matrix: M must be positive");
    const auto& d = spec.description();
    if (d.polyphase_matrix) {
        PsdPcMatrix out;
        out.dim = M;
        out.breakpoints = spec.phi_breakpoints();
        auto hook = d.polyphase_matrix;
        out.eval = [hook, M](double phi) { return hook(M, phi); };
        return out;
    }
    if (d.cross_psd) {
        PsdPcMatrix out;
        out.dim = M;
        out.breakpoints = spec.phi_breakpoints();
        out.eval = [spec, M](double phi) {
            const double T0 = spec.period();
            CMatrix A(M, M);
            for (int m = 0; m < M; ++m)
                for (int r = 0; r < M; ++r)
                    A(m, r) = spec.polyphase_cross_psd(m * T0 / M, r * T0 / M, phi);
            return A;
        };
        return out;
    }
    return psd_pc_matrix_series(spec, M);
}

double average_power(const CyclicSpectrum& spec) { return spec.average_power(); }
double average_power(const DiscreteCsProcess& proc) { return proc.average_power(); }

} // namespace csdrf
