#include "csdrf/drf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "csdrf/errors.hpp"

namespace csdrf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// phi grid mapped to f = phi * scale
QuadratureGrid scaled_phi_grid(std::span<const double> phi_breaks, double scale,
                               const GridOptions& opt) {
    auto grid = phi_grid(phi_breaks, opt);
    for (auto& x : grid.nodes) x *= scale;
    for (auto& w : grid.weights) w *= scale;
    return grid;
}

std::vector<int> m_schedule(const ContinuousDrfConfig& cfg) {
    std::vector<int> out;
    for (int M = cfg.m_start; M <= cfg.m_max; M *= 2) out.push_back(M);
    return out;
}

} // namespace

QuadratureGrid phi_grid(std::span<const double> breakpoints, const GridOptions& opt) {
    return midpoint_grid(-0.5, 0.5, opt.phi_points, breakpoints);
}

void ContinuousDrfConfig::validate() const {
    if (m_start < 1) throw InvalidArgument("ContinuousDrfConfig: m_start must be at least 1");
    if (m_max < m_start) throw InvalidArgument("ContinuousDrfConfig: m_max below m_start");
    if (lipschitz_C && *lipschitz_C < 0.0)
        throw InvalidArgument("ContinuousDrfConfig: negative Lipschitz constant");
    if (!(convergence_tol > 0.0)) throw InvalidArgument("ContinuousDrfConfig: tolerance must be positive");
}

// ---------------------------------------------------------------- discrete

RateDistortionPoint drf_cs_discrete(const DiscreteCsProcess& proc, BitsPerSymbol rate,
                                    const GridOptions& opt) {
    const auto matrix = psd_pc_matrix_discrete(proc);
    const auto field = EigenField::from_matrix(matrix, phi_grid(matrix.breakpoints, opt));
    return solve_water_level(field, rate.value, RateNormalizer::per_symbol(proc.period()));
}

DrfCurve drf_cs_discrete_curve(const DiscreteCsProcess& proc, std::span<const double> rates,
                               const GridOptions& opt) {
    const auto matrix = psd_pc_matrix_discrete(proc);
    const auto field = EigenField::from_matrix(matrix, phi_grid(matrix.breakpoints, opt));
    return drf_curve(field, rates, RateNormalizer::per_symbol(proc.period()));
}

// ---------------------------------------------------------------- continuous

double estimate_lipschitz(const CyclicSpectrum& spec, int tau_points, int t_points) {
    const double T0 = spec.period();
    const double h = 2.0 * T0 / (tau_points - 1);
    double slope = 0.0;
    for (int j = 0; j < t_points; ++j) {
        const double t = (j + 0.5) * T0 / t_points;
        double prev = spec.covariance(t, -T0);
        for (int i = 1; i < tau_points; ++i) {
            const double cur = spec.covariance(t, -T0 + i * h);
            slope = std::max(slope, std::abs(cur - prev) / h);
            prev = cur;
        }
    }
    return slope;
}

RateDistortionPoint drf_cs_continuous_at(const CyclicSpectrum& spec, int M, BitsPerSecond rate,
                                         const GridOptions& opt) {
    const auto matrix = psd_pc_matrix_continuous(spec, M);
    const auto field = EigenField::from_matrix(matrix, phi_grid(matrix.breakpoints, opt));
    return solve_water_level(field, rate.value, RateNormalizer::per_second(M, spec.period()));
}

std::vector<ContinuousDrfReport> drf_cs_continuous_curve(const CyclicSpectrum& spec,
                                                         std::span<const double> rates,
                                                         const ContinuousDrfConfig& cfg,
                                                         const GridOptions& opt) {
    cfg.validate();
    const double sigma2 = spec.average_power();
    const double C = cfg.lipschitz_C ? *cfg.lipschitz_C : estimate_lipschitz(spec);
    std::vector<ContinuousDrfReport> reports(rates.size());
    for (auto& r : reports) r.lipschitz_C = C;

    const auto grid = phi_grid(spec.phi_breakpoints(), opt);
    for (int M : m_schedule(cfg)) {
        bool pending = false;
        for (const auto& r : reports) pending = pending || !r.converged;
        if (!pending) break;
        const auto field = EigenField::from_matrix(psd_pc_matrix_continuous(spec, M), grid);
        const auto norm = RateNormalizer::per_second(M, spec.period());
        for (std::size_t i = 0; i < rates.size(); ++i) {
            auto& rep = reports[i];
            if (rep.converged) continue;
            const auto p = solve_water_level(field, rates[i], norm);
            const double gap = rep.iterates.empty()
                                   ? kNaN
                                   : std::abs(p.distortion - rep.iterates.back().point.distortion);
            rep.iterates.push_back({M, p, gap});
            rep.point = p;
            rep.M = M;
            rep.final_gap = gap;
            rep.weyl_bound = 4.0 * C * spec.period() / M;
            rep.converged = !std::isnan(gap) && gap <= cfg.convergence_tol * sigma2;
        }
    }
    return reports;
}

ContinuousDrfReport drf_cs_continuous(const CyclicSpectrum& spec, BitsPerSecond rate,
                                      const ContinuousDrfConfig& cfg, const GridOptions& opt) {
    const double r[] = {rate.value};
    return drf_cs_continuous_curve(spec, r, cfg, opt).front();
}

// ---------------------------------------------------------------- PAM

RateDistortionPoint drf_pam(const StationaryPsd& base, const PulseShape& pulse, double period,
                            BitsPerSecond rate, const GridOptions& opt) {
    if (!(period > 0.0)) throw InvalidArgument("drf_pam: period must be positive");
    if (pulse.support_radius() == 0.0 || base.total_power() == 0.0) return {0.0, rate.value, 0.0};
    const double T0 = period;
    std::vector<double> breaks = base.breakpoints();
    breaks.insert(breaks.end(), pulse.breakpoints().begin(), pulse.breakpoints().end());
    const auto phi_breaks = fold_breakpoints(breaks, T0);
    const auto grid = scaled_phi_grid(phi_breaks, 1.0 / T0, opt);
    const auto symbols = symbol_spectrum(base, T0);
    const auto lattice = pulse.lattice_energy(T0);
    const auto field =
        EigenField::from_scalar([&](double f) { return symbols(f) * lattice(f) / T0; }, grid);
    return solve_water_level(field, rate.value, RateNormalizer::stationary());
}

// ---------------------------------------------------------------- AM

StationaryPsd am_average_psd(const StationaryPsd& base, double f0) {
    std::vector<double> breaks;
    for (double b : base.breakpoints()) {
        breaks.push_back(b + f0);
        breaks.push_back(b - f0);
    }
    return StationaryPsd([base, f0](double f) { return 0.5 * (base(f - f0) + base(f + f0)); },
                         base.support_radius() + f0, std::move(breaks),
                         [base, f0](double tau) {
                             return base.autocorrelation(tau) * std::cos(2.0 * std::numbers::pi * f0 * tau);
                         },
                         base.total_power());
}

AmResult drf_am(const StationaryPsd& base, double f0, BitsPerSecond rate, double phase,
                const ContinuousDrfConfig& cfg, const GridOptions& opt) {
    if (!(f0 > 0.0)) throw InvalidArgument("drf_am: carrier must be positive");
    if (!std::isfinite(base.support_radius()))
        throw InvalidArgument("drf_am: base spectrum must be band-limited");
    AmResult out;
    if (f0 > 2.0 * base.support_radius()) {
        out.point = stationary_drf(base, rate, opt.phi_points);
        out.exact = true;
        return out;
    }
    auto report = drf_cs_continuous(am_cpsd(base, f0, phase), rate, cfg, opt);
    out.point = report.point;
    out.report = std::move(report);
    return out;
}

AmResult drf_am_random_phase(const StationaryPsd& base, double f0, BitsPerSecond rate,
                             const ContinuousDrfConfig& cfg, const GridOptions& opt) {
    return drf_am(base, f0, rate, 0.0, cfg, opt);
}

RateDistortionPoint am_gaussian_upper_bound(const StationaryPsd& base, double f0,
                                            BitsPerSecond rate, const GridOptions& opt) {
    return stationary_drf(am_average_psd(base, f0), rate, opt.phi_points);
}

// ---------------------------------------------------------------- bounds

double lower_bound_discrete(const DiscreteCsProcess& proc, BitsPerSymbol rate,
                            const GridOptions& opt) {
    const int M = proc.period();
    const auto matrix = psd_pc_matrix_discrete(proc);
    const auto grid = phi_grid(matrix.breakpoints, opt);
    std::vector<std::vector<double>> diag(static_cast<std::size_t>(M));
    for (double phi : grid.nodes) {
        const CMatrix A = matrix.eval(phi);
        for (int m = 0; m < M; ++m) diag[static_cast<std::size_t>(m)].push_back(std::max(0.0, A(m, m).real()));
    }
    double sum = 0.0;
    for (int m = 0; m < M; ++m) {
        const auto field = EigenField::from_values(1, grid.weights, diag[static_cast<std::size_t>(m)]);
        sum += solve_water_level(field, M * rate.value, RateNormalizer::stationary()).distortion;
    }
    return sum / M;
}

double lower_bound_continuous(const CyclicSpectrum& spec, BitsPerSecond rate, int t_points,
                              const GridOptions& opt) {
    if (t_points < 1) throw InvalidArgument("lower_bound_continuous: need at least one t point");
    const double T0 = spec.period();
    const auto grid = phi_grid(spec.phi_breakpoints(), opt);
    const RateNormalizer norm{1.0, 0.5 / T0};
    double sum = 0.0;
    for (int j = 0; j < t_points; ++j) {
        const double t = (j + 0.5) * T0 / t_points;
        const auto field = EigenField::from_scalar(
            [&](double phi) { return std::max(0.0, spec.polyphase_cross_psd(t, t, phi).real()); }, grid);
        sum += solve_water_level(field, rate.value, norm).distortion;
    }
    return sum / t_points;
}

// ---------------------------------------------------------------- sampling

MmseFilter mmse_filter(const StationaryPsd& base, double fs) {
    if (!(fs > 0.0)) throw InvalidArgument(fmt::format("mmse_filter: fs = {} must be positive", fs));
    const double fb = base.support_radius();
    if (!std::isfinite(fb)) throw InvalidArgument("mmse_filter: base spectrum must be band-limited");

    auto aliased = [base, fs, fb](double f, bool squared) {
        const auto k0 = static_cast<long>(std::ceil((f - fb) / fs - 1e-12));
        const auto k1 = static_cast<long>(std::floor((f + fb) / fs + 1e-12));
        double sum = 0.0;
        for (long k = k0; k <= k1; ++k) {
            const double s = base(f - static_cast<double>(k) * fs);
            sum += squared ? s * s : s;
        }
        return sum;
    };
    MmseFilter out;
    out.fs = fs;
    out.response = [base, aliased](double f) {
        const double den = aliased(f, false);
        return den > 0.0 ? base(f) / den : 0.0;
    };
    out.folded_J = [aliased](double f) {
        const double den = aliased(f, false);
        return den > 0.0 ? aliased(f, true) / den : 0.0;
    };
    if (base.total_power() == 0.0) return out;

    auto phi_breaks = fold_breakpoints(base.breakpoints(), 1.0 / fs);
    std::vector<double> f_breaks;
    for (double p : phi_breaks) f_breaks.push_back(p * fs);
    const double captured = integrate_panels(out.folded_J, -0.5 * fs, 0.5 * fs, f_breaks, 8);
    out.mmse = std::max(0.0, base.total_power() - captured);
    return out;
}

SampledCodingResult sampled_source_coding(const StationaryPsd& base, double fs, BitsPerSecond rate,
                                          const GridOptions& opt) {
    const auto filter = mmse_filter(base, fs);
    SampledCodingResult out;
    out.mmse = filter.mmse;
    if (base.total_power() == 0.0) {
        out.coding_point = {0.0, rate.value, 0.0};
        return out;
    }
    // J vanishes outside the source band, so only |f| < min(fs/2, f_B) is gridded
    const double half = std::min(0.5 * fs, base.support_radius());
    std::vector<double> f_breaks;
    for (double p : fold_breakpoints(base.breakpoints(), 1.0 / fs))
        if (std::abs(p * fs) < half) f_breaks.push_back(p * fs);
    const auto grid = midpoint_grid(-half, half, opt.phi_points, f_breaks);
    const auto field = EigenField::from_scalar(filter.folded_J, grid);
    out.coding_point = solve_water_level(field, rate.value, RateNormalizer::stationary());
    out.coding = out.coding_point.distortion;
    out.distortion = out.mmse + out.coding;
    return out;
}

} // namespace csdrf
