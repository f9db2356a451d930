// Scenario files for the command-line front end and the CSV they produce.
//
// A scenario is an INI file. Sections and keys:
//
//   [scenario]  name
//   [source]    kind = stationary | discrete-cs | am | pam | sampled-coding
//               family = flat | triangular | raised-cosine   (base spectrum)
//               bandwidth (half-width f_B, Hz), power, rolloff
//   [am]        f0 (Hz), phase (rad)
//   [pam]       pulse = rectangular | triangular | raised-cosine
//               period (s) or sampling_rates (comma list, Hz)
//               pulse_width (in periods), rolloff, energy_preserving
//   [sampled]   fs (Hz)
//   [discrete]  variances = 1, 4     or     taps = 1.2, 0.1; 0.7, -0.15
//   [rates]     min, max, count, spacing = linear | log
//   [methods]   list = drf, lower_bound, oracle, upper_bound_gaussian_psd, baseline
//   [numerics]  phi_points, m_start, m_max, convergence_tol, t_points,
//               oracle_points, oracle_periods, verify_tol, spectra_M, spectra_points
//   [output]    path
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "csdrf/drf.hpp"

namespace csdrf {

enum class SourceKind { Stationary, DiscreteCs, Am, Pam, SampledCoding };

struct Scenario {
    std::string name;
    SourceKind kind = SourceKind::Stationary;

    std::string family = "flat";
    double bandwidth = 1.0;
    double power = 1.0;
    double rolloff = 0.25;

    double f0 = 4.0;
    double phase = 0.0;

    std::string pulse = "rectangular";
    std::vector<double> periods;
    double pulse_width = 1.0;
    double pulse_rolloff = 0.25;
    bool energy_preserving = false;

    double fs = 1.0;

    std::vector<double> variances;
    std::vector<std::vector<double>> taps;

    std::vector<double> rates;
    std::vector<std::string> methods;

    GridOptions grid;
    ContinuousDrfConfig sweep;
    int t_points = 64;
    int oracle_points = 256;
    int oracle_periods = 8;
    double verify_tol = 1e-3;
    int spectra_M = 8;
    int spectra_points = 256;

    std::string output_path;
};

/// Throws ConfigError naming the offending key.
Scenario parse_scenario(const std::string& ini_text);
Scenario load_scenario(const std::string& path);

StationaryPsd scenario_base(const Scenario& s);
DiscreteCsProcess scenario_process(const Scenario& s);
/// Pulse for the given symbol period, scaled to preserve the source power
/// when requested.
PulseShape scenario_pulse(const Scenario& s, double period);
/// Cyclic spectra of continuous sources, labelled.
std::vector<std::pair<std::string, CyclicSpectrum>> scenario_spectra(const Scenario& s);

struct CsvRow {
    double rate = 0.0;
    double distortion = 0.0;
    double theta = 0.0;
    std::string method;
    int M = 1;
    bool converged = true;
};

/// Evaluates the listed methods (or the scenario's own list) on the rate grid.
std::vector<CsvRow> run_scenario(const Scenario& s,
                                 const std::optional<std::vector<std::string>>& methods = std::nullopt);

/// Header "rate_bits,distortion,theta,method,M,converged", 17 significant digits.
std::string format_csv(const std::vector<CsvRow>& rows);

struct VerifyReport {
    double max_relative_gap = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::vector<CsvRow> rows;
};

/// Oracle against fast path on the rate grid.
VerifyReport verify_scenario(const Scenario& s);

/// Columns: phi, f, lambda_1 .. lambda_M (ascending), trace, and s_tilde for
/// PAM sources.
std::string dump_spectra(const Scenario& s);

} // namespace csdrf
