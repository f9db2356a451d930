#include "csdrf/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "csdrf/errors.hpp"
#include "csdrf/oracle.hpp"

namespace csdrf {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>> kKnownKeys = {
    {"scenario", {"name"}},
    {"source", {"kind", "family", "bandwidth", "power", "rolloff"}},
    {"am", {"f0", "phase"}},
    {"pam", {"pulse", "period", "sampling_rates", "pulse_width", "rolloff", "energy_preserving"}},
    {"sampled", {"fs"}},
    {"discrete", {"variances", "taps"}},
    {"rates", {"min", "max", "count", "spacing"}},
    {"methods", {"list"}},
    {"numerics",
     {"phi_points", "m_start", "m_max", "convergence_tol", "t_points", "oracle_points",
      "oracle_periods", "verify_tol", "spectra_M", "spectra_points"}},
    {"output", {"path"}},
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    return out;
}

class Reader {
public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {}

    std::optional<std::string> text(const std::string& key) const {
        auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
        if (!v) return std::nullopt;
        return trim(*v);
    }

    double number(const std::string& key, double fallback) const {
        const auto v = text(key);
        return v ? parse_number(key, *v) : fallback;
    }

    int integer(const std::string& key, int fallback) const {
        const auto v = text(key);
        if (!v) return fallback;
        int out = 0;
        const auto* end = v->data() + v->size();
        const auto [p, ec] = std::from_chars(v->data(), end, out);
        if (ec != std::errc() || p != end)
            throw ConfigError(key, fmt::format("{}: '{}' is not an integer", key, *v));
        return out;
    }

    bool boolean(const std::string& key, bool fallback) const {
        const auto v = text(key);
        if (!v) return fallback;
        if (*v == "true" || *v == "yes" || *v == "1") return true;
        if (*v == "false" || *v == "no" || *v == "0") return false;
        throw ConfigError(key, fmt::format("{}: '{}' is not a boolean", key, *v));
    }

    std::vector<double> numbers(const std::string& key, const std::string& value) const {
        std::vector<double> out;
        for (const auto& item : split(value, ',')) out.push_back(parse_number(key, item));
        return out;
    }

    static double parse_number(const std::string& key, const std::string& v) {
        double out = 0.0;
        const auto* end = v.data() + v.size();
        const auto [p, ec] = std::from_chars(v.data(), end, out);
        if (ec != std::errc() || p != end || !std::isfinite(out))
            throw ConfigError(key, fmt::format("{}: '{}' is not a number", key, v));
        return out;
    }

private:
    const pt::ptree& tree_;
};

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(key, fmt::format("{}: {}", key, what));
}

std::vector<double> rate_grid(const Reader& r) {
    const double lo = r.number("rates.min", 0.0);
    const double hi = r.number("rates.max", 4.0);
    const int count = r.integer("rates.count", 8);
    const std::string spacing = r.text("rates.spacing").value_or("linear");
    require(count >= 1, "rates.count", "must be at least 1");
    require(lo >= 0.0, "rates.min", "must be nonnegative");
    require(hi >= lo, "rates.max", "must not be below rates.min");
    std::vector<double> out;
    if (count == 1) return {lo};
    if (spacing == "linear") {
        for (int i = 0; i < count; ++i) out.push_back(lo + (hi - lo) * i / (count - 1));
    } else if (spacing == "log") {
        require(lo > 0.0, "rates.min", "must be positive for log spacing");
        const double a = std::log(lo), b = std::log(hi);
        for (int i = 0; i < count; ++i) out.push_back(std::exp(a + (b - a) * i / (count - 1)));
        out.front() = lo;
        out.back() = hi;
    } else {
        throw ConfigError("rates.spacing", fmt::format("rates.spacing: unknown spacing '{}'", spacing));
    }
    return out;
}

std::string fmt_num(double x) { return fmt::format("{:.17g}", x); }

double relative_gap(double a, double b) {
    const double scale = std::max(std::abs(b), 1e-300);
    return std::abs(a - b) / scale;
}

} // namespace

Scenario parse_scenario(const std::string& ini_text) {
    pt::ptree tree;
    try {
        std::istringstream in(ini_text);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(fmt::format("line {}", e.line()), fmt::format("config parse error: {}", e.message()));
    }
    for (const auto& [section, body] : tree) {
        const auto it = kKnownKeys.find(section);
        if (it == kKnownKeys.end())
            throw ConfigError(section, fmt::format("{}: unknown section", section));
        if (body.empty() && !body.data().empty())
            throw ConfigError(section, fmt::format("{}: key outside a section", section));
        for (const auto& [key, value] : body) {
            (void)value;
            if (!it->second.count(key))
                throw ConfigError(section + "." + key, fmt::format("{}.{}: unknown key", section, key));
        }
    }

    const Reader r(tree);
    Scenario s;
    s.name = r.text("scenario.name").value_or("scenario");

    const std::string kind = r.text("source.kind").value_or("");
    if (kind == "stationary") s.kind = SourceKind::Stationary;
    else if (kind == "discrete-cs") s.kind = SourceKind::DiscreteCs;
    else if (kind == "am") s.kind = SourceKind::Am;
    else if (kind == "pam") s.kind = SourceKind::Pam;
    else if (kind == "sampled-coding") s.kind = SourceKind::SampledCoding;
    else throw ConfigError("source.kind", fmt::format("source.kind: unknown kind '{}'", kind));

    s.family = r.text("source.family").value_or("flat");
    require(s.family == "flat" || s.family == "triangular" || s.family == "raised-cosine",
            "source.family", fmt::format("unknown family '{}'", s.family));
    s.bandwidth = r.number("source.bandwidth", 1.0);
    require(s.bandwidth > 0.0, "source.bandwidth", "must be positive");
    s.power = r.number("source.power", 1.0);
    require(s.power >= 0.0, "source.power", "must be nonnegative");
    s.rolloff = r.number("source.rolloff", 0.25);
    require(s.rolloff >= 0.0 && s.rolloff <= 1.0, "source.rolloff", "must lie in [0, 1]");

    s.f0 = r.number("am.f0", 4.0);
    s.phase = r.number("am.phase", 0.0);
    if (s.kind == SourceKind::Am) require(s.f0 > 0.0, "am.f0", "must be positive");

    s.pulse = r.text("pam.pulse").value_or("rectangular");
    s.pulse_width = r.number("pam.pulse_width", 1.0);
    s.pulse_rolloff = r.number("pam.rolloff", 0.25);
    s.energy_preserving = r.boolean("pam.energy_preserving", false);
    if (s.kind == SourceKind::Pam) {
        require(s.pulse == "rectangular" || s.pulse == "triangular" || s.pulse == "raised-cosine",
                "pam.pulse", fmt::format("unknown pulse '{}'", s.pulse));
        require(s.pulse_width > 0.0, "pam.pulse_width", "must be positive");
        require(s.pulse_rolloff >= 0.0 && s.pulse_rolloff <= 1.0, "pam.rolloff", "must lie in [0, 1]");
        const auto period = r.text("pam.period");
        const auto rates = r.text("pam.sampling_rates");
        require(period.has_value() != rates.has_value(), "pam.period",
                "give exactly one of pam.period and pam.sampling_rates");
        if (period) {
            s.periods = {Reader::parse_number("pam.period", *period)};
        } else {
            for (double fs : r.numbers("pam.sampling_rates", *rates)) {
                require(fs > 0.0, "pam.sampling_rates", "must be positive");
                s.periods.push_back(1.0 / fs);
            }
        }
        for (double T : s.periods) require(T > 0.0, "pam.period", "must be positive");
    }

    s.fs = r.number("sampled.fs", 1.0);
    if (s.kind == SourceKind::SampledCoding) require(s.fs > 0.0, "sampled.fs", "must be positive");

    if (s.kind == SourceKind::DiscreteCs) {
        const auto v = r.text("discrete.variances");
        const auto t = r.text("discrete.taps");
        require(v.has_value() != t.has_value(), "discrete.variances",
                "give exactly one of discrete.variances and discrete.taps");
        if (v) {
            s.variances = r.numbers("discrete.variances", *v);
            for (double x : s.variances) require(x >= 0.0, "discrete.variances", "must be nonnegative");
        } else {
            for (const auto& row : split(*t, ';')) s.taps.push_back(r.numbers("discrete.taps", row));
        }
    }

    s.rates = rate_grid(r);
    const std::string methods = r.text("methods.list").value_or("drf");
    for (const auto& m : split(methods, ',')) {
        require(m == "drf" || m == "lower_bound" || m == "oracle" || m == "upper_bound_gaussian_psd" ||
                    m == "baseline",
                "methods.list", fmt::format("unknown method '{}'", m));
        s.methods.push_back(m);
    }

    const int phi_points = r.integer("numerics.phi_points", 2048);
    require(phi_points >= 16, "numerics.phi_points", "must be at least 16");
    s.grid.phi_points = static_cast<std::size_t>(phi_points);
    s.sweep.m_start = r.integer("numerics.m_start", 4);
    s.sweep.m_max = r.integer("numerics.m_max", 64);
    s.sweep.convergence_tol = r.number("numerics.convergence_tol", 1e-6);
    require(s.sweep.m_start >= 1, "numerics.m_start", "must be at least 1");
    require(s.sweep.m_max >= s.sweep.m_start, "numerics.m_max", "must not be below m_start");
    require(s.sweep.convergence_tol > 0.0, "numerics.convergence_tol", "must be positive");
    s.t_points = r.integer("numerics.t_points", 64);
    require(s.t_points >= 1, "numerics.t_points", "must be at least 1");
    s.oracle_points = r.integer("numerics.oracle_points", 256);
    require(s.oracle_points >= 2, "numerics.oracle_points", "must be at least 2");
    s.oracle_periods = r.integer("numerics.oracle_periods", 8);
    require(s.oracle_periods >= 1, "numerics.oracle_periods", "must be at least 1");
    s.verify_tol = r.number("numerics.verify_tol", 1e-3);
    s.spectra_M = r.integer("numerics.spectra_M", 8);
    require(s.spectra_M >= 1, "numerics.spectra_M", "must be at least 1");
    s.spectra_points = r.integer("numerics.spectra_points", 256);
    require(s.spectra_points >= 1, "numerics.spectra_points", "must be at least 1");

    s.output_path = r.text("output.path").value_or("");
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("path", fmt::format("cannot read config '{}'", path));
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

StationaryPsd scenario_base(const Scenario& s) {
    if (s.family == "flat") return StationaryPsd::flat(s.bandwidth, s.power);
    if (s.family == "triangular") return StationaryPsd::triangular(s.bandwidth, s.power);
    return StationaryPsd::raised_cosine(s.bandwidth, s.rolloff, s.power);
}

DiscreteCsProcess scenario_process(const Scenario& s) {
    if (!s.variances.empty()) return DiscreteCsProcess::white(s.variances);
    return DiscreteCsProcess::periodic_filter(s.taps);
}

PulseShape scenario_pulse(const Scenario& s, double period) {
    PulseShape p = s.pulse == "rectangular"  ? PulseShape::rectangular(s.pulse_width * period)
                   : s.pulse == "triangular" ? PulseShape::triangular(s.pulse_width * period)
                                             : PulseShape::raised_cosine(period, s.pulse_rolloff);
    if (!s.energy_preserving) return p;
    const auto base = scenario_base(s);
    const double power = pam_cpsd(base, p, period).average_power();
    if (power <= 0.0) return p;
    return p.scaled(std::sqrt(base.total_power() / power));
}

std::vector<std::pair<std::string, CyclicSpectrum>> scenario_spectra(const Scenario& s) {
    const auto base = scenario_base(s);
    std::vector<std::pair<std::string, CyclicSpectrum>> out;
    switch (s.kind) {
    case SourceKind::Stationary:
    case SourceKind::SampledCoding:
        out.emplace_back("", stationary_spectrum(base, 0.5 / base.support_radius()));
        break;
    case SourceKind::Am:
        out.emplace_back("", am_cpsd(base, s.f0, s.phase));
        break;
    case SourceKind::Pam:
        for (double T : s.periods) {
            const std::string label = s.periods.size() > 1 ? fmt::format("@fs={:g}", 1.0 / T) : "";
            out.emplace_back(label, pam_cpsd(base, scenario_pulse(s, T), T));
        }
        break;
    case SourceKind::DiscreteCs:
        break;
    }
    return out;
}

namespace {

void not_applicable(const std::string& method, SourceKind kind) {
    static const char* names[] = {"stationary", "discrete-cs", "am", "pam", "sampled-coding"};
    throw ConfigError("methods.list", fmt::format("methods.list: '{}' does not apply to {} sources",
                                                  method, names[static_cast<int>(kind)]));
}

void oracle_rows(const CyclicSpectrum& spec, const Scenario& s, const std::string& label,
                 std::vector<CsvRow>& rows) {
    const double T = s.oracle_periods * spec.period();
    const auto kernel = build_kernel(spec, T, static_cast<std::size_t>(s.oracle_points));
    for (double R : s.rates) {
        const auto p = kl_drf(kernel, BitsPerSecond{R});
        rows.push_back({R, p.distortion, p.theta, "oracle" + label, s.oracle_points, true});
    }
}

} // namespace

std::vector<CsvRow> run_scenario(const Scenario& s,
                                 const std::optional<std::vector<std::string>>& methods) {
    const auto& list = methods ? *methods : s.methods;
    std::vector<CsvRow> rows;
    const auto base = scenario_base(s);

    for (const auto& method : list) {
        switch (s.kind) {
        case SourceKind::DiscreteCs: {
            const auto proc = scenario_process(s);
            const int M = proc.period();
            if (method == "drf") {
                const auto curve = drf_cs_discrete_curve(proc, s.rates, s.grid);
                for (std::size_t i = 0; i < s.rates.size(); ++i)
                    rows.push_back({s.rates[i], curve.points[i].distortion, curve.points[i].theta, "drf", M, true});
            } else if (method == "lower_bound") {
                for (double R : s.rates)
                    rows.push_back({R, lower_bound_discrete(proc, BitsPerSymbol{R}, s.grid), 0.0,
                                    "lower_bound", M, true});
            } else if (method == "oracle") {
                const int N = M * std::max(1, s.oracle_points / M);
                const auto block = build_block_covariance(proc, static_cast<std::size_t>(N));
                for (double R : s.rates) {
                    const auto p = kl_drf(block, BitsPerSymbol{R});
                    rows.push_back({R, p.distortion, p.theta, "oracle", N, true});
                }
            } else {
                not_applicable(method, s.kind);
            }
            break;
        }
        case SourceKind::Stationary: {
            if (method == "drf" || method == "baseline") {
                for (double R : s.rates) {
                    const auto p = stationary_drf(base, BitsPerSecond{R}, s.grid.phi_points);
                    rows.push_back({R, p.distortion, p.theta, method, 1, true});
                }
            } else if (method == "lower_bound") {
                const auto spec = scenario_spectra(s).front().second;
                for (double R : s.rates)
                    rows.push_back({R, lower_bound_continuous(spec, BitsPerSecond{R}, s.t_points, s.grid),
                                    0.0, "lower_bound", 1, true});
            } else if (method == "oracle") {
                oracle_rows(scenario_spectra(s).front().second, s, "", rows);
            } else {
                not_applicable(method, s.kind);
            }
            break;
        }
        case SourceKind::SampledCoding: {
            if (method == "drf") {
                for (double R : s.rates) {
                    const auto res = sampled_source_coding(base, s.fs, BitsPerSecond{R}, s.grid);
                    rows.push_back({R, res.distortion, res.coding_point.theta, "drf", 1, true});
                }
            } else if (method == "baseline") {
                for (double R : s.rates) {
                    const auto p = stationary_drf(base, BitsPerSecond{R}, s.grid.phi_points);
                    rows.push_back({R, p.distortion, p.theta, "baseline", 1, true});
                }
            } else {
                not_applicable(method, s.kind);
            }
            break;
        }
        case SourceKind::Am: {
            const auto spec = am_cpsd(base, s.f0, s.phase);
            if (method == "drf") {
                if (s.f0 > 2.0 * base.support_radius()) {
                    for (double R : s.rates) {
                        const auto p = drf_am(base, s.f0, BitsPerSecond{R}, s.phase, s.sweep, s.grid);
                        rows.push_back({R, p.point.distortion, p.point.theta, "drf", 1, true});
                    }
                } else {
                    const auto reps = drf_cs_continuous_curve(spec, s.rates, s.sweep, s.grid);
                    for (std::size_t i = 0; i < s.rates.size(); ++i)
                        rows.push_back({s.rates[i], reps[i].point.distortion, reps[i].point.theta, "drf",
                                        reps[i].M, reps[i].converged});
                }
            } else if (method == "baseline") {
                for (double R : s.rates) {
                    const auto p = stationary_drf(base, BitsPerSecond{R}, s.grid.phi_points);
                    rows.push_back({R, p.distortion, p.theta, "baseline", 1, true});
                }
            } else if (method == "upper_bound_gaussian_psd") {
                for (double R : s.rates) {
                    const auto p = am_gaussian_upper_bound(base, s.f0, BitsPerSecond{R}, s.grid);
                    rows.push_back({R, p.distortion, p.theta, "upper_bound_gaussian_psd", 1, true});
                }
            } else if (method == "lower_bound") {
                for (double R : s.rates)
                    rows.push_back({R, lower_bound_continuous(spec, BitsPerSecond{R}, s.t_points, s.grid),
                                    0.0, "lower_bound", 1, true});
            } else if (method == "oracle") {
                oracle_rows(spec, s, "", rows);
            } else {
                not_applicable(method, s.kind);
            }
            break;
        }
        case SourceKind::Pam: {
            if (method == "baseline") {
                for (double R : s.rates) {
                    const auto p = stationary_drf(base, BitsPerSecond{R}, s.grid.phi_points);
                    rows.push_back({R, p.distortion, p.theta, "baseline", 1, true});
                }
                break;
            }
            if (method == "upper_bound_gaussian_psd") not_applicable(method, s.kind);
            for (const auto& [label, spec] : scenario_spectra(s)) {
                const double T = spec.period();
                if (method == "drf") {
                    const auto pulse = scenario_pulse(s, T);
                    for (double R : s.rates) {
                        const auto p = drf_pam(base, pulse, T, BitsPerSecond{R}, s.grid);
                        rows.push_back({R, p.distortion, p.theta, "drf" + label, 1, true});
                    }
                } else if (method == "lower_bound") {
                    for (double R : s.rates)
                        rows.push_back({R, lower_bound_continuous(spec, BitsPerSecond{R}, s.t_points, s.grid),
                                        0.0, "lower_bound" + label, 1, true});
                } else if (method == "oracle") {
                    oracle_rows(spec, s, label, rows);
                }
            }
            break;
        }
        }
    }
    return rows;
}

std::string format_csv(const std::vector<CsvRow>& rows) {
    std::string out = "rate_bits,distortion,theta,method,M,converged\n";
    for (const auto& r : rows)
        out += fmt::format("{},{},{},{},{},{}\n", fmt_num(r.rate), fmt_num(r.distortion), fmt_num(r.theta),
                           r.method, r.M, r.converged ? "true" : "false");
    return out;
}

VerifyReport verify_scenario(const Scenario& s) {
    if (s.kind == SourceKind::SampledCoding)
        throw ConfigError("source.kind", "source.kind: verify needs a source with a covariance kernel");
    VerifyReport rep;
    rep.tolerance = s.verify_tol;
    auto fast = run_scenario(s, std::vector<std::string>{"drf"});
    auto oracle = run_scenario(s, std::vector<std::string>{"oracle"});
    if (fast.size() != oracle.size()) throw NumericError("verify: fast path and oracle disagree in size");
    for (std::size_t i = 0; i < fast.size(); ++i)
        rep.max_relative_gap =
            std::max(rep.max_relative_gap, relative_gap(oracle[i].distortion, fast[i].distortion));
    rep.passed = rep.max_relative_gap <= rep.tolerance;
    rep.rows = std::move(fast);
    rep.rows.insert(rep.rows.end(), oracle.begin(), oracle.end());
    return rep;
}

std::string dump_spectra(const Scenario& s) {
    const std::size_t n = static_cast<std::size_t>(s.spectra_points);
    std::string out;
    auto header = [&](int M, bool pam) {
        std::string h = "source,phi,f";
        for (int m = 1; m <= M; ++m) h += fmt::format(",lambda_{}", m);
        h += ",trace";
        if (pam) h += ",s_tilde";
        return h + "\n";
    };
    auto rows = [&](const std::string& label, const PsdPcMatrix& matrix, double scale,
                    const std::function<double(double)>& extra) {
        for (std::size_t i = 0; i < n; ++i) {
            const double phi = -0.5 + (static_cast<double>(i) + 0.5) / static_cast<double>(n);
            const CMatrix A = matrix.eval(phi);
            const auto ev = hermitian_eigenvalues(A);
            std::string line = fmt::format("{},{},{}", label.empty() ? s.name : label, fmt_num(phi),
                                           fmt_num(phi * scale));
            double tr = 0.0;
            for (Eigen::Index m = 0; m < ev.size(); ++m) {
                line += "," + fmt_num(ev(m));
                tr += A(m, m).real();
            }
            line += "," + fmt_num(tr);
            if (extra) line += "," + fmt_num(extra(phi * scale));
            out += line + "\n";
        }
    };

    if (s.kind == SourceKind::DiscreteCs) {
        const auto proc = scenario_process(s);
        out += header(proc.period(), false);
        rows("", psd_pc_matrix_discrete(proc), 1.0, {});
        return out;
    }
    const bool pam = s.kind == SourceKind::Pam;
    const int M = (s.kind == SourceKind::Stationary || s.kind == SourceKind::SampledCoding) ? 1 : s.spectra_M;
    out += header(M, pam);
    const auto base = scenario_base(s);
    for (const auto& [label, spec] : scenario_spectra(s)) {
        const double T = spec.period();
        std::function<double(double)> extra;
        if (pam) {
            const auto symbols = symbol_spectrum(base, T);
            const auto lattice = scenario_pulse(s, T).lattice_energy(T);
            extra = [symbols, lattice](double f) { return symbols(f) * lattice(f); };
        }
        rows(label.empty() ? s.name : s.name + label, psd_pc_matrix_continuous(spec, M), 1.0 / T, extra);
    }
    return out;
}

} // namespace csdrf
