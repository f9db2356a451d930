#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "csdrf/errors.hpp"
#include "csdrf/scenario.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericError = 3;

struct Options {
    std::string config;
    std::string out;
    bool allow_nonconverged = false;
};

void add_common(CLI::App* cmd, Options& opt) {
    cmd->add_option("--config", opt.config, "Scenario INI file")->required();
    cmd->add_option("--out", opt.out, "Output CSV (drf defaults to [output] path; otherwise stdout)");
    cmd->add_flag("--allow-nonconverged", opt.allow_nonconverged,
                  "Keep rows whose M sweep did not converge, flagged converged=false");
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw csdrf::ConfigError("--out", fmt::format("cannot write '{}'", path));
    out << text;
}

// [output] path is the drf destination; other commands default to stdout
std::string out_path(const Options& opt, const csdrf::Scenario& s, bool use_config) {
    return opt.out.empty() && use_config ? s.output_path : opt.out;
}

int emit_rows(const Options& opt, const csdrf::Scenario& s, const std::vector<csdrf::CsvRow>& rows,
              bool use_config) {
    int failed = 0;
    for (const auto& r : rows)
        if (!r.converged) ++failed;
    if (failed > 0 && !opt.allow_nonconverged) {
        std::cerr << fmt::format("error: {} row(s) did not converge by M = {}; rerun with "
                                 "--allow-nonconverged to keep them\n",
                                 failed, s.sweep.m_max);
        return kNumericError;
    }
    write_output(out_path(opt, s, use_config), csdrf::format_csv(rows));
    return 0;
}

std::vector<std::string> bound_methods(const csdrf::Scenario& s) {
    using csdrf::SourceKind;
    switch (s.kind) {
    case SourceKind::Am:
        return {"lower_bound", "upper_bound_gaussian_psd"};
    case SourceKind::SampledCoding:
        throw csdrf::ConfigError("source.kind", "source.kind: sampled-coding sources have no bounds");
    default:
        return {"lower_bound"};
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distortion-rate functions of cyclostationary Gaussian processes"};
    app.require_subcommand(1);

    Options opt;
    auto* drf = app.add_subcommand("drf", "Evaluate the methods listed in [methods] on the rate grid");
    auto* bound = app.add_subcommand("bound", "Evaluate the lower bound (and the Gaussian-PSD upper bound for AM)");
    auto* verify = app.add_subcommand("verify", "Compare the fast path against the Karhunen-Loeve oracle");
    auto* spectra = app.add_subcommand(
        "spectra",
        "Dump the polyphase spectra. Columns: source, phi, f (Hz), lambda_1..lambda_M "
        "(ascending eigenvalues of the PSD-PC matrix), trace, and s_tilde for PAM "
        "(symbol spectrum times the pulse lattice energy)");
    for (auto* cmd : {drf, bound, verify, spectra}) add_common(cmd, opt);

    CLI11_PARSE(app, argc, argv);

    try {
        const auto s = csdrf::load_scenario(opt.config);
        if (drf->parsed()) return emit_rows(opt, s, csdrf::run_scenario(s), true);
        if (bound->parsed()) return emit_rows(opt, s, csdrf::run_scenario(s, bound_methods(s)), false);
        if (verify->parsed()) {
            const auto rep = csdrf::verify_scenario(s);
            write_output(out_path(opt, s, false), csdrf::format_csv(rep.rows));
            std::cerr << fmt::format("max relative oracle gap {:.3e} (tolerance {:.1e}): {}\n",
                                     rep.max_relative_gap, rep.tolerance, rep.passed ? "ok" : "FAILED");
            return rep.passed ? 0 : kNumericError;
        }
        write_output(out_path(opt, s, false), csdrf::dump_spectra(s));
        return 0;
    } catch (const csdrf::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const csdrf::InvalidArgument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return kConfigError;
    } catch (const csdrf::Error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kNumericError;
    }
}
