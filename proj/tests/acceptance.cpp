// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "csdrf/drf.hpp"
#include "csdrf/oracle.hpp"
#include "csdrf/quadrature.hpp"
#include "csdrf/scenario.hpp"

using namespace csdrf;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, const std::string& what) {
        if (!ok) pass = false;
        notes.push_back(fmt::format("{} {}", ok ? "ok  " : "FAIL", what));
    }
};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::vector<double> log_rates(double lo, double hi, int n) {
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    return out;
}

std::vector<double> lin_rates(double lo, double hi, int n) {
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
    return out;
}

// Scalar Pinsker distortion on a midpoint grid, geometric bisection on the level.
double pinsker(const std::function<double(double)>& s, const QuadratureGrid& g, double bits,
               double rate_scale = 0.5) {
    std::vector<double> v;
    for (double x : g.nodes) v.push_back(s(x));
    auto rate = [&](double theta) {
        double r = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i] > theta) r += rate_scale * g.weights[i] * std::log2(v[i] / theta);
        return r;
    };
    double lo = 1e-300, hi = *std::max_element(v.begin(), v.end());
    if (bits == 0.0) lo = hi;
    for (int it = 0; it < 2000 && lo < hi; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (mid <= lo || mid >= hi) break;
        if (rate(mid) > bits) lo = mid;
        else hi = mid;
    }
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) d += g.weights[i] * std::min(v[i], hi);
    return d;
}

Outcome criterion1() {
    Outcome out;
    std::mt19937 rng(20240611);
    std::uniform_real_distribution<double> main_tap(0.5, 1.5), side_tap(-0.2, 0.2);
    std::vector<std::vector<double>> taps(3);
    for (auto& h : taps) h = {main_tap(rng), side_tap(rng)};

    struct Case {
        std::string name;
        DiscreteCsProcess proc;
        std::size_t N;
    };
    const std::vector<Case> cases{
        {"alternating {1,4}", DiscreteCsProcess::white({1.0, 4.0}), 256},
        {fmt::format("random M=3 MA [{:.3f},{:.3f}; {:.3f},{:.3f}; {:.3f},{:.3f}]", taps[0][0], taps[0][1],
                     taps[1][0], taps[1][1], taps[2][0], taps[2][1]),
         DiscreteCsProcess::periodic_filter(taps), 255},
    };
    const auto rates = log_rates(0.1, 8.0, 6);
    for (const auto& c : cases) {
        const auto block = build_block_covariance(c.proc, c.N);
        double worst = 0.0;
        for (double R : rates) {
            const double fast = drf_cs_discrete(c.proc, BitsPerSymbol{R}).distortion;
            const double oracle = kl_drf(block, BitsPerSymbol{R}).distortion;
            worst = std::max(worst, rel(fast, oracle));
        }
        out.check(worst <= 1e-3, fmt::format("{} vs KL oracle N={}: max rel gap {:.2e} over 6 rates in [0.1, 8]",
                                             c.name, c.N, worst));
    }
    const double hand = drf_cs_discrete(DiscreteCsProcess::white({1.0, 4.0}), BitsPerSymbol{0.5}).distortion;
    out.check(std::abs(hand - 1.0) <= 1e-9, fmt::format("alternating R=0.5 -> D={:.12f} (hand value 1)", hand));
    return out;
}

Outcome criterion2() {
    Outcome out;
    const GridOptions opt{};
    const std::vector<std::pair<std::string, std::function<double(double)>>> shapes{
        {"flat", [](double phi) { return std::abs(phi) < 0.3 ? 1.5 : 0.0; }},
        {"triangular", [](double phi) { return std::max(0.0, 2.0 * (1.0 - std::abs(phi) / 0.5)); }},
    };
    const std::vector<std::vector<double>> breaks{{-0.3, 0.3}, {0.0}};
    for (std::size_t k = 0; k < shapes.size(); ++k) {
        const auto proc = DiscreteCsProcess::stationary(shapes[k].second, breaks[k]);
        const auto grid = phi_grid(breaks[k], opt);
        double worst = 0.0;
        for (double R : {0.0, 0.2, 1.0, 2.5, 6.0}) {
            const double fast = drf_cs_discrete(proc, BitsPerSymbol{R}).distortion;
            worst = std::max(worst, rel(fast, pinsker(shapes[k].second, grid, R)));
        }
        out.check(worst <= 1e-12, fmt::format("M=1 {} vs scalar Pinsker: max rel gap {:.2e}", shapes[k].first, worst));
    }
    const double sigma2 = 1.7;
    const auto flat = StationaryPsd::flat(1.0, sigma2);
    double worst = 0.0;
    for (double R : {0.0, 1.0, 3.0})
        worst = std::max(worst, std::abs(stationary_drf(flat, BitsPerSecond{R}).distortion - sigma2 * std::pow(2.0, -R)));
    out.check(worst <= 1e-9, fmt::format("flat band, D = s^2 2^-R at R in {{0,1,3}}: max abs gap {:.2e}", worst));
    return out;
}

Outcome criterion3() {
    Outcome out;
    const double T0 = 0.8;
    const auto base = StationaryPsd::triangular(1.0, 1.0);
    const auto pulse = PulseShape::raised_cosine(T0, 0.4);
    const auto spec = pam_cpsd(base, pulse, T0);
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    const auto rates = std::vector<double>{0.25, 1.0, 3.0};
    for (int M : {4, 8, 16}) {
        const auto m = psd_pc_matrix_continuous(spec, M);
        double ratio = 0.0;
        for (int i = 0; i < 128; ++i) {
            const auto ev = hermitian_eigenvalues(m.eval(u(rng)));
            if (ev(M - 1) > 0.0) ratio = std::max(ratio, ev(M - 2) / ev(M - 1));
        }
        double worst = 0.0;
        for (double R : rates)
            worst = std::max(worst, rel(drf_cs_continuous_at(spec, M, BitsPerSecond{R}).distortion,
                                        drf_pam(base, pulse, T0, BitsPerSecond{R}).distortion));
        out.check(ratio <= 1e-10 && worst <= 1e-6,
                  fmt::format("M={}: max lambda_(M-1)/lambda_M {:.1e}, D_M vs drf_pam max rel gap {:.1e}", M, ratio,
                              worst));
    }
    return out;
}

Outcome criterion4() {
    Outcome out;
    const auto base = StationaryPsd::triangular(1.0, 1.0);
    const auto rates = lin_rates(0.25, 4.0, 8);
    double worst = 0.0, worst_numeric = 0.0;
    const GridOptions fine{8192};
    const auto spec = am_cpsd(base, 4.0, 0.0);
    for (double R : rates) {
        const double ref = stationary_drf(base, BitsPerSecond{R}, fine.phi_points).distortion;
        worst = std::max(worst, rel(drf_am(base, 4.0, BitsPerSecond{R}, 0.0, {}, fine).point.distortion, ref));
        worst_numeric = std::max(worst_numeric, rel(drf_cs_continuous_at(spec, 8, BitsPerSecond{R}, fine).distortion, ref));
    }
    out.check(worst <= 1e-6, fmt::format("f0=4: drf_am vs stationary_drf max rel gap {:.1e}", worst));
    out.check(worst_numeric <= 1e-6,
              fmt::format("f0=4: polyphase D_8 (no shortcut) vs stationary_drf max rel gap {:.1e}", worst_numeric));

    ContinuousDrfConfig cfg;
    cfg.convergence_tol = 1e-6;
    const auto reports = drf_cs_continuous_curve(am_cpsd(base, 1.2, 0.0), rates, cfg);
    bool ordered = true;
    double margin = kInf;
    for (std::size_t i = 0; i < rates.size(); ++i) {
        const double upper = am_gaussian_upper_bound(base, 1.2, BitsPerSecond{rates[i]}).distortion;
        ordered = ordered && reports[i].point.distortion <= upper;
        margin = std::min(margin, upper - reports[i].point.distortion);
    }
    out.check(ordered, fmt::format("f0=1.2: numeric DRF below Gaussian-PSD bound at 8 rates (min margin {:.3e})", margin));
    return out;
}

Outcome criterion5() {
    Outcome out;
    const std::vector<std::pair<std::string, DiscreteCsProcess>> discrete{
        {"alternating", DiscreteCsProcess::white({1.0, 4.0})},
        {"M=3 MA", DiscreteCsProcess::periodic_filter({{1.2, 0.1}, {0.7, -0.15}, {0.9, 0.4}})},
    };
    const auto rates = std::vector<double>{0.1, 0.5, 1.0, 2.0, 4.0, 8.0};
    for (const auto& [name, proc] : discrete) {
        const double s2 = average_power(proc);
        bool below = true;
        for (double R : rates)
            below = below && lower_bound_discrete(proc, BitsPerSymbol{R}) <= drf_cs_discrete(proc, BitsPerSymbol{R}).distortion;
        const double at0 = std::abs(lower_bound_discrete(proc, BitsPerSymbol{0.0}) -
                                    drf_cs_discrete(proc, BitsPerSymbol{0.0}).distortion);
        const double at20 = std::abs(lower_bound_discrete(proc, BitsPerSymbol{20.0}) -
                                     drf_cs_discrete(proc, BitsPerSymbol{20.0}).distortion);
        out.check(below && at0 <= 1e-9 && at20 <= 1e-4 * s2,
                  fmt::format("{}: bound <= DRF at 6 rates {}, |gap| at R=0 {:.1e}, at R=20 {:.1e} s^2", name,
                              below ? "yes" : "no", at0, at20 / s2));
    }

    const auto base = StationaryPsd::triangular(1.0, 1.0);
    const auto am = am_cpsd(base, 1.2, 0.0);
    ContinuousDrfConfig cfg;
    cfg.convergence_tol = 1e-6;
    const auto reps = drf_cs_continuous_curve(am, rates, cfg);
    bool below = true;
    for (std::size_t i = 0; i < rates.size(); ++i)
        below = below && lower_bound_continuous(am, BitsPerSecond{rates[i]}) <= reps[i].point.distortion;
    const double am0 = std::abs(lower_bound_continuous(am, BitsPerSecond{0.0}) - am.average_power());
    out.check(below && am0 <= 1e-9,
              fmt::format("AM f0=1.2: continuous bound <= DRF at 6 rates {}, |bound(0) - s^2| {:.1e}",
                          below ? "yes" : "no", am0));

    const double T0 = 0.8;
    const auto flat = StationaryPsd::flat(1.0, 1.0);
    const auto stair = pam_cpsd(flat, PulseShape::rectangular(T0), T0);
    double worst = 0.0;
    for (double R : {0.25, 1.0, 2.5}) {
        const double pam = drf_pam(flat, PulseShape::rectangular(T0), T0, BitsPerSecond{R}).distortion;
        worst = std::max(worst, rel(lower_bound_continuous(stair, BitsPerSecond{R}), pam));
    }
    out.check(worst <= 1e-6, fmt::format("staircase PAM: continuous bound vs drf_pam max rel gap {:.1e}", worst));
    return out;
}

// Cauchy gaps |D_M - D_{M/2}| must shrink, except below the 1e-6 s^2 floor.
bool monotone_gaps(const ContinuousDrfReport& rep, double sigma2) {
    const double floor = 1e-6 * sigma2;
    for (std::size_t i = 2; i < rep.iterates.size(); ++i) {
        const double prev = rep.iterates[i - 1].gap, cur = rep.iterates[i].gap;
        if (cur > prev && cur > floor) return false;
    }
    return true;
}

Outcome criterion6() {
    Outcome out;
    const auto base = StationaryPsd::triangular(1.0, 1.0);
    const auto am = am_cpsd(base, 1.2, 0.0);
    const double T = 2.0 * am.period();
    const std::size_t N = 1024;
    const auto exact = build_kernel(am, T, N);
    std::vector<double> gaps;
    bool holds = true;
    for (int M : {16, 32, 64}) {
        const auto w = weyl_gap(exact, build_step_kernel(am, T, N, M));
        holds = holds && w.holds;
        gaps.push_back(w.max_gap);
    }
    const double r1 = gaps[0] / gaps[1], r2 = gaps[1] / gaps[2];
    out.check(holds && r1 >= 1.8 && r2 >= 1.8,
              fmt::format("AM kernel vs step kernel, M=16/32/64: gaps {:.2e} {:.2e} {:.2e} (ratios {:.2f}, {:.2f}), "
                          "Weyl bound {}",
                          gaps[0], gaps[1], gaps[2], r1, r2, holds ? "holds" : "violated"));

    ContinuousDrfConfig sweep;
    sweep.m_start = 4;
    sweep.m_max = 64;
    sweep.convergence_tol = 1e-300;
    // the scenarios of criteria 3 and 4
    const double T0 = 0.8;
    const std::vector<std::pair<std::string, CyclicSpectrum>> cases{
        {"AM f0=1.2", am},
        {"AM f0=4", am_cpsd(base, 4.0, 0.0)},
        {"PAM raised-cosine T0=0.8", pam_cpsd(base, PulseShape::raised_cosine(T0, 0.4), T0)},
    };
    auto gap_text = [](const ContinuousDrfReport& rep, double s2) {
        std::string seq;
        for (std::size_t i = 1; i < rep.iterates.size(); ++i) seq += fmt::format(" {:.1e}", rep.iterates[i].gap / s2);
        return seq;
    };
    for (const auto& [name, spec] : cases) {
        const double s2 = spec.average_power();
        for (double R : {0.5, 2.0}) {
            const auto rep = drf_cs_continuous(spec, BitsPerSecond{R}, sweep);
            const bool ok = rep.M <= 64 && monotone_gaps(rep, s2) && rep.final_gap < 1e-4 * s2;
            out.check(ok, fmt::format("{}: Cauchy gaps / s^2 up to M={} at R={}:{}", name, rep.M, R, gap_text(rep, s2)));
        }
    }
    // time-limited pulse, reported only
    const auto tri = pam_cpsd(StationaryPsd::flat(0.5, 1.0), PulseShape::triangular(2.0), 2.0);
    const auto rep = drf_cs_continuous(tri, BitsPerSecond{0.5}, sweep);
    out.notes.push_back(fmt::format("info triangle-pulse PAM T0=2: Cauchy gaps / s^2, M=8..64 at R=0.5:{} ({})",
                                    gap_text(rep, tri.average_power()),
                                    monotone_gaps(rep, tri.average_power()) ? "monotone" : "not monotone"));
    return out;
}

Outcome criterion7() {
    Outcome out;
    const auto tri = StationaryPsd::triangular(1.0, 1.0);
    double worst = 0.0;
    for (double fs : {2.0, 2.5, 4.0})
        for (double R : {0.25, 1.0, 3.0})
            worst = std::max(worst, std::abs(sampled_source_coding(tri, fs, BitsPerSecond{R}).distortion -
                                             stationary_drf(tri, BitsPerSecond{R}).distortion));
    out.check(worst <= 1e-9, fmt::format("fs >= Nyquist: sampled coding vs stationary_drf max gap {:.1e}", worst));

    double excess = 0.0;
    for (double fs : {0.7, 1.3, 1.9}) {
        const auto res = sampled_source_coding(tri, fs, BitsPerSecond{60.0});
        excess = std::max(excess, res.distortion - res.mmse);
    }
    out.check(excess <= 1e-9, fmt::format("R=60: distortion - mmse at most {:.1e}", excess));

    // flat 1/2 on [-1, 1] sampled at 1: two aliases of equal level everywhere in the folded band
    const auto flat = StationaryPsd::flat(1.0, 1.0);
    const double closed = 1.0 - (0.25 + 0.25) / (0.5 + 0.5);
    const double mmse = mmse_filter(flat, 1.0).mmse;
    out.check(std::abs(mmse - closed) <= 1e-6, fmt::format("flat overlap fs=1: mmse {:.9f} (aliasing closed form {})",
                                                           mmse, closed));
    return out;
}

Outcome criterion8() {
    Outcome out;
    const auto s = load_scenario(CSDRF_CONFIG_DIR "/fig4.ini");
    const auto rows = run_scenario(s);
    const std::vector<std::string> order{"drf@fs=0.25", "drf@fs=0.5", "drf@fs=0.9", "baseline"};
    std::vector<std::vector<double>> curves(order.size());
    for (const auto& r : rows)
        for (std::size_t k = 0; k < order.size(); ++k)
            if (r.method == order[k]) curves[k].push_back(r.distortion);
    bool ordered = true;
    std::size_t points = 0;
    for (const auto& c : curves) ordered = ordered && c.size() == s.rates.size();
    if (ordered) {
        points = s.rates.size();
        for (std::size_t i = 0; i < points; ++i)
            for (std::size_t k = 1; k < order.size(); ++k) ordered = ordered && curves[k - 1][i] < curves[k][i];
    }
    out.check(ordered && points == 10,
              fmt::format("fs=0.25W < 0.5W < 0.9W < baseband at all {} rate points", points));
    const auto first = format_csv(rows);
    const auto second = format_csv(run_scenario(load_scenario(CSDRF_CONFIG_DIR "/fig4.ini")));
    out.check(first == second, fmt::format("CSV byte-identical across two runs ({} bytes)", first.size()));
    return out;
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"oracle equivalence (discrete)", criterion1},
        {"stationary reduction", criterion2},
        {"PAM rank one and closed form", criterion3},
        {"AM narrowband equality and Gaussian-PSD ordering", criterion4},
        {"polyphase lower bounds", criterion5},
        {"Weyl perturbation and M convergence", criterion6},
        {"combined sampling and coding", criterion7},
        {"PAM sampling-rate ordering and reproducibility", criterion8},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.check(false, fmt::format("exception: {}", e.what()));
        }
        std::printf("%s  criterion %zu: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str());
        for (const auto& n : o.notes) std::printf("        %s\n", n.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
