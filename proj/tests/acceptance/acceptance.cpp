// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [AC ...]   (no arguments runs everything)

#include "heatflow/errors.hpp"
#include "heatflow/experiments.hpp"
#include "heatflow/moment2.hpp"
#include "heatflow/observables.hpp"
#include "heatflow/polyheat.hpp"
#include "heatflow/rng.hpp"
#include "heatflow/rootdyn.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace heatflow;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

fs::path out_root() { return fs::temp_directory_path() / "heatflow_acceptance"; }

json load_config(const std::string& name) {
    std::ifstream in(std::string(HEATFLOW_CONFIG_DIR) + "/" + name + ".json");
    return json::parse(in);
}

RunManifest run_doc(json doc, const std::string& tag) {
    doc["outputs"] = (out_root() / tag).string();
    const RunManifest m = run(parse_config(doc));
    if (!m.error.empty()) throw std::runtime_error(tag + ": " + m.error);
    return m;
}

double metric(const RunManifest& m, const std::string& name) {
    const auto it = m.metrics.find(name);
    if (it == m.metrics.end()) throw std::runtime_error("missing metric " + name);
    return it->second;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

PointSet random_disk(int n, Rng& rng) {
    std::vector<cplx> z(static_cast<std::size_t>(n));
    for (auto& w : z) w = std::polar(std::sqrt(rng.uniform()), 2.0 * std::numbers::pi * rng.uniform());
    return PointSet(std::move(z));
}

PointSet random_annulus(int n, Rng& rng) {
    std::vector<cplx> z(static_cast<std::size_t>(n));
    for (auto& w : z) w = std::polar(0.5 + rng.uniform(), 2.0 * std::numbers::pi * rng.uniform());
    return PointSet(std::move(z));
}

Poly random_monic(int N, Rng& rng, mp::Precision prec) {
    std::vector<cplx> c(static_cast<std::size_t>(N) + 1);
    for (auto& x : c) x = rng.complex_normal();
    c.back() = 1.0;
    return Poly::from_coefficients(c, prec);
}

// AC1 -----------------------------------------------------------------------

Outcome ac1() {
    const mp::Precision prec = 256;
    const double tol = std::ldexp(1.0, -128);
    double worst_semigroup = 0.0, worst_inversion = 0.0;
    bool monic = true;
    Rng rng(101);
    for (int N = 1; N <= 64; ++N) {
        const Poly p = random_monic(N, rng, prec);
        // dyadic steps so the summed step is exact in double
        auto step = [&rng] {
            return cplx(std::floor(17.0 * rng.uniform()) - 8.0, std::floor(17.0 * rng.uniform()) - 8.0) / 16.0;
        };
        const cplx a = step(), b = step();
        const Poly two = heat_additive(heat_additive(p, {a, N, Mode::additive}), {b, N, Mode::additive});
        worst_semigroup = std::max(worst_semigroup, relative_coeff_error(two, heat_additive(p, {a + b, N, Mode::additive})));

        const Poly zN = Poly::monomial(N, prec);
        const Poly back = heat_additive(heat_additive(zN, {-1.0, N, Mode::additive}), {1.0, N, Mode::additive});
        worst_inversion = std::max(worst_inversion, relative_coeff_error(back, zN));

        const Poly q = heat_multiplicative(p, {rng.complex_normal(), N, Mode::multiplicative});
        monic = monic && mpfr_cmp_ui(q.leading().re.raw(), 1) == 0 && q.leading().im.is_zero();
    }
    return {worst_semigroup <= tol && worst_inversion <= tol && monic,
            fmt("semigroup %.3g, inversion %.3g (tol 2^-128 = %.3g), monic exact %s", worst_semigroup, worst_inversion,
                tol, monic ? "yes" : "no")};
}

// AC2 -----------------------------------------------------------------------

Outcome ac2() {
    const int N = 16, trials = 50;
    double worst = 0.0;
    int collisions = 0;
    for (Mode mode : {Mode::additive, Mode::multiplicative}) {
        for (int trial = 0; trial < trials; ++trial) {
            Rng rng(200 + static_cast<std::uint64_t>(mode == Mode::multiplicative), static_cast<std::uint64_t>(trial));
            const PointSet start = mode == Mode::additive ? random_disk(N, rng) : random_annulus(N, rng);
            const cplx dtau = std::polar(std::sqrt(rng.uniform()), 2.0 * std::numbers::pi * rng.uniform());
            const auto b = integrate_trajectories(start, N, 0.0, dtau, mode);
            collisions += static_cast<int>(b.collisions.size());
            worst = std::max(worst, max_pairing_distance(b.endpoints(), evolve_zeros(start, N, dtau, mode)));
        }
    }
    return {worst <= 1e-6, fmt("max pairing distance %.3g over %d trials per mode (tol 1e-6), %d guard trips", worst,
                               trials, collisions)};
}

// AC3 -----------------------------------------------------------------------

Outcome ac3() {
    double m1 = 0.0, m2 = 0.0, ode = 0.0;
    const std::vector<json> taus = {json::array({0.2, 0.5}), json(0.0), json::array({1.0, -0.8})};
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        json doc = load_config("moments");
        doc["seed"] = seed;
        doc["tau"] = taus[seed - 1];
        const auto m = run_doc(doc, "ac3_" + std::to_string(seed));
        m1 = std::max(m1, metric(m, "m1_drift"));
        m2 = std::max(m2, metric(m, "m2_error"));
        ode = std::max(ode, metric(m, "moment_ode_error"));
    }
    return {m1 <= 1e-10 && m2 <= 1e-8 && ode <= 1e-6,
            fmt("N=16 K=6: m1 drift %.3g (1e-10), m2 error %.3g (1e-8), moment ODE %.3g (1e-6)", m1, m2, ode)};
}

// AC4 -----------------------------------------------------------------------

json padded(const std::vector<double>& re, const std::vector<double>& im, int N) {
    json v = json::array();
    for (int k = 0; k < N; ++k) {
        const auto i = static_cast<std::size_t>(k) % re.size();
        v.push_back(json::array({re[i], im[i]}));
    }
    return v;
}

Outcome ac4() {
    struct Case {
        std::string name;
        json doc;
        bool control;
    };
    std::vector<Case> cases;
    for (int N : {2, 4}) {
        for (auto [t0, t1] : {std::pair{1.0, 0.0}, std::pair{0.0, 1.0}}) {
            const std::vector<std::pair<std::string, json>> starts = {
                {"zero", json{{"zero", true}}},
                {"diag(1,-1)", json{{"values", padded({1, -1}, {0, 0}, N)}}},
                {"diag(i,-i)", json{{"values", padded({0, 0}, {1, -1}, N)}}},
            };
            for (const auto& [label, init] : starts) {
                json d = load_config("deformation_additive");
                d["model"]["N"] = N;
                d["model"]["initial"] = init;
                d["tau0"] = t0;
                d["tau"] = t1;
                cases.push_back({fmt("add N=%d %g->%g %s", N, t0, t1, label.c_str()), d, false});
            }
        }
        for (const auto& [label, vals] : {std::pair{"I", std::vector<double>{1, 1}}, std::pair{"diag(1,4)", std::vector<double>{1, 4}}}) {
            json d = load_config("deformation_multiplicative");
            d["model"]["N"] = N;
            d["model"]["initial"] = json{{"values", padded(vals, {0, 0}, N)}};
            cases.push_back({fmt("mult N=%d %s", N, label), d, true});
        }
    }

    bool ok = true;
    std::string detail;
    int passed = 0, controls_rejected = 0, controls = 0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        auto& c = cases[i];
        c.doc["mc_samples"] = 200000;
        c.doc["options"]["control"] = c.control;
        const auto m = run_doc(c.doc, "ac4_" + std::to_string(i));
        const double frac = metric(m, "pass_fraction");
        bool case_ok = frac >= 0.85;
        std::string line = fmt("    %-28s pass fraction %.3f, max z %.2f", c.name.c_str(), frac, metric(m, "max_z_score"));
        if (c.control) {
            const double cf = metric(m, "control_pass_fraction");
            ++controls;
            if (cf < 0.85) ++controls_rejected;
            case_ok = case_ok && cf < 0.85;
            line += fmt(", conjugated-tau control %.3f", cf);
        }
        passed += case_ok;
        ok = ok && case_ok;
        detail += "\n" + line + (case_ok ? "" : "  <-- fails");
    }
    return {ok, fmt("%d/%zu cases >= 85%% within 4 SE at M=2e5; %d/%d controls rejected", passed, cases.size(),
                    controls_rejected, controls) + detail};
}

// AC5 -----------------------------------------------------------------------

Outcome ac5() {
    bool ok = true;
    std::string detail;
    for (Mode mode : {Mode::additive, Mode::multiplicative}) {
        ModelSpec spec;
        spec.kind = mode;
        spec.N = 2;
        spec.seed = 5;
        cplx z0;
        if (mode == Mode::additive) {
            spec.params = {1.0, 0.5, false};
            spec.initial = InitialSpectrum::zero();
            z0 = {0.3, 0.1};
        } else {
            spec.params = {0.5, 0.5, false};
            spec.initial = InitialSpectrum::from_values({1.0, 4.0});
            z0 = {1.5, 0.5};
        }
        const auto r = pde_residual_check(spec, z0, 0.05, 0.05, 500000);
        const double se = std::hypot(r.se_re, r.se_im);
        // the operator with the wrong sign must be rejected
        const double flipped = std::abs(r.d_dtau + r.spatial) / se;
        const bool mode_ok = r.pass && std::abs(r.residual) <= 4.0 * se && flipped > 4.0;
        ok = ok && mode_ok;
        detail += fmt("%s%s residual %.3g = %.2f SE (sign-flipped operator %.1f SE)", detail.empty() ? "" : "; ",
                      std::string(to_string(mode)).c_str(), std::abs(r.residual), std::abs(r.residual) / se, flipped);
    }
    return {ok, "N=2 M=5e5: " + detail};
}

// AC6 -----------------------------------------------------------------------

Outcome ac6() {
    int good = 0;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        json doc = load_config("circ_to_semicircle");
        doc["seed"] = seed;
        doc["options"]["cross_validate"] = false;
        doc["thresholds"] = json::object();
        const auto m = run_doc(doc, "ac6_" + std::to_string(seed));
        const double im = metric(m, "median_abs_im"), ks = metric(m, "ks_re");
        good += im <= 0.1 && ks <= 0.08;
        detail += fmt("%s(%.3f, %.3f)", detail.empty() ? "" : " ", im, ks);
    }
    return {good >= 6, fmt("N=256: %d/10 seeds with median|Im| <= 0.1 and KS <= 0.08; (median|Im|, KS) = ", good) + detail};
}

// AC7 -----------------------------------------------------------------------

Outcome ac7() {
    int below = 0;
    double fraction_sum = 0.0;
    std::string counts;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        json doc = load_config("real_roots");
        doc["seed"] = seed;
        doc["thresholds"] = json::object();
        const auto m = run_doc(doc, "ac7_roots_" + std::to_string(seed));
        const double n = metric(m, "real_root_count");
        below += n < 60.0;
        fraction_sum += n / 60.0;
        counts += fmt("%s%.0f", counts.empty() ? "" : ",", n);
    }
    const double mean_fraction = fraction_sum / 20.0;

    json doc = load_config("semicircle_to_circle");
    doc["thresholds"] = json::object();
    const double ed = metric(run_doc(doc, "ac7_disk"), "energy_distance");

    const bool ok = below >= 19 && mean_fraction >= 0.35 && mean_fraction <= 0.65 && ed <= 0.1;
    return {ok, fmt("N=60 t=0.05: %d/20 seeds below 60 real roots, mean fraction %.3f [0.35, 0.65], counts %s; "
                    "N=256 t=1 energy distance to disk %.4f (0.1)",
                    below, mean_fraction, counts.c_str(), ed)};
}

// AC8 -----------------------------------------------------------------------

Outcome ac8() {
    json a = load_config("ellipse_from_circle"), b = load_config("ellipse_from_semicircle");
    a["thresholds"] = json::object();
    b["thresholds"] = json::object();
    const double ea = metric(run_doc(a, "ac8_circle"), "energy_distance");
    const double eb = metric(run_doc(b, "ac8_semicircle"), "energy_distance");
    return {ea <= 0.1 && eb <= 0.1,
            fmt("t=0.5 energy distance to ellipse(1.5,0.5): from circle %.4f, from semicircle %.4f (0.1)", ea, eb)};
}

// AC9 -----------------------------------------------------------------------

Outcome ac9() {
    double worst = 0.0;
    std::string detail;
    for (double tau : {-1.0, 1.0}) {
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            json doc = load_config("unit_circle_multiplicative");
            doc["tau"] = tau;
            doc["seed"] = seed;
            const auto m = run_doc(doc, fmt("ac9_%g_%llu", tau, static_cast<unsigned long long>(seed)));
            worst = std::max(worst, metric(m, "circle_defect"));
            if (seed == 1) {
                std::ifstream in(out_root() / fmt("ac9_%g_1", tau) / "trajectories.csv");
                std::string line, last;
                while (std::getline(in, line))
                    if (!line.empty()) last = line;
                detail += fmt("%s tau 0->%g reached t=%s%s", detail.empty() ? "" : ";", tau,
                              last.substr(0, last.find(',')).c_str(), metric(m, "truncated") > 0 ? " (collision guard)" : "");
            }
        }
    }
    return {worst <= 1e-10, fmt("N=32 worst rescaled |z|-1 = %.3g (1e-10);", worst) + detail};
}

// AC10 ----------------------------------------------------------------------

cplx second_difference(const std::array<cplx, 5>& f, double h) {
    return (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * h * h);
}

Outcome ac10() {
    const int N = 8;
    const double h = 2e-3, t0 = 0.3;
    const cplx dtau = 0.5;
    double worst = 0.0;
    int paths = 0;
    for (Mode mode : {Mode::additive, Mode::multiplicative}) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            Rng rng(1000 + seed);
            const PointSet start = mode == Mode::additive ? random_disk(N, rng) : random_annulus(N, rng);
            IntegrationOpts opts;
            opts.rel_tol = 1e-14;
            opts.abs_tol = 1e-15;
            opts.sample_times = {0.0, t0 - 2 * h, t0 - h, t0, t0 + h, t0 + 2 * h, 1.0};
            const auto b = integrate_trajectories(start, N, 0.0, dtau, mode, opts);
            if (!b.collisions.empty()) continue;
            const auto accel = cm_accel(b.at(3), N, mode);
            for (std::size_t j = 0; j < static_cast<std::size_t>(N); ++j) {
                std::array<cplx, 5> f;
                for (std::size_t s = 0; s < 5; ++s) {
                    const cplx z = b.paths[j][s + 1];
                    f[s] = mode == Mode::additive ? z : cplx(0, -1) * std::log(z);
                }
                if (mode == Mode::multiplicative)
                    for (auto& w : f)
                        w.real(w.real() + 2.0 * std::numbers::pi * std::round((f[2].real() - w.real()) / (2.0 * std::numbers::pi)));
                const cplx fd = second_difference(f, h) / (dtau * dtau);
                worst = std::max(worst, std::abs(fd - accel[j]) / std::abs(accel[j]));
                ++paths;
            }
        }
    }
    return {worst <= 1e-6 && paths >= 64,
            fmt("N=8: worst relative FD acceleration error %.3g over %d paths, both modes (1e-6)", worst, paths)};
}

// AC11 ----------------------------------------------------------------------

Outcome ac11() {
    json doc = load_config("circ_to_semicircle");
    doc["options"]["cross_validate"] = false;
    doc["thresholds"] = json::object();
    const double straight = metric(run_doc(doc, "ac11_chord"), "straightness");

    json beyond = load_config("beyond");
    beyond["thresholds"] = json::object();
    const auto m = run_doc(beyond, "ac11_beyond");
    const double im = metric(m, "median_abs_im"), ks = metric(m, "ks_re");
    return {straight <= 0.05 && im <= 0.1 && ks <= 0.1,
            fmt("N=256 median chord deviation %.4f x diameter (0.05); beyond tau=-1: median|Im| %.4f (0.1), KS vs "
                "semicircle(2) %.4f (0.1)",
                straight, im, ks)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4},   {"AC5", ac5},   {"AC6", ac6},
        {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10}, {"AC11", ac11},
    };
    const std::set<std::string> only(argv + 1, argv + argc);
    fs::create_directories(out_root());

    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        if (!only.empty() && !only.count(name)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        // runtime budgets
        if (name == "AC1" && secs >= 1.0) o = {false, o.detail + fmt(" [runtime %.2fs exceeds 1s]", secs)};
        if (name == "AC2" && secs >= 60.0) o = {false, o.detail + fmt(" [runtime %.1fs exceeds 60s]", secs)};
        failed += !o.pass;
        std::printf("%s %s (%.1fs) %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), secs, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
