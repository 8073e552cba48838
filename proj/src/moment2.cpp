#include "heatflow/moment2.hpp"

#include "heatflow/errors.hpp"
#include "heatflow/polyheat.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace heatflow {

namespace {

constexpr std::uint64_t kDirectTag = 1;
constexpr std::uint64_t kHeatflowTag = 2;
constexpr std::uint64_t kPdeTag = 3;
// exp() of this still fits a long double comfortably
constexpr double kMaxLog = 11000.0;

std::uint64_t stream_id(std::uint64_t tag, std::size_t i) { return (tag << 48) + static_cast<std::uint64_t>(i); }

template <class F>
void run_blocks(int nblocks, int threads, F&& body) {
    threads = std::clamp(threads, 1, nblocks);
    if (threads == 1) {
        for (int b = 0; b < nblocks; ++b) body(b);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int b = next++; b < nblocks; b = next++) {
                try {
                    body(b);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

struct Accum {
    std::vector<long double> sum, sumsq;
    std::size_t count = 0;
    explicit Accum(std::size_t n = 0) : sum(n, 0.0L), sumsq(n, 0.0L) {}
    void add(const std::vector<long double>& v) {
        for (std::size_t g = 0; g < v.size(); ++g) {
            sum[g] += v[g];
            sumsq[g] += v[g] * v[g];
        }
        ++count;
    }
};

std::pair<std::size_t, std::size_t> block_range(std::size_t M, int blocks, int b) {
    const auto B = static_cast<std::size_t>(blocks);
    const auto ub = static_cast<std::size_t>(b);
    return {ub * M / B, (ub + 1) * M / B};
}

// Runs per-sample evaluation over M samples in fixed blocks and reduces in
// block order, so the result does not depend on the thread count.
template <class Sample>
SecondMomentReport reduce_samples(const std::vector<cplx>& grid, std::size_t M, const McOpts& opts, Sample&& sample) {
    if (grid.empty()) throw InvalidArgument("empty evaluation grid");
    if (M < 100) throw InsufficientSamples("need at least 100 samples, got " + std::to_string(M));
    const int blocks = std::max(1, std::min<int>(opts.blocks, static_cast<int>(M)));
    std::vector<Accum> acc(static_cast<std::size_t>(blocks), Accum(grid.size()));
    run_blocks(blocks, opts.threads, [&](int b) {
        const auto [lo, hi] = block_range(M, blocks, b);
        std::vector<long double> vals(grid.size());
        auto& a = acc[static_cast<std::size_t>(b)];
        for (std::size_t i = lo; i < hi; ++i) {
            sample(i, vals);
            a.add(vals);
        }
    });

    SecondMomentReport r;
    r.z_grid = grid;
    r.M = M;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        long double s = 0.0L, ss = 0.0L;
        std::vector<double> block_means;
        for (const auto& a : acc) {
            s += a.sum[g];
            ss += a.sumsq[g];
            if (a.count > 0) block_means.push_back(static_cast<double>(a.sum[g] / static_cast<long double>(a.count)));
        }
        const long double m = static_cast<long double>(M);
        const long double mean = s / m;
        const long double var = std::max(0.0L, (ss - m * mean * mean) / (m - 1.0L));
        r.estimates.push_back(static_cast<double>(mean));
        r.std_errors.push_back(static_cast<double>(std::sqrt(var / m)));
        std::sort(block_means.begin(), block_means.end());
        const std::size_t nb = block_means.size();
        r.median_of_means.push_back(nb % 2 ? block_means[nb / 2] : 0.5 * (block_means[nb / 2 - 1] + block_means[nb / 2]));
    }
    return r;
}

long double abs2_det_from_eigs(const PointSet& ev, cplx z) {
    double logsum = 0.0;
    for (cplx l : ev) logsum += std::log(std::norm(z - l));
    if (logsum > kMaxLog) throw Overflow("log|det|^2 = " + std::to_string(logsum) + " exceeds the long double range");
    return std::exp(static_cast<long double>(logsum));
}

}  // namespace

std::string_view to_string(Route r) { return r == Route::direct ? "direct" : "heatflow"; }

SecondMomentReport estimate_D_direct(const ModelSpec& spec, const std::vector<cplx>& z_grid, std::size_t M,
                                     const McOpts& opts) {
    spec.validate();
    auto r = reduce_samples(z_grid, M, opts, [&](std::size_t i, std::vector<long double>& out) {
        Rng rng(spec.seed, stream_id(kDirectTag, i));
        const PointSet ev = eigenvalues(build_model_matrix(spec, rng));
        for (std::size_t g = 0; g < z_grid.size(); ++g) out[g] = abs2_det_from_eigs(ev, z_grid[g]);
    });
    r.route = Route::direct;
    r.spec = spec;
    r.tau0 = spec.params.tau;
    r.tau = spec.params.tau;
    return r;
}

SecondMomentReport estimate_D_heatflow(const ModelSpec& spec, cplx tau, const std::vector<cplx>& z_grid,
                                       std::size_t M, const McOpts& opts) {
    spec.validate();
    const mp::Precision prec = opts.precision_bits > 0 ? opts.precision_bits : default_precision(spec.N);
    const HeatStep step{tau - spec.params.tau, spec.N, spec.kind};
    auto r = reduce_samples(z_grid, M, opts, [&](std::size_t i, std::vector<long double>& out) {
        Rng rng(spec.seed, stream_id(kHeatflowTag, i));
        const PointSet ev = eigenvalues(build_model_matrix(spec, rng));
        const Poly q = apply_heat(from_roots(ev, prec), step);
        for (std::size_t g = 0; g < z_grid.size(); ++g) {
            const long double a = mp::abs_ld(evaluate(q, z_grid[g]));
            const long double v = a * a;
            if (!std::isfinite(v)) throw Overflow("|q(z)|^2 exceeds the long double range");
            out[g] = v;
        }
    });
    r.route = Route::heatflow;
    r.spec = spec;
    r.tau0 = spec.params.tau;
    r.tau = tau;
    return r;
}

std::string SecondMomentReport::to_json() const {
    nlohmann::json j;
    auto grid = nlohmann::json::array();
    for (cplx z : z_grid) grid.push_back({z.real(), z.imag()});
    j["grid"] = grid;
    j["estimates"] = estimates;
    j["std_errors"] = std_errors;
    j["median_of_means"] = median_of_means;
    j["M"] = M;
    j["route"] = std::string(to_string(route));
    j["params"] = {{"kind", std::string(heatflow::to_string(spec.kind))},
                   {"N", spec.N},
                   {"s", spec.params.s},
                   {"tau0", {tau0.real(), tau0.imag()}},
                   {"tau", {tau.real(), tau.imag()}},
                   {"brownian_steps", spec.steps()},
                   {"seed", spec.seed}};
    return j.dump(2) + "\n";
}

VerdictTable verify_deformation(const SecondMomentReport& lhs, const SecondMomentReport& rhs, double threshold,
                                double required_fraction) {
    if (lhs.z_grid.size() != rhs.z_grid.size()) throw GridMismatch("grids differ in size");
    for (std::size_t g = 0; g < lhs.z_grid.size(); ++g)
        if (lhs.z_grid[g] != rhs.z_grid[g]) throw GridMismatch("grid point " + std::to_string(g) + " differs");
    if (lhs.z_grid.empty()) throw GridMismatch("empty grid");
    VerdictTable t;
    t.threshold = threshold;
    std::size_t passed = 0;
    for (std::size_t g = 0; g < lhs.z_grid.size(); ++g) {
        VerdictRow row;
        row.z = lhs.z_grid[g];
        row.lhs = lhs.estimates[g];
        row.rhs = rhs.estimates[g];
        row.combined_se = std::hypot(lhs.std_errors[g], rhs.std_errors[g]);
        const double diff = std::abs(row.lhs - row.rhs);
        row.z_score = diff == 0.0 ? 0.0 : diff / row.combined_se;
        row.pass = diff <= threshold * row.combined_se;
        passed += row.pass ? 1 : 0;
        t.rows.push_back(row);
    }
    t.pass_fraction = static_cast<double>(passed) / static_cast<double>(t.rows.size());
    t.overall_pass = t.pass_fraction >= required_fraction;
    return t;
}

std::string VerdictTable::to_csv() const {
    std::string out = "z_re,z_im,lhs,rhs,combined_se,z_score,pass\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.6g,%d\n", r.z.real(), r.z.imag(), r.lhs, r.rhs,
                      r.combined_se, r.z_score, r.pass ? 1 : 0);
        out += buf;
    }
    return out;
}

TSReport estimate_T_and_S(const ModelSpec& spec, const std::vector<cplx>& z_grid, std::size_t M,
                          const McOpts& opts) {
    spec.validate();
    const std::size_t G = z_grid.size();
    // D values in slots [0, G), per-sample (1/N) log|det|^2 in [G, 2G)
    std::vector<cplx> doubled(z_grid);
    doubled.insert(doubled.end(), z_grid.begin(), z_grid.end());
    const double n = static_cast<double>(spec.N);
    const auto r = reduce_samples(doubled, M, opts, [&](std::size_t i, std::vector<long double>& out) {
        Rng rng(spec.seed, stream_id(kDirectTag, i));
        const PointSet ev = eigenvalues(build_model_matrix(spec, rng));
        for (std::size_t g = 0; g < G; ++g) {
            double logsum = 0.0;
            for (cplx l : ev) logsum += std::log(std::norm(z_grid[g] - l));
            if (logsum > kMaxLog) throw Overflow("log|det|^2 exceeds the long double range");
            out[g] = std::exp(static_cast<long double>(logsum));
            out[G + g] = logsum / n;
        }
    });
    TSReport ts;
    ts.z_grid = z_grid;
    ts.M = M;
    for (std::size_t g = 0; g < G; ++g) {
        const double mean = r.estimates[g];
        if (!(mean > 0.0)) throw NonpositiveMean("mean |det|^2 is " + std::to_string(mean) + " at grid point " + std::to_string(g));
        ts.T.push_back(std::log(mean) / n);
        ts.T_se.push_back(r.std_errors[g] / (mean * n));
        ts.S.push_back(r.estimates[G + g]);
        ts.S_se.push_back(r.std_errors[G + g]);
    }
    return ts;
}

PdeResidual pde_residual_check(const ModelSpec& spec, cplx z0, double h_tau, double h_z, std::size_t M,
                               const McOpts& opts) {
    spec.validate();
    if (!(h_tau > 0.0) || !(h_z > 0.0) || !std::isfinite(h_tau) || !std::isfinite(h_z))
        throw StencilIllConditioned("steps must be positive and finite");
    const cplx tau0 = spec.params.tau;
    if (h_tau < 1e-6 * std::max(1.0, std::abs(tau0)) || h_z < 1e-6 * std::max(1.0, std::abs(z0)))
        throw StencilIllConditioned("steps too small for double-precision differencing");

    ModelSpec base = spec;
    base.brownian_steps = spec.steps();
    const cplx offsets[4] = {{h_tau, 0.0}, {-h_tau, 0.0}, {0.0, h_tau}, {0.0, -h_tau}};
    std::vector<ModelSpec> shifted(4, base);
    for (int k = 0; k < 4; ++k) {
        shifted[static_cast<std::size_t>(k)].params.tau = tau0 + offsets[k];
        try {
            shifted[static_cast<std::size_t>(k)].validate();
        } catch (const InvalidArgument& e) {
            throw StencilIllConditioned(std::string("tau stencil leaves the admissible disk: ") + e.what());
        }
        if (!shifted[static_cast<std::size_t>(k)].params.in_disk())
            throw StencilIllConditioned("tau stencil leaves the admissible disk");
    }

    const double h = h_z;
    const cplx iy(0.0, h);
    const std::vector<cplx> zs = {z0, z0 + h, z0 - h, z0 + iy, z0 - iy, z0 + h + iy, z0 + h - iy, z0 - h + iy, z0 - h - iy};
    const double N = static_cast<double>(spec.N);
    const Mode mode = spec.kind;

    // slots: residual re/im, d_dtau re/im, spatial re/im, D
    const std::vector<cplx> slots(7);
    const auto r = reduce_samples(slots, M, opts, [&](std::size_t i, std::vector<long double>& out) {
        const std::uint64_t stream = stream_id(kPdeTag, i);
        double Dt[4];
        for (int k = 0; k < 4; ++k) {
            Rng rng(spec.seed, stream);
            const PointSet ev = eigenvalues(build_model_matrix(shifted[static_cast<std::size_t>(k)], rng));
            Dt[k] = static_cast<double>(abs2_det_from_eigs(ev, z0));
        }
        Rng rng(spec.seed, stream);
        const PointSet ev = eigenvalues(build_model_matrix(base, rng));
        double D[9];
        for (int k = 0; k < 9; ++k) D[k] = static_cast<double>(abs2_det_from_eigs(ev, zs[static_cast<std::size_t>(k)]));

        const double d_re = (Dt[0] - Dt[1]) / (2.0 * h_tau);
        const double d_im = (Dt[2] - Dt[3]) / (2.0 * h_tau);
        const cplx d_dtau = 0.5 * cplx(d_re, -d_im);

        const double Dx = (D[1] - D[2]) / (2.0 * h);
        const double Dy = (D[3] - D[4]) / (2.0 * h);
        const double Dxx = (D[1] - 2.0 * D[0] + D[2]) / (h * h);
        const double Dyy = (D[3] - 2.0 * D[0] + D[4]) / (h * h);
        const double Dxy = (D[5] - D[6] - D[7] + D[8]) / (4.0 * h * h);
        const cplx dz = 0.5 * cplx(Dx, -Dy);
        const cplx dzz = 0.25 * cplx(Dxx - Dyy, -2.0 * Dxy);
        cplx spatial;
        if (mode == Mode::additive) spatial = dzz / (2.0 * N);
        else spatial = -(z0 * z0 * dzz - (N - 2.0) * z0 * dz - N * D[0]) / (2.0 * N);

        const cplx res = d_dtau - spatial;
        out[0] = res.real();
        out[1] = res.imag();
        out[2] = d_dtau.real();
        out[3] = d_dtau.imag();
        out[4] = spatial.real();
        out[5] = spatial.imag();
        out[6] = D[0];
    });
    PdeResidual p;
    p.residual = {r.estimates[0], r.estimates[1]};
    p.se_re = r.std_errors[0];
    p.se_im = r.std_errors[1];
    p.d_dtau = {r.estimates[2], r.estimates[3]};
    p.spatial = {r.estimates[4], r.estimates[5]};
    p.D = r.estimates[6];
    p.M = M;
    p.pass = std::abs(p.residual) <= 4.0 * std::hypot(p.se_re, p.se_im);
    return p;
}

std::vector<cplx> default_grid(const ModelSpec& spec) {
    double radius = 0.0;
    if (spec.initial.kind == InitialSpectrum::Kind::values)
        for (cplx v : spec.initial.values) radius = std::max(radius, std::abs(v));
    else if (spec.initial.kind == InitialSpectrum::Kind::haar_unitary)
        radius = 1.0;
    const double s = spec.params.s;
    if (spec.kind == Mode::additive) {
        const double rho = s > 0.0 ? std::min(1.0, std::abs(s - spec.params.tau) / s) : 0.0;
        radius += std::sqrt(s) * (1.0 + rho);
    } else {
        radius = std::max(radius, 1e-300) * std::exp(0.5 * (s + std::abs(spec.params.tau)));
    }
    if (radius == 0.0) radius = 1.0;
    std::vector<cplx> grid;
    const double e = 0.8 * radius;
    for (double y : {e, 0.0, -e})
        for (double x : {-e, 0.0, e}) grid.emplace_back(x, y);
    return grid;
}

}  // namespace heatflow
