#include "heatflow/errors.hpp"
#include "heatflow/rootdyn.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

namespace heatflow {

namespace {

using lcplx = std::complex<long double>;

lcplx to_lcplx(const mp::Complex& z) { return {z.re.to_long_double(), z.im.to_long_double()}; }

void set_ld(mp::Complex& out, lcplx v) {
    mpfr_set_ld(out.re.raw(), v.real(), MPFR_RNDN);
    mpfr_set_ld(out.im.raw(), v.imag(), MPFR_RNDN);
}

// Cold start: circles whose radii come from the upper convex hull of
// (k, log2|a_k|), one circle per hull edge.
std::vector<cplx> newton_polygon_guesses(const Poly& p) {
    const int n = p.degree();
    std::vector<double> L(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) L[static_cast<std::size_t>(k)] = mp::log2_abs(p.coeffs[static_cast<std::size_t>(k)]);

    std::vector<int> hull;
    for (int k = 0; k <= n; ++k) {
        if (std::isinf(L[static_cast<std::size_t>(k)])) continue;
        while (hull.size() >= 2) {
            const int i = hull[hull.size() - 2];
            const int j = hull.back();
            const double cross = (L[static_cast<std::size_t>(j)] - L[static_cast<std::size_t>(i)]) * (k - i) -
                                 (L[static_cast<std::size_t>(k)] - L[static_cast<std::size_t>(i)]) * (j - i);
            if (cross <= 0.0) hull.pop_back();
            else break;
        }
        hull.push_back(k);
    }

    std::vector<cplx> guesses;
    guesses.reserve(static_cast<std::size_t>(n));
    // leading zero coefficients mean roots at the origin
    for (int k = 0; k < hull.front(); ++k) guesses.emplace_back(0.0, 0.0);
    constexpr double sigma = 0.7;
    for (std::size_t e = 0; e + 1 < hull.size(); ++e) {
        const int i = hull[e];
        const int j = hull[e + 1];
        const int count = j - i;
        const double log_r = (L[static_cast<std::size_t>(i)] - L[static_cast<std::size_t>(j)]) / count;
        const double r = std::exp2(std::clamp(log_r, -1000.0, 1000.0));
        for (int m = 0; m < count; ++m) {
            const double angle = 2.0 * std::numbers::pi * m / count + sigma + 0.37 * static_cast<double>(e);
            guesses.push_back(std::polar(r, angle));
        }
    }
    return guesses;
}

// Pulls apart coincident starting points, which would make the Aberth sum singular.
void separate_guesses(std::vector<cplx>& g) {
    double scale = 0.0;
    for (cplx z : g) scale = std::max(scale, std::abs(z));
    const double eps = 1e-12 * std::max(scale, 1.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (int attempt = 0; attempt < 64; ++attempt) {
            bool clash = false;
            for (std::size_t j = 0; j < i && !clash; ++j) clash = std::abs(g[i] - g[j]) <= eps;
            if (!clash) break;
            g[i] += std::polar(16.0 * eps * static_cast<double>(attempt + 1), 1.0 + static_cast<double>(i + attempt));
        }
    }
}

}  // namespace

RootResult find_roots(const Poly& p, const RootOpts& opts) {
    const int n = p.degree();
    if (n < 1) throw InvalidArgument("root finding needs degree >= 1");
    const mp::Precision prec = p.precision_bits;
    RootResult result;

    if (n == 1) {
        mp::Complex r(prec), q(prec);
        mp::Real scratch(prec);
        mp::div(q, p.coeffs[0], p.coeffs[1], scratch);
        mp::neg(r, q);
        result.points.points.push_back(r.to_cplx());
        result.roots.push_back(std::move(r));
        return result;
    }

    // Zero trailing coefficients are exact roots at the origin.
    int zeros_at_origin = 0;
    while (zeros_at_origin < n && p.coeffs[static_cast<std::size_t>(zeros_at_origin)].is_zero()) ++zeros_at_origin;
    if (zeros_at_origin > 0) {
        std::vector<mp::Complex> c(p.coeffs.begin() + zeros_at_origin, p.coeffs.end());
        RootResult rest;
        if (zeros_at_origin < n) {
            RootOpts sub = opts;
            sub.initial_guesses.clear();
            rest = find_roots(Poly(std::move(c), prec), sub);
        }
        for (int k = 0; k < zeros_at_origin; ++k) {
            rest.roots.emplace_back(prec);
            rest.points.points.emplace_back(0.0, 0.0);
        }
        return rest;
    }

    std::vector<cplx> guesses = opts.initial_guesses;
    if (static_cast<int>(guesses.size()) != n) guesses = newton_polygon_guesses(p);
    separate_guesses(guesses);

    const auto N = static_cast<std::size_t>(n);
    std::vector<mp::Complex> z;
    z.reserve(N);
    for (cplx g : guesses) z.emplace_back(g, prec);

    std::vector<long double> abs_coeff(N + 1);
    for (std::size_t k = 0; k <= N; ++k) abs_coeff[k] = mp::abs_ld(p.coeffs[k]);

    const long double unit = std::ldexp(1.0L, -static_cast<int>(prec));
    const long double tol = unit * 8.0L * static_cast<long double>(n + 1);

    mp::Complex val(prec), der(prec), tmp(prec), ratio(prec), diff(prec), corr(prec), dl(prec);
    mp::Real scratch(prec);
    std::vector<char> converged(N, 0);
    std::vector<double> backward(N, 0.0);

    // Returns the backward error of z[j]; fills val (p) and der (p').
    auto horner = [&](std::size_t j) {
        mp::set(val, p.coeffs[N]);
        mpfr_set_ui(der.re.raw(), 0, MPFR_RNDN);
        mpfr_set_ui(der.im.raw(), 0, MPFR_RNDN);
        const long double az = std::abs(to_lcplx(z[j]));
        long double s = abs_coeff[N];
        for (std::size_t k = N; k-- > 0;) {
            mp::mul(tmp, der, z[j]);
            mp::add(der, tmp, val);
            mp::mul(tmp, val, z[j]);
            mp::add(val, tmp, p.coeffs[k]);
            s = s * az + abs_coeff[k];
        }
        const long double pv = mp::abs_ld(val);
        return s > 0.0L ? pv / s : pv;
    };

    auto aberth_step = [&](std::size_t j) {
        if (der.is_zero()) {
            // stationary point: nudge and retry next sweep
            const lcplx zj = to_lcplx(z[j]);
            set_ld(dl, zj + lcplx(1e-8L * (1.0L + std::abs(zj)), 1e-8L));
            mp::set(z[j], dl);
            return;
        }
        mp::div(ratio, val, der, scratch);
        lcplx S = 0.0L;
        for (std::size_t k = 0; k < N; ++k) {
            if (k == j) continue;
            mp::sub(diff, z[j], z[k]);
            const lcplx d = to_lcplx(diff);
            if (d == lcplx(0.0L, 0.0L)) continue;
            S += 1.0L / d;
        }
        const lcplx r = to_lcplx(ratio);
        const lcplx rs = r * S;
        const lcplx delta = rs / (1.0L - rs);
        // w = r (1 + delta)
        set_ld(dl, delta);
        mp::mul(corr, ratio, dl);
        mp::add(corr, corr, ratio);
        if (!corr.is_finite()) return;
        mp::sub(z[j], z[j], corr);
    };

    int iter = 0;
    bool all_done = false;
    for (; iter < opts.max_iterations && !all_done; ++iter) {
        all_done = true;
        for (std::size_t j = 0; j < N; ++j) {
            if (converged[j]) continue;
            const long double be = horner(j);
            backward[j] = static_cast<double>(be);
            if (be <= tol) {
                converged[j] = 1;
                continue;
            }
            all_done = false;
            aberth_step(j);
        }
    }
    if (!all_done) {
        double worst = 0.0;
        for (std::size_t j = 0; j < N; ++j) worst = std::max(worst, backward[j]);
        throw NoConvergence("Aberth iteration cap " + std::to_string(opts.max_iterations) +
                            " reached; worst backward error " + std::to_string(worst));
    }

    for (int sweep = 0; sweep < opts.polish_sweeps; ++sweep) {
        for (std::size_t j = 0; j < N; ++j) {
            horner(j);
            if (!val.is_zero()) aberth_step(j);
        }
    }

    double worst = 0.0;
    for (std::size_t j = 0; j < N; ++j) worst = std::max(worst, static_cast<double>(horner(j)));

    result.iterations = iter;
    result.worst_backward_error = worst;
    result.points.points.reserve(N);
    for (auto& zj : z) result.points.points.push_back(zj.to_cplx());
    result.roots = std::move(z);
    return result;
}

}  // namespace heatflow
