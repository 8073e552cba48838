#include "heatflow/errors.hpp"
#include "heatflow/polyheat.hpp"
#include "heatflow/rng.hpp"
#include "heatflow/observables.hpp"
#include "heatflow/rootdyn.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace heatflow;

namespace {

constexpr mp::Precision kPrec = 256;

Poly poly(std::initializer_list<cplx> c, mp::Precision prec = kPrec) {
    const std::vector<cplx> v(c);
    return Poly::from_coefficients(v, prec);
}

double coeff_norm(const Poly& p) {
    long double s = 0.0L;
    for (const auto& a : p.coeffs) s = std::max(s, mp::abs_ld(a));
    return static_cast<double>(s);
}

bool coeffs_equal(const Poly& a, const Poly& b) {
    if (a.coeffs.size() != b.coeffs.size()) return false;
    for (std::size_t k = 0; k < a.coeffs.size(); ++k) {
        if (mpfr_cmp(a[k].re.raw(), b[k].re.raw()) != 0) return false;
        if (mpfr_cmp(a[k].im.raw(), b[k].im.raw()) != 0) return false;
    }
    return true;
}

Poly random_poly(int degree, Rng& rng, mp::Precision prec = kPrec) {
    std::vector<cplx> c(static_cast<std::size_t>(degree) + 1);
    for (auto& x : c) x = rng.complex_normal();
    c.back() = 1.0;
    return Poly::from_coefficients(c, prec);
}

mp::Real exp_real(double x, mp::Precision prec) {
    mp::Real r(x, prec);
    mpfr_exp(r.raw(), r.raw(), MPFR_RNDN);
    return r;
}

}  // namespace

TEST_CASE("from_roots examples") {
    CHECK(relative_coeff_error(from_roots(PointSet{cplx(0, 1), cplx(0, -1)}, kPrec), poly({1.0, 0.0, 1.0})) == 0.0);
    CHECK(relative_coeff_error(from_roots(PointSet{1.0, 1.0}, kPrec), poly({1.0, -2.0, 1.0})) == 0.0);

    Rng rng(4);
    std::vector<cplx> pts(20);
    for (auto& z : pts) z = std::polar(std::sqrt(rng.uniform()), 6.283185307179586 * rng.uniform());
    const Poly p = from_roots(pts, kPrec);
    CHECK(p.degree() == 20);
    const double scale = coeff_norm(p);
    for (cplx z : pts) CHECK(mp::abs_ld(evaluate(p, z)) / scale < std::ldexp(1.0, -static_cast<int>(kPrec) / 2));
}

TEST_CASE("additive heat examples") {
    CHECK(relative_coeff_error(heat_additive(Poly::monomial(2, kPrec), {1.0, 1, Mode::additive}),
                               poly({1.0, 0.0, 1.0})) == 0.0);

    // c = 1/6: z^3 + (1/6) * 6z
    const Poly q = heat_additive(Poly::monomial(3, kPrec), {1.0, 3, Mode::additive});
    CHECK(relative_coeff_error(q, poly({0.0, 1.0, 0.0, 1.0})) < 1e-70);
    auto z = roots(q).points;
    std::sort(z.begin(), z.end(), [](cplx a, cplx b) { return a.imag() < b.imag(); });
    CHECK(std::abs(z[0] - cplx(0, -1)) < 1e-30);
    CHECK(std::abs(z[1]) < 1e-30);
    CHECK(std::abs(z[2] - cplx(0, 1)) < 1e-30);

    for (int N : {1, 2, 5, 17, 64}) {
        const Poly back = heat_additive(hermite(N, kPrec), {1.0, N, Mode::additive});
        INFO("N = " << N);
        CHECK(relative_coeff_error(back, Poly::monomial(N, kPrec)) <= std::ldexp(1.0, -128));
    }
}

TEST_CASE("multiplicative heat examples") {
    const double t = 0.8;
    for (int N : {1, 3, 9}) {
        const Poly p = heat_multiplicative(Poly::monomial(N, kPrec), {cplx(t, 0.3), N, Mode::multiplicative});
        CHECK(coeffs_equal(p, Poly::monomial(N, kPrec)));

        const Poly one = heat_multiplicative(Poly::monomial(0, kPrec), {t, N, Mode::multiplicative});
        CHECK(std::abs(one[0].to_cplx() - std::exp(t / 2.0)) < 1e-15);
    }

    const Poly q = heat_multiplicative(poly({-1.0, 0.0, 1.0}), {t, 2, Mode::multiplicative});
    CHECK(std::abs(q[0].to_cplx() + std::exp(t / 2.0)) < 1e-15);
    CHECK(q[1].is_zero());
    auto z = roots(q).points;
    std::sort(z.begin(), z.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
    CHECK(std::abs(z[1] - std::exp(t / 4.0)) < 1e-14);
    CHECK(std::abs(z[0] + std::exp(t / 4.0)) < 1e-14);

    CHECK_THROWS_AS(heat_multiplicative(Poly::monomial(4, kPrec), {1.0, 3, Mode::multiplicative}), InvalidArgument);
}

TEST_CASE("multiplicative factors agree with a truncated series of the differential operator") {
    // L = z^2 d^2 - (N-2) z d - N acting on z^k gives lambda_k z^k with
    // lambda_k = k(k-1) - (N-2)k - N; exp{-dtau/(2N) L} is then diagonal.
    const int N = 7;
    const cplx dtau(0.6, -0.2);
    for (int k = 0; k <= N; ++k) {
        const double lambda = k * (k - 1.0) - (N - 2.0) * k - N;
        cplx term = 1.0, series = 1.0;
        for (int m = 1; m < 60; ++m) {
            term *= -dtau * lambda / (2.0 * N) / static_cast<double>(m);
            series += term;
        }
        const Poly p = heat_multiplicative(Poly::monomial(k, kPrec), {dtau, N, Mode::multiplicative});
        INFO("k = " << k);
        CHECK(std::abs(p[static_cast<std::size_t>(k)].to_cplx() - series) < 1e-13 * std::abs(series));
    }
}

TEST_CASE("hermite examples") {
    CHECK(relative_coeff_error(hermite(1, kPrec), poly({0.0, 1.0})) == 0.0);
    CHECK(relative_coeff_error(hermite(2, kPrec), poly({-0.5, 0.0, 1.0})) == 0.0);

    const auto z = roots(hermite(60, default_precision(60)));
    for (cplx w : z) CHECK(std::abs(w.imag()) < 1e-12);
    CHECK(ks_against(real_parts(z), [](double x) { return semicircle_cdf(x, 1.0); }) <= 0.12);
}

TEST_CASE("evaluate and differentiate") {
    const Poly p = poly({1.0, 0.0, 1.0});
    CHECK(evaluate(p, cplx(0, 1)).is_zero());
    CHECK(evaluate(p, cplx(0, 0)).to_cplx() == cplx(1.0, 0.0));

    const Poly q = heat_multiplicative(poly({-1.0, 0.0, 1.0}), {1.0, 2, Mode::multiplicative});
    mp::Complex root(kPrec);
    root.re = exp_real(0.25, kPrec);
    root.im = 0.0;
    CHECK(mp::log2_abs(evaluate(q, root)) < -240.0);

    CHECK(relative_coeff_error(differentiate(Poly::monomial(3, kPrec)), poly({0.0, 0.0, 3.0})) == 0.0);
    CHECK(differentiate(poly({5.0})).degree() == -1);
    CHECK(evaluate(differentiate(from_roots(PointSet{1.0, -1.0}, kPrec)), 1.0).to_cplx() == cplx(2.0, 0.0));
}

TEST_CASE("semigroup property") {
    Rng rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        const int N = 3 + trial * 6;
        const Poly p = random_poly(N, rng);
        // dyadic steps with |Re|, |Im| <= 1/2 so c1 + c2 is exact in double
        auto dyadic = [&rng] {
            return cplx(std::floor(17.0 * rng.uniform()) - 8.0, std::floor(17.0 * rng.uniform()) - 8.0) / 16.0;
        };
        const cplx c1 = dyadic(), c2 = dyadic();
        for (Mode mode : {Mode::additive, Mode::multiplicative}) {
            const Poly two = apply_heat(apply_heat(p, {c1, N, mode}), {c2, N, mode});
            const Poly one = apply_heat(p, {c1 + c2, N, mode});
            INFO("N = " << N << " mode = " << to_string(mode) << " log2 err = " << std::log2(relative_coeff_error(two, one)));
            CHECK(relative_coeff_error(two, one) <= std::ldexp(1.0, -(static_cast<int>(kPrec) - 8)));
        }
    }
}

TEST_CASE("inversion") {
    Rng rng(13);
    for (int N : {2, 8, 32, 64}) {
        const Poly p = random_poly(N, rng);
        const cplx d = rng.complex_normal();
        const Poly back = heat_additive(heat_additive(p, {d, N, Mode::additive}), {-d, N, Mode::additive});
        CHECK(relative_coeff_error(back, p) <= std::ldexp(1.0, -static_cast<int>(kPrec) / 2));
    }
}

TEST_CASE("additive heat preserves the top two coefficients") {
    Rng rng(14);
    for (int trial = 0; trial < 20; ++trial) {
        const int N = 1 + trial;
        const Poly p = random_poly(N, rng);
        const Poly q = heat_additive(p, {rng.complex_normal(), N, Mode::additive});
        REQUIRE(q.degree() == N);
        CHECK(coeffs_equal(Poly({q[static_cast<std::size_t>(N)]}, kPrec), Poly({p[static_cast<std::size_t>(N)]}, kPrec)));
        if (N >= 1) {
            const auto k = static_cast<std::size_t>(N - 1);
            CHECK(mpfr_cmp(q[k].re.raw(), p[k].re.raw()) == 0);
            CHECK(mpfr_cmp(q[k].im.raw(), p[k].im.raw()) == 0);
        }
    }
}

TEST_CASE("multiplicative heat preserves monicity exactly") {
    Rng rng(15);
    for (int N : {1, 4, 30, 100}) {
        const Poly q = heat_multiplicative(random_poly(N, rng), {rng.complex_normal(), N, Mode::multiplicative});
        CHECK(mpfr_cmp_ui(q.leading().re.raw(), 1) == 0);
        CHECK(q.leading().im.is_zero());
    }
}

TEST_CASE("real coefficients stay real under real additive heat") {
    Rng rng(16);
    std::vector<cplx> c(12);
    for (auto& x : c) x = rng.normal();
    const Poly q = heat_additive(Poly::from_coefficients(c, kPrec), {-0.7, 11, Mode::additive});
    for (const auto& a : q.coeffs) CHECK(a.im.is_zero());
}

TEST_CASE("heat operators are linear") {
    Rng rng(18);
    const int N = 9;
    const Poly p = random_poly(N, rng), q = random_poly(N, rng);
    const cplx alpha(0.3, -1.2);
    for (Mode mode : {Mode::additive, Mode::multiplicative}) {
        const HeatStep step{cplx(0.4, 0.9), N, mode};
        const Poly lhs = apply_heat(add(scale(p, alpha), q), step);
        const Poly rhs = add(scale(apply_heat(p, step), alpha), apply_heat(q, step));
        CHECK(relative_coeff_error(lhs, rhs) < 1e-70);
    }
}

TEST_CASE("text serialization round trips bit-exactly") {
    Rng rng(19);
    const Poly p = heat_additive(random_poly(15, rng, 300), {cplx(0.1, 0.2), 15, Mode::additive});
    const Poly back = from_text(to_text(p));
    CHECK(back.precision_bits == 300);
    CHECK(coeffs_equal(back, p));
    CHECK_THROWS_AS(from_text("# nonsense\n0 zz 1\n"), ParseError);
}

TEST_CASE("default precision policy") {
    CHECK(default_precision(10) == 256);
    CHECK(default_precision(1000) == 2128);
}
