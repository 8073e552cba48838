#include "heatflow/polyheat.hpp"

#include "heatflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace heatflow {

Poly::Poly(std::vector<mp::Complex> c, mp::Precision prec)
    : coeffs(std::move(c)), precision_bits(prec) {
    if (prec < 64) throw InvalidArgument("precision_bits must be at least 64");
    for (auto& x : coeffs) x.round_to(prec);
    normalize();
}

Poly Poly::monomial(int degree, mp::Precision prec) {
    if (degree < 0) throw InvalidArgument("negative degree");
    std::vector<mp::Complex> c;
    c.reserve(static_cast<std::size_t>(degree) + 1);
    for (int k = 0; k <= degree; ++k) c.emplace_back(cplx(k == degree ? 1.0 : 0.0, 0.0), prec);
    return Poly(std::move(c), prec);
}

Poly Poly::from_coefficients(std::span<const cplx> c, mp::Precision prec) {
    std::vector<mp::Complex> out;
    out.reserve(c.size());
    for (cplx v : c) out.emplace_back(v, prec);
    return Poly(std::move(out), prec);
}

int Poly::degree() const {
    if (coeffs.empty()) return -1;
    if (coeffs.size() == 1 && coeffs[0].is_zero()) return -1;
    return static_cast<int>(coeffs.size()) - 1;
}

std::vector<cplx> Poly::coeffs_double() const {
    std::vector<cplx> out;
    out.reserve(coeffs.size());
    for (const auto& c : coeffs) out.push_back(c.to_cplx());
    return out;
}

void Poly::normalize() {
    while (coeffs.size() > 1 && coeffs.back().is_zero()) coeffs.pop_back();
    if (coeffs.empty()) coeffs.emplace_back(precision_bits);
}

mp::Precision default_precision(int N) {
    return std::max<mp::Precision>(256, 2 * static_cast<mp::Precision>(N) + 128);
}

namespace {

std::vector<mp::Complex> multiply(const std::vector<mp::Complex>& a,
                                  const std::vector<mp::Complex>& b, mp::Precision prec) {
    std::vector<mp::Complex> out;
    out.reserve(a.size() + b.size() - 1);
    for (std::size_t k = 0; k < a.size() + b.size() - 1; ++k) out.emplace_back(prec);
    mp::Complex t(prec);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            mp::mul(t, a[i], b[j]);
            mp::add(out[i + j], out[i + j], t);
        }
    }
    return out;
}

template <class Root>
std::vector<mp::Complex> product_range(std::span<const Root> roots, mp::Precision prec) {
    if (roots.size() == 1) {
        std::vector<mp::Complex> lin;
        lin.emplace_back(prec);
        if constexpr (std::is_same_v<Root, cplx>) {
            lin[0] = -roots[0];
        } else {
            mp::Complex r(prec);
            mp::set(r, roots[0]);
            mp::neg(lin[0], r);
        }
        lin.emplace_back(cplx(1.0, 0.0), prec);
        return lin;
    }
    const std::size_t half = roots.size() / 2;
    return multiply(product_range(roots.first(half), prec),
                    product_range(roots.subspan(half), prec), prec);
}

void require_finite(std::span<const cplx> roots) {
    for (cplx r : roots)
        if (!std::isfinite(r.real()) || !std::isfinite(r.imag()))
            throw InvalidArgument("from_roots: non-finite root");
}

}  // namespace

Poly from_roots(std::span<const cplx> roots, mp::Precision prec) {
    require_finite(roots);
    if (roots.empty()) return Poly::monomial(0, prec);
    return Poly(product_range(roots, prec), prec);
}

Poly from_roots(std::span<const mp::Complex> roots, mp::Precision prec) {
    if (roots.empty()) return Poly::monomial(0, prec);
    return Poly(product_range(roots, prec), prec);
}

constexpr mp::Precision kHeatGuardBits = 64;

Poly heat_additive(const Poly& p, const HeatStep& step) {
    if (step.mode != Mode::additive) throw InvalidArgument("heat_additive called with multiplicative step");
    if (step.N < 1) throw InvalidArgument("heat step normalization N must be positive");
    const int deg = p.degree();
    const mp::Precision prec = p.precision_bits;
    if (deg < 2 || step.delta_tau == cplx(0.0, 0.0)) return p;

    // the series cancels heavily for large |c|; accumulate with guard bits
    const mp::Precision work = prec + kHeatGuardBits;
    mp::Complex c(step.delta_tau, work);
    mpfr_div_ui(c.re.raw(), c.re.raw(), 2UL * static_cast<unsigned long>(step.N), MPFR_RNDN);
    mpfr_div_ui(c.im.raw(), c.im.raw(), 2UL * static_cast<unsigned long>(step.N), MPFR_RNDN);

    const int max_m = deg / 2;
    std::vector<mp::Complex> cpow;
    cpow.reserve(static_cast<std::size_t>(max_m) + 1);
    cpow.emplace_back(cplx(1.0, 0.0), work);
    for (int m = 1; m <= max_m; ++m) {
        cpow.emplace_back(work);
        mp::mul(cpow.back(), cpow[static_cast<std::size_t>(m) - 1], c);
    }

    std::vector<mp::Complex> out;
    out.reserve(p.coeffs.size());
    mp::Real weight(work);
    mp::Complex term(work);
    for (int j = 0; j <= deg; ++j) {
        out.emplace_back(work);
        auto& b = out.back();
        mp::set(b, p.coeffs[static_cast<std::size_t>(j)]);
        // weight_m = (j + 2m)! / (j! m!)
        mpfr_set_ui(weight.raw(), 1, MPFR_RNDN);
        for (int m = 1; j + 2 * m <= deg; ++m) {
            const unsigned long top = static_cast<unsigned long>(j + 2 * m);
            mpfr_mul_ui(weight.raw(), weight.raw(), top * (top - 1), MPFR_RNDN);
            mpfr_div_ui(weight.raw(), weight.raw(), static_cast<unsigned long>(m), MPFR_RNDN);
            mp::mul(term, cpow[static_cast<std::size_t>(m)], p.coeffs[top]);
            mp::mul(term, term, weight);
            mp::add(b, b, term);
        }
        b.round_to(prec);
    }
    return Poly(std::move(out), prec);
}

Poly heat_multiplicative(const Poly& p, const HeatStep& step) {
    if (step.mode != Mode::multiplicative)
        throw InvalidArgument("heat_multiplicative called with additive step");
    if (step.N < 1) throw InvalidArgument("heat step normalization N must be positive");
    const int deg = p.degree();
    if (deg > step.N) throw InvalidArgument("multiplicative heat operator needs deg p <= N");
    const mp::Precision prec = p.precision_bits;
    if (deg < 0 || step.delta_tau == cplx(0.0, 0.0)) return p;

    const mp::Complex dtau(step.delta_tau, prec);
    std::vector<mp::Complex> out;
    out.reserve(p.coeffs.size());
    mp::Complex exponent(prec), factor(prec);
    for (int k = 0; k <= deg; ++k) {
        out.emplace_back(prec);
        // -(k+1)(k-N)/(2N) = (k+1)(N-k)/(2N) >= 0
        const long num = static_cast<long>(k + 1) * static_cast<long>(step.N - k);
        mpfr_mul_si(exponent.re.raw(), dtau.re.raw(), num, MPFR_RNDN);
        mpfr_mul_si(exponent.im.raw(), dtau.im.raw(), num, MPFR_RNDN);
        mpfr_div_ui(exponent.re.raw(), exponent.re.raw(), 2UL * static_cast<unsigned long>(step.N), MPFR_RNDN);
        mpfr_div_ui(exponent.im.raw(), exponent.im.raw(), 2UL * static_cast<unsigned long>(step.N), MPFR_RNDN);
        mp::exp(factor, exponent);
        mp::mul(out.back(), p.coeffs[static_cast<std::size_t>(k)], factor);
    }
    return Poly(std::move(out), prec);
}

Poly apply_heat(const Poly& p, const HeatStep& step) {
    return step.mode == Mode::additive ? heat_additive(p, step) : heat_multiplicative(p, step);
}

Poly hermite(int N, mp::Precision prec) {
    if (N < 1) throw InvalidArgument("Hermite degree must be positive");
    return heat_additive(Poly::monomial(N, prec), HeatStep{cplx(-1.0, 0.0), N, Mode::additive});
}

mp::Complex evaluate(const Poly& p, const mp::Complex& z) {
    const mp::Precision prec = p.precision_bits;
    mp::Complex acc(prec), tmp(prec);
    mp::set(acc, p.coeffs.back());
    for (std::size_t k = p.coeffs.size() - 1; k-- > 0;) {
        mp::mul(tmp, acc, z);
        mp::add(acc, tmp, p.coeffs[k]);
    }
    return acc;
}

mp::Complex evaluate(const Poly& p, cplx z) { return evaluate(p, mp::Complex(z, p.precision_bits)); }

Poly differentiate(const Poly& p) {
    const mp::Precision prec = p.precision_bits;
    if (p.degree() < 1) return Poly(std::vector<mp::Complex>{mp::Complex(prec)}, prec);
    std::vector<mp::Complex> out;
    out.reserve(p.coeffs.size() - 1);
    for (std::size_t k = 1; k < p.coeffs.size(); ++k) {
        out.emplace_back(prec);
        mpfr_mul_ui(out.back().re.raw(), p.coeffs[k].re.raw(), static_cast<unsigned long>(k), MPFR_RNDN);
        mpfr_mul_ui(out.back().im.raw(), p.coeffs[k].im.raw(), static_cast<unsigned long>(k), MPFR_RNDN);
    }
    return Poly(std::move(out), prec);
}

Poly add(const Poly& a, const Poly& b) {
    const mp::Precision prec = std::max(a.precision_bits, b.precision_bits);
    const std::size_t n = std::max(a.coeffs.size(), b.coeffs.size());
    std::vector<mp::Complex> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.emplace_back(prec);
        if (k < a.coeffs.size()) mp::add(out[k], out[k], a.coeffs[k]);
        if (k < b.coeffs.size()) mp::add(out[k], out[k], b.coeffs[k]);
    }
    return Poly(std::move(out), prec);
}

Poly scale(const Poly& p, cplx factor) {
    const mp::Complex f(factor, p.precision_bits);
    std::vector<mp::Complex> out;
    out.reserve(p.coeffs.size());
    for (const auto& c : p.coeffs) {
        out.emplace_back(p.precision_bits);
        mp::mul(out.back(), c, f);
    }
    return Poly(std::move(out), p.precision_bits);
}

double relative_coeff_error(const Poly& a, const Poly& b) {
    const mp::Precision prec = std::max(a.precision_bits, b.precision_bits);
    const std::size_t n = std::max(a.coeffs.size(), b.coeffs.size());
    double max_ref = -INFINITY;
    double max_diff = -INFINITY;
    mp::Complex diff(prec);
    const mp::Complex zero(prec);
    for (std::size_t k = 0; k < n; ++k) {
        const auto& ak = k < a.coeffs.size() ? a.coeffs[k] : zero;
        const auto& bk = k < b.coeffs.size() ? b.coeffs[k] : zero;
        mp::sub(diff, ak, bk);
        max_diff = std::max(max_diff, mp::log2_abs(diff));
        max_ref = std::max(max_ref, mp::log2_abs(bk));
    }
    if (std::isinf(max_diff)) return 0.0;
    if (std::isinf(max_ref)) return INFINITY;
    return std::exp2(max_diff - max_ref);
}

std::string to_text(const Poly& p) {
    std::ostringstream os;
    os << "# heatflow-poly precision_bits=" << p.precision_bits << " degree=" << p.degree() << "\n";
    for (std::size_t k = 0; k < p.coeffs.size(); ++k)
        os << k << ' ' << p.coeffs[k].re.to_hex() << ' ' << p.coeffs[k].im.to_hex() << '\n';
    return os.str();
}

Poly from_text(std::string_view text, mp::Precision fallback_prec) {
    mp::Precision prec = fallback_prec;
    std::istringstream is{std::string(text)};
    std::string line;
    std::vector<std::pair<std::size_t, std::pair<std::string, std::string>>> rows;
    std::size_t max_k = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto pos = line.find("precision_bits=");
            if (pos != std::string::npos) prec = std::stol(line.substr(pos + 15));
            continue;
        }
        std::istringstream ls(line);
        long long k = -1;
        std::string re, im;
        if (!(ls >> k >> re >> im) || k < 0) throw ParseError("bad coefficient line: '" + line + "'");
        rows.push_back({static_cast<std::size_t>(k), {re, im}});
        max_k = std::max(max_k, static_cast<std::size_t>(k));
    }
    if (rows.empty()) throw ParseError("no coefficients");
    std::vector<mp::Complex> coeffs;
    coeffs.reserve(max_k + 1);
    for (std::size_t k = 0; k <= max_k; ++k) coeffs.emplace_back(prec);
    for (auto& [k, v] : rows)
        coeffs[k] = mp::Complex(mp::Real::parse(v.first, prec), mp::Real::parse(v.second, prec));
    return Poly(std::move(coeffs), prec);
}

}  // namespace heatflow
