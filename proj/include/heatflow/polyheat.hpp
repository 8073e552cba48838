#pragma once

// Extended-precision polynomials and the two heat-type operators
//
//   additive:        exp{ dtau/(2N) d^2/dz^2 }                       (terminating series)
//   multiplicative:  exp{ -dtau/(2N) (z^2 d^2/dz^2 - (N-2) z d/dz - N) } (diagonal on z^k)

#include "heatflow/mp.hpp"
#include "heatflow/types.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace heatflow {

/// Dense polynomial, coefficient of z^k at index k. The leading stored
/// coefficient is nonzero unless the polynomial is identically zero, in which
/// case a single zero coefficient is kept and degree() is -1.
struct Poly {
    std::vector<mp::Complex> coeffs;
    mp::Precision precision_bits = 256;

    Poly() = default;
    Poly(std::vector<mp::Complex> c, mp::Precision prec);

    static Poly monomial(int degree, mp::Precision prec);
    static Poly from_coefficients(std::span<const cplx> c, mp::Precision prec);

    int degree() const;
    bool is_zero() const { return degree() < 0; }
    const mp::Complex& leading() const { return coeffs.back(); }
    const mp::Complex& operator[](std::size_t k) const { return coeffs[k]; }

    std::vector<cplx> coeffs_double() const;

    /// Drops vanishing leading coefficients.
    void normalize();
};

/// max(256, 2N + 128) bits.
mp::Precision default_precision(int N);

struct HeatStep {
    cplx delta_tau{};
    int N = 1;  ///< normalization in the 1/(2N) prefactor
    Mode mode = Mode::additive;
};

/// Monic polynomial with the given zeros, expanded by balanced pairwise products.
Poly from_roots(std::span<const cplx> roots, mp::Precision prec);
Poly from_roots(std::span<const mp::Complex> roots, mp::Precision prec);
inline Poly from_roots(const PointSet& roots, mp::Precision prec) {
    return from_roots(roots.view(), prec);
}

/// Sum_m c^m/m! p^{(2m)}, c = delta_tau/(2N), by exact coefficient recurrence.
Poly heat_additive(const Poly& p, const HeatStep& step);

/// a_k <- a_k exp{-delta_tau (k+1)(k-N)/(2N)}; requires deg p <= N.
Poly heat_multiplicative(const Poly& p, const HeatStep& step);

/// Dispatches on step.mode.
Poly apply_heat(const Poly& p, const HeatStep& step);

/// H_N = exp{-1/(2N) d^2/dz^2} z^N.
Poly hermite(int N, mp::Precision prec);

mp::Complex evaluate(const Poly& p, const mp::Complex& z);
mp::Complex evaluate(const Poly& p, cplx z);

Poly differentiate(const Poly& p);

Poly add(const Poly& a, const Poly& b);
Poly scale(const Poly& p, cplx factor);

/// max_k |a_k - b_k| / max_k |b_k|.
double relative_coeff_error(const Poly& a, const Poly& b);

/// One coefficient per line, "k re_hex im_hex", preceded by a '#' header
/// carrying the precision. Round trip is bit-exact.
std::string to_text(const Poly& p);
Poly from_text(std::string_view text, mp::Precision fallback_prec = 256);

}  // namespace heatflow
