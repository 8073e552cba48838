#pragma once

// Extended-precision real and complex scalars over MPFR.
//
// The hot loops (Horner evaluation, heat recurrences, root iteration) use the
// in-place free functions below; the operator overloads allocate and are meant
// for setup code and tests.

#include <mpfr.h>

#include <complex>
#include <string>
#include <string_view>

namespace heatflow::mp {

using Precision = mpfr_prec_t;

class Real {
public:
    explicit Real(Precision prec = 256);
    Real(double value, Precision prec);
    Real(const Real& other);
    Real(Real&& other) noexcept;
    Real& operator=(const Real& other);
    Real& operator=(Real&& other) noexcept;
    ~Real();

    mpfr_ptr raw() { return value_; }
    mpfr_srcptr raw() const { return value_; }

    Precision precision() const { return mpfr_get_prec(value_); }
    /// Changes precision, rounding the current value.
    void round_to(Precision prec);

    Real& operator=(double v);
    double to_double() const { return mpfr_get_d(value_, MPFR_RNDN); }
    long double to_long_double() const { return mpfr_get_ld(value_, MPFR_RNDN); }
    bool is_zero() const { return mpfr_zero_p(value_) != 0; }
    bool is_finite() const { return mpfr_number_p(value_) != 0; }

    /// Exact hexadecimal rendering, e.g. "-0x1.8p+3".
    std::string to_hex() const;
    static Real parse(std::string_view text, Precision prec);

    void swap(Real& other) noexcept { mpfr_swap(value_, other.value_); }

private:
    mpfr_t value_;
};

struct Complex {
    Real re;
    Real im;

    explicit Complex(Precision prec = 256) : re(prec), im(prec) {}
    Complex(std::complex<double> v, Precision prec) : re(v.real(), prec), im(v.imag(), prec) {}
    Complex(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}

    Precision precision() const { return re.precision(); }
    void round_to(Precision prec) {
        re.round_to(prec);
        im.round_to(prec);
    }

    Complex& operator=(std::complex<double> v);
    std::complex<double> to_cplx() const { return {re.to_double(), im.to_double()}; }
    bool is_zero() const { return re.is_zero() && im.is_zero(); }
    bool is_finite() const { return re.is_finite() && im.is_finite(); }
    void swap(Complex& other) noexcept {
        re.swap(other.re);
        im.swap(other.im);
    }
};

// ---- in-place kernels -------------------------------------------------------
// `out` may alias an input except where stated.

void set(Complex& out, const Complex& a);
void add(Complex& out, const Complex& a, const Complex& b);
void sub(Complex& out, const Complex& a, const Complex& b);
void neg(Complex& out, const Complex& a);
/// out = a*b; `out` must not alias a or b.
void mul(Complex& out, const Complex& a, const Complex& b);
void mul(Complex& out, const Complex& a, const Real& b);
void mul_d(Complex& out, const Complex& a, double b);
/// out = a/b; `out` must not alias a or b. `scratch` receives |b|^2.
void div(Complex& out, const Complex& a, const Complex& b, Real& scratch);
/// out = exp(a); `out` must not alias a.
void exp(Complex& out, const Complex& a);
/// |a|^2 into out.
void norm(Real& out, const Complex& a);

/// log2 |a| as a double; -inf for zero. Safe far outside double range.
double log2_abs(const Complex& a);
/// |a| as long double (range to ~1e4900).
long double abs_ld(const Complex& a);

// ---- allocating convenience -------------------------------------------------

Complex operator+(const Complex& a, const Complex& b);
Complex operator-(const Complex& a, const Complex& b);
Complex operator*(const Complex& a, const Complex& b);
Complex operator/(const Complex& a, const Complex& b);

}  // namespace heatflow::mp
