#include "heatflow/mp.hpp"

#include "heatflow/errors.hpp"

#include <cmath>
#include <limits>

namespace heatflow::mp {

Real::Real(Precision prec) {
    mpfr_init2(value_, prec);
    mpfr_set_zero(value_, 1);
}

Real::Real(double value, Precision prec) {
    mpfr_init2(value_, prec);
    mpfr_set_d(value_, value, MPFR_RNDN);
}

Real::Real(const Real& other) {
    mpfr_init2(value_, other.precision());
    mpfr_set(value_, other.value_, MPFR_RNDN);
}

Real::Real(Real&& other) noexcept {
    mpfr_init2(value_, MPFR_PREC_MIN);
    mpfr_swap(value_, other.value_);
}

Real& Real::operator=(const Real& other) {
    if (this != &other) {
        if (precision() != other.precision()) mpfr_set_prec(value_, other.precision());
        mpfr_set(value_, other.value_, MPFR_RNDN);
    }
    return *this;
}

Real& Real::operator=(Real&& other) noexcept {
    mpfr_swap(value_, other.value_);
    return *this;
}

Real::~Real() { mpfr_clear(value_); }

void Real::round_to(Precision prec) {
    if (prec != precision()) mpfr_prec_round(value_, prec, MPFR_RNDN);
}

Real& Real::operator=(double v) {
    mpfr_set_d(value_, v, MPFR_RNDN);
    return *this;
}

std::string Real::to_hex() const {
    char* buf = nullptr;
    if (mpfr_asprintf(&buf, "%Ra", value_) < 0) throw Error("mpfr_asprintf failed");
    std::string out(buf);
    mpfr_free_str(buf);
    return out;
}

Real Real::parse(std::string_view text, Precision prec) {
    Real r(prec);
    std::string s(text);
    char* end = nullptr;
    mpfr_strtofr(r.value_, s.c_str(), &end, 0, MPFR_RNDN);
    if (end == s.c_str() || *end != '\0') throw ParseError("not a number: '" + s + "'");
    return r;
}

Complex& Complex::operator=(std::complex<double> v) {
    re = v.real();
    im = v.imag();
    return *this;
}

void set(Complex& out, const Complex& a) {
    mpfr_set(out.re.raw(), a.re.raw(), MPFR_RNDN);
    mpfr_set(out.im.raw(), a.im.raw(), MPFR_RNDN);
}

void add(Complex& out, const Complex& a, const Complex& b) {
    mpfr_add(out.re.raw(), a.re.raw(), b.re.raw(), MPFR_RNDN);
    mpfr_add(out.im.raw(), a.im.raw(), b.im.raw(), MPFR_RNDN);
}

void sub(Complex& out, const Complex& a, const Complex& b) {
    mpfr_sub(out.re.raw(), a.re.raw(), b.re.raw(), MPFR_RNDN);
    mpfr_sub(out.im.raw(), a.im.raw(), b.im.raw(), MPFR_RNDN);
}

void neg(Complex& out, const Complex& a) {
    mpfr_neg(out.re.raw(), a.re.raw(), MPFR_RNDN);
    mpfr_neg(out.im.raw(), a.im.raw(), MPFR_RNDN);
}

void mul(Complex& out, const Complex& a, const Complex& b) {
    mpfr_fmms(out.re.raw(), a.re.raw(), b.re.raw(), a.im.raw(), b.im.raw(), MPFR_RNDN);
    mpfr_fmma(out.im.raw(), a.re.raw(), b.im.raw(), a.im.raw(), b.re.raw(), MPFR_RNDN);
}

void mul(Complex& out, const Complex& a, const Real& b) {
    mpfr_mul(out.re.raw(), a.re.raw(), b.raw(), MPFR_RNDN);
    mpfr_mul(out.im.raw(), a.im.raw(), b.raw(), MPFR_RNDN);
}

void mul_d(Complex& out, const Complex& a, double b) {
    mpfr_mul_d(out.re.raw(), a.re.raw(), b, MPFR_RNDN);
    mpfr_mul_d(out.im.raw(), a.im.raw(), b, MPFR_RNDN);
}

void div(Complex& out, const Complex& a, const Complex& b, Real& scratch) {
    mpfr_fmma(scratch.raw(), b.re.raw(), b.re.raw(), b.im.raw(), b.im.raw(), MPFR_RNDN);
    mpfr_fmma(out.re.raw(), a.re.raw(), b.re.raw(), a.im.raw(), b.im.raw(), MPFR_RNDN);
    mpfr_fmms(out.im.raw(), a.im.raw(), b.re.raw(), a.re.raw(), b.im.raw(), MPFR_RNDN);
    mpfr_div(out.re.raw(), out.re.raw(), scratch.raw(), MPFR_RNDN);
    mpfr_div(out.im.raw(), out.im.raw(), scratch.raw(), MPFR_RNDN);
}

void exp(Complex& out, const Complex& a) {
    Real mag(out.precision());
    mpfr_exp(mag.raw(), a.re.raw(), MPFR_RNDN);
    mpfr_sin_cos(out.im.raw(), out.re.raw(), a.im.raw(), MPFR_RNDN);
    mpfr_mul(out.re.raw(), out.re.raw(), mag.raw(), MPFR_RNDN);
    mpfr_mul(out.im.raw(), out.im.raw(), mag.raw(), MPFR_RNDN);
}

void norm(Real& out, const Complex& a) {
    mpfr_fmma(out.raw(), a.re.raw(), a.re.raw(), a.im.raw(), a.im.raw(), MPFR_RNDN);
}

double log2_abs(const Complex& a) {
    if (a.is_zero()) return -std::numeric_limits<double>::infinity();
    long er = 0, ei = 0;
    const double mr = mpfr_zero_p(a.re.raw()) ? 0.0 : mpfr_get_d_2exp(&er, a.re.raw(), MPFR_RNDN);
    const double mi = mpfr_zero_p(a.im.raw()) ? 0.0 : mpfr_get_d_2exp(&ei, a.im.raw(), MPFR_RNDN);
    const long e = std::max(mr == 0.0 ? ei : er, mi == 0.0 ? er : ei);
    const double r = std::ldexp(mr, static_cast<int>(er - e));
    const double i = std::ldexp(mi, static_cast<int>(ei - e));
    return static_cast<double>(e) + std::log2(std::hypot(r, i));
}

long double abs_ld(const Complex& a) {
    return std::hypot(a.re.to_long_double(), a.im.to_long_double());
}

Complex operator+(const Complex& a, const Complex& b) {
    Complex out(a.precision());
    add(out, a, b);
    return out;
}

Complex operator-(const Complex& a, const Complex& b) {
    Complex out(a.precision());
    sub(out, a, b);
    return out;
}

Complex operator*(const Complex& a, const Complex& b) {
    Complex out(a.precision());
    mul(out, a, b);
    return out;
}

Complex operator/(const Complex& a, const Complex& b) {
    Complex out(a.precision());
    Real scratch(a.precision());
    div(out, a, b, scratch);
    return out;
}

}  // namespace heatflow::mp
