// Arbitrary-precision scalar types and the precision context used across the
// library.
//
// Real        - MPFR-backed float whose precision is set at runtime.
// Rational    - exact GMP rational (used by the q-series layer).
// Integer     - exact GMP integer.
// Complex     - minimal complex-over-Real value type (std::complex is only
//               specified for builtin floats, so we carry our own).
//
// PrecisionCtx carries the requested significant digits plus guard digits.
// Entry points install a ScopedPrecision so that temporaries created inside
// pick up a working precision comfortably above the certified target.

#pragma once

#include <boost/multiprecision/mpfr.hpp>
#include <boost/multiprecision/gmp.hpp>

#include <mpfr.h>

#include <stdexcept>
#include <string>
#include <utility>

namespace d4eig {

namespace mp = boost::multiprecision;

using Real = mp::number<mp::mpfr_float_backend<0>, mp::et_off>;
using Rational = mp::number<mp::gmp_rational, mp::et_off>;
using Integer = mp::number<mp::gmp_int, mp::et_off>;

// Thrown when a requested tolerance cannot be certified (refinement limit,
// tail bound too large, ...).
struct precision_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PrecisionCtx {
    int digits = 64;       // certified significant decimal digits
    int tail_margin = 10;  // extra guard digits for tails and roundoff

    void validate() const {
        if (digits < 30)
            throw std::invalid_argument("PrecisionCtx: digits must be >= 30");
        if (tail_margin < 0)
            throw std::invalid_argument("PrecisionCtx: tail_margin must be >= 0");
    }
    int work_digits() const { return digits + tail_margin; }
};

// Sets the MPFR default precision for the lifetime of the object. The extra
// 25 digits absorb magnitude loss (values like e^{2 pi t} at t ~ 10) and
// accumulated rounding inside long sums.
class ScopedPrecision {
  public:
    explicit ScopedPrecision(const PrecisionCtx& ctx) : old_(Real::default_precision()) {
        ctx.validate();
        Real::default_precision(static_cast<unsigned>(ctx.work_digits() + 25));
    }
    explicit ScopedPrecision(unsigned digits10) : old_(Real::default_precision()) {
        Real::default_precision(digits10);
    }
    ~ScopedPrecision() { Real::default_precision(old_); }
    ScopedPrecision(const ScopedPrecision&) = delete;
    ScopedPrecision& operator=(const ScopedPrecision&) = delete;

  private:
    unsigned old_;
};

// pi at the current working precision (mpfr's cached ternary constant).
inline Real const_pi() {
    Real r;
    mpfr_const_pi(r.backend().data(), MPFR_RNDN);
    return r;
}

inline Real pow10(int e) {
    Real r(10);
    return pow(r, e);
}

inline Real to_real(const Rational& q) {
    return Real(numerator(q)) / Real(denominator(q));
}

// (1 - cos x) computed without cancellation for small |x|.
inline Real one_minus_cos(const Real& x) {
    if (abs(x) > Real(0.5)) return 1 - cos(x);
    Real h = sin(x / 2);
    return 2 * h * h;
}

// (e^x - 1)/x, continuous through x = 0.
inline Real expm1_over(const Real& x) {
    if (x == 0) return Real(1);
    return expm1(x) / x;
}

struct Complex {
    Real re, im;

    Complex() : re(0), im(0) {}
    Complex(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}
    explicit Complex(Real r) : re(std::move(r)), im(0) {}
    explicit Complex(int r) : re(r), im(0) {}

    Complex operator-() const { return {-re, -im}; }
    Complex operator+(const Complex& o) const { return {re + o.re, im + o.im}; }
    Complex operator-(const Complex& o) const { return {re - o.re, im - o.im}; }
    Complex operator*(const Complex& o) const {
        return {re * o.re - im * o.im, re * o.im + im * o.re};
    }
    Complex operator*(const Real& s) const { return {re * s, im * s}; }
    Complex operator/(const Real& s) const { return {re / s, im / s}; }
    Complex operator/(const Complex& o) const {
        Real d = o.re * o.re + o.im * o.im;
        return {(re * o.re + im * o.im) / d, (im * o.re - re * o.im) / d};
    }
    Complex& operator+=(const Complex& o) {
        re += o.re;
        im += o.im;
        return *this;
    }
    Complex& operator-=(const Complex& o) {
        re -= o.re;
        im -= o.im;
        return *this;
    }
    Complex& operator*=(const Complex& o) { return *this = *this * o; }

    bool operator==(const Complex& o) const { return re == o.re && im == o.im; }
};

inline Complex operator*(const Real& s, const Complex& z) { return z * s; }

inline Real abs(const Complex& z) { return hypot(z.re, z.im); }

inline Complex exp(const Complex& z) {
    Real m = exp(z.re);
    return {m * cos(z.im), m * sin(z.im)};
}

// Principal branch; safe whenever z is not on the negative real axis. The
// library only takes square roots of -i*z with Im z > 0, where Re(-i*z) > 0.
inline Complex sqrt_principal(const Complex& z) {
    Real m = abs(z);
    if (m == 0) return Complex(Real(0), Real(0));
    Real u = sqrt((m + z.re) / 2);
    if (u == 0) {  // purely imaginary result, z on negative real axis
        return Complex(Real(0), sqrt(m));
    }
    return Complex(u, z.im / (2 * u));
}

inline Complex pow_int(Complex z, unsigned k) {
    Complex r(Real(1), Real(0));
    while (k) {
        if (k & 1u) r *= z;
        z *= z;
        k >>= 1u;
    }
    return r;
}

}  // namespace d4eig
