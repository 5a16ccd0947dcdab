// Numeric evaluation of the modular objects on the upper half-plane, plus
// point-wise residuals of every transformation law used by the construction.
//
// All sums carry explicit geometric tail bounds: a value returned for a
// precision context with `digits` certified digits has absolute tail error
// below 10^-digits (summation is cut at the guard level digits+tail_margin,
// and the working float precision sits another ~25 digits above that).
//
// The imaginary-axis evaluators are the workhorses of the eigenfunction
// integrals: phi(it) switches to the psi series at i/t below the seam t = 1
// (both routes converge fastest there), and g(t) = -t^2 E2(it) + 6t/pi is
// cross-checked against its algebraically equal form E2(i/t) whenever both
// series are cheap.

#pragma once

#include "d4eig/precision.hpp"
#include "d4eig/qseries.hpp"

#include <array>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace d4eig {

struct UpperHalfPoint {
    Real x, y;
    UpperHalfPoint(Real re, Real im) : x(std::move(re)), y(std::move(im)) {
        if (!(y > 0)) throw std::domain_error("UpperHalfPoint: Im z must be positive");
    }
    Complex z() const { return Complex(x, y); }
};

namespace detail {

// generic power helpers so the series templates below work for Real and Complex
inline Real pow_int_generic(Real z, unsigned k) {
    Real r(1);
    while (k) {
        if (k & 1u) r *= z;
        z *= z;
        k >>= 1u;
    }
    return r;
}
inline Complex pow_int_generic(const Complex& z, unsigned k) { return pow_int(z, k); }

inline const std::vector<long>& sigma1_upto(long n) {
    static std::vector<long> table{0};  // sigma1
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    if (static_cast<long>(table.size()) <= n) {
        long m = static_cast<long>(table.size()) * 2;
        while (m <= n) m *= 2;
        table.assign(static_cast<size_t>(m + 1), 0);
        for (long d = 1; d <= m; ++d)
            for (long k = d; k <= m; k += d) table[static_cast<size_t>(k)] += d;
        table[0] = 0;
    }
    return table;
}

template <typename T>
T theta2_sum(const T& u, const Real& absu, const Real& eps) {
    // 2 sum_{a>=0} u^{(2a+1)^2}; exponent gaps are 8a+8
    T p = u;            // u^{(2a+1)^2} at a=0
    T u8 = pow_int_generic(u, 8);
    T step = u8;        // u^{8a+8} at a=0
    T acc = p;
    Real absp = absu;
    Real absu8 = pow(absu, 8);
    Real absstep = absu8;
    for (long a = 0; a < 100000; ++a) {
        // tail bound: 2 |u|^{(2a+3)^2} / (1 - |u|^8)
        Real tail = 2 * absp * absstep / (1 - absu8);
        if (tail < eps) return acc * Real(2);
        p = p * step;
        absp *= absstep;
        step = step * u8;
        absstep *= absu8;
        acc += p;
    }
    throw precision_error("theta2: tail not certified (Im z too small for this precision)");
}

template <typename T>
T theta34_sum(const T& u, const Real& absu, const Real& eps, bool alternating) {
    // 1 + 2 sum_{n>=1} (+-1)^n u^{4 n^2}; exponent gaps are 8n+4
    T u4 = pow_int_generic(u, 4);
    T u8 = u4 * u4;
    T p = u4;        // u^{4n^2} at n=1
    T step = u4 * u8;  // u^{8n+4} at n=1
    T acc = T(Real(1));
    Real absu8 = pow(absu, 8);
    Real absp = pow(absu, 4);
    Real absstep = absp * absu8;
    long n = 1;
    for (; n < 100000; ++n) {
        acc += (alternating && (n % 2 != 0)) ? T(Real(0)) - p * Real(2) : p * Real(2);
        Real tail = 2 * absp * absstep / (1 - absu8);
        if (tail < eps) return acc;
        p = p * step;
        absp *= absstep;
        step = step * u8;
        absstep *= absu8;
    }
    throw precision_error("theta3/4: tail not certified (Im z too small for this precision)");
}

template <typename T>
T delta_product(const T& q, const Real& absq, const Real& eps) {
    // q prod (1-q^n)^24 with multiplicative tail bound 24 |q|^{N+1}/(1-|q|)^2
    T prod = T(Real(1));
    T qn = T(Real(1));
    Real absqn = Real(1);
    for (long n = 1; n < 4000000; ++n) {
        qn = qn * q;
        absqn *= absq;
        T f = T(Real(1)) - qn;
        prod = prod * pow_int_generic(f, 24);
        Real tail = 24 * absqn * absq / ((1 - absq) * (1 - absq));
        if (tail < eps) return q * prod;
    }
    throw precision_error("delta: tail not certified (Im z too small for this precision)");
}

template <typename T>
T eisenstein_sum(const T& q, const Real& absq, const Real& eps, int k) {
    // 1 + c sum sigma_k(n) q^n ; sigma_k(n) <= n^{k+1}, terms eventually decrease
    long c = k == 1 ? -24 : (k == 3 ? 240 : -504);
    T acc = T(Real(1));
    T qn = T(Real(1));
    Real absqn = Real(1);
    Real L = -log(absq);
    long settle = static_cast<long>((k + 1) / L.convert_to<double>()) + 2;
    long cap = 4000000;
    for (long n = 1; n < cap; ++n) {
        qn = qn * q;
        absqn *= absq;
        Integer sig = 0;
        if (k == 1) {
            sig = sigma1_upto(n)[static_cast<size_t>(n)];
        } else {
            for (long d = 1; d * d <= n; ++d)
                if (n % d == 0) {
                    Integer dk = 1, ek = 1;
                    long e = n / d;
                    for (int i = 0; i < k; ++i) dk *= d, ek *= e;
                    sig += dk;
                    if (e != d) sig += ek;
                }
        }
        acc += qn * to_real(Rational(sig * c));
        // bound the tail by (n+1)^{k+1} |q|^{n+1} / (1-|q|) once terms decrease
        if (n > settle) {
            Real bound = pow(Real(n + 1), k + 1) * absqn * absq * abs(Real(c)) / (1 - absq);
            if (bound < eps) return acc;
        }
    }
    throw precision_error("eisenstein: tail not certified (Im z too small for this precision)");
}

template <typename T>
struct ThetaSet {
    T t2, t3, t4;
};

template <typename T>
ThetaSet<T> thetas(const T& u, const Real& absu, const Real& eps) {
    return {theta2_sum(u, absu, eps), theta34_sum(u, absu, eps, false),
            theta34_sum(u, absu, eps, true)};
}

}  // namespace detail

// Value of a named series at z, with certified absolute tail error below
// 10^-digits. Evaluation is by the defining sum/product, not by the exact
// truncated series (the two are compared in tests).
inline Complex eval_form(SeriesTag id, const UpperHalfPoint& pt, const PrecisionCtx& ctx) {
    ScopedPrecision sp(ctx);
    const Real pi = const_pi();
    const Real eps = pow10(-(ctx.digits + ctx.tail_margin));
    // u = q^{1/8} = e^{i pi z / 4}
    Complex u = exp(Complex(-pi * pt.y / 4, pi * pt.x / 4));
    Real absu = exp(-pi * pt.y / 4);
    Complex q = pow_int(u, 8);
    Real absq = pow(absu, 8);

    using detail::delta_product;
    using detail::eisenstein_sum;
    using detail::thetas;

    switch (id) {
        case SeriesTag::Theta2: return detail::theta2_sum(u, absu, eps);
        case SeriesTag::Theta3: return detail::theta34_sum(u, absu, eps, false);
        case SeriesTag::Theta4: return detail::theta34_sum(u, absu, eps, true);
        case SeriesTag::Delta: return delta_product(q, absq, eps);
        case SeriesTag::DeltaEis: {
            Complex e4 = eisenstein_sum(q, absq, eps, 3);
            Complex e6 = eisenstein_sum(q, absq, eps, 5);
            return (pow_int(e4, 3) - e6 * e6) / Real(1728);
        }
        case SeriesTag::E2: return eisenstein_sum(q, absq, eps, 1);
        case SeriesTag::E4: return eisenstein_sum(q, absq, eps, 3);
        case SeriesTag::E6: return eisenstein_sum(q, absq, eps, 5);
        case SeriesTag::D4Theta: {
            auto th = thetas(u, absu, eps);
            return (pow_int(th.t3, 4) + pow_int(th.t4, 4)) / Real(2);
        }
        case SeriesTag::Phi:
        case SeriesTag::Psi:
        case SeriesTag::PhiT: {
            auto th = thetas(u, absu, eps);
            Complex d = delta_product(q, absq, eps);
            Complex a = pow_int(th.t2, 12), b = pow_int(th.t3, 12), c = pow_int(th.t4, 12);
            Complex num = id == SeriesTag::Phi ? c * (b + a)
                        : id == SeriesTag::Psi ? a * (b + c)
                                               : b * (c - a);
            return num / d;
        }
    }
    throw std::logic_error("eval_form: unreachable");
}

namespace detail {

// real-arithmetic fast paths on the imaginary axis
inline Real phi_like_at_imag(SeriesTag id, const Real& y, const PrecisionCtx& ctx) {
    const Real pi = const_pi();
    const Real eps = pow10(-(ctx.digits + ctx.tail_margin));
    Real u = exp(-pi * y / 4);
    Real q = pow_int_generic(u, 8);
    auto th = thetas(u, u, eps);
    Real d = delta_product(q, q, eps);
    Real a = pow_int_generic(th.t2, 12), b = pow_int_generic(th.t3, 12),
         c = pow_int_generic(th.t4, 12);
    Real num = id == SeriesTag::Phi ? c * (b + a)
             : id == SeriesTag::Psi ? a * (b + c)
                                    : b * (c - a);
    return num / d;
}

}  // namespace detail

// E2(i t) for t > 0, real arithmetic.
inline Real eval_e2_imag(const Real& t, const PrecisionCtx& ctx) {
    if (!(t > 0)) throw std::domain_error("eval_e2_imag: t must be positive");
    ScopedPrecision sp(ctx);
    const Real eps = pow10(-(ctx.digits + ctx.tail_margin));
    Real q = exp(-2 * const_pi() * t);
    return detail::eisenstein_sum(q, q, eps, 1);
}

// phi(i t) for t > 0. Direct series for t >= 1, psi route at i/t below the
// seam; the two agree at t = 1 by the S-transformation (tested, not assumed).
inline Real eval_phi_imag_axis(const Real& t, const PrecisionCtx& ctx) {
    if (!(t > 0)) throw std::domain_error("eval_phi_imag_axis: t must be positive");
    ScopedPrecision sp(ctx);
    if (t >= 1) return detail::phi_like_at_imag(SeriesTag::Phi, t, ctx);
    return detail::phi_like_at_imag(SeriesTag::Psi, 1 / t, ctx);
}

// psi(i y) = phi(-1/(iy)); used by the eigenfunction quadratures (y >= 1).
inline Real eval_psi_imag_axis(const Real& y, const PrecisionCtx& ctx) {
    if (!(y > 0)) throw std::domain_error("eval_psi_imag_axis: y must be positive");
    ScopedPrecision sp(ctx);
    return detail::phi_like_at_imag(SeriesTag::Psi, y, ctx);
}

// g(t) = -t^2 E2(it) + 6t/pi = E2(i/t); the b(r) integrand weight after
// rotating the contour to the imaginary axis. Where both series are cheap
// (0.1 <= t <= 10) the two forms are evaluated independently and must agree.
inline Real eval_g(const Real& t, const PrecisionCtx& ctx) {
    if (!(t > 0)) throw std::domain_error("eval_g: t must be positive");
    ScopedPrecision sp(ctx);
    const Real pi = const_pi();
    std::optional<Real> direct, dual;
    if (t >= Real(0.1)) direct = -t * t * eval_e2_imag(t, ctx) + 6 * t / pi;
    if (t <= Real(10)) dual = eval_e2_imag(1 / t, ctx);
    if (direct && dual) {
        Real mismatch = abs(*direct - *dual);
        Real tol = pow10(-(ctx.digits / 2)) * (1 + abs(*dual));
        if (mismatch > tol)
            throw precision_error("eval_g: E2 transformation cross-check failed");
    }
    return dual ? *dual : *direct;
}

// ---- transformation-law residuals ------------------------------------------

enum class TransformLaw {
    ThetaS2,
    ThetaS3,
    ThetaS4,
    ThetaT2,
    ThetaT3,
    ThetaT4,
    E2S,
    FuncEq1,
    FuncEq2,
    QuasiMod5,
    Gamma2Inv,
    Period2,
};

inline const char* to_string(TransformLaw law) {
    switch (law) {
        case TransformLaw::ThetaS2: return "theta_s2";
        case TransformLaw::ThetaS3: return "theta_s3";
        case TransformLaw::ThetaS4: return "theta_s4";
        case TransformLaw::ThetaT2: return "theta_t2";
        case TransformLaw::ThetaT3: return "theta_t3";
        case TransformLaw::ThetaT4: return "theta_t4";
        case TransformLaw::E2S: return "e2_s";
        case TransformLaw::FuncEq1: return "funceq1";
        case TransformLaw::FuncEq2: return "funceq2";
        case TransformLaw::QuasiMod5: return "quasimod5";
        case TransformLaw::Gamma2Inv: return "gamma2_inv";
        case TransformLaw::Period2: return "period2";
    }
    return "?";
}

inline constexpr std::array<TransformLaw, 12> kAllTransformLaws = {
    TransformLaw::ThetaS2,  TransformLaw::ThetaS3,  TransformLaw::ThetaS4,
    TransformLaw::ThetaT2,  TransformLaw::ThetaT3,  TransformLaw::ThetaT4,
    TransformLaw::E2S,      TransformLaw::FuncEq1,  TransformLaw::FuncEq2,
    TransformLaw::QuasiMod5, TransformLaw::Gamma2Inv, TransformLaw::Period2,
};

struct ResidualReport {
    std::string law;
    Real x, y;             // the sample point z = x + iy
    Real residual_abs;
    Real tolerance;
    bool pass() const { return residual_abs <= tolerance; }
};

namespace detail {

inline UpperHalfPoint neg_inv(const UpperHalfPoint& p) {
    Real d = p.x * p.x + p.y * p.y;
    return UpperHalfPoint(-p.x / d, p.y / d);
}

inline UpperHalfPoint shift(const UpperHalfPoint& p, int k) {
    return UpperHalfPoint(p.x + k, p.y);
}

}  // namespace detail

// |LHS - RHS| of one law at z. For d = 4 the factor i^{-d/2} z^{d/2-2} in the
// phi functional equations is exactly -1; (-iz)^{1/2} is the principal branch
// (Re(-iz) = Im z > 0 on the domain).
inline ResidualReport transform_residual(TransformLaw law, const UpperHalfPoint& z,
                                         const PrecisionCtx& ctx) {
    ScopedPrecision sp(ctx);
    const Real pi = const_pi();
    auto F = [&](SeriesTag t, const UpperHalfPoint& p) { return eval_form(t, p, ctx); };
    const UpperHalfPoint zS = detail::neg_inv(z);
    Complex r;
    switch (law) {
        case TransformLaw::ThetaS2:
        case TransformLaw::ThetaS3:
        case TransformLaw::ThetaS4: {
            Complex root = sqrt_principal(Complex(z.y, -z.x));  // (-iz)^{1/2}
            SeriesTag lhs = law == TransformLaw::ThetaS2   ? SeriesTag::Theta2
                            : law == TransformLaw::ThetaS3 ? SeriesTag::Theta3
                                                           : SeriesTag::Theta4;
            SeriesTag rhs = law == TransformLaw::ThetaS2   ? SeriesTag::Theta4
                            : law == TransformLaw::ThetaS3 ? SeriesTag::Theta3
                                                           : SeriesTag::Theta2;
            r = F(lhs, zS) - root * F(rhs, z);
            break;
        }
        case TransformLaw::ThetaT2: {
            Real s = sqrt(Real(2)) / 2;
            Complex phase(s, s);  // e^{i pi/4}
            r = F(SeriesTag::Theta2, detail::shift(z, 1)) - phase * F(SeriesTag::Theta2, z);
            break;
        }
        case TransformLaw::ThetaT3:
            r = F(SeriesTag::Theta3, detail::shift(z, 1)) - F(SeriesTag::Theta4, z);
            break;
        case TransformLaw::ThetaT4:
            r = F(SeriesTag::Theta4, detail::shift(z, 1)) - F(SeriesTag::Theta3, z);
            break;
        case TransformLaw::E2S: {
            Complex zz = z.z();
            r = F(SeriesTag::E2, zS) -
                (zz * zz * F(SeriesTag::E2, z) + Complex(z.y * 6 / pi, -z.x * 6 / pi));
            break;
        }
        case TransformLaw::FuncEq1:
            r = F(SeriesTag::Phi, detail::shift(z, 1)) - F(SeriesTag::Phi, z) +
                F(SeriesTag::Phi, zS);
            break;
        case TransformLaw::FuncEq2:
            r = F(SeriesTag::Phi, detail::shift(z, 1)) + F(SeriesTag::Phi, detail::shift(zS, 1));
            break;
        case TransformLaw::QuasiMod5:
            r = F(SeriesTag::E2, detail::neg_inv(detail::shift(z, -1))) +
                F(SeriesTag::E2, detail::neg_inv(detail::shift(z, 1))) -
                Real(2) * F(SeriesTag::E2, zS) - Real(2) * F(SeriesTag::E2, z);
            break;
        case TransformLaw::Gamma2Inv: {
            // w = z / (2z + 1)
            Complex zz = z.z();
            Complex w = zz / (zz * Real(2) + Complex(Real(1), Real(0)));
            if (!(w.im > 0)) throw std::domain_error("gamma2_inv: transformed point left H");
            r = F(SeriesTag::Phi, UpperHalfPoint(w.re, w.im)) - F(SeriesTag::Phi, z);
            break;
        }
        case TransformLaw::Period2:
            r = F(SeriesTag::Phi, detail::shift(z, 2)) - F(SeriesTag::Phi, z);
            break;
    }
    return ResidualReport{to_string(law), z.x, z.y, abs(r), pow10(-(ctx.digits / 2))};
}

}  // namespace d4eig
