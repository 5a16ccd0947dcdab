// The two four-dimensional Fourier eigenfunctions.
//
// f_plus (eigenvalue +1) comes from the weakly holomorphic form phi:
//
//   f_plus(r) = 4 sin^2(pi r^2/2) [ 1/(pi(r^2-2)) - 24/(pi r^2) + I(r) ],
//   I(r) = int_0^inf (phi(it) - e^{2 pi t} + 24) e^{-pi r^2 t} dt,
//
// valid for every r >= 0; the pole factors are cancelled analytically by the
// double zeros of the sine-squared prefactor, never by dividing near-zero
// values. The unregularized route a_direct (r^2 > 2 only) integrates
// phi(it) e^{-pi r^2 t} itself and serves as the cross-validation route.
//
// f_minus (eigenvalue -1) is i*b with phi = E2; on the imaginary axis the
// integrand weight is g(t) = -t^2 E2(it) + 6t/pi and
//
//   f_minus(r) = 4 sin^2(pi r^2/2) [ -2/(pi^3 r^6) + 6/(pi^3 r^4)
//                + 48/pi^3 * sum_{n>=1} sigma_1(n)/(2n + r^2)^3 ].
//
// The sigma_1 sum converges only algebraically, far too slowly to truncate
// at 60+ digits, so the closed-series route resums it exactly through the
// divisor swap sum_n sigma_1(n) x_n = sum_d sum_m d x_{dm}:
//
//   sum_n sigma_1(n)/(2n+r^2)^3 = (1/8) sum_d d^{-2} zeta(3, 1 + r^2/(2d)),
//
// with the d-tail expanded in zeta values. The quadrature route integrates
// g(t) e^{-pi r^2 t} adaptively and finishes the range [T, inf) in closed
// form; the two routes share nothing past sigma_1 itself.
//
// All results carry err fields combining series tails, quadrature estimates
// and a rounding allowance; see the route-agreement and error-honesty tests.

#pragma once

#include "d4eig/modular_eval.hpp"
#include "d4eig/precision.hpp"
#include "d4eig/qseries.hpp"
#include "d4eig/quadrature.hpp"
#include "d4eig/zeta.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

namespace d4eig {

enum class EigenfunctionId { PlusD4, MinusD4 };

inline int eigenvalue(EigenfunctionId id) { return id == EigenfunctionId::PlusD4 ? 1 : -1; }

inline const char* to_string(EigenfunctionId id) {
    return id == EigenfunctionId::PlusD4 ? "plus" : "minus";
}

enum class EvalRoute { Regularized, Direct, ClosedSeries, Quadrature };

inline const char* to_string(EvalRoute r) {
    switch (r) {
        case EvalRoute::Regularized: return "regularized";
        case EvalRoute::Direct: return "direct";
        case EvalRoute::ClosedSeries: return "closed_series";
        case EvalRoute::Quadrature: return "quadrature";
    }
    return "?";
}

struct EigenEval {
    Real r;
    Real value;
    Real err;
    EvalRoute route;
};

// (1 - cos x)/x, continuous through 0. Outside the window this is the
// cancellation-free 2 sin^2(x/2)/x; inside |x| < pi/1000 the explicit series
// is used (the two branches agree to well over 30 digits on the overlap,
// which is tested).
inline Real ratio_omc(const Real& x) {
    if (x == 0) return Real(0);
    if (abs(x) < const_pi() / 1000) {
        Real x2 = x * x;
        Real term = x / 2;  // k = 1 term x/2!
        Real acc = term;
        const Real eps = pow10(-static_cast<int>(Real::default_precision()) - 4);
        for (long k = 1; k < 200; ++k) {
            term *= -x2 / Real((2 * k + 1) * (2 * k + 2));
            acc += term;
            if (abs(term) < eps * (abs(acc) + 1)) break;
        }
        return acc;
    }
    Real h = sin(x / 2);
    return 2 * h * h / x;
}

namespace detail {

// Laplace-term tables for phi and psi at the working precision, plus the
// growth-headroom constant for tail bounds: |c_m| <= tail_B e^{pi m/2} holds
// over the computed range with wide margin (phi's coefficients only grow
// like e^{2 pi sqrt(2m)}), and the bound is extended beyond it geometrically.
struct PhiTables {
    std::vector<std::pair<long, Real>> phi;  // rates m >= 1 only (regularized part)
    std::vector<std::pair<long, Real>> psi;  // odd rates
    long m_max = 0;
    Real tail_B{0};
    Real psi_env{0};  // sum_k |psi_k| e^{-pi(k-1)}; phi(it) <= psi_env e^{-pi/t} on (0,1]
};

inline const PhiTables& phi_tables(const PrecisionCtx& ctx) {
    static std::map<std::pair<int, int>, std::shared_ptr<PhiTables>> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(ctx.digits, ctx.tail_margin);
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;

    ScopedPrecision sp(ctx);
    long m_need = static_cast<long>(0.74 * ctx.work_digits()) + 24;
    long order = std::max<long>(400, 4 * m_need + 16);
    const auto& phi_s = build_series_cached(SeriesTag::Phi, order);
    const auto& psi_s = build_series_cached(SeriesTag::Psi, order);

    auto tables = std::make_shared<PhiTables>();
    const Real pi = const_pi();
    Real e_half_neg = exp(-pi / 2);
    Real B(0);
    for (auto& [rate, w] : phi_s.laplace_terms()) {
        long m = static_cast<long>(numerator(rate).convert_to<long>());
        if (m < 1) continue;
        Real wr = to_real(w);
        tables->phi.emplace_back(m, wr);
        B = std::max(B, abs(wr) * pow(e_half_neg, static_cast<int>(m)));
        tables->m_max = std::max(tables->m_max, m);
    }
    tables->tail_B = B * 10;  // headroom; growth is subexponential, checked in tests
    Real env(0), e_neg = exp(-pi);
    for (auto& [rate, w] : psi_s.laplace_terms()) {
        long k = static_cast<long>(numerator(rate).convert_to<long>());
        Real wr = to_real(w);
        tables->psi.emplace_back(k, wr);
        env += abs(wr) * pow(e_neg, static_cast<int>(k - 1));
    }
    // psi tail is dominated by tail_B e^{pi k/2} too; add its geometric rest
    env += tables->tail_B * pow(e_neg, static_cast<int>(tables->m_max / 2)) / (1 - e_half_neg);
    tables->psi_env = env;
    cache.emplace(key, tables);
    return *tables;
}

// psi(i s) by termwise summation, s >= 1; absolute error below eps.
inline Real psi_axis_sum(const PhiTables& T, const Real& s, const Real& eps) {
    const Real pi = const_pi();
    Real x = exp(-pi * s);
    Real acc(0);
    Real xpow;  // x^k tracked incrementally over the sparse odd rates
    long last_k = 0;
    xpow = 1;
    for (auto& [k, w] : T.psi) {
        for (long j = last_k; j < k; ++j) xpow *= x;
        last_k = k;
        Real term = w * xpow;
        acc += term;
        if (abs(term) < eps / 4 && k > 2) return acc;  // terms decay by e^{-2 pi s} per step
    }
    return acc;  // table exhausted; remaining tail is below eps by table sizing
}

// Termwise integral over [1, inf): sum_m w_m e^{-pi(m+rho)} / (pi(m+rho)),
// restricted to rates m >= m_lo, plus the geometric tail bound.
inline QuadResult laplace_tail_sum(const PhiTables& T, const Real& rho, long m_lo) {
    const Real pi = const_pi();
    Real e_neg = exp(-pi);
    Real acc(0);
    Real factor = exp(-pi * rho);  // e^{-pi rho}
    Real xpow(1);                  // e^{-pi m}, built incrementally
    long last_m = 0;
    for (auto& [m, w] : T.phi) {
        for (long j = last_m; j < m; ++j) xpow *= e_neg;
        last_m = m;
        if (m < m_lo) continue;
        acc += w * xpow / (m + rho);
    }
    acc *= factor / pi;
    // tail over m > m_max with |c_m| <= tail_B e^{pi m/2}
    Real e_half = exp(-pi / 2);
    Real tail = T.tail_B * factor * pow(e_half, static_cast<int>(T.m_max + 1)) /
                (pi * (T.m_max + 1 + rho) * (1 - e_half));
    return {acc, tail};
}

}  // namespace detail

inline std::vector<Real> forced_zeros(int kmax) {
    if (kmax < 1) throw std::invalid_argument("forced_zeros: kmax must be >= 1");
    std::vector<Real> out;
    out.reserve(static_cast<size_t>(kmax));
    for (int k = 1; k <= kmax; ++k) out.push_back(sqrt(Real(2 * k)));
    return out;
}

// +1 eigenfunction, regularized route, every r >= 0.
inline EigenEval f_plus(const Real& r, const PrecisionCtx& ctx) {
    if (!(r >= 0)) throw std::domain_error("f_plus: r must be >= 0");
    ScopedPrecision sp(ctx);
    if (r == 0) return {Real(0), Real(0), Real(0), EvalRoute::Regularized};

    const Real pi = const_pi();
    const auto& T = detail::phi_tables(ctx);
    const Real rho = r * r;
    const Real s2 = [&] {
        Real h = sin(pi * rho / 2);
        return h * h;
    }();
    const Real eps = pow10(-(ctx.digits + ctx.tail_margin));

    // pole factors, cancelled analytically against the sin^2 prefactor
    Real pole_terms = 2 * ratio_omc(pi * (rho - 2)) - 48 * ratio_omc(pi * rho);

    // [1, inf): termwise from the Laplace data (rates -2 and 0 removed)
    QuadResult i1 = detail::laplace_tail_sum(T, rho, 1);

    // (0, 1): psi-route quadrature after t = 1/s, plus the elementary part
    Real S = (log(T.psi_env + 2) + (ctx.work_digits() + 4) * log(Real(10))) / pi + 2;
    auto integrand = [&](const Real& s) {
        Real v = detail::psi_axis_sum(T, s, eps);
        return QuadResult{v * exp(-pi * rho / s) / (s * s), eps / 2};
    };
    QuadResult q = integrate_adaptive(integrand, Real(1), S, eps * 100);
    q.err += T.psi_env * exp(-pi * S) / pi;  // truncated [S, inf) remainder
    Real elementary = -expm1_over(pi * (2 - rho)) + 24 * expm1_over(-pi * rho);

    Real I = i1.value + q.value + elementary;
    Real value = pole_terms + 4 * s2 * I;
    Real err = 4 * s2 * (i1.err + q.err) + (abs(value) + 1) * pow10(-(ctx.work_digits() + 12));
    return {r, value, err, EvalRoute::Regularized};
}

// Unregularized +1 route; requires r^2 > 2 + 1e-6 (the e^{-pi(r^2-2)t} term
// integrates too slowly to certify closer to the pole).
inline EigenEval a_direct(const Real& r, const PrecisionCtx& ctx) {
    ScopedPrecision sp(ctx);
    const Real rho = r * r;
    if (!(rho > 2 + Real(1) / 1000000))
        throw std::domain_error("a_direct: requires r^2 > 2 + 1e-6");

    const Real pi = const_pi();
    const auto& T = detail::phi_tables(ctx);
    const Real eps = pow10(-(ctx.digits + ctx.tail_margin));
    Real s2 = sin(pi * rho / 2);
    s2 *= s2;

    // [1, inf) termwise including the principal rates -2 and 0
    QuadResult i1 = detail::laplace_tail_sum(T, rho, 1);
    i1.value += exp(-pi * (rho - 2)) / (pi * (rho - 2)) - 24 * exp(-pi * rho) / (pi * rho);

    // (0, 1) in the t variable: phi(it) = psi(i/t) summed termwise
    auto integrand = [&](const Real& t) {
        Real v = detail::psi_axis_sum(T, 1 / t, eps);
        return QuadResult{v * exp(-pi * rho * t), eps / 2};
    };
    QuadResult q = integrate_adaptive(integrand, Real(0), Real(1), eps * 100);

    Real value = 4 * s2 * (i1.value + q.value);
    Real err = 4 * s2 * (i1.err + q.err) + (abs(value) + 1) * pow10(-(ctx.work_digits() + 12));
    return {r, value, err, EvalRoute::Direct};
}

namespace detail {

// sum_{n>=1} sigma_1(n)/(2n+rho)^3 via the divisor swap; exact resummation
// with Hurwitz zeta heads and a zeta-value tail.
inline QuadResult sigma_pole_sum(const Real& rho) {
    const Real eps = pow10(-static_cast<int>(Real::default_precision()) + 4);
    long D = static_cast<long>(ceil(rho).convert_to<long>()) + 2;
    Real acc(0);
    for (long d = 1; d <= D; ++d)
        acc += hurwitz_zeta3(1 + rho / (2 * d)) / Real(8 * d * d);

    // tail over d > D: (1/8) sum_k C(k+2,2) (-rho/2)^k zeta(3+k) T_k,
    // T_k = sum_{d>D} d^{-(2+k)}; convergence ratio rho/(2(D+1)) < 1/2
    Real x = -rho / 2;
    Real xk(1);
    Real tail(0);
    bool ok = false;
    for (int k = 0; k < 700; ++k) {
        Real Tk;
        if (k < 8) {
            Real H(0);
            for (long d = 1; d <= D; ++d) H += pow(Real(d), -(2 + k));
            Tk = riemann_zeta(2 + k) - H;
        } else {
            // direct geometric-ish sum, no cancellation
            Tk = 0;
            for (long d = D + 1;; ++d) {
                Real t = pow(Real(d), -(2 + k));
                Tk += t;
                if (t < Tk * pow10(-static_cast<int>(Real::default_precision()) - 2)) break;
                if (d > D + 4000) break;  // only reachable for k ~ 8 and tiny D
            }
        }
        Real term = Real((k + 1) * (k + 2) / 2) * xk * riemann_zeta(3 + k) * Tk;
        tail += term;
        xk *= x;
        if (abs(term) < eps && k > 4) {
            ok = true;
            break;
        }
    }
    if (!ok) throw precision_error("sigma_pole_sum: zeta tail did not converge");
    return {acc + tail / 8, eps * Real(D + 8)};
}

}  // namespace detail

// -1 eigenfunction i*b; r > 0 (the function behaves like -2/(pi r^2) at the
// origin and is not evaluated there).
inline EigenEval f_minus(const Real& r, const PrecisionCtx& ctx,
                         EvalRoute route = EvalRoute::ClosedSeries) {
    if (!(r > 0)) throw std::domain_error("f_minus: r must be > 0");
    if (route != EvalRoute::ClosedSeries && route != EvalRoute::Quadrature)
        throw std::invalid_argument("f_minus: route must be ClosedSeries or Quadrature");
    ScopedPrecision sp(ctx);
    const Real pi = const_pi();
    const Real pi3 = pi * pi * pi;
    const Real rho = r * r;
    Real s2 = sin(pi * rho / 2);
    s2 *= s2;

    if (route == EvalRoute::ClosedSeries) {
        QuadResult S = detail::sigma_pole_sum(rho);
        Real rho3 = rho * rho * rho;
        Real bracket = -2 / (pi3 * rho3) + 6 / (pi3 * rho * rho) + 48 * S.value / pi3;
        Real value = 4 * s2 * bracket;
        Real err = 4 * s2 * 48 * S.err / pi3 + (abs(value) + 1) * pow10(-(ctx.work_digits() + 12));
        return {r, value, err, EvalRoute::ClosedSeries};
    }

    // quadrature route: adaptive over [0, T] with eval_g, closed forms beyond
    const Real a = pi * rho;
    const Real T_split(6);
    const Real eps = pow10(-(ctx.digits + ctx.tail_margin));
    auto integrand = [&](const Real& t) {
        return QuadResult{eval_g(t, ctx) * exp(-a * t), eps / 2};
    };
    Real scale = 40 + 1 / (a * a * a);  // rough magnitude of the integral
    QuadResult q = integrate_adaptive(integrand, Real(0), T_split, eps * scale);

    // [T, inf): g(t) = -t^2 + 6t/pi + 24 t^2 sum sigma_1(n) e^{-2 pi n t}
    auto upper_t2 = [&](const Real& b, const Real& T) {
        return exp(-b * T) * (T * T / b + 2 * T / (b * b) + 2 / (b * b * b));
    };
    auto upper_t1 = [&](const Real& b, const Real& T) {
        return exp(-b * T) * (T / b + 1 / (b * b));
    };
    Real tail = -upper_t2(a, T_split) + (6 / pi) * upper_t1(a, T_split);
    const auto& sig = detail::sigma1_upto(64);
    Real term_bound(1);
    for (long n = 1; n <= 64 && term_bound > eps; ++n) {
        Real b = 2 * pi * n + a;
        Real t = 24 * Real(sig[static_cast<size_t>(n)]) * upper_t2(b, T_split);
        tail += t;
        term_bound = abs(t);
    }
    Real value = 4 * s2 * (q.value + tail);
    Real err = 4 * s2 * (q.err + term_bound + eps) +
               (abs(value) + 1) * pow10(-(ctx.work_digits() + 12));
    return {r, value, err, EvalRoute::Quadrature};
}

}  // namespace d4eig
