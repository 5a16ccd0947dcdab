#include <catch2/catch_amalgamated.hpp>

#include "d4eig/modular_eval.hpp"

#include <cstdint>

using namespace d4eig;

namespace {

const PrecisionCtx kCtx{64, 10};

struct SplitMix {
    std::uint64_t s;
    std::uint64_t next() {
        std::uint64_t z = (s += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    // uniform in [0,1) with 53 bits
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

}  // namespace

TEST_CASE("E2 at the S-fixed point") {
    ScopedPrecision sp(kCtx);
    Complex v = eval_form(SeriesTag::E2, UpperHalfPoint(Real(0), Real(1)), kCtx);
    CHECK(abs(v.re - 3 / const_pi()) < pow10(-40));
    CHECK(abs(v.im) < pow10(-60));
}

TEST_CASE("theta2 equals theta4 at i") {
    ScopedPrecision sp(kCtx);
    UpperHalfPoint i(Real(0), Real(1));
    Complex a = eval_form(SeriesTag::Theta2, i, kCtx);
    Complex b = eval_form(SeriesTag::Theta4, i, kCtx);
    CHECK(abs(a - b) < pow10(-60));
}

TEST_CASE("delta positive at i and equal along both routes") {
    ScopedPrecision sp(kCtx);
    UpperHalfPoint i(Real(0), Real(1));
    Complex d = eval_form(SeriesTag::Delta, i, kCtx);
    CHECK(d.re > 0);
    CHECK(abs(d.im) < pow10(-60));

    // independent route: partial sum of the exact tau coefficients
    const auto& ds = build_series_cached(SeriesTag::Delta, 400);
    Real q = exp(-2 * const_pi());
    Real sum(0);
    for (long n = 1; n <= 50; ++n)
        sum += to_real(ds.coefficient(Rational(n))) * pow(q, static_cast<int>(n));
    CHECK(abs(d.re - sum) < pow10(-(kCtx.digits + kCtx.tail_margin) + 4));

    // eisenstein construction agrees too
    Complex de = eval_form(SeriesTag::DeltaEis, i, kCtx);
    CHECK(abs(d - de) < pow10(-60));
}

TEST_CASE("phi(i) equals 576") {
    // frozen independent value; also psi(i) = phi(i) through the seam
    ScopedPrecision sp(kCtx);
    UpperHalfPoint i(Real(0), Real(1));
    Complex p = eval_form(SeriesTag::Phi, i, kCtx);
    CHECK(abs(p.re - 576) < pow10(-40));
    Complex ps = eval_form(SeriesTag::Psi, i, kCtx);
    CHECK(abs(ps.re - 576) < pow10(-40));
}

TEST_CASE("psi is phi at -1/z") {
    ScopedPrecision sp(kCtx);
    UpperHalfPoint z(Real(0.3), Real(1.2));
    Real d = z.x * z.x + z.y * z.y;
    UpperHalfPoint zs(-z.x / d, z.y / d);
    Complex a = eval_form(SeriesTag::Psi, z, kCtx);
    Complex b = eval_form(SeriesTag::Phi, zs, kCtx);
    CHECK(abs(a - b) < pow10(-50));
}

TEST_CASE("transformation residuals at the documented points") {
    ScopedPrecision sp(kCtx);
    auto r1 = transform_residual(TransformLaw::E2S, UpperHalfPoint(Real(0), Real(1)), kCtx);
    CHECK(r1.residual_abs < pow10(-50));

    auto r2 = transform_residual(TransformLaw::QuasiMod5,
                                 UpperHalfPoint(Real(0.3), Real(1.7)), kCtx);
    CHECK(r2.residual_abs < pow10(-30));

    auto r3 = transform_residual(TransformLaw::Gamma2Inv,
                                 UpperHalfPoint(Real(0.1), Real(0.9)), kCtx);
    CHECK(r3.residual_abs < pow10(-30));
}

TEST_CASE("all twelve laws at seeded random points") {
    ScopedPrecision sp(kCtx);
    SplitMix rng{42};
    Real tol = pow10(-(kCtx.digits / 2));
    for (int k = 0; k < 20; ++k) {
        Real x = Real(-2) + Real(4) * Real(rng.unit());
        Real y = Real(0.5) + Real(2.5) * Real(rng.unit());
        UpperHalfPoint z(x, y);
        for (TransformLaw law : kAllTransformLaws) {
            auto rep = transform_residual(law, z, kCtx);
            CAPTURE(rep.law, k);
            CHECK(rep.residual_abs < tol);
            CHECK(rep.pass());
        }
    }
}

TEST_CASE("phi imaginary-axis seam consistency") {
    ScopedPrecision sp(kCtx);
    // both branches converge on [0.9, 1.1]; they must agree to the guard level
    for (double td : {0.9, 0.95, 1.0, 1.05, 1.1}) {
        Real t(td);
        Real direct = detail::phi_like_at_imag(SeriesTag::Phi, t, kCtx);
        Real via_psi = detail::phi_like_at_imag(SeriesTag::Psi, 1 / t, kCtx);
        CAPTURE(td);
        CHECK(abs(direct - via_psi) < pow10(-(kCtx.digits + kCtx.tail_margin) + 6));
        Real pub = eval_phi_imag_axis(t, kCtx);
        CHECK((pub == direct || pub == via_psi));
    }
}

TEST_CASE("phi decay at both cusps") {
    ScopedPrecision sp(kCtx);
    Real pi = const_pi();
    // t -> inf: phi(it) e^{-2 pi t} -> 1
    Real t5 = eval_phi_imag_axis(Real(5), kCtx) * exp(-2 * pi * 5);
    CHECK(abs(t5 - 1) < pow10(-6));
    // t -> 0+: phi(it) e^{pi/t} -> 8192
    Real t005 = eval_phi_imag_axis(Real(1) / 20, kCtx) * exp(pi * 20);
    CHECK(abs(t005 - 8192) < 1);
    Real t01 = eval_phi_imag_axis(Real(1) / 10, kCtx) * exp(pi * 10);
    CHECK(abs(t01 - 8192) < 8192 * Real(0.01));
}

TEST_CASE("numeric phi matches the exact series partial sum") {
    ScopedPrecision sp(kCtx);
    Real t(1.5), pi = const_pi();
    Real v = eval_phi_imag_axis(t, kCtx);
    const auto& phi = build_series_cached(SeriesTag::Phi, 400);
    Real sum(0);
    for (auto& [rate, w] : phi.laplace_terms())
        sum += to_real(w) * exp(-pi * to_real(rate) * t);
    CHECK(abs(v - sum) < pow10(-(kCtx.digits + kCtx.tail_margin) + 6));
}

TEST_CASE("eval_g") {
    ScopedPrecision sp(kCtx);
    Real pi = const_pi();
    CHECK(abs(eval_g(Real(1), kCtx) - 3 / pi) < pow10(-50));
    // g -> 1 as t -> 0+
    CHECK(abs(eval_g(Real(1) / 20, kCtx) - 1) < pow10(-40));
    // definition rearranged at t = 10
    Real g10 = eval_g(Real(10), kCtx);
    Real e2 = eval_e2_imag(Real(10), kCtx);
    CHECK(abs(g10 + 100 * e2 - 60 / pi) < pow10(-55));
    CHECK_THROWS_AS(eval_g(Real(0), kCtx), std::domain_error);
}

TEST_CASE("positivity on the imaginary axis") {
    ScopedPrecision sp(kCtx);
    for (double td : {0.1, 0.3, 0.7, 1.0, 1.5, 2.0, 4.0, 10.0}) {
        UpperHalfPoint p(Real(0), Real(td));
        Real d = eval_form(SeriesTag::Delta, p, kCtx).re;
        Real t2 = eval_form(SeriesTag::Theta2, p, kCtx).re;
        Real t3 = eval_form(SeriesTag::Theta3, p, kCtx).re;
        Real t4 = eval_form(SeriesTag::Theta4, p, kCtx).re;
        CAPTURE(td);
        CHECK(d > 0);
        CHECK(t2 > 0);
        CHECK(t4 > 0);
        CHECK(t3 > t2);
        CHECK(t3 > t4);
    }
}

TEST_CASE("domain and precision errors") {
    CHECK_THROWS_AS(UpperHalfPoint(Real(0), Real(0)), std::domain_error);
    CHECK_THROWS_AS(UpperHalfPoint(Real(0), Real(-1)), std::domain_error);
    PrecisionCtx bad{20, 10};
    CHECK_THROWS_AS(ScopedPrecision{bad}, std::invalid_argument);
    CHECK_THROWS_AS(eval_phi_imag_axis(Real(-1), kCtx), std::domain_error);
}
