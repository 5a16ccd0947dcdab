#include <catch2/catch_amalgamated.hpp>

#include "d4eig/qseries.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>

using namespace d4eig;

namespace {

Rational C(const HalfStepSeries& s, long num, long den = 1) {
    return s.coefficient(Rational(num, den));
}

// small deterministic generator for property tests
struct SplitMix {
    std::uint64_t s;
    std::uint64_t next() {
        std::uint64_t z = (s += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    long range(long lo, long hi) { return lo + static_cast<long>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }
};

HalfStepSeries random_series(SplitMix& rng, long order) {
    long min_exp = rng.range(-6, 6);
    std::vector<Rational> c;
    for (long e = min_exp; e <= order; ++e) {
        long num = rng.range(-9, 9);
        long den = rng.range(1, 4);
        c.emplace_back(num, den);
    }
    return HalfStepSeries(min_exp, std::move(c), order);
}

}  // namespace

TEST_CASE("theta fourth powers match the listed expansions") {
    // If a computed value ever disagrees with the listed one, trust the exact
    // computation: the assertion failure below is the flag.
    auto p4 = [](SeriesTag t) {
        auto s = build_series(t, 64);
        return s.pow(4);
    };
    auto t2 = p4(SeriesTag::Theta2);
    CHECK(C(t2, 1, 2) == 16);
    CHECK(C(t2, 3, 2) == 64);
    CHECK(C(t2, 0) == 0);
    CHECK(C(t2, 1) == 0);

    auto t3 = p4(SeriesTag::Theta3);
    CHECK(C(t3, 0) == 1);
    CHECK(C(t3, 1, 2) == 8);
    CHECK(C(t3, 1) == 24);
    CHECK(C(t3, 3, 2) == 32);
    CHECK(C(t3, 2) == 24);

    auto t4 = p4(SeriesTag::Theta4);
    CHECK(C(t4, 0) == 1);
    CHECK(C(t4, 1, 2) == -8);
    CHECK(C(t4, 1) == 24);
    CHECK(C(t4, 3, 2) == -32);
    CHECK(C(t4, 2) == 24);
}

TEST_CASE("phi and psi expansions") {
    auto phi = build_series(SeriesTag::Phi, 400);
    CHECK(phi.min_exp() == -8);
    CHECK(phi.order() == 400);
    CHECK(C(phi, -1) == 1);
    CHECK(C(phi, 0) == -24);
    CHECK(C(phi, 1, 2) == 4096);
    CHECK(C(phi, 1) == -98028);
    // next coefficients, frozen from an independent expansion
    CHECK(C(phi, 3, 2) == 1228800);
    CHECK(C(phi, 2) == -10749952);
    CHECK(C(phi, 5, 2) == 74244096);
    CHECK(C(phi, 1, 4) == 0);  // supported on half-integer powers only

    auto psi = build_series(SeriesTag::Psi, 400);
    CHECK(psi.min_exp() == 4);  // q^{1/2}
    CHECK(C(psi, 1, 2) == 8192);
    CHECK(C(psi, 1) == 0);
    CHECK(C(psi, 3, 2) == 2457600);

    for (long order : {8L, 80L, 400L}) {
        auto p = build_series(SeriesTag::Phi, order);
        CHECK(p.min_exp() == -8);
        CHECK(p.has_integer_coeffs());
    }
}

TEST_CASE("laplace term export") {
    auto phi = build_series(SeriesTag::Phi, 80);
    auto terms = phi.laplace_terms();
    REQUIRE(terms.size() >= 3);
    CHECK(terms[0] == std::make_pair(Rational(-2), Rational(1)));
    CHECK(terms[1] == std::make_pair(Rational(0), Rational(-24)));
    CHECK(terms[2] == std::make_pair(Rational(1), Rational(4096)));

    auto psi = build_series(SeriesTag::Psi, 80);
    auto pterms = psi.laplace_terms();
    REQUIRE(!pterms.empty());
    CHECK(pterms[0] == std::make_pair(Rational(1), Rational(8192)));

    CHECK(HalfStepSeries::zero(40).laplace_terms().empty());

    // raw theta2 lives on the q^{1/8} grid; exporting it must be refused
    CHECK_THROWS_AS(build_series(SeriesTag::Theta2, 40).laplace_terms(), std::domain_error);
}

TEST_CASE("identity residuals are exactly zero") {
    for (long order : {80L, 200L, 400L}) {
        CAPTURE(order);
        CHECK(identity_residual(IdentityTag::Jacobi, order).is_zero());
        CHECK(identity_residual(IdentityTag::FuncEq1, order).is_zero());
        CHECK(identity_residual(IdentityTag::DeltaCross, order).is_zero());
        CHECK(identity_residual(IdentityTag::D4Theta, order).is_zero());
    }
}

TEST_CASE("delta by product formula") {
    auto d = build_series(SeriesTag::Delta, 400);
    CHECK(d.min_exp() == 8);
    CHECK(C(d, 1) == 1);
    CHECK(C(d, 2) == -24);  // tau(2), via the product route alone

    auto inv = d.inverse();
    CHECK(inv.min_exp() == -8);
    CHECK(C(inv, -1) == 1);
    CHECK(C(inv, 0) == 24);

    auto round = inv * d;
    CHECK(round == HalfStepSeries::one(round.order()));
}

TEST_CASE("series multiplication basics") {
    auto t2 = build_series(SeriesTag::Theta2, 120);
    auto t2_4 = t2.pow(4);
    auto d = build_series(SeriesTag::Delta, 120);
    auto inv = d.inverse();
    auto round = (t2_4 * inv) * d;
    CHECK(round == t2_4.truncated(round.order()));

    auto one = HalfStepSeries::one(120);
    CHECK(one * t2_4 == t2_4.truncated((one * t2_4).order()));

    auto t3_12 = build_series(SeriesTag::Theta3, 80).pow(12);
    CHECK(C(t3_12, 0) == 1);
}

TEST_CASE("shift_T") {
    auto t3 = build_series(SeriesTag::Theta3, 200);
    auto t4 = build_series(SeriesTag::Theta4, 200);
    CHECK(t3.shift_T() == t4);

    auto d = build_series(SeriesTag::Delta, 200);
    CHECK(d.shift_T() == d);

    auto phi = build_series(SeriesTag::Phi, 200);
    auto phit = build_series(SeriesTag::PhiT, 200);
    CHECK(phi.shift_T() == phit);

    CHECK_THROWS_AS(build_series(SeriesTag::Theta2, 64).shift_T(), std::domain_error);

    SplitMix rng{7};
    for (int trial = 0; trial < 20; ++trial) {
        // random series supported on u-exponents divisible by 4
        long order = 40;
        std::vector<Rational> c(static_cast<size_t>(order + 9), Rational(0));
        for (long e = -8; e <= order; e += 4)
            c[static_cast<size_t>(e + 8)] = rng.range(-5, 5);
        HalfStepSeries s(-8, std::move(c), order);
        CHECK(s.shift_T().shift_T() == s);
    }
}

TEST_CASE("coefficient access edges") {
    auto phi = build_series(SeriesTag::Phi, 80);
    CHECK_THROWS_AS(phi.coefficient(Rational(11)), std::out_of_range);      // beyond truncation
    CHECK_THROWS_AS(phi.coefficient(Rational(1, 3)), std::invalid_argument);  // off-grid
    CHECK(phi.coefficient(Rational(-2)) == 0);  // below min_exp: known zero
    CHECK_THROWS_AS(build_series(SeriesTag::Phi, 7), std::invalid_argument);
}

TEST_CASE("multiplication is commutative and associative (random series)") {
    SplitMix rng{20240};
    for (int trial = 0; trial < 30; ++trial) {
        auto a = random_series(rng, rng.range(8, 24));
        auto b = random_series(rng, rng.range(8, 24));
        auto c = random_series(rng, rng.range(8, 24));
        CHECK(a * b == b * a);
        CHECK((a * b) * c == a * (b * c));
        CHECK(a * (b + c.truncated(std::min(b.order(), c.order()))) ==
              (a * b + a * c).truncated((a * (b + c.truncated(std::min(b.order(), c.order())))).order()));
    }
}

TEST_CASE("coefficient growth stays subexponential") {
    auto phi = build_series(SeriesTag::Phi, 400);
    double worst = 0;
    for (long m = 4; m <= 100; ++m) {
        Rational c = C(phi, m, 2);
        if (c == 0) continue;
        double lg = log(fabs(to_real(c).convert_to<double>()));
        worst = std::max(worst, lg / sqrt(static_cast<double>(m)));
    }
    CHECK(worst < 9.5);  // weakly holomorphic growth, e^{C sqrt m} with C ~ 2 pi sqrt 2
}

TEST_CASE("cache round trip") {
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path() / "d4eig_cache_test";
    fs::create_directories(dir);
    auto path = dir / "phi_80.qs";

    auto phi = build_series(SeriesTag::Phi, 80);
    save_series_cache(phi, SeriesTag::Phi, path);
    auto loaded = load_series_cache(SeriesTag::Phi, path);
    REQUIRE(loaded.has_value());
    CHECK(*loaded == phi);

    CHECK_FALSE(load_series_cache(SeriesTag::Psi, path).has_value());  // tag mismatch
    CHECK_FALSE(load_series_cache(SeriesTag::Phi, dir / "absent.qs").has_value());

    const auto& cached = build_series_cached(SeriesTag::Phi, 80, dir);
    CHECK(cached == phi);
    fs::remove_all(dir);
}
