// Zeta machinery for the closed-series route of the -1 eigenfunction:
// integer-argument Riemann zeta (Borwein's alternating algorithm), Hurwitz
// zeta(3, x) by Euler-Maclaurin, and exact Bernoulli numbers feeding the
// latter. Everything carries an explicit error control suited to the
// working precision.

#pragma once

#include "d4eig/precision.hpp"

#include <map>
#include <mutex>
#include <utility>
#include <vector>

namespace d4eig {

// B_0, B_1, B_2, ... as exact rationals (B_1 = -1/2 convention).
inline const Rational& bernoulli(int n) {
    static std::vector<Rational> cache{Rational(1)};
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    while (static_cast<int>(cache.size()) <= n) {
        int m = static_cast<int>(cache.size());
        // sum_{k=0}^{m} C(m+1,k) B_k = 0  =>  B_m = -1/(m+1) sum_{k<m} C(m+1,k) B_k
        Rational s(0);
        Integer binom = 1;  // C(m+1, 0)
        for (int k = 0; k < m; ++k) {
            s += Rational(binom) * cache[static_cast<size_t>(k)];
            binom = binom * (m + 1 - k) / (k + 1);
        }
        cache.push_back(-s / Rational(m + 1));
    }
    return cache[static_cast<size_t>(n)];
}

// zeta(s) for integer s >= 2 at the current working precision.
// Borwein's algorithm: error below 3/(3+sqrt(8))^n, so n ~ 1.32 * digits.
inline Real riemann_zeta(int s) {
    if (s < 2) throw std::invalid_argument("riemann_zeta: s must be >= 2");
    static std::map<std::pair<int, unsigned>, Real> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    unsigned prec = Real::default_precision();
    auto key = std::make_pair(s, prec);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    const int n = static_cast<int>(1.32 * prec) + 8;
    // d_k = n * sum_{i<=k} (n+i-1)! 4^i / ((n-i)! (2i)!), built exactly;
    // n*t_i follows the ratio 4 (n+i-1)(n-i+1) / ((2i)(2i-1))
    std::vector<Rational> d(static_cast<size_t>(n + 1));
    Rational nt = 1;
    Rational acc = 1;
    d[0] = 1;
    for (int i = 1; i <= n; ++i) {
        nt *= Rational(4 * (n + i - 1)) * Rational(n - i + 1);
        nt /= Rational((2 * i) * (2 * i - 1));
        acc += nt;
        d[static_cast<size_t>(i)] = acc;
    }
    Real sum(0);
    Real dn = to_real(d[static_cast<size_t>(n)]);
    for (int k = 0; k < n; ++k) {
        Real num = to_real(d[static_cast<size_t>(k)]) - dn;
        Real t = num / pow(Real(k + 1), s);
        sum += (k % 2 == 0) ? t : -t;
    }
    Real z = -sum / (dn * (1 - pow(Real(2), 1 - s)));
    return cache.emplace(key, std::move(z)).first->second;
}

// Hurwitz zeta(3, x) for x > 0 by Euler-Maclaurin with exact Bernoulli
// coefficients. Shift count and correction order scale with the working
// precision; the remainder is dominated by the first omitted term.
inline Real hurwitz_zeta3(const Real& x) {
    if (!(x > 0)) throw std::invalid_argument("hurwitz_zeta3: x must be positive");
    unsigned prec = Real::default_precision();
    const Real eps = pow10(-static_cast<int>(prec) - 2);
    long M = static_cast<long>(0.37 * prec) + 8;
    Real head(0);
    for (long j = 0; j < M; ++j) {
        Real aj = x + j;
        head += 1 / (aj * aj * aj);
    }
    Real a = x + M;
    Real a2 = a * a;
    Real tail = 1 / (2 * a2) + 1 / (2 * a2 * a);
    // sum_k B_{2k} (2k+1) / (2 a^{2k+2})
    Real apow = a2 * a2;  // a^{2k+2} at k = 1
    Real prev_term(0);
    for (int k = 1; k < 500; ++k) {
        Real term = to_real(bernoulli(2 * k)) * (2 * k + 1) / (2 * apow);
        if (k > 2 && abs(term) > abs(prev_term)) {
            // asymptotic regime ended; remainder is below the last decreasing term
            break;
        }
        tail += term;
        if (abs(term) < eps) break;
        prev_term = term;
        apow *= a2;
    }
    return head + tail;
}

}  // namespace d4eig
