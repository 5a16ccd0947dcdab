// Adaptive quadrature on finite intervals: tanh-sinh levels with an embedded
// error estimate (difference of consecutive levels), interval bisection where
// a level cap is hit, and a hard refinement-depth limit that turns
// non-convergence into an exception instead of a wrong answer.
//
// Integrands are analytic in all uses here, which is tanh-sinh's sweet spot;
// the estimate |I_L - I_{L-1}| then badly overestimates the true error of
// I_L, so reported err fields are conservative.

#pragma once

#include "d4eig/precision.hpp"

#include <functional>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

namespace d4eig {

struct QuadResult {
    Real value{0};
    Real err{0};
};

namespace detail {

struct TsNode {
    Real t;  // abscissa in (-1, 1)
    Real w;  // weight
};

// Nodes of the tanh-sinh rule at step h = 2^-level, cached per precision.
inline const std::vector<TsNode>& ts_nodes(int level) {
    static std::map<std::pair<int, unsigned>, std::vector<TsNode>> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    unsigned prec = Real::default_precision();
    auto key = std::make_pair(level, prec);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    std::vector<TsNode> nodes;
    const Real pi_half = const_pi() / 2;
    const Real h = pow(Real(2), -level);
    // stop once the weight underflows the working precision by a wide margin
    const Real cutoff = pow10(-static_cast<int>(prec) - 12);
    for (long j = 0;; ++j) {
        Real u = h * j;
        Real sh = pi_half * sinh(u);
        Real ch = cosh(sh);
        Real t = tanh(sh);
        Real w = h * pi_half * cosh(u) / (ch * ch);
        if (w < cutoff && j > 4) break;
        nodes.push_back({t, w});
        if (j > 0) nodes.push_back({-t, w});
        if (j > 4000000) throw precision_error("tanh-sinh: node generation runaway");
    }
    return cache.emplace(key, std::move(nodes)).first->second;
}

}  // namespace detail

// Integrates f over [a, b]. The integrand returns (value, err); pointwise
// err is folded into the reported err alongside the quadrature estimate.
inline QuadResult integrate_adaptive(const std::function<QuadResult(const Real&)>& f,
                                     const Real& a, const Real& b, const Real& tol,
                                     int max_depth = 40, int min_level = 4,
                                     int max_level = 9) {
    struct Piece {
        Real a, b;
        int depth;
    };
    std::vector<Piece> stack{{a, b, 0}};
    const Real span = b - a;
    QuadResult total;

    while (!stack.empty()) {
        Piece p = stack.back();
        stack.pop_back();
        const Real c = (p.a + p.b) / 2;
        const Real s = (p.b - p.a) / 2;
        const Real local_tol = tol * (p.b - p.a) / span / 2;

        Real prev(0), cur(0), ferr(0);
        bool converged = false;
        Real est(0);
        for (int level = min_level; level <= max_level; ++level) {
            cur = 0;
            ferr = 0;
            for (const auto& node : detail::ts_nodes(level)) {
                QuadResult fv = f(c + s * node.t);
                cur += node.w * fv.value;
                ferr += node.w * fv.err;
            }
            cur *= s;
            ferr *= s;
            if (level > min_level) {
                est = abs(cur - prev);
                if (est <= local_tol) {
                    converged = true;
                    break;
                }
            }
            prev = cur;
        }
        if (converged) {
            total.value += cur;
            total.err += est + abs(ferr);
        } else {
            if (p.depth >= max_depth)
                throw precision_error("integrate_adaptive: refinement depth exhausted");
            stack.push_back({p.a, c, p.depth + 1});
            stack.push_back({c, p.b, p.depth + 1});
        }
    }
    return total;
}

inline QuadResult integrate_adaptive(const std::function<Real(const Real&)>& f, const Real& a,
                                     const Real& b, const Real& tol, int max_depth = 40) {
    return integrate_adaptive(
        [&](const Real& x) { return QuadResult{f(x), Real(0)}; }, a, b, tol, max_depth);
}

}  // namespace d4eig
