// Exact truncated Laurent series on the q^{1/8} grid.
//
// Everything with a q-expansion in this library lives on one integer grid:
// the series variable is u = q^{1/8}, so raw Theta2 (exponents (2a+1)^2/8),
// half-integer powers (exponents m/2 <-> u^{4m}) and integer powers all have
// integer u-exponents. Coefficients are exact rationals; the named series
// (thetas, Delta, Eisenstein, phi, psi, ...) all have integer coefficients,
// which is asserted after construction as a cheap algebra-bug tripwire.
//
// A series knows the exponent range it is valid on: `order` means the
// expansion is correct modulo u^{order+1}. Binary operations propagate the
// tightest honest order (sums keep the min; products shift by min exponents).
//
// The identity residuals (Jacobi, the phi functional equation, the two Delta
// constructions, the D4 theta count) are exact: a passing check means the
// identity holds coefficient-by-coefficient through the truncation.

#pragma once

#include "d4eig/precision.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace d4eig {

enum class SeriesTag {
    Theta2,
    Theta3,
    Theta4,
    Delta,
    DeltaEis,
    E2,
    E4,
    E6,
    Phi,
    Psi,
    PhiT,
    D4Theta,
};

inline const char* to_string(SeriesTag t) {
    switch (t) {
        case SeriesTag::Theta2: return "theta2";
        case SeriesTag::Theta3: return "theta3";
        case SeriesTag::Theta4: return "theta4";
        case SeriesTag::Delta: return "delta";
        case SeriesTag::DeltaEis: return "delta_eis";
        case SeriesTag::E2: return "e2";
        case SeriesTag::E4: return "e4";
        case SeriesTag::E6: return "e6";
        case SeriesTag::Phi: return "phi";
        case SeriesTag::Psi: return "psi";
        case SeriesTag::PhiT: return "phit";
        case SeriesTag::D4Theta: return "d4theta";
    }
    return "?";
}

inline std::optional<SeriesTag> series_tag_from(const std::string& s) {
    static const std::map<std::string, SeriesTag> m = {
        {"theta2", SeriesTag::Theta2}, {"theta3", SeriesTag::Theta3},
        {"theta4", SeriesTag::Theta4}, {"delta", SeriesTag::Delta},
        {"delta_eis", SeriesTag::DeltaEis}, {"e2", SeriesTag::E2},
        {"e4", SeriesTag::E4}, {"e6", SeriesTag::E6},
        {"phi", SeriesTag::Phi}, {"psi", SeriesTag::Psi},
        {"phit", SeriesTag::PhiT}, {"d4theta", SeriesTag::D4Theta},
    };
    auto it = m.find(s);
    if (it == m.end()) return std::nullopt;
    return it->second;
}

class HalfStepSeries {
  public:
    // Zero series, known modulo u^{order+1}.
    static HalfStepSeries zero(long order) { return HalfStepSeries(order + 1, {}, order); }

    static HalfStepSeries one(long order) {
        return HalfStepSeries(0, {Rational(1)}, order);
    }

    // Monomial c * u^e.
    static HalfStepSeries monomial(Rational c, long e, long order) {
        if (c == 0 || e > order) return zero(order);
        return HalfStepSeries(e, {std::move(c)}, order);
    }

    HalfStepSeries(long min_exp, std::vector<Rational> coeffs, long order)
        : min_exp_(min_exp), coeffs_(std::move(coeffs)), order_(order) {
        normalize();
    }

    long min_exp() const { return min_exp_; }
    long order() const { return order_; }
    bool is_zero() const { return coeffs_.empty(); }
    const std::vector<Rational>& coeffs() const { return coeffs_; }

    // Coefficient of u^e; exponents below min_exp are known to vanish,
    // exponents above the truncation order are unknown and refused.
    const Rational& coeff_u(long e) const {
        static const Rational kZero(0);
        if (e > order_)
            throw std::out_of_range("HalfStepSeries: coefficient of u^" + std::to_string(e) +
                                    " unknown beyond truncation (order " +
                                    std::to_string(order_) + ")");
        if (e < min_exp_) return kZero;
        return coeffs_[static_cast<size_t>(e - min_exp_)];
    }

    // Coefficient of q^x for exact rational x with denominator dividing 8.
    const Rational& coefficient(const Rational& q_exp) const {
        Rational u = q_exp * 8;
        if (denominator(u) != 1)
            throw std::invalid_argument("coefficient: q-exponent must have denominator dividing 8");
        return coeff_u(static_cast<long>(numerator(u)));
    }

    bool has_integer_coeffs() const {
        for (const auto& c : coeffs_)
            if (denominator(c) != 1) return false;
        return true;
    }

    HalfStepSeries truncated(long new_order) const {
        if (new_order > order_)
            throw std::invalid_argument("truncated: cannot extend a series");
        if (new_order < min_exp_) return zero(new_order);
        std::vector<Rational> c(coeffs_.begin(),
                                coeffs_.begin() + std::min<size_t>(coeffs_.size(),
                                                                   static_cast<size_t>(new_order - min_exp_ + 1)));
        return HalfStepSeries(min_exp_, std::move(c), new_order);
    }

    HalfStepSeries operator-() const {
        std::vector<Rational> c(coeffs_);
        for (auto& x : c) x = -x;
        return HalfStepSeries(min_exp_, std::move(c), order_);
    }

    friend HalfStepSeries operator+(const HalfStepSeries& a, const HalfStepSeries& b) {
        long order = std::min(a.order_, b.order_);
        long lo = std::min(a.min_exp_, b.min_exp_);
        if (lo > order) return zero(order);
        std::vector<Rational> c(static_cast<size_t>(order - lo + 1), Rational(0));
        auto fold = [&](const HalfStepSeries& s) {
            for (size_t i = 0; i < s.coeffs_.size(); ++i) {
                long e = s.min_exp_ + static_cast<long>(i);
                if (e > order) break;
                c[static_cast<size_t>(e - lo)] += s.coeffs_[i];
            }
        };
        fold(a);
        fold(b);
        return HalfStepSeries(lo, std::move(c), order);
    }

    friend HalfStepSeries operator-(const HalfStepSeries& a, const HalfStepSeries& b) {
        return a + (-b);
    }

    friend HalfStepSeries operator*(const HalfStepSeries& a, const HalfStepSeries& b) {
        long order = std::min(a.order_ + b.min_exp_, b.order_ + a.min_exp_);
        if (a.is_zero() || b.is_zero()) return zero(order);
        long lo = a.min_exp_ + b.min_exp_;
        if (lo > order) return zero(order);
        std::vector<Rational> c(static_cast<size_t>(order - lo + 1), Rational(0));
        for (size_t i = 0; i < a.coeffs_.size(); ++i) {
            if (a.coeffs_[i] == 0) continue;
            long ea = a.min_exp_ + static_cast<long>(i);
            long jmax = order - ea - b.min_exp_;
            if (jmax < 0) break;
            size_t jend = std::min(b.coeffs_.size(), static_cast<size_t>(jmax) + 1);
            for (size_t j = 0; j < jend; ++j) {
                if (b.coeffs_[j] == 0) continue;
                c[static_cast<size_t>(ea + b.min_exp_ + static_cast<long>(j) - lo)] +=
                    a.coeffs_[i] * b.coeffs_[j];
            }
        }
        return HalfStepSeries(lo, std::move(c), order);
    }

    HalfStepSeries operator*(const Rational& s) const {
        if (s == 0) return zero(order_);
        std::vector<Rational> c(coeffs_);
        for (auto& x : c) x *= s;
        return HalfStepSeries(min_exp_, std::move(c), order_);
    }

    HalfStepSeries pow(unsigned k) const {
        if (k == 0) return one(order_);
        HalfStepSeries result = *this;
        for (unsigned i = 1; i < k; ++i) result = result * *this;
        return result;
    }

    // Series inverse; the leading coefficient must be a unit (any nonzero
    // rational works). Relative precision is preserved: min_exp flips sign
    // and order becomes order - 2*min_exp.
    HalfStepSeries inverse() const {
        if (is_zero()) throw std::domain_error("inverse: zero series");
        long m = min_exp_;
        long len = order_ - m + 1;
        std::vector<Rational> inv(static_cast<size_t>(len), Rational(0));
        const Rational& c0 = coeffs_[0];
        inv[0] = Rational(1) / c0;
        for (long k = 1; k < len; ++k) {
            Rational s(0);
            long jmax = std::min<long>(k, static_cast<long>(coeffs_.size()) - 1);
            for (long j = 1; j <= jmax; ++j)
                s += coeffs_[static_cast<size_t>(j)] * inv[static_cast<size_t>(k - j)];
            inv[static_cast<size_t>(k)] = -s / c0;
        }
        return HalfStepSeries(-m, std::move(inv), order_ - 2 * m);
    }

    // z -> z+1 on series supported on half-integer q-powers (u-exponents
    // divisible by 4): the coefficient at u^{4m} picks up (-1)^m.
    HalfStepSeries shift_T() const {
        std::vector<Rational> c(coeffs_);
        for (size_t i = 0; i < c.size(); ++i) {
            long e = min_exp_ + static_cast<long>(i);
            if (c[i] == 0) continue;
            if (e % 4 != 0)
                throw std::domain_error(
                    "shift_T: series has support off the half-integer q-grid (u^" +
                    std::to_string(e) + "); use the numeric evaluator for those");
            long m = e / 4;
            if (m % 2 != 0) c[i] = -c[i];
        }
        return HalfStepSeries(min_exp_, std::move(c), order_);
    }

    // Laplace data: q^{m/2} evaluated at z = it is e^{-pi m t}; emits
    // (rate m, weight) for each nonzero term. Requires half-integer support.
    std::vector<std::pair<Rational, Rational>> laplace_terms() const {
        std::vector<std::pair<Rational, Rational>> out;
        for (size_t i = 0; i < coeffs_.size(); ++i) {
            if (coeffs_[i] == 0) continue;
            long e = min_exp_ + static_cast<long>(i);
            if (e % 4 != 0)
                throw std::domain_error("laplace_terms: unsupported exponent u^" +
                                        std::to_string(e));
            out.emplace_back(Rational(e) / 4, coeffs_[i]);
        }
        return out;
    }

    bool operator==(const HalfStepSeries& o) const {
        return min_exp_ == o.min_exp_ && order_ == o.order_ && coeffs_ == o.coeffs_;
    }

  private:
    void normalize() {
        size_t lead = 0;
        while (lead < coeffs_.size() && coeffs_[lead] == 0) ++lead;
        if (lead > 0) {
            coeffs_.erase(coeffs_.begin(), coeffs_.begin() + static_cast<long>(lead));
            min_exp_ += static_cast<long>(lead);
        }
        if (coeffs_.empty()) {
            min_exp_ = order_ + 1;
            return;
        }
        // pad explicit zeros so that length == order - min_exp + 1
        if (order_ < min_exp_ + static_cast<long>(coeffs_.size()) - 1)
            throw std::logic_error("HalfStepSeries: coefficients beyond declared order");
        coeffs_.resize(static_cast<size_t>(order_ - min_exp_ + 1), Rational(0));
    }

    long min_exp_;
    std::vector<Rational> coeffs_;
    long order_;
};

namespace detail {

inline std::vector<Integer> sigma_table(int k, long nmax) {
    std::vector<Integer> s(static_cast<size_t>(nmax + 1), Integer(0));
    for (long d = 1; d <= nmax; ++d) {
        Integer dk = 1;
        for (int i = 0; i < k; ++i) dk *= d;
        for (long n = d; n <= nmax; n += d) s[static_cast<size_t>(n)] += dk;
    }
    return s;
}

inline HalfStepSeries theta2_raw(long order) {
    std::vector<Rational> c(static_cast<size_t>(order), Rational(0));  // from u^1
    for (long a = 0;; ++a) {
        long e = (2 * a + 1) * (2 * a + 1);
        if (e > order) break;
        c[static_cast<size_t>(e - 1)] = 2;
    }
    return HalfStepSeries(1, std::move(c), order);
}

inline HalfStepSeries theta34_raw(long order, bool alternating) {
    std::vector<Rational> c(static_cast<size_t>(order + 1), Rational(0));
    c[0] = 1;
    for (long n = 1;; ++n) {
        long e = 4 * n * n;
        if (e > order) break;
        c[static_cast<size_t>(e)] = (alternating && (n % 2 != 0)) ? -2 : 2;
    }
    return HalfStepSeries(0, std::move(c), order);
}

// Euler product prod_{n>=1} (1 - q^n) truncated on the u-grid.
inline HalfStepSeries euler_product(long order) {
    std::vector<Rational> p(static_cast<size_t>(order + 1), Rational(0));
    p[0] = 1;
    for (long n = 1; 8 * n <= order; ++n) {
        // multiply by (1 - u^{8n}) in place, highest exponent first
        for (long e = order; e >= 8 * n; --e)
            p[static_cast<size_t>(e)] -= p[static_cast<size_t>(e - 8 * n)];
    }
    return HalfStepSeries(0, std::move(p), order);
}

inline HalfStepSeries eisenstein(int which, long order) {
    long nmax = order / 8;
    int k = which == 2 ? 1 : (which == 4 ? 3 : 5);
    long factor = which == 2 ? -24 : (which == 4 ? 240 : -504);
    auto sig = sigma_table(k, nmax);
    std::vector<Rational> c(static_cast<size_t>(order + 1), Rational(0));
    c[0] = 1;
    for (long n = 1; n <= nmax; ++n)
        c[static_cast<size_t>(8 * n)] = Rational(factor) * Rational(sig[static_cast<size_t>(n)]);
    return HalfStepSeries(0, std::move(c), order);
}

// Complete table of D4 vector counts by squared norm, for norms <= nmax.
inline std::vector<long> d4_counts(long nmax) {
    std::vector<long> cnt(static_cast<size_t>(nmax + 1), 0);
    long box = 0;
    while (box * box < nmax) ++box;
    for (long x0 = -box; x0 <= box; ++x0)
        for (long x1 = -box; x1 <= box; ++x1)
            for (long x2 = -box; x2 <= box; ++x2) {
                long p = x0 * x0 + x1 * x1 + x2 * x2;
                if (p > nmax) continue;
                for (long x3 = -box; x3 <= box; ++x3) {
                    long n = p + x3 * x3;
                    if (n <= nmax && ((x0 + x1 + x2 + x3) % 2) == 0)
                        ++cnt[static_cast<size_t>(n)];
                }
            }
    return cnt;
}

}  // namespace detail

// Builds the exact expansion of a named series, truncated at u^order.
// `order` is in u-units (order 8k covers q-powers through q^k).
inline HalfStepSeries build_series(SeriesTag id, long order) {
    if (order < 8)
        throw std::invalid_argument("build_series: order must be >= 8 (one full q-power)");

    auto check_integral = [&](const HalfStepSeries& s) -> const HalfStepSeries& {
        if (!s.has_integer_coeffs())
            throw std::logic_error(std::string("build_series(") + to_string(id) +
                                   "): integrality violation - implementation bug");
        return s;
    };

    switch (id) {
        case SeriesTag::Theta2: return detail::theta2_raw(order);
        case SeriesTag::Theta3: return detail::theta34_raw(order, false);
        case SeriesTag::Theta4: return detail::theta34_raw(order, true);
        case SeriesTag::E2: return detail::eisenstein(2, order);
        case SeriesTag::E4: return detail::eisenstein(4, order);
        case SeriesTag::E6: return detail::eisenstein(6, order);
        case SeriesTag::Delta: {
            HalfStepSeries p = detail::euler_product(order);
            HalfStepSeries p2 = p * p;
            HalfStepSeries p4 = p2 * p2;
            HalfStepSeries p8 = p4 * p4;
            HalfStepSeries p16 = p8 * p8;
            HalfStepSeries r = p16 * p8;  // p^24
            HalfStepSeries q = HalfStepSeries::monomial(Rational(1), 8, order + 8);
            return check_integral((q * r).truncated(order));
        }
        case SeriesTag::DeltaEis: {
            HalfStepSeries e4 = detail::eisenstein(4, order);
            HalfStepSeries e6 = detail::eisenstein(6, order);
            HalfStepSeries num = e4 * e4 * e4 - e6 * e6;
            return check_integral(num * Rational(1, 1728));
        }
        case SeriesTag::D4Theta: {
            HalfStepSeries t3 = detail::theta34_raw(order, false);
            HalfStepSeries t4 = detail::theta34_raw(order, true);
            HalfStepSeries t34 = t3 * t3 * t3 * t3;
            HalfStepSeries t44 = t4 * t4 * t4 * t4;
            return check_integral((t34 + t44) * Rational(1, 2));
        }
        case SeriesTag::Phi:
        case SeriesTag::Psi:
        case SeriesTag::PhiT: {
            const long B = order + 16;  // division by Delta costs 16 u-units
            HalfStepSeries t2 = detail::theta2_raw(B);
            HalfStepSeries t3 = detail::theta34_raw(B, false);
            HalfStepSeries t4 = detail::theta34_raw(B, true);
            auto p12 = [](const HalfStepSeries& s) {
                HalfStepSeries s2 = s * s;
                HalfStepSeries s4 = s2 * s2;
                HalfStepSeries s8 = s4 * s4;
                return s8 * s4;
            };
            HalfStepSeries t2_12 = p12(t2);
            HalfStepSeries t3_12 = p12(t3);
            HalfStepSeries t4_12 = p12(t4);
            HalfStepSeries num = id == SeriesTag::Phi ? t4_12 * (t3_12 + t2_12)
                               : id == SeriesTag::Psi ? t2_12 * (t3_12 + t4_12)
                                                      : t3_12 * (t4_12 - t2_12);
            HalfStepSeries invd = build_series(SeriesTag::Delta, B).inverse();
            return check_integral((num * invd).truncated(order));
        }
    }
    throw std::logic_error("build_series: unreachable");
}

enum class IdentityTag { Jacobi, FuncEq1, DeltaCross, D4Theta };

inline const char* to_string(IdentityTag t) {
    switch (t) {
        case IdentityTag::Jacobi: return "jacobi";
        case IdentityTag::FuncEq1: return "funceq1";
        case IdentityTag::DeltaCross: return "deltacross";
        case IdentityTag::D4Theta: return "d4theta";
    }
    return "?";
}

// Exact residual series of a named identity; the zero series means the
// identity holds through the truncation.
inline HalfStepSeries identity_residual(IdentityTag which, long order) {
    if (order < 8) throw std::invalid_argument("identity_residual: order must be >= 8");
    switch (which) {
        case IdentityTag::Jacobi: {
            auto p4 = [&](SeriesTag t) {
                HalfStepSeries s = build_series(t, order);
                HalfStepSeries s2 = s * s;
                return s2 * s2;
            };
            return p4(SeriesTag::Theta3) - p4(SeriesTag::Theta2) - p4(SeriesTag::Theta4);
        }
        case IdentityTag::FuncEq1:
            // Eq.(1) at d=4: phi(z+1) - phi(z) = -phi(-1/z)
            return build_series(SeriesTag::PhiT, order) - build_series(SeriesTag::Phi, order) +
                   build_series(SeriesTag::Psi, order);
        case IdentityTag::DeltaCross:
            return build_series(SeriesTag::Delta, order) - build_series(SeriesTag::DeltaEis, order);
        case IdentityTag::D4Theta: {
            HalfStepSeries s = build_series(SeriesTag::D4Theta, order);
            long nmax = order / 4;
            auto cnt = detail::d4_counts(nmax);
            std::vector<Rational> c(static_cast<size_t>(4 * nmax + 1), Rational(0));
            for (long n = 0; n <= nmax; ++n)
                c[static_cast<size_t>(4 * n)] = cnt[static_cast<size_t>(n)];
            HalfStepSeries enumerated(0, std::move(c), 4 * nmax);
            return s.truncated(4 * nmax) - enumerated;
        }
    }
    throw std::logic_error("identity_residual: unreachable");
}

// ---- optional on-disk cache -------------------------------------------------
//
// Text format, one coefficient per line:
//   qseries-cache v1 <tag> <min_exp> <order>
//   <coefficient as decimal integer or p/q>
// Writes are atomic (temp file + rename).

inline void save_series_cache(const HalfStepSeries& s, SeriesTag tag,
                              const std::filesystem::path& path) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cache: cannot write " + tmp.string());
        out << "qseries-cache v1 " << to_string(tag) << ' ' << s.min_exp() << ' ' << s.order()
            << '\n';
        for (const auto& c : s.coeffs()) out << c << '\n';
        if (!out) throw std::runtime_error("cache: short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::optional<HalfStepSeries> load_series_cache(SeriesTag tag,
                                                       const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::string magic, version, name;
    long min_exp = 0, order = 0;
    if (!(in >> magic >> version >> name >> min_exp >> order)) return std::nullopt;
    if (magic != "qseries-cache" || version != "v1" || name != to_string(tag)) return std::nullopt;
    std::vector<Rational> c;
    c.reserve(static_cast<size_t>(std::max<long>(0, order - min_exp + 1)));
    std::string line;
    while (in >> line) c.emplace_back(line);
    if (static_cast<long>(c.size()) != order - min_exp + 1 && !(c.empty() && min_exp == order + 1))
        return std::nullopt;
    return HalfStepSeries(min_exp, std::move(c), order);
}

// build_series with a process-level memo and an optional disk cache.
inline const HalfStepSeries& build_series_cached(SeriesTag id, long order,
                                                 const std::optional<std::filesystem::path>& dir = std::nullopt) {
    static std::map<std::pair<int, long>, HalfStepSeries> memo;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(static_cast<int>(id), order);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    if (dir) {
        auto path = *dir / (std::string(to_string(id)) + "_" + std::to_string(order) + ".qs");
        if (auto s = load_series_cache(id, path)) {
            return memo.emplace(key, std::move(*s)).first->second;
        }
        HalfStepSeries s = build_series(id, order);
        std::error_code ec;
        std::filesystem::create_directories(*dir, ec);
        save_series_cache(s, id, path);
        return memo.emplace(key, std::move(s)).first->second;
    }
    return memo.emplace(key, build_series(id, order)).first->second;
}

}  // namespace d4eig
