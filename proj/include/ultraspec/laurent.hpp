#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>

#include "ultraspec/errors.hpp"
#include "ultraspec/rational.hpp"

namespace ultraspec {

// Absolute-precision model: a series is known at all exponents < precision,
// unknown at or above it. Exact values carry precision kPrecInf. All
// decisions compare integer valuations; the real magnitude rho^v with
// rho = 1/2 is for reporting only.
inline constexpr long kPrecInf = std::numeric_limits<long>::max() / 4;
inline constexpr long kDefaultPrec = 32;
inline constexpr double kRho = 0.5;

inline long sat_add(long a, long b) {
    if (a >= kPrecInf || b >= kPrecInf) return kPrecInf;
    long s = a + b;
    return s >= kPrecInf ? kPrecInf : s;
}

struct Valuation {
    enum class Kind { finite, infinite, unknown };
    Kind kind = Kind::infinite;
    long v = 0; // finite value, or the knowledge bound for unknown

    static Valuation finite(long v) { return {Kind::finite, v}; }
    static Valuation infinite() { return {Kind::infinite, 0}; }
    static Valuation unknown(long bound) { return {Kind::unknown, bound}; }

    bool is_finite() const { return kind == Kind::finite; }
    bool is_infinite() const { return kind == Kind::infinite; }
    bool is_unknown() const { return kind == Kind::unknown; }

    // Sound lower bound on the true valuation.
    long lower_bound() const { return kind == Kind::infinite ? kPrecInf : v; }

    bool operator==(const Valuation& o) const { return kind == o.kind && (kind == Kind::infinite || v == o.v); }

    std::string str() const {
        if (kind == Kind::infinite) return "inf";
        if (kind == Kind::unknown) return ">=" + std::to_string(v) + " (unknown)";
        return std::to_string(v);
    }
};

// Symmetric normalized 2-cocycle on Z x Z twisting the convolution product.
class FactorSet {
public:
    using Cocycle = std::function<Rational(long, long)>;

    FactorSet() : trivial_(true) {}
    explicit FactorSet(Cocycle c) : cocycle_(std::move(c)), trivial_(false) {}

    static FactorSet trivial() { return FactorSet(); }

    // c_{a,b} = base^{a*b}
    static FactorSet power(long base = 2) {
        return FactorSet([base](long a, long b) -> Rational {
            long e = a * b;
            Integer p;
            mpz_ui_pow_ui(p.get_mpz_t(), static_cast<unsigned long>(base),
                          static_cast<unsigned long>(e < 0 ? -e : e));
            if (e >= 0) return Rational(p);
            Rational q(1, p);
            q.canonicalize();
            return q;
        });
    }

    bool is_trivial() const { return trivial_; }

    Rational operator()(long a, long b) const {
        if (trivial_) return Rational(1);
        Rational v = cocycle_(a, b);
        if (is_zero(v)) fail(errc::invalid_argument, "factor set value vanishes at (" + std::to_string(a) + "," + std::to_string(b) + ")");
        return v;
    }

    // c_{a,b,e} = c_{a,b} c_{a+b,e} (= c_{a,b+e} c_{b,e} by the cocycle identity)
    Rational triple(long a, long b, long e) const {
        if (trivial_) return Rational(1);
        return (*this)(a, b) * (*this)(a + b, e);
    }

private:
    Cocycle cocycle_;
    bool trivial_ = true;
};

// All three factor-set axioms on the cube |a|,|b|,|g| <= range.
inline bool factor_set_check(const FactorSet& c, long range) {
    if (range < 1) fail(errc::invalid_argument, "factor_set_check: range must be >= 1");
    if (c.is_trivial()) return true;
    for (long a = -range; a <= range; ++a) {
        if (c(0, a) != 1 || c(a, 0) != 1) return false;
        for (long b = -range; b <= range; ++b) {
            if (c(a, b) != c(b, a)) return false;
            for (long g = -range; g <= range; ++g) {
                Rational lhs = c(a, b) * c(a + b, g);
                Rational rhs = c(a, b + g) * c(b, g);
                if (lhs != rhs) return false;
            }
        }
    }
    return c(0, 0) == 1;
}

class LaurentSeries {
public:
    // Exact zero.
    LaurentSeries() : prec_(kPrecInf) {}

    LaurentSeries(const Rational& constant) : prec_(kPrecInf) {
        if (!is_zero(constant)) c_[0] = constant;
    }
    LaurentSeries(long constant) : LaurentSeries(Rational(constant)) {}

    static LaurentSeries zero(long prec = kPrecInf) {
        LaurentSeries s;
        s.prec_ = prec;
        return s;
    }

    static LaurentSeries monomial(const Rational& coef, long exp, long prec = kPrecInf) {
        LaurentSeries s;
        s.prec_ = prec;
        if (!is_zero(coef) && exp < prec) s.c_[exp] = coef;
        return s;
    }

    static LaurentSeries t(long exp = 1) { return monomial(Rational(1), exp); }

    static LaurentSeries from_terms(std::map<long, Rational> terms, long prec = kPrecInf) {
        LaurentSeries s;
        s.c_ = std::move(terms);
        s.prec_ = prec;
        s.normalize();
        return s;
    }

    const std::map<long, Rational>& terms() const { return c_; }
    long precision() const { return prec_; }
    bool is_exact() const { return prec_ >= kPrecInf; }

    Rational coeff(long exp) const {
        auto it = c_.find(exp);
        return it == c_.end() ? Rational(0) : it->second;
    }

    // True iff the value is exactly the zero series (not merely zero to
    // finite precision).
    bool is_exact_zero() const { return c_.empty() && is_exact(); }

    // Zero as far as we can see.
    bool is_zero_to_precision() const { return c_.empty(); }

    Valuation valuation() const {
        if (!c_.empty()) return Valuation::finite(c_.begin()->first);
        return is_exact() ? Valuation::infinite() : Valuation::unknown(prec_);
    }

    // Sound lower bound on the true valuation (the precision itself for an
    // all-zero truncation).
    long val_lower_bound() const { return valuation().lower_bound(); }

    // rho^valuation with rho = 1/2, reporting only.
    double abs_value() const {
        Valuation v = valuation();
        if (v.is_unknown()) fail(errc::precision_exhausted, "abs_value of a series that is zero to precision " + std::to_string(prec_));
        if (v.is_infinite()) return 0.0;
        return std::pow(kRho, static_cast<double>(v.v));
    }

    // Coefficient at exponent 0; defined on the unit ball only.
    Rational residue() const {
        Valuation v = valuation();
        if (v.is_finite() && v.v < 0) fail(errc::negative_valuation, "residue of a series with valuation " + std::to_string(v.v));
        if (v.is_unknown() && prec_ <= 0) fail(errc::precision_exhausted, "residue unknown at precision " + std::to_string(prec_));
        return coeff(0);
    }

    LaurentSeries with_precision(long prec) const {
        LaurentSeries r = *this;
        r.prec_ = std::min(prec_, prec);
        r.normalize();
        return r;
    }

    // True iff the series is certified to vanish modulo t^n.
    bool is_zero_mod(long n) const {
        if (prec_ < n) return false;
        return c_.empty() || c_.begin()->first >= n;
    }

    friend LaurentSeries operator-(const LaurentSeries& f) {
        LaurentSeries r = f;
        for (auto& [e, q] : r.c_) q = -q;
        return r;
    }

    friend LaurentSeries operator+(const LaurentSeries& f, const LaurentSeries& g) {
        LaurentSeries r;
        r.prec_ = std::min(f.prec_, g.prec_);
        r.c_ = f.c_;
        for (const auto& [e, q] : g.c_) {
            auto [it, inserted] = r.c_.emplace(e, q);
            if (!inserted) it->second += q;
        }
        r.normalize();
        return r;
    }

    friend LaurentSeries operator-(const LaurentSeries& f, const LaurentSeries& g) { return f + (-g); }

    friend LaurentSeries operator*(const Rational& a, const LaurentSeries& f) {
        if (is_zero(a)) return LaurentSeries();
        LaurentSeries r;
        r.prec_ = f.prec_;
        for (const auto& [e, q] : f.c_) r.c_.emplace(e, a * q);
        return r;
    }
    friend LaurentSeries operator*(const LaurentSeries& f, const Rational& a) { return a * f; }

    friend bool operator==(const LaurentSeries& f, const LaurentSeries& g) {
        return f.prec_ == g.prec_ && f.c_ == g.c_;
    }

    std::string str() const;

private:
    void normalize() {
        for (auto it = c_.begin(); it != c_.end();) {
            if (is_zero(it->second) || it->first >= prec_)
                it = c_.erase(it);
            else
                ++it;
        }
    }

    std::map<long, Rational> c_;
    long prec_;

    friend LaurentSeries series_mul(const LaurentSeries&, const LaurentSeries&, const FactorSet&);
    friend LaurentSeries shift_up(const LaurentSeries&, long, const FactorSet&);
    friend LaurentSeries shift_down(const LaurentSeries&, long, const FactorSet&);
};

inline LaurentSeries series_add(const LaurentSeries& f, const LaurentSeries& g) { return f + g; }

// Convolution twisted by the factor set; the trivial factor set is ordinary
// series multiplication. Precision: min(v(f)+prec(g), v(g)+prec(f)), with the
// precision bound itself standing in for an unknown valuation.
inline LaurentSeries series_mul(const LaurentSeries& f, const LaurentSeries& g, const FactorSet& c = FactorSet::trivial()) {
    if (f.is_exact_zero() || g.is_exact_zero()) return LaurentSeries();
    LaurentSeries r;
    r.prec_ = std::min(sat_add(f.val_lower_bound(), g.precision()),
                       sat_add(g.val_lower_bound(), f.precision()));
    for (const auto& [ef, qf] : f.terms())
        for (const auto& [eg, qg] : g.terms()) {
            long e = ef + eg;
            if (e >= r.prec_) continue;
            Rational term = qf * qg;
            if (!c.is_trivial()) term *= c(ef, eg);
            auto [it, inserted] = r.c_.emplace(e, term);
            if (!inserted) it->second += term;
        }
    r.normalize();
    return r;
}

inline LaurentSeries operator*(const LaurentSeries& f, const LaurentSeries& g) { return series_mul(f, g); }

inline Valuation valuation(const LaurentSeries& f) { return f.valuation(); }

// f = t^k (.) g  with the twisted product, i.e. g(e) = f(k+e)/c(k,e).
inline LaurentSeries shift_down(const LaurentSeries& f, long k, const FactorSet& c = FactorSet::trivial()) {
    LaurentSeries r;
    r.prec_ = f.prec_ >= kPrecInf ? kPrecInf : f.prec_ - k;
    for (const auto& [e, q] : f.terms()) {
        Rational v = q;
        if (!c.is_trivial()) v /= c(k, e - k);
        r.c_.emplace(e - k, v);
    }
    r.normalize();
    return r;
}

// t^k (.) f under the twisted product: (t^k f)(k+e) = f(e) c(k,e).
inline LaurentSeries shift_up(const LaurentSeries& f, long k, const FactorSet& c = FactorSet::trivial()) {
    LaurentSeries r;
    r.prec_ = f.prec_ >= kPrecInf ? kPrecInf : f.prec_ + k;
    for (const auto& [e, q] : f.terms()) {
        Rational v = q;
        if (!c.is_trivial()) v *= c(k, e);
        r.c_.emplace(e + k, v);
    }
    r.normalize();
    return r;
}

// Multiplicative inverse by coefficient recursion. For exact non-monomial
// input the relative term count is capped (monomials invert exactly).
inline LaurentSeries series_inv(const LaurentSeries& f, long rel_terms = kDefaultPrec) {
    Valuation val = f.valuation();
    if (val.is_infinite()) fail(errc::not_invertible, "exact zero series has no inverse");
    if (val.is_unknown()) fail(errc::precision_exhausted, "cannot invert a series that is zero to precision " + std::to_string(f.precision()));
    long v = val.v;
    if (f.terms().size() == 1) {
        const auto& [e, q] = *f.terms().begin();
        Rational qi = 1 / q;
        return LaurentSeries::monomial(qi, -e, f.is_exact() ? kPrecInf : f.precision() - 2 * v);
    }
    long rel = f.is_exact() ? rel_terms : f.precision() - v;
    // unit part u with u(0) != 0
    LaurentSeries u = shift_down(f, v);
    Rational a0 = u.coeff(0);
    std::map<long, Rational> b;
    b[0] = 1 / a0;
    for (long k = 1; k < rel; ++k) {
        Rational acc(0);
        for (const auto& [e, q] : u.terms()) {
            if (e <= 0 || e > k) continue;
            auto it = b.find(k - e);
            if (it != b.end()) acc += q * it->second;
        }
        if (!is_zero(acc)) b[k] = -acc / a0;
    }
    LaurentSeries ui = LaurentSeries::from_terms(std::move(b), rel);
    return shift_down(ui, v); // inverse valuation is -v; abs precision rel - v... shift handles exponents
}

// Square root by Hensel lifting from the residue. Requires an even valuation
// and a residue that is a square in Q; returns the branch whose leading
// coefficient is positive.
inline LaurentSeries hensel_sqrt(const LaurentSeries& f, long rel_terms = kDefaultPrec) {
    Valuation val = f.valuation();
    if (val.is_infinite()) return LaurentSeries(); // sqrt(0) = 0 exactly
    if (val.is_unknown()) fail(errc::precision_exhausted, "square root of a series that is zero to precision " + std::to_string(f.precision()));
    long v = val.v;
    if (v % 2 != 0) fail(errc::odd_valuation, "valuation " + std::to_string(v) + " is odd");
    long m = v / 2;
    LaurentSeries u = shift_down(f, 2 * m);
    Rational r0 = u.coeff(0);
    if (!is_perfect_square(r0)) fail(errc::residue_not_a_square, "leading coefficient " + to_string(r0) + " is not a square in Q");
    if (u.terms().size() == 1) {
        // exact monomial square
        return LaurentSeries::monomial(rational_sqrt(r0), m, u.is_exact() ? kPrecInf : u.precision() + m);
    }
    long rel = u.is_exact() ? rel_terms : u.precision();
    // Newton iterates are kept as exact polynomials; `known` tracks how many
    // leading terms are proven correct (doubles each step).
    LaurentSeries g(rational_sqrt(r0));
    long known = 1;
    Rational half(1, 2);
    while (known < rel) {
        known = std::min(2 * known, rel);
        LaurentSeries quot = series_mul(u.with_precision(known), series_inv(g, known));
        LaurentSeries next = half * (g.with_precision(known) + quot);
        g = LaurentSeries::from_terms(std::map<long, Rational>(next.terms()), kPrecInf);
    }
    LaurentSeries root = shift_up(g.with_precision(rel), m);
    if (f.is_exact()) {
        // a finitely supported input may have an exact polynomial root
        LaurentSeries sq = series_mul(root, root);
        LaurentSeries exact_candidate = LaurentSeries::from_terms(std::map<long, Rational>(root.terms()), kPrecInf);
        if (series_mul(exact_candidate, exact_candidate) == f) return exact_candidate;
    }
    return root;
}

inline std::string LaurentSeries::str() const {
    std::ostringstream os;
    if (c_.empty()) {
        os << "0";
    } else {
        bool first = true;
        for (const auto& [e, q] : c_) {
            Rational mag = q;
            if (first) {
                if (sgn(q) < 0) {
                    os << "-";
                    mag = -q;
                }
                first = false;
            } else {
                os << (sgn(q) < 0 ? " - " : " + ");
                mag = abs(q);
            }
            if (e == 0) {
                os << mag.get_str();
            } else {
                if (mag != 1) os << mag.get_str() << "*";
                os << "t";
                if (e != 1) os << "^" << e;
            }
        }
    }
    if (!is_exact()) os << " (prec " << prec_ << ")";
    return os.str();
}

inline bool equal_mod(const LaurentSeries& f, const LaurentSeries& g, long n) { return (f - g).is_zero_mod(n); }

// Total order used for canonical sorting of eigenvalue lists: compare
// coefficient sequences from the lowest exponent up.
inline int compare_series(const LaurentSeries& f, const LaurentSeries& g) {
    auto itf = f.terms().begin();
    auto itg = g.terms().begin();
    while (itf != f.terms().end() && itg != g.terms().end()) {
        if (itf->first != itg->first) {
            // the one with the smaller exponent has the (sign-bearing) lead
            bool f_first = itf->first < itg->first;
            int s = f_first ? sgn(itf->second) : -sgn(itg->second);
            return s != 0 ? s : (f_first ? 1 : -1);
        }
        if (itf->second != itg->second) return itf->second < itg->second ? -1 : 1;
        ++itf, ++itg;
    }
    if (itf != f.terms().end()) return sgn(itf->second) > 0 ? 1 : -1;
    if (itg != g.terms().end()) return sgn(itg->second) > 0 ? -1 : 1;
    if (f.precision() != g.precision()) return f.precision() < g.precision() ? -1 : 1;
    return 0;
}

} // namespace ultraspec
