#pragma once

// Finitely supported vectors over the series field with the symmetric
// bilinear form <x,y> = sum x_n y_n. The residue field is formally real, so
// the sup norm satisfies |x|^2 = |<x,x>| and distances to finite-dimensional
// subspaces are attained by the orthogonal projection residual; everything
// here leans on that.

#include <map>
#include <vector>

#include "ultraspec/errors.hpp"
#include "ultraspec/laurent.hpp"
#include "ultraspec/rng.hpp"
#include "ultraspec/series_matrix.hpp"

namespace ultraspec {

class VectorC0 {
public:
    VectorC0() : ambient_(kPrecInf) {}

    explicit VectorC0(std::map<long, LaurentSeries> entries, long ambient = kPrecInf) : ambient_(ambient) {
        for (auto& [i, s] : entries) {
            if (i < 1) fail(errc::invalid_argument, "indices are 1-based");
            if (s.is_zero_to_precision()) {
                if (!s.is_exact()) ambient_ = std::min(ambient_, s.precision());
                continue;
            }
            e_.emplace(i, std::move(s));
        }
    }

    static VectorC0 unit(long i) { return VectorC0({{i, LaurentSeries(1)}}); }

    const std::map<long, LaurentSeries>& entries() const { return e_; }
    long ambient_precision() const { return ambient_; }

    LaurentSeries entry(long i) const {
        auto it = e_.find(i);
        return it == e_.end() ? LaurentSeries::zero(ambient_) : it->second;
    }

    bool is_zero_to_precision() const { return e_.empty(); }
    bool is_exact_zero() const { return e_.empty() && ambient_ >= kPrecInf; }

    friend VectorC0 operator+(const VectorC0& x, const VectorC0& y) {
        std::map<long, LaurentSeries> m = x.e_;
        for (const auto& [i, s] : y.e_) {
            auto it = m.find(i);
            if (it == m.end())
                m.emplace(i, s);
            else
                it->second = it->second + s;
        }
        return VectorC0(std::move(m), std::min(x.ambient_, y.ambient_));
    }

    friend VectorC0 operator-(const VectorC0& x, const VectorC0& y) { return x + (Rational(-1) * y); }

    friend VectorC0 operator*(const Rational& c, const VectorC0& x) {
        std::map<long, LaurentSeries> m;
        for (const auto& [i, s] : x.e_) m.emplace(i, c * s);
        return VectorC0(std::move(m), x.ambient_);
    }

    friend VectorC0 operator*(const LaurentSeries& c, const VectorC0& x) {
        std::map<long, LaurentSeries> m;
        long amb = x.ambient_;
        if (!c.is_exact_zero()) amb = std::min(amb, sat_add(c.val_lower_bound(), x.ambient_));
        for (const auto& [i, s] : x.e_) m.emplace(i, series_mul(c, s));
        return VectorC0(std::move(m), amb);
    }

    friend bool operator==(const VectorC0& x, const VectorC0& y) { return x.e_ == y.e_ && x.ambient_ == y.ambient_; }

private:
    std::map<long, LaurentSeries> e_;
    long ambient_; // unstored entries vanish below this precision
};

inline LaurentSeries inner(const VectorC0& x, const VectorC0& y) {
    LaurentSeries acc;
    for (const auto& [i, s] : x.entries()) {
        auto it = y.entries().find(i);
        if (it != y.entries().end()) acc = acc + series_mul(s, it->second);
    }
    // cross terms with unstored entries are bounded by the ambient precisions
    long cap = kPrecInf;
    long xv = kPrecInf, yv = kPrecInf;
    for (const auto& [i, s] : x.entries()) xv = std::min(xv, s.val_lower_bound());
    for (const auto& [i, s] : y.entries()) yv = std::min(yv, s.val_lower_bound());
    cap = std::min(sat_add(x.ambient_precision(), yv), sat_add(y.ambient_precision(), xv));
    cap = std::min(cap, sat_add(x.ambient_precision(), y.ambient_precision()));
    return acc.with_precision(cap);
}

inline Valuation sup_norm_val(const VectorC0& x) {
    if (x.entries().empty())
        return x.ambient_precision() >= kPrecInf ? Valuation::infinite() : Valuation::unknown(x.ambient_precision());
    long v = kPrecInf;
    for (const auto& [i, s] : x.entries()) v = std::min(v, s.valuation().v);
    if (x.ambient_precision() <= v)
        fail(errc::precision_exhausted,
             "ambient precision " + std::to_string(x.ambient_precision()) + " cannot separate the sup norm at " + std::to_string(v));
    return Valuation::finite(v);
}

// |x|^2 = |<x,x>| as valuations; holds for every vector over a formally real
// residue field.
inline bool check_norm_inner(const VectorC0& x) {
    if (x.is_zero_to_precision()) fail(errc::invalid_argument, "norm identity check needs a nonzero vector");
    Valuation nv = sup_norm_val(x);
    Valuation iv = inner(x, x).valuation();
    return iv.is_finite() && nv.is_finite() && iv.v == 2 * nv.v;
}

struct OrthoBasis {
    std::vector<VectorC0> vectors;
    std::vector<LaurentSeries> self_inner;

    OrthoBasis() = default;
    OrthoBasis(std::vector<VectorC0> vs, std::vector<LaurentSeries> si)
        : vectors(std::move(vs)), self_inner(std::move(si)) {
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            if (!self_inner[i].valuation().is_finite())
                fail(errc::precision_exhausted, "basis vector " + std::to_string(i + 1) + " has no resolvable self inner product");
            for (std::size_t j = i + 1; j < vectors.size(); ++j)
                if (!inner(vectors[i], vectors[j]).is_zero_to_precision())
                    fail(errc::invalid_argument, "basis vectors " + std::to_string(i + 1) + "," + std::to_string(j + 1) + " are not orthogonal");
        }
    }

    std::size_t size() const { return vectors.size(); }
};

// Classical recursion x_i <- v_i - sum_{j<i} (<v_i,x_j>/<x_j,x_j>) x_j.
inline OrthoBasis gram_schmidt(const std::vector<VectorC0>& vs, long working_prec = kDefaultPrec) {
    std::vector<VectorC0> out;
    std::vector<LaurentSeries> self;
    for (const auto& v : vs) {
        VectorC0 x = v;
        for (std::size_t j = 0; j < out.size(); ++j) {
            LaurentSeries coef = series_mul(inner(v, out[j]), series_inv(self[j], working_prec));
            x = x - coef * out[j];
        }
        if (x.is_zero_to_precision()) {
            if (x.is_exact_zero() || x.ambient_precision() >= kPrecInf)
                fail(errc::linearly_dependent, "input vector lies in the span of its predecessors");
            fail(errc::precision_exhausted, "residual is zero to precision " + std::to_string(x.ambient_precision()));
        }
        LaurentSeries si = inner(x, x);
        if (!si.valuation().is_finite())
            fail(errc::precision_exhausted, "self inner product unresolved");
        self.push_back(si);
        out.push_back(std::move(x));
    }
    return OrthoBasis(std::move(out), std::move(self));
}

inline VectorC0 normal_projection(const OrthoBasis& b, const VectorC0& x, long working_prec = kDefaultPrec) {
    VectorC0 acc;
    for (std::size_t i = 0; i < b.size(); ++i) {
        LaurentSeries coef = series_mul(inner(x, b.vectors[i]), series_inv(b.self_inner[i], working_prec));
        acc = acc + coef * b.vectors[i];
    }
    return acc;
}

// Matrix of the normal projection onto span(b) over coordinates 1..dim.
inline SeriesMatrix projection_matrix(const OrthoBasis& b, long dim, long working_prec = kDefaultPrec) {
    SeriesMatrix p = sm_zero(static_cast<std::size_t>(dim), static_cast<std::size_t>(dim));
    for (std::size_t k = 0; k < b.size(); ++k) {
        LaurentSeries inv_norm = series_inv(b.self_inner[k], working_prec);
        for (const auto& [i, si] : b.vectors[k].entries())
            for (const auto& [j, sj] : b.vectors[k].entries()) {
                if (i > dim || j > dim) fail(errc::invalid_argument, "projection support exceeds the matrix dimension");
                p[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)] =
                    p[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)] + series_mul(series_mul(si, sj), inv_norm);
            }
    }
    return p;
}

// Ultrametric distance from x to span(vs): the projection residual attains it
// because the residue field is formally real.
inline Valuation dist_to_span(const VectorC0& x, const std::vector<VectorC0>& vs, long working_prec = kDefaultPrec) {
    if (vs.empty()) return sup_norm_val(x);
    OrthoBasis b = gram_schmidt(vs, working_prec);
    VectorC0 residual = x - normal_projection(b, x, working_prec);
    return sup_norm_val(residual);
}

// Product of successive distances, as a valuation sum; Infinite on dependence.
inline Valuation volume(const std::vector<VectorC0>& vs, long working_prec = kDefaultPrec) {
    if (vs.empty()) fail(errc::invalid_argument, "volume of an empty tuple is not defined");
    std::vector<VectorC0> ortho;
    std::vector<LaurentSeries> self;
    long total = 0;
    for (const auto& v : vs) {
        VectorC0 x = v;
        for (std::size_t j = 0; j < ortho.size(); ++j) {
            LaurentSeries coef = series_mul(inner(v, ortho[j]), series_inv(self[j], working_prec));
            x = x - coef * ortho[j];
        }
        Valuation d = x.is_zero_to_precision()
                          ? (x.is_exact_zero() ? Valuation::infinite() : Valuation::unknown(x.ambient_precision()))
                          : sup_norm_val(x);
        if (d.is_infinite()) return Valuation::infinite();
        if (d.is_unknown()) return Valuation::unknown(total + d.v);
        total += d.v;
        self.push_back(inner(x, x));
        ortho.push_back(std::move(x));
    }
    return Valuation::finite(total);
}

namespace detail {

inline Rational magnitude(const Valuation& v) {
    if (v.is_infinite()) return Rational(0);
    return pow2_rational(-v.v); // rho = 1/2
}

} // namespace detail

// t-orthogonality: exact decision through projections at t = 1, grid plus
// randomized refutation sampling otherwise (sound for refutation; the
// universal quantifier over K is not enumerable).
inline bool is_t_orthogonal(const std::vector<VectorC0>& vs, const Rational& t_param, long trials = 64,
                            std::uint64_t seed = 2024) {
    if (t_param <= 0 || t_param > 1) fail(errc::invalid_argument, "t must lie in (0, 1]");
    for (const auto& v : vs)
        if (v.is_zero_to_precision()) fail(errc::invalid_argument, "t-orthogonality needs nonzero vectors");
    std::size_t n = vs.size();
    if (n == 1) return true;

    if (t_param == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<VectorC0> others;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) others.push_back(vs[j]);
            Valuation d = dist_to_span(vs[i], others);
            Valuation norm = sup_norm_val(vs[i]);
            if (!(d.is_finite() && norm.is_finite() && d.v == norm.v)) return false;
        }
        return true;
    }

    std::vector<LaurentSeries> pool{
        LaurentSeries(),          LaurentSeries(1),           LaurentSeries(-1),
        LaurentSeries::t(1),      Rational(-1) * LaurentSeries::t(1),
        LaurentSeries::t(-1),     Rational(-1) * LaurentSeries::t(-1),
        LaurentSeries(1) + LaurentSeries::t(1), Rational(-1) * (LaurentSeries(1) + LaurentSeries::t(1))};

    auto violates = [&](const std::vector<LaurentSeries>& lambda) {
        VectorC0 sum;
        Valuation maxterm = Valuation::infinite();
        for (std::size_t i = 0; i < n; ++i) {
            if (lambda[i].is_exact_zero()) continue;
            sum = sum + lambda[i] * vs[i];
            Valuation term = sup_norm_val(lambda[i] * vs[i]);
            if (term.is_finite() && (maxterm.is_infinite() || term.v < maxterm.v)) maxterm = term;
        }
        if (maxterm.is_infinite()) return false; // all-zero tuple
        Rational lhs = t_param * detail::magnitude(maxterm);
        Rational rhs;
        if (sum.is_exact_zero())
            rhs = 0;
        else if (sum.is_zero_to_precision())
            rhs = detail::magnitude(Valuation::finite(sum.ambient_precision())); // upper bound
        else
            rhs = detail::magnitude(sup_norm_val(sum));
        return lhs > rhs;
    };

    // full grid for small families
    if (n <= 4) {
        std::vector<std::size_t> idx(n, 0);
        while (true) {
            std::vector<LaurentSeries> lambda;
            for (std::size_t i = 0; i < n; ++i) lambda.push_back(pool[idx[i]]);
            if (violates(lambda)) return false;
            std::size_t k = 0;
            while (k < n && ++idx[k] == pool.size()) idx[k++] = 0;
            if (k == n) break;
        }
    }
    Rng rng(seed);
    for (long trial = 0; trial < trials; ++trial) {
        std::vector<LaurentSeries> lambda;
        for (std::size_t i = 0; i < n; ++i)
            lambda.push_back(LaurentSeries::monomial(rng.small_rational(3, 2), rng.uniform(-2, 2)));
        if (violates(lambda)) return false;
    }
    return true;
}

} // namespace ultraspec
