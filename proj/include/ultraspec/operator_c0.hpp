#pragma once

// Operators on c_0 at desk scale: a finite matrix block plus an optional
// diagonal tail at higher indices whose valuations strictly increase (the
// minimal structure that keeps the compactoid criterion checkable without
// limits and makes eigenvalues tend to zero by construction).

#include <optional>
#include <utility>
#include <vector>

#include "ultraspec/errors.hpp"
#include "ultraspec/laurent.hpp"
#include "ultraspec/series_matrix.hpp"
#include "ultraspec/vector_c0.hpp"

namespace ultraspec {

class OperatorC0 {
public:
    OperatorC0() = default;

    OperatorC0(SeriesMatrix block, std::vector<std::pair<long, LaurentSeries>> tail = {})
        : block_(std::move(block)), tail_(std::move(tail)) {
        for (const auto& row : block_)
            if (row.size() != block_.size()) fail(errc::invalid_argument, "operator block must be square");
        long prev_index = static_cast<long>(block_.size());
        std::optional<long> prev_val;
        for (auto it = tail_.begin(); it != tail_.end();) {
            auto& [idx, entry] = *it;
            if (entry.is_zero_to_precision()) {
                it = tail_.erase(it);
                continue;
            }
            if (idx <= prev_index)
                fail(errc::invalid_argument, "tail indices must exceed the block and increase");
            Valuation v = entry.valuation();
            if (prev_val && v.v <= *prev_val)
                fail(errc::invalid_argument, "tail valuations must strictly increase");
            prev_val = v.v;
            prev_index = idx;
            ++it;
        }
    }

    static OperatorC0 zero(std::size_t dim) { return OperatorC0(sm_zero(dim, dim)); }

    const SeriesMatrix& block() const { return block_; }
    const std::vector<std::pair<long, LaurentSeries>>& tail() const { return tail_; }
    std::size_t dim() const { return block_.size(); }

    long max_active_index() const {
        long m = static_cast<long>(dim());
        if (!tail_.empty()) m = std::max(m, tail_.back().first);
        return m;
    }

    LaurentSeries entry(long i, long j) const {
        long d = static_cast<long>(dim());
        if (i <= d && j <= d) return block_[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)];
        if (i == j)
            for (const auto& [idx, s] : tail_)
                if (idx == i) return s;
        return LaurentSeries();
    }

private:
    SeriesMatrix block_;
    std::vector<std::pair<long, LaurentSeries>> tail_;
};

// Dense square embedding on coordinates 1..max_active_index.
inline SeriesMatrix dense_embedding(const OperatorC0& t) {
    long m = t.max_active_index();
    if (m > 4096) fail(errc::invalid_argument, "active index range too large for a dense embedding");
    SeriesMatrix a = sm_zero(static_cast<std::size_t>(m), static_cast<std::size_t>(m));
    for (std::size_t i = 0; i < t.dim(); ++i)
        for (std::size_t j = 0; j < t.dim(); ++j) a[i][j] = t.block()[i][j];
    for (const auto& [idx, s] : t.tail()) a[static_cast<std::size_t>(idx - 1)][static_cast<std::size_t>(idx - 1)] = s;
    return a;
}

// Row-sup decay criterion on raw data: rows beyond the block must have
// strictly increasing valuations. A constant raw diagonal fails.
inline bool compactoid_row_criterion(const std::vector<Valuation>& row_sups, std::size_t block_rows) {
    std::optional<long> prev;
    for (std::size_t i = block_rows; i < row_sups.size(); ++i) {
        const Valuation& v = row_sups[i];
        if (v.is_infinite()) continue;
        if (prev && v.v <= *prev) return false;
        prev = v.v;
    }
    return true;
}

// Recomputes the criterion from raw entries; true for every valid value of
// the type (the representation enforces compactoidity).
inline bool is_compactoid(const OperatorC0& t) {
    std::vector<Valuation> sups;
    for (std::size_t i = 0; i < t.dim(); ++i) {
        long v = kPrecInf;
        bool any = false;
        for (std::size_t j = 0; j < t.dim(); ++j) {
            Valuation ev = t.block()[i][j].valuation();
            if (ev.is_finite()) {
                v = std::min(v, ev.v);
                any = true;
            }
        }
        sups.push_back(any ? Valuation::finite(v) : Valuation::infinite());
    }
    for (const auto& [idx, s] : t.tail()) sups.push_back(s.valuation());
    return compactoid_row_criterion(sups, t.dim());
}

inline OperatorC0 adjoint(const OperatorC0& t) { return OperatorC0(sm_transpose(t.block()), t.tail()); }

inline bool is_self_adjoint(const OperatorC0& t) {
    for (std::size_t i = 0; i < t.dim(); ++i)
        for (std::size_t j = i + 1; j < t.dim(); ++j)
            if (!(t.block()[i][j] - t.block()[j][i]).is_zero_to_precision()) return false;
    return true;
}

// sup |entry| as a valuation; for c_0 with the canonical basis the operator
// norm is the max entry magnitude.
inline Valuation op_norm_val(const OperatorC0& t) {
    long v = kPrecInf;
    long unknown = kPrecInf;
    bool any = false;
    auto feed = [&](const LaurentSeries& s) {
        Valuation sv = s.valuation();
        if (sv.is_finite()) {
            v = std::min(v, sv.v);
            any = true;
        } else if (sv.is_unknown()) {
            unknown = std::min(unknown, sv.v);
        }
    };
    for (const auto& row : t.block())
        for (const auto& e : row) feed(e);
    for (const auto& [idx, s] : t.tail()) feed(s);
    if (!any) return unknown >= kPrecInf ? Valuation::infinite() : Valuation::unknown(unknown);
    if (unknown <= v)
        fail(errc::precision_exhausted, "an unresolved entry could dominate the norm");
    return Valuation::finite(v);
}

inline VectorC0 apply(const OperatorC0& t, const VectorC0& x) {
    std::map<long, LaurentSeries> out;
    long d = static_cast<long>(t.dim());
    for (long i = 1; i <= d; ++i) {
        LaurentSeries acc;
        for (const auto& [j, xj] : x.entries()) {
            if (j > d) continue;
            acc = acc + series_mul(t.block()[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)], xj);
        }
        if (!acc.is_zero_to_precision()) out[i] = acc;
    }
    for (const auto& [idx, s] : t.tail()) {
        auto it = x.entries().find(idx);
        if (it != x.entries().end()) {
            LaurentSeries val = series_mul(s, it->second);
            if (!val.is_zero_to_precision()) out[idx] = val;
        }
    }
    return VectorC0(std::move(out), x.ambient_precision());
}

// Composition: blocks (and any tail entries they overlap) multiply as
// matrices on the common dense range; the surviving tails beyond it multiply
// entrywise on the diagonal.
inline OperatorC0 compose(const OperatorC0& s, const OperatorC0& t) {
    long d = static_cast<long>(std::max(s.dim(), t.dim()));
    SeriesMatrix sb = sm_zero(static_cast<std::size_t>(d), static_cast<std::size_t>(d));
    SeriesMatrix tb = sb;
    std::vector<std::pair<long, LaurentSeries>> s_rest, t_rest;
    auto fill = [d](const OperatorC0& op, SeriesMatrix& m, std::vector<std::pair<long, LaurentSeries>>& rest) {
        for (std::size_t i = 0; i < op.dim(); ++i)
            for (std::size_t j = 0; j < op.dim(); ++j) m[i][j] = op.block()[i][j];
        for (const auto& [idx, e] : op.tail()) {
            if (idx <= d)
                m[static_cast<std::size_t>(idx - 1)][static_cast<std::size_t>(idx - 1)] = e;
            else
                rest.emplace_back(idx, e);
        }
    };
    fill(s, sb, s_rest);
    fill(t, tb, t_rest);
    SeriesMatrix prod = sm_mul(sb, tb);
    std::vector<std::pair<long, LaurentSeries>> tail;
    auto it = t_rest.begin();
    for (const auto& [idx, e] : s_rest) {
        while (it != t_rest.end() && it->first < idx) ++it;
        if (it != t_rest.end() && it->first == idx) tail.emplace_back(idx, series_mul(e, it->second));
    }
    return OperatorC0(std::move(prod), std::move(tail));
}

// (valuation of T^k)/k for k = 1..n; nullopt marks an exactly vanishing power.
inline std::vector<std::optional<Rational>> power_norm_seq(const OperatorC0& t, long n) {
    if (n < 1) fail(errc::invalid_argument, "need n >= 1");
    std::vector<std::optional<Rational>> out;
    OperatorC0 p = t;
    for (long k = 1; k <= n; ++k) {
        Valuation v = op_norm_val(p);
        if (v.is_finite())
            out.emplace_back(rat(v.v, k));
        else
            out.emplace_back(std::nullopt);
        if (k < n) p = compose(p, t);
    }
    return out;
}

struct ResolventQuery {
    LaurentSeries lambda;
    long terms = 1;
};

// Partial Neumann sum of (I - lambda T)^{-1} on the active coordinates; the
// identity outside the active range is implicit (and keeps valuation 0, which
// the embedded diagonal already carries).
inline OperatorC0 neumann_resolvent(const OperatorC0& t, const ResolventQuery& q) {
    if (q.terms < 1) fail(errc::invalid_argument, "need at least one term");
    long vt = op_norm_val(t).lower_bound();
    long vl = q.lambda.val_lower_bound();
    if (sat_add(vt, vl) <= 0)
        fail(errc::not_contractive, "|lambda T| >= 1; use the spectral closed form instead");
    SeriesMatrix a = dense_embedding(t);
    std::size_t m = a.size();
    for (auto& row : a)
        for (auto& e : row) e = series_mul(q.lambda, e);
    SeriesMatrix acc = sm_identity(m);
    for (long k = 1; k < q.terms; ++k) {
        acc = sm_mul(a, acc);
        for (std::size_t i = 0; i < m; ++i) acc[i][i] = acc[i][i] + LaurentSeries(1);
    }
    return OperatorC0(std::move(acc));
}

// Top-left corner: entries with both indices <= n.
inline OperatorC0 truncate(const OperatorC0& t, long n) {
    if (n < 1) fail(errc::invalid_argument, "need n >= 1");
    long d = static_cast<long>(t.dim());
    if (n < d) {
        SeriesMatrix b = sm_zero(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
        for (long i = 0; i < n; ++i)
            for (long j = 0; j < n; ++j) b[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                t.block()[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        return OperatorC0(std::move(b));
    }
    std::vector<std::pair<long, LaurentSeries>> tail;
    for (const auto& [idx, e] : t.tail())
        if (idx <= n) tail.emplace_back(idx, e);
    return OperatorC0(t.block(), std::move(tail));
}

// Valuation of sup over entries with either index beyond n (the truncation
// error |T - T_n|).
inline Valuation norm_val_beyond(const OperatorC0& t, long n) {
    long v = kPrecInf;
    bool any = false;
    long d = static_cast<long>(t.dim());
    for (long i = 1; i <= d; ++i)
        for (long j = 1; j <= d; ++j) {
            if (i <= n && j <= n) continue;
            Valuation ev = t.block()[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)].valuation();
            if (ev.is_finite()) {
                v = std::min(v, ev.v);
                any = true;
            }
        }
    for (const auto& [idx, e] : t.tail())
        if (idx > n) {
            Valuation ev = e.valuation();
            if (ev.is_finite()) {
                v = std::min(v, ev.v);
                any = true;
            }
        }
    return any ? Valuation::finite(v) : Valuation::infinite();
}

struct SpectrumReport {
    enum class Source { block, tail };
    struct Item {
        LaurentSeries lambda;
        int multiplicity = 1;
        Source source = Source::block;
    };
    std::vector<Item> items; // sorted by decreasing magnitude (increasing valuation)
};

} // namespace ultraspec
