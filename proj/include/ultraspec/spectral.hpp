#pragma once

// Spectral decomposition of self-adjoint operators: block eigenpairs through
// the orthogonal-columns diagonalization (eigenvalue = diagonal over the
// column gram), tail eigenpairs read off the diagonal, levels grouped by
// magnitude. Verdicts are small value objects so suites can count and report
// them uniformly; each records the residual bound it actually certified.

#include <algorithm>
#include <string>
#include <vector>

#include "ultraspec/diagonalize.hpp"
#include "ultraspec/operator_c0.hpp"
#include "ultraspec/vector_c0.hpp"

namespace ultraspec {

struct EigenPair {
    LaurentSeries lambda;
    std::vector<VectorC0> vectors; // pairwise orthogonal basis of the eigenspace
    SpectrumReport::Source source = SpectrumReport::Source::block;
};

struct SpectralDecomposition {
    std::vector<long> level_vals;               // strictly increasing valuations of |lambda| levels
    std::vector<std::vector<EigenPair>> groups; // per level
    long precision = 0;                         // certificate carried by the eigen data

    std::vector<std::pair<LaurentSeries, VectorC0>> flat() const {
        std::vector<std::pair<LaurentSeries, VectorC0>> out;
        for (const auto& level : groups)
            for (const auto& pair : level)
                for (const auto& v : pair.vectors) out.emplace_back(pair.lambda, v);
        return out;
    }

    std::size_t eigenvector_count() const {
        std::size_t n = 0;
        for (const auto& level : groups)
            for (const auto& pair : level) n += pair.vectors.size();
        return n;
    }
};

inline std::vector<EigenPair> eigen_decompose(const OperatorC0& t, long n_target) {
    if (!is_self_adjoint(t)) fail(errc::invalid_argument, "operator is not self-adjoint");
    std::vector<EigenPair> pairs;
    long cert = n_target;

    bool block_nonzero = false;
    for (const auto& row : t.block())
        for (const auto& e : row)
            if (!e.is_zero_to_precision()) block_nonzero = true;

    if (block_nonzero) {
        SymSeriesMatrix a(t.block());
        DiagResult res = diagonalize(a, n_target, FactorSet::trivial(), DiagMode::orthogonal_columns);
        cert = std::min(cert, res.certificate());
        std::size_t d = t.dim();
        for (std::size_t j = 0; j < d; ++j) {
            LaurentSeries lambda = (1 / res.gram[j]) * res.d[j][j];
            if (lambda.is_zero_mod(n_target) || lambda.is_zero_to_precision()) continue; // nonzero spectrum only
            std::map<long, LaurentSeries> entries;
            for (std::size_t i = 0; i < d; ++i)
                if (!res.u[i][j].is_zero_to_precision()) entries[static_cast<long>(i + 1)] = res.u[i][j];
            VectorC0 v(std::move(entries));
            bool merged = false;
            for (auto& p : pairs)
                if (p.source == SpectrumReport::Source::block && equal_mod(p.lambda, lambda, cert)) {
                    p.vectors.push_back(v);
                    merged = true;
                    break;
                }
            if (!merged) pairs.push_back({lambda, {v}, SpectrumReport::Source::block});
        }
    }
    for (const auto& [idx, e] : t.tail())
        pairs.push_back({e, {VectorC0::unit(idx)}, SpectrumReport::Source::tail});

    auto lt = [](const EigenPair& a, const EigenPair& b) {
        long va = a.lambda.valuation().v, vb = b.lambda.valuation().v;
        if (va != vb) return va < vb;
        return compare_series(a.lambda, b.lambda) < 0;
    };
    std::stable_sort(pairs.begin(), pairs.end(), lt);
    return pairs;
}

inline SpectralDecomposition spectral_decompose(const OperatorC0& t, long n_target) {
    std::vector<EigenPair> pairs = eigen_decompose(t, n_target);
    SpectralDecomposition dec;
    dec.precision = n_target;
    for (auto& p : pairs) {
        long v = p.lambda.valuation().v;
        if (dec.level_vals.empty() || dec.level_vals.back() != v) {
            dec.level_vals.push_back(v);
            dec.groups.emplace_back();
        }
        dec.groups.back().push_back(std::move(p));
    }
    return dec;
}

inline SpectrumReport spectrum_report(const SpectralDecomposition& dec) {
    SpectrumReport rep;
    for (const auto& level : dec.groups)
        for (const auto& p : level)
            rep.items.push_back({p.lambda, static_cast<int>(p.vectors.size()), p.source});
    return rep;
}

struct Verdict {
    bool pass = false;
    long residual_bound = kPrecInf; // minimal residual valuation observed
    std::string detail;
};

// Reconstruction identity: T(x) equals the level sum over the decomposition
// for every probe, entrywise below `bound`.
inline Verdict verify_reconstruction(const OperatorC0& t, const SpectralDecomposition& dec,
                                     const std::vector<VectorC0>& probes, long bound) {
    Verdict out;
    out.pass = true;
    auto flat = dec.flat();
    std::vector<LaurentSeries> inv_norms;
    for (const auto& [lambda, x] : flat) inv_norms.push_back(series_inv(inner(x, x), bound + 8));
    for (const auto& probe : probes) {
        VectorC0 rhs;
        for (std::size_t k = 0; k < flat.size(); ++k) {
            LaurentSeries coef = series_mul(series_mul(inner(probe, flat[k].second), inv_norms[k]), flat[k].first);
            rhs = rhs + coef * flat[k].second;
        }
        VectorC0 diff = apply(t, probe) - rhs;
        for (const auto& [i, e] : diff.entries()) {
            Valuation v = e.valuation();
            long b = v.is_infinite() ? kPrecInf : v.v;
            out.residual_bound = std::min(out.residual_bound, b);
            if (!e.is_zero_mod(bound)) {
                out.pass = false;
                out.detail = "probe residual at coordinate " + std::to_string(i);
            }
        }
    }
    return out;
}

// Norm-versus-spectrum: |T| equals max |lambda| (valuation equality), and the
// weaker shifted inequality is reported separately.
inline Verdict verify_norm_max(const OperatorC0& t, const SpectralDecomposition& dec) {
    Verdict out;
    Valuation nt = op_norm_val(t);
    if (nt.is_infinite() || dec.level_vals.empty()) {
        out.pass = nt.is_infinite() && dec.level_vals.empty();
        out.detail = out.pass ? "vacuous: zero operator" : "empty spectrum for a nonzero operator";
        return out;
    }
    long min_lambda_val = dec.level_vals.front();
    bool equality = nt.is_finite() && nt.v == min_lambda_val;
    bool weak = nt.is_finite() && nt.v >= min_lambda_val - 1; // uniformizer shift
    out.pass = equality && weak;
    out.residual_bound = nt.is_finite() ? nt.v - min_lambda_val : kPrecInf;
    out.detail = equality ? "norm equals the top level" : "norm/spectrum gap " + std::to_string(nt.v - min_lambda_val);
    return out;
}

// Cross-eigenvalue orthogonality of all eigenvectors.
inline Verdict verify_eigenspace_orthogonality(const SpectralDecomposition& dec) {
    Verdict out;
    out.pass = true;
    auto flat = dec.flat();
    for (std::size_t a = 0; a < flat.size(); ++a)
        for (std::size_t b = a + 1; b < flat.size(); ++b) {
            LaurentSeries ip = inner(flat[a].second, flat[b].second);
            Valuation v = ip.valuation();
            if (v.is_finite()) out.residual_bound = std::min(out.residual_bound, v.v);
            if (!ip.is_zero_to_precision()) {
                out.pass = false;
                out.detail = "pair (" + std::to_string(a + 1) + "," + std::to_string(b + 1) + ")";
            }
        }
    return out;
}

// Eigenvector residuals: T v = lambda v below the bound.
inline Verdict verify_eigenpairs(const OperatorC0& t, const SpectralDecomposition& dec, long bound) {
    Verdict out;
    out.pass = true;
    for (const auto& level : dec.groups)
        for (const auto& p : level)
            for (const auto& v : p.vectors) {
                VectorC0 diff = apply(t, v) - p.lambda * v;
                for (const auto& [i, e] : diff.entries()) {
                    Valuation val = e.valuation();
                    if (val.is_finite()) out.residual_bound = std::min(out.residual_bound, val.v);
                    if (!e.is_zero_mod(bound)) out.pass = false;
                }
            }
    return out;
}

// Invariant-subspace projection commutes with the operator; also checks the
// complement stays invariant on canonical probes. NotInvariant when T does
// not map span(basis) into itself.
inline Verdict verify_commuting_projection(const OperatorC0& t, const OrthoBasis& basis, long working_prec = kDefaultPrec) {
    for (const auto& v : basis.vectors) {
        VectorC0 image = apply(t, v);
        VectorC0 residual = image - normal_projection(basis, image, working_prec);
        if (!residual.is_zero_to_precision())
            fail(errc::not_invariant, "operator image leaves the subspace");
    }
    long m = t.max_active_index();
    for (const auto& v : basis.vectors)
        if (!v.entries().empty()) m = std::max(m, v.entries().rbegin()->first);
    SeriesMatrix p = projection_matrix(basis, m, working_prec);
    SeriesMatrix td = sm_zero(static_cast<std::size_t>(m), static_cast<std::size_t>(m));
    {
        SeriesMatrix emb = dense_embedding(t);
        for (std::size_t i = 0; i < emb.size(); ++i)
            for (std::size_t j = 0; j < emb.size(); ++j) td[i][j] = emb[i][j];
    }
    Verdict out;
    out.pass = true;
    SeriesMatrix tp = sm_mul(td, p);
    SeriesMatrix pt = sm_mul(p, td);
    for (std::size_t i = 0; i < tp.size(); ++i)
        for (std::size_t j = 0; j < tp.size(); ++j) {
            LaurentSeries diff = tp[i][j] - pt[i][j];
            Valuation v = diff.valuation();
            if (v.is_finite()) out.residual_bound = std::min(out.residual_bound, v.v);
            if (!diff.is_zero_to_precision()) {
                out.pass = false;
                out.detail = "commutator entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
            }
        }
    // complement probes: P T (1 - P) e_j vanishes
    for (long j = 1; j <= m; ++j) {
        VectorC0 e = VectorC0::unit(j);
        VectorC0 y = e - normal_projection(basis, e, working_prec);
        VectorC0 back = normal_projection(basis, apply(t, y), working_prec);
        if (!back.is_zero_to_precision()) {
            out.pass = false;
            out.detail = "complement probe " + std::to_string(j);
        }
    }
    return out;
}

// |T Q_n| valuations after removing each level; strictly increasing and
// bounded below by the next level magnitude.
struct TailProjectionReport {
    std::vector<Valuation> norms;
    bool pass = false;
};

inline TailProjectionReport tail_projection_norms(const OperatorC0& t, const SpectralDecomposition& dec,
                                                  long working_prec = kDefaultPrec) {
    TailProjectionReport rep;
    rep.pass = true;
    long m = t.max_active_index();
    SeriesMatrix td = dense_embedding(t);
    std::vector<VectorC0> collected;
    for (std::size_t level = 0; level < dec.groups.size(); ++level) {
        for (const auto& p : dec.groups[level])
            for (const auto& v : p.vectors) collected.push_back(v);
        OrthoBasis basis = gram_schmidt(collected, working_prec); // already orthogonal; re-derives self inners
        SeriesMatrix proj = projection_matrix(basis, m, working_prec);
        SeriesMatrix q = sm_sub(sm_identity(static_cast<std::size_t>(m)), proj);
        SeriesMatrix tq = sm_mul(td, q);
        long minval = kPrecInf;
        long minprec = kPrecInf;
        bool any = false;
        for (const auto& row : tq)
            for (const auto& e : row) {
                Valuation v = e.valuation();
                if (v.is_finite()) {
                    minval = std::min(minval, v.v);
                    any = true;
                } else if (v.is_unknown()) {
                    minprec = std::min(minprec, v.v);
                }
            }
        Valuation norm = any ? Valuation::finite(minval)
                             : (minprec >= kPrecInf ? Valuation::infinite() : Valuation::unknown(minprec));
        if (level + 1 < dec.level_vals.size()) {
            long next = dec.level_vals[level + 1];
            if (norm.is_finite() && norm.v < next) rep.pass = false;
        } else if (norm.is_finite()) {
            rep.pass = false; // after the last level nothing of T may remain visible
        }
        if (!rep.norms.empty() && norm.is_finite() && rep.norms.back().is_finite() &&
            norm.v <= rep.norms.back().v)
            rep.pass = false;
        rep.norms.push_back(norm);
    }
    return rep;
}

// Level magnitudes strictly decrease; tails witness the decay.
inline Verdict verify_eigs_tend_to_zero(const SpectralDecomposition& dec) {
    Verdict out;
    out.pass = true;
    for (std::size_t i = 1; i < dec.level_vals.size(); ++i)
        if (dec.level_vals[i] <= dec.level_vals[i - 1]) out.pass = false;
    out.detail = std::to_string(dec.level_vals.size()) + " levels";
    return out;
}

struct NormalizedDecomposition {
    SpectralDecomposition dec; // with unit self inner products
    std::vector<std::pair<std::size_t, std::string>> failures; // flat index -> reason
};

// Unit-normalized refinement: divides each eigenvector by the Hensel square
// root of its self inner product; vectors whose norm has no square root in
// the field are reported and left out of the normalized family.
inline NormalizedDecomposition normalized_decomposition(const SpectralDecomposition& dec, long working_prec = kDefaultPrec) {
    NormalizedDecomposition out;
    out.dec.level_vals.clear();
    out.dec.precision = dec.precision;
    std::size_t flat_index = 0;
    for (std::size_t level = 0; level < dec.groups.size(); ++level) {
        std::vector<EigenPair> normalized_level;
        for (const auto& p : dec.groups[level]) {
            EigenPair np{p.lambda, {}, p.source};
            for (const auto& v : p.vectors) {
                ++flat_index;
                try {
                    LaurentSeries root = hensel_sqrt(inner(v, v), working_prec);
                    np.vectors.push_back(series_inv(root, working_prec) * v);
                } catch (const error& e) {
                    out.failures.emplace_back(flat_index, e.what());
                }
            }
            if (!np.vectors.empty()) normalized_level.push_back(std::move(np));
        }
        if (!normalized_level.empty()) {
            out.dec.level_vals.push_back(dec.level_vals[level]);
            out.dec.groups.push_back(std::move(normalized_level));
        }
    }
    return out;
}

// Closed-form resolvent (I - lambda T)^{-1} through the decomposition, on the
// dense active range. NotInvertible surfaces when lambda hits a reciprocal
// eigenvalue.
inline SeriesMatrix resolvent_via_spectrum(const OperatorC0& t, const SpectralDecomposition& dec,
                                           const LaurentSeries& lambda, long working_prec = kDefaultPrec) {
    long m = t.max_active_index();
    SeriesMatrix r = sm_identity(static_cast<std::size_t>(m));
    for (const auto& [mu, x] : dec.flat()) {
        LaurentSeries prod = series_mul(lambda, mu);
        LaurentSeries denom = LaurentSeries(1) - prod;
        if (denom.is_zero_to_precision())
            fail(errc::not_invertible, "lambda reaches the reciprocal of an eigenvalue");
        LaurentSeries coef = series_mul(prod, series_inv(denom, working_prec));
        LaurentSeries inv_norm = series_inv(inner(x, x), working_prec);
        for (const auto& [i, xi] : x.entries())
            for (const auto& [j, xj] : x.entries())
                r[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)] =
                    r[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)] +
                    series_mul(series_mul(coef, inv_norm), series_mul(xi, xj));
    }
    return r;
}

// Random self-adjoint compactoid instance: Cayley-solvable block plus a
// strictly decaying diagonal tail.
inline OperatorC0 gen_test_operator(std::size_t n_block, std::uint64_t seed, long t_depth, long tail_len,
                                    long prec = kPrecInf) {
    Rng rng(seed);
    SeriesMatrix block = n_block > 0 ? gen_test_matrix(n_block, rng.next(), t_depth, prec).entries
                                     : sm_zero(0, 0);
    std::vector<std::pair<long, LaurentSeries>> tail;
    long idx = static_cast<long>(n_block);
    long val = rng.uniform(1, 2);
    for (long k = 0; k < tail_len; ++k) {
        idx += rng.uniform(1, 2);
        tail.emplace_back(idx, LaurentSeries::monomial(rng.nonzero_rational(), val, prec));
        val += rng.uniform(1, 2);
    }
    return OperatorC0(std::move(block), std::move(tail));
}

// Canonical probes covering the active coordinates plus randomized ones.
inline std::vector<VectorC0> reconstruction_probes(const OperatorC0& t, long randoms, std::uint64_t seed) {
    std::vector<VectorC0> probes;
    long m = t.max_active_index();
    for (long i = 1; i <= m; ++i) probes.push_back(VectorC0::unit(i));
    Rng rng(seed);
    for (long k = 0; k < randoms; ++k) {
        std::map<long, LaurentSeries> e;
        long cnt = rng.uniform(1, std::max(1L, std::min(4L, m)));
        for (long j = 0; j < cnt; ++j) {
            std::map<long, Rational> terms;
            long nt = rng.uniform(1, 2);
            for (long s = 0; s < nt; ++s) terms[rng.uniform(0, 3)] = rng.nonzero_rational();
            e[rng.uniform(1, std::max(1L, m + 1))] = LaurentSeries::from_terms(std::move(terms));
        }
        probes.emplace_back(std::move(e));
    }
    return probes;
}

} // namespace ultraspec
