#pragma once

// Appendix instrumentation: the max-modulus identity for analytic functions
// on closed balls, volume-ratio estimates Delta_n, perturbation stability of
// volumes, and resolvent boundedness scans over two valuation shells.

#include <algorithm>
#include <string>
#include <vector>

#include "ultraspec/operator_c0.hpp"
#include "ultraspec/spectral.hpp"
#include "ultraspec/vector_c0.hpp"

namespace ultraspec {

struct AnalyticSeries {
    std::vector<VectorC0> coefficients; // a_0, ..., a_m
    long radius_val = 0;                // r = rho^radius_val
};

inline VectorC0 analytic_eval(const AnalyticSeries& f, const LaurentSeries& lambda) {
    VectorC0 acc;
    LaurentSeries power(1);
    for (const auto& a : f.coefficients) {
        acc = acc + power * a;
        power = series_mul(power, lambda);
    }
    return acc;
}

// min_n (val(a_n) + n * v_r): the valuation form of max_n |a_n| r^n.
inline Valuation analytic_sup_val(const AnalyticSeries& f) {
    long best = kPrecInf;
    bool any = false;
    for (std::size_t n = 0; n < f.coefficients.size(); ++n) {
        if (f.coefficients[n].is_zero_to_precision()) continue;
        Valuation v = sup_norm_val(f.coefficients[n]);
        best = std::min(best, v.v + static_cast<long>(n) * f.radius_val);
        any = true;
    }
    return any ? Valuation::finite(best) : Valuation::infinite();
}

struct MaxModulusVerdict {
    bool upper_ok = true;      // every sample stayed below the sup
    Valuation sup;             // the claimed supremum valuation
    bool attained = false;     // some c in 1..grid achieved it at c * t^{v_r}
    long witness_c = 0;
    std::string note;          // set when no witness was found
};

// Ultrametric upper bound on samples plus a witness search over integer
// residue representatives; failure to find a witness is reported, not fatal
// (equality needs a nonvanishing residue polynomial, and every tested
// representative might be one of its roots).
inline MaxModulusVerdict analytic_max_modulus(const AnalyticSeries& f, const std::vector<LaurentSeries>& samples,
                                              long grid = 8) {
    MaxModulusVerdict out;
    out.sup = analytic_sup_val(f);
    for (const auto& lambda : samples) {
        if (!lambda.is_zero_to_precision() && lambda.valuation().v < f.radius_val)
            fail(errc::invalid_argument, "sample lies outside the ball");
        VectorC0 val = analytic_eval(f, lambda);
        Valuation v = val.is_zero_to_precision()
                          ? (val.is_exact_zero() ? Valuation::infinite() : Valuation::unknown(val.ambient_precision()))
                          : sup_norm_val(val);
        if (out.sup.is_finite() && v.is_finite() && v.v < out.sup.v) out.upper_ok = false;
    }
    if (out.sup.is_infinite()) {
        out.attained = true; // the zero function attains its sup everywhere
        return out;
    }
    for (long c = 1; c <= grid; ++c) {
        LaurentSeries lambda = LaurentSeries::monomial(Rational(c), f.radius_val);
        VectorC0 val = analytic_eval(f, lambda);
        if (!val.is_zero_to_precision() && sup_norm_val(val).v == out.sup.v) {
            out.attained = true;
            out.witness_c = c;
            return out;
        }
    }
    out.note = "no witness among c = 1.." + std::to_string(grid) +
               "; the attaining residue polynomial vanished on every tested representative";
    return out;
}

struct DeltaEstimate {
    long n = 0;
    Valuation lower_bound; // valuation of the best volume found (Delta_n >= rho^this)
    std::vector<long> witness; // coordinate indices of the chosen unit vectors (0 marks an extra witness)
};

// Certified lower bound for Delta_n(T) by brute force over canonical unit
// tuples within the active coordinates, plus caller-supplied witnesses.
inline DeltaEstimate delta_n_estimate(const OperatorC0& t, long n, const std::vector<VectorC0>& extra_witnesses = {}) {
    if (n < 1) fail(errc::invalid_argument, "need n >= 1");
    DeltaEstimate out;
    out.n = n;
    out.lower_bound = Valuation::infinite();

    std::vector<std::pair<long, VectorC0>> images; // (source index, T e_i)
    for (long i = 1; i <= t.max_active_index(); ++i) {
        VectorC0 im = apply(t, VectorC0::unit(i));
        if (!im.is_zero_to_precision()) images.emplace_back(i, std::move(im));
    }
    for (const auto& w : extra_witnesses) {
        VectorC0 im = apply(t, w);
        if (!im.is_zero_to_precision()) images.emplace_back(0, std::move(im));
    }
    std::size_t m = images.size();
    if (m < static_cast<std::size_t>(n)) return out; // Delta_n = 0

    std::vector<std::size_t> pick;
    std::vector<long> best_witness;
    auto consider = [&](const std::vector<std::size_t>& sel) {
        std::vector<VectorC0> tuple;
        for (auto k : sel) tuple.push_back(images[k].second);
        Valuation v = volume(tuple);
        if (!v.is_finite()) return;
        if (!out.lower_bound.is_finite() || v.v < out.lower_bound.v) {
            out.lower_bound = v;
            best_witness.clear();
            for (auto k : sel) best_witness.push_back(images[k].first);
        }
    };
    // enumerate n-subsets
    std::vector<std::size_t> idx(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    while (true) {
        consider(idx);
        long k = n - 1;
        while (k >= 0 && idx[static_cast<std::size_t>(k)] == m - static_cast<std::size_t>(n - k)) --k;
        if (k < 0) break;
        ++idx[static_cast<std::size_t>(k)];
        for (std::size_t j = static_cast<std::size_t>(k) + 1; j < idx.size(); ++j) idx[j] = idx[j - 1] + 1;
    }
    out.witness = std::move(best_witness);
    return out;
}

// Hadamard-type cap: the volume of n images cannot beat the n largest entry
// magnitudes of T, i.e. its valuation is at least the sum of the n smallest
// entry valuations.
inline Valuation delta_upper_bound_val(const OperatorC0& t, long n) {
    std::vector<long> vals;
    for (const auto& row : t.block())
        for (const auto& e : row) {
            Valuation v = e.valuation();
            if (v.is_finite()) vals.push_back(v.v);
        }
    for (const auto& [idx, e] : t.tail()) {
        Valuation v = e.valuation();
        if (v.is_finite()) vals.push_back(v.v);
    }
    if (vals.size() < static_cast<std::size_t>(n)) return Valuation::infinite();
    std::sort(vals.begin(), vals.end());
    long sum = 0;
    for (long k = 0; k < n; ++k) sum += vals[static_cast<std::size_t>(k)];
    return Valuation::finite(sum);
}

struct DeltaTrend {
    struct Item {
        long n;
        Valuation bound;
        bool average_defined;
        Rational average; // bound / n when finite
    };
    std::vector<Item> items;
    bool averages_nondecreasing = true;
    bool escapes_beyond_rank = false; // bound becomes infinite past the active rank
};

inline DeltaTrend delta_trend(const OperatorC0& t, long n_max) {
    DeltaTrend out;
    bool prev_defined = false;
    Rational prev;
    for (long n = 1; n <= n_max; ++n) {
        DeltaEstimate est = delta_n_estimate(t, n);
        DeltaTrend::Item item{n, est.lower_bound, est.lower_bound.is_finite(), Rational(0)};
        if (item.average_defined) {
            item.average = rat(est.lower_bound.v, n);
            if (prev_defined && item.average < prev) out.averages_nondecreasing = false;
            prev = item.average;
            prev_defined = true;
        } else {
            out.escapes_beyond_rank = true;
        }
        out.items.push_back(std::move(item));
    }
    return out;
}

// Volume stability under perturbations strictly below the volume magnitude.
inline Verdict vol_perturbation_check(const std::vector<VectorC0>& xs, long eps_val, long trials = 32,
                                      std::uint64_t seed = 4) {
    Valuation v0 = volume(xs);
    if (!v0.is_finite()) fail(errc::invalid_argument, "volume must be finite for the stability check");
    if (eps_val <= v0.v) fail(errc::invalid_argument, "perturbation level must lie strictly below the volume");
    long max_index = 1;
    for (const auto& x : xs) {
        Valuation nv = sup_norm_val(x);
        if (!nv.is_finite() || nv.v < 0) fail(errc::invalid_argument, "vectors must lie in the unit ball");
        if (!x.entries().empty()) max_index = std::max(max_index, x.entries().rbegin()->first);
    }
    Rng rng(seed);
    Verdict out;
    out.pass = true;
    for (long trial = 0; trial < trials; ++trial) {
        std::vector<VectorC0> ys;
        for (const auto& x : xs) {
            std::map<long, LaurentSeries> pert;
            long k = rng.uniform(1, 2);
            for (long j = 0; j < k; ++j)
                pert[rng.uniform(1, max_index + 1)] =
                    LaurentSeries::monomial(rng.nonzero_rational(3, 2), eps_val + rng.uniform(0, 3));
            ys.push_back(x + VectorC0(std::move(pert)));
        }
        if (!(volume(ys) == v0)) {
            out.pass = false;
            out.detail = "volume moved on trial " + std::to_string(trial);
        }
    }
    return out;
}

struct ResolventScan {
    bool in_dt = true;
    LaurentSeries outside_witness;    // eigenvalue whose reciprocal lies in the ball
    bool blow_up_demonstrated = false;
    bool finite = true;               // no failure inside the scanned ball
    long max_norm_val = 0;            // min valuation over sampled resolvent norms (M_r = rho^this)
    struct Sample {
        LaurentSeries lambda;
        long norm_val;
        bool via_neumann_checked;
    };
    std::vector<Sample> samples;
};

// Samples |(I - lambda T)^{-1}| over two valuation shells of the ball of
// radius rho^{v_r} via the spectral closed form, cross-checked against the
// Neumann partial sum where the contraction applies.
inline ResolventScan resolvent_bound_scan(const OperatorC0& t, long v_r, long grid = 8,
                                          long working_prec = kDefaultPrec) {
    if (!is_self_adjoint(t)) fail(errc::invalid_argument, "scan requires a self-adjoint operator");
    ResolventScan out;
    SpectralDecomposition dec = spectral_decompose(t, working_prec);
    for (const auto& [lambda, x] : dec.flat()) {
        long v = lambda.valuation().v;
        if (v <= -v_r) {
            out.in_dt = false;
            out.outside_witness = lambda;
            // demonstrate the blow-up at the reciprocal
            try {
                resolvent_via_spectrum(t, dec, series_inv(lambda, working_prec), working_prec);
            } catch (const error& e) {
                if (e.code() == errc::not_invertible) out.blow_up_demonstrated = true;
            }
            return out;
        }
    }
    long vt = op_norm_val(t).lower_bound();
    out.max_norm_val = kPrecInf;
    for (long shell = v_r; shell <= v_r + 1; ++shell) {
        for (long c = 1; c <= grid; ++c) {
            LaurentSeries lambda = LaurentSeries::monomial(Rational(c), shell);
            SeriesMatrix r = resolvent_via_spectrum(t, dec, lambda, working_prec);
            long norm = 0; // the implicit identity keeps valuation 0 outside the block
            for (const auto& row : r)
                for (const auto& e : row) {
                    Valuation v = e.valuation();
                    if (v.is_finite()) norm = std::min(norm, v.v);
                }
            bool checked = false;
            if (sat_add(lambda.val_lower_bound(), vt) > 0) {
                // dual route: the Neumann partial sum must agree to its depth
                long terms = working_prec / std::max(1L, lambda.val_lower_bound() + vt) + 1;
                OperatorC0 nr = neumann_resolvent(t, {lambda, terms});
                SeriesMatrix diff = sm_sub(dense_embedding(nr), r);
                long agree = kPrecInf;
                for (const auto& row : diff)
                    for (const auto& e : row) {
                        Valuation v = e.valuation();
                        if (v.is_finite()) agree = std::min(agree, v.v);
                    }
                if (agree < terms * (lambda.val_lower_bound() + vt)) out.finite = false;
                checked = true;
            }
            out.samples.push_back({lambda, norm, checked});
            out.max_norm_val = std::min(out.max_norm_val, norm);
        }
    }
    if (out.max_norm_val >= kPrecInf) out.max_norm_val = 0;
    return out;
}

} // namespace ultraspec
