#pragma once

// Exact linear algebra over Q: dense rational matrices, characteristic
// polynomials, rational root extraction, kernels, weighted Gram-Schmidt and
// the residue-level diagonalization step used by the series engine.

#include <algorithm>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "ultraspec/errors.hpp"
#include "ultraspec/rational.hpp"
#include "ultraspec/rng.hpp"

namespace ultraspec {

using QVec = std::vector<Rational>;
using QMat = std::vector<QVec>; // row-major, square unless stated

inline QMat qmat_zero(std::size_t n, std::size_t m) { return QMat(n, QVec(m, Rational(0))); }

inline QMat qmat_identity(std::size_t n) {
    QMat I = qmat_zero(n, n);
    for (std::size_t i = 0; i < n; ++i) I[i][i] = 1;
    return I;
}

inline bool qmat_is_zero(const QMat& a) {
    for (const auto& row : a)
        for (const auto& x : row)
            if (!is_zero(x)) return false;
    return true;
}

inline bool qmat_is_identity(const QMat& a) {
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j)
            if (a[i][j] != Rational(i == j ? 1 : 0)) return false;
    return true;
}

inline bool qmat_is_symmetric(const QMat& a) {
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j)
            if (a[i][j] != a[j][i]) return false;
    return true;
}

inline QMat qmat_transpose(const QMat& a) {
    if (a.empty()) return a;
    QMat r = qmat_zero(a[0].size(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[0].size(); ++j) r[j][i] = a[i][j];
    return r;
}

inline QMat qmat_mul(const QMat& a, const QMat& b) {
    std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
    QMat r = qmat_zero(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < k; ++l) {
            if (is_zero(a[i][l])) continue;
            for (std::size_t j = 0; j < m; ++j) {
                if (is_zero(b[l][j])) continue;
                r[i][j] += a[i][l] * b[l][j];
            }
        }
    return r;
}

inline QMat qmat_add(const QMat& a, const QMat& b) {
    QMat r = a;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) r[i][j] += b[i][j];
    return r;
}

inline QMat qmat_sub(const QMat& a, const QMat& b) {
    QMat r = a;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) r[i][j] -= b[i][j];
    return r;
}

inline QMat qmat_scale(const Rational& c, const QMat& a) {
    QMat r = a;
    for (auto& row : r)
        for (auto& x : row) x *= c;
    return r;
}

// Gauss-Jordan inverse; fails on singular input.
inline QMat qmat_inverse(const QMat& a) {
    std::size_t n = a.size();
    QMat w = a;
    QMat inv = qmat_identity(n);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && is_zero(w[piv][col])) ++piv;
        if (piv == n) fail(errc::not_invertible, "singular rational matrix");
        std::swap(w[piv], w[col]);
        std::swap(inv[piv], inv[col]);
        Rational d = w[col][col];
        for (std::size_t j = 0; j < n; ++j) {
            w[col][j] /= d;
            inv[col][j] /= d;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == col || is_zero(w[i][col])) continue;
            Rational f = w[i][col];
            for (std::size_t j = 0; j < n; ++j) {
                w[i][j] -= f * w[col][j];
                inv[i][j] -= f * inv[col][j];
            }
        }
    }
    return inv;
}

// Monic characteristic polynomial det(xI - A) by Faddeev-LeVerrier.
// Returned as coefficients c[0..n] with c[n] = 1, p(x) = sum c[k] x^k.
inline QVec charpoly_rational(const QMat& a) {
    std::size_t n = a.size();
    QVec c(n + 1, Rational(0));
    c[n] = 1;
    QMat m = qmat_zero(n, n);
    for (std::size_t k = 1; k <= n; ++k) {
        // M_k = A * (M_{k-1} + c_{n-k+1} I)
        QMat t = m;
        for (std::size_t i = 0; i < n; ++i) t[i][i] += c[n - k + 1];
        m = qmat_mul(a, t);
        Rational tr(0);
        for (std::size_t i = 0; i < n; ++i) tr += m[i][i];
        c[n - k] = -tr / Rational(static_cast<long>(k));
    }
    return c;
}

inline Rational poly_eval(const QVec& p, const Rational& x) {
    Rational acc(0);
    for (std::size_t k = p.size(); k-- > 0;) acc = acc * x + p[k];
    return acc;
}

// Deflate p by the root r: p / (x - r), exact.
inline QVec poly_deflate(const QVec& p, const Rational& r) {
    std::size_t n = p.size() - 1;
    QVec q(n, Rational(0));
    Rational carry = p[n];
    for (std::size_t k = n; k-- > 0;) {
        q[k] = carry;
        carry = p[k] + carry * r;
    }
    return q; // carry == p(r) == 0 for a true root
}

namespace detail {

inline std::vector<Integer> positive_divisors(Integer n) {
    if (sgn(n) < 0) n = -n;
    std::vector<Integer> divs{Integer(1)};
    if (n == 0) return divs;
    // trial-division factorization; fine at desk scale
    std::map<Integer, int> fac;
    Integer d(2);
    while (d * d <= n) {
        while (mpz_divisible_p(n.get_mpz_t(), d.get_mpz_t())) {
            ++fac[d];
            n /= d;
        }
        d += (d == 2) ? 1 : 2;
    }
    if (n > 1) ++fac[n];
    for (const auto& [p, e] : fac) {
        std::size_t sz = divs.size();
        Integer pe(1);
        for (int k = 1; k <= e; ++k) {
            pe *= p;
            for (std::size_t i = 0; i < sz; ++i) divs.push_back(divs[i] * pe);
        }
    }
    std::sort(divs.begin(), divs.end());
    return divs;
}

} // namespace detail

// All rational roots of p (with multiplicity), plus the degree that remains
// unfactored over Q. Roots are listed in the deflation order.
struct RationalRoots {
    std::vector<std::pair<Rational, int>> roots; // (root, multiplicity)
    std::size_t unfactored_degree = 0;
    bool split_completely() const { return unfactored_degree == 0; }
};

inline RationalRoots rational_roots(QVec p) {
    RationalRoots out;
    while (p.size() > 1 && is_zero(p.back())) p.pop_back();
    if (p.size() <= 1) return out;
    // strip zero roots
    std::size_t z = 0;
    while (z < p.size() - 1 && is_zero(p[z])) ++z;
    if (z > 0) {
        out.roots.emplace_back(Rational(0), static_cast<int>(z));
        p.erase(p.begin(), p.begin() + static_cast<long>(z));
    }
    auto record = [&out](const Rational& r) {
        for (auto& [root, mult] : out.roots)
            if (root == r) {
                ++mult;
                return;
            }
        out.roots.emplace_back(r, 1);
    };
    while (p.size() > 1) {
        if (p.size() == 2) {
            record(-p[0] / p[1]);
            p = {Rational(1)};
            break;
        }
        // integer-scale and enumerate candidates num/den
        Integer scale(1);
        for (const auto& c : p) scale = lcm(scale, c.get_den());
        std::vector<Integer> ip;
        for (const auto& c : p) {
            Rational s = c * Rational(scale);
            ip.push_back(s.get_num());
        }
        auto nums = detail::positive_divisors(ip.front());
        auto dens = detail::positive_divisors(ip.back());
        std::optional<Rational> found;
        for (const auto& nu : nums) {
            for (const auto& de : dens) {
                Rational cand(nu, de);
                cand.canonicalize();
                if (is_zero(poly_eval(p, cand))) {
                    found = cand;
                    break;
                }
                cand = -cand;
                if (is_zero(poly_eval(p, cand))) {
                    found = cand;
                    break;
                }
            }
            if (found) break;
        }
        if (!found) break;
        record(*found);
        p = poly_deflate(p, *found);
    }
    out.unfactored_degree = p.size() - 1;
    return out;
}

// Basis of Ker(a) over Q (a may be rectangular).
inline std::vector<QVec> kernel_basis(QMat a) {
    std::size_t rows = a.size(), cols = rows == 0 ? 0 : a[0].size();
    std::vector<long> pivot_of_col(cols, -1);
    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols && rank < rows; ++col) {
        std::size_t piv = rank;
        while (piv < rows && is_zero(a[piv][col])) ++piv;
        if (piv == rows) continue;
        std::swap(a[piv], a[rank]);
        Rational d = a[rank][col];
        for (std::size_t j = 0; j < cols; ++j) a[rank][j] /= d;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == rank || is_zero(a[i][col])) continue;
            Rational f = a[i][col];
            for (std::size_t j = 0; j < cols; ++j) a[i][j] -= f * a[rank][j];
        }
        pivot_of_col[col] = static_cast<long>(rank);
        ++rank;
    }
    std::vector<QVec> basis;
    for (std::size_t col = 0; col < cols; ++col) {
        if (pivot_of_col[col] >= 0) continue;
        QVec v(cols, Rational(0));
        v[col] = 1;
        for (std::size_t c = 0; c < cols; ++c)
            if (pivot_of_col[c] >= 0) v[c] = -a[static_cast<std::size_t>(pivot_of_col[c])][col];
        basis.push_back(std::move(v));
    }
    return basis;
}

inline Rational weighted_inner(const QVec& x, const QVec& y, const QVec& weight) {
    Rational acc(0);
    for (std::size_t i = 0; i < x.size(); ++i) acc += weight[i] * x[i] * y[i];
    return acc;
}

// Classical Gram-Schmidt w.r.t. the diagonal weight (no normalization).
// The weight is positive, so self-inner products of nonzero vectors never
// vanish and dependence is detected exactly.
inline std::vector<QVec> gram_schmidt_rational(const std::vector<QVec>& vs, const QVec& weight) {
    std::vector<QVec> out;
    std::vector<Rational> self;
    for (const auto& v : vs) {
        QVec x = v;
        for (std::size_t j = 0; j < out.size(); ++j) {
            Rational coef = weighted_inner(v, out[j], weight) / self[j];
            for (std::size_t k = 0; k < x.size(); ++k) x[k] -= coef * out[j][k];
        }
        bool zero = std::all_of(x.begin(), x.end(), [](const Rational& q) { return is_zero(q); });
        if (zero) fail(errc::linearly_dependent, "dependent vector in Gram-Schmidt input");
        self.push_back(weighted_inner(x, x, weight));
        out.push_back(std::move(x));
    }
    return out;
}

// Residue-level diagonalization result. `transform` has D-orthogonal columns
// (w.r.t. the incoming diagonal weight); `gram` is the new diagonal weight
// transform^T W transform, and `eigenvalues` solves A v = lambda W v.
struct BaseDiag {
    QMat transform;
    QVec eigenvalues; // diagonal of transform^T A transform divided by gram
    QVec gram;        // diagonal of transform^T W transform
};

enum class DiagMode {
    orthonormal,        // columns unit-normalized; fails when norms are not squares
    orthogonal_columns, // columns pairwise orthogonal, norms kept in `gram`
};

// Solve the weighted symmetric eigenproblem A v = lambda W v exactly over Q.
// Requires every eigenvalue rational (IrrationalEigenvalue otherwise). In
// orthonormal mode the weight must be the identity and every resulting column
// norm a perfect square (NotOrthonormalizable otherwise).
inline BaseDiag base_diagonalize(const QMat& a, const QVec& weight, DiagMode mode) {
    std::size_t n = a.size();
    if (!qmat_is_symmetric(a)) fail(errc::invalid_argument, "base_diagonalize: matrix not symmetric");
    QMat wa = a; // W^{-1} A
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) wa[i][j] = a[i][j] / weight[i];
    RationalRoots rr = rational_roots(charpoly_rational(wa));
    if (!rr.split_completely())
        fail(errc::irrational_eigenvalue,
             "characteristic polynomial has an irrational factor of degree " + std::to_string(rr.unfactored_degree));

    BaseDiag out;
    out.transform = qmat_zero(n, n);
    std::size_t col = 0;
    for (const auto& [lambda, mult] : rr.roots) {
        QMat shifted = wa;
        for (std::size_t i = 0; i < n; ++i) shifted[i][i] -= lambda;
        std::vector<QVec> kern = kernel_basis(shifted);
        if (static_cast<int>(kern.size()) != mult)
            fail(errc::invalid_argument, "eigenspace dimension mismatch for a symmetric pencil");
        std::vector<QVec> ortho = gram_schmidt_rational(kern, weight);
        for (auto& v : ortho) {
            Rational norm2 = weighted_inner(v, v, weight);
            if (mode == DiagMode::orthonormal) {
                if (!is_perfect_square(norm2))
                    fail(errc::not_orthonormalizable,
                         "eigenvector norm^2 " + to_string(norm2) + " is not a square in Q");
                Rational inv_norm = 1 / rational_sqrt(norm2);
                for (auto& x : v) x *= inv_norm;
                norm2 = 1;
            }
            for (std::size_t i = 0; i < n; ++i) out.transform[i][col] = v[i];
            out.eigenvalues.push_back(lambda);
            out.gram.push_back(norm2);
            ++col;
        }
    }
    return out;
}

// Per-eigenvalue orthogonalization of a spanning eigenbasis, normalized into
// an orthogonal matrix (columns). Unweighted, orthonormal contract.
inline QMat orthogonalize_eigenbasis(const std::vector<std::vector<QVec>>& groups) {
    std::vector<QVec> cols;
    QVec weight;
    std::size_t n = 0;
    for (const auto& g : groups)
        for (const auto& v : g) n = v.size();
    weight.assign(n, Rational(1));
    for (const auto& g : groups) {
        auto ortho = gram_schmidt_rational(g, weight);
        for (auto& v : ortho) {
            Rational norm2 = weighted_inner(v, v, weight);
            if (!is_perfect_square(norm2))
                fail(errc::not_orthonormalizable, "norm^2 " + to_string(norm2) + " is not a square in Q");
            Rational inv_norm = 1 / rational_sqrt(norm2);
            for (auto& x : v) x *= inv_norm;
            cols.push_back(v);
        }
    }
    QMat u = qmat_zero(n, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (std::size_t i = 0; i < n; ++i) u[i][j] = cols[j][i];
    return u;
}

// Cayley transform (I - S)(I + S)^{-1} of an antisymmetric rational S:
// exactly orthogonal over Q.
inline QMat cayley_orthogonal(const QMat& s) {
    std::size_t n = s.size();
    QMat ips = qmat_identity(n);
    QMat ims = qmat_identity(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            ips[i][j] += s[i][j];
            ims[i][j] -= s[i][j];
        }
    return qmat_mul(ims, qmat_inverse(ips));
}

inline QMat random_antisymmetric(Rng& rng, std::size_t n, long num_mag = 2, long den_mag = 2) {
    QMat s = qmat_zero(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            Rational q = rng.small_rational(num_mag, den_mag);
            s[i][j] = q;
            s[j][i] = -q;
        }
    return s;
}

} // namespace ultraspec
