#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>

#include "ultraspec/errors.hpp"

namespace ultraspec {

// The residue class field: exact rationals. GMP keeps values canonical
// (gcd(num, den) = 1, den > 0).
using Rational = mpq_class;
using Integer = mpz_class;

inline Rational rat(long num, long den = 1) {
    Rational q(num, den);
    q.canonicalize();
    return q;
}

inline bool is_zero(const Rational& q) { return sgn(q) == 0; }

// Exact square root of a perfect-square integer, if one exists.
inline std::optional<Integer> integer_sqrt_exact(const Integer& n) {
    if (sgn(n) < 0) return std::nullopt;
    if (mpz_perfect_square_p(n.get_mpz_t()) == 0) return std::nullopt;
    Integer r;
    mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
    return r;
}

// Exact square root over the rationals. Fails with NotAPerfectSquare when
// q is negative or either of numerator/denominator is not a perfect square.
inline Rational rational_sqrt(const Rational& q) {
    if (sgn(q) < 0) fail(errc::not_a_perfect_square, "negative rational has no square root in Q");
    auto num = integer_sqrt_exact(q.get_num());
    auto den = integer_sqrt_exact(q.get_den());
    if (!num || !den) fail(errc::not_a_perfect_square, q.get_str() + " is not a square in Q");
    Rational r(*num, *den);
    r.canonicalize();
    return r;
}

inline bool is_perfect_square(const Rational& q) {
    if (sgn(q) < 0) return false;
    return mpz_perfect_square_p(q.get_num_mpz_t()) != 0 && mpz_perfect_square_p(q.get_den_mpz_t()) != 0;
}

// 2^k for k of either sign (used by power cocycles).
inline Rational pow2_rational(long k) {
    Integer p;
    mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(k < 0 ? -k : k));
    if (k >= 0) return Rational(p);
    Rational q(1, p);
    q.canonicalize();
    return q;
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

} // namespace ultraspec
