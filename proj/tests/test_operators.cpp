#include <catch2/catch_amalgamated.hpp>

#include "ultraspec/diagonalize.hpp"
#include "ultraspec/operator_c0.hpp"

using namespace ultraspec;

namespace {

OperatorC0 diag_op(std::initializer_list<LaurentSeries> d) {
    SeriesMatrix m = sm_zero(d.size(), d.size());
    std::size_t i = 0;
    for (const auto& s : d) {
        m[i][i] = s;
        ++i;
    }
    return OperatorC0(std::move(m));
}

OperatorC0 sym_tt2() {
    SeriesMatrix m = sm_zero(2, 2);
    m[0][0] = m[1][1] = LaurentSeries::t(1);
    m[0][1] = m[1][0] = LaurentSeries::t(2);
    return OperatorC0(std::move(m));
}

OperatorC0 random_self_adjoint(Rng& rng, std::size_t n, long tail_len) {
    auto block = gen_test_matrix(n, rng.next(), 2).entries;
    std::vector<std::pair<long, LaurentSeries>> tail;
    long idx = static_cast<long>(n);
    long val = rng.uniform(1, 2);
    for (long k = 0; k < tail_len; ++k) {
        idx += rng.uniform(1, 2);
        tail.emplace_back(idx, LaurentSeries::monomial(rng.nonzero_rational(), val));
        val += rng.uniform(1, 2);
    }
    return OperatorC0(std::move(block), std::move(tail));
}

} // namespace

TEST_CASE("compactoid criterion") {
    CHECK(is_compactoid(sym_tt2()));
    OperatorC0 tailed(sm_zero(1, 1), {{2, LaurentSeries::t(1)}, {3, LaurentSeries::t(2)}});
    CHECK(is_compactoid(tailed));

    // a constant raw diagonal is rejected by the criterion
    std::vector<Valuation> flat(8, Valuation::finite(0));
    CHECK_FALSE(compactoid_row_criterion(flat, 2));

    // and is unrepresentable as a tail
    CHECK_THROWS_AS(OperatorC0(sm_zero(1, 1), {{2, LaurentSeries(1)}, {3, LaurentSeries(1)}}), error);
}

TEST_CASE("adjoint transposes the block and keeps the tail") {
    SeriesMatrix m = sm_zero(2, 2);
    m[0][1] = LaurentSeries(1);
    OperatorC0 t(std::move(m), {{5, LaurentSeries::t(3)}});
    OperatorC0 a = adjoint(t);
    CHECK(a.block()[1][0] == LaurentSeries(1));
    CHECK(a.block()[0][1].is_exact_zero());
    CHECK(a.tail() == t.tail());
    CHECK_FALSE(is_self_adjoint(t));
    CHECK(is_self_adjoint(sym_tt2()));
    CHECK(is_self_adjoint(diag_op({LaurentSeries::t(1)})));

    // involution and norm preservation
    Rng rng(5);
    for (int i = 0; i < 30; ++i) {
        auto x = random_self_adjoint(rng, 3, 2);
        OperatorC0 ad = adjoint(x);
        CHECK(adjoint(ad).block() == x.block());
        CHECK(op_norm_val(ad) == op_norm_val(x));
    }
}

TEST_CASE("operator norm valuation") {
    CHECK(op_norm_val(diag_op({LaurentSeries::t(1), LaurentSeries::t(2)})) == Valuation::finite(1));
    CHECK(op_norm_val(OperatorC0::zero(2)).is_infinite());
    SeriesMatrix m = sm_zero(2, 2);
    m[0][0] = LaurentSeries(1);
    m[0][1] = m[1][0] = LaurentSeries::t(1);
    m[1][1] = LaurentSeries(2);
    CHECK(op_norm_val(OperatorC0(std::move(m))) == Valuation::finite(0));
}

TEST_CASE("apply") {
    auto t = diag_op({LaurentSeries::t(1), LaurentSeries::t(2)});
    auto x = VectorC0::unit(1) + VectorC0::unit(2);
    auto y = apply(t, x);
    CHECK(y.entry(1) == LaurentSeries::t(1));
    CHECK(y.entry(2) == LaurentSeries::t(2));

    CHECK(apply(OperatorC0(sm_identity(2)), x) == x);

    OperatorC0 tailed(sm_zero(1, 1), {{3, LaurentSeries::t(2)}});
    CHECK(apply(tailed, VectorC0::unit(3)).entry(3) == LaurentSeries::t(2));
    CHECK(apply(tailed, VectorC0::unit(2)).is_zero_to_precision());
}

TEST_CASE("apply is linear") {
    Rng rng(11);
    for (int i = 0; i < 30; ++i) {
        auto t = random_self_adjoint(rng, 3, 2);
        std::map<long, LaurentSeries> xm, ym;
        xm[rng.uniform(1, 5)] = LaurentSeries::monomial(rng.nonzero_rational(), rng.uniform(0, 2));
        ym[rng.uniform(1, 5)] = LaurentSeries::monomial(rng.nonzero_rational(), rng.uniform(0, 2));
        VectorC0 x(std::move(xm)), y(std::move(ym));
        LaurentSeries c = LaurentSeries::monomial(rng.nonzero_rational(), rng.uniform(0, 1));
        VectorC0 lhs = apply(t, x + c * y);
        VectorC0 rhs = apply(t, x) + c * apply(t, y);
        CHECK(lhs == rhs);
    }
}

TEST_CASE("composition") {
    auto t = sym_tt2();
    CHECK(compose(t, OperatorC0(sm_identity(2))).block() == t.block());

    OperatorC0 a(sm_zero(1, 1), {{2, LaurentSeries::t(1)}, {4, LaurentSeries::t(2)}});
    OperatorC0 b(sm_zero(1, 1), {{2, LaurentSeries::t(2)}, {3, LaurentSeries::t(3)}});
    auto ab = compose(a, b);
    REQUIRE(ab.tail().size() == 1);
    CHECK(ab.tail()[0].first == 2);
    CHECK(ab.tail()[0].second == LaurentSeries::t(3));

    SeriesMatrix nil = sm_zero(2, 2);
    nil[0][1] = LaurentSeries(1);
    OperatorC0 n(std::move(nil));
    auto n2 = compose(n, n);
    CHECK(op_norm_val(n2).is_infinite());
}

TEST_CASE("power norm sequence") {
    auto seq = power_norm_seq(diag_op({LaurentSeries::t(1), LaurentSeries::t(2)}), 4);
    for (auto& r : seq) {
        REQUIRE(r.has_value());
        CHECK(*r == 1);
    }

    SeriesMatrix nil = sm_zero(2, 2);
    nil[0][1] = LaurentSeries(1);
    auto nseq = power_norm_seq(OperatorC0(std::move(nil)), 3);
    REQUIRE(nseq[0].has_value());
    CHECK(*nseq[0] == 0);
    CHECK_FALSE(nseq[1].has_value());

    auto cseq = power_norm_seq(sym_tt2(), 4);
    for (auto& r : cseq) {
        REQUIRE(r.has_value());
        CHECK(*r == 1);
    }
}

TEST_CASE("self-adjoint norm multiplicativity on random operators") {
    Rng rng(13);
    for (int i = 0; i < 200; ++i) {
        auto t = random_self_adjoint(rng, 1 + i % 4, i % 3);
        Valuation v1 = op_norm_val(t);
        Valuation v2 = op_norm_val(compose(t, t));
        if (v1.is_infinite()) {
            CHECK(v2.is_infinite());
            continue;
        }
        REQUIRE(v2.is_finite());
        CHECK(v2.v == 2 * v1.v);
    }
}

TEST_CASE("neumann resolvent") {
    auto r = neumann_resolvent(diag_op({LaurentSeries::t(1)}), {LaurentSeries(1), 4});
    REQUIRE(r.dim() == 1);
    CHECK(r.block()[0][0] == LaurentSeries(1) + LaurentSeries::t(1) + LaurentSeries::t(2) + LaurentSeries::t(3));

    auto id = neumann_resolvent(diag_op({LaurentSeries::t(1)}), {LaurentSeries(), 5});
    CHECK(id.block()[0][0] == LaurentSeries(1));

    CHECK_THROWS_MATCHES(neumann_resolvent(diag_op({LaurentSeries(1)}), {LaurentSeries(1), 3}), error,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("NotContractive")));
}

TEST_CASE("neumann residual valuation grows linearly in the term count") {
    Rng rng(17);
    for (int i = 0; i < 20; ++i) {
        auto t = random_self_adjoint(rng, 2, 1);
        Valuation vt = op_norm_val(t);
        if (!vt.is_finite() || vt.v <= 0) continue;
        LaurentSeries lambda(rng.nonzero_rational(2, 1));
        for (long terms : {2L, 4L, 7L}) {
            auto r = neumann_resolvent(t, {lambda, terms});
            // residual (I - lambda T) R - I = -(lambda T)^terms
            SeriesMatrix lt = dense_embedding(t);
            for (auto& row : lt)
                for (auto& e : row) e = series_mul(lambda, e);
            SeriesMatrix im = sm_identity(lt.size());
            SeriesMatrix ilt = sm_sub(im, lt);
            SeriesMatrix res = sm_sub(sm_mul(ilt, dense_embedding(r)), im);
            long minval = kPrecInf;
            for (auto& row : res)
                for (auto& e : row) {
                    Valuation v = e.valuation();
                    if (v.is_finite()) minval = std::min(minval, v.v);
                }
            if (minval < kPrecInf) CHECK(minval >= terms * vt.v);
        }
    }
}

TEST_CASE("truncation") {
    auto t = sym_tt2();
    CHECK(truncate(t, 2).block() == t.block());
    auto t1 = truncate(t, 1);
    REQUIRE(t1.dim() == 1);
    CHECK(t1.block()[0][0] == LaurentSeries::t(1));
    CHECK(op_norm_val(truncate(OperatorC0::zero(2), 1)).is_infinite());

    OperatorC0 tailed(sm_identity(1), {{2, LaurentSeries::t(1)}, {3, LaurentSeries::t(3)}});
    CHECK(truncate(tailed, 3).tail().size() == 2);
    CHECK(truncate(tailed, 2).tail().size() == 1);
}

TEST_CASE("truncation error valuations are nondecreasing and eventually infinite") {
    Rng rng(19);
    for (int i = 0; i < 30; ++i) {
        auto t = random_self_adjoint(rng, 3, 3);
        long last = -kPrecInf;
        bool inf_seen = false;
        for (long n = 1; n <= t.max_active_index() + 1; ++n) {
            Valuation v = norm_val_beyond(t, n);
            if (v.is_infinite()) {
                inf_seen = true;
                continue;
            }
            REQUIRE(!inf_seen); // once infinite, stays infinite
            CHECK(v.v >= last);
            last = v.v;
        }
        CHECK(norm_val_beyond(t, t.max_active_index()).is_infinite());
    }
}
