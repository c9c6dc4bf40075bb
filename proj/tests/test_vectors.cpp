#include <catch2/catch_amalgamated.hpp>

#include "ultraspec/vector_c0.hpp"

using namespace ultraspec;

namespace {

VectorC0 vec(std::initializer_list<std::pair<long, LaurentSeries>> entries) {
    std::map<long, LaurentSeries> m;
    for (auto& [i, s] : entries) m[i] = s;
    return VectorC0(std::move(m));
}

VectorC0 random_vector(Rng& rng, long max_index = 6) {
    std::map<long, LaurentSeries> m;
    long k = rng.uniform(1, 4);
    for (long j = 0; j < k; ++j) {
        std::map<long, Rational> terms;
        long nt = rng.uniform(1, 3);
        for (long t = 0; t < nt; ++t) terms[rng.uniform(0, 4)] = rng.nonzero_rational();
        m[rng.uniform(1, max_index)] = LaurentSeries::from_terms(std::move(terms));
    }
    return VectorC0(std::move(m));
}

} // namespace

TEST_CASE("inner product over the support intersection") {
    auto x = vec({{1, LaurentSeries(1)}, {2, LaurentSeries::t(1)}});
    CHECK(inner(x, VectorC0::unit(2)) == LaurentSeries::t(1));
    auto y = vec({{1, LaurentSeries(1)}, {2, LaurentSeries(1)}});
    CHECK(inner(y, y) == LaurentSeries(2));
    CHECK(inner(VectorC0::unit(1), VectorC0::unit(2)).is_exact_zero());
}

TEST_CASE("sup norm valuation") {
    CHECK(vec({{1, LaurentSeries::t(1)}, {2, LaurentSeries::t(2)}}).is_zero_to_precision() == false);
    CHECK(sup_norm_val(vec({{1, LaurentSeries::t(1)}, {2, LaurentSeries::t(2)}})) == Valuation::finite(1));
    CHECK(sup_norm_val(VectorC0()) == Valuation::infinite());
    CHECK(sup_norm_val(vec({{1, LaurentSeries(1)}, {2, LaurentSeries::t(-1)}})) == Valuation::finite(-1));
}

TEST_CASE("norm-inner identity examples and randomized invariant") {
    CHECK(check_norm_inner(vec({{1, LaurentSeries(1)}, {2, LaurentSeries(1)}})));
    CHECK(check_norm_inner(vec({{1, LaurentSeries::t(1)}, {2, Rational(2) * LaurentSeries::t(1)}})));
    CHECK(check_norm_inner(vec({{1, LaurentSeries(1)}, {2, LaurentSeries::t(1)}})));

    Rng rng(7);
    for (int i = 0; i < 300; ++i) {
        auto x = random_vector(rng);
        if (x.is_zero_to_precision()) continue;
        CHECK(check_norm_inner(x));
    }
}

TEST_CASE("gram-schmidt output is orthogonal with the same span") {
    auto v1 = vec({{1, LaurentSeries(1)}, {2, LaurentSeries(1)}});
    auto v2 = vec({{2, LaurentSeries(1)}, {3, LaurentSeries(1)}});
    auto b = gram_schmidt({v1, v2});
    REQUIRE(b.size() == 2);
    CHECK(b.vectors[0] == v1);
    CHECK(b.vectors[1] == vec({{1, rat(-1, 2) * LaurentSeries(1)}, {2, rat(1, 2) * LaurentSeries(1)}, {3, LaurentSeries(1)}}));
    CHECK(inner(b.vectors[0], b.vectors[1]).is_zero_to_precision());

    auto id = gram_schmidt({VectorC0::unit(1), VectorC0::unit(2)});
    CHECK(id.vectors[0] == VectorC0::unit(1));
    CHECK(id.vectors[1] == VectorC0::unit(2));

    CHECK_THROWS_MATCHES(gram_schmidt({VectorC0::unit(1), VectorC0::unit(1)}), error,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("LinearlyDependent")));
}

TEST_CASE("gram-schmidt randomized: pairwise orthogonal, unitriangular change of basis") {
    Rng rng(17);
    int done = 0;
    while (done < 60) {
        std::vector<VectorC0> vs;
        long n = rng.uniform(2, 4);
        for (long i = 0; i < n; ++i) vs.push_back(random_vector(rng));
        try {
            auto b = gram_schmidt(vs);
            for (std::size_t i = 0; i < b.size(); ++i)
                for (std::size_t j = i + 1; j < b.size(); ++j)
                    REQUIRE(inner(b.vectors[i], b.vectors[j]).is_zero_to_precision());
            // x_i - v_i lies in the span of earlier outputs: check leading entry
            // differences cancel through projections by re-projecting
            for (std::size_t i = 0; i < b.size(); ++i) {
                VectorC0 diff = b.vectors[i] - vs[i];
                std::vector<VectorC0> earlier(b.vectors.begin(), b.vectors.begin() + static_cast<long>(i));
                if (earlier.empty()) {
                    REQUIRE(diff.is_zero_to_precision());
                } else {
                    REQUIRE(dist_to_span(diff, earlier).is_finite() == false);
                }
            }
            ++done;
        } catch (const error&) {
            continue; // dependent draw
        }
    }
}

TEST_CASE("normal projection") {
    OrthoBasis b1 = gram_schmidt({VectorC0::unit(1)});
    auto x = vec({{1, LaurentSeries(1)}, {2, LaurentSeries::t(1)}});
    CHECK(normal_projection(b1, x) == VectorC0::unit(1));

    OrthoBasis b2 = gram_schmidt({vec({{1, LaurentSeries(1)}, {2, LaurentSeries(1)}})});
    auto p = normal_projection(b2, VectorC0::unit(1));
    CHECK(p == vec({{1, LaurentSeries(rat(1, 2))}, {2, LaurentSeries(rat(1, 2))}}));
    CHECK(inner(VectorC0::unit(1) - p, b2.vectors[0]).is_zero_to_precision());

    // idempotence on span members
    auto y = vec({{1, LaurentSeries(3)}, {2, LaurentSeries(3)}});
    CHECK(normal_projection(b2, y) == y);
}

TEST_CASE("projection matrix is idempotent and self-adjoint") {
    Rng rng(29);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<VectorC0> vs{random_vector(rng, 4), random_vector(rng, 4)};
        OrthoBasis b;
        try {
            b = gram_schmidt(vs);
        } catch (const error&) {
            continue;
        }
        SeriesMatrix p = projection_matrix(b, 4);
        SeriesMatrix p2 = sm_mul(p, p);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) {
                REQUIRE((p2[i][j] - p[i][j]).is_zero_to_precision());
                REQUIRE((p[i][j] - p[j][i]).is_zero_to_precision());
            }
    }
}

TEST_CASE("t-orthogonality") {
    CHECK(is_t_orthogonal({VectorC0::unit(1), VectorC0::unit(2)}, Rational(1)));
    auto skew = vec({{1, LaurentSeries(1)}, {2, LaurentSeries::t(1)}});
    CHECK_FALSE(is_t_orthogonal({VectorC0::unit(1), skew}, Rational(1)));
    CHECK(is_t_orthogonal({vec({{1, LaurentSeries(1)}})}, rat(1, 2)));
    // the same skew pair is t-orthogonal for t <= 1/2: the defect is |t|
    CHECK(is_t_orthogonal({VectorC0::unit(1), skew}, rat(1, 2)));
    CHECK_FALSE(is_t_orthogonal({VectorC0::unit(1), skew}, rat(3, 4)));
    // orthogonal-but-not-pairwise-zero family
    CHECK(is_t_orthogonal({vec({{1, LaurentSeries(1)}, {2, LaurentSeries(1)}}), VectorC0::unit(1)}, Rational(1)));
}

TEST_CASE("orthonormal families are orthogonal") {
    Rng rng(41);
    int done = 0;
    while (done < 40) {
        std::vector<VectorC0> vs;
        long n = rng.uniform(2, 3);
        for (long i = 0; i < n; ++i) vs.push_back(random_vector(rng));
        try {
            auto b = gram_schmidt(vs); // pairwise inner products zero
            REQUIRE(is_t_orthogonal(b.vectors, Rational(1)));
            ++done;
        } catch (const error&) {
        }
    }
}

TEST_CASE("distance to span") {
    CHECK(dist_to_span(VectorC0::unit(2), {VectorC0::unit(1)}) == Valuation::finite(0));
    auto x = vec({{1, LaurentSeries(1)}, {2, LaurentSeries::t(1)}});
    CHECK(dist_to_span(x, {VectorC0::unit(1)}) == Valuation::finite(1));
    auto y = vec({{1, LaurentSeries(2)}});
    CHECK(dist_to_span(y, {VectorC0::unit(1)}).is_infinite());
}

TEST_CASE("volume examples") {
    auto e1 = VectorC0::unit(1);
    auto mixed = vec({{1, LaurentSeries(1)}, {2, LaurentSeries::t(1)}});
    CHECK(volume({e1, mixed}) == Valuation::finite(1));
    CHECK(volume({VectorC0::unit(1), VectorC0::unit(2), VectorC0::unit(3)}) == Valuation::finite(0));
    CHECK(volume({e1, Rational(2) * e1}).is_infinite());
    CHECK_THROWS_AS(volume({}), error);
}

TEST_CASE("volume is a span invariant") {
    Rng rng(53);
    int done = 0;
    while (done < 40) {
        std::vector<VectorC0> vs{random_vector(rng, 5), random_vector(rng, 5), random_vector(rng, 5)};
        Valuation v0 = volume(vs);
        if (!v0.is_finite()) continue;
        // unimodular change of basis over B_K: unit-triangular integer mixes
        std::vector<VectorC0> ws = vs;
        for (int mix = 0; mix < 4; ++mix) {
            long i = rng.uniform(0, 2), j = rng.uniform(0, 2);
            if (i == j) continue;
            LaurentSeries c = LaurentSeries::monomial(rng.small_rational(2, 1), rng.uniform(0, 2));
            ws[static_cast<std::size_t>(i)] = ws[static_cast<std::size_t>(i)] + c * ws[static_cast<std::size_t>(j)];
        }
        CHECK(volume(ws) == v0);
        ++done;
    }
}

TEST_CASE("volume is stable under perturbations beyond its valuation") {
    Rng rng(67);
    int done = 0;
    while (done < 40) {
        std::vector<VectorC0> vs{random_vector(rng, 4), random_vector(rng, 4)};
        Valuation v0;
        try {
            v0 = volume(vs);
        } catch (const error&) {
            continue;
        }
        if (!v0.is_finite()) continue;
        bool norm_ok = true;
        for (auto& v : vs) {
            auto nv = sup_norm_val(v);
            if (!nv.is_finite() || nv.v < 0) norm_ok = false;
        }
        if (!norm_ok) continue;
        long eps = v0.v + 1 + rng.uniform(0, 2);
        std::vector<VectorC0> ws;
        for (const auto& v : vs) {
            std::map<long, LaurentSeries> pert;
            pert[rng.uniform(1, 4)] = LaurentSeries::monomial(rng.small_rational(2, 1), eps + rng.uniform(0, 2));
            ws.push_back(v + VectorC0(std::move(pert)));
        }
        CHECK(volume(ws) == v0);
        ++done;
    }
}
