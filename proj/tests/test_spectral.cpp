#include <catch2/catch_amalgamated.hpp>

#include "ultraspec/spectral.hpp"

using namespace ultraspec;

namespace {

OperatorC0 op_tt2() {
    SeriesMatrix m = sm_zero(2, 2);
    m[0][0] = m[1][1] = LaurentSeries::t(1);
    m[0][1] = m[1][0] = LaurentSeries::t(2);
    return OperatorC0(std::move(m));
}

OperatorC0 diag_op(std::initializer_list<LaurentSeries> d) {
    SeriesMatrix m = sm_zero(d.size(), d.size());
    std::size_t i = 0;
    for (const auto& s : d) m[i][i] = s, ++i;
    return OperatorC0(std::move(m));
}

bool proportional(const VectorC0& v, std::initializer_list<Rational> dirs) {
    std::vector<Rational> d(dirs);
    // v == c * d for some series c: check cross ratios on residues of entries
    std::vector<LaurentSeries> entries;
    for (std::size_t i = 0; i < d.size(); ++i) entries.push_back(v.entry(static_cast<long>(i + 1)));
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = i + 1; j < d.size(); ++j) {
            LaurentSeries lhs = d[j] * entries[i];
            LaurentSeries rhs = d[i] * entries[j];
            if (!(lhs - rhs).is_zero_to_precision()) return false;
        }
    return true;
}

} // namespace

TEST_CASE("eigen decomposition of the symmetric fixture") {
    auto pairs = eigen_decompose(op_tt2(), 24);
    REQUIRE(pairs.size() == 2);
    // lambda = t +- t^2 with directions (1,1) and (1,-1)
    bool plus_found = false, minus_found = false;
    for (const auto& p : pairs) {
        REQUIRE(p.vectors.size() == 1);
        if (equal_mod(p.lambda, LaurentSeries::t(1) + LaurentSeries::t(2), 24)) {
            plus_found = true;
            CHECK(proportional(p.vectors[0], {rat(1), rat(1)}));
        }
        if (equal_mod(p.lambda, LaurentSeries::t(1) - LaurentSeries::t(2), 24)) {
            minus_found = true;
            CHECK(proportional(p.vectors[0], {rat(1), rat(-1)}));
        }
    }
    CHECK((plus_found && minus_found));
}

TEST_CASE("diagonal operator decomposes canonically and the zero operator is empty") {
    auto pairs = eigen_decompose(diag_op({LaurentSeries::t(1), LaurentSeries::t(2)}), 16);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].vectors[0] == VectorC0::unit(1));
    CHECK(pairs[1].vectors[0] == VectorC0::unit(2));

    CHECK(eigen_decompose(OperatorC0::zero(3), 16).empty());
    CHECK_THROWS_AS(eigen_decompose(OperatorC0(SeriesMatrix{{LaurentSeries(), LaurentSeries(1)},
                                                            {LaurentSeries(), LaurentSeries()}}),
                                    8),
                    error);
}

TEST_CASE("levels group by magnitude") {
    auto dec = spectral_decompose(diag_op({LaurentSeries::t(1), LaurentSeries::t(2), Rational(3) * LaurentSeries::t(1)}), 16);
    REQUIRE(dec.level_vals == std::vector<long>{1, 2});
    std::size_t level0 = 0;
    for (const auto& p : dec.groups[0]) level0 += p.vectors.size();
    CHECK(level0 == 2);

    auto dec2 = spectral_decompose(op_tt2(), 16);
    CHECK(dec2.level_vals == std::vector<long>{1});
    CHECK(dec2.eigenvector_count() == 2);
}

TEST_CASE("reconstruction identity on canonical and random probes") {
    for (auto& t : {op_tt2(), diag_op({LaurentSeries::t(1), LaurentSeries::t(2)})}) {
        auto dec = spectral_decompose(t, 20);
        auto probes = reconstruction_probes(t, 8, 99);
        auto v = verify_reconstruction(t, dec, probes, 20);
        INFO(v.detail);
        CHECK(v.pass);
    }
}

TEST_CASE("reconstruction across the generated corpus") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto t = gen_test_operator(1 + seed % 4, seed * 131, 2, seed % 3);
        auto dec = spectral_decompose(t, 20);
        auto verdict = verify_reconstruction(t, dec, reconstruction_probes(t, 6, seed), 20);
        INFO("seed " << seed);
        CHECK(verdict.pass);
        CHECK(verify_eigenpairs(t, dec, 20).pass);
        CHECK(verify_norm_max(t, dec).pass);
        CHECK(verify_eigenspace_orthogonality(dec).pass);
        CHECK(verify_eigs_tend_to_zero(dec).pass);
    }
}

TEST_CASE("norm equals the top spectral level") {
    auto t = diag_op({LaurentSeries::t(1), LaurentSeries::t(2)});
    CHECK(verify_norm_max(t, spectral_decompose(t, 16)).pass);
    CHECK(verify_norm_max(op_tt2(), spectral_decompose(op_tt2(), 16)).pass);
    CHECK(verify_norm_max(OperatorC0::zero(2), spectral_decompose(OperatorC0::zero(2), 16)).pass);
}

TEST_CASE("orthogonality verdict and its negative control") {
    auto dec = spectral_decompose(op_tt2(), 16);
    CHECK(verify_eigenspace_orthogonality(dec).pass);
    // corrupt one eigenvector coefficient below the certificate
    dec.groups[0][0].vectors[0] = dec.groups[0][0].vectors[0] + LaurentSeries::monomial(rat(1), 3) * VectorC0::unit(2);
    CHECK_FALSE(verify_eigenspace_orthogonality(dec).pass);
}

TEST_CASE("commuting projections") {
    auto t = diag_op({LaurentSeries::t(1), LaurentSeries::t(2)});
    CHECK(verify_commuting_projection(t, gram_schmidt({VectorC0::unit(1)})).pass);

    std::map<long, LaurentSeries> m{{1, LaurentSeries(1)}, {2, LaurentSeries(1)}};
    auto diag_basis = gram_schmidt({VectorC0(std::move(m))});
    CHECK(verify_commuting_projection(op_tt2(), diag_basis).pass);

    CHECK_THROWS_MATCHES(verify_commuting_projection(op_tt2(), gram_schmidt({VectorC0::unit(1)})), error,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("NotInvariant")));
}

TEST_CASE("tail projection norms decay through the levels") {
    auto t = diag_op({LaurentSeries::t(1), LaurentSeries::t(2), LaurentSeries::t(3)});
    auto rep = tail_projection_norms(t, spectral_decompose(t, 16));
    REQUIRE(rep.norms.size() == 3);
    CHECK(rep.pass);
    CHECK(rep.norms[0] == Valuation::finite(2));
    CHECK(rep.norms[1] == Valuation::finite(3));
    CHECK_FALSE(rep.norms[2].is_finite());
}

TEST_CASE("eigenvalues tend to zero along tails") {
    OperatorC0 tailed(sm_zero(1, 1), {{2, LaurentSeries::t(1)}, {3, LaurentSeries::t(2)}, {4, LaurentSeries::t(3)}});
    auto dec = spectral_decompose(tailed, 16);
    CHECK(dec.level_vals == std::vector<long>{1, 2, 3});
    CHECK(verify_eigs_tend_to_zero(dec).pass);
}

TEST_CASE("normalized decomposition") {
    SECTION("square norms normalize to unit self inner products") {
        SeriesMatrix m = sm_zero(2, 2);
        m[0][0] = LaurentSeries(rat(41, 25));
        m[0][1] = m[1][0] = LaurentSeries(rat(-12, 25));
        m[1][1] = LaurentSeries(rat(34, 25));
        OperatorC0 t{std::move(m)};
        auto norm = normalized_decomposition(spectral_decompose(t, 16));
        CHECK(norm.failures.empty());
        for (const auto& [lambda, x] : norm.dec.flat())
            CHECK((inner(x, x) - LaurentSeries(1)).is_zero_to_precision());
    }
    SECTION("canonical vectors stay put") {
        auto t = diag_op({LaurentSeries::t(1)});
        auto norm = normalized_decomposition(spectral_decompose(t, 16));
        REQUIRE(norm.failures.empty());
        CHECK(norm.dec.flat()[0].second == VectorC0::unit(1));
    }
    SECTION("non-square norms are reported per vector, remainder normalized") {
        OperatorC0 t(op_tt2().block(), {{3, LaurentSeries::t(3)}});
        auto norm = normalized_decomposition(spectral_decompose(t, 16));
        CHECK(norm.failures.size() == 2); // both (1,+-1) directions have norm 2
        REQUIRE(norm.dec.eigenvector_count() == 1);
        CHECK(norm.dec.flat()[0].second == VectorC0::unit(3));
        // the normalized remainder reconstructs the tail action without denominators
        VectorC0 probe = VectorC0::unit(3);
        VectorC0 rhs;
        for (const auto& [lambda, x] : norm.dec.flat())
            rhs = rhs + series_mul(lambda, inner(probe, x)) * x;
        CHECK((apply(t, probe) - rhs).is_zero_to_precision());
    }
}

TEST_CASE("spectral resolvent closed form inverts exactly") {
    auto t = op_tt2();
    auto dec = spectral_decompose(t, 24);
    LaurentSeries lambda(rat(1, 3));
    SeriesMatrix r = resolvent_via_spectrum(t, dec, lambda, 24);
    SeriesMatrix ilt = sm_identity(2);
    SeriesMatrix emb = dense_embedding(t);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) ilt[i][j] = ilt[i][j] - series_mul(lambda, emb[i][j]);
    SeriesMatrix prod = sm_mul(ilt, r);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            LaurentSeries want = i == j ? LaurentSeries(1) : LaurentSeries();
            CHECK((prod[i][j] - want).is_zero_mod(20));
        }
    // blow-up detection
    auto bad = diag_op({LaurentSeries(1)});
    auto bdec = spectral_decompose(bad, 16);
    CHECK_THROWS_MATCHES(resolvent_via_spectrum(bad, bdec, LaurentSeries(1)), error,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("NotInvertible")));
}

TEST_CASE("spectrum report orders by decreasing magnitude") {
    OperatorC0 t(op_tt2().block(), {{4, LaurentSeries::t(5)}});
    auto rep = spectrum_report(spectral_decompose(t, 16));
    REQUIRE(rep.items.size() == 3);
    CHECK(rep.items[0].source == SpectrumReport::Source::block);
    CHECK(rep.items[2].source == SpectrumReport::Source::tail);
    CHECK(rep.items[2].lambda == LaurentSeries::t(5));
}
