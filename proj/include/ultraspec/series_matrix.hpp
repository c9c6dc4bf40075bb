#pragma once

#include <cstddef>
#include <vector>

#include "ultraspec/errors.hpp"
#include "ultraspec/laurent.hpp"
#include "ultraspec/qlinalg.hpp"

namespace ultraspec {

using SeriesMatrix = std::vector<std::vector<LaurentSeries>>;

inline SeriesMatrix sm_zero(std::size_t n, std::size_t m) {
    return SeriesMatrix(n, std::vector<LaurentSeries>(m));
}

inline SeriesMatrix sm_identity(std::size_t n) {
    SeriesMatrix r = sm_zero(n, n);
    for (std::size_t i = 0; i < n; ++i) r[i][i] = LaurentSeries(1);
    return r;
}

inline SeriesMatrix sm_transpose(const SeriesMatrix& a) {
    if (a.empty()) return a;
    SeriesMatrix r = sm_zero(a[0].size(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[0].size(); ++j) r[j][i] = a[i][j];
    return r;
}

inline SeriesMatrix sm_mul(const SeriesMatrix& a, const SeriesMatrix& b, const FactorSet& c = FactorSet::trivial()) {
    std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
    SeriesMatrix r = sm_zero(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            LaurentSeries acc;
            for (std::size_t l = 0; l < k; ++l) acc = acc + series_mul(a[i][l], b[l][j], c);
            r[i][j] = acc;
        }
    return r;
}

inline SeriesMatrix sm_sub(const SeriesMatrix& a, const SeriesMatrix& b) {
    SeriesMatrix r = a;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) r[i][j] = a[i][j] - b[i][j];
    return r;
}

inline SeriesMatrix sm_add(const SeriesMatrix& a, const SeriesMatrix& b) {
    SeriesMatrix r = a;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) r[i][j] = a[i][j] + b[i][j];
    return r;
}

inline SeriesMatrix sm_from_rational(const QMat& a) {
    SeriesMatrix r = sm_zero(a.size(), a.empty() ? 0 : a[0].size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) r[i][j] = LaurentSeries(a[i][j]);
    return r;
}

// Symmetric matrix over the series field; symmetry is exact by construction.
struct SymSeriesMatrix {
    SeriesMatrix entries;

    SymSeriesMatrix() = default;
    explicit SymSeriesMatrix(SeriesMatrix m) : entries(std::move(m)) {
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (entries[i].size() != entries.size())
                fail(errc::invalid_argument, "symmetric matrix must be square");
            for (std::size_t j = i + 1; j < entries.size(); ++j)
                if (!(entries[i][j] == entries[j][i]))
                    fail(errc::invalid_argument, "matrix entries are not symmetric at (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
        }
    }

    std::size_t size() const { return entries.size(); }
    long precision() const {
        long p = kPrecInf;
        for (const auto& row : entries)
            for (const auto& e : row) p = std::min(p, e.precision());
        return p;
    }
};

} // namespace ultraspec
