#pragma once

// Textual formats: the series grammar `term (+|-) term ... [(prec N)]` with
// term = rational [*t[^exp]] | t[^exp], the brace vector format
// `{index: series, ...}`, and the JSON operator/matrix files with series
// entries as canonical strings. Writers emit exactly what the parsers accept,
// so round trips are bit-exact.

#include <cctype>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ultraspec/errors.hpp"
#include "ultraspec/laurent.hpp"
#include "ultraspec/operator_c0.hpp"
#include "ultraspec/series_matrix.hpp"
#include "ultraspec/vector_c0.hpp"

namespace ultraspec {

namespace detail {

class SeriesLexer {
public:
    explicit SeriesLexer(const std::string& s) : s_(s) {}

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool done() {
        skip_ws();
        return pos_ >= s_.size();
    }
    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }
    bool accept(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) fail(errc::parse_error, "expected '" + std::string(1, c) + "' in series at offset " + std::to_string(pos_));
    }
    long integer() {
        skip_ws();
        std::size_t start = pos_;
        if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) ++pos_;
        std::size_t digits = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ == digits) fail(errc::parse_error, "expected an integer at offset " + std::to_string(start));
        return std::stol(s_.substr(start, pos_ - start));
    }
    Integer big_integer() {
        skip_ws();
        std::size_t start = pos_;
        if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) ++pos_;
        std::size_t digits = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ == digits) fail(errc::parse_error, "expected an integer at offset " + std::to_string(start));
        return Integer(s_.substr(start, pos_ - start));
    }
    std::size_t pos() const { return pos_; }

private:
    const std::string& s_;
    std::size_t pos_ = 0;
};

inline Rational lex_rational(SeriesLexer& lx) {
    Integer num = lx.big_integer();
    if (lx.accept('/')) {
        Integer den = lx.big_integer();
        if (sgn(den) <= 0) fail(errc::parse_error, "denominator must be positive");
        Rational q(num, den);
        q.canonicalize();
        return q;
    }
    return Rational(num);
}

} // namespace detail

inline LaurentSeries parse_series(const std::string& text) {
    detail::SeriesLexer lx(text);
    std::map<long, Rational> terms;
    long prec = kPrecInf;
    bool first = true;
    while (true) {
        if (lx.done()) break;
        if (lx.peek() == '(') break;
        int sign = 1;
        if (lx.accept('+')) {
            if (first) fail(errc::parse_error, "unexpected leading '+'");
        } else if (lx.accept('-')) {
            sign = -1;
        } else if (!first) {
            fail(errc::parse_error, "expected '+' or '-' between terms at offset " + std::to_string(lx.pos()));
        }
        Rational coef(1);
        long exp = 0;
        if (lx.peek() == 't') {
            lx.expect('t');
            exp = lx.accept('^') ? lx.integer() : 1;
        } else {
            coef = detail::lex_rational(lx);
            if (lx.accept('*')) {
                lx.expect('t');
                exp = lx.accept('^') ? lx.integer() : 1;
            }
        }
        if (sign < 0) coef = -coef;
        auto [it, inserted] = terms.emplace(exp, coef);
        if (!inserted) it->second += coef;
        first = false;
    }
    if (first) fail(errc::parse_error, "empty series text");
    if (lx.accept('(')) {
        for (char c : std::string("prec")) lx.expect(c);
        prec = lx.integer();
        lx.expect(')');
    }
    if (!lx.done()) fail(errc::parse_error, "trailing characters in series at offset " + std::to_string(lx.pos()));
    return LaurentSeries::from_terms(std::move(terms), prec);
}

inline std::string series_to_string(const LaurentSeries& s) { return s.str(); }

inline std::string vector_to_string(const VectorC0& x) {
    std::ostringstream os;
    os << "{";
    bool first = true;
    for (const auto& [i, s] : x.entries()) {
        if (!first) os << ", ";
        os << i << ": " << s.str();
        first = false;
    }
    os << "}";
    if (x.ambient_precision() < kPrecInf) os << " (prec " << x.ambient_precision() << ")";
    return os.str();
}

inline VectorC0 parse_vector(const std::string& text) {
    std::size_t open = text.find('{');
    std::size_t close = text.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close < open)
        fail(errc::parse_error, "vector text must be brace-delimited");
    std::map<long, LaurentSeries> entries;
    std::string body = text.substr(open + 1, close - open - 1);
    std::size_t pos = 0;
    while (pos < body.size()) {
        std::size_t comma = body.find(',', pos);
        std::string item = body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        pos = comma == std::string::npos ? body.size() : comma + 1;
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        std::size_t colon = item.find(':');
        if (colon == std::string::npos) fail(errc::parse_error, "vector entry needs 'index: series'");
        long idx = std::stol(item.substr(0, colon));
        entries[idx] = parse_series(item.substr(colon + 1));
    }
    long ambient = kPrecInf;
    std::string tailtext = text.substr(close + 1);
    detail::SeriesLexer lx(tailtext);
    if (lx.accept('(')) {
        for (char c : std::string("prec")) lx.expect(c);
        ambient = lx.integer();
        lx.expect(')');
    }
    if (!lx.done()) fail(errc::parse_error, "trailing characters after vector");
    return VectorC0(std::move(entries), ambient);
}

inline nlohmann::ordered_json operator_to_json(const OperatorC0& t) {
    nlohmann::ordered_json j;
    auto& block = j["block"] = nlohmann::ordered_json::array();
    for (const auto& row : t.block()) {
        nlohmann::ordered_json jrow = nlohmann::ordered_json::array();
        for (const auto& e : row) jrow.push_back(e.str());
        block.push_back(std::move(jrow));
    }
    if (!t.tail().empty()) {
        auto& tail = j["tail"] = nlohmann::ordered_json::array();
        for (const auto& [idx, e] : t.tail()) tail.push_back(nlohmann::ordered_json::array({idx, e.str()}));
    }
    return j;
}

inline OperatorC0 parse_operator_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("block") || !j["block"].is_array())
        fail(errc::parse_error, "operator file needs a \"block\" array");
    SeriesMatrix block;
    for (const auto& jrow : j["block"]) {
        if (!jrow.is_array()) fail(errc::parse_error, "block rows must be arrays");
        std::vector<LaurentSeries> row;
        for (const auto& je : jrow) {
            if (!je.is_string()) fail(errc::parse_error, "block entries must be series strings");
            row.push_back(parse_series(je.get<std::string>()));
        }
        block.push_back(std::move(row));
    }
    for (const auto& row : block)
        if (row.size() != block.size()) fail(errc::parse_error, "block must be square");
    std::vector<std::pair<long, LaurentSeries>> tail;
    if (j.contains("tail")) {
        for (const auto& jt : j["tail"]) {
            if (!jt.is_array() || jt.size() != 2 || !jt[0].is_number_integer() || !jt[1].is_string())
                fail(errc::parse_error, "tail entries must be [index, series] pairs");
            tail.emplace_back(jt[0].get<long>(), parse_series(jt[1].get<std::string>()));
        }
    }
    long prec = kPrecInf;
    if (j.contains("prec")) {
        if (!j["prec"].is_number_integer()) fail(errc::parse_error, "prec must be an integer");
        prec = j["prec"].get<long>();
    }
    if (prec < kPrecInf) {
        for (auto& row : block)
            for (auto& e : row) e = e.with_precision(prec);
        for (auto& [idx, e] : tail) e = e.with_precision(prec);
    }
    try {
        return OperatorC0(std::move(block), std::move(tail));
    } catch (const error& e) {
        fail(errc::parse_error, std::string("invalid operator: ") + e.what());
    }
}

inline OperatorC0 parse_operator(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) fail(errc::parse_error, "invalid JSON");
    return parse_operator_json(j);
}

inline nlohmann::ordered_json matrix_to_json(const SymSeriesMatrix& a) {
    nlohmann::ordered_json j;
    auto& block = j["block"] = nlohmann::ordered_json::array();
    for (const auto& row : a.entries) {
        nlohmann::ordered_json jrow = nlohmann::ordered_json::array();
        for (const auto& e : row) jrow.push_back(e.str());
        block.push_back(std::move(jrow));
    }
    return j;
}

inline SymSeriesMatrix parse_matrix(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) fail(errc::parse_error, "invalid JSON");
    OperatorC0 op = parse_operator_json(j);
    if (!op.tail().empty()) fail(errc::parse_error, "matrix files take no tail");
    try {
        return SymSeriesMatrix(op.block());
    } catch (const error& e) {
        fail(errc::parse_error, std::string("not symmetric: ") + e.what());
    }
}

// Line-oriented self-describing report: `key: value` rows in blocks.
class ReportWriter {
public:
    void line(const std::string& key, const std::string& value) { os_ << key << ": " << value << "\n"; }
    void line(const std::string& key, long value) { os_ << key << ": " << value << "\n"; }
    void blank() { os_ << "\n"; }
    void raw(const std::string& text) { os_ << text << "\n"; }
    std::string str() const { return os_.str(); }

private:
    std::ostringstream os_;
};

inline std::string valuation_to_string(const Valuation& v) { return v.str(); }

} // namespace ultraspec
