#pragma once

#include <stdexcept>
#include <string>

namespace ultraspec {

enum class errc {
    precision_exhausted,
    not_invertible,
    odd_valuation,
    residue_not_a_square,
    not_a_perfect_square,
    negative_valuation,
    linearly_dependent,
    irrational_eigenvalue,
    not_orthonormalizable,
    not_contractive,
    not_invariant,
    radius_outside_dt,
    parse_error,
    invalid_argument,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::precision_exhausted: return "PrecisionExhausted";
        case errc::not_invertible: return "NotInvertible";
        case errc::odd_valuation: return "OddValuation";
        case errc::residue_not_a_square: return "ResidueNotASquare";
        case errc::not_a_perfect_square: return "NotAPerfectSquare";
        case errc::negative_valuation: return "NegativeValuation";
        case errc::linearly_dependent: return "LinearlyDependent";
        case errc::irrational_eigenvalue: return "IrrationalEigenvalue";
        case errc::not_orthonormalizable: return "NotOrthonormalizable";
        case errc::not_contractive: return "NotContractive";
        case errc::not_invariant: return "NotInvariant";
        case errc::radius_outside_dt: return "RadiusOutsideDT";
        case errc::parse_error: return "ParseError";
        case errc::invalid_argument: return "InvalidArgument";
    }
    return "UnknownError";
}

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code), message_(what) {}

    errc code() const { return code_; }
    const std::string& message() const { return message_; }

private:
    errc code_;
    std::string message_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

} // namespace ultraspec
