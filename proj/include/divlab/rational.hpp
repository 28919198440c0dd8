#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <string_view>

#include "divlab/errors.hpp"

namespace divlab {

/// Arbitrary-precision rational. All enumeration oracles and exact
/// cross-checks use this type; doubles appear only at reporting boundaries.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

namespace detail {

/// Strict base-10 integer parser; avoids the octal/hex prefix rules of the
/// big-integer string constructor (where "025" would mean 21).
inline BigInt parse_decimal_integer(std::string_view s) {
    if (s.empty()) throw UsageError("empty integer literal");
    bool negative = false;
    std::size_t i = 0;
    if (s[0] == '+' || s[0] == '-') {
        negative = s[0] == '-';
        i = 1;
    }
    if (i == s.size()) throw UsageError("malformed integer literal");
    BigInt value = 0;
    for (; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') throw UsageError("malformed integer literal");
        value = value * 10 + (s[i] - '0');
    }
    return negative ? -value : value;
}

} // namespace detail

/// Parses "a/b", a plain integer, or a decimal like "0.25" into an exact
/// rational. Decimals are exact (no binary rounding), so "--pc 0.5" means 1/2.
inline Rational parse_rational(std::string_view text) {
    const std::string s(text);
    if (s.empty()) throw UsageError("empty rational literal");
    try {
        const auto slash = s.find('/');
        if (slash != std::string::npos) {
            const BigInt num = detail::parse_decimal_integer(s.substr(0, slash));
            const BigInt den = detail::parse_decimal_integer(s.substr(slash + 1));
            if (den == 0) throw UsageError("zero denominator in '" + s + "'");
            return Rational(num, den);
        }
        const auto dot = s.find('.');
        if (dot == std::string::npos) return Rational(detail::parse_decimal_integer(s));
        const std::string digits = s.substr(0, dot) + s.substr(dot + 1);
        const std::size_t frac_len = s.size() - dot - 1;
        BigInt den = 1;
        for (std::size_t i = 0; i < frac_len; ++i) den *= 10;
        return Rational(detail::parse_decimal_integer(digits), den);
    } catch (const std::runtime_error&) {
        throw UsageError("malformed rational '" + s + "'");
    }
}

inline std::string to_string(const Rational& r) { return r.str(); }

} // namespace divlab
