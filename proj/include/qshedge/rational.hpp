#pragma once

#include "qshedge/error.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <cmath>
#include <string>
#include <string_view>

namespace qshedge {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

namespace detail {

inline BigInt pow10(unsigned n) {
    BigInt r = 1;
    for (unsigned i = 0; i < n; ++i) r *= 10;
    return r;
}

// "123", "+4", "-07" -> BigInt. Returns false on anything else.
inline bool parse_int(std::string_view s, BigInt& out) {
    if (s.empty()) return false;
    bool neg = false;
    std::size_t i = 0;
    if (s[0] == '+' || s[0] == '-') {
        neg = s[0] == '-';
        i = 1;
    }
    if (i == s.size()) return false;
    BigInt v = 0;
    for (; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        v = v * 10 + (s[i] - '0');
    }
    out = neg ? -v : v;
    return true;
}

} // namespace detail

/// Parses a decimal literal ("-2.5", "1e-3", "0.1666", "3") into the exact
/// rational it denotes: digits over a power of ten. The binary double the
/// same text would produce plays no role here.
inline Rational parse_decimal(std::string_view text) {
    std::string_view s = text;
    if (s.empty()) throw Error(Errc::ParseError, "empty number");

    bool neg = false;
    if (s[0] == '+' || s[0] == '-') {
        neg = s[0] == '-';
        s.remove_prefix(1);
    }

    std::string digits;
    long frac_digits = 0;
    long exponent = 0;
    std::size_t i = 0;
    bool any = false;
    for (; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i) {
        digits += s[i];
        any = true;
    }
    if (i < s.size() && s[i] == '.') {
        ++i;
        for (; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i) {
            digits += s[i];
            ++frac_digits;
            any = true;
        }
    }
    if (!any) throw Error(Errc::ParseError, "malformed number '" + std::string(text) + "'");
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        BigInt e;
        if (!detail::parse_int(s.substr(i + 1), e) || e > 100000 || e < -100000)
            throw Error(Errc::ParseError, "malformed exponent '" + std::string(text) + "'");
        exponent = e.convert_to<long>();
        i = s.size();
    }
    if (i != s.size()) throw Error(Errc::ParseError, "malformed number '" + std::string(text) + "'");

    BigInt num(digits.empty() ? "0" : digits);
    BigInt den = 1;
    long net = exponent - frac_digits;
    if (net >= 0)
        num *= detail::pow10(static_cast<unsigned>(net));
    else
        den = detail::pow10(static_cast<unsigned>(-net));
    Rational r(num, den);
    return neg ? Rational(-r) : r;
}

/// Parses "p/q" (integers) or a decimal literal, exactly.
inline Rational parse_rational(std::string_view text) {
    auto slash = text.find('/');
    if (slash == std::string_view::npos) return parse_decimal(text);
    BigInt num, den;
    if (!detail::parse_int(text.substr(0, slash), num) ||
        !detail::parse_int(text.substr(slash + 1), den) || den == 0)
        throw Error(Errc::ParseError, "malformed fraction '" + std::string(text) + "'");
    return Rational(num, den);
}

/// Exact rational value of a finite double (every finite double is rational).
inline Rational rational_from_double(double x) {
    if (!std::isfinite(x)) throw Error(Errc::NonFinitePrice, "non-finite value");
    return Rational(x);
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// "p/q", or just "p" when the denominator is 1.
inline std::string fraction_string(const Rational& r) {
    std::string s = numerator(r).str();
    if (denominator(r) != 1) s += "/" + denominator(r).str();
    return s;
}

} // namespace qshedge
