#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>

#include "hypcert/error.hpp"

namespace hypcert {

/// Exact rational scalar used by every symbolic computation.
using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline int sign(const Rational& r) { return r.sign(); }

/// Parses "n", "n/d", or a decimal such as "-0.125" or "1e-3" into an exact rational.
inline Rational parse_rational(std::string_view text)
{
    auto fail = [&] { throw ParseError("malformed rational '" + std::string(text) + "'"); };
    if (text.empty()) fail();

    auto parse_int = [&](std::string_view s) -> Integer {
        std::size_t i = 0;
        bool neg = false;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
        if (i == s.size()) fail();
        Integer v = 0;
        for (; i < s.size(); ++i) {
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) fail();
            v = v * 10 + (s[i] - '0');
        }
        return neg ? Integer(-v) : v;
    };

    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        Integer num = parse_int(text.substr(0, slash));
        Integer den = parse_int(text.substr(slash + 1));
        if (den == 0) throw ParseError("zero denominator in '" + std::string(text) + "'");
        return Rational(num, den);
    }

    std::string_view mant = text;
    long exp10 = 0;
    if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
        mant = text.substr(0, e);
        Integer ev = parse_int(text.substr(e + 1));
        if (ev > 4096 || ev < -4096) fail();
        exp10 = ev.convert_to<long>();
    }
    std::string digits;
    bool neg = false;
    std::size_t i = 0;
    if (i < mant.size() && (mant[i] == '+' || mant[i] == '-')) neg = mant[i++] == '-';
    bool seen_dot = false, seen_digit = false;
    for (; i < mant.size(); ++i) {
        char c = mant[i];
        if (c == '.' && !seen_dot) {
            seen_dot = true;
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            digits.push_back(c);
            seen_digit = true;
            if (seen_dot) --exp10;
        } else {
            fail();
        }
    }
    if (!seen_digit) fail();
    Integer num = parse_int(digits);
    if (neg) num = -num;
    Integer scale = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(exp10 < 0 ? -exp10 : exp10));
    return exp10 < 0 ? Rational(num, scale) : Rational(num * scale);
}

/// Canonical text form: "n" for integers, otherwise "n/d" in lowest terms.
inline std::string format_rational(const Rational& r)
{
    const Integer& num = boost::multiprecision::numerator(r);
    const Integer& den = boost::multiprecision::denominator(r);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

} // namespace hypcert
