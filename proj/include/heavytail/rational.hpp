#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdio>
#include <string>

#include "heavytail/common.hpp"

namespace heavytail {

// Exact rational scalar. Configuration values written as "p/q" strings stay exact
// end-to-end; closed-form constants computed on this type match enumeration identically.
using Rat = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline double to_double(const Rat& r) { return static_cast<double>(r); }
inline double to_double(double x) { return x; }

namespace detail {

// Strict base-10 integer parse. Built digit by digit: leading zeros never flip
// the radix the way prefixed constructor strings would.
inline BigInt parse_bigint(const std::string& s) {
    std::size_t i = 0;
    bool neg = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
    if (i >= s.size()) throw validation_error("parse_rational: missing digits in '" + s + "'");
    BigInt v = 0;
    for (; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9')
            throw validation_error("parse_rational: bad character in '" + s + "'");
        v = v * 10 + (s[i] - '0');
    }
    return neg ? -v : v;
}

}  // namespace detail

// Parse "p", "-p/q", a plain integer, or a decimal string like "0.25" (exact).
inline Rat parse_rational(const std::string& s) {
    if (s.empty()) throw validation_error("parse_rational: empty string");
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        BigInt num = detail::parse_bigint(s.substr(0, slash));
        BigInt den = detail::parse_bigint(s.substr(slash + 1));
        if (den == 0) throw validation_error("parse_rational: zero denominator");
        return Rat(num, den);
    }
    auto dot = s.find('.');
    if (dot == std::string::npos) return Rat(detail::parse_bigint(s));
    std::string head = s.substr(0, dot);
    std::string frac = s.substr(dot + 1);
    bool neg = false;
    if (!head.empty() && (head[0] == '+' || head[0] == '-')) {
        neg = head[0] == '-';
        head = head.substr(1);
    }
    if (head.empty() && frac.empty()) throw validation_error("parse_rational: no digits in '" + s + "'");
    BigInt num = head.empty() ? BigInt(0) : detail::parse_bigint(head);
    BigInt den = 1;
    for (char c : frac) {
        if (c < '0' || c > '9') throw validation_error("parse_rational: bad character in '" + s + "'");
        num = num * 10 + (c - '0');
        den *= 10;
    }
    Rat r(num, den);
    return neg ? -r : r;
}

// Exact conversion: every finite double is a dyadic rational.
inline Rat rational_from_double(double x) {
    if (!std::isfinite(x)) throw validation_error("rational_from_double: non-finite input");
    if (x == 0.0) return Rat(0);
    int exp = 0;
    double mant = std::frexp(x, &exp);  // x = mant * 2^exp, |mant| in [0.5, 1)
    BigInt num = static_cast<long long>(std::ldexp(mant, 53));
    exp -= 53;
    Rat r(num);
    BigInt two = 2;
    if (exp >= 0) {
        for (int i = 0; i < exp; ++i) r *= 2;
    } else {
        BigInt den = 1;
        for (int i = 0; i < -exp; ++i) den *= 2;
        r /= Rat(den);
    }
    return r;
}

inline std::string rational_str(const Rat& r) {
    if (denominator(r) == 1) return numerator(r).str();
    return numerator(r).str() + "/" + denominator(r).str();
}

// x^e for integer e (e may be negative; x must be nonzero then).
inline Rat pow_int(const Rat& x, long e) {
    if (e == 0) return Rat(1);
    if (x == 0) {
        if (e > 0) return Rat(0);
        throw validation_error("pow_int: zero base with negative exponent");
    }
    Rat base = e > 0 ? x : Rat(1) / x;
    unsigned long n = e > 0 ? static_cast<unsigned long>(e) : static_cast<unsigned long>(-e);
    Rat acc(1);
    while (n) {
        if (n & 1UL) acc *= base;
        base *= base;
        n >>= 1UL;
    }
    return acc;
}

inline double pow_int(double x, long e) { return std::pow(x, static_cast<double>(e)); }

}  // namespace heavytail
