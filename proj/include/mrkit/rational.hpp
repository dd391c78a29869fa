#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <string>

#include "errors.hpp"

namespace mrkit {

/**
 * Exact rational scalar. GMP keeps every arithmetic result in lowest terms
 * with a positive denominator, which is exactly the canonical form the
 * serialization layer expects.
 */
using Rational = boost::multiprecision::mpq_rational;

/**
 * Parse "p", "-p" or "p/q". Goes through an explicit division because the
 * GMP string constructor stores "4/2" or "3/-4" verbatim instead of
 * canonicalizing.
 */
inline Rational rat_parse(const std::string& text) {
    const auto integer = [&](const std::string& part) {
        try {
            return boost::multiprecision::mpz_int(part);
        } catch (const std::runtime_error&) {
            throw ConfigError("cannot parse rational '" + text + "'");
        }
    };
    const auto slash = text.find('/');
    if (slash == std::string::npos)
        return Rational(integer(text));
    const auto num = integer(text.substr(0, slash));
    const auto den = integer(text.substr(slash + 1));
    if (den == 0)
        throw ConfigError("rational '" + text + "' has a zero denominator");
    return Rational(num) / Rational(den);
}

/** Canonical text form: "p" when the denominator is 1, otherwise "p/q". */
inline std::string rat_str(const Rational& v) {
    return v.str();
}

/** Exact power of two, negative exponents included. */
inline Rational rat_pow2(int k) {
    Rational v(1);
    const Rational step = k >= 0 ? Rational(2) : Rational(1, 2);
    for (int i = 0; i < (k >= 0 ? k : -k); ++i) v *= step;
    return v;
}

} // namespace mrkit
