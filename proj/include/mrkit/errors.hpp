#pragma once

#include <stdexcept>
#include <string>

namespace mrkit {

/** Base class for every failure the library raises on purpose. */
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/** Inversion was asked of an element that has no inverse in the truncated ring. */
struct NotInvertible : Error {
    using Error::Error;
};

/** An exponent was requested outside the window a truncated value is valid on. */
struct BadExponent : Error {
    using Error::Error;
};

/** Multivariate series from incompatible expansion regions were combined. */
struct RegionError : Error {
    using Error::Error;
};

/** Input configuration was rejected before any computation ran (exit code 2). */
struct ConfigError : Error {
    using Error::Error;
};

/**
 * An identity the library promises to hold failed an exact check.
 * locus pinpoints the first offending coefficient so failures are actionable.
 */
struct IdentityViolation : Error {
    std::string locus;

    IdentityViolation(std::string where, const std::string& detail)
        : Error(where + ": " + detail), locus(std::move(where)) {}
};

} // namespace mrkit
