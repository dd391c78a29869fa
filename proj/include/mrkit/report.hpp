#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace mrkit {

/**
 * Outcome of one named verification. Informational entries report findings
 * (normalization constants, convention comparisons) without gating the run.
 * Wall time is collected for the operator's benefit only; serialization
 * leaves it out so identical inputs produce identical report bytes.
 */
struct CheckResult {
    std::string name;
    bool passed = false;
    bool informational = false;
    std::string locus;   // first offending coefficient when failed
    std::string detail;  // failure message or informational finding
    std::string window;  // truncation actually covered by the check
    double ms = 0.0;
};

/** A full verification run: overall status is the conjunction of the gates. */
struct Report {
    std::string dataset;
    unsigned long long seed = 0;
    std::vector<CheckResult> checks;

    bool ok() const {
        for (const auto& c : checks)
            if (!c.informational && !c.passed) return false;
        return true;
    }

    /** Locus of the first failed gating check, empty when everything passed. */
    std::string first_failure() const {
        for (const auto& c : checks)
            if (!c.informational && !c.passed) return c.locus;
        return {};
    }
};

/**
 * Runs one check body under timing. The body returns the window string of a
 * passing check; an IdentityViolation marks the check failed and is absorbed
 * so later checks still run. Input errors (ConfigError and friends) are not
 * absorbed: a check that cannot run at all aborts the whole invocation.
 */
template <class F>
CheckResult run_check(const std::string& name, F&& body) {
    CheckResult out;
    out.name = name;
    const auto start = std::chrono::steady_clock::now();
    try {
        out.window = body();
        out.passed = true;
    } catch (const IdentityViolation& e) {
        out.passed = false;
        out.locus = e.locus;
        out.detail = e.what();
        const std::string prefix = e.locus + ": ";
        if (out.detail.rfind(prefix, 0) == 0) out.detail = out.detail.substr(prefix.size());
    }
    out.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                 .count();
    return out;
}

} // namespace mrkit
