#pragma once

#include <initializer_list>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>

#include "errors.hpp"
#include "rational.hpp"

namespace mrkit {

/** Window sentinel: the value is known in full, nothing was truncated. */
inline constexpr int kExact = std::numeric_limits<int>::max();

namespace detail {

/** Window + offset with saturation, so kExact survives shifting. */
inline int wshift(int w, long long d) {
    if (w == kExact) return kExact;
    const long long s = static_cast<long long>(w) + d;
    if (s >= kExact) return kExact - 1;
    if (s <= std::numeric_limits<int>::min() / 2) return std::numeric_limits<int>::min() / 2;
    return static_cast<int>(s);
}

} // namespace detail

/**
 * Laurent polynomial in eps with exact rational coefficients and an
 * exactness window. Coefficients at exponents <= exact_to() are exactly
 * right; above the window nothing is known (and nothing is stored).
 * exact_to() == kExact marks a finite Laurent polynomial known in full.
 *
 * Ring operations never clip exact values; truncation enters only through
 * inversion (where the true inverse is an infinite series), the explicit
 * truncated() call, and the window arithmetic itself. Every operation
 * records the tightest window it can justify.
 */
class EpsLaurent {
public:
    EpsLaurent() = default;

    explicit EpsLaurent(const Rational& constant) {
        if (constant != 0) c_[0] = constant;
    }

    explicit EpsLaurent(long long constant) : EpsLaurent(Rational(constant)) {}

    static EpsLaurent monomial(int exp, const Rational& coeff) {
        EpsLaurent v;
        if (coeff != 0) v.c_[exp] = coeff;
        return v;
    }

    static EpsLaurent one() { return EpsLaurent(Rational(1)); }

    /** eps^k, the formal small parameter itself for k = 1. */
    static EpsLaurent eps(int k = 1) { return monomial(k, Rational(1)); }

    static EpsLaurent from_terms(std::initializer_list<std::pair<int, Rational>> terms,
                                 int window = kExact) {
        EpsLaurent v;
        v.exact_to_ = window;
        for (const auto& [e, q] : terms)
            if (q != 0) {
                if (e > window) throw BadExponent("term above the declared window");
                v.c_[e] = q;
            }
        return v;
    }

    int exact_to() const { return exact_to_; }
    bool exact() const { return exact_to_ == kExact; }

    /** True when nothing nonzero is stored, i.e. zero on the whole window. */
    bool is_zero() const { return c_.empty(); }

    const std::map<int, Rational>& terms() const { return c_; }

    /** Coefficient of eps^k; asking above the window is a usage error. */
    Rational coeff(int k) const {
        if (k > exact_to_)
            throw BadExponent("eps exponent " + std::to_string(k) + " is above the window");
        const auto it = c_.find(k);
        return it == c_.end() ? Rational(0) : it->second;
    }

    int min_exp() const {
        if (c_.empty()) throw BadExponent("min_exp of a zero value");
        return c_.begin()->first;
    }

    int max_exp() const {
        if (c_.empty()) throw BadExponent("max_exp of a zero value");
        return c_.rbegin()->first;
    }

    friend EpsLaurent operator-(const EpsLaurent& a) {
        EpsLaurent r;
        r.exact_to_ = a.exact_to_;
        for (const auto& [e, q] : a.c_) r.c_[e] = -q;
        return r;
    }

    friend EpsLaurent operator+(const EpsLaurent& a, const EpsLaurent& b) {
        EpsLaurent r;
        r.exact_to_ = std::min(a.exact_to_, b.exact_to_);
        r.c_ = a.c_;
        for (const auto& [e, q] : b.c_) {
            auto [it, fresh] = r.c_.emplace(e, q);
            if (!fresh && (it->second += q) == 0) r.c_.erase(it);
        }
        r.clip();
        return r;
    }

    friend EpsLaurent operator-(const EpsLaurent& a, const EpsLaurent& b) { return a + (-b); }

    friend EpsLaurent operator*(const EpsLaurent& a, const EpsLaurent& b) {
        // An exact zero annihilates everything, including unknown territory.
        if ((a.exact() && a.is_zero()) || (b.exact() && b.is_zero())) return EpsLaurent();
        EpsLaurent r;
        r.exact_to_ = std::min(detail::wshift(a.exact_to_, b.lowest_possible()),
                               detail::wshift(b.exact_to_, a.lowest_possible()));
        for (const auto& [ea, qa] : a.c_)
            for (const auto& [eb, qb] : b.c_) {
                const int e = ea + eb;
                if (e > r.exact_to_) continue;
                auto [it, fresh] = r.c_.emplace(e, qa * qb);
                if (!fresh && (it->second += qa * qb) == 0) r.c_.erase(it);
            }
        return r;
    }

    friend EpsLaurent operator*(const EpsLaurent& a, const Rational& s) {
        if (s == 0) return EpsLaurent();  // zero swallows the unknown tail as well
        EpsLaurent r;
        r.exact_to_ = a.exact_to_;
        for (const auto& [e, q] : a.c_) r.c_[e] = q * s;
        return r;
    }

    friend EpsLaurent operator*(const Rational& s, const EpsLaurent& a) { return a * s; }

    /** Multiply by the monomial coeff * eps^k (windows just shift). */
    EpsLaurent shifted(int k, const Rational& coeff = Rational(1)) const {
        if (coeff == 0) return EpsLaurent();
        EpsLaurent r;
        r.exact_to_ = detail::wshift(exact_to_, k);
        for (const auto& [e, q] : c_) r.c_[e + k] = q * coeff;
        return r;
    }

    /** Restrict to exponents <= ceiling and record the cut in the window. */
    EpsLaurent truncated(int ceiling) const {
        EpsLaurent r;
        r.exact_to_ = std::min(exact_to_, ceiling);
        for (const auto& [e, q] : c_)
            if (e <= ceiling) r.c_[e] = q;
        return r;
    }

    /**
     * Invert a unit of the truncated ring. The result is developed up to
     * eps^ceiling; it stays exact only when the value is a single monomial.
     */
    EpsLaurent inverse(int ceiling) const {
        if (c_.empty()) throw NotInvertible("cannot invert zero");
        const int d = min_exp();
        const Rational lead = c_.begin()->second;
        if (c_.size() == 1 && exact())
            return monomial(-d, Rational(1) / lead);  // exact monomial inverse
        // Factor as lead * eps^d * (1 + t) with t supported on positive exponents,
        // then run the geometric series for (1 + t)^{-1} up to the needed depth.
        const int out_window = exact() ? ceiling : std::min(detail::wshift(exact_to_, -2LL * d), ceiling);
        const int rel = out_window + d;  // depth needed for (1 + t)^{-1}
        EpsLaurent t = shifted(-d, Rational(1) / lead) - one();
        t = t.truncated(rel);
        EpsLaurent acc = one();
        EpsLaurent sum = one();
        const int tmin = t.c_.empty() ? rel + 1 : t.min_exp();
        for (int n = 1; n * tmin <= rel; ++n) {
            acc = (acc * t).truncated(rel);
            if (acc.is_zero()) break;
            sum = (n % 2 ? sum - acc : sum + acc);
        }
        return sum.shifted(-d, Rational(1) / lead).truncated(out_window);
    }

    /** Exact structural equality: same terms and the same window. */
    friend bool operator==(const EpsLaurent& a, const EpsLaurent& b) {
        return a.exact_to_ == b.exact_to_ && a.c_ == b.c_;
    }

    /** Equality of everything both windows can see. */
    bool agrees_with(const EpsLaurent& b) const {
        const int w = std::min(exact_to_, b.exact_to_);
        auto ia = c_.begin();
        auto ib = b.c_.begin();
        while (ia != c_.end() || ib != b.c_.end()) {
            const int ea = ia == c_.end() ? kExact : ia->first;
            const int eb = ib == b.c_.end() ? kExact : ib->first;
            const int e = std::min(ea, eb);
            if (e > w) break;
            const Rational qa = ea == e ? (ia++)->second : Rational(0);
            const Rational qb = eb == e ? (ib++)->second : Rational(0);
            if (qa != qb) return false;
        }
        return true;
    }

    std::string to_string() const {
        if (c_.empty()) return exact() ? "0" : "0 + O(e^" + std::to_string(exact_to_ + 1) + ")";
        std::ostringstream out;
        bool first = true;
        for (const auto& [e, q] : c_) {
            if (!first) out << (q > 0 ? " + " : " - ");
            else if (q < 0) out << "-";
            first = false;
            const Rational a = abs(q);
            if (a != 1 || e == 0) out << rat_str(a);
            if (e != 0) {
                if (a != 1) out << "*";
                out << "e";
                if (e != 1) out << "^" << e;
            }
        }
        if (!exact()) out << " + O(e^" << exact_to_ + 1 << ")";
        return out.str();
    }

private:
    std::map<int, Rational> c_;
    int exact_to_ = kExact;

    /** First exponent at which this value could differ from what is stored. */
    long long lowest_possible() const {
        return c_.empty() ? static_cast<long long>(exact_to_) + 1 : c_.begin()->first;
    }

    void clip() {
        if (exact()) return;
        for (auto it = c_.upper_bound(exact_to_); it != c_.end();) it = c_.erase(it);
    }
};

} // namespace mrkit
