#pragma once

#include <string>
#include <vector>

#include "eps_laurent.hpp"
#include "errors.hpp"

namespace mrkit {

/**
 * Truncated power series in X with EpsLaurent coefficients, stored densely
 * up to a fixed order cap. valid_to() is the last X-order that is exactly
 * right; kExact marks a genuine polynomial held in full. The X window and
 * the per-coefficient eps windows are independent axes of truncation.
 *
 * A default-constructed XJet is the exact zero with no storage; it adapts
 * to the cap of whatever it meets in arithmetic, so generic code can use
 * XJet() as a neutral starting value.
 */
class XJet {
public:
    XJet() = default;

    /** Exact zero with room for orders 0..cap. */
    explicit XJet(int cap) : c_(cap + 1), cap_(cap) {}

    static XJet constant(int cap, const EpsLaurent& v) {
        XJet r(cap);
        r.c_[0] = v;
        return r;
    }

    static XJet one(int cap) { return constant(cap, EpsLaurent::one()); }

    /** coeff * X^m, an exact monomial. */
    static XJet monomial(int cap, int m, const EpsLaurent& coeff) {
        if (m > cap) throw BadExponent("X-order above the cap");
        XJet r(cap);
        r.c_[m] = coeff;
        return r;
    }

    int cap() const { return cap_; }
    int valid_to() const { return valid_to_; }
    bool exact() const { return valid_to_ == kExact; }

    /** Last stored order that is trustworthy. */
    int window() const { return exact() ? cap_ : std::min(valid_to_, cap_); }

    bool is_zero() const {
        for (const auto& e : c_)
            if (!e.is_zero()) return false;
        return true;
    }

    const EpsLaurent& coeff(int m) const {
        if (exact())  // a polynomial is known at every order, zero beyond its degree
            return m < static_cast<int>(c_.size()) ? c_[m] : zero_ref();
        if (m > window())
            throw BadExponent("X-order " + std::to_string(m) + " is outside the valid window");
        return c_[m];
    }

    /** Highest order with a nonzero stored coefficient, -1 for zero. */
    int degree() const {
        for (int m = static_cast<int>(c_.size()) - 1; m >= 0; --m)
            if (!c_[m].is_zero()) return m;
        return -1;
    }

    friend XJet operator-(const XJet& a) {
        XJet r = a;
        for (auto& e : r.c_) e = -e;
        return r;
    }

    friend XJet operator+(const XJet& a, const XJet& b) {
        if (a.trivial()) return b;
        if (b.trivial()) return a;
        const int cap = merged_cap(a, b);
        XJet r(cap);
        r.valid_to_ = std::min(a.valid_to_, b.valid_to_);
        for (int m = 0; m <= cap; ++m) {
            if (m < static_cast<int>(a.c_.size())) r.c_[m] = a.c_[m];
            if (m < static_cast<int>(b.c_.size())) r.c_[m] = r.c_[m] + b.c_[m];
        }
        r.clip();
        return r;
    }

    friend XJet operator-(const XJet& a, const XJet& b) { return a + (-b); }

    friend XJet operator*(const XJet& a, const XJet& b) {
        if (a.trivial() || b.trivial()) return XJet();  // exact zero annihilates
        if (a.is_zero() && a.exact()) return XJet(merged_cap(a, b));
        if (b.is_zero() && b.exact()) return XJet(merged_cap(a, b));
        const int cap = merged_cap(a, b);
        XJet r(cap);
        if (a.exact() && b.exact()) {
            // Polynomial times polynomial: every stored order comes out right;
            // the product is the full truth only if its degree fits the cap.
            r.valid_to_ = (a.degree() + b.degree() <= cap) ? kExact : cap;
        } else {
            r.valid_to_ = std::min({cap, detail::wshift(a.valid_to_, b.min_order()),
                                    detail::wshift(b.valid_to_, a.min_order())});
        }
        const int top = r.window();
        for (int i = 0; i <= std::min(a.degree(), top); ++i) {
            if (a.c_[i].is_zero()) continue;
            for (int j = 0; j <= std::min(b.degree(), top - i); ++j) {
                if (b.c_[j].is_zero()) continue;
                r.c_[i + j] = r.c_[i + j] + a.c_[i] * b.c_[j];
            }
        }
        return r;
    }

    friend XJet operator*(const XJet& a, const EpsLaurent& s) {
        if (s.exact() && s.is_zero()) return XJet(a.cap_);
        XJet r = a;
        for (auto& e : r.c_) e = e * s;
        return r;
    }

    friend XJet operator*(const XJet& a, const Rational& s) {
        if (s == 0) return XJet(a.cap_);
        XJet r = a;
        for (auto& e : r.c_) e = e * s;
        return r;
    }

    /** d/dX. Exact polynomials stay exact; otherwise one order is spent. */
    XJet derived() const {
        XJet r(cap_);
        r.valid_to_ = exact() ? kExact : valid_to_ - 1;
        const int top = std::min(static_cast<int>(c_.size()) - 1, r.window() + 1);
        for (int m = 1; m <= top; ++m) r.c_[m - 1] = c_[m] * Rational(m);
        return r;
    }

    /**
     * The X-antiderivative with zero constant term. Gains one valid order;
     * an exact polynomial stays exact when the raised degree still fits.
     */
    XJet antiderived() const {
        XJet r(cap_);
        if (exact())
            r.valid_to_ = degree() + 1 <= cap_ ? kExact : cap_;
        else
            r.valid_to_ = std::min(cap_, detail::wshift(valid_to_, 1));
        const int top = std::min(degree(), r.window() - 1);
        for (int m = 0; m <= top; ++m) r.c_[m + 1] = c_[m] * (Rational(1) / Rational(m + 1));
        return r;
    }

    /**
     * Inverse of a series whose constant coefficient is a unit. Developed to
     * the stored cap by the geometric series; eps_ceiling bounds the eps
     * depth of the constant coefficient's inverse.
     */
    XJet inverse(int eps_ceiling) const {
        if (c_.empty() || c_[0].is_zero())
            throw NotInvertible("constant X-coefficient is zero");
        const EpsLaurent u = c_[0].inverse(eps_ceiling);
        if (degree() == 0) {
            XJet r = constant(cap_, u);
            if (!exact()) r.valid_to_ = valid_to_;
            return r;
        }
        // x = c0 (1 - t), t supported on X^1..; 1/x = (1 + t + t^2 + ...) / c0.
        XJet t = one(cap_) - *this * u;
        const int depth = t.window();
        XJet acc = one(cap_);
        XJet sum = one(cap_);
        for (int n = 1; n <= depth; ++n) {
            acc = acc * t;
            if (acc.is_zero()) break;
            sum = sum + acc;
        }
        sum = sum * u;
        sum.valid_to_ = std::min(valid_to_, cap_);  // never exact: the true inverse is infinite
        return sum;
    }

    /** Constant term as a scalar, the evaluation at X = 0. */
    const EpsLaurent& at_zero() const { return coeff(0); }

    /** Everything both windows can see agrees (eps windows included). */
    bool agrees_with(const XJet& b) const {
        int w;
        if (exact() && b.exact())
            w = std::max(degree(), b.degree());  // polynomials: compare full supports
        else
            w = std::min(exact() ? kExact : window(), b.exact() ? kExact : b.window());
        for (int m = 0; m <= w; ++m) {
            const EpsLaurent& qa = m < static_cast<int>(c_.size()) ? c_[m] : zero_ref();
            const EpsLaurent& qb = m < static_cast<int>(b.c_.size()) ? b.c_[m] : zero_ref();
            if (!qa.agrees_with(qb)) return false;
        }
        return true;
    }

    /** Restrict the claim (and storage) to orders <= n. */
    XJet truncated(int n) const {
        XJet r(std::min(cap_, n));
        r.valid_to_ = exact() ? (degree() <= n ? kExact : n) : std::min(valid_to_, n);
        for (int m = 0; m <= std::min(n, static_cast<int>(c_.size()) - 1); ++m) r.c_[m] = c_[m];
        r.clip();
        return r;
    }

    std::string to_string() const {
        std::string out;
        for (int m = 0; m < static_cast<int>(c_.size()); ++m) {
            if (c_[m].is_zero()) continue;
            if (!out.empty()) out += " + ";
            out += "(" + c_[m].to_string() + ")";
            if (m > 0) out += "*X" + (m > 1 ? "^" + std::to_string(m) : std::string());
        }
        if (out.empty()) out = "0";
        if (!exact()) out += " + O(X^" + std::to_string(window() + 1) + ")";
        return out;
    }

private:
    std::vector<EpsLaurent> c_;
    int cap_ = -1;
    int valid_to_ = kExact;

    /** Default-constructed exact zero acting as a cap-free wildcard. */
    bool trivial() const { return cap_ < 0; }

    static int merged_cap(const XJet& a, const XJet& b) {
        if (a.trivial()) return b.cap_;
        if (b.trivial()) return a.cap_;
        if (a.cap_ != b.cap_)
            throw BadExponent("mixing X-jets with different caps (" + std::to_string(a.cap_) +
                              " vs " + std::to_string(b.cap_) + ")");
        return a.cap_;
    }

    /** First order at which this value could differ from the stored picture. */
    long long min_order() const {
        for (int m = 0; m < static_cast<int>(c_.size()); ++m)
            if (!c_[m].is_zero()) return m;
        return static_cast<long long>(window()) + 1;
    }

    static const EpsLaurent& zero_ref() {
        static const EpsLaurent z;
        return z;
    }

    void clip() {
        if (exact()) return;
        for (int m = window() + 1; m < static_cast<int>(c_.size()); ++m) c_[m] = EpsLaurent();
    }
};

} // namespace mrkit
