#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>

#include "eps_laurent.hpp"
#include "errors.hpp"
#include "rational.hpp"

namespace mrkit {

/** Floor sentinel: nothing was cut off below, the series is exact downward. */
inline constexpr int kNoFloor = std::numeric_limits<int>::min() / 2;

/**
 * Laurent-type series in one spectral variable: finitely many positive
 * powers, an infinite (truncated) tail of negative ones. Coefficients live
 * in any ring C with the house interface (is_zero, exact, agrees_with,
 * ring operators, default constructor meaning exact zero).
 *
 * floor() is the lowest exponent the value is exact at; below it nothing
 * is known and nothing is stored. Tops are never truncated, so stored
 * maxima are true degrees and window propagation through products is sound.
 */
template <class C>
class XiSeries {
public:
    XiSeries() = default;

    explicit XiSeries(int floor) : floor_(floor) {}

    static XiSeries monomial(int exp, C coeff) {
        XiSeries r;
        r.set(exp, std::move(coeff));
        return r;
    }

    int floor() const { return floor_; }
    bool exact() const { return floor_ == kNoFloor; }
    const std::map<int, C>& terms() const { return c_; }

    bool is_zero() const {
        for (const auto& [e, v] : c_)
            if (!v.is_zero()) return false;
        return true;
    }

    /** Highest stored exponent; kNoFloor when empty. */
    int top_degree() const { return c_.empty() ? kNoFloor : c_.rbegin()->first; }

    /** Coefficient of xi^e; asking below the floor is a usage error. */
    const C& coeff(int e) const {
        if (e < floor_)
            throw BadExponent("xi exponent " + std::to_string(e) + " is below the floor");
        const auto it = c_.find(e);
        return it == c_.end() ? zero_ref() : it->second;
    }

    void set(int e, C v) {
        if (e < floor_) throw BadExponent("xi exponent below the floor");
        if (v.is_zero() && v.exact())
            c_.erase(e);
        else
            c_[e] = std::move(v);
    }

    /** First exponent (from the top) whose coefficient is not zero. */
    std::optional<std::pair<int, C>> first_nonzero() const {
        for (auto it = c_.rbegin(); it != c_.rend(); ++it)
            if (!it->second.is_zero()) return std::make_pair(it->first, it->second);
        return std::nullopt;
    }

    friend XiSeries operator-(const XiSeries& a) {
        XiSeries r(a.floor_);
        for (const auto& [e, v] : a.c_) r.c_[e] = -v;
        return r;
    }

    friend XiSeries operator+(const XiSeries& a, const XiSeries& b) {
        XiSeries r(std::max(a.floor_, b.floor_));
        for (const auto& [e, v] : a.c_)
            if (e >= r.floor_) r.c_[e] = v;
        for (const auto& [e, v] : b.c_) {
            if (e < r.floor_) continue;
            auto it = r.c_.find(e);
            if (it == r.c_.end())
                r.c_[e] = v;
            else {
                it->second = it->second + v;
                if (it->second.is_zero() && it->second.exact()) r.c_.erase(it);
            }
        }
        return r;
    }

    friend XiSeries operator-(const XiSeries& a, const XiSeries& b) { return a + (-b); }

    friend XiSeries operator*(const XiSeries& a, const XiSeries& b) {
        if (a.exact_zero() || b.exact_zero()) return XiSeries();
        XiSeries r(product_floor(a, b));
        for (const auto& [ea, va] : a.c_) {
            if (va.is_zero() && va.exact()) continue;
            for (const auto& [eb, vb] : b.c_) {
                const int e = ea + eb;
                if (e < r.floor_) continue;
                const C prod = va * vb;
                auto it = r.c_.find(e);
                if (it == r.c_.end())
                    r.c_[e] = prod;
                else
                    it->second = it->second + prod;
            }
        }
        r.prune();
        return r;
    }

    template <class S>
    XiSeries scaled(const S& s) const {
        XiSeries r(floor_);
        for (const auto& [e, v] : c_) r.c_[e] = v * s;
        r.prune();
        return r;
    }

    /** Multiply by xi^k: exponents and floor both shift. */
    XiSeries shifted(int k) const {
        XiSeries r(exact() ? kNoFloor : floor_ + k);
        for (const auto& [e, v] : c_) r.c_[e + k] = v;
        return r;
    }

    /** Apply f to every coefficient (derivatives and the like). */
    template <class F>
    XiSeries map_coeffs(F&& f) const {
        XiSeries r(floor_);
        for (const auto& [e, v] : c_) r.c_[e] = f(v);
        r.prune();
        return r;
    }

    /** Drop information below the given floor, recording the cut. */
    XiSeries floored(int floor) const {
        if (floor <= floor_) return *this;
        XiSeries r(floor);
        for (const auto& [e, v] : c_)
            if (e >= floor) r.c_[e] = v;
        return r;
    }

    /** Equality of everything both floors can see. */
    bool agrees_with(const XiSeries& b) const {
        const int w = std::max(floor_, b.floor_);
        auto ia = c_.lower_bound(w);
        auto ib = b.c_.lower_bound(w);
        while (ia != c_.end() || ib != b.c_.end()) {
            const int ea = ia == c_.end() ? std::numeric_limits<int>::max() : ia->first;
            const int eb = ib == b.c_.end() ? std::numeric_limits<int>::max() : ib->first;
            const int e = std::min(ea, eb);
            const C& va = ea == e ? (ia++)->second : zero_ref();
            const C& vb = eb == e ? (ib++)->second : zero_ref();
            if (!va.agrees_with(vb)) return false;
        }
        return true;
    }

    std::string to_string() const {
        std::string out;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
            if (!out.empty()) out += " + ";
            out += "(" + it->second.to_string() + ")";
            if (it->first != 0) out += "*xi^" + std::to_string(it->first);
        }
        if (out.empty()) out = "0";
        if (!exact()) out += " + O(xi^" + std::to_string(floor_ - 1) + ")";
        return out;
    }

private:
    std::map<int, C> c_;
    int floor_ = kNoFloor;

    bool exact_zero() const { return exact() && c_.empty(); }

    static const C& zero_ref() {
        static const C z{};
        return z;
    }

    static int product_floor(const XiSeries& a, const XiSeries& b) {
        if (a.exact() && b.exact()) return kNoFloor;
        // Missing a-terms (below a's floor) meet b's top and vice versa.
        long long f = kNoFloor;
        if (!a.exact())
            f = std::max(f, static_cast<long long>(a.floor_) +
                                (b.c_.empty() ? b.floor_ : b.top_degree()));
        if (!b.exact())
            f = std::max(f, static_cast<long long>(b.floor_) +
                                (a.c_.empty() ? a.floor_ : a.top_degree()));
        return static_cast<int>(std::max<long long>(f, kNoFloor));
    }

    void prune() {
        for (auto it = c_.begin(); it != c_.end();)
            it = (it->second.is_zero() && it->second.exact()) ? c_.erase(it) : std::next(it);
    }
};

/**
 * exp of a series supported on strictly negative powers: the sum
 * sum_n s^n / n! terminates once n exceeds the floor depth. The caller
 * supplies the coefficient-ring identity (rings here carry context like
 * storage caps, so there is no free-standing one()).
 */
template <class C>
XiSeries<C> xi_exp(const XiSeries<C>& s, const C& one) {
    if (s.top_degree() > -1 && !s.is_zero())
        throw BadExponent("xi_exp needs a series supported on xi^-1 and below");
    XiSeries<C> result = XiSeries<C>::monomial(0, one);
    if (s.is_zero() && s.exact()) return result;
    if (s.exact())  // the true exponential has an infinite tail; a floor must cut it
        throw BadExponent("xi_exp needs a floored series to know where to stop");
    result = result.floored(s.floor());
    XiSeries<C> acc = XiSeries<C>::monomial(0, one).floored(s.floor());
    Rational fact(1);
    const int depth = -s.floor();
    for (int n = 1; n <= depth; ++n) {
        acc = acc * s;
        if (acc.is_zero()) break;
        fact *= n;
        result = result + acc.scaled(Rational(1) / fact);
    }
    return result;
}

/**
 * Multiplicative inverse of a series of the form 1 + (strictly negative
 * powers), by the geometric sum. Same contract as xi_exp: a floor is needed
 * to cut the tail, and the identity is supplied by the caller.
 */
template <class C>
XiSeries<C> xi_invert_unit(const XiSeries<C>& s, const C& one) {
    XiSeries<C> t = XiSeries<C>::monomial(0, one) - s;
    if (t.top_degree() > -1 && !t.is_zero())
        throw BadExponent("xi_invert_unit needs 1 plus terms at xi^-1 and below");
    XiSeries<C> result = XiSeries<C>::monomial(0, one);
    if (t.is_zero() && t.exact()) return result;
    if (t.exact())
        throw BadExponent("xi_invert_unit needs a floored series to know where to stop");
    result = result.floored(t.floor());
    XiSeries<C> acc = XiSeries<C>::monomial(0, one).floored(t.floor());
    const int depth = -t.floor();
    for (int n = 1; n <= depth; ++n) {
        acc = acc * t;
        if (acc.is_zero()) break;
        result = result + acc;
    }
    return result;
}

} // namespace mrkit
