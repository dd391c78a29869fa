#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rational.hpp"
#include "xi_series.hpp"

namespace mrkit {

/**
 * Expansion region for several spectral variables: the variable listed
 * first dominates in magnitude, and each later one is smaller. Kernels
 * 1/(xi_a - xi_b) expand differently depending on which argument the
 * region declares larger, so values remember their region and refuse to
 * mix across different ones.
 */
class Region {
public:
    Region() = default;

    explicit Region(std::vector<int> order) : order_(std::move(order)) {}

    /** |xi_0| > |xi_1| > ... > |xi_{k-1}|. */
    static Region standard(int k) {
        std::vector<int> o(k);
        std::iota(o.begin(), o.end(), 0);
        return Region(std::move(o));
    }

    int vars() const { return static_cast<int>(order_.size()); }

    /** Position in the magnitude ordering (0 = largest). */
    int position(int var) const {
        for (int i = 0; i < vars(); ++i)
            if (order_[i] == var) return i;
        throw RegionError("variable " + std::to_string(var) + " is not in the region");
    }

    /** The argument the region declares larger in magnitude. */
    int dominant(int a, int b) const { return position(a) < position(b) ? a : b; }

    friend bool operator==(const Region& x, const Region& y) { return x.order_ == y.order_; }

    std::string to_string() const {
        std::string out = "|xi_";
        for (int i = 0; i < vars(); ++i) {
            if (i) out += "| > |xi_";
            out += std::to_string(order_[i] + 1);
        }
        return out + "|";
    }

private:
    std::vector<int> order_;
};

/**
 * Sparse series in k spectral variables, valid in one expansion region.
 * The window is a box of per-variable floors: a coefficient is exact iff
 * every coordinate sits at or above its floor, and only such terms are
 * stored. Tops are structural (whatever is stored), and unlike the
 * univariate case a stored top is NOT always a true top: region-expanded
 * kernels carry infinitely many positive powers of dominated variables.
 * The mechanical floor propagation in operator* is therefore sound only
 * for assemblies whose factors have true tops (single kernels against
 * downward-supported numerators); cyclic kernel chains must use
 * mul_boxed with demand-planned boxes instead. See correlators.hpp.
 */
template <class C>
class MultiSeries {
public:
    using Key = std::vector<int>;

    MultiSeries() = default;

    MultiSeries(Region region, std::vector<int> floors)
        : region_(std::move(region)), floors_(std::move(floors)) {
        if (static_cast<int>(floors_.size()) != region_.vars())
            throw RegionError("floor vector size does not match the region");
    }

    static MultiSeries zero_like(const Region& region) {
        return MultiSeries(region, std::vector<int>(region.vars(), kNoFloor));
    }

    const Region& region() const { return region_; }
    int vars() const { return region_.vars(); }
    const std::vector<int>& floors() const { return floors_; }
    const std::map<Key, C>& terms() const { return c_; }
    bool empty() const { return c_.empty(); }

    bool is_zero() const {
        for (const auto& [e, v] : c_)
            if (!v.is_zero()) return false;
        return true;
    }

    /** Per-variable structural maxima of the stored support. */
    std::vector<int> tops() const {
        std::vector<int> t(vars(), kNoFloor);
        for (const auto& [e, v] : c_)
            for (int i = 0; i < vars(); ++i) t[i] = std::max(t[i], e[i]);
        return t;
    }

    bool inside(const Key& e) const {
        for (int i = 0; i < vars(); ++i)
            if (e[i] < floors_[i]) return false;
        return true;
    }

    const C& coeff(const Key& e) const {
        if (!inside(e)) throw BadExponent("exponent vector below the window box");
        const auto it = c_.find(e);
        return it == c_.end() ? zero_ref() : it->second;
    }

    void set(const Key& e, C v) {
        if (static_cast<int>(e.size()) != vars()) throw RegionError("exponent arity mismatch");
        if (!inside(e)) throw BadExponent("exponent vector below the window box");
        if (v.is_zero() && v.exact())
            c_.erase(e);
        else
            c_[e] = std::move(v);
    }

    void add_term(const Key& e, const C& v) {
        if (!inside(e)) return;  // below the window: unknown territory anyway
        auto it = c_.find(e);
        if (it == c_.end())
            c_[e] = v;
        else
            it->second = it->second + v;
    }

    friend MultiSeries operator-(const MultiSeries& a) {
        MultiSeries r(a.region_, a.floors_);
        for (const auto& [e, v] : a.c_) r.c_[e] = -v;
        return r;
    }

    friend MultiSeries operator+(const MultiSeries& a, const MultiSeries& b) {
        check_mixable(a, b);
        MultiSeries r(a.region_, a.floors_);
        for (int i = 0; i < r.vars(); ++i) r.floors_[i] = std::max(a.floors_[i], b.floors_[i]);
        for (const auto& [e, v] : a.c_)
            if (r.inside(e)) r.c_[e] = v;
        for (const auto& [e, v] : b.c_) {
            if (!r.inside(e)) continue;
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

    friend MultiSeries operator-(const MultiSeries& a, const MultiSeries& b) { return a + (-b); }

    /**
     * Product with mechanical window propagation from stored tops. Sound
     * when each factor's stored support is bounded above by its true
     * support in every variable (see the class comment).
     */
    friend MultiSeries operator*(const MultiSeries& a, const MultiSeries& b) {
        check_mixable(a, b);
        MultiSeries r(a.region_, a.floors_);
        const auto ta = a.tops(), tb = b.tops();
        for (int i = 0; i < r.vars(); ++i) {
            long long f = kNoFloor;
            if (a.floors_[i] != kNoFloor)
                f = std::max(f, static_cast<long long>(a.floors_[i]) + tb[i]);
            if (b.floors_[i] != kNoFloor)
                f = std::max(f, static_cast<long long>(b.floors_[i]) + ta[i]);
            r.floors_[i] = static_cast<int>(std::max<long long>(f, kNoFloor));
        }
        r.accumulate_product(a, b, nullptr, nullptr);
        return r;
    }

    /**
     * Product restricted to an explicit box [lo, hi]: terms outside are
     * dropped during accumulation and the result's floors are set to lo.
     * The caller owns the demand analysis that justifies the box.
     */
    static MultiSeries mul_boxed(const MultiSeries& a, const MultiSeries& b,
                                 const std::vector<int>& lo, const std::vector<int>& hi) {
        check_mixable(a, b);
        MultiSeries r(a.region_, lo);
        r.accumulate_product(a, b, &lo, &hi);
        return r;
    }

    template <class S>
    MultiSeries scaled(const S& s) const {
        MultiSeries r(region_, floors_);
        for (const auto& [e, v] : c_) r.c_[e] = v * s;
        r.prune();
        return r;
    }

    /** Multiply by the k-th power of one variable: exponents and floor shift. */
    MultiSeries shifted(int var, int k) const {
        if (var < 0 || var >= vars()) throw RegionError("shift variable out of range");
        std::vector<int> floors = floors_;
        if (floors[var] != kNoFloor) floors[var] += k;
        MultiSeries r(region_, std::move(floors));
        for (const auto& [e, v] : c_) {
            Key key = e;
            key[var] += k;
            r.c_[key] = v;
        }
        return r;
    }

    /** Keep only terms inside [lo, hi]; floors become lo. */
    MultiSeries cropped(const std::vector<int>& lo, const std::vector<int>& hi) const {
        MultiSeries r(region_, lo);
        for (const auto& [e, v] : c_) {
            bool keep = true;
            for (int i = 0; i < vars() && keep; ++i)
                keep = e[i] >= lo[i] && e[i] <= hi[i];
            if (keep) r.c_[e] = v;
        }
        for (int i = 0; i < vars(); ++i)
            if (floors_[i] > lo[i])
                throw BadExponent("cropping below the known window in variable " +
                                  std::to_string(i + 1));
        return r;
    }

    /** Embed a univariate series as a function of one chosen variable. */
    static MultiSeries lift(const XiSeries<C>& s, int var, const Region& region) {
        std::vector<int> floors(region.vars(), kNoFloor);
        floors[var] = s.floor();
        MultiSeries r(region, std::move(floors));
        for (const auto& [e, v] : s.terms()) {
            Key key(region.vars(), 0);
            key[var] = e;
            r.c_[key] = v;
        }
        return r;
    }

    /**
     * Substitute both variables of a bivariate series by the same one:
     * the diagonal evaluation, with the floor a diagonal product window.
     */
    XiSeries<C> collapse_diagonal() const {
        if (vars() != 2) throw RegionError("diagonal collapse needs exactly two variables");
        const auto t = tops();
        long long f = kNoFloor;
        if (floors_[0] != kNoFloor) f = std::max(f, static_cast<long long>(floors_[0]) + t[1]);
        if (floors_[1] != kNoFloor) f = std::max(f, static_cast<long long>(floors_[1]) + t[0]);
        XiSeries<C> r(static_cast<int>(std::max<long long>(f, kNoFloor)));
        for (const auto& [e, v] : c_) {
            const int n = e[0] + e[1];
            if (n >= r.floor()) r.set(n, r.coeff(n) + v);
        }
        return r;
    }

    bool agrees_with(const MultiSeries& b) const {
        check_mixable(*this, b);
        std::vector<int> w(vars());
        for (int i = 0; i < vars(); ++i) w[i] = std::max(floors_[i], b.floors_[i]);
        auto visible = [&](const Key& e) {
            for (int i = 0; i < static_cast<int>(e.size()); ++i)
                if (e[i] < w[i]) return false;
            return true;
        };
        for (const auto& [e, v] : c_)
            if (visible(e) && !v.agrees_with(b.lookup(e))) return false;
        for (const auto& [e, v] : b.c_)
            if (visible(e) && c_.find(e) == c_.end() && !v.agrees_with(zero_ref())) return false;
        return true;
    }

    /** First stored coefficient that is not zero, scanning top-down. */
    std::optional<std::pair<Key, C>> first_nonzero() const {
        for (auto it = c_.rbegin(); it != c_.rend(); ++it)
            if (!it->second.is_zero()) return std::make_pair(it->first, it->second);
        return std::nullopt;
    }

    std::string to_string() const {
        std::ostringstream out;
        bool first = true;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
            if (!first) out << " + ";
            first = false;
            out << "(" << it->second.to_string() << ")*" << key_str(it->first);
        }
        if (first) out << "0";
        return out.str();
    }

    static std::string key_str(const Key& e) {
        std::string out = "xi^(";
        for (int i = 0; i < static_cast<int>(e.size()); ++i) {
            if (i) out += ",";
            out += std::to_string(e[i]);
        }
        return out + ")";
    }

private:
    Region region_;
    std::map<Key, C> c_;
    std::vector<int> floors_;

    static void check_mixable(const MultiSeries& a, const MultiSeries& b) {
        if (!(a.region_ == b.region_))
            throw RegionError("mixing series from regions " + a.region_.to_string() + " and " +
                              b.region_.to_string());
    }

    const C& lookup(const Key& e) const {
        const auto it = c_.find(e);
        return it == c_.end() ? zero_ref() : it->second;
    }

    static const C& zero_ref() {
        static const C z{};
        return z;
    }

    void accumulate_product(const MultiSeries& a, const MultiSeries& b,
                            const std::vector<int>* lo, const std::vector<int>* hi) {
        Key e(vars());
        for (const auto& [ea, va] : a.c_) {
            if (va.is_zero() && va.exact()) continue;
            for (const auto& [eb, vb] : b.c_) {
                bool keep = true;
                for (int i = 0; i < vars(); ++i) {
                    e[i] = ea[i] + eb[i];
                    const int floor = lo ? (*lo)[i] : floors_[i];
                    if (e[i] < floor || (hi && e[i] > (*hi)[i])) {
                        keep = false;
                        break;
                    }
                }
                if (!keep) continue;
                const C prod = va * vb;
                auto it = c_.find(e);
                if (it == c_.end())
                    c_[e] = prod;
                else
                    it->second = it->second + prod;
            }
        }
        prune();
    }

    void prune() {
        for (auto it = c_.begin(); it != c_.end();)
            it = (it->second.is_zero() && it->second.exact()) ? c_.erase(it) : std::next(it);
    }
};

/**
 * Region expansion of 1/(xi_a - xi_b) up to the given depth in the
 * dominated variable:
 *   sum_m xi_b^m xi_a^{-m-1}   when the region makes xi_a larger,
 *  -sum_m xi_a^m xi_b^{-m-1}   when it makes xi_b larger.
 * The dominant variable's floor records the depth cut; the dominated
 * variable's stored top is NOT a true top, which is what makes chained
 * kernel products need boxed multiplication.
 */
template <class C>
MultiSeries<C> kernel_expand(const Region& region, int va, int vb, int depth, const C& one) {
    if (va == vb) throw RegionError("kernel needs two distinct variables");
    const bool a_dom = region.dominant(va, vb) == va;
    const int up = a_dom ? vb : va;      // dominated: positive powers
    const int down = a_dom ? va : vb;    // dominant: negative powers
    std::vector<int> floors(region.vars(), kNoFloor);
    floors[down] = -depth - 1;
    MultiSeries<C> r(region, std::move(floors));
    for (int m = 0; m <= depth; ++m) {
        typename MultiSeries<C>::Key e(region.vars(), 0);
        e[up] = m;
        e[down] = -m - 1;
        r.set(e, a_dom ? one : -one);
    }
    return r;
}

} // namespace mrkit
