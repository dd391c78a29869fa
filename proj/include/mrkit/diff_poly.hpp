#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "eps_laurent.hpp"
#include "errors.hpp"
#include "xjet.hpp"

namespace mrkit {

enum class Species : uint8_t { q = 0, r = 1 };

inline char species_letter(Species s) { return s == Species::q ? 'q' : 'r'; }

/** One jet variable: the m-th X-derivative of q or r. */
struct JetVar {
    Species sp;
    int order;

    auto operator<=>(const JetVar&) const = default;
};

/**
 * Monomial in jet variables: factors sorted by (species, order), powers
 * positive. The sorted form doubles as the canonical term order.
 */
class JetMonomial {
public:
    JetMonomial() = default;  // the empty product, i.e. 1

    static JetMonomial var(JetVar v, int power = 1) {
        JetMonomial m;
        if (power > 0) m.f_.emplace_back(v, power);
        return m;
    }

    const std::vector<std::pair<JetVar, int>>& factors() const { return f_; }
    bool is_one() const { return f_.empty(); }

    int degree() const {
        int d = 0;
        for (const auto& [v, p] : f_) d += p;
        return d;
    }

    /** Highest derivative order appearing, -1 for the empty product. */
    int max_order() const {
        int m = -1;
        for (const auto& [v, p] : f_) m = std::max(m, v.order);
        return m;
    }

    friend JetMonomial operator*(const JetMonomial& a, const JetMonomial& b) {
        JetMonomial r;
        auto ia = a.f_.begin();
        auto ib = b.f_.begin();
        while (ia != a.f_.end() || ib != b.f_.end()) {
            if (ib == b.f_.end() || (ia != a.f_.end() && ia->first < ib->first))
                r.f_.push_back(*ia++);
            else if (ia == a.f_.end() || ib->first < ia->first)
                r.f_.push_back(*ib++);
            else {
                r.f_.emplace_back(ia->first, ia->second + ib->second);
                ++ia, ++ib;
            }
        }
        return r;
    }

    /** Divide out one power of v; false if v does not appear. */
    bool reduce(JetVar v, JetMonomial& out) const {
        out.f_.clear();
        bool found = false;
        for (const auto& [w, p] : f_) {
            if (w == v) {
                found = true;
                if (p > 1) out.f_.emplace_back(w, p - 1);
            } else {
                out.f_.emplace_back(w, p);
            }
        }
        return found;
    }

    auto operator<=>(const JetMonomial&) const = default;

    std::string to_string() const {
        if (f_.empty()) return "1";
        std::string out;
        for (const auto& [v, p] : f_) {
            if (!out.empty()) out += "*";
            out += species_letter(v.sp) + std::to_string(v.order);
            if (p > 1) out += "^" + std::to_string(p);
        }
        return out;
    }

private:
    std::vector<std::pair<JetVar, int>> f_;
};

/**
 * Differential polynomial: finite sum of jet monomials with EpsLaurent
 * coefficients. The ring the symbolic halves of the pipelines compute in;
 * everything here is exact unless a coefficient was explicitly truncated.
 */
class DiffPoly {
public:
    DiffPoly() = default;

    explicit DiffPoly(const EpsLaurent& constant) {
        if (!(constant.is_zero() && constant.exact())) c_[JetMonomial()] = constant;
    }

    explicit DiffPoly(const Rational& constant) : DiffPoly(EpsLaurent(constant)) {}

    static DiffPoly var(Species sp, int order, const EpsLaurent& coeff = EpsLaurent::one()) {
        DiffPoly p;
        if (!(coeff.is_zero() && coeff.exact()))
            p.c_[JetMonomial::var({sp, order})] = coeff;
        return p;
    }

    static DiffPoly q(int order = 0) { return var(Species::q, order); }
    static DiffPoly r(int order = 0) { return var(Species::r, order); }
    static DiffPoly one() { return DiffPoly(EpsLaurent::one()); }

    const std::map<JetMonomial, EpsLaurent>& terms() const { return c_; }

    bool is_zero() const {
        for (const auto& [m, v] : c_)
            if (!v.is_zero()) return false;
        return true;
    }

    /** All coefficients carry no truncation. */
    bool exact() const {
        for (const auto& [m, v] : c_)
            if (!v.exact()) return false;
        return true;
    }

    int degree() const {
        int d = 0;
        for (const auto& [m, v] : c_) d = std::max(d, m.degree());
        return d;
    }

    int max_order() const {
        int d = -1;
        for (const auto& [m, v] : c_) d = std::max(d, m.max_order());
        return d;
    }

    friend DiffPoly operator-(const DiffPoly& a) {
        DiffPoly r;
        for (const auto& [m, v] : a.c_) r.c_[m] = -v;
        return r;
    }

    friend DiffPoly operator+(const DiffPoly& a, const DiffPoly& b) {
        DiffPoly r = a;
        for (const auto& [m, v] : b.c_) r.add_term(m, v);
        return r;
    }

    friend DiffPoly operator-(const DiffPoly& a, const DiffPoly& b) { return a + (-b); }

    friend DiffPoly operator*(const DiffPoly& a, const DiffPoly& b) {
        DiffPoly r;
        for (const auto& [ma, va] : a.c_)
            for (const auto& [mb, vb] : b.c_) r.add_term(ma * mb, va * vb);
        return r;
    }

    friend DiffPoly operator*(const DiffPoly& a, const EpsLaurent& s) {
        DiffPoly r;
        for (const auto& [m, v] : a.c_) r.add_term(m, v * s);
        return r;
    }

    friend DiffPoly operator*(const DiffPoly& a, const Rational& s) {
        DiffPoly r;
        for (const auto& [m, v] : a.c_) r.add_term(m, v * s);
        return r;
    }

    /** The total X-derivative: q_m -> q_{m+1} by the Leibniz rule. */
    DiffPoly derived() const {
        DiffPoly r;
        for (const auto& [m, coeff] : c_) {
            const auto& factors = m.factors();
            for (size_t i = 0; i < factors.size(); ++i) {
                const auto [v, p] = factors[i];
                JetMonomial rest;
                m.reduce(v, rest);
                r.add_term(rest * JetMonomial::var({v.sp, v.order + 1}),
                           coeff * Rational(p));
            }
        }
        return r;
    }

    /** Partial derivative with respect to one jet variable. */
    DiffPoly partial(JetVar v) const {
        DiffPoly r;
        JetMonomial rest;
        for (const auto& [m, coeff] : c_) {
            for (const auto& [w, p] : m.factors())
                if (w == v) {
                    m.reduce(v, rest);
                    r.add_term(rest, coeff * Rational(p));
                    break;
                }
        }
        return r;
    }

    /** Jet variables actually present. */
    std::vector<JetVar> support() const {
        std::vector<JetVar> vars;
        for (const auto& [m, coeff] : c_)
            for (const auto& [v, p] : m.factors())
                if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
        return vars;
    }

    /**
     * Evaluation homomorphism: substitute concrete X-jets for the jet
     * variables. jets(sp, m) must return the evaluated m-th derivative.
     */
    template <class Jets>
    XJet evaluate(Jets&& jets, int cap) const {
        XJet out(cap);
        for (const auto& [m, coeff] : c_) {
            XJet term = XJet::one(cap);
            for (const auto& [v, p] : m.factors())
                for (int i = 0; i < p; ++i) term = term * jets(v.sp, v.order);
            out = out + term * coeff;
        }
        return out;
    }

    friend bool operator==(const DiffPoly& a, const DiffPoly& b) { return a.c_ == b.c_; }

    bool agrees_with(const DiffPoly& b) const {
        for (const auto& [m, v] : c_) {
            auto it = b.c_.find(m);
            if (!v.agrees_with(it == b.c_.end() ? EpsLaurent() : it->second)) return false;
        }
        for (const auto& [m, v] : b.c_)
            if (c_.find(m) == c_.end() && !v.agrees_with(EpsLaurent())) return false;
        return true;
    }

    std::string to_string() const {
        if (c_.empty()) return "0";
        std::string out;
        for (const auto& [m, v] : c_) {
            if (!out.empty()) out += " + ";
            out += "(" + v.to_string() + ")";
            if (!m.is_one()) out += "*" + m.to_string();
        }
        return out;
    }

private:
    std::map<JetMonomial, EpsLaurent> c_;

    void add_term(const JetMonomial& m, const EpsLaurent& v) {
        if (v.is_zero() && v.exact()) return;
        auto it = c_.find(m);
        if (it == c_.end())
            c_[m] = v;
        else {
            it->second = it->second + v;
            if (it->second.is_zero() && it->second.exact()) c_.erase(it);
        }
    }
};

/**
 * Initial data for the evaluated pipelines: q and r as exact polynomials
 * in X and eps, plus the truncation orders everything downstream uses.
 * Evaluated computations run at working_cap(), generously above N_X, so
 * that derivative and inversion costs never eat into the orders the
 * acceptance windows must cover; emission truncates back down to N_X.
 */
struct InitialData {
    using Term = std::tuple<int, int, Rational>;  // X-power, eps-power, coefficient

    std::vector<Term> q_terms, r_terms;
    int n_x = 12;
    int n_xi = 8;
    int eps_ceiling = 8;
    std::string name = "data";

    int working_cap() const { return n_x + n_xi + 6; }

    XJet q_jet(int cap) const { return build(q_terms, cap); }
    XJet r_jet(int cap) const { return build(r_terms, cap); }

private:
    static XJet build(const std::vector<Term>& terms, int cap) {
        XJet out(cap);
        for (const auto& [xp, ep, coeff] : terms) {
            if (xp < 0) throw ConfigError("initial data needs non-negative X-powers");
            if (xp > cap) throw ConfigError("initial data exceeds the working X-order");
            out = out + XJet::monomial(cap, xp, EpsLaurent::monomial(ep, coeff));
        }
        return out;
    }
};

/** Lazily extended towers of X-derivatives of the initial data. */
class EvalContext {
public:
    EvalContext(const InitialData& data, int cap)
        : cap_(cap), q_{data.q_jet(cap)}, r_{data.r_jet(cap)} {}

    int cap() const { return cap_; }

    const XJet& jet(Species sp, int order) const {
        auto& tower = sp == Species::q ? q_ : r_;
        while (static_cast<int>(tower.size()) <= order) tower.push_back(tower.back().derived());
        return tower[order];
    }

    /** The substitution functor evaluate() expects. */
    auto jets() const {
        return [this](Species sp, int order) -> const XJet& { return jet(sp, order); };
    }

private:
    int cap_;
    mutable std::vector<XJet> q_, r_;
};

/** Evaluate a differential polynomial on concrete initial data. */
inline XJet dp_eval(const DiffPoly& p, const EvalContext& ctx) {
    return p.evaluate(ctx.jets(), ctx.cap());
}

} // namespace mrkit
