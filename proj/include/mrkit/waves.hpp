#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "diff_poly.hpp"
#include "errors.hpp"
#include "multi_series.hpp"
#include "resolvent.hpp"
#include "xi_series.hpp"
#include "xjet.hpp"

namespace mrkit {

enum class WaveKind { A, B };

/**
 * Evaluated potentials together with the derived scalars the wave
 * construction keeps reusing: f = q_X/q, g = qr, and the inverse of q.
 * Building this throws NotInvertible when the constant term of q is not
 * a unit, which is the ingestion-time rejection of bad data.
 */
struct WaveContext {
    XJet q, r, one, q_inv, f, g;
    int eps_ceiling = 0;

    static WaveContext from(const InitialData& data) {
        const int cap = data.working_cap();
        WaveContext w;
        w.q = data.q_jet(cap);
        w.r = data.r_jet(cap);
        w.one = XJet::one(cap);
        w.eps_ceiling = data.eps_ceiling;
        w.q_inv = w.q.inverse(w.eps_ceiling);
        w.f = w.q.derived() * w.q_inv;
        w.g = w.q * w.r;
        return w;
    }
};

/**
 * Coefficients of the exponent series x (kind A) or y (kind B) solving the
 * Riccati form of the wave equation:
 *
 *   eps x' + x^2 + (2 xi - eps f) x + g = 0
 *   eps y' + y^2 + (eps f - 2 xi) y + eps^2 f' + g = 0
 *
 * by the recursions (k >= 1, with x_1 = -g/2, y_1 = (eps^2 f' + g)/2)
 *
 *   x_{k+1} = (-eps x_k' - sum_{m=1}^{k-1} x_m x_{k-m} + eps f x_k)/2
 *   y_{k+1} = (+eps y_k' + sum_{m=1}^{k-1} y_m y_{k-m} + eps f y_k)/2.
 *
 * The y-sum runs over the y's; the residual check below pins that down
 * against the quadratic equation itself.
 */
struct RiccatiSeries {
    WaveKind kind = WaveKind::A;
    std::vector<XJet> c;  // 1-based: c[k] is the xi^{-k} coefficient

    int order() const { return static_cast<int>(c.size()) - 1; }

    /** The exponent series as a xi-series with floor -order. */
    XiSeries<XJet> series() const {
        XiSeries<XJet> s(-order());
        for (int k = 1; k <= order(); ++k) s.set(-k, c[k]);
        return s;
    }
};

inline RiccatiSeries riccati_series(const WaveContext& w, WaveKind kind, int n) {
    if (n < 1) throw ConfigError("riccati series needs at least one level");
    const Rational half(1, 2);
    const EpsLaurent eps = EpsLaurent::eps(1);
    const XJet eps_f = w.f * eps;
    RiccatiSeries out{kind, std::vector<XJet>(static_cast<size_t>(n) + 1)};
    out.c[1] = kind == WaveKind::A
                   ? w.g * Rational(-1, 2)
                   : (w.f.derived() * EpsLaurent::eps(2) + w.g) * half;
    const Rational dsign = kind == WaveKind::A ? Rational(-1) : Rational(1);
    for (int k = 1; k < n; ++k) {
        XJet sum;
        for (int m = 1; m <= k - 1; ++m) sum = sum + out.c[m] * out.c[k - m];
        out.c[k + 1] =
            (out.c[k].derived() * eps * dsign + sum * dsign + eps_f * out.c[k]) * half;
    }
    return out;
}

/** Substitutes the series back into its quadratic equation; returns the
 * residual, which must vanish on the recorded window. */
inline XiSeries<XJet> riccati_residual(const WaveContext& w, const RiccatiSeries& s) {
    const EpsLaurent eps = EpsLaurent::eps(1);
    const XiSeries<XJet> x = s.series();
    const auto dx = [](const XiSeries<XJet>& t) {
        return t.map_coeffs([](const XJet& v) { return v.derived(); });
    };
    XiSeries<XJet> res = dx(x).scaled(eps) + x * x;
    if (s.kind == WaveKind::A) {
        res = res + x.shifted(1).scaled(Rational(2)) - x.scaled(w.f * eps) +
              XiSeries<XJet>::monomial(0, w.g);
    } else {
        res = res + x.scaled(w.f * eps) - x.shifted(1).scaled(Rational(2)) +
              XiSeries<XJet>::monomial(0, w.f.derived() * EpsLaurent::eps(2) + w.g);
    }
    return res;
}

/**
 * The wave-function factor phi = exp(eps^{-1} X-antiderivative of the
 * exponent series), a xi-series with unit leading term. The plane-wave
 * prefactor e^{+-Xxi/eps} and the extra factor q for kind B are never
 * materialized; every downstream identity is arranged so they cancel.
 */
inline XiSeries<XJet> phi_build(const WaveContext& w, const RiccatiSeries& s) {
    XiSeries<XJet> arg(-s.order());
    for (int k = 1; k <= s.order(); ++k)
        arg.set(-k, s.c[k].antiderived() * EpsLaurent::eps(-1));
    return xi_exp(arg, w.one);
}

/**
 * A pair of wave factors with their pairing scalar d. After pair_fix the
 * flag is set and d is -2 xi on the window.
 */
struct WavePair {
    XiSeries<XJet> phi_a, phi_b, d;
    XiSeries<XJet> multiplier;  // the gauge factor applied to phi_b
    bool normalized = false;

    int order() const { return -phi_a.floor(); }
};

namespace detail {

inline XiSeries<XJet> wave_dx(const XiSeries<XJet>& s) {
    return s.map_coeffs([](const XJet& v) { return v.derived(); });
}

/** eps phi_B' + (eps f - 2 xi) phi_B, the recurring second-row combination. */
inline XiSeries<XJet> row_b(const WaveContext& w, const XiSeries<XJet>& phi_b) {
    return wave_dx(phi_b).scaled(EpsLaurent::eps(1)) +
           phi_b.scaled(w.f * EpsLaurent::eps(1)) -
           phi_b.shifted(1).scaled(Rational(2));
}

inline void require_constant(const XiSeries<XJet>& s, const std::string& where) {
    for (const auto& [e, v] : s.terms())
        if (!v.derived().is_zero())
            throw IdentityViolation(where + " at xi^" + std::to_string(e),
                                    "X-dependence " + v.derived().to_string());
}

} // namespace detail

/**
 * The pairing scalar
 *
 *   d = eps (phi_A phi_B' - phi_A' phi_B) + (eps f - 2 xi) phi_A phi_B,
 *
 * the Wronskian-type combination of the two full wave functions with the
 * plane-wave factors cancelled. Checks that d is X-independent
 * coefficientwise before returning it.
 */
inline XiSeries<XJet> wronskian_d(const WaveContext& w, const XiSeries<XJet>& phi_a,
                                  const XiSeries<XJet>& phi_b) {
    const XiSeries<XJet> d = phi_a * detail::row_b(w, phi_b) -
                             detail::wave_dx(phi_a).scaled(EpsLaurent::eps(1)) * phi_b;
    detail::require_constant(d, "wave.d-constancy");
    return d;
}

/** Builds both wave factors at the given xi-order, unnormalized. */
inline WavePair wave_pair(const WaveContext& w, int n) {
    WavePair p;
    p.phi_a = phi_build(w, riccati_series(w, WaveKind::A, n));
    p.phi_b = phi_build(w, riccati_series(w, WaveKind::B, n));
    p.d = wronskian_d(w, p.phi_a, p.phi_b);
    p.multiplier = XiSeries<XJet>::monomial(0, w.one);
    return p;
}

/**
 * Normalizes the pair: multiplies phi_B by (-2 xi)/d, which is legal gauge
 * freedom because d is X-independent with leading term -2 xi. Afterwards
 * d = -2 xi on the window.
 */
inline WavePair pair_fix(const WaveContext& w, const WavePair& p) {
    const XiSeries<XJet> h = p.d.scaled(Rational(-1, 2)).shifted(-1);
    if (!h.coeff(0).agrees_with(w.one))
        throw IdentityViolation("wave.pairing", "d does not lead with -2 xi");
    WavePair out;
    out.phi_a = p.phi_a;
    out.multiplier = xi_invert_unit(h, w.one);
    detail::require_constant(out.multiplier, "wave.multiplier");
    out.phi_b = p.phi_b * out.multiplier;
    out.d = wronskian_d(w, out.phi_a, out.phi_b);
    if (!out.d.agrees_with(XiSeries<XJet>::monomial(1, w.one * Rational(-2))))
        throw IdentityViolation("wave.pairing", "normalized d differs from -2 xi");
    out.normalized = true;
    return out;
}

/**
 * Checks that both wave factors solve the second-order wave equation
 *
 *   eps^2 psi'' - eps^2 f psi' + (eps f xi + g - xi^2) psi = 0
 *
 * after stripping the plane-wave factor: for kind A with psi = phi e^{Xxi/eps}
 * the residual is eps^2 phi'' + (2 xi - eps f) eps phi' + g phi; for kind B
 * with psi = chi q e^{-Xxi/eps} (chi = phi_B) the residual in chi = phi_B q is
 * eps^2 chi'' - (2 xi + eps f) eps chi' + (2 eps f xi + g) chi.
 */
inline int wave_ode_check(const WaveContext& w, const WavePair& p) {
    const EpsLaurent eps = EpsLaurent::eps(1);
    const EpsLaurent eps2 = EpsLaurent::eps(2);
    const auto& dx = detail::wave_dx;
    int checked = 0;

    const XiSeries<XJet>& pa = p.phi_a;
    const XiSeries<XJet> res_a = dx(dx(pa)).scaled(eps2) +
                                 dx(pa).shifted(1).scaled(EpsLaurent::monomial(1, Rational(2))) -
                                 dx(pa).scaled(w.f * eps2) + pa.scaled(w.g);
    for (const auto& [e, v] : res_a.terms())
        if (!v.is_zero())
            throw IdentityViolation("wave.ode[A] at xi^" + std::to_string(e), v.to_string());
    checked += res_a.exact() ? 1 : 2 - res_a.floor();

    const XiSeries<XJet> chi = p.phi_b.scaled(w.q);
    const XiSeries<XJet> res_b = dx(dx(chi)).scaled(eps2) -
                                 dx(chi).shifted(1).scaled(EpsLaurent::monomial(1, Rational(2))) -
                                 dx(chi).scaled(w.f * eps2) +
                                 chi.shifted(1).scaled(w.f * EpsLaurent::monomial(1, Rational(2))) +
                                 chi.scaled(w.g);
    for (const auto& [e, v] : res_b.terms())
        if (!v.is_zero())
            throw IdentityViolation("wave.ode[B] at xi^" + std::to_string(e), v.to_string());
    checked += res_b.exact() ? 1 : 2 - res_b.floor();
    return checked;
}

/**
 * Rank-one factorization of the resolvent: with the pair normalized,
 *
 *   R(xi) = -xi^{-1} row_1^T row_2,
 *   row_1 = (phi_A, eps phi_A'/q),
 *   row_2 = (eps phi_B' + (eps f - 2 xi) phi_B, -phi_B q),
 *
 * which is the outer-product form 2 r1^T r2 / d with d = -2 xi and all
 * plane-wave factors cancelled. Compares entrywise with the resolvent
 * recursion down to xi^{-n}; returns the number of matrix entries checked.
 */
inline int rp_check(const WaveContext& w, const WavePair& p, int n) {
    if (!p.normalized) throw ConfigError("factorization check needs a normalized pair");
    if (p.order() < n + 1)
        throw ConfigError("factorization check needs wave order at least n+1");
    const EpsLaurent eps = EpsLaurent::eps(1);
    const XiSeries<XJet> r1a = p.phi_a;
    const XiSeries<XJet> r1b = detail::wave_dx(p.phi_a).scaled(w.q_inv * eps);
    const XiSeries<XJet> r2a = detail::row_b(w, p.phi_b);
    const XiSeries<XJet> r2b = p.phi_b.scaled(w.q * Rational(-1));
    const auto fold = [](const XiSeries<XJet>& s) {
        return s.shifted(-1).scaled(Rational(-1));
    };
    const Mat2<XiSeries<XJet>> outer{fold(r1a * r2a), fold(r1a * r2b), fold(r1b * r2a),
                                     fold(r1b * r2b)};

    const auto m = mr_coeffs(w.q, w.r, w.one, n);
    const auto rm = mr_matrix(m);
    const std::pair<const XiSeries<XJet>*, const XiSeries<XJet>*> entries[4] = {
        {&outer.a, &rm.a}, {&outer.b, &rm.b}, {&outer.c, &rm.c}, {&outer.d, &rm.d}};
    const char* names[4] = {"[1,1]", "[1,2]", "[2,1]", "[2,2]"};
    for (int i = 0; i < 4; ++i) {
        const XiSeries<XJet> diff = *entries[i].first - *entries[i].second;
        if (diff.floor() > -n)
            throw ConfigError("factorization window too shallow");
        for (const auto& [e, v] : diff.terms()) {
            if (e < -n) continue;
            if (!v.is_zero())
                throw IdentityViolation(std::string("factorization") + names[i] +
                                            " at xi^" + std::to_string(e),
                                        v.to_string());
        }
    }
    return 4;
}

/**
 * Logarithmic-derivative consistency: eps phi' equals (exponent series)*phi
 * for both kinds, tying phi_build back to the Riccati series without
 * dividing.
 */
inline int wave_log_check(const WaveContext& w, const WavePair& p) {
    const EpsLaurent eps = EpsLaurent::eps(1);
    const int n = p.order();
    const XiSeries<XJet> x = riccati_series(w, WaveKind::A, n).series();
    if (!detail::wave_dx(p.phi_a).scaled(eps).agrees_with(x * p.phi_a))
        throw IdentityViolation("wave.log[A]", "eps phi_A' differs from x phi_A");
    // phi_B carries the gauge multiplier, an X-constant, so the identity
    // survives normalization untouched
    const XiSeries<XJet> y = riccati_series(w, WaveKind::B, n).series();
    if (!detail::wave_dx(p.phi_b).scaled(eps).agrees_with(y * p.phi_b))
        throw IdentityViolation("wave.log[B]", "eps phi_B' differs from y phi_B");
    return 2;
}

/**
 * Affine coefficients of the two-variable kernel built on the pair: with
 *
 *   Num(xi,nu) = eps (phi_A(xi) phi_B'(nu) - phi_A'(xi) phi_B(nu))
 *              + (eps f - 2 nu) phi_A(xi) phi_B(nu)
 *
 * the kernel B = Num / (nu (xi - nu)), expanded for |xi| > |nu|, satisfies
 * B = -2/(xi - nu) + sum_{i,j>=0} A_{i,j} xi^{-i-1} nu^{-j-1}: everything
 * at non-negative powers of either variable cancels. a_table asserts that
 * purity and collects the A_{i,j}.
 */
struct ATable {
    int imax = 0, jmax = 0;
    std::map<std::pair<int, int>, XJet> a;

    const XJet& at(int i, int j) const {
        auto it = a.find({i, j});
        if (it == a.end()) throw ConfigError("a_table index out of range");
        return it->second;
    }
};

/** The two-variable numerator above, in the region |xi| > |nu|. */
inline MultiSeries<XJet> b_kernel_numerator(const WaveContext& w, const WavePair& p) {
    const Region reg = Region::standard(2);
    using MS = MultiSeries<XJet>;
    const auto l0 = [&](const XiSeries<XJet>& s) { return MS::lift(s, 0, reg); };
    const auto l1 = [&](const XiSeries<XJet>& s) { return MS::lift(s, 1, reg); };
    const EpsLaurent eps = EpsLaurent::eps(1);
    return l0(p.phi_a) * l1(detail::row_b(w, p.phi_b)) -
           l0(detail::wave_dx(p.phi_a).scaled(eps)) * l1(p.phi_b);
}

inline ATable a_table(const WaveContext& w, const WavePair& p, int imax, int jmax) {
    if (!p.normalized) throw ConfigError("a_table needs a normalized pair");
    if (imax < 0 || jmax < 0) throw ConfigError("a_table indices must be nonnegative");
    // soundness of the boxed product: slot (u,v) of B pulls Num at
    // nu-exponents down to v+1-m with m <= -u-1, so the wave order must
    // cover i+j+1 for every requested pair
    if (p.order() < imax + jmax + 1)
        throw ConfigError("a_table needs wave order at least imax+jmax+1");
    const Region reg = Region::standard(2);
    using MS = MultiSeries<XJet>;

    const MS num = b_kernel_numerator(w, p);

    // pair condition on the diagonal: Num(xi,xi) is the pairing scalar
    const XiSeries<XJet> diag = num.collapse_diagonal();
    if (!diag.agrees_with(XiSeries<XJet>::monomial(1, w.one * Rational(-2))))
        throw IdentityViolation("kernel.pair-condition", "Num(xi,xi) differs from -2 xi");

    // the box reaches up to nu^{imax+2} so that every stored slot of the
    // added 2/(xi-nu) expansion meets its cancelling partner in the product
    const MS k = kernel_expand(reg, 0, 1, imax + 1, w.one);
    const std::vector<int> lo{-imax - 1, -jmax}, hi{0, imax + 2};
    const MS prod = MS::mul_boxed(num, k, lo, hi);
    const MS b = prod.shifted(1, -1) + k.scaled(w.one + w.one);

    for (const auto& [e, v] : b.terms())
        if ((e[0] >= 0 || e[1] >= 0) && !v.is_zero())
            throw IdentityViolation("kernel.purity at " + MS::key_str(e), v.to_string());

    ATable t{imax, jmax, {}};
    for (int i = 0; i <= imax; ++i)
        for (int j = 0; j <= jmax; ++j) t.a[{i, j}] = b.coeff({-i - 1, -j - 1});
    return t;
}

} // namespace mrkit
