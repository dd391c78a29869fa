#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "diff_poly.hpp"
#include "errors.hpp"
#include "mat2.hpp"
#include "multi_series.hpp"
#include "xi_series.hpp"

namespace mrkit {

/** The derivation eps*d/dX that drives the whole recursion. */
template <class R>
R eps_dx(const R& v) {
    return v.derived() * EpsLaurent::eps(1);
}

/**
 * Coefficient table of the basic matrix resolvent
 *
 *   R(xi) = diag(2,0) + sum_{j>=0} xi^{-j-1} [[A_j, B_j], [C_j, -A_j]],
 *
 * generic over the coefficient ring: DiffPoly for symbolic runs, XJet for
 * evaluated runs. `one` is the ring identity, carried along because the
 * evaluated ring needs a truncation cap to build constants.
 */
template <class R>
struct MRData {
    R q, r, one;
    std::vector<R> a, b, c;

    int order() const { return static_cast<int>(a.size()) - 1; }
};

/**
 * Builds the table by the recurrence
 *
 *   B_{j+1} = (eps B_j')/2 + q A_j + q delta_{-1,j}
 *   C_{j+1} = -(eps C_j')/2 - r A_j - r delta_{-1,j}
 *   A_k     = -(1/2) sum_{i+j=k-1} (A_i A_j + B_i C_j)
 *
 * seeded with A_0 = 0, B_0 = q, C_0 = -r. The A-levels come from the
 * algebraic relation, so no integration constants enter; the differential
 * relation eps A_j' = r B_j + q C_j is left to mr_verify as an independent
 * cross-check.
 */
template <class R>
MRData<R> mr_coeffs(const R& q, const R& r, const R& one, int n) {
    if (n < 0) throw ConfigError("resolvent order must be nonnegative");
    const Rational half(1, 2);
    MRData<R> m{q, r, one, {}, {}, {}};
    m.a.push_back(R{});
    m.b.push_back(q);
    m.c.push_back(R{} - r);
    for (int k = 1; k <= n; ++k) {
        m.b.push_back(eps_dx(m.b[k - 1]) * half + q * m.a[k - 1]);
        m.c.push_back(R{} - eps_dx(m.c[k - 1]) * half - r * m.a[k - 1]);
        R s{};
        for (int i = 0; i <= k - 1; ++i) {
            const int j = k - 1 - i;
            s = s + m.a[i] * m.a[j] + m.b[i] * m.c[j];
        }
        m.a.push_back(s * Rational(-1, 2));
    }
    return m;
}

/** Assembles R(xi) as a matrix of xi-series known down to xi^{-N-1}. */
template <class R>
Mat2<XiSeries<R>> mr_matrix(const MRData<R>& m) {
    const int n = m.order();
    XiSeries<R> a(-n - 1), b(-n - 1), c(-n - 1), d(-n - 1);
    a.set(0, m.one + m.one);
    for (int j = 0; j <= n; ++j) {
        a.set(-j - 1, m.a[j]);
        b.set(-j - 1, m.b[j]);
        c.set(-j - 1, m.c[j]);
        d.set(-j - 1, R{} - m.a[j]);
    }
    return {a, b, c, d};
}

/** The first-order part of the Lax operator: U(xi) = [[-xi, -q], [r, xi]]. */
template <class R>
Mat2<XiSeries<R>> lax_u(const MRData<R>& m) {
    return {XiSeries<R>::monomial(1, R{} - m.one), XiSeries<R>::monomial(0, R{} - m.q),
            XiSeries<R>::monomial(0, m.r), XiSeries<R>::monomial(1, m.one)};
}

namespace detail {

template <class R>
void require_zero_series(const XiSeries<R>& s, const std::string& where) {
    for (const auto& [e, v] : s.terms())
        if (!v.agrees_with(R{}))
            throw IdentityViolation(where + " at xi^" + std::to_string(e),
                                    v.to_string());
}

template <class R>
int count_terms(const XiSeries<R>& s) {
    return static_cast<int>(s.terms().size());
}

} // namespace detail

/**
 * Checks, coefficientwise on every window the truncation supports, that
 * the assembled matrix satisfies the defining identities: [L(xi), R(xi)] = 0,
 * Tr R = 2, det R = 0, and the differential relation eps A_j' = r B_j + q C_j
 * that the construction itself never used. Returns the number of series
 * whose coefficients were checked; throws IdentityViolation with the
 * offending slot otherwise.
 */
template <class R>
int mr_verify(const MRData<R>& m) {
    const auto rm = mr_matrix(m);
    int checked = 0;

    XiSeries<R> two = XiSeries<R>::monomial(0, m.one + m.one);
    if (!rm.trace().agrees_with(two))
        throw IdentityViolation("resolvent.trace", "Tr R(xi) differs from 2");
    ++checked;

    detail::require_zero_series(rm.det(), "resolvent.det");
    ++checked;

    const auto u = lax_u(m);
    const auto dr = rm.map([](const XiSeries<R>& s) {
        return s.map_coeffs([](const R& v) { return eps_dx(v); });
    });
    const auto com = commutator(u, rm) + dr;
    detail::require_zero_series(com.a, "resolvent.commutator[1,1]");
    detail::require_zero_series(com.b, "resolvent.commutator[1,2]");
    detail::require_zero_series(com.c, "resolvent.commutator[2,1]");
    detail::require_zero_series(com.d, "resolvent.commutator[2,2]");
    ++checked;

    for (int j = 0; j <= m.order(); ++j) {
        if (!eps_dx(m.a[j]).agrees_with(m.r * m.b[j] + m.q * m.c[j]))
            throw IdentityViolation("resolvent.dA[j=" + std::to_string(j) + "]",
                                    "eps*dX(A_j) differs from r*B_j + q*C_j");
        ++checked;
    }
    return checked;
}

/**
 * Flow polynomials of the hierarchy: dq/dt_j = P_j^q, dr/dt_j = P_j^r,
 * extracted from the xi^0 entry of the Lax equation as
 * P_j^q = 2^{j+1} eps^{-1} B_{j+1}, P_j^r = 2^{j+1} eps^{-1} C_{j+1}.
 */
struct FlowTable {
    MRData<DiffPoly> mr;
    std::vector<std::pair<DiffPoly, DiffPoly>> p;

    int jmax() const { return static_cast<int>(p.size()) - 1; }
};

inline FlowTable flow_table(int jmax) {
    if (jmax < 0) throw ConfigError("flow index must be nonnegative");
    FlowTable t;
    t.mr = mr_coeffs(DiffPoly::q(), DiffPoly::r(), DiffPoly::one(), jmax + 1);
    for (int j = 0; j <= jmax; ++j) {
        const EpsLaurent s = EpsLaurent::monomial(-1, rat_pow2(j + 1));
        t.p.emplace_back(t.mr.b[j + 1] * s, t.mr.c[j + 1] * s);
    }
    return t;
}

/** The polynomial part (xi^{j+1} R(xi))_+, entries exact polynomials. */
template <class R>
Mat2<XiSeries<R>> flow_matrix(const MRData<R>& m, int j) {
    if (j + 1 > m.order())
        throw ConfigError("flow matrix needs resolvent order at least j+1");
    const auto rm = mr_matrix(m);
    const auto plus = [&](const XiSeries<R>& s) {
        XiSeries<R> out;
        for (const auto& [e, v] : s.terms())
            if (e + j + 1 >= 0) out.set(e + j + 1, v);
        return out;
    };
    return rm.map(plus);
}

/**
 * Property check behind the closed form above: for every j the matrix
 * E = 2^j eps^{-1} ([V_j, U] - eps V_j') must live at xi^0 only, have zero
 * diagonal, and carry (-P_j^q, P_j^r) off the diagonal. Returns the number
 * of flow levels checked.
 */
inline int flow_verify(const FlowTable& t) {
    const auto u = lax_u(t.mr);
    for (int j = 0; j <= t.jmax(); ++j) {
        const auto v = flow_matrix(t.mr, j);
        const auto dv = v.map([](const XiSeries<DiffPoly>& s) {
            return s.map_coeffs([](const DiffPoly& p) { return eps_dx(p); });
        });
        const auto e = (commutator(v, u) - dv)
                           .map([&](const XiSeries<DiffPoly>& s) {
                               return s.scaled(EpsLaurent::monomial(-1, rat_pow2(j)));
                           });
        const std::string where = "flow[j=" + std::to_string(j) + "]";
        const auto off_top = [&](const XiSeries<DiffPoly>& s, const std::string& slot) {
            for (const auto& [exp, val] : s.terms())
                if (exp != 0 && !val.is_zero())
                    throw IdentityViolation(where + slot + " at xi^" + std::to_string(exp),
                                            val.to_string());
        };
        off_top(e.a, "[1,1]");
        off_top(e.b, "[1,2]");
        off_top(e.c, "[2,1]");
        off_top(e.d, "[2,2]");
        if (!e.a.coeff(0).is_zero() || !e.d.coeff(0).is_zero())
            throw IdentityViolation(where + ".diag", "Lax equation has a diagonal part");
        if (!(DiffPoly{} - e.b.coeff(0)).agrees_with(t.p[j].first))
            throw IdentityViolation(where + ".q", "xi^0 entry differs from -P_j^q");
        if (!e.c.coeff(0).agrees_with(t.p[j].second))
            throw IdentityViolation(where + ".r", "xi^0 entry differs from P_j^r");
    }
    return t.jmax() + 1;
}

/**
 * The t_j-derivation on differential polynomials: D_j(q^{(m)}) is the m-th
 * X-derivative of P_j^q, likewise for r, extended by Leibniz.
 */
inline DiffPoly flow_derive(const FlowTable& t, int j, const DiffPoly& p) {
    if (j < 0 || j > t.jmax()) throw ConfigError("flow index out of range");
    DiffPoly out;
    DiffPoly pq = t.p[j].first, pr = t.p[j].second;
    const int mmax = p.max_order();
    for (int m = 0; m <= mmax; ++m) {
        out = out + p.partial({Species::q, m}) * pq + p.partial({Species::r, m}) * pr;
        pq = pq.derived();
        pr = pr.derived();
    }
    return out;
}

/** Two-index correlation table Omega_{i,j}, symmetric in (i,j). */
template <class R>
struct OmegaTable {
    int imax = 0, jmax = 0;
    std::map<std::pair<int, int>, R> entries;

    const R& at(int i, int j) const {
        auto it = entries.find({i, j});
        if (it == entries.end()) throw ConfigError("omega index out of range");
        return it->second;
    }
};

/**
 * Expands (Tr R(xi)R(nu) - 4) / (xi - nu)^2 in the region |xi| > |nu| and
 * reads off Omega_{i,j} = 2^{i+j} * [xi^{-i-2} nu^{-j-2}]. The division is
 * a multiplication by the squared region kernel; every slot of the product
 * with xi- or nu-exponent above -2 is asserted to vanish first.
 *
 * Soundness of the boxed product: a product slot (u,v) in the target box
 * receives S(u+s+2, v-s) times the squared-kernel weight s+1, and S's
 * true top forces s <= -u-2 <= imax; so kernel depth imax+1 covers every
 * contribution and the deepest S-slot used is v - s >= -jmax-2-imax, known
 * once the resolvent order is at least imax+jmax+1.
 */
template <class R>
OmegaTable<R> omega_table(const MRData<R>& m, int imax, int jmax) {
    if (imax < 0 || jmax < 0) throw ConfigError("omega indices must be nonnegative");
    if (m.order() < imax + jmax + 2)
        throw ConfigError("omega table needs resolvent order at least imax+jmax+2");
    const Region reg = Region::standard(2);
    const auto rm = mr_matrix(m);
    const auto rxi = rm.map([&](const XiSeries<R>& s) { return MultiSeries<R>::lift(s, 0, reg); });
    const auto rnu = rm.map([&](const XiSeries<R>& s) { return MultiSeries<R>::lift(s, 1, reg); });
    MultiSeries<R> s = (rxi * rnu).trace();
    s.add_term({0, 0}, R{} - (m.one + m.one + m.one + m.one));

    const MultiSeries<R> k = kernel_expand(reg, 0, 1, imax + 1, m.one);
    const std::vector<int> lo{-imax - 2, -jmax - 2}, hi{0, 0};
    const MultiSeries<R> p = MultiSeries<R>::mul_boxed(s, k * k, lo, hi);

    for (const auto& [e, v] : p.terms())
        if ((e[0] >= -1 || e[1] >= -1) && !v.agrees_with(R{}))
            throw IdentityViolation("omega.regularity at " + MultiSeries<R>::key_str(e),
                                    v.to_string());

    OmegaTable<R> t{imax, jmax, {}};
    for (int i = 0; i <= imax; ++i)
        for (int j = 0; j <= jmax; ++j)
            t.entries[{i, j}] = p.coeff({-i - 2, -j - 2}) * rat_pow2(i + j);
    return t;
}

/** Asserts Omega_{i,j} = Omega_{j,i} on the square part of the table. */
template <class R>
int omega_symmetry_check(const OmegaTable<R>& t) {
    int checked = 0;
    const int n = std::min(t.imax, t.jmax);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j < i; ++j) {
            if (!t.at(i, j).agrees_with(t.at(j, i)))
                throw IdentityViolation("omega.symmetry(" + std::to_string(i) + "," +
                                            std::to_string(j) + ")",
                                        "table entry differs from its transpose");
            ++checked;
        }
    return checked;
}

/**
 * The derivation identity tying the hierarchy to the resolvent:
 *
 *   eps nabla(nu) R(xi) = [R(nu), R(xi)]/(nu - xi) + [-nu^{-1} diag(2,0), R(xi)],
 *
 * with nabla(nu) = sum_j 2^{-j} nu^{-j-2} d/dt_j, both sides expanded in
 * |nu| > |xi|. The difference is checked slice by slice in the nu-order:
 * slice nu^{-j-2} is sound for xi-exponents >= j - n, and the nu^{-1}
 * slice (where the diagonal correction must cancel the kernel head) for
 * xi-exponents >= -n. Set with_correction=false to drop the diagonal
 * term; the nu^{-1} slice check then fails, which is the negative control.
 */
inline int nabla_check(int n, int jmax = -1, bool with_correction = true) {
    if (jmax < 0) jmax = n - 2;
    if (jmax < 0 || jmax > n - 2)
        throw ConfigError("nabla check needs 0 <= jmax <= n-2");
    const FlowTable t = flow_table(jmax);
    const auto m = mr_coeffs(DiffPoly::q(), DiffPoly::r(), DiffPoly::one(), n);
    const auto rm = mr_matrix(m);
    const Region reg(std::vector<int>{1, 0});
    using MS = MultiSeries<DiffPoly>;

    // left side: slot (e, -j-2) carries 2^{-j} eps D_j of the xi^e entry
    const auto lhs_of = [&](const XiSeries<DiffPoly>& s) {
        MS out(reg, {-n - 1, -jmax - 2});
        for (int j = 0; j <= jmax; ++j) {
            const EpsLaurent scale = EpsLaurent::monomial(1, rat_pow2(-j));
            for (const auto& [e, v] : s.terms())
                out.add_term({e, -j - 2}, flow_derive(t, j, v) * scale);
        }
        return out;
    };
    const Mat2<MS> lhs = rm.map(lhs_of);

    const auto rxi = rm.map([&](const XiSeries<DiffPoly>& s) { return MS::lift(s, 0, reg); });
    const auto rnu = rm.map([&](const XiSeries<DiffPoly>& s) { return MS::lift(s, 1, reg); });
    const auto com = commutator(rnu, rxi);
    const MS kern = kernel_expand(reg, 1, 0, jmax + 1, DiffPoly::one());
    const std::vector<int> lo{-n, -jmax - 2}, hi{1, -1};
    const auto boxed = [&](const MS& s) { return MS::mul_boxed(s, kern, lo, hi); };
    Mat2<MS> rhs{boxed(com.a), boxed(com.b), boxed(com.c), boxed(com.d)};
    if (with_correction) {
        Mat2<MS> qmat{MS::lift(XiSeries<DiffPoly>::monomial(
                                   -1, DiffPoly::one() * Rational(-2)),
                               1, reg),
                      MS::zero_like(reg), MS::zero_like(reg), MS::zero_like(reg)};
        rhs = rhs + commutator(qmat, rxi);
    }

    const Mat2<MS> diff = lhs - rhs;
    int checked = 0;
    const auto check_slice = [&](int nu_exp, int xi_lo) {
        for (const MS* entry : {&diff.a, &diff.b, &diff.c, &diff.d}) {
            const MS slice = entry->cropped({xi_lo, nu_exp}, {1, nu_exp});
            for (const auto& [e, v] : slice.terms()) {
                if (!v.is_zero())
                    throw IdentityViolation("nabla at " + MS::key_str(e),
                                            v.to_string());
                ++checked;
            }
        }
    };
    check_slice(-1, -n);
    for (int j = 0; j <= jmax; ++j) check_slice(-j - 2, j - n);
    return checked;
}

} // namespace mrkit
