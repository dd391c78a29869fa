#pragma once

#include <algorithm>
#include <future>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <mrkit/resolvent.hpp>
#include <mrkit/waves.hpp>

namespace mrkit {

/**
 * Representatives of the cyclic-equivalence classes of permutations of
 * {0, ..., k-1}: every class contains exactly one permutation that starts
 * with 0, so there are (k-1)! representatives.
 */
inline std::vector<std::vector<int>> cycle_classes(int k) {
    if (k < 1) throw ConfigError("cycle classes need at least one letter");
    std::vector<int> rest;
    for (int i = 1; i < k; ++i) rest.push_back(i);
    std::vector<std::vector<int>> reps;
    do {
        std::vector<int> rep{0};
        rep.insert(rep.end(), rest.begin(), rest.end());
        reps.push_back(std::move(rep));
    } while (std::next_permutation(rest.begin(), rest.end()));
    return reps;
}

/** All k rotations of one representative: the full equivalence class. */
inline std::vector<std::vector<int>> cycle_rotations(const std::vector<int>& rep) {
    const int k = static_cast<int>(rep.size());
    std::vector<std::vector<int>> out;
    for (int s = 0; s < k; ++s) {
        std::vector<int> rot(k);
        for (int j = 0; j < k; ++j) rot[j] = rep[(j + s) % k];
        out.push_back(std::move(rot));
    }
    return out;
}

/**
 * Exact k-point table: index tuples (i_1..i_k) with every entry <= imax,
 * each mapped to the jet of the corresponding correlation coefficient.
 */
struct CorrelatorTable {
    int k = 0;
    int imax = 0;
    std::string source;  // which construction produced it: mr | wave | flow-oracle
    std::map<std::vector<int>, XJet> om;

    const XJet& at(const std::vector<int>& idx) const {
        auto it = om.find(idx);
        if (it == om.end()) throw ConfigError("correlator index out of range");
        return it->second;
    }
};

/**
 * Truncation demands for assembling a k-point generating series in the
 * region |xi_1| > ... > |xi_k| and reading every index up to imax.
 *
 * Write lo = -imax-2 for the deepest extracted exponent. Each cyclic term
 * is a product of per-pair factors: expanded pair kernels contribute
 * (-1-s) to the dominant variable and +s to the recessive one, affine
 * coefficients contribute (-1-i, -1-j), and the resolvent factors of the
 * trace route contribute exponents in [-order-1, 0]. Walking the cycle
 * away from the globally dominant variable (which receives two <= -1
 * contributions, pinning its kernels to s <= imax) lets each step raise
 * the kernel bound by at most imax+1, so
 *
 *   s_max = imax + (k-2)(imax+1)
 *
 * bounds every kernel index that can reach the extraction box. An affine
 * index i appears as -1-i against at most +s_max from the other side, so
 * a_max = s_max + imax + 1; a resolvent slot faces at most two +s_max
 * helpers, so mr_order = 2 s_max + imax + 1. One extra unit pads each
 * bound so boundary slots never sit on the exactness edge.
 */
struct NPointDemand {
    int s_max = 0;
    int kernel_depth = 0;
    int mr_order = 0;
    int a_max = 0;
    int wave_order = 0;

    static NPointDemand plan(int k, int imax) {
        if (k < 2) throw ConfigError("k-point assembly needs k >= 2");
        if (k > 4) throw ConfigError("k-point assembly is capped at k = 4");
        if (imax < 0) throw ConfigError("k-point index bound must be nonnegative");
        NPointDemand d;
        d.s_max = imax + (k - 2) * (imax + 1);
        d.kernel_depth = d.s_max + 1;
        d.mr_order = 2 * d.s_max + imax + 2;
        d.a_max = d.s_max + imax + 1;
        d.wave_order = 2 * d.a_max + 2;
        return d;
    }
};

namespace detail {

using MSX = MultiSeries<XJet>;

inline Mat2<MSX> lift_mat(const Mat2<XiSeries<XJet>>& m, int var, const Region& reg) {
    return m.map([&](const XiSeries<XJet>& s) { return MSX::lift(s, var, reg); });
}

/** Tr(R(xi_{v_1}) ... R(xi_{v_k})) as a k-variable series. */
inline MSX trace_chain(const Mat2<XiSeries<XJet>>& rm, const Region& reg,
                       const std::vector<int>& vars) {
    Mat2<MSX> p = lift_mat(rm, vars[0], reg);
    if (vars.size() == 1) return p.trace();
    for (size_t t = 1; t + 1 < vars.size(); ++t) p = p * lift_mat(rm, vars[t], reg);
    const Mat2<MSX> q = lift_mat(rm, vars.back(), reg);
    return p.a * q.a + p.b * q.c + p.c * q.b + p.d * q.d;
}

/**
 * Product of the expanded cyclic pair kernels 1/(xi_{s_j} - xi_{s_{j+1}}).
 * The intermediate box keeps every product of stored kernel terms: a
 * variable meets at most two kernels, so partial sums of exponents stay
 * within [-2(depth+1), 2 depth].
 */
inline MSX kernel_chain(const Region& reg, const std::vector<int>& sigma, int depth,
                        const XJet& one) {
    const int k = static_cast<int>(sigma.size());
    const std::vector<int> wlo(reg.vars(), -2 * (depth + 1)), whi(reg.vars(), 2 * depth);
    MSX prod = kernel_expand(reg, sigma[0], sigma[1 % k], depth, one);
    for (int j = 1; j < k; ++j)
        prod = MSX::mul_boxed(prod, kernel_expand(reg, sigma[j], sigma[(j + 1) % k], depth, one),
                              wlo, whi);
    return prod;
}

/**
 * Sum of one series term per cyclic class. Class terms are independent
 * pure computations, so they run in parallel; the reduction is exact
 * addition applied in class order, which keeps every output byte
 * independent of scheduling.
 */
template <class Term>
MSX sum_class_terms(const Region& reg, const std::vector<int>& lo, int k, Term&& term) {
    const std::vector<std::vector<int>> classes = cycle_classes(k);
    MSX total(reg, lo);
    if (classes.size() == 1) return total + term(classes[0]);
    std::vector<std::future<MSX>> parts;
    parts.reserve(classes.size());
    for (const auto& sigma : classes)
        parts.push_back(std::async(std::launch::async, [&term, &sigma] { return term(sigma); }));
    for (auto& f : parts) total = total + f.get();
    return total;
}

/** Advance a k-tuple odometer over {0..imax}^k; false once exhausted. */
inline bool next_index(std::vector<int>& idx, int imax) {
    for (int pos = static_cast<int>(idx.size()) - 1; pos >= 0; --pos) {
        if (++idx[pos] <= imax) return true;
        idx[pos] = 0;
    }
    return false;
}

/**
 * Every slot of the assembled series with any exponent above -2 must
 * vanish: the generating series has only strictly negative powers, and
 * this cancellation is where the constant and delta subtractions earn
 * their keep.
 */
inline void require_regular(const MSX& s) {
    for (const auto& [e, v] : s.terms()) {
        const bool high = std::any_of(e.begin(), e.end(), [](int x) { return x >= -1; });
        if (high && !v.is_zero())
            throw IdentityViolation("npoint.regularity at " + MSX::key_str(e), v.to_string());
    }
}

/** Read off the table: Omega at (i_1..i_k) sits at exponents (-i_j-2). */
inline CorrelatorTable extract_table(const MSX& s, int k, int imax, const char* source) {
    CorrelatorTable t{k, imax, source, {}};
    std::vector<int> idx(k, 0);
    do {
        std::vector<int> e(k);
        int total = 0;
        for (int j = 0; j < k; ++j) {
            e[j] = -idx[j] - 2;
            total += idx[j];
        }
        t.om[idx] = s.coeff(e) * rat_pow2(total);
    } while (next_index(idx, imax));
    return t;
}

/**
 * Sum of cyclic products of pairwise factors, boxed to the extraction
 * window, plus the two-point kernel-square counterterm. `factory(u, v)`
 * supplies the factor for the ordered argument pair (xi_u, xi_v); the
 * factor is consumed along the cycle as factory(sigma(j+1), sigma(j)).
 * Intermediate products keep a margin wide enough for every factor term
 * that the demand plan proves can still reach the final box.
 */
template <class Factory>
MSX assemble_pair_product(const Region& reg, int k, int imax, const NPointDemand& d,
                          Factory&& factory, const Rational& prefactor,
                          const Rational& delta_coeff, const XJet& one) {
    const std::vector<int> lo(k, -imax - 2), hi(k, 0);
    const std::vector<int> wlo(k, -imax - 2 - 2 * d.s_max), whi(k, 2 * (d.a_max + 1));
    MSX total = sum_class_terms(reg, lo, k, [&](const std::vector<int>& sigma) {
        MSX prod = factory(sigma[1 % k], sigma[0]);
        for (int j = 1; j < k; ++j) {
            const MSX f = factory(sigma[(j + 1) % k], sigma[j]);
            prod = MSX::mul_boxed(prod, f, j + 1 == k ? lo : wlo, j + 1 == k ? hi : whi);
        }
        return prod;
    });
    total = total.scaled(prefactor);
    if (k == 2) {
        const MSX kern = kernel_expand(reg, 0, 1, imax + 1, one);
        total = total + MSX::mul_boxed(kern, kern, lo, hi).scaled(delta_coeff);
    }
    return total;
}

/** First X- and eps-position where two jets disagree, for mismatch loci. */
inline std::string first_diff(const XJet& x, const XJet& y) {
    const int w = std::min(x.window(), y.window());
    for (int m = 0; m <= w; ++m) {
        const EpsLaurent& a = x.coeff(m);
        const EpsLaurent& b = y.coeff(m);
        if (a.agrees_with(b)) continue;
        std::map<int, Rational> diff;
        for (const auto& [e, v] : a.terms()) diff[e] = v;
        for (const auto& [e, v] : b.terms()) diff[e] = diff[e] - v;
        for (const auto& [e, v] : diff)
            if (!v.is_zero()) return " at X^" + std::to_string(m) + " eps^" + std::to_string(e);
        return " at X^" + std::to_string(m);
    }
    return "";
}

} // namespace detail

/**
 * k-point generating series from the matrix resolvent: minus the sum over
 * cyclic classes of Tr(R(xi_{s(1)}) ... R(xi_{s(k)})) divided by the
 * cyclic denominator chain (xi_{s(1)} - xi_{s(2)}) ... (xi_{s(k)} - xi_{s(1)}),
 * minus the two-point kernel-square counterterm, expanded in the region
 * |xi_1| > ... > |xi_k|. Only strictly negative powers survive, and
 * Omega_{i_1..i_k} = 2^{sum i_j} times the coefficient of prod xi_j^{-i_j-2}.
 */
inline CorrelatorTable npoint_mr_from(const Mat2<XiSeries<XJet>>& rm, const XJet& one, int k,
                                      int imax) {
    using detail::MSX;
    const NPointDemand d = NPointDemand::plan(k, imax);
    if (-rm.a.floor() - 1 < d.mr_order)
        throw ConfigError("k-point assembly needs resolvent order at least " +
                          std::to_string(d.mr_order));
    const Region reg = Region::standard(k);
    const std::vector<int> lo(k, -imax - 2), hi(k, 0);
    MSX total = detail::sum_class_terms(reg, lo, k, [&](const std::vector<int>& sigma) {
        const MSX tr = detail::trace_chain(rm, reg, sigma);
        const MSX kp = detail::kernel_chain(reg, sigma, d.kernel_depth, one);
        return MSX::mul_boxed(tr, kp, lo, hi);
    });
    total = total.scaled(Rational(-1));
    if (k == 2) {
        const MSX kern = kernel_expand(reg, 0, 1, imax + 1, one);
        total = total + MSX::mul_boxed(kern, kern, lo, hi).scaled(Rational(-4));
    }
    detail::require_regular(total);
    return detail::extract_table(total, k, imax, "mr");
}

inline CorrelatorTable npoint_mr(const InitialData& data, int k, int imax) {
    const NPointDemand d = NPointDemand::plan(k, imax);
    InitialData work = data;
    work.n_xi = std::max(work.n_xi, d.mr_order + 2);
    const int cap = work.working_cap();
    const XJet one = XJet::one(cap);
    const auto m = mr_coeffs(work.q_jet(cap), work.r_jet(cap), one, d.mr_order);
    return npoint_mr_from(mr_matrix(m), one, k, imax);
}

/**
 * The same series from the wave-function route: minus the sum over cyclic
 * classes of products of the affine kernel
 *
 *   B(xi_u, xi_v) = -2/(xi_u - xi_v) + sum A_{i,j} xi_u^{-i-1} xi_v^{-j-1},
 *
 * minus the same counterterm. The kernel part is re-expanded per ordered
 * argument pair in the shared region, which is what makes the cyclic
 * products exact term-by-term.
 */
inline CorrelatorTable npoint_wave_from(const WaveContext& w, const ATable& a, int k, int imax) {
    using detail::MSX;
    const NPointDemand d = NPointDemand::plan(k, imax);
    if (a.imax < d.a_max || a.jmax < d.a_max)
        throw ConfigError("k-point assembly needs affine coefficients up to index " +
                          std::to_string(d.a_max));
    const Region reg = Region::standard(k);
    const auto b_factor = [&](int u, int v) {
        MSX f = kernel_expand(reg, u, v, d.kernel_depth, w.one).scaled(Rational(-2));
        for (int i = 0; i <= d.a_max; ++i)
            for (int j = 0; j <= d.a_max; ++j) {
                std::vector<int> e(reg.vars(), 0);
                e[u] = -i - 1;
                e[v] = -j - 1;
                f.add_term(e, a.at(i, j));
            }
        return f;
    };
    MSX total = detail::assemble_pair_product(reg, k, imax, d, b_factor, Rational(-1),
                                              Rational(-4), w.one);
    detail::require_regular(total);
    return detail::extract_table(total, k, imax, "wave");
}

inline CorrelatorTable npoint_wave(const InitialData& data, int k, int imax) {
    const NPointDemand d = NPointDemand::plan(k, imax);
    InitialData work = data;
    work.n_xi = std::max(work.n_xi, d.wave_order + 2);
    const WaveContext w = WaveContext::from(work);
    const WavePair p = pair_fix(w, wave_pair(w, d.wave_order));
    const ATable a = a_table(w, p, d.a_max, d.a_max);
    return npoint_wave_from(w, a, k, imax);
}

/**
 * Independent three-point oracle: the two-point coefficient is one more
 * epsilon-weighted derivation away from the three-point one, so apply the
 * symbolic flow derivation for the third index to the symbolic two-point
 * entry and only then evaluate on the data.
 */
inline XJet omega3_flow(const InitialData& data, int i1, int i2, int i3) {
    const auto m = mr_coeffs(DiffPoly::q(), DiffPoly::r(), DiffPoly::one(), i1 + i2 + 2);
    const auto om = omega_table(m, i1, i2);
    const FlowTable t = flow_table(i3);
    const DiffPoly d = flow_derive(t, i3, om.at(i1, i2));
    EvalContext ctx(data, data.working_cap());
    return dp_eval(d, ctx) * EpsLaurent::eps(1);
}

/** The full flow-oracle grid as a table comparable with the other routes. */
inline CorrelatorTable omega3_flow_table(const InitialData& data, int imax) {
    if (imax < 0) throw ConfigError("k-point index bound must be nonnegative");
    const auto m = mr_coeffs(DiffPoly::q(), DiffPoly::r(), DiffPoly::one(), 2 * imax + 2);
    const auto om = omega_table(m, imax, imax);
    const FlowTable t = flow_table(imax);
    EvalContext ctx(data, data.working_cap());
    CorrelatorTable out{3, imax, "flow-oracle", {}};
    for (int i1 = 0; i1 <= imax; ++i1)
        for (int i2 = 0; i2 <= imax; ++i2)
            for (int i3 = 0; i3 <= imax; ++i3) {
                const DiffPoly d = flow_derive(t, i3, om.at(i1, i2));
                out.om[{i1, i2, i3}] = dp_eval(d, ctx) * EpsLaurent::eps(1);
            }
    return out;
}

/** Outcome of an exact table comparison; locus names the first mismatch. */
struct CompareReport {
    bool ok = true;
    std::string locus;
    int checked = 0;
};

/** Entrywise exact comparison over the common index grid. */
inline CompareReport compare(const CorrelatorTable& x, const CorrelatorTable& y) {
    if (x.k != y.k) throw ConfigError("comparing tables of different arity");
    CompareReport rep;
    const int m = std::min(x.imax, y.imax);
    std::vector<int> idx(x.k, 0);
    do {
        const XJet& a = x.at(idx);
        const XJet& b = y.at(idx);
        if (!a.agrees_with(b)) {
            rep.ok = false;
            std::string key = "(";
            for (size_t j = 0; j < idx.size(); ++j)
                key += (j ? "," : "") + std::to_string(idx[j]);
            rep.locus = key + ")" + detail::first_diff(a, b);
            return rep;
        }
        ++rep.checked;
    } while (detail::next_index(idx, m));
    return rep;
}

/** Asserts invariance of the table under permutations of the index tuple. */
inline int symmetry_check(const CorrelatorTable& t) {
    int checked = 0;
    for (const auto& [idx, v] : t.om) {
        std::vector<int> sorted = idx;
        std::sort(sorted.begin(), sorted.end());
        if (sorted == idx) continue;
        if (!v.agrees_with(t.at(sorted))) {
            std::string key = "(";
            for (size_t j = 0; j < idx.size(); ++j)
                key += (j ? "," : "") + std::to_string(idx[j]);
            throw IdentityViolation("npoint.symmetry at " + key + ")",
                                    "entry differs from its sorted-index image");
        }
        ++checked;
    }
    return checked;
}

/** The scaling that maps the affine table into the KP normal form. */
struct Calibration {
    Rational alpha, beta;
    bool k3_checked = false;
};

namespace detail {

/**
 * The KP-side n-point assembly: (-1)^{n-1} times the cyclic-class sum of
 * products of 1/(xi_u - xi_v) + sum c_{i,j} xi_u^{-i-1} xi_v^{-j-1},
 * consumed forward along the cycle, minus the two-point kernel square.
 * The candidate kernel keeps our index orientation; a cyclic-class sum
 * only sees a pair kernel up to simultaneous transposition anyway, so no
 * generality is lost by fixing the orientation here.
 */
inline MSX kp_series(const Region& reg, int k, int imax, const NPointDemand& d,
                     const std::map<std::pair<int, int>, XJet>& c, const XJet& one) {
    const std::vector<int> lo(k, -imax - 2), hi(k, 0);
    const std::vector<int> wlo(k, -imax - 2 - 2 * d.s_max), whi(k, 2 * (d.a_max + 1));
    MSX total = sum_class_terms(reg, lo, k, [&](const std::vector<int>& sigma) {
        auto factor = [&](int u, int v) {
            MSX f = kernel_expand(reg, u, v, d.kernel_depth, one);
            for (const auto& [ij, val] : c) {
                std::vector<int> e(reg.vars(), 0);
                e[u] = -ij.first - 1;
                e[v] = -ij.second - 1;
                f.add_term(e, val);
            }
            return f;
        };
        MSX prod = factor(sigma[0], sigma[1 % k]);
        for (int j = 1; j < k; ++j)
            prod = MSX::mul_boxed(prod, factor(sigma[j], sigma[(j + 1) % k]),
                                  j + 1 == k ? lo : wlo, j + 1 == k ? hi : whi);
        return prod;
    });
    if (k % 2 == 0) total = total.scaled(Rational(-1));
    if (k == 2) {
        const MSX kern = kernel_expand(reg, 0, 1, imax + 1, one);
        total = total - MSX::mul_boxed(kern, kern, lo, hi);
    }
    return total;
}

/**
 * Does the KP assembly built from c_{i,j} = alpha beta^{i+j} A_{i,j}
 * reproduce the k-point table? The time rescaling contributes one factor
 * of 1/2 per index slot on top of the 2^{-i} weights of the table's own
 * generating normalization.
 */
inline bool kp_matches(const WaveContext& w, const ATable& a, const Rational& alpha,
                       const Rational& beta, const CorrelatorTable& tab, int imax) {
    const int k = tab.k;
    const NPointDemand d = NPointDemand::plan(k, imax);
    if (a.imax < d.a_max || a.jmax < d.a_max)
        throw ConfigError("calibration needs affine coefficients up to index " +
                          std::to_string(d.a_max));
    std::map<std::pair<int, int>, XJet> c;
    Rational bpow(1);
    std::vector<Rational> betas(2 * d.a_max + 1);
    for (int s = 0; s <= 2 * d.a_max; ++s) {
        betas[s] = bpow;
        bpow = bpow * beta;
    }
    for (int i = 0; i <= d.a_max; ++i)
        for (int j = 0; j <= d.a_max; ++j) c[{i, j}] = a.at(i, j) * (alpha * betas[i + j]);
    const Region reg = Region::standard(k);
    const MSX g = kp_series(reg, k, imax, d, c, w.one);
    std::vector<int> idx(k, 0);
    do {
        std::vector<int> e(k);
        int total = 0;
        for (int j = 0; j < k; ++j) {
            e[j] = -idx[j] - 2;
            total += idx[j];
        }
        if (!g.coeff(e).agrees_with(tab.at(idx) * rat_pow2(-total - k))) return false;
    } while (next_index(idx, imax));
    return true;
}

} // namespace detail

/**
 * Searches a lattice of scalings c_{i,j} = alpha beta^{i+j} A_{i,j}, with
 * alpha and beta signed powers of two with exponents in [-4, 4], for one
 * that makes the KP-side cyclic assembly reproduce the two-point table;
 * a k=3 table, when supplied, revalidates the fitted constants. Returns
 * the first admissible pair, or nothing if the lattice has none.
 */
inline std::optional<Calibration> kp_calibrate(const WaveContext& w, const ATable& a,
                                                 const CorrelatorTable& om2,
                                                 const CorrelatorTable* om3 = nullptr) {
    if (om2.k != 2) throw ConfigError("calibration needs a two-point table");
    std::vector<Rational> lattice;
    for (int sign : {1, -1})
        for (int e = -4; e <= 4; ++e)
            lattice.push_back(rat_pow2(e) * Rational(sign));
    const int fit = std::min(om2.imax, 1);
    for (const Rational& alpha : lattice)
        for (const Rational& beta : lattice) {
            if (!detail::kp_matches(w, a, alpha, beta, om2, fit)) continue;
            if (!detail::kp_matches(w, a, alpha, beta, om2, om2.imax)) continue;
            Calibration cal{alpha, beta, false};
            if (om3) {
                if (!detail::kp_matches(w, a, alpha, beta, *om3, om3->imax)) continue;
                cal.k3_checked = true;
            }
            return cal;
        }
    return std::nullopt;
}

} // namespace mrkit
