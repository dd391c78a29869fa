#pragma once

#include <json.hpp>

#include <algorithm>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "correlators.hpp"
#include "diff_poly.hpp"
#include "eps_laurent.hpp"
#include "report.hpp"
#include "resolvent.hpp"
#include "waves.hpp"
#include "xjet.hpp"

namespace mrkit {

using ojson = nlohmann::ordered_json;

/**
 * Canonical text form of an eps-Laurent value: terms in ascending exponent,
 * bare "p/q" at exponent zero, "p/q*eps^k" otherwise, joined by " + ".
 * Rationals stay exact strings so emitted documents are stable golden files.
 */
inline std::string eps_str(const EpsLaurent& v) {
    std::string out;
    for (const auto& [e, c] : v.terms()) {
        if (c == 0) continue;
        if (!out.empty()) out += " + ";
        out += rat_str(c);
        if (e != 0) out += "*eps^" + std::to_string(e);
    }
    return out.empty() ? "0" : out;
}

/**
 * Sparse {"X^k": coefficient} map over the exactly-known window, optionally
 * trimmed to the dataset's requested X-truncation for display.
 */
inline ojson xjet_json(const XJet& s, int xmax = -1) {
    ojson out = ojson::object();
    const int top = xmax < 0 ? s.window() : std::min(s.window(), xmax);
    for (int m = 0; m <= top; ++m) {
        const EpsLaurent& c = s.coeff(m);
        if (c.is_zero()) continue;
        out["X^" + std::to_string(m)] = eps_str(c);
    }
    return out;
}

/** Sparse {"xi^e": X-series} map in ascending xi exponent. */
inline ojson xi_json(const XiSeries<XJet>& s, int xmax = -1) {
    ojson out = ojson::object();
    for (const auto& [e, v] : s.terms()) {
        if (v.is_zero()) continue;
        out["xi^" + std::to_string(e)] = xjet_json(v, xmax);
    }
    return out;
}

inline std::string index_key(const std::vector<int>& idx) {
    std::string key = "(";
    for (std::size_t j = 0; j < idx.size(); ++j) {
        if (j) key += ",";
        key += std::to_string(idx[j]);
    }
    return key + ")";
}

/** A correlator table as {"(i,j,...)": X-series}, indices in ascending order. */
inline ojson table_json(const CorrelatorTable& t, int xmax = -1) {
    ojson out = ojson::object();
    for (const auto& [idx, v] : t.om) out[index_key(idx)] = xjet_json(v, xmax);
    return out;
}

/** A two-point table as {"(i,j)": X-series}. */
inline ojson omega_json(const OmegaTable<XJet>& t, int xmax = -1) {
    ojson out = ojson::object();
    for (const auto& [ij, v] : t.entries)
        out[index_key({ij.first, ij.second})] = xjet_json(v, xmax);
    return out;
}

/** Resolvent coefficients over the symbolic ring, one polynomial per level. */
inline ojson mr_json(const MRData<DiffPoly>& m) {
    ojson out = ojson::object();
    out["order"] = m.order();
    for (const auto& [name, series] :
         {std::pair<const char*, const std::vector<DiffPoly>*>{"A", &m.a}, {"B", &m.b}, {"C", &m.c}}) {
        ojson list = ojson::array();
        for (const auto& p : *series) list.push_back(p.to_string());
        out[name] = std::move(list);
    }
    return out;
}

/** Resolvent coefficients evaluated on initial data. */
inline ojson mr_json(const MRData<XJet>& m, int xmax = -1) {
    ojson out = ojson::object();
    out["order"] = m.order();
    for (const auto& [name, series] :
         {std::pair<const char*, const std::vector<XJet>*>{"A", &m.a}, {"B", &m.b}, {"C", &m.c}}) {
        ojson list = ojson::array();
        for (const auto& v : *series) list.push_back(xjet_json(v, xmax));
        out[name] = std::move(list);
    }
    return out;
}

/** Flow right-hand sides as symbolic differential polynomials. */
inline ojson flows_json(const FlowTable& t) {
    ojson out = ojson::object();
    out["jmax"] = t.jmax();
    ojson list = ojson::array();
    for (const auto& [pq, pr] : t.p) {
        ojson entry = ojson::object();
        entry["q"] = pq.to_string();
        entry["r"] = pr.to_string();
        list.push_back(std::move(entry));
    }
    out["flows"] = std::move(list);
    return out;
}

/** Flow right-hand sides evaluated on initial data. */
inline ojson flows_json(const FlowTable& t, const EvalContext& ctx, int xmax = -1) {
    ojson out = ojson::object();
    out["jmax"] = t.jmax();
    ojson list = ojson::array();
    for (const auto& [pq, pr] : t.p) {
        ojson entry = ojson::object();
        entry["q"] = xjet_json(dp_eval(pq, ctx), xmax);
        entry["r"] = xjet_json(dp_eval(pr, ctx), xmax);
        list.push_back(std::move(entry));
    }
    out["flows"] = std::move(list);
    return out;
}

/** The wave pair, its pairing scalar, gauge multiplier, and affine table. */
inline ojson wave_json(const WavePair& p, const ATable& a, int xmax = -1) {
    ojson out = ojson::object();
    out["xi_order"] = p.order();
    out["normalized"] = p.normalized;
    out["phi_A"] = xi_json(p.phi_a, xmax);
    out["phi_B"] = xi_json(p.phi_b, xmax);
    out["d"] = xi_json(p.d, xmax);
    out["multiplier"] = xi_json(p.multiplier, xmax);
    ojson table = ojson::object();
    for (const auto& [ij, v] : a.a) {
        if (v.is_zero()) continue;
        table[index_key({ij.first, ij.second})] = xjet_json(v, xmax);
    }
    out["A"] = std::move(table);
    return out;
}

/** Canonical echo of parsed initial data: merged, zero-free, sorted triples. */
inline ojson initial_json(const InitialData& data) {
    const auto canon = [](const std::vector<InitialData::Term>& terms) {
        std::map<std::pair<int, int>, Rational> merged;
        for (const auto& [xp, ep, c] : terms) merged[{xp, ep}] += c;
        ojson list = ojson::array();
        for (const auto& [key, c] : merged) {
            if (c == 0) continue;
            list.push_back(ojson::array({key.first, key.second, rat_str(c)}));
        }
        return list;
    };
    ojson out = ojson::object();
    out["name"] = data.name;
    out["q"] = canon(data.q_terms);
    out["r"] = canon(data.r_terms);
    ojson trunc = ojson::object();
    trunc["N_X"] = data.n_x;
    trunc["N_xi"] = data.n_xi;
    trunc["eps_ceiling"] = data.eps_ceiling;
    out["truncation"] = std::move(trunc);
    return out;
}

/** A verification report; timing is deliberately absent for byte stability. */
inline ojson report_json(const Report& r) {
    ojson out = ojson::object();
    out["dataset"] = r.dataset;
    out["seed"] = r.seed;
    out["status"] = r.ok() ? "pass" : "fail";
    out["first_failure"] = r.first_failure();
    ojson checks = ojson::array();
    for (const auto& c : r.checks) {
        ojson entry = ojson::object();
        entry["name"] = c.name;
        entry["status"] = c.informational ? "informational" : (c.passed ? "pass" : "fail");
        if (!c.locus.empty()) entry["locus"] = c.locus;
        if (!c.detail.empty()) entry["detail"] = c.detail;
        entry["window"] = c.window;
        checks.push_back(std::move(entry));
    }
    out["checks"] = std::move(checks);
    return out;
}

namespace detail {

inline void text_lines(const ojson& v, const std::string& indent, std::string& out) {
    if (v.is_object()) {
        for (const auto& [key, value] : v.items()) {
            if (value.is_object() || value.is_array()) {
                out += indent + key + ":\n";
                text_lines(value, indent + "  ", out);
            } else {
                out += indent + key + ": " + (value.is_string() ? value.get<std::string>() : value.dump()) +
                       "\n";
            }
        }
    } else if (v.is_array()) {
        for (const auto& value : v) {
            if (value.is_object() || value.is_array()) {
                out += indent + "-\n";
                text_lines(value, indent + "  ", out);
            } else {
                out += indent + "- " +
                       (value.is_string() ? value.get<std::string>() : value.dump()) + "\n";
            }
        }
    } else {
        out += indent + (v.is_string() ? v.get<std::string>() : v.dump()) + "\n";
    }
}

} // namespace detail

/** Render a document in the requested mode; both forms are deterministic. */
inline std::string emit(const ojson& doc, bool json_mode) {
    if (json_mode) return doc.dump(2) + "\n";
    std::string out;
    detail::text_lines(doc, "", out);
    return out;
}

} // namespace mrkit
