#pragma once

#include <json.hpp>

#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "diff_poly.hpp"
#include "errors.hpp"
#include "rational.hpp"

namespace mrkit {

/**
 * One requested task with its bounds. Bounds are small nonnegative integers
 * keyed by name (order, imax, jmax, k, xi_order, ...); method applies to
 * npoint only and selects which construction runs.
 */
struct TaskSpec {
    std::string kind;
    std::map<std::string, int> bounds;
    std::string method = "both";

    int bound(const std::string& key, int fallback) const {
        const auto it = bounds.find(key);
        return it == bounds.end() ? fallback : it->second;
    }
};

/**
 * A validated run configuration: exact initial data, truncation, the task
 * list, output mode, and the seed for randomized spot checks. A single JSON
 * document carries all of it so a run is reproducible from one artifact.
 */
struct RunConfig {
    InitialData data;
    std::vector<TaskSpec> tasks = {TaskSpec{"verify-all", {}, "both"}};
    std::string output = "json";
    unsigned long long seed = 0;

    /** First task of the given kind, if any. */
    const TaskSpec* task(const std::string& kind) const {
        for (const auto& t : tasks)
            if (t.kind == kind) return &t;
        return nullptr;
    }

    /** Bound lookup that falls through task -> verify-all -> fallback. */
    int bound(const std::string& kind, const std::string& key, int fallback) const {
        if (const TaskSpec* t = task(kind)) return t->bound(key, fallback);
        if (const TaskSpec* t = task("verify-all")) return t->bound(key, fallback);
        return fallback;
    }

    /** Does any requested task construct wave functions? */
    bool wants_wave_work() const {
        for (const auto& t : tasks) {
            if (t.kind == "wave" || t.kind == "verify-all") return true;
            if (t.kind == "npoint" && t.method != "mr") return true;
        }
        return false;
    }
};

namespace detail {

inline const nlohmann::json* cfg_find(const nlohmann::json& obj, const std::string& key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

inline void cfg_expect_object(const nlohmann::json& v, const std::string& path) {
    if (!v.is_object()) throw ConfigError(path + ": expected an object");
}

inline void cfg_known_keys(const nlohmann::json& obj, const std::set<std::string>& known,
                           const std::string& path) {
    for (const auto& [key, value] : obj.items())
        if (!known.count(key)) throw ConfigError(path + "." + key + ": unknown field");
}

inline int cfg_int(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ConfigError(path + ": expected an integer");
    const auto wide = v.get<long long>();
    if (wide < -1000000 || wide > 1000000) throw ConfigError(path + ": integer out of range");
    return static_cast<int>(wide);
}

inline std::string cfg_string(const nlohmann::json& v, const std::string& path) {
    if (!v.is_string()) throw ConfigError(path + ": expected a string");
    return v.get<std::string>();
}

/** One series: a list of [X-power, eps-power, "p/q"] triples. */
inline std::vector<InitialData::Term> cfg_terms(const nlohmann::json& v, const std::string& path,
                                                int x_cap) {
    if (!v.is_array()) throw ConfigError(path + ": expected a list of [X, eps, coeff] triples");
    std::vector<InitialData::Term> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string at = path + "[" + std::to_string(i) + "]";
        const auto& triple = v[i];
        if (!triple.is_array() || triple.size() != 3)
            throw ConfigError(at + ": expected a [X-power, eps-power, \"p/q\"] triple");
        const int xp = cfg_int(triple[0], at + "[0]");
        const int ep = cfg_int(triple[1], at + "[1]");
        if (xp < 0) throw ConfigError(at + ": X-power must be non-negative");
        if (xp > x_cap)
            throw ConfigError(at + ": X-power exceeds the working order " + std::to_string(x_cap));
        try {
            out.emplace_back(xp, ep, rat_parse(cfg_string(triple[2], at + "[2]")));
        } catch (const ConfigError& e) {
            throw ConfigError(at + "[2]: " + e.what());
        }
    }
    return out;
}

inline const std::map<std::string, std::set<std::string>>& cfg_task_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"resolvent", {"kind", "order"}},
        {"flows", {"kind", "jmax"}},
        {"omega", {"kind", "imax", "jmax"}},
        {"wave", {"kind", "xi_order", "imax", "jmax"}},
        {"npoint", {"kind", "k", "imax", "method"}},
        {"verify-all", {"kind", "order", "nabla", "jmax", "xi_order", "k2_imax", "k3_imax"}},
    };
    return keys;
}

inline TaskSpec cfg_task(const nlohmann::json& v, const std::string& path) {
    cfg_expect_object(v, path);
    const nlohmann::json* kind = cfg_find(v, "kind");
    if (!kind) throw ConfigError(path + ".kind: required");
    TaskSpec t;
    t.kind = cfg_string(*kind, path + ".kind");
    const auto& table = cfg_task_keys();
    const auto known = table.find(t.kind);
    if (known == table.end())
        throw ConfigError(path + ".kind: unknown task '" + t.kind + "'");
    cfg_known_keys(v, known->second, path);
    for (const auto& [key, value] : v.items()) {
        if (key == "kind") continue;
        if (key == "method") {
            t.method = cfg_string(value, path + ".method");
            if (t.method != "mr" && t.method != "wave" && t.method != "both")
                throw ConfigError(path + ".method: expected mr, wave, or both");
            continue;
        }
        const int b = cfg_int(value, path + "." + key);
        if (b < 0) throw ConfigError(path + "." + key + ": bound must be non-negative");
        t.bounds[key] = b;
    }
    if (t.kind == "npoint") {
        const int k = t.bound("k", 2);
        if (k < 2 || k > 4) throw ConfigError(path + ".k: k must be between 2 and 4");
    }
    return t;
}

} // namespace detail

/** Parse and validate a configuration document. Throws ConfigError. */
inline RunConfig config_parse(const nlohmann::json& doc) {
    using detail::cfg_find;
    detail::cfg_expect_object(doc, "config");
    detail::cfg_known_keys(doc, {"name", "initial", "truncation", "tasks", "output", "seed"},
                           "config");
    RunConfig cfg;

    if (const auto* v = cfg_find(doc, "truncation")) {
        detail::cfg_expect_object(*v, "truncation");
        detail::cfg_known_keys(*v, {"N_X", "N_xi", "eps_ceiling"}, "truncation");
        if (const auto* n = cfg_find(*v, "N_X")) cfg.data.n_x = detail::cfg_int(*n, "truncation.N_X");
        if (const auto* n = cfg_find(*v, "N_xi"))
            cfg.data.n_xi = detail::cfg_int(*n, "truncation.N_xi");
        if (const auto* n = cfg_find(*v, "eps_ceiling"))
            cfg.data.eps_ceiling = detail::cfg_int(*n, "truncation.eps_ceiling");
    }
    if (cfg.data.n_x < 4) throw ConfigError("truncation.N_X: must be at least 4");
    if (cfg.data.n_xi < 4) throw ConfigError("truncation.N_xi: must be at least 4");
    if (cfg.data.eps_ceiling < 0) throw ConfigError("truncation.eps_ceiling: must be non-negative");

    if (const auto* v = cfg_find(doc, "name")) cfg.data.name = detail::cfg_string(*v, "name");

    if (const auto* v = cfg_find(doc, "initial")) {
        detail::cfg_expect_object(*v, "initial");
        detail::cfg_known_keys(*v, {"q", "r"}, "initial");
        const int cap = cfg.data.working_cap();
        if (const auto* q = cfg_find(*v, "q")) cfg.data.q_terms = detail::cfg_terms(*q, "initial.q", cap);
        if (const auto* r = cfg_find(*v, "r")) cfg.data.r_terms = detail::cfg_terms(*r, "initial.r", cap);
    }

    if (const auto* v = cfg_find(doc, "tasks")) {
        if (!v->is_array()) throw ConfigError("tasks: expected a list");
        if (v->empty()) throw ConfigError("tasks: must not be empty");
        cfg.tasks.clear();
        for (std::size_t i = 0; i < v->size(); ++i)
            cfg.tasks.push_back(detail::cfg_task((*v)[i], "tasks[" + std::to_string(i) + "]"));
    }

    if (const auto* v = cfg_find(doc, "output")) {
        cfg.output = detail::cfg_string(*v, "output");
        if (cfg.output != "json" && cfg.output != "text")
            throw ConfigError("output: expected json or text");
    }

    if (const auto* v = cfg_find(doc, "seed")) {
        if (!v->is_number_integer() || v->get<long long>() < 0)
            throw ConfigError("seed: expected a non-negative integer");
        cfg.seed = v->get<unsigned long long>();
    }

    if (cfg.wants_wave_work()) {
        std::map<int, Rational> constant;
        for (const auto& [xp, ep, c] : cfg.data.q_terms)
            if (xp == 0) constant[ep] += c;
        bool invertible = false;
        for (const auto& [ep, c] : constant)
            if (c != 0) invertible = true;
        if (!invertible)
            throw ConfigError("initial.q: constant term must be invertible for wave tasks");
    }
    return cfg;
}

/** Load a configuration file. Parse and validation failures are exit-2 errors. */
inline RunConfig config_load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open file");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    try {
        return config_parse(doc);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

} // namespace mrkit
