/**
 * mrkit: exact series toolkit for the matrix-resolvent recursion, its wave
 * functions, and the k-point correlation tables, over rational coefficients.
 *
 * Exit codes: 0 success, 1 identity or cross-check failure, 2 invalid
 * configuration or input.
 */

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <mrkit/config.hpp>
#include <mrkit/correlators.hpp>
#include <mrkit/json_io.hpp>
#include <mrkit/verify.hpp>

namespace {

struct GlobalOpts {
    std::string data_path;
    std::string out_path;
    bool json = false;
    long long seed = -1;
};

/** Load the configuration, or fail with a pointed message when required. */
mrkit::RunConfig load_config(const GlobalOpts& g, bool need_data, const char* why) {
    if (!g.data_path.empty()) {
        mrkit::RunConfig cfg = mrkit::config_load(g.data_path);
        if (g.seed >= 0) cfg.seed = static_cast<unsigned long long>(g.seed);
        return cfg;
    }
    if (need_data) throw mrkit::ConfigError(std::string("--data is required to ") + why);
    mrkit::RunConfig cfg;
    cfg.data.name = "symbolic";
    if (g.seed >= 0) cfg.seed = static_cast<unsigned long long>(g.seed);
    return cfg;
}

void write_out(const GlobalOpts& g, const mrkit::RunConfig& cfg, const mrkit::ojson& doc) {
    const bool json_mode = g.json || (!g.data_path.empty() && cfg.output == "json");
    const std::string text = mrkit::emit(doc, json_mode);
    if (g.out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(g.out_path);
    if (!f) throw mrkit::ConfigError(g.out_path + ": cannot open for writing");
    f << text;
}

/** Flag value when given, config-task bound otherwise. */
int resolve_bound(int flag, const mrkit::RunConfig& cfg, const std::string& kind,
                  const std::string& key, int fallback) {
    return flag >= 0 ? flag : cfg.bound(kind, key, fallback);
}

int emit_report(const GlobalOpts& g, const mrkit::RunConfig& cfg, mrkit::Report r) {
    write_out(g, cfg, mrkit::report_json(r));
    return r.ok() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact matrix-resolvent, wave-function, and k-point toolkit"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--data", g.data_path, "configuration file with initial data");
    app.add_option("--out", g.out_path, "write output to this file instead of stdout");
    app.add_flag("--json", g.json, "force JSON output");
    app.add_option("--seed", g.seed, "seed for randomized spot checks")
        ->check(CLI::NonNegativeNumber);

    int order = -1, jmax = -1, imax = -1, jmax2 = -1, xi_order = -1, k = 2, nabla = -1;
    bool symbolic = false;
    std::string method = "both", corrupt_name;

    CLI::App* c_res = app.add_subcommand("resolvent", "matrix-resolvent coefficients");
    c_res->fallthrough();
    c_res->add_option("--order", order, "number of coefficient levels")->required();
    c_res->add_flag("--symbolic", symbolic, "emit differential polynomials instead of values");

    CLI::App* c_flows = app.add_subcommand("flows", "commuting flows extracted from the recursion");
    c_flows->fallthrough();
    c_flows->add_option("--jmax", jmax, "highest flow index")->required();
    c_flows->add_flag("--symbolic", symbolic, "emit differential polynomials instead of values");

    CLI::App* c_omega = app.add_subcommand("omega", "two-point correlation table");
    c_omega->fallthrough();
    c_omega->add_option("--imax", imax, "first index bound")->required();
    c_omega->add_option("--jmax", jmax2, "second index bound")->required();
    c_omega->add_flag("--symbolic", symbolic, "emit differential polynomials instead of values");

    CLI::App* c_wave = app.add_subcommand("wave", "wave-function pair and affine table");
    c_wave->fallthrough();
    c_wave->add_option("--xi-order", xi_order, "series depth in the spectral variable");

    CLI::App* c_np = app.add_subcommand("npoint", "k-point correlation tables");
    c_np->fallthrough();
    c_np->add_option("--k", k, "number of points")->required()->check(CLI::Range(2, 4));
    c_np->add_option("--imax", imax, "index bound per point");
    c_np->add_option("--method", method, "construction route")
        ->check(CLI::IsMember({"mr", "wave", "both"}));

    CLI::App* c_ver = app.add_subcommand("verify", "run verification suites");
    c_ver->fallthrough();
    c_ver->add_option("--corrupt", corrupt_name,
                      "negative-control hook: recursion-b1 | affine-entry | kernel-sign");
    c_ver->require_subcommand(0, 1);
    CLI::App* v_res = c_ver->add_subcommand("resolvent", "symbolic recursion checks only");
    v_res->fallthrough();
    v_res->add_option("--order", order, "recursion depth");
    v_res->add_option("--nabla", nabla, "depth of the two-variable derivation check");
    CLI::App* v_wav = c_ver->add_subcommand("waves", "wave-function checks only");
    v_wav->fallthrough();
    v_wav->add_option("--xi-order", xi_order, "series depth in the spectral variable");
    v_wav->add_option("--imax", imax, "affine-table bound");
    CLI::App* v_np = c_ver->add_subcommand("npoint", "cross-route k-point checks only");
    v_np->fallthrough();
    v_np->add_option("--k", k, "number of points")->required()->check(CLI::Range(2, 3));
    v_np->add_option("--imax", imax, "index bound per point");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const auto started = std::chrono::steady_clock::now();
    int code = 0;
    try {
        using namespace mrkit;
        const Corruption corrupt = corruption_parse(corrupt_name);
        if (corrupt != Corruption::none && !*c_ver)
            throw ConfigError("--corrupt only applies to verify");

        if (*c_res) {
            if (symbolic) {
                const auto m = mr_coeffs(DiffPoly::q(), DiffPoly::r(), DiffPoly::one(), order);
                write_out(g, RunConfig{}, mr_json(m));
            } else {
                RunConfig cfg = load_config(g, true, "evaluate the resolvent (or pass --symbolic)");
                InitialData work = cfg.data;
                work.n_xi = std::max(work.n_xi, order + 2);
                const int cap = work.working_cap();
                const auto m = mr_coeffs(work.q_jet(cap), work.r_jet(cap), XJet::one(cap), order);
                write_out(g, cfg, mr_json(m, cfg.data.n_x));
            }
        } else if (*c_flows) {
            const FlowTable t = flow_table(jmax);
            if (symbolic) {
                write_out(g, RunConfig{}, flows_json(t));
            } else {
                RunConfig cfg = load_config(g, true, "evaluate the flows (or pass --symbolic)");
                EvalContext ctx(cfg.data, cfg.data.working_cap());
                write_out(g, cfg, flows_json(t, ctx, cfg.data.n_x));
            }
        } else if (*c_omega) {
            const int need = imax + jmax2 + 2;
            if (symbolic) {
                const auto m = mr_coeffs(DiffPoly::q(), DiffPoly::r(), DiffPoly::one(), need);
                const auto t = omega_table(m, imax, jmax2);
                ojson out = ojson::object();
                for (const auto& [ij, v] : t.entries)
                    out[index_key({ij.first, ij.second})] = v.to_string();
                write_out(g, RunConfig{}, out);
            } else {
                RunConfig cfg = load_config(g, true, "evaluate the table (or pass --symbolic)");
                InitialData work = cfg.data;
                work.n_xi = std::max(work.n_xi, need + 2);
                const int cap = work.working_cap();
                const auto m = mr_coeffs(work.q_jet(cap), work.r_jet(cap), XJet::one(cap), need);
                write_out(g, cfg, omega_json(omega_table(m, imax, jmax2), cfg.data.n_x));
            }
        } else if (*c_wave) {
            RunConfig cfg = load_config(g, true, "build the wave pair");
            const int n = resolve_bound(xi_order, cfg, "wave", "xi_order", 8);
            InitialData work = cfg.data;
            work.n_xi = std::max(work.n_xi, n + 2);
            const WaveContext w = WaveContext::from(work);
            const WavePair p = pair_fix(w, wave_pair(w, n));
            const int amax = std::max(0, (n - 2) / 2);
            const ATable a = a_table(w, p, amax, amax);
            write_out(g, cfg, wave_json(p, a, cfg.data.n_x));
        } else if (*c_np) {
            RunConfig cfg = load_config(g, true, "assemble k-point tables");
            if (imax < 0) imax = cfg.bound("npoint", "imax", k == 2 ? 3 : k == 3 ? 2 : 1);
            if (const TaskSpec* t = cfg.task("npoint"); t && c_np->count("--method") == 0)
                method = t->method;
            std::optional<CorrelatorTable> mr, wv;
            if (method != "wave") mr = npoint_mr(cfg.data, k, imax);
            if (method != "mr") wv = npoint_wave(cfg.data, k, imax);
            if (mr && wv) {
                const CompareReport rep = compare(*mr, *wv);
                ojson out = ojson::object();
                out["k"] = k;
                out["imax"] = imax;
                out["mr"] = table_json(*mr, cfg.data.n_x);
                out["wave"] = table_json(*wv, cfg.data.n_x);
                out["agree"] = rep.ok;
                if (!rep.ok) out["locus"] = rep.locus;
                write_out(g, cfg, out);
                code = rep.ok ? 0 : 1;
            } else {
                write_out(g, cfg, table_json(mr ? *mr : *wv, cfg.data.n_x));
            }
        } else if (*c_ver) {
            if (*v_res) {
                if (corrupt == Corruption::affine_entry || corrupt == Corruption::kernel_sign)
                    throw ConfigError("this corruption lives in the k-point assembly; "
                                      "use verify npoint or a full verify run");
                RunConfig cfg = load_config(g, false, "");
                Report r;
                r.dataset = cfg.data.name;
                r.seed = cfg.seed;
                r.checks = verify_resolvent(resolve_bound(order, cfg, "resolvent", "order", 8),
                                            resolve_bound(nabla, cfg, "resolvent", "nabla", 5),
                                            corrupt);
                code = emit_report(g, cfg, std::move(r));
            } else if (*v_wav) {
                if (corrupt != Corruption::none)
                    throw ConfigError("no corruption hook targets the wave checks");
                RunConfig cfg = load_config(g, true, "verify the wave construction");
                Report r;
                r.dataset = cfg.data.name;
                r.seed = cfg.seed;
                r.checks = verify_waves(cfg.data, resolve_bound(xi_order, cfg, "wave", "xi_order", 8),
                                        resolve_bound(imax, cfg, "wave", "imax", 6));
                code = emit_report(g, cfg, std::move(r));
            } else if (*v_np) {
                if (corrupt == Corruption::recursion_b1)
                    throw ConfigError("this corruption lives in the symbolic recursion; "
                                      "use verify resolvent or a full verify run");
                RunConfig cfg = load_config(g, true, "verify the k-point tables");
                NPointBounds np;
                np.run_k2 = k == 2;
                np.run_k3 = k == 3;
                np.calibrate = false;
                if (k == 2) np.k2_imax = resolve_bound(imax, cfg, "npoint", "k2_imax", 3);
                if (k == 3) np.k3_imax = resolve_bound(imax, cfg, "npoint", "k3_imax", 2);
                Report r;
                r.dataset = cfg.data.name;
                r.seed = cfg.seed;
                r.checks = verify_npoint(cfg.data, np, corrupt);
                code = emit_report(g, cfg, std::move(r));
            } else {
                RunConfig cfg = load_config(g, true, "run the full verification suite");
                code = emit_report(g, cfg, run_verify(cfg, corrupt));
            }
        }
    } catch (const mrkit::IdentityViolation& e) {
        std::cerr << "identity violation: " << e.what() << "\n";
        code = 1;
    } catch (const mrkit::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        code = 2;
    } catch (const mrkit::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        code = 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        code = 2;
    }
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - started)
                        .count();
    std::cerr << "mrkit: finished in " << ms << " ms\n";
    return code;
}
