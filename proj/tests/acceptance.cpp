#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <sys/wait.h>

#include <mrkit/config.hpp>
#include <mrkit/correlators.hpp>
#include <mrkit/verify.hpp>

using namespace mrkit;

namespace {

/**
 * Runs one acceptance criterion, prints exactly one pass/fail line, and
 * enforces the runtime budget (seconds; 0 disables). Any exception fails
 * the criterion with its message as the reason.
 */
bool criterion(int n, double budget_s, const std::function<void()>& body) {
    const auto start = std::chrono::steady_clock::now();
    bool ok = false;
    std::string why;
    try {
        body();
        ok = true;
    } catch (const std::exception& e) {
        why = e.what();
    }
    const double s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (ok && budget_s > 0 && s > budget_s) {
        ok = false;
        why = "over time budget: " + std::to_string(s) + " s > " + std::to_string(budget_s) + " s";
    }
    if (ok)
        std::printf("[criterion %d] PASS (%.1f s)\n", n, s);
    else
        std::printf("[criterion %d] FAIL: %s\n", n, why.c_str());
    std::fflush(stdout);
    return ok;
}

void expect(bool cond, const std::string& what) {
    if (!cond) throw std::runtime_error(what);
}

InitialData dataset(const char* name) {
    return config_load(std::string(MRKIT_DATA_DIR) + "/" + name).data;
}

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(MRKIT_BIN) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    expect(p != nullptr, "cannot spawn the binary");
    RunResult r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

} // namespace

TEST_CASE("criterion 1: symbolic resolvent identities at order 8") {
    REQUIRE(criterion(1, 10.0, [] {
        const auto m = mr_coeffs(DiffPoly::q(), DiffPoly::r(), DiffPoly::one(), 8);
        for (int j = 0; j <= 8; ++j) {
            const DiffPoly res =
                eps_dx(m.a[j]) - DiffPoly::r() * m.b[j] - DiffPoly::q() * m.c[j];
            expect(res.is_zero(), "derivative relation fails at level " + std::to_string(j));
        }
        expect(mr_verify(m) > 0, "trace, determinant, or commutator window was empty");
    }));
}

TEST_CASE("criterion 2: two-variable derivation identity to order 5") {
    REQUIRE(criterion(2, 60.0, [] {
        expect(nabla_check(5) > 0, "derivation identity window was empty");
    }));
}

TEST_CASE("criterion 3: two-point structure and the zero dataset") {
    REQUIRE(criterion(3, 30.0, [] {
        const auto m = mr_coeffs(DiffPoly::q(), DiffPoly::r(), DiffPoly::one(), 10);
        const auto t = omega_table(m, 4, 4);
        expect(t.at(0, 0) == DiffPoly::q() * DiffPoly::r(), "corner entry is not q r");
        const DiffPoly w10 =
            (DiffPoly::q(1) * DiffPoly::r() - DiffPoly::q() * DiffPoly::r(1)) *
            EpsLaurent::eps(1);
        expect(t.at(1, 0) == w10, "entry (1,0) is not eps (q_X r - q r_X)");
        expect(omega_symmetry_check(t) > 0, "symmetry window was empty");

        InitialData zero;
        zero.q_terms = {{0, 0, Rational(1)}, {1, 0, Rational(1)}};
        zero.r_terms = {};
        const int cap = zero.working_cap();
        const auto mz = mr_coeffs(zero.q_jet(cap), zero.r_jet(cap), XJet::one(cap), 6);
        const auto tz = omega_table(mz, 2, 2);
        for (const auto& [ij, v] : tz.entries)
            expect(v.is_zero(), "zero dataset produced a nonzero entry");
    }));
}

TEST_CASE("criterion 4: flow extraction and commutativity") {
    REQUIRE(criterion(4, 60.0, [] {
        const FlowTable t = flow_table(2);
        expect(flow_verify(t) > 0, "flow extraction window was empty");
        expect(t.p[0].first == DiffPoly::q(1) && t.p[0].second == DiffPoly::r(1),
               "lowest flow is not the X-derivative");
        for (int i = 0; i <= 2; ++i)
            for (int j = i + 1; j <= 2; ++j)
                for (const DiffPoly& g : {DiffPoly::q(), DiffPoly::r()}) {
                    const DiffPoly ij = flow_derive(t, i, flow_derive(t, j, g));
                    const DiffPoly ji = flow_derive(t, j, flow_derive(t, i, g));
                    expect((ij - ji).is_zero(), "flows " + std::to_string(i) + " and " +
                                                    std::to_string(j) + " do not commute");
                }
    }));
}

TEST_CASE("criterion 5: wave construction on both sample datasets") {
    REQUIRE(criterion(5, 60.0, [] {
        for (const char* name : {"DATA1.json", "DATA2.json"}) {
            const auto t0 = std::chrono::steady_clock::now();
            InitialData work = dataset(name);
            work.n_xi = std::max(work.n_xi, 10);
            const WaveContext w = WaveContext::from(work);
            for (const WaveKind kind : {WaveKind::A, WaveKind::B}) {
                const RiccatiSeries s = riccati_series(w, kind, 8);
                const XiSeries<XJet> res = riccati_residual(w, s);
                for (const auto& [e, v] : res.terms())
                    expect(v.is_zero(), std::string(name) + ": Riccati residual at xi^" +
                                            std::to_string(e));
            }
            const WavePair raw = wave_pair(w, 8);
            const XiSeries<XJet> ddx = detail::wave_dx(raw.d);
            for (const auto& [e, v] : ddx.terms())
                expect(v.is_zero(), std::string(name) + ": pairing scalar is not X-constant");
            const WavePair p = pair_fix(w, raw);
            expect(p.d.agrees_with(XiSeries<XJet>::monomial(1, w.one * Rational(-2))),
                   std::string(name) + ": normalized pairing is not -2 xi");
            expect(wave_ode_check(w, p) > 0, std::string(name) + ": spectral equation window");
            const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                                 .count();
            expect(s < 30.0, std::string(name) + ": over the per-dataset budget");
        }
    }));
}

TEST_CASE("criterion 6: rank-one factorization on both sample datasets") {
    REQUIRE(criterion(6, 30.0, [] {
        for (const char* name : {"DATA1.json", "DATA2.json"}) {
            InitialData work = dataset(name);
            work.n_xi = std::max(work.n_xi, 10);
            expect(work.working_cap() >= 8, "working order does not reach X^8");
            const WaveContext w = WaveContext::from(work);
            const WavePair p = pair_fix(w, wave_pair(w, 8));
            expect(rp_check(w, p, 6) == 4, std::string(name) + ": factorization window");
        }
    }));
}

TEST_CASE("criterion 7: kernel purity and the constant dataset") {
    REQUIRE(criterion(7, 30.0, [] {
        InitialData work = dataset("DATA2.json");
        work.n_xi = std::max(work.n_xi, 16);
        const WaveContext w = WaveContext::from(work);
        const WavePair p = pair_fix(w, wave_pair(w, 14));
        const ATable a = a_table(w, p, 6, 6);
        expect(static_cast<int>(a.a.size()) == 49, "affine table has the wrong shape");

        InitialData flat;
        flat.q_terms = {{0, 0, Rational(1)}};
        flat.r_terms = {};
        flat.n_xi = 10;
        const WaveContext wf = WaveContext::from(flat);
        const WavePair pf = pair_fix(wf, wave_pair(wf, 8));
        const ATable af = a_table(wf, pf, 3, 3);
        for (const auto& [ij, v] : af.a)
            expect(v.is_zero(), "constant dataset produced a nonzero affine entry");
    }));
}

TEST_CASE("criterion 8: the two constructions and their oracles agree") {
    REQUIRE(criterion(8, 600.0, [] {
        for (const char* name : {"DATA1.json", "DATA2.json"}) {
            const InitialData data = dataset(name);
            const std::string tag = std::string(name) + ": ";

            const CorrelatorTable mr2 = npoint_mr(data, 2, 3);
            const CorrelatorTable wv2 = npoint_wave(data, 2, 3);
            const CompareReport r2 = compare(mr2, wv2);
            expect(r2.ok, tag + "two-point routes differ at " + r2.locus);
            InitialData work = data;
            work.n_xi = std::max(work.n_xi, 10);
            const int cap = work.working_cap();
            const auto m = mr_coeffs(work.q_jet(cap), work.r_jet(cap), XJet::one(cap), 8);
            const auto om = omega_table(m, 3, 3);
            for (int i = 0; i <= 3; ++i)
                for (int j = 0; j <= 3; ++j)
                    expect(om.at(i, j).agrees_with(mr2.at({i, j})),
                           tag + "two-point table mismatch at (" + std::to_string(i) + "," +
                               std::to_string(j) + ")");

            const CorrelatorTable mr3 = npoint_mr(data, 3, 2);
            const CorrelatorTable wv3 = npoint_wave(data, 3, 2);
            const CompareReport r3 = compare(mr3, wv3);
            expect(r3.ok, tag + "three-point routes differ at " + r3.locus);
            const CorrelatorTable fl = omega3_flow_table(data, 2);
            const CompareReport rf = compare(mr3, fl);
            expect(rf.ok, tag + "three-point flow oracle differs at " + rf.locus);
        }
    }));
}

TEST_CASE("criterion 9: deliberate corruptions are caught with pointed loci") {
    REQUIRE(criterion(9, 0.0, [] {
        const std::string data = std::string(MRKIT_DATA_DIR) + "/DATA2.json";
        const RunResult rec = run_cli("verify resolvent --corrupt recursion-b1");
        expect(rec.code == 1, "corrupted recursion did not exit 1");
        expect(rec.out.find("resolvent.dA[j=1]") != std::string::npos,
               "corrupted recursion missing its locus");
        const RunResult aff =
            run_cli("verify npoint --k 2 --imax 1 --corrupt affine-entry --data " + data);
        expect(aff.code == 1, "corrupted affine entry did not exit 1");
        expect(aff.out.find("(0,0)") != std::string::npos,
               "corrupted affine entry missing its locus");
        const RunResult ker =
            run_cli("verify npoint --k 2 --imax 1 --corrupt kernel-sign --data " + data);
        expect(ker.code == 1, "flipped kernel sign did not exit 1");
        expect(ker.out.find("npoint.regularity") != std::string::npos,
               "flipped kernel sign missing its locus");
    }));
}

TEST_CASE("criterion 10: verification reports are byte-identical across runs") {
    REQUIRE(criterion(10, 0.0, [] {
        const std::string args =
            "verify --data " + std::string(MRKIT_DATA_DIR) + "/DATA2.json";
        const RunResult one = run_cli(args);
        const RunResult two = run_cli(args);
        expect(one.code == 0, "first run did not pass");
        expect(two.code == 0, "second run did not pass");
        expect(!one.out.empty(), "report was empty");
        expect(one.out == two.out, "reports differ between runs");
    }));
}
