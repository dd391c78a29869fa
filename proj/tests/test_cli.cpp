#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <string>
#include <sys/wait.h>

#include <mrkit/config.hpp>
#include <mrkit/json_io.hpp>
#include <mrkit/verify.hpp>

using mrkit::ConfigError;
using mrkit::EpsLaurent;
using mrkit::Rational;
using mrkit::XJet;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
};

/** Run the installed binary with the given arguments, capturing stdout. */
RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(MRKIT_BIN) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    RunResult r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string data_file(const char* name) {
    return std::string(MRKIT_DATA_DIR) + "/" + name;
}

nlohmann::json minimal_config() {
    return nlohmann::json::parse(R"({
        "name": "t",
        "initial": {"q": [[0, 0, "1"]], "r": [[1, 2, "-3/2"]]},
        "truncation": {"N_X": 6, "N_xi": 5, "eps_ceiling": 4}
    })");
}

} // namespace

TEST_CASE("configuration documents parse and validate", "[cli][config]") {
    SECTION("bundled sample datasets load with their stated fields") {
        const mrkit::RunConfig cfg = mrkit::config_load(data_file("DATA2.json"));
        REQUIRE(cfg.data.name == "DATA2");
        REQUIRE(cfg.data.n_x == 12);
        REQUIRE(cfg.data.n_xi == 8);
        REQUIRE(cfg.data.eps_ceiling == 8);
        REQUIRE(cfg.output == "json");
        REQUIRE(cfg.seed == 2);
        REQUIRE(cfg.task("verify-all") != nullptr);
        const XJet q = cfg.data.q_jet(cfg.data.working_cap());
        REQUIRE(q.coeff(0).agrees_with(EpsLaurent::one()));
        REQUIRE(q.coeff(1).agrees_with(EpsLaurent::one()));
        REQUIRE(q.coeff(2).is_zero());
    }
    SECTION("defaults fill in: tasks, output, seed") {
        const mrkit::RunConfig cfg = mrkit::config_parse(minimal_config());
        REQUIRE(cfg.tasks.size() == 1);
        REQUIRE(cfg.tasks[0].kind == "verify-all");
        REQUIRE(cfg.output == "json");
        REQUIRE(cfg.seed == 0);
        REQUIRE(cfg.bound("npoint", "k2_imax", 3) == 3);
    }
    SECTION("a matching task owns its bounds; otherwise verify-all, then the fallback") {
        auto doc = minimal_config();
        doc["tasks"] = nlohmann::json::parse(
            R"([{"kind": "verify-all", "order": 5}, {"kind": "npoint", "k": 2, "imax": 1}])");
        const mrkit::RunConfig cfg = mrkit::config_parse(doc);
        REQUIRE(cfg.bound("npoint", "imax", 9) == 1);
        REQUIRE(cfg.bound("npoint", "k", 9) == 2);
        REQUIRE(cfg.bound("resolvent", "order", 9) == 5);
        REQUIRE(cfg.bound("resolvent", "nabla", 9) == 9);
    }
    SECTION("truncation bounds are enforced") {
        auto doc = minimal_config();
        doc["truncation"]["N_X"] = 3;
        REQUIRE_THROWS_AS(mrkit::config_parse(doc), ConfigError);
        doc = minimal_config();
        doc["truncation"]["eps_ceiling"] = -1;
        REQUIRE_THROWS_AS(mrkit::config_parse(doc), ConfigError);
    }
    SECTION("malformed rationals are rejected with a path") {
        auto doc = minimal_config();
        doc["initial"]["q"] = nlohmann::json::parse(R"([[0, 0, "1/0"]])");
        REQUIRE_THROWS_WITH(mrkit::config_parse(doc),
                            Catch::Matchers::ContainsSubstring("initial.q[0][2]"));
        doc["initial"]["q"] = nlohmann::json::parse(R"([[0, 0, "abc"]])");
        REQUIRE_THROWS_AS(mrkit::config_parse(doc), ConfigError);
    }
    SECTION("unknown fields are rejected by name") {
        auto doc = minimal_config();
        doc["truncation"]["N_nu"] = 4;
        REQUIRE_THROWS_WITH(mrkit::config_parse(doc),
                            Catch::Matchers::ContainsSubstring("truncation.N_nu"));
        doc = minimal_config();
        doc["tasks"] = nlohmann::json::parse(R"([{"kind": "npoint", "k": 5}])");
        REQUIRE_THROWS_WITH(mrkit::config_parse(doc),
                            Catch::Matchers::ContainsSubstring("k must be between 2 and 4"));
    }
    SECTION("wave tasks require an invertible constant term in q") {
        auto doc = minimal_config();
        doc["initial"]["q"] = nlohmann::json::parse(R"([[1, 0, "1"]])");
        doc["tasks"] = nlohmann::json::parse(R"([{"kind": "wave"}])");
        REQUIRE_THROWS_WITH(mrkit::config_parse(doc),
                            Catch::Matchers::ContainsSubstring("constant term"));
        doc["tasks"] = nlohmann::json::parse(R"([{"kind": "resolvent", "order": 3}])");
        REQUIRE_NOTHROW(mrkit::config_parse(doc));
    }
    SECTION("missing files and broken JSON map to configuration errors") {
        REQUIRE_THROWS_AS(mrkit::config_load("/nonexistent/x.json"), ConfigError);
        const std::string path = "broken_config_tmp.json";
        {
            std::ofstream f(path);
            f << "{ not json";
        }
        REQUIRE_THROWS_WITH(mrkit::config_load(path),
                            Catch::Matchers::ContainsSubstring(path));
        std::remove(path.c_str());
    }
}

TEST_CASE("serialized forms are canonical", "[cli][json]") {
    SECTION("eps-Laurent strings") {
        EpsLaurent v;
        REQUIRE(mrkit::eps_str(v) == "0");
        v = EpsLaurent::monomial(0, Rational(1));
        REQUIRE(mrkit::eps_str(v) == "1");
        v = v + EpsLaurent::monomial(-2, Rational(1, 3));
        v = v + EpsLaurent::monomial(1, Rational(-5));
        REQUIRE(mrkit::eps_str(v) == "1/3*eps^-2 + 1 + -5*eps^1");
    }
    SECTION("jets serialize sparsely and respect the display trim") {
        XJet s = XJet::monomial(8, 0, EpsLaurent::one());
        s = s + XJet::monomial(8, 2, EpsLaurent::monomial(0, Rational(-1)));
        s = s + XJet::monomial(8, 7, EpsLaurent::monomial(1, Rational(2)));
        const mrkit::ojson full = mrkit::xjet_json(s);
        REQUIRE(full.size() == 3);
        REQUIRE(full["X^0"] == "1");
        REQUIRE(full["X^2"] == "-1");
        REQUIRE(full["X^7"] == "2*eps^1");
        const mrkit::ojson trimmed = mrkit::xjet_json(s, 4);
        REQUIRE(trimmed.size() == 2);
    }
    SECTION("an empty table serializes to an empty object") {
        const mrkit::CorrelatorTable t{2, 0, "mr", {}};
        REQUIRE(mrkit::table_json(t).dump() == "{}");
    }
    SECTION("reports carry status, loci, and windows") {
        mrkit::Report r;
        r.dataset = "t";
        r.seed = 9;
        mrkit::CheckResult good;
        good.name = "a";
        good.passed = true;
        good.window = "w";
        mrkit::CheckResult bad;
        bad.name = "b";
        bad.locus = "b at x";
        bad.detail = "broken";
        r.checks = {good, bad};
        REQUIRE(!r.ok());
        REQUIRE(r.first_failure() == "b at x");
        const mrkit::ojson doc = mrkit::report_json(r);
        REQUIRE(doc["status"] == "fail");
        REQUIRE(doc["checks"][0]["status"] == "pass");
        REQUIRE(doc["checks"][1]["locus"] == "b at x");
        const std::string text = mrkit::emit(doc, false);
        REQUIRE(text.find("first_failure: b at x") != std::string::npos);
    }
    SECTION("identical verification runs emit identical bytes") {
        mrkit::RunConfig cfg;
        cfg.data.name = "d";
        cfg.data.q_terms = {{0, 0, Rational(1)}};
        cfg.data.r_terms = {{0, 0, Rational(2)}};
        cfg.data.n_x = 8;
        cfg.data.n_xi = 6;
        mrkit::TaskSpec t;
        t.kind = "verify-all";
        t.bounds = {{"order", 3},    {"nabla", 2},   {"jmax", 1},
                    {"xi_order", 4}, {"k2_imax", 0}, {"k3_imax", 0}};
        cfg.tasks = {t};
        const std::string one = mrkit::emit(mrkit::report_json(mrkit::run_verify(cfg)), true);
        const std::string two = mrkit::emit(mrkit::report_json(mrkit::run_verify(cfg)), true);
        REQUIRE(one == two);
        REQUIRE(one.find("\"status\": \"pass\"") != std::string::npos);
    }
}

TEST_CASE("the command-line binary honors its contract", "[cli][subprocess]") {
    SECTION("help exits cleanly") {
        REQUIRE(run_cli("--help").code == 0);
    }
    SECTION("symbolic resolvent emits the recursion seeds") {
        const RunResult r = run_cli("resolvent --order 1 --symbolic --json");
        REQUIRE(r.code == 0);
        const auto doc = nlohmann::json::parse(r.out);
        REQUIRE(doc["order"] == 1);
        REQUIRE(doc["B"][0] == "(1)*q0");
        REQUIRE(doc["C"][0] == "(-1)*r0");
    }
    SECTION("the two-point table on sample data has the stated corner") {
        const RunResult r =
            run_cli("omega --imax 0 --jmax 0 --data " + data_file("DATA2.json"));
        REQUIRE(r.code == 0);
        const auto doc = nlohmann::json::parse(r.out);
        REQUIRE(doc["(0,0)"]["X^0"] == "1");
        REQUIRE(doc["(0,0)"]["X^2"] == "-1");
        REQUIRE(doc["(0,0)"].size() == 2);
    }
    SECTION("invalid invocations exit with code 2") {
        REQUIRE(run_cli("omega --imax 1 --jmax 1 --data /nonexistent/x.json").code == 2);
        REQUIRE(run_cli("wave").code == 2);
        REQUIRE(run_cli("").code == 2);
        REQUIRE(run_cli("npoint --k 7 --data " + data_file("DATA1.json")).code == 2);
        REQUIRE(run_cli("verify waves --corrupt recursion-b1 --data " +
                        data_file("DATA1.json"))
                    .code == 2);
    }
    SECTION("npoint emits one bare table for a single method") {
        const RunResult r =
            run_cli("npoint --k 2 --imax 0 --method mr --data " + data_file("DATA1.json"));
        REQUIRE(r.code == 0);
        const auto doc = nlohmann::json::parse(r.out);
        REQUIRE(doc.size() == 1);
        REQUIRE(doc["(0,0)"]["X^0"] == "1");
    }
}
