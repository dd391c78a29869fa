#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <mrkit/diff_poly.hpp>

using mrkit::DiffPoly;
using mrkit::EpsLaurent;
using mrkit::EvalContext;
using mrkit::InitialData;
using mrkit::JetVar;
using mrkit::Rational;
using mrkit::Species;
using mrkit::XJet;

namespace {

DiffPoly random_poly(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> nterms(0, 4), deg(0, 2), ord(0, 2), num(-5, 5);
    std::uniform_int_distribution<int> den(1, 5), sp(0, 1);
    DiffPoly p;
    const int n = nterms(rng);
    for (int i = 0; i < n; ++i) {
        DiffPoly term(EpsLaurent::monomial(ord(rng) - 1, Rational(num(rng), den(rng))));
        const int d = deg(rng);
        for (int j = 0; j < d; ++j)
            term = term * DiffPoly::var(static_cast<Species>(sp(rng)), ord(rng));
        p = p + term;
    }
    return p;
}

} // namespace

TEST_CASE("differential polynomial basics", "[diffpoly]") {
    const DiffPoly q = DiffPoly::q(), r = DiffPoly::r();

    SECTION("derivation acts by Leibniz on generators") {
        REQUIRE(q.derived() == DiffPoly::q(1));
        const DiffPoly p = q * q * r;
        const DiffPoly expect =
            DiffPoly::q(1) * q * r * Rational(2) + q * q * DiffPoly::r(1);
        REQUIRE(p.derived() == expect);
    }

    SECTION("partial derivatives") {
        const DiffPoly p = q * q * DiffPoly::r(1) + r;
        REQUIRE(p.partial({Species::q, 0}) == q * DiffPoly::r(1) * Rational(2));
        REQUIRE(p.partial({Species::r, 1}) == q * q);
        REQUIRE(p.partial({Species::q, 3}).is_zero());
    }

    SECTION("canonical rendering is stable") {
        const DiffPoly p = r * q + DiffPoly::q(2) * EpsLaurent::eps(1);
        REQUIRE(p.to_string() == "(1)*q0*r0 + (e)*q2");
    }
}

TEST_CASE("evaluation is a ring homomorphism commuting with d/dX", "[diffpoly][property]") {
    InitialData data;
    data.q_terms = {{0, 0, Rational(1)}, {1, 0, Rational(1)}};              // q = 1 + X
    data.r_terms = {{0, 0, Rational(1)}, {2, -1, Rational(-1, 2)}};          // r = 1 - X^2/(2 eps)
    const EvalContext ctx(data, 10);

    SECTION("generators evaluate to the data") {
        REQUIRE(dp_eval(DiffPoly::q(), ctx).coeff(1) == EpsLaurent::one());
        REQUIRE(dp_eval(DiffPoly::q(1), ctx).coeff(0) == EpsLaurent::one());
        REQUIRE(dp_eval(DiffPoly::q(2), ctx).is_zero());
        REQUIRE(dp_eval(DiffPoly::r(1), ctx).coeff(1) ==
                EpsLaurent::monomial(-1, Rational(-1)));
    }

    SECTION("products, sums and derivatives commute with evaluation") {
        std::mt19937_64 rng(20260818);
        for (int trial = 0; trial < 60; ++trial) {
            const DiffPoly a = random_poly(rng), b = random_poly(rng);
            REQUIRE(dp_eval(a * b, ctx).agrees_with(dp_eval(a, ctx) * dp_eval(b, ctx)));
            REQUIRE(dp_eval(a + b, ctx).agrees_with(dp_eval(a, ctx) + dp_eval(b, ctx)));
            REQUIRE(dp_eval(a.derived(), ctx).agrees_with(dp_eval(a, ctx).derived()));
        }
    }

    SECTION("ring axioms") {
        std::mt19937_64 rng(99);
        for (int trial = 0; trial < 60; ++trial) {
            const DiffPoly a = random_poly(rng), b = random_poly(rng), c = random_poly(rng);
            REQUIRE((a * b) == (b * a));
            REQUIRE(((a * b) * c) == (a * (b * c)));
            REQUIRE((a * (b + c)) == (a * b + a * c));
            REQUIRE(((a * b).derived()) == (a.derived() * b + a * b.derived()));
        }
    }
}
