#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <mrkit/xi_series.hpp>

using mrkit::EpsLaurent;
using mrkit::kNoFloor;
using mrkit::Rational;
using mrkit::XiSeries;

namespace {

using Ser = XiSeries<EpsLaurent>;

Ser random_tail(std::mt19937_64& rng, int floor) {
    std::uniform_int_distribution<int> num(-6, 6), den(1, 6);
    Ser s(floor);
    for (int e = -1; e >= floor; --e) {
        const Rational c(num(rng), den(rng));
        if (c != 0) s.set(e, EpsLaurent(c));
    }
    return s;
}

} // namespace

TEST_CASE("xi-series arithmetic and floors", "[xi]") {
    const EpsLaurent one = EpsLaurent::one();

    SECTION("product floors combine floor+top crosswise") {
        Ser a(-4);
        a.set(1, one);
        a.set(-4, EpsLaurent(Rational(3)));
        Ser b(-2);
        b.set(0, one);
        const Ser p = a * b;
        REQUIRE(p.floor() == -1);  // missing b-tail meets a's xi^1
        REQUIRE(p.coeff(1) == one);
        REQUIRE_THROWS_AS(p.coeff(-2), mrkit::BadExponent);
    }

    SECTION("shift moves floor along") {
        Ser a(-3);
        a.set(0, one);
        const Ser s = a.shifted(-2);
        REQUIRE(s.floor() == -5);
        REQUIRE(s.coeff(-2) == one);
    }

    SECTION("exact series multiply without floors") {
        Ser a;
        a.set(1, one);
        a.set(0, -one);
        const Ser p = a * a;
        REQUIRE(p.exact());
        REQUIRE(p.coeff(2) == one);
        REQUIRE(p.coeff(1) == EpsLaurent(Rational(-2)));
        REQUIRE(p.coeff(0) == one);
    }
}

TEST_CASE("xi_exp is the exponential on truncated tails", "[xi]") {
    const EpsLaurent one = EpsLaurent::one();

    SECTION("exp of c/xi matches the closed form") {
        Ser s(-6);
        s.set(-1, EpsLaurent(Rational(2)));
        const Ser e = mrkit::xi_exp(s, one);
        REQUIRE(e.coeff(0) == one);
        REQUIRE(e.coeff(-1) == EpsLaurent(Rational(2)));
        REQUIRE(e.coeff(-2) == EpsLaurent(Rational(2)));      // 2^2/2!
        REQUIRE(e.coeff(-3) == EpsLaurent(Rational(4, 3)));   // 2^3/3!
        REQUIRE(e.coeff(-6) == EpsLaurent(Rational(4, 45)));  // 2^6/6!
    }

    SECTION("positive powers are rejected") {
        Ser s(-2);
        s.set(0, one);
        REQUIRE_THROWS_AS(mrkit::xi_exp(s, one), mrkit::BadExponent);
    }

    SECTION("homomorphism property on random tails") {
        std::mt19937_64 rng(20260818);
        for (int trial = 0; trial < 60; ++trial) {
            const Ser s = random_tail(rng, -5), t = random_tail(rng, -5);
            const Ser lhs = mrkit::xi_exp(s + t, one);
            const Ser rhs = mrkit::xi_exp(s, one) * mrkit::xi_exp(t, one);
            REQUIRE(lhs.agrees_with(rhs));
            const Ser inv = mrkit::xi_exp(-s, one);
            REQUIRE((mrkit::xi_exp(s, one) * inv).agrees_with(Ser::monomial(0, one)));
        }
    }
}
