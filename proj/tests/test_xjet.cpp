#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <mrkit/xjet.hpp>

using mrkit::EpsLaurent;
using mrkit::kExact;
using mrkit::Rational;
using mrkit::XJet;

namespace {

XJet random_jet(std::mt19937_64& rng, int cap) {
    std::uniform_int_distribution<int> nterms(0, 4), ord(0, cap), num(-9, 9);
    std::uniform_int_distribution<int> den(1, 9), epow(-1, 2);
    XJet v(cap);
    const int n = nterms(rng);
    for (int i = 0; i < n; ++i)
        v = v + XJet::monomial(cap, ord(rng),
                               EpsLaurent::monomial(epow(rng), Rational(num(rng), den(rng))));
    return v;
}

} // namespace

TEST_CASE("X-jet arithmetic and windows", "[xjet]") {
    const int cap = 8;
    const XJet X = XJet::monomial(cap, 1, EpsLaurent::one());
    const XJet one = XJet::one(cap);

    SECTION("polynomial products stay exact while the degree fits") {
        const XJet p = (one + X) * (one - X);
        REQUIRE(p.exact());
        REQUIRE(p.coeff(2) == EpsLaurent::monomial(0, Rational(-1)));
        XJet q = one;
        for (int i = 0; i < 9; ++i) q = q * (one + X);
        REQUIRE(!q.exact());      // degree 9 no longer fits cap 8
        REQUIRE(q.valid_to() == cap);
        REQUIRE(q.coeff(8) == EpsLaurent(Rational(9)));
    }

    SECTION("derivative and antiderivative") {
        const XJet p = X * X * X;  // X^3
        REQUIRE(p.derived().coeff(2) == EpsLaurent(Rational(3)));
        REQUIRE(p.derived().exact());
        const XJet q = p.antiderived();
        REQUIRE(q.coeff(4) == EpsLaurent(Rational(1, 4)));
        REQUIRE(q.derived().agrees_with(p));
        // antiderivative of an order-cap polynomial can no longer be exact
        XJet top = XJet::monomial(cap, cap, EpsLaurent::one());
        REQUIRE(top.antiderived().valid_to() == cap);
        REQUIRE(top.antiderived().is_zero());
    }

    SECTION("inverse against the geometric series") {
        const XJet inv = (one - X).inverse(8);
        for (int m = 0; m <= cap; ++m) REQUIRE(inv.coeff(m) == EpsLaurent(Rational(1)));
        REQUIRE(((one - X) * inv).agrees_with(one));
        REQUIRE(inv.valid_to() == cap);
        REQUIRE_THROWS_AS(X.inverse(8), mrkit::NotInvertible);
    }

    SECTION("derivative spends a valid order on inexact jets") {
        const XJet inv = (one - X).inverse(8);
        REQUIRE(inv.derived().valid_to() == cap - 1);
        REQUIRE(inv.derived().coeff(3) == EpsLaurent(Rational(4)));
        // the antiderivative wins it back
        REQUIRE(inv.derived().antiderived().valid_to() == cap);
    }

    SECTION("eps scalars thread through") {
        const XJet p = (one + X) * EpsLaurent::eps(-1);
        REQUIRE(p.coeff(1) == EpsLaurent::eps(-1));
        REQUIRE((p * EpsLaurent::eps(1)).agrees_with(one + X));
    }

    SECTION("mixed caps are rejected, wildcard zero is not") {
        const XJet other(5);
        REQUIRE_THROWS_AS(one + XJet::one(5), mrkit::BadExponent);
        REQUIRE((one + XJet()).agrees_with(one));
        REQUIRE((one * XJet()).is_zero());
    }
}

TEST_CASE("X-jet ring axioms on random values", "[xjet][property]") {
    std::mt19937_64 rng(20260818);
    const int cap = 6;
    for (int trial = 0; trial < 120; ++trial) {
        const XJet a = random_jet(rng, cap), b = random_jet(rng, cap), c = random_jet(rng, cap);
        REQUIRE((a + b).agrees_with(b + a));
        REQUIRE((a * b).agrees_with(b * a));
        REQUIRE(((a * b) * c).agrees_with(a * (b * c)));
        REQUIRE((a * (b + c)).agrees_with(a * b + a * c));
        REQUIRE((a - a).is_zero());
        // Leibniz rule for the jet derivative
        REQUIRE(((a * b).derived()).agrees_with(a.derived() * b + a * b.derived()));
    }
}
