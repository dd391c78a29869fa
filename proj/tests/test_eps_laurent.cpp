#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <mrkit/eps_laurent.hpp>

using mrkit::EpsLaurent;
using mrkit::kExact;
using mrkit::Rational;

namespace {

/** Random exact Laurent polynomial with small support and small entries. */
EpsLaurent random_poly(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> nterms(0, 4), expo(-3, 5), num(-9, 9);
    std::uniform_int_distribution<int> den(1, 9);
    EpsLaurent v;
    const int n = nterms(rng);
    for (int i = 0; i < n; ++i)
        v = v + EpsLaurent::monomial(expo(rng), Rational(num(rng), den(rng)));
    return v;
}

} // namespace

TEST_CASE("eps-Laurent basic products", "[eps]") {
    const EpsLaurent one = EpsLaurent::one();
    const EpsLaurent eps = EpsLaurent::eps();

    SECTION("(1+eps)(1-eps) = 1-eps^2, exact") {
        const EpsLaurent p = (one + eps) * (one - eps);
        REQUIRE(p == EpsLaurent::from_terms({{0, Rational(1)}, {2, Rational(-1)}}));
        REQUIRE(p.exact());
    }

    SECTION("monomial inverse is exact") {
        const EpsLaurent v = EpsLaurent::monomial(1, Rational(2));
        REQUIRE(v.inverse(8) == EpsLaurent::monomial(-1, Rational(1, 2)));
    }

    SECTION("geometric inverse of 1+eps") {
        const EpsLaurent inv = (one + eps).inverse(8);
        REQUIRE(inv.exact_to() == 8);
        for (int k = 0; k <= 8; ++k) REQUIRE(inv.coeff(k) == (k % 2 ? Rational(-1) : Rational(1)));
        REQUIRE(((one + eps) * inv).agrees_with(one));
    }

    SECTION("inverse of a Laurent unit starting below eps^0") {
        // 1/(2 eps^-1 + 1) = (eps/2) * 1/(1 + eps/2) = eps/2 - eps^2/4 + ...
        const EpsLaurent v = EpsLaurent::from_terms({{-1, Rational(2)}, {0, Rational(1)}});
        const EpsLaurent inv = v.inverse(6);
        REQUIRE(inv.coeff(1) == Rational(1, 2));
        REQUIRE(inv.coeff(2) == Rational(-1, 4));
        REQUIRE(inv.coeff(3) == Rational(1, 8));
        REQUIRE((v * inv).agrees_with(one));
    }
}

TEST_CASE("eps-Laurent window bookkeeping", "[eps]") {
    const EpsLaurent one = EpsLaurent::one();

    SECTION("addition takes the tighter window") {
        const EpsLaurent a = EpsLaurent::from_terms({{0, Rational(1)}}, 5);
        const EpsLaurent b = EpsLaurent::from_terms({{1, Rational(2)}, {7, Rational(3)}});
        const EpsLaurent s = a + b;
        REQUIRE(s.exact_to() == 5);
        REQUIRE(s.coeff(1) == Rational(2));
        REQUIRE_THROWS_AS(s.coeff(7), mrkit::BadExponent);
    }

    SECTION("multiplication shifts windows by the partner's lowest exponent") {
        const EpsLaurent a = EpsLaurent::from_terms({{0, Rational(1)}}, 4);
        const EpsLaurent b = EpsLaurent::monomial(2, Rational(1));
        REQUIRE((a * b).exact_to() == 6);
        const EpsLaurent c = EpsLaurent::monomial(-2, Rational(1));
        REQUIRE((a * c).exact_to() == 2);
    }

    SECTION("exact zero annihilates inexact values") {
        const EpsLaurent a = EpsLaurent::from_terms({{0, Rational(1)}}, 3);
        const EpsLaurent z = a * EpsLaurent();
        REQUIRE(z.is_zero());
        REQUIRE(z.exact());
    }

    SECTION("truncation records the cut") {
        const EpsLaurent p = EpsLaurent::from_terms({{0, Rational(1)}, {5, Rational(1)}});
        const EpsLaurent t = p.truncated(3);
        REQUIRE(!t.exact());
        REQUIRE(t.exact_to() == 3);
        REQUIRE(t.agrees_with(p));
    }

    SECTION("agreement is judged inside the window intersection only") {
        const EpsLaurent a = EpsLaurent::from_terms({{0, Rational(1)}}, 2);
        const EpsLaurent b = EpsLaurent::from_terms({{0, Rational(1)}, {3, Rational(9)}});
        REQUIRE(a.agrees_with(b));
        const EpsLaurent c = EpsLaurent::from_terms({{2, Rational(1)}}, 2);
        REQUIRE(!c.agrees_with(a));
    }
}

TEST_CASE("eps-Laurent ring axioms on random values", "[eps][property]") {
    std::mt19937_64 rng(20260818);
    for (int trial = 0; trial < 200; ++trial) {
        const EpsLaurent a = random_poly(rng), b = random_poly(rng), c = random_poly(rng);
        REQUIRE((a + b) == (b + a));
        REQUIRE((a * b) == (b * a));
        REQUIRE(((a + b) + c) == (a + (b + c)));
        REQUIRE(((a * b) * c) == (a * (b * c)));
        REQUIRE((a * (b + c)) == (a * b + a * c));
        REQUIRE((a - a).is_zero());
        REQUIRE((a * EpsLaurent::one()) == a);
    }
}

TEST_CASE("eps-Laurent inverse round-trip on random units", "[eps][property]") {
    std::mt19937_64 rng(7);
    const EpsLaurent one = EpsLaurent::one();
    for (int trial = 0; trial < 100; ++trial) {
        EpsLaurent u = one + (random_poly(rng) * EpsLaurent::eps(1)).truncated(12);
        if (u.is_zero()) continue;
        const EpsLaurent inv = u.inverse(10);
        REQUIRE((u * inv).agrees_with(one));
        // inverting costs twice the valuation: 1/u is known to W - 2d
        REQUIRE(inv.exact_to() == std::min(12 - 2 * u.min_exp(), 10));
    }
}
