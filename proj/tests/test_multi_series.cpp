#include <catch2/catch_amalgamated.hpp>

#include <mrkit/multi_series.hpp>

using mrkit::EpsLaurent;
using mrkit::kNoFloor;
using mrkit::kernel_expand;
using mrkit::MultiSeries;
using mrkit::Rational;
using mrkit::Region;

namespace {

using MS = MultiSeries<EpsLaurent>;
const EpsLaurent one = EpsLaurent::one();

/** xi_va - xi_vb as an exact bivariate series. */
MS difference(const Region& reg, int va, int vb) {
    MS d = MS::zero_like(reg);
    std::vector<int> ea(reg.vars(), 0), eb(reg.vars(), 0);
    ea[va] = 1;
    eb[vb] = 1;
    d.set(ea, one);
    d.set(eb, -one);
    return d;
}

} // namespace

TEST_CASE("kernel expansion in a two-variable region", "[multi]") {
    const Region reg = Region::standard(2);

    SECTION("dominant first argument: sum xi_2^m xi_1^{-m-1}") {
        const MS k = kernel_expand(reg, 0, 1, 4, one);
        REQUIRE(k.coeff({-1, 0}) == one);
        REQUIRE(k.coeff({-3, 2}) == one);
        REQUIRE(k.floors()[0] == -5);
        REQUIRE(k.floors()[1] == kNoFloor);
    }

    SECTION("swapping the arguments in the same region only flips the sign") {
        const MS k = kernel_expand(reg, 1, 0, 4, one);
        REQUIRE(k.coeff({-1, 0}) == -one);
        REQUIRE(k.coeff({-3, 2}) == -one);
        REQUIRE(k.floors()[0] == -5);
    }

    SECTION("(xi_a - xi_b) * K = 1 within the recorded window") {
        for (const auto& [va, vb] : {std::pair{0, 1}, std::pair{1, 0}}) {
            const MS k = kernel_expand(reg, va, vb, 6, one);
            const MS prod = difference(reg, va, vb) * k;
            MS expected = MS::zero_like(reg);
            expected.set({0, 0}, one);
            REQUIRE(prod.agrees_with(expected));
            REQUIRE(!prod.is_zero());
        }
    }

    SECTION("squared kernel carries the (m+1) weights") {
        const MS k = kernel_expand(reg, 0, 1, 6, one);
        const MS k2 = k * k;
        for (int m = 0; m <= 4; ++m)
            REQUIRE(k2.coeff({-m - 2, m}) == EpsLaurent(Rational(m + 1)));
    }

    SECTION("region mismatch is refused") {
        const Region other(std::vector<int>{1, 0});
        const MS k1 = kernel_expand(reg, 0, 1, 3, one);
        const MS k2 = kernel_expand(other, 0, 1, 3, one);
        REQUIRE_THROWS_AS(k1 + k2, mrkit::RegionError);
        REQUIRE_THROWS_AS(k1 * k2, mrkit::RegionError);
        // and in the flipped region the same arguments expand the other way
        REQUIRE(k2.coeff({0, -1}) == -one);
        REQUIRE(k2.coeff({2, -3}) == -one);
    }
}

TEST_CASE("multivariate products, boxes and collapse", "[multi]") {
    const Region reg = Region::standard(2);

    SECTION("boxed multiplication honors explicit demand boxes") {
        const MS k = kernel_expand(reg, 0, 1, 8, one);
        const MS boxed = MS::mul_boxed(k, k, {-6, -6}, {1, 1});
        for (int m = 0; m <= 1; ++m)
            REQUIRE(boxed.coeff({-m - 2, m}) == EpsLaurent(Rational(m + 1)));
        REQUIRE(boxed.floors() == std::vector<int>{-6, -6});
        for (const auto& [e, v] : boxed.terms()) {
            REQUIRE(e[0] >= -6);
            REQUIRE(e[1] <= 1);
        }
    }

    SECTION("diagonal collapse sums antidiagonals with a sound floor") {
        MS s(reg, {-3, -2});
        s.set({1, 0}, one);
        s.set({0, -1}, EpsLaurent(Rational(5)));
        s.set({-2, 1}, EpsLaurent(Rational(7)));
        const auto d = s.collapse_diagonal();
        REQUIRE(d.coeff(1) == one);
        REQUIRE(d.coeff(-1) == EpsLaurent(Rational(12)));  // 0-1 and -2+1 collide
        // unknown terms with e1 <= -3 and e0 <= top 1 could reach exponent -2,
        // so the first fully-known diagonal exponent is -1
        REQUIRE(d.floor() == -1);
        REQUIRE_THROWS_AS(d.coeff(-2), mrkit::BadExponent);
    }

    SECTION("lift embeds a univariate factor") {
        mrkit::XiSeries<EpsLaurent> u(-2);
        u.set(0, one);
        u.set(-2, EpsLaurent(Rational(4)));
        const MS lifted = MS::lift(u, 1, reg);
        REQUIRE(lifted.coeff({0, -2}) == EpsLaurent(Rational(4)));
        REQUIRE(lifted.floors()[0] == kNoFloor);
        REQUIRE(lifted.floors()[1] == -2);
    }
}
