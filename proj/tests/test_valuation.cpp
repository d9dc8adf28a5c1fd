#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "padiclab/valuation.hpp"

using namespace padiclab;

namespace {

Rational random_rational(std::mt19937_64& rng) {
    std::uniform_int_distribution<long> num(-5000, 5000);
    std::uniform_int_distribution<long> den(1, 5000);
    Rational r(num(rng), den(rng));
    r.canonicalize();
    return r;
}

}  // namespace

TEST_CASE("prime context accepts primes and rejects composites") {
    for (unsigned long p : {2ul, 3ul, 5ul, 7ul, 97ul, 104729ul, 2147483647ul})
        CHECK(PrimeContext(p).prime() == p);
    for (unsigned long q : {0ul, 1ul, 4ul, 6ul, 9ul, 91ul, 104730ul})
        CHECK_THROWS_AS(PrimeContext(q), DomainError);
}

TEST_CASE("valuation examples") {
    PrimeContext two(2);
    CHECK(two.valuation(Rational(663, 140)) == Valuation(-2));
    CHECK(two.valuation(Rational(0)) == Valuation::infinity());
    CHECK(PrimeContext(5).valuation(Rational(0)) == Valuation::infinity());
    CHECK(two.valuation(Rational(-40, 33)) == Valuation(3));
    CHECK(PrimeContext(3).valuation(Rational(-729)) == Valuation(6));
}

TEST_CASE("valuation is multiplicative and ultrametric") {
    std::mt19937_64 rng(20240901);
    PrimeContext ctx(3);
    for (int i = 0; i < 10000; ++i) {
        Rational x = random_rational(rng), y = random_rational(rng);
        Valuation vx = ctx.valuation(x), vy = ctx.valuation(y);
        CHECK(ctx.valuation(x * y) == vx + vy);
        Valuation vsum = ctx.valuation(x + y);
        CHECK(vsum >= Valuation::min(vx, vy));
        if (vx != vy) CHECK(vsum == Valuation::min(vx, vy));
    }
}

TEST_CASE("valuation ordering and arithmetic") {
    CHECK(Valuation(-3) < Valuation(0));
    CHECK(Valuation(7) < Valuation::infinity());
    CHECK_FALSE(Valuation::infinity() < Valuation::infinity());
    CHECK(Valuation::infinity() == Valuation::infinity());
    CHECK((Valuation(2) + Valuation(3)) == Valuation(5));
    CHECK((Valuation(2) + Valuation::infinity()) == Valuation::infinity());
    CHECK(Valuation(4).str() == "4");
    CHECK(Valuation::infinity().str() == "inf");
}

TEST_CASE("normalize_coefficients examples") {
    PrimeContext two(2);
    {
        auto [out, shift] = normalize_coefficients({Rational(1, 2), Rational(3)}, two);
        CHECK(out == std::vector<Rational>{Rational(1), Rational(6)});
        CHECK(shift == -1);
    }
    {
        auto [out, shift] = normalize_coefficients({Rational(1)}, two);
        CHECK(out == std::vector<Rational>{Rational(1)});
        CHECK(shift == 0);
    }
    {
        auto [out, shift] =
            normalize_coefficients({Rational(4), Rational(8), Rational(12)}, two);
        CHECK(out == std::vector<Rational>{Rational(1), Rational(2), Rational(3)});
        CHECK(shift == 2);
    }
    CHECK_THROWS_AS(normalize_coefficients({Rational(0), Rational(0)}, two), DomainError);
    CHECK_THROWS_AS(normalize_coefficients({}, two), DomainError);
}

TEST_CASE("normalize_coefficients is idempotent and round-trips") {
    std::mt19937_64 rng(7);
    PrimeContext ctx(5);
    for (int i = 0; i < 200; ++i) {
        std::vector<Rational> coeffs;
        int n = 1 + static_cast<int>(rng() % 6);
        bool nonzero = false;
        for (int j = 0; j < n; ++j) {
            coeffs.push_back(random_rational(rng));
            nonzero = nonzero || coeffs.back() != 0;
        }
        if (!nonzero) coeffs[0] = 1;

        auto [out, shift] = normalize_coefficients(coeffs, ctx);
        Valuation lo = Valuation::infinity();
        for (const Rational& c : out) lo = Valuation::min(lo, ctx.valuation(c));
        CHECK(lo == Valuation(0));

        auto [again, shift2] = normalize_coefficients(out, ctx);
        CHECK(shift2 == 0);
        CHECK(again == out);

        Rational scale = rational_pow(ctx.prime_z(), shift);
        for (size_t j = 0; j < out.size(); ++j) CHECK(out[j] * scale == coeffs[j]);
    }
}
