#include "doctest.h"

#include "torva/scalars.hpp"

#include <random>

using namespace torva;

TEST_CASE("roots of unity basics") {
    CHECK(Cyc::root(2) == Cyc(-1));
    CHECK(Cyc::root(4) * Cyc::root(4) == Cyc(-1));
    CHECK(Cyc(1) + Cyc::root(3) + Cyc::root(3, 2) == Cyc(0));
    CHECK(Cyc::root(1) == Cyc(1));
    CHECK(Cyc::root(6, 3) == Cyc(-1));
}

TEST_CASE("omega_M^M = 1 and vanishing power sums up to the cap sample") {
    for (long m = 1; m <= 24; ++m) {
        CHECK(Cyc::root(m).pow(m) == Cyc(1));
        if (m > 1) {
            Cyc s(0);
            for (long j = 0; j < m; ++j) s += Cyc::root(m, j);
            CHECK(s == Cyc(0));
        }
    }
}

TEST_CASE("order cap is enforced") {
    CHECK_THROWS_AS(Cyc::root(361), std::domain_error);
    CHECK_THROWS_AS(Cyc::root(7) * Cyc::root(359), std::domain_error);
}

TEST_CASE("inversion of zero is an error") {
    CHECK_THROWS_AS(Cyc(0).inverse(), std::domain_error);
    CHECK_THROWS_AS((Cyc(1) + Cyc::root(3) + Cyc::root(3, 2)).inverse(), std::domain_error);
}

namespace {
Cyc random_cyc(std::mt19937_64& rng, long order) {
    std::uniform_int_distribution<long> num(-6, 6);
    std::uniform_int_distribution<long> den(1, 4);
    std::uniform_int_distribution<long> pw(0, order - 1);
    Cyc c(0);
    for (int t = 0; t < 3; ++t)
        c += Cyc(Rat(num(rng), den(rng))) * Cyc::root(order, pw(rng));
    return c;
}
}  // namespace

TEST_CASE("field axioms on randomized triples") {
    std::mt19937_64 rng(20240811);
    for (long order : {2L, 3L, 4L, 6L, 12L}) {
        for (int trial = 0; trial < 20; ++trial) {
            Cyc a = random_cyc(rng, order);
            Cyc b = random_cyc(rng, order);
            Cyc c = random_cyc(rng, order);
            CHECK((a + b) + c == a + (b + c));
            CHECK((a * b) * c == a * (b * c));
            CHECK(a * (b + c) == a * b + a * c);
            CHECK(a * b == b * a);
            if (!a.is_zero()) {
                CHECK(a * a.inverse() == Cyc(1));
                CHECK(a.pow(-2) * a.pow(2) == Cyc(1));
            }
        }
    }
}

TEST_CASE("mixed-order arithmetic embeds into the lcm") {
    Cyc i = Cyc::root(4);
    Cyc w3 = Cyc::root(3);
    Cyc p = i * w3;
    CHECK(p == Cyc::root(12, 7));  // w12^3 * w12^4
    CHECK(p.pow(12) == Cyc(1));
}

TEST_CASE("binomial coefficients") {
    CHECK(binomial_coeff(Rat(-1, 2), 1) == Rat(-1, 2));
    CHECK(binomial_coeff(Rat(7, 3), 0) == Rat(1));
    CHECK(binomial_coeff(Rat(1, 2), 2) == Rat(-1, 8));

    // integer table oracle: Pascal's triangle
    std::vector<std::vector<Rat>> pascal(11);
    for (int n = 0; n <= 10; ++n) {
        pascal[n].assign(n + 1, Rat(1));
        for (int k = 1; k < n; ++k) pascal[n][k] = pascal[n - 1][k - 1] + pascal[n - 1][k];
        for (int k = 0; k <= n; ++k) CHECK(binomial_coeff(Rat(n), k) == pascal[n][k]);
        // vanishing above the diagonal
        CHECK(binomial_coeff(Rat(n), n + 1) == Rat(0));
    }

    // independent falling-factorial oracle on rational arguments
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<long> num(-5, 5);
    std::uniform_int_distribution<long> den(1, 3);
    for (int t = 0; t < 30; ++t) {
        Rat alpha(num(rng), den(rng));
        for (long i = 0; i <= 6; ++i) {
            Rat prod(1);
            for (long j = 0; j < i; ++j) prod *= (alpha - j) / Rat(j + 1);
            CHECK(binomial_coeff(alpha, i) == prod);
        }
    }
}

TEST_CASE("rational parse/format round trip") {
    CHECK(rat_parse("-3/6") == Rat(-1, 2));
    CHECK(rat_str(Rat(-1, 2)) == "-1/2");
    CHECK(rat_str(Rat(5)) == "5");
    CHECK(rat_parse(rat_str(Rat(22, 7))) == Rat(22, 7));
}

TEST_CASE("cyclotomic canonical form is syntactic equality") {
    // 1 + w5 + w5^2 + w5^3 + w5^4 reduces to zero coefficients
    Cyc s(0);
    for (long j = 0; j < 5; ++j) s += Cyc::root(5, j);
    CHECK(s.is_zero());
    CHECK(s.coeffs() == std::vector<Rat>(euler_phi(5), Rat(0)));
    // w4^2 has the canonical order-4 representation of -1
    CHECK((Cyc::root(4, 2)).is_rational());
    CHECK(Cyc::root(4, 2).rational_value() == Rat(-1));
}
