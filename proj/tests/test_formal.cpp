#include "doctest.h"

#include "torva/formal.hpp"

#include <random>

using namespace torva;

namespace {

Interval iv(long lo, long hi) { return Interval{lo, hi}; }

Window box(std::initializer_list<std::pair<int, Interval>> items) {
    Window w;
    for (auto& [v, i] : items) w[v] = i;
    return w;
}

}  // namespace

TEST_CASE("monomial arithmetic basics") {
    int z0 = var_id("z0");
    // z0^{1/2} * z0^{1/2} = z0
    CycSeries h = monomial(2, {z0}, {1}, Cyc(1));
    CycSeries p = mul(h, h);
    CHECK(p.terms().size() == 1);
    CHECK(p.terms().begin()->first[0] == 2);

    // a + 0 = a
    CycSeries zero(2, {z0});
    CHECK(compare_series(add(h, zero), h, {}).pass());

    // (z1 + z1^{-1})(z1 - z1^{-1}) = z1^2 - z1^{-2}
    int z1 = var_id("z1");
    CycSeries a = add(monomial(1, {z1}, {1}, Cyc(1)), monomial(1, {z1}, {-1}, Cyc(1)));
    CycSeries b = add(monomial(1, {z1}, {1}, Cyc(1)), monomial(1, {z1}, {-1}, Cyc(-1)));
    CycSeries want = add(monomial(1, {z1}, {2}, Cyc(1)), monomial(1, {z1}, {-2}, Cyc(-1)));
    CHECK(compare_series(mul(a, b), want, {}).pass());
}

TEST_CASE("binomial expansion direction and coefficients") {
    int x = var_id("x"), y = var_id("y");
    Window w = box({{x, iv(-40, 40)}, {y, iv(-40, 12)}});

    // (x+y)^1 = x + y
    CycSeries lin = binomial_series(4, x, y, Rat(1), +1, w);
    CycSeries want = add(monomial(4, {x}, {4}, Cyc(1)), monomial(4, {y}, {4}, Cyc(1)));
    CHECK(compare_series(lin, want, {}).pass());

    // (x+y)^0 = 1
    CycSeries one = binomial_series(4, x, y, Rat(0), +1, w);
    CHECK(compare_series(one, constant_series(4, Cyc(1)), {}).pass());

    // (x-y)^{1/2}: coefficient of x^{-1/2} y^1 is -1/2
    CycSeries sq = binomial_series(2, x, y, Rat(1, 2), -1, box({{y, iv(0, 20)}}));
    ExpKey k = zero_key();
    k[sq.var_pos(x)] = -1;
    k[sq.var_pos(y)] = 2;
    REQUIRE(sq.coefficient(k) != nullptr);
    CHECK(*sq.coefficient(k) == Cyc(Rat(-1, 2)));

    // no negative powers of the expansion variable
    for (const auto& [key, c] : sq.terms()) CHECK(key[sq.var_pos(y)] >= 0);
}

TEST_CASE("delta kernel: basic coefficients and residue normalization") {
    int z0 = var_id("z0"), z1 = var_id("z1"), z2 = var_id("z2");
    Window w = box({{z0, iv(-6, 6)}, {z1, iv(-6, 6)}, {z2, iv(-6, 6)}});
    CycSeries lhs = delta_kernel_series(1, z0, z1, z2, Rat(0), -1, w);

    // coefficient of z0^0 z1^{-1} z2^0 is 1 (n = -1 term, choose(-1,0))
    ExpKey k = zero_key();
    k[lhs.var_pos(z1)] = -1;
    REQUIRE(lhs.coefficient(k) != nullptr);
    CHECK(*lhs.coefficient(k) == Cyc(1));

    // expansion direction: nothing at negative z2 powers
    ExpKey kneg = zero_key();
    kneg[lhs.var_pos(z2)] = -1;
    CHECK(lhs.coefficient(kneg) == nullptr);

    // Res_{z1} z1^{-1} delta(z2/z1) = 1
    Window w2 = box({{z1, iv(-6, 6)}, {z2, iv(-6, 6)}});
    CycSeries d = ratio_delta_series(1, z1, z2, Rat(0), w2);
    CycSeries r = residue(d, z1);
    ExpKey k0 = zero_key();
    REQUIRE(r.coefficient(k0) != nullptr);
    CHECK(*r.coefficient(k0) == Cyc(1));
}

TEST_CASE("delta identity both sides agree (eq with alpha)") {
    int z0 = var_id("z0"), z1 = var_id("z1"), z2 = var_id("z2");
    for (Rat alpha : {Rat(0), Rat(1, 2), Rat(1, 3), Rat(2, 3)}) {
        long scale = static_cast<long>(denominator(alpha)) == 1
                         ? 1
                         : static_cast<long>(denominator(alpha));
        long W = 4 * scale;
        Window w = box({{z0, iv(-W, W)}, {z1, iv(-W, W)}, {z2, iv(-W, W)}});
        CycSeries lhs = delta_kernel_series(scale, z0, z1, z2, alpha, -1, w);
        CycSeries rhs = delta_kernel_series(scale, z1, z0, z2, -alpha, +1, w);
        CompareOutcome oc = compare_series(lhs, rhs, w);
        CHECK(oc.pass());
        CHECK(oc.failures.empty());
        CHECK(oc.checked >= 15);
        CHECK(oc.skipped == 0);
    }
}

TEST_CASE("coefficient outside the trusted window throws") {
    int z0 = var_id("z0"), z1 = var_id("z1"), z2 = var_id("z2");
    Window w = box({{z0, iv(-4, 4)}, {z1, iv(-4, 4)}, {z2, iv(-4, 4)}});
    CycSeries lhs = delta_kernel_series(1, z0, z1, z2, Rat(0), -1, w);
    ExpKey k = zero_key();
    k[lhs.var_pos(z0)] = 5;
    CHECK_THROWS_AS(lhs.coefficient(k), std::domain_error);
    CHECK(lhs.truncated());
}

TEST_CASE("coefficient extraction distinguishes zero from unknown") {
    int z0 = var_id("z0");
    CycSeries s = add(monomial(1, {z0}, {1}, Cyc(1)),
                      monomial(1, {z0}, {2}, Cyc(2)));
    ExpKey k = zero_key();
    k[0] = 2;
    CHECK(*s.coefficient(k) == Cyc(2));
    k[0] = 3;
    CHECK(s.coefficient(k) == nullptr);  // known zero
}

TEST_CASE("residue examples") {
    int z0 = var_id("z0"), z2 = var_id("z2");
    CycSeries a = monomial(2, {z0}, {-2}, Cyc(1));  // z0^{-1}
    CycSeries r = residue(a, z0);
    CHECK(compare_series(r, constant_series(2, Cyc(1)), {}).pass());

    CycSeries b = monomial(2, {z0}, {-1}, Cyc(1));  // z0^{-1/2}
    CHECK(is_zero_with_count(residue(b, z0), {}).first);

    // Res_{z0}(z0^{-1} z2^3) = z2^3
    CycSeries c = monomial(1, {z0, z2}, {-1, 3}, Cyc(1));
    CHECK(compare_series(residue(c, z0), monomial(1, {z2}, {3}, Cyc(1)), {}).pass());
}

TEST_CASE("product validity: windowed kernel against finite series") {
    int x = var_id("x"), y = var_id("y");
    // f = x^3, complete; kernel (x+y)^{-1} windowed in y
    CycSeries f = monomial(1, {x}, {3}, Cyc(1));
    Window w = box({{y, iv(0, 5)}});
    CycSeries p = mul_binom(f, x, y, Rat(-1), +1, w);
    // (x+y)^{-1} x^3: coefficient of x^{3-1-j} y^j is (-1)^j
    for (long j = 0; j <= 5; ++j) {
        ExpKey k = zero_key();
        k[p.var_pos(x)] = static_cast<int16_t>(2 - j);
        k[p.var_pos(y)] = static_cast<int16_t>(j);
        REQUIRE(p.coefficient(k) != nullptr);
        CHECK(*p.coefficient(k) == Cyc(Rat((j % 2) ? -1 : 1)));
    }
    // beyond the window: unknown
    ExpKey k = zero_key();
    k[p.var_pos(x)] = -4;
    k[p.var_pos(y)] = 6;
    CHECK_THROWS_AS(p.coefficient(k), std::domain_error);
}

TEST_CASE("multiplication associativity and commutativity on random sparse series") {
    std::mt19937_64 rng(99);
    int z1 = var_id("z1"), z2 = var_id("z2");
    auto rnd = [&](long scale) {
        CycSeries s(scale, {std::min(z1, z2), std::max(z1, z2)});
        std::uniform_int_distribution<int> e(-3, 3), c(-4, 4);
        for (int t = 0; t < 5; ++t) {
            ExpKey k = zero_key();
            k[0] = static_cast<int16_t>(e(rng) * scale);
            k[1] = static_cast<int16_t>(e(rng) * scale);
            s.add_term(k, Cyc(c(rng)));
        }
        s.mark_exact();
        return s;
    };
    for (int t = 0; t < 25; ++t) {
        CycSeries a = rnd(2), b = rnd(2), c = rnd(2);
        CHECK(compare_series(mul(mul(a, b), c), mul(a, mul(b, c)), {}).failures.empty());
        CHECK(compare_series(mul(a, b), mul(b, a), {}).failures.empty());
        CHECK(compare_series(mul(a, add(b, c)), add(mul(a, b), mul(a, c)), {}).failures.empty());
    }
}

TEST_CASE("incompatible scales merge to the lcm") {
    int z0 = var_id("z0");
    CycSeries a = monomial(2, {z0}, {1}, Cyc(1));   // z0^{1/2}
    CycSeries b = monomial(3, {z0}, {1}, Cyc(1));   // z0^{1/3}
    CycSeries p = mul(a, b);
    CHECK(p.scale() == 6);
    CHECK(p.terms().begin()->first[0] == 5);  // z0^{5/6}
}

TEST_CASE("subst_pair duplicates exponents") {
    int x1 = var_id("x1"), zz = var_id("zz1"), yy = var_id("yy1");
    CycSeries s = monomial(1, {x1}, {3}, Cyc(2));
    CycSeries d = subst_pair(s, x1, zz, yy);
    ExpKey k = zero_key();
    k[d.var_pos(zz)] = 3;
    k[d.var_pos(yy)] = 3;
    REQUIRE(d.coefficient(k) != nullptr);
    CHECK(*d.coefficient(k) == Cyc(2));
    // off-diagonal is exact zero
    k[d.var_pos(yy)] = 2;
    CHECK(d.coefficient(k) == nullptr);
}

TEST_CASE("subst_sum agrees with direct expansion") {
    int x0 = var_id("x0"), y0 = var_id("y0"), z0 = var_id("z0");
    // f = x0^{-1}: substituting x0 = y0 + z0 (expand in z0) gives
    // sum_j (-1)^j y0^{-1-j} z0^j
    CycSeries f = monomial(1, {x0}, {-1}, Cyc(1));
    Window w = box({{z0, iv(0, 6)}});
    CycSeries g = subst_sum(f, x0, y0, z0, w);
    for (long j = 0; j <= 6; ++j) {
        ExpKey k = zero_key();
        k[g.var_pos(y0)] = static_cast<int16_t>(-1 - j);
        k[g.var_pos(z0)] = static_cast<int16_t>(j);
        REQUIRE(g.coefficient(k) != nullptr);
        CHECK(*g.coefficient(k) == Cyc(Rat((j % 2) ? -1 : 1)));
    }
    // and with a finite power the substitution is exact everywhere
    CycSeries f2 = monomial(1, {x0}, {2}, Cyc(1));
    CycSeries g2 = subst_sum(f2, x0, y0, z0, w);
    CycSeries direct = mul(binomial_series(1, y0, z0, Rat(2), +1, w),
                           constant_series(1, Cyc(1)));
    CHECK(compare_series(g2, direct, {}).failures.empty());
}

TEST_CASE("derivative of delta kernel matches shifted coefficients") {
    int x = var_id("x"), y = var_id("y");
    Window w = box({{x, iv(-5, 5)}, {y, iv(-5, 5)}});
    CycSeries d = ratio_delta_series(1, x, y, Rat(0), w);
    CycSeries dd = derivative(d, y);
    // d/dy sum x^{-n-1} y^n = sum n x^{-n-1} y^{n-1}
    ExpKey k = zero_key();
    k[dd.var_pos(x)] = -4;  // n = 3
    k[dd.var_pos(y)] = 2;
    REQUIRE(dd.coefficient(k) != nullptr);
    CHECK(*dd.coefficient(k) == Cyc(3));
}

TEST_CASE("subst_scale_var multiplies coefficients by powers") {
    int x1 = var_id("x1");
    Cyc w2 = Cyc::root(2);
    CycSeries s = add(monomial(1, {x1}, {2}, Cyc(5)), monomial(1, {x1}, {3}, Cyc(7)));
    CycSeries t = subst_scale_var(s, x1, w2);
    ExpKey k = zero_key();
    k[0] = 2;
    CHECK(*t.coefficient(k) == Cyc(5));
    k[0] = 3;
    CHECK(*t.coefficient(k) == Cyc(-7));
}
