#include "doctest.h"

#include "torva/toroidal.hpp"

#include <random>

using namespace torva;

namespace {

struct Setup {
    GradedLieAlgebra g;
    AutomorphismFamily fam;
    GradedDecomposition dec;
};

Setup sl2_twisted() {
    GradedLieAlgebra g = build_simple_algebra("sl2");
    AutomorphismFamily fam = validate_family(
        g, {preset_automorphism(g, "chevalley"), preset_automorphism(g, "sign")});
    GradedDecomposition dec = decompose(g, fam);
    return Setup{std::move(g), std::move(fam), std::move(dec)};
}

GVec ev(const GradedLieAlgebra& g, const std::string& label) {
    for (int i = 0; i < g.dim(); ++i)
        if (g.labels()[i] == label) return g.basis_vector(i);
    throw std::runtime_error("no label " + label);
}

}  // namespace

TEST_CASE("central extension bracket on sl2 instances") {
    Setup s = sl2_twisted();
    GVec e = ev(s.g, "e"), f = ev(s.g, "f"), h = ev(s.g, "h");

    // [h x t0^{1/2}, h x t0^{-1/2}] = (1/2) <h,h> c = c
    ToroidalElement x = ToroidalElement::mode(3, 2, h, TorMode{1, {0}});
    ToroidalElement y = ToroidalElement::mode(3, 2, h, TorMode{-1, {0}});
    ToroidalElement br = bracket(s.g, x, y);
    CHECK(br.terms().empty());
    CHECK(br.central_part() == Cyc(1));

    // [c, anything] = 0
    ToroidalElement c = ToroidalElement::central(3, 2, Cyc(1));
    CHECK(bracket(s.g, c, x).is_zero());
    CHECK(bracket(s.g, x, c).is_zero());

    // [(e-f) x t1, (e+f) x t0^{1/2} t1^{-1}] = 2h x t0^{1/2}
    GVec emf = gvec_add(e, gvec_scaled(f, Cyc(-1)));
    GVec epf = gvec_add(e, f);
    ToroidalElement u = ToroidalElement::mode(3, 2, emf, TorMode{0, {1}});
    ToroidalElement v = ToroidalElement::mode(3, 2, epf, TorMode{1, {-1}});
    ToroidalElement w = bracket(s.g, u, v);
    ToroidalElement want = ToroidalElement::mode(3, 2, gvec_scaled(h, Cyc(2)), TorMode{1, {0}});
    CHECK(w == want);
    CHECK(w.central_part().is_zero());
}

TEST_CASE("bracket antisymmetry and Jacobi on random elements") {
    Setup s = sl2_twisted();
    std::mt19937_64 rng(4242);
    std::uniform_int_distribution<long> t0(-3, 3), t1(-2, 2), coord(-2, 2);
    auto rnd = [&]() {
        ToroidalElement e(3, 2);
        for (int t = 0; t < 3; ++t) {
            GVec v(3, Cyc(0));
            for (int i = 0; i < 3; ++i) v[i] = Cyc(coord(rng));
            e.add_mode(TorMode{t0(rng), {t1(rng)}}, v);
        }
        if (t0(rng) > 0) e.add_central(Cyc(coord(rng)));
        return e;
    };
    for (int trial = 0; trial < 30; ++trial) {
        ToroidalElement a = rnd(), b = rnd(), c = rnd();
        CHECK(bracket(s.g, a, b) == -bracket(s.g, b, a));
        ToroidalElement jac = bracket(s.g, bracket(s.g, a, b), c) +
                              bracket(s.g, bracket(s.g, b, c), a) +
                              bracket(s.g, bracket(s.g, c, a), b);
        CHECK(jac.is_zero());
    }
}

TEST_CASE("tau components of the sl2 scenario") {
    Setup s = sl2_twisted();
    GVec e = ev(s.g, "e"), f = ev(s.g, "f"), h = ev(s.g, "h");

    ToroidalElement th = tau_component(s.g, s.fam, h, 1, {0});
    CHECK(th == ToroidalElement::mode(3, 2, h, TorMode{1, {0}}));
    CHECK(tau_component(s.g, s.fam, h, 0, {0}).is_zero());

    // L variant: e lies in g_{m1 odd}: component(e, -1, (1)) = e x t0^{-1} t1
    ToroidalElement le = loop_component(s.g, s.fam, e, -1, {1});
    CHECK(le == ToroidalElement::mode(3, 2, e, TorMode{-2, {1}}));
    CHECK(loop_component(s.g, s.fam, e, -1, {0}).is_zero());

    // tau is closed under bracket: residues add
    ToroidalElement t1 = tau_component(s.g, s.fam, h, 1, {0});
    GVec emf = gvec_add(e, gvec_scaled(f, Cyc(-1)));
    ToroidalElement t2 = tau_component(s.g, s.fam, emf, 2, {1});
    ToroidalElement br = bracket(s.g, t1, t2);
    // [h, e-f] = 2e+2f in g_(1,1), at t0num 3, t (1): a tau element
    ToroidalElement expect = tau_component(s.g, s.fam, s.g.bracket(h, emf), 3, {1});
    CHECK(br == expect);
}

TEST_CASE("sigma_hat fixes tau elements and twists others") {
    Setup s = sl2_twisted();
    GVec h = ev(s.g, "h");
    ToroidalElement th = tau_component(s.g, s.fam, h, 1, {0});
    CHECK(sigma_hat(s.g, s.fam, 0, th) == th);
    CHECK(sigma_hat(s.g, s.fam, 1, th) == th);
    // h x t0^{0}: sigma_hat_0 maps it to -h x t0^0 (not fixed)
    ToroidalElement t0h = ToroidalElement::mode(3, 2, h, TorMode{0, {0}});
    CHECK(sigma_hat(s.g, s.fam, 0, t0h) == -t0h);
}

TEST_CASE("mode family support") {
    Setup s = sl2_twisted();
    // adapted element for residue (1,0) is h
    int ih = s.dec.component_members.at({1, 0})[0];
    ModeFamily A(&s.g, &s.fam, &s.dec, ih, ModeFamily::Kind::Twisted);
    CHECK(A.homogeneity_class() == 1);
    CHECK(A.mode(1, {0}).is_zero() == false);
    CHECK(A.mode(1, {2}).is_zero() == false);
    CHECK(A.mode(2, {0}).is_zero());   // t0num even: outside -1/2 + Z support
    CHECK(A.mode(1, {1}).is_zero());   // weight outside 0 + 2Z

    ModeFamily L(&s.g, &s.fam, &s.dec, ih, ModeFamily::Kind::Untwisted);
    CHECK(L.homogeneity_class() == 0);
    CHECK(L.mode(2, {0}).is_zero() == false);  // t0 exponent 1
    CHECK(L.mode(1, {0}).is_zero());           // fractional exponent
}

TEST_CASE("mode commutator identity passes on all sl2 adapted pairs") {
    Setup s = sl2_twisted();
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            CheckReport rep = check_mode_commutator(s.g, s.fam, s.dec, a, b, 3, 2,
                                                    ModeFamily::Kind::Twisted);
            INFO("pair ", a, " ", b);
            CHECK(rep.pass());
            CHECK(rep.checked > 100);
            CheckReport repL = check_mode_commutator(s.g, s.fam, s.dec, a, b, 3, 2,
                                                     ModeFamily::Kind::Untwisted);
            CHECK(repL.pass());
        }
}

TEST_CASE("mode commutator reduces to the untwisted identity for trivial autos") {
    GradedLieAlgebra g = build_simple_algebra("sl2");
    AutomorphismFamily fam = validate_family(g, {mat_identity(3), mat_identity(3)});
    GradedDecomposition dec = decompose(g, fam);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            CheckReport rep =
                check_mode_commutator(g, fam, dec, a, b, 3, 2, ModeFamily::Kind::Twisted);
            CHECK(rep.pass());
        }
}

TEST_CASE("mode commutator detects corrupted structure constants") {
    GradedLieAlgebra clean = build_simple_algebra("sl2");
    // corrupt c_{e,f}^{h} by +1: [e,f] = 2h
    int n = clean.dim();
    std::vector<std::vector<GVec>> table(n, std::vector<GVec>(n));
    CMatrix form(n, std::vector<Cyc>(n, Cyc(0)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            table[i][j] = clean.bracket_basis(i, j);
            for (int k = 0; k < n; ++k) form[i][j] = clean.form_basis(i, j);
        }
    table[0][2][1] += Cyc(1);  // e,f -> h component
    GradedLieAlgebra bad(clean.labels(), std::move(table), std::move(form));
    AutomorphismFamily fam = validate_family(
        clean, {preset_automorphism(clean, "chevalley"), preset_automorphism(clean, "sign")});
    GradedDecomposition dec = decompose(bad, fam);
    CHECK(!grading_contained(bad, fam, dec));
    bool any_fail = false;
    for (int a = 0; a < 3 && !any_fail; ++a)
        for (int b = 0; b < 3 && !any_fail; ++b) {
            CheckReport rep =
                check_mode_commutator(bad, fam, dec, a, b, 2, 2, ModeFamily::Kind::Twisted);
            if (!rep.failures.empty()) any_fail = true;
        }
    CHECK(any_fail);
}

TEST_CASE("grading containment holds for the clean scenario") {
    Setup s = sl2_twisted();
    CHECK(grading_contained(s.g, s.fam, s.dec));
}
