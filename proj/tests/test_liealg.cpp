#include "doctest.h"

#include "torva/liealg.hpp"

using namespace torva;

namespace {
GVec ev(const GradedLieAlgebra& g, const std::string& label) {
    for (int i = 0; i < g.dim(); ++i)
        if (g.labels()[i] == label) return g.basis_vector(i);
    throw std::runtime_error("no such label");
}
}  // namespace

TEST_CASE("sl2 Chevalley relations against the defining-representation oracle") {
    GradedLieAlgebra g = build_simple_algebra("sl2");
    GVec e = ev(g, "e"), h = ev(g, "h"), f = ev(g, "f");
    CHECK(g.bracket(h, e) == gvec_scaled(e, Cyc(2)));
    CHECK(g.bracket(h, f) == gvec_scaled(f, Cyc(-2)));
    CHECK(g.bracket(e, f) == h);
    CHECK(g.form(e, f) == Cyc(1));
    CHECK(g.form(h, h) == Cyc(2));
    CHECK(g.form(e, e) == Cyc(0));
    // invariance instance <[e,f],h> = <e,[f,h]>
    CHECK(g.form(g.bracket(e, f), h) == g.form(e, g.bracket(f, h)));
}

TEST_CASE("sl3 builds and validates; long-root normalization") {
    GradedLieAlgebra g = build_simple_algebra("sl3");
    CHECK(g.dim() == 8);
    GVec h1 = ev(g, "h1");
    CHECK(g.form(h1, h1) == Cyc(2));
    GVec e1 = ev(g, "e1"), e2 = ev(g, "e2"), e12 = ev(g, "e12");
    CHECK(g.bracket(e1, e2) == e12);
    CHECK(gvec_is_zero(g.bracket(e1, e12)));
}

TEST_CASE("unknown preset rejected") {
    CHECK_THROWS_AS(build_simple_algebra("g2"), std::invalid_argument);
}

TEST_CASE("validate_family accepts the paper scenario and computes orders") {
    GradedLieAlgebra g = build_simple_algebra("sl2");
    CMatrix chev = preset_automorphism(g, "chevalley");
    CMatrix sign = preset_automorphism(g, "sign");
    AutomorphismFamily fam = validate_family(g, {chev, sign});
    CHECK(fam.order(0) == 2);
    CHECK(fam.order(1) == 2);
    CHECK(fam.Nplus() == 2);
    CHECK(fam.lcm_order() == 2);

    // chevalley involution acts as e -> -f, f -> -e, h -> -h
    GVec e = ev(g, "e"), f = ev(g, "f"), h = ev(g, "h");
    CHECK(mat_apply(chev, e) == gvec_scaled(f, Cyc(-1)));
    CHECK(mat_apply(chev, f) == gvec_scaled(e, Cyc(-1)));
    CHECK(mat_apply(chev, h) == gvec_scaled(h, Cyc(-1)));
}

TEST_CASE("validate_family rejects non-automorphisms and non-commuting pairs") {
    GradedLieAlgebra g = build_simple_algebra("sl2");
    // scaling e by 2 only: [h,e] = 2e forces eigenvalue consistency
    CMatrix bad = mat_identity(3);
    bad[0][0] = Cyc(2);
    CHECK_THROWS_WITH_AS(static_cast<void>(validate_family(g, {bad})),
                         doctest::Contains("does not preserve the bracket"),
                         std::invalid_argument);

    // order-4 rotation and the Chevalley involution do not commute
    CMatrix rot4 = preset_automorphism(g, "rot4");
    CMatrix chev = preset_automorphism(g, "chevalley");
    AutomorphismFamily alone = validate_family(g, {rot4});
    CHECK(alone.order(0) == 4);
    CHECK_THROWS_WITH_AS(static_cast<void>(validate_family(g, {chev, rot4})),
                         doctest::Contains("do not commute"), std::invalid_argument);
}

TEST_CASE("decompose: sl2 with chevalley and sign") {
    GradedLieAlgebra g = build_simple_algebra("sl2");
    AutomorphismFamily fam = validate_family(
        g, {preset_automorphism(g, "chevalley"), preset_automorphism(g, "sign")});
    GradedDecomposition d = decompose(g, fam);
    CHECK(d.dim() == 3);
    CHECK(d.component_members.count({0, 0}) == 0);
    REQUIRE(d.component_members.count({1, 0}) == 1);
    REQUIRE(d.component_members.count({0, 1}) == 1);
    REQUIRE(d.component_members.count({1, 1}) == 1);

    GVec e = ev(g, "e"), f = ev(g, "f"), h = ev(g, "h");
    // g_(1,0) = span{h}
    int ih = d.component_members.at({1, 0})[0];
    CHECK(gvec_is_zero(g.bracket(d.adapted[ih], h)));
    // g_(0,1) = span{e-f}, g_(1,1) = span{e+f}
    GVec emf = gvec_add(e, gvec_scaled(f, Cyc(-1)));
    GVec epf = gvec_add(e, f);
    int i01 = d.component_members.at({0, 1})[0];
    int i11 = d.component_members.at({1, 1})[0];
    CHECK(gvec_is_zero(g.bracket(d.adapted[i01], emf)));
    CHECK(gvec_is_zero(g.bracket(d.adapted[i11], epf)));
}

TEST_CASE("decompose: trivial family and sl3 zeta3") {
    GradedLieAlgebra g = build_simple_algebra("sl2");
    AutomorphismFamily triv = validate_family(g, {mat_identity(3), mat_identity(3)});
    GradedDecomposition d = decompose(g, triv);
    CHECK(d.component_members.at({0, 0}).size() == 3);

    GradedLieAlgebra g3 = build_simple_algebra("sl3");
    AutomorphismFamily fam3 = validate_family(
        g3, {preset_automorphism(g3, "sign"), preset_automorphism(g3, "zeta3")});
    CHECK(fam3.order(0) == 2);
    CHECK(fam3.order(1) == 3);
    GradedDecomposition d3 = decompose(g3, fam3);  // containment asserted inside
    CHECK(d3.dim() == 8);
    size_t total = 0;
    for (const auto& [res, ids] : d3.component_members) total += ids.size();
    CHECK(total == 8);
}

TEST_CASE("project_component: support rule and resolution of identity") {
    GradedLieAlgebra g = build_simple_algebra("sl2");
    AutomorphismFamily fam = validate_family(
        g, {preset_automorphism(g, "chevalley"), preset_automorphism(g, "sign")});
    GVec e = ev(g, "e");
    // e lies in g_(m1 odd): a_(m) = a for m in 1 + 2Z, 0 otherwise
    CHECK(project_component(g, fam, e, {1}) == e);
    CHECK(project_component(g, fam, e, {-3}) == e);
    CHECK(gvec_is_zero(project_component(g, fam, e, {0})));

    // residue components of any vector sum back to it; projections idempotent
    GVec a = gvec_add(gvec_add(e, gvec_scaled(ev(g, "h"), Cyc(3))),
                      gvec_scaled(ev(g, "f"), Cyc(Rat(-2, 5))));
    GVec sum(g.dim(), Cyc(0));
    for (long m = 0; m < 2; ++m) {
        GVec p = project_component(g, fam, a, {m});
        CHECK(project_component(g, fam, p, {m}) == p);
        sum = gvec_add(sum, p);
    }
    CHECK(sum == a);

    // full-group projection picks out simultaneous eigenvectors
    GVec h = ev(g, "h");
    CHECK(project_component_full(g, fam, h, 1, {0}) == h);
    CHECK(gvec_is_zero(project_component_full(g, fam, h, 0, {0})));
}

TEST_CASE("exact linear algebra helpers") {
    CMatrix m{{Cyc(1), Cyc(2)}, {Cyc(2), Cyc(4)}};
    CHECK(mat_rank(m) == 1);
    std::vector<GVec> k = kernel_basis(m);
    REQUIRE(k.size() == 1);
    CHECK(k[0][0] == Cyc(-2));
    CHECK(k[0][1] == Cyc(1));

    CMatrix inv = mat_inverse(CMatrix{{Cyc(1), Cyc(1)}, {Cyc(0), Cyc(1)}});
    CHECK(inv[0][1] == Cyc(-1));
    CHECK_THROWS_AS(mat_inverse(m), std::domain_error);
}
