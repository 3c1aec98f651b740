#ifndef TORVA_LIEALG_HPP
#define TORVA_LIEALG_HPP

#include "torva/scalars.hpp"

#include <map>
#include <string>
#include <vector>

namespace torva {

using GVec = std::vector<Cyc>;             // coordinates over the algebra basis
using CMatrix = std::vector<std::vector<Cyc>>;  // row-major; column j = image of basis j

bool gvec_is_zero(const GVec& v);
GVec gvec_add(const GVec& a, const GVec& b);
GVec gvec_scaled(const GVec& a, const Cyc& s);
CMatrix mat_mul(const CMatrix& a, const CMatrix& b);
GVec mat_apply(const CMatrix& m, const GVec& v);
CMatrix mat_identity(int n);
bool mat_eq(const CMatrix& a, const CMatrix& b);
/// Echelon-form kernel basis, deterministic.
std::vector<GVec> kernel_basis(const CMatrix& m);
/// Rank via Gaussian elimination.
int mat_rank(CMatrix m);
/// Solve M x = v; throws when inconsistent (used for change of basis).
GVec mat_solve(CMatrix m, GVec v);
CMatrix mat_inverse(const CMatrix& m);

/// A finite dimensional Lie algebra given by structure constants and an
/// invariant symmetric form, normalized so long roots have square length 2
/// in the presets. Immutable after construction.
class GradedLieAlgebra {
public:
    GradedLieAlgebra(std::vector<std::string> labels,
                     std::vector<std::vector<GVec>> bracket_table, CMatrix form);

    int dim() const { return static_cast<int>(labels_.size()); }
    const std::vector<std::string>& labels() const { return labels_; }

    const GVec& bracket_basis(int i, int j) const { return bracket_[i][j]; }
    GVec bracket(const GVec& a, const GVec& b) const;
    Cyc form(const GVec& a, const GVec& b) const;
    Cyc form_basis(int i, int j) const { return form_[i][j]; }

    /// Checks antisymmetry, the Jacobi identity, and form symmetry plus
    /// invariance <[a,b],c> = <a,[b,c]>, all exactly; throws on violation.
    void validate() const;

    GVec basis_vector(int i) const;

private:
    std::vector<std::string> labels_;
    std::vector<std::vector<GVec>> bracket_;
    CMatrix form_;
};

/// Chevalley-basis presets sl2 {e,h,f} and sl3 {e1,e2,e12,f1,f2,f12,h1,h2},
/// built from the defining representation with the trace form.
GradedLieAlgebra build_simple_algebra(const std::string& preset);

/// Named automorphisms for the presets:
///   identity, chevalley (X -> -X^t), sign (Ad diag(1,-1[,1])),
///   rot4 (Ad diag(i,1) on sl2), zeta3 (Ad diag(1,w3,w3^2) on sl3).
CMatrix preset_automorphism(const GradedLieAlgebra& g, const std::string& name);

/// Commuting finite-order automorphisms sigma_0..sigma_r with orders N_i.
class AutomorphismFamily {
public:
    AutomorphismFamily(std::vector<CMatrix> autos, std::vector<long> orders)
        : autos_(std::move(autos)), orders_(std::move(orders)) {}

    int r() const { return static_cast<int>(autos_.size()) - 1; }
    long order(int i) const { return orders_[i]; }
    long N0() const { return orders_[0]; }
    const CMatrix& sigma(int i) const { return autos_[i]; }
    long lcm_order() const;
    long Nplus() const;  // N_1 * ... * N_r

private:
    std::vector<CMatrix> autos_;
    std::vector<long> orders_;
};

/// Validates bracket preservation, form preservation, orders and
/// commutativity; throws std::invalid_argument naming the first violation.
AutomorphismFamily validate_family(const GradedLieAlgebra& g, const std::vector<CMatrix>& autos);

/// Simultaneous eigenspace decomposition g_(m0,m). Residue keys run over
/// (m0 mod N_0, ..., mr mod N_r). The adapted basis concatenates the
/// component bases in residue order; it is a basis of g.
struct GradedDecomposition {
    std::vector<std::vector<long>> residues;       // per adapted vector
    std::vector<GVec> adapted;                     // adapted basis, original coords
    CMatrix from_adapted;                          // columns = adapted vectors
    CMatrix to_adapted;                            // inverse change of basis
    std::map<std::vector<long>, std::vector<int>> component_members;  // residue -> adapted ids

    // tables over the adapted basis
    std::vector<std::vector<GVec>> bracket_ad;     // [a_i, a_j] in adapted coords
    CMatrix form_ad;

    int dim() const { return static_cast<int>(adapted.size()); }
    std::vector<long> residue_sum(const std::vector<long>& a, const std::vector<long>& b,
                                  const std::vector<long>& orders) const;
    GVec to_adapted_coords(const GVec& original) const { return mat_apply(to_adapted, original); }
};

GradedDecomposition decompose(const GradedLieAlgebra& g, const AutomorphismFamily& fam);

/// [g_(a), g_(b)] subset of g_(a+b), checked exactly on all adapted pairs.
bool grading_contained(const GradedLieAlgebra& g, const AutomorphismFamily& fam,
                       const GradedDecomposition& d);

/// a_(m) = (1/N+) sum over the spatial group of chi^m(gamma^{-1}) gamma(a);
/// uses sigma_1..sigma_r only.
GVec project_component(const GradedLieAlgebra& g, const AutomorphismFamily& fam, const GVec& a,
                       const std::vector<long>& m);

/// Full-group variant with characters of sigma_0..sigma_r.
GVec project_component_full(const GradedLieAlgebra& g, const AutomorphismFamily& fam,
                            const GVec& a, long m0, const std::vector<long>& m);

}  // namespace torva

#endif
