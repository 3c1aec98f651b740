#ifndef TORVA_REPN_HPP
#define TORVA_REPN_HPP

#include "torva/toroidal.hpp"

#include <memory>
#include <mutex>
#include <optional>

namespace torva {

/// Sparse module vector with a truncation-validity flag: valid = false
/// records that the true value has a component outside the (D, B) box that
/// the truncation lost. An invalid coefficient is never trusted by
/// comparisons. The default value is the trusted zero.
struct VecC {
    std::vector<std::pair<int, Cyc>> entries;  // sorted by basis index
    bool valid = true;

    bool operator==(const VecC& o) const {
        if (valid != o.valid || entries.size() != o.entries.size()) return false;
        for (size_t i = 0; i < entries.size(); ++i)
            if (entries[i].first != o.entries[i].first || entries[i].second != o.entries[i].second)
                return false;
        return true;
    }
};

VecC vec_add(const VecC& a, const VecC& b);
VecC vec_scaled(const VecC& a, const Cyc& s);

inline bool coeff_is_zero(const VecC& v) { return v.valid && v.entries.empty(); }
inline bool coeff_valid(const VecC& v) { return v.valid; }
inline void coeff_add_inplace(VecC& a, const VecC& b) { a = vec_add(a, b); }
inline VecC coeff_neg(const VecC& v) { return vec_scaled(v, Cyc(-1)); }
inline VecC coeff_scaled(const VecC& v, const Cyc& s) { return vec_scaled(v, s); }
std::string coeff_str(const VecC& v);
inline bool coeff_eq(const VecC& a, const VecC& b) { return a == b; }
inline CoeffCompare coeff_compare(const VecC& a, const VecC& b) {
    if (!a.valid || !b.valid) return {false, false};
    return {true, a.entries == b.entries};
}
inline CoeffZero coeff_zero_probe(const VecC& v) { return {v.valid, v.entries.empty()}; }

/// One PBW basis monomial: generator ids (sorted by the fixed PBW order)
/// applied to a seed. Seed 0 is the vacuum line (C or 1); in the loop
/// vacuum module seeds 1..dim are the adapted copy of g in degree one.
struct Monomial {
    std::vector<int> gens;
    int seed = 0;
    auto operator<=>(const Monomial&) const = default;
};

enum class ModuleKind {
    TwistedVacuum,  // induced from the nonnegative part of tau
    LoopVacuum      // V_L(level, 0), induced from L^{>=0} on g (+) C
};

/// A PBW-induced module cut to the degree/weight box. Degrees are
/// t0-degrees scaled by N0; weights are bookkeeping sums of generator
/// t-exponents (seeds count 0). Construction enumerates the basis and is
/// single-threaded; afterwards the module is immutable and act() is pure
/// (the action cache is guarded).
class TruncatedModule {
public:
    struct Generator {
        int adapted;
        long t0num;  // negative, scaled by N0
        std::vector<long> t;
    };

    TruncatedModule(const GradedLieAlgebra* g, const AutomorphismFamily* fam,
                    const GradedDecomposition* dec, ModuleKind kind, const Rat& level,
                    long degree_cap_num, long weight_box);

    ModuleKind kind() const { return kind_; }
    const Rat& level() const { return level_; }
    long degree_cap_num() const { return degree_cap_num_; }
    long weight_box() const { return weight_box_; }
    long N0() const { return fam_->N0(); }
    int r() const { return fam_->r(); }
    const GradedLieAlgebra& algebra() const { return *g_; }
    const AutomorphismFamily& family() const { return *fam_; }
    const GradedDecomposition& decomposition() const { return *dec_; }

    int dim() const { return static_cast<int>(basis_.size()); }
    const std::vector<Generator>& generators() const { return generators_; }
    const Monomial& basis_monomial(int i) const { return basis_[i]; }
    long degree_num(int i) const { return degree_[i]; }  // t0-degree * N0
    const std::vector<long>& weight(int i) const { return weight_[i]; }
    int vacuum_index() const { return vacuum_; }
    /// LoopVacuum only: index of the degree-one seed copy of adapted basis
    /// element a.
    int seed_index(int adapted) const;
    std::optional<int> index_of(const Monomial& m) const;
    std::string monomial_label(int i) const;

    /// Exact normal-ordered action of x on basis vector i, projected to the
    /// box; valid = false when a nonzero component fell outside.
    VecC act(const ToroidalElement& x, int i) const;
    VecC act(const ToroidalElement& x, const VecC& v) const;

    /// Diagonal of the lifted automorphism sigma~_i on the basis (every
    /// adapted generator and seed is a sigma_i eigenvector).
    std::vector<Cyc> lift_automorphism(int i) const;

    /// degree -> dimension table (degree in t0 units scaled by N0)
    std::map<long, int> graded_dimensions() const;

private:
    struct AdMode {
        int adapted;
        long t0num;
        std::vector<long> t;
    };
    using RawElement = std::map<Monomial, Cyc>;

    bool gen_less(const Generator& a, const Generator& b) const;
    int find_generator(const AdMode& m) const;  // -1 if outside the table
    int marker_id(const AdMode& m) const;       // unique negative id per mode
    bool mode_compatible(int adapted, long t0num, const std::vector<long>& t) const;
    void enumerate_basis();
    RawElement leftmul(const AdMode& x, const Monomial& m) const;
    RawElement seed_action(const AdMode& x, int seed) const;
    VecC project(const RawElement& e) const;

    const GradedLieAlgebra* g_;
    const AutomorphismFamily* fam_;
    const GradedDecomposition* dec_;
    ModuleKind kind_;
    Rat level_;
    long degree_cap_num_;
    long weight_box_;

    std::vector<Generator> generators_;
    std::vector<Monomial> basis_;
    std::map<Monomial, int> index_;
    std::vector<long> degree_;
    std::vector<std::vector<long>> weight_;
    int vacuum_ = 0;
    std::vector<int> seed_index_;  // adapted -> basis index (LoopVacuum)

    mutable std::mutex cache_mutex_;
    mutable std::map<std::tuple<int, long, std::vector<long>, int>, VecC> act_cache_;
    mutable std::map<std::tuple<int, long, std::vector<long>>, int> marker_ids_;
};

/// Builders named after the constructions they realize.
TruncatedModule induce_twisted_vacuum(const GradedLieAlgebra& g, const AutomorphismFamily& fam,
                                      const GradedDecomposition& dec, const Rat& level,
                                      long degree_cap_num, long weight_box);
TruncatedModule induce_vacuum(const GradedLieAlgebra& g, const AutomorphismFamily& fam,
                              const GradedDecomposition& dec, const Rat& level,
                              long degree_cap_num, long weight_box);

}  // namespace torva

#endif
