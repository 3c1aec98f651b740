#ifndef TORVA_TOROIDAL_HPP
#define TORVA_TOROIDAL_HPP

#include "torva/formal.hpp"
#include "torva/liealg.hpp"
#include "torva/report.hpp"

#include <map>
#include <optional>

namespace torva {

/// A mode index of the centrally extended (r+1)-loop algebra: t0-exponent
/// t0num/denom (denom is the scenario's N_0) and the lattice exponent t.
struct TorMode {
    long t0num = 0;
    std::vector<long> t;
    auto operator<=>(const TorMode&) const = default;
};

/// Finite sum of (g-element) x t0^{t0num/denom} t^m plus a central term.
/// Value-semantic; arithmetic requires matching gdim and denom. A default
/// constructed element is the zero of any shape.
class ToroidalElement {
public:
    ToroidalElement() = default;
    ToroidalElement(int gdim, long denom) : gdim_(gdim), denom_(denom) {}

    static ToroidalElement central(int gdim, long denom, const Cyc& c) {
        ToroidalElement e(gdim, denom);
        e.central_ = c;
        return e;
    }
    static ToroidalElement mode(int gdim, long denom, const GVec& a, const TorMode& m) {
        ToroidalElement e(gdim, denom);
        e.add_mode(m, a);
        return e;
    }

    int gdim() const { return gdim_; }
    long denom() const { return denom_; }
    const Cyc& central_part() const { return central_; }
    const std::map<TorMode, GVec>& terms() const { return terms_; }

    bool is_zero() const;
    void add_mode(const TorMode& m, const GVec& coeffs);
    void add_central(const Cyc& c) { central_ += c; }

    ToroidalElement operator+(const ToroidalElement& o) const;
    ToroidalElement operator-() const;
    ToroidalElement operator-(const ToroidalElement& o) const { return *this + (-o); }
    ToroidalElement scaled(const Cyc& s) const;
    bool operator==(const ToroidalElement& o) const;

    std::string str(const GradedLieAlgebra* g = nullptr) const;

private:
    int gdim_ = 0;
    long denom_ = 1;
    std::map<TorMode, GVec> terms_;
    Cyc central_;
};

// Series coefficient adapters so currents can live in Series<ToroidalElement>.
inline bool coeff_is_zero(const ToroidalElement& e) { return e.is_zero(); }
inline bool coeff_valid(const ToroidalElement&) { return true; }
inline void coeff_add_inplace(ToroidalElement& a, const ToroidalElement& b) { a = a + b; }
inline ToroidalElement coeff_neg(const ToroidalElement& e) { return -e; }
inline ToroidalElement coeff_scaled(const ToroidalElement& e, const Cyc& s) { return e.scaled(s); }
inline std::string coeff_str(const ToroidalElement& e) { return e.str(); }
inline bool coeff_eq(const ToroidalElement& a, const ToroidalElement& b) { return a == b; }
inline CoeffCompare coeff_compare(const ToroidalElement& a, const ToroidalElement& b) {
    return {true, a == b};
}
inline CoeffZero coeff_zero_probe(const ToroidalElement& e) { return {true, e.is_zero()}; }

/// The bracket of hat L_{r+1}(g, N_0):
///   [a x t0^p t^m, b x t0^q t^n]
///     = [a,b] x t0^{p+q} t^{m+n} + p <a,b> delta_{p+q,0} delta_{m+n,0} c,
/// with c central.
ToroidalElement bracket(const GradedLieAlgebra& g, const ToroidalElement& x,
                        const ToroidalElement& y);

/// sigma_hat_i: c -> c, a x t0^{m0/N0} t^m -> w_{N_i}^{-m_i} sigma_i(a) x same,
/// where m_0 means the t0 numerator when i = 0.
ToroidalElement sigma_hat(const GradedLieAlgebra& g, const AutomorphismFamily& fam, int i,
                          const ToroidalElement& x);

/// The component of a in g_(m0 mod N0, m mod N) tensored with t0^{m0/N0} t^m
/// (a tau-basis element), or zero.
ToroidalElement tau_component(const GradedLieAlgebra& g, const AutomorphismFamily& fam,
                              const GVec& a, long m0, const std::vector<long>& m);

/// L-variant: the component of a in g_(m mod N) (spatial group only)
/// tensored with t0^{m0} t^m; t0-exponents are integers.
ToroidalElement loop_component(const GradedLieAlgebra& g, const AutomorphismFamily& fam,
                               const GVec& a, long m0, const std::vector<long>& m);

/// The indexed family of current modes of one homogeneous element.
/// For the twisted kind the modes a^tau(m0', m) exist only at
/// t0num = res0 (mod N0) and m = res (mod N); for the untwisted kind at
/// integer t0 exponents and m = res (mod N). Out-of-support requests
/// return zero.
class ModeFamily {
public:
    enum class Kind { Twisted, Untwisted };

    ModeFamily(const GradedLieAlgebra* g, const AutomorphismFamily* fam,
               const GradedDecomposition* dec, int adapted_index, Kind kind);

    Kind kind() const { return kind_; }
    int adapted_index() const { return adapted_; }
    long res0() const { return res0_; }
    const std::vector<long>& res() const { return res_; }
    /// Z_N0-class of the current series (e0-support lies in -class/N0 + Z).
    long homogeneity_class() const { return kind_ == Kind::Twisted ? res0_ : 0; }

    /// t0num is scaled by N0 for both kinds (untwisted modes require
    /// t0num divisible by N0).
    ToroidalElement mode(long t0num, const std::vector<long>& m) const;
    bool supports(long t0num, const std::vector<long>& m) const;

    const GVec& element() const;

private:
    const GradedLieAlgebra* g_;
    const AutomorphismFamily* fam_;
    const GradedDecomposition* dec_;
    int adapted_;
    Kind kind_;
    long res0_;
    std::vector<long> res_;
};

/// Mode-wise verification of the twisted current commutator identity: for
/// every mode pair inside the window, the Lie bracket of modes (computed in
/// the ambient centrally extended algebra) must equal the coefficient read
/// off the delta-kernel right side with fractional factor (y0/x0)^{k0/N0}.
/// The untwisted kind verifies the integer-power variant. Level-free: the
/// central element stays formal.
CheckReport check_mode_commutator(const GradedLieAlgebra& g, const AutomorphismFamily& fam,
                                  const GradedDecomposition& dec, int a_adapted, int b_adapted,
                                  long t0_window, long weight_window, ModeFamily::Kind kind);

}  // namespace torva

#endif
