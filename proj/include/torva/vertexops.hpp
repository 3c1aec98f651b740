#ifndef TORVA_VERTEXOPS_HPP
#define TORVA_VERTEXOPS_HPP

#include "torva/repn.hpp"

#include <functional>
#include <optional>

namespace torva {

// Sparse operator on a truncated module: columns indexed by basis vectors,
// each column a VecC whose flag records truncation leaks for that column.
struct MatC {
    int ncols = 0;
    std::vector<VecC> cols;

    MatC() = default;
    explicit MatC(int n) : ncols(n), cols(n) {}
    bool is_zero() const {
        for (const VecC& c : cols)
            if (!coeff_is_zero(c)) return false;
        return ncols == 0 || true;
    }
    bool all_valid() const {
        for (const VecC& c : cols)
            if (!c.valid) return false;
        return true;
    }
};

MatC mat_add(const MatC& a, const MatC& b);
MatC mat_scaled(const MatC& a, const Cyc& s);
MatC mat_compose(const MatC& a, const MatC& b);  // a after b
VecC mat_apply_vec(const MatC& a, const VecC& v);
bool mat_equal(const MatC& a, const MatC& b);

inline bool coeff_is_zero(const MatC& m) {
    for (const VecC& c : m.cols)
        if (!coeff_is_zero(c)) return false;
    return true;
}
inline bool coeff_valid(const MatC& m) { return m.all_valid(); }
inline void coeff_add_inplace(MatC& a, const MatC& b) { a = mat_add(a, b); }
inline MatC coeff_neg(const MatC& m) { return mat_scaled(m, Cyc(-1)); }
inline MatC coeff_scaled(const MatC& m, const Cyc& s) { return mat_scaled(m, s); }
std::string coeff_str(const MatC& m);
inline bool coeff_eq(const MatC& a, const MatC& b) { return mat_equal(a, b); }
/// Matrices compare column-wise on mutually valid columns.
inline CoeffCompare coeff_compare(const MatC& a, const MatC& b) {
    static const VecC kZeroCol{};
    int n = std::max(a.ncols, b.ncols);
    bool any = false, equal = true;
    for (int j = 0; j < n; ++j) {
        const VecC& ca = j < a.ncols ? a.cols[j] : kZeroCol;
        const VecC& cb = j < b.ncols ? b.cols[j] : kZeroCol;
        if (!ca.valid || !cb.valid) continue;
        any = true;
        if (!(ca.entries == cb.entries)) equal = false;
    }
    return {any, equal};
}
inline CoeffZero coeff_zero_probe(const MatC& m) {
    bool any = false, zero = true;
    for (const VecC& c : m.cols) {
        if (!c.valid) continue;
        any = true;
        if (!c.entries.empty()) zero = false;
    }
    return {any, zero};
}

using OperatorSeries = Series<MatC>;   // coefficients act on a fixed module
using CurrentSeries = Series<ToroidalElement>;  // symbolic mode coefficients
using VectorSeries = Series<VecC>;     // module-vector valued

/// Variable names used by the vertex-operator layer: one distinguished
/// x0-style variable plus r lattice variables per slot.
struct VarSlot {
    int v0;                 // e.g. x0
    std::vector<int> vx;    // x1..xr
};
VarSlot make_slot(const std::string& stem, int r);

/// The current a^tau(x0,x) (twisted) or a^L(x0,x) (untwisted) of the
/// adapted element `family`, as a symbolic series of ToroidalElement modes
/// on the given windows. Exponent conventions: the mode a x t0^{k} t^m
/// sits at x0-exponent -k-1 (scaled) and x-exponent -m.
///
/// Validity: coefficients are stored on the whole window; the series is
/// complete below in x0 (modes beyond the low edge annihilate every vector
/// of a degree-capped module exactly), and unknown above the window edges,
/// which the metadata records via gsupp.
CurrentSeries current_series(const ModeFamily& fam_modes, const TruncatedModule& mod,
                             const VarSlot& slot, const Window& win);

/// Same data with materialized matrices.
OperatorSeries current_matrix_series(const ModeFamily& fam_modes, const TruncatedModule& mod,
                                     const VarSlot& slot, const Window& win);

/// The identity series 1_W: identity matrix at the mode (-1, 0), i.e.
/// exponent zero.
OperatorSeries identity_series(const TruncatedModule& mod, const VarSlot& slot);

/// Plain application Y_W(v; y0, y) target, where the target shares no
/// lattice variables with the current (e.g. the constant w).
VectorSeries apply_current(const CurrentSeries& cur, const TruncatedModule& mod,
                           const VectorSeries& target);

/// Paired application Y_W(u; x0, zy) B: the current's lattice exponents
/// land on z and y simultaneously. The result's trust region carries the
/// linear band (y_i - z_i) within B's trusted y-interval; single-variable
/// bands of B are folded into its intervals first.
VectorSeries apply_current_paired(const CurrentSeries& cur, const VarSlot& from,
                                  const VarSlot& zslot, const VarSlot& yslot,
                                  const TruncatedModule& mod, const VectorSeries& B);
OperatorSeries apply_matrix_paired(const OperatorSeries& cur, const VarSlot& from,
                                   const VarSlot& zslot, const VarSlot& yslot,
                                   const TruncatedModule& mod, const OperatorSeries& B);

VectorSeries vector_series_constant(long scale, const VecC& v);

/// Fold single-variable bands into the validity box.
template <class C>
Series<C> fold_single_bands(const Series<C>& s) {
    Series<C> out = s;
    out.clear_bands();
    for (const LinearBand& b : s.bands()) {
        if (b.terms.size() == 1 && b.terms[0].second == 1) {
            int v = b.terms[0].first;
            out.set_valid(v, out.valid_of(v).intersect(b.range));
        } else if (b.terms.size() == 1 && b.terms[0].second == -1) {
            int v = b.terms[0].first;
            out.set_valid(v, out.valid_of(v).intersect(
                                 Interval{b.range.hi == kPosInf ? kNegInf : -b.range.hi,
                                          b.range.lo == kNegInf ? kPosInf : -b.range.lo}));
        } else {
            out.add_band(b);
        }
    }
    return out;
}

/// Least k <= cap with (x0-y0)^k [A(x0,x), B(y0,y)] = 0 on the visible
/// window; throws when no such k exists within the cap or the window shows
/// nothing.
struct LocalityResult {
    int order;
    long coefficients_checked;
};
LocalityResult find_locality_order(const OperatorSeries& A, const VarSlot& slotA,
                                   const OperatorSeries& B, const VarSlot& slotB, int cap,
                                   const Window& win);

/// Slot bundle for the Y_E pipelines: the output generating series lives in
/// (z0, z-vars, y0, y-vars); the x0 variable is internal.
struct YeSlots {
    int x0, y0, z0;
    std::vector<int> z, y;
};
YeSlots make_ye_slots(int r);

/// The generating series G(z0, z, y0, y) with
///   G = sum_{(m0,m)} (A_{(m0,m)} B)(y0, y) z0^{-m0-1} z^{-m},
/// computed by the closed form: z0^{-k} (y0+z0)^{-j/N} [ (x0-y0)^k x0^{j/N}
/// A(x0, zy) B(y0, y) ]|_{x0 = y0+z0}, with j = A's homogeneity class and k
/// any valid locality order of the pair. The applied variant evaluates
/// everything on a fixed target vector series (Y_W(v)-applied style); the
/// matrix variant composes truncated-module operators.
VectorSeries ye_generating_applied(const CurrentSeries& A, long a_class,
                                   const TruncatedModule& mod, const VectorSeries& B,
                                   const YeSlots& slots, int k, const Window& win);
OperatorSeries ye_generating_matrix(const OperatorSeries& A, long a_class,
                                    const TruncatedModule& mod, const OperatorSeries& B,
                                    const YeSlots& slots, int k, const Window& win);

/// The same series by the residue form (the defining formula), kept as the
/// independent cross-check route: Res_{x0} ((x0-z0)/y0)^{j/N} X with X the
/// delta-kernel-weighted difference of the two operator orders.
OperatorSeries ye_generating_matrix_residue(const OperatorSeries& A, long a_class,
                                            const TruncatedModule& mod, const OperatorSeries& B,
                                            const YeSlots& slots, const Window& win);

/// One mode A_{(m0,m)} B extracted from a generating series: slice z0 at
/// -m0-1 and z at -m. Single-variable bands left by the slicing fold into
/// plain validity intervals.
OperatorSeries extract_ye_mode(const OperatorSeries& G, const YeSlots& slots, long m0,
                               const std::vector<long>& m);
VectorSeries extract_ye_mode_applied(const VectorSeries& G, const YeSlots& slots, long m0,
                                     const std::vector<long>& m);

/// A member of the truncated closure.
struct ClosureMember {
    std::string label;
    long cls = 0;  // Z_N homogeneity class of the e0 support
    OperatorSeries series;
    ClosureMember(std::string l, long c, OperatorSeries s)
        : label(std::move(l)), cls(c), series(std::move(s)) {}
};

struct ClosureOptions {
    int depth = 2;
    long mode_lo = 0;       // lowest m0 tried (0 = nonnegative modes only)
    long weight_window = 1; // |m_i| <= this for tried modes
    int locality_cap = 8;
    int member_cap = 48;
    long z0_window = 6;
};

struct ClosureResult {
    std::vector<ClosureMember> members;
    std::vector<std::string> unclosed;  // products that hit a cap
    bool closed() const { return unclosed.empty(); }
};

/// Generate the truncated closure of the given currents (always including
/// 1_W): repeatedly extract Y_E modes within the caps, pruning linear
/// redundancy by exact rank computation on window fingerprints.
ClosureResult generate_closure(const std::vector<ClosureMember>& seeds,
                               const TruncatedModule& mod, const VarSlot& slot,
                               const Window& win, const ClosureOptions& opt);

struct TwistedYOptions {
    int locality_cap = 8;
    long z0_window_pad = 4;  // scaled internally
};

/// phi_W of a PBW basis monomial: nested Y_E modes applied to the seed
/// current (or the identity for the vacuum seed), evaluated on the twisted
/// module. Returns the operator series Y_W(v; x0, x) of the monomial on the
/// requested window; locality orders of the nested pairs are searched.
OperatorSeries twisted_Y(const TruncatedModule& V, int v_index, const TruncatedModule& W,
                         const VarSlot& slot, const Window& win, const TwistedYOptions& opt);

/// Homogeneity class (sigma_0 eigenexponent) of a PBW basis vector of
/// V_L(l,0).
long vector_class(const TruncatedModule& V, int v_index);

/// The grading automorphism of E(W,r;N): f(x0^{1/N}, x) ->
/// f(w_N^{-1} x0^{1/N}, x); the coefficient at x0^{p/N} gains w_N^{-p}.
/// Class-s series are eigenvectors with eigenvalue w_N^s.
template <class C>
Series<C> sigma_twist(const Series<C>& s, int v0, long N) {
    if ((s.scale() * N) % s.scale() != 0 || s.scale() % (s.scale() / std::gcd(s.scale(), N)) != 0)
        throw std::invalid_argument("sigma_twist: incompatible scale");
    Series<C> out(s.scale(), s.vars());
    out.copy_meta_from(s);
    int p = s.var_pos(v0);
    for (const auto& [k, c] : s.terms()) {
        // exponent k/scale = p_exp/N  =>  p_exp = k*N/scale
        long num = static_cast<long>(k[p]) * N;
        if (num % s.scale() != 0)
            throw std::domain_error("sigma_twist: exponent outside (1/N)Z");
        out.add_term(k, coeff_scaled(c, Cyc::root(N, -(num / s.scale()))));
    }
    return out;
}

}  // namespace torva

#endif
