#ifndef TORVA_FORMAL_HPP
#define TORVA_FORMAL_HPP

#include "torva/scalars.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

// Sparse window-truncated formal series.
//
// Conventions used throughout the library:
//  * A series stores EXPONENTS. The mode (m0, m) of a current or vertex
//    operator sits at exponent (-m0-1, -m).
//  * Exponents are integers scaled by a per-series `scale`: stored value k
//    represents the exponent k/scale. All variables of one series share the
//    scale; mixed-scale operands are rescaled to the lcm.
//  * (a +- b)^alpha always expands in nonnegative integer powers of the
//    second-listed variable b. Callers encode the expansion direction by
//    argument order.
//
// Truncation soundness. Every series tracks where its stored coefficients
// are exactly the coefficients of the untruncated object:
//  * a validity interval per variable (a box), plus
//  * optional linear bands: sum_i c_i * e_i constrained to an interval.
// A coefficient is trusted only at exponent tuples inside the box and all
// bands. gsupp records a per-variable bound on the true support (stored or
// not); it is what makes product validity computable. Coefficient types may
// in addition carry their own validity flag (module-box truncation), see
// coeff_valid. The `truncated` bit records whether any term was ever
// dropped; checkers report it and never certify a coefficient outside the
// trusted region.

namespace torva {

inline constexpr long kNegInf = std::numeric_limits<long>::min() / 4;
inline constexpr long kPosInf = std::numeric_limits<long>::max() / 4;

inline long sat_add(long a, long b) {
    if (a == kNegInf || b == kNegInf) return kNegInf;
    if (a == kPosInf || b == kPosInf) return kPosInf;
    return a + b;
}
inline long sat_mul(long a, long f) {
    if (a == kNegInf || a == kPosInf) return a;
    return a * f;
}

struct Interval {
    long lo = kNegInf;
    long hi = kPosInf;
    bool full() const { return lo == kNegInf && hi == kPosInf; }
    bool empty() const { return lo > hi; }
    bool contains(long v) const { return v >= lo && v <= hi; }
    Interval intersect(const Interval& o) const {
        return Interval{std::max(lo, o.lo), std::min(hi, o.hi)};
    }
    Interval hull(const Interval& o) const {
        return Interval{std::min(lo, o.lo), std::max(hi, o.hi)};
    }
    Interval shifted(long d) const { return Interval{sat_add(lo, d), sat_add(hi, d)}; }
    Interval scaled(long f) const { return Interval{sat_mul(lo, f), sat_mul(hi, f)}; }
    bool operator==(const Interval& o) const { return lo == o.lo && hi == o.hi; }
};

/// Validity constraint sum_i coeff_i * exp(var_i) in range.
struct LinearBand {
    std::vector<std::pair<int, int>> terms;  // (var id, integer coefficient)
    Interval range;
};

/// Interned formal-variable names. Ids are stable within a process and
/// series keep their variable lists sorted by id.
int var_id(const std::string& name);
const std::string& var_name(int id);

inline constexpr int kMaxSeriesVars = 12;
using ExpKey = std::array<int16_t, kMaxSeriesVars>;

inline ExpKey zero_key() { ExpKey k{}; k.fill(0); return k; }

/// Per-variable scaled exponent bounds (inclusive).
using Window = std::map<int, Interval>;

// --- coefficient concept -------------------------------------------------
// Overloads below cover Cyc; coefficient types defined by other modules
// provide their own overloads found by ADL.

inline bool coeff_is_zero(const Cyc& c) { return c.is_zero(); }
inline bool coeff_valid(const Cyc&) { return true; }
inline void coeff_add_inplace(Cyc& a, const Cyc& b) { a += b; }
inline Cyc coeff_neg(const Cyc& c) { return -c; }
inline Cyc coeff_scaled(const Cyc& c, const Cyc& s) { return c * s; }
inline std::string coeff_str(const Cyc& c) { return c.str(); }
inline bool coeff_eq(const Cyc& a, const Cyc& b) { return a == b; }

/// Partial-visibility comparison: `comparable` is false when truncation hid
/// the value (column-flagged vectors, matrices without mutually valid
/// columns); `equal` refers to the visible part.
struct CoeffCompare {
    bool comparable;
    bool equal;
};
inline CoeffCompare coeff_compare(const Cyc& a, const Cyc& b) { return {true, a == b}; }

/// Zero-visibility probe: `visible` is false when nothing of the
/// coefficient is trusted.
struct CoeffZero {
    bool visible;
    bool zero;
};
inline CoeffZero coeff_zero_probe(const Cyc& c) { return {true, c.is_zero()}; }

template <class C>
class Series {
public:
    Series(long scale, std::vector<int> vars) : scale_(scale), vars_(std::move(vars)) {
        if (scale_ <= 0) throw std::invalid_argument("Series: scale must be positive");
        if (!std::is_sorted(vars_.begin(), vars_.end()) ||
            std::adjacent_find(vars_.begin(), vars_.end()) != vars_.end())
            throw std::invalid_argument("Series: variable ids must be sorted and distinct");
        if (vars_.size() > kMaxSeriesVars)
            throw std::invalid_argument("Series: too many variables");
        valid_.assign(vars_.size(), Interval{});
        gsupp_.assign(vars_.size(), Interval{});
    }

    long scale() const { return scale_; }
    const std::vector<int>& vars() const { return vars_; }
    const std::map<ExpKey, C>& terms() const { return terms_; }
    bool truncated() const { return truncated_; }
    void set_truncated(bool t) { truncated_ = t; }
    const std::vector<LinearBand>& bands() const { return bands_; }
    void add_band(LinearBand b) {
        if (!b.range.full()) bands_.push_back(std::move(b));
    }
    void clear_bands() { bands_.clear(); }

    int var_pos(int var) const {
        auto it = std::lower_bound(vars_.begin(), vars_.end(), var);
        if (it == vars_.end() || *it != var)
            throw std::invalid_argument("Series: unknown variable " + var_name(var));
        return static_cast<int>(it - vars_.begin());
    }
    bool has_var(int var) const {
        return std::binary_search(vars_.begin(), vars_.end(), var);
    }

    const Interval& valid(int pos) const { return valid_[pos]; }
    const Interval& gsupp(int pos) const { return gsupp_[pos]; }
    Interval valid_of(int var) const { return valid_[var_pos(var)]; }
    Interval gsupp_of(int var) const { return gsupp_[var_pos(var)]; }

    void set_valid(int var, Interval iv) { valid_[var_pos(var)] = iv; }
    void set_gsupp(int var, Interval iv) { gsupp_[var_pos(var)] = iv; }

    /// Declares the series exactly known everywhere with true support equal
    /// to the hull of the stored terms. Only correct for series constructed
    /// as complete finite objects.
    void mark_exact() {
        for (size_t i = 0; i < vars_.size(); ++i) {
            valid_[i] = Interval{};
            gsupp_[i] = stored_hull(static_cast<int>(i));
        }
        bands_.clear();
    }

    Interval stored_hull(int pos) const {
        Interval r{kPosInf, kNegInf};
        for (const auto& [k, c] : terms_) {
            r.lo = std::min(r.lo, static_cast<long>(k[pos]));
            r.hi = std::max(r.hi, static_cast<long>(k[pos]));
        }
        if (r.empty()) return Interval{0, 0};
        return r;
    }

    void add_term(const ExpKey& k, C c) {
        if (coeff_is_zero(c)) return;
        auto it = terms_.find(k);
        if (it == terms_.end()) {
            terms_.emplace(k, std::move(c));
        } else {
            coeff_add_inplace(it->second, c);
            if (coeff_is_zero(it->second)) terms_.erase(it);
        }
    }

    bool in_trusted_region(const ExpKey& k) const {
        for (size_t i = 0; i < vars_.size(); ++i)
            if (!valid_[i].contains(k[i])) return false;
        for (const LinearBand& b : bands_) {
            long s = 0;
            for (auto [v, c] : b.terms)
                if (has_var(v)) s += static_cast<long>(c) * k[var_pos(v)];
            if (!b.range.contains(s)) return false;
        }
        return true;
    }

    /// Stored coefficient or zero; throws outside the trusted region
    /// (unknown due to truncation, as opposed to known zero).
    const C* coefficient(const ExpKey& k) const {
        if (!in_trusted_region(k))
            throw std::domain_error("Series::coefficient: exponent outside trusted window");
        auto it = terms_.find(k);
        return it == terms_.end() ? nullptr : &it->second;
    }

    bool is_zero_on_trusted() const {
        for (const auto& [k, c] : terms_)
            if (in_trusted_region(k) && !coeff_is_zero(c)) return false;
        return true;
    }

    template <class F>
    auto map_coeffs(F&& f) const {
        using C2 = decltype(f(std::declval<const C&>()));
        Series<C2> out(scale_, vars_);
        out.copy_meta_from(*this);
        for (const auto& [k, c] : terms_) out.add_term(k, f(c));
        return out;
    }

    template <class C2>
    void copy_meta_from(const Series<C2>& o) {
        truncated_ = o.truncated();
        bands_ = o.bands();
        for (size_t i = 0; i < vars_.size(); ++i) {
            valid_[i] = o.valid(static_cast<int>(i));
            gsupp_[i] = o.gsupp(static_cast<int>(i));
        }
    }

    std::map<ExpKey, C>& raw_terms() { return terms_; }

private:
    long scale_;
    std::vector<int> vars_;
    std::vector<Interval> valid_;
    std::vector<Interval> gsupp_;
    std::vector<LinearBand> bands_;
    bool truncated_ = false;
    std::map<ExpKey, C> terms_;
};

using CycSeries = Series<Cyc>;

// --- alignment -----------------------------------------------------------

namespace detail {

inline void check_exp_range(long v) {
    if (v < std::numeric_limits<int16_t>::min() || v > std::numeric_limits<int16_t>::max())
        throw std::overflow_error("Series: scaled exponent out of range");
}

template <class C>
Series<C> reshape(const Series<C>& s, long scale, const std::vector<int>& vars) {
    if (scale == s.scale() && vars == s.vars()) return s;
    if (scale % s.scale() != 0)
        throw std::invalid_argument("Series: incompatible scales");
    long f = scale / s.scale();
    Series<C> out(scale, vars);
    std::vector<int> pos(s.vars().size());
    for (size_t i = 0; i < s.vars().size(); ++i) {
        auto it = std::lower_bound(vars.begin(), vars.end(), s.vars()[i]);
        if (it == vars.end() || *it != s.vars()[i])
            throw std::invalid_argument("Series::reshape: target misses a variable");
        pos[i] = static_cast<int>(it - vars.begin());
    }
    out.set_truncated(s.truncated());
    for (int v : vars) {
        out.set_valid(v, Interval{});
        out.set_gsupp(v, Interval{0, 0});
    }
    for (size_t i = 0; i < s.vars().size(); ++i) {
        out.set_valid(s.vars()[i], s.valid(static_cast<int>(i)).scaled(f));
        out.set_gsupp(s.vars()[i], s.gsupp(static_cast<int>(i)).scaled(f));
    }
    for (LinearBand b : s.bands()) {
        b.range = b.range.scaled(f);
        // band coefficients apply to scaled exponents; exponent scaling by f
        // keeps coefficients unchanged since both sides scale together.
        out.add_band(std::move(b));
    }
    for (const auto& [k, c] : s.terms()) {
        ExpKey nk = zero_key();
        for (size_t i = 0; i < s.vars().size(); ++i) {
            long v = static_cast<long>(k[i]) * f;
            check_exp_range(v);
            nk[pos[i]] = static_cast<int16_t>(v);
        }
        out.add_term(nk, c);
    }
    return out;
}

inline long lcm_long(long a, long b) { return a / std::gcd(a, b) * b; }

template <class A, class B>
std::pair<long, std::vector<int>> merged_shape(const Series<A>& a, const Series<B>& b) {
    std::vector<int> vars;
    std::set_union(a.vars().begin(), a.vars().end(), b.vars().begin(), b.vars().end(),
                   std::back_inserter(vars));
    return {lcm_long(a.scale(), b.scale()), vars};
}

}  // namespace detail

// --- linear operations ---------------------------------------------------

template <class C>
Series<C> add(const Series<C>& a, const Series<C>& b) {
    auto [scale, vars] = detail::merged_shape(a, b);
    Series<C> ra = detail::reshape(a, scale, vars);
    Series<C> rb = detail::reshape(b, scale, vars);
    Series<C> out(scale, vars);
    out.set_truncated(ra.truncated() || rb.truncated());
    for (size_t i = 0; i < vars.size(); ++i) {
        out.set_valid(vars[i], ra.valid(i).intersect(rb.valid(i)));
        out.set_gsupp(vars[i], ra.gsupp(i).hull(rb.gsupp(i)));
    }
    for (const LinearBand& band : ra.bands()) out.add_band(band);
    for (const LinearBand& band : rb.bands()) out.add_band(band);
    for (const auto& [k, c] : ra.terms()) out.add_term(k, c);
    for (const auto& [k, c] : rb.terms()) out.add_term(k, c);
    return out;
}

template <class C>
Series<C> negate(const Series<C>& a) {
    return a.map_coeffs([](const C& c) { return coeff_neg(c); });
}

template <class C>
Series<C> sub(const Series<C>& a, const Series<C>& b) {
    return add(a, negate(b));
}

template <class C>
Series<C> scale_series(const Series<C>& a, const Cyc& s) {
    if (s.is_zero()) {
        Series<C> out(a.scale(), a.vars());
        out.copy_meta_from(a);
        return out;
    }
    return a.map_coeffs([&](const C& c) { return coeff_scaled(c, s); });
}

/// Multiply by var^(delta/scale): shift every exponent.
template <class C>
Series<C> shift_var(const Series<C>& a, int var, long delta) {
    Series<C> out(a.scale(), a.vars());
    out.copy_meta_from(a);
    int p = a.var_pos(var);
    out.set_valid(var, a.valid(p).shifted(delta));
    out.set_gsupp(var, a.gsupp(p).shifted(delta));
    out.clear_bands();
    for (LinearBand b : a.bands()) {
        for (auto [v, c] : b.terms)
            if (v == var) b.range = b.range.shifted(static_cast<long>(c) * delta);
        out.add_band(std::move(b));
    }
    for (const auto& [k, c] : a.terms()) {
        ExpKey nk = k;
        long v = static_cast<long>(nk[p]) + delta;
        detail::check_exp_range(v);
        nk[p] = static_cast<int16_t>(v);
        out.add_term(nk, c);
    }
    return out;
}

/// Formal d/d(var).
template <class C>
Series<C> derivative(const Series<C>& a, int var) {
    Series<C> out(a.scale(), a.vars());
    out.copy_meta_from(a);
    int p = a.var_pos(var);
    out.set_valid(var, a.valid(p).shifted(-a.scale()));
    out.set_gsupp(var, a.gsupp(p).shifted(-a.scale()));
    out.clear_bands();
    for (LinearBand b : a.bands()) {
        for (auto [v, c] : b.terms)
            if (v == var) b.range = b.range.shifted(static_cast<long>(c) * -a.scale());
        out.add_band(std::move(b));
    }
    for (const auto& [k, c] : a.terms()) {
        Rat e(static_cast<long>(k[p]), a.scale());
        if (e == 0) continue;
        ExpKey nk = k;
        nk[p] = static_cast<int16_t>(k[p] - a.scale());
        out.add_term(nk, coeff_scaled(c, Cyc(e)));
    }
    return out;
}

// --- product -------------------------------------------------------------

/// General product with interval validity propagation. combine(a,b) keeps
/// the left/right order for non-commutative coefficients. When factors
/// carry linear bands, each band's variables must be untouched by the other
/// factor (exponents 0 there), so the band passes through unchanged.
template <class A, class B, class F>
auto mul_series(const Series<A>& a, const Series<B>& b, F&& combine,
                const Window* win = nullptr) {
    using C = decltype(combine(std::declval<const A&>(), std::declval<const B&>()));
    auto [scale, vars] = detail::merged_shape(a, b);
    Series<A> ra = detail::reshape(a, scale, vars);
    Series<B> rb = detail::reshape(b, scale, vars);
    Series<C> out(scale, vars);
    out.set_truncated(ra.truncated() || rb.truncated());
    for (size_t i = 0; i < vars.size(); ++i) {
        const Interval va = ra.valid(i), vb = rb.valid(i);
        const Interval ga = ra.gsupp(i), gb = rb.gsupp(i);
        long lo = kNegInf, hi = kPosInf;
        if (ga.lo < va.lo) lo = std::max(lo, sat_add(va.lo, gb.hi));
        if (gb.lo < vb.lo) lo = std::max(lo, sat_add(vb.lo, ga.hi));
        if (ga.hi > va.hi) hi = std::min(hi, sat_add(va.hi, gb.lo));
        if (gb.hi > vb.hi) hi = std::min(hi, sat_add(vb.hi, ga.lo));
        out.set_valid(vars[i], Interval{lo, hi});
        out.set_gsupp(vars[i], Interval{sat_add(ga.lo, gb.lo), sat_add(ga.hi, gb.hi)});
    }
    auto pass_bands = [&](const auto& src, const auto& other) {
        for (const LinearBand& band : src.bands()) {
            for (auto [v, c] : band.terms) {
                (void)c;
                Interval g = other.has_var(v) ? other.gsupp_of(v) : Interval{0, 0};
                Interval vv = other.has_var(v) ? other.valid_of(v) : Interval{};
                if (!(g == Interval{0, 0}) || !vv.full())
                    throw std::logic_error(
                        "mul_series: band variable touched by the other factor");
            }
            out.add_band(band);
        }
    };
    pass_bands(ra, rb);
    pass_bands(rb, ra);
    for (const auto& [ka, ca] : ra.terms()) {
        for (const auto& [kb, cb] : rb.terms()) {
            ExpKey k;
            bool drop = false;
            for (int i = 0; i < kMaxSeriesVars; ++i) {
                long v = static_cast<long>(ka[i]) + kb[i];
                detail::check_exp_range(v);
                k[i] = static_cast<int16_t>(v);
            }
            if (win) {
                for (size_t i = 0; i < vars.size() && !drop; ++i) {
                    auto it = win->find(vars[i]);
                    if (it != win->end() && !it->second.contains(k[i])) drop = true;
                }
            }
            if (drop) {
                out.set_truncated(true);
                continue;
            }
            out.add_term(k, combine(ca, cb));
        }
    }
    if (win) {
        for (size_t i = 0; i < vars.size(); ++i) {
            auto it = win->find(vars[i]);
            if (it != win->end())
                out.set_valid(vars[i], out.valid(i).intersect(it->second));
        }
    }
    return out;
}

inline Cyc cyc_combine(const Cyc& a, const Cyc& b) { return a * b; }

inline CycSeries mul(const CycSeries& a, const CycSeries& b, const Window* win = nullptr) {
    return mul_series(a, b, cyc_combine, win);
}

// --- extraction ----------------------------------------------------------

/// Series of the coefficient of var^(exp/scale); drops the variable.
/// Throws when the requested slice lies outside the valid interval.
template <class C>
Series<C> coefficient_slice(const Series<C>& a, int var, long exp) {
    int p = a.var_pos(var);
    if (!a.valid(p).contains(exp))
        throw std::domain_error("coefficient_slice: exponent outside valid window of " +
                                var_name(var));
    std::vector<int> vars;
    for (int v : a.vars())
        if (v != var) vars.push_back(v);
    Series<C> out(a.scale(), vars);
    out.set_truncated(a.truncated());
    for (int v : vars) {
        out.set_valid(v, a.valid_of(v));
        out.set_gsupp(v, a.gsupp_of(v));
    }
    for (LinearBand b : a.bands()) {
        std::vector<std::pair<int, int>> nt;
        for (auto [v, c] : b.terms) {
            if (v == var) b.range = b.range.shifted(-static_cast<long>(c) * exp);
            else nt.emplace_back(v, c);
        }
        b.terms = std::move(nt);
        if (b.terms.empty()) {
            if (!b.range.contains(0))
                // The slice lies outside this band's trusted range: nothing
                // on the slice is trusted.
                for (int v : vars) out.set_valid(v, Interval{1, 0});
            continue;
        }
        out.add_band(std::move(b));
    }
    for (const auto& [k, c] : a.terms()) {
        if (k[p] != exp) continue;
        ExpKey nk = zero_key();
        int j = 0;
        for (size_t i = 0; i < a.vars().size(); ++i) {
            if (static_cast<int>(i) == p) continue;
            nk[j++] = k[i];
        }
        out.add_term(nk, c);
    }
    return out;
}

/// Res_var: the coefficient series of var^{-1}.
template <class C>
Series<C> residue(const Series<C>& a, int var) {
    return coefficient_slice(a, var, -a.scale());
}

// --- substitutions -------------------------------------------------------

/// Replace var by the product (zvar * yvar): exponent e goes to (e, e).
/// Both target variables must be new to the series.
template <class C>
Series<C> subst_pair(const Series<C>& a, int var, int zvar, int yvar) {
    if (a.has_var(zvar) || a.has_var(yvar))
        throw std::invalid_argument("subst_pair: target variable already present");
    int p = a.var_pos(var);
    std::vector<int> vars;
    for (int v : a.vars())
        if (v != var) vars.push_back(v);
    vars.push_back(zvar);
    vars.push_back(yvar);
    std::sort(vars.begin(), vars.end());
    Series<C> out(a.scale(), vars);
    out.set_truncated(a.truncated());
    for (int v : vars) {
        if (v == zvar || v == yvar) {
            out.set_valid(v, a.valid(p));
            out.set_gsupp(v, a.gsupp(p));
        } else {
            out.set_valid(v, a.valid_of(v));
            out.set_gsupp(v, a.gsupp_of(v));
        }
    }
    for (LinearBand b : a.bands()) {
        for (auto& [v, c] : b.terms)
            if (v == var)
                throw std::invalid_argument("subst_pair: band on substituted variable");
        out.add_band(std::move(b));
    }
    // Off-diagonal (ez != ey) coefficients are exactly zero; on-diagonal
    // ones inherit the var's validity: the box (both intervals = old one)
    // plus the diagonal structure expresses this exactly.
    int pz = out.var_pos(zvar), py = out.var_pos(yvar);
    for (const auto& [k, c] : a.terms()) {
        ExpKey nk = zero_key();
        for (size_t i = 0; i < a.vars().size(); ++i) {
            if (static_cast<int>(i) == p) continue;
            nk[out.var_pos(a.vars()[i])] = k[i];
        }
        nk[pz] = k[p];
        nk[py] = k[p];
        out.add_term(nk, c);
    }
    return out;
}

/// Substitute var -> (varA + varB), expanded in nonnegative integer powers
/// of varB; exact on the requested window. The inputs must be complete
/// below (valid down to -inf) in var, varA, varB; the result is trusted on
/// {varA in winA, varB <= winB.hi, varA+varB <= Thi} with Thi derived from
/// the input's incomplete-above edges, returned as a box with the corner
/// cut applied to varA.
template <class C>
Series<C> subst_sum(const Series<C>& a, int var, int varA, int varB, const Window& win) {
    const long S = a.scale();
    int p = a.var_pos(var);
    auto wa = win.find(varA), wb = win.find(varB);
    if (wb == win.end() || wb->second.hi == kPosInf)
        throw std::invalid_argument("subst_sum: finite upper window required for " +
                                    var_name(varB));
    for (int v : {var, varA, varB}) {
        if (!a.has_var(v)) continue;
        if (a.valid_of(v).lo != kNegInf)
            throw std::invalid_argument("subst_sum: input not complete below in " + var_name(v));
        for (const LinearBand& b : a.bands())
            for (auto [bv, c] : b.terms)
                if (bv == v)
                    throw std::invalid_argument("subst_sum: band on substituted variable");
    }
    auto va = a.valid(p);
    Interval vA = a.has_var(varA) ? a.valid_of(varA) : Interval{};
    Interval vB = a.has_var(varB) ? a.valid_of(varB) : Interval{};
    Interval gX = a.gsupp(p);
    Interval gA = a.has_var(varA) ? a.gsupp_of(varA) : Interval{0, 0};
    Interval gB = a.has_var(varB) ? a.gsupp_of(varB) : Interval{0, 0};
    long Thi = kPosInf;
    if (gX.hi > va.hi) Thi = std::min(Thi, sat_add(va.hi, sat_add(gA.lo, gB.lo)));
    if (gA.hi > vA.hi) Thi = std::min(Thi, sat_add(vA.hi, sat_add(gX.lo, gB.lo)));
    if (gB.hi > vB.hi) Thi = std::min(Thi, sat_add(vB.hi, sat_add(gX.lo, gA.lo)));

    std::vector<int> vars;
    for (int v : a.vars())
        if (v != var) vars.push_back(v);
    for (int v : {varA, varB})
        if (!std::binary_search(vars.begin(), vars.end(), v)) {
            vars.push_back(v);
            std::sort(vars.begin(), vars.end());
        }
    Series<C> out(a.scale(), vars);
    out.set_truncated(a.truncated());
    for (int v : vars) {
        if (a.has_var(v) && v != varA && v != varB) {
            out.set_valid(v, a.valid_of(v));
            out.set_gsupp(v, a.gsupp_of(v));
        }
    }
    for (const LinearBand& b : a.bands()) out.add_band(b);
    out.set_gsupp(varA, Interval{kNegInf, sat_add(gA.hi, gX.hi)});
    out.set_gsupp(varB, Interval{gB.lo, kPosInf});

    int pA = out.var_pos(varA), pB = out.var_pos(varB);
    int aA = a.has_var(varA) ? a.var_pos(varA) : -1;
    int aB = a.has_var(varB) ? a.var_pos(varB) : -1;
    for (const auto& [k, c] : a.terms()) {
        const long pexp = k[p];
        const long ua = aA >= 0 ? k[aA] : 0;
        const long ub = aB >= 0 ? k[aB] : 0;
        const Rat alpha(pexp, S);
        const bool finite = denominator(alpha) == 1 && numerator(alpha) >= 0;
        for (long j = 0;; ++j) {
            if (finite && Rat(j) > alpha) break;
            long qb = ub + j * S;
            if (qb > wb->second.hi) {
                out.set_truncated(true);
                break;
            }
            long qa = ua + pexp - j * S;
            Cyc coef{binomial_coeff(alpha, j)};
            if (coef.is_zero()) continue;
            // only an upper cut in varA keeps the result complete below
            if (wa != win.end() && qa > wa->second.hi) {
                out.set_truncated(true);
                continue;
            }
            ExpKey nk = zero_key();
            for (size_t i = 0; i < a.vars().size(); ++i) {
                int v = a.vars()[i];
                if (v == var || v == varA || v == varB) continue;
                nk[out.var_pos(v)] = k[i];
            }
            detail::check_exp_range(qa);
            detail::check_exp_range(qb);
            nk[pA] = static_cast<int16_t>(qa);
            nk[pB] = static_cast<int16_t>(qb);
            out.add_term(nk, coeff_scaled(c, coef));
        }
    }
    Interval outA{kNegInf, wa != win.end() ? wa->second.hi : kPosInf};
    // corner cut: every trusted tuple must satisfy qa + qb <= Thi
    if (Thi != kPosInf) outA.hi = std::min(outA.hi, sat_add(Thi, -wb->second.hi));
    out.set_valid(varA, outA);
    out.set_valid(varB, Interval{kNegInf, wb->second.hi});
    return out;
}

/// Substitute var -> (omega * var): scales the coefficient at exponent e by
/// omega^e. Requires integer exponents in var.
template <class C>
Series<C> subst_scale_var(const Series<C>& a, int var, const Cyc& omega) {
    Series<C> out(a.scale(), a.vars());
    out.copy_meta_from(a);
    int p = a.var_pos(var);
    const long S = a.scale();
    for (const auto& [k, c] : a.terms()) {
        if (k[p] % S != 0)
            throw std::domain_error("subst_scale_var: fractional exponent in " + var_name(var));
        out.add_term(k, coeff_scaled(c, omega.pow(k[p] / S)));
    }
    return out;
}

template <class C>
Series<C> rename_var(const Series<C>& a, int from, int to) {
    if (from == to) return a;
    if (a.has_var(to)) throw std::invalid_argument("rename_var: target exists");
    int p = a.var_pos(from);
    std::vector<int> vars = a.vars();
    vars[p] = to;
    std::vector<size_t> order(vars.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t i, size_t j) { return vars[i] < vars[j]; });
    std::vector<int> nvars(vars.size());
    for (size_t i = 0; i < order.size(); ++i) nvars[i] = vars[order[i]];
    Series<C> out(a.scale(), nvars);
    out.set_truncated(a.truncated());
    for (size_t i = 0; i < order.size(); ++i) {
        out.set_valid(nvars[i], a.valid(static_cast<int>(order[i])));
        out.set_gsupp(nvars[i], a.gsupp(static_cast<int>(order[i])));
    }
    for (LinearBand b : a.bands()) {
        for (auto& [v, c] : b.terms)
            if (v == from) v = to;
        out.add_band(std::move(b));
    }
    for (const auto& [k, c] : a.terms()) {
        ExpKey nk = zero_key();
        for (size_t i = 0; i < order.size(); ++i) nk[i] = k[order[i]];
        out.add_term(nk, c);
    }
    return out;
}

/// Drop terms outside the window; validity shrinks accordingly.
template <class C>
Series<C> restrict_window(const Series<C>& a, const Window& win) {
    Series<C> out(a.scale(), a.vars());
    out.copy_meta_from(a);
    for (const auto& [v, iv] : win) {
        if (!out.has_var(v)) continue;
        out.set_valid(v, a.valid_of(v).intersect(iv));
    }
    for (const auto& [k, c] : a.terms()) {
        bool keep = true;
        for (const auto& [v, iv] : win) {
            if (!a.has_var(v)) continue;
            if (!iv.contains(k[a.var_pos(v)])) { keep = false; break; }
        }
        if (keep) out.add_term(k, c);
        else out.set_truncated(true);
    }
    return out;
}

// --- exact kernel multipliers ----------------------------------------------
// Delta kernels and fractional binomials have infinite support; rather than
// materializing truncated copies, these multiply a series by the kernel
// exactly on a requested window. The kernels are homogeneous (their term
// exponents over the kernel variables sum to a constant), which is what
// makes the finite enumeration complete; the factor's incomplete-above
// edges turn into a corner cut on the kernel variable designated by
// `shrink_var`.

namespace detail {

template <class C>
long kernel_factor_Thi(const Series<C>& f, std::initializer_list<int> kvars) {
    long Thi = kPosInf;
    std::vector<int> vs(kvars);
    for (int v : vs) {
        Interval val = f.has_var(v) ? f.valid_of(v) : Interval{};
        Interval g = f.has_var(v) ? f.gsupp_of(v) : Interval{0, 0};
        if (g.lo < val.lo)
            throw std::invalid_argument(
                "kernel multiply: factor not complete below in " + var_name(v));
        for (const LinearBand& b : f.bands())
            for (auto [bv, c] : b.terms)
                if (bv == v)
                    throw std::invalid_argument("kernel multiply: band on kernel variable");
        if (g.hi > val.hi) {
            long t = val.hi;
            for (int u : vs)
                if (u != v) t = sat_add(t, f.has_var(u) ? f.gsupp_of(u).lo : 0);
            Thi = std::min(Thi, t);
        }
    }
    return Thi;
}

}  // namespace detail

/// out = (varA + signB*varB)^alpha * f, expanded in nonnegative powers of
/// varB, exact on the window. Requires finite winB.hi; winA optional.
template <class C>
Series<C> mul_binom(const Series<C>& f, int varA, int varB, const Rat& alpha, int signB,
                    const Window& win, int shrink_var = -1) {
    const long S = f.scale();
    Rat alphaS = alpha * S;
    if (denominator(alphaS) != 1)
        throw std::invalid_argument("mul_binom: alpha incompatible with series scale");
    const long aS = static_cast<long>(numerator(alphaS));
    auto wa = win.find(varA);
    auto wb = win.find(varB);
    const bool finite_binom = denominator(alpha) == 1 && numerator(alpha) >= 0;
    if (!finite_binom && (wb == win.end() || wb->second.hi == kPosInf))
        throw std::invalid_argument("mul_binom: finite upper window required for " +
                                    var_name(varB));
    const long bhi = wb == win.end() ? kPosInf : wb->second.hi;
    long Thi = detail::kernel_factor_Thi(f, {varA, varB});

    std::vector<int> vars = f.vars();
    for (int v : {varA, varB})
        if (!std::binary_search(vars.begin(), vars.end(), v)) {
            vars.push_back(v);
            std::sort(vars.begin(), vars.end());
        }
    Series<C> out(f.scale(), vars);
    out.set_truncated(f.truncated());
    for (int v : vars) {
        if (f.has_var(v) && v != varA && v != varB) {
            out.set_valid(v, f.valid_of(v));
            out.set_gsupp(v, f.gsupp_of(v));
        }
    }
    for (const LinearBand& b : f.bands()) out.add_band(b);
    Interval gA = f.has_var(varA) ? f.gsupp_of(varA) : Interval{0, 0};
    Interval gB = f.has_var(varB) ? f.gsupp_of(varB) : Interval{0, 0};
    if (finite_binom) {
        out.set_gsupp(varA, Interval{sat_add(gA.lo, 0), sat_add(gA.hi, aS)});
        out.set_gsupp(varB, Interval{gB.lo, sat_add(gB.hi, aS)});
    } else {
        out.set_gsupp(varA, Interval{kNegInf, sat_add(gA.hi, aS)});
        out.set_gsupp(varB, Interval{gB.lo, kPosInf});
    }
    int pA = out.var_pos(varA), pB = out.var_pos(varB);
    int fA = f.has_var(varA) ? f.var_pos(varA) : -1;
    int fB = f.has_var(varB) ? f.var_pos(varB) : -1;
    for (const auto& [k, c] : f.terms()) {
        const long ua = fA >= 0 ? k[fA] : 0;
        const long ub = fB >= 0 ? k[fB] : 0;
        for (long j = 0;; ++j) {
            if (finite_binom && j * S > aS) break;
            long qb = ub + j * S;
            if (qb > bhi) { out.set_truncated(true); break; }
            long qa = ua + aS - j * S;
            Rat bc = binomial_coeff(alpha, j);
            if (signB < 0 && (j & 1)) bc = -bc;
            if (bc == 0) continue;
            if (wa != win.end() && qa > wa->second.hi) {
                out.set_truncated(true);
                continue;
            }
            ExpKey nk = zero_key();
            for (size_t i = 0; i < f.vars().size(); ++i) {
                int v = f.vars()[i];
                if (v == varA || v == varB) continue;
                nk[out.var_pos(v)] = k[i];
            }
            detail::check_exp_range(qa);
            detail::check_exp_range(qb);
            nk[pA] = static_cast<int16_t>(qa);
            nk[pB] = static_cast<int16_t>(qb);
            out.add_term(nk, coeff_scaled(c, Cyc(bc)));
        }
    }
    Interval ivA{kNegInf, wa != win.end() ? wa->second.hi : kPosInf};
    Interval ivB{kNegInf, bhi};
    if (Thi != kPosInf) {
        long outThi = sat_add(Thi, aS);
        // protect only tuples that can carry nonzero values: bound the other
        // variable by its output support when its validity is unbounded
        long effB = std::min(ivB.hi, out.gsupp_of(varB).hi);
        long effA = std::min(ivA.hi, out.gsupp_of(varA).hi);
        if (shrink_var == varB) ivB.hi = std::min(ivB.hi, sat_add(outThi, -effA));
        else ivA.hi = std::min(ivA.hi, sat_add(outThi, -effB));
    }
    out.set_valid(varA, ivA);
    out.set_valid(varB, ivB);
    return out;
}

/// out = varC^{-1} delta(arg) * arg^alpha * f with arg = (varA+signB*varB)/varC,
/// expanded in nonnegative powers of varB, exact on the window. With
/// sign_per_n, delta-sum term n gains a factor (-1)^n (the
/// z0^{-1}delta((y0-x0)/(-z0)) kernel). Finite windows required for varC
/// (both ends) and varB (above); winA optional. The kernel is homogeneous
/// of total degree -1.
template <class C>
Series<C> mul_delta_kernel(const Series<C>& f, int varC, int varA, int varB, const Rat& alpha,
                           int signB, bool sign_per_n, const Window& win, int shrink_var = -1) {
    const long S = f.scale();
    Rat alphaS = alpha * S;
    if (denominator(alphaS) != 1)
        throw std::invalid_argument("mul_delta_kernel: alpha incompatible with scale");
    const long aS = static_cast<long>(numerator(alphaS));
    auto wc = win.find(varC);
    auto wa = win.find(varA);
    auto wb = win.find(varB);
    if (wc == win.end() || wc->second.lo == kNegInf || wc->second.hi == kPosInf)
        throw std::invalid_argument("mul_delta_kernel: finite window required for " +
                                    var_name(varC));
    if (wb == win.end() || wb->second.hi == kPosInf)
        throw std::invalid_argument("mul_delta_kernel: finite upper window required for " +
                                    var_name(varB));
    long Thi = detail::kernel_factor_Thi(f, {varC, varA, varB});

    std::vector<int> vars = f.vars();
    for (int v : {varC, varA, varB})
        if (!std::binary_search(vars.begin(), vars.end(), v)) {
            vars.push_back(v);
            std::sort(vars.begin(), vars.end());
        }
    Series<C> out(f.scale(), vars);
    out.set_truncated(true);  // a delta kernel always drops terms outside varC's window
    for (int v : vars) {
        if (f.has_var(v) && v != varA && v != varB && v != varC) {
            out.set_valid(v, f.valid_of(v));
            out.set_gsupp(v, f.gsupp_of(v));
        }
    }
    for (const LinearBand& b : f.bands()) out.add_band(b);
    Interval gB = f.has_var(varB) ? f.gsupp_of(varB) : Interval{0, 0};
    out.set_gsupp(varC, Interval{kNegInf, kPosInf});
    out.set_gsupp(varA, Interval{kNegInf, kPosInf});
    out.set_gsupp(varB, Interval{gB.lo, kPosInf});

    int pA = out.var_pos(varA), pB = out.var_pos(varB), pC = out.var_pos(varC);
    int fA = f.has_var(varA) ? f.var_pos(varA) : -1;
    int fB = f.has_var(varB) ? f.var_pos(varB) : -1;
    int fC = f.has_var(varC) ? f.var_pos(varC) : -1;
    for (const auto& [k, c] : f.terms()) {
        const long ua = fA >= 0 ? k[fA] : 0;
        const long ub = fB >= 0 ? k[fB] : 0;
        const long uc = fC >= 0 ? k[fC] : 0;
        // qc = uc - (n+1)S - aS
        for (long qc = wc->second.lo; qc <= wc->second.hi; ++qc) {
            long numer = uc - aS - qc;
            if (numer % S != 0) continue;
            long n = numer / S - 1;
            Rat na = Rat(n) + alpha;
            bool neg_n = sign_per_n && (((n % 2) + 2) % 2 == 1);
            for (long j = 0;; ++j) {
                long qb = ub + j * S;
                if (qb > wb->second.hi) { break; }
                long qa = ua + (n - j) * S + aS;
                Rat bc = binomial_coeff(na, j);
                if (signB < 0 && (j & 1)) bc = -bc;
                if (neg_n) bc = -bc;
                if (bc == 0) continue;
                if (wa != win.end() && qa > wa->second.hi) continue;
                ExpKey nk = zero_key();
                for (size_t i = 0; i < f.vars().size(); ++i) {
                    int v = f.vars()[i];
                    if (v == varA || v == varB || v == varC) continue;
                    nk[out.var_pos(v)] = k[i];
                }
                detail::check_exp_range(qa);
                detail::check_exp_range(qb);
                detail::check_exp_range(qc);
                nk[pA] = static_cast<int16_t>(qa);
                nk[pB] = static_cast<int16_t>(qb);
                nk[pC] = static_cast<int16_t>(qc);
                out.add_term(nk, coeff_scaled(c, Cyc(bc)));
            }
        }
    }
    Interval ivC = wc->second;
    Interval ivA{kNegInf, wa != win.end() ? wa->second.hi : kPosInf};
    Interval ivB{kNegInf, wb->second.hi};
    if (Thi != kPosInf) {
        long outThi = sat_add(Thi, -S);  // kernel homogeneous of degree -1
        if (shrink_var == varA)
            ivA.hi = std::min(ivA.hi, sat_add(outThi, -sat_add(ivB.hi, ivC.hi)));
        else if (shrink_var == varB)
            ivB.hi = std::min(ivB.hi, sat_add(outThi, -sat_add(ivA.hi, ivC.hi)));
        else
            ivC.hi = std::min(ivC.hi, sat_add(outThi, -sat_add(ivA.hi, ivB.hi)));
        if (shrink_var != varA && ivA.hi == kPosInf)
            throw std::invalid_argument(
                "mul_delta_kernel: finite upper window required for " + var_name(varA) +
                " when the factor is incomplete above");
    }
    out.set_valid(varC, ivC);
    out.set_valid(varA, ivA);
    out.set_valid(varB, ivB);
    return out;
}

// --- standalone scalar builders --------------------------------------------

/// one-term series
inline CycSeries monomial(long scale, const std::vector<int>& vars,
                          const std::vector<long>& exps, const Cyc& c) {
    std::vector<int> sorted = vars;
    std::sort(sorted.begin(), sorted.end());
    CycSeries s(scale, sorted);
    ExpKey k = zero_key();
    for (size_t i = 0; i < vars.size(); ++i) {
        detail::check_exp_range(exps[i]);
        k[s.var_pos(vars[i])] = static_cast<int16_t>(exps[i]);
    }
    s.add_term(k, c);
    s.mark_exact();
    return s;
}

inline CycSeries constant_series(long scale, const Cyc& c) {
    CycSeries s(scale, {});
    if (!c.is_zero()) s.add_term(zero_key(), c);
    return s;
}

/// (varA + signB*varB)^alpha as a windowed scalar series.
CycSeries binomial_series(long scale, int varA, int varB, const Rat& alpha, int signB,
                          const Window& win);

/// varC^{-1} delta((varA+signB*varB)/varC) * ((varA+signB*varB)/varC)^alpha.
/// With (varC,varA,varB,signB)=(z0,z1,z2,-) this is the left side of the
/// basic delta identity.
CycSeries delta_kernel_series(long scale, int varC, int varA, int varB, const Rat& alpha,
                              int signB, const Window& win);

/// Two-variable kernel varX^{-1} delta(varY/varX) (varY/varX)^alpha
///   = sum_n varX^{-n-1-alpha} varY^{n+alpha}.
CycSeries ratio_delta_series(long scale, int varX, int varY, const Rat& alpha,
                             const Window& win);

// --- comparison ------------------------------------------------------------

struct Mismatch {
    ExpKey key;
    std::string where;
    std::string lhs, rhs;
};

struct CompareOutcome {
    long checked = 0;   // nonzero coefficient comparisons performed
    long skipped = 0;   // visible in only one trusted region or flagged invalid
    std::vector<Mismatch> failures;
    bool pass() const { return failures.empty() && checked > 0; }
};

std::string key_str(const ExpKey& k, const std::vector<int>& vars, long scale);

/// Compare a and b over the union of stored supports inside the window and
/// both trusted regions. Zero-vs-zero points are not counted.
template <class A>
CompareOutcome compare_series(const Series<A>& a, const Series<A>& b, const Window& win,
                              size_t max_failures = 16) {
    auto [scale, vars] = detail::merged_shape(a, b);
    Series<A> ra = detail::reshape(a, scale, vars);
    Series<A> rb = detail::reshape(b, scale, vars);
    CompareOutcome out;
    auto in_win = [&](const ExpKey& k) {
        for (size_t i = 0; i < vars.size(); ++i) {
            auto it = win.find(vars[i]);
            if (it != win.end() && !it->second.contains(k[i])) return false;
        }
        return true;
    };
    std::map<ExpKey, int> keys;
    for (const auto& [k, c] : ra.terms()) keys[k] |= 1;
    for (const auto& [k, c] : rb.terms()) keys[k] |= 2;
    static const A kZero{};
    for (const auto& [k, mask] : keys) {
        if (!in_win(k)) continue;
        if (!ra.in_trusted_region(k) || !rb.in_trusted_region(k)) {
            out.skipped++;
            continue;
        }
        const A* ca = (mask & 1) ? &ra.terms().at(k) : &kZero;
        const A* cb = (mask & 2) ? &rb.terms().at(k) : &kZero;
        CoeffCompare cc = coeff_compare(*ca, *cb);
        if (!cc.comparable) {
            out.skipped++;
            continue;
        }
        out.checked++;
        if (!cc.equal) {
            if (out.failures.size() < max_failures)
                out.failures.push_back(
                    Mismatch{k, key_str(k, vars, scale), coeff_str(*ca), coeff_str(*cb)});
        }
    }
    return out;
}

/// Count of trusted stored nonzero coefficients inside the window; the
/// series-is-zero check used by locality searches.
template <class A>
std::pair<bool, long> is_zero_with_count(const Series<A>& s, const Window& win) {
    long visible = 0;
    bool zero = true;
    for (const auto& [k, c] : s.terms()) {
        bool inw = true;
        for (size_t i = 0; i < s.vars().size(); ++i) {
            auto it = win.find(s.vars()[i]);
            if (it != win.end() && !it->second.contains(k[i])) { inw = false; break; }
        }
        if (!inw || !s.in_trusted_region(k)) continue;
        CoeffZero p = coeff_zero_probe(c);
        if (!p.visible) continue;
        visible++;
        if (!p.zero) zero = false;
    }
    return {zero, visible};
}

}  // namespace torva

#endif
