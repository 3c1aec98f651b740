#include "torva/vertexops.hpp"

#include <sstream>

namespace torva {

MatC mat_add(const MatC& a, const MatC& b) {
    if (a.ncols == 0) return b;
    if (b.ncols == 0) return a;
    if (a.ncols != b.ncols) throw std::invalid_argument("mat_add: size mismatch");
    MatC r(a.ncols);
    for (int j = 0; j < a.ncols; ++j) r.cols[j] = vec_add(a.cols[j], b.cols[j]);
    return r;
}

MatC mat_scaled(const MatC& a, const Cyc& s) {
    MatC r(a.ncols);
    for (int j = 0; j < a.ncols; ++j) r.cols[j] = vec_scaled(a.cols[j], s);
    return r;
}

MatC mat_compose(const MatC& a, const MatC& b) {
    if (a.ncols == 0) return a;
    if (b.ncols == 0) return b;
    MatC r(b.ncols);
    for (int j = 0; j < b.ncols; ++j) {
        VecC acc;
        acc.valid = b.cols[j].valid;
        for (const auto& [i, c] : b.cols[j].entries) {
            if (i >= a.ncols) throw std::logic_error("mat_compose: index out of range");
            acc = vec_add(acc, vec_scaled(a.cols[i], c));
        }
        r.cols[j] = std::move(acc);
    }
    return r;
}

VecC mat_apply_vec(const MatC& a, const VecC& v) {
    VecC acc;
    acc.valid = v.valid;
    for (const auto& [i, c] : v.entries) {
        if (i >= a.ncols) throw std::logic_error("mat_apply_vec: index out of range");
        acc = vec_add(acc, vec_scaled(a.cols[i], c));
    }
    return acc;
}

bool mat_equal(const MatC& a, const MatC& b) {
    int n = std::max(a.ncols, b.ncols);
    for (int j = 0; j < n; ++j) {
        static const VecC kZero{};
        const VecC& ca = j < a.ncols ? a.cols[j] : kZero;
        const VecC& cb = j < b.ncols ? b.cols[j] : kZero;
        if (!(ca == cb)) return false;
    }
    return true;
}

std::string coeff_str(const MatC& m) {
    std::ostringstream os;
    os << "{";
    bool first = true;
    for (int j = 0; j < m.ncols; ++j) {
        if (coeff_is_zero(m.cols[j]) && m.cols[j].valid) continue;
        if (!first) os << "; ";
        first = false;
        os << j << ": " << coeff_str(m.cols[j]);
    }
    os << "}";
    return os.str();
}

VarSlot make_slot(const std::string& stem, int r) {
    VarSlot s;
    s.v0 = var_id(stem + "0");
    for (int i = 1; i <= r; ++i) s.vx.push_back(var_id(stem + std::to_string(i)));
    return s;
}

YeSlots make_ye_slots(int r) {
    YeSlots s;
    s.x0 = var_id("x0");
    s.y0 = var_id("y0");
    s.z0 = var_id("z0");
    for (int i = 1; i <= r; ++i) {
        s.z.push_back(var_id("z" + std::to_string(i)));
        s.y.push_back(var_id("y" + std::to_string(i)));
    }
    return s;
}

namespace {

// current-series term enumeration shared by the symbolic and matrix builders
template <class Emit>
void enumerate_current_terms(const ModeFamily& fm, const TruncatedModule& mod,
                             const VarSlot& slot, const Window& win, long scale, Emit&& emit) {
    const long n0 = mod.N0();
    if (scale % n0 != 0)
        throw std::invalid_argument("current_series: scale must be divisible by N0");
    const long f = scale / n0;
    auto wx0 = win.find(slot.v0);
    if (wx0 == win.end() || wx0->second.lo == kNegInf || wx0->second.hi == kPosInf)
        throw std::invalid_argument("current_series: finite window required for " +
                                    var_name(slot.v0));
    // x0 lattice: e0 = -t0num/n0 - 1 with t0num = res0 (mod n0) for the
    // twisted kind, or any multiple of n0 for the untwisted kind.
    std::vector<std::vector<long>> weight_choices;  // per lattice var
    for (size_t i = 0; i < slot.vx.size(); ++i) {
        auto wv = win.find(slot.vx[i]);
        if (wv == win.end())
            throw std::invalid_argument("current_series: window required for " +
                                        var_name(slot.vx[i]));
        long ni = mod.family().order(static_cast<int>(i) + 1);
        long res = fm.res()[i];
        std::vector<long> vals;
        // x-exponent = -m, m = res (mod N_i)
        for (long e = wv->second.lo; e <= wv->second.hi; ++e) {
            if (e % scale != 0) continue;
            long m = -e / scale;
            if (((m - res) % ni + ni) % ni == 0) vals.push_back(e);
        }
        weight_choices.push_back(std::move(vals));
    }
    std::vector<long> pickw(slot.vx.size(), 0);
    std::function<void(size_t)> rec = [&](size_t pos) {
        if (pos == slot.vx.size()) {
            for (long e0 = wx0->second.lo; e0 <= wx0->second.hi; ++e0) {
                if ((e0 % f) != 0) continue;
                long t0num = -(e0 / f) - n0;
                bool ok = fm.kind() == ModeFamily::Kind::Twisted
                              ? ((t0num - fm.res0()) % n0 + n0) % n0 == 0
                              : t0num % n0 == 0;
                if (!ok) continue;
                std::vector<long> m(slot.vx.size());
                for (size_t i = 0; i < m.size(); ++i) m[i] = -pickw[i] / scale;
                emit(e0, pickw, t0num, m);
            }
            return;
        }
        for (long e : weight_choices[pos]) {
            pickw[pos] = e;
            rec(pos + 1);
        }
    };
    rec(0);
}

void set_current_meta(const TruncatedModule& mod, const VarSlot& slot, const Window& win,
                      long scale, bool operator_semantics, std::vector<int> const& vars,
                      std::function<void(int, Interval, Interval)> setter) {
    (void)vars;
    const long n0 = mod.N0();
    const long f = scale / n0;
    // below this x0 exponent every mode annihilates the degree-capped module
    long band_lo = -mod.degree_cap_num() * f - scale;
    Interval wx0 = win.at(slot.v0);
    if (operator_semantics) {
        // truncated-operator semantics: stored modes are the whole truncated
        // action; the window must cover the annihilation threshold
        if (wx0.lo > band_lo)
            throw std::invalid_argument(
                "current series window must reach the annihilation threshold");
        setter(slot.v0, Interval{}, Interval{band_lo, wx0.hi});
    } else {
        Interval v{kNegInf, wx0.hi};
        if (wx0.lo > band_lo) v.lo = wx0.lo;
        setter(slot.v0, v, Interval{band_lo, kPosInf});
    }
    for (int vx : slot.vx) {
        Interval wv = win.at(vx);
        if (operator_semantics) setter(vx, Interval{}, wv);
        else setter(vx, wv, Interval{kNegInf, kPosInf});
    }
}

}  // namespace

CurrentSeries current_series(const ModeFamily& fm, const TruncatedModule& mod,
                             const VarSlot& slot, const Window& win) {
    const long scale = mod.N0();
    std::vector<int> vars{slot.v0};
    for (int v : slot.vx) vars.push_back(v);
    std::sort(vars.begin(), vars.end());
    CurrentSeries s(scale, vars);
    enumerate_current_terms(fm, mod, slot, win, scale,
                            [&](long e0, const std::vector<long>& we, long t0num,
                                const std::vector<long>& m) {
                                ExpKey k = zero_key();
                                k[s.var_pos(slot.v0)] = static_cast<int16_t>(e0);
                                for (size_t i = 0; i < slot.vx.size(); ++i)
                                    k[s.var_pos(slot.vx[i])] = static_cast<int16_t>(we[i]);
                                s.add_term(k, fm.mode(t0num, m));
                            });
    set_current_meta(mod, slot, win, scale, false, vars,
                     [&](int v, Interval val, Interval g) {
                         s.set_valid(v, val);
                         s.set_gsupp(v, g);
                     });
    return s;
}

OperatorSeries current_matrix_series(const ModeFamily& fm, const TruncatedModule& mod,
                                     const VarSlot& slot, const Window& win) {
    const long scale = mod.N0();
    std::vector<int> vars{slot.v0};
    for (int v : slot.vx) vars.push_back(v);
    std::sort(vars.begin(), vars.end());
    OperatorSeries s(scale, vars);
    enumerate_current_terms(
        fm, mod, slot, win, scale,
        [&](long e0, const std::vector<long>& we, long t0num, const std::vector<long>& m) {
            ToroidalElement x = fm.mode(t0num, m);
            if (x.is_zero()) return;
            MatC mat(mod.dim());
            bool nonzero = false;
            for (int j = 0; j < mod.dim(); ++j) {
                mat.cols[j] = mod.act(x, j);
                if (!coeff_is_zero(mat.cols[j])) nonzero = true;
            }
            if (!nonzero) return;
            ExpKey k = zero_key();
            k[s.var_pos(slot.v0)] = static_cast<int16_t>(e0);
            for (size_t i = 0; i < slot.vx.size(); ++i)
                k[s.var_pos(slot.vx[i])] = static_cast<int16_t>(we[i]);
            s.add_term(k, std::move(mat));
        });
    set_current_meta(mod, slot, win, scale, true, vars,
                     [&](int v, Interval val, Interval g) {
                         s.set_valid(v, val);
                         s.set_gsupp(v, g);
                     });
    return s;
}

OperatorSeries identity_series(const TruncatedModule& mod, const VarSlot& slot) {
    std::vector<int> vars{slot.v0};
    for (int v : slot.vx) vars.push_back(v);
    std::sort(vars.begin(), vars.end());
    OperatorSeries s(mod.N0(), vars);
    MatC id(mod.dim());
    for (int j = 0; j < mod.dim(); ++j) id.cols[j].entries.emplace_back(j, Cyc(1));
    s.add_term(zero_key(), std::move(id));
    s.mark_exact();
    return s;
}

VectorSeries vector_series_constant(long scale, const VecC& v) {
    VectorSeries s(scale, {});
    s.add_term(zero_key(), v);
    return s;
}

VectorSeries apply_current(const CurrentSeries& cur, const TruncatedModule& mod,
                           const VectorSeries& target) {
    for (int v : cur.vars())
        if (target.has_var(v) && !(target.gsupp_of(v) == Interval{0, 0}))
            throw std::invalid_argument("apply_current: shared variable " + var_name(v) +
                                        "; use the paired variant");
    return mul_series(cur, target,
                      [&mod](const ToroidalElement& x, const VecC& w) { return mod.act(x, w); });
}

namespace {

template <class CB, class Combine>
auto paired_apply_impl(const Series<ToroidalElement>* curSym, const Series<MatC>* curMat,
                       const VarSlot& from, const VarSlot& zslot, const VarSlot& yslot,
                       const Series<CB>& B_in, Combine&& combine) {
    Series<CB> B = fold_single_bands(B_in);
    // pair-substitute the current: x_i exponents land on (z_i, y_i)
    auto run = [&](const auto& cur) {
        auto sub = cur;
        for (size_t i = 0; i < from.vx.size(); ++i)
            sub = subst_pair(sub, from.vx[i], zslot.vx[i], yslot.vx[i]);
        // off-diagonal coefficients vanish exactly, so the y-side box is free
        for (size_t i = 0; i < from.vx.size(); ++i) {
            sub.set_valid(yslot.vx[i], Interval{});
            sub.set_gsupp(yslot.vx[i], Interval{kNegInf, kPosInf});
        }
        auto out = mul_series(sub, B, combine);
        // trusted region of the product (single-split structure):
        //   z_i within the current's window, y_i - z_i within B's trusted
        //   y-interval, everything else per the generic rules.
        for (size_t i = 0; i < from.vx.size(); ++i) {
            Interval zwin = cur.valid_of(from.vx[i]);
            out.set_valid(zslot.vx[i], zwin);
            out.set_gsupp(zslot.vx[i], Interval{kNegInf, kPosInf});
            out.set_valid(yslot.vx[i], Interval{});
            out.set_gsupp(yslot.vx[i], Interval{kNegInf, kPosInf});
            Interval by = B.has_var(yslot.vx[i]) ? B.valid_of(yslot.vx[i]) : Interval{0, 0};
            if (B.has_var(yslot.vx[i]) && !(B.gsupp_of(yslot.vx[i]) == Interval{0, 0})) {
                if (!by.full())
                    out.add_band(LinearBand{
                        {{yslot.vx[i], 1}, {zslot.vx[i], -1}}, by});
            } else {
                // B constant in y_i: the product is supported on the diagonal
                out.add_band(LinearBand{{{yslot.vx[i], 1}, {zslot.vx[i], -1}}, Interval{0, 0}});
            }
        }
        return out;
    };
    if constexpr (std::is_same_v<CB, VecC>) {
        (void)curMat;
        return run(*curSym);
    } else {
        if (curMat) return run(*curMat);
        throw std::logic_error("paired_apply_impl: matrix current required");
    }
}

}  // namespace

VectorSeries apply_current_paired(const CurrentSeries& cur, const VarSlot& from,
                                  const VarSlot& zslot, const VarSlot& yslot,
                                  const TruncatedModule& mod, const VectorSeries& B) {
    return paired_apply_impl<VecC>(
        &cur, nullptr, from, zslot, yslot, B,
        [&mod](const ToroidalElement& x, const VecC& w) { return mod.act(x, w); });
}

OperatorSeries apply_matrix_paired(const OperatorSeries& cur, const VarSlot& from,
                                   const VarSlot& zslot, const VarSlot& yslot,
                                   const TruncatedModule& mod, const OperatorSeries& B) {
    (void)mod;
    return paired_apply_impl<MatC>(nullptr, &cur, from, zslot, yslot, B,
                                   [](const MatC& a, const MatC& b) { return mat_compose(a, b); });
}

LocalityResult find_locality_order(const OperatorSeries& A, const VarSlot& slotA,
                                   const OperatorSeries& B, const VarSlot& slotB, int cap,
                                   const Window& win) {
    for (int v : A.vars())
        if (B.has_var(v))
            throw std::invalid_argument("find_locality_order: slots must be disjoint");
    auto compose = [](const MatC& a, const MatC& b) { return mat_compose(a, b); };
    OperatorSeries ab = mul_series(A, B, compose);
    OperatorSeries ba = mul_series(B, A, compose);
    OperatorSeries comm = sub(ab, ba);
    for (int k = 0;; ++k) {
        auto [zero, visible] = is_zero_with_count(comm, win);
        if (visible == 0)
            throw std::invalid_argument("find_locality_order: window too small, nothing visible");
        if (zero) return LocalityResult{k, visible};
        if (k == cap)
            throw std::domain_error("find_locality_order: not local within cap " +
                                    std::to_string(cap));
        comm = mul_binom(comm, slotA.v0, slotB.v0, Rat(1), -1, {});
    }
}

namespace {

// shared closed-form pipeline; CB is MatC or VecC
template <class CA, class CB, class Combine>
Series<CB> ye_closed_form(const Series<CA>& A, long a_class, const TruncatedModule& mod,
                          const Series<CB>& B, const YeSlots& slots, int k, const Window& win,
                          Combine&& combine) {
    const long n0 = mod.N0();
    VarSlot fromA{slots.x0, {}};
    VarSlot zsl{slots.z0, slots.z};
    VarSlot ysl{slots.y0, slots.y};
    for (size_t i = 0; i < slots.z.size(); ++i) fromA.vx.push_back(var_id("x" + std::to_string(i + 1)));
    Series<CB> P = [&] {
        if constexpr (std::is_same_v<CA, ToroidalElement>) {
            return paired_apply_impl<CB>(&A, nullptr, fromA, zsl, ysl, B, combine);
        } else {
            return paired_apply_impl<CB>(nullptr, &A, fromA, zsl, ysl, B, combine);
        }
    }();
    // (x0 - y0)^k
    P = mul_binom(P, slots.x0, slots.y0, Rat(k), -1, {});
    // x0^{j/N}
    long scale = P.scale();
    P = shift_var(P, slots.x0, a_class * (scale / n0));
    // substitute x0 = y0 + z0, nonnegative powers of z0
    P = subst_sum(P, slots.x0, slots.y0, slots.z0, win);
    // z0^{-k}
    P = shift_var(P, slots.z0, -static_cast<long>(k) * scale);
    // (y0 + z0)^{-j/N}, expanded in z0, corner-cut on y0
    if (a_class != 0)
        P = mul_binom(P, slots.y0, slots.z0, Rat(-a_class, n0), +1, win, slots.y0);
    return P;
}

}  // namespace

VectorSeries ye_generating_applied(const CurrentSeries& A, long a_class,
                                   const TruncatedModule& mod, const VectorSeries& B,
                                   const YeSlots& slots, int k, const Window& win) {
    return ye_closed_form(A, a_class, mod, B, slots, k, win,
                          [&mod](const ToroidalElement& x, const VecC& w) { return mod.act(x, w); });
}

OperatorSeries ye_generating_matrix(const OperatorSeries& A, long a_class,
                                    const TruncatedModule& mod, const OperatorSeries& B,
                                    const YeSlots& slots, int k, const Window& win) {
    return ye_closed_form(A, a_class, mod, B, slots, k, win,
                          [](const MatC& a, const MatC& b) { return mat_compose(a, b); });
}

OperatorSeries ye_generating_matrix_residue(const OperatorSeries& A, long a_class,
                                            const TruncatedModule& mod, const OperatorSeries& B,
                                            const YeSlots& slots, const Window& win) {
    const long n0 = mod.N0();
    VarSlot fromA{slots.x0, {}};
    VarSlot zsl{slots.z0, slots.z};
    VarSlot ysl{slots.y0, slots.y};
    for (size_t i = 0; i < slots.z.size(); ++i)
        fromA.vx.push_back(var_id("x" + std::to_string(i + 1)));
    auto compose = [](const MatC& a, const MatC& b) { return mat_compose(a, b); };
    OperatorSeries AB = paired_apply_impl<MatC>(nullptr, &A, fromA, zsl, ysl, B, compose);
    // B(y0,y) A(x0,zy): same paired structure, opposite composition order
    OperatorSeries BA = paired_apply_impl<MatC>(
        nullptr, &A, fromA, zsl, ysl, B,
        [](const MatC& a, const MatC& b) { return mat_compose(b, a); });
    // X = z0^{-1}delta((x0-y0)/z0) AB - z0^{-1}delta((y0-x0)/(-z0)) BA
    OperatorSeries X1 = mul_delta_kernel(AB, slots.z0, slots.x0, slots.y0, Rat(0), -1, false, win,
                                         slots.z0);
    OperatorSeries X2 = mul_delta_kernel(BA, slots.z0, slots.y0, slots.x0, Rat(0), -1, true, win,
                                         slots.z0);
    OperatorSeries X = sub(X1, X2);
    // ((x0 - z0)/y0)^{j/N} = y0^{-j/N} (x0 - z0)^{j/N}
    long scale = X.scale();
    if (a_class != 0) {
        X = mul_binom(X, slots.x0, slots.z0, Rat(a_class, n0), -1, win, slots.z0);
        X = shift_var(X, slots.y0, -a_class * (scale / n0));
    }
    return residue(X, slots.x0);
}

OperatorSeries extract_ye_mode(const OperatorSeries& G, const YeSlots& slots, long m0,
                               const std::vector<long>& m) {
    OperatorSeries s = coefficient_slice(G, slots.z0, (-m0 - 1) * G.scale());
    for (size_t i = 0; i < slots.z.size(); ++i)
        s = coefficient_slice(s, slots.z[i], -m[i] * G.scale());
    return fold_single_bands(s);
}

VectorSeries extract_ye_mode_applied(const VectorSeries& G, const YeSlots& slots, long m0,
                                     const std::vector<long>& m) {
    VectorSeries s = coefficient_slice(G, slots.z0, (-m0 - 1) * G.scale());
    for (size_t i = 0; i < slots.z.size(); ++i)
        s = coefficient_slice(s, slots.z[i], -m[i] * G.scale());
    return fold_single_bands(s);
}

// --- closure ---------------------------------------------------------------

namespace {

using Fingerprint = std::map<std::tuple<ExpKey, int, int>, Cyc>;

Fingerprint fingerprint_on_window(const OperatorSeries& s, const Window& win) {
    Fingerprint fp;
    for (const auto& [k, mat] : s.terms()) {
        bool inw = true;
        for (size_t i = 0; i < s.vars().size(); ++i) {
            auto it = win.find(s.vars()[i]);
            if (it != win.end() && !it->second.contains(k[i])) { inw = false; break; }
        }
        if (!inw) continue;
        if (!s.in_trusted_region(k))
            throw std::domain_error("closure fingerprint: window exceeds the trusted region");
        for (int j = 0; j < mat.ncols; ++j) {
            if (!mat.cols[j].valid)
                continue;
            for (const auto& [i, c] : mat.cols[j].entries)
                fp[{k, j, i}] = c;
        }
    }
    return fp;
}

// reduce fp against the echelon list; returns false when dependent
bool reduce_against(std::vector<Fingerprint>& echelon, Fingerprint fp) {
    for (const Fingerprint& row : echelon) {
        if (fp.empty()) break;
        auto pivot = row.begin()->first;
        auto it = fp.find(pivot);
        if (it == fp.end()) continue;
        Cyc factor = it->second / row.begin()->second;
        for (const auto& [key, val] : row) {
            auto jt = fp.find(key);
            if (jt == fp.end()) {
                fp.emplace(key, -factor * val);
            } else {
                jt->second -= factor * val;
                if (jt->second.is_zero()) fp.erase(jt);
            }
        }
    }
    if (fp.empty()) return false;
    echelon.push_back(std::move(fp));
    // keep echelon sorted by pivot for determinism
    std::sort(echelon.begin(), echelon.end(),
              [](const Fingerprint& a, const Fingerprint& b) {
                  return a.begin()->first < b.begin()->first;
              });
    return true;
}

}  // namespace

ClosureResult generate_closure(const std::vector<ClosureMember>& seeds,
                               const TruncatedModule& mod, const VarSlot& slot,
                               const Window& win, const ClosureOptions& opt) {
    ClosureResult res;
    YeSlots slots = make_ye_slots(mod.r());
    std::vector<Fingerprint> echelon;
    auto try_add = [&](std::string label, long cls, const OperatorSeries& s) -> bool {
        Fingerprint fp = fingerprint_on_window(s, win);
        if (fp.empty()) return false;
        if (!reduce_against(echelon, std::move(fp))) return false;
        res.members.emplace_back(std::move(label), cls, s);
        return true;
    };
    try_add("1", 0, identity_series(mod, slot));
    for (const ClosureMember& m : seeds) try_add(m.label, m.cls, m.series);

    // weight vectors tried for modes
    std::vector<std::vector<long>> weights;
    {
        std::vector<long> cur(mod.r(), -opt.weight_window);
        if (mod.r() == 0) weights.push_back({});
        bool done = mod.r() == 0;
        while (!done) {
            weights.push_back(cur);
            int pos = mod.r() - 1;
            while (pos >= 0) {
                if (++cur[pos] <= opt.weight_window) break;
                cur[pos] = -opt.weight_window;
                --pos;
            }
            done = pos < 0;
        }
    }

    size_t first_unprocessed = 0;
    for (int depth = 0; depth < opt.depth; ++depth) {
        size_t frontier_end = res.members.size();
        if (first_unprocessed == frontier_end) break;
        for (size_t ia = 0; ia < frontier_end; ++ia) {
            for (size_t ib = 0; ib < frontier_end; ++ib) {
                if (ia < first_unprocessed && ib < first_unprocessed) continue;
                if (static_cast<int>(res.members.size()) >= opt.member_cap) {
                    res.unclosed.push_back("member cap reached before (" +
                                           res.members[ia].label + " , " +
                                           res.members[ib].label + ")");
                    return res;
                }
                const ClosureMember& A = res.members[ia];
                const ClosureMember& B = res.members[ib];
                int k;
                try {
                    VarSlot slotB = make_slot("u", mod.r());
                    // rename B's variables to a disjoint slot for the search
                    OperatorSeries Bren = B.series;
                    Bren = rename_var(Bren, slot.v0, slotB.v0);
                    for (int i = 0; i < mod.r(); ++i)
                        Bren = rename_var(Bren, slot.vx[i], slotB.vx[i]);
                    Window lw = win;
                    for (int i = 0; i <= 0; ++i) {
                        lw[slotB.v0] = win.at(slot.v0);
                        for (int t = 0; t < mod.r(); ++t) lw[slotB.vx[t]] = win.at(slot.vx[t]);
                    }
                    k = find_locality_order(A.series, slot, Bren, slotB, opt.locality_cap, lw)
                            .order;
                } catch (const std::exception& e) {
                    res.unclosed.push_back("locality(" + A.label + ", " + B.label +
                                           "): " + e.what());
                    continue;
                }
                // rename members from the ambient slot to the pipeline slots
                OperatorSeries Ax = A.series;
                OperatorSeries By = B.series;
                By = rename_var(By, slot.v0, slots.y0);
                for (int i = 0; i < mod.r(); ++i)
                    By = rename_var(By, slot.vx[i], slots.y[i]);
                Window gw = win;
                gw[slots.y0] = win.at(slot.v0);
                gw[slots.z0] = win.at(slot.v0);
                for (int i = 0; i < mod.r(); ++i) {
                    gw[slots.y[i]] = win.at(slot.vx[i]);
                    gw[slots.z[i]] = win.at(slot.vx[i]);
                }
                std::optional<OperatorSeries> G;
                try {
                    G = ye_generating_matrix(Ax, A.cls, mod, By, slots, k, gw);
                } catch (const std::exception& e) {
                    res.unclosed.push_back("product(" + A.label + ", " + B.label + "): " +
                                           e.what());
                    continue;
                }
                for (long m0 = opt.mode_lo; m0 < k; ++m0) {
                    for (const auto& m : weights) {
                        std::ostringstream lbl;
                        lbl << "(" << A.label << ")_{" << m0 << ",(";
                        for (long v : m) lbl << v << ",";
                        lbl << ")}(" << B.label << ")";
                        try {
                            OperatorSeries s = extract_ye_mode(*G, slots, m0, m);
                            // back to the ambient slot names
                            s = rename_var(s, slots.y0, slot.v0);
                            for (int i = 0; i < mod.r(); ++i)
                                s = rename_var(s, slots.y[i], slot.vx[i]);
                            try_add(lbl.str(), (A.cls + B.cls) % mod.N0(), s);
                        } catch (const std::exception& e) {
                            res.unclosed.push_back(lbl.str() + ": " + e.what());
                        }
                    }
                }
            }
        }
        first_unprocessed = frontier_end;
    }
    return res;
}

long vector_class(const TruncatedModule& V, int v_index) {
    const Monomial& m = V.basis_monomial(v_index);
    const GradedDecomposition& dec = V.decomposition();
    long cls = 0;
    for (int gi : m.gens) cls += dec.residues[V.generators()[gi].adapted][0];
    if (V.kind() == ModuleKind::LoopVacuum && m.seed > 0) cls += dec.residues[m.seed - 1][0];
    return ((cls % V.N0()) + V.N0()) % V.N0();
}

OperatorSeries twisted_Y(const TruncatedModule& V, int v_index, const TruncatedModule& W,
                         const VarSlot& slot, const Window& win, const TwistedYOptions& opt) {
    if (V.kind() != ModuleKind::LoopVacuum || W.kind() != ModuleKind::TwistedVacuum)
        throw std::invalid_argument("twisted_Y: expects (loop vacuum, twisted vacuum)");
    const Monomial& mono = V.basis_monomial(v_index);
    YeSlots slots = make_ye_slots(W.r());

    OperatorSeries cur = [&] {
        if (mono.seed == 0) return identity_series(W, slot);
        ModeFamily fm(&W.algebra(), &W.family(), &W.decomposition(), mono.seed - 1,
                      ModeFamily::Kind::Twisted);
        return current_matrix_series(fm, W, slot, win);
    }();
    long cls = (mono.seed > 0) ? W.decomposition().residues[mono.seed - 1][0] : 0;

    // apply generators right-to-left: X_1 (X_2 (... seed))
    for (auto it = mono.gens.rbegin(); it != mono.gens.rend(); ++it) {
        const TruncatedModule::Generator& gen = V.generators()[*it];
        ModeFamily afm(&W.algebra(), &W.family(), &W.decomposition(), gen.adapted,
                       ModeFamily::Kind::Twisted);
        OperatorSeries A = current_matrix_series(afm, W, slot, win);
        long a_cls = W.decomposition().residues[gen.adapted][0];
        // locality order of the pair, searched on a disjoint copy
        VarSlot slotB = make_slot("u", W.r());
        OperatorSeries Bren = cur;
        Bren = rename_var(Bren, slot.v0, slotB.v0);
        for (int i = 0; i < W.r(); ++i) Bren = rename_var(Bren, slot.vx[i], slotB.vx[i]);
        Window lw = win;
        lw[slotB.v0] = win.at(slot.v0);
        for (int i = 0; i < W.r(); ++i) lw[slotB.vx[i]] = win.at(slot.vx[i]);
        int k = find_locality_order(A, slot, Bren, slotB, opt.locality_cap, lw).order;

        OperatorSeries By = cur;
        By = rename_var(By, slot.v0, slots.y0);
        for (int i = 0; i < W.r(); ++i) By = rename_var(By, slot.vx[i], slots.y[i]);
        Window gw = win;
        gw[slots.y0] = win.at(slot.v0);
        gw[slots.z0] = win.at(slot.v0);
        for (int i = 0; i < W.r(); ++i) {
            gw[slots.y[i]] = win.at(slot.vx[i]);
            gw[slots.z[i]] = win.at(slot.vx[i]);
        }
        OperatorSeries G = ye_generating_matrix(A, a_cls, W, By, slots, k, gw);
        long m0 = gen.t0num / V.N0();
        std::vector<long> m = gen.t;
        OperatorSeries next = extract_ye_mode(G, slots, m0, m);
        next = rename_var(next, slots.y0, slot.v0);
        for (int i = 0; i < W.r(); ++i) next = rename_var(next, slots.y[i], slot.vx[i]);
        cur = std::move(next);
        cls = (cls + a_cls) % W.N0();
    }
    (void)cls;
    return cur;
}

}  // namespace torva
