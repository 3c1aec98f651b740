#include "torva/toroidal.hpp"

#include <sstream>

namespace torva {

bool ToroidalElement::is_zero() const {
    if (!central_.is_zero()) return false;
    for (const auto& [m, v] : terms_)
        if (!gvec_is_zero(v)) return false;
    return true;
}

void ToroidalElement::add_mode(const TorMode& m, const GVec& coeffs) {
    if (gvec_is_zero(coeffs)) return;
    auto it = terms_.find(m);
    if (it == terms_.end()) terms_.emplace(m, coeffs);
    else {
        it->second = gvec_add(it->second, coeffs);
        if (gvec_is_zero(it->second)) terms_.erase(it);
    }
}

namespace {
void check_shape(const ToroidalElement& a, const ToroidalElement& b) {
    if (a.gdim() == 0 || b.gdim() == 0) return;  // zero of any shape
    if (a.gdim() != b.gdim() || a.denom() != b.denom())
        throw std::invalid_argument("ToroidalElement: incompatible shapes");
}
}  // namespace

ToroidalElement ToroidalElement::operator+(const ToroidalElement& o) const {
    check_shape(*this, o);
    ToroidalElement r = gdim_ ? *this : o;
    const ToroidalElement& other = gdim_ ? o : *this;
    if (&r != &other) {
        for (const auto& [m, v] : other.terms_) r.add_mode(m, v);
        r.central_ += other.central_;
    }
    return r;
}

ToroidalElement ToroidalElement::operator-() const {
    ToroidalElement r(gdim_, denom_);
    for (const auto& [m, v] : terms_) r.terms_.emplace(m, gvec_scaled(v, Cyc(-1)));
    r.central_ = -central_;
    return r;
}

ToroidalElement ToroidalElement::scaled(const Cyc& s) const {
    ToroidalElement r(gdim_, denom_);
    if (s.is_zero()) return r;
    for (const auto& [m, v] : terms_) {
        GVec sv = gvec_scaled(v, s);
        if (!gvec_is_zero(sv)) r.terms_.emplace(m, std::move(sv));
    }
    r.central_ = central_ * s;
    return r;
}

bool ToroidalElement::operator==(const ToroidalElement& o) const {
    return (*this - o).is_zero();
}

std::string ToroidalElement::str(const GradedLieAlgebra* g) const {
    if (is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, v] : terms_) {
        if (gvec_is_zero(v)) continue;
        if (!first) os << " + ";
        first = false;
        os << "(";
        bool f2 = true;
        for (size_t i = 0; i < v.size(); ++i) {
            if (v[i].is_zero()) continue;
            if (!f2) os << " + ";
            f2 = false;
            os << v[i].str() << "*";
            if (g) os << g->labels()[i];
            else os << "b" << i;
        }
        os << ") t0^";
        if (m.t0num % denom_ == 0) os << m.t0num / denom_;
        else os << "(" << m.t0num << "/" << denom_ << ")";
        for (size_t i = 0; i < m.t.size(); ++i) os << " t" << (i + 1) << "^" << m.t[i];
    }
    if (!central_.is_zero()) {
        if (!first) os << " + ";
        os << "(" << central_.str() << ")*c";
    }
    return os.str();
}

ToroidalElement bracket(const GradedLieAlgebra& g, const ToroidalElement& x,
                        const ToroidalElement& y) {
    check_shape(x, y);
    long denom = x.gdim() ? x.denom() : y.denom();
    ToroidalElement r(g.dim(), denom);
    for (const auto& [mx, vx] : x.terms()) {
        for (const auto& [my, vy] : y.terms()) {
            GVec br = g.bracket(vx, vy);
            TorMode m;
            m.t0num = mx.t0num + my.t0num;
            m.t.resize(mx.t.size());
            for (size_t i = 0; i < m.t.size(); ++i) m.t[i] = mx.t[i] + my.t[i];
            r.add_mode(m, br);
            if (m.t0num == 0 && std::all_of(m.t.begin(), m.t.end(), [](long v) { return v == 0; }))
                r.add_central(Cyc(Rat(mx.t0num, denom)) * g.form(vx, vy));
        }
    }
    return r;
}

ToroidalElement sigma_hat(const GradedLieAlgebra& g, const AutomorphismFamily& fam, int i,
                          const ToroidalElement& x) {
    (void)g;
    ToroidalElement r(x.gdim(), x.denom());
    for (const auto& [m, v] : x.terms()) {
        long chi_exp = i == 0 ? m.t0num / (x.denom() / fam.N0())  // numerator in 1/N0 units
                              : m.t[i - 1];
        if (i == 0 && m.t0num % (x.denom() / fam.N0()) != 0)
            throw std::logic_error("sigma_hat: t0 exponent finer than 1/N0");
        Cyc factor = Cyc::root(fam.order(i), -chi_exp);
        r.add_mode(m, gvec_scaled(mat_apply(fam.sigma(i), v), factor));
    }
    r.add_central(x.central_part());
    return r;
}

ToroidalElement tau_component(const GradedLieAlgebra& g, const AutomorphismFamily& fam,
                              const GVec& a, long m0, const std::vector<long>& m) {
    GVec comp = project_component_full(g, fam, a, m0, m);
    ToroidalElement r(g.dim(), fam.N0());
    if (!gvec_is_zero(comp)) r.add_mode(TorMode{m0, m}, comp);
    return r;
}

ToroidalElement loop_component(const GradedLieAlgebra& g, const AutomorphismFamily& fam,
                               const GVec& a, long m0, const std::vector<long>& m) {
    GVec comp = project_component(g, fam, a, m);
    ToroidalElement r(g.dim(), fam.N0());
    if (!gvec_is_zero(comp)) r.add_mode(TorMode{m0 * fam.N0(), m}, comp);
    return r;
}

ModeFamily::ModeFamily(const GradedLieAlgebra* g, const AutomorphismFamily* fam,
                       const GradedDecomposition* dec, int adapted_index, Kind kind)
    : g_(g), fam_(fam), dec_(dec), adapted_(adapted_index), kind_(kind) {
    res0_ = dec->residues[adapted_index][0];
    res_.assign(dec->residues[adapted_index].begin() + 1, dec->residues[adapted_index].end());
}

const GVec& ModeFamily::element() const { return dec_->adapted[adapted_]; }

bool ModeFamily::supports(long t0num, const std::vector<long>& m) const {
    long n0 = fam_->N0();
    if (kind_ == Kind::Twisted) {
        if (((t0num - res0_) % n0 + n0) % n0 != 0) return false;
    } else {
        if (t0num % n0 != 0) return false;
    }
    for (size_t i = 0; i < m.size(); ++i) {
        long ni = fam_->order(static_cast<int>(i) + 1);
        if (((m[i] - res_[i]) % ni + ni) % ni != 0) return false;
    }
    return true;
}

ToroidalElement ModeFamily::mode(long t0num, const std::vector<long>& m) const {
    ToroidalElement r(g_->dim(), fam_->N0());
    if (!supports(t0num, m)) return r;
    r.add_mode(TorMode{t0num, m}, dec_->adapted[adapted_]);
    return r;
}

namespace {

/// Coefficient of the tau/loop current series of `elt` (extended by
/// linearity over residue components) at y0-exponent u = unum/N0 and
/// y-exponent w: the matching residue components tensored with
/// t0^{-u-1} t^{-w}.
ToroidalElement current_series_coefficient(const GradedLieAlgebra& g,
                                           const AutomorphismFamily& fam,
                                           const GradedDecomposition& dec, const GVec& elt,
                                           long unum, const std::vector<long>& w,
                                           ModeFamily::Kind kind) {
    long n0 = fam.N0();
    long t0num = -unum - n0;  // exponent of t0 in 1/N0 units for the mode at y0^{u}
    ToroidalElement r(g.dim(), n0);
    if (kind == ModeFamily::Kind::Untwisted && t0num % n0 != 0) return r;
    GVec coords = dec.to_adapted_coords(elt);
    GVec keep(g.dim(), Cyc(0));
    bool any = false;
    for (int i = 0; i < g.dim(); ++i) {
        if (coords[i].is_zero()) continue;
        const std::vector<long>& res = dec.residues[i];
        if (kind == ModeFamily::Kind::Twisted) {
            if (((t0num - res[0]) % n0 + n0) % n0 != 0) continue;
        }
        bool ok = true;
        for (size_t t = 0; t < w.size(); ++t) {
            long ni = fam.order(static_cast<int>(t) + 1);
            if (((-w[t] - res[t + 1]) % ni + ni) % ni != 0) { ok = false; break; }
        }
        if (!ok) continue;
        keep = gvec_add(keep, gvec_scaled(dec.adapted[i], coords[i]));
        any = true;
    }
    if (!any) return r;
    TorMode m;
    m.t0num = t0num;
    m.t.resize(w.size());
    for (size_t t = 0; t < w.size(); ++t) m.t[t] = -w[t];
    r.add_mode(m, keep);
    return r;
}

}  // namespace

CheckReport check_mode_commutator(const GradedLieAlgebra& g, const AutomorphismFamily& fam,
                                  const GradedDecomposition& dec, int a_adapted, int b_adapted,
                                  long t0_window, long weight_window, ModeFamily::Kind kind) {
    CheckReport rep;
    rep.identity = kind == ModeFamily::Kind::Twisted ? "mode_commutator_twisted"
                                                     : "mode_commutator_untwisted";
    rep.anchor = kind == ModeFamily::Kind::Twisted
                     ? "twisted current commutator with fractional delta factor"
                     : "untwisted current commutator";
    const long n0 = fam.N0();
    const int r = fam.r();
    ModeFamily A(&g, &fam, &dec, a_adapted, kind);
    ModeFamily B(&g, &fam, &dec, b_adapted, kind);
    const GVec& a = dec.adapted[a_adapted];
    const GVec& b = dec.adapted[b_adapted];
    const Cyc pairing = g.form(a, b);
    GVec ab = g.bracket(a, b);

    // enumerate weight vectors with |m_i| <= weight_window
    std::vector<std::vector<long>> weights;
    std::vector<long> cur(r, -weight_window);
    if (r == 0) weights.push_back({});
    else {
        bool done = false;
        while (!done) {
            weights.push_back(cur);
            int pos = r - 1;
            while (pos >= 0) {
                if (++cur[pos] <= weight_window) break;
                cur[pos] = -weight_window;
                --pos;
            }
            done = pos < 0;
        }
    }

    const long t0lim = t0_window * n0;  // |t0 exponent| <= t0_window
    auto a_t0_ok = [&](long p) {
        return kind == ModeFamily::Kind::Twisted ? ((p - A.res0()) % n0 + n0) % n0 == 0
                                                 : p % n0 == 0;
    };
    auto b_t0_ok = [&](long q) {
        return kind == ModeFamily::Kind::Twisted ? ((q - B.res0()) % n0 + n0) % n0 == 0
                                                 : q % n0 == 0;
    };

    for (const auto& m : weights) {
        bool in_support = A.supports(A.res0(), m) ||
                          (kind == ModeFamily::Kind::Untwisted && A.supports(0, m));
        if (!in_support) {
            // a^tau(x0, m) vanishes identically: every requested mode is zero
            for (long p = -t0lim; p <= t0lim; ++p) {
                if (!a_t0_ok(p)) continue;
                rep.checked++;
                if (!A.mode(p, m).is_zero())
                    rep.note_failure("mode(" + std::to_string(p) + ") at out-of-lattice m",
                                     A.mode(p, m).str(&g), "0");
            }
            continue;
        }
        for (long p = -t0lim; p <= t0lim; ++p) {
            if (!a_t0_ok(p)) continue;
            ToroidalElement am = A.mode(p, m);
            for (const auto& n : weights) {
                for (long q = -t0lim; q <= t0lim; ++q) {
                    if (!b_t0_ok(q)) continue;
                    ToroidalElement bn = B.mode(q, n);
                    ToroidalElement lhs = bracket(g, am, bn);
                    // right side at x0-exp -p/N0-1, y0-exp -q/N0-1, y-exp -n:
                    // loop part: components of [a,b] at y0-exp -(p+q)/N0-1,
                    // y-exp -(m+n); central part when q=-p, n=-m.
                    std::vector<long> mn(m.size());
                    for (size_t t = 0; t < m.size(); ++t) mn[t] = -(m[t] + n[t]);
                    ToroidalElement rhs = current_series_coefficient(
                        g, fam, dec, ab, -(p + q) - n0, mn, kind);
                    bool central_hit = (q == -p);
                    for (size_t t = 0; t < m.size() && central_hit; ++t)
                        central_hit = (n[t] == -m[t]);
                    if (central_hit)
                        rhs.add_central(Cyc(Rat(p, n0)) * pairing);
                    rep.checked++;
                    if (!(lhs == rhs)) {
                        std::ostringstream os;
                        os << "p=" << p << "/" << n0 << " m=(";
                        for (long v : m) os << v << ",";
                        os << ") q=" << q << "/" << n0 << " n=(";
                        for (long v : n) os << v << ",";
                        os << ")";
                        rep.note_failure(os.str(), lhs.str(&g), rhs.str(&g));
                    }
                }
            }
        }
    }
    return rep;
}

}  // namespace torva
