#include "torva/repn.hpp"

#include <algorithm>
#include <sstream>

namespace torva {

VecC vec_add(const VecC& a, const VecC& b) {
    VecC r;
    r.valid = a.valid && b.valid;
    r.entries.reserve(a.entries.size() + b.entries.size());
    size_t i = 0, j = 0;
    while (i < a.entries.size() || j < b.entries.size()) {
        if (j == b.entries.size() ||
            (i < a.entries.size() && a.entries[i].first < b.entries[j].first)) {
            r.entries.push_back(a.entries[i++]);
        } else if (i == a.entries.size() || b.entries[j].first < a.entries[i].first) {
            r.entries.push_back(b.entries[j++]);
        } else {
            Cyc sum = a.entries[i].second + b.entries[j].second;
            if (!sum.is_zero()) r.entries.emplace_back(a.entries[i].first, std::move(sum));
            ++i;
            ++j;
        }
    }
    return r;
}

VecC vec_scaled(const VecC& a, const Cyc& s) {
    VecC r;
    r.valid = a.valid;
    if (s.is_zero()) return r;
    r.entries.reserve(a.entries.size());
    for (const auto& [i, c] : a.entries) {
        Cyc v = c * s;
        if (!v.is_zero()) r.entries.emplace_back(i, std::move(v));
    }
    return r;
}

std::string coeff_str(const VecC& v) {
    std::ostringstream os;
    if (!v.valid) os << "[invalid]";
    if (v.entries.empty()) os << "0";
    bool first = true;
    for (const auto& [i, c] : v.entries) {
        if (!first) os << " + ";
        first = false;
        os << "(" << c.str() << ")*[" << i << "]";
    }
    return os.str();
}

TruncatedModule::TruncatedModule(const GradedLieAlgebra* g, const AutomorphismFamily* fam,
                                 const GradedDecomposition* dec, ModuleKind kind,
                                 const Rat& level, long degree_cap_num, long weight_box)
    : g_(g), fam_(fam), dec_(dec), kind_(kind), level_(level),
      degree_cap_num_(degree_cap_num), weight_box_(weight_box) {
    if (degree_cap_num_ < fam->N0() && kind == ModuleKind::LoopVacuum)
        throw std::invalid_argument(
            "TruncatedModule: degree cap below 1 cannot hold the degree-one seed copy of g");
    if (degree_cap_num_ < 0 || weight_box_ < 0)
        throw std::invalid_argument("TruncatedModule: caps must be nonnegative");
    enumerate_basis();
}

bool TruncatedModule::gen_less(const Generator& a, const Generator& b) const {
    // t0-degree descending, then t-weight lexicographic, then adapted index
    long da = -a.t0num, db = -b.t0num;
    if (da != db) return da > db;
    if (a.t != b.t) return a.t < b.t;
    return a.adapted < b.adapted;
}

bool TruncatedModule::mode_compatible(int adapted, long t0num, const std::vector<long>& t) const {
    const long n0 = fam_->N0();
    const std::vector<long>& res = dec_->residues[adapted];
    if (kind_ == ModuleKind::TwistedVacuum) {
        if (((t0num - res[0]) % n0 + n0) % n0 != 0) return false;
    } else {
        if (t0num % n0 != 0) return false;
    }
    for (size_t i = 0; i < t.size(); ++i) {
        long ni = fam_->order(static_cast<int>(i) + 1);
        if (((t[i] - res[i + 1]) % ni + ni) % ni != 0) return false;
    }
    return true;
}

int TruncatedModule::marker_id(const AdMode& m) const {
    auto key = std::make_tuple(m.adapted, m.t0num, m.t);
    auto it = marker_ids_.find(key);
    if (it == marker_ids_.end())
        it = marker_ids_.emplace(key, -static_cast<int>(marker_ids_.size()) - 1).first;
    return it->second;
}

int TruncatedModule::find_generator(const AdMode& m) const {
    Generator probe{m.adapted, m.t0num, m.t};
    auto it = std::lower_bound(generators_.begin(), generators_.end(), probe,
                               [this](const Generator& x, const Generator& y) {
                                   return gen_less(x, y);
                               });
    if (it == generators_.end()) return -1;
    if (it->adapted == m.adapted && it->t0num == m.t0num && it->t == m.t)
        return static_cast<int>(it - generators_.begin());
    return -1;
}

void TruncatedModule::enumerate_basis() {
    const long n0 = fam_->N0();
    const int r = fam_->r();
    // all weight vectors with |t_i| <= weight_box of the right residue
    auto weights_for = [&](const std::vector<long>& res) {
        std::vector<std::vector<long>> acc;
        std::vector<long> cur(r);
        std::function<void(int)> rec = [&](int pos) {
            if (pos == r) {
                acc.push_back(cur);
                return;
            }
            long ni = fam_->order(pos + 1);
            long rr = res[pos + 1] % ni;
            long start = -weight_box_;
            while (((start - rr) % ni + ni) % ni != 0) ++start;
            for (long v = start; v <= weight_box_; v += ni) {
                cur[pos] = v;
                rec(pos + 1);
            }
        };
        rec(0);
        return acc;
    };
    for (long t0num = -1; t0num >= -degree_cap_num_; --t0num) {
        for (int a = 0; a < dec_->dim(); ++a) {
            const std::vector<long>& res = dec_->residues[a];
            if (kind_ == ModuleKind::TwistedVacuum) {
                if (((t0num - res[0]) % n0 + n0) % n0 != 0) continue;
            } else {
                if (t0num % n0 != 0) continue;
            }
            for (const auto& t : weights_for(res)) generators_.push_back({a, t0num, t});
        }
    }
    std::sort(generators_.begin(), generators_.end(),
              [this](const Generator& x, const Generator& y) { return gen_less(x, y); });

    int nseeds = kind_ == ModuleKind::LoopVacuum ? dec_->dim() + 1 : 1;
    seed_index_.assign(kind_ == ModuleKind::LoopVacuum ? dec_->dim() : 0, -1);
    // enumerate monomials: non-decreasing generator sequences within the box
    std::vector<int> stack;
    std::function<void(int, long, std::vector<long>&)> rec = [&](int min_gen, long deg,
                                                                 std::vector<long>& wt) {
        for (int seed = 0; seed < nseeds; ++seed) {
            long seed_deg = (kind_ == ModuleKind::LoopVacuum && seed > 0) ? n0 : 0;
            if (deg + seed_deg > degree_cap_num_) continue;
            bool wt_ok = true;
            for (long w : wt)
                if (w < -weight_box_ || w > weight_box_) wt_ok = false;
            if (!wt_ok) continue;
            Monomial m;
            m.gens = stack;
            m.seed = seed;
            int idx = static_cast<int>(basis_.size());
            index_.emplace(m, idx);
            basis_.push_back(std::move(m));
            degree_.push_back(deg + seed_deg);
            weight_.push_back(wt);
            if (stack.empty()) {
                if (seed == 0) vacuum_ = idx;
                else seed_index_[seed - 1] = idx;
            }
        }
        for (int gi = min_gen; gi < static_cast<int>(generators_.size()); ++gi) {
            const Generator& gen = generators_[gi];
            long nd = deg - gen.t0num;
            if (nd > degree_cap_num_) continue;
            for (int i = 0; i < fam_->r(); ++i) wt[i] += gen.t[i];
            stack.push_back(gi);
            rec(gi, nd, wt);
            stack.pop_back();
            for (int i = 0; i < fam_->r(); ++i) wt[i] -= gen.t[i];
        }
    };
    std::vector<long> wt(fam_->r(), 0);
    rec(0, 0, wt);
}

int TruncatedModule::seed_index(int adapted) const {
    if (kind_ != ModuleKind::LoopVacuum)
        throw std::logic_error("seed_index: twisted vacuum has no g-seeds");
    return seed_index_.at(adapted);
}

std::optional<int> TruncatedModule::index_of(const Monomial& m) const {
    auto it = index_.find(m);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::string TruncatedModule::monomial_label(int i) const {
    const Monomial& m = basis_[i];
    std::ostringstream os;
    const long n0 = fam_->N0();
    for (int gi : m.gens) {
        const Generator& g = generators_[gi];
        os << "(a" << g.adapted << " t0^";
        if (g.t0num % n0 == 0) os << g.t0num / n0;
        else os << "(" << g.t0num << "/" << n0 << ")";
        for (size_t t = 0; t < g.t.size(); ++t)
            if (g.t[t] != 0) os << " t" << t + 1 << "^" << g.t[t];
        os << ")";
    }
    if (m.seed == 0) os << "|vac>";
    else os << "|a" << m.seed - 1 << ">";
    return os.str();
}

TruncatedModule::RawElement TruncatedModule::seed_action(const AdMode& x, int seed) const {
    RawElement out;
    if (kind_ == ModuleKind::TwistedVacuum) return out;  // tau^{>=0} kills the vacuum line
    if (seed == 0) return out;                           // modes annihilate C
    long n0 = fam_->N0();
    if (x.t0num % n0 != 0) throw std::logic_error("seed_action: fractional loop mode");
    long j = x.t0num / n0;
    int b = seed - 1;
    if (j == 0) {
        const GVec& br = dec_->bracket_ad[x.adapted][b];
        for (int k = 0; k < dec_->dim(); ++k) {
            if (br[k].is_zero()) continue;
            Monomial m;
            m.seed = k + 1;
            auto [it, ins] = out.emplace(m, br[k]);
            if (!ins) it->second += br[k];
        }
    } else if (j == 1) {
        Cyc c = dec_->form_ad[x.adapted][b] * Cyc(level_);
        if (!c.is_zero()) out.emplace(Monomial{}, c);
    }
    return out;
}

TruncatedModule::RawElement TruncatedModule::leftmul(const AdMode& x, const Monomial& m) const {
    RawElement out;
    auto accumulate = [&out](RawElement&& e, const Cyc& factor) {
        for (auto& [mono, c] : e) {
            Cyc v = c * factor;
            if (v.is_zero()) continue;
            auto [it, ins] = out.emplace(mono, v);
            if (!ins) {
                it->second += v;
                if (it->second.is_zero()) out.erase(it);
            }
        }
    };

    // Once a monomial went out of the generator table it stays invalid: any
    // further creation just prepends an id. Distinct modes get distinct ids
    // so that unrelated invalid paths can never cancel each other.
    if (!m.gens.empty() && m.gens.front() < 0) {
        int gi = x.t0num < 0 ? find_generator(x) : -1;
        Monomial nm = m;
        nm.gens.insert(nm.gens.begin(), gi >= 0 ? gi : marker_id(x));
        out.emplace(std::move(nm), Cyc(1));
        return out;
    }
    if (x.t0num < 0) {
        int gi = find_generator(x);
        if (gi < 0) {
            // Creation mode outside the generator table: every straightened
            // term keeps the mode, so the projection is invalid whatever
            // follows. Record it as a marker monomial right away.
            Monomial nm = m;
            nm.gens.insert(nm.gens.begin(), marker_id(x));
            out.emplace(std::move(nm), Cyc(1));
            return out;
        }
        if (m.gens.empty() || gi <= m.gens.front()) {
            Monomial nm = m;
            nm.gens.insert(nm.gens.begin(), gi);
            out.emplace(std::move(nm), Cyc(1));
            return out;
        }
    }
    if (m.gens.empty()) return seed_action(x, m.seed);

    // x g0 rest = g0 (x rest) + [x, g0] rest
    const Generator& g0 = generators_[m.gens.front()];
    Monomial rest = m;
    rest.gens.erase(rest.gens.begin());

    RawElement inner = leftmul(x, rest);
    AdMode g0m{g0.adapted, g0.t0num, g0.t};
    for (const auto& [mono, c] : inner) {
        RawElement lifted = leftmul(g0m, mono);
        accumulate(std::move(lifted), c);
    }

    // bracket term: [ad_x x t0^p t^s, ad_g0 x t0^q t^u]
    const GVec& br = dec_->bracket_ad[x.adapted][g0.adapted];
    AdMode y;
    y.t0num = x.t0num + g0.t0num;
    y.t.resize(x.t.size());
    for (size_t i = 0; i < x.t.size(); ++i) y.t[i] = x.t[i] + g0.t[i];
    for (int k = 0; k < dec_->dim(); ++k) {
        if (br[k].is_zero()) continue;
        y.adapted = k;
        accumulate(leftmul(y, rest), br[k]);
    }
    // central part of the bracket
    if (y.t0num == 0 && std::all_of(y.t.begin(), y.t.end(), [](long v) { return v == 0; })) {
        Cyc c = Cyc(Rat(x.t0num, fam_->N0())) * dec_->form_ad[x.adapted][g0.adapted] * Cyc(level_);
        if (!c.is_zero()) accumulate(RawElement{{rest, Cyc(1)}}, c);
    }
    return out;
}

VecC TruncatedModule::project(const RawElement& e) const {
    VecC out;
    std::map<int, Cyc> acc;
    for (const auto& [mono, c] : e) {
        if (c.is_zero()) continue;
        std::optional<int> idx;
        if (mono.gens.empty() || mono.gens.front() >= 0) idx = index_of(mono);
        if (!idx) {
            out.valid = false;
            continue;
        }
        auto [it, ins] = acc.emplace(*idx, c);
        if (!ins) it->second += c;
    }
    for (auto& [i, c] : acc)
        if (!c.is_zero()) out.entries.emplace_back(i, std::move(c));
    return out;
}

VecC TruncatedModule::act(const ToroidalElement& x, int i) const {
    VecC out;
    if (x.gdim() == 0) return out;
    if (x.denom() != fam_->N0() && !x.terms().empty())
        throw std::invalid_argument("act: element denominator mismatch");
    if (!x.central_part().is_zero()) {
        VecC id;
        id.entries.emplace_back(i, x.central_part() * Cyc(level_));
        out = vec_add(out, id);
    }
    for (const auto& [mode, v] : x.terms()) {
        GVec co = dec_->to_adapted_coords(v);
        for (int a = 0; a < dec_->dim(); ++a) {
            if (co[a].is_zero()) continue;
            if (!mode_compatible(a, mode.t0num, mode.t))
                throw std::invalid_argument(
                    "act: element has a component outside the acting algebra (residue-"
                    "incompatible mode)");
            VecC col;
            {
                std::lock_guard<std::mutex> lock(cache_mutex_);
                auto key = std::make_tuple(a, mode.t0num, mode.t, i);
                auto it = act_cache_.find(key);
                if (it != act_cache_.end()) {
                    col = it->second;
                } else {
                    AdMode am{a, mode.t0num, mode.t};
                    col = project(leftmul(am, basis_[i]));
                    act_cache_.emplace(key, col);
                }
            }
            out = vec_add(out, vec_scaled(col, co[a]));
        }
    }
    return out;
}

VecC TruncatedModule::act(const ToroidalElement& x, const VecC& v) const {
    VecC out;
    out.valid = v.valid;
    for (const auto& [i, c] : v.entries) out = vec_add(out, vec_scaled(act(x, i), c));
    return out;
}

std::vector<Cyc> TruncatedModule::lift_automorphism(int i) const {
    // Every adapted generator and seed is a sigma_i eigenvector with
    // eigenvalue w_{N_i}^{res_i}; the lift is diagonal on the PBW basis.
    std::vector<Cyc> diag(dim(), Cyc(1));
    for (int b = 0; b < dim(); ++b) {
        const Monomial& m = basis_[b];
        long e = 0;
        for (int gi : m.gens) e += dec_->residues[generators_[gi].adapted][i];
        if (kind_ == ModuleKind::LoopVacuum && m.seed > 0)
            e += dec_->residues[m.seed - 1][i];
        diag[b] = Cyc::root(fam_->order(i), e);
    }
    return diag;
}

std::map<long, int> TruncatedModule::graded_dimensions() const {
    std::map<long, int> table;
    for (int i = 0; i < dim(); ++i) table[degree_[i]]++;
    return table;
}

TruncatedModule induce_twisted_vacuum(const GradedLieAlgebra& g, const AutomorphismFamily& fam,
                                      const GradedDecomposition& dec, const Rat& level,
                                      long degree_cap_num, long weight_box) {
    return TruncatedModule(&g, &fam, &dec, ModuleKind::TwistedVacuum, level, degree_cap_num,
                           weight_box);
}

TruncatedModule induce_vacuum(const GradedLieAlgebra& g, const AutomorphismFamily& fam,
                              const GradedDecomposition& dec, const Rat& level,
                              long degree_cap_num, long weight_box) {
    return TruncatedModule(&g, &fam, &dec, ModuleKind::LoopVacuum, level, degree_cap_num,
                           weight_box);
}

}  // namespace torva
