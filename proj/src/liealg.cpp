#include "torva/liealg.hpp"

#include <functional>
#include <numeric>
#include <stdexcept>

namespace torva {

bool gvec_is_zero(const GVec& v) {
    for (const Cyc& c : v)
        if (!c.is_zero()) return false;
    return true;
}

GVec gvec_add(const GVec& a, const GVec& b) {
    GVec r(a);
    for (size_t i = 0; i < r.size(); ++i) r[i] += b[i];
    return r;
}

GVec gvec_scaled(const GVec& a, const Cyc& s) {
    GVec r(a);
    for (Cyc& c : r) c *= s;
    return r;
}

CMatrix mat_mul(const CMatrix& a, const CMatrix& b) {
    size_t n = a.size(), m = b[0].size(), k = b.size();
    CMatrix r(n, std::vector<Cyc>(m, Cyc(0)));
    for (size_t i = 0; i < n; ++i)
        for (size_t l = 0; l < k; ++l) {
            if (a[i][l].is_zero()) continue;
            for (size_t j = 0; j < m; ++j) {
                if (b[l][j].is_zero()) continue;
                r[i][j] += a[i][l] * b[l][j];
            }
        }
    return r;
}

GVec mat_apply(const CMatrix& m, const GVec& v) {
    GVec r(m.size(), Cyc(0));
    for (size_t i = 0; i < m.size(); ++i)
        for (size_t j = 0; j < v.size(); ++j) {
            if (m[i][j].is_zero() || v[j].is_zero()) continue;
            r[i] += m[i][j] * v[j];
        }
    return r;
}

CMatrix mat_identity(int n) {
    CMatrix r(n, std::vector<Cyc>(n, Cyc(0)));
    for (int i = 0; i < n; ++i) r[i][i] = Cyc(1);
    return r;
}

bool mat_eq(const CMatrix& a, const CMatrix& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].size() != b[i].size()) return false;
        for (size_t j = 0; j < a[i].size(); ++j)
            if (a[i][j] != b[i][j]) return false;
    }
    return true;
}

namespace {

// Reduced row echelon form; returns pivot column per row. Deterministic.
std::vector<int> echelon(CMatrix& m) {
    std::vector<int> pivots;
    size_t row = 0;
    size_t cols = m.empty() ? 0 : m[0].size();
    for (size_t col = 0; col < cols && row < m.size(); ++col) {
        size_t sel = row;
        while (sel < m.size() && m[sel][col].is_zero()) ++sel;
        if (sel == m.size()) continue;
        std::swap(m[row], m[sel]);
        Cyc inv = m[row][col].inverse();
        for (size_t j = col; j < cols; ++j) m[row][j] *= inv;
        for (size_t i = 0; i < m.size(); ++i) {
            if (i == row || m[i][col].is_zero()) continue;
            Cyc f = m[i][col];
            for (size_t j = col; j < cols; ++j) m[i][j] -= f * m[row][j];
        }
        pivots.push_back(static_cast<int>(col));
        ++row;
    }
    return pivots;
}

}  // namespace

std::vector<GVec> kernel_basis(const CMatrix& m_in) {
    CMatrix m = m_in;
    size_t cols = m.empty() ? 0 : m[0].size();
    std::vector<int> pivots = echelon(m);
    std::vector<bool> is_pivot(cols, false);
    for (int p : pivots) is_pivot[p] = true;
    std::vector<GVec> basis;
    for (size_t free_col = 0; free_col < cols; ++free_col) {
        if (is_pivot[free_col]) continue;
        GVec v(cols, Cyc(0));
        v[free_col] = Cyc(1);
        for (size_t r = 0; r < pivots.size(); ++r)
            v[pivots[r]] = -m[r][free_col];
        basis.push_back(std::move(v));
    }
    return basis;
}

int mat_rank(CMatrix m) { return static_cast<int>(echelon(m).size()); }

GVec mat_solve(CMatrix m, GVec v) {
    size_t cols = m.empty() ? 0 : m[0].size();
    for (size_t i = 0; i < m.size(); ++i) m[i].push_back(v[i]);
    std::vector<int> pivots = echelon(m);
    GVec x(cols, Cyc(0));
    for (size_t r = 0; r < pivots.size(); ++r) {
        if (pivots[r] == static_cast<int>(cols))
            throw std::domain_error("mat_solve: inconsistent system");
        x[pivots[r]] = m[r][cols];
    }
    return x;
}

CMatrix mat_inverse(const CMatrix& m) {
    int n = static_cast<int>(m.size());
    CMatrix aug = m;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) aug[i].push_back(i == j ? Cyc(1) : Cyc(0));
    std::vector<int> pivots = echelon(aug);
    int left_pivots = 0;
    for (int p : pivots)
        if (p < n) ++left_pivots;
    if (left_pivots != n) throw std::domain_error("mat_inverse: singular matrix");
    CMatrix r(n, std::vector<Cyc>(n, Cyc(0)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) r[i][j] = aug[i][n + j];
    return r;
}

GradedLieAlgebra::GradedLieAlgebra(std::vector<std::string> labels,
                                   std::vector<std::vector<GVec>> bracket_table, CMatrix form)
    : labels_(std::move(labels)), bracket_(std::move(bracket_table)), form_(std::move(form)) {
    size_t n = labels_.size();
    if (bracket_.size() != n || form_.size() != n)
        throw std::invalid_argument("GradedLieAlgebra: table sizes mismatch dimension");
}

GVec GradedLieAlgebra::basis_vector(int i) const {
    GVec v(dim(), Cyc(0));
    v[i] = Cyc(1);
    return v;
}

GVec GradedLieAlgebra::bracket(const GVec& a, const GVec& b) const {
    GVec r(dim(), Cyc(0));
    for (int i = 0; i < dim(); ++i) {
        if (a[i].is_zero()) continue;
        for (int j = 0; j < dim(); ++j) {
            if (b[j].is_zero()) continue;
            Cyc f = a[i] * b[j];
            const GVec& br = bracket_[i][j];
            for (int k = 0; k < dim(); ++k)
                if (!br[k].is_zero()) r[k] += f * br[k];
        }
    }
    return r;
}

Cyc GradedLieAlgebra::form(const GVec& a, const GVec& b) const {
    Cyc r(0);
    for (int i = 0; i < dim(); ++i) {
        if (a[i].is_zero()) continue;
        for (int j = 0; j < dim(); ++j) {
            if (b[j].is_zero()) continue;
            r += a[i] * b[j] * form_[i][j];
        }
    }
    return r;
}

void GradedLieAlgebra::validate() const {
    int n = dim();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (!gvec_is_zero(gvec_add(bracket_[i][j], bracket_[j][i])))
                throw std::invalid_argument("Lie algebra: bracket not antisymmetric at (" +
                                            labels_[i] + "," + labels_[j] + ")");
            if (form_[i][j] != form_[j][i])
                throw std::invalid_argument("Lie algebra: form not symmetric");
        }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                GVec s = bracket(bracket_[i][j], basis_vector(k));
                s = gvec_add(s, bracket(bracket_[j][k], basis_vector(i)));
                s = gvec_add(s, bracket(bracket_[k][i], basis_vector(j)));
                if (!gvec_is_zero(s))
                    throw std::invalid_argument("Lie algebra: Jacobi identity fails at (" +
                                                labels_[i] + "," + labels_[j] + "," +
                                                labels_[k] + ")");
                if (form(bracket_[i][j], basis_vector(k)) !=
                    form(basis_vector(i), bracket_[j][k]))
                    throw std::invalid_argument("Lie algebra: form not invariant");
            }
}

namespace {

using IMat = std::vector<std::vector<Rat>>;

IMat unit_mat(int n, int i, int j) {
    IMat m(n, std::vector<Rat>(n, Rat(0)));
    m[i][j] = 1;
    return m;
}

IMat mat_sub2(const IMat& a, const IMat& b) {
    IMat r = a;
    for (size_t i = 0; i < r.size(); ++i)
        for (size_t j = 0; j < r.size(); ++j) r[i][j] -= b[i][j];
    return r;
}

IMat mat_mul2(const IMat& a, const IMat& b) {
    size_t n = a.size();
    IMat r(n, std::vector<Rat>(n, Rat(0)));
    for (size_t i = 0; i < n; ++i)
        for (size_t l = 0; l < n; ++l) {
            if (a[i][l] == 0) continue;
            for (size_t j = 0; j < n; ++j) r[i][j] += a[i][l] * b[l][j];
        }
    return r;
}

IMat commutator2(const IMat& a, const IMat& b) { return mat_sub2(mat_mul2(a, b), mat_mul2(b, a)); }

Rat trace_prod(const IMat& a, const IMat& b) {
    Rat t(0);
    size_t n = a.size();
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) t += a[i][j] * b[j][i];
    return t;
}

struct Preset {
    std::vector<std::string> labels;
    std::vector<IMat> rep;
    std::function<GVec(const IMat&)> coords;
};

Preset sl2_preset() {
    Preset p;
    p.labels = {"e", "h", "f"};
    p.rep = {unit_mat(2, 0, 1), mat_sub2(unit_mat(2, 0, 0), unit_mat(2, 1, 1)), unit_mat(2, 1, 0)};
    p.coords = [](const IMat& x) {
        return GVec{Cyc(x[0][1]), Cyc(x[0][0]), Cyc(x[1][0])};
    };
    return p;
}

Preset sl3_preset() {
    Preset p;
    p.labels = {"e1", "e2", "e12", "f1", "f2", "f12", "h1", "h2"};
    p.rep = {unit_mat(3, 0, 1), unit_mat(3, 1, 2), unit_mat(3, 0, 2),
             unit_mat(3, 1, 0), unit_mat(3, 2, 1), unit_mat(3, 2, 0),
             mat_sub2(unit_mat(3, 0, 0), unit_mat(3, 1, 1)),
             mat_sub2(unit_mat(3, 1, 1), unit_mat(3, 2, 2))};
    p.coords = [](const IMat& x) {
        return GVec{Cyc(x[0][1]), Cyc(x[1][2]), Cyc(x[0][2]), Cyc(x[1][0]),
                    Cyc(x[2][1]), Cyc(x[2][0]), Cyc(x[0][0]), Cyc(x[0][0] + x[1][1])};
    };
    return p;
}

Preset get_preset(const std::string& name) {
    if (name == "sl2") return sl2_preset();
    if (name == "sl3") return sl3_preset();
    throw std::invalid_argument("unknown algebra preset: " + name);
}

}  // namespace

GradedLieAlgebra build_simple_algebra(const std::string& preset) {
    Preset p = get_preset(preset);
    int n = static_cast<int>(p.labels.size());
    std::vector<std::vector<GVec>> table(n, std::vector<GVec>(n));
    CMatrix form(n, std::vector<Cyc>(n, Cyc(0)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            table[i][j] = p.coords(commutator2(p.rep[i], p.rep[j]));
            form[i][j] = Cyc(trace_prod(p.rep[i], p.rep[j]));
        }
    GradedLieAlgebra g(p.labels, std::move(table), std::move(form));
    g.validate();
    return g;
}

namespace {

// Matrix of X -> P X P^{-1} on the preset basis, over Q(w).
CMatrix adjoint_matrix(const Preset& p, const CMatrix& pm) {
    int n = static_cast<int>(p.labels.size());
    int d = static_cast<int>(pm.size());
    CMatrix pinv = mat_inverse(pm);
    CMatrix result(n, std::vector<Cyc>(n, Cyc(0)));
    for (int j = 0; j < n; ++j) {
        CMatrix x(d, std::vector<Cyc>(d, Cyc(0)));
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) x[a][b] = Cyc(p.rep[j][a][b]);
        CMatrix y = mat_mul(mat_mul(pm, x), pinv);
        // coords is entry-linear; apply it through unit matrices
        GVec col(n, Cyc(0));
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                if (y[a][b].is_zero()) continue;
                GVec contrib = p.coords(unit_mat(d, a, b));
                for (int i = 0; i < n; ++i)
                    if (!contrib[i].is_zero()) col[i] += y[a][b] * contrib[i];
            }
        for (int i = 0; i < n; ++i) result[i][j] = col[i];
    }
    return result;
}

}  // namespace

CMatrix preset_automorphism(const GradedLieAlgebra& g, const std::string& name) {
    int n = g.dim();
    if (name == "identity") return mat_identity(n);
    std::string preset = n == 3 ? "sl2" : n == 8 ? "sl3" : "";
    if (preset.empty())
        throw std::invalid_argument("preset_automorphism: no presets for this algebra");
    Preset p = get_preset(preset);
    int d = preset == "sl2" ? 2 : 3;
    if (name == "chevalley") {
        CMatrix result(n, std::vector<Cyc>(n, Cyc(0)));
        for (int j = 0; j < n; ++j) {
            const IMat& x = p.rep[j];
            IMat y(x.size(), std::vector<Rat>(x.size(), Rat(0)));
            for (size_t a = 0; a < x.size(); ++a)
                for (size_t b = 0; b < x.size(); ++b) y[a][b] = -x[b][a];
            GVec col = p.coords(y);
            for (int i = 0; i < n; ++i) result[i][j] = col[i];
        }
        return result;
    }
    CMatrix pm(d, std::vector<Cyc>(d, Cyc(0)));
    if (name == "sign") {
        for (int i = 0; i < d; ++i) pm[i][i] = (i == 1) ? Cyc(-1) : Cyc(1);
    } else if (name == "rot4" && d == 2) {
        pm[0][0] = Cyc::root(4);
        pm[1][1] = Cyc(1);
    } else if (name == "zeta3" && d == 3) {
        for (int i = 0; i < d; ++i) pm[i][i] = Cyc::root(3, i);
    } else {
        throw std::invalid_argument("unknown automorphism preset: " + name);
    }
    return adjoint_matrix(p, pm);
}

long AutomorphismFamily::lcm_order() const {
    long l = 1;
    for (long o : orders_) l = l / std::gcd(l, o) * o;
    return l;
}

long AutomorphismFamily::Nplus() const {
    long p = 1;
    for (size_t i = 1; i < orders_.size(); ++i) p *= orders_[i];
    return p;
}

AutomorphismFamily validate_family(const GradedLieAlgebra& g, const std::vector<CMatrix>& autos) {
    if (autos.empty()) throw std::invalid_argument("validate_family: need at least sigma_0");
    int n = g.dim();
    std::vector<long> orders;
    for (size_t s = 0; s < autos.size(); ++s) {
        const CMatrix& m = autos[s];
        if (static_cast<int>(m.size()) != n)
            throw std::invalid_argument("validate_family: matrix size mismatch");
        for (const auto& row : m)
            if (static_cast<int>(row.size()) != n)
                throw std::invalid_argument("validate_family: matrix size mismatch");
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                GVec lhs = mat_apply(m, g.bracket_basis(i, j));
                GVec rhs =
                    g.bracket(mat_apply(m, g.basis_vector(i)), mat_apply(m, g.basis_vector(j)));
                for (int k = 0; k < n; ++k)
                    if (lhs[k] != rhs[k])
                        throw std::invalid_argument("validate_family: sigma_" + std::to_string(s) +
                                                    " does not preserve the bracket");
            }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (g.form(mat_apply(m, g.basis_vector(i)), mat_apply(m, g.basis_vector(j))) !=
                    g.form_basis(i, j))
                    throw std::invalid_argument("validate_family: sigma_" + std::to_string(s) +
                                                " does not preserve the form");
        CMatrix pow = m;
        long order = 1;
        CMatrix id = mat_identity(n);
        while (!mat_eq(pow, id)) {
            pow = mat_mul(pow, m);
            ++order;
            if (order > kMaxCyclotomicOrder)
                throw std::invalid_argument("validate_family: sigma_" + std::to_string(s) +
                                            " order exceeds the cap");
        }
        orders.push_back(order);
    }
    for (size_t a = 0; a < autos.size(); ++a)
        for (size_t b = a + 1; b < autos.size(); ++b)
            if (!mat_eq(mat_mul(autos[a], autos[b]), mat_mul(autos[b], autos[a])))
                throw std::invalid_argument(
                    "validate_family: automorphisms do not commute (sigma_" + std::to_string(a) +
                    ", sigma_" + std::to_string(b) + ")");
    return AutomorphismFamily(autos, orders);
}

GradedDecomposition decompose(const GradedLieAlgebra& g, const AutomorphismFamily& fam) {
    GradedDecomposition d;
    int n = g.dim();
    int r = fam.r();
    std::vector<long> res(r + 1, 0);
    bool done = false;
    while (!done) {
        CMatrix stacked;
        for (int i = 0; i <= r; ++i) {
            Cyc ev = Cyc::root(fam.order(i), res[i]);
            const CMatrix& m = fam.sigma(i);
            for (int row = 0; row < n; ++row) {
                std::vector<Cyc> rr(n);
                for (int col = 0; col < n; ++col)
                    rr[col] = m[row][col] - (row == col ? ev : Cyc(0));
                stacked.push_back(std::move(rr));
            }
        }
        std::vector<GVec> comp = kernel_basis(stacked);
        if (!comp.empty()) {
            std::vector<int>& ids = d.component_members[res];
            for (GVec& v : comp) {
                ids.push_back(static_cast<int>(d.adapted.size()));
                d.residues.push_back(res);
                d.adapted.push_back(std::move(v));
            }
        }
        int pos = r;
        while (pos >= 0) {
            if (++res[pos] < fam.order(pos)) break;
            res[pos] = 0;
            --pos;
        }
        done = pos < 0;
    }
    if (static_cast<int>(d.adapted.size()) != n)
        throw std::logic_error("decompose: eigenspace dimensions do not sum to dim g");
    d.from_adapted.assign(n, std::vector<Cyc>(n, Cyc(0)));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) d.from_adapted[i][j] = d.adapted[j][i];
    d.to_adapted = mat_inverse(d.from_adapted);
    d.bracket_ad.assign(n, std::vector<GVec>(n));
    d.form_ad.assign(n, std::vector<Cyc>(n, Cyc(0)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            d.bracket_ad[i][j] = mat_apply(d.to_adapted, g.bracket(d.adapted[i], d.adapted[j]));
            d.form_ad[i][j] = g.form(d.adapted[i], d.adapted[j]);
        }
    return d;
}

bool grading_contained(const GradedLieAlgebra& g, const AutomorphismFamily& fam,
                       const GradedDecomposition& d) {
    (void)g;
    int n = d.dim();
    int r = fam.r();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            std::vector<long> target(r + 1);
            for (int t = 0; t <= r; ++t)
                target[t] = (d.residues[i][t] + d.residues[j][t]) % fam.order(t);
            for (int k = 0; k < n; ++k)
                if (!d.bracket_ad[i][j][k].is_zero() && d.residues[k] != target) return false;
        }
    return true;
}

std::vector<long> GradedDecomposition::residue_sum(const std::vector<long>& a,
                                                   const std::vector<long>& b,
                                                   const std::vector<long>& orders) const {
    std::vector<long> r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = (a[i] + b[i]) % orders[i];
    return r;
}

namespace {

GVec project_by_characters(const GradedLieAlgebra& g, const AutomorphismFamily& fam,
                           const GVec& a, int first, const std::vector<long>& exps) {
    int n = g.dim();
    int count = static_cast<int>(exps.size());
    if (count == 0) return a;
    long group = 1;
    for (int i = 0; i < count; ++i) group *= fam.order(first + i);
    GVec acc(n, Cyc(0));
    std::vector<long> j(count, 0);
    bool done = false;
    while (!done) {
        GVec img = a;
        Cyc chi(1);
        for (int i = 0; i < count; ++i) {
            for (long t = 0; t < j[i]; ++t) img = mat_apply(fam.sigma(first + i), img);
            chi *= Cyc::root(fam.order(first + i), -(exps[i] * j[i]));
        }
        acc = gvec_add(acc, gvec_scaled(img, chi));
        int pos = count - 1;
        while (pos >= 0) {
            if (++j[pos] < fam.order(first + pos)) break;
            j[pos] = 0;
            --pos;
        }
        done = pos < 0;
    }
    return gvec_scaled(acc, Cyc(Rat(1, group)));
}

}  // namespace

GVec project_component(const GradedLieAlgebra& g, const AutomorphismFamily& fam, const GVec& a,
                       const std::vector<long>& m) {
    if (static_cast<int>(m.size()) != fam.r())
        throw std::invalid_argument("project_component: weight length mismatch");
    return project_by_characters(g, fam, a, 1, m);
}

GVec project_component_full(const GradedLieAlgebra& g, const AutomorphismFamily& fam,
                            const GVec& a, long m0, const std::vector<long>& m) {
    if (static_cast<int>(m.size()) != fam.r())
        throw std::invalid_argument("project_component_full: weight length mismatch");
    std::vector<long> exps;
    exps.push_back(m0);
    for (long x : m) exps.push_back(x);
    return project_by_characters(g, fam, a, 0, exps);
}

}  // namespace torva
