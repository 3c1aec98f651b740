#include "torva/scalars.hpp"

#include <map>
#include <mutex>
#include <numeric>
#include <sstream>

namespace torva {

Rat binomial_coeff(const Rat& alpha, long i) {
    if (i < 0) throw std::invalid_argument("binomial_coeff: negative index");
    Rat num(1);
    for (long j = 0; j < i; ++j) num *= alpha - Rat(j);
    Rat den(1);
    for (long j = 2; j <= i; ++j) den *= Rat(j);
    return num / den;
}

long euler_phi(long m) {
    if (m <= 0) throw std::invalid_argument("euler_phi: m must be positive");
    long result = m, n = m;
    for (long p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            while (n % p == 0) n /= p;
            result -= result / p;
        }
    }
    if (n > 1) result -= result / n;
    return result;
}

namespace {

// Exact division of integer polynomials, remainder must vanish.
std::vector<Int> poly_div_exact(std::vector<Int> num, const std::vector<Int>& den) {
    std::vector<Int> quot(num.size() >= den.size() ? num.size() - den.size() + 1 : 0, Int(0));
    while (num.size() >= den.size()) {
        if (num.back() == 0) { num.pop_back(); continue; }
        Int lead = num.back() / den.back();
        if (lead * den.back() != num.back())
            throw std::logic_error("poly_div_exact: inexact division");
        size_t shift = num.size() - den.size();
        quot[shift] = lead;
        for (size_t j = 0; j < den.size(); ++j) num[shift + j] -= lead * den[j];
        while (!num.empty() && num.back() == 0) num.pop_back();
    }
    for (const Int& c : num)
        if (c != 0) throw std::logic_error("poly_div_exact: nonzero remainder");
    return quot;
}

std::map<long, std::vector<Int>> g_cyclo_cache;
std::mutex g_cyclo_mutex;

std::vector<Int> compute_cyclotomic(long m);

const std::vector<Int>& cyclotomic_locked(long m) {
    auto it = g_cyclo_cache.find(m);
    if (it == g_cyclo_cache.end())
        it = g_cyclo_cache.emplace(m, compute_cyclotomic(m)).first;
    return it->second;
}

std::vector<Int> compute_cyclotomic(long m) {
    // Phi_m = (x^m - 1) / prod_{d | m, d < m} Phi_d
    std::vector<Int> num(m + 1, Int(0));
    num[0] = -1;
    num[m] = 1;
    for (long d = 1; d < m; ++d) {
        if (m % d != 0) continue;
        num = poly_div_exact(std::move(num), cyclotomic_locked(d));
    }
    return num;
}

// poly modulo the monic integer polynomial phi, over Q.
void reduce_mod(std::vector<Rat>& poly, const std::vector<Int>& phi) {
    const size_t deg = phi.size() - 1;
    while (poly.size() > deg) {
        Rat lead = poly.back();
        poly.pop_back();
        if (lead == 0) continue;
        size_t shift = poly.size() - deg;
        for (size_t j = 0; j < deg; ++j) poly[shift + j] -= lead * Rat(phi[j]);
    }
    poly.resize(deg, Rat(0));
}

long lcm_order(long a, long b) {
    long g = std::gcd(a, b);
    long l = a / g * b;
    if (l > kMaxCyclotomicOrder)
        throw std::domain_error("cyclotomic order " + std::to_string(l) +
                                " exceeds cap " + std::to_string(kMaxCyclotomicOrder));
    return l;
}

}  // namespace

const std::vector<Int>& cyclotomic_polynomial(long m) {
    if (m <= 0) throw std::invalid_argument("cyclotomic_polynomial: m must be positive");
    if (m > kMaxCyclotomicOrder)
        throw std::domain_error("cyclotomic order exceeds cap");
    std::lock_guard<std::mutex> lock(g_cyclo_mutex);
    return cyclotomic_locked(m);
}

Cyc Cyc::from_poly(long order, std::vector<Rat> poly) {
    reduce_mod(poly, cyclotomic_polynomial(order));
    return Cyc(order, std::move(poly));
}

Cyc Cyc::root(long m, long k) {
    if (m <= 0) throw std::invalid_argument("Cyc::root: order must be positive");
    k %= m;
    if (k < 0) k += m;
    std::vector<Rat> poly(k + 1, Rat(0));
    poly[k] = 1;
    return from_poly(m, std::move(poly));
}

bool Cyc::is_zero() const {
    for (const Rat& c : coeffs_)
        if (c != 0) return false;
    return true;
}

bool Cyc::is_rational() const {
    for (size_t j = 1; j < coeffs_.size(); ++j)
        if (coeffs_[j] != 0) return false;
    return true;
}

Rat Cyc::rational_value() const {
    if (!is_rational()) throw std::domain_error("Cyc: not a rational value");
    return coeffs_[0];
}

Cyc Cyc::embedded(long L) const {
    if (L == order_) return *this;
    if (L % order_ != 0) throw std::invalid_argument("Cyc::embedded: order must divide target");
    long step = L / order_;
    std::vector<Rat> poly(static_cast<size_t>((coeffs_.size() - 1) * step + 1), Rat(0));
    for (size_t j = 0; j < coeffs_.size(); ++j) poly[j * step] = coeffs_[j];
    return from_poly(L, std::move(poly));
}

Cyc Cyc::operator-() const {
    std::vector<Rat> c(coeffs_);
    for (Rat& x : c) x = -x;
    return Cyc(order_, std::move(c));
}

Cyc Cyc::operator+(const Cyc& o) const {
    if (order_ == o.order_) {
        std::vector<Rat> c(coeffs_);
        for (size_t j = 0; j < c.size(); ++j) c[j] += o.coeffs_[j];
        return Cyc(order_, std::move(c));
    }
    long L = lcm_order(order_, o.order_);
    return embedded(L) + o.embedded(L);
}

Cyc Cyc::operator-(const Cyc& o) const { return *this + (-o); }

Cyc Cyc::operator*(const Cyc& o) const {
    if (order_ == 1) {  // rational scaling fast path
        if (coeffs_[0] == 0) return Cyc(o.order_, std::vector<Rat>(o.coeffs_.size(), Rat(0)));
        std::vector<Rat> c(o.coeffs_);
        for (Rat& x : c) x *= coeffs_[0];
        return Cyc(o.order_, std::move(c));
    }
    if (o.order_ == 1) return o * *this;
    if (order_ == o.order_) {
        std::vector<Rat> prod(coeffs_.size() + o.coeffs_.size() - 1, Rat(0));
        for (size_t i = 0; i < coeffs_.size(); ++i) {
            if (coeffs_[i] == 0) continue;
            for (size_t j = 0; j < o.coeffs_.size(); ++j) {
                if (o.coeffs_[j] == 0) continue;
                prod[i + j] += coeffs_[i] * o.coeffs_[j];
            }
        }
        return from_poly(order_, std::move(prod));
    }
    long L = lcm_order(order_, o.order_);
    return embedded(L) * o.embedded(L);
}

Cyc Cyc::inverse() const {
    if (is_zero()) throw std::domain_error("Cyc: inversion of zero");
    if (is_rational()) return Cyc(Rat(1) / coeffs_[0]);
    // Extended Euclid in Q[x] against Phi_M (irreducible, so gcd = 1).
    const std::vector<Int>& phi_int = cyclotomic_polynomial(order_);
    std::vector<Rat> r0(phi_int.begin(), phi_int.end());
    std::vector<Rat> r1(coeffs_);
    while (!r1.empty() && r1.back() == 0) r1.pop_back();
    std::vector<Rat> s0{Rat(0)}, s1{Rat(1)};  // s tracks the coefficient of *this

    auto trim = [](std::vector<Rat>& p) { while (!p.empty() && p.back() == 0) p.pop_back(); };
    while (r1.size() > 1) {
        // divide r0 by r1
        std::vector<Rat> q(r0.size() >= r1.size() ? r0.size() - r1.size() + 1 : 1, Rat(0));
        std::vector<Rat> rem(r0);
        while (rem.size() >= r1.size() && !rem.empty()) {
            if (rem.back() == 0) { rem.pop_back(); continue; }
            Rat lead = rem.back() / r1.back();
            size_t shift = rem.size() - r1.size();
            q[shift] = lead;
            for (size_t j = 0; j < r1.size(); ++j) rem[shift + j] -= lead * r1[j];
            trim(rem);
        }
        // s_next = s0 - q * s1
        std::vector<Rat> s2(std::max(s0.size(), q.size() + s1.size()), Rat(0));
        for (size_t j = 0; j < s0.size(); ++j) s2[j] = s0[j];
        for (size_t i = 0; i < q.size(); ++i) {
            if (q[i] == 0) continue;
            for (size_t j = 0; j < s1.size(); ++j) s2[i + j] -= q[i] * s1[j];
        }
        trim(s2);
        r0 = std::move(r1);
        r1 = std::move(rem);
        s0 = std::move(s1);
        s1 = std::move(s2);
        if (r1.empty()) throw std::logic_error("Cyc::inverse: gcd degenerated");
        if (r1.size() == 1) break;
    }
    // r1 is a nonzero constant: inverse = s1 / r1[0]
    for (Rat& c : s1) c /= r1[0];
    return from_poly(order_, std::move(s1));
}

Cyc Cyc::pow(long e) const {
    if (e < 0) return inverse().pow(-e);
    Cyc result(Rat(1));
    Cyc base(*this);
    while (e > 0) {
        if (e & 1) result *= base;
        base *= base;
        e >>= 1;
    }
    return result;
}

bool Cyc::operator==(const Cyc& o) const {
    if (order_ == o.order_) return coeffs_ == o.coeffs_;
    long L = lcm_order(order_, o.order_);
    return embedded(L).coeffs_ == o.embedded(L).coeffs_;
}

std::string rat_str(const Rat& r) {
    std::ostringstream os;
    os << numerator(r);
    if (denominator(r) != 1) os << "/" << denominator(r);
    return os.str();
}

Rat rat_parse(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return Rat(Int(s));
    Int num(s.substr(0, slash));
    Int den(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("rat_parse: zero denominator");
    return Rat(num, den);
}

std::string Cyc::str() const {
    if (is_rational()) return rat_str(coeffs_[0]);
    std::ostringstream os;
    bool first = true;
    for (size_t j = 0; j < coeffs_.size(); ++j) {
        if (coeffs_[j] == 0) continue;
        if (!first) os << " + ";
        first = false;
        os << rat_str(coeffs_[j]);
        if (j > 0) os << "*w" << order_ << "^" << j;
    }
    if (first) os << "0";
    return os.str();
}

}  // namespace torva
