#ifndef TORVA_SCALARS_HPP
#define TORVA_SCALARS_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace torva {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

/// Largest cyclotomic order the library will build. All bundled scenarios
/// need lcm(N_0..N_r) <= 12; the cap just bounds runaway embeddings.
inline constexpr int kMaxCyclotomicOrder = 360;

/// Generalized binomial coefficient alpha*(alpha-1)*...*(alpha-i+1)/i!
Rat binomial_coeff(const Rat& alpha, long i);

long euler_phi(long m);

/// Coefficients of the m-th cyclotomic polynomial (degree phi(m), monic),
/// index j = coefficient of x^j. Cached; thread-safe.
const std::vector<Int>& cyclotomic_polynomial(long m);

/// An element of Q(omega_M), stored as a residue modulo the M-th cyclotomic
/// polynomial: coeffs()[j] multiplies omega_M^j for 0 <= j < phi(M).
///
/// Values are immutable after construction and safe to share across threads.
/// Mixed-order arithmetic embeds both operands into Q(omega_lcm) first; an
/// lcm beyond kMaxCyclotomicOrder throws.
class Cyc {
public:
    Cyc() : order_(1), coeffs_(1, Rat(0)) {}
    Cyc(const Rat& r) : order_(1), coeffs_(1, r) {}
    Cyc(long n) : order_(1), coeffs_(1, Rat(n)) {}
    Cyc(int n) : order_(1), coeffs_(1, Rat(n)) {}

    /// omega_M^k with omega_M the principal primitive M-th root of unity.
    static Cyc root(long m, long k = 1);

    long order() const { return order_; }
    const std::vector<Rat>& coeffs() const { return coeffs_; }

    bool is_zero() const;
    bool is_rational() const;
    /// Throws std::domain_error when the value is not rational.
    Rat rational_value() const;

    /// The same value expressed in Q(omega_L); requires order() | L.
    Cyc embedded(long L) const;

    Cyc operator-() const;
    Cyc operator+(const Cyc& o) const;
    Cyc operator-(const Cyc& o) const;
    Cyc operator*(const Cyc& o) const;
    Cyc& operator+=(const Cyc& o) { *this = *this + o; return *this; }
    Cyc& operator-=(const Cyc& o) { *this = *this - o; return *this; }
    Cyc& operator*=(const Cyc& o) { *this = *this * o; return *this; }

    /// Multiplicative inverse; throws std::domain_error on zero.
    Cyc inverse() const;
    Cyc operator/(const Cyc& o) const { return *this * o.inverse(); }

    Cyc pow(long e) const;

    bool operator==(const Cyc& o) const;
    bool operator!=(const Cyc& o) const { return !(*this == o); }

    std::string str() const;

private:
    Cyc(long order, std::vector<Rat> coeffs)
        : order_(order), coeffs_(std::move(coeffs)) {}

    static Cyc from_poly(long order, std::vector<Rat> poly);

    long order_;
    std::vector<Rat> coeffs_;
};

inline Cyc operator*(const Rat& r, const Cyc& c) { return Cyc(r) * c; }

std::string rat_str(const Rat& r);
Rat rat_parse(const std::string& s);

}  // namespace torva

#endif
