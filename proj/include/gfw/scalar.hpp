// Exact arithmetic in the value ring Q(zeta_N)[sqrt(q)].
//
// Every quantity the library computes -- character values, Gauss sums,
// Jacobi sums, gamma factors -- lives in the ring
//
//     R = Q(zeta_N)[s] / (s^2 - q),
//
// where N is a cyclotomic order chosen large enough for all roots of unity
// that can appear and q is a fixed odd prime power.  The square root s of q
// is formal: no complex embedding is chosen except for diagnostic printing
// and the floating-point cross-checks in the tests.
//
// Elements are stored as a + b*s with a, b in Q(zeta_N), each reduced
// modulo the N-th cyclotomic polynomial, so equality of coefficient
// vectors is equality in R.

#pragma once

#include <gmpxx.h>

#include <complex>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace gfw {

using Rat = mpq_class;

// Shared per-computation data: the cyclotomic order N, phi(N), the monic
// cyclotomic polynomial Phi_N, and the prime power q whose square root is
// adjoined.
class ScalarContext {
public:
    ScalarContext(long n, long q);

    long n() const { return n_; }
    long q() const { return q_; }
    long degree() const { return deg_; }  // phi(N)
    const std::vector<Rat>& cyclotomic() const { return phi_; }

private:
    long n_;
    long q_;
    long deg_;
    std::vector<Rat> phi_;  // coefficients of Phi_N, index = power, monic
};

using ScalarCtxPtr = std::shared_ptr<const ScalarContext>;

// N = lcm of the given orders and p: the smallest cyclotomic order that
// guarantees every root of unity of any of the listed orders, and all p-th
// roots (for additive characters), exists in Q(zeta_N).
long choose_cyclotomic_order(const std::vector<long>& orders, long p);

class Scalar {
public:
    Scalar() = default;  // unusable until assigned; ctx_ == nullptr

    static Scalar zero(const ScalarCtxPtr& ctx);
    static Scalar one(const ScalarCtxPtr& ctx);
    static Scalar integer(const ScalarCtxPtr& ctx, long v);
    static Scalar rational(const ScalarCtxPtr& ctx, const Rat& v);
    // zeta_order^power; requires order | N.
    static Scalar root_of_unity(const ScalarCtxPtr& ctx, long order, long power);
    // q^(j/2) for any integer j (negative allowed): q^(j/2) = q^floor(j/2) * s^(j mod 2).
    static Scalar q_half_power(const ScalarCtxPtr& ctx, long j);
    // sum_e counts[e] * zeta_N^e for a multiplicity vector of length N; the
    // workhorse of character-sum evaluation (one reduction instead of one
    // ring operation per summand).
    static Scalar root_combination(const ScalarCtxPtr& ctx,
                                   const std::vector<long long>& counts);

    const ScalarCtxPtr& ctx() const { return ctx_; }
    bool is_zero() const;

    Scalar operator+(const Scalar& o) const;
    Scalar operator-(const Scalar& o) const;
    Scalar operator-() const;
    Scalar operator*(const Scalar& o) const;
    Scalar& operator+=(const Scalar& o);
    Scalar& operator-=(const Scalar& o);
    Scalar& operator*=(const Scalar& o);
    bool operator==(const Scalar& o) const;
    bool operator!=(const Scalar& o) const { return !(*this == o); }

    // Exact inverse, found by solving z*w = 1 as a linear system over Q on
    // the 2*phi(N)-dimensional ring.  Throws std::domain_error when z is
    // zero or a non-invertible zero divisor.
    Scalar inverse() const;
    Scalar pow(long e) const;  // e may be negative (uses inverse)

    // Galois twist zeta_N -> zeta_N^m for gcd(m, N) = 1; s is fixed.
    // (Used only by tests for conjugation-style cross-checks.)
    Scalar galois(long m) const;

    // Evaluation under the embedding zeta_N -> exp(2*pi*i/N), s -> +sqrt(q).
    // Diagnostic only; never used as a source of truth.
    std::complex<double> to_complex() const;

    // Serialization: {n, a:[...], b:[...], q} with rationals as "p/q".
    std::string serialize() const;
    static Scalar deserialize(const ScalarCtxPtr& ctx, const std::string& text);

    std::string to_string() const;  // human-readable

    const std::vector<Rat>& a_part() const { return a_; }
    const std::vector<Rat>& b_part() const { return b_; }

private:
    Scalar(ScalarCtxPtr ctx, std::vector<Rat> a, std::vector<Rat> b);
    void check_compatible(const Scalar& o) const;

    ScalarCtxPtr ctx_;
    std::vector<Rat> a_;  // coefficients of the Q(zeta_N) part
    std::vector<Rat> b_;  // coefficients of the sqrt(q)*Q(zeta_N) part
};

}  // namespace gfw
