// Laurent polynomials and their ratios in one variable X over the exact
// value ring.  This is the value type of the symbolic local layer: Tate
// gamma factors, the beta normalization, and lifted intertwining operators
// are rational functions of X = q^{-s}.
//
// The central extraction is the leading coefficient of the expansion of a
// ratio as a power series in X^{-1}: for r = num/den this is
// (top X-coefficient of num) / (top X-coefficient of den), sitting in
// degree (deg_X den) - (deg_X num) of X^{-1}.

#pragma once

#include <map>
#include <string>

#include "gfw/scalar.hpp"

namespace gfw {

class LaurentPoly {
public:
    LaurentPoly() = default;
    explicit LaurentPoly(const Scalar& constant);
    // c * X^e
    static LaurentPoly monomial(const Scalar& c, long e);

    bool is_zero() const { return coeffs_.empty(); }
    long min_degree() const;  // throws when zero
    long max_degree() const;  // throws when zero
    const Scalar& coeff(long e) const;  // zero scalar when absent
    const std::map<long, Scalar>& coeffs() const { return coeffs_; }
    const ScalarCtxPtr& ctx() const { return ctx_; }

    LaurentPoly operator+(const LaurentPoly& o) const;
    LaurentPoly operator-(const LaurentPoly& o) const;
    LaurentPoly operator-() const;
    LaurentPoly operator*(const LaurentPoly& o) const;
    LaurentPoly scaled(const Scalar& c) const;
    bool operator==(const LaurentPoly& o) const;
    bool operator!=(const LaurentPoly& o) const { return !(*this == o); }

    // X -> c * X^k (k >= 1).
    LaurentPoly substitute(const Scalar& c, long k) const;

    void set_coeff(long e, const Scalar& c);

private:
    ScalarCtxPtr ctx_;  // null iff zero polynomial
    std::map<long, Scalar> coeffs_;  // degree -> nonzero coefficient
};

class LaurentRational {
public:
    LaurentRational() = default;
    LaurentRational(LaurentPoly num, LaurentPoly den);
    explicit LaurentRational(const LaurentPoly& num);
    static LaurentRational constant(const Scalar& c);

    const LaurentPoly& num() const { return num_; }
    const LaurentPoly& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }

    LaurentRational operator+(const LaurentRational& o) const;
    LaurentRational operator-(const LaurentRational& o) const;
    LaurentRational operator-() const;
    LaurentRational operator*(const LaurentRational& o) const;
    LaurentRational operator/(const LaurentRational& o) const;
    // Equality of values: cross-multiplied polynomial identity.
    bool operator==(const LaurentRational& o) const;
    bool operator!=(const LaurentRational& o) const { return !(*this == o); }

    LaurentRational substitute(const Scalar& c, long k) const;

    // Leading term of the expansion as a power series in X^{-1}:
    // returns (coefficient, degree in X^{-1}).  Requires the ratio to be
    // nonzero and the denominator's top X-coefficient to be invertible.
    std::pair<Scalar, long> lowest_degree_term() const;

    std::string serialize() const;  // {num:{deg:coeff,...},den:{...}}

private:
    // Reduction: strip common powers of X and scale so the top X-coefficient
    // of the denominator is 1 (when invertible).
    void normalize();

    LaurentPoly num_, den_;
};

}  // namespace gfw
