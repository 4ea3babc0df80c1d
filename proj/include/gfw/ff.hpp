// Finite fields F_{p^k} in Zech-logarithm representation, their character
// groups, norm-one subgroups, and the abelian Gauss-sum constructions that
// the explicit Jacobi-sum formulas are built from.
//
// Fields are realized by a fixed multiplicative generator g and exponent
// tables: a nonzero element is its discrete log 0..p^k-2, zero is a
// sentinel.  The defining polynomial of each F_{p^k} is chosen as the
// lexicographically least monic primitive polynomial compatible with all
// proper subfields (Conway-style): the norm of the generator down to each
// subfield is that subfield's generator.  This makes character labels
// reproducible and makes norm/trace tower arithmetic exact label
// arithmetic.

#pragma once

#include <memory>
#include <vector>

#include "gfw/scalar.hpp"

namespace gfw {

class FiniteField;
using FFPtr = std::shared_ptr<const FiniteField>;

class FiniteField {
public:
    static constexpr long ZERO = -1;

    // Registry of canonical fields, keyed by (p, k).
    static FFPtr get(long p, long k);

    long p() const { return p_; }
    long degree() const { return k_; }
    long size() const { return size_; }
    long order() const { return size_ - 1; }  // |F^x|

    // Elements are ZERO or exponents 0..order-1 of the generator.
    long add(long x, long y) const;
    long sub(long x, long y) const;
    long neg(long x) const;
    long mul(long x, long y) const;
    long inv(long x) const;        // throws on ZERO
    long pow(long x, long e) const;
    long generator() const { return 0; }  // g = g^0... exponent 0 means g^0 = 1; see unit()
    long unit() const { return 0; }       // the element 1 = g^0
    long gen_power(long e) const;         // g^e
    long frobenius(long x, long times = 1) const;  // x -> x^(p^times)

    // Integer c (mod p) as a field element, and back for the prime field.
    long from_int(long c) const;
    long to_int(long x) const;  // requires k == 1

    bool is_subfield_degree(long k2) const { return k_ % k2 == 0; }
    // Embedding F_{p^k'} -> F_{p^k} for k' | k (label arithmetic through the
    // compatible generators).
    long embed_from(const FiniteField& sub, long x) const;
    // Norm/trace down to the subfield of degree k' | k, returned as a label
    // in that subfield.
    long norm_to(const FiniteField& sub, long x) const;
    long trace_to(const FiniteField& sub, long x) const;

    // Deterministic total order on elements (zero first, then by exponent);
    // used wherever "lexicographically minimal" matrices are needed.
    long rank_of(long x) const { return x == ZERO ? 0 : x + 1; }
    long element_of_rank(long r) const { return r == 0 ? ZERO : r - 1; }

    const std::vector<long>& modulus() const { return modulus_; }  // over F_p

private:
    FiniteField(long p, long k);

    long p_, k_, size_;
    std::vector<long> modulus_;   // defining polynomial coefficients, monic
    std::vector<long> zech_;      // zech_[m]: 1 + g^m = g^zech_[m] (ZERO when -1... sentinel)
    std::vector<long> int_label_; // from_int table: int_label_[c] = label of c*1
    long p_char_label_of_unit_sum(long c) const;
};

// Multiplicative character chi(g^i) = zeta_{|F|-1}^{i*j}.
struct MultChar {
    FFPtr field;
    long j = 0;

    MultChar() = default;
    MultChar(FFPtr f, long jj);

    bool is_trivial() const { return j == 0; }
    long order() const;  // order of the character
    Scalar value(const ScalarCtxPtr& ctx, long x) const;  // x nonzero
    MultChar operator*(const MultChar& o) const;
    MultChar inverse() const;
    MultChar power(long e) const;
    // chi composed with x -> x^(p^a) (Frobenius twist; conjugate character
    // for quadratic extensions with a = half the degree).
    MultChar frobenius_twist(long a) const;
    // Restriction to the subfield of degree k' | k.
    MultChar restrict_to(const FFPtr& sub) const;
    bool operator==(const MultChar& o) const;
    // Size of the Frobenius orbit {chi^(q^m)} over the subfield F_q of
    // degree base_deg; divides k/base_deg.
    long frobenius_orbit_size(long base_deg) const;
};

// Additive character psi_a(x) = zeta_p^{Tr(a x) read as an integer}.
struct AddChar {
    FFPtr field;
    long a = FiniteField::ZERO;

    AddChar() = default;
    AddChar(FFPtr f, long shift) : field(std::move(f)), a(shift) {}
    static AddChar standard(FFPtr f);  // a = 1

    bool is_trivial() const { return a == FiniteField::ZERO; }
    Scalar value(const ScalarCtxPtr& ctx, long x) const;
    // The character psi_k = psi o Tr on an extension field.
    AddChar extend_to(const FFPtr& ext) const;
};

// Norm-one subgroup U_{2m} = ker(N_{2m/m}) inside F_{q^{2m}}^x; cyclic of
// order q^m + 1, generated by g^(q^m - 1).
struct NormOneGroup {
    FFPtr big;    // F_{q^{2m}}
    FFPtr half;   // F_{q^m}
    long m = 0;
    long q = 0;   // |F_{q^m}|^(1/m)

    NormOneGroup(FFPtr big_field, FFPtr half_field);
    long size() const;                 // q^m + 1
    long element(long t) const;        // label in big field of u^t
    bool contains(long x) const;
};

// Character theta of U_{2m} with theta(u^t) = zeta_{q^m+1}^{t*j}, as a label.
struct NormOneChar {
    NormOneGroup group;
    long j = 0;

    Scalar value(const ScalarCtxPtr& ctx, long t) const;  // at u^t
    bool is_trivial() const { return j % group.size() == 0; }
};

// tau(alpha, psi) = -|F|^{-1/2} sum_{x != 0} alpha^{-1}(x) psi(x).
Scalar gauss_sum(const ScalarCtxPtr& ctx, const MultChar& alpha, const AddChar& psi);

// Twisted Gauss sum on a field X containing the base field E of chi:
// tau(alpha, chi, psi_X) = -|X|^{-1/2} sum_{x in X^x} alpha^{-1}(x)
//                          chi^{-1}(N_{X/E}(x)) psi_X(x).
Scalar twisted_gauss_sum(const ScalarCtxPtr& ctx, const MultChar& alpha,
                         const MultChar& chi, const AddChar& psi_x);

// Hilbert 90 transfer: theta on U_{2m} gives theta*(x) = theta(x/conj(x))
// on F_{q^{2m}}^x, trivial on F_{q^m}^x.
MultChar hilbert90_transfer(const NormOneChar& theta);

// One factor of a maximal torus T = prod E_{k_i}^x x prod U_{2m_j}.
struct TorusBlock {
    bool norm_one = false;
    long param = 1;    // k_i for GL blocks, m_j for norm-one blocks
    long char_j = 0;   // label of alpha_i on E_{k_i}^x, resp. theta_j on U_{2m_j}
};

// The product of twisted Gauss sums attached to torus character data:
//   tau_{T*}(theta* x chi, psi)
//     = prod_j tau(theta*_j, chi|_F, psi_{2m_j})
//       prod_i tau(alpha_i, chi, psi_{E_{k_i}}) tau(alpha_i^{-c,-1}, chi, psi_{E_{k_i}}).
// Norm-one blocks live over F (extensions F_{q^{2m}}), GL blocks over the
// form field E.  Also evaluates the equivalent single-sum form
//   (-1)^{2r+s} q^{-floor(dim_F V/2)} sum_{t in T*} ...
// and asserts the two agree.
Scalar torus_gauss_product(const ScalarCtxPtr& ctx, const FFPtr& F, const FFPtr& E,
                           const std::vector<TorusBlock>& blocks, const MultChar& chi,
                           const AddChar& psi, long dim_F_V);

enum class SpaceKind { Symplectic, OrthogonalSplit, OrthogonalNonsplit, Hermitian, GL };

bool kind_is_quadratic(SpaceKind k);   // E != F
bool kind_is_orthogonal(SpaceKind k);

// The sign epsilon_{G(V)} = (-1)^(d/2 - 1) for even non-split orthogonal
// spaces and (-1)^floor(d_E/2) otherwise.
int isometry_group_sign(SpaceKind kind, long d);

// The constant c_V(chi, psi) relating the Jacobi sum to the torus Gauss-sum
// product:
//   E = F, d even:  eps * tau(chi^-2, psi)^(d/2)
//   E = F, d odd:   eps * chi(2) tau(chi^-2, psi)^((d-1)/2)
//   E != F:         eps * chi(-1)^d tau(chi^-1|_F, psi)^d.
Scalar c_V_constant(const ScalarCtxPtr& ctx, SpaceKind kind, long d, const MultChar& chi,
                    const AddChar& psi);

}  // namespace gfw
