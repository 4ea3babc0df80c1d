// The symbolic local layer over the exact value ring: Tate gamma/epsilon
// factors of unramified-twist lifts chi-hat_{alpha,t}, the case-by-case
// beta normalization as a rational function of X = q^{-s}, extraction of
// the epsilon_0 constant, the lifted intertwining-operator product
// formulas, and epsilon_0 of tamely ramified parameters.
//
// No local field is ever materialized: a lift chi-hat_{alpha,t} is the
// pair (alpha, t) of a residue character and the value at the uniformizer,
// and every operation below is a closed-form identity between such data
// and Laurent rationals.

#pragma once

#include "gfw/doubling.hpp"
#include "gfw/laurent.hpp"

namespace gfw {

// chi-hat_{alpha,t}: the character of the local multiplicative group that
// restricts to alpha on units and sends the uniformizer to t.
struct LiftedChar {
    MultChar alpha;
    Scalar t;  // nonzero scalar
};

// Tate gamma factor gamma(X, chi-hat_{alpha,t}, psi):
//   -q^{-1/2} (1 - t^{-1}X^{-1}) / (1 - q^{-1} t^{-1} X^{-1})   if alpha = 1,
//   the constant -tau(alpha, psi)                                otherwise,
// where q = |field of alpha| and psi is extended to that field by the trace
// when necessary.
LaurentRational tate_gamma(const ScalarCtxPtr& ctx, const LiftedChar& chi_hat,
                           const AddChar& psi);

// Tate epsilon factor: q^{-1/2} t^{-1} X^{-1} if alpha = 1, else the same
// constant -tau(alpha, psi).
LaurentRational tate_epsilon(const ScalarCtxPtr& ctx, const LiftedChar& chi_hat,
                             const AddChar& psi);

// Exact substitution X -> q^{-s0} for the half integer s0 = s0_half / 2.
Scalar eval_at_half_integer_s(const LaurentRational& r, const ScalarCtxPtr& ctx,
                              long s0_half);

// The case-by-case normalization beta_V(X, chi-hat_{chi,t}, psi) of the
// doubling gamma factor, as a product of Tate gamma factors:
//   E != F:            (-1)^floor(d/2) prod_{i=1..d}
//                        gamma(q^{i-1} X, chi-hat_{chi|F, (-1)^(d-i) t}, psi)
//   E = F, eps=+1, d odd:  chi(2)^{-1} prod_{i=1..(d-1)/2}
//                        gamma(q^{2i-1} X^2, chi-hat_{chi^2, t^2}, psi)
//   E = F, eps=-1:     gamma(q^{(d-1)/2} X, chi-hat_{chi,t}, psi)
//                        prod_{i=1..d/2} gamma(q^{2i-2} X^2, chi-hat_{chi^2,t^2}, psi)
//   E = F, eps=+1, d even: prod_{i=1..d/2} gamma(q^{2i-2} X^2, ...) times
//                        +1 (split) / -1 (non-split).
// The quadratic unramified twists are realized by the sign flips on t.
// chi lives on E^x (the quadratic extension for the hermitian kind).
LaurentRational beta_factor(const ScalarCtxPtr& ctx, SpaceKind kind, long d,
                            const MultChar& chi, const Scalar& t, const AddChar& psi);

// Closed form of the lowest-degree (equivalently constant) coefficient of
// beta_factor as a power series in X^{-1}:
//   eps_{G(V)} times
//     (-tau(chi|F, psi))^d                     E != F
//     chi(2)^{-1} tau(chi^2, psi)^((d-1)/2)    E = F, eps=+1, d odd
//     -tau(chi, psi) tau(chi^2, psi)^(d/2)     E = F, eps=-1
//     tau(chi^2, psi)^(d/2)                    E = F, eps=+1, d even.
Scalar beta_star(const ScalarCtxPtr& ctx, SpaceKind kind, long d, const MultChar& chi,
                 const AddChar& psi);

// The epsilon_0 constant of the normalized doubling gamma factor, which is
// independent of the lift parameter t (t never enters):
//   chi^{1+c} != 1:  beta_star * J(pi, chi)     (J the non-abelian Jacobi sum)
//   chi^{1+c}  = 1:  beta_star / J(pi, chi)     (pi cuspidal).
// For the zero form the quadratic-extension analogue with [E:F] = 1 is
// used and chi^2 = 1 is rejected.  Throws std::domain_error with message
// "Jacobi sum vanishes" when the division branch meets J = 0.
Scalar epsilon0_dbl(const CharacterTable& tab, long pi, const MultChar& chi,
                    const AddChar& psi);

// A tamely ramified parameter: direct sum of blocks, each induced from the
// Frobenius orbit of a character alpha on an extension field, twisted by an
// unramified character with uniformizer value t, tensored with a Steinberg
// block of the given size.  The block dimension is deg(orbit) * steinberg.
struct TameBlock {
    MultChar alpha;  // representative of the Frobenius orbit, on F_{q^n}
    Scalar t;
    long steinberg = 1;
};
struct TameParameter {
    std::vector<TameBlock> blocks;
    long dimension(const FFPtr& base) const;  // sum of orbit degrees * steinberg
};

// epsilon_0 of a tame parameter for psi of conductor exponent -1:
// the product over blocks of ((-1)^n tau(alpha, psi_n))^steinberg with
// n the Frobenius-orbit degree over the base field of psi; multiplicative
// over direct sums by construction.  Throws std::invalid_argument when a
// block's field is not an extension of the psi field.
Scalar epsilon0_tame(const ScalarCtxPtr& ctx, const TameParameter& param,
                     const AddChar& psi);

// Consistency of epsilon0_dbl with the Gauss-sum evaluation of the tame
// parameter attached to anisotropic-torus data: compares epsilon0_dbl with
//   (-1)^M * tau_{T*}(theta* x chi, psi) * (-tau(chi,psi)/(-1) if symplectic)
// i.e. (-1)^M tau_{T*} times tau(chi,psi) in the symplectic case and 1
// otherwise, where M is the dimension of the standard lift.
bool epsilon0_consistency(const CharacterTable& tab, long pi,
                          const std::vector<TorusBlock>& blocks, const MultChar& chi,
                          const AddChar& psi);

// Candidate anisotropic-torus block shapes (characters left at 0) for the
// nondegenerate kinds; empty when the group has no anisotropic maximal torus.
std::vector<std::vector<TorusBlock>> anisotropic_torus_shapes(const Space& s);

enum class LiftedOrdering { Forward, Alternative };

// The lifted intertwining operator on the lift of f, evaluated through the
// product formulas, in flag-coset coordinates:
//  - chi^{1+c} != 1: the lift of M f (no X-dependence);
//  - chi^{1+c}  = 1: chi(2)^{-d} chi^{-1}(det_E S) times the double product
//    over j = 1..d of
//      (m_d - Delta_{V,chi} chi(delta_V)
//             (q^{1/2}-q^{-1/2}) / (1 - q_E^{-(d+1-2j)/2} t^{-1}X^{-1}) id)
//      prod_{i=1..d-j} (m_{d-i} - chi(-1)
//             (q_E^{1/2}-q_E^{-1/2}) / (1 - q_E^{-(d+1-i-2j)} t^{-2}X^{-2}) id),
//    with the two orderings of the products giving the same operator.
// f is given in the coordinates of I^V(chi) (values at the doubled-coset
// representatives); the result is in flag-coset coordinates.
std::vector<LaurentRational> lifted_intertwining_formula(
    const Space& space, const MultChar& chi, const Scalar& t,
    const std::vector<Scalar>& f, const ScalarCtxPtr& ctx,
    LiftedOrdering ordering = LiftedOrdering::Forward);

// The closed eigenvalue of the constant section under the lifted
// intertwining operator for chi = 1:
//   sqrt|g| prod_{j=1..d} [ (1 - q^{[E:F](d+1-2j)/2 - 1} tX)
//                           / (1 - q^{[E:F](d+1-2j)/2} tX) ]^(*)
//                         (1 - q_E^{-j} t^2X^2) / (1 - q_E^{d-2j} t^2X^2),
// where the (*) factor is omitted when E = F and eps = +1.
LaurentRational unramified_intertwining_product(const ScalarCtxPtr& ctx, SpaceKind kind,
                                                long d, const Scalar& t);

// The X-free constant-term product: the same double product with the
// rational corrections replaced by their values at X^{-1} = 0, applied to
// f, without the chi(2)^{-d} chi^{-1}(det) prefactor.  Used by the
// epsilon_0 functional-equation cross-check.
std::vector<Scalar> constant_term_intertwining(const Space& space, const MultChar& chi,
                                               const std::vector<Scalar>& f,
                                               const ScalarCtxPtr& ctx);

// Zeta scalar of a kernel given in flag-coset coordinates:
// (1/deg pi) sum_g h(iota(g, 1)) tr pi(g).
Scalar zeta_scalar_flag(const CharacterTable& tab, long pi, const MultChar& chi,
                        const std::vector<Scalar>& h);

}  // namespace gfw
