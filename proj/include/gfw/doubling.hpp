// The doubling core: coset geometry of the Siegel parabolic inside the
// doubled group, degenerate principal series I^V(chi) in coset coordinates,
// the intertwining operator M and its factorization into simple reflections
// on the full-flag principal series, zeta/dual-zeta scalars, non-abelian
// Jacobi sums, gamma factors, multiplicativity under parabolic induction,
// special-orthogonal variants, the Gauss-sum evaluations over anisotropic
// torus data, and the flat operator support checks.
//
// The doubled group itself is never enumerated: cosets are reached by an
// orbit walk on canonical subspace keys, and every evaluation decomposes a
// group element against a stored coset representative.

#pragma once

#include <string>
#include <utility>

#include "gfw/chartab.hpp"

namespace gfw {

// --- Lie algebra of the isometry group, over the base field F ---
std::vector<FMatrix> lie_algebra_basis(const Space& s);     // F-basis, E-matrices
long lie_algebra_dim(const Space& s);                       // dim over F
std::vector<FMatrix> lie_algebra_elements(const Space& s);  // all q_F^dim elements

// chi-bar^{-1} (conjugate-inverse through the involution of E/F) and
// chi^{1+c} = chi * chi-bar.
MultChar conj_inverse_char(const Space& s, const MultChar& chi);
MultChar involution_norm_char(const Space& s, const MultChar& chi);

// --- coset geometry of P^Delta \ G(V^box) ---
class DoubledCosets {
public:
    const DoubledSpace& dspace() const { return ds_; }
    long dim() const { return static_cast<long>(reps_.size()); }
    const FMatrix& rep(long i) const { return reps_[i]; }
    // Coset index of h, through the canonical key h^{-1} V^Delta.
    long coset_of(const FMatrix& h) const;
    // h = p * rep(i) with p in P^Delta; returns (i, p).
    std::pair<long, FMatrix> decompose(const FMatrix& h) const;
    const std::vector<FMatrix>& siegel_unipotent() const { return n_delta_; }
    long lie_dim() const { return lie_dim_; }

    // Memoized per space; representatives are the lexicographically minimal
    // element of each coset.  Cached on disk under $GFW_CACHE_DIR.
    static std::shared_ptr<const DoubledCosets> get(const Space& space);

private:
    explicit DoubledCosets(const Space& space);

    DoubledSpace ds_;
    long lie_dim_ = 0;
    std::vector<FMatrix> reps_;
    std::vector<FMatrix> rep_inv_;
    std::vector<FMatrix> n_delta_;
    std::map<std::vector<long>, long> index_of_key_;

    std::vector<long> key_of(const FMatrix& h) const;
    void canonicalize_reps();
    bool try_load(const std::string& path);
    void store(const std::string& path) const;
};
using DoubledCosetsPtr = std::shared_ptr<const DoubledCosets>;

// --- degenerate principal series I^V(chi) ---
struct DegPS {
    DoubledCosetsPtr cosets;
    MultChar chi;  // character of E^x
    ScalarCtxPtr ctx;

    long dim() const { return cosets->dim(); }
    // chi_Delta(p) = chi(det of the Delta block), times the
    // conj-inverse twist on the Nabla block for the zero form.
    Scalar equivariance(const FMatrix& p) const;
    Scalar evaluate(const std::vector<Scalar>& f, const FMatrix& h) const;
    // The section supported on P^Delta with value 1 at the identity.
    std::vector<Scalar> f0() const;
};
DegPS build_degps(const Space& space, const MultChar& chi, const ScalarCtxPtr& ctx);

struct OperatorOnDegPS {
    long dim = 0;
    std::vector<Scalar> a;  // row-major

    Scalar& at(long i, long j) { return a[i * dim + j]; }
    const Scalar& at(long i, long j) const { return a[i * dim + j]; }
    static OperatorOnDegPS identity_op(const ScalarCtxPtr& ctx, long dim);
    static OperatorOnDegPS zero_op(const ScalarCtxPtr& ctx, long dim);
    OperatorOnDegPS operator*(const OperatorOnDegPS& o) const;
    OperatorOnDegPS operator+(const OperatorOnDegPS& o) const;
    OperatorOnDegPS scaled(const Scalar& c) const;
    bool operator==(const OperatorOnDegPS& o) const;
    std::vector<Scalar> apply(const std::vector<Scalar>& f) const;
    // True when the matrix is c * identity; reports c.
    bool is_scalar(Scalar* value = nullptr) const;
    long rank() const;  // Gaussian elimination over the value ring
};

// M: I(chi) -> I(chi-bar^{-1}), (Mf)(g) = |g(V)|^{-1/2} sum_{u in N^Delta}
// f(delta_V u g), in the shared coset coordinates.
OperatorOnDegPS intertwining_M(const DegPS& I);

// Trace of the right-translation action of h on I(chi).
Scalar degps_action_trace(const DegPS& I, const FMatrix& h);

// Scalar of the zeta operator Z(f) = sum_g f(iota(g,1)) pi(g) on the
// irreducible pi, through Schur's lemma: (1/deg pi) sum_g f(iota(g,1)) tr pi(g).
// Throws std::domain_error when the kernel is not a class function.
Scalar zeta_scalar(const DegPS& I, const std::vector<Scalar>& f, const CharacterTable& tab,
                   long pi);
// Z*(f0) = Z_{chi-bar^{-1}, pi}(M f0): the gamma factor by the operator route.
Scalar dual_zeta_scalar(const CharacterTable& tab, long pi, const MultChar& chi);

// J~(chr, chi) = (1/(sqrt|g| deg)) sum_{g in G0, det(1+g) != 0}
// chi(det_E(1+g)) chr(g), for an arbitrary class function of degree deg.
Scalar jacobi_sum_of_class_function(const GroupPtr& G, const ScalarCtxPtr& ctx,
                                    const ClassFunction& chr, const Scalar& deg,
                                    const MultChar& chi);
Scalar jacobi_sum(const CharacterTable& tab, long pi, const MultChar& chi);
// The rank-one case on E^x: (1/sqrt|E|) sum_{x != 0, -1} lambda(1+x) alpha(x).
Scalar jacobi_sum_char(const ScalarCtxPtr& ctx, const MultChar& alpha, const MultChar& lambda);

// Gamma~(pi, chi) by the closed formula (the Jacobi-sum route).
Scalar gamma_dbl(const CharacterTable& tab, long pi, const MultChar& chi);
// Special orthogonal variant: pi0 an irreducible of SO(V) (the table is over
// connected_component_group), J~ summed over SO(V).
Scalar gamma_dbl_SO(const CharacterTable& so_tab, long pi0, const MultChar& chi);

enum class CheckStatus { Pass, Fail, Skip };
const char* status_name(CheckStatus s);

struct MultiplicativityRow {
    long pi = -1;
    Scalar lhs, rhs;
    CheckStatus status = CheckStatus::Skip;
};
struct MultiplicativityReport {
    CheckStatus status = CheckStatus::Pass;  // worst across rows, or Skip
    std::string reason;
    std::vector<MultiplicativityRow> rows;
};
// J~ of every constituent of Ind_P(tau x pi0) against the product formula.
// tau is a character of GL(X) = GL_1(E) (the flag X is a line), pi0 a
// character of the one-dimensional GL complement for the zero form
// (nullptr when V0 = 0).
MultiplicativityReport multiplicativity_check(const CharacterTable& tab,
                                              const StandardFlag& flag, const MultChar& tau,
                                              const MultChar* pi0, const MultChar& chi);

struct GaussSumReport {
    // One entry per cuspidal irreducible: does some anisotropic torus datum
    // theta satisfy the Gauss-sum identity for every chi with chi^{1+c} != 1?
    std::vector<std::pair<long, CheckStatus>> cuspidal_matches;
    // One entry per general-position theta satisfying the hypotheses of the
    // chi^{1+c} = 1 theorem: does some cuspidal pi satisfy the inverse
    // Gauss-sum identity for every such chi?
    std::vector<std::pair<std::string, CheckStatus>> theta_matches;
    bool ok() const;
};
GaussSumReport gauss_sum_theorem_check(const CharacterTable& tab, const AddChar& psi);

// Support and value properties of the flat operator Lambda on f0, for the
// zero form of dimension 2 split as two lines.
bool flat_operator_check(const Space& space, const MultChar& chi, const ScalarCtxPtr& ctx);

// dim Hom_{iota(G x G)}((pi x (pi ⊗ chi_V)-dual) ⊗ I^V(chi), 1).
long multiplicity_one_dimension(const CharacterTable& tab, long pi, const MultChar& chi);

// --- full-flag principal series of the doubled group ---
class FlagCosets {
public:
    // Parameters of the (possibly formal) parent: for the symplectic kind an
    // odd d is allowed and names the chain with doubled group Sp_{2d}.
    static std::shared_ptr<const FlagCosets> get(SpaceKind kind, long d, long q);

    SpaceKind parent_kind() const { return kind_; }
    const Space& box() const { return box_; }
    long d() const { return d_; }
    int eps() const { return eps_; }
    const FFPtr& F() const { return F_; }
    const FFPtr& E() const { return box_.E; }
    long dim() const { return static_cast<long>(reps_.size()); }
    const FMatrix& rep(long i) const { return reps_[i]; }
    // h = b * rep(i) with b upper triangular; returns (i, b).
    std::pair<long, FMatrix> decompose(const FMatrix& h) const;
    // A canonical trace-zero element of E over F (the unit when E = F).
    long delta_element() const { return delta_; }

    FMatrix s_matrix(long i) const;            // simple reflection, 1 <= i <= d
    FMatrix r_matrix(long i, long x) const;    // root parameterization
    // The additive domain of r_i: all of E for i < d, F_V for i = d.
    std::vector<long> r_domain(long i) const;

private:
    FlagCosets(SpaceKind kind, long d, long q);
    std::vector<long> key_of(const FMatrix& h) const;

    SpaceKind kind_;
    long d_ = 0;
    int eps_ = 1;
    FFPtr F_;
    Space box_;
    long delta_ = 0;
    std::vector<FMatrix> reps_;
    std::vector<FMatrix> rep_inv_;
    std::map<std::vector<long>, long> index_of_key_;
};
using FlagCosetsPtr = std::shared_ptr<const FlagCosets>;

// Character data of the full-flag principal series: one character of E^x per
// coordinate of the doubled basis, mirror-paired so that entry 2d-1-i is the
// conj-inverse of entry i.
struct PSTuple {
    std::vector<MultChar> chars;
    bool operator==(const PSTuple& o) const;
};
PSTuple ps_tuple_constant(const FlagCosetsPtr& fc, const MultChar& chi);

struct PrincipalSeries {
    FlagCosetsPtr cosets;
    PSTuple tuple;
    ScalarCtxPtr ctx;

    long dim() const { return cosets->dim(); }
    Scalar equivariance(const FMatrix& b) const;
    Scalar evaluate(const std::vector<Scalar>& f, const FMatrix& h) const;
};

// Sparse operator between principal-series coordinate spaces.
struct SparseOp {
    long dim = 0;
    std::vector<std::vector<std::pair<long, Scalar>>> rows;
    std::vector<Scalar> apply(const std::vector<Scalar>& f) const;
    OperatorOnDegPS dense(const ScalarCtxPtr& ctx) const;
};

// m_i: PS(tuple) -> PS(s_i tuple); also reports the target tuple.
SparseOp simple_reflection_m(const PrincipalSeries& ps, long i, PSTuple* target = nullptr);
// The tuple action of s_i.
PSTuple reflect_tuple(const FlagCosetsPtr& fc, const PSTuple& tuple, long i);

// Embedding I^V(chi) -> PS(chi,...,chi) as a (ps dim) x (degps dim) matrix
// of evaluations at the flag coset representatives.
std::vector<std::vector<Scalar>> embed_degps_in_ps(const DegPS& I, const FlagCosetsPtr& fc);

// Both simple-reflection factorizations of M against intertwining_M, d <= 2.
bool factorize_M_check(const Space& space, const MultChar& chi, const ScalarCtxPtr& ctx);

}  // namespace gfw
