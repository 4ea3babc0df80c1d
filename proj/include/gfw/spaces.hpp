// Epsilon-sesquilinear spaces over finite fields, their doubled spaces, and
// the explicit matrix model: the good basis B of V (orthogonal, symplectic,
// or free), the standard basis B~ of the doubled space, the embedding
// iota(g1, g2), the Weyl element delta_V, the Siegel unipotent exp map, and
// the Cayley transform.
//
// All matrices are dense over the exponent representation of the field;
// dimensions stay tiny (d <= 4, doubled 2d <= 8).

#pragma once

#include <functional>
#include <vector>

#include "gfw/ff.hpp"

namespace gfw {

// Dense matrix over a finite field; entries are element labels.
struct FMatrix {
    FFPtr field;
    long rows = 0, cols = 0;
    std::vector<long> a;  // row-major labels

    FMatrix() = default;
    FMatrix(FFPtr f, long r, long c)
        : field(std::move(f)), rows(r), cols(c), a(r * c, FiniteField::ZERO) {}

    long& at(long i, long j) { return a[i * cols + j]; }
    long at(long i, long j) const { return a[i * cols + j]; }

    static FMatrix identity(const FFPtr& f, long n);
    static FMatrix zero(const FFPtr& f, long r, long c);

    FMatrix operator*(const FMatrix& o) const;
    FMatrix operator+(const FMatrix& o) const;
    FMatrix operator-(const FMatrix& o) const;
    FMatrix operator-() const;
    bool operator==(const FMatrix& o) const { return field == o.field && rows == o.rows && cols == o.cols && a == o.a; }
    bool operator!=(const FMatrix& o) const { return !(*this == o); }
    bool operator<(const FMatrix& o) const { return a < o.a; }  // same-shape lex order

    FMatrix transpose() const;
    FMatrix scaled(long c) const;  // entrywise multiplication by a field element
    FMatrix map(const std::function<long(long)>& fn) const;  // entrywise

    long det() const;
    FMatrix inverse() const;  // throws std::domain_error when singular
    bool is_identity() const;

    // Scale so the matrix is canonical in its projective class: first
    // nonzero entry becomes 1.  Used for stable hashing of lines.
    FMatrix row_reduced() const;  // RREF (row space canonical form)
    long rank() const;

    std::string to_string() const;
};

// An epsilon-sesquilinear space in its good basis.  The form is
// <x, y> = x^T . gram . conj(y); isometries satisfy g^T . gram . conj(g) = gram.
struct Space {
    SpaceKind kind = SpaceKind::GL;
    FFPtr F;  // base field
    FFPtr E;  // form field: F, or its quadratic extension for hermitian kinds
    long d = 0;
    int eps = 1;
    FMatrix gram;  // d x d over E; zero matrix for the GL kind

    long conj(long x) const;  // the involution of E/F (identity when E = F)
    FMatrix conj_matrix(const FMatrix& m) const;  // entrywise involution
    FMatrix conj_transpose(const FMatrix& m) const;

    bool is_isometry(const FMatrix& g) const;
    // Lie algebra g(V): <Tx, y> + <x, Ty> = 0.
    bool in_lie_algebra(const FMatrix& T) const;

    // kappa_V: x for nondegenerate kinds, x / conj(x) for the GL kind.
    long kappa(long x) const;
    // Discriminant data: (-1)^(d(d-1)/2) det(gram), reduced modulo norms
    // from E (squares when E = F); true when trivial in F^x / N(E^x).
    bool disc_is_trivial() const;

    std::string describe() const;  // {kind, d, q}
};

// Canonical space of the given kind: diagonal Gram (1, -1, 1, -1, ...) for
// orthogonal kinds with the last entry scaled by the least nonsquare in the
// non-split case, the identity Gram for hermitian kinds, J_n for symplectic,
// and the zero form for GL.  q is the size of the base field F.
Space make_space(SpaceKind kind, long d, long q);

// The doubled space V x V^- in the standard basis B~, together with the
// change of basis from the (plus, minus) coordinates.
struct DoubledSpace {
    Space parent;
    Space box;       // the doubled space itself (split form of the same type)
    FMatrix S;       // d x d: diag(-I_n, I_n) for symplectic, w_d T otherwise
    FMatrix C;       // columns of B~ in (plus, minus) coordinates
    FMatrix C_inv;

    // iota(g1, g2) acts by g1 on the plus copy, g2 on the minus copy;
    // returned in the basis B~.
    FMatrix iota(const FMatrix& g1, const FMatrix& g2) const;
    // The Weyl element delta_V = iota(id, -id) swapping V^Delta and V^Nabla.
    FMatrix weyl_delta() const;
    // exp of a Lie algebra element of V: the Siegel unipotent fixing
    // V^Delta pointwise.
    FMatrix exp_unipotent(const FMatrix& T) const;

    // Membership helpers in the doubled group.
    bool in_siegel_parabolic(const FMatrix& h) const;      // stabilizes V^Delta
    bool in_op_siegel_parabolic(const FMatrix& h) const;   // stabilizes V^Nabla
};

DoubledSpace double_space(const Space& space);

// Cayley transform between the Siegel-coordinate Lie algebra and the big
// cell of G_S: X -> (I + 2SX)(I - 2SX)^{-1}.  Throws std::domain_error on
// singular input ("outside the big cell").
FMatrix cayley_to_group(const DoubledSpace& ds, const FMatrix& X);
// Inverse direction: h -> (1/2) S^{-1} (h + I)^{-1} (h - I).
FMatrix cayley_to_lie(const DoubledSpace& ds, const FMatrix& h);

// Least positive nonsquare modulo p, as a field label.
long canonical_nonsquare(const FFPtr& f);

// Basis of {v : B v = 0} as columns.
FMatrix matrix_null_space(const FMatrix& B);

}  // namespace gfw
