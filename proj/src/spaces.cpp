#include "gfw/spaces.hpp"

#include <sstream>
#include <stdexcept>

namespace gfw {

// --- dense matrices over a finite field ---

FMatrix FMatrix::identity(const FFPtr& f, long n) {
    FMatrix m(f, n, n);
    for (long i = 0; i < n; ++i) m.at(i, i) = f->unit();
    return m;
}

FMatrix FMatrix::zero(const FFPtr& f, long r, long c) { return FMatrix(f, r, c); }

FMatrix FMatrix::operator*(const FMatrix& o) const {
    if (cols != o.rows || field != o.field) throw std::invalid_argument("FMatrix: shape mismatch");
    FMatrix r(field, rows, o.cols);
    for (long i = 0; i < rows; ++i)
        for (long k = 0; k < cols; ++k) {
            long x = at(i, k);
            if (x == FiniteField::ZERO) continue;
            for (long j = 0; j < o.cols; ++j)
                r.at(i, j) = field->add(r.at(i, j), field->mul(x, o.at(k, j)));
        }
    return r;
}

FMatrix FMatrix::operator+(const FMatrix& o) const {
    if (rows != o.rows || cols != o.cols || field != o.field)
        throw std::invalid_argument("FMatrix: shape mismatch");
    FMatrix r(field, rows, cols);
    for (size_t i = 0; i < a.size(); ++i) r.a[i] = field->add(a[i], o.a[i]);
    return r;
}

FMatrix FMatrix::operator-(const FMatrix& o) const { return *this + (-o); }

FMatrix FMatrix::operator-() const {
    FMatrix r = *this;
    for (long& x : r.a) x = field->neg(x);
    return r;
}

FMatrix FMatrix::transpose() const {
    FMatrix r(field, cols, rows);
    for (long i = 0; i < rows; ++i)
        for (long j = 0; j < cols; ++j) r.at(j, i) = at(i, j);
    return r;
}

FMatrix FMatrix::scaled(long c) const {
    FMatrix r = *this;
    for (long& x : r.a) x = field->mul(x, c);
    return r;
}

FMatrix FMatrix::map(const std::function<long(long)>& fn) const {
    FMatrix r = *this;
    for (long& x : r.a) x = fn(x);
    return r;
}

long FMatrix::det() const {
    if (rows != cols) throw std::invalid_argument("FMatrix: det of non-square matrix");
    FMatrix m = *this;
    long d = field->unit();
    for (long col = 0; col < cols; ++col) {
        long piv = -1;
        for (long i = col; i < rows; ++i)
            if (m.at(i, col) != FiniteField::ZERO) {
                piv = i;
                break;
            }
        if (piv < 0) return FiniteField::ZERO;
        if (piv != col) {
            for (long j = 0; j < cols; ++j) std::swap(m.at(piv, j), m.at(col, j));
            d = field->neg(d);
        }
        long p = m.at(col, col);
        d = field->mul(d, p);
        long pinv = field->inv(p);
        for (long i = col + 1; i < rows; ++i) {
            long f = field->mul(m.at(i, col), pinv);
            if (f == FiniteField::ZERO) continue;
            for (long j = col; j < cols; ++j)
                m.at(i, j) = field->sub(m.at(i, j), field->mul(f, m.at(col, j)));
        }
    }
    return d;
}

FMatrix FMatrix::inverse() const {
    if (rows != cols) throw std::invalid_argument("FMatrix: inverse of non-square matrix");
    FMatrix m = *this;
    FMatrix r = identity(field, rows);
    for (long col = 0; col < cols; ++col) {
        long piv = -1;
        for (long i = col; i < rows; ++i)
            if (m.at(i, col) != FiniteField::ZERO) {
                piv = i;
                break;
            }
        if (piv < 0) throw std::domain_error("FMatrix: singular matrix");
        if (piv != col)
            for (long j = 0; j < cols; ++j) {
                std::swap(m.at(piv, j), m.at(col, j));
                std::swap(r.at(piv, j), r.at(col, j));
            }
        long pinv = field->inv(m.at(col, col));
        for (long j = 0; j < cols; ++j) {
            m.at(col, j) = field->mul(m.at(col, j), pinv);
            r.at(col, j) = field->mul(r.at(col, j), pinv);
        }
        for (long i = 0; i < rows; ++i) {
            if (i == col) continue;
            long f = m.at(i, col);
            if (f == FiniteField::ZERO) continue;
            for (long j = 0; j < cols; ++j) {
                m.at(i, j) = field->sub(m.at(i, j), field->mul(f, m.at(col, j)));
                r.at(i, j) = field->sub(r.at(i, j), field->mul(f, r.at(col, j)));
            }
        }
    }
    return r;
}

bool FMatrix::is_identity() const {
    if (rows != cols) return false;
    for (long i = 0; i < rows; ++i)
        for (long j = 0; j < cols; ++j) {
            long want = (i == j) ? field->unit() : FiniteField::ZERO;
            if (at(i, j) != want) return false;
        }
    return true;
}

FMatrix FMatrix::row_reduced() const {
    FMatrix m = *this;
    long lead = 0;
    for (long row = 0; row < rows && lead < cols; ++row) {
        long piv = -1;
        while (lead < cols) {
            for (long i = row; i < rows; ++i)
                if (m.at(i, lead) != FiniteField::ZERO) {
                    piv = i;
                    break;
                }
            if (piv >= 0) break;
            ++lead;
        }
        if (piv < 0) break;
        if (piv != row)
            for (long j = 0; j < cols; ++j) std::swap(m.at(piv, j), m.at(row, j));
        long pinv = field->inv(m.at(row, lead));
        for (long j = 0; j < cols; ++j) m.at(row, j) = field->mul(m.at(row, j), pinv);
        for (long i = 0; i < rows; ++i) {
            if (i == row) continue;
            long f = m.at(i, lead);
            if (f == FiniteField::ZERO) continue;
            for (long j = 0; j < cols; ++j)
                m.at(i, j) = field->sub(m.at(i, j), field->mul(f, m.at(row, j)));
        }
        ++lead;
    }
    return m;
}

long FMatrix::rank() const {
    FMatrix m = row_reduced();
    long r = 0;
    for (long i = 0; i < rows; ++i) {
        bool nonzero = false;
        for (long j = 0; j < cols; ++j)
            if (m.at(i, j) != FiniteField::ZERO) nonzero = true;
        if (nonzero) ++r;
    }
    return r;
}

std::string FMatrix::to_string() const {
    std::ostringstream os;
    for (long i = 0; i < rows; ++i) {
        os << (i ? "; " : "[");
        for (long j = 0; j < cols; ++j) {
            if (j) os << " ";
            long x = at(i, j);
            if (x == FiniteField::ZERO)
                os << "0";
            else if (field->degree() == 1)
                os << field->to_int(x);
            else
                os << "g^" << x;
        }
    }
    os << "]";
    return os.str();
}

// --- spaces ---

long Space::conj(long x) const {
    if (E == F) return x;
    return E->frobenius(x, F->degree());
}

FMatrix Space::conj_matrix(const FMatrix& m) const {
    if (E == F) return m;
    return m.map([this](long x) { return conj(x); });
}

FMatrix Space::conj_transpose(const FMatrix& m) const { return conj_matrix(m.transpose()); }

bool Space::is_isometry(const FMatrix& g) const {
    if (g.rows != d || g.cols != d || g.field != E) return false;
    if (kind == SpaceKind::GL) return g.det() != FiniteField::ZERO;
    return g.transpose() * gram * conj_matrix(g) == gram;
}

bool Space::in_lie_algebra(const FMatrix& T) const {
    if (T.rows != d || T.cols != d || T.field != E) return false;
    if (kind == SpaceKind::GL) return true;
    return (T.transpose() * gram + gram * conj_matrix(T)) == FMatrix::zero(E, d, d);
}

long Space::kappa(long x) const {
    if (kind != SpaceKind::GL) return x;
    return E->mul(x, E->inv(conj(x)));
}

bool Space::disc_is_trivial() const {
    if (kind == SpaceKind::GL) return true;
    if (kind == SpaceKind::Symplectic) return true;  // all symplectic forms are equivalent
    long det = gram.det();
    if (E != F) return true;  // norms from the quadratic extension cover F^x
    // (-1)^(d(d-1)/2) det, square class in F^x
    long disc = det;
    if ((d * (d - 1) / 2) % 2 == 1) disc = E->neg(disc);
    return disc % 2 == 0;  // even exponent = square
}

std::string Space::describe() const {
    const char* names[] = {"symplectic", "orthogonal-split", "orthogonal-nonsplit", "hermitian",
                           "gl"};
    std::ostringstream os;
    os << "{kind:" << names[static_cast<int>(kind)] << ",d:" << d << ",q:" << F->size() << "}";
    return os.str();
}

FMatrix matrix_null_space(const FMatrix& B) {
    const FFPtr& f = B.field;
    FMatrix r = B.row_reduced();
    std::vector<long> pivot_of_col(B.cols, -1);
    long rank = 0;
    for (long i = 0; i < r.rows; ++i) {
        long lead = -1;
        for (long j = 0; j < r.cols; ++j)
            if (r.at(i, j) != FiniteField::ZERO) {
                lead = j;
                break;
            }
        if (lead < 0) break;
        pivot_of_col[lead] = i;
        ++rank;
    }
    FMatrix basis(f, B.cols, B.cols - rank);
    long out = 0;
    for (long j = 0; j < B.cols; ++j) {
        if (pivot_of_col[j] >= 0) continue;
        basis.at(j, out) = f->unit();
        for (long c = 0; c < B.cols; ++c)
            if (pivot_of_col[c] >= 0) basis.at(c, out) = f->neg(r.at(pivot_of_col[c], j));
        ++out;
    }
    return basis;
}

long canonical_nonsquare(const FFPtr& f) {
    for (long c = 2; c < f->p(); ++c) {
        long x = f->from_int(c);
        if (x % 2 == 1) return x;  // odd exponent of the generator: nonsquare
    }
    throw std::logic_error("no nonsquare found (characteristic 2?)");
}

Space make_space(SpaceKind kind, long d, long q) {
    long p = q, a = 1;
    for (long c = 2; c * c <= p; ++c)
        while (p % c == 0 && p > c) {
            p /= c;
            ++a;
        }
    // now q = p^a with p prime
    if (q != [&] { long v = 1; for (long i = 0; i < a; ++i) v *= p; return v; }())
        throw std::invalid_argument("make_space: q must be a prime power");
    if (p == 2) throw std::invalid_argument("make_space: even characteristic unsupported");
    FFPtr F = FiniteField::get(p, a);
    FFPtr E = (kind == SpaceKind::Hermitian) ? FiniteField::get(p, 2 * a) : F;
    if (d < 1) throw std::invalid_argument("make_space: dimension must be positive");
    if (kind == SpaceKind::Symplectic && d % 2 != 0)
        throw std::invalid_argument("make_space: symplectic dimension must be even");

    Space s;
    s.kind = kind;
    s.F = F;
    s.E = E;
    s.d = d;
    s.eps = (kind == SpaceKind::Symplectic) ? -1 : 1;
    s.gram = FMatrix::zero(E, d, d);
    switch (kind) {
        case SpaceKind::GL:
            break;
        case SpaceKind::Symplectic: {
            // J_n: <b_i, b_{-j}> = delta_ij in the basis (b_1..b_n, b_{-n}..b_{-1})
            long n = d / 2;
            for (long i = 0; i < n; ++i) {
                s.gram.at(i, d - 1 - i) = E->unit();
                s.gram.at(d - 1 - i, i) = E->neg(E->unit());
            }
            break;
        }
        case SpaceKind::Hermitian:
            for (long i = 0; i < d; ++i) s.gram.at(i, i) = E->unit();
            break;
        case SpaceKind::OrthogonalSplit:
        case SpaceKind::OrthogonalNonsplit: {
            // alternating (1, -1) pairs, trailing 1 when odd
            for (long i = 0; i < d; ++i)
                s.gram.at(i, i) = (i % 2 == 0) ? E->unit() : E->neg(E->unit());
            if (kind == SpaceKind::OrthogonalNonsplit)
                s.gram.at(d - 1, d - 1) =
                    E->mul(s.gram.at(d - 1, d - 1), canonical_nonsquare(E));
            break;
        }
    }
    return s;
}

// --- doubled space ---

DoubledSpace double_space(const Space& space) {
    const FFPtr& E = space.E;
    long d = space.d;
    long half = E->inv(E->from_int(2));

    DoubledSpace ds;
    ds.parent = space;

    // S matrix
    if (space.kind == SpaceKind::Symplectic) {
        ds.S = FMatrix::zero(E, d, d);
        long n = d / 2;
        for (long i = 0; i < d; ++i)
            ds.S.at(i, i) = (i < n) ? E->neg(E->unit()) : E->unit();
    } else if (space.kind == SpaceKind::GL) {
        ds.S = FMatrix::identity(E, d);  // placeholder: no form on the GL side
    } else {
        // w_d T with T the diagonal Gram
        ds.S = FMatrix::zero(E, d, d);
        for (long i = 0; i < d; ++i) ds.S.at(d - 1 - i, i) = space.gram.at(i, i);
    }

    // Change of basis: columns of C are the vectors of B~ in (plus, minus)
    // coordinates.  A = (1/2) S^{-1} for nondegenerate kinds, I for GL.
    FMatrix A = (space.kind == SpaceKind::GL) ? FMatrix::identity(E, d)
                                              : ds.S.inverse().scaled(half);
    ds.C = FMatrix::zero(E, 2 * d, 2 * d);
    for (long i = 0; i < d; ++i) {
        ds.C.at(i, i) = E->unit();
        ds.C.at(d + i, i) = E->unit();
        for (long j = 0; j < d; ++j) {
            ds.C.at(i, d + j) = A.at(i, j);
            ds.C.at(d + i, d + j) = E->neg(A.at(i, j));
        }
    }
    ds.C_inv = ds.C.inverse();

    // The doubled space as a Space: Gram of B~ computed from the direct sum
    // form <.,.> on V^+ minus the form on V^-.
    Space box;
    box.kind = (space.kind == SpaceKind::OrthogonalNonsplit) ? SpaceKind::OrthogonalSplit
                                                             : space.kind;
    box.F = space.F;
    box.E = space.E;
    box.d = 2 * d;
    box.eps = space.eps;
    if (space.kind == SpaceKind::GL) {
        box.gram = FMatrix::zero(E, 2 * d, 2 * d);
    } else {
        FMatrix gpm = FMatrix::zero(E, 2 * d, 2 * d);
        for (long i = 0; i < d; ++i)
            for (long j = 0; j < d; ++j) {
                gpm.at(i, j) = space.gram.at(i, j);
                gpm.at(d + i, d + j) = E->neg(space.gram.at(i, j));
            }
        box.gram = ds.C.transpose() * gpm * space.conj_matrix(ds.C);
    }
    ds.box = box;
    return ds;
}

FMatrix DoubledSpace::iota(const FMatrix& g1, const FMatrix& g2) const {
    if (!parent.is_isometry(g1) || !parent.is_isometry(g2))
        throw std::invalid_argument("iota: inputs must be isometries");
    long d = parent.d;
    const FFPtr& E = parent.E;
    FMatrix D = FMatrix::zero(E, 2 * d, 2 * d);
    for (long i = 0; i < d; ++i)
        for (long j = 0; j < d; ++j) {
            D.at(i, j) = g1.at(i, j);
            D.at(d + i, d + j) = g2.at(i, j);
        }
    return C_inv * D * C;
}

FMatrix DoubledSpace::weyl_delta() const {
    const FFPtr& E = parent.E;
    FMatrix id = FMatrix::identity(E, parent.d);
    // iota(id, -id), but computed directly since -id is always an isometry
    long d = parent.d;
    FMatrix D = FMatrix::zero(E, 2 * d, 2 * d);
    for (long i = 0; i < d; ++i) {
        D.at(i, i) = E->unit();
        D.at(d + i, d + i) = E->neg(E->unit());
    }
    return C_inv * D * C;
}

FMatrix DoubledSpace::exp_unipotent(const FMatrix& T) const {
    if (!parent.in_lie_algebra(T))
        throw std::invalid_argument("exp_unipotent: input not in the Lie algebra");
    long d = parent.d;
    const FFPtr& E = parent.E;
    long half = E->inv(E->from_int(2));
    // In (plus, minus) coordinates: v+ -> v+ + ((Tv)+ + (Tv)-)/2,
    //                               v- -> v- - ((Tv)+ + (Tv)-)/2.
    FMatrix D = FMatrix::zero(E, 2 * d, 2 * d);
    for (long i = 0; i < d; ++i) {
        D.at(i, i) = E->unit();
        D.at(d + i, d + i) = E->unit();
        for (long j = 0; j < d; ++j) {
            long h = E->mul(half, T.at(i, j));
            D.at(i, j) = E->add(D.at(i, j), h);
            D.at(d + i, j) = E->add(D.at(d + i, j), h);
            D.at(i, d + j) = E->sub(D.at(i, d + j), h);
            D.at(d + i, d + j) = E->sub(D.at(d + i, d + j), h);
        }
    }
    return C_inv * D * C;
}

bool DoubledSpace::in_siegel_parabolic(const FMatrix& h) const {
    long d = parent.d;
    for (long i = d; i < 2 * d; ++i)
        for (long j = 0; j < d; ++j)
            if (h.at(i, j) != FiniteField::ZERO) return false;
    return true;
}

bool DoubledSpace::in_op_siegel_parabolic(const FMatrix& h) const {
    long d = parent.d;
    for (long i = 0; i < d; ++i)
        for (long j = d; j < 2 * d; ++j)
            if (h.at(i, j) != FiniteField::ZERO) return false;
    return true;
}

FMatrix cayley_to_group(const DoubledSpace& ds, const FMatrix& X) {
    const FFPtr& E = ds.parent.E;
    long d = ds.parent.d;
    FMatrix I = FMatrix::identity(E, d);
    FMatrix twoSX = (ds.S * X).scaled(E->from_int(2));
    FMatrix den = I - twoSX;
    if (den.det() == FiniteField::ZERO)
        throw std::domain_error("cayley: outside the big cell (I - 2SX singular)");
    return (I + twoSX) * den.inverse();
}

FMatrix cayley_to_lie(const DoubledSpace& ds, const FMatrix& h) {
    const FFPtr& E = ds.parent.E;
    long d = ds.parent.d;
    FMatrix I = FMatrix::identity(E, d);
    FMatrix hpI = h + I;
    if (hpI.det() == FiniteField::ZERO)
        throw std::domain_error("cayley: outside the big cell (h + I singular)");
    long half = E->inv(E->from_int(2));
    return (ds.S.inverse() * hpI.inverse() * (h - I)).scaled(half);
}

}  // namespace gfw
