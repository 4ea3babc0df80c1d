#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <vector>

#include "gfw/spaces.hpp"

using namespace gfw;

namespace {

// All d x d matrices over the form field of s satisfying pred.
std::vector<FMatrix> all_matrices(const Space& s, const std::function<bool(const FMatrix&)>& pred) {
    long n = s.E->size();
    long cells = s.d * s.d;
    std::vector<FMatrix> out;
    std::vector<long> idx(cells, 0);
    while (true) {
        FMatrix m(s.E, s.d, s.d);
        for (long c = 0; c < cells; ++c) m.a[c] = (idx[c] == 0) ? FiniteField::ZERO : idx[c] - 1;
        if (pred(m)) out.push_back(m);
        long c = 0;
        while (c < cells && ++idx[c] == n) idx[c++] = 0;
        if (c == cells) break;
    }
    return out;
}

std::vector<FMatrix> isometries(const Space& s) {
    return all_matrices(s, [&](const FMatrix& g) { return s.is_isometry(g); });
}

FMatrix antidiag_ones(const FFPtr& f, long n) {
    FMatrix w(f, n, n);
    for (long i = 0; i < n; ++i) w.at(i, n - 1 - i) = f->unit();
    return w;
}

}  // namespace

TEST_CASE("canonical nonsquare") {
    CHECK(FiniteField::get(3, 1)->to_int(canonical_nonsquare(FiniteField::get(3, 1))) == 2);
    CHECK(FiniteField::get(5, 1)->to_int(canonical_nonsquare(FiniteField::get(5, 1))) == 2);
    CHECK(FiniteField::get(7, 1)->to_int(canonical_nonsquare(FiniteField::get(7, 1))) == 3);
}

TEST_CASE("matrix arithmetic basics") {
    auto f = FiniteField::get(5, 1);
    FMatrix m(f, 2, 2);
    m.at(0, 0) = f->from_int(1);
    m.at(0, 1) = f->from_int(2);
    m.at(1, 0) = f->from_int(3);
    m.at(1, 1) = f->from_int(4);
    CHECK(f->to_int(m.det()) == (1 * 4 - 2 * 3 + 25) % 5);
    CHECK((m * m.inverse()).is_identity());
    CHECK((m.inverse() * m).is_identity());
    CHECK(m.rank() == 2);
    FMatrix sing(f, 2, 2);
    sing.at(0, 0) = f->from_int(1);
    sing.at(0, 1) = f->from_int(2);
    sing.at(1, 0) = f->from_int(2);
    sing.at(1, 1) = f->from_int(4);
    CHECK(sing.det() == FiniteField::ZERO);
    CHECK(sing.rank() == 1);
    CHECK_THROWS_AS(sing.inverse(), std::domain_error);
    // RREF is idempotent and canonical under row scaling
    FMatrix r = sing.row_reduced();
    CHECK(r == r.row_reduced());
    CHECK(r == sing.scaled(f->from_int(3)).row_reduced());
}

TEST_CASE("isometry group orders match the classical formulas") {
    struct Row {
        SpaceKind kind;
        long d, q, order;
    };
    // |Sp_2(q)| = q(q^2-1); |O_2^+-(q)| = 2(q -+ 1); |U_1| = q+1;
    // |U_2(q)| = q(q-1)(q+1)^2; |GL_d(q)| = prod (q^d - q^i).
    std::vector<Row> rows = {
        {SpaceKind::Symplectic, 2, 3, 24},       {SpaceKind::Symplectic, 2, 5, 120},
        {SpaceKind::OrthogonalSplit, 2, 3, 4},   {SpaceKind::OrthogonalNonsplit, 2, 3, 8},
        {SpaceKind::OrthogonalSplit, 2, 5, 8},   {SpaceKind::OrthogonalNonsplit, 2, 5, 12},
        {SpaceKind::OrthogonalSplit, 1, 3, 2},   {SpaceKind::OrthogonalSplit, 3, 3, 48},
        {SpaceKind::Hermitian, 1, 3, 4},         {SpaceKind::Hermitian, 2, 3, 96},
        {SpaceKind::GL, 1, 3, 2},                {SpaceKind::GL, 2, 3, 48},
    };
    for (const auto& r : rows) {
        Space s = make_space(r.kind, r.d, r.q);
        CAPTURE(s.describe());
        CHECK(static_cast<long>(isometries(s).size()) == r.order);
    }
}

TEST_CASE("lie algebra dimensions") {
    struct Row {
        SpaceKind kind;
        long d, q, size;  // |g(V)| = q_E^dim
    };
    std::vector<Row> rows = {
        {SpaceKind::Symplectic, 2, 3, 27},        // sp_2: dim 3
        {SpaceKind::OrthogonalSplit, 2, 3, 3},    // so_2: dim 1
        {SpaceKind::OrthogonalNonsplit, 2, 3, 3},
        {SpaceKind::OrthogonalSplit, 3, 3, 27},   // so_3: dim 3
        {SpaceKind::Hermitian, 1, 3, 3},          // u_1: trace-zero line
        {SpaceKind::GL, 2, 3, 81},
    };
    for (const auto& r : rows) {
        Space s = make_space(r.kind, r.d, r.q);
        CAPTURE(s.describe());
        auto lie = all_matrices(s, [&](const FMatrix& T) { return s.in_lie_algebra(T); });
        CHECK(static_cast<long>(lie.size()) == r.size);
    }
}

TEST_CASE("discriminants separate split from non-split") {
    for (long q : {3L, 5L}) {
        CHECK(make_space(SpaceKind::OrthogonalSplit, 2, q).disc_is_trivial());
        CHECK_FALSE(make_space(SpaceKind::OrthogonalNonsplit, 2, q).disc_is_trivial());
        CHECK(make_space(SpaceKind::OrthogonalSplit, 4, q).disc_is_trivial());
        CHECK_FALSE(make_space(SpaceKind::OrthogonalNonsplit, 4, q).disc_is_trivial());
        CHECK(make_space(SpaceKind::Symplectic, 2, q).disc_is_trivial());
    }
    CHECK(make_space(SpaceKind::Hermitian, 2, 3).disc_is_trivial());
}

TEST_CASE("doubled gram is the standard split form") {
    for (long q : {3L, 5L}) {
        for (auto kind : {SpaceKind::OrthogonalSplit, SpaceKind::OrthogonalNonsplit}) {
            for (long d : {1L, 2L, 3L}) {
                Space s = make_space(kind, d, q);
                DoubledSpace ds = double_space(s);
                CAPTURE(s.describe());
                CHECK(ds.box.gram == antidiag_ones(s.E, 2 * d));
                CHECK(ds.box.kind == SpaceKind::OrthogonalSplit);
                CHECK(ds.box.disc_is_trivial());
            }
        }
        // symplectic: doubled Gram is the canonical J of twice the dimension
        Space s = make_space(SpaceKind::Symplectic, 2, q);
        DoubledSpace ds = double_space(s);
        CHECK(ds.box.gram == make_space(SpaceKind::Symplectic, 4, q).gram);
    }
    Space h = make_space(SpaceKind::Hermitian, 2, 3);
    CHECK(double_space(h).box.gram == antidiag_ones(h.E, 4));
}

TEST_CASE("iota block formula, homomorphism, and diagonal criterion") {
    for (auto [kind, d, q] : std::vector<std::tuple<SpaceKind, long, long>>{
             {SpaceKind::Symplectic, 2, 3},
             {SpaceKind::OrthogonalNonsplit, 2, 3},
             {SpaceKind::Hermitian, 1, 3},
             {SpaceKind::Hermitian, 2, 3}}) {
        Space s = make_space(kind, d, q);
        DoubledSpace ds = double_space(s);
        const FFPtr& E = s.E;
        long half = E->inv(E->from_int(2));
        long quarter = E->inv(E->from_int(4));
        auto G = isometries(s);
        FMatrix I = FMatrix::identity(E, d);
        FMatrix Sinv = ds.S.inverse();
        CAPTURE(s.describe());

        for (const auto& g : G) {
            // iota(g, 1) in block form:
            //   [ (g+1)/2        (g-1) S^{-1} / 4 ]
            //   [ S (g-1)        S (g+1) S^{-1} / 2 ]
            FMatrix got = ds.iota(g, I);
            FMatrix tl = (g + I).scaled(half);
            FMatrix tr = ((g - I) * Sinv).scaled(quarter);
            FMatrix bl = ds.S * (g - I);
            FMatrix br = (ds.S * (g + I) * Sinv).scaled(half);
            bool ok = true;
            for (long i = 0; i < d && ok; ++i)
                for (long j = 0; j < d && ok; ++j)
                    ok = got.at(i, j) == tl.at(i, j) && got.at(i, d + j) == tr.at(i, j) &&
                         got.at(d + i, j) == bl.at(i, j) && got.at(d + i, d + j) == br.at(i, j);
            CHECK(ok);
            CHECK(ds.box.is_isometry(got));
        }
        // homomorphism on a deterministic sample
        for (size_t i = 0; i < G.size(); i += 3)
            for (size_t j = 0; j < G.size(); j += 5) {
                const auto& g1 = G[i];
                const auto& g2 = G[j];
                CHECK(ds.iota(g1, g2) == ds.iota(g1, I) * ds.iota(I, g2));
                CHECK(ds.iota(g1, I) * ds.iota(g2, I) == ds.iota(g1 * g2, I));
            }
    }

    // iota(g1, g2) stabilizes the diagonal iff g1 = g2: exhaustive on Sp_2(F_3)
    Space sp = make_space(SpaceKind::Symplectic, 2, 3);
    DoubledSpace dsp = double_space(sp);
    auto G = isometries(sp);
    for (const auto& g1 : G)
        for (const auto& g2 : G)
            CHECK(dsp.in_siegel_parabolic(dsp.iota(g1, g2)) == (g1 == g2));
}

TEST_CASE("weyl element") {
    for (auto [kind, d, q] : std::vector<std::tuple<SpaceKind, long, long>>{
             {SpaceKind::Symplectic, 2, 3},
             {SpaceKind::OrthogonalSplit, 2, 5},
             {SpaceKind::OrthogonalNonsplit, 3, 3},
             {SpaceKind::Hermitian, 2, 3}}) {
        Space s = make_space(kind, d, q);
        DoubledSpace ds = double_space(s);
        const FFPtr& E = s.E;
        FMatrix w = ds.weyl_delta();
        CAPTURE(s.describe());

        // block form [[0, S^{-1}/2], [2S, 0]]
        FMatrix tr = ds.S.inverse().scaled(E->inv(E->from_int(2)));
        FMatrix bl = ds.S.scaled(E->from_int(2));
        bool ok = true;
        for (long i = 0; i < d && ok; ++i)
            for (long j = 0; j < d && ok; ++j)
                ok = w.at(i, j) == FiniteField::ZERO && w.at(d + i, d + j) == FiniteField::ZERO &&
                     w.at(i, d + j) == tr.at(i, j) && w.at(d + i, j) == bl.at(i, j);
        CHECK(ok);
        CHECK((w * w).is_identity());
        CHECK(ds.box.is_isometry(w));
        // conjugation by w maps Siegel unipotents into the opposite parabolic
        auto lie = all_matrices(s, [&](const FMatrix& T) { return s.in_lie_algebra(T); });
        for (size_t i = 0; i < lie.size(); i += 2) {
            FMatrix c = w * ds.exp_unipotent(lie[i]) * w;
            CHECK(ds.in_op_siegel_parabolic(c));
        }
    }
}

TEST_CASE("siegel unipotents: exp is an isomorphism onto N with the stated matrix") {
    for (auto [kind, d, q] : std::vector<std::tuple<SpaceKind, long, long>>{
             {SpaceKind::Symplectic, 2, 3},
             {SpaceKind::OrthogonalSplit, 2, 3},
             {SpaceKind::OrthogonalNonsplit, 2, 5},
             {SpaceKind::Hermitian, 1, 3},
             {SpaceKind::Hermitian, 2, 3}}) {
        Space s = make_space(kind, d, q);
        DoubledSpace ds = double_space(s);
        const FFPtr& E = s.E;
        long d2 = 2 * d;
        long half = E->inv(E->from_int(2));
        CAPTURE(s.describe());

        auto lie = all_matrices(s, [&](const FMatrix& T) { return s.in_lie_algebra(T); });
        std::set<std::vector<long>> images;
        FMatrix wd = antidiag_ones(E, d);
        for (const auto& T : lie) {
            FMatrix u = ds.exp_unipotent(T);
            images.insert(u.a);
            CHECK(ds.box.is_isometry(u));
            CHECK(ds.in_siegel_parabolic(u));
            // exact block form [[I, T S^{-1} / 2], [0, I]]
            FMatrix X = (T * ds.S.inverse()).scaled(half);
            bool ok = true;
            for (long i = 0; i < d && ok; ++i)
                for (long j = 0; j < d && ok; ++j) {
                    long want_tl = (i == j) ? E->unit() : FiniteField::ZERO;
                    ok = u.at(i, j) == want_tl && u.at(d + i, d + j) == want_tl &&
                         u.at(i, d + j) == X.at(i, j) && u.at(d + i, j) == FiniteField::ZERO;
                }
            CHECK(ok);
            // the Siegel coordinate satisfies X w_d + eps w_d conj(X)^T = 0
            FMatrix lhs = X * wd;
            FMatrix rhs = (wd * s.conj_transpose(X)).scaled(
                s.eps == 1 ? E->unit() : E->neg(E->unit()));
            CHECK(lhs + rhs == FMatrix::zero(E, d, d));
        }
        // injective, hence a bijection onto its image of size |g(V)|
        CHECK(images.size() == lie.size());
        // one-parameter group law: exp(T)exp(T') = exp(T+T')
        for (size_t i = 0; i < lie.size(); i += 2)
            for (size_t j = 0; j < lie.size(); j += 3)
                CHECK(ds.exp_unipotent(lie[i]) * ds.exp_unipotent(lie[j]) ==
                      ds.exp_unipotent(lie[i] + lie[j]));
        // exp(0) is the identity
        CHECK(ds.exp_unipotent(FMatrix(E, d, d)).is_identity());
    }
}

TEST_CASE("cayley transform: mutually inverse bijection on the big cell") {
    for (auto [kind, d, q] : std::vector<std::tuple<SpaceKind, long, long>>{
             {SpaceKind::Symplectic, 2, 3},
             {SpaceKind::OrthogonalNonsplit, 2, 3},
             {SpaceKind::OrthogonalSplit, 2, 5},
             {SpaceKind::Hermitian, 1, 3},
             {SpaceKind::Hermitian, 2, 3}}) {
        Space s = make_space(kind, d, q);
        DoubledSpace ds = double_space(s);
        const FFPtr& E = s.E;
        FMatrix I = FMatrix::identity(E, d);
        FMatrix wd = antidiag_ones(E, d);
        CAPTURE(s.describe());

        // domain: Siegel coordinates X with X w + eps w conj(X)^T = 0 and
        // I - 2SX invertible
        auto in_siegel_coords = [&](const FMatrix& X) {
            FMatrix rhs = (wd * s.conj_transpose(X)).scaled(
                s.eps == 1 ? E->unit() : E->neg(E->unit()));
            return X * wd + rhs == FMatrix::zero(E, d, d);
        };
        auto coords = all_matrices(s, in_siegel_coords);
        // Siegel coordinates biject with the Lie algebra via X = T S^{-1} / 2
        auto lie = all_matrices(s, [&](const FMatrix& T) { return s.in_lie_algebra(T); });
        CHECK(coords.size() == lie.size());

        // determinant class of the big cell: det = 1 when E = F, no
        // condition when E is the quadratic extension
        auto det_ok = [&](const FMatrix& h) {
            return s.E != s.F || h.det() == E->unit();
        };

        std::set<std::vector<long>> images;
        long in_cell = 0;
        for (const auto& X : coords) {
            FMatrix twoSX = (ds.S * X).scaled(E->from_int(2));
            if ((I - twoSX).det() == FiniteField::ZERO) {
                CHECK_THROWS_AS(cayley_to_group(ds, X), std::domain_error);
                continue;
            }
            ++in_cell;
            FMatrix h = cayley_to_group(ds, X);
            // lands in the isometry group, with h + I invertible, det_E trivial
            CHECK(s.is_isometry(h));
            CHECK((h + I).det() != FiniteField::ZERO);
            CHECK(det_ok(h));
            // round trip
            CHECK(cayley_to_lie(ds, h) == X);
            images.insert(h.a);
        }
        CHECK(static_cast<long>(images.size()) == in_cell);

        // surjectivity onto the big cell {h isometry : det(h+I) != 0,
        // kappa(det h) = 1} and the reverse round trip
        long cell_size = 0;
        for (const auto& h : isometries(s)) {
            if ((h + I).det() == FiniteField::ZERO) {
                CHECK_THROWS_AS(cayley_to_lie(ds, h), std::domain_error);
                continue;
            }
            if (!det_ok(h)) continue;
            ++cell_size;
            FMatrix X = cayley_to_lie(ds, h);
            CHECK(in_siegel_coords(X));
            CHECK(cayley_to_group(ds, X) == h);
        }
        CHECK(cell_size == in_cell);
    }
}

TEST_CASE("kappa lands in the norm-one kernel on determinants") {
    for (auto [kind, d, q] : std::vector<std::tuple<SpaceKind, long, long>>{
             {SpaceKind::Symplectic, 2, 3},
             {SpaceKind::OrthogonalNonsplit, 2, 5},
             {SpaceKind::Hermitian, 2, 3},
             {SpaceKind::GL, 2, 3}}) {
        Space s = make_space(kind, d, q);
        CAPTURE(s.describe());
        for (const auto& g : isometries(s)) {
            long k = s.kappa(g.det());
            CHECK(s.E->mul(k, s.conj(k)) == s.E->unit());
        }
    }
}

TEST_CASE("gl doubling uses the plus-minus basis directly") {
    Space s = make_space(SpaceKind::GL, 2, 3);
    DoubledSpace ds = double_space(s);
    const FFPtr& E = s.E;
    FMatrix I = FMatrix::identity(E, 2);
    // iota(g, 1) = (1/2) [[g+1, g-1], [g-1, g+1]]
    auto G = isometries(s);
    long half = E->inv(E->from_int(2));
    for (const auto& g : G) {
        FMatrix got = ds.iota(g, I);
        FMatrix tl = (g + I).scaled(half);
        FMatrix tr = (g - I).scaled(half);
        bool ok = true;
        for (long i = 0; i < 2 && ok; ++i)
            for (long j = 0; j < 2 && ok; ++j)
                ok = got.at(i, j) == tl.at(i, j) && got.at(i, 2 + j) == tr.at(i, j) &&
                     got.at(2 + i, j) == tr.at(i, j) && got.at(2 + i, 2 + j) == tl.at(i, j);
        CHECK(ok);
        CHECK(ds.box.is_isometry(got));  // invertibility, for the zero form
    }
    // weyl element is the block swap [[0, I], [I, 0]]
    FMatrix w = ds.weyl_delta();
    bool ok = true;
    for (long i = 0; i < 2 && ok; ++i)
        for (long j = 0; j < 2 && ok; ++j) {
            long want = (i == j) ? E->unit() : FiniteField::ZERO;
            ok = w.at(i, 2 + j) == want && w.at(2 + i, j) == want &&
                 w.at(i, j) == FiniteField::ZERO && w.at(2 + i, 2 + j) == FiniteField::ZERO;
        }
    CHECK(ok);
    // unipotents: all of M_2(F_3), upper block triangular in the doubled basis
    auto lie = all_matrices(s, [&](const FMatrix&) { return true; });
    CHECK(lie.size() == 81);
    std::set<std::vector<long>> images;
    for (const auto& T : lie) {
        FMatrix u = ds.exp_unipotent(T);
        CHECK(ds.in_siegel_parabolic(u));
        images.insert(u.a);
    }
    CHECK(images.size() == 81);
}
