#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "gfw/doubling.hpp"

using namespace gfw;

namespace {

// Shared on-disk cache for group enumerations and coset tables so the
// heavier fixtures are computed once per run.
struct CacheEnv {
    std::filesystem::path dir;
    CacheEnv() {
        dir = std::filesystem::temp_directory_path() / "gfw_doubling_test_cache";
        std::filesystem::create_directories(dir);
        setenv("GFW_CACHE_DIR", dir.string().c_str(), 1);
    }
    ~CacheEnv() {
        unsetenv("GFW_CACHE_DIR");
        std::error_code ec;
        std::filesystem::remove_all(dir, ec);
    }
} cache_env;

// Cyclotomic context large enough for all character values of G(V) and all
// characters of E^x; extra_orders admits torus characters of quadratic
// extensions when needed.
CharacterTable table_for(const Space& s, std::vector<long> extra_orders = {}) {
    auto G = enumerate_group(s);
    std::vector<long> orders{s.E->order(), 2};
    for (long i = 0; i < G->order(); ++i) orders.push_back(element_order(*G, i));
    for (long n : extra_orders) orders.push_back(n);
    long n = choose_cyclotomic_order(orders, s.F->p());
    auto ctx = std::make_shared<ScalarContext>(n, s.F->size());
    return character_table(G, ctx);
}

ScalarCtxPtr ctx_for_fields(const FFPtr& E, const FFPtr& F) {
    std::vector<long> orders{E->order(), 2};
    long n = choose_cyclotomic_order(orders, F->p());
    return std::make_shared<ScalarContext>(n, F->size());
}

long trivial_index(const CharacterTable& tab) {
    for (long p = 0; p < tab.size(); ++p) {
        bool ok = true;
        for (size_t c = 0; c < tab.group->classes.size() && ok; ++c)
            if (!(tab.irreducibles[p].at_class(c) == Scalar::one(tab.ctx))) ok = false;
        if (ok) return p;
    }
    return -1;
}

// Index of the one-dimensional representation equal to chi(det) on an
// abelian (d = 1) group; -1 when absent.
long char_index(const CharacterTable& tab, const MultChar& chi) {
    const auto& G = tab.group;
    for (long p = 0; p < tab.size(); ++p) {
        bool ok = true;
        for (size_t c = 0; c < G->classes.size() && ok; ++c) {
            long gi = G->classes[c].rep;
            if (!(tab.irreducibles[p].at_class(c) == chi.value(tab.ctx, G->mat(gi).at(0, 0))))
                ok = false;
        }
        if (ok) return p;
    }
    return -1;
}

// True when c appears in the full cuspidal support of irreducible pi of
// GL_d(E), d <= 2 (for d = 2 via induction from the subgroup acting
// trivially on V / X, X a line).
bool gl_supports(const CharacterTable& tab, long pi, const MultChar& c) {
    const auto& G = tab.group;
    const Space& s = G->space;
    if (s.d == 1) return char_index(tab, c) == pi;
    FMatrix X(s.E, 2, 1), Y(s.E, 2, 1);
    X.at(0, 0) = s.E->unit();
    Y.at(1, 0) = s.E->unit();
    auto pd = parabolic_from_flag(G, X, Y);
    std::vector<long> R;
    for (long p : pd.P)
        if (G->mat(p).at(1, 1) == s.E->unit()) R.push_back(p);
    ClassFunction ind = induce(
        G, R, [&](long p) { return c.value(tab.ctx, G->mat(p).at(0, 0)); }, tab.ctx);
    return !inner_product(tab.irreducibles[pi], ind).is_zero();
}

// Hypotheses of the multiplicity-one theorem for the pair (pi, chi).
bool mult_one_hypotheses(const CharacterTable& tab, long pi, const MultChar& chi) {
    const Space& s = tab.group->space;
    if (s.kind == SpaceKind::GL)
        return !gl_supports(tab, pi, chi) && !gl_supports(tab, pi, chi.inverse());
    return cuspidal_support_avoids(tab, pi,
                                   {chi.inverse(), chi.frobenius_twist(s.F->degree())});
}

}  // namespace

TEST_CASE("doubled coset spaces") {
    CHECK(DoubledCosets::get(make_space(SpaceKind::GL, 1, 3))->dim() == 4);
    CHECK(DoubledCosets::get(make_space(SpaceKind::Symplectic, 2, 3))->dim() == 40);

    CHECK(FlagCosets::get(SpaceKind::GL, 1, 3)->dim() == 4);
    CHECK(FlagCosets::get(SpaceKind::Symplectic, 1, 3)->dim() == 4);
    CHECK(FlagCosets::get(SpaceKind::OrthogonalSplit, 1, 3)->dim() == 2);
    CHECK(FlagCosets::get(SpaceKind::Hermitian, 1, 3)->dim() == 4);
    CHECK(FlagCosets::get(SpaceKind::Symplectic, 2, 3)->dim() == 160);
    CHECK(FlagCosets::get(SpaceKind::OrthogonalSplit, 2, 3)->dim() == 32);
}

TEST_CASE("zeta of the standard section is one") {
    for (auto s : {make_space(SpaceKind::GL, 1, 3), make_space(SpaceKind::Symplectic, 2, 3)}) {
        auto tab = table_for(s);
        for (long j = 0; j < 2; ++j) {
            MultChar chi(s.E, j);
            DegPS I = build_degps(s, chi, tab.ctx);
            for (long pi = 0; pi < tab.size(); ++pi)
                CHECK(zeta_scalar(I, I.f0(), tab, pi) == Scalar::one(tab.ctx));
        }
    }
}

TEST_CASE("frozen Jacobi sums and gamma values") {
    // GL_1(F_3), pi = chi = the sign character: J = Gamma = -1/sqrt(3).
    {
        Space s = make_space(SpaceKind::GL, 1, 3);
        auto tab = table_for(s);
        MultChar beta(s.E, 1);
        long pi = char_index(tab, beta);
        REQUIRE(pi >= 0);
        Scalar expect = -Scalar::q_half_power(tab.ctx, -1);
        CHECK(jacobi_sum(tab, pi, beta) == expect);
        CHECK(gamma_dbl(tab, pi, beta) == expect);
    }
    // Sp_2(F_3), trivial pi and chi: the sum counts g with det(1+g) != 0.
    {
        Space s = make_space(SpaceKind::Symplectic, 2, 3);
        auto tab = table_for(s);
        auto G = tab.group;
        MultChar triv(s.E, 0);
        long cnt = 0;
        FMatrix idm = FMatrix::identity(s.E, 2);
        for (long g = 0; g < G->order(); ++g)
            if ((idm + G->mat(g)).det() != FiniteField::ZERO) ++cnt;
        Scalar expect = Scalar::integer(tab.ctx, cnt) * Scalar::q_half_power(tab.ctx, -3);
        CHECK(jacobi_sum(tab, trivial_index(tab), triv) == expect);
    }
}

TEST_CASE("gamma equals the dual zeta scalar") {
    struct Case {
        Space s;
        long max_pi;
    };
    std::vector<Case> cases = {{make_space(SpaceKind::GL, 1, 3), 99},
                               {make_space(SpaceKind::GL, 1, 5), 99},
                               {make_space(SpaceKind::Symplectic, 2, 3), 99},
                               {make_space(SpaceKind::OrthogonalSplit, 2, 3), 99},
                               {make_space(SpaceKind::OrthogonalNonsplit, 2, 3), 99},
                               {make_space(SpaceKind::Hermitian, 1, 3), 99},
                               {make_space(SpaceKind::GL, 2, 3), 3},
                               {make_space(SpaceKind::Hermitian, 2, 3), 3}};
    for (const auto& c : cases) {
        auto tab = table_for(c.s);
        CAPTURE(c.s.describe());
        long nchi = std::min<long>(c.s.E->order(), 3);
        for (long j = 0; j < nchi; ++j) {
            MultChar chi(c.s.E, j);
            for (long pi = 0; pi < std::min(c.max_pi, tab.size()); ++pi)
                CHECK(gamma_dbl(tab, pi, chi) == dual_zeta_scalar(tab, pi, chi));
        }
    }
}

TEST_CASE("intertwining operator basics") {
    Space s = make_space(SpaceKind::GL, 1, 3);
    auto ctx = std::make_shared<ScalarContext>(12, 3);
    MultChar triv(s.E, 0);
    DegPS I = build_degps(s, triv, ctx);
    OperatorOnDegPS M = intertwining_M(I);
    CHECK(M.rank() == M.dim);
    // M fixes the constant section up to sqrt(q).
    std::vector<Scalar> cst(I.dim(), Scalar::one(ctx));
    auto Mc = M.apply(cst);
    Scalar rt = Scalar::q_half_power(ctx, 1);
    for (long i = 0; i < I.dim(); ++i) CHECK(Mc[i] == rt * cst[i]);
}

TEST_CASE("involutivity on the multiplicity-one locus") {
    Space s = make_space(SpaceKind::GL, 1, 5);
    auto tab = table_for(s);
    MultChar chi(s.E, 1);
    MultChar cbi = conj_inverse_char(s, chi);
    DegPS I = build_degps(s, chi, tab.ctx);
    DegPS J = build_degps(s, cbi, tab.ctx);
    OperatorOnDegPS comp = intertwining_M(J) * intertwining_M(I);
    Scalar c;
    REQUIRE(comp.is_scalar(&c));
    long onlocus = 0;
    for (long pi = 0; pi < tab.size(); ++pi) {
        if (multiplicity_one_dimension(tab, pi, chi) != 1) continue;
        ++onlocus;
        CHECK(tab.omega_minus_one(pi) * gamma_dbl(tab, pi, chi) * gamma_dbl(tab, pi, cbi) == c);
    }
    CHECK(onlocus == 2);  // the four characters minus chi^{+-1}
}

TEST_CASE("multiplicity one dimensions") {
    // GL_1(F_5): 1 away from chi^{+-1}; 2 on chi^{+-1}; Remark counts at the
    // self-paired points.
    {
        Space s = make_space(SpaceKind::GL, 1, 5);
        auto tab = table_for(s);
        MultChar chi(s.E, 1);
        long pc = char_index(tab, chi), pci = char_index(tab, chi.inverse());
        for (long pi = 0; pi < tab.size(); ++pi) {
            long expect = (pi == pc || pi == pci) ? 2 : 1;
            CHECK(multiplicity_one_dimension(tab, pi, chi) == expect);
        }
        MultChar one(s.E, 0), quad(s.E, 2);
        for (long pi = 0; pi < tab.size(); ++pi) {
            CHECK(multiplicity_one_dimension(tab, pi, one) ==
                  (pi == trivial_index(tab) ? 3 : 1));
            CHECK(multiplicity_one_dimension(tab, pi, quad) ==
                  (pi == char_index(tab, quad) ? 3 : 1));
        }
    }
    // Isometry groups at pi = 1, chi = 1: dimension is (Witt index) + 1.
    {
        auto tab = table_for(make_space(SpaceKind::Symplectic, 2, 3));
        CHECK(multiplicity_one_dimension(tab, trivial_index(tab), MultChar(tab.group->space.E, 0)) == 2);
    }
    {
        auto tab = table_for(make_space(SpaceKind::OrthogonalNonsplit, 2, 3));
        CHECK(multiplicity_one_dimension(tab, trivial_index(tab), MultChar(tab.group->space.E, 0)) == 1);
    }
    // Under the hypotheses of the theorem the dimension is 1.
    for (auto s : {make_space(SpaceKind::GL, 2, 3), make_space(SpaceKind::Symplectic, 2, 3),
                   make_space(SpaceKind::Hermitian, 1, 3)}) {
        auto tab = table_for(s);
        CAPTURE(s.describe());
        for (long j = 0; j < s.E->order(); ++j) {
            MultChar chi(s.E, j);
            for (long pi = 0; pi < tab.size(); ++pi)
                if (mult_one_hypotheses(tab, pi, chi))
                    CHECK(multiplicity_one_dimension(tab, pi, chi) == 1);
        }
    }
}

// Iwahori-Hecke relations for the normalized simple-reflection operators
// m*_i = chi(-1) m_i (i < d) and m*_d = chi(delta_V) m_d.  The central
// relation carries chi_d(-1) on the identity term for the symplectic tower
// because s_d squares to -1 there; for the other kinds s_d^2 = 1 (and in the
// Hermitian fixed regime chi(-1) = 1 automatically).
static void check_hecke(SpaceKind kind, long d, long q, long nchi) {
    auto fc = FlagCosets::get(kind, d, q);
    const FFPtr &E = fc->E(), &F = fc->F();
    auto ctx = ctx_for_fields(E, F);
    for (long j = 0; j < nchi; ++j) {
        MultChar chi(E, j);
        PSTuple tup = ps_tuple_constant(fc, chi);
        for (long i = 1; i <= d; ++i) {
            CAPTURE(static_cast<int>(kind));
            CAPTURE(d);
            CAPTURE(q);
            CAPTURE(j);
            CAPTURE(i);
            PrincipalSeries ps{fc, tup, ctx};
            PSTuple tgt;
            SparseOp m1 = simple_reflection_m(ps, i, &tgt);
            PrincipalSeries ps2{fc, tgt, ctx};
            PSTuple back;
            SparseOp m2 = simple_reflection_m(ps2, i, &back);
            REQUIRE(back == tup);
            Scalar sgn = (kind == SpaceKind::Symplectic && i == d)
                             ? chi.value(ctx, E->neg(E->unit()))
                             : Scalar::one(ctx);
            OperatorOnDegPS C = m2.dense(ctx) * m1.dense(ctx);
            OperatorOnDegPS id = OperatorOnDegPS::identity_op(ctx, fc->dim());
            if (tgt == tup) {
                Scalar norm, c;
                bool delta1;
                if (kind != SpaceKind::GL && i == d) {
                    norm = chi.value(ctx, fc->delta_element());
                    delta1 = chi.restrict_to(F).is_trivial() &&
                             !(E->size() == F->size() && fc->eps() == 1);
                    c = Scalar::q_half_power(ctx, 1);
                } else {
                    norm = chi.value(ctx, E->neg(E->unit()));
                    delta1 = true;
                    c = Scalar::q_half_power(ctx, E->degree());
                }
                Scalar coeff = delta1 ? (c - c.inverse()) : Scalar::zero(ctx);
                OperatorOnDegPS rhs = m1.dense(ctx).scaled(norm * coeff) + id.scaled(sgn);
                CHECK(C.scaled(norm * norm) == rhs);
            } else {
                CHECK(C == id.scaled(sgn));
            }
        }
    }
}

TEST_CASE("Hecke quadratic relations") {
    check_hecke(SpaceKind::Symplectic, 1, 3, 2);
    check_hecke(SpaceKind::Symplectic, 1, 5, 4);
    check_hecke(SpaceKind::OrthogonalSplit, 1, 3, 2);
    check_hecke(SpaceKind::Hermitian, 1, 3, 8);
    check_hecke(SpaceKind::GL, 1, 3, 2);
    check_hecke(SpaceKind::GL, 1, 5, 4);
    check_hecke(SpaceKind::Symplectic, 2, 3, 2);
    check_hecke(SpaceKind::OrthogonalSplit, 2, 3, 2);
}

TEST_CASE("inner reflection is invertible across a genuine swap") {
    // Sp, d = 2, q = 5, tuple (chi, chi^{-1}) with chi of order 4: s_1 swaps
    // the entries and the two operators compose to the identity.
    auto fc = FlagCosets::get(SpaceKind::Symplectic, 2, 5);
    auto ctx = ctx_for_fields(fc->E(), fc->F());
    MultChar chi(fc->E(), 1);
    PSTuple tup = ps_tuple_constant(fc, chi);
    tup.chars[1] = chi.inverse();
    PrincipalSeries ps{fc, tup, ctx};
    PSTuple tgt;
    SparseOp m1 = simple_reflection_m(ps, 1, &tgt);
    REQUIRE(!(tgt == tup));
    PrincipalSeries ps2{fc, tgt, ctx};
    PSTuple back;
    SparseOp m2 = simple_reflection_m(ps2, 1, &back);
    REQUIRE(back == tup);
    long dim = fc->dim();
    bool ok = true;
    for (long k = 0; k < dim; ++k) {
        std::vector<Scalar> e(dim, Scalar::zero(ctx));
        e[k] = Scalar::one(ctx);
        auto v = m2.apply(m1.apply(e));
        for (long r = 0; r < dim; ++r)
            if (!(v[r] == (r == k ? Scalar::one(ctx) : Scalar::zero(ctx)))) ok = false;
    }
    CHECK(ok);
}

TEST_CASE("intertwining operator factors through simple reflections") {
    struct Case {
        SpaceKind kind;
        long d, q, nchi;
    };
    for (auto c : std::vector<Case>{{SpaceKind::GL, 1, 3, 2},
                                    {SpaceKind::GL, 1, 5, 2},
                                    {SpaceKind::Hermitian, 1, 3, 3},
                                    {SpaceKind::Symplectic, 2, 3, 2},
                                    {SpaceKind::OrthogonalSplit, 2, 3, 2},
                                    {SpaceKind::OrthogonalNonsplit, 2, 3, 2}}) {
        Space s = make_space(c.kind, c.d, c.q);
        auto ctx = ctx_for_fields(s.E, s.F);
        CAPTURE(s.describe());
        for (long j = 0; j < c.nchi; ++j) CHECK(factorize_M_check(s, MultChar(s.E, j), ctx));
    }
}

TEST_CASE("multiplicativity along parabolic induction") {
    // Sp_2(F_5): chi of order 4 produces verified rows; chi trivial fails the
    // conjugate-inverse condition and reports Skip.
    {
        Space s = make_space(SpaceKind::Symplectic, 2, 5);
        auto tab = table_for(s);
        auto flags = standard_flags(s);
        REQUIRE(!flags.empty());
        MultChar tau(s.E, 1), chi1(s.E, 1), chi0(s.E, 0);
        auto rep = multiplicativity_check(tab, flags[0], tau, nullptr, chi1);
        CHECK(rep.status == CheckStatus::Pass);
        CHECK(!rep.rows.empty());
        for (const auto& row : rep.rows) {
            CAPTURE(row.pi);
            CHECK(row.status == CheckStatus::Pass);
            CHECK(row.lhs == row.rhs);
        }
        CHECK(multiplicativity_check(tab, flags[0], tau, nullptr, chi0).status ==
              CheckStatus::Skip);
    }
    // GL_2(F_3): every character satisfies chi^2 = 1, so the identity is
    // outside its hypotheses for every chi.
    {
        Space s = make_space(SpaceKind::GL, 2, 3);
        auto tab = table_for(s);
        auto flags = standard_flags(s);
        MultChar tau(s.E, 1), pi0(s.E, 0), chi(s.E, 1);
        CHECK(multiplicativity_check(tab, flags[0], tau, &pi0, chi).status == CheckStatus::Skip);
    }
    // U_2(F_9): chi of order 8 passes; chi of order 4 has chi^{1+c} = 1.
    {
        Space s = make_space(SpaceKind::Hermitian, 2, 3);
        auto tab = table_for(s);
        auto flags = standard_flags(s);
        MultChar tau(s.E, 1);
        auto rep = multiplicativity_check(tab, flags[0], tau, nullptr, MultChar(s.E, 1));
        CHECK(rep.status == CheckStatus::Pass);
        CHECK(!rep.rows.empty());
        for (const auto& row : rep.rows) CHECK(row.status == CheckStatus::Pass);
        CHECK(multiplicativity_check(tab, flags[0], tau, nullptr, MultChar(s.E, 2)).status ==
              CheckStatus::Skip);
    }
}

TEST_CASE("Gauss sum formulas") {
    for (int c = 0; c < 3; ++c) {
        Space s = c == 0   ? make_space(SpaceKind::Symplectic, 2, 3)
                  : c == 1 ? make_space(SpaceKind::Hermitian, 1, 3)
                           : make_space(SpaceKind::Symplectic, 2, 5);
        long qF = s.F->size();
        auto tab = table_for(s, {qF * qF - 1});
        AddChar psi = AddChar::standard(s.F);
        auto rep = gauss_sum_theorem_check(tab, psi);
        CAPTURE(s.describe());
        CHECK(rep.ok());
        for (const auto& [pi, st] : rep.cuspidal_matches) {
            CAPTURE(pi);
            CHECK(st != CheckStatus::Fail);
        }
        for (const auto& [th, st] : rep.theta_matches) {
            CAPTURE(th);
            CHECK(st != CheckStatus::Fail);
        }
        // Over F_3 no character is in general position for the cuspidal
        // branch of Sp_2; over F_5 and for U_1(F_9) matches must exist.
        if (c != 0) {
            bool any = false;
            for (const auto& [pi, st] : rep.cuspidal_matches) any |= st == CheckStatus::Pass;
            CHECK(any);
        }
    }
}

TEST_CASE("flat operator support and values") {
    Space s = make_space(SpaceKind::GL, 2, 3);
    auto ctx = std::make_shared<ScalarContext>(24, 3);
    for (long j = 0; j < 2; ++j) {
        CAPTURE(j);
        CHECK(flat_operator_check(s, MultChar(s.E, j), ctx));
    }
}

TEST_CASE("orthogonal groups: gamma through the connected component") {
    // Odd dimension: the two extensions of a representation of SO differ by
    // the determinant character, and their gammas differ by a sign.
    for (long q : {3L, 5L}) {
        Space s = make_space(SpaceKind::OrthogonalSplit, 1, q);
        auto tab = table_for(s);
        REQUIRE(tab.size() == 2);
        for (long j = 0; j < 2; ++j) {
            MultChar chi(s.E, j);
            CHECK(gamma_dbl(tab, 0, chi) == -gamma_dbl(tab, 1, chi));
        }
    }
    // Even dimension: gamma of an O-representation equals the SO gamma of
    // each constituent of its restriction.
    for (auto s : {make_space(SpaceKind::OrthogonalSplit, 2, 3),
                   make_space(SpaceKind::OrthogonalNonsplit, 2, 3)}) {
        auto G = enumerate_group(s);
        auto SO = connected_component_group(G);
        std::vector<long> orders{s.E->order(), 2};
        for (long i = 0; i < G->order(); ++i) orders.push_back(element_order(*G, i));
        long n = choose_cyclotomic_order(orders, s.F->p());
        auto ctx = std::make_shared<ScalarContext>(n, s.F->size());
        auto so_tab = character_table(SO, ctx);
        auto o_tab = character_table(G, ctx);
        CAPTURE(s.describe());
        long pairs = 0;
        for (long j = 0; j < 2; ++j) {
            MultChar chi(s.E, j);
            for (long p = 0; p < o_tab.size(); ++p) {
                Scalar go = gamma_dbl(o_tab, p, chi);
                for (long p0 = 0; p0 < so_tab.size(); ++p0) {
                    Scalar ip = Scalar::zero(ctx);
                    for (long i = 0; i < SO->order(); ++i) {
                        long oi = G->index(SO->mat(i));
                        ip = ip + o_tab.irreducibles[p].at_element(oi) *
                                      so_tab.irreducibles[p0].at_element(SO->inv(i));
                    }
                    if (ip.is_zero()) continue;
                    ++pairs;
                    CHECK(go == gamma_dbl_SO(so_tab, p0, chi));
                }
            }
        }
        CHECK(pairs > 0);
    }
}
