#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <set>

#include "gfw/groups.hpp"

using namespace gfw;

namespace {
FMatrix col(const FFPtr& E, std::vector<long> ints) {
    FMatrix m(E, static_cast<long>(ints.size()), 1);
    for (size_t i = 0; i < ints.size(); ++i) m.at(i, 0) = E->from_int(ints[i]);
    return m;
}
}  // namespace

TEST_CASE("orders and component indices") {
    struct Row {
        SpaceKind kind;
        long d, q, order, index;
    };
    std::vector<Row> rows = {
        {SpaceKind::Symplectic, 2, 3, 24, 1},   {SpaceKind::Symplectic, 2, 5, 120, 1},
        {SpaceKind::OrthogonalSplit, 2, 3, 4, 2},  {SpaceKind::OrthogonalNonsplit, 2, 3, 8, 2},
        {SpaceKind::OrthogonalSplit, 2, 5, 8, 2},  {SpaceKind::OrthogonalNonsplit, 2, 5, 12, 2},
        {SpaceKind::OrthogonalSplit, 3, 3, 48, 2}, {SpaceKind::Hermitian, 1, 3, 4, 1},
        {SpaceKind::Hermitian, 2, 3, 96, 1},       {SpaceKind::GL, 1, 3, 2, 1},
        {SpaceKind::GL, 1, 5, 4, 1},               {SpaceKind::GL, 2, 3, 48, 1},
    };
    for (const auto& r : rows) {
        Space s = make_space(r.kind, r.d, r.q);
        auto G = enumerate_group(s);
        CAPTURE(s.describe());
        CHECK(G->order() == r.order);
        CHECK(G->g0_index() == r.index);
        // group axioms: closure and inverses via the index maps
        for (long i = 0; i < G->order(); ++i) {
            CHECK(G->mul(i, G->inv(i)) == G->identity);
            CHECK(G->mul(G->identity, i) == i);
        }
        long probe = G->order() / 2;
        for (long i = 0; i < G->order(); i += 7)
            CHECK(G->mul(i, probe) >= 0);  // closure
    }
}

TEST_CASE("budget is enforced") {
    CHECK_THROWS_AS(enumerate_group(make_space(SpaceKind::OrthogonalSplit, 2, 3), 3),
                    std::runtime_error);
}

TEST_CASE("conjugacy classes") {
    auto sp = enumerate_group(make_space(SpaceKind::Symplectic, 2, 3));
    CHECK(sp->classes.size() == 7);
    long total = 0;
    for (const auto& c : sp->classes) total += static_cast<long>(c.members.size());
    CHECK(total == 24);
    // canonical ordering: sizes non-decreasing; reps are class minima
    for (size_t c = 1; c < sp->classes.size(); ++c)
        CHECK(sp->classes[c - 1].members.size() <= sp->classes[c].members.size());
    for (const auto& c : sp->classes)
        CHECK(c.rep == *std::min_element(c.members.begin(), c.members.end()));
    // class function property: class_of is conjugation invariant
    for (long i = 0; i < sp->order(); i += 3)
        for (long g = 0; g < sp->order(); g += 5)
            CHECK(sp->class_of[sp->mul(sp->mul(sp->inv(g), i), g)] == sp->class_of[i]);
    // center of Sp_2 is {+-1}
    CHECK(sp->center.size() == 2);

    auto gl1 = enumerate_group(make_space(SpaceKind::GL, 1, 3));
    CHECK(gl1->classes.size() == 2);

    auto u2 = enumerate_group(make_space(SpaceKind::Hermitian, 2, 3));
    long u2_total = 0;
    for (const auto& c : u2->classes) u2_total += static_cast<long>(c.members.size());
    CHECK(u2_total == 96);
    CHECK(u2->center.size() == 4);  // norm-one scalars
}

TEST_CASE("borel of Sp_2(F_3)") {
    Space s = make_space(SpaceKind::Symplectic, 2, 3);
    auto G = enumerate_group(s);
    auto pd = parabolic_from_flag(G, col(s.E, {1, 0}), col(s.E, {0, 1}));
    // |B| = q(q-1) = 6: index of B is the number of lines, (q^2-1)/(q-1) = 4
    CHECK(pd.P.size() == 6);
    CHECK(pd.N.size() == 3);
    CHECK(pd.L.size() == 2);
    CHECK(pd.P.size() == pd.L.size() * pd.N.size());
    // P = L N as sets
    std::set<long> prod;
    for (long l : pd.L)
        for (long n : pd.N) prod.insert(G->mul(l, n));
    CHECK(prod == std::set<long>(pd.P.begin(), pd.P.end()));
    // N is a subgroup of G0 (all of G here) consisting of unipotents
    for (long n : pd.N) CHECK(G->g0[n] == 1);
}

TEST_CASE("maximal parabolic of GL_2(F_3)") {
    Space s = make_space(SpaceKind::GL, 2, 3);
    auto G = enumerate_group(s);
    auto pd = parabolic_from_flag(G, col(s.E, {1, 0}), col(s.E, {0, 1}));
    CHECK(pd.P.size() == 12);
    CHECK(pd.L.size() == 4);
    CHECK(pd.N.size() == 3);
}

TEST_CASE("stabilizer of an isotropic line in split O_2") {
    Space s = make_space(SpaceKind::OrthogonalSplit, 2, 3);
    auto G = enumerate_group(s);
    auto pd = parabolic_from_flag(G, col(s.E, {1, 1}), col(s.E, {1, 2}));
    CHECK(pd.P.size() == 2);  // {+-1}
    CHECK(pd.N.size() == 1);
    CHECK(pd.L.size() == 2);
}

TEST_CASE("invalid flags are rejected") {
    Space o = make_space(SpaceKind::OrthogonalSplit, 2, 3);
    auto Go = enumerate_group(o);
    CHECK_THROWS_AS(parabolic_from_flag(Go, col(o.E, {1, 0}), col(o.E, {0, 1})),
                    std::invalid_argument);  // X not isotropic
    Space sp = make_space(SpaceKind::Symplectic, 2, 3);
    auto Gsp = enumerate_group(sp);
    CHECK_THROWS_AS(parabolic_from_flag(Gsp, col(sp.E, {1, 0}), col(sp.E, {1, 0})),
                    std::invalid_argument);  // Y not dual to X
}

TEST_CASE("siegel parabolic of a doubled space via its flag") {
    // GL_1 doubled: the box group is GL_2, the diagonal is the first
    // coordinate line, and the unipotent radical matches the exp image.
    Space s = make_space(SpaceKind::GL, 1, 3);
    DoubledSpace ds = double_space(s);
    auto G = enumerate_group(ds.box);
    CHECK(G->order() == 48);
    auto pd = parabolic_from_flag(G, col(s.E, {1, 0}), col(s.E, {0, 1}));
    std::set<long> P_direct;
    for (long i = 0; i < G->order(); ++i)
        if (ds.in_siegel_parabolic(G->mat(i))) P_direct.insert(i);
    CHECK(P_direct == std::set<long>(pd.P.begin(), pd.P.end()));
    std::set<long> exp_image;
    FMatrix T(s.E, 1, 1);
    for (long t = 0; t < 3; ++t) {
        T.at(0, 0) = s.E->from_int(t);
        exp_image.insert(G->index(ds.exp_unipotent(T)));
    }
    CHECK(exp_image == std::set<long>(pd.N.begin(), pd.N.end()));

    // O_1 doubled: the box group is the split O_2
    Space o = make_space(SpaceKind::OrthogonalSplit, 1, 3);
    DoubledSpace dso = double_space(o);
    auto Go = enumerate_group(dso.box);
    CHECK(Go->order() == 4);
    auto pdo = parabolic_from_flag(Go, col(o.E, {1, 0}), col(o.E, {0, 1}));
    CHECK(pdo.N.size() == 1);  // |g(V)| = |so_1| = 1
}

TEST_CASE("cache round trip") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "gfw_group_cache_test";
    fs::create_directories(dir);
    setenv("GFW_CACHE_DIR", dir.c_str(), 1);
    Space s = make_space(SpaceKind::OrthogonalNonsplit, 2, 3);
    auto G1 = enumerate_group(s);
    bool found = false;
    for (const auto& e : fs::directory_iterator(dir)) found |= e.is_regular_file();
    CHECK(found);
    auto G2 = enumerate_group(s);  // served from cache
    CHECK(G2->order() == G1->order());
    CHECK(G2->classes.size() == G1->classes.size());
    for (long i = 0; i < G1->order(); ++i) CHECK(G1->mat(i) == G2->mat(i));
    unsetenv("GFW_CACHE_DIR");
    fs::remove_all(dir);
}
