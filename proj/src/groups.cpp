#include "gfw/groups.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace gfw {

namespace {

// All vectors of E^d as column matrices, in a fixed scan order.
std::vector<std::vector<long>> all_vectors(const FFPtr& E, long d) {
    long n = E->size();
    std::vector<std::vector<long>> out;
    std::vector<long> idx(d, 0);
    while (true) {
        std::vector<long> v(d);
        for (long i = 0; i < d; ++i) v[i] = (idx[i] == 0) ? FiniteField::ZERO : idx[i] - 1;
        out.push_back(v);
        long c = 0;
        while (c < d && ++idx[c] == n) idx[c++] = 0;
        if (c == d) break;
    }
    return out;
}

FMatrix hstack(const FMatrix& a, const FMatrix& b) {
    FMatrix r(a.field, a.rows, a.cols + b.cols);
    for (long i = 0; i < a.rows; ++i) {
        for (long j = 0; j < a.cols; ++j) r.at(i, j) = a.at(i, j);
        for (long j = 0; j < b.cols; ++j) r.at(i, a.cols + j) = b.at(i, j);
    }
    return r;
}

std::string cache_path(const Space& s) {
    const char* dir = std::getenv("GFW_CACHE_DIR");
    if (!dir || !*dir) return {};
    std::ostringstream os;
    os << dir << "/group_k" << static_cast<int>(s.kind) << "_d" << s.d << "_q" << s.F->size()
       << ".txt";
    return os.str();
}

void compute_classes(Group& G) {
    long n = G.order();
    G.class_of.assign(n, -1);
    std::vector<ConjClass> classes;
    for (long i = 0; i < n; ++i) {
        if (G.class_of[i] != -1) continue;
        ConjClass cc;
        for (long g = 0; g < n; ++g) {
            long c = G.mul(G.mul(G.inv(g), i), g);
            if (G.class_of[c] == -1) {
                G.class_of[c] = -2;  // mark, renumber below
                cc.members.push_back(c);
            }
        }
        std::sort(cc.members.begin(), cc.members.end());
        cc.rep = cc.members.front();
        for (long m : cc.members) G.class_of[m] = -2;
        classes.push_back(std::move(cc));
    }
    std::sort(classes.begin(), classes.end(), [&](const ConjClass& a, const ConjClass& b) {
        if (a.members.size() != b.members.size()) return a.members.size() < b.members.size();
        return G.elements[a.rep] < G.elements[b.rep];
    });
    for (size_t c = 0; c < classes.size(); ++c)
        for (long m : classes[c].members) G.class_of[m] = static_cast<long>(c);
    G.classes = std::move(classes);
}

void finalize(Group& G) {
    std::sort(G.elements.begin(), G.elements.end());
    for (long i = 0; i < G.order(); ++i) G.index_of[G.elements[i].a] = i;
    G.identity = G.index(FMatrix::identity(G.space.E, G.space.d));
    if (G.identity < 0) throw std::logic_error("group without identity");
    G.inv_idx.resize(G.order());
    for (long i = 0; i < G.order(); ++i) {
        long j = G.index(G.elements[i].inverse());
        if (j < 0) throw std::logic_error("group not closed under inversion");
        G.inv_idx[i] = j;
    }
    // connected component: determinant-one subgroup for E = F orthogonal kinds
    G.g0.assign(G.order(), 1);
    if (kind_is_orthogonal(G.space.kind))
        for (long i = 0; i < G.order(); ++i)
            G.g0[i] = (G.elements[i].det() == G.space.E->unit()) ? 1 : 0;
    compute_classes(G);
    G.center.clear();
    for (long i = 0; i < G.order(); ++i)
        if (G.classes[G.class_of[i]].members.size() == 1) G.center.push_back(i);
}

bool try_load(Group& G, const std::string& path) {
    std::ifstream in(path);
    if (!in) return false;
    int kind;
    long d, q, order, class_count;
    if (!(in >> kind >> d >> q >> order >> class_count)) return false;
    if (kind != static_cast<int>(G.space.kind) || d != G.space.d || q != G.space.F->size())
        return false;
    G.elements.clear();
    for (long i = 0; i < order; ++i) {
        FMatrix m(G.space.E, d, d);
        for (long& x : m.a)
            if (!(in >> x)) return false;
        G.elements.push_back(std::move(m));
    }
    finalize(G);
    return static_cast<long>(G.classes.size()) == class_count;
}

void store(const Group& G, const std::string& path) {
    std::ofstream out(path);
    if (!out) return;
    out << static_cast<int>(G.space.kind) << " " << G.space.d << " " << G.space.F->size() << " "
        << G.order() << " " << G.classes.size() << "\n";
    for (const auto& m : G.elements) {
        for (size_t i = 0; i < m.a.size(); ++i) out << (i ? " " : "") << m.a[i];
        out << "\n";
    }
}

}  // namespace

long Group::index(const FMatrix& m) const {
    auto it = index_of.find(m.a);
    return it == index_of.end() ? -1 : it->second;
}

long Group::g0_index() const {
    long in = std::accumulate(g0.begin(), g0.end(), 0L);
    return order() / in;
}

GroupPtr enumerate_group(const Space& space, long budget) {
    auto G = std::make_shared<Group>();
    G->space = space;
    std::string path = cache_path(space);
    if (!path.empty() && try_load(*G, path)) return G;

    const FFPtr& E = space.E;
    long d = space.d;
    auto vecs = all_vectors(E, d);
    bool has_form = (space.kind != SpaceKind::GL);

    // pairing of candidate columns: <c_i, c_j> = c_i^T gram conj(c_j)
    auto pair = [&](const std::vector<long>& ci, const std::vector<long>& cj) {
        long acc = FiniteField::ZERO;
        for (long r = 0; r < d; ++r) {
            if (ci[r] == FiniteField::ZERO) continue;
            for (long c = 0; c < d; ++c) {
                long g = space.gram.at(r, c);
                if (g == FiniteField::ZERO || cj[c] == FiniteField::ZERO) continue;
                acc = E->add(acc, E->mul(E->mul(ci[r], g), space.conj(cj[c])));
            }
        }
        return acc;
    };

    std::vector<std::vector<long>> cols;
    std::vector<FMatrix> out;
    std::function<void(long)> extend = [&](long k) {
        if (k == d) {
            FMatrix m(E, d, d);
            for (long i = 0; i < d; ++i)
                for (long j = 0; j < d; ++j) m.at(i, j) = cols[j][i];
            if (!has_form && m.det() == FiniteField::ZERO) return;
            out.push_back(std::move(m));
            if (static_cast<long>(out.size()) > budget)
                throw std::runtime_error(
                    "enumerate_group: order exceeds budget; use generator-closure mode");
            return;
        }
        for (const auto& v : vecs) {
            bool ok = true;
            if (has_form) {
                for (long j = 0; j <= k && ok; ++j) {
                    const auto& w = (j == k) ? v : cols[j];
                    ok = pair(w, v) == space.gram.at(j, k) &&
                         (j == k || pair(v, w) == space.gram.at(k, j));
                }
            } else {
                // keep columns independent
                FMatrix m(E, d, k + 1);
                for (long j = 0; j < k; ++j)
                    for (long i = 0; i < d; ++i) m.at(i, j) = cols[j][i];
                for (long i = 0; i < d; ++i) m.at(i, k) = v[i];
                ok = m.rank() == k + 1;
            }
            if (!ok) continue;
            cols.push_back(v);
            extend(k + 1);
            cols.pop_back();
        }
    };
    extend(0);
    G->elements = std::move(out);
    finalize(*G);
    if (!path.empty()) store(*G, path);
    return G;
}

GroupPtr connected_component_group(const GroupPtr& G) {
    auto H = std::make_shared<Group>();
    H->space = G->space;
    for (long i = 0; i < G->order(); ++i)
        if (G->g0[i]) H->elements.push_back(G->mat(i));
    finalize(*H);
    // the component subgroup is connected by construction
    H->g0.assign(H->order(), 1);
    return H;
}

bool subspace_contains(const FMatrix& B, const FMatrix& A) {
    return hstack(B, A).rank() == B.rank();
}

ParabolicData parabolic_from_flag(const GroupPtr& G, const FMatrix& X_cols,
                                  const FMatrix& Y_cols) {
    const Space& s = G->space;
    const FFPtr& E = s.E;
    long d = s.d, k = X_cols.cols;
    if (X_cols.rows != d || Y_cols.rows != d || Y_cols.cols != k)
        throw std::invalid_argument("parabolic_from_flag: bad flag shape");
    if (X_cols.rank() != k || Y_cols.rank() != k)
        throw std::invalid_argument("parabolic_from_flag: flag spaces must be independent sets");

    FMatrix W(E, d, 0);  // X-perp (or X itself for the zero form)
    if (s.kind != SpaceKind::GL) {
        FMatrix XtG = X_cols.transpose() * s.gram;
        // isotropy: <x, x'> = 0 on X
        if (!(XtG * s.conj_matrix(X_cols) == FMatrix::zero(E, k, k)))
            throw std::invalid_argument("parabolic_from_flag: X is not totally isotropic");
        if ((XtG * s.conj_matrix(Y_cols)).det() == FiniteField::ZERO)
            throw std::invalid_argument("parabolic_from_flag: X and Y are not in duality");
        W = matrix_null_space(s.conj_matrix(XtG));
    } else {
        if (hstack(X_cols, Y_cols).rank() != 2 * k)
            throw std::invalid_argument("parabolic_from_flag: X and Y must be independent");
        W = X_cols;
    }

    auto key = [&](const FMatrix& cols) { return cols.transpose().row_reduced().a; };
    auto X_key = key(X_cols);
    auto Y_key = key(Y_cols);

    ParabolicData out;
    FMatrix I = FMatrix::identity(E, d);
    for (long i = 0; i < G->order(); ++i) {
        const FMatrix& g = G->mat(i);
        if (key(g * X_cols) != X_key) continue;
        out.P.push_back(i);
        if (key(g * Y_cols) == Y_key) out.L.push_back(i);
        FMatrix h = g - I;
        if (h * X_cols == FMatrix::zero(E, d, k) && subspace_contains(X_cols, h * W) &&
            subspace_contains(W, h))
            out.N.push_back(i);
    }
    return out;
}

}  // namespace gfw
