#include "gfw/chartab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gfw {

namespace {

// --- arithmetic mod a small prime ---

long powmod(long b, long e, long m) {
    long r = 1 % m;
    b %= m;
    while (e > 0) {
        if (e & 1) r = r * b % m;
        b = b * b % m;
        e >>= 1;
    }
    return r;
}

long invmod(long a, long m) { return powmod((a % m + m) % m, m - 2, m); }

bool is_prime(long n) {
    if (n < 2) return false;
    for (long c = 2; c * c <= n; ++c)
        if (n % c == 0) return false;
    return true;
}

long primitive_root(long ell) {
    std::vector<long> fac;
    long m = ell - 1;
    for (long c = 2; c * c <= m; ++c)
        if (m % c == 0) {
            fac.push_back(c);
            while (m % c == 0) m /= c;
        }
    if (m > 1) fac.push_back(m);
    for (long w = 2; w < ell; ++w) {
        bool ok = true;
        for (long f : fac)
            if (powmod(w, (ell - 1) / f, ell) == 1) ok = false;
        if (ok) return w;
    }
    throw std::logic_error("no primitive root");
}

using ModMat = std::vector<std::vector<long>>;  // rows

ModMat mat_mul(const ModMat& A, const ModMat& B, long m) {
    size_t r = A.size(), inner = B.size(), c = B[0].size();
    ModMat R(r, std::vector<long>(c, 0));
    for (size_t i = 0; i < r; ++i)
        for (size_t k = 0; k < inner; ++k) {
            long x = A[i][k];
            if (!x) continue;
            for (size_t j = 0; j < c; ++j) R[i][j] = (R[i][j] + x * B[k][j]) % m;
        }
    return R;
}

// Reduced row echelon form in place; returns pivot columns.
std::vector<long> rref(ModMat& M, long m) {
    std::vector<long> pivots;
    size_t rows = M.size(), cols = rows ? M[0].size() : 0;
    size_t row = 0;
    for (size_t col = 0; col < cols && row < rows; ++col) {
        size_t piv = row;
        while (piv < rows && M[piv][col] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(M[piv], M[row]);
        long inv = invmod(M[row][col], m);
        for (size_t j = 0; j < cols; ++j) M[row][j] = M[row][j] * inv % m;
        for (size_t i = 0; i < rows; ++i) {
            if (i == row || M[i][col] == 0) continue;
            long f = M[i][col];
            for (size_t j = 0; j < cols; ++j)
                M[i][j] = ((M[i][j] - f * M[row][j]) % m + m) % m;
        }
        pivots.push_back(static_cast<long>(col));
        ++row;
    }
    return pivots;
}

// Basis of the kernel of M, as columns.
ModMat kernel_basis(ModMat M, long m) {
    size_t n = M.empty() ? 0 : M[0].size();
    auto pivots = rref(M, m);
    std::vector<char> is_pivot(n, 0);
    for (long p : pivots) is_pivot[p] = 1;
    ModMat basis;  // each entry: a column vector of length n
    for (size_t j = 0; j < n; ++j) {
        if (is_pivot[j]) continue;
        std::vector<long> v(n, 0);
        v[j] = 1;
        for (size_t pi = 0; pi < pivots.size(); ++pi)
            v[pivots[pi]] = (m - M[pi][j]) % m;
        basis.push_back(std::move(v));
    }
    return basis;
}

}  // namespace

long element_order(const Group& G, long i) {
    long o = 1, x = i;
    while (x != G.identity) {
        x = G.mul(x, i);
        ++o;
    }
    return o;
}

Scalar inner_product(const ClassFunction& f, const ClassFunction& h) {
    const auto& G = *f.group;
    if (h.group != f.group) throw std::invalid_argument("inner_product: different groups");
    auto ctx = f.values.at(0).ctx();
    Scalar acc = Scalar::zero(ctx);
    for (size_t c = 0; c < G.classes.size(); ++c) {
        Scalar term = f.values[c] * h.values[c].galois(-1);
        acc = acc + term * Scalar::integer(ctx, static_cast<long>(G.classes[c].members.size()));
    }
    return acc * Scalar::rational(ctx, Rat(1, G.order()));
}

Scalar CharacterTable::central_character(long i, long z_index) const {
    Scalar v = irreducibles[i].at_element(z_index);
    return v * Scalar::rational(ctx, Rat(1, degrees[i]));
}

Scalar CharacterTable::omega_minus_one(long i) const {
    const Space& s = group->space;
    FMatrix minus = -FMatrix::identity(s.E, s.d);
    long z = group->index(minus);
    if (z < 0) return Scalar::one(ctx);
    return central_character(i, z);
}

CharacterTable character_table(const GroupPtr& G, const ScalarCtxPtr& ctx) {
    long n = G->order();
    long k = static_cast<long>(G->classes.size());

    // exponent of the group
    long expo = 1;
    for (const auto& c : G->classes) expo = std::lcm(expo, element_order(*G, c.rep));
    if (ctx->n() % expo != 0)
        throw std::invalid_argument("character_table: context does not contain exp(G)-th roots");

    // Dixon prime
    long ell = expo + 1;
    double bound = 2.0 * std::sqrt(static_cast<double>(n));
    while (!is_prime(ell) || ell <= bound) ell += expo;
    long w = primitive_root(ell);

    // structure constants: class-sum matrices A_i with (A_i)_{jk} = a_{ij}^k,
    // where C_i C_j = sum_k a_{ij}^k C_k
    std::vector<ModMat> A(k, ModMat(k, std::vector<long>(k, 0)));
    for (long i = 0; i < k; ++i) {
        // a_{ij}^m = #{x in C_i : x^{-1} z in C_j} for a fixed z in C_m
        for (long m = 0; m < k; ++m) {
            long z = G->classes[m].rep;
            std::vector<long> cnt(k, 0);
            for (long x : G->classes[i].members) ++cnt[G->class_of[G->mul(G->inv(x), z)]];
            // cnt[j] = a_{ij}^m
            for (long j = 0; j < k; ++j) A[i][j][m] = cnt[j] % ell;
        }
    }

    // split the k-dim space into common eigenlines
    std::vector<ModMat> subspaces;  // each: list of basis columns
    {
        ModMat full;
        for (long j = 0; j < k; ++j) {
            std::vector<long> e(k, 0);
            e[j] = 1;
            full.push_back(std::move(e));
        }
        subspaces.push_back(std::move(full));
    }
    for (long i = 0; i < k; ++i) {
        bool all_lines = true;
        for (const auto& W : subspaces) all_lines &= W.size() == 1;
        if (all_lines) break;
        std::vector<ModMat> next;
        for (auto& W : subspaces) {
            long m = static_cast<long>(W.size());
            if (m == 1) {
                next.push_back(std::move(W));
                continue;
            }
            // restriction R: A_i B = B R, solved via rref of [B | A_i B]
            ModMat B(k, std::vector<long>(m, 0));
            for (long c = 0; c < m; ++c)
                for (long r = 0; r < k; ++r) B[r][c] = W[c][r];
            ModMat AiB = mat_mul(A[i], B, ell);
            ModMat aug(k, std::vector<long>(2 * m, 0));
            for (long r = 0; r < k; ++r)
                for (long c = 0; c < m; ++c) {
                    aug[r][c] = B[r][c];
                    aug[r][m + c] = AiB[r][c];
                }
            rref(aug, ell);
            ModMat R(m, std::vector<long>(m, 0));
            for (long r = 0; r < m; ++r)
                for (long c = 0; c < m; ++c) R[r][c] = aug[r][m + c];
            // split by eigenvalues
            for (long lam = 0; lam < ell; ++lam) {
                ModMat shifted = R;
                for (long d = 0; d < m; ++d) shifted[d][d] = ((R[d][d] - lam) % ell + ell) % ell;
                ModMat ker = kernel_basis(shifted, ell);
                if (ker.empty()) continue;
                ModMat sub;
                for (const auto& v : ker) {
                    std::vector<long> col(k, 0);
                    for (long r = 0; r < k; ++r) {
                        long acc = 0;
                        for (long c = 0; c < m; ++c) acc = (acc + B[r][c] * v[c]) % ell;
                        col[r] = acc;
                    }
                    sub.push_back(std::move(col));
                }
                next.push_back(std::move(sub));
            }
        }
        subspaces = std::move(next);
    }
    for (const auto& W : subspaces)
        if (W.size() != 1) throw std::logic_error("character_table: eigenline separation failed");

    // identity class and inverse-class map
    long id_class = G->class_of[G->identity];
    std::vector<long> inv_class(k);
    for (long c = 0; c < k; ++c) inv_class[c] = G->class_of[G->inv(G->classes[c].rep)];
    std::vector<long> class_size(k);
    for (long c = 0; c < k; ++c) class_size[c] = static_cast<long>(G->classes[c].members.size());

    struct Row {
        long deg;
        std::vector<long> chi_mod;  // chi(class) mod ell
    };
    std::vector<Row> rows;
    for (const auto& W : subspaces) {
        std::vector<long> omega = W[0];
        long norm = invmod(omega[id_class], ell);
        for (long& x : omega) x = x * norm % ell;
        // 1/deg^2 = sum_i omega_i omega_{i'} / |C_i| / |G|
        long acc = 0;
        for (long c = 0; c < k; ++c)
            acc = (acc + omega[c] * omega[inv_class[c]] % ell * invmod(class_size[c], ell)) % ell;
        long d2 = n % ell * invmod(acc, ell) % ell;
        // square root mod ell: scan (ell is small)
        long deg = -1;
        for (long r = 1; r <= (ell - 1) / 2; ++r)
            if (r * r % ell == d2) {
                deg = r;
                break;
            }
        if (deg < 0) throw std::logic_error("character_table: degree not a square mod ell");
        std::vector<long> chi(k);
        for (long c = 0; c < k; ++c)
            chi[c] = omega[c] * deg % ell * invmod(class_size[c], ell) % ell;
        rows.push_back({deg, std::move(chi)});
    }

    // lift to exact cyclotomic values
    long N = ctx->n();
    std::vector<ClassFunction> irr;
    std::vector<long> degrees;
    // precompute power-class maps per class
    std::vector<std::vector<long>> power_class(k);
    std::vector<long> ord(k);
    for (long c = 0; c < k; ++c) {
        long rep = G->classes[c].rep;
        ord[c] = element_order(*G, rep);
        long x = G->identity;
        for (long t = 0; t < ord[c]; ++t) {
            power_class[c].push_back(G->class_of[x]);
            x = G->mul(x, rep);
        }
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.deg != b.deg) return a.deg < b.deg;
        return a.chi_mod < b.chi_mod;
    });
    for (const auto& row : rows) {
        ClassFunction f{G, {}};
        for (long c = 0; c < k; ++c) {
            long nc = ord[c];
            long z = powmod(w, (ell - 1) / nc, ell);  // fixed nc-th root mod ell
            std::vector<long long> counts(N, 0);
            long ninv = invmod(nc, ell);
            for (long s = 0; s < nc; ++s) {
                long acc = 0;
                for (long t = 0; t < nc; ++t) {
                    long zp = powmod(z, (nc - s % nc) * t % nc, ell);  // z^{-st}
                    acc = (acc + row.chi_mod[power_class[c][t]] * zp) % ell;
                }
                long mult = acc * ninv % ell;  // multiplicity of zeta_nc^s, in [0, deg]
                if (mult) counts[(s * (N / nc)) % N] += mult;
            }
            f.values.push_back(Scalar::root_combination(ctx, counts));
        }
        irr.push_back(std::move(f));
        degrees.push_back(row.deg);
    }

    CharacterTable tab;
    tab.group = G;
    tab.ctx = ctx;
    tab.irreducibles = std::move(irr);
    tab.degrees = std::move(degrees);

    // cuspidality: chi is cuspidal iff sum_{u in N} chi(g u) = 0 for the
    // unipotent radical N of every proper parabolic and every g
    std::vector<std::vector<long>> radicals;
    for (const auto& flag : standard_flags(G->space)) {
        auto pd = parabolic_from_flag(G, flag.X, flag.Y);
        if (pd.N.size() > 1) radicals.push_back(pd.N);
    }
    tab.cuspidal.assign(tab.size(), 1);
    for (long i = 0; i < tab.size(); ++i) {
        bool cusp = true;
        for (const auto& rad : radicals) {
            for (long g = 0; g < G->order() && cusp; ++g) {
                Scalar acc = Scalar::zero(ctx);
                for (long u : rad) acc = acc + tab.irreducibles[i].at_element(G->mul(g, u));
                cusp = acc.is_zero();
            }
            if (!cusp) break;
        }
        tab.cuspidal[i] = cusp ? 1 : 0;
    }
    return tab;
}

ClassFunction induce(const GroupPtr& G, const std::vector<long>& H,
                     const std::function<Scalar(long)>& f, const ScalarCtxPtr& ctx) {
    std::vector<char> in_H(G->order(), 0);
    for (long h : H) {
        if (h < 0 || h >= G->order()) throw std::invalid_argument("induce: H not inside G");
        in_H[h] = 1;
    }
    ClassFunction out{G, {}};
    for (const auto& cls : G->classes) {
        Scalar acc = Scalar::zero(ctx);
        long rep = cls.rep;
        for (long x = 0; x < G->order(); ++x) {
            long y = G->mul(G->mul(x, rep), G->inv(x));
            if (in_H[y]) acc = acc + f(y);
        }
        out.values.push_back(acc * Scalar::rational(ctx, Rat(1, static_cast<long>(H.size()))));
    }
    return out;
}

std::vector<Scalar> restrict_to(const ClassFunction& f, const std::vector<long>& H) {
    std::vector<Scalar> out;
    out.reserve(H.size());
    for (long h : H) out.push_back(f.at_element(h));
    return out;
}

std::vector<StandardFlag> standard_flags(const Space& s) {
    const FFPtr& E = s.E;
    long d = s.d;
    std::vector<StandardFlag> out;
    if (s.kind == SpaceKind::GL) {
        for (long k = 1; k < d; ++k) {
            FMatrix X(E, d, k), Y(E, d, d - k);
            for (long j = 0; j < k; ++j) X.at(j, j) = E->unit();
            for (long j = 0; j < d - k; ++j) Y.at(k + j, j) = E->unit();
            out.push_back({X, Y});
        }
        return out;
    }
    // isotropic flags by greedy extension over all vectors
    auto pairing = [&](const std::vector<long>& u, const std::vector<long>& v) {
        long acc = FiniteField::ZERO;
        for (long r = 0; r < d; ++r) {
            if (u[r] == FiniteField::ZERO) continue;
            for (long c = 0; c < d; ++c) {
                long g = s.gram.at(r, c);
                if (g == FiniteField::ZERO || v[c] == FiniteField::ZERO) continue;
                acc = E->add(acc, E->mul(E->mul(u[r], g), s.conj(v[c])));
            }
        }
        return acc;
    };
    long qE = E->size();
    auto vec_at = [&](long code) {
        std::vector<long> v(d);
        for (long i = 0; i < d; ++i) {
            long digit = code % qE;
            v[i] = (digit == 0) ? FiniteField::ZERO : digit - 1;
            code /= qE;
        }
        return v;
    };
    long total = 1;
    for (long i = 0; i < d; ++i) total *= qE;

    std::function<bool(std::vector<std::vector<long>>&, long)> grow =
        [&](std::vector<std::vector<long>>& cols, long want) -> bool {
        if (static_cast<long>(cols.size()) == want) return true;
        for (long code = 1; code < total; ++code) {
            auto v = vec_at(code);
            if (pairing(v, v) != FiniteField::ZERO) continue;
            bool ok = true;
            for (const auto& u : cols)
                ok = ok && pairing(u, v) == FiniteField::ZERO &&
                     pairing(v, u) == FiniteField::ZERO;
            if (!ok) continue;
            FMatrix test(E, d, static_cast<long>(cols.size()) + 1);
            for (size_t c = 0; c < cols.size(); ++c)
                for (long r = 0; r < d; ++r) test.at(r, c) = cols[c][r];
            for (long r = 0; r < d; ++r) test.at(r, cols.size()) = v[r];
            if (test.rank() != static_cast<long>(cols.size()) + 1) continue;
            cols.push_back(v);
            if (grow(cols, want)) return true;
            cols.pop_back();
        }
        return false;
    };
    for (long k = 1; 2 * k <= d; ++k) {
        std::vector<std::vector<long>> xc;
        if (!grow(xc, k)) break;  // Witt index reached
        FMatrix X(E, d, k);
        for (long c = 0; c < k; ++c)
            for (long r = 0; r < d; ++r) X.at(r, c) = xc[c][r];
        // dual partner: isotropic Y with X^T G conj(Y) invertible
        FMatrix Y(E, d, k);
        bool found = false;
        std::function<bool(std::vector<std::vector<long>>&)> grow_dual =
            [&](std::vector<std::vector<long>>& cols) -> bool {
            if (static_cast<long>(cols.size()) == k) {
                FMatrix Yc(E, d, k);
                for (long c = 0; c < k; ++c)
                    for (long r = 0; r < d; ++r) Yc.at(r, c) = cols[c][r];
                if ((X.transpose() * s.gram * s.conj_matrix(Yc)).det() == FiniteField::ZERO)
                    return false;
                Y = Yc;
                return true;
            }
            for (long code = 1; code < total; ++code) {
                auto v = vec_at(code);
                if (pairing(v, v) != FiniteField::ZERO) continue;
                bool ok = true;
                for (const auto& u : cols)
                    ok = ok && pairing(u, v) == FiniteField::ZERO &&
                         pairing(v, u) == FiniteField::ZERO;
                if (!ok) continue;
                cols.push_back(v);
                if (grow_dual(cols)) return true;
                cols.pop_back();
            }
            return false;
        };
        std::vector<std::vector<long>> yc;
        found = grow_dual(yc);
        if (!found) break;
        out.push_back({X, Y});
    }
    return out;
}

bool cuspidal_support_avoids(const CharacterTable& tab, long pi,
                             const std::vector<MultChar>& forbidden) {
    const GroupPtr& G = tab.group;
    const Space& s = G->space;
    const FFPtr& E = s.E;
    for (const auto& flag : standard_flags(s)) {
        if (flag.X.cols != 1) continue;  // line flags decide the d <= 2 cases
        auto pd = parabolic_from_flag(G, flag.X, flag.Y);
        // scalar action on the line X
        long pivot_row = -1;
        for (long r = 0; r < s.d; ++r)
            if (flag.X.at(r, 0) != FiniteField::ZERO) pivot_row = r;
        std::vector<long> lambda(pd.L.size());
        for (size_t li = 0; li < pd.L.size(); ++li) {
            FMatrix gx = G->mat(pd.L[li]) * flag.X;
            lambda[li] = E->mul(gx.at(pivot_row, 0), E->inv(flag.X.at(pivot_row, 0)));
        }
        for (const auto& alpha : forbidden) {
            if (alpha.field != E)
                throw std::invalid_argument("cuspidal_support_avoids: character on wrong field");
            MultChar alpha_inv = alpha.inverse();
            Scalar acc = Scalar::zero(tab.ctx);
            for (size_t li = 0; li < pd.L.size(); ++li)
                for (long n : pd.N)
                    acc = acc + tab.irreducibles[pi].at_element(G->mul(pd.L[li], n)) *
                                    alpha_inv.value(tab.ctx, lambda[li]);
            if (!acc.is_zero()) return false;
        }
    }
    return true;
}

}  // namespace gfw
