#include "gfw/doubling.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace gfw {

namespace {

long ipow(long b, long e) {
    long r = 1;
    for (long i = 0; i < e; ++i) r *= b;
    return r;
}

// F-basis of E (degree 1 or 2 over F) and the coordinate table.
struct EOverF {
    FFPtr E, F;
    long e = 1;                              // [E:F]
    std::vector<long> basis;                 // E-labels
    std::map<long, std::vector<long>> coords;  // E-label -> F-coordinates

    EOverF(const FFPtr& Ef, const FFPtr& Ff) : E(Ef), F(Ff) {
        e = E->degree() / F->degree();
        basis.push_back(E->unit());
        if (e == 2) basis.push_back(E->gen_power(1));
        if (e != 1 && e != 2) throw std::logic_error("unsupported extension degree");
        std::vector<long> idx(e, 0);
        while (true) {
            long x = FiniteField::ZERO;
            std::vector<long> cs(e);
            for (long i = 0; i < e; ++i) {
                cs[i] = F->element_of_rank(idx[i]);
                if (cs[i] != FiniteField::ZERO)
                    x = E->add(x, E->mul(E->embed_from(*F, cs[i]), basis[i]));
            }
            coords[x] = cs;
            long c = 0;
            while (c < e && ++idx[c] == F->size()) idx[c++] = 0;
            if (c == e) break;
        }
        if (static_cast<long>(coords.size()) != ipow(F->size(), e))
            throw std::logic_error("E/F basis is not free");
    }
};

FMatrix block_of(const FMatrix& m, long r0, long c0, long nr, long nc) {
    FMatrix out(m.field, nr, nc);
    for (long i = 0; i < nr; ++i)
        for (long j = 0; j < nc; ++j) out.at(i, j) = m.at(r0 + i, c0 + j);
    return out;
}

// Solve a homogeneous F-linear condition on d x d matrices over E.  The
// callback maps a candidate matrix to a condition matrix; both are E-valued
// but F-linear in the entries.
std::vector<FMatrix> solve_matrix_condition(const FFPtr& E, const FFPtr& F, long rows, long cols,
                                            const std::function<FMatrix(const FMatrix&)>& cond) {
    EOverF ef(E, F);
    long nunk = rows * cols * ef.e;
    FMatrix probe = cond(FMatrix::zero(E, rows, cols));
    long ncond = probe.rows * probe.cols * ef.e;
    FMatrix B(F, ncond, nunk);
    for (long u = 0; u < nunk; ++u) {
        long cell = u / ef.e, b = u % ef.e;
        FMatrix T = FMatrix::zero(E, rows, cols);
        T.a[cell] = ef.basis[b];
        FMatrix C = cond(T);
        for (long c = 0; c < C.rows * C.cols; ++c) {
            const auto& cs = ef.coords.at(C.a[c]);
            for (long bb = 0; bb < ef.e; ++bb) B.at(c * ef.e + bb, u) = cs[bb];
        }
    }
    FMatrix ns = matrix_null_space(B);
    std::vector<FMatrix> out;
    for (long k = 0; k < ns.cols; ++k) {
        FMatrix T = FMatrix::zero(E, rows, cols);
        for (long u = 0; u < nunk; ++u) {
            long f = ns.at(u, k);
            if (f == FiniteField::ZERO) continue;
            long cell = u / ef.e, b = u % ef.e;
            T.a[cell] = E->add(T.a[cell], E->mul(E->embed_from(*F, f), ef.basis[b]));
        }
        out.push_back(std::move(T));
    }
    return out;
}

// All F-linear combinations of a basis of E-matrices.
std::vector<FMatrix> span_over_f(const FFPtr& E, const FFPtr& F, const std::vector<FMatrix>& basis,
                                 long rows, long cols) {
    std::vector<FMatrix> out;
    long dim = static_cast<long>(basis.size());
    std::vector<long> idx(dim, 0);
    while (true) {
        FMatrix T = FMatrix::zero(E, rows, cols);
        for (long i = 0; i < dim; ++i) {
            long f = F->element_of_rank(idx[i]);
            if (f != FiniteField::ZERO) T = T + basis[i].scaled(E->embed_from(*F, f));
        }
        out.push_back(std::move(T));
        long c = 0;
        while (c < dim && ++idx[c] == F->size()) idx[c++] = 0;
        if (c == dim || dim == 0) break;
    }
    return out;
}

long gl_order(long q, long n) {
    long r = 1, qn = ipow(q, n);
    for (long i = 0; i < n; ++i) r *= qn - ipow(q, i);
    return r;
}

// Order of the doubled (split) group of dimension n = 2d.
long box_group_order(SpaceKind parent_kind, long n, long qF, long qE) {
    switch (parent_kind) {
        case SpaceKind::GL:
            return gl_order(qE, n);
        case SpaceKind::Symplectic: {
            long m = n / 2, r = ipow(qF, m * m);
            for (long i = 1; i <= m; ++i) r *= ipow(qF, 2 * i) - 1;
            return r;
        }
        case SpaceKind::OrthogonalSplit:
        case SpaceKind::OrthogonalNonsplit: {
            long m = n / 2, r = 2 * ipow(qF, m * (m - 1)) * (ipow(qF, m) - 1);
            for (long i = 1; i < m; ++i) r *= ipow(qF, 2 * i) - 1;
            return r;
        }
        case SpaceKind::Hermitian: {
            long r = ipow(qF, n * (n - 1) / 2);
            for (long i = 1; i <= n; ++i) r *= ipow(qF, i) - ((i % 2 == 0) ? 1 : -1);
            return r;
        }
    }
    throw std::logic_error("unknown kind");
}

// All k-dimensional subspaces of E^n in row-RREF form that are totally
// isotropic for the box Gram (all subspaces for the zero form).
std::vector<std::vector<long>> isotropic_rrefs(const Space& box, long k) {
    const FFPtr& E = box.E;
    long n = box.d;
    std::vector<std::vector<long>> out;
    std::vector<long> pivots;
    std::function<void(long)> choose = [&](long from) {
        if (static_cast<long>(pivots.size()) == k) {
            // free positions: (i, j) with j > pivots[i], j not a pivot
            std::vector<std::pair<long, long>> free_pos;
            std::set<long> pset(pivots.begin(), pivots.end());
            for (long i = 0; i < k; ++i)
                for (long j = pivots[i] + 1; j < n; ++j)
                    if (!pset.count(j)) free_pos.emplace_back(i, j);
            std::vector<long> idx(free_pos.size(), 0);
            while (true) {
                FMatrix R = FMatrix::zero(E, k, n);
                for (long i = 0; i < k; ++i) R.at(i, pivots[i]) = E->unit();
                for (size_t t = 0; t < free_pos.size(); ++t)
                    R.at(free_pos[t].first, free_pos[t].second) = E->element_of_rank(idx[t]);
                bool ok = true;
                if (box.kind != SpaceKind::GL) {
                    FMatrix M = R * box.gram * box.conj_matrix(R).transpose();
                    ok = (M == FMatrix::zero(E, k, k));
                }
                if (ok) out.push_back(R.a);
                size_t c = 0;
                while (c < idx.size() && ++idx[c] == E->size()) idx[c++] = 0;
                if (c == idx.size()) break;
            }
            return;
        }
        for (long p = from; p < n; ++p) {
            pivots.push_back(p);
            choose(p + 1);
            pivots.pop_back();
        }
    };
    choose(0);
    std::sort(out.begin(), out.end());
    return out;
}

// Levi factor m(a) of the Siegel parabolic: diag(a, sigma(a)) with sigma
// determined by the box Gram, or the two one-sided factors for the zero form.
FMatrix siegel_levi(const Space& box, long d, const FMatrix& top, const FMatrix& bot) {
    FMatrix m = FMatrix::identity(box.E, 2 * d);
    for (long i = 0; i < d; ++i)
        for (long j = 0; j < d; ++j) {
            m.at(i, j) = top.at(i, j);
            m.at(d + i, d + j) = bot.at(i, j);
        }
    return m;
}

FMatrix siegel_sigma(const Space& box, long d, const FMatrix& a) {
    // upper-right block U of the box Gram; a^T U conj(sigma) = U
    FMatrix U = block_of(box.gram, 0, d, d, d);
    return box.conj_matrix(U.inverse() * a.transpose().inverse() * U);
}

// (top, bottom) Levi block pairs of the Siegel parabolic.
std::vector<std::pair<FMatrix, FMatrix>> siegel_levi_pairs(const Space& box,
                                                           SpaceKind parent_kind, long d,
                                                           long qE) {
    GroupPtr GLd = enumerate_group(make_space(SpaceKind::GL, d, qE));
    std::vector<std::pair<FMatrix, FMatrix>> out;
    auto lift = [&](const FMatrix& g) {  // GL_d over the registry field of size qE
        FMatrix h(box.E, d, d);
        for (long t = 0; t < d * d; ++t) h.a[t] = g.a[t];  // same field object
        return h;
    };
    if (parent_kind == SpaceKind::GL) {
        for (long i = 0; i < GLd->order(); ++i)
            for (long j = 0; j < GLd->order(); ++j)
                out.emplace_back(lift(GLd->mat(i)), lift(GLd->mat(j)));
    } else {
        for (long i = 0; i < GLd->order(); ++i) {
            FMatrix a = lift(GLd->mat(i));
            FMatrix m = siegel_levi(box, d, a, siegel_sigma(box, d, a));
            if (!box.is_isometry(m)) throw std::logic_error("siegel levi is not an isometry");
            out.emplace_back(a, block_of(m, d, d, d, d));
        }
    }
    return out;
}

std::string dcosets_cache_path(const Space& s) {
    const char* dir = std::getenv("GFW_CACHE_DIR");
    if (!dir || !*dir) return {};
    std::ostringstream os;
    os << dir << "/dcosets_k" << static_cast<int>(s.kind) << "_d" << s.d << "_q" << s.F->size()
       << ".txt";
    return os.str();
}

}  // namespace

// --- Lie algebra ---

std::vector<FMatrix> lie_algebra_basis(const Space& s) {
    if (s.kind == SpaceKind::GL) {
        // no condition: the full matrix algebra
        return solve_matrix_condition(s.E, s.F, s.d, s.d,
                                      [&](const FMatrix&) { return FMatrix::zero(s.E, 1, 1); });
    }
    auto basis = solve_matrix_condition(s.E, s.F, s.d, s.d, [&](const FMatrix& T) {
        return T.transpose() * s.gram + s.gram * s.conj_matrix(T);
    });
    for (const auto& T : basis)
        if (!s.in_lie_algebra(T)) throw std::logic_error("bad lie algebra basis element");
    return basis;
}

long lie_algebra_dim(const Space& s) {
    long d = s.d, e = s.E->degree() / s.F->degree();
    long expect = 0;
    switch (s.kind) {
        case SpaceKind::Symplectic: expect = d * (d + 1) / 2; break;
        case SpaceKind::OrthogonalSplit:
        case SpaceKind::OrthogonalNonsplit: expect = d * (d - 1) / 2; break;
        case SpaceKind::Hermitian: expect = d * d; break;
        case SpaceKind::GL: expect = d * d * e; break;
    }
    long got = static_cast<long>(lie_algebra_basis(s).size());
    if (got != expect) throw std::logic_error("lie algebra dimension mismatch");
    return got;
}

std::vector<FMatrix> lie_algebra_elements(const Space& s) {
    return span_over_f(s.E, s.F, lie_algebra_basis(s), s.d, s.d);
}

MultChar conj_inverse_char(const Space& s, const MultChar& chi) {
    if (chi.field != s.E) throw std::invalid_argument("character must live on the form field");
    return chi.frobenius_twist(s.F->degree()).inverse();
}

MultChar involution_norm_char(const Space& s, const MultChar& chi) {
    if (chi.field != s.E) throw std::invalid_argument("character must live on the form field");
    return chi * chi.frobenius_twist(s.F->degree());
}

// --- DoubledCosets ---

DoubledCosets::DoubledCosets(const Space& space) : ds_(double_space(space)) {
    lie_dim_ = lie_algebra_dim(space);
    for (const auto& T : lie_algebra_elements(space)) n_delta_.push_back(ds_.exp_unipotent(T));
    {
        std::set<std::vector<long>> distinct;
        for (const auto& n : n_delta_) distinct.insert(n.a);
        if (static_cast<long>(distinct.size()) != ipow(space.F->size(), lie_dim_))
            throw std::logic_error("siegel unipotent is not in bijection with the lie algebra");
    }

    const Space& box = ds_.box;
    long d = space.d, qF = space.F->size(), qE = space.E->size();
    auto expected_keys = isotropic_rrefs(box, d);

    std::string path = dcosets_cache_path(space);
    if (path.empty() || !try_load(path)) {
        // generators: iota of both factors, the Siegel unipotent, the Weyl
        // element and the Siegel Levi
        std::vector<FMatrix> gens;
        GroupPtr Gp = enumerate_group(space);
        FMatrix idd = FMatrix::identity(space.E, d);
        for (long i = 0; i < Gp->order(); ++i) {
            gens.push_back(ds_.iota(Gp->mat(i), idd));
            gens.push_back(ds_.iota(idd, Gp->mat(i)));
        }
        for (const auto& n : n_delta_) gens.push_back(n);
        gens.push_back(ds_.weyl_delta());
        for (const auto& [top, bot] : siegel_levi_pairs(box, space.kind, d, qE))
            gens.push_back(siegel_levi(box, d, top, bot));

        std::deque<long> queue;
        reps_.push_back(FMatrix::identity(box.E, 2 * d));
        index_of_key_[key_of(reps_[0])] = 0;
        queue.push_back(0);
        while (!queue.empty()) {
            FMatrix h = reps_[queue.front()];
            queue.pop_front();
            for (const auto& g : gens) {
                FMatrix h2 = h * g;
                auto key = key_of(h2);
                if (index_of_key_.count(key)) continue;
                index_of_key_[key] = static_cast<long>(reps_.size());
                queue.push_back(static_cast<long>(reps_.size()));
                reps_.push_back(std::move(h2));
            }
        }
        canonicalize_reps();
        if (!path.empty()) store(path);
    }

    // verification: the key set is exactly the isotropic Grassmannian, and
    // |P^Delta| * #cosets is the order of the doubled group
    index_of_key_.clear();
    rep_inv_.clear();
    for (size_t i = 0; i < reps_.size(); ++i) {
        if (!box.is_isometry(reps_[i])) throw std::logic_error("coset representative corrupted");
        auto key = key_of(reps_[i]);
        if (index_of_key_.count(key)) throw std::logic_error("duplicate coset representative");
        index_of_key_[key] = static_cast<long>(i);
        rep_inv_.push_back(reps_[i].inverse());
    }
    {
        std::vector<std::vector<long>> keys;
        for (const auto& [k, v] : index_of_key_) keys.push_back(k);
        std::sort(keys.begin(), keys.end());
        if (keys != expected_keys)
            throw std::logic_error("coset keys do not match the isotropic Grassmannian");
    }
    long p_order = gl_order(qE, d) * ipow(qF, lie_dim_);
    if (space.kind == SpaceKind::GL) p_order *= gl_order(qE, d);
    if (p_order * dim() != box_group_order(space.kind, 2 * d, qF, qE))
        throw std::logic_error("coset count does not match the group order");
}

std::vector<long> DoubledCosets::key_of(const FMatrix& h) const {
    long d = ds_.parent.d;
    FMatrix hinv = h.inverse();
    FMatrix rows(h.field, d, 2 * d);
    for (long i = 0; i < 2 * d; ++i)
        for (long j = 0; j < d; ++j) rows.at(j, i) = hinv.at(i, j);
    return rows.row_reduced().a;
}

void DoubledCosets::canonicalize_reps() {
    const Space& box = ds_.box;
    long d = ds_.parent.d, n = 2 * d;
    auto pairs = siegel_levi_pairs(box, ds_.parent.kind, d, ds_.parent.E->size());
    const FFPtr& E = box.E;

    for (auto& rep : reps_) {
        std::vector<long> best = rep.a;
        std::vector<long> cand(n * n);
        for (const auto& nmat : n_delta_) {
            FMatrix Y = nmat * rep;
            for (const auto& [top, bot] : pairs) {
                // row-by-row with early exit
                int cmp = 0;  // -1 better, +1 worse
                for (long r = 0; r < n && cmp == 0; ++r) {
                    const FMatrix& blk = (r < d) ? top : bot;
                    long br = (r < d) ? r : r - d;
                    for (long c = 0; c < n; ++c) {
                        long acc = FiniteField::ZERO;
                        for (long t = 0; t < d; ++t) {
                            long v = blk.at(br, t);
                            if (v == FiniteField::ZERO) continue;
                            long w = Y.at((r < d) ? t : d + t, c);
                            if (w == FiniteField::ZERO) continue;
                            acc = E->add(acc, E->mul(v, w));
                        }
                        cand[r * n + c] = acc;
                    }
                    for (long c = 0; c < n && cmp == 0; ++c) {
                        long a = cand[r * n + c], b = best[r * n + c];
                        if (a != b) cmp = (a < b) ? -1 : 1;
                    }
                }
                if (cmp == -1) best = (siegel_levi(box, d, top, bot) * Y).a;
            }
        }
        rep.a = best;
    }
}

bool DoubledCosets::try_load(const std::string& path) {
    std::ifstream in(path);
    if (!in) return false;
    int kind;
    long d, q, count, ldim;
    if (!(in >> kind >> d >> q >> count >> ldim)) return false;
    if (kind != static_cast<int>(ds_.parent.kind) || d != ds_.parent.d ||
        q != ds_.parent.F->size() || ldim != lie_dim_)
        return false;
    reps_.clear();
    for (long i = 0; i < count; ++i) {
        FMatrix m(ds_.box.E, 2 * d, 2 * d);
        for (long& x : m.a)
            if (!(in >> x)) return false;
        reps_.push_back(std::move(m));
    }
    return true;
}

void DoubledCosets::store(const std::string& path) const {
    std::ofstream out(path);
    if (!out) return;
    out << static_cast<int>(ds_.parent.kind) << " " << ds_.parent.d << " "
        << ds_.parent.F->size() << " " << reps_.size() << " " << lie_dim_ << "\n";
    for (const auto& m : reps_) {
        for (size_t i = 0; i < m.a.size(); ++i) out << (i ? " " : "") << m.a[i];
        out << "\n";
    }
}

long DoubledCosets::coset_of(const FMatrix& h) const {
    auto it = index_of_key_.find(key_of(h));
    if (it == index_of_key_.end())
        throw std::invalid_argument("coset_of: element is not in the doubled group");
    return it->second;
}

std::pair<long, FMatrix> DoubledCosets::decompose(const FMatrix& h) const {
    long j = coset_of(h);
    return {j, h * rep_inv_[j]};
}

std::shared_ptr<const DoubledCosets> DoubledCosets::get(const Space& space) {
    static std::mutex mu;
    static std::map<std::tuple<int, long, long>, std::shared_ptr<const DoubledCosets>> memo;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(static_cast<int>(space.kind), space.d, space.F->size());
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    auto ptr = std::shared_ptr<const DoubledCosets>(new DoubledCosets(space));
    memo[key] = ptr;
    return ptr;
}

// --- DegPS ---

DegPS build_degps(const Space& space, const MultChar& chi, const ScalarCtxPtr& ctx) {
    if (ctx->q() != space.F->size())
        throw std::invalid_argument("scalar context q must match the base field");
    if (chi.field != space.E)
        throw std::invalid_argument("character must live on the form field");
    return DegPS{DoubledCosets::get(space), chi, ctx};
}

Scalar DegPS::equivariance(const FMatrix& p) const {
    const Space& parent = cosets->dspace().parent;
    long d = parent.d;
    Scalar v = chi.value(ctx, block_of(p, 0, 0, d, d).det());
    if (parent.kind == SpaceKind::GL)
        v *= chi.inverse().value(ctx, block_of(p, d, d, d, d).det());
    return v;
}

Scalar DegPS::evaluate(const std::vector<Scalar>& f, const FMatrix& h) const {
    auto [j, p] = cosets->decompose(h);
    if (f[j].is_zero()) return Scalar::zero(ctx);
    return equivariance(p) * f[j];
}

std::vector<Scalar> DegPS::f0() const {
    std::vector<Scalar> f(dim(), Scalar::zero(ctx));
    // normalized so that f0(identity) = 1: the stored representative of the
    // identity coset is lex-minimal, not the identity matrix
    auto [j, p] = cosets->decompose(
        FMatrix::identity(cosets->dspace().box.E, 2 * cosets->dspace().parent.d));
    f[j] = equivariance(p).inverse();
    return f;
}

// --- OperatorOnDegPS ---

OperatorOnDegPS OperatorOnDegPS::identity_op(const ScalarCtxPtr& ctx, long dim) {
    OperatorOnDegPS M = zero_op(ctx, dim);
    for (long i = 0; i < dim; ++i) M.at(i, i) = Scalar::one(ctx);
    return M;
}

OperatorOnDegPS OperatorOnDegPS::zero_op(const ScalarCtxPtr& ctx, long dim) {
    OperatorOnDegPS M;
    M.dim = dim;
    M.a.assign(dim * dim, Scalar::zero(ctx));
    return M;
}

OperatorOnDegPS OperatorOnDegPS::operator*(const OperatorOnDegPS& o) const {
    OperatorOnDegPS M = zero_op(a[0].ctx(), dim);
    for (long i = 0; i < dim; ++i)
        for (long k = 0; k < dim; ++k) {
            if (at(i, k).is_zero()) continue;
            for (long j = 0; j < dim; ++j) {
                if (o.at(k, j).is_zero()) continue;
                M.at(i, j) += at(i, k) * o.at(k, j);
            }
        }
    return M;
}

OperatorOnDegPS OperatorOnDegPS::operator+(const OperatorOnDegPS& o) const {
    OperatorOnDegPS M = *this;
    for (long i = 0; i < dim * dim; ++i) M.a[i] += o.a[i];
    return M;
}

OperatorOnDegPS OperatorOnDegPS::scaled(const Scalar& c) const {
    OperatorOnDegPS M = *this;
    for (auto& x : M.a) x *= c;
    return M;
}

bool OperatorOnDegPS::operator==(const OperatorOnDegPS& o) const {
    if (dim != o.dim) return false;
    for (long i = 0; i < dim * dim; ++i)
        if (a[i] != o.a[i]) return false;
    return true;
}

std::vector<Scalar> OperatorOnDegPS::apply(const std::vector<Scalar>& f) const {
    std::vector<Scalar> out(dim, Scalar::zero(a[0].ctx()));
    for (long i = 0; i < dim; ++i)
        for (long j = 0; j < dim; ++j) {
            if (at(i, j).is_zero() || f[j].is_zero()) continue;
            out[i] += at(i, j) * f[j];
        }
    return out;
}

bool OperatorOnDegPS::is_scalar(Scalar* value) const {
    for (long i = 0; i < dim; ++i)
        for (long j = 0; j < dim; ++j) {
            if (i != j && !at(i, j).is_zero()) return false;
            if (i != j) continue;
            if (at(i, i) != at(0, 0)) return false;
        }
    if (value) *value = at(0, 0);
    return true;
}

long OperatorOnDegPS::rank() const {
    auto w = a;
    auto cell = [&](long i, long j) -> Scalar& { return w[i * dim + j]; };
    long r = 0;
    for (long c = 0; c < dim && r < dim; ++c) {
        long piv = -1;
        Scalar piv_inv;
        for (long i = r; i < dim; ++i) {
            if (cell(i, c).is_zero()) continue;
            try {
                piv_inv = cell(i, c).inverse();
                piv = i;
                break;
            } catch (const std::domain_error&) {
                continue;
            }
        }
        if (piv < 0) {
            for (long i = r; i < dim; ++i)
                if (!cell(i, c).is_zero())
                    throw std::logic_error("rank: column has only zero-divisor entries");
            continue;
        }
        for (long j = 0; j < dim; ++j) std::swap(cell(piv, j), cell(r, j));
        for (long i = r + 1; i < dim; ++i) {
            if (cell(i, c).is_zero()) continue;
            Scalar f = cell(i, c) * piv_inv;
            for (long j = c; j < dim; ++j) cell(i, j) -= f * cell(r, j);
        }
        ++r;
    }
    return r;
}

// --- intertwining operator and zeta scalars ---

OperatorOnDegPS intertwining_M(const DegPS& I) {
    const auto& cosets = *I.cosets;
    const DoubledSpace& ds = cosets.dspace();
    long n = cosets.dim();
    OperatorOnDegPS M = OperatorOnDegPS::zero_op(I.ctx, n);
    FMatrix delta = ds.weyl_delta();
    std::vector<FMatrix> du;
    for (const auto& u : cosets.siegel_unipotent()) du.push_back(delta * u);
    for (long i = 0; i < n; ++i)
        for (const auto& g : du) {
            auto [j, p] = cosets.decompose(g * cosets.rep(i));
            M.at(i, j) += I.equivariance(p);
        }
    return M.scaled(Scalar::q_half_power(I.ctx, -cosets.lie_dim()));
}

Scalar degps_action_trace(const DegPS& I, const FMatrix& h) {
    const auto& cosets = *I.cosets;
    Scalar tr = Scalar::zero(I.ctx);
    for (long i = 0; i < cosets.dim(); ++i) {
        auto [j, p] = cosets.decompose(cosets.rep(i) * h);
        if (j == i) tr += I.equivariance(p);
    }
    return tr;
}

Scalar zeta_scalar(const DegPS& I, const std::vector<Scalar>& f, const CharacterTable& tab,
                   long pi) {
    const GroupPtr& G = tab.group;
    const Space& parent = I.cosets->dspace().parent;
    if (G->space.kind != parent.kind || G->space.d != parent.d ||
        G->space.F->size() != parent.F->size())
        throw std::invalid_argument("zeta_scalar: group does not match the series");
    FMatrix idd = FMatrix::identity(parent.E, parent.d);
    std::vector<Scalar> k(G->order(), Scalar::zero(I.ctx));
    for (long g = 0; g < G->order(); ++g)
        k[g] = I.evaluate(f, I.cosets->dspace().iota(G->mat(g), idd));
    for (const auto& cls : G->classes)
        for (long m : cls.members)
            if (k[m] != k[cls.rep])
                throw std::domain_error("zeta kernel is not a class function");
    Scalar sum = Scalar::zero(I.ctx);
    for (size_t c = 0; c < G->classes.size(); ++c) {
        const auto& cls = G->classes[c];
        if (k[cls.rep].is_zero()) continue;
        sum += k[cls.rep] * Scalar::integer(I.ctx, static_cast<long>(cls.members.size())) *
               tab.irreducibles[pi].at_class(static_cast<long>(c));
    }
    return sum * Scalar::integer(I.ctx, tab.degrees[pi]).inverse();
}

Scalar dual_zeta_scalar(const CharacterTable& tab, long pi, const MultChar& chi) {
    const Space& space = tab.group->space;
    DegPS I = build_degps(space, chi, tab.ctx);
    OperatorOnDegPS M = intertwining_M(I);
    std::vector<Scalar> mf0 = M.apply(I.f0());
    DegPS J = build_degps(space, conj_inverse_char(space, chi), tab.ctx);
    return zeta_scalar(J, mf0, tab, pi);
}

// --- Jacobi sums and gamma factors ---

Scalar jacobi_sum_of_class_function(const GroupPtr& G, const ScalarCtxPtr& ctx,
                                    const ClassFunction& chr, const Scalar& deg,
                                    const MultChar& chi) {
    const Space& s = G->space;
    if (ctx->q() != s.F->size())
        throw std::invalid_argument("scalar context q must match the base field");
    long ldim = lie_algebra_dim(s);
    FMatrix idd = FMatrix::identity(s.E, s.d);
    Scalar sum = Scalar::zero(ctx);
    for (long g = 0; g < G->order(); ++g) {
        if (!G->g0[g]) continue;
        long det = (idd + G->mat(g)).det();
        if (det == FiniteField::ZERO) continue;
        sum += chi.value(ctx, det) * chr.at_element(g);
    }
    return sum * Scalar::q_half_power(ctx, -ldim) * deg.inverse();
}

Scalar jacobi_sum(const CharacterTable& tab, long pi, const MultChar& chi) {
    return jacobi_sum_of_class_function(tab.group, tab.ctx, tab.irreducibles[pi],
                                        Scalar::integer(tab.ctx, tab.degrees[pi]), chi);
}

Scalar jacobi_sum_char(const ScalarCtxPtr& ctx, const MultChar& alpha, const MultChar& lambda) {
    const FFPtr& E = alpha.field;
    if (lambda.field != E) throw std::invalid_argument("characters must share a field");
    long deg_over_q = 0;
    for (long v = 1; v != E->size(); v *= ctx->q()) ++deg_over_q;
    Scalar sum = Scalar::zero(ctx);
    long minus_one = E->neg(E->unit());
    for (long t = 0; t < E->order(); ++t) {
        if (t == minus_one) continue;
        sum += lambda.value(ctx, E->add(E->unit(), t)) * alpha.value(ctx, t);
    }
    return sum * Scalar::q_half_power(ctx, -deg_over_q);
}

Scalar gamma_dbl(const CharacterTable& tab, long pi, const MultChar& chi) {
    const Space& s = tab.group->space;
    const ScalarCtxPtr& ctx = tab.ctx;
    const FFPtr& E = s.E;
    Scalar omega = tab.omega_minus_one(pi);
    if (s.kind != SpaceKind::GL) {
        Scalar c = chi.value(ctx, E->neg(E->from_int(2))).pow(-s.d);
        return omega * c * jacobi_sum(tab, pi, chi);
    }
    MultChar lambda = involution_norm_char(s, chi);
    MultChar chibar_inv = conj_inverse_char(s, chi);
    ClassFunction tw{tab.group, {}};
    tw.values.reserve(tab.group->classes.size());
    for (size_t c = 0; c < tab.group->classes.size(); ++c)
        tw.values.push_back(
            tab.irreducibles[pi].at_class(static_cast<long>(c)) *
            chibar_inv.value(ctx, tab.group->mat(tab.group->classes[c].rep).det()));
    Scalar J = jacobi_sum_of_class_function(tab.group, ctx, tw,
                                            Scalar::integer(ctx, tab.degrees[pi]), lambda);
    Scalar c = chi.value(ctx, E->from_int(4)).pow(-s.d);
    return omega * c * J;
}

Scalar gamma_dbl_SO(const CharacterTable& so_tab, long pi0, const MultChar& chi) {
    const Space& s = so_tab.group->space;
    if (!kind_is_orthogonal(s.kind))
        throw std::invalid_argument("gamma_dbl_SO requires an orthogonal space");
    const ScalarCtxPtr& ctx = so_tab.ctx;
    Scalar c = chi.value(ctx, s.E->neg(s.E->from_int(2))).pow(-s.d);
    Scalar J = jacobi_sum(so_tab, pi0, chi);
    Scalar omega = (s.d % 2 == 0) ? so_tab.omega_minus_one(pi0) : Scalar::one(ctx);
    return c * J * omega;
}

// --- multiplicativity ---

const char* status_name(CheckStatus s) {
    switch (s) {
        case CheckStatus::Pass: return "pass";
        case CheckStatus::Fail: return "fail";
        case CheckStatus::Skip: return "skip";
    }
    return "?";
}

MultiplicativityReport multiplicativity_check(const CharacterTable& tab,
                                              const StandardFlag& flag, const MultChar& tau,
                                              const MultChar* pi0, const MultChar& chi) {
    const Space& s = tab.group->space;
    const ScalarCtxPtr& ctx = tab.ctx;
    MultiplicativityReport report;

    MultChar lambda = involution_norm_char(s, chi);
    if (lambda.is_trivial()) {
        report.status = CheckStatus::Skip;
        report.reason = "chi * chi-bar is trivial; the product formula needs chi^{1+c} != 1";
        return report;
    }
    long k = flag.X.cols;
    if (k != 1) throw std::invalid_argument("multiplicativity_check: the flag must be a line");
    bool is_gl = (s.kind == SpaceKind::GL);
    if (!is_gl && s.d != 2)
        throw std::invalid_argument("multiplicativity_check: nondegenerate case needs V0 = 0");
    if (is_gl && (s.d != 2 || !pi0))
        throw std::invalid_argument("multiplicativity_check: zero form needs d = 2 and pi0");

    const GroupPtr& G = tab.group;
    ParabolicData pd = parabolic_from_flag(G, flag.X, flag.Y);

    long pr = 0;
    while (flag.X.at(pr, 0) == FiniteField::ZERO) ++pr;
    FMatrix XY(s.E, s.d, 2);
    for (long i = 0; i < s.d; ++i) {
        XY.at(i, 0) = flag.X.at(i, 0);
        XY.at(i, 1) = flag.Y.at(i, 0);
    }
    FMatrix XY_inv = is_gl ? XY.inverse() : FMatrix();

    auto tau_of = [&](long gi) {
        FMatrix w = G->mat(gi) * flag.X;
        long a = s.E->mul(w.at(pr, 0), s.E->inv(flag.X.at(pr, 0)));
        Scalar v = tau.value(ctx, a);
        if (is_gl) {
            FMatrix u = XY_inv * (G->mat(gi) * flag.Y);
            v *= pi0->value(ctx, u.at(1, 0));
        }
        return v;
    };
    ClassFunction ind = induce(G, pd.P, tau_of, ctx);

    Scalar rhs_const = Scalar::zero(ctx);
    if (!is_gl) {
        MultChar alpha = tau * conj_inverse_char(s, chi);
        rhs_const = jacobi_sum_char(ctx, alpha, lambda);
    } else {
        rhs_const = jacobi_sum_char(ctx, tau, chi) * jacobi_sum_char(ctx, *pi0, chi);
    }

    for (long pi = 0; pi < tab.size(); ++pi) {
        Scalar mult = inner_product(tab.irreducibles[pi], ind);
        if (mult.is_zero()) continue;
        MultiplicativityRow row;
        row.pi = pi;
        row.lhs = jacobi_sum(tab, pi, chi);
        row.rhs = rhs_const;
        row.status = (row.lhs == row.rhs) ? CheckStatus::Pass : CheckStatus::Fail;
        if (row.status == CheckStatus::Fail) report.status = CheckStatus::Fail;
        report.rows.push_back(std::move(row));
    }
    if (report.rows.empty())
        throw std::logic_error("parabolic induction has no constituents");
    return report;
}

// --- Gauss-sum evaluations ---

namespace {

// Block multisets of anisotropic maximal tori, as norm-one parameters m_j
// over the base field.
std::vector<std::vector<long>> anisotropic_block_sets(const Space& s) {
    std::vector<std::vector<long>> out;
    std::vector<long> cur;
    if (s.kind == SpaceKind::Hermitian) {
        std::function<void(long, long)> rec = [&](long left, long maxp) {
            if (left == 0) {
                out.push_back(cur);
                return;
            }
            for (long p = std::min(left, maxp); p >= 1; --p) {
                if (p % 2 == 0) continue;
                cur.push_back(p);
                rec(left - p, p);
                cur.pop_back();
            }
        };
        rec(s.d, s.d);
        return out;
    }
    long n = (s.kind == SpaceKind::Symplectic) ? s.d / 2 : s.d / 2;  // floor for odd orthogonal
    std::function<void(long, long)> rec = [&](long left, long maxp) {
        if (left == 0) {
            out.push_back(cur);
            return;
        }
        for (long p = std::min(left, maxp); p >= 1; --p) {
            cur.push_back(p);
            rec(left - p, p);
            cur.pop_back();
        }
    };
    rec(n, n > 0 ? n : 1);
    if (s.kind == SpaceKind::OrthogonalSplit && s.d % 2 == 0) {
        // even split: an even number of norm-one blocks
        std::vector<std::vector<long>> filtered;
        for (auto& v : out)
            if (v.size() % 2 == 0) filtered.push_back(v);
        return filtered;
    }
    if (s.kind == SpaceKind::OrthogonalNonsplit && s.d % 2 == 0) {
        std::vector<std::vector<long>> filtered;
        for (auto& v : out)
            if (v.size() % 2 == 1) filtered.push_back(v);
        return filtered;
    }
    return out;
}

std::vector<std::vector<long>> all_theta_tuples(const std::vector<long>& sizes) {
    std::vector<std::vector<long>> out;
    std::vector<long> idx(sizes.size(), 0);
    while (true) {
        out.push_back(idx);
        size_t c = 0;
        while (c < idx.size() && ++idx[c] == sizes[c]) idx[c++] = 0;
        if (c == idx.size()) break;
    }
    return out;
}

// Trivial stabilizer under per-block theta -> theta * q^i and permutations of
// equal blocks.
bool theta_general_position(long q, const std::vector<long>& ms, const std::vector<long>& th) {
    size_t nb = ms.size();
    std::vector<long> sizes(nb);
    for (size_t j = 0; j < nb; ++j) sizes[j] = ipow(q, ms[j]) + 1;
    std::vector<long> perm(nb);
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end());
    do {
        bool preserves = true;
        for (size_t j = 0; j < nb; ++j)
            if (ms[perm[j]] != ms[j]) preserves = false;
        if (!preserves) continue;
        std::vector<long> exps(nb, 0);
        while (true) {
            bool identity = true;
            for (size_t j = 0; j < nb; ++j)
                if (perm[j] != static_cast<long>(j) || exps[j] != 0) identity = false;
            if (!identity) {
                bool fixes = true;
                for (size_t j = 0; j < nb; ++j) {
                    long v = (th[perm[j]] * ipow(q, exps[j])) % sizes[j];
                    if (v != th[j]) fixes = false;
                }
                if (fixes) return false;
            }
            size_t c = 0;
            while (c < nb && ++exps[c] == 2 * ms[c]) exps[c++] = 0;
            if (c == nb) break;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return true;
}

}  // namespace

bool GaussSumReport::ok() const {
    for (const auto& [pi, st] : cuspidal_matches)
        if (st == CheckStatus::Fail) return false;
    for (const auto& [label, st] : theta_matches)
        if (st == CheckStatus::Fail) return false;
    return true;
}

GaussSumReport gauss_sum_theorem_check(const CharacterTable& tab, const AddChar& psi) {
    const Space& s = tab.group->space;
    if (s.kind == SpaceKind::GL)
        throw std::invalid_argument("gauss_sum_theorem_check covers nondegenerate kinds only");
    if (psi.field != s.F) throw std::invalid_argument("psi must live on the base field");
    const ScalarCtxPtr& ctx = tab.ctx;
    const FFPtr& F = s.F;
    const FFPtr& E = s.E;
    long q = F->size(), p = F->p(), a = F->degree();
    long dimF = s.d * (E->degree() / F->degree());
    bool quadratic = (E != F);

    auto block_sets = anisotropic_block_sets(s);
    long g0_order = std::accumulate(tab.group->g0.begin(), tab.group->g0.end(), 0L);

    std::map<std::pair<long, long>, Scalar> jac_memo;
    auto jac = [&](long pi, long chij) {
        auto key = std::make_pair(pi, chij);
        auto it = jac_memo.find(key);
        if (it == jac_memo.end())
            it = jac_memo.emplace(key, jacobi_sum(tab, pi, MultChar(E, chij))).first;
        return it->second;
    };

    auto torus_tau = [&](const std::vector<long>& ms, const std::vector<long>& th,
                         const MultChar& chi) {
        std::vector<TorusBlock> blocks;
        for (size_t j = 0; j < ms.size(); ++j)
            blocks.push_back(TorusBlock{true, ms[j], th[j]});
        return torus_gauss_product(ctx, F, E, blocks, chi, psi, dimF);
    };

    GaussSumReport report;

    // chi with chi^{1+c} != 1: some anisotropic theta matches every such chi
    std::vector<long> chis_branch1, chis_branch2;
    for (long j = 0; j < E->order(); ++j) {
        MultChar chi(E, j);
        if (involution_norm_char(s, chi).is_trivial())
            chis_branch2.push_back(j);
        else
            chis_branch1.push_back(j);
    }

    for (long pi = 0; pi < tab.size(); ++pi) {
        if (!tab.cuspidal[pi]) continue;
        if (chis_branch1.empty() || block_sets.empty()) {
            report.cuspidal_matches.emplace_back(pi, CheckStatus::Skip);
            continue;
        }
        bool found = false;
        for (const auto& ms : block_sets) {
            std::vector<long> sizes;
            for (long m : ms) sizes.push_back(ipow(q, m) + 1);
            for (const auto& th : all_theta_tuples(sizes)) {
                bool all_ok = true;
                for (long j : chis_branch1) {
                    MultChar chi(E, j);
                    Scalar rhs = c_V_constant(ctx, s.kind, s.d, chi, psi) * torus_tau(ms, th, chi);
                    if (jac(pi, j) != rhs) {
                        all_ok = false;
                        break;
                    }
                }
                if (all_ok) {
                    found = true;
                    break;
                }
            }
            if (found) break;
        }
        report.cuspidal_matches.emplace_back(pi, found ? CheckStatus::Pass : CheckStatus::Fail);
    }

    // chi with chi^{1+c} = 1: every general-position theta is matched by some
    // cuspidal pi under the inverse formula
    std::vector<long> cuspidals;
    for (long pi = 0; pi < tab.size(); ++pi)
        if (tab.cuspidal[pi]) cuspidals.push_back(pi);

    Scalar eps_sign = Scalar::integer(ctx, isometry_group_sign(s.kind, s.d));
    for (const auto& ms : block_sets) {
        std::vector<long> sizes;
        long torus_order = 1;
        for (long m : ms) {
            sizes.push_back(ipow(q, m) + 1);
            torus_order *= ipow(q, m) + 1;
        }
        bool abelian = (g0_order == torus_order);
        for (const auto& th : all_theta_tuples(sizes)) {
            if (!abelian && !theta_general_position(q, ms, th)) continue;
            std::ostringstream label;
            label << "m=[";
            for (size_t j = 0; j < ms.size(); ++j) label << (j ? "," : "") << ms[j];
            label << "] theta=[";
            for (size_t j = 0; j < th.size(); ++j) label << (j ? "," : "") << th[j];
            label << "]";

            std::vector<long> admissible;
            for (long j : chis_branch2) {
                if (quadratic && j == 0) {
                    bool all_nontrivial = true;
                    for (size_t t = 0; t < th.size(); ++t)
                        if (th[t] % sizes[t] == 0) all_nontrivial = false;
                    if (!all_nontrivial) continue;
                }
                admissible.push_back(j);
            }
            if (admissible.empty()) {
                report.theta_matches.emplace_back(label.str(), CheckStatus::Skip);
                continue;
            }

            std::vector<Scalar> rhs;
            for (long j : admissible) {
                MultChar chi(E, j);
                Scalar v = eps_sign * Scalar::q_half_power(ctx, -(dimF / 2)) *
                           torus_tau(ms, th, chi).inverse();
                if (!quadratic && dimF % 2 == 1) v *= chi.value(ctx, E->from_int(2));
                rhs.push_back(v);
            }
            bool found = false;
            for (long pi : cuspidals) {
                bool all_ok = true;
                for (size_t t = 0; t < admissible.size(); ++t)
                    if (jac(pi, admissible[t]) != rhs[t]) {
                        all_ok = false;
                        break;
                    }
                if (all_ok) {
                    found = true;
                    break;
                }
            }
            report.theta_matches.emplace_back(label.str(),
                                              found ? CheckStatus::Pass : CheckStatus::Fail);
        }
    }
    (void)p;
    (void)a;
    return report;
}

// --- flat operator ---

bool flat_operator_check(const Space& space, const MultChar& chi, const ScalarCtxPtr& ctx) {
    if (space.kind != SpaceKind::GL || space.d != 2)
        throw std::invalid_argument("flat_operator_check: zero form of dimension 2 only");
    const FFPtr& F = space.F;
    DegPS I = build_degps(space, chi, ctx);
    const DoubledSpace& ds = I.cosets->dspace();
    std::vector<Scalar> f0 = I.f0();
    FMatrix id4 = FMatrix::identity(F, 4);

    // In the zero-form doubled basis the Nabla block keeps the forward order,
    // so X = (e1 Delta, e1 Nabla) sits at positions {0, 2}; V0 at {1, 3}.
    // Coset representatives of (N_X cap P^Delta) \ N_X: I + t E_{2,1}.
    std::vector<FMatrix> ucosets;
    for (long r = 0; r < F->size(); ++r) {
        FMatrix u = id4;
        u.at(2, 1) = F->element_of_rank(r);
        ucosets.push_back(u);
    }
    auto phi = [&](const FMatrix& h) {
        Scalar v = Scalar::zero(ctx);
        for (const auto& u : ucosets) v += I.evaluate(f0, u * h);
        return v;
    };

    GroupPtr GL2 = enumerate_group(make_space(SpaceKind::GL, 2, F->size()));
    auto embed = [&](const FMatrix& g, long p0, long p1) {
        FMatrix m = id4;
        m.at(p0, p0) = g.at(0, 0);
        m.at(p0, p1) = g.at(0, 1);
        m.at(p1, p0) = g.at(1, 0);
        m.at(p1, p1) = g.at(1, 1);
        return m;
    };
    std::vector<std::pair<FMatrix, FMatrix>> levi_x;  // (4x4 element, X-block)
    std::vector<FMatrix> levi_full;
    for (long i = 0; i < GL2->order(); ++i)
        for (long j = 0; j < GL2->order(); ++j)
            levi_full.push_back(embed(GL2->mat(i), 0, 2) * embed(GL2->mat(j), 1, 3));

    // P^Delta generators for subspace orbits, and coset representatives of
    // P_X \ G by an orbit walk on the key h^{-1} X.
    std::vector<FMatrix> pdelta_gens;
    for (long i = 0; i < GL2->order(); ++i) {
        FMatrix m = id4;
        m.at(0, 0) = GL2->mat(i).at(0, 0);
        m.at(0, 1) = GL2->mat(i).at(0, 1);
        m.at(1, 0) = GL2->mat(i).at(1, 0);
        m.at(1, 1) = GL2->mat(i).at(1, 1);
        pdelta_gens.push_back(m);
        FMatrix m2 = id4;
        m2.at(2, 2) = GL2->mat(i).at(0, 0);
        m2.at(2, 3) = GL2->mat(i).at(0, 1);
        m2.at(3, 2) = GL2->mat(i).at(1, 0);
        m2.at(3, 3) = GL2->mat(i).at(1, 1);
        pdelta_gens.push_back(m2);
    }
    for (const auto& n : I.cosets->siegel_unipotent()) pdelta_gens.push_back(n);

    auto x_key = [&](const FMatrix& hinv) {
        FMatrix rows(F, 2, 4);
        for (long i = 0; i < 4; ++i) {
            rows.at(0, i) = hinv.at(i, 0);
            rows.at(1, i) = hinv.at(i, 2);
        }
        return rows.row_reduced().a;
    };

    // orbit of X under p^{-1} for p in P^Delta (membership set for P_X P^Delta)
    std::set<std::vector<long>> porbit;
    {
        std::deque<FMatrix> queue;
        FMatrix X0(F, 4, 2);
        X0.at(0, 0) = F->unit();
        X0.at(2, 1) = F->unit();
        auto skey = [&](const FMatrix& cols) { return cols.transpose().row_reduced().a; };
        porbit.insert(skey(X0));
        queue.push_back(X0);
        while (!queue.empty()) {
            FMatrix W = queue.front();
            queue.pop_front();
            for (const auto& g : pdelta_gens) {
                FMatrix W2 = g.inverse() * W;
                if (porbit.insert(skey(W2)).second) queue.push_back(W2);
            }
        }
    }

    // coset representatives of P_X \ G
    std::vector<FMatrix> xreps;
    {
        std::map<std::vector<long>, long> seen;
        std::deque<long> queue;
        std::vector<FMatrix> all_gens = pdelta_gens;
        FMatrix idd = FMatrix::identity(F, 2);
        for (long i = 0; i < GL2->order(); ++i) {
            all_gens.push_back(ds.iota(GL2->mat(i), idd));
            all_gens.push_back(ds.iota(idd, GL2->mat(i)));
        }
        all_gens.push_back(ds.weyl_delta());
        xreps.push_back(id4);
        seen[x_key(id4)] = 0;
        queue.push_back(0);
        while (!queue.empty()) {
            FMatrix h = xreps[queue.front()];
            queue.pop_front();
            for (const auto& g : all_gens) {
                FMatrix h2 = h * g;
                auto key = x_key(h2.inverse());
                if (seen.count(key)) continue;
                seen[key] = static_cast<long>(xreps.size());
                queue.push_back(static_cast<long>(xreps.size()));
                xreps.push_back(h2);
            }
        }
        if (static_cast<long>(xreps.size()) != static_cast<long>(isotropic_rrefs(ds.box, 2).size()))
            throw std::logic_error("flat operator: X-coset walk is incomplete");
    }

    bool ok = true;
    bool any_nonzero = false;

    // support: Lambda f0 vanishes outside P_X P^Delta
    for (const auto& r : xreps) {
        bool member = porbit.count(x_key(r.inverse())) > 0;
        for (const auto& l : levi_full) {
            Scalar v = phi(l * r);
            if (!v.is_zero()) {
                any_nonzero = true;
                if (!member) ok = false;
            }
        }
    }
    if (!any_nonzero) ok = false;

    // value on P_X P^Delta: phi(l p) = chi_Delta(p) chi-bar^{-1}(p)
    //                                  * (f0 of X-double)(l_X) (f0 of V0-double)(l_V0)
    Space line = make_space(SpaceKind::GL, 1, F->size());
    DegPS I1 = build_degps(line, chi, ctx);
    std::vector<Scalar> f01 = I1.f0();
    auto sub2 = [&](const FMatrix& l, long p0, long p1) {
        FMatrix m(F, 2, 2);
        m.at(0, 0) = l.at(p0, p0);
        m.at(0, 1) = l.at(p0, p1);
        m.at(1, 0) = l.at(p1, p0);
        m.at(1, 1) = l.at(p1, p1);
        return m;
    };
    std::vector<FMatrix> psamples;
    psamples.push_back(id4);
    for (size_t i = 0; i < pdelta_gens.size(); i += 17) psamples.push_back(pdelta_gens[i]);
    psamples.push_back(pdelta_gens[3] * pdelta_gens[40] * pdelta_gens.back());
    for (const auto& pmat : psamples) {
        if (!ds.in_siegel_parabolic(pmat)) throw std::logic_error("flat operator: bad sample");
        Scalar eq = I.equivariance(pmat);
        for (const auto& l : levi_full) {
            Scalar lhs = phi(l * pmat);
            Scalar rhs = eq * I1.evaluate(f01, sub2(l, 0, 2)) * I1.evaluate(f01, sub2(l, 1, 3));
            if (lhs != rhs) ok = false;
        }
    }

    // iota support: (Lambda f0)(iota(g, 1)) != 0 forces g into the parabolic
    // stabilizing the first coordinate line
    FMatrix idd = FMatrix::identity(F, 2);
    for (long gi = 0; gi < GL2->order(); ++gi) {
        const FMatrix& g = GL2->mat(gi);
        bool nonzero = false;
        FMatrix ig = ds.iota(g, idd);
        for (const auto& l : levi_full)
            if (!phi(l * ig).is_zero()) {
                nonzero = true;
                break;
            }
        if (nonzero && g.at(1, 0) != FiniteField::ZERO) ok = false;
    }
    return ok;
}

// --- multiplicity one ---

long multiplicity_one_dimension(const CharacterTable& tab, long pi, const MultChar& chi) {
    const GroupPtr& G = tab.group;
    const Space& s = G->space;
    const ScalarCtxPtr& ctx = tab.ctx;
    DegPS I = build_degps(s, chi, ctx);
    const DoubledSpace& ds = I.cosets->dspace();
    // The second tensor factor is twisted by chi composed with kappa_V(x):
    // kappa_V = id for nondegenerate kinds, kappa_V(x) = x / conj(x) for GL.
    MultChar chi_inv = chi.inverse();
    if (s.kind == SpaceKind::GL) chi_inv = chi_inv * chi.frobenius_twist(s.F->degree());

    Scalar sum = Scalar::zero(ctx);
    long nc = static_cast<long>(G->classes.size());
    for (long c1 = 0; c1 < nc; ++c1) {
        const auto& C1 = G->classes[c1];
        Scalar char1 = tab.irreducibles[pi].at_class(c1);
        if (char1.is_zero()) continue;
        for (long c2 = 0; c2 < nc; ++c2) {
            const auto& C2 = G->classes[c2];
            long r2 = C2.rep;
            Scalar char2 = tab.irreducibles[pi].at_element(G->inv(r2));
            if (char2.is_zero()) continue;
            Scalar det_tw = chi_inv.value(ctx, G->mat(r2).det());
            Scalar tr = degps_action_trace(I, ds.iota(G->mat(C1.rep), G->mat(r2)));
            if (tr.is_zero()) continue;
            sum += Scalar::integer(ctx, static_cast<long>(C1.members.size() * C2.members.size())) *
                   tr * char1 * char2 * det_tw;
        }
    }
    long n = G->order();
    Scalar dim = sum * Scalar::rational(ctx, Rat(1, n * n));
    for (long t = 0; t <= 1000; ++t)
        if (dim == Scalar::integer(ctx, t)) return t;
    throw std::logic_error("multiplicity dimension is not a small nonnegative integer");
}

// --- FlagCosets ---

FlagCosets::FlagCosets(SpaceKind kind, long d, long q) : kind_(kind), d_(d) {
    eps_ = (kind == SpaceKind::Symplectic) ? -1 : 1;
    long p = q, a = 1;
    for (long c = 2; c * c <= p; ++c)
        while (p % c == 0 && p > c) {
            p /= c;
            ++a;
        }
    F_ = FiniteField::get(p, a);
    FFPtr E = (kind == SpaceKind::Hermitian) ? FiniteField::get(p, 2 * a) : F_;

    box_.kind = (kind == SpaceKind::OrthogonalNonsplit) ? SpaceKind::OrthogonalSplit : kind;
    box_.F = F_;
    box_.E = E;
    box_.d = 2 * d;
    box_.eps = eps_;
    box_.gram = FMatrix::zero(E, 2 * d, 2 * d);
    if (kind != SpaceKind::GL) {
        long unit = E->unit(), mu = (eps_ == -1) ? E->neg(unit) : unit;
        for (long i = 0; i < d; ++i) box_.gram.at(i, 2 * d - 1 - i) = unit;
        for (long i = d; i < 2 * d; ++i) box_.gram.at(i, 2 * d - 1 - i) = mu;
    }
    if (kind != SpaceKind::Symplectic || d % 2 == 0) {
        DoubledSpace check = double_space(make_space(kind, d, q));
        if (check.box.gram != box_.gram || check.box.kind != box_.kind)
            throw std::logic_error("flag box disagrees with the doubled space");
    }

    if (E != F_) {
        delta_ = FiniteField::ZERO;
        for (long r = 1; r < E->size(); ++r) {
            long x = E->element_of_rank(r);
            if (E->trace_to(*F_, x) == FiniteField::ZERO) {
                delta_ = x;
                break;
            }
        }
        if (delta_ == FiniteField::ZERO) throw std::logic_error("no trace-zero element");
    } else {
        delta_ = E->unit();
    }

    // Siegel unipotent of the box: n(Y) = [[I, Y], [0, I]] isometries
    std::vector<FMatrix> nlist;
    {
        std::function<FMatrix(const FMatrix&)> cond;
        if (kind == SpaceKind::GL) {
            cond = [&](const FMatrix&) { return FMatrix::zero(E, 1, 1); };
        } else {
            FMatrix U1 = block_of(box_.gram, 0, d, d, d);
            FMatrix C = block_of(box_.gram, d, 0, d, d);
            cond = [&, U1, C](const FMatrix& Y) {
                return C * box_.conj_matrix(Y) + Y.transpose() * U1;
            };
        }
        auto basis = solve_matrix_condition(E, F_, d, d, cond);
        for (const auto& Y : span_over_f(E, F_, basis, d, d)) {
            FMatrix n = FMatrix::identity(E, 2 * d);
            for (long i = 0; i < d; ++i)
                for (long j = 0; j < d; ++j) n.at(i, d + j) = Y.at(i, j);
            if (kind != SpaceKind::GL && !box_.is_isometry(n))
                throw std::logic_error("flag unipotent is not an isometry");
            nlist.push_back(std::move(n));
        }
    }

    // Borel Levi: upper-triangular block pairs
    std::vector<FMatrix> uptri;
    {
        long nfree = d * (d - 1) / 2;
        std::vector<long> diag(d, 0), off(nfree, 0);
        while (true) {
            FMatrix m = FMatrix::zero(E, d, d);
            for (long i = 0; i < d; ++i) m.at(i, i) = diag[i];  // labels 0..order-1, nonzero
            long t = 0;
            for (long i = 0; i < d; ++i)
                for (long j = i + 1; j < d; ++j) m.at(i, j) = E->element_of_rank(off[t++]);
            uptri.push_back(std::move(m));
            long c = 0;
            while (c < d && ++diag[c] == E->order()) diag[c++] = 0;
            if (c == d) {
                long c2 = 0;
                while (c2 < nfree && ++off[c2] == E->size()) off[c2++] = 0;
                if (c2 == nfree) break;
            }
        }
    }
    std::vector<std::pair<FMatrix, FMatrix>> borel_pairs;
    if (kind == SpaceKind::GL) {
        for (const auto& u1 : uptri)
            for (const auto& u2 : uptri) borel_pairs.emplace_back(u1, u2);
    } else {
        for (const auto& u : uptri) {
            FMatrix m = siegel_levi(box_, d, u, siegel_sigma(box_, d, u));
            if (!box_.is_isometry(m)) throw std::logic_error("borel levi is not an isometry");
            borel_pairs.emplace_back(u, block_of(m, d, d, d, d));
        }
    }

    std::vector<FMatrix> gens;
    for (const auto& [top, bot] : borel_pairs) gens.push_back(siegel_levi(box_, d, top, bot));
    for (const auto& n : nlist) gens.push_back(n);
    for (long i = 1; i <= d; ++i) gens.push_back(s_matrix(i));
    if (kind == SpaceKind::GL) {
        // the full Weyl group of the box as permutation matrices
        std::vector<long> perm(2 * d);
        std::iota(perm.begin(), perm.end(), 0);
        do {
            FMatrix m = FMatrix::zero(E, 2 * d, 2 * d);
            for (long i = 0; i < 2 * d; ++i) m.at(perm[i], i) = E->unit();
            gens.push_back(std::move(m));
        } while (std::next_permutation(perm.begin(), perm.end()));
    }

    std::deque<long> queue;
    reps_.push_back(FMatrix::identity(E, 2 * d));
    index_of_key_[key_of(reps_[0])] = 0;
    queue.push_back(0);
    while (!queue.empty()) {
        FMatrix h = reps_[queue.front()];
        queue.pop_front();
        for (const auto& g : gens) {
            FMatrix h2 = h * g;
            auto key = key_of(h2);
            if (index_of_key_.count(key)) continue;
            index_of_key_[key] = static_cast<long>(reps_.size());
            queue.push_back(static_cast<long>(reps_.size()));
            reps_.push_back(std::move(h2));
        }
    }

    long borel_order = static_cast<long>(borel_pairs.size()) * static_cast<long>(nlist.size());
    if (borel_order * dim() != box_group_order(kind, 2 * d, F_->size(), E->size()))
        throw std::logic_error("flag coset count does not match the group order");

    // lexicographically minimal representative over the Borel
    long n2 = 2 * d;
    for (auto& rep : reps_) {
        std::vector<long> best = rep.a;
        std::vector<long> cand(n2 * n2);
        for (const auto& nmat : nlist) {
            FMatrix Y = nmat * rep;
            for (const auto& [top, bot] : borel_pairs) {
                int cmp = 0;
                for (long r = 0; r < n2 && cmp == 0; ++r) {
                    const FMatrix& blk = (r < d) ? top : bot;
                    long br = (r < d) ? r : r - d;
                    for (long c = 0; c < n2; ++c) {
                        long acc = FiniteField::ZERO;
                        for (long t = 0; t < d; ++t) {
                            long v = blk.at(br, t);
                            if (v == FiniteField::ZERO) continue;
                            long w = Y.at((r < d) ? t : d + t, c);
                            if (w == FiniteField::ZERO) continue;
                            acc = E->add(acc, E->mul(v, w));
                        }
                        cand[r * n2 + c] = acc;
                    }
                    for (long c = 0; c < n2 && cmp == 0; ++c) {
                        long av = cand[r * n2 + c], bv = best[r * n2 + c];
                        if (av != bv) cmp = (av < bv) ? -1 : 1;
                    }
                }
                if (cmp == -1) best = (siegel_levi(box_, d, top, bot) * Y).a;
            }
        }
        rep.a = best;
    }
    index_of_key_.clear();
    for (size_t i = 0; i < reps_.size(); ++i) {
        auto key = key_of(reps_[i]);
        if (index_of_key_.count(key)) throw std::logic_error("duplicate flag representative");
        index_of_key_[key] = static_cast<long>(i);
        rep_inv_.push_back(reps_[i].inverse());
    }
}

std::vector<long> FlagCosets::key_of(const FMatrix& h) const {
    FMatrix hinv = h.inverse();
    long n = 2 * d_;
    std::vector<long> key;
    for (long k = 1; k < n; ++k) {
        FMatrix rows(h.field, k, n);
        for (long i = 0; i < n; ++i)
            for (long j = 0; j < k; ++j) rows.at(j, i) = hinv.at(i, j);
        auto r = rows.row_reduced().a;
        key.insert(key.end(), r.begin(), r.end());
    }
    return key;
}

std::pair<long, FMatrix> FlagCosets::decompose(const FMatrix& h) const {
    auto it = index_of_key_.find(key_of(h));
    if (it == index_of_key_.end())
        throw std::invalid_argument("flag decompose: element is not in the group");
    long j = it->second;
    FMatrix b = h * rep_inv_[j];
    for (long i = 0; i < b.rows; ++i)
        for (long c = 0; c < i; ++c)
            if (b.at(i, c) != FiniteField::ZERO)
                throw std::logic_error("flag decompose: factor is not upper triangular");
    return {j, b};
}

FMatrix FlagCosets::s_matrix(long i) const {
    const FFPtr& E = box_.E;
    long n = 2 * d_;
    FMatrix s = FMatrix::identity(E, n);
    if (i < 1 || i > d_) throw std::out_of_range("s_matrix: index out of range");
    if (i < d_) {
        long a1 = i - 1, a2 = i, b1 = n - i - 1, b2 = n - i;
        s.at(a1, a1) = FiniteField::ZERO;
        s.at(a2, a2) = FiniteField::ZERO;
        s.at(a1, a2) = E->unit();
        s.at(a2, a1) = E->unit();
        s.at(b1, b1) = FiniteField::ZERO;
        s.at(b2, b2) = FiniteField::ZERO;
        s.at(b1, b2) = E->unit();
        s.at(b2, b1) = E->unit();
    } else {
        long a1 = d_ - 1, a2 = d_;
        s.at(a1, a1) = FiniteField::ZERO;
        s.at(a2, a2) = FiniteField::ZERO;
        s.at(a1, a2) = E->unit();
        s.at(a2, a1) = (kind_ == SpaceKind::GL)
                           ? E->unit()
                           : ((eps_ == -1) ? E->neg(E->unit()) : E->unit());
    }
    if (kind_ != SpaceKind::GL && !box_.is_isometry(s))
        throw std::logic_error("s_matrix: not an isometry");
    return s;
}

FMatrix FlagCosets::r_matrix(long i, long x) const {
    const FFPtr& E = box_.E;
    long n = 2 * d_;
    if (i < 1 || i > d_) throw std::out_of_range("r_matrix: index out of range");
    if (i < d_) {
        if (kind_ == SpaceKind::GL)
            throw std::logic_error("r_matrix: inner roots unsupported for the zero form");
        FMatrix a = FMatrix::identity(E, d_);
        a.at(i - 1, i) = x;
        FMatrix m = siegel_levi(box_, d_, a, siegel_sigma(box_, d_, a));
        if (!box_.is_isometry(m)) throw std::logic_error("r_matrix: not an isometry");
        return m;
    }
    FMatrix m = FMatrix::identity(E, n);
    bool use_delta = (E != F_ && eps_ == 1);
    m.at(d_ - 1, d_) = use_delta ? E->mul(delta_, x) : x;
    if (kind_ != SpaceKind::GL && !box_.is_isometry(m))
        throw std::logic_error("r_matrix: not an isometry");
    return m;
}

std::vector<long> FlagCosets::r_domain(long i) const {
    const FFPtr& Ef = box_.E;
    std::vector<long> out;
    if (i < 1 || i > d_) throw std::out_of_range("r_domain: index out of range");
    if (i < d_ || kind_ == SpaceKind::GL) {
        for (long r = 0; r < Ef->size(); ++r) out.push_back(Ef->element_of_rank(r));
        return out;
    }
    if (Ef == F_ && eps_ == 1) {
        out.push_back(FiniteField::ZERO);  // F_V = {0}
        return out;
    }
    if (Ef == F_) {
        for (long r = 0; r < F_->size(); ++r) out.push_back(F_->element_of_rank(r));
        return out;
    }
    for (long r = 0; r < F_->size(); ++r) {
        long f = F_->element_of_rank(r);
        out.push_back(f == FiniteField::ZERO ? FiniteField::ZERO : Ef->embed_from(*F_, f));
    }
    return out;
}

std::shared_ptr<const FlagCosets> FlagCosets::get(SpaceKind kind, long d, long q) {
    static std::mutex mu;
    static std::map<std::tuple<int, long, long>, std::shared_ptr<const FlagCosets>> memo;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(static_cast<int>(kind), d, q);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    auto ptr = std::shared_ptr<const FlagCosets>(new FlagCosets(kind, d, q));
    memo[key] = ptr;
    return ptr;
}

// --- principal series ---

bool PSTuple::operator==(const PSTuple& o) const {
    if (chars.size() != o.chars.size()) return false;
    for (size_t i = 0; i < chars.size(); ++i)
        if (!(chars[i] == o.chars[i])) return false;
    return true;
}

PSTuple ps_tuple_constant(const FlagCosetsPtr& fc, const MultChar& chi) {
    if (chi.field != fc->E()) throw std::invalid_argument("character must live on the form field");
    long d = fc->d();
    MultChar bar_inv = chi.frobenius_twist(fc->F()->degree()).inverse();
    PSTuple t;
    t.chars.assign(d, chi);
    for (long i = 0; i < d; ++i) t.chars.push_back(bar_inv);
    return t;
}

Scalar PrincipalSeries::equivariance(const FMatrix& b) const {
    long d = cosets->d();
    long upto = (cosets->parent_kind() == SpaceKind::GL) ? 2 * d : d;
    Scalar v = Scalar::one(ctx);
    for (long i = 0; i < upto; ++i) v *= tuple.chars[i].value(ctx, b.at(i, i));
    return v;
}

Scalar PrincipalSeries::evaluate(const std::vector<Scalar>& f, const FMatrix& h) const {
    auto [j, b] = cosets->decompose(h);
    if (f[j].is_zero()) return Scalar::zero(ctx);
    return equivariance(b) * f[j];
}

std::vector<Scalar> SparseOp::apply(const std::vector<Scalar>& f) const {
    std::vector<Scalar> out(dim, Scalar::zero(f[0].ctx()));
    for (long i = 0; i < dim; ++i)
        for (const auto& [j, c] : rows[i])
            if (!f[j].is_zero()) out[i] += c * f[j];
    return out;
}

OperatorOnDegPS SparseOp::dense(const ScalarCtxPtr& ctx) const {
    OperatorOnDegPS M = OperatorOnDegPS::zero_op(ctx, dim);
    for (long i = 0; i < dim; ++i)
        for (const auto& [j, c] : rows[i]) M.at(i, j) += c;
    return M;
}

PSTuple reflect_tuple(const FlagCosetsPtr& fc, const PSTuple& tuple, long i) {
    long d = fc->d(), n = 2 * d;
    PSTuple t = tuple;
    if (i < 1 || i > d) throw std::out_of_range("reflect_tuple: index out of range");
    if (i < d) {
        std::swap(t.chars[i - 1], t.chars[i]);
        std::swap(t.chars[n - i - 1], t.chars[n - i]);
    } else {
        std::swap(t.chars[d - 1], t.chars[d]);
    }
    return t;
}

SparseOp simple_reflection_m(const PrincipalSeries& ps, long i, PSTuple* target) {
    const FlagCosetsPtr& fc = ps.cosets;
    const ScalarCtxPtr& ctx = ps.ctx;
    auto dom = fc->r_domain(i);
    Scalar norm = Scalar::one(ctx);
    if (dom.size() > 1) {
        long k = 0;
        for (long v = 1; v != static_cast<long>(dom.size()); v *= ctx->q()) ++k;
        norm = Scalar::q_half_power(ctx, -k);
    }
    FMatrix s = fc->s_matrix(i);
    std::vector<FMatrix> sr;
    for (long x : dom) sr.push_back(s * fc->r_matrix(i, x));

    SparseOp op;
    op.dim = fc->dim();
    op.rows.resize(op.dim);
    for (long row = 0; row < op.dim; ++row) {
        std::map<long, Scalar> acc;
        for (const auto& g : sr) {
            auto [j, b] = fc->decompose(g * fc->rep(row));
            Scalar c = ps.equivariance(b) * norm;
            auto it = acc.find(j);
            if (it == acc.end())
                acc.emplace(j, std::move(c));
            else
                it->second += c;
        }
        for (auto& [j, c] : acc)
            if (!c.is_zero()) op.rows[row].emplace_back(j, std::move(c));
    }
    if (target) *target = reflect_tuple(fc, ps.tuple, i);
    return op;
}

std::vector<std::vector<Scalar>> embed_degps_in_ps(const DegPS& I, const FlagCosetsPtr& fc) {
    const DoubledSpace& ds = I.cosets->dspace();
    if (fc->box().gram != ds.box.gram || fc->box().E != ds.box.E)
        throw std::invalid_argument("embed_degps_in_ps: mismatched doubled spaces");
    std::vector<std::vector<Scalar>> out(fc->dim(),
                                         std::vector<Scalar>(I.dim(), Scalar::zero(I.ctx)));
    for (long r = 0; r < fc->dim(); ++r) {
        auto [j, p] = I.cosets->decompose(fc->rep(r));
        out[r][j] = I.equivariance(p);
    }
    return out;
}

bool factorize_M_check(const Space& space, const MultChar& chi, const ScalarCtxPtr& ctx) {
    long d = space.d;
    if (space.kind == SpaceKind::GL && d != 1)
        throw std::invalid_argument("factorize_M_check: zero form supported for d = 1 only");
    if (d > 2) throw std::invalid_argument("factorize_M_check: d <= 2 only");

    DegPS I_src = build_degps(space, chi, ctx);
    MultChar chibar_inv = conj_inverse_char(space, chi);
    DegPS I_tgt = build_degps(space, chibar_inv, ctx);
    OperatorOnDegPS M = intertwining_M(I_src);
    FlagCosetsPtr fc = FlagCosets::get(space.kind, d, space.F->size());

    auto Esrc = embed_degps_in_ps(I_src, fc);
    auto Etgt = embed_degps_in_ps(I_tgt, fc);
    long nd = I_src.dim(), np = fc->dim();

    auto apply_chain = [&](const std::vector<long>& order) {
        std::vector<std::vector<Scalar>> cols(nd, std::vector<Scalar>(np, Scalar::zero(ctx)));
        for (long k = 0; k < nd; ++k)
            for (long r = 0; r < np; ++r) cols[k][r] = Esrc[r][k];
        PSTuple tuple = ps_tuple_constant(fc, chi);
        for (long idx : order) {
            PrincipalSeries ps{fc, tuple, ctx};
            SparseOp m = simple_reflection_m(ps, idx, &tuple);
            for (long k = 0; k < nd; ++k) cols[k] = m.apply(cols[k]);
        }
        if (!(tuple == ps_tuple_constant(fc, chibar_inv)))
            throw std::logic_error("factorize: chain does not land in I(chi-bar^{-1})");
        return cols;
    };

    std::vector<long> orderA, orderB;
    for (long j = d; j >= 1; --j)
        for (long t = j; t <= d; ++t) orderA.push_back(t);
    for (long j = 1; j <= d; ++j)
        for (long t = d; t >= j; --t) orderB.push_back(t);
    auto chainA = apply_chain(orderA);
    auto chainB = apply_chain(orderB);

    Scalar scale = Scalar::one(ctx);
    if (space.kind != SpaceKind::GL) {
        const FFPtr& E = space.E;
        scale = chi.value(ctx, E->from_int(2)).pow(-d) *
                chi.inverse().value(ctx, I_src.cosets->dspace().S.det());
    }

    bool ok = true;
    for (long k = 0; k < nd && ok; ++k)
        for (long r = 0; r < np && ok; ++r) {
            Scalar lhs = Scalar::zero(ctx);
            for (long j = 0; j < nd; ++j) {
                if (Etgt[r][j].is_zero() || M.at(j, k).is_zero()) continue;
                lhs += Etgt[r][j] * M.at(j, k);
            }
            Scalar rhsA = scale * chainA[k][r];
            if (lhs != rhsA) ok = false;
            if (chainA[k][r] != chainB[k][r]) ok = false;
        }
    return ok;
}

}  // namespace gfw
