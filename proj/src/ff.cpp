#include "gfw/ff.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

namespace gfw {

namespace {

// --- polynomial arithmetic over F_p, coefficient vectors low-to-high ---

void poly_trim(std::vector<long>& f) {
    while (!f.empty() && f.back() == 0) f.pop_back();
}

std::vector<long> poly_mul_mod(const std::vector<long>& a, const std::vector<long>& b,
                               const std::vector<long>& mod, long p) {
    std::vector<long> r(a.size() + b.size(), 0);
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (size_t j = 0; j < b.size(); ++j) r[i + j] = (r[i + j] + a[i] * b[j]) % p;
    }
    // reduce modulo the monic polynomial mod
    long k = static_cast<long>(mod.size()) - 1;
    for (long d = static_cast<long>(r.size()) - 1; d >= k; --d) {
        long c = r[d];
        if (c == 0) continue;
        for (long i = 0; i <= k; ++i) {
            long idx = d - k + i;
            r[idx] = ((r[idx] - c * mod[i]) % p + p) % p;
        }
    }
    r.resize(k, 0);
    return r;
}

std::vector<long> poly_pow_mod(std::vector<long> base, long e, const std::vector<long>& mod,
                               long p) {
    long k = static_cast<long>(mod.size()) - 1;
    std::vector<long> r(k, 0);
    r[0] = 1;
    while (e > 0) {
        if (e & 1) r = poly_mul_mod(r, base, mod, p);
        base = poly_mul_mod(base, base, mod, p);
        e >>= 1;
    }
    return r;
}

bool poly_is_one(const std::vector<long>& f) {
    if (f.empty() || f[0] != 1) return false;
    for (size_t i = 1; i < f.size(); ++i)
        if (f[i] != 0) return false;
    return true;
}

bool poly_is_zero(const std::vector<long>& f) {
    return std::all_of(f.begin(), f.end(), [](long c) { return c == 0; });
}

std::vector<long> prime_factors(long n) {
    std::vector<long> ps;
    for (long d = 2; d * d <= n; ++d)
        if (n % d == 0) {
            ps.push_back(d);
            while (n % d == 0) n /= d;
        }
    if (n > 1) ps.push_back(n);
    return ps;
}

long ipow(long b, long e) {
    long r = 1;
    while (e-- > 0) r *= b;
    return r;
}

long encode(const std::vector<long>& f, long p, long k) {
    long v = 0;
    for (long i = k - 1; i >= 0; --i) v = v * p + (i < static_cast<long>(f.size()) ? f[i] : 0);
    return v;
}

}  // namespace

FFPtr FiniteField::get(long p, long k) {
    static std::map<std::pair<long, long>, FFPtr> registry;
    auto key = std::make_pair(p, k);
    auto it = registry.find(key);
    if (it != registry.end()) return it->second;
    FFPtr f(new FiniteField(p, k));
    registry.emplace(key, f);
    return f;
}

FiniteField::FiniteField(long p, long k) : p_(p), k_(k), size_(ipow(p, k)) {
    long ord = size_ - 1;
    auto ord_primes = prime_factors(ord);

    // Candidate test: is x primitive modulo the monic polynomial f, and is
    // x^((p^k-1)/(p^k'-1)) a root of the degree-k' canonical polynomial for
    // every proper subfield?
    auto accept = [&](const std::vector<long>& f) {
        if (f[0] == 0) return false;  // x | f: not invertible
        std::vector<long> x(k, 0);
        if (k == 1) {
            // f = X - g: the generator is g itself
            x[0] = (p - f[0]) % p;
        } else {
            x[1] = 1;
        }
        if (!poly_is_one(poly_pow_mod(x, ord, f, p))) return false;
        for (long q : ord_primes)
            if (poly_is_one(poly_pow_mod(x, ord / q, f, p))) return false;
        // Subfield compatibility through the norm of the generator.
        for (long k2 = 1; k2 < k; ++k2) {
            if (k % k2 != 0) continue;
            FFPtr sub = FiniteField::get(p, k2);
            long e = ord / sub->order();
            std::vector<long> y = poly_pow_mod(x, e, f, p);
            // Evaluate the subfield's defining polynomial at y.
            std::vector<long> acc(k, 0);
            std::vector<long> ypow(k, 0);
            ypow[0] = 1;
            const auto& g = sub->modulus();
            for (size_t i = 0; i < g.size(); ++i) {
                for (long d = 0; d < k; ++d) acc[d] = (acc[d] + g[i] * ypow[d]) % p;
                ypow = poly_mul_mod(ypow, y, f, p);
            }
            if (!poly_is_zero(acc)) return false;
        }
        return true;
    };

    // Scan monic polynomials of degree k in ascending lexicographic order of
    // the coefficient word (c_0, ..., c_{k-1}), c_0 fastest.
    std::vector<long> f(k + 1, 0);
    f[k] = 1;
    bool found = false;
    while (!found) {
        if (accept(f)) {
            found = true;
            break;
        }
        long i = 0;
        while (i < k && ++f[i] == p) f[i++] = 0;
        if (i == k) break;
    }
    if (!found) throw std::logic_error("FiniteField: no compatible primitive polynomial found");
    modulus_ = f;

    // Exponent tables.  g = x for k > 1, g = the root of X - c for k = 1.
    std::vector<long> g(k, 0);
    if (k == 1)
        g[0] = (p - f[0]) % p;
    else
        g[1] = 1;
    std::vector<long> log_of(size_, ZERO);  // encoded vector -> exponent
    std::vector<std::vector<long>> pow_vec(ord);
    std::vector<long> cur(k, 0);
    cur[0] = 1;
    for (long m = 0; m < ord; ++m) {
        pow_vec[m] = cur;
        log_of[encode(cur, p, k)] = m;
        cur = poly_mul_mod(cur, g, f, p);
    }
    zech_.assign(ord, ZERO);
    for (long m = 0; m < ord; ++m) {
        std::vector<long> v = pow_vec[m];
        v[0] = (v[0] + 1) % p;
        zech_[m] = log_of[encode(v, p, k)];
    }
    int_label_.assign(p, ZERO);
    for (long c = 1; c < p; ++c) {
        std::vector<long> v(k, 0);
        v[0] = c;
        int_label_[c] = log_of[encode(v, p, k)];
    }
}

long FiniteField::gen_power(long e) const {
    long ord = order();
    return ((e % ord) + ord) % ord;
}

long FiniteField::add(long x, long y) const {
    if (x == ZERO) return y;
    if (y == ZERO) return x;
    // g^x + g^y = g^x (1 + g^(y-x))
    long z = zech_[gen_power(y - x)];
    return z == ZERO ? ZERO : gen_power(x + z);
}

long FiniteField::neg(long x) const {
    if (x == ZERO || p_ == 2) return x;
    return gen_power(x + order() / 2);
}

long FiniteField::sub(long x, long y) const { return add(x, neg(y)); }

long FiniteField::mul(long x, long y) const {
    if (x == ZERO || y == ZERO) return ZERO;
    return gen_power(x + y);
}

long FiniteField::inv(long x) const {
    if (x == ZERO) throw std::domain_error("FiniteField: inverse of zero");
    return gen_power(-x);
}

long FiniteField::pow(long x, long e) const {
    if (x == ZERO) {
        if (e <= 0) throw std::domain_error("FiniteField: 0^e with e <= 0");
        return ZERO;
    }
    long ord = order();
    return gen_power((x % ord) * (e % ord));
}

long FiniteField::frobenius(long x, long times) const {
    if (x == ZERO) return ZERO;
    long ord = order();
    long m = 1;
    for (long t = 0; t < times % k_ + (times % k_ < 0 ? k_ : 0); ++t) m = (m * p_) % ord;
    return gen_power(x * m);
}

long FiniteField::from_int(long c) const {
    c = ((c % p_) + p_) % p_;
    return c == 0 ? ZERO : int_label_[c];
}

long FiniteField::to_int(long x) const {
    if (x == ZERO) return 0;
    for (long c = 1; c < p_; ++c)
        if (int_label_[c] == x) return c;
    throw std::domain_error("FiniteField: element not in the prime subfield");
}

long FiniteField::embed_from(const FiniteField& sub, long x) const {
    if (sub.p_ != p_ || k_ % sub.k_ != 0)
        throw std::invalid_argument("FiniteField: not a subfield");
    if (x == ZERO) return ZERO;
    return gen_power(x * (order() / sub.order()));
}

long FiniteField::norm_to(const FiniteField& sub, long x) const {
    if (sub.p_ != p_ || k_ % sub.k_ != 0)
        throw std::invalid_argument("FiniteField: not a subfield");
    if (x == ZERO) return ZERO;
    // N(g^i) = g^(i e) with e = (p^k-1)/(p^k'-1), whose subfield label is
    // i mod (p^k'-1).
    return x % sub.order();
}

long FiniteField::trace_to(const FiniteField& sub, long x) const {
    if (sub.p_ != p_ || k_ % sub.k_ != 0)
        throw std::invalid_argument("FiniteField: not a subfield");
    if (x == ZERO) return ZERO;
    long acc = ZERO;
    for (long i = 0; i < k_ / sub.k_; ++i) acc = add(acc, frobenius(x, sub.k_ * i));
    if (acc == ZERO) return ZERO;
    long e = order() / sub.order();
    if (acc % e != 0) throw std::logic_error("FiniteField: trace not in subfield");
    return acc / e;
}

// --- characters ---

MultChar::MultChar(FFPtr f, long jj) : field(std::move(f)) {
    long ord = field->order();
    j = ((jj % ord) + ord) % ord;
}

long MultChar::order() const { return field->order() / std::gcd(field->order(), j); }

Scalar MultChar::value(const ScalarCtxPtr& ctx, long x) const {
    if (x == FiniteField::ZERO)
        throw std::domain_error("MultChar: evaluated at zero");
    return Scalar::root_of_unity(ctx, field->order(), x * j);
}

MultChar MultChar::operator*(const MultChar& o) const {
    if (o.field != field) throw std::invalid_argument("MultChar: field mismatch");
    return MultChar(field, j + o.j);
}

MultChar MultChar::inverse() const { return MultChar(field, -j); }

MultChar MultChar::power(long e) const {
    long ord = field->order();
    return MultChar(field, (j % ord) * (e % ord));
}

MultChar MultChar::frobenius_twist(long a) const {
    long ord = field->order();
    long m = 1;
    a = ((a % field->degree()) + field->degree()) % field->degree();
    for (long t = 0; t < a; ++t) m = (m * field->p()) % ord;
    return MultChar(field, j * m);
}

MultChar MultChar::restrict_to(const FFPtr& sub) const {
    if (sub->p() != field->p() || field->degree() % sub->degree() != 0)
        throw std::invalid_argument("MultChar: not a subfield");
    // chi(embed(y)) = zeta_ord^(e j y) = zeta_subord^(j y).
    return MultChar(sub, j % sub->order());
}

bool MultChar::operator==(const MultChar& o) const { return field == o.field && j == o.j; }

long MultChar::frobenius_orbit_size(long base_deg) const {
    long ord = field->order();
    long q = 1;
    for (long t = 0; t < base_deg; ++t) q = (q * field->p()) % ord;
    long m = 1;
    long cur = (j * q) % ord;
    while (cur != j) {
        cur = (cur * q) % ord;
        ++m;
    }
    return m;
}

AddChar AddChar::standard(FFPtr f) {
    long one = f->unit();
    return AddChar(std::move(f), one);
}

Scalar AddChar::value(const ScalarCtxPtr& ctx, long x) const {
    if (a == FiniteField::ZERO) return Scalar::one(ctx);
    FFPtr prime = FiniteField::get(field->p(), 1);
    long t = field->trace_to(*prime, field->mul(a, x));
    return Scalar::root_of_unity(ctx, field->p(), prime->to_int(t));
}

AddChar AddChar::extend_to(const FFPtr& ext) const {
    return AddChar(ext, a == FiniteField::ZERO ? FiniteField::ZERO : ext->embed_from(*field, a));
}

// --- norm-one subgroup ---

NormOneGroup::NormOneGroup(FFPtr big_field, FFPtr half_field)
    : big(std::move(big_field)), half(std::move(half_field)) {
    if (big->p() != half->p() || big->degree() != 2 * half->degree())
        throw std::invalid_argument("NormOneGroup: big field must be quadratic over half");
    m = half->degree();
    q = big->p();
}

long NormOneGroup::size() const { return big->order() / half->order(); }

long NormOneGroup::element(long t) const { return big->gen_power(t * half->order()); }

bool NormOneGroup::contains(long x) const {
    return x != FiniteField::ZERO && x % half->order() == 0;
}

Scalar NormOneChar::value(const ScalarCtxPtr& ctx, long t) const {
    return Scalar::root_of_unity(ctx, group.size(), t * j);
}

// --- Gauss sums ---

namespace {

// Every summand of a Gauss sum is a root of unity zeta_N^e; summing exponent
// multiplicities and materializing the cyclotomic element once at the end is
// far cheaper than per-term ring multiplications.
struct RootAccumulator {
    long N;
    std::vector<long long> counts;

    explicit RootAccumulator(const ScalarCtxPtr& ctx) : N(ctx->n()), counts(N, 0) {}
    void add(long e) { counts[((e % N) + N) % N] += 1; }
    Scalar to_scalar(const ScalarCtxPtr& ctx) const { return Scalar::root_combination(ctx, counts); }
};

// Exponent of zeta_N contributed by a multiplicative character at g^x.
long mult_exp(const MultChar& chi, long x, long N) {
    long ord = chi.field->order();
    if (N % ord != 0) throw std::invalid_argument("character order does not divide N");
    return ((chi.j * (x % ord)) % ord) * (N / ord);
}

// Exponent of zeta_N contributed by an additive character at x.
long add_exp(const AddChar& psi, long x, long N) {
    if (psi.a == FiniteField::ZERO) return 0;
    long p = psi.field->p();
    if (N % p != 0) throw std::invalid_argument("characteristic does not divide N");
    FFPtr prime = FiniteField::get(p, 1);
    long t = psi.field->trace_to(*prime, psi.field->mul(psi.a, x));
    return prime->to_int(t) * (N / p);
}

}  // namespace

Scalar gauss_sum(const ScalarCtxPtr& ctx, const MultChar& alpha, const AddChar& psi) {
    if (psi.field != alpha.field) throw std::invalid_argument("gauss_sum: field mismatch");
    const FiniteField& f = *alpha.field;
    if (ctx->q() != f.p()) throw std::invalid_argument("gauss_sum: context prime mismatch");
    MultChar ainv = alpha.inverse();
    RootAccumulator acc(ctx);
    for (long x = 0; x < f.order(); ++x) acc.add(mult_exp(ainv, x, acc.N) + add_exp(psi, x, acc.N));
    return -Scalar::q_half_power(ctx, -f.degree()) * acc.to_scalar(ctx);
}

Scalar twisted_gauss_sum(const ScalarCtxPtr& ctx, const MultChar& alpha, const MultChar& chi,
                         const AddChar& psi_x) {
    const FFPtr& X = alpha.field;
    if (psi_x.field != X) throw std::invalid_argument("twisted_gauss_sum: field mismatch");
    const FiniteField& E = *chi.field;
    if (E.p() != X->p() || X->degree() % E.degree() != 0)
        throw std::invalid_argument("twisted_gauss_sum: chi must live on a subfield");
    if (ctx->q() != X->p())
        throw std::invalid_argument("twisted_gauss_sum: context prime mismatch");
    MultChar ainv = alpha.inverse();
    MultChar cinv = chi.inverse();
    RootAccumulator acc(ctx);
    for (long x = 0; x < X->order(); ++x)
        acc.add(mult_exp(ainv, x, acc.N) + mult_exp(cinv, X->norm_to(E, x), acc.N) +
                add_exp(psi_x, x, acc.N));
    return -Scalar::q_half_power(ctx, -X->degree()) * acc.to_scalar(ctx);
}

MultChar hilbert90_transfer(const NormOneChar& theta) {
    // theta*(g^i) = theta((g^i) / conj(g^i)) = theta(u^{-i}) with
    // u = g^(q^m - 1), so theta* = zeta^{-i j (q^m - 1)} on exponents.
    const NormOneGroup& u = theta.group;
    return MultChar(u.big, -theta.j * u.half->order());
}

// --- torus Gauss-sum products ---

namespace {

struct BlockEntry {
    long char_exp;  // exponent of zeta_N for (theta*)^{-1} on this coordinate
    long det_E;     // determinant contribution, nonzero label in E
    long tr_F;      // trace contribution, label in F (may be ZERO)
};

}  // namespace

Scalar torus_gauss_product(const ScalarCtxPtr& ctx, const FFPtr& F, const FFPtr& E,
                           const std::vector<TorusBlock>& blocks, const MultChar& chi,
                           const AddChar& psi, long dim_F_V) {
    if (chi.field != E) throw std::invalid_argument("torus_gauss_product: chi must live on E");
    if (psi.field != F) throw std::invalid_argument("torus_gauss_product: psi must live on F");
    long p = F->p();
    long ext = E->degree() / F->degree();  // [E:F], 1 or 2
    if (E->p() != p || (ext != 1 && ext != 2))
        throw std::invalid_argument("torus_gauss_product: E must be F or quadratic over F");

    // Product form.
    Scalar product = Scalar::one(ctx);
    long N = ctx->n();
    long n_u = 0;
    std::vector<std::vector<BlockEntry>> tables;
    for (const TorusBlock& b : blocks) {
        if (b.norm_one) {
            ++n_u;
            long m = b.param;
            FFPtr big = FiniteField::get(p, F->degree() * 2 * m);
            FFPtr half = FiniteField::get(p, F->degree() * m);
            if ((2 * m) % ext != 0)
                throw std::invalid_argument("torus_gauss_product: block not defined over E");
            NormOneChar theta{NormOneGroup(big, half), b.char_j};
            MultChar theta_star = hilbert90_transfer(theta);
            product *= twisted_gauss_sum(ctx, theta_star, chi, psi.extend_to(big));

            std::vector<BlockEntry> tab;
            MultChar ts_inv = theta_star.inverse();
            for (long x = 0; x < big->order(); ++x)
                tab.push_back(
                    {mult_exp(ts_inv, x, N), big->norm_to(*E, x), big->trace_to(*F, x)});
            tables.push_back(std::move(tab));
        } else {
            long k = b.param;
            FFPtr Ek = FiniteField::get(p, E->degree() * k);
            MultChar alpha(Ek, b.char_j);
            // The pair block carries alpha x alpha^{-c}, with c the involution
            // of the block (identity when E = F).
            MultChar alpha_c = (ext == 1) ? alpha : alpha.frobenius_twist(Ek->degree() / 2);
            AddChar psi_Ek = psi.extend_to(Ek);
            product *= twisted_gauss_sum(ctx, alpha, chi, psi_Ek);
            product *= twisted_gauss_sum(ctx, alpha_c.inverse(), chi, psi_Ek);

            std::vector<BlockEntry> tab;
            MultChar a_inv = alpha.inverse();
            for (long x = 0; x < Ek->order(); ++x)
                for (long y = 0; y < Ek->order(); ++y)
                    tab.push_back({mult_exp(a_inv, x, N) + mult_exp(alpha_c, y, N),
                                   E->mul(Ek->norm_to(*E, x), Ek->norm_to(*E, y)),
                                   F->add(Ek->trace_to(*F, x), Ek->trace_to(*F, y))});
            tables.push_back(std::move(tab));
        }
    }

    // Single-sum form over the full torus T* = prod (E_k^x)^2 x prod F_{q^{2m}}^x.
    MultChar chi_inv = chi.inverse();
    RootAccumulator acc(ctx);
    std::vector<size_t> idx(tables.size(), 0);
    while (true) {
        long e = 0;
        long det = E->unit();
        long tr = FiniteField::ZERO;
        for (size_t b = 0; b < tables.size(); ++b) {
            const BlockEntry& en = tables[b][idx[b]];
            e += en.char_exp;
            det = E->mul(det, en.det_E);
            tr = F->add(tr, en.tr_F);
        }
        acc.add(e + mult_exp(chi_inv, det, N) + add_exp(psi, tr, N));
        size_t b = 0;
        while (b < tables.size() && ++idx[b] == tables[b].size()) idx[b++] = 0;
        if (b == tables.size()) break;
    }
    Scalar sign = (n_u % 2 == 0) ? Scalar::one(ctx) : -Scalar::one(ctx);
    Scalar single =
        sign * Scalar::q_half_power(ctx, -2 * F->degree() * (dim_F_V / 2)) * acc.to_scalar(ctx);
    if (blocks.empty()) single = Scalar::one(ctx);
    if (!(product == single))
        throw std::logic_error("torus_gauss_product: product and single-sum forms disagree");
    return product;
}

// --- isometry-group data ---

bool kind_is_quadratic(SpaceKind k) { return k == SpaceKind::Hermitian; }

bool kind_is_orthogonal(SpaceKind k) {
    return k == SpaceKind::OrthogonalSplit || k == SpaceKind::OrthogonalNonsplit;
}

int isometry_group_sign(SpaceKind kind, long d) {
    if (kind == SpaceKind::OrthogonalNonsplit && d % 2 == 0)
        return (d / 2 - 1) % 2 == 0 ? 1 : -1;
    return (d / 2) % 2 == 0 ? 1 : -1;
}

Scalar c_V_constant(const ScalarCtxPtr& ctx, SpaceKind kind, long d, const MultChar& chi,
                    const AddChar& psi) {
    if (kind == SpaceKind::GL)
        throw std::invalid_argument("c_V_constant: no constant for the linear case");
    Scalar eps = Scalar::integer(ctx, isometry_group_sign(kind, d));
    if (kind == SpaceKind::Hermitian) {
        const FFPtr& E = chi.field;
        if (E->degree() % 2 != 0)
            throw std::invalid_argument("c_V_constant: hermitian form needs a quadratic field");
        FFPtr F = FiniteField::get(E->p(), E->degree() / 2);
        if (psi.field != F)
            throw std::invalid_argument("c_V_constant: psi must live on the fixed field");
        Scalar chi_m1 = chi.value(ctx, E->neg(E->unit())).pow(d);
        return eps * chi_m1 * gauss_sum(ctx, chi.inverse().restrict_to(F), psi).pow(d);
    }
    if (psi.field != chi.field)
        throw std::invalid_argument("c_V_constant: chi and psi must share a field");
    Scalar tau = gauss_sum(ctx, chi.power(-2), psi);
    if (d % 2 == 0) return eps * tau.pow(d / 2);
    return eps * chi.value(ctx, chi.field->from_int(2)) * tau.pow((d - 1) / 2);
}

}  // namespace gfw
