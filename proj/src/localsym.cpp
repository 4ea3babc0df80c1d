#include "gfw/localsym.hpp"

#include <functional>
#include <stdexcept>

namespace gfw {

namespace {

long ipow(long b, long e) {
    long r = 1;
    while (e-- > 0) r *= b;
    return r;
}

// |K|^{j/2} in the value ring, where K is an extension of the context field.
Scalar field_half_power(const ScalarCtxPtr& ctx, const FFPtr& K, long j) {
    long r = 0, v = 1;
    while (v < K->size()) {
        v *= ctx->q();
        ++r;
    }
    if (v != K->size())
        throw std::invalid_argument("field is not an extension of the context field");
    return Scalar::q_half_power(ctx, j * r);
}

AddChar extended_psi(const MultChar& alpha, const AddChar& psi) {
    if (psi.field == alpha.field) return psi;
    return psi.extend_to(alpha.field);
}

Scalar minus_tau(const ScalarCtxPtr& ctx, const MultChar& alpha, const AddChar& psi) {
    return -gauss_sum(ctx, alpha, extended_psi(alpha, psi));
}

}  // namespace

LaurentRational tate_gamma(const ScalarCtxPtr& ctx, const LiftedChar& chi_hat,
                           const AddChar& psi) {
    if (!chi_hat.alpha.is_trivial())
        return LaurentRational::constant(minus_tau(ctx, chi_hat.alpha, psi));
    Scalar q_inv_half = field_half_power(ctx, chi_hat.alpha.field, -1);
    Scalar t_inv = chi_hat.t.inverse();
    // -q^{-1/2} (X - t^{-1}) / (X - q^{-1} t^{-1})
    LaurentPoly num = LaurentPoly::monomial(-q_inv_half, 1) + LaurentPoly(q_inv_half * t_inv);
    LaurentPoly den = LaurentPoly::monomial(Scalar::one(ctx), 1) +
                      LaurentPoly(-(q_inv_half * q_inv_half * t_inv));
    return LaurentRational(num, den);
}

LaurentRational tate_epsilon(const ScalarCtxPtr& ctx, const LiftedChar& chi_hat,
                             const AddChar& psi) {
    if (!chi_hat.alpha.is_trivial())
        return LaurentRational::constant(minus_tau(ctx, chi_hat.alpha, psi));
    Scalar q_inv_half = field_half_power(ctx, chi_hat.alpha.field, -1);
    return LaurentRational(LaurentPoly::monomial(q_inv_half * chi_hat.t.inverse(), -1));
}

Scalar eval_at_half_integer_s(const LaurentRational& r, const ScalarCtxPtr& ctx,
                              long s0_half) {
    Scalar x = Scalar::q_half_power(ctx, -s0_half);
    auto eval = [&](const LaurentPoly& p) {
        Scalar sum = Scalar::zero(ctx);
        for (const auto& [e, c] : p.coeffs()) sum += c * x.pow(e);
        return sum;
    };
    Scalar den = eval(r.den());
    return eval(r.num()) * den.inverse();
}

LaurentRational beta_factor(const ScalarCtxPtr& ctx, SpaceKind kind, long d,
                            const MultChar& chi, const Scalar& t, const AddChar& psi) {
    if (kind == SpaceKind::GL)
        throw std::invalid_argument("beta_factor covers nondegenerate kinds only");
    const FFPtr& F = psi.field;
    if (ctx->q() != F->size())
        throw std::invalid_argument("context field must match the psi field");
    auto qpow = [&](long e) { return Scalar::q_half_power(ctx, 2 * e); };  // q^e

    if (kind_is_quadratic(kind)) {
        if (chi.field->degree() != 2 * F->degree())
            throw std::invalid_argument("hermitian chi must live on the quadratic extension");
        MultChar chi_F = chi.restrict_to(F);
        int sign = ((d / 2) % 2 == 0) ? 1 : -1;
        LaurentRational res = LaurentRational::constant(Scalar::integer(ctx, sign));
        for (long i = 1; i <= d; ++i) {
            Scalar ti = ((d - i) % 2 == 0) ? t : -t;
            res = res * tate_gamma(ctx, LiftedChar{chi_F, ti}, psi).substitute(qpow(i - 1), 1);
        }
        return res;
    }

    if (chi.field != F) throw std::invalid_argument("chi must live on the base field");
    MultChar chi2 = chi.power(2);
    Scalar t2 = t * t;

    if (kind == SpaceKind::Symplectic) {
        if (d % 2 != 0) throw std::invalid_argument("symplectic dimension must be even");
        LaurentRational res =
            tate_gamma(ctx, LiftedChar{chi, t}, psi).substitute(Scalar::q_half_power(ctx, d - 1), 1);
        for (long i = 1; i <= d / 2; ++i)
            res = res * tate_gamma(ctx, LiftedChar{chi2, t2}, psi).substitute(qpow(2 * i - 2), 2);
        return res;
    }

    if (d % 2 == 1) {
        LaurentRational res =
            LaurentRational::constant(chi.value(ctx, F->from_int(2)).inverse());
        for (long i = 1; i <= (d - 1) / 2; ++i)
            res = res * tate_gamma(ctx, LiftedChar{chi2, t2}, psi).substitute(qpow(2 * i - 1), 2);
        return res;
    }

    int sign = (kind == SpaceKind::OrthogonalSplit) ? 1 : -1;
    LaurentRational res = LaurentRational::constant(Scalar::integer(ctx, sign));
    for (long i = 1; i <= d / 2; ++i)
        res = res * tate_gamma(ctx, LiftedChar{chi2, t2}, psi).substitute(qpow(2 * i - 2), 2);
    return res;
}

Scalar beta_star(const ScalarCtxPtr& ctx, SpaceKind kind, long d, const MultChar& chi,
                 const AddChar& psi) {
    if (kind == SpaceKind::GL)
        throw std::invalid_argument("beta_star covers nondegenerate kinds only");
    const FFPtr& F = psi.field;
    Scalar eps = Scalar::integer(ctx, isometry_group_sign(kind, d));
    if (kind_is_quadratic(kind))
        return eps * minus_tau(ctx, chi.restrict_to(F), psi).pow(d);
    MultChar chi2 = chi.power(2);
    Scalar tau2 = gauss_sum(ctx, chi2, psi);
    if (kind == SpaceKind::Symplectic)
        return eps * (-gauss_sum(ctx, chi, psi)) * tau2.pow(d / 2);
    if (d % 2 == 1)
        return eps * chi.value(ctx, F->from_int(2)).inverse() * tau2.pow((d - 1) / 2);
    return eps * tau2.pow(d / 2);
}

Scalar epsilon0_dbl(const CharacterTable& tab, long pi, const MultChar& chi,
                    const AddChar& psi) {
    const Space& s = tab.group->space;
    const ScalarCtxPtr& ctx = tab.ctx;
    if (chi.field != s.E) throw std::invalid_argument("chi must live on the form field");
    if (psi.field != s.F) throw std::invalid_argument("psi must live on the base field");
    MultChar nu = involution_norm_char(s, chi);

    if (s.kind == SpaceKind::GL) {
        if (nu.is_trivial())
            throw std::invalid_argument("epsilon0 for the zero form requires chi^2 != 1");
        Scalar b = Scalar::integer(ctx, isometry_group_sign(SpaceKind::GL, s.d)) *
                   minus_tau(ctx, chi, psi).pow(s.d);
        return b * jacobi_sum(tab, pi, chi);
    }

    Scalar b = beta_star(ctx, s.kind, s.d, chi, psi);
    Scalar J = jacobi_sum(tab, pi, chi);
    if (!nu.is_trivial()) return b * J;
    if (!tab.cuspidal[pi])
        throw std::invalid_argument("the self-dual-twist branch requires a cuspidal pi");
    if (J.is_zero()) throw std::domain_error("Jacobi sum vanishes");
    return b * J.inverse();
}

long TameParameter::dimension(const FFPtr& base) const {
    long dim = 0;
    for (const auto& blk : blocks)
        dim += blk.alpha.frobenius_orbit_size(base->degree()) * blk.steinberg;
    return dim;
}

Scalar epsilon0_tame(const ScalarCtxPtr& ctx, const TameParameter& param,
                     const AddChar& psi) {
    const FFPtr& base = psi.field;
    Scalar res = Scalar::one(ctx);
    for (const auto& blk : param.blocks) {
        const FFPtr& K = blk.alpha.field;
        if (K->p() != base->p() || K->degree() % base->degree() != 0)
            throw std::invalid_argument("block field is not an extension of the psi field");
        long n = blk.alpha.frobenius_orbit_size(base->degree());
        // The character is fixed by Frobenius^n over the base, so it factors
        // through the norm to the degree-n subextension; descend there.
        FFPtr sub = FiniteField::get(base->p(), n * base->degree());
        long ratio = K->order() / sub->order();
        if (blk.alpha.j % ratio != 0)
            throw std::logic_error("orbit-size descent failed");
        MultChar descended(sub, blk.alpha.j / ratio);
        Scalar tau = gauss_sum(ctx, descended, psi.extend_to(sub));
        Scalar factor = (n % 2 == 0) ? tau : -tau;
        res = res * factor.pow(blk.steinberg);
    }
    return res;
}

bool epsilon0_consistency(const CharacterTable& tab, long pi,
                          const std::vector<TorusBlock>& blocks, const MultChar& chi,
                          const AddChar& psi) {
    const Space& s = tab.group->space;
    const ScalarCtxPtr& ctx = tab.ctx;
    if (s.kind == SpaceKind::GL)
        throw std::invalid_argument("epsilon0_consistency covers nondegenerate kinds only");
    long edeg = kind_is_quadratic(s.kind) ? 2 : 1;
    Scalar tau_T = torus_gauss_product(ctx, s.F, s.E, blocks, chi, psi, edeg * s.d);
    long M = kind_is_quadratic(s.kind) ? s.d
             : (s.kind == SpaceKind::Symplectic) ? s.d + 1
                                                 : 2 * (s.d / 2);
    Scalar rhs = (M % 2 == 0 ? tau_T : -tau_T);
    if (s.kind == SpaceKind::Symplectic) rhs = rhs * gauss_sum(ctx, chi, psi);
    return epsilon0_dbl(tab, pi, chi, psi) == rhs;
}

std::vector<std::vector<TorusBlock>> anisotropic_torus_shapes(const Space& s) {
    std::vector<std::vector<long>> sets;
    std::vector<long> cur;
    if (s.kind == SpaceKind::Hermitian) {
        std::function<void(long, long)> rec = [&](long left, long maxp) {
            if (left == 0) {
                sets.push_back(cur);
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
    } else if (s.kind != SpaceKind::GL) {
        long n = s.d / 2;
        std::function<void(long, long)> rec = [&](long left, long maxp) {
            if (left == 0) {
                sets.push_back(cur);
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
            std::vector<std::vector<long>> filtered;
            for (auto& v : sets)
                if (v.size() % 2 == 0) filtered.push_back(v);
            sets = filtered;
        }
        if (s.kind == SpaceKind::OrthogonalNonsplit && s.d % 2 == 0) {
            std::vector<std::vector<long>> filtered;
            for (auto& v : sets)
                if (v.size() % 2 == 1) filtered.push_back(v);
            sets = filtered;
        }
    }
    std::vector<std::vector<TorusBlock>> out;
    for (const auto& ms : sets) {
        std::vector<TorusBlock> blocks;
        for (long m : ms) blocks.push_back(TorusBlock{true, m, 0});
        out.push_back(blocks);
    }
    return out;
}

namespace {

// One correction factor of the product formula: (m_t - c(X) id) with
// c = A X^k / (X^k - mu), as the pair (A X^k, X^k - mu); A = 0 means a bare
// reflection factor.
struct CorrectionFactor {
    long t = 0;       // which simple reflection
    Scalar a;         // numerator constant A
    Scalar mu;        // pole location in X^k
    long k = 1;       // 1 for the long root, 2 for the short roots
    bool bare = false;
};

std::vector<CorrectionFactor> correction_chain(const Space& space, const MultChar& chi,
                                               const Scalar& t, const ScalarCtxPtr& ctx,
                                               const FlagCosetsPtr& fc,
                                               LiftedOrdering ordering) {
    long d = space.d;
    long edeg = kind_is_quadratic(space.kind) ? 2 : 1;
    bool delta_vanishes = !chi.restrict_to(space.F).is_trivial() ||
                          (edeg == 1 && space.kind != SpaceKind::Symplectic);
    Scalar chi_delta = chi.value(ctx, fc->delta_element());
    Scalar chi_m1 = chi.value(ctx, space.E->neg(space.E->unit()));
    Scalar a_long = Scalar::q_half_power(ctx, 1) - Scalar::q_half_power(ctx, -1);
    Scalar a_short = Scalar::q_half_power(ctx, edeg) - Scalar::q_half_power(ctx, -edeg);
    Scalar t_inv = t.inverse();

    auto factor = [&](long tt, long j) {
        CorrectionFactor f;
        f.t = tt;
        if (tt == d) {
            f.k = 1;
            if (delta_vanishes) {
                f.bare = true;
                f.a = Scalar::zero(ctx);
                f.mu = Scalar::zero(ctx);
            } else {
                f.a = chi_delta * a_long;
                f.mu = Scalar::q_half_power(ctx, -(d + 1 - 2 * j) * edeg) * t_inv;
            }
        } else {
            f.k = 2;
            f.a = chi_m1 * a_short;
            f.mu = Scalar::q_half_power(ctx, -2 * (tt + 1 - 2 * j) * edeg) * t_inv * t_inv;
        }
        return f;
    };

    std::vector<CorrectionFactor> chain;
    if (ordering == LiftedOrdering::Forward) {
        for (long j = d; j >= 1; --j)
            for (long tt = j; tt <= d; ++tt) chain.push_back(factor(tt, j));
    } else {
        for (long j = 1; j <= d; ++j)
            for (long tt = d; tt >= j; --tt) chain.push_back(factor(tt, j));
    }
    return chain;
}

}  // namespace

std::vector<LaurentRational> lifted_intertwining_formula(
    const Space& space, const MultChar& chi, const Scalar& t,
    const std::vector<Scalar>& f, const ScalarCtxPtr& ctx, LiftedOrdering ordering) {
    const long d = space.d;
    if (ctx->q() != space.F->size())
        throw std::invalid_argument("context field must match the base field");
    DegPS I = build_degps(space, chi, ctx);
    if (static_cast<long>(f.size()) != I.dim())
        throw std::invalid_argument("section has the wrong dimension");
    FlagCosetsPtr fc = FlagCosets::get(space.kind, d, space.F->size());
    MultChar nu = involution_norm_char(space, chi);

    if (!nu.is_trivial()) {
        // The lifted operator is the lift of the residual one: embed M f.
        OperatorOnDegPS M = intertwining_M(I);
        std::vector<Scalar> mf = M.apply(f);
        DegPS J = build_degps(space, conj_inverse_char(space, chi), ctx);
        auto Etgt = embed_degps_in_ps(J, fc);
        std::vector<LaurentRational> out;
        out.reserve(fc->dim());
        for (long r = 0; r < fc->dim(); ++r) {
            Scalar v = Scalar::zero(ctx);
            for (long k = 0; k < I.dim(); ++k)
                if (!Etgt[r][k].is_zero() && !mf[k].is_zero()) v += Etgt[r][k] * mf[k];
            out.push_back(LaurentRational::constant(v));
        }
        return out;
    }

    if (space.kind == SpaceKind::GL)
        throw std::invalid_argument("the product formula requires a nondegenerate form");

    PSTuple tuple = ps_tuple_constant(fc, chi);
    PrincipalSeries ps{fc, tuple, ctx};
    std::vector<SparseOp> m_ops(d + 1);
    for (long i = 1; i <= d; ++i) {
        PSTuple target;
        m_ops[i] = simple_reflection_m(ps, i, &target);
        if (!(target == tuple))
            throw std::logic_error("tuple is not reflection-stable");
    }

    auto Esrc = embed_degps_in_ps(I, fc);
    long np = fc->dim();
    std::vector<LaurentPoly> num(np);
    for (long r = 0; r < np; ++r) {
        Scalar v = Scalar::zero(ctx);
        for (long k = 0; k < I.dim(); ++k)
            if (!Esrc[r][k].is_zero() && !f[k].is_zero()) v += Esrc[r][k] * f[k];
        if (!v.is_zero()) num[r] = LaurentPoly(v);
    }
    LaurentPoly den(Scalar::one(ctx));

    auto apply_m = [&](const SparseOp& m, const std::vector<LaurentPoly>& v) {
        std::vector<LaurentPoly> out(np);
        for (long r = 0; r < np; ++r)
            for (const auto& [col, w] : m.rows[r])
                if (!v[col].is_zero()) out[r] = out[r] + v[col].scaled(w);
        return out;
    };

    for (const auto& cf : correction_chain(space, chi, t, ctx, fc, ordering)) {
        std::vector<LaurentPoly> mnum = apply_m(m_ops[cf.t], num);
        if (cf.bare) {
            num = std::move(mnum);
            continue;
        }
        LaurentPoly nc = LaurentPoly::monomial(cf.a, cf.k);
        LaurentPoly dc = LaurentPoly::monomial(Scalar::one(ctx), cf.k) + LaurentPoly(-cf.mu);
        for (long r = 0; r < np; ++r) num[r] = dc * mnum[r] - nc * num[r];
        den = den * dc;
    }

    Scalar pref = chi.value(ctx, space.E->from_int(2)).pow(-d) *
                  chi.inverse().value(ctx, I.cosets->dspace().S.det());
    std::vector<LaurentRational> out;
    out.reserve(np);
    for (long r = 0; r < np; ++r) out.push_back(LaurentRational(num[r].scaled(pref), den));
    return out;
}

LaurentRational unramified_intertwining_product(const ScalarCtxPtr& ctx, SpaceKind kind,
                                                long d, const Scalar& t) {
    if (kind == SpaceKind::GL)
        throw std::invalid_argument("the product formula requires a nondegenerate form");
    long edeg = kind_is_quadratic(kind) ? 2 : 1;
    long lie_dim = kind_is_quadratic(kind) ? d * d
                   : (kind == SpaceKind::Symplectic) ? d * (d + 1) / 2
                                                     : d * (d - 1) / 2;
    bool long_factor = (kind == SpaceKind::Symplectic) || kind_is_quadratic(kind);
    LaurentRational res = LaurentRational::constant(Scalar::q_half_power(ctx, lie_dim));
    LaurentPoly one(Scalar::one(ctx));
    Scalar t2 = t * t;
    for (long j = 1; j <= d; ++j) {
        if (long_factor) {
            long a = edeg * (d + 1 - 2 * j);
            LaurentPoly n = one + LaurentPoly::monomial(-(Scalar::q_half_power(ctx, a - 2) * t), 1);
            LaurentPoly dd = one + LaurentPoly::monomial(-(Scalar::q_half_power(ctx, a) * t), 1);
            res = res * LaurentRational(n, dd);
        }
        LaurentPoly n2 =
            one + LaurentPoly::monomial(-(Scalar::q_half_power(ctx, -2 * edeg * j) * t2), 2);
        LaurentPoly d2 =
            one +
            LaurentPoly::monomial(-(Scalar::q_half_power(ctx, 2 * edeg * (d - 2 * j)) * t2), 2);
        res = res * LaurentRational(n2, d2);
    }
    return res;
}

std::vector<Scalar> constant_term_intertwining(const Space& space, const MultChar& chi,
                                               const std::vector<Scalar>& f,
                                               const ScalarCtxPtr& ctx) {
    const long d = space.d;
    if (space.kind == SpaceKind::GL)
        throw std::invalid_argument("the product formula requires a nondegenerate form");
    MultChar nu = involution_norm_char(space, chi);
    if (!nu.is_trivial())
        throw std::invalid_argument("the constant-term product requires chi^{1+c} = 1");
    DegPS I = build_degps(space, chi, ctx);
    if (static_cast<long>(f.size()) != I.dim())
        throw std::invalid_argument("section has the wrong dimension");
    FlagCosetsPtr fc = FlagCosets::get(space.kind, d, space.F->size());

    PSTuple tuple = ps_tuple_constant(fc, chi);
    PrincipalSeries ps{fc, tuple, ctx};
    std::vector<SparseOp> m_ops(d + 1);
    for (long i = 1; i <= d; ++i) m_ops[i] = simple_reflection_m(ps, i, nullptr);

    auto Esrc = embed_degps_in_ps(I, fc);
    long np = fc->dim();
    std::vector<Scalar> vec(np, Scalar::zero(ctx));
    for (long r = 0; r < np; ++r)
        for (long k = 0; k < I.dim(); ++k)
            if (!Esrc[r][k].is_zero() && !f[k].is_zero()) vec[r] += Esrc[r][k] * f[k];

    for (const auto& cf : correction_chain(space, chi, Scalar::one(ctx), ctx, fc,
                                           LiftedOrdering::Forward)) {
        std::vector<Scalar> mvec = m_ops[cf.t].apply(vec);
        if (!cf.bare)
            for (long r = 0; r < np; ++r) mvec[r] = mvec[r] - cf.a * vec[r];
        vec = std::move(mvec);
    }
    return vec;
}

Scalar zeta_scalar_flag(const CharacterTable& tab, long pi, const MultChar& chi,
                        const std::vector<Scalar>& h) {
    const Space& s = tab.group->space;
    const ScalarCtxPtr& ctx = tab.ctx;
    const GroupPtr& G = tab.group;
    FlagCosetsPtr fc = FlagCosets::get(s.kind, s.d, s.F->size());
    if (static_cast<long>(h.size()) != fc->dim())
        throw std::invalid_argument("kernel has the wrong dimension");
    PrincipalSeries ps{fc, ps_tuple_constant(fc, chi), ctx};
    DoubledSpace ds = double_space(s);
    FMatrix idd = FMatrix::identity(s.E, s.d);
    std::vector<Scalar> k(G->order(), Scalar::zero(ctx));
    for (long g = 0; g < G->order(); ++g)
        k[g] = ps.evaluate(h, ds.iota(G->mat(g), idd));
    for (const auto& cls : G->classes)
        for (long m : cls.members)
            if (k[m] != k[cls.rep])
                throw std::domain_error("zeta kernel is not a class function");
    Scalar sum = Scalar::zero(ctx);
    for (size_t c = 0; c < G->classes.size(); ++c) {
        const auto& cls = G->classes[c];
        if (k[cls.rep].is_zero()) continue;
        sum += k[cls.rep] * Scalar::integer(ctx, static_cast<long>(cls.members.size())) *
               tab.irreducibles[pi].at_class(static_cast<long>(c));
    }
    return sum * Scalar::integer(ctx, tab.degrees[pi]).inverse();
}

}  // namespace gfw
