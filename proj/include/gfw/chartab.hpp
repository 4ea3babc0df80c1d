// Exact character tables of the enumerated groups via the Burnside-Dixon
// method: eigenvectors of class-sum multiplication matrices over a prime
// l = 1 (mod exp G), lifted to exact cyclotomic values by discrete Fourier
// inversion on element orders.  Also: induction/restriction of class
// functions, cuspidality flags, and cuspidal-support tests.

#pragma once

#include <functional>

#include "gfw/groups.hpp"
#include "gfw/scalar.hpp"

namespace gfw {

struct ClassFunction {
    GroupPtr group;
    std::vector<Scalar> values;  // one per conjugacy class, canonical order

    const Scalar& at_class(long c) const { return values[c]; }
    const Scalar& at_element(long gi) const { return values[group->class_of[gi]]; }
};

// <f, h> = (1/|G|) sum_C |C| f(C) conj(h(C)), exact.
Scalar inner_product(const ClassFunction& f, const ClassFunction& h);

struct CharacterTable {
    GroupPtr group;
    ScalarCtxPtr ctx;
    std::vector<ClassFunction> irreducibles;
    std::vector<long> degrees;
    std::vector<char> cuspidal;

    long size() const { return static_cast<long>(irreducibles.size()); }
    // Central character of irreducible i at a central element (by element
    // index): pi(z) = omega(z) id, omega = chi(z)/deg.
    Scalar central_character(long i, long z_index) const;
    // omega(-id) when -id is in the group; the identity scalar otherwise.
    Scalar omega_minus_one(long i) const;
};

// Requires exp(G) | ctx->n().  Deterministic: rows come out in a canonical
// order (sorted by degree, then by value vector).
CharacterTable character_table(const GroupPtr& G, const ScalarCtxPtr& ctx);

// Induction of a class function on a subgroup H (element-index subset,
// values through the callback) and restriction to H.
ClassFunction induce(const GroupPtr& G, const std::vector<long>& H,
                     const std::function<Scalar(long)>& f, const ScalarCtxPtr& ctx);
std::vector<Scalar> restrict_to(const ClassFunction& f, const std::vector<long>& H);

// One standard isotropic flag (X, Y) per isotropic dimension k >= 1; empty
// for anisotropic spaces.  For the zero form: the (k, d-k) coordinate flags.
struct StandardFlag {
    FMatrix X, Y;
};
std::vector<StandardFlag> standard_flags(const Space& s);

// True when none of the forbidden characters of E^x appears in the GL(X)
// part of the cuspidal support of irreducible pi (decided through Jacquet
// module multiplicities on the line flags).
bool cuspidal_support_avoids(const CharacterTable& tab, long pi,
                             const std::vector<MultChar>& forbidden);

long element_order(const Group& G, long i);

}  // namespace gfw
