// Enumerated isometry groups: element lists, conjugacy classes, connected
// components, centers, and parabolic subgroups attached to isotropic flags.
//
// Enumeration proceeds column by column, extending partial matrices only in
// form-compatible directions, so the cost tracks the group order rather than
// |GL_d(E)|.  Everything here targets groups of a few hundred elements; a
// configurable budget guards against accidental blowups.

#pragma once

#include <map>
#include <memory>
#include <vector>

#include "gfw/spaces.hpp"

namespace gfw {

struct ConjClass {
    long rep = 0;                // index of the lex-minimal representative
    std::vector<long> members;   // sorted element indices
};

struct Group {
    Space space;
    std::vector<FMatrix> elements;  // lex-sorted by label vector
    std::map<std::vector<long>, long> index_of;
    std::vector<long> inv_idx;
    std::vector<ConjClass> classes;  // ordered by (size, lex rep)
    std::vector<long> class_of;
    std::vector<char> g0;        // membership in the connected component
    std::vector<long> center;    // indices of central elements
    long identity = 0;

    long order() const { return static_cast<long>(elements.size()); }
    const FMatrix& mat(long i) const { return elements[i]; }
    long index(const FMatrix& m) const;  // -1 when absent
    long mul(long i, long j) const { return index(elements[i] * elements[j]); }
    long inv(long i) const { return inv_idx[i]; }
    long g0_index() const;  // [G : G0], 1 or 2
};

using GroupPtr = std::shared_ptr<const Group>;

// Enumerate G(V) (or GL(V) for the zero form).  Throws std::runtime_error
// when the order would exceed the budget.
GroupPtr enumerate_group(const Space& space, long budget = 200000);

// The connected component G⁰ (determinant-one subgroup for orthogonal
// kinds) as a group in its own right, with its own classes and center.
GroupPtr connected_component_group(const GroupPtr& G);

// Parabolic attached to a flag: X totally isotropic with dual partner Y
// (for the zero form, any subspace X with complement Y).  Columns of the
// arguments span the subspaces.
struct ParabolicData {
    std::vector<long> P;  // stabilizer of X
    std::vector<long> L;  // stabilizer of X and Y
    std::vector<long> N;  // unipotent radical
};

ParabolicData parabolic_from_flag(const GroupPtr& G, const FMatrix& X_cols,
                                  const FMatrix& Y_cols);

// Column span of B contains the column span of A.
bool subspace_contains(const FMatrix& B, const FMatrix& A);

}  // namespace gfw
