// Copyright (c) slah contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <map>
#include <span>

#include "slah/formula.hpp"
#include "slah/lia.hpp"

namespace slah::abstraction {

/// Translation of the pure part into an arithmetic formula.
lia::Formula pure_to_lia(const PureFormula& pure);

/// Summary of one non-emp spatial atom: points-to is unconstrained, a block
/// constrains its endpoints, a heap list is empty or summarized non-empty.
lia::Formula abs_atom(const SpatialAtom& atom);

/// Summary of a non-empty heap list from `from` to `to` with chunk-size
/// bound `bound`: with bound 2 the span is even and at least 2; with a
/// larger bound any span of at least 2 works; without a bound likewise.
lia::Formula abs_plus_hls(const AddrTerm& from, const AddrTerm& to, const Bound& bound);

/// Pairwise disjointness constraints encoding the separating conjunction:
/// heap-list atoms are guarded by their non-emptiness, points-to and block
/// atoms are unconditionally non-empty.
lia::Formula sep_constraints(std::span<const SpatialAtom> atoms);

/// The abstraction together with the per-atom non-emptiness guards.
struct AbsResult {
    lia::Formula formula;
    std::map<std::size_t, lia::Formula> nonempty_guards;
};

AbsResult abs_result(const SymbolicHeap& h);

/// Quantifier-free abstraction equi-satisfiable with h. Existentials are
/// dropped; their variables occur free in the result.
lia::Formula abs(const SymbolicHeap& h);

/// The formula characterizing the effective upper bound of a heap-list atom:
/// under any stack satisfying pure and the atom's non-empty summary, exactly
/// one value of z satisfies the result, namely the largest chunk size
/// reachable by any unfolding scheme. z must be fresh for pure and the atom.
lia::Formula eub_formula(const lia::Formula& pure, const SpatialAtom& hls_atom, const VarId& z);

}  // namespace slah::abstraction
