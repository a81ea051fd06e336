// Copyright (c) slah contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "slah/formula.hpp"
#include "slah/solver.hpp"

namespace slah {

/// An ordered partition of address terms into equivalence classes: terms in
/// one class are equal, terms in later classes strictly larger.
struct TotalPreorder {
    std::vector<std::vector<AddrTerm>> classes;

    /// The conjunction of equalities within classes and strict inequalities
    /// between consecutive class representatives.
    lia::Formula constraint() const;

    /// Index of the class containing t, if t is one of the ordered terms.
    std::optional<std::size_t> class_of(const AddrTerm& t) const;

    std::string to_string() const;
    bool operator==(const TotalPreorder&) const = default;
};

std::ostream& operator<<(std::ostream& os, const TotalPreorder& po);

/// Enumerates the total preorders over `terms` whose order constraint is
/// satisfiable together with ctx. Classes are built left to right, smallest
/// subsets first, with satisfiability pruning on every prefix. The callback
/// returns false to stop the enumeration.
void enumerate_preorders(const std::set<AddrTerm>& terms, const lia::Formula& ctx,
                         LiaSolver& solver, const std::function<bool(const TotalPreorder&)>& yield,
                         const Deadline& deadline = {});

std::vector<TotalPreorder> compatible_preorders(const std::set<AddrTerm>& terms,
                                                const lia::Formula& ctx, LiaSolver& solver,
                                                const Deadline& deadline = {});

/// An ordered entailment query: accumulated pure context plus both atom
/// lists sorted by start address, all atoms non-empty under the context.
struct OrderedQuery {
    lia::Formula context;
    std::vector<SpatialAtom> antecedent;
    std::vector<SpatialAtom> consequent;
};

/// Removes atoms that are empty under the preorder, verifies the abstraction
/// implication and the sortedness conditions, and sorts both sides. Returns
/// a query, or a short-circuit verdict (true: both sides vanished; false:
/// the preorder refutes the entailment).
std::variant<OrderedQuery, bool> normalize_ordered(const TotalPreorder& po,
                                                   const lia::Formula& abs_ante,
                                                   const std::vector<SpatialAtom>& ante,
                                                   const std::vector<SpatialAtom>& conseq,
                                                   LiaSolver& solver, const Deadline& deadline = {});

struct EntailStats {
    std::size_t preorders_checked = 0;
    std::size_t solver_queries = 0;
    std::vector<VarId> fresh_names;
};

struct EntailOptions {
    bool heuristics = true;   // contiguous-group pre-decomposition
    unsigned jobs = 1;        // parallel preorder checking when > 1
    unsigned max_depth = 128; // matching recursion guard
    Deadline deadline = {};
    /// Observes each checked preorder and its ordered-entailment verdict.
    std::function<void(const TotalPreorder&, bool)> preorder_observer = nullptr;
    EntailStats* stats = nullptr;
};

/// Why an entailment failed. `refuted` together with `model` is replayable:
/// the model evaluates the formula to true.
struct Invalidity {
    std::optional<TotalPreorder> preorder;
    std::optional<StackModel> model;
    std::optional<lia::Formula> refuted;
    std::vector<std::string> trace;
};

struct EntailResult {
    bool valid = false;
    std::optional<Invalidity> why;
};

/// Single-consequent-atom matching under a context: checks the span
/// condition and dispatches on the consequent atom's kind. Exposed for
/// tests; decide_entail is the entry point.
bool match_one(const lia::Formula& ctx, const std::vector<SpatialAtom>& ante,
               const SpatialAtom& consequent_atom, LiaSolver& solver,
               const EntailOptions& opts = {});

/// Sequence matching: partitions the antecedent across the consequent atoms,
/// splitting block and heap-list atoms at the first consequent atom's end
/// address as needed.
bool match_seq(const OrderedQuery& q, LiaSolver& solver, const EntailOptions& opts = {});

/// One sub-entailment produced by the pre-decomposition heuristic.
struct SubQuery {
    std::vector<SpatialAtom> antecedent;
    std::vector<SpatialAtom> consequent;
};

/// Contiguous-group pre-decomposition: each block atom of the consequent
/// matched by a contiguous antecedent group with entailed equal endpoints
/// becomes its own sub-query; the residual query comes last. Sound and
/// verdict-preserving; purely an enumeration-size optimization.
std::vector<SubQuery> pre_decompose(const std::vector<SpatialAtom>& ante,
                                    const std::vector<SpatialAtom>& conseq,
                                    const lia::Formula& abs_ante, LiaSolver& solver,
                                    const Deadline& deadline = {});

/// Entailment of symbolic heaps: the consequent must be quantifier-free with
/// free variables among the antecedent's. Valid when the antecedent is
/// unsatisfiable; otherwise decided per compatible total preorder.
EntailResult decide_entail(const SymbolicHeap& ante, const SymbolicHeap& conseq,
                           LiaSolver& solver, const EntailOptions& opts = {});

}  // namespace slah
