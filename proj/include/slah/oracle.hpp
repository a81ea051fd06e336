// Copyright (c) slah contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "slah/formula.hpp"
#include "slah/sat.hpp"

namespace slah::oracle {

/// Search bounds for the brute-force reference procedures.
struct Bounds {
    std::uint64_t addr_max = 8;   // stack values searched in [0, addr_max]
    std::uint64_t value_max = 8;  // enumerated cell values in [1, value_max]
    unsigned max_atoms = 4;

    Bounds() = default;
    Bounds(std::uint64_t addr, std::uint64_t value, unsigned atoms = 4)
        : addr_max(addr), value_max(value), max_atoms(atoms) {
        if (addr_max < 2 || value_max < 2) throw InputError("bounds must be at least 2");
    }
};

/// Direct evaluation of the satisfaction relation: pure atoms on the stack,
/// spatial atoms on exactly-partitioned heap regions, heap lists by walking
/// the chunk headers (the indexed unfolding, bounded by the heap size), and
/// existentials by enumeration. The enumeration bound defaults to one
/// derived from the stack, heap and formula constants.
bool holds(const StackModel& s, const WitnessHeap& h, const SymbolicHeap& f,
           std::optional<std::uint64_t> exists_bound = std::nullopt);

/// Exhaustive satisfiability search: all stacks over the formula's
/// variables (existentials included) into [0, addr_max], heaps assembled
/// per atom. A returned witness is verified by holds.
std::optional<SatWitness> brute_sat(const SymbolicHeap& f, const Bounds& b);

struct Counterexample {
    StackModel stack;
    WitnessHeap heap;
};

/// Counterexample search for entailments: enumerates stacks and all
/// antecedent heaps within bounds. Cell values are enumerated only where
/// the consequent can observe them (points-to addresses and heap-list
/// spans); other block and chunk-body cells are fixed to 1, which cannot
/// change the consequent's verdict. Sound: any result is a real
/// counterexample. Complete only within the bounds and the work budget.
std::optional<Counterexample> brute_entail(const SymbolicHeap& ante, const SymbolicHeap& conseq,
                                           const Bounds& b,
                                           std::uint64_t heap_budget = 2'000'000);

struct GenParams {
    unsigned max_atoms = 3;
    unsigned max_vars = 4;
    std::uint64_t max_const = 6;
    unsigned unfold_depth = 0;     // rewrite heap-list atoms into their unfolding
    std::vector<VarId> var_pool;   // when non-empty, draw variables from here only
    bool allow_existential = false;
};

/// Reproducible grammar-directed formula generation.
SymbolicHeap random_formula(std::uint64_t seed, const GenParams& params);

/// Rewrites every heap-list atom into one unfolding step: a header cell with
/// a fresh size variable, the chunk body, and the remaining list.
SymbolicHeap unfold_hls_once(const SymbolicHeap& f);

}  // namespace slah::oracle
