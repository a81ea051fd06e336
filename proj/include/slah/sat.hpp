// Copyright (c) slah contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <vector>

#include "slah/formula.hpp"
#include "slah/solver.hpp"

namespace slah {

/// A finite heap: a partial map from natural addresses to natural values.
class WitnessHeap {
  public:
    WitnessHeap() = default;
    explicit WitnessHeap(std::map<std::uint64_t, std::uint64_t> cells) : cells_(std::move(cells)) {}

    const std::map<std::uint64_t, std::uint64_t>& cells() const { return cells_; }
    bool contains(std::uint64_t addr) const { return cells_.count(addr) != 0; }
    std::uint64_t at(std::uint64_t addr) const;
    std::size_t size() const { return cells_.size(); }
    bool empty() const { return cells_.empty(); }

    void set(std::uint64_t addr, std::uint64_t value) { cells_[addr] = value; }

    bool operator==(const WitnessHeap&) const = default;

  private:
    std::map<std::uint64_t, std::uint64_t> cells_;
};

std::ostream& operator<<(std::ostream& os, const WitnessHeap& h);

struct SatWitness {
    StackModel model;
    WitnessHeap heap;
};

/// Unsat, or a stack model of the abstraction together with a heap built
/// from it.
using SatResult = std::optional<SatWitness>;

/// A deterministic chunk decomposition of a span of length `span` into sizes
/// within [2, cap] (no cap when empty): all twos for an even span, a single
/// leading three otherwise. The caller guarantees a decomposition exists;
/// a violation signals a summary bug and raises InternalError.
std::vector<std::uint64_t> chunk_decompose(std::uint64_t span, std::optional<std::uint64_t> cap);

/// Builds a heap satisfying the spatial part of h under stack s. Requires
/// s to satisfy abs(h) with values for the existentials included. Block
/// bodies hold 1, heap lists hold their chunk headers with bodies of 1.
WitnessHeap build_witness(const StackModel& s, const SymbolicHeap& h);

/// Satisfiability of a symbolic heap: unsat exactly when the abstraction is
/// unsat; otherwise the backend model (with existential witnesses folded in)
/// plus a constructed witness heap.
SatResult decide_sat(const SymbolicHeap& h, LiaSolver& solver, const Deadline& deadline = {});

}  // namespace slah
