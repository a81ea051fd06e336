// Copyright (c) slah contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "slah/solver.hpp"

namespace slah {

/// Self-contained decision procedure for quantifier-free LIA over naturals.
///
/// Pipeline: the matrix arrives in negation normal form with disequality and
/// modular congruence as primitive atoms. Conjunctions of atoms are
/// enumerated lazily from the and/or structure with rational-relaxation
/// pruning at every disjunction. At a leaf, disequalities split two-sided,
/// congruences are eliminated by a residue case split (x = m*x' + r for the
/// lcm m of the moduli), and the remaining comparison system is decided by
/// branch-and-bound over an exact rational simplex relaxation.
class InternalSolver final : public LiaSolver {
  public:
    InternalSolver() = default;

    std::optional<StackModel> solve_qf(const lia::Formula& matrix,
                                       const Deadline& deadline) override;

    std::string name() const override { return "internal"; }
};

}  // namespace slah
