// Copyright (c) slah contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <set>
#include <string>

#include "slah/solver.hpp"

namespace slah {

/// Backend speaking SMT-LIB 2 to a child process over stdin/stdout. Each
/// solve spawns a fresh process (the command runs under /bin/sh, so flags
/// like "z3 -in -smt2" work).
///
/// The script declares every natural variable as an Int constant with a
/// nonnegativity assertion. Congruences l = r (mod n) are encoded with an
/// existentially quantified quotient: a fresh integer q with l - r = n*q.
class SmtLibSolver final : public LiaSolver {
  public:
    explicit SmtLibSolver(std::string command) : command_(std::move(command)) {}

    std::optional<StackModel> solve_qf(const lia::Formula& matrix,
                                       const Deadline& deadline) override;

    std::string name() const override { return "external:" + command_; }

    /// The full SMT-LIB 2 script for a matrix, ending in (check-sat),
    /// (get-model), (exit).
    static std::string render_script(const lia::Formula& matrix);

    /// Parses solver output: the sat/unsat verdict followed by a model.
    /// "unknown" or malformed output raises BackendError. Declared variables
    /// missing from the model default to zero.
    static std::optional<StackModel> parse_answer(const std::string& output,
                                                  const std::set<VarId>& vars);

  private:
    std::string command_;
};

}  // namespace slah
