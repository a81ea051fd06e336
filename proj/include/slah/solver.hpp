// Copyright (c) slah contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>

#include "slah/lia.hpp"

namespace slah {

/// Absolute wall-clock cutoff for a solver call; empty means no limit.
using Deadline = std::optional<std::chrono::steady_clock::time_point>;

inline Deadline deadline_after(std::chrono::milliseconds budget) {
    return std::chrono::steady_clock::now() + budget;
}

inline bool deadline_expired(const Deadline& d) {
    return d && std::chrono::steady_clock::now() >= *d;
}

/// A satisfiability backend for quantifier-free LIA over naturals. Each call
/// owns an isolated session (fresh process or fresh internal state), so
/// instances are safe to use from several threads concurrently.
class LiaSolver {
  public:
    virtual ~LiaSolver() = default;

    /// Decides the matrix (quantifier-free, all variables over naturals).
    /// Returns an assignment for every free variable on sat, nullopt on
    /// unsat. Failures and timeouts raise BackendError.
    virtual std::optional<StackModel> solve_qf(const lia::Formula& matrix,
                                               const Deadline& deadline) = 0;

    virtual std::string name() const = 0;
};

using SolverPtr = std::shared_ptr<LiaSolver>;

/// Satisfiability of a QFPA or EPA formula over naturals. Existential
/// variables are renamed apart and solved as free variables; their witness
/// values are part of the returned model. Every sat answer is re-validated
/// by evaluating the formula on the returned model.
std::optional<StackModel> check_sat(const lia::Formula& f, LiaSolver& solver,
                                    const Deadline& deadline = {});

/// Validity of hyp -> concl over naturals, by refutation of hyp and not
/// concl. The combined formula must classify as EPA after pushing negation.
bool check_valid_implication(const lia::Formula& hyp, const lia::Formula& concl,
                             LiaSolver& solver, const Deadline& deadline = {});

/// Builds a backend from a spec string: "internal", or "external:<command>"
/// where <command> is an SMT-LIB 2 solver invocation reading from stdin.
SolverPtr make_solver(const std::string& spec);

/// Memoizes verdicts of an underlying backend keyed by the printed matrix.
/// The entailment procedures ask many repeated questions about shared
/// context prefixes; this keeps them from hitting the backend twice.
/// Thread-safe. Errors are never cached.
class CachingSolver final : public LiaSolver {
  public:
    explicit CachingSolver(SolverPtr inner);
    ~CachingSolver() override;

    std::optional<StackModel> solve_qf(const lia::Formula& matrix,
                                       const Deadline& deadline) override;
    std::string name() const override;
    std::size_t hits() const;
    std::size_t misses() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace slah
