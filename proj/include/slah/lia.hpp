// Copyright (c) slah contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "slah/error.hpp"
#include "slah/formula.hpp"

namespace slah {

/// Stacks assign naturals to variables.
using StackModel = std::map<VarId, std::uint64_t>;

namespace lia {

/// A linear expression over integers: constant + sum of coeff * var.
/// Canonical: no zero coefficients. Variables range over naturals when a
/// formula is dispatched to a backend; coefficients and values of expressions
/// may still be negative integers.
class LinExpr {
  public:
    LinExpr() = default;
    LinExpr(std::int64_t n) : constant_(n) {}  // NOLINT: implicit by design
    LinExpr(const AddrTerm& t);                // NOLINT: implicit by design

    static LinExpr var(VarId v, std::int64_t coeff = 1);

    std::int64_t constant() const { return constant_; }
    const std::map<VarId, std::int64_t>& coefficients() const { return coeffs_; }
    bool is_constant() const { return coeffs_.empty(); }

    LinExpr& operator+=(const LinExpr& other);
    LinExpr& operator-=(const LinExpr& other);
    LinExpr& operator*=(std::int64_t k);
    friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
    friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
    friend LinExpr operator*(LinExpr a, std::int64_t k) { return a *= k; }

    void collect_vars(std::set<VarId>& out) const;
    std::int64_t evaluate(const StackModel& stack) const;

    bool operator==(const LinExpr&) const = default;
    auto operator<=>(const LinExpr&) const = default;

  private:
    std::int64_t constant_ = 0;
    std::map<VarId, std::int64_t> coeffs_;
};

std::ostream& operator<<(std::ostream& os, const LinExpr& e);

/// Atomic constraint: a comparison, or a congruence lhs = rhs (mod modulus).
struct Atom {
    enum class Kind { Cmp, Cong };

    Kind kind = Kind::Cmp;
    LinExpr lhs;
    LinExpr rhs;
    CmpOp op = CmpOp::Eq;       // Kind::Cmp
    std::uint64_t modulus = 1;  // Kind::Cong, >= 1

    static Atom cmp(LinExpr l, CmpOp op, LinExpr r);
    static Atom cong(LinExpr l, LinExpr r, std::uint64_t modulus);

    bool evaluate(const StackModel& stack) const;
    void collect_vars(std::set<VarId>& out) const;

    bool operator==(const Atom&) const = default;
};

std::ostream& operator<<(std::ostream& os, const Atom& a);

/// Formulas of linear integer arithmetic over naturals. The tree is a value
/// type: True | False | Atom | And | Or | Not | Exists.
class Formula {
  public:
    enum class Kind { True, False, Atom, And, Or, Not, Exists };

    Formula() : kind_(Kind::True) {}

    static Formula tt() { return Formula(Kind::True); }
    static Formula ff() { return Formula(Kind::False); }
    static Formula atom(Atom a);
    static Formula conj(std::vector<Formula> fs);
    static Formula disj(std::vector<Formula> fs);
    static Formula neg(Formula f);
    static Formula exists(std::vector<VarId> vars, Formula body);

    Kind kind() const { return kind_; }
    bool is_true() const { return kind_ == Kind::True; }
    bool is_false() const { return kind_ == Kind::False; }

    const Atom& get_atom() const;
    const std::vector<Formula>& children() const { return children_; }
    const std::vector<VarId>& bound_vars() const { return bound_; }

    void collect_free_vars(std::set<VarId>& out) const;
    std::set<VarId> free_vars() const;
    /// All variables, free and bound.
    void collect_all_vars(std::set<VarId>& out) const;

    bool has_quantifier() const;

    bool operator==(const Formula&) const = default;

  private:
    explicit Formula(Kind k) : kind_(k) {}

    Kind kind_;
    std::optional<Atom> atom_;
    std::vector<Formula> children_;
    std::vector<VarId> bound_;  // Exists only
};

std::ostream& operator<<(std::ostream& os, const Formula& f);

// Convenience constructors for atoms over expressions.
Formula eq(LinExpr l, LinExpr r);
Formula ne(LinExpr l, LinExpr r);
Formula le(LinExpr l, LinExpr r);
Formula lt(LinExpr l, LinExpr r);
Formula cong(LinExpr l, LinExpr r, std::uint64_t modulus);
Formula implies(Formula hyp, Formula concl);

/// Standard semantics over naturals. Requires f quantifier-free and the
/// stack total on its free variables.
bool evaluate(const Formula& f, const StackModel& stack);

/// Fragment classification after pushing negations inward.
enum class Fragment { QFPA, EPA, Other };
Fragment classify(const Formula& f);

/// Negation normal form: negations pushed to atoms and eliminated there.
/// A negation over a quantifier has no NNF in this language (no universal
/// quantifier); classify() reports such formulas as Other and nnf() throws.
Formula nnf(const Formula& f);

/// Rename bound variables apart and lift all quantifiers: returns the
/// quantifier-free matrix of the NNF, with former bound variables occurring
/// free under fresh non-colliding names.
Formula prenex_matrix(const Formula& f);

}  // namespace lia

/// Generates fresh variable names guaranteed distinct from a set of used
/// names. Produced names contain '!' which the input dialect's identifiers
/// cannot contain, so they never collide with user variables.
class FreshVars {
  public:
    explicit FreshVars(std::set<VarId> used) : used_(std::move(used)) {}

    VarId fresh(const std::string& stem);
    const std::set<VarId>& used() const { return used_; }
    void reserve(const VarId& v) { used_.insert(v); }

  private:
    std::set<VarId> used_;
    std::uint64_t counter_ = 0;
};

}  // namespace slah
