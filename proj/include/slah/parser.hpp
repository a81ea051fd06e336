// Copyright (c) slah contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slah/formula.hpp"
#include "slah/sexp.hpp"

namespace slah {

/// One query of the input dialect. Grammar (s-expression based):
///
///   file    := decl* query
///   decl    := (declare-var IDENT)
///   query   := (check-sat pure spatial)
///            | (check-entail (pure spatial) (pure spatial))
///   pure    := true | (and cmp+)
///   cmp     := ({=, distinct, <, <=} term term)
///   term    := IDENT | NAT | (+ term term+)
///   spatial := (sep atom*)
///   atom    := emp | (pto term term) | (blk term term) | (hls term term bound)
///   bound   := term | inf
///
/// Identifiers match [A-Za-z_][A-Za-z0-9_]*. All variables must be declared
/// before the query; an entailment's consequent may only use variables of
/// the antecedent.
struct Query {
    enum class Kind { CheckSat, CheckEntail };

    Kind kind = Kind::CheckSat;
    std::vector<VarId> declarations;
    SymbolicHeap antecedent;                 // the formula of a check-sat query
    std::optional<SymbolicHeap> consequent;  // present for check-entail

    bool operator==(const Query&) const = default;
};

using sexp::ParseError;
using sexp::SourceLoc;

/// Parses one query file. Raises ParseError with a source location on
/// lexical, syntactic, scoping and arity errors.
Query parse_query(std::string_view text);

/// Renders a query back into the dialect; parse(print(q)) is structurally
/// equal to q.
std::string print_query(const Query& q);

std::string print_heap_body(const SymbolicHeap& h);

}  // namespace slah
