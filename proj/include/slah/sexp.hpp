// Copyright (c) slah contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "slah/error.hpp"

namespace slah::sexp {

struct SourceLoc {
    unsigned line = 1;
    unsigned column = 1;

    bool operator==(const SourceLoc&) const = default;
};

class ParseError : public InputError {
  public:
    ParseError(SourceLoc loc, const std::string& message)
        : InputError(std::to_string(loc.line) + ":" + std::to_string(loc.column) + ": " + message),
          loc_(loc) {}

    SourceLoc where() const { return loc_; }

  private:
    SourceLoc loc_;
};

/// One node of an s-expression tree: a list, a bare symbol, or a natural
/// number literal. Every node remembers where it started.
struct Node {
    enum class Kind { List, Symbol, Number };

    Kind kind = Kind::List;
    std::string text;               // Symbol
    std::uint64_t number = 0;       // Number
    std::vector<Node> children;     // List
    SourceLoc loc;

    bool is_list() const { return kind == Kind::List; }
    bool is_symbol() const { return kind == Kind::Symbol; }
    bool is_symbol(std::string_view s) const { return kind == Kind::Symbol && text == s; }
    bool is_number() const { return kind == Kind::Number; }
};

/// Reads all top-level forms. Comments run from ';' to end of line.
/// Symbols are any run of characters other than whitespace, parentheses and
/// ';'; all-digit runs are number literals.
std::vector<Node> read_all(std::string_view input);

}  // namespace slah::sexp
