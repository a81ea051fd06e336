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

namespace slah {

using VarId = std::string;

/// An address term: a constant plus variables with positive multiplicities.
/// The representation is canonical; two terms compare equal iff they evaluate
/// equal under every stack. Multiplicity 0 entries never appear in the map,
/// so duplicate summands like x+x canonicalize to multiplicity 2.
class AddrTerm {
  public:
    AddrTerm() = default;
    AddrTerm(std::uint64_t n) : constant_(n) {}  // NOLINT: implicit by design
    AddrTerm(int n) : constant_(static_cast<std::uint64_t>(n)) {
        if (n < 0) throw InputError("address terms are over naturals");
    }

    static AddrTerm var(VarId v);

    friend AddrTerm operator+(const AddrTerm& a, const AddrTerm& b);
    AddrTerm& operator+=(const AddrTerm& other);

    std::uint64_t constant() const { return constant_; }
    const std::map<VarId, std::uint64_t>& coefficients() const { return coeffs_; }
    bool is_constant() const { return coeffs_.empty(); }

    void collect_vars(std::set<VarId>& out) const;
    std::set<VarId> vars() const;

    std::uint64_t evaluate(const std::map<VarId, std::uint64_t>& stack) const;

    /// Simultaneous substitution of variables by terms.
    AddrTerm substituted(const std::map<VarId, AddrTerm>& sigma) const;

    bool operator==(const AddrTerm&) const = default;
    auto operator<=>(const AddrTerm&) const = default;

  private:
    std::uint64_t constant_ = 0;
    std::map<VarId, std::uint64_t> coeffs_;
};

std::ostream& operator<<(std::ostream& os, const AddrTerm& t);

/// The third argument of a heap-list atom: a term, or no upper bound.
class Bound {
  public:
    Bound(AddrTerm t) : term_(std::move(t)) {}  // NOLINT: implicit by design
    static Bound infinity() { return Bound(); }

    bool is_infinite() const { return !term_.has_value(); }
    const AddrTerm& term() const;

    void collect_vars(std::set<VarId>& out) const;
    Bound substituted(const std::map<VarId, AddrTerm>& sigma) const;

    bool operator==(const Bound&) const = default;
    auto operator<=>(const Bound&) const = default;

  private:
    Bound() = default;
    std::optional<AddrTerm> term_;
};

std::ostream& operator<<(std::ostream& os, const Bound& b);

enum class CmpOp { Eq, Ne, Le, Lt };

std::ostream& operator<<(std::ostream& os, CmpOp op);

struct PureAtom {
    AddrTerm lhs;
    CmpOp op = CmpOp::Eq;
    AddrTerm rhs;

    bool evaluate(const std::map<VarId, std::uint64_t>& stack) const;
    bool operator==(const PureAtom&) const = default;
};

std::ostream& operator<<(std::ostream& os, const PureAtom& a);

/// Conjunction of comparison atoms, or the constant false. The empty
/// conjunction is the constant true.
struct PureFormula {
    bool contradiction = false;
    std::vector<PureAtom> atoms;

    static PureFormula top() { return {}; }
    static PureFormula bottom() { return {.contradiction = true, .atoms = {}}; }

    bool is_true() const { return !contradiction && atoms.empty(); }
    void add(PureAtom a) { atoms.push_back(std::move(a)); }
    void add(AddrTerm l, CmpOp op, AddrTerm r);

    bool evaluate(const std::map<VarId, std::uint64_t>& stack) const;
    void collect_vars(std::set<VarId>& out) const;
    PureFormula substituted(const std::map<VarId, AddrTerm>& sigma) const;

    bool operator==(const PureFormula&) const = default;
};

std::ostream& operator<<(std::ostream& os, const PureFormula& p);

/// One spatial atom: emp, points-to, memory block, or heap list. The end
/// address of a block and of a heap list is exclusive.
class SpatialAtom {
  public:
    enum class Kind { Emp, PointsTo, Blk, Hls };

    static SpatialAtom emp();
    static SpatialAtom points_to(AddrTerm addr, AddrTerm value);
    static SpatialAtom blk(AddrTerm from, AddrTerm to);
    static SpatialAtom hls(AddrTerm from, AddrTerm to, Bound bound = Bound::infinity());

    Kind kind() const { return kind_; }
    bool is_emp() const { return kind_ == Kind::Emp; }
    bool is_points_to() const { return kind_ == Kind::PointsTo; }
    bool is_blk() const { return kind_ == Kind::Blk; }
    bool is_hls() const { return kind_ == Kind::Hls; }

    /// Start address of the atom's footprint. Emp has none.
    AddrTerm head() const;
    /// One past the last address of the atom's footprint. Emp has none.
    AddrTerm tail() const;

    const AddrTerm& pto_addr() const;
    const AddrTerm& pto_value() const;
    const AddrTerm& from() const;
    const AddrTerm& to() const;
    const Bound& bound() const;

    void collect_vars(std::set<VarId>& out) const;
    SpatialAtom substituted(const std::map<VarId, AddrTerm>& sigma) const;

    bool operator==(const SpatialAtom&) const = default;
    auto operator<=>(const SpatialAtom&) const = default;

  private:
    SpatialAtom(Kind kind, AddrTerm first, AddrTerm second, std::optional<Bound> bound)
        : kind_(kind), first_(std::move(first)), second_(std::move(second)), bound_(std::move(bound)) {}

    Kind kind_ = Kind::Emp;
    AddrTerm first_;
    AddrTerm second_;
    std::optional<Bound> bound_;
};

std::ostream& operator<<(std::ostream& os, const SpatialAtom& a);

/// A symbolic heap: existentially quantified variables, a pure conjunction
/// and a list of spatial atoms composed by separating conjunction. Emp atoms
/// are dropped on construction; they are neutral for the composition.
class SymbolicHeap {
  public:
    SymbolicHeap() = default;
    SymbolicHeap(PureFormula pure, std::vector<SpatialAtom> spatial,
                 std::set<VarId> existentials = {});

    const std::set<VarId>& existentials() const { return existentials_; }
    const PureFormula& pure() const { return pure_; }
    const std::vector<SpatialAtom>& spatial() const { return spatial_; }

    bool is_quantifier_free() const { return existentials_.empty(); }

    /// Free variables: all variables of the body minus the existentials.
    std::set<VarId> fv() const;
    /// All variables occurring in the body, bound or free.
    std::set<VarId> all_vars() const;

    /// The quantifier-free part: same body, no existential block.
    SymbolicHeap qf() const;

    bool operator==(const SymbolicHeap&) const = default;

  private:
    std::set<VarId> existentials_;
    PureFormula pure_;
    std::vector<SpatialAtom> spatial_;
};

std::ostream& operator<<(std::ostream& os, const SymbolicHeap& h);

/// Start and end addresses of all non-emp spatial atoms, deduplicated by
/// canonical term equality.
std::set<AddrTerm> address_terms(const SymbolicHeap& h);
std::set<AddrTerm> address_terms(const std::vector<SpatialAtom>& atoms);

/// Capture-free simultaneous substitution. The domain of sigma must be
/// disjoint from the existentials of h, and no term of sigma may mention an
/// existential of h.
SymbolicHeap substitute(const SymbolicHeap& h, const std::map<VarId, AddrTerm>& sigma);

}  // namespace slah
