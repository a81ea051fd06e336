// Copyright (c) slah contributors.
// SPDX-License-Identifier: Apache-2.0
#include "slah/formula.hpp"

#include <algorithm>

namespace slah {

AddrTerm AddrTerm::var(VarId v) {
    AddrTerm t;
    t.coeffs_[std::move(v)] = 1;
    return t;
}

AddrTerm operator+(const AddrTerm& a, const AddrTerm& b) {
    AddrTerm r = a;
    r += b;
    return r;
}

AddrTerm& AddrTerm::operator+=(const AddrTerm& other) {
    constant_ += other.constant_;
    for (const auto& [v, k] : other.coeffs_) coeffs_[v] += k;
    return *this;
}

void AddrTerm::collect_vars(std::set<VarId>& out) const {
    for (const auto& [v, k] : coeffs_) out.insert(v);
}

std::set<VarId> AddrTerm::vars() const {
    std::set<VarId> out;
    collect_vars(out);
    return out;
}

std::uint64_t AddrTerm::evaluate(const std::map<VarId, std::uint64_t>& stack) const {
    std::uint64_t total = constant_;
    for (const auto& [v, k] : coeffs_) {
        auto it = stack.find(v);
        if (it == stack.end()) throw InputError("unbound variable in term: " + v);
        total += k * it->second;
    }
    return total;
}

AddrTerm AddrTerm::substituted(const std::map<VarId, AddrTerm>& sigma) const {
    AddrTerm r(constant_);
    for (const auto& [v, k] : coeffs_) {
        auto it = sigma.find(v);
        if (it == sigma.end()) {
            r.coeffs_[v] += k;
        } else {
            for (std::uint64_t i = 0; i < k; ++i) r += it->second;
        }
    }
    return r;
}

std::ostream& operator<<(std::ostream& os, const AddrTerm& t) {
    bool first = true;
    for (const auto& [v, k] : t.coefficients()) {
        for (std::uint64_t i = 0; i < k; ++i) {
            if (!first) os << "+";
            os << v;
            first = false;
        }
    }
    if (t.constant() != 0 || first) {
        if (!first) os << "+";
        os << t.constant();
    }
    return os;
}

const AddrTerm& Bound::term() const {
    if (!term_) throw InternalError("term() on an infinite bound");
    return *term_;
}

void Bound::collect_vars(std::set<VarId>& out) const {
    if (term_) term_->collect_vars(out);
}

Bound Bound::substituted(const std::map<VarId, AddrTerm>& sigma) const {
    if (!term_) return *this;
    return Bound(term_->substituted(sigma));
}

std::ostream& operator<<(std::ostream& os, const Bound& b) {
    if (b.is_infinite()) return os << "inf";
    return os << b.term();
}

std::ostream& operator<<(std::ostream& os, CmpOp op) {
    switch (op) {
    case CmpOp::Eq: return os << "=";
    case CmpOp::Ne: return os << "!=";
    case CmpOp::Le: return os << "<=";
    case CmpOp::Lt: return os << "<";
    }
    return os;
}

bool PureAtom::evaluate(const std::map<VarId, std::uint64_t>& stack) const {
    std::uint64_t l = lhs.evaluate(stack);
    std::uint64_t r = rhs.evaluate(stack);
    switch (op) {
    case CmpOp::Eq: return l == r;
    case CmpOp::Ne: return l != r;
    case CmpOp::Le: return l <= r;
    case CmpOp::Lt: return l < r;
    }
    return false;
}

std::ostream& operator<<(std::ostream& os, const PureAtom& a) {
    return os << a.lhs << " " << a.op << " " << a.rhs;
}

void PureFormula::add(AddrTerm l, CmpOp op, AddrTerm r) {
    atoms.push_back(PureAtom{std::move(l), op, std::move(r)});
}

bool PureFormula::evaluate(const std::map<VarId, std::uint64_t>& stack) const {
    if (contradiction) return false;
    return std::all_of(atoms.begin(), atoms.end(),
                       [&](const PureAtom& a) { return a.evaluate(stack); });
}

void PureFormula::collect_vars(std::set<VarId>& out) const {
    for (const auto& a : atoms) {
        a.lhs.collect_vars(out);
        a.rhs.collect_vars(out);
    }
}

PureFormula PureFormula::substituted(const std::map<VarId, AddrTerm>& sigma) const {
    PureFormula r;
    r.contradiction = contradiction;
    for (const auto& a : atoms)
        r.atoms.push_back(PureAtom{a.lhs.substituted(sigma), a.op, a.rhs.substituted(sigma)});
    return r;
}

std::ostream& operator<<(std::ostream& os, const PureFormula& p) {
    if (p.contradiction) return os << "false";
    if (p.atoms.empty()) return os << "true";
    for (std::size_t i = 0; i < p.atoms.size(); ++i) {
        if (i > 0) os << " & ";
        os << p.atoms[i];
    }
    return os;
}

SpatialAtom SpatialAtom::emp() { return SpatialAtom(Kind::Emp, {}, {}, std::nullopt); }

SpatialAtom SpatialAtom::points_to(AddrTerm addr, AddrTerm value) {
    return SpatialAtom(Kind::PointsTo, std::move(addr), std::move(value), std::nullopt);
}

SpatialAtom SpatialAtom::blk(AddrTerm from, AddrTerm to) {
    return SpatialAtom(Kind::Blk, std::move(from), std::move(to), std::nullopt);
}

SpatialAtom SpatialAtom::hls(AddrTerm from, AddrTerm to, Bound bound) {
    return SpatialAtom(Kind::Hls, std::move(from), std::move(to), std::move(bound));
}

AddrTerm SpatialAtom::head() const {
    switch (kind_) {
    case Kind::PointsTo:
    case Kind::Blk:
    case Kind::Hls: return first_;
    case Kind::Emp: break;
    }
    throw InputError("head() is undefined for emp");
}

AddrTerm SpatialAtom::tail() const {
    switch (kind_) {
    case Kind::PointsTo: return first_ + AddrTerm(1);
    case Kind::Blk:
    case Kind::Hls: return second_;
    case Kind::Emp: break;
    }
    throw InputError("tail() is undefined for emp");
}

const AddrTerm& SpatialAtom::pto_addr() const {
    if (kind_ != Kind::PointsTo) throw InternalError("pto_addr() on non points-to atom");
    return first_;
}

const AddrTerm& SpatialAtom::pto_value() const {
    if (kind_ != Kind::PointsTo) throw InternalError("pto_value() on non points-to atom");
    return second_;
}

const AddrTerm& SpatialAtom::from() const {
    if (kind_ != Kind::Blk && kind_ != Kind::Hls) throw InternalError("from() on atom without a range");
    return first_;
}

const AddrTerm& SpatialAtom::to() const {
    if (kind_ != Kind::Blk && kind_ != Kind::Hls) throw InternalError("to() on atom without a range");
    return second_;
}

const Bound& SpatialAtom::bound() const {
    if (kind_ != Kind::Hls) throw InternalError("bound() on non hls atom");
    return *bound_;
}

void SpatialAtom::collect_vars(std::set<VarId>& out) const {
    if (kind_ == Kind::Emp) return;
    first_.collect_vars(out);
    second_.collect_vars(out);
    if (bound_) bound_->collect_vars(out);
}

SpatialAtom SpatialAtom::substituted(const std::map<VarId, AddrTerm>& sigma) const {
    switch (kind_) {
    case Kind::Emp: return *this;
    case Kind::PointsTo: return points_to(first_.substituted(sigma), second_.substituted(sigma));
    case Kind::Blk: return blk(first_.substituted(sigma), second_.substituted(sigma));
    case Kind::Hls:
        return hls(first_.substituted(sigma), second_.substituted(sigma), bound_->substituted(sigma));
    }
    throw InternalError("unreachable atom kind");
}

std::ostream& operator<<(std::ostream& os, const SpatialAtom& a) {
    switch (a.kind()) {
    case SpatialAtom::Kind::Emp: return os << "emp";
    case SpatialAtom::Kind::PointsTo: return os << a.pto_addr() << " -> " << a.pto_value();
    case SpatialAtom::Kind::Blk: return os << "blk(" << a.from() << ", " << a.to() << ")";
    case SpatialAtom::Kind::Hls:
        os << "hls(" << a.from() << ", " << a.to();
        if (!a.bound().is_infinite()) os << "; " << a.bound();
        return os << ")";
    }
    return os;
}

SymbolicHeap::SymbolicHeap(PureFormula pure, std::vector<SpatialAtom> spatial,
                           std::set<VarId> existentials)
    : existentials_(std::move(existentials)), pure_(std::move(pure)) {
    spatial_.reserve(spatial.size());
    for (auto& a : spatial)
        if (!a.is_emp()) spatial_.push_back(std::move(a));
}

std::set<VarId> SymbolicHeap::fv() const {
    std::set<VarId> vars = all_vars();
    for (const auto& v : existentials_) vars.erase(v);
    return vars;
}

std::set<VarId> SymbolicHeap::all_vars() const {
    std::set<VarId> vars;
    pure_.collect_vars(vars);
    for (const auto& a : spatial_) a.collect_vars(vars);
    return vars;
}

SymbolicHeap SymbolicHeap::qf() const { return SymbolicHeap(pure_, spatial_); }

std::ostream& operator<<(std::ostream& os, const SymbolicHeap& h) {
    if (!h.existentials().empty()) {
        os << "exists";
        for (const auto& v : h.existentials()) os << " " << v;
        os << " . ";
    }
    os << h.pure() << " : ";
    if (h.spatial().empty()) {
        os << "emp";
    } else {
        for (std::size_t i = 0; i < h.spatial().size(); ++i) {
            if (i > 0) os << " * ";
            os << h.spatial()[i];
        }
    }
    return os;
}

std::set<AddrTerm> address_terms(const std::vector<SpatialAtom>& atoms) {
    std::set<AddrTerm> out;
    for (const auto& a : atoms) {
        if (a.is_emp()) continue;
        out.insert(a.head());
        out.insert(a.tail());
    }
    return out;
}

std::set<AddrTerm> address_terms(const SymbolicHeap& h) { return address_terms(h.spatial()); }

SymbolicHeap substitute(const SymbolicHeap& h, const std::map<VarId, AddrTerm>& sigma) {
    for (const auto& [v, t] : sigma) {
        if (h.existentials().count(v))
            throw InputError("substitution domain overlaps existentials: " + v);
        for (const auto& tv : t.vars())
            if (h.existentials().count(tv))
                throw InputError("substitution would capture existential: " + tv);
    }
    std::vector<SpatialAtom> spatial;
    spatial.reserve(h.spatial().size());
    for (const auto& a : h.spatial()) spatial.push_back(a.substituted(sigma));
    return SymbolicHeap(h.pure().substituted(sigma), std::move(spatial), h.existentials());
}

}  // namespace slah
