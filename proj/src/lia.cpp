// Copyright (c) slah contributors.
// SPDX-License-Identifier: Apache-2.0
#include "slah/lia.hpp"

#include <algorithm>

namespace slah::lia {

LinExpr::LinExpr(const AddrTerm& t) : constant_(static_cast<std::int64_t>(t.constant())) {
    for (const auto& [v, k] : t.coefficients()) coeffs_[v] = static_cast<std::int64_t>(k);
}

LinExpr LinExpr::var(VarId v, std::int64_t coeff) {
    LinExpr e;
    if (coeff != 0) e.coeffs_[std::move(v)] = coeff;
    return e;
}

LinExpr& LinExpr::operator+=(const LinExpr& other) {
    constant_ += other.constant_;
    for (const auto& [v, k] : other.coeffs_) {
        std::int64_t& c = coeffs_[v];
        c += k;
        if (c == 0) coeffs_.erase(v);
    }
    return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& other) {
    constant_ -= other.constant_;
    for (const auto& [v, k] : other.coeffs_) {
        std::int64_t& c = coeffs_[v];
        c -= k;
        if (c == 0) coeffs_.erase(v);
    }
    return *this;
}

LinExpr& LinExpr::operator*=(std::int64_t k) {
    if (k == 0) {
        coeffs_.clear();
        constant_ = 0;
        return *this;
    }
    constant_ *= k;
    for (auto& [v, c] : coeffs_) c *= k;
    return *this;
}

void LinExpr::collect_vars(std::set<VarId>& out) const {
    for (const auto& [v, k] : coeffs_) out.insert(v);
}

std::int64_t LinExpr::evaluate(const StackModel& stack) const {
    std::int64_t total = constant_;
    for (const auto& [v, k] : coeffs_) {
        auto it = stack.find(v);
        if (it == stack.end()) throw InputError("unbound variable in expression: " + v);
        total += k * static_cast<std::int64_t>(it->second);
    }
    return total;
}

std::ostream& operator<<(std::ostream& os, const LinExpr& e) {
    bool first = true;
    for (const auto& [v, k] : e.coefficients()) {
        if (!first && k > 0) os << "+";
        if (k == -1)
            os << "-";
        else if (k != 1)
            os << k << "*";
        os << v;
        first = false;
    }
    if (e.constant() != 0 || first) {
        if (!first && e.constant() > 0) os << "+";
        os << e.constant();
    }
    return os;
}

Atom Atom::cmp(LinExpr l, CmpOp op, LinExpr r) {
    Atom a;
    a.kind = Kind::Cmp;
    a.lhs = std::move(l);
    a.rhs = std::move(r);
    a.op = op;
    return a;
}

Atom Atom::cong(LinExpr l, LinExpr r, std::uint64_t modulus) {
    if (modulus == 0) throw InputError("congruence modulus must be positive");
    Atom a;
    a.kind = Kind::Cong;
    a.lhs = std::move(l);
    a.rhs = std::move(r);
    a.modulus = modulus;
    return a;
}

bool Atom::evaluate(const StackModel& stack) const {
    std::int64_t l = lhs.evaluate(stack);
    std::int64_t r = rhs.evaluate(stack);
    if (kind == Kind::Cong) {
        std::int64_t m = static_cast<std::int64_t>(modulus);
        std::int64_t d = (l - r) % m;
        return ((d + m) % m) == 0;
    }
    switch (op) {
    case CmpOp::Eq: return l == r;
    case CmpOp::Ne: return l != r;
    case CmpOp::Le: return l <= r;
    case CmpOp::Lt: return l < r;
    }
    return false;
}

void Atom::collect_vars(std::set<VarId>& out) const {
    lhs.collect_vars(out);
    rhs.collect_vars(out);
}

std::ostream& operator<<(std::ostream& os, const Atom& a) {
    if (a.kind == Atom::Kind::Cong) return os << a.lhs << " = " << a.rhs << " (mod " << a.modulus << ")";
    return os << a.lhs << " " << a.op << " " << a.rhs;
}

Formula Formula::atom(Atom a) {
    Formula f(Kind::Atom);
    f.atom_ = std::move(a);
    return f;
}

Formula Formula::conj(std::vector<Formula> fs) {
    std::vector<Formula> kept;
    for (auto& f : fs) {
        if (f.is_false()) return ff();
        if (f.is_true()) continue;
        if (f.kind() == Kind::And) {
            for (auto& c : f.children_) kept.push_back(std::move(c));
        } else {
            kept.push_back(std::move(f));
        }
    }
    if (kept.empty()) return tt();
    if (kept.size() == 1) return std::move(kept.front());
    Formula f(Kind::And);
    f.children_ = std::move(kept);
    return f;
}

Formula Formula::disj(std::vector<Formula> fs) {
    std::vector<Formula> kept;
    for (auto& f : fs) {
        if (f.is_true()) return tt();
        if (f.is_false()) continue;
        if (f.kind() == Kind::Or) {
            for (auto& c : f.children_) kept.push_back(std::move(c));
        } else {
            kept.push_back(std::move(f));
        }
    }
    if (kept.empty()) return ff();
    if (kept.size() == 1) return std::move(kept.front());
    Formula f(Kind::Or);
    f.children_ = std::move(kept);
    return f;
}

Formula Formula::neg(Formula g) {
    if (g.is_true()) return ff();
    if (g.is_false()) return tt();
    if (g.kind() == Kind::Not) return std::move(g.children_.front());
    Formula f(Kind::Not);
    f.children_.push_back(std::move(g));
    return f;
}

Formula Formula::exists(std::vector<VarId> vars, Formula body) {
    if (vars.empty()) return body;
    if (body.kind() == Kind::Exists) {
        for (const auto& v : body.bound_) vars.push_back(v);
        return exists(std::move(vars), std::move(body.children_.front()));
    }
    Formula f(Kind::Exists);
    f.bound_ = std::move(vars);
    f.children_.push_back(std::move(body));
    return f;
}

const Atom& Formula::get_atom() const {
    if (kind_ != Kind::Atom) throw InternalError("get_atom() on a non-atomic formula");
    return *atom_;
}

void Formula::collect_free_vars(std::set<VarId>& out) const {
    switch (kind_) {
    case Kind::True:
    case Kind::False: return;
    case Kind::Atom: atom_->collect_vars(out); return;
    case Kind::And:
    case Kind::Or:
    case Kind::Not:
        for (const auto& c : children_) c.collect_free_vars(out);
        return;
    case Kind::Exists: {
        std::set<VarId> inner;
        children_.front().collect_free_vars(inner);
        for (const auto& v : bound_) inner.erase(v);
        out.insert(inner.begin(), inner.end());
        return;
    }
    }
}

std::set<VarId> Formula::free_vars() const {
    std::set<VarId> out;
    collect_free_vars(out);
    return out;
}

void Formula::collect_all_vars(std::set<VarId>& out) const {
    switch (kind_) {
    case Kind::True:
    case Kind::False: return;
    case Kind::Atom: atom_->collect_vars(out); return;
    case Kind::And:
    case Kind::Or:
    case Kind::Not:
        for (const auto& c : children_) c.collect_all_vars(out);
        return;
    case Kind::Exists:
        out.insert(bound_.begin(), bound_.end());
        children_.front().collect_all_vars(out);
        return;
    }
}

bool Formula::has_quantifier() const {
    if (kind_ == Kind::Exists) return true;
    return std::any_of(children_.begin(), children_.end(),
                       [](const Formula& c) { return c.has_quantifier(); });
}

std::ostream& operator<<(std::ostream& os, const Formula& f) {
    switch (f.kind()) {
    case Formula::Kind::True: return os << "true";
    case Formula::Kind::False: return os << "false";
    case Formula::Kind::Atom: return os << f.get_atom();
    case Formula::Kind::And:
    case Formula::Kind::Or: {
        const char* sep = f.kind() == Formula::Kind::And ? " & " : " | ";
        os << "(";
        for (std::size_t i = 0; i < f.children().size(); ++i) {
            if (i > 0) os << sep;
            os << f.children()[i];
        }
        return os << ")";
    }
    case Formula::Kind::Not: return os << "!(" << f.children().front() << ")";
    case Formula::Kind::Exists: {
        os << "(exists";
        for (const auto& v : f.bound_vars()) os << " " << v;
        return os << " . " << f.children().front() << ")";
    }
    }
    return os;
}

Formula eq(LinExpr l, LinExpr r) { return Formula::atom(Atom::cmp(std::move(l), CmpOp::Eq, std::move(r))); }
Formula ne(LinExpr l, LinExpr r) { return Formula::atom(Atom::cmp(std::move(l), CmpOp::Ne, std::move(r))); }
Formula le(LinExpr l, LinExpr r) { return Formula::atom(Atom::cmp(std::move(l), CmpOp::Le, std::move(r))); }
Formula lt(LinExpr l, LinExpr r) { return Formula::atom(Atom::cmp(std::move(l), CmpOp::Lt, std::move(r))); }
Formula cong(LinExpr l, LinExpr r, std::uint64_t modulus) {
    return Formula::atom(Atom::cong(std::move(l), std::move(r), modulus));
}
Formula implies(Formula hyp, Formula concl) {
    return Formula::disj({Formula::neg(std::move(hyp)), std::move(concl)});
}

bool evaluate(const Formula& f, const StackModel& stack) {
    switch (f.kind()) {
    case Formula::Kind::True: return true;
    case Formula::Kind::False: return false;
    case Formula::Kind::Atom: return f.get_atom().evaluate(stack);
    case Formula::Kind::And:
        return std::all_of(f.children().begin(), f.children().end(),
                           [&](const Formula& c) { return evaluate(c, stack); });
    case Formula::Kind::Or:
        return std::any_of(f.children().begin(), f.children().end(),
                           [&](const Formula& c) { return evaluate(c, stack); });
    case Formula::Kind::Not: return !evaluate(f.children().front(), stack);
    case Formula::Kind::Exists: throw InputError("evaluate() requires a quantifier-free formula");
    }
    throw InternalError("unreachable formula kind");
}

namespace {

// Negation of an atom as a positive formula. Disequality flips to equality,
// equality to a strict two-sided split, and a negated congruence becomes the
// disjunction over the nonzero residues.
Formula negated_atom(const Atom& a) {
    if (a.kind == Atom::Kind::Cong) {
        std::vector<Formula> cases;
        for (std::uint64_t j = 1; j < a.modulus; ++j)
            cases.push_back(cong(a.lhs, a.rhs + LinExpr(static_cast<std::int64_t>(j)), a.modulus));
        return Formula::disj(std::move(cases));
    }
    switch (a.op) {
    case CmpOp::Eq: return ne(a.lhs, a.rhs);
    case CmpOp::Ne: return eq(a.lhs, a.rhs);
    case CmpOp::Le: return lt(a.rhs, a.lhs);
    case CmpOp::Lt: return le(a.rhs, a.lhs);
    }
    throw InternalError("unreachable comparison op");
}

Formula nnf_rec(const Formula& f, bool negate) {
    switch (f.kind()) {
    case Formula::Kind::True: return negate ? Formula::ff() : Formula::tt();
    case Formula::Kind::False: return negate ? Formula::tt() : Formula::ff();
    case Formula::Kind::Atom: return negate ? negated_atom(f.get_atom()) : f;
    case Formula::Kind::Not: return nnf_rec(f.children().front(), !negate);
    case Formula::Kind::And:
    case Formula::Kind::Or: {
        bool and_like = (f.kind() == Formula::Kind::And) != negate;
        std::vector<Formula> cs;
        cs.reserve(f.children().size());
        for (const auto& c : f.children()) cs.push_back(nnf_rec(c, negate));
        return and_like ? Formula::conj(std::move(cs)) : Formula::disj(std::move(cs));
    }
    case Formula::Kind::Exists:
        if (negate)
            throw InputError("negation over an existential leaves the EPA fragment");
        return Formula::exists(f.bound_vars(), nnf_rec(f.children().front(), false));
    }
    throw InternalError("unreachable formula kind");
}

}  // namespace

Formula nnf(const Formula& f) { return nnf_rec(f, false); }

Fragment classify(const Formula& f) {
    try {
        Formula n = nnf(f);
        return n.has_quantifier() ? Fragment::EPA : Fragment::QFPA;
    } catch (const InputError&) {
        return Fragment::Other;
    }
}

namespace {

Formula rename_apart(const Formula& f, std::map<VarId, VarId>& renaming, FreshVars& gen) {
    switch (f.kind()) {
    case Formula::Kind::True:
    case Formula::Kind::False: return f;
    case Formula::Kind::Atom: {
        Atom a = f.get_atom();
        auto rename_expr = [&](const LinExpr& e) {
            LinExpr out(e.constant());
            for (const auto& [v, k] : e.coefficients()) {
                auto it = renaming.find(v);
                out += LinExpr::var(it == renaming.end() ? v : it->second, k);
            }
            return out;
        };
        a.lhs = rename_expr(a.lhs);
        a.rhs = rename_expr(a.rhs);
        return Formula::atom(std::move(a));
    }
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Not: {
        std::vector<Formula> cs;
        cs.reserve(f.children().size());
        for (const auto& c : f.children()) cs.push_back(rename_apart(c, renaming, gen));
        if (f.kind() == Formula::Kind::And) return Formula::conj(std::move(cs));
        if (f.kind() == Formula::Kind::Or) return Formula::disj(std::move(cs));
        return Formula::neg(std::move(cs.front()));
    }
    case Formula::Kind::Exists: {
        std::map<VarId, VarId> saved;
        for (const auto& v : f.bound_vars()) {
            auto it = renaming.find(v);
            if (it != renaming.end()) saved.emplace(v, it->second);
            renaming[v] = gen.fresh(v);
        }
        Formula body = rename_apart(f.children().front(), renaming, gen);
        for (const auto& v : f.bound_vars()) {
            auto it = saved.find(v);
            if (it != saved.end())
                renaming[v] = it->second;
            else
                renaming.erase(v);
        }
        return body;  // quantifier dropped, bound vars now free under fresh names
    }
    }
    throw InternalError("unreachable formula kind");
}

}  // namespace

Formula prenex_matrix(const Formula& f) {
    Formula n = nnf(f);
    std::set<VarId> used;
    n.collect_all_vars(used);
    FreshVars gen(std::move(used));
    std::map<VarId, VarId> renaming;
    return rename_apart(n, renaming, gen);
}

}  // namespace slah::lia

namespace slah {

VarId FreshVars::fresh(const std::string& stem) {
    for (;;) {
        VarId candidate = stem + "!" + std::to_string(counter_++);
        if (used_.insert(candidate).second) return candidate;
    }
}

}  // namespace slah
