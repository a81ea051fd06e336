// Copyright (c) slah contributors.
// SPDX-License-Identifier: Apache-2.0
#include "slah/abstraction.hpp"

namespace slah::abstraction {

using lia::Formula;
using lia::LinExpr;

Formula pure_to_lia(const PureFormula& pure) {
    if (pure.contradiction) return Formula::ff();
    std::vector<Formula> parts;
    parts.reserve(pure.atoms.size());
    for (const auto& a : pure.atoms)
        parts.push_back(Formula::atom(lia::Atom::cmp(LinExpr(a.lhs), a.op, LinExpr(a.rhs))));
    return Formula::conj(std::move(parts));
}

Formula abs_plus_hls(const AddrTerm& from, const AddrTerm& to, const Bound& bound) {
    LinExpr lo(from);
    LinExpr hi(to);
    Formula span = lia::le(lo + 2, hi);
    if (bound.is_infinite()) return span;
    LinExpr cap(bound.term());
    Formula two_exact = Formula::conj({lia::eq(cap, 2), span, lia::cong(hi, lo, 2)});
    Formula loose = Formula::conj({lia::lt(2, cap), span});
    return Formula::disj({std::move(two_exact), std::move(loose)});
}

Formula abs_atom(const SpatialAtom& atom) {
    switch (atom.kind()) {
    case SpatialAtom::Kind::Emp: throw InputError("abs_atom requires a non-emp atom");
    case SpatialAtom::Kind::PointsTo: return Formula::tt();
    case SpatialAtom::Kind::Blk: return lia::lt(LinExpr(atom.from()), LinExpr(atom.to()));
    case SpatialAtom::Kind::Hls: {
        LinExpr lo(atom.from());
        LinExpr hi(atom.to());
        Formula nonempty =
            Formula::conj({lia::lt(lo, hi), abs_plus_hls(atom.from(), atom.to(), atom.bound())});
        return Formula::disj({lia::eq(lo, hi), std::move(nonempty)});
    }
    }
    throw InternalError("unreachable atom kind");
}

namespace {

Formula nonempty_guard(const SpatialAtom& a) {
    return lia::lt(LinExpr(a.head()), LinExpr(a.tail()));
}

Formula disjoint(const SpatialAtom& a, const SpatialAtom& b) {
    return Formula::disj({lia::le(LinExpr(b.tail()), LinExpr(a.head())),
                          lia::le(LinExpr(a.tail()), LinExpr(b.head()))});
}

}  // namespace

Formula sep_constraints(std::span<const SpatialAtom> atoms) {
    std::vector<Formula> parts;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (atoms[i].is_emp()) throw InputError("sep_constraints requires non-emp atoms");
        for (std::size_t j = i + 1; j < atoms.size(); ++j) {
            const SpatialAtom& ai = atoms[i];
            const SpatialAtom& aj = atoms[j];
            std::vector<Formula> guards;
            if (ai.is_hls()) guards.push_back(nonempty_guard(ai));
            if (aj.is_hls()) guards.push_back(nonempty_guard(aj));
            Formula body = disjoint(ai, aj);
            if (guards.empty())
                parts.push_back(std::move(body));
            else
                parts.push_back(lia::implies(Formula::conj(std::move(guards)), std::move(body)));
        }
    }
    return Formula::conj(std::move(parts));
}

AbsResult abs_result(const SymbolicHeap& h) {
    const auto& atoms = h.spatial();
    std::vector<Formula> parts;
    parts.push_back(pure_to_lia(h.pure()));
    AbsResult result;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        parts.push_back(abs_atom(atoms[i]));
        result.nonempty_guards.emplace(i, nonempty_guard(atoms[i]));
    }
    parts.push_back(sep_constraints(atoms));
    result.formula = Formula::conj(std::move(parts));
    return result;
}

Formula abs(const SymbolicHeap& h) { return abs_result(h).formula; }

Formula eub_formula(const lia::Formula& pure, const SpatialAtom& hls_atom, const VarId& z) {
    if (!hls_atom.is_hls()) throw InputError("eub_formula requires a heap-list atom");
    std::set<VarId> used = pure.free_vars();
    hls_atom.collect_vars(used);
    if (used.count(z)) throw InputError("eub variable must be fresh: " + z);

    LinExpr lo(hls_atom.from());
    LinExpr hi(hls_atom.to());
    LinExpr zv = LinExpr::var(z);
    Formula span = lia::le(lo + 2, hi);

    if (hls_atom.bound().is_infinite()) {
        // A single chunk of the full span is always a scheme, so the
        // effective bound is the span itself.
        return Formula::conj({pure, span, lia::eq(lo + zv, hi)});
    }

    LinExpr cap(hls_atom.bound().term());
    Formula exact_two = Formula::conj({lia::eq(cap, 2), lia::eq(zv, 2), span, lia::cong(hi, lo, 2)});
    // z is realized by some scheme: either one chunk of the whole span or a
    // chunk of size z with at least one more chunk after it.
    Formula feasible = Formula::disj({lia::le(lo + zv + 2, hi), lia::eq(hi, lo + zv)});
    // No larger chunk size is realizable.
    Formula max_one = lia::implies(lia::le(zv + 1, cap),
                                   Formula::conj({lia::le(hi, lo + zv + 2), lia::ne(hi, lo + zv + 1)}));
    Formula max_two = lia::implies(lia::le(zv + 2, cap), lia::ne(hi, lo + zv + 2));
    Formula loose = Formula::conj({lia::lt(2, cap), lia::le(LinExpr(2), zv), lia::le(zv, cap),
                                   std::move(feasible), std::move(max_one), std::move(max_two)});
    return Formula::conj({pure, Formula::disj({std::move(exact_two), std::move(loose)})});
}

}  // namespace slah::abstraction
