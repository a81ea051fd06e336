// Copyright (c) slah contributors.
// SPDX-License-Identifier: Apache-2.0
#include "slah/entail.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <sstream>
#include <thread>

#include "slah/abstraction.hpp"

namespace slah {

using lia::Formula;
using lia::LinExpr;

lia::Formula TotalPreorder::constraint() const {
    std::vector<Formula> parts;
    for (const auto& cls : classes) {
        for (std::size_t i = 1; i < cls.size(); ++i)
            parts.push_back(lia::eq(LinExpr(cls.front()), LinExpr(cls[i])));
    }
    for (std::size_t c = 1; c < classes.size(); ++c)
        parts.push_back(lia::lt(LinExpr(classes[c - 1].front()), LinExpr(classes[c].front())));
    return Formula::conj(std::move(parts));
}

std::optional<std::size_t> TotalPreorder::class_of(const AddrTerm& t) const {
    for (std::size_t c = 0; c < classes.size(); ++c)
        for (const auto& member : classes[c])
            if (member == t) return c;
    return std::nullopt;
}

std::string TotalPreorder::to_string() const {
    std::ostringstream os;
    os << *this;
    return os.str();
}

std::ostream& operator<<(std::ostream& os, const TotalPreorder& po) {
    for (std::size_t c = 0; c < po.classes.size(); ++c) {
        if (c > 0) os << " < ";
        for (std::size_t i = 0; i < po.classes[c].size(); ++i) {
            if (i > 0) os << " = ";
            os << po.classes[c][i];
        }
    }
    return os;
}

namespace {

// Possible pairwise relations between two terms under a context. Used to
// discard most candidate classes without a solver call.
struct PairFacts {
    bool lt_possible = true;
    bool eq_possible = true;
    bool gt_possible = true;
};

class PreorderEnumerator {
  public:
    PreorderEnumerator(std::vector<AddrTerm> terms, const Formula& ctx, LiaSolver& solver,
                       const Deadline& deadline)
        : terms_(std::move(terms)), ctx_(ctx), solver_(solver), deadline_(deadline) {
        facts_.assign(terms_.size(), std::vector<PairFacts>(terms_.size()));
        for (std::size_t i = 0; i < terms_.size(); ++i) {
            for (std::size_t j = i + 1; j < terms_.size(); ++j) {
                PairFacts f;
                LinExpr a(terms_[i]);
                LinExpr b(terms_[j]);
                f.lt_possible = sat(lia::lt(a, b));
                f.eq_possible = sat(lia::eq(a, b));
                f.gt_possible = sat(lia::lt(b, a));
                facts_[i][j] = f;
                facts_[j][i] = PairFacts{f.gt_possible, f.eq_possible, f.lt_possible};
            }
        }
    }

    void run(const std::function<bool(const TotalPreorder&)>& yield) {
        std::vector<std::size_t> remaining(terms_.size());
        for (std::size_t i = 0; i < terms_.size(); ++i) remaining[i] = i;
        std::vector<std::vector<std::size_t>> classes;
        recurse(remaining, classes, yield);
    }

  private:
    bool sat(Formula f) {
        return check_sat(Formula::conj({ctx_, std::move(f)}), solver_, deadline_).has_value();
    }

    // Candidate next class S out of `remaining`: everything in S can be
    // equal, and everything left over can sit strictly above S.
    bool plausible(const std::vector<std::size_t>& s, const std::vector<std::size_t>& rest) const {
        for (std::size_t a : s) {
            for (std::size_t b : s)
                if (a < b && !facts_[a][b].eq_possible) return false;
            for (std::size_t r : rest)
                if (!facts_[a][r].lt_possible) return false;
        }
        return true;
    }

    Formula prefix_constraint(const std::vector<std::vector<std::size_t>>& classes,
                              const std::vector<std::size_t>& rest) const {
        std::vector<Formula> parts;
        for (const auto& cls : classes) {
            for (std::size_t i = 1; i < cls.size(); ++i)
                parts.push_back(lia::eq(LinExpr(terms_[cls.front()]), LinExpr(terms_[cls[i]])));
        }
        for (std::size_t c = 1; c < classes.size(); ++c)
            parts.push_back(
                lia::lt(LinExpr(terms_[classes[c - 1].front()]), LinExpr(terms_[classes[c].front()])));
        if (!classes.empty()) {
            for (std::size_t r : rest)
                parts.push_back(lia::lt(LinExpr(terms_[classes.back().front()]), LinExpr(terms_[r])));
        }
        return Formula::conj(std::move(parts));
    }

    // Returns false to abort the whole enumeration.
    bool recurse(const std::vector<std::size_t>& remaining,
                 std::vector<std::vector<std::size_t>>& classes,
                 const std::function<bool(const TotalPreorder&)>& yield) {
        if (deadline_expired(deadline_)) throw BackendError("preorder enumeration timed out");
        if (remaining.empty()) {
            TotalPreorder po;
            for (const auto& cls : classes) {
                std::vector<AddrTerm> terms;
                for (std::size_t i : cls) terms.push_back(terms_[i]);
                po.classes.push_back(std::move(terms));
            }
            return yield(po);
        }
        std::size_t r = remaining.size();
        for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << r); ++mask) {
            std::vector<std::size_t> chosen;
            std::vector<std::size_t> rest;
            for (std::size_t i = 0; i < r; ++i) {
                if (mask & (std::uint64_t{1} << i))
                    chosen.push_back(remaining[i]);
                else
                    rest.push_back(remaining[i]);
            }
            if (!plausible(chosen, rest)) continue;
            classes.push_back(chosen);
            if (!sat(prefix_constraint(classes, rest))) {
                classes.pop_back();
                continue;
            }
            bool keep_going = recurse(rest, classes, yield);
            classes.pop_back();
            if (!keep_going) return false;
        }
        return true;
    }

    std::vector<AddrTerm> terms_;
    const Formula& ctx_;
    LiaSolver& solver_;
    Deadline deadline_;
    std::vector<std::vector<PairFacts>> facts_;
};

}  // namespace

void enumerate_preorders(const std::set<AddrTerm>& terms, const Formula& ctx, LiaSolver& solver,
                         const std::function<bool(const TotalPreorder&)>& yield,
                         const Deadline& deadline) {
    if (terms.size() > 62) throw InputError("too many address terms to order");
    PreorderEnumerator e(std::vector<AddrTerm>(terms.begin(), terms.end()), ctx, solver, deadline);
    e.run(yield);
}

std::vector<TotalPreorder> compatible_preorders(const std::set<AddrTerm>& terms, const Formula& ctx,
                                                LiaSolver& solver, const Deadline& deadline) {
    std::vector<TotalPreorder> out;
    enumerate_preorders(
        terms, ctx, solver,
        [&](const TotalPreorder& po) {
            out.push_back(po);
            return true;
        },
        deadline);
    return out;
}

namespace {

Formula atoms_abs(const std::vector<SpatialAtom>& atoms) {
    std::vector<Formula> parts;
    for (const auto& a : atoms) parts.push_back(abstraction::abs_atom(a));
    parts.push_back(abstraction::sep_constraints(atoms));
    return Formula::conj(std::move(parts));
}

// Size constraint for one chunk: at least two cells, at most the list bound.
Formula chunk_size_ok(const LinExpr& size, const Bound& bound) {
    std::vector<Formula> parts{lia::le(LinExpr(2), size)};
    if (!bound.is_infinite()) parts.push_back(lia::le(size, LinExpr(bound.term())));
    return Formula::conj(std::move(parts));
}

class Matcher {
  public:
    Matcher(LiaSolver& solver, const EntailOptions& opts, FreshVars fresh)
        : solver_(solver), opts_(opts), fresh_(std::move(fresh)) {}

    bool seq(const Formula& ctx, const std::vector<SpatialAtom>& ante,
             const std::vector<SpatialAtom>& conseq, unsigned depth);
    bool one(const Formula& ctx, const std::vector<SpatialAtom>& ante, const SpatialAtom& b,
             unsigned depth);

    Invalidity invalidity;
    std::vector<VarId> fresh_names;
    std::size_t queries = 0;

  private:
    bool fail(std::string msg) {
        invalidity.trace.push_back(std::move(msg));
        return false;
    }

    bool fail_refuted(std::string msg, Formula refuted, StackModel model) {
        invalidity.refuted = std::move(refuted);
        invalidity.model = std::move(model);
        return fail(std::move(msg));
    }

    std::optional<StackModel> solve(const Formula& f) {
        ++queries;
        return check_sat(f, solver_, opts_.deadline);
    }

    bool sat(Formula f) { return solve(std::move(f)).has_value(); }

    bool entails(const Formula& hyp, Formula concl) {
        ++queries;
        return check_valid_implication(hyp, std::move(concl), solver_, opts_.deadline);
    }

    void guard(unsigned depth) {
        if (depth > opts_.max_depth)
            throw ResourceError("matching recursion exceeded the depth limit");
    }

    VarId make_fresh(const std::string& stem) {
        VarId v = fresh_.fresh(stem);
        fresh_names.push_back(v);
        return v;
    }

    bool hls_tail(const Formula& ctx, const std::vector<SpatialAtom>& ante,
                  const SpatialAtom& piece, unsigned depth);
    bool one_hls(const Formula& ctx, const std::vector<SpatialAtom>& ante, const SpatialAtom& b,
                 unsigned depth);

    struct SplitCase {
        std::string label;
        Formula cond;
        std::vector<SpatialAtom> prefix;  // replaces the split atom in front of the cut
        std::vector<SpatialAtom> suffix;  // remainder behind the cut
    };
    std::vector<SplitCase> split_cases(const SpatialAtom& atom, const AddrTerm& cut);

    LiaSolver& solver_;
    const EntailOptions& opts_;
    FreshVars fresh_;
};

bool Matcher::one(const Formula& ctx, const std::vector<SpatialAtom>& ante, const SpatialAtom& b,
                  unsigned depth) {
    guard(depth);
    if (ante.empty())
        return b.is_hls() && entails(ctx, lia::eq(LinExpr(b.head()), LinExpr(b.tail())));

    // Necessary span condition: the antecedent covers exactly the consequent
    // atom's footprint, with no internal gaps.
    std::vector<Formula> span;
    span.push_back(lia::eq(LinExpr(ante.front().head()), LinExpr(b.head())));
    span.push_back(lia::eq(LinExpr(ante.back().tail()), LinExpr(b.tail())));
    for (std::size_t i = 0; i + 1 < ante.size(); ++i)
        span.push_back(lia::eq(LinExpr(ante[i].tail()), LinExpr(ante[i + 1].head())));
    if (!entails(ctx, Formula::conj(std::move(span))))
        return fail("antecedent does not cover the consequent atom's span");

    switch (b.kind()) {
    case SpatialAtom::Kind::PointsTo:
        if (ante.size() != 1 || !ante.front().is_points_to())
            return fail("a points-to consequent needs exactly one points-to antecedent");
        if (!entails(ctx, lia::eq(LinExpr(ante.front().pto_value()), LinExpr(b.pto_value()))))
            return fail("points-to values differ");
        return true;
    case SpatialAtom::Kind::Blk: return true;
    case SpatialAtom::Kind::Hls: return one_hls(ctx, ante, b, depth);
    case SpatialAtom::Kind::Emp: break;
    }
    throw InternalError("consequent atom in matching must be non-emp");
}

bool Matcher::one_hls(const Formula& ctx, const std::vector<SpatialAtom>& ante,
                      const SpatialAtom& b, unsigned depth) {
    const SpatialAtom& first = ante.front();

    if (ante.size() == 1) {
        switch (first.kind()) {
        case SpatialAtom::Kind::PointsTo:
            return fail("a non-empty heap list needs at least two cells");
        case SpatialAtom::Kind::Blk:
            return fail("a block with arbitrary contents cannot prove a heap list");
        case SpatialAtom::Kind::Hls: {
            // The effective upper bound of the antecedent list must never
            // exceed the consequent's chunk bound.
            if (b.bound().is_infinite()) return true;
            VarId z = make_fresh("z");
            Formula eub = abstraction::eub_formula(Formula::tt(), first, z);
            Formula beyond = lia::le(LinExpr(b.bound().term()) + 1, LinExpr::var(z));
            Formula refutation = Formula::conj({ctx, eub, beyond});
            if (auto model = solve(refutation))
                return fail_refuted("an unfolding scheme exceeds the consequent's chunk bound",
                                    std::move(refutation), std::move(*model));
            return true;
        }
        case SpatialAtom::Kind::Emp: throw InternalError("emp atom in matching");
        }
    }

    // At least two antecedent atoms.
    switch (first.kind()) {
    case SpatialAtom::Kind::Blk:
        return fail("a block with arbitrary contents cannot start a heap list");
    case SpatialAtom::Kind::Hls: {
        // Split the consequent at the first atom's end and require both
        // pieces (composition of heap lists).
        std::vector<SpatialAtom> head{first};
        if (!one(ctx, head, SpatialAtom::hls(b.from(), first.to(), b.bound()), depth + 1))
            return false;
        std::vector<SpatialAtom> rest(ante.begin() + 1, ante.end());
        return one(ctx, rest, SpatialAtom::hls(first.to(), b.to(), b.bound()), depth + 1);
    }
    case SpatialAtom::Kind::PointsTo: {
        // The points-to is the header of the consequent's first chunk, so
        // its value is the chunk size and the chunk ends at head + value.
        LinExpr size(first.pto_value());
        if (!entails(ctx, chunk_size_ok(size, b.bound())))
            return fail("header value is not a valid chunk size for the consequent");
        AddrTerm landing = first.pto_addr() + first.pto_value();
        std::vector<Formula> covered;
        for (std::size_t j = 0; j < ante.size(); ++j) {
            const SpatialAtom& aj = ante[j];
            Formula at_end = lia::eq(LinExpr(landing), LinExpr(aj.tail()));
            covered.push_back(at_end);
            if (sat(Formula::conj({ctx, at_end}))) {
                Formula here = Formula::conj({ctx, at_end});
                std::vector<SpatialAtom> rest(ante.begin() + j + 1, ante.end());
                if (!hls_tail(here, rest, SpatialAtom::hls(landing, b.to(), b.bound()), depth + 1))
                    return false;
            }
            if (!aj.is_blk() && !aj.is_hls()) continue;
            Formula inside = Formula::conj({lia::lt(LinExpr(aj.head()), LinExpr(landing)),
                                            lia::lt(LinExpr(landing), LinExpr(aj.tail()))});
            covered.push_back(inside);
            if (!sat(Formula::conj({ctx, inside}))) continue;
            if (aj.is_blk())
                return fail("the next chunk header would land inside a block");
            // Landing strictly inside a heap-list atom: the remainder of
            // that list continues the consequent, and the landing point must
            // be a chunk start, never inside a chunk body.
            Formula here = Formula::conj({ctx, inside});
            std::vector<SpatialAtom> rest{SpatialAtom::hls(landing, aj.to(), aj.bound())};
            rest.insert(rest.end(), ante.begin() + j + 1, ante.end());
            if (!one(here, rest, SpatialAtom::hls(landing, b.to(), b.bound()), depth + 1))
                return false;

            VarId cs = make_fresh("c");
            VarId ce = make_fresh("c");
            AddrTerm chunk_start = AddrTerm::var(cs);
            AddrTerm chunk_end = AddrTerm::var(ce);
            std::vector<SpatialAtom> unfolded(ante.begin(), ante.begin() + j);
            unfolded.push_back(SpatialAtom::hls(aj.from(), chunk_start, aj.bound()));
            unfolded.push_back(SpatialAtom::points_to(chunk_start, AddrTerm::var(make_fresh("v"))));
            unfolded.push_back(SpatialAtom::blk(chunk_start + 1, chunk_end));
            unfolded.push_back(SpatialAtom::hls(chunk_end, aj.to(), aj.bound()));
            unfolded.insert(unfolded.end(), ante.begin() + j + 1, ante.end());
            Formula box = Formula::conj(
                {lia::le(LinExpr(aj.from()), LinExpr(chunk_start)),
                 lia::lt(LinExpr(chunk_start), LinExpr(landing)),
                 lia::lt(LinExpr(landing), LinExpr(chunk_end)),
                 lia::le(LinExpr(chunk_end), LinExpr(aj.to())),
                 chunk_size_ok(LinExpr(chunk_end) - LinExpr(chunk_start), aj.bound())});
            Formula mid_body = Formula::conj(
                {here, std::move(box), atoms_abs(unfolded)});
            if (auto model = solve(mid_body))
                return fail_refuted("the next chunk header may fall inside a chunk body",
                                    std::move(mid_body), std::move(*model));
        }
        if (!entails(ctx, Formula::disj(std::move(covered))))
            return fail("the first chunk's end is not covered by any case");
        return true;
    }
    case SpatialAtom::Kind::Emp: break;
    }
    throw InternalError("emp atom in matching");
}

bool Matcher::hls_tail(const Formula& ctx, const std::vector<SpatialAtom>& ante,
                       const SpatialAtom& piece, unsigned depth) {
    guard(depth);
    Formula empty = lia::eq(LinExpr(piece.head()), LinExpr(piece.tail()));
    if (ante.empty()) {
        if (entails(ctx, empty)) return true;
        return fail("consequent list remainder is non-empty but no atoms remain");
    }
    if (sat(Formula::conj({ctx, empty})))
        return fail("consequent list remainder may be empty while atoms remain");
    return one(ctx, ante, piece, depth);
}

std::vector<Matcher::SplitCase> Matcher::split_cases(const SpatialAtom& atom, const AddrTerm& cut) {
    std::vector<SplitCase> cases;
    if (atom.is_blk()) {
        SplitCase c;
        c.label = "block split";
        c.cond = Formula::tt();
        c.prefix = {SpatialAtom::blk(atom.from(), cut)};
        c.suffix = {SpatialAtom::blk(cut, atom.to())};
        cases.push_back(std::move(c));
        return cases;
    }

    const AddrTerm& lo = atom.from();
    const AddrTerm& hi = atom.to();
    const Bound& bound = atom.bound();

    {
        // The cut lands exactly between two chunks: both halves are
        // non-empty heap lists.
        SplitCase c;
        c.label = "chunk boundary";
        c.cond = Formula::conj(
            {abstraction::abs_plus_hls(lo, cut, bound), abstraction::abs_plus_hls(cut, hi, bound)});
        c.prefix = {SpatialAtom::hls(lo, cut, bound)};
        c.suffix = {SpatialAtom::hls(cut, hi, bound)};
        cases.push_back(std::move(c));
    }

    // The cut lands inside a chunk. The chunk's position in the list gives
    // four cases; within each, the cut is either right behind the header or
    // inside the chunk's body.
    struct Position {
        std::string label;
        bool list_before;
        bool list_after;
    };
    for (const Position& pos : {Position{"only chunk", false, false},
                                Position{"first chunk", false, true},
                                Position{"last chunk", true, false},
                                Position{"middle chunk", true, true}}) {
        AddrTerm start = pos.list_before ? AddrTerm::var(make_fresh("x")) : lo;
        VarId size_var = make_fresh("w");
        LinExpr size = LinExpr::var(size_var);
        AddrTerm end = start + AddrTerm::var(size_var);

        std::vector<Formula> shape{chunk_size_ok(size, bound)};
        if (pos.list_before) shape.push_back(abstraction::abs_plus_hls(lo, start, bound));
        if (pos.list_after)
            shape.push_back(abstraction::abs_plus_hls(end, hi, bound));
        else
            shape.push_back(lia::eq(LinExpr(end), LinExpr(hi)));

        std::vector<SpatialAtom> before;
        if (pos.list_before) before.push_back(SpatialAtom::hls(lo, start, bound));
        before.push_back(SpatialAtom::points_to(start, AddrTerm::var(size_var)));

        std::vector<SpatialAtom> after;
        if (pos.list_after) after.push_back(SpatialAtom::hls(end, hi, bound));

        {
            SplitCase c;
            c.label = pos.label + ", cut behind header";
            std::vector<Formula> cond = shape;
            cond.push_back(lia::eq(LinExpr(cut), LinExpr(start) + 1));
            c.cond = Formula::conj(std::move(cond));
            c.prefix = before;
            c.suffix = {SpatialAtom::blk(start + 1, end)};
            c.suffix.insert(c.suffix.end(), after.begin(), after.end());
            cases.push_back(std::move(c));
        }
        {
            SplitCase c;
            c.label = pos.label + ", cut inside body";
            std::vector<Formula> cond = shape;
            cond.push_back(lia::lt(LinExpr(start) + 1, LinExpr(cut)));
            cond.push_back(lia::lt(LinExpr(cut), LinExpr(end)));
            c.cond = Formula::conj(std::move(cond));
            c.prefix = before;
            c.prefix.push_back(SpatialAtom::blk(start + 1, cut));
            c.suffix = {SpatialAtom::blk(cut, end)};
            c.suffix.insert(c.suffix.end(), after.begin(), after.end());
            cases.push_back(std::move(c));
        }
    }
    return cases;
}

bool Matcher::seq(const Formula& ctx, const std::vector<SpatialAtom>& ante,
                  const std::vector<SpatialAtom>& conseq, unsigned depth) {
    guard(depth);
    if (deadline_expired(opts_.deadline)) throw BackendError("entailment timed out");
    if (conseq.empty()) {
        if (ante.empty()) return true;
        return fail("antecedent atoms remain after the consequent is exhausted");
    }
    if (conseq.size() == 1) return one(ctx, ante, conseq.front(), depth + 1);

    const SpatialAtom& b1 = conseq.front();
    AddrTerm cut = b1.tail();
    std::vector<SpatialAtom> rest_conseq(conseq.begin() + 1, conseq.end());
    std::vector<Formula> covered;

    for (std::size_t k = 0; k < ante.size(); ++k) {
        const SpatialAtom& ak = ante[k];
        Formula at_end = lia::eq(LinExpr(cut), LinExpr(ak.tail()));
        covered.push_back(at_end);
        if (sat(Formula::conj({ctx, at_end}))) {
            Formula here = Formula::conj({ctx, at_end});
            std::vector<SpatialAtom> prefix(ante.begin(), ante.begin() + k + 1);
            std::vector<SpatialAtom> suffix(ante.begin() + k + 1, ante.end());
            if (!one(here, prefix, b1, depth + 1)) return false;
            if (!seq(here, suffix, rest_conseq, depth + 1)) return false;
        }

        Formula inside = Formula::conj(
            {lia::lt(LinExpr(ak.head()), LinExpr(cut)), lia::lt(LinExpr(cut), LinExpr(ak.tail()))});
        covered.push_back(inside);
        if (!ak.is_blk() && !ak.is_hls()) continue;
        if (!sat(Formula::conj({ctx, inside}))) continue;
        Formula base = Formula::conj({ctx, inside});
        for (const SplitCase& sc : split_cases(ak, cut)) {
            Formula here = Formula::conj({base, sc.cond});
            if (!sat(here)) continue;
            std::vector<SpatialAtom> prefix(ante.begin(), ante.begin() + k);
            prefix.insert(prefix.end(), sc.prefix.begin(), sc.prefix.end());
            std::vector<SpatialAtom> suffix = sc.suffix;
            suffix.insert(suffix.end(), ante.begin() + k + 1, ante.end());
            if (!one(here, prefix, b1, depth + 1))
                return fail("case failed: " + sc.label);
            if (!seq(here, suffix, rest_conseq, depth + 1))
                return fail("case failed: " + sc.label);
        }
    }

    if (!entails(ctx, Formula::disj(std::move(covered))))
        return fail("the first consequent atom's end is not covered by any case");
    return true;
}

}  // namespace

std::variant<OrderedQuery, bool> normalize_ordered(const TotalPreorder& po,
                                                   const lia::Formula& abs_ante,
                                                   const std::vector<SpatialAtom>& ante,
                                                   const std::vector<SpatialAtom>& conseq,
                                                   LiaSolver& solver, const Deadline& deadline) {
    Formula ctx = Formula::conj({po.constraint(), abs_ante});

    auto positions = [&](const SpatialAtom& a) {
        auto head = po.class_of(a.head());
        auto tail = po.class_of(a.tail());
        if (!head || !tail)
            throw InputError("preorder does not cover the query's address terms");
        return std::pair(*head, *tail);
    };

    // Heap lists whose endpoints share a class denote empty heaps.
    auto strip_empty = [&](const std::vector<SpatialAtom>& atoms) {
        std::vector<SpatialAtom> kept;
        for (const auto& a : atoms) {
            auto [h, t] = positions(a);
            if (a.is_hls() && h == t) continue;
            kept.push_back(a);
        }
        return kept;
    };
    std::vector<SpatialAtom> ante2 = strip_empty(ante);
    std::vector<SpatialAtom> conseq2 = strip_empty(conseq);

    // The abstraction of the consequent side must follow from the context.
    {
        std::vector<Formula> parts;
        for (const auto& b : conseq) parts.push_back(abstraction::abs_atom(b));
        parts.push_back(abstraction::sep_constraints(conseq));
        if (!check_valid_implication(ctx, Formula::conj(std::move(parts)), solver, deadline))
            return false;
    }

    auto sort_side = [&](std::vector<SpatialAtom>& atoms, bool is_antecedent) {
        for (const auto& a : atoms) {
            auto [h, t] = positions(a);
            if (h >= t) {
                if (is_antecedent)
                    throw InternalError("compatible preorder orders an antecedent atom backwards");
                return false;
            }
        }
        std::stable_sort(atoms.begin(), atoms.end(), [&](const auto& a, const auto& b) {
            return positions(a).first < positions(b).first;
        });
        for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
            if (positions(atoms[i]).second > positions(atoms[i + 1]).first) {
                if (is_antecedent)
                    throw InternalError("compatible preorder overlaps antecedent atoms");
                return false;
            }
        }
        return true;
    };
    if (!sort_side(ante2, true)) return false;
    if (!sort_side(conseq2, false)) return false;

    if (conseq2.empty()) return ante2.empty();
    return OrderedQuery{std::move(ctx), std::move(ante2), std::move(conseq2)};
}

namespace {

FreshVars fresh_for(const std::vector<SpatialAtom>& ante, const std::vector<SpatialAtom>& conseq,
                    const Formula& ctx) {
    std::set<VarId> used = ctx.free_vars();
    for (const auto& a : ante) a.collect_vars(used);
    for (const auto& a : conseq) a.collect_vars(used);
    return FreshVars(std::move(used));
}

}  // namespace

bool match_one(const lia::Formula& ctx, const std::vector<SpatialAtom>& ante,
               const SpatialAtom& consequent_atom, LiaSolver& solver, const EntailOptions& opts) {
    Matcher m(solver, opts, fresh_for(ante, {consequent_atom}, ctx));
    return m.one(ctx, ante, consequent_atom, 0);
}

bool match_seq(const OrderedQuery& q, LiaSolver& solver, const EntailOptions& opts) {
    Matcher m(solver, opts, fresh_for(q.antecedent, q.consequent, q.context));
    return m.seq(q.context, q.antecedent, q.consequent, 0);
}

std::vector<SubQuery> pre_decompose(const std::vector<SpatialAtom>& ante,
                                    const std::vector<SpatialAtom>& conseq,
                                    const lia::Formula& abs_ante, LiaSolver& solver,
                                    const Deadline& deadline) {
    std::vector<bool> used_a(ante.size(), false);
    std::vector<bool> used_c(conseq.size(), false);
    std::vector<SubQuery> subs;

    auto entailed_eq = [&](const AddrTerm& s, const AddrTerm& t) {
        return check_valid_implication(abs_ante, lia::eq(LinExpr(s), LinExpr(t)), solver, deadline);
    };

    for (std::size_t ci = 0; ci < conseq.size(); ++ci) {
        if (!conseq[ci].is_blk()) continue;
        std::vector<std::size_t> chain;
        std::vector<bool> in_chain(ante.size(), false);
        auto extend = [&](auto&& self, const AddrTerm& at) -> bool {
            if (chain.size() >= 2 && entailed_eq(at, conseq[ci].tail())) return true;
            for (std::size_t i = 0; i < ante.size(); ++i) {
                if (used_a[i] || in_chain[i]) continue;
                if (!entailed_eq(at, ante[i].head())) continue;
                chain.push_back(i);
                in_chain[i] = true;
                if (self(self, ante[i].tail())) return true;
                in_chain[i] = false;
                chain.pop_back();
            }
            return false;
        };
        if (extend(extend, conseq[ci].head())) {
            SubQuery sub;
            for (std::size_t i : chain) {
                sub.antecedent.push_back(ante[i]);
                used_a[i] = true;
            }
            sub.consequent = {conseq[ci]};
            used_c[ci] = true;
            subs.push_back(std::move(sub));
        }
    }

    SubQuery residual;
    for (std::size_t i = 0; i < ante.size(); ++i)
        if (!used_a[i]) residual.antecedent.push_back(ante[i]);
    for (std::size_t i = 0; i < conseq.size(); ++i)
        if (!used_c[i]) residual.consequent.push_back(conseq[i]);
    subs.push_back(std::move(residual));
    return subs;
}

namespace {

struct PreorderCheckResult {
    bool valid = true;
    Invalidity why;
};

PreorderCheckResult check_one_preorder(const TotalPreorder& po, const Formula& abs_ante,
                                       const SubQuery& sub, LiaSolver& solver,
                                       const EntailOptions& opts, EntailStats* stats,
                                       std::mutex* stats_mutex) {
    PreorderCheckResult result;
    auto normalized =
        normalize_ordered(po, abs_ante, sub.antecedent, sub.consequent, solver, opts.deadline);
    if (std::holds_alternative<bool>(normalized)) {
        result.valid = std::get<bool>(normalized);
        if (!result.valid)
            result.why.trace.push_back("ordered normalization refuted the entailment");
    } else {
        const OrderedQuery& q = std::get<OrderedQuery>(normalized);
        Matcher m(solver, opts, fresh_for(q.antecedent, q.consequent, q.context));
        result.valid = m.seq(q.context, q.antecedent, q.consequent, 0);
        if (!result.valid) result.why = std::move(m.invalidity);
        if (stats) {
            std::lock_guard<std::mutex> lock(*stats_mutex);
            stats->solver_queries += m.queries;
            stats->fresh_names.insert(stats->fresh_names.end(), m.fresh_names.begin(),
                                      m.fresh_names.end());
        }
    }
    if (!result.valid) result.why.preorder = po;
    return result;
}

}  // namespace

EntailResult decide_entail(const SymbolicHeap& ante, const SymbolicHeap& conseq, LiaSolver& solver,
                           const EntailOptions& opts) {
    if (!conseq.is_quantifier_free())
        throw InputError("entailment consequent must be quantifier-free");
    {
        std::set<VarId> afv = ante.fv();
        for (const auto& v : conseq.fv())
            if (!afv.count(v))
                throw InputError("consequent variable not free in the antecedent: " + v);
    }

    SymbolicHeap body = ante.qf();
    Formula abs_ante = abstraction::abs(body);
    if (!check_sat(abs_ante, solver, opts.deadline).has_value())
        return EntailResult{true, std::nullopt};  // unsatisfiable antecedent

    Formula abs_conseq = abstraction::abs(conseq);
    Formula refutation = Formula::conj({abs_ante, Formula::neg(abs_conseq)});
    if (auto model = check_sat(refutation, solver, opts.deadline)) {
        Invalidity why;
        why.model = std::move(*model);
        why.refuted = std::move(refutation);
        why.trace.push_back("the antecedent's abstraction does not entail the consequent's");
        return EntailResult{false, std::move(why)};
    }

    std::vector<SubQuery> subs;
    if (opts.heuristics) {
        subs = pre_decompose(body.spatial(), conseq.spatial(), abs_ante, solver, opts.deadline);
    } else {
        subs.push_back(SubQuery{body.spatial(), conseq.spatial()});
    }

    std::mutex stats_mutex;
    for (const SubQuery& sub : subs) {
        if (sub.antecedent.empty() && sub.consequent.empty()) continue;
        std::set<AddrTerm> terms = address_terms(sub.antecedent);
        std::set<AddrTerm> cterms = address_terms(sub.consequent);
        terms.insert(cterms.begin(), cterms.end());

        std::vector<TotalPreorder> preorders =
            compatible_preorders(terms, abs_ante, solver, opts.deadline);
        if (opts.stats) opts.stats->preorders_checked += preorders.size();

        std::optional<Invalidity> failure;
        if (opts.jobs <= 1 || preorders.size() < 2) {
            for (const TotalPreorder& po : preorders) {
                PreorderCheckResult r = check_one_preorder(po, abs_ante, sub, solver, opts,
                                                           opts.stats, &stats_mutex);
                if (opts.preorder_observer) opts.preorder_observer(po, r.valid);
                if (!r.valid) {
                    failure = std::move(r.why);
                    break;
                }
            }
        } else {
            // First refutation in enumeration order wins; workers skip
            // indices behind the current best refutation.
            std::atomic<std::size_t> next{0};
            std::atomic<std::size_t> first_invalid{preorders.size()};
            std::vector<std::optional<Invalidity>> slots(preorders.size());
            std::mutex observer_mutex;
            std::exception_ptr error;
            std::mutex error_mutex;
            auto worker = [&]() {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= preorders.size()) return;
                    if (i > first_invalid.load()) continue;
                    try {
                        PreorderCheckResult r = check_one_preorder(
                            preorders[i], abs_ante, sub, solver, opts, opts.stats, &stats_mutex);
                        if (opts.preorder_observer) {
                            std::lock_guard<std::mutex> lock(observer_mutex);
                            opts.preorder_observer(preorders[i], r.valid);
                        }
                        if (!r.valid) {
                            slots[i] = std::move(r.why);
                            std::size_t seen = first_invalid.load();
                            while (i < seen && !first_invalid.compare_exchange_weak(seen, i)) {
                            }
                        }
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(error_mutex);
                        if (!error) error = std::current_exception();
                        first_invalid.store(0);  // stop other workers quickly
                        return;
                    }
                }
            };
            std::vector<std::thread> pool;
            unsigned n = std::min<unsigned>(opts.jobs, preorders.size());
            pool.reserve(n);
            for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
            if (error) std::rethrow_exception(error);
            std::size_t idx = first_invalid.load();
            if (idx < preorders.size() && slots[idx]) failure = std::move(*slots[idx]);
        }

        if (failure) return EntailResult{false, std::move(failure)};
    }
    return EntailResult{true, std::nullopt};
}

}  // namespace slah
