// Copyright (c) slah contributors.
// SPDX-License-Identifier: Apache-2.0
#include "slah/oracle.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace slah::oracle {

namespace {

// Footprint and content checks for one spatial list under a fixed stack.
// Every atom claims exactly its cells; the claims must tile the heap.
class RegionChecker {
  public:
    explicit RegionChecker(const WitnessHeap& heap) : heap_(heap) {}

    bool claim(std::uint64_t cell) {
        if (!heap_.contains(cell)) return false;
        return claimed_.insert(cell).second;
    }

    bool claim_range(std::uint64_t from, std::uint64_t to) {
        for (std::uint64_t a = from; a < to; ++a)
            if (!claim(a)) return false;
        return true;
    }

    bool exact() const { return claimed_.size() == heap_.size(); }

  private:
    const WitnessHeap& heap_;
    std::set<std::uint64_t> claimed_;
};

bool hls_region_holds(const WitnessHeap& h, std::uint64_t from, std::uint64_t to,
                      std::optional<std::uint64_t> cap) {
    std::uint64_t at = from;
    while (at < to) {
        if (!h.contains(at)) return false;
        std::uint64_t size = h.at(at);
        if (size < 2) return false;
        if (cap && size > *cap) return false;
        if (at + size > to) return false;
        at += size;
    }
    return at == to;
}

bool body_holds(const StackModel& s, const WitnessHeap& h, const PureFormula& pure,
                const std::vector<SpatialAtom>& atoms) {
    if (!pure.evaluate(s)) return false;
    RegionChecker regions(h);
    for (const auto& atom : atoms) {
        switch (atom.kind()) {
        case SpatialAtom::Kind::Emp: continue;
        case SpatialAtom::Kind::PointsTo: {
            std::uint64_t cell = atom.pto_addr().evaluate(s);
            if (!regions.claim(cell)) return false;
            if (h.at(cell) != atom.pto_value().evaluate(s)) return false;
            break;
        }
        case SpatialAtom::Kind::Blk: {
            std::uint64_t from = atom.from().evaluate(s);
            std::uint64_t to = atom.to().evaluate(s);
            if (from >= to) return false;
            if (!regions.claim_range(from, to)) return false;
            break;
        }
        case SpatialAtom::Kind::Hls: {
            std::uint64_t from = atom.from().evaluate(s);
            std::uint64_t to = atom.to().evaluate(s);
            if (from > to) return false;
            if (!regions.claim_range(from, to)) return false;
            std::optional<std::uint64_t> cap;
            if (!atom.bound().is_infinite()) cap = atom.bound().term().evaluate(s);
            if (!hls_region_holds(h, from, to, cap)) return false;
            break;
        }
        }
    }
    return regions.exact();
}

std::uint64_t derived_exists_bound(const StackModel& s, const WitnessHeap& h,
                                   const SymbolicHeap& f) {
    std::uint64_t m = 0;
    for (const auto& [v, n] : s) m = std::max(m, n);
    for (const auto& [a, n] : h.cells()) m = std::max({m, a, n});
    auto scan_term = [&](const AddrTerm& t) { m = std::max(m, t.constant()); };
    for (const auto& a : f.pure().atoms) {
        scan_term(a.lhs);
        scan_term(a.rhs);
    }
    for (const auto& atom : f.spatial()) {
        if (atom.is_emp()) continue;
        scan_term(atom.head());
        scan_term(atom.tail());
        if (atom.is_points_to()) scan_term(atom.pto_value());
        if (atom.is_hls() && !atom.bound().is_infinite()) scan_term(atom.bound().term());
    }
    return m + 2;
}

// All decompositions of `span` into parts within [2, cap], leftmost part
// first. The callback returns false to stop.
bool enumerate_schemes(std::uint64_t span, std::optional<std::uint64_t> cap,
                       std::vector<std::uint64_t>& current,
                       const std::function<bool(const std::vector<std::uint64_t>&)>& yield) {
    if (span == 0) return yield(current);
    std::uint64_t hi = cap ? std::min(*cap, span) : span;
    for (std::uint64_t size = 2; size <= hi; ++size) {
        if (span - size == 1) continue;  // a remainder of one cell can never be filled
        current.push_back(size);
        bool keep_going = enumerate_schemes(span - size, cap, current, yield);
        current.pop_back();
        if (!keep_going) return false;
    }
    return true;
}

std::optional<std::vector<std::uint64_t>> first_scheme(std::uint64_t span,
                                                       std::optional<std::uint64_t> cap) {
    std::optional<std::vector<std::uint64_t>> found;
    std::vector<std::uint64_t> current;
    enumerate_schemes(span, cap, current, [&](const std::vector<std::uint64_t>& scheme) {
        found = scheme;
        return false;
    });
    return found;
}

}  // namespace

bool holds(const StackModel& s, const WitnessHeap& h, const SymbolicHeap& f,
           std::optional<std::uint64_t> exists_bound) {
    if (f.existentials().empty()) return body_holds(s, h, f.pure(), f.spatial());
    std::uint64_t bound = exists_bound ? *exists_bound : derived_exists_bound(s, h, f);
    std::vector<VarId> vars(f.existentials().begin(), f.existentials().end());
    StackModel extended = s;
    std::function<bool(std::size_t)> enumerate = [&](std::size_t i) {
        if (i == vars.size()) return body_holds(extended, h, f.pure(), f.spatial());
        for (std::uint64_t n = 0; n <= bound; ++n) {
            extended[vars[i]] = n;
            if (enumerate(i + 1)) return true;
        }
        extended.erase(vars[i]);
        return false;
    };
    return enumerate(0);
}

namespace {

// Backtracking stack enumeration with pure-atom pruning: an atom is checked
// as soon as all its variables have values.
class StackSearch {
  public:
    StackSearch(const SymbolicHeap& f, std::uint64_t addr_max)
        : formula_(f), addr_max_(addr_max) {
        std::set<VarId> vs = f.all_vars();
        vars_.assign(vs.begin(), vs.end());
        ready_.resize(vars_.size());
        std::set<VarId> assigned;
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            assigned.insert(vars_[i]);
            for (const auto& atom : f.pure().atoms) {
                std::set<VarId> used;
                atom.lhs.collect_vars(used);
                atom.rhs.collect_vars(used);
                bool all = std::all_of(used.begin(), used.end(),
                                       [&](const VarId& v) { return assigned.count(v) > 0; });
                bool fresh = used.count(vars_[i]) > 0 || (used.empty() && i == 0);
                if (all && fresh) ready_[i].push_back(&atom);
            }
        }
    }

    // Visits every stack satisfying the pure part; the visitor returns true
    // to stop the search.
    bool run(const std::function<bool(const StackModel&)>& visit) {
        if (formula_.pure().contradiction) return false;
        if (vars_.empty()) return formula_.pure().evaluate(stack_) && visit(stack_);
        return descend(0, visit);
    }

  private:
    bool descend(std::size_t i, const std::function<bool(const StackModel&)>& visit) {
        for (std::uint64_t n = 0; n <= addr_max_; ++n) {
            stack_[vars_[i]] = n;
            bool ok = true;
            for (const PureAtom* atom : ready_[i])
                if (!atom->evaluate(stack_)) {
                    ok = false;
                    break;
                }
            if (!ok) continue;
            if (i + 1 == vars_.size()) {
                if (visit(stack_)) return true;
            } else if (descend(i + 1, visit)) {
                return true;
            }
        }
        stack_.erase(vars_[i]);
        return false;
    }

    const SymbolicHeap& formula_;
    std::uint64_t addr_max_;
    std::vector<VarId> vars_;
    std::vector<std::vector<const PureAtom*>> ready_;
    StackModel stack_;
};

struct AtomRegion {
    std::uint64_t from = 0;
    std::uint64_t to = 0;  // exclusive
};

// Evaluates atom footprints and checks pairwise disjointness; heap lists may
// be empty. Returns nothing if the atoms cannot tile under this stack.
std::optional<std::vector<AtomRegion>> atom_regions(const StackModel& s,
                                                    const std::vector<SpatialAtom>& atoms) {
    std::vector<AtomRegion> regions;
    regions.reserve(atoms.size());
    for (const auto& atom : atoms) {
        AtomRegion r;
        switch (atom.kind()) {
        case SpatialAtom::Kind::Emp: break;
        case SpatialAtom::Kind::PointsTo:
            r.from = atom.pto_addr().evaluate(s);
            r.to = r.from + 1;
            break;
        case SpatialAtom::Kind::Blk:
            r.from = atom.from().evaluate(s);
            r.to = atom.to().evaluate(s);
            if (r.from >= r.to) return std::nullopt;
            break;
        case SpatialAtom::Kind::Hls:
            r.from = atom.from().evaluate(s);
            r.to = atom.to().evaluate(s);
            if (r.from > r.to) return std::nullopt;
            break;
        }
        regions.push_back(r);
    }
    for (std::size_t i = 0; i < regions.size(); ++i)
        for (std::size_t j = i + 1; j < regions.size(); ++j)
            if (regions[i].from < regions[j].to && regions[j].from < regions[i].to)
                return std::nullopt;
    return regions;
}

}  // namespace

std::optional<SatWitness> brute_sat(const SymbolicHeap& f, const Bounds& b) {
    StackSearch search(f, b.addr_max);
    std::optional<SatWitness> result;
    search.run([&](const StackModel& s) {
        auto regions = atom_regions(s, f.spatial());
        if (!regions) return false;
        WitnessHeap heap;
        for (std::size_t i = 0; i < f.spatial().size(); ++i) {
            const SpatialAtom& atom = f.spatial()[i];
            const AtomRegion& r = (*regions)[i];
            switch (atom.kind()) {
            case SpatialAtom::Kind::Emp: break;
            case SpatialAtom::Kind::PointsTo:
                heap.set(r.from, atom.pto_value().evaluate(s));
                break;
            case SpatialAtom::Kind::Blk:
                for (std::uint64_t a = r.from; a < r.to; ++a) heap.set(a, 1);
                break;
            case SpatialAtom::Kind::Hls: {
                if (r.from == r.to) break;
                std::optional<std::uint64_t> cap;
                if (!atom.bound().is_infinite()) cap = atom.bound().term().evaluate(s);
                auto scheme = first_scheme(r.to - r.from, cap);
                if (!scheme) return false;
                std::uint64_t at = r.from;
                for (std::uint64_t size : *scheme) {
                    heap.set(at, size);
                    for (std::uint64_t a = at + 1; a < at + size; ++a) heap.set(a, 1);
                    at += size;
                }
                break;
            }
            }
        }
        if (!body_holds(s, heap, f.pure(), f.spatial())) return false;
        result = SatWitness{s, std::move(heap)};
        return true;
    });
    return result;
}

namespace {

// Heap enumeration for the counterexample search: pick a scheme for every
// heap list, then enumerate values over the observable free cells.
class AnteHeapEnumerator {
  public:
    AnteHeapEnumerator(const StackModel& s, const std::vector<SpatialAtom>& atoms,
                       const std::vector<AtomRegion>& regions, const std::set<std::uint64_t>& observable,
                       std::uint64_t value_max, std::uint64_t& budget)
        : stack_(s), atoms_(atoms), regions_(regions), observable_(observable),
          value_max_(value_max), budget_(budget) {}

    bool run(const std::function<bool(const WitnessHeap&)>& visit) {
        visit_ = &visit;
        return pick_scheme(0);
    }

  private:
    bool pick_scheme(std::size_t i) {
        if (i == atoms_.size()) return enumerate_values();
        const SpatialAtom& atom = atoms_[i];
        const AtomRegion& r = regions_[i];
        if (!atom.is_hls() || r.from == r.to) {
            fix_atom(atom, r);
            bool stop = pick_scheme(i + 1);
            unfix_atom(atom, r);
            return stop;
        }
        std::optional<std::uint64_t> cap;
        if (!atom.bound().is_infinite()) cap = atom.bound().term().evaluate(stack_);
        bool stop = false;
        std::vector<std::uint64_t> current;
        enumerate_schemes(r.to - r.from, cap, current, [&](const std::vector<std::uint64_t>& sch) {
            std::uint64_t at = r.from;
            std::vector<std::uint64_t> headers;
            for (std::uint64_t size : sch) {
                fixed_[at] = size;
                headers.push_back(at);
                for (std::uint64_t a = at + 1; a < at + size; ++a) push_body_cell(a);
                at += size;
            }
            stop = pick_scheme(i + 1);
            at = r.from;
            for (std::uint64_t size : sch) {
                fixed_.erase(at);
                for (std::uint64_t a = at + 1; a < at + size; ++a) pop_body_cell(a);
                at += size;
            }
            return !stop;
        });
        return stop;
    }

    void fix_atom(const SpatialAtom& atom, const AtomRegion& r) {
        if (atom.is_points_to()) {
            fixed_[r.from] = atom.pto_value().evaluate(stack_);
        } else if (atom.is_blk()) {
            for (std::uint64_t a = r.from; a < r.to; ++a) push_body_cell(a);
        }
    }

    void unfix_atom(const SpatialAtom& atom, const AtomRegion& r) {
        if (atom.is_points_to()) {
            fixed_.erase(r.from);
        } else if (atom.is_blk()) {
            for (std::uint64_t a = r.from; a < r.to; ++a) pop_body_cell(a);
        }
    }

    void push_body_cell(std::uint64_t a) {
        if (observable_.count(a))
            free_cells_.push_back(a);
        else
            fixed_[a] = 1;
    }

    void pop_body_cell(std::uint64_t a) {
        if (observable_.count(a))
            free_cells_.pop_back();
        else
            fixed_.erase(a);
    }

    bool enumerate_values() {
        WitnessHeap heap(fixed_);
        return assign_free(0, heap);
    }

    bool assign_free(std::size_t i, WitnessHeap& heap) {
        if (i == free_cells_.size()) {
            if (budget_ == 0) return true;  // out of budget: stop the search
            --budget_;
            return (*visit_)(heap);
        }
        for (std::uint64_t v = 1; v <= value_max_; ++v) {
            heap.set(free_cells_[i], v);
            if (assign_free(i + 1, heap)) return true;
        }
        return false;
    }

    const StackModel& stack_;
    const std::vector<SpatialAtom>& atoms_;
    const std::vector<AtomRegion>& regions_;
    const std::set<std::uint64_t>& observable_;
    std::uint64_t value_max_;
    std::uint64_t& budget_;
    std::map<std::uint64_t, std::uint64_t> fixed_;
    std::vector<std::uint64_t> free_cells_;
    const std::function<bool(const WitnessHeap&)>* visit_ = nullptr;
};

}  // namespace

std::optional<Counterexample> brute_entail(const SymbolicHeap& ante, const SymbolicHeap& conseq,
                                           const Bounds& b, std::uint64_t heap_budget) {
    if (!conseq.is_quantifier_free())
        throw InputError("entailment consequent must be quantifier-free");
    SymbolicHeap ante_body = ante.qf();

    std::optional<Counterexample> found;
    std::uint64_t budget = heap_budget;
    StackSearch search(ante, b.addr_max);
    search.run([&](const StackModel& s) {
        if (budget == 0) return true;
        auto regions = atom_regions(s, ante_body.spatial());
        if (!regions) return false;

        // The heap domain is fixed by the stack, whatever the cell values:
        // when the consequent's pure part, footprint shapes or total domain
        // already disagree, any single candidate heap refutes it.
        bool values_matter = conseq.pure().evaluate(s);
        if (values_matter) {
            auto conseq_regions = atom_regions(s, conseq.spatial());
            if (!conseq_regions) {
                values_matter = false;  // shape or disjointness already fails
            } else {
                std::set<std::uint64_t> ante_dom;
                for (const auto& r : *regions)
                    for (std::uint64_t a = r.from; a < r.to; ++a) ante_dom.insert(a);
                std::set<std::uint64_t> conseq_dom;
                for (const auto& r : *conseq_regions)
                    for (std::uint64_t a = r.from; a < r.to; ++a) conseq_dom.insert(a);
                if (ante_dom != conseq_dom) values_matter = false;
            }
        }

        std::set<std::uint64_t> observable;
        if (values_matter) {
            for (const auto& atom : conseq.spatial()) {
                if (atom.is_points_to()) {
                    observable.insert(atom.pto_addr().evaluate(s));
                } else if (atom.is_hls()) {
                    std::uint64_t from = atom.from().evaluate(s);
                    std::uint64_t to = atom.to().evaluate(s);
                    for (std::uint64_t a = from; a < to && a - from <= 4 * b.addr_max; ++a)
                        observable.insert(a);
                }
            }
        }

        AnteHeapEnumerator heaps(s, ante_body.spatial(), *regions, observable, b.value_max, budget);
        return heaps.run([&](const WitnessHeap& h) {
            if (body_holds(s, h, conseq.pure(), conseq.spatial())) return false;
            if (!body_holds(s, h, ante_body.pure(), ante_body.spatial())) return false;
            found = Counterexample{s, h};
            return true;
        });
    });
    return found;
}

namespace {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : engine_() % n; }
    bool chance(std::uint64_t k, std::uint64_t n) { return below(n) < k; }

  private:
    std::mt19937_64 engine_;
};

AddrTerm random_term(Rng& rng, const std::vector<VarId>& vars, std::uint64_t max_const) {
    std::uint64_t roll = rng.below(10);
    auto var = [&]() { return AddrTerm::var(vars[rng.below(vars.size())]); };
    if (roll < 6) return var();
    if (roll < 8) return var() + AddrTerm(1 + rng.below(max_const));
    if (roll < 9) return AddrTerm(rng.below(max_const + 1));
    return var() + var();
}

VarId unused_name(const std::string& stem, std::set<VarId>& used) {
    for (std::uint64_t i = 0;; ++i) {
        VarId v = stem + std::to_string(i);
        if (used.insert(v).second) return v;
    }
}

}  // namespace

SymbolicHeap unfold_hls_once(const SymbolicHeap& f) {
    std::set<VarId> used = f.all_vars();
    PureFormula pure = f.pure();
    std::vector<SpatialAtom> atoms;
    for (const auto& atom : f.spatial()) {
        if (!atom.is_hls()) {
            atoms.push_back(atom);
            continue;
        }
        // One unfolding step: a header holding the chunk size, the chunk
        // body, then the rest of the list from a fresh boundary.
        VarId size = unused_name("w", used);
        VarId next = unused_name("u", used);
        AddrTerm size_term = AddrTerm::var(size);
        AddrTerm next_term = AddrTerm::var(next);
        pure.add(AddrTerm(2), CmpOp::Le, size_term);
        if (!atom.bound().is_infinite()) pure.add(size_term, CmpOp::Le, atom.bound().term());
        pure.add(atom.from() + size_term, CmpOp::Eq, next_term);
        atoms.push_back(SpatialAtom::points_to(atom.from(), size_term));
        atoms.push_back(SpatialAtom::blk(atom.from() + AddrTerm(1), next_term));
        atoms.push_back(SpatialAtom::hls(next_term, atom.to(), atom.bound()));
    }
    return SymbolicHeap(std::move(pure), std::move(atoms), f.existentials());
}

SymbolicHeap random_formula(std::uint64_t seed, const GenParams& params) {
    Rng rng(seed);
    std::vector<VarId> vars = params.var_pool;
    if (vars.empty()) {
        std::size_t count = 1 + rng.below(std::max(1u, params.max_vars));
        for (std::size_t i = 1; i <= count; ++i) vars.push_back("x" + std::to_string(i));
    }
    std::uint64_t max_const = std::max<std::uint64_t>(1, params.max_const);

    PureFormula pure;
    std::size_t pure_count = rng.below(3);
    for (std::size_t i = 0; i < pure_count; ++i) {
        CmpOp op = static_cast<CmpOp>(rng.below(4));
        pure.add(random_term(rng, vars, max_const), op, random_term(rng, vars, max_const));
    }

    std::vector<SpatialAtom> atoms;
    std::size_t atom_count = rng.below(params.max_atoms + 1);
    for (std::size_t i = 0; i < atom_count; ++i) {
        std::uint64_t roll = rng.below(10);
        if (roll < 4) {
            atoms.push_back(SpatialAtom::points_to(random_term(rng, vars, max_const),
                                                   random_term(rng, vars, max_const)));
        } else if (roll < 7) {
            atoms.push_back(SpatialAtom::blk(random_term(rng, vars, max_const),
                                             random_term(rng, vars, max_const)));
        } else {
            Bound bound = Bound::infinity();
            std::uint64_t b = rng.below(5);
            if (b < 2) {
                bound = Bound::infinity();
            } else if (b < 4) {
                bound = Bound(AddrTerm(2 + rng.below(std::max<std::uint64_t>(1, max_const - 1))));
            } else {
                bound = Bound(AddrTerm::var(vars[rng.below(vars.size())]));
            }
            atoms.push_back(SpatialAtom::hls(random_term(rng, vars, max_const),
                                             random_term(rng, vars, max_const), bound));
        }
    }

    std::set<VarId> existentials;
    if (params.allow_existential && vars.size() >= 2 && rng.chance(1, 4))
        existentials.insert(vars[rng.below(vars.size())]);

    SymbolicHeap result(std::move(pure), std::move(atoms), std::move(existentials));
    for (unsigned d = 0; d < params.unfold_depth; ++d) result = unfold_hls_once(result);
    return result;
}

}  // namespace slah::oracle
