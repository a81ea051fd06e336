// Copyright (c) slah contributors.
// SPDX-License-Identifier: Apache-2.0
#include "slah/sat.hpp"

#include "slah/abstraction.hpp"

namespace slah {

std::uint64_t WitnessHeap::at(std::uint64_t addr) const {
    auto it = cells_.find(addr);
    if (it == cells_.end()) throw InputError("address not in heap: " + std::to_string(addr));
    return it->second;
}

std::ostream& operator<<(std::ostream& os, const WitnessHeap& h) {
    os << "{";
    bool first = true;
    for (const auto& [a, v] : h.cells()) {
        if (!first) os << ", ";
        os << a << ":" << v;
        first = false;
    }
    return os << "}";
}

std::vector<std::uint64_t> chunk_decompose(std::uint64_t span, std::optional<std::uint64_t> cap) {
    if (span < 2) throw InternalError("chunk_decompose: span below 2");
    if (cap && *cap < 2) throw InternalError("chunk_decompose: cap below 2");
    std::vector<std::uint64_t> sizes;
    std::uint64_t rest = span;
    if (rest % 2 == 1) {
        // One chunk of three absorbs the odd cell; the summary guarantees
        // the cap admits it.
        if (cap && *cap < 3) throw InternalError("chunk_decompose: odd span with cap 2");
        sizes.push_back(3);
        rest -= 3;
    }
    for (; rest > 0; rest -= 2) sizes.push_back(2);
    return sizes;
}

namespace {

class HeapBuilder {
  public:
    void place(std::uint64_t addr, std::uint64_t value) {
        if (heap_.contains(addr))
            throw InternalError("witness construction produced overlapping atoms at address " +
                                std::to_string(addr));
        heap_.set(addr, value);
    }

    WitnessHeap take() { return std::move(heap_); }

  private:
    WitnessHeap heap_;
};

}  // namespace

WitnessHeap build_witness(const StackModel& s, const SymbolicHeap& h) {
    HeapBuilder builder;
    for (const auto& atom : h.spatial()) {
        switch (atom.kind()) {
        case SpatialAtom::Kind::Emp: continue;
        case SpatialAtom::Kind::PointsTo:
            builder.place(atom.pto_addr().evaluate(s), atom.pto_value().evaluate(s));
            break;
        case SpatialAtom::Kind::Blk: {
            std::uint64_t from = atom.from().evaluate(s);
            std::uint64_t to = atom.to().evaluate(s);
            if (from >= to) throw InternalError("witness construction saw an empty block");
            for (std::uint64_t a = from; a < to; ++a) builder.place(a, 1);
            break;
        }
        case SpatialAtom::Kind::Hls: {
            std::uint64_t from = atom.from().evaluate(s);
            std::uint64_t to = atom.to().evaluate(s);
            if (from == to) break;  // empty list occupies nothing
            if (from > to) throw InternalError("witness construction saw a reversed heap list");
            std::optional<std::uint64_t> cap;
            if (!atom.bound().is_infinite()) cap = atom.bound().term().evaluate(s);
            std::uint64_t at = from;
            for (std::uint64_t size : chunk_decompose(to - from, cap)) {
                builder.place(at, size);
                for (std::uint64_t a = at + 1; a < at + size; ++a) builder.place(a, 1);
                at += size;
            }
            break;
        }
        }
    }
    return builder.take();
}

SatResult decide_sat(const SymbolicHeap& h, LiaSolver& solver, const Deadline& deadline) {
    SymbolicHeap body = h.qf();
    auto model = check_sat(abstraction::abs(h), solver, deadline);
    if (!model) return std::nullopt;
    // Variables the abstraction does not mention (a lone points-to, values
    // of cells) are unconstrained; make the model total on the formula.
    for (const auto& v : body.all_vars()) model->emplace(v, 0);
    return SatWitness{*model, build_witness(*model, body)};
}

}  // namespace slah
