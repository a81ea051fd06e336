// Copyright (c) slah contributors.
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>

#include "doctest.h"
#include "fixtures.hpp"
#include "slah/abstraction.hpp"
#include "slah/entail.hpp"
#include "slah/oracle.hpp"
#include "test_support.hpp"

using namespace slah;
using namespace slah::testing;
using lia::Formula;
using lia::LinExpr;

namespace {

EntailResult entail(const SymbolicHeap& a, const SymbolicHeap& c, const EntailOptions& opts = {}) {
    return decide_entail(a, c, solver(), opts);
}

}  // namespace

TEST_SUITE_BEGIN("entail");

TEST_CASE("composition of blocks") {
    SymbolicHeap a = heap({}, {SpatialAtom::blk(V("x"), V("y")), SpatialAtom::blk(V("y"), V("z"))});
    SymbolicHeap c = heap({}, {SpatialAtom::blk(V("x"), V("z"))});
    CHECK(entail(a, c).valid);
}

TEST_CASE("composition of heap lists") {
    SymbolicHeap a = heap({}, {SpatialAtom::hls(V("x"), V("y"), Bound(V("v"))),
                               SpatialAtom::hls(V("y"), V("z"), Bound(V("v")))});
    SymbolicHeap c = heap({}, {SpatialAtom::hls(V("x"), V("z"), Bound(V("v")))});
    CHECK(entail(a, c).valid);
}

TEST_CASE("a pinned span forces small chunks") {
    // With the span fixed to four, no unfolding can use a chunk of three.
    SymbolicHeap a = heap(pure({{V("x"), CmpOp::Lt, V("y")}, {V("x") + N(4), CmpOp::Eq, V("y")}}),
                          {SpatialAtom::hls(V("x"), V("y"), Bound(N(3)))});
    SymbolicHeap c = heap({}, {SpatialAtom::hls(V("x"), V("y"), Bound(N(2)))});
    CHECK(entail(a, c).valid);
}

TEST_CASE("without the span pin the capped entailment fails") {
    SymbolicHeap a = heap(pure({{V("x"), CmpOp::Lt, V("y")}}),
                          {SpatialAtom::hls(V("x"), V("y"), Bound(N(3)))});
    SymbolicHeap c = heap({}, {SpatialAtom::hls(V("x"), V("y"), Bound(N(2)))});
    EntailResult r = entail(a, c);
    REQUIRE_FALSE(r.valid);
    auto counter = oracle::brute_entail(a, c, oracle::Bounds(8, 8));
    REQUIRE(counter.has_value());
    CHECK(oracle::holds(counter->stack, counter->heap, a));
    CHECK_FALSE(oracle::holds(counter->stack, counter->heap, c));
}

TEST_CASE("the inductiveness condition of the invariant holds") {
    CHECK(entail(fx_post_5_10(), fx_invariant()).valid);
}

TEST_CASE("preorder enumeration of the worked example") {
    SymbolicHeap phi = heap({}, {SpatialAtom::blk(V("x1"), V("x2")),
                                 SpatialAtom::hls(V("x2"), V("x3"), Bound(V("y")))});
    std::set<AddrTerm> terms{V("x1"), V("x2"), V("x3")};
    auto pos = compatible_preorders(terms, abstraction::abs(phi), solver());
    REQUIRE(pos.size() == 2);
    TotalPreorder strict{{{V("x1")}, {V("x2")}, {V("x3")}}};
    TotalPreorder merged{{{V("x1")}, {V("x2"), V("x3")}}};
    CHECK(std::count(pos.begin(), pos.end(), strict) == 1);
    CHECK(std::count(pos.begin(), pos.end(), merged) == 1);
}

TEST_CASE("preorder enumeration degenerate cases") {
    auto single = compatible_preorders({V("x")}, Formula::tt(), solver());
    REQUIRE(single.size() == 1);
    CHECK(single.front().classes == std::vector<std::vector<AddrTerm>>{{V("x")}});

    auto ordered = compatible_preorders({V("x"), V("y")},
                                        lia::lt(LinExpr::var("x"), LinExpr::var("y")), solver());
    REQUIRE(ordered.size() == 1);
    CHECK(ordered.front().classes == std::vector<std::vector<AddrTerm>>{{V("x")}, {V("y")}});
}

TEST_CASE("normalization removes empty lists and sorts") {
    SymbolicHeap phi = heap({}, {SpatialAtom::blk(V("x1"), V("x2")),
                                 SpatialAtom::hls(V("x2"), V("x3"), Bound(V("y")))});
    Formula ctx = abstraction::abs(phi);
    TotalPreorder merged{{{V("x1")}, {V("x2"), V("x3")}}};

    auto n = normalize_ordered(merged, ctx, phi.spatial(),
                               {SpatialAtom::blk(V("x1"), V("x3"))}, solver());
    REQUIRE(std::holds_alternative<OrderedQuery>(n));
    const OrderedQuery& q = std::get<OrderedQuery>(n);
    REQUIRE(q.antecedent.size() == 1);  // the empty list is gone
    CHECK(q.antecedent.front().is_blk());

    // Non-empty antecedent against an empty consequent refutes.
    TotalPreorder strict{{{V("x1")}, {V("x2")}, {V("x3")}}};
    auto bad = normalize_ordered(strict, ctx, phi.spatial(), {}, solver());
    REQUIRE(std::holds_alternative<bool>(bad));
    CHECK_FALSE(std::get<bool>(bad));

    // An already sorted query is returned unchanged.
    auto same = normalize_ordered(strict, ctx, phi.spatial(), phi.spatial(), solver());
    REQUIRE(std::holds_alternative<OrderedQuery>(same));
    CHECK(std::get<OrderedQuery>(same).antecedent == phi.spatial());
    CHECK(std::get<OrderedQuery>(same).consequent == phi.spatial());
}

TEST_CASE("single-atom matching") {
    // Points-to against itself.
    SpatialAtom pto = SpatialAtom::points_to(V("x"), V("v"));
    CHECK(match_one(Formula::tt(), {pto}, pto, solver()));
    CHECK_FALSE(match_one(Formula::tt(), {SpatialAtom::blk(V("x"), V("x") + N(1))}, pto, solver()));

    // The running example's prefix: list, header, body against the longer list.
    SymbolicHeap post = fx_post_5_10();
    Formula ctx = Formula::conj({abstraction::abs(post),
                                 lia::lt(LinExpr::var("b"), LinExpr::var("t0"))});
    std::vector<SpatialAtom> prefix{post.spatial()[0], post.spatial()[1], post.spatial()[2]};
    CHECK(match_one(ctx, prefix, SpatialAtom::hls(V("b"), V("t"), Bound(V("r"))), solver()));

    // A bare block never proves a heap list.
    SymbolicHeap blk = heap(pure({{V("x") + N(4), CmpOp::Eq, V("y")}}),
                            {SpatialAtom::blk(V("x"), V("y"))});
    CHECK_FALSE(match_one(abstraction::abs(blk), blk.spatial(),
                          SpatialAtom::hls(V("x"), V("y"), Bound(V("v"))), solver()));
}

TEST_CASE("sequence matching splits a block at the consequent boundary") {
    SymbolicHeap a = heap(pure({{V("x"), CmpOp::Lt, V("w")},
                                {V("w"), CmpOp::Lt, V("y")},
                                {V("y"), CmpOp::Lt, V("z")}}),
                          {SpatialAtom::blk(V("x"), V("y")), SpatialAtom::blk(V("y"), V("z"))});
    SymbolicHeap c = heap({}, {SpatialAtom::blk(V("x"), V("w")), SpatialAtom::blk(V("w"), V("z"))});
    CHECK(entail(a, c).valid);
    CHECK_FALSE(oracle::brute_entail(a, c, oracle::Bounds(8, 4)).has_value());
}

TEST_CASE("a header and body fold into a one-chunk list") {
    SymbolicHeap a = heap(pure({{V("x") + V("u"), CmpOp::Eq, V("y")},
                                {N(2), CmpOp::Le, V("u")},
                                {V("u"), CmpOp::Le, V("v")}}),
                          {SpatialAtom::points_to(V("x"), V("u")),
                           SpatialAtom::blk(V("x") + N(1), V("y"))});
    SymbolicHeap c = heap({}, {SpatialAtom::hls(V("x"), V("y"), Bound(V("v")))});
    CHECK(entail(a, c).valid);
}

TEST_CASE("a block cannot prove a points-to value") {
    SymbolicHeap a = heap(pure({{V("x") + N(3), CmpOp::Eq, V("y")}}),
                          {SpatialAtom::blk(V("x"), V("y"))});
    SymbolicHeap c = heap({}, {SpatialAtom::points_to(V("x"), V("v")),
                               SpatialAtom::blk(V("x") + N(1), V("y"))});
    // The consequent value v is not free in the antecedent; pin it instead.
    SymbolicHeap c2 = heap({}, {SpatialAtom::points_to(V("x"), N(7)),
                                SpatialAtom::blk(V("x") + N(1), V("y"))});
    EntailResult r = entail(a, c2);
    REQUIRE_FALSE(r.valid);
    auto counter = oracle::brute_entail(a, c2, oracle::Bounds(8, 8));
    REQUIRE(counter.has_value());
    CHECK_FALSE(oracle::holds(counter->stack, counter->heap, c2));
    (void)c;
}

TEST_CASE("pre-decomposition extracts contiguous groups") {
    Formula tt = Formula::tt();
    std::vector<SpatialAtom> ante{SpatialAtom::points_to(V("x"), V("v")),
                                  SpatialAtom::blk(V("x") + N(1), V("z")),
                                  SpatialAtom::hls(V("z"), V("w"), Bound::infinity())};
    std::vector<SpatialAtom> conseq{SpatialAtom::blk(V("x"), V("z")),
                                    SpatialAtom::hls(V("z"), V("w"), Bound::infinity())};
    auto subs = pre_decompose(ante, conseq, tt, solver());
    REQUIRE(subs.size() == 2);
    CHECK(subs[0].antecedent.size() == 2);
    CHECK(subs[0].consequent.size() == 1);
    CHECK(subs[0].consequent.front().is_blk());
    CHECK(subs[1].antecedent.size() == 1);
    CHECK(subs[1].consequent.size() == 1);

    // No block in the consequent: identity.
    auto none = pre_decompose(ante, {conseq[1]}, tt, solver());
    REQUIRE(none.size() == 1);
    CHECK(none[0].antecedent == ante);

    // Two disjoint groups are both extracted.
    std::vector<SpatialAtom> ante2{SpatialAtom::points_to(V("x"), V("v")),
                                   SpatialAtom::blk(V("x") + N(1), V("z")),
                                   SpatialAtom::points_to(V("p"), V("q")),
                                   SpatialAtom::blk(V("p") + N(1), V("w"))};
    std::vector<SpatialAtom> conseq2{SpatialAtom::blk(V("x"), V("z")),
                                     SpatialAtom::blk(V("p"), V("w"))};
    auto both = pre_decompose(ante2, conseq2, tt, solver());
    REQUIRE(both.size() == 3);
    CHECK(both[2].antecedent.empty());
    CHECK(both[2].consequent.empty());
}

TEST_CASE("the verdict is the conjunction over compatible preorders") {
    SymbolicHeap a = heap({}, {SpatialAtom::blk(V("x1"), V("x2")),
                               SpatialAtom::hls(V("x2"), V("x3"), Bound(V("y")))});
    SymbolicHeap c = heap({}, {SpatialAtom::blk(V("x1"), V("x2")),
                               SpatialAtom::hls(V("x2"), V("x3"), Bound(V("y")))});
    std::vector<std::pair<TotalPreorder, bool>> seen;
    EntailOptions opts;
    opts.heuristics = false;
    opts.preorder_observer = [&](const TotalPreorder& po, bool ok) { seen.emplace_back(po, ok); };
    EntailResult r = entail(a, c, opts);
    CHECK(r.valid);
    REQUIRE(seen.size() == 2);
    bool conjunction = true;
    for (const auto& [po, ok] : seen) conjunction = conjunction && ok;
    CHECK(conjunction == r.valid);
}

TEST_CASE("per-preorder refutations surface in the diagnostics") {
    SymbolicHeap a = heap(pure({{V("x"), CmpOp::Lt, V("y")}}),
                          {SpatialAtom::hls(V("x"), V("y"), Bound(N(5)))});
    SymbolicHeap c = heap({}, {SpatialAtom::hls(V("x"), V("y"), Bound(N(3)))});
    EntailResult r = entail(a, c);
    REQUIRE_FALSE(r.valid);
    REQUIRE(r.why.has_value());
    CHECK(r.why->preorder.has_value());
    REQUIRE(r.why->refuted.has_value());
    REQUIRE(r.why->model.has_value());
    // Replayable: the stored model satisfies the stored refutation formula.
    CHECK(lia::evaluate(*r.why->refuted, *r.why->model));
}

TEST_CASE("arithmetic-level refutations are replayable") {
    SymbolicHeap a = heap(pure({{V("x"), CmpOp::Lt, V("y")}}), {SpatialAtom::blk(V("x"), V("y"))});
    SymbolicHeap c = heap(pure({{V("x") + N(2), CmpOp::Le, V("y")}}),
                          {SpatialAtom::blk(V("x"), V("y"))});
    EntailResult r = entail(a, c);
    REQUIRE_FALSE(r.valid);
    REQUIRE(r.why.has_value());
    REQUIRE(r.why->refuted.has_value());
    REQUIRE(r.why->model.has_value());
    CHECK(lia::evaluate(*r.why->refuted, *r.why->model));
}

TEST_CASE("differential soundness on random pairs") {
    oracle::GenParams params;
    params.max_atoms = 2;
    params.max_vars = 3;
    params.max_const = 4;
    oracle::Bounds bounds(10, 10);
    int checked = 0;
    for (std::uint64_t seed = 500; seed < 560; ++seed) {
        SymbolicHeap a = oracle::random_formula(seed, params);
        if (a.fv().empty()) continue;
        oracle::GenParams cparams = params;
        cparams.var_pool.assign(a.fv().begin(), a.fv().end());
        SymbolicHeap c = oracle::random_formula(seed * 2654435761u + 17, cparams);
        EntailOptions opts;
        EntailResult r = entail(a, c, opts);
        auto counter = oracle::brute_entail(a, c, bounds);
        CAPTURE(seed);
        if (counter) {
            REQUIRE_FALSE(r.valid);
            REQUIRE(oracle::holds(counter->stack, counter->heap, a));
            REQUIRE_FALSE(oracle::holds(counter->stack, counter->heap, c));
        }
        if (r.valid) REQUIRE_FALSE(counter.has_value());
        ++checked;
    }
    CHECK(checked >= 40);
}

TEST_CASE("verdicts do not depend on the heuristics") {
    oracle::GenParams params;
    params.max_atoms = 3;
    params.max_vars = 3;
    params.max_const = 4;
    for (std::uint64_t seed = 700; seed < 730; ++seed) {
        SymbolicHeap a = oracle::random_formula(seed, params);
        if (a.fv().empty()) continue;
        oracle::GenParams cparams = params;
        cparams.max_atoms = 2;
        cparams.var_pool.assign(a.fv().begin(), a.fv().end());
        SymbolicHeap c = oracle::random_formula(seed * 31 + 5, cparams);
        EntailOptions with;
        EntailOptions without;
        without.heuristics = false;
        CAPTURE(seed);
        REQUIRE(entail(a, c, with).valid == entail(a, c, without).valid);
    }
}

TEST_CASE("fresh split variables avoid the query's names") {
    SymbolicHeap a = heap(pure({{V("x"), CmpOp::Lt, V("w")},
                                {V("w"), CmpOp::Lt, V("y")},
                                {V("y"), CmpOp::Lt, V("z")}}),
                          {SpatialAtom::blk(V("x"), V("y")),
                           SpatialAtom::hls(V("y"), V("z"), Bound::infinity())});
    SymbolicHeap c = heap({}, {SpatialAtom::blk(V("x"), V("w")),
                               SpatialAtom::hls(V("w"), V("z"), Bound::infinity())});
    EntailStats stats;
    EntailOptions opts;
    opts.stats = &stats;
    entail(a, c, opts);
    std::set<VarId> names = a.all_vars();
    for (const auto& v : c.all_vars()) names.insert(v);
    for (const auto& fresh : stats.fresh_names) {
        CHECK(names.count(fresh) == 0);
        CHECK(fresh.find('!') != std::string::npos);
    }
}

TEST_CASE("parallel preorder checking agrees with the sequential verdict") {
    SymbolicHeap a = fx_post_5_10();
    SymbolicHeap c = fx_invariant();
    EntailOptions par;
    par.jobs = 2;
    CHECK(entail(a, c, par).valid == entail(a, c).valid);

    SymbolicHeap bad = heap(pure({{V("x"), CmpOp::Lt, V("y")}}),
                            {SpatialAtom::hls(V("x"), V("y"), Bound(N(5)))});
    SymbolicHeap cap = heap({}, {SpatialAtom::hls(V("x"), V("y"), Bound(N(3)))});
    CHECK(entail(bad, cap, par).valid == entail(bad, cap).valid);
}

TEST_CASE("depth guard raises a resource error, never a verdict") {
    SymbolicHeap a = heap({}, {SpatialAtom::blk(V("x"), V("y")), SpatialAtom::blk(V("y"), V("z"))});
    SymbolicHeap c = heap({}, {SpatialAtom::blk(V("x"), V("z"))});
    EntailOptions opts;
    opts.max_depth = 0;
    CHECK_THROWS_AS(entail(a, c, opts), ResourceError);
}

TEST_CASE("precondition violations are input errors") {
    SymbolicHeap a = heap({}, {SpatialAtom::blk(V("x"), V("y"))});
    SymbolicHeap quantified = heap({}, {SpatialAtom::blk(V("x"), V("z"))}, {"z"});
    CHECK_THROWS_AS(entail(a, quantified), InputError);
    SymbolicHeap wider = heap({}, {SpatialAtom::blk(V("x"), V("q"))});
    CHECK_THROWS_AS(entail(a, wider), InputError);
}

TEST_CASE("empty-span consequents and antecedents") {
    // x = y : hls(x, y; v) entails the empty heap.
    SymbolicHeap a = heap(pure({{V("x"), CmpOp::Eq, V("y")}}),
                          {SpatialAtom::hls(V("x"), V("y"), Bound(V("v")))});
    SymbolicHeap c = heap({}, {});
    CHECK(entail(a, c).valid);
    // And the other way around.
    SymbolicHeap c2 = heap({}, {SpatialAtom::hls(V("x"), V("y"), Bound::infinity())});
    CHECK(entail(heap(pure({{V("x"), CmpOp::Eq, V("y")}}), {}), c2).valid);
}

TEST_SUITE_END();
