// Copyright (c) slah contributors.
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <random>

#include "doctest.h"
#include "slah/formula.hpp"
#include "test_support.hpp"

using namespace slah;
using namespace slah::testing;

TEST_SUITE_BEGIN("formula");

TEST_CASE("head and tail of the three atom shapes") {
    SpatialAtom pto = SpatialAtom::points_to(V("x"), V("v"));
    CHECK(pto.head() == V("x"));
    CHECK(pto.tail() == V("x") + N(1));

    SpatialAtom blk = SpatialAtom::blk(V("x") + N(1), V("z"));
    CHECK(blk.head() == V("x") + N(1));
    CHECK(blk.tail() == V("z"));

    SpatialAtom hls = SpatialAtom::hls(V("b"), V("e"), Bound::infinity());
    CHECK(hls.head() == V("b"));
    CHECK(hls.tail() == V("e"));
}

TEST_CASE("head and tail reject emp") {
    CHECK_THROWS_AS(SpatialAtom::emp().head(), InputError);
    CHECK_THROWS_AS(SpatialAtom::emp().tail(), InputError);
}

TEST_CASE("address terms of a two-atom heap") {
    SymbolicHeap h = heap({}, {SpatialAtom::blk(V("x1"), V("x2")),
                               SpatialAtom::hls(V("x2"), V("x3"), Bound(V("y")))});
    CHECK(address_terms(h) == std::set<AddrTerm>{V("x1"), V("x2"), V("x3")});
}

TEST_CASE("address terms of emp and duplicate endpoints") {
    CHECK(address_terms(heap({}, {SpatialAtom::emp()})).empty());
    SymbolicHeap h = heap({}, {SpatialAtom::points_to(V("x"), V("v")),
                               SpatialAtom::points_to(V("x"), V("w"))});
    CHECK(address_terms(h) == std::set<AddrTerm>{V("x"), V("x") + N(1)});
}

TEST_CASE("address terms are stable under atom reordering") {
    std::vector<SpatialAtom> atoms{SpatialAtom::blk(V("a"), V("b")),
                                   SpatialAtom::points_to(V("c"), V("d")),
                                   SpatialAtom::hls(V("b"), V("c"), Bound(N(2)))};
    auto reference = address_terms(atoms);
    std::mt19937_64 rng(7);
    for (int i = 0; i < 10; ++i) {
        std::shuffle(atoms.begin(), atoms.end(), rng);
        CHECK(address_terms(atoms) == reference);
    }
}

TEST_CASE("substitution rewrites atoms, pure parts and bounds") {
    SymbolicHeap pto = heap({}, {SpatialAtom::points_to(V("x"), V("v"))});
    SymbolicHeap pto_sub = substitute(pto, {{"x", V("y") + N(1)}});
    CHECK(pto_sub.spatial().front() == SpatialAtom::points_to(V("y") + N(1), V("v")));

    SymbolicHeap blk = heap(pure({{V("x"), CmpOp::Eq, V("y")}}), {SpatialAtom::blk(V("x"), V("y"))});
    SymbolicHeap blk_sub = substitute(blk, {{"y", V("x")}});
    CHECK(blk_sub.pure().atoms.front() == PureAtom{V("x"), CmpOp::Eq, V("x")});
    CHECK(blk_sub.spatial().front() == SpatialAtom::blk(V("x"), V("x")));

    SymbolicHeap hls = heap({}, {SpatialAtom::hls(V("x"), V("y"), Bound(V("z")))});
    SymbolicHeap hls_sub = substitute(hls, {{"z", N(2)}});
    CHECK(hls_sub.spatial().front() == SpatialAtom::hls(V("x"), V("y"), Bound(N(2))));
}

TEST_CASE("substitution rejects capture and bound domains") {
    SymbolicHeap h = heap({}, {SpatialAtom::points_to(V("x"), V("v"))}, {"z"});
    CHECK_THROWS_AS(substitute(h, {{"z", V("y")}}), InputError);
    CHECK_THROWS_AS(substitute(h, {{"x", V("z") + N(1)}}), InputError);
}

TEST_CASE("duplicate summands canonicalize to a multiplicity") {
    AddrTerm t = V("x") + V("x");
    CHECK(t.coefficients().at("x") == 2);
    CHECK(t == V("x") + V("x"));
}

TEST_CASE("term evaluation agrees with a naive summand walk") {
    std::mt19937_64 rng(11);
    const char* names[] = {"a", "b", "c"};
    for (int round = 0; round < 200; ++round) {
        std::vector<std::pair<bool, std::uint64_t>> summands;  // (is_var, payload)
        std::size_t n = 1 + rng() % 5;
        for (std::size_t i = 0; i < n; ++i) {
            if (rng() % 2)
                summands.emplace_back(true, rng() % 3);
            else
                summands.emplace_back(false, rng() % 50);
        }
        AddrTerm t;
        for (auto [is_var, payload] : summands)
            t += is_var ? AddrTerm::var(names[payload]) : AddrTerm(payload);

        StackModel s{{"a", rng() % 20}, {"b", rng() % 20}, {"c", rng() % 20}};
        std::uint64_t naive = 0;
        for (auto [is_var, payload] : summands)
            naive += is_var ? s.at(names[payload]) : payload;
        CHECK(t.evaluate(s) == naive);
    }
}

TEST_CASE("points-to footprints are always one cell") {
    std::mt19937_64 rng(3);
    for (int round = 0; round < 50; ++round) {
        AddrTerm addr = AddrTerm::var("p") + AddrTerm(rng() % 9);
        SpatialAtom a = SpatialAtom::points_to(addr, V("q"));
        StackModel s{{"p", rng() % 30}, {"q", rng() % 30}};
        CHECK(a.head().evaluate(s) < a.tail().evaluate(s));
        CHECK(a.tail().evaluate(s) == a.head().evaluate(s) + 1);
    }
}

TEST_CASE("emp atoms vanish from the spatial list") {
    SymbolicHeap h = heap({}, {SpatialAtom::emp(), SpatialAtom::blk(V("x"), V("y")),
                               SpatialAtom::emp()});
    CHECK(h.spatial().size() == 1);
}

TEST_CASE("free variables exclude the existentials and qf drops them") {
    SymbolicHeap h = heap(pure({{V("x"), CmpOp::Lt, V("z")}}),
                          {SpatialAtom::blk(V("x"), V("z"))}, {"z"});
    CHECK(h.fv() == std::set<VarId>{"x"});
    CHECK(h.all_vars() == std::set<VarId>{"x", "z"});
    CHECK(h.qf().existentials().empty());
    CHECK(h.qf().fv() == std::set<VarId>{"x", "z"});
}

TEST_SUITE_END();
