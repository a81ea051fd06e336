// Copyright (c) slah contributors.
// SPDX-License-Identifier: Apache-2.0
//
// The running-example formulas: precondition, a path condition, the loop
// invariant and its post-image, encoded addition-only (differences become
// fresh variables pinned by equations).
#pragma once

#include "test_support.hpp"

namespace slah::testing {

// 0 < b < e : hls(b, e)
inline SymbolicHeap fx_pre() {
    return heap(pure({{N(0), CmpOp::Lt, V("b")}, {V("b"), CmpOp::Lt, V("e")}}),
                {SpatialAtom::hls(V("b"), V("e"), Bound::infinity())});
}

// Path over the first loop iteration reaching the chunk advance:
// 0 < b < e, b = t, sz0 < rsz, t + sz0 = t1, t + 2 <= t1
//   : t -> sz0 * blk(t+1, t1) * hls(t1, e)
inline SymbolicHeap fx_path_4_9() {
    return heap(pure({{N(0), CmpOp::Lt, V("b")},
                      {V("b"), CmpOp::Lt, V("e")},
                      {V("b"), CmpOp::Eq, V("t")},
                      {V("sz0"), CmpOp::Lt, V("rsz")},
                      {V("t") + V("sz0"), CmpOp::Eq, V("t1")},
                      {V("t") + N(2), CmpOp::Le, V("t1")}}),
                {SpatialAtom::points_to(V("t"), V("sz0")),
                 SpatialAtom::blk(V("t") + N(1), V("t1")),
                 SpatialAtom::hls(V("t1"), V("e"), Bound::infinity())});
}

// Loop invariant: 0 < b < e, b <= t : hls(b, t; r) * hls(t, e)
// where r stands for rsz - 1.
inline SymbolicHeap fx_invariant() {
    return heap(pure({{N(0), CmpOp::Lt, V("b")},
                      {V("b"), CmpOp::Lt, V("e")},
                      {V("b"), CmpOp::Le, V("t")}}),
                {SpatialAtom::hls(V("b"), V("t"), Bound(V("r"))),
                 SpatialAtom::hls(V("t"), V("e"), Bound::infinity())});
}

// Post-image of the invariant over one more iteration:
// 0 < b < e, b <= t0 < e, 2 <= sz0 < rsz, t0 + sz0 = t, r + 1 = rsz
//   : hls(b, t0; r) * t0 -> sz0 * blk(t0+1, t) * hls(t, e)
inline SymbolicHeap fx_post_5_10() {
    return heap(pure({{N(0), CmpOp::Lt, V("b")},
                      {V("b"), CmpOp::Lt, V("e")},
                      {V("b"), CmpOp::Le, V("t0")},
                      {V("t0"), CmpOp::Lt, V("e")},
                      {N(2), CmpOp::Le, V("sz0")},
                      {V("sz0"), CmpOp::Lt, V("rsz")},
                      {V("t0") + V("sz0"), CmpOp::Eq, V("t")},
                      {V("r") + N(1), CmpOp::Eq, V("rsz")}}),
                {SpatialAtom::hls(V("b"), V("t0"), Bound(V("r"))),
                 SpatialAtom::points_to(V("t0"), V("sz0")),
                 SpatialAtom::blk(V("t0") + N(1), V("t")),
                 SpatialAtom::hls(V("t"), V("e"), Bound::infinity())});
}

}  // namespace slah::testing
