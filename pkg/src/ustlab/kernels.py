"""Compiled lattice kernels for the batch estimators.

Everything here is deterministic given (seed, stream id): randomness is an
inline splitmix64 counter generator whose key derivation matches
``ustlab.rng.stream_key`` bit for bit (tested).  Replicate ``i`` of a batch
uses stream id ``stream_base + i``, so results are independent of any
scheduling and reproducible across runs.

Data-structure notes:

* Walks on the infinite lattice pack coordinates into two 64-bit words
  (21 bits per coordinate, offset binary, d <= 5) and keep the running
  loop-erasure in an open-addressing hash map with lazy invalidation:
  a map entry is live iff it still points at its own key on the erasure
  stack, so popped entries need no deletion.
* Walks on boxes index a flat visit table of one byte per site: low nibble
  a replicate stamp, high nibble the direction back to the first-entry
  parent.  The table is wiped every 15 replicates when stamps recycle.
* Box steps are drawn by rejection (redraw directions that leave the box),
  which is exactly the uniform-over-valid-neighbors walk law.
"""

import numpy as np
from numba import njit

U64 = np.uint64
I64 = np.int64

_GOLDEN = U64(0x9E3779B97F4A7C15)
_OFFSET = I64(1 << 20)  # packed-coordinate bias; walks must stay below 2^20 - 2
MAX_PACKED_STEPS = (1 << 20) - 2


@njit(cache=True, inline="always")
def _mix64(x):
    x = (x ^ (x >> U64(30))) * U64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> U64(27))) * U64(0x94D049BB133111EB)
    return x ^ (x >> U64(31))


@njit(cache=True, inline="always")
def _stream_key(seed, stream_id):
    return _mix64(_mix64(seed) ^ _mix64(stream_id + _GOLDEN))


@njit(cache=True, inline="always")
def _hash_slot(k1, k2):
    return _mix64(U64(k1) * U64(0xC2B2AE3D27D4EB4F) ^ _mix64(U64(k2)))


@njit(cache=True)
def _lerw_stack(d, M, state, hk1, hk2, hval, hstamp, sk1, sk2, rep):
    """Walk M lattice steps from the origin, maintaining the loop-erasure.

    Returns the final erasure-stack height; the stack itself is in
    sk1/sk2 and the hash map is left consistent for trace lookups.
    """
    mask = U64(hk1.shape[0] - 1)
    k1 = I64(0)
    k2 = I64(0)
    for i in range(min(d, 3)):
        k1 += _OFFSET << I64(21 * i)
    for i in range(3, d):
        k2 += _OFFSET << I64(21 * (i - 3))
    sk1[0] = k1
    sk2[0] = k2
    slot = np.int64(_hash_slot(k1, k2) & mask)
    hk1[slot] = k1
    hk2[slot] = k2
    hval[slot] = 0
    hstamp[slot] = rep
    h = 1
    nd = U64(2 * d)
    for _ in range(M):
        state += _GOLDEN
        z = _mix64(state)
        dirn = np.int64(z % nd)
        axis = dirn >> 1
        delta = I64(1) if dirn & 1 else I64(-1)
        if axis < 3:
            k1 += delta << I64(21 * axis)
        else:
            k2 += delta << I64(21 * (axis - 3))
        slot = np.int64(_hash_slot(k1, k2) & mask)
        found = I64(-1)
        while hstamp[slot] == rep:
            if hk1[slot] == k1 and hk2[slot] == k2:
                v = hval[slot]
                if v < h and sk1[v] == k1 and sk2[v] == k2:
                    found = v
                break
            slot = (slot + 1) & np.int64(mask)
        if found >= 0:
            h = found + 1
        else:
            sk1[h] = k1
            sk2[h] = k2
            hk1[slot] = k1
            hk2[slot] = k2
            hval[slot] = np.int32(h)
            hstamp[slot] = rep
            h += 1
    return h


@njit(cache=True)
def _intersection_batch(d, r, M, reps, seed, stream_base, exclude_origin,
                        hk1, hk2, hval, hstamp, sk1, sk2):
    """Per replicate: multiplicity-weighted count of hits of an M-step
    walk from r*e1 on the trace of the loop-erasure of an independent
    M-step walk from the origin."""
    mask = U64(hk1.shape[0] - 1)
    out = np.zeros(reps, dtype=np.int64)
    nd = U64(2 * d)
    for i in range(reps):
        rep = np.int32(i + 1)
        key = _stream_key(U64(seed), U64(stream_base) + U64(i))
        sv = _mix64(key ^ U64(0x6A09E667F3BCC909))
        sw = _mix64(key ^ U64(0xBB67AE8584CAA73B))
        h = _lerw_stack(d, M, sv, hk1, hk2, hval, hstamp, sk1, sk2, rep)
        # walk from (r, 0, ..., 0), checking each position against the trace
        k1 = I64(r) + _OFFSET
        k2 = I64(0)
        for j in range(1, min(d, 3)):
            k1 += _OFFSET << I64(21 * j)
        for j in range(3, d):
            k2 += _OFFSET << I64(21 * (j - 3))
        x = I64(0)
        state = sw
        for s in range(M + 1):
            if s > 0:
                state += _GOLDEN
                z = _mix64(state)
                dirn = np.int64(z % nd)
                axis = dirn >> 1
                delta = I64(1) if dirn & 1 else I64(-1)
                if axis < 3:
                    k1 += delta << I64(21 * axis)
                else:
                    k2 += delta << I64(21 * (axis - 3))
            slot = np.int64(_hash_slot(k1, k2) & mask)
            while hstamp[slot] == rep:
                if hk1[slot] == k1 and hk2[slot] == k2:
                    v = hval[slot]
                    if v < h and sk1[v] == k1 and sk2[v] == k2:
                        if not (exclude_origin and v == 0):
                            x += 1
                    break
                slot = (slot + 1) & np.int64(mask)
        out[i] = x
    return out


def intersection_counts(d, r, M, reps, seed, stream_base=0, exclude_origin=False):
    """Batch of per-replicate intersection counts X (numpy int64 array)."""
    if M > MAX_PACKED_STEPS:
        raise ValueError(f"M={M} exceeds the packed-coordinate range {MAX_PACKED_STEPS}")
    if not 3 <= d <= 5:
        raise ValueError("lattice kernels support 3 <= d <= 5")
    size = 1
    while size < 3 * (M + 2):
        size *= 2
    hk1 = np.zeros(size, np.int64)
    hk2 = np.zeros(size, np.int64)
    hval = np.zeros(size, np.int32)
    hstamp = np.zeros(size, np.int32)
    sk1 = np.zeros(M + 1, np.int64)
    sk2 = np.zeros(M + 1, np.int64)
    return _intersection_batch(d, r, M, reps, seed, stream_base,
                               exclude_origin, hk1, hk2, hval, hstamp, sk1, sk2)


@njit(cache=True)
def _box_index(coords, n, d):
    side = 2 * n + 1
    idx = I64(0)
    stride = I64(1)
    for i in range(d):
        idx += (coords[i] + n) * stride
        stride *= side
    return idx


@njit(cache=True)
def _box_path_batch(d, n, v_c, w_c, x_c, has_x, reps, seed, stream_base,
                    step_cap, table):
    """First-entry walk from v stopped on first hit of w.

    dist[i] = length of the tree path from w back to v (-1 if the step cap
    censored the replicate); xhit[i] = 1 if the given third vertex lies on
    that path; steps[i] = walk length.
    """
    side = 2 * n + 1
    strides = np.empty(d, dtype=np.int64)
    s = I64(1)
    for i in range(d):
        strides[i] = s
        s *= side
    dist = np.empty(reps, dtype=np.int64)
    xhit = np.zeros(reps, dtype=np.uint8)
    steps = np.empty(reps, dtype=np.int64)
    coords = np.empty(d, dtype=np.int64)
    nd = U64(2 * d)
    v_idx = _box_index(v_c, n, d)
    w_idx = _box_index(w_c, n, d)
    x_idx = _box_index(x_c, n, d) if has_x else I64(-1)
    for i in range(reps):
        nib = np.uint8((i % 15) + 1)
        if nib == 1:
            table[:] = 0
        key = _stream_key(U64(seed), U64(stream_base) + U64(i))
        state = _mix64(key ^ U64(0x6A09E667F3BCC909))
        for a in range(d):
            coords[a] = v_c[a]
        idx = v_idx
        table[idx] = nib  # root: stamp only, no parent
        t = I64(0)
        ok = False
        while t < step_cap:
            state += _GOLDEN
            z = _mix64(state)
            dirn = np.int64(z % nd)
            axis = dirn >> 1
            delta = I64(1) if dirn & 1 else I64(-1)
            c = coords[axis] + delta
            if c > n or c < -n:
                continue
            coords[axis] = c
            idx += delta * strides[axis]
            t += 1
            if (table[idx] & np.uint8(0xF)) != nib:
                table[idx] = np.uint8(nib | np.uint8((dirn ^ 1) << 4))
            if idx == w_idx:
                ok = True
                break
        steps[i] = t
        if not ok:
            dist[i] = -1
            continue
        # follow first-entry parents from w back to v
        cur = w_idx
        length = I64(0)
        hit = False
        while cur != v_idx:
            if cur == x_idx:
                hit = True
            back = np.int64(table[cur] >> 4)
            axis = back >> 1
            delta = I64(1) if back & 1 else I64(-1)
            cur += delta * strides[axis]
            length += 1
        if cur == x_idx:
            hit = True
        dist[i] = length
        xhit[i] = 1 if hit else 0
    return dist, xhit, steps


def box_tree_paths(d, n, v_coord, w_coord, x_coord=None, reps=1, seed=0,
                   stream_base=0, step_cap=10**9):
    """Batch the walk-built tree path between two box vertices.

    Returns (dist, xhit, steps) arrays; dist is -1 where the step cap hit.
    """
    side = (2 * n + 1) ** d
    table = np.zeros(side, dtype=np.uint8)
    v_c = np.asarray(v_coord, dtype=np.int64)
    w_c = np.asarray(w_coord, dtype=np.int64)
    has_x = x_coord is not None
    x_c = np.asarray(x_coord if has_x else v_coord, dtype=np.int64)
    for c in (v_c, w_c, x_c):
        if c.shape[0] != d or np.abs(c).max() > n:
            raise ValueError("placement coordinates must lie in the box")
    if tuple(v_c) == tuple(w_c):
        raise ValueError("endpoints must differ")
    return _box_path_batch(d, n, v_c, w_c, x_c, has_x, reps, seed,
                           stream_base, step_cap, table)


def box_cover_pair_connectivity(d, n, M, reps, pairs, seed, stream_base=0,
                                step_cap=10**9):
    """Per-replicate count of sampled ordered vertex pairs at tree distance
    <= M in a freshly sampled spanning tree of the box (-1 where the cover
    walk hit the step cap)."""
    side = (2 * n + 1) ** d
    table = np.zeros(side, dtype=np.uint8)
    return _box_cover_pairs_batch(d, n, M, reps, pairs, seed, stream_base,
                                  step_cap, table)


@njit(cache=True)
def _chain_depth(table, strides, idx, root_idx):
    depth = I64(0)
    cur = idx
    while cur != root_idx:
        back = np.int64(table[cur] >> 4)
        axis = back >> 1
        delta = I64(1) if back & 1 else I64(-1)
        cur += delta * strides[axis]
        depth += 1
    return depth


@njit(cache=True)
def _chain_up(table, strides, idx, k):
    cur = idx
    for _ in range(k):
        back = np.int64(table[cur] >> 4)
        axis = back >> 1
        delta = I64(1) if back & 1 else I64(-1)
        cur += delta * strides[axis]
    return cur


@njit(cache=True)
def _box_cover_pairs_batch(d, n, M, reps, pairs, seed, stream_base,
                           step_cap, table):
    """Full first-entry tree per replicate (walk to cover time), then count
    sampled ordered vertex pairs at tree distance <= M.  hits[i] = -1 if
    the cover walk was censored by the step cap."""
    side = 2 * n + 1
    nsites = I64(1)
    strides = np.empty(d, dtype=np.int64)
    s = I64(1)
    for i in range(d):
        strides[i] = s
        s *= side
        nsites *= side
    hits = np.empty(reps, dtype=np.int64)
    coords = np.empty(d, dtype=np.int64)
    nd = U64(2 * d)
    root = _box_index(np.zeros(d, dtype=np.int64), n, d)
    for i in range(reps):
        nib = np.uint8((i % 15) + 1)
        if nib == 1:
            table[:] = 0
        key = _stream_key(U64(seed), U64(stream_base) + U64(i))
        state = _mix64(key ^ U64(0x6A09E667F3BCC909))
        for a in range(d):
            coords[a] = 0
        idx = root
        table[idx] = nib
        remaining = nsites - 1
        t = I64(0)
        while remaining > 0 and t < step_cap:
            state += _GOLDEN
            z = _mix64(state)
            dirn = np.int64(z % nd)
            axis = dirn >> 1
            delta = I64(1) if dirn & 1 else I64(-1)
            c = coords[axis] + delta
            if c > n or c < -n:
                continue
            coords[axis] = c
            idx += delta * strides[axis]
            t += 1
            if (table[idx] & np.uint8(0xF)) != nib:
                table[idx] = np.uint8(nib | np.uint8((dirn ^ 1) << 4))
                remaining -= 1
        if remaining > 0:
            hits[i] = -1
            continue
        count = I64(0)
        pstate = _mix64(key ^ U64(0x3C6EF372FE94F82B))
        for _ in range(pairs):
            pstate += _GOLDEN
            a = np.int64(_mix64(pstate) % U64(nsites))
            pstate += _GOLDEN
            b = np.int64(_mix64(pstate) % U64(nsites))
            da = _chain_depth(table, strides, a, root)
            db = _chain_depth(table, strides, b, root)
            td = I64(0)
            if da > db:
                a = _chain_up(table, strides, a, da - db)
                td = da - db
            elif db > da:
                b = _chain_up(table, strides, b, db - da)
                td = db - da
            while a != b:
                a = _chain_up(table, strides, a, 1)
                b = _chain_up(table, strides, b, 1)
                td += 2
            if td <= M:
                count += 1
        hits[i] = count
    return hits


def box_green_visit_counts(d, n, r_values, reps, seed, stream_base=0):
    """Per-replicate visit counts to each r*e1 target of a walk from the
    origin killed at the box boundary."""
    targets = np.asarray(r_values, dtype=np.int64)
    if np.any(targets >= n) or np.any(targets < 1):
        raise ValueError("targets must be interior, 1 <= r < n")
    return _box_green_batch(d, n, targets, reps, seed, stream_base)


@njit(cache=True)
def _box_green_batch(d, n, targets, reps, seed, stream_base):
    nt = targets.shape[0]
    visits = np.zeros((reps, nt), dtype=np.int64)
    coords = np.empty(d, dtype=np.int64)
    nd = U64(2 * d)
    for i in range(reps):
        key = _stream_key(U64(seed), U64(stream_base) + U64(i))
        state = _mix64(key ^ U64(0x6A09E667F3BCC909))
        for a in range(d):
            coords[a] = 0
        while True:
            state += _GOLDEN
            z = _mix64(state)
            dirn = np.int64(z % nd)
            axis = dirn >> 1
            delta = I64(1) if dirn & 1 else I64(-1)
            coords[axis] += delta
            if coords[axis] == n or coords[axis] == -n:
                break
            if coords[0] >= 1:
                on_axis = True
                for a in range(1, d):
                    if coords[a] != 0:
                        on_axis = False
                        break
                if on_axis:
                    for j in range(nt):
                        if targets[j] == coords[0]:
                            visits[i, j] += 1
                            break
        # absorbed
    return visits
