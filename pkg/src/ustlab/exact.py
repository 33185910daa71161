"""Exact spanning-tree counts, cylinder probabilities, current fractions,
harmonic hitting probabilities, and exact loop-erased walk laws.

This module is the oracle layer for all the samplers: every value is an
exact integer or ``fractions.Fraction`` and no floating point is used
anywhere.  Probabilities come out of three independent routes -- tree
counting (determinants), electrical solves, and exhaustive enumeration --
which the test suite plays against each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .config import DEFAULT_BUDGETS
from .errors import ResourceLimitError
from .graph import MultiGraph, contract
from .ratlinalg import bareiss_det, solve_linear_system


def spanning_tree_count(g, budgets=None):
    """Number of spanning trees of ``g``, parallel edges counted as distinct.

    Computed as a reduced-Laplacian determinant with integer multiplicity
    weights.  Returns 0 for disconnected graphs.
    """
    budgets = budgets or DEFAULT_BUDGETS
    n = g.vertex_count
    if n > budgets.exact_vertex_cap:
        raise ResourceLimitError(
            f"{n} vertices exceeds the exact-computation cap {budgets.exact_vertex_cap}"
        )
    if not g.is_connected():
        return 0
    if n == 1:
        return 1
    # integer Laplacian with vertex 0 struck out
    rows = [[0] * (n - 1) for _ in range(n - 1)]
    for u, v in g.endpoints:
        if u != 0 and v != 0:
            rows[u - 1][v - 1] -= 1
            rows[v - 1][u - 1] -= 1
        if u != 0:
            rows[u - 1][u - 1] += 1
        if v != 0:
            rows[v - 1][v - 1] += 1
    return bareiss_det(rows)


def brute_force_tree_enumeration(g, budgets=None):
    """Every spanning tree of ``g`` as a frozenset of edge ids.

    Backtracking over the edge list with cycle and connectivity pruning.
    This is the independent oracle the determinant route is tested against;
    it never calls ``spanning_tree_count``.
    """
    budgets = budgets or DEFAULT_BUDGETS
    m = g.edge_count
    if m > budgets.enumeration_edge_cap:
        raise ResourceLimitError(
            f"{m} edges exceeds the enumeration cap {budgets.enumeration_edge_cap}"
        )
    n = g.vertex_count
    if not g.is_connected():
        return []
    if n == 1:
        return [frozenset()]

    trees = []
    chosen = []

    def find(parent, x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def connected_with(allowed_from):
        # is the graph using edges chosen + endpoints[allowed_from:] connected?
        parent = list(range(n))
        comps = n
        for eid in chosen:
            a, b = g.endpoints[eid]
            ra, rb = find(parent, a), find(parent, b)
            if ra != rb:
                parent[ra] = rb
                comps -= 1
        for eid in range(allowed_from, m):
            a, b = g.endpoints[eid]
            ra, rb = find(parent, a), find(parent, b)
            if ra != rb:
                parent[ra] = rb
                comps -= 1
        return comps == 1

    def extend(next_edge, parent, comps):
        if comps == 1:
            trees.append(frozenset(chosen))
            return
        if next_edge == m:
            return
        a, b = g.endpoints[next_edge]
        ra, rb = find(parent, a), find(parent, b)
        if ra != rb:
            child = list(parent)
            child[ra] = rb
            chosen.append(next_edge)
            extend(next_edge + 1, child, comps - 1)
            chosen.pop()
        # skip this edge only if the rest can still connect everything
        if connected_with(next_edge + 1):
            extend(next_edge + 1, parent, comps)

    extend(0, list(range(n)), n)
    return trees


def cylinder_probability(g, edge_set, budgets=None):
    """Exact probability that a uniform spanning tree contains every edge
    of ``edge_set``; 0 if the set contains a cycle."""
    budgets = budgets or DEFAULT_BUDGETS
    if not g.is_connected():
        raise ValueError("cylinder probabilities need a connected graph")
    total = spanning_tree_count(g, budgets)
    cur = g
    cur_ids = {e: e for e in range(g.edge_count)}
    for e in sorted(set(edge_set)):
        if not (0 <= e < g.edge_count):
            raise ValueError(f"unknown edge id {e}")
        live = cur_ids.get(e)
        if live is None:
            return Fraction(0)  # became a loop: the set holds a cycle
        cur, mm = contract(cur, live)
        cur_ids = {
            orig: mm.edge_map[mid]
            for orig, mid in cur_ids.items()
            if mid in mm.edge_map
        }
    return Fraction(spanning_tree_count(cur, budgets), total)


@dataclass(frozen=True)
class HarmonicSolution:
    """Exact solution of a discrete Dirichlet problem.

    ``values[v]`` is the probability that simple random walk from ``v``
    hits the target set before the avoid set.  ``unreached`` flags vertices
    in components touching neither set; their value is 0 by convention.
    """

    values: dict
    unreached: frozenset

    def __getitem__(self, v):
        return self.values[v]


def harmonic_hitting_probability(g, targets, avoids):
    """Exact hitting probabilities of ``targets`` before ``avoids``.

    Value 1 on targets, 0 on avoids, and equal to the multiplicity-weighted
    neighbor average elsewhere.
    """
    targets = set(targets)
    avoids = set(avoids)
    if not targets or not avoids:
        raise ValueError("both vertex sets must be nonempty")
    if targets & avoids:
        raise ValueError("target and avoid sets must be disjoint")

    values = {}
    for v in targets:
        values[v] = Fraction(1)
    for v in avoids:
        values[v] = Fraction(0)

    unreached = set()
    boundary = targets | avoids
    for comp in g.components():
        comp_set = set(comp)
        if not (comp_set & boundary):
            unreached.update(comp_set)
            for v in comp_set:
                values[v] = Fraction(0)
            continue
        interior = [v for v in comp if v not in boundary]
        if not interior:
            continue
        index = {v: i for i, v in enumerate(interior)}
        k = len(interior)
        rows = [[0] * k for _ in range(k)]
        rhs = [0] * k
        for i, v in enumerate(interior):
            rows[i][i] = g.degree(v)
            for w, _ in g.neighbors(v):
                if w in index:
                    rows[i][index[w]] -= 1
                elif w in targets:
                    rhs[i] += 1
        sol = solve_linear_system(rows, rhs)
        for v, x in zip(interior, sol):
            values[v] = x
    return HarmonicSolution(values=values, unreached=frozenset(unreached))


def edge_current_fraction(g, e, budgets=None):
    """Fraction of battery current through edge ``e`` with unit resistors.

    With a unit battery across the endpoints of ``e`` and every edge a
    1-ohm resistor, this is the fraction of the total current that flows
    through the resistor at ``e`` itself; it equals the probability that a
    uniform spanning tree contains ``e``.  Computed by an exact harmonic
    solve (not by tree counting, so the two routes stay independent).
    """
    if not (0 <= e < g.edge_count):
        raise ValueError(f"unknown edge id {e}")
    if not g.is_connected():
        raise ValueError("current fractions need a connected graph")
    u, v = g.endpoints[e]
    phi = harmonic_hitting_probability(g, targets={u}, avoids={v})
    # total battery current at unit voltage = effective conductance
    total = Fraction(0)
    for w, _ in g.neighbors(u):
        total += 1 - phi[w]
    return 1 / total


def mu3_exact_law(g, enumeration, budgets=None):
    """Exact law of the sequential edge-by-edge tree measure.

    Walks the enumeration, branching on include/exclude with the exact
    current fraction of the running minor, conditioning by contraction or
    deletion.  Returns a map from spanning tree (frozenset of original edge
    ids) to its exact probability.
    """
    budgets = budgets or DEFAULT_BUDGETS
    if not g.is_connected():
        raise ValueError("the sequential tree measure needs a connected graph")
    order = list(enumeration)
    if sorted(order) != list(range(g.edge_count)):
        raise ValueError("enumeration must be a permutation of the edge ids")
    total = spanning_tree_count(g, budgets)
    if total > budgets.tree_law_cap:
        raise ResourceLimitError(
            f"{total} spanning trees exceeds the tree-law cap {budgets.tree_law_cap}"
        )

    law = {}
    # frame: (minor, orig->live edge map, position, included tuple, prob)
    stack = [(g, {e: e for e in range(g.edge_count)}, 0, (), Fraction(1))]
    while stack:
        cur, cur_ids, pos, included, prob = stack.pop()
        if cur.vertex_count == 1:
            law[frozenset(included)] = law.get(frozenset(included), Fraction(0)) + prob
            continue
        e = order[pos]
        live = cur_ids.get(e)
        if live is None:
            # already a discarded loop: excluded with probability one
            stack.append((cur, cur_ids, pos + 1, included, prob))
            continue
        p = edge_current_fraction(cur, live)
        if p < 1:
            child, mm = _delete_with_ids(cur, live, cur_ids)
            stack.append((child, mm, pos + 1, included, prob * (1 - p)))
        if p > 0:
            child, mm = _contract_with_ids(cur, live, cur_ids)
            stack.append((child, mm, pos + 1, included + (e,), prob * p))
    return law


def _contract_with_ids(cur, live, cur_ids):
    child, mm = contract(cur, live)
    return child, {
        orig: mm.edge_map[mid] for orig, mid in cur_ids.items() if mid in mm.edge_map
    }


def _delete_with_ids(cur, live, cur_ids):
    from .graph import delete

    child, mm = delete(cur, live)
    return child, {
        orig: mm.edge_map[mid] for orig, mid in cur_ids.items() if mid in mm.edge_map
    }


def exact_lerw_law(g, v, w, budgets=None):
    """Exact law of the loop-erasure of SRW from ``v`` stopped at ``w``.

    Built over self-avoiding prefixes: the next-step law out of a prefix is
    the first step of a walk conditioned to hit ``w`` before returning to
    the prefix.  Returns a map from vertex tuple to exact probability.
    """
    budgets = budgets or DEFAULT_BUDGETS
    if not g.is_connected():
        raise ValueError("need a connected graph")
    if v == w:
        raise ValueError("endpoints must differ")

    law = {}
    stack = [((v,), Fraction(1))]
    while stack:
        prefix, prob = stack.pop()
        if len(law) + len(stack) > budgets.lerw_law_path_cap:
            raise ResourceLimitError("loop-erased law support exceeded its cap")
        tip = prefix[-1]
        prefix_set = set(prefix)
        hit = None
        weights = []
        for u in sorted({nbr for nbr, _ in g.neighbors(tip)}):
            mult = len(g.find_edges(tip, u))
            if u == w:
                weights.append((u, Fraction(mult)))
            elif u in prefix_set:
                continue
            else:
                if hit is None:
                    hit = harmonic_hitting_probability(g, targets={w}, avoids=prefix_set)
                if hit[u] > 0:
                    weights.append((u, mult * hit[u]))
        total = sum(q for _, q in weights)
        for u, q in weights:
            p = prob * q / total
            if u == w:
                path = prefix + (w,)
                law[path] = law.get(path, Fraction(0)) + p
            else:
                stack.append((prefix + (u,), p))
    return law


def green_function_exact(box, x, y, budgets=None):
    """Expected visits to ``y`` by SRW from ``x`` killed at the box boundary.

    ``x`` and ``y`` are vertex ids of the box; a vertex on the boundary
    gives 0 (the walk is killed immediately).  Exact rational solve of the
    absorbing-chain system.
    """
    budgets = budgets or DEFAULT_BUDGETS
    n = box.n
    if box.norm(x) >= n or box.norm(y) >= n:
        return Fraction(0)
    interior = [v for v in range(box.vertex_count) if box.norm(v) < n]
    if len(interior) > budgets.exact_vertex_cap:
        raise ResourceLimitError(
            f"{len(interior)} interior vertices exceeds the cap {budgets.exact_vertex_cap}"
        )
    index = {v: i for i, v in enumerate(interior)}
    g = box.graph
    k = len(interior)
    rows = [[0] * k for _ in range(k)]
    rhs = [0] * k
    for v, i in index.items():
        deg = g.degree(v)
        rows[i][i] = deg
        for u, _ in g.neighbors(v):
            if u in index:
                rows[i][index[u]] -= 1
        if v == y:
            rhs[i] = deg
    sol = solve_linear_system(rows, rhs)
    return sol[index[x]]
