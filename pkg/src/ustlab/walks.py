"""Random-walk samplers: simple random walk, the first-entry spanning tree
built from a walk, the sequential edge-by-edge tree sampler, and
loop-erased walk sampling on graphs, boxes, and the infinite lattice.

Samplers are pure functions of (inputs, stream): the same
:class:`~ustlab.rng.RngStream` always reproduces the same output.
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import DEFAULT_BUDGETS
from .errors import StepBudgetExceeded
from .graph import LatticeBox, MultiGraph
from .paths import Path, loop_erase
from .rng import BufferedDraws


# -- stopping rules ----------------------------------------------------------

@dataclass(frozen=True)
class StopAfterSteps:
    steps: int


@dataclass(frozen=True)
class StopOnHit:
    targets: frozenset

    def __init__(self, targets):
        object.__setattr__(self, "targets", frozenset(targets))


@dataclass(frozen=True)
class StopWhenCovered:
    """Stop at the cover time: the first time every vertex has been visited."""


def _graph_and_context(context):
    if isinstance(context, MultiGraph):
        return context, context
    if isinstance(context, LatticeBox):
        return context.graph, context
    raise ValueError("expected a MultiGraph or LatticeBox context")


def srw_path(context, start, stop, rng, budgets=None):
    """Simple random walk trajectory under a stopping rule.

    On graphs and boxes the walk picks an incident edge-slot uniformly, so
    parallel edges are weighted by multiplicity.  On the infinite lattice
    (``context`` is the dimension d) the walk moves coordinate-wise and
    only ``StopAfterSteps`` makes sense.
    """
    budgets = budgets or DEFAULT_BUDGETS
    draws = BufferedDraws(rng)

    if isinstance(context, int):
        if not isinstance(stop, StopAfterSteps):
            raise ValueError("walks on the infinite lattice need a step-count rule")
        d = context
        pos = tuple(start)
        if len(pos) != d:
            raise ValueError("start coordinate has the wrong dimension")
        verts = [pos]
        for _ in range(stop.steps):
            z = draws.randbelow(2 * d)
            axis, sign = z >> 1, 1 if z & 1 else -1
            pos = pos[:axis] + (pos[axis] + sign,) + pos[axis + 1:]
            verts.append(pos)
        return Path(verts, d)

    g, ctx = _graph_and_context(context)
    verts = [start]
    if isinstance(stop, StopAfterSteps):
        remaining = stop.steps
        cur = start
        for _ in range(remaining):
            nbrs = g.neighbors(cur)
            cur = nbrs[draws.randbelow(len(nbrs))][0]
            verts.append(cur)
        return Path(verts, ctx)

    if isinstance(stop, StopOnHit):
        targets = stop.targets
        cur = start
        if cur in targets:
            return Path(verts, ctx)
        for _ in range(budgets.step_budget):
            nbrs = g.neighbors(cur)
            cur = nbrs[draws.randbelow(len(nbrs))][0]
            verts.append(cur)
            if cur in targets:
                return Path(verts, ctx)
        raise StepBudgetExceeded("walk did not reach its target within the step budget")

    if isinstance(stop, StopWhenCovered):
        seen = bytearray(g.vertex_count)
        seen[start] = 1
        unseen = g.vertex_count - 1
        cur = start
        if unseen == 0:
            return Path(verts, ctx)
        for _ in range(budgets.step_budget):
            nbrs = g.neighbors(cur)
            cur = nbrs[draws.randbelow(len(nbrs))][0]
            verts.append(cur)
            if not seen[cur]:
                seen[cur] = 1
                unseen -= 1
                if unseen == 0:
                    return Path(verts, ctx)
        raise StepBudgetExceeded("walk did not cover the graph within the step budget")

    raise ValueError(f"unknown stopping rule {stop!r}")


# -- first-entry trees -------------------------------------------------------

@dataclass(frozen=True)
class SpanningSubgraph:
    """Edge set over a graph, optionally oriented away from a root.

    ``parent_vertex``/``parent_edge`` give, for every non-root vertex the
    tree touches, the neighbor it was first entered from and the edge used;
    both are None for unoriented edge sets.
    """

    graph: MultiGraph
    edges: frozenset
    root: int = None
    parent_vertex: dict = None
    parent_edge: dict = None

    def is_spanning_tree(self):
        g = self.graph
        if len(self.edges) != g.vertex_count - 1:
            return False
        parent = list(range(g.vertex_count))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for eid in self.edges:
            a, b = g.endpoints[eid]
            ra, rb = find(a), find(b)
            if ra == rb:
                return False
            parent[ra] = rb
        return True

    def dump_edges(self):
        """Sorted endpoint pairs, one per edge, for diffable output."""
        pairs = sorted(
            tuple(sorted(self.graph.endpoints[eid])) for eid in self.edges
        )
        return pairs


def first_entry_tree(walk):
    """The subgraph of first-entry edges of a walk, oriented away from
    its start: draw each edge as the walk moves unless the far end was
    seen before."""
    path, g = walk, walk.context
    if isinstance(g, LatticeBox):
        g = g.graph
    if not isinstance(g, MultiGraph):
        raise ValueError("first-entry trees need a finite graph context")
    verts = path.vertices
    root = verts[0]
    seen = {root}
    parent_vertex = {}
    parent_edge = {}
    edges = set()
    for a, b in zip(verts, verts[1:]):
        if b not in seen:
            seen.add(b)
            eid = g.find_edges(a, b)[0]
            edges.add(eid)
            parent_vertex[b] = a
            parent_edge[b] = eid
    return SpanningSubgraph(
        graph=g,
        edges=frozenset(edges),
        root=root,
        parent_vertex=parent_vertex,
        parent_edge=parent_edge,
    )


def aldous_broder_tree(g, root, rng, budgets=None):
    """Uniform spanning tree of a connected graph, sampled by walking to
    the cover time and keeping every first-entry edge, oriented away from
    the root.

    The walk is tracked at the edge-slot level so that on multigraphs the
    tree records which parallel edge was actually traversed.
    """
    budgets = budgets or DEFAULT_BUDGETS
    if isinstance(g, LatticeBox):
        g = g.graph
    if not g.is_connected():
        raise ValueError("spanning-tree sampling needs a connected graph")
    draws = BufferedDraws(rng)
    n = g.vertex_count
    seen = bytearray(n)
    seen[root] = 1
    unseen = n - 1
    parent_vertex = {}
    parent_edge = {}
    edges = set()
    cur = root
    budget = budgets.step_budget
    while unseen:
        if budget == 0:
            raise StepBudgetExceeded("walk did not cover the graph within the step budget")
        budget -= 1
        nbrs = g.neighbors(cur)
        nxt, eid = nbrs[draws.randbelow(len(nbrs))]
        if not seen[nxt]:
            seen[nxt] = 1
            unseen -= 1
            edges.add(eid)
            parent_vertex[nxt] = cur
            parent_edge[nxt] = eid
        cur = nxt
    return SpanningSubgraph(
        graph=g,
        edges=frozenset(edges),
        root=root,
        parent_vertex=parent_vertex,
        parent_edge=parent_edge,
    )


def tree_path(t, frm, to):
    """The unique path in a spanning tree between two vertices."""
    g = t.graph
    if not t.is_spanning_tree():
        raise ValueError("not a spanning tree")
    if not (0 <= frm < g.vertex_count and 0 <= to < g.vertex_count):
        raise ValueError("vertex not in the tree")
    if frm == to:
        return Path([frm], g)
    tree_adj = [[] for _ in range(g.vertex_count)]
    for eid in t.edges:
        a, b = g.endpoints[eid]
        tree_adj[a].append(b)
        tree_adj[b].append(a)
    prev = {frm: None}
    queue = [frm]
    qi = 0
    while qi < len(queue):
        u = queue[qi]
        qi += 1
        if u == to:
            break
        for w in tree_adj[u]:
            if w not in prev:
                prev[w] = u
                queue.append(w)
    verts = [to]
    while prev[verts[-1]] is not None:
        verts.append(prev[verts[-1]])
    return Path(verts[::-1], g)


def mu3_sequential_sample(g, enumeration, rng, budgets=None):
    """Sample a spanning tree edge by edge in enumeration order.

    Each surviving edge is included with the exact current fraction of the
    running minor (so a bridge is forced in), then the minor is contracted
    or the edge deleted.  The result is a uniform spanning tree.
    """
    from .exact import edge_current_fraction
    from .graph import contract, delete

    if not g.is_connected():
        raise ValueError("needs a connected graph")
    order = list(enumeration)
    if sorted(order) != list(range(g.edge_count)):
        raise ValueError("enumeration must be a permutation of the edge ids")
    draws = BufferedDraws(rng)
    cur = g
    cur_ids = {e: e for e in range(g.edge_count)}
    included = []
    for e in order:
        live = cur_ids.get(e)
        if live is None:
            continue  # became a loop: forced out
        p = edge_current_fraction(cur, live)
        if p == 1 or (p > 0 and draws.uniform() < p):
            included.append(e)
            cur, mm = contract(cur, live)
        else:
            cur, mm = delete(cur, live)
        cur_ids = {
            orig: mm.edge_map[mid]
            for orig, mid in cur_ids.items()
            if mid in mm.edge_map
        }
    return SpanningSubgraph(graph=g, edges=frozenset(included))


# -- loop-erased walk sampling ----------------------------------------------

@dataclass(frozen=True)
class LerwResult:
    """A sampled loop-erased walk.

    On finite contexts the walk ran to its target and ``stable`` is True.
    On the infinite lattice the walk ran for ``cutoff`` construction steps
    plus as many verification steps; ``path`` is the prefix of the erasure
    that no verification step disturbed, and ``stable`` records whether the
    whole construction-time erasure survived verification untouched.
    """

    path: Path
    stable: bool
    steps: int


def lerw_sample(context, start, rng, targets=None, cutoff=None, budgets=None):
    budgets = budgets or DEFAULT_BUDGETS
    if isinstance(context, int):
        d = context
        if d <= 2:
            raise ValueError(
                "loop-erased walks on the infinite lattice need d >= 3 (transience)"
            )
        if cutoff is None:
            raise ValueError("a step cutoff is required on the infinite lattice")
        if 2 * cutoff > budgets.step_budget:
            raise StepBudgetExceeded("cutoff exceeds the step budget")
        return _lerw_lattice(d, tuple(start), cutoff, rng)
    if targets is None:
        raise ValueError("finite contexts need a target set")
    walk = srw_path(context, start, StopOnHit(targets), rng, budgets)
    return LerwResult(path=loop_erase(walk), stable=True, steps=walk.length)


def _lerw_lattice(d, start, cutoff, rng):
    draws = BufferedDraws(rng)
    stack = [start]
    pos = {start: 0}
    cur = start

    def step():
        nonlocal cur
        z = draws.randbelow(2 * d)
        axis, sign = z >> 1, 1 if z & 1 else -1
        cur = cur[:axis] + (cur[axis] + sign,) + cur[axis + 1:]
        j = pos.get(cur)
        if j is not None:
            for u in stack[j + 1:]:
                del pos[u]
            del stack[j + 1:]
        else:
            pos[cur] = len(stack)
            stack.append(cur)

    for _ in range(cutoff):
        step()
    height = len(stack)
    frozen = list(stack)
    floor = height
    for _ in range(cutoff):
        step()
        if len(stack) < floor:
            floor = len(stack)
    path = Path(frozen[:floor], d)
    return LerwResult(path=path, stable=floor == height, steps=2 * cutoff)
