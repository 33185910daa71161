"""Finite multigraphs, lattice boxes, and contraction/deletion minors.

Vertices are dense integers ``0..vertex_count-1``; edges are dense integers
indexing an endpoint table.  Parallel edges are distinct edge ids.  Loop
edges (equal endpoints) are dropped the moment they appear, so degree
counts seen by walk samplers never include loops.

Graphs are immutable once built; ``contract``/``delete``/``wired_quotient``
return a new graph together with a :class:`MinorMap` recording how vertices
and surviving edges of a parent map into the minor.

Distances between lattice coordinates are Chebyshev (max-coordinate)
everywhere; the edge structure of a box is nearest-neighbor in the l1
sense (coordinates differing by 1 in exactly one slot).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .config import DEFAULT_BUDGETS
from .errors import ResourceLimitError


def chebyshev(a, b):
    """Chebyshev distance max_i |a_i - b_i| between two coordinate tuples."""
    return max(abs(x - y) for x, y in zip(a, b))


@dataclass(frozen=True)
class MinorMap:
    """Vertex and edge identifications induced by one or more minor steps.

    ``vertex_map[v]`` is the child id of parent vertex ``v`` (total map).
    ``edge_map[e]`` is the child id of parent edge ``e``; it is defined
    exactly on parent edges that were neither deleted, contracted, nor
    turned into discarded loops.
    """

    vertex_map: tuple
    edge_map: dict

    def compose(self, later):
        """Map of ``self`` followed by ``later`` (parent -> grandchild)."""
        vmap = tuple(later.vertex_map[v] for v in self.vertex_map)
        emap = {}
        for e, mid in self.edge_map.items():
            if mid in later.edge_map:
                emap[e] = later.edge_map[mid]
        return MinorMap(vmap, emap)

    @staticmethod
    def identity(g):
        return MinorMap(
            tuple(range(g.vertex_count)),
            {e: e for e in range(g.edge_count)},
        )


class MultiGraph:
    """Undirected multigraph with parallel edges and no loops."""

    __slots__ = ("vertex_count", "endpoints", "adjacency", "_connected")

    def __init__(self, vertex_count, edges):
        if vertex_count < 1:
            raise ValueError("graph needs at least one vertex")
        self.vertex_count = vertex_count
        endpoints = []
        for u, v in edges:
            if not (0 <= u < vertex_count and 0 <= v < vertex_count):
                raise ValueError(f"edge ({u},{v}) out of range")
            if u == v:
                continue  # loops are discarded on creation
            endpoints.append((u, v))
        self.endpoints = tuple(endpoints)
        adjacency = [[] for _ in range(vertex_count)]
        for eid, (u, v) in enumerate(endpoints):
            adjacency[u].append((v, eid))
            adjacency[v].append((u, eid))
        self.adjacency = [tuple(a) for a in adjacency]
        self._connected = None

    @property
    def edge_count(self):
        return len(self.endpoints)

    def degree(self, v):
        """Number of incident edge-slots; parallel edges count with multiplicity."""
        return len(self.adjacency[v])

    def neighbors(self, v):
        """Incident (neighbor, edge_id) slots of ``v``."""
        return self.adjacency[v]

    def find_edges(self, u, v):
        """All edge ids joining ``u`` and ``v`` (possibly several parallels)."""
        return [eid for w, eid in self.adjacency[u] if w == v]

    def other_end(self, eid, v):
        a, b = self.endpoints[eid]
        if v == a:
            return b
        if v == b:
            return a
        raise ValueError(f"vertex {v} is not an endpoint of edge {eid}")

    def is_connected(self):
        if self._connected is None:
            seen = bytearray(self.vertex_count)
            seen[0] = 1
            stack = [0]
            count = 1
            while stack:
                u = stack.pop()
                for w, _ in self.adjacency[u]:
                    if not seen[w]:
                        seen[w] = 1
                        count += 1
                        stack.append(w)
            self._connected = count == self.vertex_count
        return self._connected

    def components(self):
        """List of vertex lists, one per connected component."""
        seen = bytearray(self.vertex_count)
        comps = []
        for s in range(self.vertex_count):
            if seen[s]:
                continue
            seen[s] = 1
            comp = [s]
            stack = [s]
            while stack:
                u = stack.pop()
                for w, _ in self.adjacency[u]:
                    if not seen[w]:
                        seen[w] = 1
                        comp.append(w)
                        stack.append(w)
            comps.append(comp)
        return comps

    def __repr__(self):
        return f"MultiGraph({self.vertex_count} vertices, {self.edge_count} edges)"


def is_connected(g):
    """True iff ``g`` has one component; a single vertex counts as connected."""
    return g.is_connected()


def _check_edge(g, e):
    if not (0 <= e < g.edge_count):
        raise ValueError(f"unknown edge id {e}")


def contract(g, e):
    """Contract edge ``e``: identify its endpoints, drop resulting loops.

    The identified vertex inherits the smaller of the two endpoint ids and
    the remaining vertices are compacted densely, so results are
    deterministic.  Parallel edges of ``e`` become loops and are discarded;
    they are absent from the returned MinorMap's edge_map.
    """
    _check_edge(g, e)
    u, v = g.endpoints[e]
    lo, hi = (u, v) if u < v else (v, u)
    vmap = []
    for x in range(g.vertex_count):
        if x == hi:
            vmap.append(lo)
        elif x > hi:
            vmap.append(x - 1)
        else:
            vmap.append(x)
    new_edges = []
    emap = {}
    for eid, (a, b) in enumerate(g.endpoints):
        if eid == e:
            continue
        a2, b2 = vmap[a], vmap[b]
        if a2 == b2:
            continue  # became a loop: thrown away
        emap[eid] = len(new_edges)
        new_edges.append((a2, b2))
    child = MultiGraph(g.vertex_count - 1, new_edges)
    return child, MinorMap(tuple(vmap), emap)


def delete(g, e):
    """Delete edge ``e``; the vertex set is unchanged."""
    _check_edge(g, e)
    new_edges = []
    emap = {}
    for eid, (a, b) in enumerate(g.endpoints):
        if eid == e:
            continue
        emap[eid] = len(new_edges)
        new_edges.append((a, b))
    child = MultiGraph(g.vertex_count, new_edges)
    return child, MinorMap(tuple(range(g.vertex_count)), emap)


@dataclass(frozen=True)
class LatticeBox:
    """The nearest-neighbor graph on integer points of Chebyshev norm <= n.

    ``coords[v]`` is the coordinate tuple of vertex ``v``; ``coord_index``
    is the inverse map.  Vertex numbering is lexicographic by coordinates.
    """

    d: int
    n: int
    graph: MultiGraph
    coords: tuple
    coord_index: dict

    @property
    def vertex_count(self):
        return self.graph.vertex_count

    def index_of(self, coord):
        return self.coord_index[tuple(coord)]

    def norm(self, v):
        return max(abs(c) for c in self.coords[v])

    def boundary_vertices(self):
        """Vertices with Chebyshev norm exactly n."""
        return [v for v in range(self.vertex_count) if self.norm(v) == self.n]

    def find_edge(self, a, b):
        """The unique edge id between coordinate tuples ``a`` and ``b``."""
        eids = self.graph.find_edges(self.index_of(a), self.index_of(b))
        if not eids:
            raise ValueError(f"no edge between {a} and {b}")
        return eids[0]


def build_box(d, n, budgets=None):
    """Box of diameter 2n centered at the origin in d dimensions."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if n < 0:
        raise ValueError("radius must be >= 0")
    budgets = budgets or DEFAULT_BUDGETS
    nv = (2 * n + 1) ** d
    if nv > budgets.vertex_budget:
        raise ResourceLimitError(
            f"box would have {nv} vertices, over the budget of {budgets.vertex_budget}"
        )
    coords = tuple(itertools.product(range(-n, n + 1), repeat=d))
    coord_index = {c: i for i, c in enumerate(coords)}
    edges = []
    for i, c in enumerate(coords):
        for axis in range(d):
            if c[axis] + 1 <= n:
                nbr = c[:axis] + (c[axis] + 1,) + c[axis + 1:]
                edges.append((i, coord_index[nbr]))
    graph = MultiGraph(nv, edges)
    return LatticeBox(d=d, n=n, graph=graph, coords=coords, coord_index=coord_index)


def wired_quotient(box, m):
    """Identify every vertex of Chebyshev norm > m to a single wired vertex.

    Electrically this short-circuits everything outside the inner box of
    radius m.  Survivors keep their lexicographic order with ids 0..k-1 and
    the wired vertex gets id k.  Edges wholly outside become loops and are
    discarded; parallel edges into the wired vertex are kept.
    """
    if not (0 <= m < box.n):
        raise ValueError(f"inner radius m={m} must satisfy 0 <= m < n={box.n}")
    g = box.graph
    vmap = []
    survivors = 0
    for v in range(g.vertex_count):
        if box.norm(v) <= m:
            vmap.append(survivors)
            survivors += 1
        else:
            vmap.append(-1)
    wired = survivors
    vmap = tuple(x if x >= 0 else wired for x in vmap)
    new_edges = []
    emap = {}
    for eid, (a, b) in enumerate(g.endpoints):
        a2, b2 = vmap[a], vmap[b]
        if a2 == b2:
            continue
        emap[eid] = len(new_edges)
        new_edges.append((a2, b2))
    child = MultiGraph(survivors + 1, new_edges)
    return child, MinorMap(vmap, emap)


# -- small named builders used by tests and the CLI -------------------------

def path_graph(k):
    """Path on k vertices."""
    return MultiGraph(k, [(i, i + 1) for i in range(k - 1)])


def cycle_graph(k):
    """Cycle on k vertices."""
    return MultiGraph(k, [(i, (i + 1) % k) for i in range(k)])


def complete_graph(k):
    """Complete simple graph on k vertices."""
    return MultiGraph(k, [(i, j) for i in range(k) for j in range(i + 1, k)])


def grid_graph(rows, cols):
    """rows x cols grid (so ``grid_graph(2, 3)`` is the 2x3 grid on 6 vertices)."""
    def vid(r, c):
        return r * cols + c

    edges = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append((vid(r, c), vid(r, c + 1)))
            if r + 1 < rows:
                edges.append((vid(r, c), vid(r + 1, c)))
    return MultiGraph(rows * cols, edges)
