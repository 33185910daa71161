"""Walk trajectories and their algebra: reversal, splicing, truncation,
loop-erasure, intersection counting, path weights, and loop-erasure fibers.

A path lives in a context: a :class:`~ustlab.graph.MultiGraph`, a
:class:`~ustlab.graph.LatticeBox` (vertices are vertex ids in both cases),
or a bare dimension ``d`` for walks on the infinite lattice (vertices are
coordinate tuples).
"""

from __future__ import annotations

from fractions import Fraction

from .config import DEFAULT_BUDGETS
from .errors import ResourceLimitError
from .graph import LatticeBox, MultiGraph


class Path:
    """Finite walk trajectory; ``length`` is the number of steps."""

    __slots__ = ("vertices", "context")

    def __init__(self, vertices, context=None):
        vertices = tuple(vertices)
        if not vertices:
            raise ValueError("a path has at least one vertex")
        self.vertices = vertices
        self.context = context

    @property
    def length(self):
        return len(self.vertices) - 1

    def __iter__(self):
        return iter(self.vertices)

    def __getitem__(self, i):
        return self.vertices[i]

    def __eq__(self, other):
        return isinstance(other, Path) and self.vertices == other.vertices

    def __hash__(self):
        return hash(self.vertices)

    def __repr__(self):
        return f"Path({list(self.vertices)!r})"

    @property
    def start(self):
        return self.vertices[0]

    @property
    def end(self):
        return self.vertices[-1]

    def reverse(self):
        return Path(self.vertices[::-1], self.context)

    def concat(self, other):
        """Splice: self followed by other; endpoints must match."""
        if self.end != other.start:
            raise ValueError(
                f"cannot splice: path ends at {self.end}, next starts at {other.start}"
            )
        return Path(self.vertices + other.vertices[1:], self.context)

    def prefix(self, n):
        """Initial segment of n steps."""
        if not (0 <= n <= self.length):
            raise ValueError(f"prefix length {n} out of range 0..{self.length}")
        return Path(self.vertices[: n + 1], self.context)

    def suffix(self, n):
        """The path from step n onwards, so p == p.prefix(n).concat(p.suffix(n))."""
        if not (0 <= n <= self.length):
            raise ValueError(f"suffix start {n} out of range 0..{self.length}")
        return Path(self.vertices[n:], self.context)

    def is_self_avoiding(self):
        return len(set(self.vertices)) == len(self.vertices)

    def validate(self):
        """Check consecutive adjacency in the context; raises on violation."""
        ctx = self.context
        for a, b in zip(self.vertices, self.vertices[1:]):
            if isinstance(ctx, MultiGraph):
                ok = bool(ctx.find_edges(a, b))
            elif isinstance(ctx, LatticeBox):
                ok = bool(ctx.graph.find_edges(a, b))
            elif isinstance(ctx, int):
                ok = sum(abs(x - y) for x, y in zip(a, b)) == 1
            else:
                return self
            if not ok:
                raise ValueError(f"vertices {a} and {b} are not adjacent")
        return self


def loop_erase(p):
    """Chronological loop-erasure: erase the loop at the first revisited
    vertex, repeat.  Keeps the endpoints; the identity on self-avoiding
    paths.

    Implemented incrementally with a last-occurrence index, O(length);
    equivalence with the erase-first-loop-and-repeat definition is tested
    against :func:`naive_loop_erase`.
    """
    stack = []
    pos = {}
    for v in p.vertices:
        j = pos.get(v)
        if j is not None:
            for u in stack[j + 1:]:
                del pos[u]
            del stack[j + 1:]
        else:
            pos[v] = len(stack)
            stack.append(v)
    return Path(stack, p.context)


def naive_loop_erase(p):
    """Reference implementation: literally erase the first loop, repeat."""
    verts = list(p.vertices)
    while True:
        seen = {}
        loop = None
        for j, v in enumerate(verts):
            if v in seen:
                loop = (seen[v], j)
                break
            seen[v] = j
        if loop is None:
            return Path(verts, p.context)
        i, j = loop
        del verts[i + 1: j + 1]


def paths_intersect(p, q):
    """Whether p(i) = q(j) for some i, j not both zero."""
    qset = set(q.vertices)
    for i, v in enumerate(p.vertices):
        if v not in qset:
            continue
        if i == 0 and v == q.vertices[0]:
            # the (0,0) pair does not count; the vertex must recur in q
            if v in q.vertices[1:]:
                return True
            continue
        return True
    return False


def intersection_count(p, q, exclude=None):
    """Number of time indices j with q(j) on p, so a point of p hit k times
    by q counts k.  ``exclude`` drops a designated vertex (typically a
    shared origin) from the count entirely."""
    pset = set(p.vertices)
    if exclude is not None:
        pset.discard(exclude)
    return sum(1 for v in q.vertices if v in pset)


def path_weight(p):
    """Probability that simple random walk follows ``p``:
    the product of 1/degree over all but the last vertex.

    Degrees come from the context (graph degree, box degree, or 2d on the
    infinite lattice).
    """
    ctx = p.context
    w = Fraction(1)
    for v in p.vertices[:-1]:
        if isinstance(ctx, MultiGraph):
            deg = ctx.degree(v)
        elif isinstance(ctx, LatticeBox):
            deg = ctx.graph.degree(v)
        elif isinstance(ctx, int):
            deg = 2 * ctx
        else:
            raise ValueError("path weight needs a graph, box, or dimension context")
        w /= deg
    return w


def _graph_of(p):
    ctx = p.context
    if isinstance(ctx, MultiGraph):
        return ctx
    if isinstance(ctx, LatticeBox):
        return ctx.graph
    raise ValueError("fiber enumeration needs a finite graph context")


def gamma_fiber(alpha, m, budgets=None):
    """All length-m paths whose loop-erasure is ``alpha``.

    Depth-first extension with pruning: a partial walk whose erasure stack
    has drifted from ``alpha`` is cut as soon as the remaining steps cannot
    rebuild the target.
    """
    budgets = budgets or DEFAULT_BUDGETS
    if not alpha.is_self_avoiding():
        raise ValueError("the fiber target must be self-avoiding")
    g = _graph_of(alpha)
    target = alpha.vertices
    out = []

    def stack_of(walk):
        return loop_erase(Path(walk, alpha.context)).vertices

    def min_steps_left(stack):
        k = 0
        for a, b in zip(stack, target):
            if a != b:
                break
            k += 1
        if k == len(stack) and k <= len(target):
            return len(target) - k
        return len(target) - k + 1

    def extend(walk, stack):
        if len(out) > budgets.fiber_cap:
            raise ResourceLimitError("fiber enumeration exceeded its cap")
        steps_left = m - (len(walk) - 1)
        if steps_left == 0:
            if stack == target:
                out.append(Path(walk, alpha.context))
            return
        if min_steps_left(stack) > steps_left:
            return
        tip = walk[-1]
        for u in sorted({nbr for nbr, _ in g.neighbors(tip)}):
            walk.append(u)
            extend(walk, stack_of(walk))
            walk.pop()

    if len(target) - 1 <= m:
        extend([target[0]], (target[0],))
    return out


def phi_fiber(alpha, m, budgets=None):
    """All length-m paths whose backward loop-erasure is ``alpha``:
    reverse every member of the fiber of the reversed target."""
    return [p.reverse() for p in gamma_fiber(alpha.reverse(), m, budgets)]


def _site_multiset(p):
    return tuple(sorted(p.vertices, key=repr))


def verify_fiber_multisets(alpha, m, budgets=None):
    """Checkable consequence of the forward/backward fiber bijection.

    True iff the multiset of site-multisets agrees between the forward and
    backward fibers of ``alpha`` at length ``m``, and for every designated
    vertex z the total walk weight of fiber members avoiding z after time
    zero agrees as well.
    """
    fwd = gamma_fiber(alpha, m, budgets)
    bwd = phi_fiber(alpha, m, budgets)
    if sorted(_site_multiset(p) for p in fwd) != sorted(_site_multiset(p) for p in bwd):
        return False
    g = _graph_of(alpha)

    def avoids_after_zero(p, z):
        return z not in p.vertices[1:]

    for z in range(g.vertex_count):
        wf = sum((path_weight(p) for p in fwd if avoids_after_zero(p, z)), Fraction(0))
        wb = sum((path_weight(p) for p in bwd if avoids_after_zero(p, z)), Fraction(0))
        if wf != wb:
            return False
    return True
