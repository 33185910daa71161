"""Resource budgets.

All hard limits are configuration rather than constants: every operation
that can blow up takes an optional ``budgets`` argument and falls back to
``DEFAULT_BUDGETS``.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Budgets:
    # largest lattice box, in vertices
    vertex_budget: int = 5_000_000
    # largest graph handed to the exact determinant / linear-solve layer
    exact_vertex_cap: int = 2000
    # cap on the number of spanning trees expanded by the recursive tree law
    tree_law_cap: int = 1_000_000
    # cap on edges for exhaustive spanning-tree enumeration
    enumeration_edge_cap: int = 25
    # cap on support paths when building an exact loop-erased walk law
    lerw_law_path_cap: int = 100_000
    # cap on fiber enumeration size
    fiber_cap: int = 1_000_000
    # walk steps before a sampler gives up
    step_budget: int = 1_000_000_000


DEFAULT_BUDGETS = Budgets()
