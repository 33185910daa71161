"""Batch estimators for the dimension-dependent connectivity and scaling
phenomena, plus power-law slope fitting.

Every estimator is deterministic given (seed, stream_base): replicate ``i``
uses stream id ``stream_base + i``, and multi-point runs give point ``j``
the base ``j * reps``, so results never depend on scheduling or worker
count.  Replicates that hit a step cap are counted as censored, excluded
from the mean, and reported -- never silently dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .config import DEFAULT_BUDGETS
from .errors import SpecValidationError
from .exact import cylinder_probability
from .graph import build_box, wired_quotient


@dataclass(frozen=True)
class EstimateResult:
    """Monte Carlo estimate with replicate count and seed provenance."""

    mean: float
    stderr: float
    replicates: int
    seed: int
    stream_base: int
    censored: float = 0.0

    def as_dict(self):
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "replicates": self.replicates,
            "seed": self.seed,
            "stream_base": self.stream_base,
            "censored": self.censored,
        }


def _estimate(values, seed, stream_base, requested):
    values = np.asarray(values, dtype=np.float64)
    n = len(values)
    if n == 0:
        raise ValueError("all replicates were censored; nothing to estimate")
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return EstimateResult(
        mean=mean,
        stderr=stderr,
        replicates=n,
        seed=seed,
        stream_base=stream_base,
        censored=1.0 - n / requested,
    )


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares line through (log r, log p) points."""

    slope: float
    intercept: float
    residual: float
    points: tuple

    def as_dict(self):
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
            "points": [list(p) for p in self.points],
        }


def _weighted_line(xs, ys, ws):
    xs = np.asarray(xs)
    ys = np.asarray(ys)
    ws = np.asarray(ws)
    wsum = ws.sum()
    xbar = (ws * xs).sum() / wsum
    ybar = (ws * ys).sum() / wsum
    sxx = (ws * (xs - xbar) ** 2).sum()
    if sxx == 0:
        raise ValueError("degenerate abscissas: all r values equal")
    slope = (ws * (xs - xbar) * (ys - ybar)).sum() / sxx
    intercept = ybar - slope * xbar
    resid = math.sqrt(float((ws * (ys - slope * xs - intercept) ** 2).sum() / wsum))
    return slope, intercept, resid


def _fit_points(points):
    xs, ys, ws = [], [], []
    for r, p, se in points:
        if p <= 0:
            raise ValueError(
                f"cannot fit a power law through a nonpositive estimate p={p} at r={r}"
            )
        xs.append(math.log(r))
        ys.append(math.log(p))
        # weight by the variance of log p (delta method); exact points get
        # equal weight via a tiny floor
        ws.append(1.0 / max(se / p, 1e-9) ** 2)
    slope, intercept, resid = _weighted_line(xs, ys, ws)
    return SlopeFit(
        slope=float(slope),
        intercept=float(intercept),
        residual=float(resid),
        points=tuple(zip(xs, ys)),
    )


def fit_power_law(points):
    """Weighted least squares on (log r, log p) for >= 3 positive points.

    ``points`` is a sequence of (r, estimate, stderr) triples; weights come
    from the relative stderr.
    """
    points = list(points)
    if len(points) < 3:
        raise ValueError("a power-law fit needs at least 3 points")
    return _fit_points(points)


# -- intersection experiments -------------------------------------------


def intersection_probability(d, r, M, reps, seed, stream_base=0, budgets=None):
    """P(the loop-erasure of an M-step walk from v meets an independent
    M-step walk from w = v + r*e1).

    When r = 0 the shared origin is excluded from the intersection count.
    Nondecreasing in M in distribution; replicates always run their full
    M steps, so nothing is censored.
    """
    if d < 3:
        raise ValueError("d must be >= 3 for infinite-context loop-erased walks")
    if r < 0:
        raise ValueError("separation r must be >= 0")
    counts = kernels.intersection_counts(
        d, r, M, reps, seed, stream_base=stream_base, exclude_origin=(r == 0)
    )
    return _estimate((counts > 0).astype(np.float64), seed, stream_base, reps)


@dataclass(frozen=True)
class IntersectionMoments:
    """First and second moments of the multiplicity-weighted intersection
    count X, with the positivity probability and its second-moment lower
    bound (Paley-Zygmund)."""

    ex: EstimateResult
    ex2: EstimateResult
    p_positive: EstimateResult
    pz_lower: float
    pz_margin_sigma: float

    def paley_zygmund_holds(self, sigmas=3.0):
        """P(X>0) >= (EX)^2/EX^2 within ``sigmas`` propagated stderrs."""
        return (
            self.p_positive.mean
            >= self.pz_lower - sigmas * self.pz_margin_sigma
        )


def intersection_moments(d, r, M, reps, seed, stream_base=0, budgets=None):
    if d < 5:
        raise ValueError("moment scaling experiments need d >= 5")
    counts = kernels.intersection_counts(
        d, r, M, reps, seed, stream_base=stream_base, exclude_origin=(r == 0)
    ).astype(np.float64)
    x2 = counts**2
    pos = (counts > 0).astype(np.float64)
    ex = _estimate(counts, seed, stream_base, reps)
    ex2 = _estimate(x2, seed, stream_base, reps)
    p_positive = _estimate(pos, seed, stream_base, reps)
    # delta-method stderr of Q = P(X>0) - (EX)^2 / EX^2
    a, b, p = counts.mean(), x2.mean(), pos.mean()
    if b == 0:
        pz_lower, sigma = 0.0, 0.0
    else:
        grads = np.array([1.0, -2.0 * a / b, (a / b) ** 2])
        cov = np.cov(np.vstack([pos, counts, x2]), ddof=1) / reps
        sigma = float(math.sqrt(max(grads @ cov @ grads, 0.0)))
        pz_lower = float(a * a / b)
    return IntersectionMoments(
        ex=ex, ex2=ex2, p_positive=p_positive,
        pz_lower=pz_lower, pz_margin_sigma=sigma,
    )


# -- spanning-tree connectivity experiments ------------------------------


def connection_probability(d, n, r, M, reps, seed, stream_base=0, budgets=None):
    """P(tree distance between v and w is <= M) under the uniform spanning
    tree of the box, for v, w = -/+ (r/2) e1.

    The tree path between v and w is produced by the walk-based tree
    construction run from v and stopped at the first hit of w, which has
    exactly the uniform-tree law for this functional.
    """
    budgets = budgets or DEFAULT_BUDGETS
    if r < 1:
        raise ValueError("separation r must be >= 1")
    if r > n // 2:
        raise ValueError(f"separation r={r} too large for box n={n} (need r <= n/2)")
    nv = (2 * n + 1) ** d
    if nv > budgets.vertex_budget:
        raise SpecValidationError(
            f"box would have {nv} vertices, over the budget {budgets.vertex_budget}"
        )
    v = tuple([-(r // 2)] + [0] * (d - 1))
    w = tuple([r - r // 2] + [0] * (d - 1))
    dist, _, _ = kernels.box_tree_paths(
        d, n, v, w, None, reps=reps, seed=seed, stream_base=stream_base,
        step_cap=budgets.step_budget,
    )
    live = dist[dist >= 0]
    return _estimate((live <= M).astype(np.float64), seed, stream_base, reps)


def separator_probability(d, n, placement, reps, seed, M=None, stream_base=0,
                          budgets=None):
    """P(x lies on the tree path between v and w) under the uniform
    spanning tree of the box; ``placement`` is the coordinate triple
    (v, x, w).  With ``M`` given, the event also requires the path length
    to be <= M."""
    budgets = budgets or DEFAULT_BUDGETS
    v, x, w = (tuple(c) for c in placement)
    for c in (v, x, w):
        if max(abs(q) for q in c) > n // 2:
            raise ValueError(f"placement {c} must lie within the half box n/2")
    nv = (2 * n + 1) ** d
    if nv > budgets.vertex_budget:
        raise SpecValidationError(
            f"box would have {nv} vertices, over the budget {budgets.vertex_budget}"
        )
    dist, xhit, _ = kernels.box_tree_paths(
        d, n, v, w, x, reps=reps, seed=seed, stream_base=stream_base,
        step_cap=budgets.step_budget,
    )
    ok = dist >= 0
    values = xhit[ok].astype(np.float64)
    if M is not None:
        values = values * (dist[ok] <= M)
    return _estimate(values, seed, stream_base, reps)


def component_density_check(d, n, M, reps, seed, pairs_per_tree=64,
                            stream_base=0, budgets=None):
    """Estimate of S = sum over ordered vertex pairs of 1{tree distance <= M},
    by pair subsampling in freshly sampled spanning trees.

    Returns (sum_estimate, report); the report carries the ratio S / N^2
    (N = vertex count), the quantity that must vanish with n when the
    limiting forest has unboundedly many components.
    """
    budgets = budgets or DEFAULT_BUDGETS
    nv = (2 * n + 1) ** d
    if nv > budgets.vertex_budget:
        raise SpecValidationError(
            f"box would have {nv} vertices, over the budget {budgets.vertex_budget}"
        )
    hits = kernels.box_cover_pair_connectivity(
        d, n, M, reps, pairs_per_tree, seed, stream_base=stream_base,
        step_cap=budgets.step_budget,
    )
    live = hits[hits >= 0].astype(np.float64) / pairs_per_tree
    frac = _estimate(live, seed, stream_base, reps)
    total = float(nv) ** 2
    sum_estimate = EstimateResult(
        mean=frac.mean * total,
        stderr=frac.stderr * total,
        replicates=frac.replicates,
        seed=seed,
        stream_base=stream_base,
        censored=frac.censored,
    )
    report = {
        "vertices": nv,
        "pairs_per_tree": pairs_per_tree,
        "M": M,
        "ratio_to_pair_count": frac.mean,
        "ratio_stderr": frac.stderr,
    }
    return sum_estimate, report


# -- exact boundary-condition comparison ---------------------------------


@dataclass(frozen=True)
class FreeWiredRow:
    n: int
    free: Fraction
    wired: Fraction

    @property
    def gap(self):
        return self.free - self.wired


def free_wired_gap(d, edge_coords, m, n_list, budgets=None):
    """Exact cylinder probabilities of an edge set under free and wired
    boundary conditions, for each box radius in ``n_list``.

    ``edge_coords`` is a sequence of coordinate pairs; every edge must lie
    inside the inner box of radius ``m`` so it survives the wired quotient.
    """
    budgets = budgets or DEFAULT_BUDGETS
    rows = []
    for n in n_list:
        if not (0 <= m < n):
            raise ValueError(f"need 0 <= m < n, got m={m}, n={n}")
        box = build_box(d, n, budgets)
        edge_ids = [box.find_edge(a, b) for a, b in edge_coords]
        free = cylinder_probability(box.graph, edge_ids, budgets)
        quotient, mm = wired_quotient(box, m)
        mapped = []
        for e in edge_ids:
            if e not in mm.edge_map:
                raise ValueError(
                    "edge set must lie inside the inner box of radius m"
                )
            mapped.append(mm.edge_map[e])
        wired = cylinder_probability(quotient, mapped, budgets)
        rows.append(FreeWiredRow(n=n, free=free, wired=wired))
    return rows


# -- Green's function scaling ---------------------------------------------


def green_function_scaling(d, r_list, n, seed, reps=200_000, stream_base=0,
                           budgets=None):
    """Log-log slope of the expected visit counts G(0, r e1) on a box with
    absorbing boundary.

    Small boxes are solved exactly (stderr 0); larger ones use visit-count
    Monte Carlo.  Accepts 2 points (plain slope) or more (least squares).
    """
    budgets = budgets or DEFAULT_BUDGETS
    r_list = sorted(set(int(r) for r in r_list))
    if len(r_list) < 2:
        raise ValueError("need at least two separations")
    if max(r_list) > n // 4:
        raise ValueError("need r <= n/4 so targets sit well inside the box")
    interior = (2 * n - 1) ** d
    points = []
    if interior <= budgets.exact_vertex_cap:
        box = build_box(d, n, budgets)
        origin = box.index_of(tuple([0] * d))
        for r in r_list:
            target = box.index_of(tuple([r] + [0] * (d - 1)))
            g = green_function_exact(box, origin, target, budgets)
            points.append((r, float(g), 0.0))
    else:
        visits = kernels.box_green_visit_counts(
            d, n, r_list, reps, seed, stream_base=stream_base
        )
        for j, r in enumerate(r_list):
            est = _estimate(visits[:, j], seed, stream_base, reps)
            points.append((r, est.mean, est.stderr))
    return _fit_points(points), points
