"""Command-line front end.

Three subcommands:

* ``exact``       -- tree counts, cylinder probabilities, current fractions,
                     exact walk laws, Green values, free/wired comparisons
* ``sample``      -- dump a single sampled tree, walk, or loop-erased walk
* ``experiment``  -- batch Monte Carlo estimators

Each accepts ``--spec FILE`` (a JSON document; ``-`` for stdin) or a small
set of inline flags for the common cases.  Exit codes: 0 success, 2 schema
error, 3 size-budget error, 4 step-budget exhaustion.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from .config import DEFAULT_BUDGETS
from .errors import ResourceLimitError, SpecValidationError, StepBudgetExceeded
from .records import (
    ExperimentSpec,
    ResultRecord,
    fraction_payload,
    parse_spec,
    serialize_record,
    validate_spec,
    write_results,
)


def _build_graph(gspec, budgets):
    from .graph import build_box, complete_graph, cycle_graph, grid_graph, path_graph, MultiGraph

    t = gspec["type"]
    if t == "box":
        return build_box(gspec["d"], gspec["n"], budgets).graph
    if t == "cycle":
        return cycle_graph(gspec["k"])
    if t == "complete":
        return complete_graph(gspec["k"])
    if t == "path":
        return path_graph(gspec["k"])
    if t == "grid":
        return grid_graph(gspec["rows"], gspec["cols"])
    if t == "edges":
        return MultiGraph(gspec["vertex_count"], [tuple(e) for e in gspec["edges"]])
    raise SpecValidationError(f"unknown graph type {t!r}", field="graph.type")


def run(spec, budgets=None):
    """Execute a validated spec and assemble its result record."""
    budgets = budgets or DEFAULT_BUDGETS
    started = time.perf_counter()
    outputs = _dispatch(spec, budgets)
    return ResultRecord(
        spec=spec, outputs=outputs, timing=time.perf_counter() - started
    )


def _points_output(results):
    return [
        {"label": label, **est.as_dict()}
        for label, est in results
    ]


def _dispatch(spec, budgets):
    from . import experiments as X

    kind, p, seed = spec.kind, spec.params, spec.seed

    if kind == "intersection":
        points = []
        rows = []
        reps = p["reps"]
        for j, r in enumerate(p["r"]):
            est = X.intersection_probability(
                p["d"], r, p["M"], reps, seed, stream_base=j * reps, budgets=budgets
            )
            rows.append((f"r={r}", est))
            points.append((r, est.mean, est.stderr))
        out = {"points": _points_output(rows)}
        if len(points) >= 3:
            out["slope_fit"] = X.fit_power_law(points).as_dict()
        return out

    if kind == "moments":
        out = {"points": []}
        reps = p["reps"]
        for j, r in enumerate(p["r"]):
            m = X.intersection_moments(
                p["d"], r, p["M"], reps, seed, stream_base=j * reps, budgets=budgets
            )
            out["points"].append(
                {
                    "label": f"r={r}",
                    "EX": m.ex.as_dict(),
                    "EX2": m.ex2.as_dict(),
                    "P_positive": m.p_positive.as_dict(),
                    "paley_zygmund_lower": m.pz_lower,
                    "paley_zygmund_sigma": m.pz_margin_sigma,
                }
            )
        return out

    if kind == "connection":
        rows = []
        points = []
        reps = p["reps"]
        ns = p["n"]
        rs = p["r"]
        if len(ns) == 1:
            ns = ns * len(rs)
        if len(ns) != len(rs):
            raise SpecValidationError("n and r lists must have equal length", field="n")
        for j, (n, r) in enumerate(zip(ns, rs)):
            est = X.connection_probability(
                p["d"], n, r, p["M"], reps, seed, stream_base=j * reps, budgets=budgets
            )
            rows.append((f"n={n},r={r}", est))
            points.append((r, est.mean, est.stderr))
        out = {"points": _points_output(rows)}
        if len(points) >= 3:
            out["slope_fit"] = X.fit_power_law(points).as_dict()
        return out

    if kind == "component_density":
        out = {"points": []}
        reps = p["reps"]
        for j, n in enumerate(p["n"]):
            est, report = X.component_density_check(
                p["d"], n, p["M"], reps, seed,
                pairs_per_tree=p["pairs_per_tree"],
                stream_base=j * reps, budgets=budgets,
            )
            out["points"].append(
                {"label": f"n={n}", "sum_estimate": est.as_dict(), "report": report}
            )
        return out

    if kind == "separator":
        est = X.separator_probability(
            p["d"], p["n"], p["placement"], p["reps"], seed,
            M=p.get("M"), budgets=budgets,
        )
        return {"points": [{"label": "separator", **est.as_dict()}]}

    if kind == "green_scaling":
        fit, pts = X.green_function_scaling(
            p["d"], p["r"], p["n"], seed, reps=p["reps"], budgets=budgets
        )
        return {
            "points": [
                {"label": f"r={r}", "mean": g, "stderr": se} for r, g, se in pts
            ],
            "slope_fit": fit.as_dict(),
        }

    if kind == "free_wired_gap":
        edges = [(tuple(a), tuple(b)) for a, b in p["edges"]]
        rows = X.free_wired_gap(p["d"], edges, p["m"], p["n"], budgets=budgets)
        return {
            "rows": [
                {
                    "n": row.n,
                    "free": fraction_payload(row.free),
                    "wired": fraction_payload(row.wired),
                    "gap": fraction_payload(row.gap),
                }
                for row in rows
            ]
        }

    if kind == "tree_count":
        from .exact import spanning_tree_count

        g = _build_graph(p["graph"], budgets)
        return {"count": str(spanning_tree_count(g, budgets))}

    if kind == "cylinder":
        from .exact import cylinder_probability

        g = _build_graph(p["graph"], budgets)
        return {"probability": fraction_payload(cylinder_probability(g, p["edges"], budgets))}

    if kind == "current_fraction":
        from .exact import edge_current_fraction

        g = _build_graph(p["graph"], budgets)
        return {"fraction": fraction_payload(edge_current_fraction(g, p["edge"], budgets))}

    if kind == "mu3_law":
        from .exact import mu3_exact_law

        g = _build_graph(p["graph"], budgets)
        law = mu3_exact_law(g, range(g.edge_count), budgets)
        return {
            "law": [
                {"tree": sorted(t), "probability": fraction_payload(q)}
                for t, q in sorted(law.items(), key=lambda kv: sorted(kv[0]))
            ]
        }

    if kind == "lerw_law":
        from .exact import exact_lerw_law

        g = _build_graph(p["graph"], budgets)
        law = exact_lerw_law(g, p["v"], p["w"], budgets)
        return {
            "law": [
                {"path": list(path), "probability": fraction_payload(q)}
                for path, q in sorted(law.items())
            ]
        }

    if kind == "green_exact":
        from .exact import green_function_exact
        from .graph import build_box

        box = build_box(p["d"], p["n"], budgets)
        g = green_function_exact(
            box, box.index_of(tuple(p["x"])), box.index_of(tuple(p["y"])), budgets
        )
        return {"green": fraction_payload(g)}

    if kind == "sample_tree":
        from .graph import build_box
        from .rng import RngStream
        from .walks import aldous_broder_tree

        box = build_box(p["d"], p["n"], budgets)
        tree = aldous_broder_tree(box.graph, 0, RngStream(seed), budgets)
        lines = []
        for a, b in tree.dump_edges():
            ca, cb = box.coords[a], box.coords[b]
            lines.append(
                " ".join(str(q) for q in ca) + " | " + " ".join(str(q) for q in cb)
            )
        return {"edges": sorted(lines)}

    if kind == "sample_walk":
        from .graph import build_box
        from .rng import RngStream
        from .walks import StopAfterSteps, srw_path

        box = build_box(p["d"], p["n"], budgets)
        origin = box.index_of(tuple([0] * p["d"]))
        walk = srw_path(box, origin, StopAfterSteps(p["steps"]), RngStream(seed), budgets)
        return {"walk": [list(box.coords[v]) for v in walk.vertices]}

    if kind == "sample_lerw":
        from .rng import RngStream
        from .walks import lerw_sample

        res = lerw_sample(
            p["d"], [0] * p["d"], RngStream(seed), cutoff=p["cutoff"], budgets=budgets
        )
        return {
            "path": [list(v) for v in res.path.vertices],
            "stable": bool(res.stable),
            "steps": res.steps,
        }

    raise SpecValidationError(f"kind {kind!r} has no runner", field="kind")


_SUBCOMMAND_KINDS = {
    "exact": {
        "tree_count", "cylinder", "current_fraction", "mu3_law", "lerw_law",
        "green_exact", "free_wired_gap",
    },
    "sample": {"sample_tree", "sample_walk", "sample_lerw"},
    "experiment": {
        "intersection", "moments", "connection", "component_density",
        "separator", "green_scaling",
    },
}


def _inline_spec(args):
    """Assemble a spec document from inline flags (simple cases only)."""
    doc = {"kind": args.kind}
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.dim is not None:
        doc["d"] = args.dim
    if args.box is not None:
        doc["n"] = args.box
    if args.r is not None:
        doc["r"] = args.r
    if args.reps is not None:
        doc["reps"] = args.reps
    if args.cutoff is not None:
        if args.kind == "sample_lerw":
            doc["cutoff"] = args.cutoff
        else:
            doc["M"] = args.cutoff
    if args.steps is not None:
        doc["steps"] = args.steps
    return doc


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="ustlab",
        description="spanning-tree and loop-erased-walk laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("exact", "sample", "experiment"):
        sp = sub.add_parser(name)
        sp.add_argument("kind", nargs="?", help="spec kind (or give --spec)")
        sp.add_argument("--spec", help="JSON spec file, or - for stdin")
        sp.add_argument("--dim", type=int, help="lattice dimension d")
        sp.add_argument("--box", type=int, help="box radius n")
        sp.add_argument("--r", type=int, nargs="+", help="separation(s)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--reps", type=int)
        sp.add_argument("--cutoff", type=int, help="step cutoff M")
        sp.add_argument("--steps", type=int)
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
    args = parser.parse_args(argv)

    try:
        if args.spec:
            text = sys.stdin.read() if args.spec == "-" else open(args.spec).read()
            spec = parse_spec(text)
        else:
            if not args.kind:
                raise SpecValidationError("give a kind or --spec", field="kind")
            spec = validate_spec(_inline_spec(args))
        if spec.kind not in _SUBCOMMAND_KINDS[args.command]:
            raise SpecValidationError(
                f"kind {spec.kind!r} belongs to another subcommand", field="kind"
            )
        record = run(spec)
    except SpecValidationError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return 2
    except ResourceLimitError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return 3
    except StepBudgetExceeded as exc:
        print(f"step budget exhausted: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return 2

    if args.out:
        write_results(record, args.format, args.out)
    else:
        if args.format == "json":
            sys.stdout.write(serialize_record(record))
        else:
            from .records import record_to_csv

            sys.stdout.write(record_to_csv(record))
    return 0


if __name__ == "__main__":
    sys.exit(main())
