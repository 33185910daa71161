"""Experiment specs, result records, and their stable serializations.

Specs are strict: unknown fields are rejected with the offending field
path, seeds are mandatory for every stochastic kind, and parsing fills
defaults so that parse(serialize(spec)) round-trips losslessly.

Exact rationals never leave the program as floats: they are serialized as
a "num/den" fraction string plus a 40-significant-digit decimal rendering.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from decimal import Decimal, getcontext
from fractions import Fraction

from .errors import SpecValidationError

SPEC_SCHEMA_VERSION = 1

_DECIMAL_DIGITS = 40


def fraction_payload(q):
    """JSON payload for an exact rational: fraction string + 40-digit decimal."""
    q = Fraction(q)
    ctx_prec = getcontext().prec
    try:
        getcontext().prec = _DECIMAL_DIGITS
        dec = Decimal(q.numerator) / Decimal(q.denominator)
    finally:
        getcontext().prec = ctx_prec
    return {"fraction": f"{q.numerator}/{q.denominator}", "decimal": format(dec, "f")}


@dataclass(frozen=True)
class ExperimentSpec:
    """A validated, runnable experiment description."""

    kind: str
    params: dict
    seed: int = None

    def as_dict(self):
        out = {"kind": self.kind}
        if self.seed is not None:
            out["seed"] = self.seed
        out.update({k: self.params[k] for k in sorted(self.params)})
        return out

    def to_json(self):
        return json.dumps(self.as_dict(), sort_keys=True)


@dataclass(frozen=True)
class ResultRecord:
    spec: ExperimentSpec
    outputs: dict
    timing: float
    versions: dict = field(default_factory=dict)

    def as_dict(self):
        from . import __version__

        versions = {"artifact": __version__, "spec_schema": SPEC_SCHEMA_VERSION}
        versions.update(self.versions)
        return {
            "spec": self.spec.as_dict(),
            "outputs": self.outputs,
            "versions": versions,
            "timing_seconds": self.timing,
        }


# -- spec schema ------------------------------------------------------------

def _intlist(v):
    if isinstance(v, int) and not isinstance(v, bool):
        return [v]
    if isinstance(v, list) and v and all(
        isinstance(x, int) and not isinstance(x, bool) for x in v
    ):
        return list(v)
    raise TypeError("expected an integer or a nonempty list of integers")


def _int(v):
    if isinstance(v, int) and not isinstance(v, bool):
        return v
    raise TypeError("expected an integer")


def _coord_pairs(v):
    out = []
    if not isinstance(v, list) or not v:
        raise TypeError("expected a nonempty list of coordinate pairs")
    for pair in v:
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(c, list) and all(isinstance(q, int) for q in c) for c in pair)
        ):
            raise TypeError("each edge is [[x1,...,xd],[y1,...,yd]]")
        out.append([list(pair[0]), list(pair[1])])
    return out


def _coord_triple(v):
    if (
        not isinstance(v, list)
        or len(v) != 3
        or not all(isinstance(c, list) and all(isinstance(q, int) for q in c) for c in v)
    ):
        raise TypeError("expected [v, x, w] as three coordinate lists")
    return [list(c) for c in v]


def _graph_spec(v):
    if not isinstance(v, dict):
        raise TypeError("expected a graph object")
    allowed_types = {"box", "edges", "cycle", "complete", "path", "grid"}
    t = v.get("type")
    if t not in allowed_types:
        raise TypeError(f"graph type must be one of {sorted(allowed_types)}")
    return v


# field name -> (validator, default); a default of ... means required
_KINDS = {
    "intersection": {
        "d": (_int, ...),
        "r": (_intlist, ...),
        "M": (_int, ...),
        "reps": (_int, ...),
    },
    "moments": {
        "d": (_int, ...),
        "r": (_intlist, ...),
        "M": (_int, ...),
        "reps": (_int, ...),
    },
    "connection": {
        "d": (_int, ...),
        "n": (_intlist, ...),
        "r": (_intlist, ...),
        "M": (_int, ...),
        "reps": (_int, ...),
    },
    "component_density": {
        "d": (_int, ...),
        "n": (_intlist, ...),
        "M": (_int, ...),
        "reps": (_int, ...),
        "pairs_per_tree": (_int, 64),
    },
    "separator": {
        "d": (_int, ...),
        "n": (_int, ...),
        "placement": (_coord_triple, ...),
        "M": (_int, None),
        "reps": (_int, ...),
    },
    "green_scaling": {
        "d": (_int, ...),
        "r": (_intlist, ...),
        "n": (_int, ...),
        "reps": (_int, 200_000),
    },
    "free_wired_gap": {
        "d": (_int, ...),
        "edges": (_coord_pairs, ...),
        "m": (_int, ...),
        "n": (_intlist, ...),
    },
    "tree_count": {"graph": (_graph_spec, ...)},
    "cylinder": {"graph": (_graph_spec, ...), "edges": (_intlist, ...)},
    "current_fraction": {"graph": (_graph_spec, ...), "edge": (_int, ...)},
    "mu3_law": {"graph": (_graph_spec, ...)},
    "lerw_law": {"graph": (_graph_spec, ...), "v": (_int, ...), "w": (_int, ...)},
    "green_exact": {"d": (_int, ...), "n": (_int, ...), "x": (_intlist, ...), "y": (_intlist, ...)},
    "sample_tree": {"d": (_int, ...), "n": (_int, ...)},
    "sample_walk": {"d": (_int, ...), "n": (_int, ...), "steps": (_int, ...)},
    "sample_lerw": {"d": (_int, ...), "cutoff": (_int, ...)},
}

# kinds that consume randomness and therefore require a seed
_STOCHASTIC = {
    "intersection", "moments", "connection", "component_density",
    "separator", "green_scaling", "sample_tree", "sample_walk", "sample_lerw",
}


def validate_spec(doc):
    """Validate a decoded spec document into an ExperimentSpec."""
    if not isinstance(doc, dict):
        raise SpecValidationError("spec must be a JSON object")
    if "kind" not in doc:
        raise SpecValidationError("missing required field", field="kind")
    kind = doc["kind"]
    if kind not in _KINDS:
        raise SpecValidationError(
            f"unknown kind {kind!r}; expected one of {sorted(_KINDS)}", field="kind"
        )
    schema = _KINDS[kind]
    params = {}
    for name, value in doc.items():
        if name in ("kind", "seed"):
            continue
        if name not in schema:
            raise SpecValidationError("unknown field", field=name)
    for name, (check, default) in schema.items():
        if name in doc:
            try:
                params[name] = check(doc[name])
            except TypeError as exc:
                raise SpecValidationError(str(exc), field=name) from None
        elif default is ...:
            raise SpecValidationError("missing required field", field=name)
        elif default is not None:
            params[name] = default
    seed = doc.get("seed")
    if kind in _STOCHASTIC:
        if seed is None:
            raise SpecValidationError(
                "seeds are mandatory for reproducibility", field="seed"
            )
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise SpecValidationError("seed must be an integer", field="seed")
    elif seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
        raise SpecValidationError("seed must be an integer", field="seed")
    _check_semantics(kind, params)
    return ExperimentSpec(kind=kind, params=params, seed=seed)


def _check_semantics(kind, params):
    d = params.get("d")
    if kind in ("intersection", "moments", "sample_lerw") and d is not None and d < 3:
        raise SpecValidationError(
            "d must be >= 3 for infinite-context loop-erased walks", field="d"
        )
    if kind == "moments" and d is not None and d < 5:
        raise SpecValidationError("moment scaling needs d >= 5", field="d")
    for name in ("reps", "M", "steps", "cutoff"):
        if params.get(name) is not None and params[name] < 0:
            raise SpecValidationError("must be nonnegative", field=name)


def parse_spec(text):
    """Parse and validate a JSON spec document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecValidationError(f"not valid JSON: {exc}") from None
    return validate_spec(doc)


def serialize_record(record):
    return json.dumps(record.as_dict(), indent=2, sort_keys=True) + "\n"


def _flatten_outputs(outputs, prefix=""):
    """Depth-first flattening of the outputs tree into CSV rows."""
    rows = []
    if isinstance(outputs, dict):
        if "mean" in outputs and "stderr" in outputs:
            rows.append(
                {
                    "label": prefix,
                    "value": repr(outputs["mean"]),
                    "stderr": repr(outputs["stderr"]),
                    "replicates": outputs.get("replicates", ""),
                    "censored": outputs.get("censored", ""),
                    "seed": outputs.get("seed", ""),
                }
            )
            return rows
        if "fraction" in outputs and "decimal" in outputs:
            rows.append(
                {
                    "label": prefix,
                    "value": outputs["decimal"],
                    "fraction": outputs["fraction"],
                }
            )
            return rows
        for k in outputs:
            sub = f"{prefix}.{k}" if prefix else str(k)
            rows.extend(_flatten_outputs(outputs[k], sub))
        return rows
    if isinstance(outputs, list):
        for i, item in enumerate(outputs):
            rows.extend(_flatten_outputs(item, f"{prefix}[{i}]"))
        return rows
    rows.append({"label": prefix, "value": repr(outputs) if isinstance(outputs, float) else str(outputs)})
    return rows


def record_to_csv(record):
    rows = _flatten_outputs(record.outputs)
    cols = ["label", "value", "stderr", "replicates", "censored", "seed", "fraction"]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=cols, restval="", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def write_results(record, fmt, path):
    """Write a result record as JSON (full record) or CSV (flattened)."""
    if fmt == "json":
        payload = serialize_record(record)
    elif fmt == "csv":
        payload = record_to_csv(record)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(payload)
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
