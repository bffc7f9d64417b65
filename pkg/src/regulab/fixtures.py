"""Fixture schema, validation, and the builtin fixture catalog.

A fixture is a JSON-shaped document describing one analysis problem:

    {
      "name": "...",
      "kind": "map_analysis" | "vi_problem" | "loja_pair",
      "dimension": n,
      "expressions": ["..."],          # map / VI components, or [phi, psi]
      "convex_set": {"kind": ...},     # vi_problem only
      "boxes": {"x": {"lo": [...], "hi": [...], "resolution": N}, ...},
      "parameters": {...},             # anchors, targets, grids, flags
      "expected": {...}                # optional regression thresholds
    }

Validation errors name the offending field path.  Builtins cover the
desk-scale example battery: power maps, the bounded odd rational map, the
plane squaring map, the flat odd exponential, the cubic fold, and a
half-line complementarity problem.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from . import expr
from .core import AnalysisBox, FixtureError
from .map_model import SingleValued
from .metrics import Ball, Box, Polyhedron, WholeSpace

_KINDS = ("map_analysis", "vi_problem", "loja_pair")

FOLD_VALUE = 2.0 / (3.0 * math.sqrt(3.0))  # critical value of x^3 - x


@dataclass(frozen=True)
class Fixture:
    name: str
    kind: str
    dimension: int
    expressions: tuple
    convex_set: object  # ConvexSet | None
    boxes: dict  # name -> AnalysisBox
    parameters: dict = field(default_factory=dict)
    expected: dict = field(default_factory=dict)

    def box(self, name):
        if name not in self.boxes:
            raise FixtureError(
                f"fixture '{self.name}' has no box named '{name}' "
                f"(available: {sorted(self.boxes)})"
            )
        return self.boxes[name]

    def map_model(self) -> SingleValued:
        if self.kind == "loja_pair":
            raise FixtureError(f"fixture '{self.name}' is a scalar pair, not a map")
        return SingleValued(self.expressions, n=self.dimension)

    def vi_problem(self):
        from .vi import VIProblem

        if self.kind != "vi_problem":
            raise FixtureError(f"fixture '{self.name}' is not a VI problem")
        return VIProblem(self.map_model(), self.convex_set)


def _want(doc, key, types, path):
    if key not in doc:
        raise FixtureError(f"{path}.{key}: missing required field")
    val = doc[key]
    if not isinstance(val, types):
        names = (
            types.__name__
            if isinstance(types, type)
            else "/".join(t.__name__ for t in types)
        )
        raise FixtureError(f"{path}.{key}: expected {names}, got {type(val).__name__}")
    return val


def _as_floats(val, path):
    if not isinstance(val, (list, tuple)) or not val:
        raise FixtureError(f"{path}: expected a nonempty list of numbers")
    out = []
    for i, v in enumerate(val):
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise FixtureError(f"{path}[{i}]: expected a number, got {type(v).__name__}")
        out.append(float(v))
    return out


def _build_box(doc, path):
    if not isinstance(doc, dict):
        raise FixtureError(f"{path}: expected an object with lo/hi/resolution")
    lo = _as_floats(_want(doc, "lo", (list, tuple), path), f"{path}.lo")
    hi = _as_floats(_want(doc, "hi", (list, tuple), path), f"{path}.hi")
    res = _want(doc, "resolution", int, path)
    try:
        return AnalysisBox(lo, hi, res)
    except FixtureError as exc:
        raise FixtureError(f"{path}: {exc}") from None


def _build_convex_set(doc, dim, path):
    kind = _want(doc, "kind", str, path)
    try:
        if kind == "whole_space":
            return WholeSpace(dim)
        if kind == "box":
            return Box(
                _as_floats(_want(doc, "lo", (list, tuple), path), f"{path}.lo"),
                _as_floats(_want(doc, "hi", (list, tuple), path), f"{path}.hi"),
            )
        if kind == "ball":
            return Ball(
                _as_floats(_want(doc, "center", (list, tuple), path), f"{path}.center"),
                float(_want(doc, "radius", (int, float), path)),
            )
        if kind == "polyhedron":
            A = _want(doc, "A", (list, tuple), path)
            b = _want(doc, "b", (list, tuple), path)
            return Polyhedron(A, b)
    except FixtureError as exc:
        raise FixtureError(f"{path}: {exc}") from None
    raise FixtureError(
        f"{path}.kind: unknown convex-set kind {kind!r} "
        "(expected whole_space, box, ball or polyhedron)"
    )


def validate_fixture(doc) -> Fixture:
    """Turn a raw document into a validated Fixture; errors carry paths."""
    if not isinstance(doc, dict):
        raise FixtureError("fixture: expected a JSON object at the top level")
    name = _want(doc, "name", str, "fixture")
    kind = _want(doc, "kind", str, "fixture")
    if kind not in _KINDS:
        raise FixtureError(
            f"fixture.kind: unknown kind {kind!r} (expected one of {_KINDS})"
        )
    dim = _want(doc, "dimension", int, "fixture")
    if dim < 1:
        raise FixtureError("fixture.dimension: must be a positive integer")

    raw_exprs = _want(doc, "expressions", (list, tuple), "fixture")
    if not raw_exprs:
        raise FixtureError("fixture.expressions: must be nonempty")
    exprs = []
    for i, src in enumerate(raw_exprs):
        if not isinstance(src, str):
            raise FixtureError(f"fixture.expressions[{i}]: expected a string")
        try:
            exprs.append(expr.parse(src, arity=dim))
        except expr.ExprError as exc:
            raise FixtureError(f"fixture.expressions[{i}]: {exc}") from None

    if kind == "loja_pair" and len(exprs) != 2:
        raise FixtureError(
            f"fixture.expressions: a scalar pair needs exactly 2 entries, got {len(exprs)}"
        )
    if kind == "vi_problem" and len(exprs) != dim:
        raise FixtureError(
            f"fixture.expressions: a VI map needs {dim} components, got {len(exprs)}"
        )

    convex = None
    if kind == "vi_problem":
        convex = _build_convex_set(
            _want(doc, "convex_set", dict, "fixture"), dim, "fixture.convex_set"
        )

    raw_boxes = _want(doc, "boxes", dict, "fixture")
    if not raw_boxes:
        raise FixtureError("fixture.boxes: at least one box is required")
    boxes = {}
    for bname, bdoc in raw_boxes.items():
        box = _build_box(bdoc, f"fixture.boxes.{bname}")
        boxes[bname] = box
    for bname, box in boxes.items():
        if bname != "y" and box.dim not in (dim,):
            # value-space boxes may have the map's output dimension; for the
            # fixtures here input and output dimensions coincide, so any
            # mismatch is a schema error
            raise FixtureError(
                f"fixture.boxes.{bname}: dimension {box.dim} does not match "
                f"fixture dimension {dim}"
            )

    parameters = doc.get("parameters", {})
    if not isinstance(parameters, dict):
        raise FixtureError("fixture.parameters: expected an object")
    expected = doc.get("expected", {})
    if not isinstance(expected, dict):
        raise FixtureError("fixture.expected: expected an object")

    return Fixture(
        name=name,
        kind=kind,
        dimension=dim,
        expressions=tuple(str(e.source or e) for e in exprs),
        convex_set=convex,
        boxes=boxes,
        parameters=dict(parameters),
        expected=dict(expected),
    )


def load_fixture(source) -> Fixture:
    """Load a fixture from a builtin name ('builtin:NAME' or bare NAME),
    a path to a JSON file, or an already-parsed document."""
    if isinstance(source, dict):
        return validate_fixture(source)
    if not isinstance(source, str):
        raise FixtureError("fixture source must be a name, path or object")
    name = source[len("builtin:") :] if source.startswith("builtin:") else source
    if name in BUILTIN_FIXTURES:
        return validate_fixture(BUILTIN_FIXTURES[name])
    try:
        with open(source, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise FixtureError(
            f"no builtin fixture named {source!r} and no such file "
            f"(builtins: {sorted(BUILTIN_FIXTURES)})"
        ) from None
    except json.JSONDecodeError as exc:
        raise FixtureError(f"{source}: invalid JSON: {exc}") from None
    return validate_fixture(doc)


def _box(lo, hi, resolution):
    return {"lo": list(lo), "hi": list(hi), "resolution": resolution}


def _power_map_fixture(name, degree):
    return {
        "name": name,
        "kind": "map_analysis",
        "dimension": 1,
        "expressions": [f"x1^{degree}"],
        "boxes": {
            "x": _box([-2.0], [2.0], 64),
            "y": _box([-8.0], [8.0], 33),
        },
        "parameters": {
            "ystar": [0.0],
            "xstar": [0.0],
            "eps": 1.0,
            "holder_target": "inverse",
            "holder_mode": "lower",
            "semialgebraic": True,
        },
        "expected": {
            "subregularity_alpha": 1.0 / degree,
            "pseudo_holder_alpha": 1.0 / degree,
            "pseudo_holder_verdict": "Holder",
            "openness": "Open",
            "audit": "Consistent",
        },
    }


_BOUNDED_ODD = "if(x1 >= 0, x1^2 / (1 + x1^2), 0 - x1^2 / (1 + x1^2))"
_FLAT_ODD_EXP = "if(x1 > 0, exp(0 - 1 / x1), if(x1 < 0, 0 - exp(1 / x1), 0))"

BUILTIN_FIXTURES = {
    "example-5.1-d3": _power_map_fixture("example-5.1-d3", 3),
    "example-5.1-d5": _power_map_fixture("example-5.1-d5", 5),
    "example-5.2-bounded": {
        "name": "example-5.2-bounded",
        "kind": "map_analysis",
        "dimension": 1,
        "expressions": [_BOUNDED_ODD],
        "boxes": {
            # the map is bounded by 1, so its regularity constant degrades
            # as the box grows; the wide box demonstrates the divergence of
            # preimages of targets approaching the bound
            "x": _box([-1.5], [1.5], 65),
            "y": _box([-0.65], [0.65], 33),
            "wide": _box([-5.0], [5.0], 65),
        },
        "parameters": {
            "ystar": [0.0],
            "xstar": [0.0],
            "eps": 0.5,
            "holder_target": "inverse",
            "holder_mode": "lower",
            "semialgebraic": True,
        },
        "expected": {
            "subregularity_alpha": 0.5,
            "openness": "Open",
            # the local exponent near 0 is 1/2, but no single constant
            # within the safety factor covers targets approaching the bound
            # of the range on this box, so the uniform fit stays undecided
            "metric_regularity_verdict": "Inconclusive",
        },
    },
    "example-5.3-squaring": {
        "name": "example-5.3-squaring",
        "kind": "vi_problem",
        "dimension": 2,
        "expressions": ["x1^2 - x2^2", "2 * x1 * x2"],
        "convex_set": {"kind": "whole_space"},
        "boxes": {
            "x": _box([-2.0, -2.0], [2.0, 2.0], 48),
            "u": _box([-2.0, -2.0], [2.0, 2.0], 48),
            "y": _box([-8.0, -8.0], [8.0, 8.0], 9),
        },
        "parameters": {
            "ystar": [0.0, 0.0],
            "xstar": [0.0, 0.0],
            "eps": 1.0,
            "holder_target": "inverse",
            "holder_mode": "full",
            "p": [-1.0, 0.0],
            "p_grid": [
                [a, b]
                for a in (-1.0, -0.5, 0.5, 1.0)
                for b in (-1.0, -0.5, 0.5, 1.0)
            ],
            "p_zero": [0.0, 0.0],
            "anchor": [0.0, 0.0],
            "semialgebraic": True,
            "dom_locally_closed": True,
        },
        "expected": {
            "openness": "Open",
            "metric_regularity_alpha": 0.5,
            "max_cardinality": 2,
            "cardinality_at_zero": 1,
            "lsc": "LSC",
            "solution_map_alpha": 0.5,
            "audit": "Consistent",
        },
    },
    "example-5.4-exp": {
        "name": "example-5.4-exp",
        "kind": "map_analysis",
        "dimension": 1,
        "expressions": [_FLAT_ODD_EXP],
        "boxes": {
            "x": _box([-2.0], [2.0], 65),
            # the range of the map is (-1, 1); exp(-1/2) bounds the values
            # attained on the x box
            "y": _box([-0.6065306597], [0.6065306597], 33),
        },
        "parameters": {
            "ystar": [0.0],
            "xstar": [0.0],
            "eps": 0.5,
            "holder_target": "inverse",
            "holder_mode": "lower",
            "semialgebraic": False,
        },
        "expected": {
            "openness": "Open",
            "pseudo_holder_verdict": "NotHolder",
            "audit": "Inconsistent",
        },
    },
    "cubic-fold": {
        "name": "cubic-fold",
        "kind": "vi_problem",
        "dimension": 1,
        "expressions": ["x1^3 - x1"],
        "convex_set": {"kind": "whole_space"},
        "boxes": {
            "x": _box([-2.0], [2.0], 64),
            "u": _box([-2.0], [2.0], 64),
            "y": _box([-8.0], [8.0], 33),
        },
        "parameters": {
            "ystar": [FOLD_VALUE],
            "xstar": [FOLD_VALUE],
            "eps": 0.5,
            "holder_target": "inverse",
            "holder_mode": "lower",
            "p": [FOLD_VALUE],
            # the grid must contain the exact fold parameters: the
            # vanishing solution branch exists only there
            "p_grid": [
                [p]
                for p in sorted(
                    {round(-0.6 + 0.05 * k, 10) for k in range(25)}
                    | {FOLD_VALUE, -FOLD_VALUE}
                )
            ],
            "semialgebraic": True,
            "dom_locally_closed": True,
        },
        "expected": {
            "openness": "NotOpen",
            "max_cardinality": 3,
            "lsc": "NotLSC",
            "audit": "Consistent",
        },
    },
    "lcp-identity-halfline": {
        "name": "lcp-identity-halfline",
        "kind": "vi_problem",
        "dimension": 1,
        "expressions": ["x1"],
        "convex_set": {"kind": "polyhedron", "A": [[-1.0]], "b": [0.0]},
        "boxes": {
            "x": _box([-3.0], [3.0], 64),
            "u": _box([-3.0], [3.0], 64),
            "y": _box([-3.0], [3.0], 33),
        },
        "parameters": {
            "ystar": [0.0],
            "xstar": [0.0],
            "eps": 1.0,
            "holder_target": "inverse",
            "holder_mode": "lower",
            "p": [1.0],
            "p_grid": [[round(-2.0 + 0.25 * k, 10)] for k in range(17)],
            "semialgebraic": True,
            "dom_locally_closed": True,
        },
        "expected": {
            "max_cardinality": 1,
            "lsc": "LSC",
            "solution_map_alpha": 1.0,
            "audit": "Consistent",
        },
    },
    "identity-map": {
        "name": "identity-map",
        "kind": "map_analysis",
        "dimension": 1,
        "expressions": ["x1"],
        "boxes": {
            "x": _box([-2.0], [2.0], 65),
            "y": _box([-8.0], [8.0], 33),
        },
        "parameters": {
            "ystar": [0.0],
            "xstar": [0.0],
            "eps": 1.0,
            "holder_target": "inverse",
            "holder_mode": "full",
            "semialgebraic": True,
        },
        "expected": {
            "subregularity_alpha": 1.0,
            "metric_regularity_alpha": 1.0,
            "openness": "Open",
            "audit": "Consistent",
        },
    },
    "pair-abs-square": {
        "name": "pair-abs-square",
        "kind": "loja_pair",
        "dimension": 1,
        "expressions": ["abs(x1)", "x1^2"],
        "boxes": {
            "x": _box([-1.0], [1.0], 801),
        },
        "parameters": {
            "margin": 2.0,
            "semialgebraic": True,
        },
        "expected": {
            "growth_alpha": 0.5,
            "dichotomy": "PowerGrowth",
        },
    },
}
