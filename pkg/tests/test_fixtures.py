"""Fixture schema validation and the builtin catalogue."""

import json
import math

import pytest

import regulab as R
from regulab import BUILTIN_FIXTURES, FixtureError, load_fixture
from regulab.fixtures import FOLD_VALUE, validate_fixture


def test_fold_value():
    assert FOLD_VALUE == pytest.approx(2.0 / (3.0 * math.sqrt(3.0)))


def test_builtin_catalogue():
    names = set(BUILTIN_FIXTURES)
    assert {
        "example-5.1-d3", "example-5.1-d5", "example-5.2-bounded",
        "example-5.3-squaring", "example-5.4-exp", "cubic-fold",
        "lcp-identity-halfline", "identity-map", "pair-abs-square",
    } <= names


@pytest.mark.parametrize("name", sorted(BUILTIN_FIXTURES))
def test_all_builtins_validate_and_build(name):
    fix = load_fixture(name)
    assert fix.name == name
    for box_name in fix.boxes:
        b = fix.box(box_name)
        assert b.dim >= 1 and b.resolution >= 2
    if fix.kind == "vi_problem":
        P = fix.vi_problem()
        assert P.n == fix.dimension
    if fix.kind in ("map_analysis", "vi_problem"):
        F = fix.map_model()
        assert F.n == fix.dimension


def test_load_by_prefixed_name():
    assert load_fixture("builtin:cubic-fold").name == "cubic-fold"


def test_load_unknown_builtin():
    with pytest.raises(FixtureError):
        load_fixture("builtin:nope")


def test_load_from_json_file(tmp_path):
    doc = {
        "name": "custom-cube",
        "kind": "map_analysis",
        "dimension": 1,
        "expressions": ["x1^3"],
        "boxes": {"x": {"lo": [-2.0], "hi": [2.0], "resolution": 64},
                  "y": {"lo": [-8.0], "hi": [8.0], "resolution": 33}},
        "parameters": {"ystar": [0.0], "eps": 1.0},
    }
    path = tmp_path / "cube.json"
    path.write_text(json.dumps(doc))
    fix = load_fixture(str(path))
    assert fix.name == "custom-cube"
    assert fix.map_model().eval_many([[2.0]])[0] == 8.0


def test_load_from_dict():
    fix = load_fixture({
        "name": "d", "kind": "loja_pair", "dimension": 1,
        "expressions": ["abs(x1)", "x1^2"],
        "boxes": {"x": {"lo": [-1.0], "hi": [1.0], "resolution": 101}},
    })
    assert fix.kind == "loja_pair"


@pytest.mark.parametrize("mutation, path_hint", [
    ({"dimension": None}, "dimension"),
    ({"kind": "bogus"}, "kind"),
    ({"expressions": ["x1^3", "x2"]}, "expressions"),
    ({"boxes": {"x": {"lo": [-2.0], "hi": [2.0], "resolution": 1}}}, "resolution"),
    ({"boxes": {"x": {"lo": [2.0], "hi": [-2.0], "resolution": 8}}}, "boxes"),
])
def test_schema_errors_name_the_field(mutation, path_hint):
    doc = {
        "name": "bad", "kind": "map_analysis", "dimension": 1,
        "expressions": ["x1^3"],
        "boxes": {"x": {"lo": [-2.0], "hi": [2.0], "resolution": 16}},
    }
    doc.update({k: v for k, v in mutation.items() if v is not None})
    for k, v in mutation.items():
        if v is None:
            doc.pop(k, None)
    with pytest.raises(FixtureError) as err:
        validate_fixture(doc)
    assert path_hint in str(err.value)


def test_convex_set_kinds():
    base = {
        "name": "v", "kind": "vi_problem", "dimension": 1,
        "expressions": ["x1"],
        "boxes": {"u": {"lo": [-2.0], "hi": [2.0], "resolution": 16}},
    }
    for cs in [
        {"kind": "whole_space"},
        {"kind": "box", "lo": [0.0], "hi": [1.0]},
        {"kind": "ball", "center": [0.0], "radius": 1.0},
        {"kind": "polyhedron", "A": [[-1.0]], "b": [0.0]},
    ]:
        fix = validate_fixture({**base, "convex_set": cs})
        assert fix.vi_problem().n == 1
    with pytest.raises(FixtureError):
        validate_fixture({**base, "convex_set": {"kind": "simplex"}})
