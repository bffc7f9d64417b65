"""Command-line surface: fixture loading, command dispatch, report writing.

Commands::

    regulab analyze-map     --fixture <path|builtin:NAME>   # subregularity,
                            metric regularity, openness, extremum scan
    regulab estimate-holder --fixture ...                   # pseudo-Hölder fit
    regulab check-openness  --fixture ...
    regulab fit-loja        --fixture ...                   # growth inequality
    regulab solve-vi        --fixture ...                   # one parameter
    regulab sweep-vi        --fixture ...                   # parameter grid
    regulab audit           --fixture ...                   # equivalence audit

Reports are byte-stable JSON: keys sorted, floats printed with 12
significant digits, non-finite values as the strings "inf", "-inf",
"nan".  Exit codes: 0 success, 2 fixture error, 3 internal-consistency
error.  Diagnostics go to stderr; with ``--stdout`` the report goes to
stdout instead of a file.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys

import numpy as np

from .core import AnalysisBox, FixtureError, InternalConsistencyError, PointSet
from .fixtures import Fixture, load_fixture
from .lojasiewicz import compute_mu, default_t_grid, fit_growth, verify_inequality
from .map_model import DEFAULT_TOL, Inverse
from .regularity import (
    equivalence_audit,
    estimate_metric_regularity,
    estimate_pseudo_holder,
    estimate_subregularity,
    test_extremum_free,
    test_openness,
)
from .vi import (
    solution_set,
    solve_normal_equation,
    sweep_solution_map,
    vi_equivalence_audit,
    vi_residual,
)

TOOL_VERSION = "0.1.0"
COMMANDS = (
    "analyze-map",
    "estimate-holder",
    "check-openness",
    "fit-loja",
    "solve-vi",
    "sweep-vi",
    "audit",
)


# ------------------------------------------------------- byte-stable output


def _format_float(x):
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == int(x) and abs(x) < 1e16:
        return f"{int(x)}.0"
    return format(x, ".12g")


def _plain(obj):
    """Convert report objects to JSON-ready plain data, deterministically."""
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, PointSet):
        return {"points": _plain(obj.points), "count": len(obj)}
    if isinstance(obj, AnalysisBox):
        return {
            "lo": _plain(obj.lo),
            "hi": _plain(obj.hi),
            "resolution": obj.resolution,
        }
    if dataclasses.is_dataclass(obj):
        return {
            f.name: _plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)
        }
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return str(obj)


def _dump_json(obj):
    """Deterministic JSON text: sorted keys, fixed float formatting."""
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _format_float(obj)
    if isinstance(obj, str):
        out = ['"']
        for ch in obj:
            if ch == '"':
                out.append('\\"')
            elif ch == "\\":
                out.append("\\\\")
            elif ch == "\n":
                out.append("\\n")
            elif ord(ch) < 0x20:
                out.append(f"\\u{ord(ch):04x}")
            else:
                out.append(ch)
        out.append('"')
        return "".join(out)
    if isinstance(obj, dict):
        items = [
            f"{_dump_json(str(k))}: {_dump_json(v)}" for k, v in sorted(obj.items())
        ]
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, list):
        return "[" + ", ".join(_dump_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def render_report(report):
    return _dump_json(_plain(report)) + "\n"


# ------------------------------------------------------------- dispatching


def _resolve_boxes(fix: Fixture, args):
    """Primary analysis box (x space / u space) and the value box."""
    primary_name = args.box or ("u" if fix.kind == "vi_problem" and "u" in fix.boxes else "x")
    primary = fix.box(primary_name)
    if args.resolution:
        primary = primary.with_resolution(args.resolution)
    ybox = fix.boxes.get("y")
    return primary_name, primary, ybox


def _need(fix: Fixture, key):
    if key not in fix.parameters:
        raise FixtureError(
            f"fixture '{fix.name}' is missing parameter '{key}' needed by this command"
        )
    return fix.parameters[key]


def _map_fixture(fix: Fixture):
    if fix.kind not in ("map_analysis", "vi_problem"):
        raise FixtureError(
            f"fixture '{fix.name}' has kind '{fix.kind}'; this command needs a map"
        )
    return fix.map_model()


def run_command(cmd, fix: Fixture, args):
    """Dispatch one command against a validated fixture; returns the
    results block plus a list of (filename, rows) CSV side tables."""
    tol = args.tol
    primary_name, primary, ybox = _resolve_boxes(fix, args)
    results = {}
    csv_tables = []

    if cmd == "analyze-map":
        F = _map_fixture(fix)
        ystar = _need(fix, "ystar")
        eps = float(_need(fix, "eps"))
        if ybox is None:
            raise FixtureError(f"fixture '{fix.name}' needs a 'y' box for analyze-map")
        results["subregularity"] = estimate_subregularity(F, ystar, primary, tol)
        results["metric_regularity"] = estimate_metric_regularity(
            F, ystar, primary, eps, ybox, tol
        )
        results["openness"] = test_openness(F, primary, ybox, tol)
        if F.m == 1 and F.exprs:
            results["extremum"] = test_extremum_free(F, primary, tol)

    elif cmd == "estimate-holder":
        F = _map_fixture(fix)
        xstar = _need(fix, "xstar")
        eps = float(_need(fix, "eps"))
        target = fix.parameters.get("holder_target", "inverse")
        mode = fix.parameters.get("holder_mode", "lower")
        if target == "inverse":
            G, K = Inverse(F), primary
        elif target == "forward":
            if ybox is None:
                raise FixtureError(
                    f"fixture '{fix.name}' needs a 'y' box for a forward fit"
                )
            G, K = F, ybox
        else:
            raise FixtureError(
                f"fixture '{fix.name}': holder_target must be 'inverse' or 'forward'"
            )
        fit, samples = estimate_pseudo_holder(
            G, xstar, K, eps, mode, tol, return_samples=True
        )
        results["pseudo_holder"] = fit
        results["mode"] = mode
        results["target"] = target
        rows = [("s", "r")] + [
            (_format_float(s.s).strip('"'), _format_float(s.r).strip('"'))
            for s in samples
        ]
        csv_tables.append(("samples.csv", rows))

    elif cmd == "check-openness":
        F = _map_fixture(fix)
        if ybox is None:
            raise FixtureError(f"fixture '{fix.name}' needs a 'y' box for openness")
        results["openness"] = test_openness(F, primary, ybox, tol)

    elif cmd == "fit-loja":
        if fix.kind != "loja_pair":
            raise FixtureError(
                f"fixture '{fix.name}' has kind '{fix.kind}'; fit-loja needs a scalar pair"
            )
        phi, psi = fix.expressions
        margin = float(fix.parameters.get("margin", 2.0))
        t_grid = default_t_grid(phi, psi, primary)
        profile = compute_mu(phi, psi, primary, t_grid)
        fit = fit_growth(profile)
        results["fit"] = fit
        if fit.dichotomy in ("PowerGrowth", "IsolatedZero", "ConstantZero"):
            alpha_chk = fit.alpha if fit.alpha > 0 else 1.0
            results["verification_violation"] = verify_inequality(
                phi, psi, primary, fit.c, alpha_chk, margin
            )
        results["margin"] = margin
        rows = [("t", "mu", "nonempty")] + [
            (
                _format_float(t).strip('"'),
                _format_float(m).strip('"'),
                "1" if ne else "0",
            )
            for t, m, ne in profile.to_rows()
        ]
        csv_tables.append(("samples.csv", rows))

    elif cmd == "solve-vi":
        P = fix.vi_problem()
        p = _need(fix, "p")
        roots = solve_normal_equation(P, p, primary, tol)
        sols = solution_set(P, p, primary, tol)
        results["p"] = list(map(float, p))
        results["normal_equation_roots"] = roots
        results["solutions"] = sols
        results["residuals"] = [
            vi_residual(P, p, x, probes=primary.grid(), tol=tol) for x in sols.points
        ]

    elif cmd == "sweep-vi":
        P = fix.vi_problem()
        p_grid = _need(fix, "p_grid")
        anchor = fix.parameters.get("anchor")
        eps = fix.parameters.get("eps")
        rep = sweep_solution_map(
            P, p_grid, primary, tol,
            eps=float(eps) if eps is not None else None,
            anchor=anchor,
        )
        results["sweep"] = rep
        rows = [("cardinality", "p", "solutions")]
        for p, S in zip(rep.p_grid, rep.solutions):
            rows.append(
                (
                    str(len(S)),
                    " ".join(_format_float(float(v)).strip('"') for v in p),
                    "; ".join(
                        " ".join(_format_float(float(v)).strip('"') for v in x)
                        for x in S.points
                    ),
                )
            )
        csv_tables.append(("samples.csv", rows))

    elif cmd == "audit":
        semialgebraic = bool(fix.parameters.get("semialgebraic", True))
        if fix.kind == "vi_problem":
            P = fix.vi_problem()
            p_grid = _need(fix, "p_grid")
            eps = float(_need(fix, "eps"))
            if ybox is None:
                raise FixtureError(f"fixture '{fix.name}' needs a 'y' box for the audit")
            results["audit"] = vi_equivalence_audit(
                P,
                primary,
                ybox,
                p_grid,
                eps,
                tol,
                ystar=fix.parameters.get("ystar"),
                semialgebraic=semialgebraic,
                dom_locally_closed=fix.parameters.get("dom_locally_closed"),
                anchor=fix.parameters.get("anchor"),
            )
        else:
            F = _map_fixture(fix)
            ystar = _need(fix, "ystar")
            eps = float(_need(fix, "eps"))
            if ybox is None:
                raise FixtureError(f"fixture '{fix.name}' needs a 'y' box for the audit")
            results["audit"] = equivalence_audit(
                F, primary, ybox, ystar, eps, tol, semialgebraic=semialgebraic
            )

    else:
        raise FixtureError(f"unknown command {cmd!r}")

    report = {
        "version": TOOL_VERSION,
        "command": cmd,
        "fixture": fix.name,
        "parameters": {
            "tol": tol,
            "box": primary_name,
            "boxes": {primary_name: primary, **({"y": ybox} if ybox is not None else {})},
        },
        "results": results,
    }
    return report, csv_tables


# ------------------------------------------------------------------ writing


def _write_csv(path, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for row in rows:
            fh.write(",".join(str(c) for c in row) + "\n")


def write_report(report, fmt, out, csv_tables=(), to_stdout=False):
    text = render_report(report)
    if to_stdout:
        sys.stdout.write(text)
        return
    if fmt == "json":
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
        return
    # csv-bundle: a directory with fit.json plus the sample tables
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "fit.json"), "w", encoding="utf-8") as fh:
        fh.write(text)
    tables = list(csv_tables) or [("samples.csv", [("empty",)])]
    for fname, rows in tables:
        _write_csv(os.path.join(out, fname), rows)


# --------------------------------------------------------------------- main


def build_parser():
    parser = argparse.ArgumentParser(
        prog="regulab",
        description="Numerical laboratory for regularity of set-valued maps "
        "and parametric variational inequalities.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument(
        "--fixture",
        required=True,
        help="path to a fixture JSON file, or builtin:NAME",
    )
    parser.add_argument("--box", default=None, help="name of the primary analysis box")
    parser.add_argument(
        "--resolution", type=int, default=None, help="override the primary box resolution"
    )
    parser.add_argument("--tol", type=float, default=DEFAULT_TOL)
    parser.add_argument("--out", default=None, help="output path (default: report.json)")
    parser.add_argument("--format", choices=("json", "csv-bundle"), default="json")
    parser.add_argument(
        "--threads", type=int, default=None, help="worker threads (or REGULAB_THREADS)"
    )
    parser.add_argument(
        "--stdout", action="store_true", help="write the report to stdout, not a file"
    )
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.stdout and args.format == "csv-bundle":
        print("error: --stdout conflicts with --format csv-bundle", file=sys.stderr)
        return 2
    if args.tol <= 0:
        print("error: --tol must be positive", file=sys.stderr)
        return 2
    if args.threads is not None:
        os.environ["REGULAB_THREADS"] = str(max(1, args.threads))
    try:
        fix = load_fixture(args.fixture)
        report, csv_tables = run_command(args.command, fix, args)
    except FixtureError as exc:
        print(f"fixture error: {exc}", file=sys.stderr)
        return 2
    except InternalConsistencyError as exc:
        print(f"internal consistency error: {exc}", file=sys.stderr)
        return 3

    out = args.out
    if out is None:
        out = "report" if args.format == "csv-bundle" else "report.json"
    write_report(report, args.format, out, csv_tables, to_stdout=args.stdout)
    if not args.stdout:
        print(f"report written to {out}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
