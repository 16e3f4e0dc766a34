"""Command-line interface: ``djlaplace {solve,demo,convergence,render}``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .demos import DEMOS, get_demo
from .errors import DJLaplaceError
from .problem import load_problem, render_problem
from .solver import ORIENTATIONS, convergence, solve


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def to_json(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, allow_nan=False) + "\n"


def format_text(d: dict) -> str:
    """Human-readable summary of a JSON report."""
    lines = []
    prob = d.get("problem", {})
    title = prob.get("name") or "problem"
    lines.append(f"{title}: [0, {prob.get('Lx')}] x [0, {prob.get('Ly')}]")
    for side, bc in prob.get("bc", {}).items():
        lines.append(f"  {side:>2} {bc['kind']:<9} {bc['data']}")
    s = d.get("solver", {})
    kt = f", {s['k_terms']}-term sum" if s.get("k_terms") else ""
    lines.append(f"K = {s.get('K')}{kt}, {s.get('components')} components, orientation {d.get('orientation')}")
    setup = d.get("setup")
    if setup:
        lines.append(f"unknown: {setup['unknown_meaning']}; matched on {setup['matching_side']} ({setup['mode']})")
    cs = d.get("constraints")
    if cs and cs.get("mode") == "functional":
        lines.append(f"constraint: g^({cs['h_order']}) = {cs['h']}")
    elif cs:
        vals = ", ".join(f"g^({v['order']})={v['value']:.10g}" for v in cs["values"][:6])
        lines.append(f"constraints at {cs['at']:.6g}: {vals}{' ...' if len(cs['values']) > 6 else ''}")
    g = d.get("g")
    lines.append(f"g = {g['expr']}" if g else "g: not identified")
    sol = d.get("solution", {})
    if sol.get("closed_form"):
        lines.append(f"u = {sol['closed_form']}")
    else:
        terms = sol.get("series", [])
        var = sol.get("variable", "y")
        shown = " + ".join(f"({t['coefficient']})*{var}^{t['k']}" for t in terms[:4])
        lines.append(f"u = {shown}{' + ...' if len(terms) > 4 else ''}" if terms else "u = 0")
    v = d.get("verification")
    if v:
        for side, e in v["sides"].items():
            lines.append(f"  {side:>2} sup error {e['sup_error']:.3e}  (tail bound {_num(e['tail_bound'])})")
        r = v["residual"]
        lines.append(f"  PDE residual sup {r['sup']:.3e}, exact zero below y^{r['required_below_exponent']}")
        lines.extend(f"  note: {n}" for n in v.get("notes", []))
    for key in ("expected", "reference"):
        if key in d:
            e = d[key]
            err = "n/a" if e["grid_sup_error"] is None else f"{e['grid_sup_error']:.3e}"
            lines.append(f"{key}: {e['closed_form']}  match={e['match']}  grid error {err}")
    lines.append(f"verdict: {d.get('verdict')}" + (f" ({d['message']})" if d.get("message") else ""))
    return "\n".join(lines) + "\n"


def _num(x) -> str:
    return x if isinstance(x, str) else f"{x:.3e}"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _solve_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--K", type=int, default=None, help="truncation order in y (default: from file/demo)")
    p.add_argument("--k-terms", type=int, default=None, help="report the k-term partial sum instead of the full series")
    p.add_argument("--grid", type=int, default=21, help="interior verification grid points per direction")
    p.add_argument("--tolerance", type=float, default=None, help="acceptance tolerance (default 1e-8)")
    p.add_argument("--orientation", choices=ORIENTATIONS, default="auto")
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json", help="JSON report (default)")
    fmt.add_argument("--text", dest="fmt", action="store_const", const="text", help="plain-text summary")
    p.set_defaults(fmt="json")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="djlaplace", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a .problem file")
    p.add_argument("path")
    _solve_flags(p)

    p = sub.add_parser("demo", help="run a built-in example (ex1..ex4)")
    p.add_argument("name")
    p.add_argument("--emit-problem", action="store_true", help="print the demo as a problem file and exit")
    _solve_flags(p)

    p = sub.add_parser("convergence", help="CSV table of sup error against K")
    p.add_argument("source", help="a .problem file or a demo name")
    p.add_argument("--K-list", default=None, help="comma-separated orders (default 4, 8, ... up to K)")
    p.add_argument("--K", type=int, default=None, help="default order used to build --K-list")
    p.add_argument("--grid", type=int, default=21, help="grid points per direction, boundary included")
    p.add_argument("--tolerance", type=float, default=None)
    p.add_argument("--orientation", choices=ORIENTATIONS, default="auto")
    p.add_argument("--out", default=None)

    p = sub.add_parser("render", help="pretty-print a JSON report, or solve and print a problem/demo")
    p.add_argument("source", help="report .json, .problem file, or demo name")
    p.add_argument("--out", default=None)
    return ap


def _run_solve(args, pf, expected=None) -> int:
    r = solve(pf, K=args.K, k_terms=args.k_terms, orientation=args.orientation, grid=args.grid,
              tau_accept=args.tolerance, expected=expected)
    d = r.to_dict()
    _emit(to_json(d) if args.fmt == "json" else format_text(d), args.out)
    return r.exit_code


def _source(name: str):
    if name in DEMOS:
        demo = get_demo(name)
        return demo.problem(), demo.expected
    return load_problem(name), None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            return _run_solve(args, load_problem(args.path))
        if args.command == "demo":
            demo = get_demo(args.name)
            pf = demo.problem() if args.K is None else demo.problem().with_K(args.K)
            if args.emit_problem:
                _emit(render_problem(pf), args.out)
                return 0
            return _run_solve(args, pf, demo.expected)
        if args.command == "convergence":
            pf, expected = _source(args.source)
            if args.K is not None:
                pf = pf.with_K(args.K)
            if args.K_list:
                Ks = [int(t) for t in args.K_list.replace(" ", "").split(",") if t]
            else:
                K = pf.solver.K
                Ks = list(range(4, K + 1, 4)) + ([K] if K % 4 else [])
            table = convergence(pf, Ks, expected, args.orientation, args.grid, args.tolerance)
            _emit(table.to_csv(), args.out)
            return 0 if table.ok else 1
        if args.command == "render":
            if args.source.endswith(".json"):
                d = json.loads(Path(args.source).read_text(encoding="utf-8"))
            else:
                pf, expected = _source(args.source)
                d = solve(pf, expected=expected).to_dict()
            _emit(format_text(d), args.out)
            return 0
    except (DJLaplaceError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
