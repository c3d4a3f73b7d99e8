"""Command-line front end.

    extremal-kit entire     --space pw:tau=1 --measure ramp:2 --kind truncated
    extremal-kit periodic   --theta lebesgue --measure dirac:0 --kind odd --degree 7
    extremal-kit quadrature --theta jacobi:1,1 --degree 8
    extremal-kit verify     [--only debranges.equality]

Every command writes ``PREFIX.csv`` and ``PREFIX.json`` (or only the JSON
with ``--format json``) and prints the JSON summary; ``--plot`` also renders
``PREFIX.png``.  Exit codes: 0 success, 2 spec error, 3 hypothesis violation,
4 numerical nonconvergence, 5 verification failure.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import debranges as db
from . import lp
from . import measure as ms
from . import numerics as nm
from . import opuc
from . import periodic as per

EXIT_OK, EXIT_SPEC, EXIT_HYPOTHESIS, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4, 5


class SpecError(ValueError):
    pass


# ---------------------------------------------------------------------------
# deterministic output

def fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def _json_value(v, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = [f'{pad}"{k}": {_json_value(val, indent, level + 1)}' for k, val in v.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(v, (list, tuple, np.ndarray)):
        seq = list(v)
        if not seq:
            return "[]"
        if all(isinstance(s, (int, float, np.floating, np.integer)) for s in seq):
            return "[" + ", ".join(_json_value(s, indent, level + 1) for s in seq) + "]"
        return "[\n" + ",\n".join(pad + _json_value(s, indent, level + 1) for s in seq) + "\n" + end + "]"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        x = float(v)
        return fmt(x) if math.isfinite(x) else f'"{fmt(x)}"'
    if isinstance(v, complex):
        return _json_value({"re": v.real, "im": v.imag}, indent, level)
    s = str(v).replace("\\", "\\\\").replace('"', '\\"')
    return f'"{s}"'


def dumps_json(obj, indent: int = 2) -> str:
    """JSON with every float written as %.17g, so identical input gives identical bytes."""
    return _json_value(obj, indent, 0) + "\n"


def csv_table(columns: dict) -> str:
    names = list(columns)
    cols = [np.asarray(columns[n], dtype=float) for n in names]
    lines = [",".join(names)]
    for row in zip(*cols):
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _quantity(value, anchor):
    return {"value": value, "anchor": anchor}


def _write(prefix: str, fmt_: str, summary: dict, table: dict | None, extra: dict | None = None) -> list[str]:
    out = Path(prefix)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt_ == "json":
        doc = dict(summary)
        if table is not None:
            doc["table"] = {k: np.asarray(v, dtype=float) for k, v in table.items()}
        for name, cols in (extra or {}).items():
            doc[name] = {k: np.asarray(v, dtype=float) for k, v in cols.items()}
        p = out.with_suffix(".json")
        p.write_text(dumps_json(doc))
        return [str(p)]
    if table is not None:
        p = out.with_suffix(".csv")
        p.write_text(csv_table(table))
        written.append(str(p))
    for name, cols in (extra or {}).items():
        p = out.parent / f"{out.name}_{name}.csv"
        p.write_text(csv_table(cols))
        written.append(str(p))
    p = out.with_suffix(".json")
    p.write_text(dumps_json(summary))
    written.append(str(p))
    return written


def _plot(args, fn, *a, **kw):
    if not args.plot:
        return None
    from . import plotting
    path = str(Path(args.out).with_suffix(".png"))
    try:
        return fn(path, *a, **kw)
    except plotting.PlottingUnavailable as exc:
        print(f"warning: {exc}", file=sys.stderr)
        return None


# ---------------------------------------------------------------------------
# commands

def cmd_entire(args) -> int:
    space = db.parse_space(args.space)
    m = ms.parse_measure_spec(args.measure)
    if args.grid < 2 or not args.xmax > 0:
        raise SpecError("grid needs at least 2 points and xmax > 0")
    pair = db.extremal_pair(space, m, args.kind, minorant_only=args.minorant_only)
    x = np.linspace(-args.xmax, args.xmax, args.grid)
    target = pair.target(x)
    lo = np.asarray(pair.minorant(x)).real
    hi = np.asarray(pair.majorant(x)).real
    weight = space.weight(x)
    rep = pair.report
    summary = {
        "command": "entire",
        "space": args.space,
        "measure": args.measure,
        "kind": args.kind,
        "hypotheses": rep.flags() if rep is not None else {},
        "optimal_value": _quantity(db.optimal_value(space, args.kind),
                                   "weighted integral of majorant - minorant equals kappa / K(0,0)"),
        "K00": space.K00,
    }
    h3_ok = rep is None or rep.h3 == "holds"
    if h3_ok:
        summary["integral_numeric"] = _quantity(db.gap_integral(pair, X=args.integration_range),
                                                "numerical weighted integral of majorant - minorant")
    else:
        summary["majorant_extremal"] = False
    try:
        if args.kind == "truncated":
            mi = db.minorant_integral(space, m)
            summary["minorant_integral"] = _quantity(mi, "sum over positive zeros of B of f_mu / K(xi, xi)")
            if h3_ok:
                summary["majorant_integral"] = _quantity(mi + 1.0 / space.K00, "minorant integral + 1 / K(0,0)")
        else:
            a, b = db.odd_integrals(space, m)
            summary["minorant_integral"] = _quantity(a, "-1/K(0,0) + sum over nonzero zeros of B")
            summary["majorant_integral"] = _quantity(b, "1/K(0,0) + sum over nonzero zeros of B")
    except (db.L1Error, ms.DivergenceError) as exc:
        summary["integrals_note"] = str(exc)
    if args.delta_check is not None:
        if not isinstance(space, db.Homogeneous):
            raise SpecError("--delta-check needs a homogeneous space")
        summary["closed_form"] = _quantity(db.delta_nu(space.nu, args.delta_check, m, args.kind),
                                           "Gamma(nu+1) Gamma(nu+2) (4/delta)^(2nu+2), doubled for the odd kind")
        summary["closed_form_reconstructed"] = _quantity(
            db.delta_nu_reconstructed(space.nu, args.delta_check, args.kind),
            "(2/delta)^(2nu+2) kappa / (K_nu(0,0) c_nu)")
    summary["gap_identity_max_dev"] = float(np.max(np.abs((hi - lo) - pair.gap_identity(x))))
    summary["min_gap_minorant"] = float(np.min(target - lo))
    summary["min_gap_majorant"] = float(np.min(hi - target))
    table = {"x": x, "f_mu": target, "minorant": lo, "majorant": hi, "weight": weight}
    files = _write(args.out, args.format, summary, table)
    png = _plot(args, _plot_sandwich, x, target, lo, hi, f"{args.space}  {args.measure}  {args.kind}")
    if png:
        files.append(png)
    summary["files"] = files
    print(dumps_json(summary), end="")
    return EXIT_OK


def _plot_sandwich(path, *a):
    from . import plotting
    return plotting.plot_sandwich(path, *a)


def cmd_periodic(args) -> int:
    theta = opuc.parse_theta_spec(args.theta)
    m = ms.parse_measure_spec(args.measure)
    if args.degree < 0:
        raise SpecError("degree must be nonnegative")
    if args.grid < 2:
        raise SpecError("grid needs at least 2 points")
    pair = per.periodic_extremal(theta, m, args.degree, args.kind)
    x = np.arange(args.grid) / args.grid
    target = pair.target(x)
    lo, hi = pair.minorant(x), pair.majorant(x)
    s_lo, s_hi = pair.theorem_sums()
    summary = {
        "command": "periodic",
        "theta": args.theta,
        "measure": args.measure,
        "kind": args.kind,
        "degree": args.degree,
        "nodes": pair.rule.nodes,
        "weights": pair.rule.weights,
        "value_minorant": _quantity(pair.minorant.integral(theta), "integral of the minorant against theta"),
        "value_majorant": _quantity(pair.majorant.integral(theta), "integral of the majorant against theta"),
        "theorem_sums": {
            "minorant": _quantity(s_lo, "sum over zeros of B_{N+1} of weight * target, node 0 lower value"),
            "majorant": _quantity(s_hi, "sum over zeros of B_{N+1} of weight * target, node 0 upper value"),
        },
        "check": pair.check,
    }
    k = np.arange(-args.degree, args.degree + 1)
    coeffs = {"k": k, "minorant_re": pair.minorant.coeffs.real, "minorant_im": pair.minorant.coeffs.imag,
              "majorant_re": pair.majorant.coeffs.real, "majorant_im": pair.majorant.coeffs.imag}
    table = {"x": x, "target": target, "minorant": lo, "majorant": hi}
    files = _write(args.out, args.format, summary, table, {"coeffs": coeffs})
    png = _plot(args, _plot_sandwich, x, target, lo, hi, f"{args.theta}  {args.measure}  {args.kind}  N={args.degree}")
    if png:
        files.append(png)
    summary["files"] = files
    print(dumps_json(summary), end="")
    return EXIT_OK


def cmd_quadrature(args) -> int:
    theta = opuc.parse_theta_spec(args.theta)
    if args.degree < 0:
        raise SpecError("degree must be nonnegative")
    rule = opuc.quadrature_rule(opuc.opuc_basis(theta, args.degree), args.which)
    k = np.arange(0, args.degree + 1)
    q = np.exp(2j * np.pi * np.outer(k, rule.nodes)) @ rule.weights
    exact = np.conj(theta.moments(args.degree)[args.degree:])
    res = np.abs(q - exact)
    summary = {
        "command": "quadrature",
        "theta": args.theta,
        "degree": args.degree,
        "companion": args.which,
        "nodes": rule.nodes,
        "weights": rule.weights,
        "weight_sum": float(rule.weights.sum()),
        "exactness": {"k": k, "residual": res, "max_residual": float(res.max()),
                      "anchor": "sum of weight * e(k node) equals the integral of e(kx) for 0 <= k <= N"},
    }
    table = {"node": rule.nodes, "weight": rule.weights}
    if args.format == "json":
        files = _write(args.out, "json", summary, table)
    else:
        p = Path(args.out).with_suffix(".csv")
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(rule.to_csv())
        files = [str(p)] + _write(args.out, "csv", summary, None)
    if args.plot:
        from . import plotting
        png = _plot(args, plotting.plot_quadrature, rule.nodes, rule.weights, f"{args.theta}  N={args.degree}")
        if png:
            files.append(png)
    summary["files"] = files
    print(dumps_json(summary), end="")
    return EXIT_OK


def cmd_verify(args) -> int:
    from . import verify
    only = [s for part in (args.only or []) for s in part.split(",") if s]
    try:
        rep = verify.run(only or None, tol_scale=args.tol_scale)
    except KeyError as exc:
        raise SpecError(str(exc.args[0])) from None
    print(rep.table())
    if args.out_json:
        doc = {"checks": [vars(c) for c in rep.checks], "exit_code": rep.exit_code}
        Path(args.out_json).write_text(dumps_json(doc))
    return rep.exit_code


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="extremal-kit", description="Extremal one-sided approximations.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, default_out):
        sp.add_argument("--out", default=default_out, help="output prefix (files PREFIX.csv, PREFIX.json)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--plot", action="store_true", help="also render PREFIX.png (needs matplotlib)")

    e = sub.add_parser("entire", help="extremal functions in a de Branges space")
    e.add_argument("--space", default="pw:tau=1")
    e.add_argument("--measure", required=True)
    e.add_argument("--kind", choices=("truncated", "odd"), default="truncated")
    e.add_argument("--minorant-only", action="store_true", help="accept measures without (H3) for the minorant")
    e.add_argument("--delta-check", type=float, default=None, metavar="DELTA",
                   help="also report the closed-form value for type DELTA (homogeneous spaces)")
    e.add_argument("--grid", type=int, default=1001)
    e.add_argument("--xmax", type=float, default=20.0)
    e.add_argument("--integration-range", type=float, default=1000.0)
    common(e, "entire")
    e.set_defaults(func=cmd_entire)

    q = sub.add_parser("periodic", help="extremal trigonometric polynomials")
    q.add_argument("--theta", default="lebesgue")
    q.add_argument("--measure", required=True)
    q.add_argument("--kind", choices=("truncated", "odd"), default="truncated")
    q.add_argument("--degree", type=int, required=True)
    q.add_argument("--grid", type=int, default=1000)
    common(q, "periodic")
    q.set_defaults(func=cmd_periodic)

    r = sub.add_parser("quadrature", help="quadrature rule on the circle")
    r.add_argument("--theta", default="lebesgue")
    r.add_argument("--degree", type=int, required=True)
    r.add_argument("--which", choices=("B", "A"), default="B")
    common(r, "quadrature")
    r.set_defaults(func=cmd_quadrature)

    v = sub.add_parser("verify", help="run the invariant suite")
    v.add_argument("--only", action="append", help="check name or module prefix; repeatable or comma separated")
    v.add_argument("--out-json", default=None)
    v.add_argument("--tol-scale", type=float, default=1.0, help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_SPEC if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ms.HypothesisError as exc:
        names = ", ".join(getattr(exc, "failing", []) or [])
        print(f"hypothesis violation [{names}]: {exc}", file=sys.stderr)
        if "H3" in (getattr(exc, "failing", []) or []) and getattr(args, "command", "") == "entire":
            print("hint: the truncated minorant does not need (H3); rerun with --minorant-only", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (db.L1Error, opuc.TrivialMeasureError) as exc:
        print(f"hypothesis violation: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except per.OneSidedError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (nm.NumericsError, lp.LPError, ms.DivergenceError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SpecError, ms.MeasureError, db.SpaceError, opuc.CircleMeasureError, ValueError, OSError) as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC


if __name__ == "__main__":
    sys.exit(main())
