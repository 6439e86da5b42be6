"""Command-line surface.

Subcommands: vp, santalo, polar, critical, optimize, sweep, probe-bump,
probe-shadow, oracle, verify.  Exit codes are the machine contract:
0 success, 1 failed check, 2 usage or parse error, 3 degenerate input,
4 could not draw a full-dimensional start.  VPMAX_THREADS caps parallel
restarts for the randomized commands.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .constructions import closed_form_Pm, closed_form_simplex_vp, f_n_k, oracle_rows
from .criticality import vertex_residuals
from .errors import (
    CenterNotInterior,
    DegenerateInput,
    DimensionMismatch,
    EmptyInput,
    GeometryError,
    StartGenerationFailed,
)
from .geometry import (
    DEFAULT_TOL,
    Tolerance,
    hull,
    polar,
    polytope_to_json,
    read_polytope,
    volume,
    write_polytope,
)
from .optimizer import optimize_multistart, probe_facet_bump, shadow_convexity_probe, sweep_M
from .santalo import santalo_point, volume_product
from .verify import SUITES, run_suite

EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_DEGENERATE = 3
EXIT_NO_START = 4


def _threads() -> int | None:
    raw = os.environ.get("VPMAX_THREADS")
    if not raw:
        return None
    try:
        return max(1, int(raw))
    except ValueError:
        return None


def _load(path, tol):
    try:
        return read_polytope(path, tol)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: cannot parse polytope file {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)
    except (DegenerateInput, EmptyInput, DimensionMismatch) as exc:
        print(f"error: degenerate input in {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_DEGENERATE)


def _emit(payload: dict, fmt: str, out):
    if fmt == "json":
        text = json.dumps(payload, indent=2)
    elif fmt == "csv":
        lines = [",".join(str(k) for k in payload)]
        lines.append(",".join(str(payload[k]) for k in payload))
        text = "\n".join(lines)
    else:
        width = max(len(str(k)) for k in payload)
        text = "\n".join(f"{k:<{width}}  {payload[k]}" for k in payload)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _common(sub):
    sub.add_argument("--tol", type=float, default=None, help="relative tolerance override")
    sub.add_argument("--format", choices=("pretty", "json", "csv"), default="pretty")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", default=None, help="write the report to this path")


def _tolerance(args) -> Tolerance:
    if args.tol is None:
        return DEFAULT_TOL
    return Tolerance(rel_eps=args.tol, abs_eps=DEFAULT_TOL.abs_eps)


def cmd_vp(args) -> int:
    tol = _tolerance(args)
    P, C = _load(args.input, tol)
    res = volume_product(P, C, tol=tol)
    vol = volume(P, C)
    payload = {
        "volume": vol,
        "santalo_point": [float(x) for x in res.s],
        "polar_volume": res.polar_volume,
        "vp": res.vp,
        "vp_over_simplex": res.vp / closed_form_simplex_vp(P.dim).value,
    }
    if P.dim == 2:
        bound = closed_form_Pm(P.num_vertices).value
        payload["vp_over_polygon_bound"] = res.vp / bound
        if res.vp < bound * (1.0 - 1e-9):
            payload["note"] = "NOT-MAXIMAL: below the regular-polygon value for this vertex count"
    _emit(payload, args.format, args.out)
    return 0


def cmd_santalo(args) -> int:
    tol = _tolerance(args)
    P, C = _load(args.input, tol)
    res = santalo_point(P, C, tol=tol)
    _emit(res.to_dict(), args.format, args.out)
    return 0


def cmd_polar(args) -> int:
    tol = _tolerance(args)
    P, C = _load(args.input, tol)
    if args.center:
        z = np.array([float(x) for x in args.center.split(",")])
    else:
        z = santalo_point(P, C, tol=tol).s
    try:
        Q, _ = polar(P, C, z, tol)
    except CenterNotInterior as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    text = polytope_to_json(Q)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text, end="")
    return 0


def cmd_critical(args) -> int:
    tol = _tolerance(args)
    P, C = _load(args.input, tol)
    rep = vertex_residuals(P, C, tol=tol)
    if args.format == "json":
        _emit(rep.to_dict(), "json", args.out)
    else:
        rows = ["vertex  slack        scalar_res   vector_res   lambda"]
        lam = rep.polygon_lambdas
        for i in range(len(rep.scalar_residuals)):
            lam_s = f"{lam.lambdas[i]: .6f}" if lam is not None else "-"
            rows.append(
                f"{i:>6}  {rep.inequality_slack[i]: .3e}  "
                f"{rep.scalar_residuals[i]:.3e}    {rep.vector_residuals[i]:.3e}    {lam_s}"
            )
        rows.append(f"worst residual: {rep.worst:.3e}")
        rows.append(f"simplicial: {rep.simplicial}")
        if rep.nonsimplicial_warning:
            rows.append("warning: non-simplicial vertices; vector balance is only indicative")
        text = "\n".join(rows)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
        else:
            print(text)
    return 0 if rep.worst <= args.threshold else EXIT_CHECK_FAILED


def cmd_optimize(args) -> int:
    if args.vertices < args.dim + 1:
        print("error: need at least dim+1 vertices", file=sys.stderr)
        return EXIT_USAGE
    try:
        trace = optimize_multistart(
            args.dim, args.vertices, args.restarts, args.seed, threads=_threads()
        )
    except StartGenerationFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_START
    known = None
    if args.dim == 2:
        known = closed_form_Pm(args.vertices).value
    elif args.vertices == args.dim + 1:
        known = closed_form_simplex_vp(args.dim).value
    elif args.vertices == args.dim + 2:
        known = f_n_k(args.dim, args.dim // 2).value
    base = args.out or f"optimize_d{args.dim}_m{args.vertices}_s{args.seed}"
    write_polytope(trace.final, base + ".json")
    with open(base + "_trace.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "vp", "worst_residual", "step"])
        for i, (vp, res, st) in enumerate(trace.iterates):
            w.writerow([i, repr(vp), repr(res), repr(st)])
    print(f"seed {args.seed} (winning restart seed {trace.seed})")
    print(f"best vp {trace.vp:.12g} after {len(trace.iterates)} accepted iterates")
    if known is not None:
        print(f"oracle {known:.12g} gap {trace.vp - known:+.3e}")
    print(f"wrote {base}.json and {base}_trace.csv")
    return 0


def cmd_sweep(args) -> int:
    rows = sweep_M(
        args.dim,
        range(args.m_min, args.m_max + 1),
        args.restarts,
        args.seed,
        threads=_threads(),
    )
    lines = [["m", "M_estimate", "closed_form_if_known", "gap"]]
    for m, est, known, gap in rows:
        lines.append([m, repr(est), "" if known is None else repr(known), "" if gap is None else repr(gap)])
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh).writerows(lines)
        print(f"wrote {args.out}")
    else:
        for row in lines:
            print(",".join(str(x) for x in row))
    print(f"seed {args.seed}")
    return 0


def cmd_probe_bump(args) -> int:
    tol = _tolerance(args)
    P, C = _load(args.input, tol)
    ts = np.geomspace(args.t_min, args.t_max, args.samples) * P.diameter
    pr = probe_facet_bump(P, args.facet, ts, C, tol=tol)
    payload = {
        "facet": pr.facet_id,
        "t_max_admissible": pr.t_max,
        "fitted_slope": pr.slope,
        "expected_slope": pr.expected_slope,
        "polar_loss_exponent": pr.decay_exponent,
        "samples": pr.samples,
    }
    _emit(payload, "json" if args.format == "json" else "pretty", args.out)
    return 0


def cmd_probe_shadow(args) -> int:
    tol = _tolerance(args)
    P, C = _load(args.input, tol)
    rng = np.random.default_rng(args.seed)
    if args.direction:
        d = np.array([float(x) for x in args.direction.split(",")])
    else:
        d = rng.normal(size=P.dim)
    span = args.t_span * P.diameter
    ts = np.linspace(-span, span, args.samples)
    pr = shadow_convexity_probe(P, args.vertex, d, ts, C, tol=tol)
    payload = {
        "vertex": args.vertex,
        "min_volume_second_diff": pr.min_volume_second_diff,
        "min_inv_polar_second_diff": pr.min_inv_second_diff,
        "volume_affine": pr.volume_affine,
        "vp_unimodal": pr.vp_unimodal,
        "ts": [float(t) for t in pr.ts],
        "volumes": [float(v) for v in pr.volumes],
        "vps": [float(v) for v in pr.vps],
    }
    _emit(payload, "json" if args.format == "json" else "pretty", args.out)
    return 0


def cmd_oracle(args) -> int:
    rows = [r.to_dict() for r in oracle_rows()]
    if args.format == "csv":
        lines = ["label,value,provenance"]
        lines += [f"{r['label']},{r['value']!r},{r['provenance']}" for r in rows]
        text = "\n".join(lines)
    else:
        text = "\n".join(json.dumps(r) for r in rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_verify(args) -> int:
    results = run_suite(args.suite, threads=_threads())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_CHECK_FAILED if failed else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="vpmax",
        description="Volume products of low-dimensional polytopes: "
        "polar duals, Santalo points, maximality diagnostics, and search.",
    )
    p.add_argument("--version", action="version", version=f"vpmax {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("vp", help="volume, Santalo point, polar volume, and P(K)")
    s.add_argument("input")
    _common(s)
    s.set_defaults(fn=cmd_vp)

    s = sub.add_parser("santalo", help="Santalo point with convergence diagnostics")
    s.add_argument("input")
    _common(s)
    s.set_defaults(fn=cmd_santalo)

    s = sub.add_parser("polar", help="polar dual (about the Santalo point by default)")
    s.add_argument("input")
    s.add_argument("--center", default=None, help="comma-separated interior center")
    _common(s)
    s.set_defaults(fn=cmd_polar)

    s = sub.add_parser("critical", help="first-order maximality report; exit 1 if not critical")
    s.add_argument("input")
    s.add_argument("--threshold", type=float, default=1e-6)
    _common(s)
    s.set_defaults(fn=cmd_critical)

    s = sub.add_parser("optimize", help="multistart search at fixed vertex count")
    s.add_argument("--dim", type=int, required=True)
    s.add_argument("--vertices", type=int, required=True)
    s.add_argument("--restarts", type=int, default=16)
    _common(s)
    s.set_defaults(fn=cmd_optimize)

    s = sub.add_parser("sweep", help="estimate the maximum over a vertex-count range")
    s.add_argument("--dim", type=int, required=True)
    s.add_argument("--m-min", type=int, required=True)
    s.add_argument("--m-max", type=int, required=True)
    s.add_argument("--restarts", type=int, default=8)
    _common(s)
    s.set_defaults(fn=cmd_sweep)

    s = sub.add_parser("probe-bump", help="first-order law of a facet bump")
    s.add_argument("input")
    s.add_argument("--facet", type=int, default=0)
    s.add_argument("--t-min", type=float, default=1e-5)
    s.add_argument("--t-max", type=float, default=1e-3)
    s.add_argument("--samples", type=int, default=8)
    _common(s)
    s.set_defaults(fn=cmd_probe_bump)

    s = sub.add_parser("probe-shadow", help="convexity along a single-vertex line path")
    s.add_argument("input")
    s.add_argument("--vertex", type=int, default=0)
    s.add_argument("--direction", default=None, help="comma-separated direction")
    s.add_argument("--t-span", type=float, default=0.15)
    s.add_argument("--samples", type=int, default=11)
    _common(s)
    s.set_defaults(fn=cmd_probe_shadow)

    s = sub.add_parser("oracle", help="closed-form value table")
    _common(s)
    s.set_defaults(fn=cmd_oracle)

    s = sub.add_parser("verify", help="run an acceptance suite")
    s.add_argument("suite", choices=sorted(SUITES))
    _common(s)
    s.set_defaults(fn=cmd_verify)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (DegenerateInput, EmptyInput, DimensionMismatch, CenterNotInterior) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except GeometryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    raise SystemExit(main())
