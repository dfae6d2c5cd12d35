"""Command line entry point: constants, tstar, landscape, critical, verify, profile."""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import claims, energy, profiles, solver
from .constants import HardyParams, as_dimension, bubble_constants
from .energy import LambdaState
from .errors import HardyRingError
from .green import coefficient


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _emit(payload, stream=None):
    stream = stream or sys.stdout
    stream.write(json.dumps(_jsonable(payload), indent=2) + "\n")


def cmd_constants(args):
    dim = as_dimension(args.dim)
    bc = bubble_constants(dim, args.mu)
    _emit({
        "N": dim.N, "two_star": dim.two_star, "mu_bar": dim.mu_bar,
        "beta1": bc.beta1, "beta2": bc.beta2, "c0": bc.c0, "c_mu": bc.c_mu,
        "s0": bc.s0, "b1": bc.b1, "b2": bc.b2,
    })


def cmd_tstar(args):
    N = as_dimension(args.dim).N
    if args.which == "gamma3-2tau1sq":
        root = solver.find_tstar(args.which, N, 0.5, solver.T_MAX)
    else:
        root = solver.find_tstar(args.which, N)
    _emit({
        "which": args.which, "N": N, "t_star": root.t,
        "bracket": [root.bracket.lo, root.bracket.hi], "residual": root.residual,
    })


def parse_grid(text: str):
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError as exc:
        raise argparse.ArgumentTypeError("t-grid must look like a:b:n") from exc
    if not (0.0 < a < b < 1.0) or n < 1:
        raise argparse.ArgumentTypeError("t-grid needs 0 < a < b < 1 and n >= 1")
    return a, b, n


def landscape_rows(k: int, N: int, ts):
    """One dict per t; quantities undefined off the profile domain are NaN."""
    gamma_names = ("gamma3", "gamma4") if k == 5 else (energy.RING_GAMMA[k],)
    lam_names = ("lambda0", "lambda1", "lambda2") if k == 5 else ("lambda0", "lambda1")
    cols = ["t", *gamma_names, "tau1", *lam_names, "nu", "iota"]
    rows = []
    for t in ts:
        row = dict.fromkeys(cols, float("nan"))
        row["t"] = float(t)
        for g in gamma_names:
            row[g] = coefficient(g, t, N)[0]
        row["tau1"] = coefficient("tau1", t, N)[0]
        try:
            if k == 5:
                lam = energy.lambda_profile_f5(t, N)
                row["iota"] = energy.iota3(t, N)
            else:
                lam = energy.lambda_profile(k, t, N)
                row["iota"] = energy.iota_ring(k, t, N)
            row.update(zip(lam_names, lam))
            row["nu"] = energy.f_value(k, lam, t, N)
        except HardyRingError:
            pass
        rows.append(row)
    return cols, rows


def cmd_landscape(args):
    N = as_dimension(args.dim).N
    a, b, n = args.t_grid
    cols, rows = landscape_rows(args.k, N, np.linspace(a, b, n))
    with open(args.out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        for row in rows:
            w.writerow({c: repr(float(v)) for c, v in row.items()})


def cmd_critical(args):
    recs = solver.find_critical_points(args.k, args.dim)
    if args.json:
        _emit([r.to_dict() for r in recs])
        return
    if not recs:
        print(f"no critical points of f{args.k} found for N={args.dim}")
    for r in recs:
        lam = ", ".join(f"{v:.12g}" for v in r.lam)
        print(f"t={r.t:.12g}  lambda=({lam})  index={r.morse_index}  "
              f"degree={r.degree_sign:+d}  grad={r.grad_norm:.2e}")


def cmd_verify(args):
    rep = claims.run_claim(args.claim, args.dim, args.dim_max)
    payload = rep.to_dict()
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(_jsonable(payload), fh, indent=2)
    print(f"{rep.claim_id}: {rep.verdict}")


def parse_lambda(text: str):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError("lambda must be comma separated numbers") from exc
    if len(vals) not in (2, 3):
        raise argparse.ArgumentTypeError("lambda takes two or three values")
    return vals


def cmd_profile(args):
    hardy = HardyParams(args.mu0, args.alpha, args.eps)
    spec = profiles.ProfileSpec(
        dim=args.dim, hardy=hardy, k=args.k, pattern=args.pattern,
        lam=LambdaState.from_array(args.lam), t=args.t, plane=args.plane, res=args.res,
    )
    grid = profiles.assemble_field(spec)
    profiles.export_field(grid, args.out)
    print(f"wrote {len(grid.values)} nodes to {args.out} ({int(grid.capped.sum())} capped)")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hardyring", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("constants", help="exponents and bubble constants as JSON")
    c.add_argument("--dim", type=int, required=True)
    c.add_argument("--mu", type=float, default=0.0)
    c.set_defaults(func=cmd_constants)

    c = sub.add_parser("tstar", help="zero of a ring coefficient with its bracket")
    c.add_argument("--which", choices=solver.TSTAR_FUNCTIONS, required=True)
    c.add_argument("--dim", type=int, required=True)
    c.set_defaults(func=cmd_tstar)

    c = sub.add_parser("landscape", help="profile quantities on a t-grid as CSV")
    c.add_argument("--k", type=int, choices=energy.FAMILIES, required=True)
    c.add_argument("--dim", type=int, required=True)
    c.add_argument("--t-grid", type=parse_grid, required=True)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_landscape)

    c = sub.add_parser("critical", help="critical points of f_k")
    c.add_argument("--k", type=int, choices=(2, 3, 5), required=True)
    c.add_argument("--dim", type=int, required=True)
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_critical)

    c = sub.add_parser("verify", help="run one claim check and write its report")
    c.add_argument("--claim", choices=claims.CLAIM_IDS, required=True)
    c.add_argument("--dim", type=int, required=True)
    c.add_argument("--dim-max", type=int, default=None)
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_verify)

    c = sub.add_parser("profile", help="export a leading-order field on a 2-D slice")
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--pattern", choices=profiles.PATTERNS, required=True)
    c.add_argument("--dim", type=int, required=True)
    c.add_argument("--eps", type=float, required=True)
    c.add_argument("--mu0", type=float, required=True)
    c.add_argument("--alpha", type=float, required=True)
    c.add_argument("--t", type=float, required=True)
    c.add_argument("--lambda", dest="lam", type=parse_lambda, required=True)
    c.add_argument("--plane", choices=tuple(profiles.PLANES), default="e1e2")
    c.add_argument("--res", type=int, default=101)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_profile)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except HardyRingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
