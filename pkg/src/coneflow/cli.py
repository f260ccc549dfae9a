"""Command-line driver wiring the library together.

Subcommands:

* eval      -- closed-form tables (lambda, lambda_star, dist, dist_star)
* verify    -- quadrature / Monte Carlo audit of the closed forms
* simulate  -- dynamical reproduction of the depth laws on a concrete orbifold
* area      -- area-parameterized tables and the closed-form/composition identity

Exit codes: 0 success, 2 validation error, 3 acceptance-threshold failure.
Every output artifact embeds the library version and the full run
configuration; identical configuration and seed give identical bytes.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .excursions import compare, empirical_distribution, simulate as run_simulation
from .formulas import (
    approx_area_depth_cdf,
    approx_depth_cdf,
    approx_sublevel_mass,
    area_depth,
    area_depth_cdf,
    depth_cdf,
    depth_from_area,
    sublevel_mass,
)
from .fuchsian import hecke_group, modular_group
from .integrals import audit_report
from .regions import cone_constants

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_THRESHOLD = 3


class ValidationError(Exception):
    pass


def _parse_grid(spec: str):
    """Grid spec: 'start:step:stop' (inclusive within fp fuzz) or 'v1,v2,...'."""
    try:
        if ":" in spec:
            start, step, stop = (float(p) for p in spec.split(":"))
            if step <= 0.0 or stop < start:
                raise ValueError
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [start + i * step for i in range(count)]
        return [float(p) for p in spec.split(",") if p.strip() != ""]
    except ValueError:
        raise ValidationError(f"bad grid spec {spec!r}; use start:step:stop or v1,v2,...")


def _parse_group(spec: str, k_arg):
    if spec == "modular":
        return modular_group()
    if spec.startswith("hecke:"):
        try:
            q = int(spec.split(":", 1)[1])
        except ValueError:
            raise ValidationError(f"bad group spec {spec!r}")
        return hecke_group(q)
    raise ValidationError(f"unknown group {spec!r} (use modular or hecke:q)")


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("CONEFLOW_THREADS", "1")))
    except ValueError:
        return 1


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _emit(path, text: str):
    if path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _csv(config: dict, columns, rows) -> str:
    lines = [f"# coneflow {__version__}",
             f"# config {json.dumps(config, sort_keys=True)}"]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _json_doc(config: dict, payload: dict) -> str:
    doc = {"version": __version__, "config": config}
    doc.update(payload)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# eval


def cmd_eval(args) -> int:
    cc = cone_constants(args.k)
    grid = _parse_grid(args.z_grid)
    if not grid:
        raise ValidationError("empty z grid")
    if args.r <= 0.0:
        raise ValidationError("cutoff r must be positive")
    config = {"command": "eval", "k": args.k, "r": args.r, "z_grid": args.z_grid,
              "seed": None}
    rows = []
    for z in grid:
        if z < 0.0:
            raise ValidationError("grid values must be nonnegative")
        lam = sublevel_mass(cc, z).value
        lam_star = approx_sublevel_mass(cc, z).value
        d = depth_cdf(cc, args.r, z) if z <= args.r else None
        ds = approx_depth_cdf(cc, z) if z <= cc.r_k else None
        rows.append((z, lam, lam_star, d, ds))
    columns = ("z", "lambda", "lambda_star", "dist", "dist_star")
    if args.format == "json":
        payload = {"columns": list(columns),
                   "rows": [[r[0], r[1], r[2], r[3], r[4]] for r in rows]}
        if args.k == 3:
            payload["note"] = "dist_star uses the corrected k=3 normalization"
        _emit(args.out, _json_doc(config, payload))
    else:
        text = _csv(config, columns, rows)
        if args.k == 3:
            head, rest = text.split("\n", 1)
            text = head + "\n# dist_star uses the corrected k=3 normalization\n" + rest
        _emit(args.out, text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    ks = [int(p) for p in str(args.k).split(",")]
    for k in ks:
        if k < 3:
            raise ValidationError("cone orders must be >= 3")
    grid = _parse_grid(args.z_grid)
    if not grid:
        raise ValidationError("empty z grid")
    if args.tol <= 0.0:
        raise ValidationError("tolerance must be positive")
    if not 0 <= args.seed < 2 ** 64:
        raise ValidationError("seed must fit in 64 bits")
    if args.n < 10_000:
        raise ValidationError("Monte Carlo needs at least 1e4 samples per cell")
    report = audit_report(ks, grid, mc_n=args.n, seed=args.seed,
                          quad_tol=args.tol, threads=args.threads)
    config = {"command": "verify", "k": args.k, "z_grid": args.z_grid,
              "n": args.n, "seed": args.seed, "tol": args.tol}
    report.config["command_config"] = config
    if args.format == "json":
        _emit(args.out, _json_doc(config, report.to_jsonable()))
    else:
        _emit(args.out, report.to_text())
    s = report.summary
    print(f"verify: rows={s.n_rows} quad_agrees={s.quad_agrees} "
          f"mc_within_3sigma={s.mc_within_3sigma} "
          f"oracles_consistent={s.oracles_consistent}", file=sys.stderr)
    return EXIT_OK if s.all_ok else EXIT_THRESHOLD


# ---------------------------------------------------------------------------
# simulate


def _coset_hash(coset) -> str:
    return hashlib.sha1(repr(coset).encode()).hexdigest()[:16]


def cmd_simulate(args) -> int:
    model = _parse_group(args.group, args.k)
    cc = cone_constants(model.k)
    r = args.r if args.r is not None else cc.r_k
    if not 0.0 < r <= cc.r_k + 1e-12:
        raise ValidationError(f"cutoff r must lie in (0, r_k={cc.r_k:.6f}]")
    if args.geodesics < 1 or args.t_max <= 0.0:
        raise ValidationError("need at least one geodesic and a positive window")
    if not 0 <= args.seed < 2 ** 64:
        raise ValidationError("seed must fit in 64 bits")
    sup_bound = args.sup_bound if args.sup_bound is not None else (
        0.03 if args.approximating else 0.02)
    config = {
        "command": "simulate", "group": model.name, "k": model.k, "r": r,
        "geodesics": args.geodesics, "t_max": args.t_max, "seed": args.seed,
        "ring": args.ring, "approximating": args.approximating,
        "sup_bound": sup_bound, "z_grid": args.z_grid, "threads": args.threads,
        "burn_in": args.burn_in,
    }
    sim = run_simulation(args.geodesics, r, args.t_max, seed=args.seed,
                         model=model, ring_m=args.ring, threads=args.threads,
                         burn_in=args.burn_in)
    n_used = sum(1 for rec in sim.records if rec.approximating) \
        if args.approximating else len(sim.records)
    if n_used < args.min_records:
        print(f"simulate: insufficient records ({n_used} < {args.min_records}); "
              f"total={len(sim.records)} walk_failures={sim.stats.n_walk_failures}",
              file=sys.stderr)
        return EXIT_THRESHOLD

    z_hi = min(r, cc.r_k)
    grid = _parse_grid(args.z_grid) if args.z_grid else \
        [z_hi * i / 100.0 for i in range(101)]
    if args.approximating:
        denom = approx_sublevel_mass(cc, min(r, cc.r_k)).value
        theory = lambda z: approx_sublevel_mass(cc, min(z, r)).value / denom  # noqa: E731
    else:
        theory = lambda z: depth_cdf(cc, r, min(z, r))  # noqa: E731
    emp = empirical_distribution(sim.records, grid,
                                 approximating_only=args.approximating)
    sup, rows = compare(emp, theory)

    if args.records_out:
        rec_rows = [(rec.geodesic_id, rec.t_e, rec.depth, rec.approximating,
                     _coset_hash(rec.coset)) for rec in sim.records]
        _emit(args.records_out, _csv(
            config, ("geodesic_id", "t_e", "depth", "approximating",
                     "coset_key_hash"), rec_rows))

    if args.format == "json":
        payload = {
            "columns": ["z", "empirical_cdf", "theory_cdf", "abs_diff"],
            "rows": [[z, e, t, d] for (z, e, t, d) in rows],
            "sup_norm": sup, "n_records": emp.n,
            "skip_fraction": sim.stats.skip_fraction,
            "passed": sup <= sup_bound,
        }
        _emit(args.out, _json_doc(config, payload))
    else:
        _emit(args.out, _csv(config,
                             ("z", "empirical_cdf", "theory_cdf", "abs_diff"),
                             rows))
    print(f"simulate: n={emp.n} sup_norm={sup:.6f} bound={sup_bound} "
          f"skip_fraction={sim.stats.skip_fraction:.2e} "
          f"passed={sup <= sup_bound}", file=sys.stderr)
    return EXIT_OK if sup <= sup_bound else EXIT_THRESHOLD


# ---------------------------------------------------------------------------
# area


def cmd_area(args) -> int:
    cc = cone_constants(args.k)
    if args.r <= 0.0:
        raise ValidationError("area cutoff R must be positive")
    grid = _parse_grid(args.z_grid)
    if not grid:
        raise ValidationError("empty Z grid")
    big_r = args.r
    r_cap = area_depth(cc, cc.r_k)
    config = {"command": "area", "k": args.k, "R": big_r, "z_grid": args.z_grid}
    rows = []
    max_disc = 0.0
    max_disc_star = 0.0
    for big_z in grid:
        if not 0.0 <= big_z <= big_r:
            raise ValidationError(f"Z={big_z} outside [0, R={big_r}]")
        a_val = area_depth_cdf(cc, big_r, big_z)
        a_comp = depth_cdf(cc, depth_from_area(cc, big_r), depth_from_area(cc, big_z))
        disc = abs(a_val - a_comp)
        max_disc = max(max_disc, disc)
        if big_z <= r_cap:
            s_val = approx_area_depth_cdf(cc, big_z)
            s_comp = approx_depth_cdf(cc, depth_from_area(cc, big_z))
            disc_star = abs(s_val - s_comp)
            max_disc_star = max(max_disc_star, disc_star)
        else:
            s_val = s_comp = disc_star = None
        rows.append((big_z, a_val, a_comp, disc, s_val, s_comp, disc_star))
    columns = ("Z", "adist", "adist_composed", "adist_diff",
               "adist_star", "adist_star_composed", "adist_star_diff")
    if args.format == "json":
        payload = {"columns": list(columns),
                   "rows": [list(r) for r in rows],
                   "max_discrepancy": max_disc,
                   "max_discrepancy_star": max_disc_star}
        _emit(args.out, _json_doc(config, payload))
    else:
        _emit(args.out, _csv(config, columns, rows))
    print(f"area: max_discrepancy={max_disc:.3e} "
          f"max_discrepancy_star={max_disc_star:.3e}", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="coneflow",
        description="Geodesic excursion depth laws around cone points: "
                    "closed forms, verification, simulation.")
    p.add_argument("--version", action="version", version=f"coneflow {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt_default="csv"):
        sp.add_argument("--out", default=None, help="output path (default stdout)")
        sp.add_argument("--format", choices=("csv", "json", "text"),
                        default=fmt_default)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=_default_threads(),
                        help="worker threads (default from CONEFLOW_THREADS)")

    pe = sub.add_parser("eval", help="closed-form tables on a z grid")
    pe.add_argument("--k", type=int, default=3)
    pe.add_argument("--r", type=float, default=0.5, help="cutoff for the dist column")
    pe.add_argument("--z-grid", default="0:0.05:0.5")
    common(pe)
    pe.set_defaults(func=cmd_eval)

    pv = sub.add_parser("verify", help="audit closed forms against the oracles")
    pv.add_argument("--k", default="3,4,5,7,12",
                    help="comma-separated cone orders")
    pv.add_argument("--z-grid", default="0.125:0.125:2.5")
    pv.add_argument("--n", type=int, default=200_000, help="Monte Carlo samples per cell")
    pv.add_argument("--tol", type=float, default=1e-10, help="quadrature tolerance")
    common(pv, fmt_default="text")
    pv.set_defaults(func=cmd_verify)

    ps = sub.add_parser("simulate", help="empirical depth law on a concrete orbifold")
    ps.add_argument("--group", default="modular", help="modular or hecke:q")
    ps.add_argument("--k", type=int, default=None, help="unused; group fixes k")
    ps.add_argument("--r", type=float, default=None,
                    help="cutoff radius (default r_k)")
    ps.add_argument("--geodesics", type=int, default=2000)
    ps.add_argument("--t-max", type=float, default=40.0)
    ps.add_argument("--ring", type=int, default=2)
    ps.add_argument("--burn-in", type=float, default=10.0,
                    help="arc length discarded before the record window")
    ps.add_argument("--z-grid", default=None)
    ps.add_argument("--approximating", action="store_true",
                    help="restrict to approximating excursions and compare "
                         "against their law")
    ps.add_argument("--sup-bound", type=float, default=None,
                    help="pass/fail sup-norm bound (default 0.02, or 0.03 "
                         "with --approximating)")
    ps.add_argument("--min-records", type=int, default=100)
    ps.add_argument("--records-out", default=None,
                    help="also dump raw records as CSV")
    common(ps)
    ps.set_defaults(func=cmd_simulate)

    pa = sub.add_parser("area", help="area-parameterized law tables")
    pa.add_argument("--k", type=int, default=3)
    pa.add_argument("--r", type=float, required=True, help="area cutoff R")
    pa.add_argument("--z-grid", required=True, help="area depth grid Z")
    common(pa)
    pa.set_defaults(func=cmd_area)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
