"""Independent numerical evaluation of the sublevel-region masses.

Two routes that share no code with the closed forms in ``formulas``:

* semi-analytic quadrature: the inner backward-endpoint integral has the
  elementary antiderivative 1/(x - y), and the outer forward integral is
  done adaptively with the branch kinks supplied as explicit split points;

* plain Monte Carlo over the region using only the depth predicate, with
  the backward endpoint drawn by inverse transform from the exact
  conditional density proportional to (psi - zeta)^-2 (the integrable
  concentration near zeta -> psi never enters the variance).

Monte Carlo work is sharded; shard streams are spawned from the master seed
with numpy's SeedSequence.spawn and reduced in shard order, so results do
not depend on the worker count.

The audit report tabulates both oracles against the shipped closed forms
and against a commonly tabulated variant normalization of them (one-sided
on some branches, degenerate at k = 3), quantifying the discrepancy.
"""

from __future__ import annotations

import json
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .formulas import approx_sublevel_mass, sublevel_mass
from .regions import ConeConstants, cone_constants, phi
from .halfplane import tangent_endpoint

_MC_SHARD = 250_000


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("CONEFLOW_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class IntegralEstimate:
    value: float
    abs_error: float
    n_evals: int
    method: str

    def __post_init__(self):
        if self.abs_error < 0.0:
            raise ValueError("error bound must be nonnegative")


# ---------------------------------------------------------------------------
# Quadrature route


def _half_mass_integrand(z: float, clip: float):
    """Inner integral in closed form: 1/(x - y_hi) - 1/(x - y_lo).

    y_lo = -1/x and y_hi = min(tangent_endpoint(z, x), clip); both terms are
    written to stay finite as x -> 0.
    """

    def f(x: float) -> float:
        if x <= 0.0:
            return 0.0
        w = tangent_endpoint(z, x)
        hi = min(w, clip)
        lo_term = x / (x * x + 1.0)
        if hi <= -1.0 / x:
            return 0.0
        return 1.0 / (x - hi) - lo_term

    return f


def _quad_half(f, hi: float, splits, tol: float):
    pts = [p for p in splits if 0.0 < p < hi]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        value, err, info = quad(
            f, 0.0, hi, points=pts or None, epsabs=tol / 4.0, epsrel=1e-13,
            limit=300, full_output=True,
        )[:3]
    return value, err, info["neval"]


def quad_sublevel_mass(cc: ConeConstants, z: float, tol: float = 1e-10) -> IntegralEstimate:
    """Quadrature estimate of the crossing-region sublevel mass at depth z."""
    if z < 0.0:
        raise ValueError("depth must be nonnegative")
    if not tol > 0.0:
        raise ValueError("tolerance must be positive")
    if z == 0.0:
        return IntegralEstimate(0.0, 0.0, 0, "quadrature")
    sh = math.sinh(z)
    splits = [1.0 / sh] if z > cc.r_k else []
    val, err, n = _quad_half(_half_mass_integrand(z, 0.0), cc.a_k, splits, tol)
    return IntegralEstimate(2.0 * val, 2.0 * err, n, "quadrature")


def quad_approx_sublevel_mass(cc: ConeConstants, z: float, tol: float = 1e-10) -> IntegralEstimate:
    """Quadrature estimate of the approximating-region sublevel mass at depth z."""
    if z < 0.0:
        raise ValueError("depth must be nonnegative")
    if not tol > 0.0:
        raise ValueError("tolerance must be positive")
    if z == 0.0:
        return IntegralEstimate(0.0, 0.0, 0, "quadrature")
    x_hi = min(cc.a_k, 1.0 / cc.a_k)
    splits = []
    if max(cc.delta_k, 0.0) < z < cc.r_k:
        splits.append(phi(cc, math.sinh(z)))
    val, err, n = _quad_half(_half_mass_integrand(z, -cc.a_k), x_hi, splits, tol)
    return IntegralEstimate(2.0 * val, 2.0 * err, n, "quadrature")


# ---------------------------------------------------------------------------
# Monte Carlo route


def _mc_region_mass(psi_hi: float, y_cap: float, sinh_z: float, n: int, seed,
                    threads: int | None) -> IntegralEstimate:
    """Importance-sampled mass of {depth <= z} inside psi in (0, psi_hi),
    zeta in (-1/psi, y_cap), doubled for the mirror half.

    y_cap is 0 for the crossing region and -a_k for the approximating one.
    """
    if n < 10_000:
        raise ValueError("Monte Carlo needs at least 1e4 samples")
    n_shards = (n + _MC_SHARD - 1) // _MC_SHARD
    sizes = [min(_MC_SHARD, n - i * _MC_SHARD) for i in range(n_shards)]
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    streams = ss.spawn(n_shards)

    def run_shard(args):
        size, ss = args
        rng = np.random.default_rng(ss)
        psi = rng.uniform(0.0, psi_hi, size)
        u = rng.uniform(0.0, 1.0, size)
        ok = psi > 0.0
        psi = np.where(ok, psi, 1.0)
        base = psi / (psi * psi + 1.0)          # 1/(psi - (-1/psi))
        cap = 1.0 / (psi - y_cap)               # 1/(psi - y_cap)
        mass = cap - base
        zeta = psi - 1.0 / (base + u * mass)
        sd = np.abs(1.0 + psi * zeta) / (psi - zeta)
        v = np.where(ok & (sd <= sinh_z), 2.0 * psi_hi * mass, 0.0)
        return float(np.sum(v)), float(np.sum(v * v))

    jobs = list(zip(sizes, streams))
    workers = threads if threads is not None else _default_threads()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(run_shard, jobs))
    else:
        partials = [run_shard(j) for j in jobs]
    total = sum(p[0] for p in partials)
    total_sq = sum(p[1] for p in partials)
    mean = total / n
    var = max(0.0, total_sq / n - mean * mean)
    return IntegralEstimate(mean, math.sqrt(var / n), n, "monte_carlo")


def mc_sublevel_mass(cc: ConeConstants, z: float, n: int = 1_000_000, seed=0,
                     threads: int | None = None) -> IntegralEstimate:
    """Monte Carlo estimate of the crossing-region sublevel mass at depth z."""
    if z < 0.0:
        raise ValueError("depth must be nonnegative")
    if z == 0.0:
        return IntegralEstimate(0.0, 0.0, n, "monte_carlo")
    return _mc_region_mass(cc.a_k, 0.0, math.sinh(z), n, seed, threads)


def mc_approx_sublevel_mass(cc: ConeConstants, z: float, n: int = 1_000_000, seed=0,
                            threads: int | None = None) -> IntegralEstimate:
    """Monte Carlo estimate of the approximating-region sublevel mass at depth z."""
    if z < 0.0:
        raise ValueError("depth must be nonnegative")
    if z == 0.0:
        return IntegralEstimate(0.0, 0.0, n, "monte_carlo")
    x_hi = min(cc.a_k, 1.0 / cc.a_k)
    return _mc_region_mass(x_hi, -cc.a_k, math.sinh(z), n, seed, threads)


# ---------------------------------------------------------------------------
# Tabulated variant normalization (audit baseline)


def tabulated_sublevel_mass(cc: ConeConstants, z: float) -> float:
    """Commonly tabulated variant of sublevel_mass (one-sided above r_k)."""
    if z <= cc.r_k:
        return 2.0 * math.pi / cc.k * math.sinh(z)
    sh = math.sinh(z)
    return sh * math.atan(1.0 / sh) + math.log(math.sin(math.pi / cc.k) * math.cosh(z))


def tabulated_approx_sublevel_mass(cc: ConeConstants, z: float) -> float:
    """Commonly tabulated variant of approx_sublevel_mass.

    One-sided on the middle branch, constant log(2 cos(pi/k)) above r_k
    (identically zero for k = 3), and without the k = 3 sector clip.
    """
    k = cc.k
    if k >= 5 and z <= cc.delta_k:
        return 2.0 * math.pi / k * math.sinh(z)
    if z >= cc.r_k:
        return math.log(2.0 * math.cos(math.pi / k))
    sh = math.sinh(z)
    return sh * math.atan(phi(cc, sh)) + math.log(
        2.0 * math.cosh(z) * math.sin(math.pi / k) * math.cos(math.pi / k)
    )


# ---------------------------------------------------------------------------
# Audit report


@dataclass
class AuditRow:
    k: int
    z: float
    quantity: str           # "lambda" or "lambda_star"
    closed: float
    branch: str
    quadrature: float
    quad_err: float
    mc: float
    mc_err: float
    mc_n: int
    tabulated: float
    ratio_to_tabulated: float | None
    flags: list[str] = field(default_factory=list)


@dataclass
class AuditSummary:
    """Aggregate verdicts.

    Quadrature must agree with the closed forms cell by cell; the Monte
    Carlo criteria are statistical (a 3-sigma miss is expected in roughly
    0.3% of cells), so those verdicts require at least 99% of cells inside
    the band.
    """

    quad_agrees: bool
    mc_within_3sigma: bool
    oracles_consistent: bool
    n_rows: int
    mc_ok_fraction: float = 1.0
    cross_ok_fraction: float = 1.0

    @property
    def all_ok(self) -> bool:
        return self.quad_agrees and self.mc_within_3sigma and self.oracles_consistent


@dataclass
class AuditReport:
    rows: list[AuditRow]
    summary: AuditSummary
    config: dict

    def to_jsonable(self) -> dict:
        return {
            "config": self.config,
            "rows": [vars(r).copy() for r in self.rows],
            "summary": {
                "quad_agrees": self.summary.quad_agrees,
                "mc_within_3sigma": self.summary.mc_within_3sigma,
                "oracles_consistent": self.summary.oracles_consistent,
                "mc_ok_fraction": self.summary.mc_ok_fraction,
                "cross_ok_fraction": self.summary.cross_ok_fraction,
                "n_rows": self.summary.n_rows,
                "all_ok": self.summary.all_ok,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_jsonable(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        header = (
            f"{'k':>3} {'z':>8} {'quantity':<12} {'closed':>13} {'quadrature':>13} "
            f"{'mc':>13} {'mc_err':>9} {'tabulated':>13} {'ratio':>7}  flags"
        )
        lines = [header, "-" * len(header)]
        for r in self.rows:
            ratio = f"{r.ratio_to_tabulated:7.3f}" if r.ratio_to_tabulated is not None else "    n/a"
            lines.append(
                f"{r.k:>3} {r.z:>8.4f} {r.quantity:<12} {r.closed:>13.9f} "
                f"{r.quadrature:>13.9f} {r.mc:>13.9f} {r.mc_err:>9.2e} "
                f"{r.tabulated:>13.9f} {ratio}  {','.join(r.flags)}"
            )
        s = self.summary
        lines.append("-" * len(header))
        lines.append(
            f"quad_agrees={s.quad_agrees} mc_within_3sigma={s.mc_within_3sigma} "
            f"({s.mc_ok_fraction:.1%}) oracles_consistent={s.oracles_consistent} "
            f"({s.cross_ok_fraction:.1%}) rows={s.n_rows}"
        )
        return "\n".join(lines)


_TAB_ZERO = 1e-12


def _flag_ratio(flags: list[str], ratio: float | None, measured: float):
    if ratio is None:
        if abs(measured) > 1e-9:
            flags.append("tabulated_zero_measured_positive")
        return
    if abs(ratio - 1.0) <= 2e-6:
        flags.append("matches_tabulated")
    elif abs(ratio - 2.0) <= 2e-6:
        flags.append("tabulated_is_half")
    else:
        flags.append("ratio_other")


def audit_report(ks, z_grid, mc_n: int = 200_000, seed=0, quad_tol: float = 1e-10,
                 threads: int | None = None) -> AuditReport:
    """Cross-check closed forms, quadrature, Monte Carlo and the tabulated variant.

    One row per (k, z, quantity).  The summary records whether the oracles
    agree with the closed forms (quadrature within max(tol, 1e-8 relative),
    Monte Carlo within three standard errors) and with each other.
    """
    ks = list(ks)
    z_grid = [float(z) for z in z_grid]
    rows: list[AuditRow] = []
    quad_ok = True
    mc_cells = mc_bad = cross_bad = 0
    seed_seq = np.random.SeedSequence(seed)
    row_seeds = iter(seed_seq.spawn(2 * len(ks) * len(z_grid)))
    for k in ks:
        cc = cone_constants(k)
        for z in z_grid:
            for quantity, closed_fn, quad_fn, mc_fn, tab_fn in (
                ("lambda", sublevel_mass, quad_sublevel_mass, mc_sublevel_mass,
                 tabulated_sublevel_mass),
                ("lambda_star", approx_sublevel_mass, quad_approx_sublevel_mass,
                 mc_approx_sublevel_mass, tabulated_approx_sublevel_mass),
            ):
                closed = closed_fn(cc, z)
                qest = quad_fn(cc, z, quad_tol)
                mest = mc_fn(cc, z, mc_n, next(row_seeds), threads)
                tab = tab_fn(cc, z)
                ratio = qest.value / tab if abs(tab) > _TAB_ZERO else None
                flags: list[str] = []
                _flag_ratio(flags, ratio, qest.value)
                row = AuditRow(
                    k=k, z=z, quantity=quantity, closed=closed.value,
                    branch=closed.branch, quadrature=qest.value,
                    quad_err=qest.abs_error, mc=mest.value, mc_err=mest.abs_error,
                    mc_n=mest.n_evals, tabulated=tab, ratio_to_tabulated=ratio,
                    flags=flags,
                )
                rows.append(row)
                if abs(qest.value - closed.value) > max(quad_tol, 1e-8 * abs(closed.value)):
                    quad_ok = False
                    row.flags.append("quad_disagrees_closed")
                if qest.abs_error > quad_tol:
                    quad_ok = False
                    row.flags.append("quad_tolerance_miss")
                if z > 0.0:
                    mc_cells += 1
                    if abs(mest.value - closed.value) > 3.0 * mest.abs_error:
                        mc_bad += 1
                        row.flags.append("mc_outside_3sigma")
                    if abs(mest.value - qest.value) > 3.0 * mest.abs_error + qest.abs_error:
                        cross_bad += 1
                        row.flags.append("oracles_disagree")
    mc_frac = 1.0 - mc_bad / mc_cells if mc_cells else 1.0
    cross_frac = 1.0 - cross_bad / mc_cells if mc_cells else 1.0
    summary = AuditSummary(quad_agrees=quad_ok, mc_within_3sigma=mc_frac >= 0.99,
                           oracles_consistent=cross_frac >= 0.99, n_rows=len(rows),
                           mc_ok_fraction=mc_frac, cross_ok_fraction=cross_frac)
    config = {"ks": ks, "z_grid": z_grid, "mc_n": mc_n,
              "seed": seed, "quad_tol": quad_tol}
    return AuditReport(rows=rows, summary=summary, config=config)
