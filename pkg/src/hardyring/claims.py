"""Executable checks of the existence / non-existence statements with evidence reports.

Every check is floating-point grid evidence.  A "verified" verdict needs each
sample to satisfy its inequality with a margin above 10 unit roundoffs of the
size of the evaluated expression; otherwise the offending sample is reported.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .constants import require_claim_dimension
from .energy import (
    f5_hessian_det_sign, f5_stationarity_residuals, f_k_eval, iota3_terms,
    iota_ring, iota_ring_terms, lambda_profile_f5,
)
from .errors import HardyRingError
from .green import T_MAX, T_MIN, coefficient
from .solver import (
    GRID_MARGIN, bracket_and_refine, classify, critical_point_record, find_critical_points,
    find_sign_changes, find_tstar, find_tstars, newton_critical, profile_roots,
)

UNIT_ROUNDOFF = np.finfo(float).eps / 2
MARGIN_FACTOR = 10.0
GRID_POINTS = 10_000
GRAD_TOL = 1e-10
VERDICTS = ("verified", "falsified", "inconclusive")
CLAIM_IDS = (
    "k2-two-points", "k3-threshold", "k3-inequalities",
    "k4-nonexistence", "k5-existence", "k5-second-root",
)


@dataclass
class Evidence:
    param: float | int | str
    quantity: str
    value: float | int | str | bool


@dataclass
class ClaimReport:
    claim_id: str
    dim: int
    verdict: str
    evidence: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"verdict must be one of {VERDICTS}")

    def add(self, param, quantity, value):
        if isinstance(value, (np.floating, np.integer, np.bool_)):
            value = value.item()
        if isinstance(param, (np.floating, np.integer)):
            param = param.item()
        self.evidence.append(Evidence(param, quantity, value))

    def lookup(self, quantity):
        return [e.value for e in self.evidence if e.quantity == quantity]

    def to_dict(self) -> dict:
        return {
            "claim_id": self.claim_id, "dim": self.dim, "verdict": self.verdict,
            "evidence": [asdict(e) for e in self.evidence], "tolerances": dict(self.tolerances),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def margin_ok(value, scale) -> np.ndarray:
    """value > 10 u scale, elementwise."""
    return np.asarray(value) > MARGIN_FACTOR * UNIT_ROUNDOFF * np.asarray(scale)


def _default_tolerances(**extra):
    tol = {"unit_roundoff": UNIT_ROUNDOFF, "margin_factor": MARGIN_FACTOR, "grid_margin": GRID_MARGIN}
    tol.update(extra)
    return tol


def _grid(lo, hi, n=GRID_POINTS):
    return np.linspace(lo + GRID_MARGIN, hi - GRID_MARGIN, n)


# --- k = 2 -----------------------------------------------------------------

def verify_k2_two_points(dim) -> ClaimReport:
    N = require_claim_dimension(dim).N
    rep = ClaimReport("k2-two-points", N, "inconclusive", tolerances=_default_tolerances(
        grad_tol=GRAD_TOL, dedup_radius=1e-8, degenerate_rel=1e-12))
    try:
        pts = find_critical_points(2, N)
        roots = profile_roots(2, N)
    except HardyRingError as exc:
        rep.add(N, "error", str(exc))
        return rep
    rep.add(N, "n_critical_points", len(pts))
    rep.add(N, "n_profile_roots", len(roots))
    for p in pts:
        rep.add(p.t, "lambda0", p.lam[0])
        rep.add(p.t, "lambda1", p.lam[1])
        rep.add(p.t, "morse_index", p.morse_index)
        rep.add(p.t, "grad_norm", p.grad_norm)
        rep.add(p.t, "fd_grad_norm", p.fd_grad_norm)
        rep.add(p.t, "degenerate", p.degenerate)
    for r in roots:
        rep.add(r.t, "profile_root", r.t)
    if len(pts) != 2:
        rep.verdict = "falsified"
        return rep
    ok = (
        sorted(p.morse_index for p in pts) == [0, 1]
        and all(p.grad_norm <= GRAD_TOL for p in pts)
        and not any(p.degenerate for p in pts)
        and len(roots) == 2
        and all(abs(p.t - r.t) < 1e-8 for p, r in zip(pts, roots))
    )
    rep.verdict = "verified" if ok else "falsified"
    return rep


# --- k = 3 -----------------------------------------------------------------

def iota1_sign_changes(N: int, n: int = GRID_POINTS):
    """(number of sign changes of iota1 on the profile grid, grid t, values, scales)."""
    t0 = find_tstar("gamma1", N).t
    ts = _grid(t0, 1.0, n)
    a, b = iota_ring_terms(3, ts, N, scaled=True)
    vals = a + b
    changes = int(np.sum(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0))
    return changes, ts, vals, np.abs(a) + np.abs(b)


def scan_k3_threshold(dim_max: int, n: int = GRID_POINTS, refine: int = 4):
    """Smallest N in 7..dim_max with two zeros of iota1, plus the N = 7 check.

    The scan is repeated on a grid ``refine`` times finer; both thresholds are
    reported and must agree for a "verified" verdict.
    """
    if dim_max < 8:
        raise ValueError("dim_max must be at least 8")
    rep = ClaimReport("k3-threshold", 7, "inconclusive", tolerances=_default_tolerances(
        grid_points=n, refine_factor=refine, dim_max=dim_max))
    changes7, ts, vals, scale = iota1_sign_changes(7, n)
    sign7 = np.sign(vals[0])
    clean7 = changes7 == 0 and bool(np.all(margin_ok(sign7 * vals, scale)))
    rep.add(7, "iota1_sign_changes", changes7)
    rep.add(7, "iota1_min_over_scale", float(np.min(sign7 * vals / scale)))
    rep.add(7, "iota1_sign", int(sign7))

    counts = {N: iota1_sign_changes(N, n)[0] for N in range(7, dim_max + 1)}
    counts_fine = {N: iota1_sign_changes(N, refine * n)[0] for N in range(7, dim_max + 1)}
    two = [N for N, c in counts.items() if c >= 2]
    two_fine = [N for N, c in counts_fine.items() if c >= 2]
    n_min = two[0] if two else None
    n_min_fine = two_fine[0] if two_fine else None
    for N in range(8, dim_max + 1):
        if N <= 30 or N % 10 == 0 or counts[N] != counts_fine[N]:
            rep.add(N, "iota1_sign_changes", counts[N])
    rep.add(dim_max, "N_min", n_min if n_min is not None else "none")
    rep.add(dim_max, "N_min_refined", n_min_fine if n_min_fine is not None else "none")
    if n_min is not None:
        rep.add(dim_max, "two_roots_for_all_N_from_N_min", all(counts[N] == 2 for N in range(n_min, dim_max + 1)))
        t0 = find_tstar("gamma1", n_min).t
        f = lambda t: iota_ring(3, t, n_min, scaled=True)
        for br in find_sign_changes(f, t0 + GRID_MARGIN, 1.0 - GRID_MARGIN, n):
            rep.add(n_min, "iota1_root", bracket_and_refine(f, br.lo, br.hi).t)
    if not clean7:
        rep.verdict = "falsified"
    elif n_min is not None and n_min == n_min_fine:
        rep.verdict = "verified"
    return rep


def k3_half_quantities(N: int) -> dict:
    """The values at t = 1/2 entering the large-N argument."""
    g, dg, _ = coefficient("gamma1", 0.5, N)
    tau, dtau, _ = coefficient("tau1", 0.5, N)
    iota = iota_ring(3, 0.5, N) if g > 0 else float("nan")
    return {
        "gamma1": g, "dgamma1": dg, "tau1": tau, "dtau1": dtau,
        "dtau1_exact": -(N - 2) * 2.0 ** (N - 1),
        "dgamma1_bound": 1.1 * (N - 2) * (4.0 / 3.0) ** (N - 1),
        "ratio_bound": (11.0 / 12.0) * (2.0 / 3.0) ** (N - 2),
        "iota1_half": iota,
    }


def _threshold_from(flags: dict):
    """Smallest N0 such that flags[N] holds for all N >= N0 in the scanned range."""
    n0 = None
    for N in sorted(flags, reverse=True):
        if not flags[N]:
            break
        n0 = N
    return n0


def verify_k3_largeN_inequalities(dim, dim_max: int = 200) -> ClaimReport:
    N_lo = require_claim_dimension(dim).N
    dim_max = max(dim_max, N_lo)
    rep = ClaimReport("k3-inequalities", N_lo, "inconclusive",
                      tolerances=_default_tolerances(dtau1_rel=1e-14, dim_max=dim_max))
    flags = {"dgamma1_bound": {}, "ratio_bound": {}, "premise": {}, "iota1_half_negative": {}}
    worst_rel = 0.0
    for N in range(N_lo, dim_max + 1):
        q = k3_half_quantities(N)
        rel = abs(q["dtau1"] / q["dtau1_exact"] - 1.0)
        worst_rel = max(worst_rel, rel)
        slack_g = q["dgamma1_bound"] - q["dgamma1"]
        flags["dgamma1_bound"][N] = bool(margin_ok(slack_g, q["dgamma1_bound"]))
        ratio = q["gamma1"] / q["tau1"]
        flags["ratio_bound"][N] = bool(margin_ok(ratio - q["ratio_bound"], abs(ratio)))
        prem = q["gamma1"] / q["tau1"] ** 2
        flags["premise"][N] = bool(margin_ok(1.0 - prem, 1.0))
        flags["iota1_half_negative"][N] = bool(q["iota1_half"] < 0)
        if N <= 60 or N == dim_max:
            rep.add(N, "dtau1_rel_error", rel)
        if N in (N_lo, dim_max):
            rep.add(N, "dgamma1_over_bound", q["dgamma1"] / q["dgamma1_bound"])
            rep.add(N, "ratio_over_bound", ratio / q["ratio_bound"])
            rep.add(N, "gamma1_over_tau1_sq", prem)
    rep.add(dim_max, "dtau1_max_rel_error", worst_rel)
    thresholds = {}
    for key, fl in flags.items():
        thresholds[key] = _threshold_from(fl)
        rep.add(dim_max, f"threshold_{key}", thresholds[key] if thresholds[key] is not None else "none")
    exact_ok = worst_rel <= 1e-14
    bounds_ok = thresholds["dgamma1_bound"] is not None and thresholds["ratio_bound"] is not None
    if not exact_ok:
        rep.verdict = "falsified"
    elif bounds_ok and thresholds["dgamma1_bound"] < dim_max and thresholds["ratio_bound"] < dim_max:
        rep.verdict = "verified"
    return rep


# --- k = 4 -----------------------------------------------------------------

T_A = (math.sqrt(6.0) - math.sqrt(2.0)) / 2.0  # 1 - T_A^2 = sqrt(2) T_A
T_B = 1.0 / math.sqrt(2.0)


def k4_chain_lhs(t, N):
    """(T^N + 3T)(1 - t^(N-2))^2 with T = t^2/(1 - t^2)."""
    t = np.asarray(t, dtype=float)
    T = t * t / (1.0 - t * t)
    return (T**N + 3.0 * T) * (1.0 - t ** (N - 2)) ** 2


def k4_f_prime(T, N):
    """d/dT of 3T(1 - (T/(1+T))^((N-2)/2))^2, written as in the monotonicity step."""
    q = (T / (1.0 + T)) ** (0.5 * (N - 2))
    return (1.0 - q) * (3.0 - 3.0 * q - 3.0 * (N - 2) * q / (1.0 + T))


def k4_chain_constants() -> dict:
    TA = (math.sqrt(3.0) - 1.0) / 2.0
    return {
        "equ4": 3.0 * (1.0 - 0.8**5) ** 2,
        "equ5": 0.8**4 / 4.0 * (0.8**2 / (1.0 - 0.8**2)) ** 5,
        "equ6": 3.0 * TA * (1.0 - (TA / (1.0 + TA)) ** 2.5) ** 2,
        "fprime_bound": (1.0 - 0.5**2.5) * (3.0 - 3.0 * 0.5**2.5 - 15.0 * 0.5**2.5 / (1.0 + TA)),
    }


def verify_k4_nonexistence(dim, n: int = GRID_POINTS) -> ClaimReport:
    N = require_claim_dimension(dim).N
    rep = ClaimReport("k4-nonexistence", N, "inconclusive", tolerances=_default_tolerances(grid_points=n))
    ok = True

    t0 = find_tstar("gamma2", N).t
    rep.add(N, "t_star", t0)
    ts = _grid(t0, 1.0, n)
    a, b = iota_ring_terms(4, ts, N, scaled=True)
    good = margin_ok(a + b, np.abs(a) + np.abs(b))
    i_min = int(np.argmin((a + b) / (np.abs(a) + np.abs(b))))
    rep.add(float(ts[i_min]), "iota2_min_over_scale", float((a + b)[i_min] / (abs(a[i_min]) + abs(b[i_min]))))
    if not np.all(good):
        bad = int(np.argmin(good))
        rep.add(float(ts[bad]), "iota2_violation", float((a + b)[bad]))
        ok = False

    g_a = coefficient("gamma2", T_A, N)[0]
    rep.add(T_A, "gamma2", g_a)
    rep.add(N, "t_star_above_T_A", bool(t0 > T_A))
    ok &= bool(margin_ok(-g_a, abs(g_a))) and t0 > T_A

    pieces = {"(T_A,1/sqrt2)": (T_A, T_B), "[1/sqrt2,4/5)": (T_B, 0.8), "[4/5,1)": (0.8, 1.0)}
    for name, (lo, hi) in pieces.items():
        grid = np.linspace(lo, hi, n + 1)[:-1] if lo != T_A else np.linspace(lo, hi, n + 2)[1:-1]
        grid = grid[grid <= T_MAX]
        lhs = k4_chain_lhs(grid, N)
        fine = margin_ok(lhs - 1.0, np.maximum(lhs, 1.0))
        rep.add(name, "chain_min", float(np.min(lhs)))
        if not np.all(fine):
            rep.add(name, "chain_violation_t", float(grid[int(np.argmin(fine))]))
            ok = False

    TA = (math.sqrt(3.0) - 1.0) / 2.0
    Ts = np.linspace(TA, 1.0, n)
    fp = k4_f_prime(Ts, N)
    rep.add(N, "fprime_min", float(np.min(fp)))
    ok &= bool(np.all(margin_ok(fp, 3.0)))

    for key, val in k4_chain_constants().items():
        target = 0.0 if key == "fprime_bound" else 1.0
        rep.add(key, "constant", val)
        ok &= bool(margin_ok(val - target, max(abs(val), 1.0)))
    rep.verdict = "verified" if ok else "falsified"
    return rep


# --- k = 5 (alternating square) ---------------------------------------------

def _iota3_scaled(N):
    def f(t):
        a, b, c = iota3_terms(t, N, scaled=True)
        return a + b + c
    return f


def verify_k5_existence(dim, n: int = GRID_POINTS) -> ClaimReport:
    N = require_claim_dimension(dim).N
    rep = ClaimReport("k5-existence", N, "inconclusive", tolerances=_default_tolerances(
        grid_points=n, residual_tol=1e-10, degenerate_rel=1e-12))
    t1s = find_tstar("gamma3", N).t
    rep.add(N, "t1_star", t1s)
    f = _iota3_scaled(N)
    lo, hi = T_MIN, t1s
    rep.add(lo, "iota3_scaled", float(f(lo)))
    rep.add(hi, "iota3_scaled", float(f(hi)))
    brackets = find_sign_changes(f, lo, hi, n)
    rep.add(N, "iota3_sign_changes", len(brackets))
    if not brackets:
        rep.verdict = "falsified"
        return rep
    root = bracket_and_refine(f, brackets[0].lo, brackets[0].hi)
    t1 = root.t
    rep.add(t1, "t1", t1)
    try:
        lam = lambda_profile_f5(t1, N)
    except HardyRingError as exc:
        rep.add(t1, "profile_error", str(exc))
        rep.verdict = "falsified"
        return rep
    for i, v in enumerate(lam):
        rep.add(t1, f"lambda{i}", v)
    res = f5_stationarity_residuals(lam, t1, N)
    rep.add(t1, "stationarity_residual", float(np.max(np.abs(res))))
    g3 = coefficient("gamma3", t1, N)[0]
    det_sign = f5_hessian_det_sign(t1, N)
    rep.add(t1, "det_sign", det_sign)
    rep.add(t1, "gamma3_sign", int(np.sign(g3)))

    ev = f_k_eval(5, lam, t1, N, normalized=True)
    full = classify(ev.hess)
    rep.add(t1, "grad_norm_at_profile_root", float(np.linalg.norm(ev.grad)))
    rep.add(t1, "hessian_degenerate", full.degenerate)
    rep.add(t1, "morse_index", full.index)
    try:
        lam_p, t_p, its = newton_critical(5, lam, t1, N)
        rec = critical_point_record(5, lam_p, t_p, N, its)
        rep.add(rec.t, "polished_grad_norm", rec.grad_norm)
        rep.add(rec.t, "polished_shift", float(np.linalg.norm(np.append(lam_p, t_p) - np.append(lam, t1))))
    except HardyRingError as exc:
        rep.add(t1, "polish_error", str(exc))
    ok = (
        all(v > 0 for v in lam)
        and np.max(np.abs(res)) <= 1e-10
        and det_sign == int(np.sign(g3))
        and not full.degenerate
    )
    rep.verdict = "verified" if ok else "falsified"
    return rep


def probe_k5_second_root(dim, n: int = GRID_POINTS) -> ClaimReport:
    """Look for a zero of iota3 on (t2*, 1); found -> verified, else inconclusive."""
    N = require_claim_dimension(dim).N
    rep = ClaimReport("k5-second-root", N, "inconclusive", tolerances=_default_tolerances(grid_points=n))
    t2s = find_tstars(N)["gamma3-2tau1sq"].t
    rep.add(N, "t2_star", t2s)
    f = _iota3_scaled(N)
    ts = _grid(t2s, 1.0, n)
    vals = f(ts)
    for t in (ts[0], ts[n // 2], ts[-1]):
        rep.add(float(t), "iota3_scaled", float(f(t)))
    brackets = find_sign_changes(f, ts[0], ts[-1], n)
    rep.add(N, "iota3_sign_changes", len(brackets))
    rep.add(N, "iota3_sign", int(np.sign(vals[0])) if len(brackets) == 0 else 0)
    if brackets:
        rep.add(N, "t2", bracket_and_refine(f, brackets[0].lo, brackets[0].hi).t)
        rep.verdict = "verified"
    return rep


def run_claim(claim_id: str, dim: int, dim_max: int | None = None) -> ClaimReport:
    if claim_id == "k2-two-points":
        return verify_k2_two_points(dim)
    if claim_id == "k3-threshold":
        return scan_k3_threshold(dim_max if dim_max is not None else 200)
    if claim_id == "k3-inequalities":
        return verify_k3_largeN_inequalities(dim, dim_max if dim_max is not None else 200)
    if claim_id == "k4-nonexistence":
        return verify_k4_nonexistence(dim)
    if claim_id == "k5-existence":
        return verify_k5_existence(dim)
    if claim_id == "k5-second-root":
        return probe_k5_second_root(dim)
    raise ValueError(f"unknown claim {claim_id!r}; choose from {CLAIM_IDS}")
