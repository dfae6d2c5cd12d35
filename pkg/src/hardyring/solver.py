"""Root brackets, Morse classification and Newton search for critical points of f_k.

Newton runs on the normalized energy f_k / b2 in the coordinates
(log s_0, log s_1[, log s_2], t), where s_i = lambda_i^((N-2)/2).  In these
coordinates the stationarity equations read s_i (A s)_i / c = w_i, every
entry is O(1) and the iteration is well conditioned for every N.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .constants import as_dimension, bubble_integrals, half_ratio
from .energy import (
    RING_GAMMA, f_k_eval, iota3, iota_ring, lambda_profile, lambda_profile_f5,
    log_weights, ring_form,
)
from .errors import BracketError, ConvergenceError, DomainError, ProfileUndefinedError
from .green import T_MAX, T_MIN, coefficient, sign_scale

MAX_ITER = 200
STALL_WINDOW = 20
DEDUP_RADIUS = 1e-8
N_SEEDS = 32
SCAN_POINTS = 4000
GRID_MARGIN = 1e-4


@dataclass(frozen=True)
class RootBracket:
    lo: float
    hi: float
    f_lo: float
    f_hi: float

    @property
    def certified(self) -> bool:
        return self.f_lo * self.f_hi < 0.0


@dataclass(frozen=True)
class Root:
    """A refined root together with the sign-change bracket that certifies it."""

    t: float
    bracket: RootBracket
    residual: float


def find_sign_changes(f, a: float, b: float, n: int = SCAN_POINTS) -> list[RootBracket]:
    """Scan n equispaced points of [a, b]; f must accept an array."""
    xs = np.linspace(a, b, n)
    ys = np.asarray(f(xs), dtype=float)
    out = []
    for i in np.nonzero(np.sign(ys[:-1]) * np.sign(ys[1:]) < 0)[0]:
        out.append(RootBracket(float(xs[i]), float(xs[i + 1]), float(ys[i]), float(ys[i + 1])))
    return out


def bracket_and_refine(f, lo: float, hi: float, xtol: float = 4e-16) -> Root:
    """Brent's method inside [lo, hi] after checking the sign change."""
    f_lo, f_hi = float(f(lo)), float(f(hi))
    br = RootBracket(lo, hi, f_lo, f_hi)
    if not br.certified:
        raise BracketError(f"no sign change on [{lo}, {hi}]: f = {f_lo:.3g}, {f_hi:.3g}")
    t = optimize.brentq(f, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500)
    return Root(t=float(t), bracket=br, residual=abs(float(f(t))))


# --- distinguished radii ---------------------------------------------------

TSTAR_FUNCTIONS = ("gamma1", "gamma2", "gamma3", "gamma3-2tau1sq")


def tstar_function(which: str, dim):
    """t -> (scaled) coefficient whose zero defines the requested radius.

    Values are divided by a positive t-dependent factor so that the scan
    cannot overflow; roots and signs are those of the plain coefficient.
    """
    N = as_dimension(dim).N
    if which not in TSTAR_FUNCTIONS:
        raise DomainError(f"unknown radius function {which!r}; choose from {TSTAR_FUNCTIONS}")

    def f(t):
        L = sign_scale(t, N)
        if which == "gamma3-2tau1sq":
            g = coefficient("gamma3", t, N, L)[0]
            tau = coefficient("tau1", t, N, 0.5 * L)[0]
            return g - 2.0 * tau * tau
        return coefficient(which, t, N, L)[0]

    return f


def find_tstar(which: str, dim, lo: float = T_MIN, hi: float = T_MAX, n: int = SCAN_POINTS) -> Root:
    """The unique zero of the radius function on [lo, hi]."""
    f = tstar_function(which, dim)
    brackets = find_sign_changes(f, lo, hi, n)
    if not brackets:
        raise BracketError(f"{which} has no sign change on [{lo}, {hi}]")
    if len(brackets) > 1:
        raise BracketError(f"{which} changes sign {len(brackets)} times on [{lo}, {hi}]")
    return bracket_and_refine(f, brackets[0].lo, brackets[0].hi)


def find_tstars(dim) -> dict[str, Root]:
    N = as_dimension(dim).N
    return {
        "gamma1": find_tstar("gamma1", N),
        "gamma2": find_tstar("gamma2", N),
        "gamma3": find_tstar("gamma3", N),
        "gamma3-2tau1sq": find_tstar("gamma3-2tau1sq", N, 0.5, T_MAX),
    }


# --- Morse classification --------------------------------------------------

def jacobi_eigenvalues(A, tol: float = 1e-15, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations, ascending."""
    a = np.array(A, dtype=float, copy=True)
    n = a.shape[0]
    if a.shape != (n, n) or not np.allclose(a, a.T, rtol=1e-12, atol=0.0):
        raise DomainError("jacobi_eigenvalues needs a square symmetric matrix")
    a = 0.5 * (a + a.T)
    scale = np.linalg.norm(a)
    offdiag = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        if np.linalg.norm(a[offdiag]) <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q], rot[q, p] = s, -s
                a = rot.T @ a @ rot
    else:
        raise ConvergenceError("Jacobi sweeps did not converge")
    return np.sort(np.diag(a))


def symmetric_eigenvalues(H) -> np.ndarray:
    H = np.asarray(H, dtype=float)
    if H.shape == (2, 2):
        mean = 0.5 * (H[0, 0] + H[1, 1])
        rad = math.hypot(0.5 * (H[0, 0] - H[1, 1]), H[0, 1])
        # smaller root from the product to avoid cancellation
        big = mean + math.copysign(rad, mean) if mean != 0.0 else rad
        det = H[0, 0] * H[1, 1] - H[0, 1] * H[1, 0]
        small = det / big if big != 0.0 else -rad
        return np.sort(np.array([big, small]))
    return jacobi_eigenvalues(H)


@dataclass(frozen=True)
class MorseClass:
    index: int
    eigenvalues: tuple
    degenerate: bool
    degree_sign: int  # sign of det H, 0 when degenerate

    @property
    def kind(self) -> str:
        if self.degenerate:
            return "other"
        return {0: "local_min", 1: "saddle_index_1"}.get(self.index, "other")


def classify(H, rel_tol: float = 1e-12) -> MorseClass:
    """Morse index of a symmetric matrix; degenerate when some |eigenvalue| <= rel_tol ||H||."""
    eig = symmetric_eigenvalues(H)
    thresh = rel_tol * np.linalg.norm(np.asarray(H, dtype=float))
    degenerate = bool(np.any(np.abs(eig) <= thresh))
    index = int(np.sum(eig < -thresh))
    return MorseClass(
        index=index,
        eigenvalues=tuple(float(e) for e in eig),
        degenerate=degenerate,
        degree_sign=0 if degenerate else (-1) ** index,
    )


# --- Newton on the normalized energy ---------------------------------------

def _log_chart(k, z, N):
    """Value, gradient and Hessian of f_k / b2 in (log s, t)."""
    n = len(z) - 1
    sig, t = z[:n], z[n]
    s = np.exp(sig)
    c = half_ratio(N)
    w = log_weights(k)
    A, dA, d2A = ring_form(k, t, N)
    As = A @ s
    val = s @ As / (2 * c) - w @ sig
    g = np.empty(n + 1)
    g[:n] = s * As / c - w
    g[n] = s @ dA @ s / (2 * c)
    H = np.empty((n + 1, n + 1))
    H[:n, :n] = np.outer(s, s) * A / c + np.diag(s * As / c)
    H[:n, n] = H[n, :n] = s * (dA @ s) / c
    H[n, n] = s @ d2A @ s / (2 * c)
    return val, g, H


@dataclass
class CriticalPointRecord:
    k: int
    N: int
    lam: tuple
    t: float
    value: float
    value_normalized: float
    grad_norm: float
    grad_norm_raw: float
    fd_grad_norm: float
    morse_index: int
    morse_index_log_chart: int
    eigenvalues: tuple
    degenerate: bool
    degree_sign: int
    kind: str
    iterations: int
    converged: bool = True
    variables: tuple = field(default=())

    def to_dict(self) -> dict:
        return {
            "k": self.k, "N": self.N, "lambda": list(self.lam), "t": self.t,
            "value": self.value, "value_normalized": self.value_normalized,
            "grad_norm": self.grad_norm, "grad_norm_raw": self.grad_norm_raw,
            "fd_grad_norm": self.fd_grad_norm, "morse_index": self.morse_index,
            "eigenvalues": list(self.eigenvalues), "degenerate": self.degenerate,
            "degree_sign": self.degree_sign, "kind": self.kind,
            "iterations": self.iterations,
        }


def _in_domain(z):
    return T_MIN <= z[-1] <= T_MAX and np.all(np.isfinite(z))


def _safe_eval(k, z, N):
    try:
        return _log_chart(k, z, N)
    except (DomainError, ArithmeticError):
        return None


def newton_critical(k: int, lam0, t0: float, dim, tol: float = 1e-13, max_iter: int = MAX_ITER):
    """Newton iteration from (lam0, t0); returns (lam, t, iterations).

    A backtracking line search on |grad|^2 keeps t inside the clamp range.
    When the Hessian is numerically singular a damped gradient step is taken.
    """
    N = as_dimension(dim).N
    m = 0.5 * (N - 2)
    z = np.append(m * np.log(np.asarray(lam0, dtype=float)), float(t0))
    ev = _safe_eval(k, z, N)
    if ev is None:
        raise ConvergenceError("Newton seed outside the domain")
    history = []
    for it in range(1, max_iter + 1):
        _, g, H = ev
        gn = np.linalg.norm(g)
        if gn <= tol:
            return np.exp(z[:-1] / m), float(z[-1]), it - 1
        history.append(gn)
        if len(history) > STALL_WINDOW and gn > 0.5 * history[-STALL_WINDOW - 1]:
            raise ConvergenceError(f"stalled at |grad| = {gn:.3g} after {it} iterations")
        try:
            step = np.linalg.solve(H, -g)
            if not np.all(np.isfinite(step)) or np.linalg.cond(H) > 1e14:
                raise np.linalg.LinAlgError
        except np.linalg.LinAlgError:
            step = -g / max(1.0, np.linalg.norm(H))
        # keep t steps inside a fraction of the distance to the boundary
        room = min(z[-1] - T_MIN, T_MAX - z[-1])
        if abs(step[-1]) > 0.5 * room and room > 0:
            step *= 0.5 * room / abs(step[-1])
        a = 1.0
        accepted = False
        while a > 1e-9:
            zn = z + a * step
            if _in_domain(zn):
                evn = _safe_eval(k, zn, N)
                if evn is not None and np.linalg.norm(evn[1]) < (1.0 - 1e-4 * a) * gn:
                    z, ev, accepted = zn, evn, True
                    break
            a *= 0.5
        if not accepted:
            # roundoff floor: accept if already tiny, otherwise report failure
            if gn <= 1e3 * tol:
                return np.exp(z[:-1] / m), float(z[-1]), it
            raise ConvergenceError(f"line search stalled at |grad| = {gn:.3g}")
    _, g, _ = ev
    if np.linalg.norm(g) <= 1e3 * tol:
        return np.exp(z[:-1] / m), float(z[-1]), max_iter
    raise ConvergenceError(f"no convergence in {max_iter} iterations")


def _fd_grad(k, lam, t, N, h=1e-6):
    x = np.append(lam, t)
    out = np.empty_like(x)
    for i in range(len(x)):
        hi = h * max(1.0, abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += hi
        xm[i] -= hi
        fp = f_k_eval(k, xp[:-1], xp[-1], N, normalized=True).value
        fm = f_k_eval(k, xm[:-1], xm[-1], N, normalized=True).value
        out[i] = (fp - fm) / (2 * hi)
    return out


def critical_point_record(k: int, lam, t: float, dim, iterations: int = 0) -> CriticalPointRecord:
    N = as_dimension(dim).N
    lam = np.asarray(lam, dtype=float)
    ev = f_k_eval(k, lam, t, N, normalized=True)
    b2 = bubble_integrals(N)[1]
    morse = classify(ev.hess)
    m = 0.5 * (N - 2)
    _, _, H_log = _log_chart(k, np.append(m * np.log(lam), t), N)
    return CriticalPointRecord(
        k=k, N=N, lam=tuple(float(v) for v in lam), t=float(t),
        value=ev.value * b2, value_normalized=ev.value,
        grad_norm=float(np.linalg.norm(ev.grad)),
        grad_norm_raw=float(np.linalg.norm(ev.grad) * b2),
        fd_grad_norm=float(np.linalg.norm(_fd_grad(k, lam, t, N))),
        morse_index=morse.index,
        morse_index_log_chart=classify(H_log).index,
        eigenvalues=morse.eigenvalues, degenerate=morse.degenerate,
        degree_sign=morse.degree_sign, kind=morse.kind,
        iterations=iterations, variables=ev.variables,
    )


def _profile_domain(k, N):
    """Subintervals of t where the lambda-profile of f_k exists."""
    if k in RING_GAMMA:
        t0 = find_tstar(RING_GAMMA[k], N).t
        return [(t0 + GRID_MARGIN, T_MAX)]
    if k == 5:
        roots = find_tstars(N)
        return [(T_MIN, roots["gamma3"].t - GRID_MARGIN), (roots["gamma3-2tau1sq"].t + GRID_MARGIN, T_MAX)]
    raise DomainError(f"no critical-point search for k={k}")


def _profile(k, t, N):
    return lambda_profile_f5(t, N) if k == 5 else lambda_profile(k, t, N)


def _iota(k, N):
    if k == 5:
        return lambda t: iota3(t, N, scaled=True)
    return lambda t: iota_ring(k, t, N, scaled=True)


def profile_roots(k: int, dim, n: int = SCAN_POINTS) -> list[Root]:
    """Zeros of the reduced t-derivative along the lambda-profile."""
    N = as_dimension(dim).N
    f = _iota(k, N)
    roots = []
    for lo, hi in _profile_domain(k, N):
        if hi <= lo:
            continue
        for br in find_sign_changes(f, lo, hi, n):
            roots.append(bracket_and_refine(f, br.lo, br.hi))
    return roots


def _seeds(k, N):
    seeds = [r.t for r in profile_roots(k, N)]
    for lo, hi in _profile_domain(k, N):
        if hi > lo:
            seeds.extend(np.linspace(lo, hi, N_SEEDS + 2)[1:-1])
    return seeds


def find_critical_points(k: int, dim) -> list[CriticalPointRecord]:
    """All critical points of f_k reached from profile seeds, sorted by t."""
    N = as_dimension(dim).N
    if k not in (2, 3, 5):
        raise DomainError("critical-point search is provided for k in {2, 3, 5}")
    found: list[tuple[np.ndarray, int]] = []
    for t0 in _seeds(k, N):
        try:
            lam0 = _profile(k, t0, N)
            lam, t, its = newton_critical(k, lam0, t0, N)
        except (ConvergenceError, ProfileUndefinedError, ArithmeticError):
            continue
        x = np.append(lam, t)
        if any(np.linalg.norm(x - y) <= DEDUP_RADIUS * max(1.0, np.linalg.norm(y)) for y, _ in found):
            continue
        found.append((x, its))
    recs = [critical_point_record(k, x[:-1], x[-1], N, its) for x, its in found]
    return sorted(recs, key=lambda r: (r.t, r.lam))
