"""Reduced energies psi, psi_tilde and their symmetric slices f2..f5.

Write s_i = lambda_i^((N-2)/2) (X, Y, Z for lambda_0, lambda_1, lambda_2) and
c = b2 / (2 b1).  On the symmetric slices every reduced energy is

    f = b1 s^T A(t) s - b2 sum_i w_i log s_i = b2 * (s^T A s / (2c) - w . log s)

with a small symmetric matrix A(t) built from tau1 and gamma1..gamma4:

    k = 2, 3, 4 :  A = [[1, k tau1], [k tau1, k gamma]],     w = (1, k)
    k = 5       :  A = [[1, 2 tau1, -2 tau1],
                        [2 tau1, 2 gamma3, 4 gamma4],
                        [-2 tau1, 4 gamma4, 2 gamma3]],       w = (1, 2, 2)

where gamma is gamma3, gamma1, gamma2 for k = 2, 3, 4.  "k = 5" is the
alternating square (f5).  Gradients and Hessians are formed in the s-chart
and pulled back to lambda by the chain rule.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constants import as_dimension, bubble_integrals, half_ratio
from .errors import DomainError, ProfileUndefinedError
from .green import coefficient, green, regular_part, sign_scale

RING_GAMMA = {2: "gamma3", 3: "gamma1", 4: "gamma2"}
FAMILIES = (2, 3, 4, 5)


@dataclass(frozen=True)
class LambdaState:
    lambda0: float
    lambda1: float
    lambda2: float | None = None

    def __post_init__(self):
        for v in self.as_array():
            if not v > 0.0:
                raise DomainError("lambda entries must be strictly positive")

    def as_array(self) -> np.ndarray:
        vals = [self.lambda0, self.lambda1]
        if self.lambda2 is not None:
            vals.append(self.lambda2)
        return np.array(vals, dtype=float)

    @classmethod
    def from_array(cls, lam) -> "LambdaState":
        lam = [float(v) for v in lam]
        return cls(*lam)

    def within(self, eta: float) -> bool:
        lam = self.as_array()
        return bool(np.all((lam > eta) & (lam < 1.0 / eta)))


@dataclass
class EnergyEvaluation:
    """Value, gradient and Hessian over (lambda..., t); s-chart copies alongside."""

    value: float
    grad: np.ndarray
    hess: np.ndarray
    grad_s: np.ndarray
    hess_s: np.ndarray
    scale: float = 1.0
    variables: tuple = field(default=())


def _family(k: int) -> int:
    if k not in FAMILIES:
        raise DomainError(f"reduced energy family must be one of {FAMILIES}, got {k}")
    return k


def n_lambda(k: int) -> int:
    return 3 if _family(k) == 5 else 2


def log_weights(k: int) -> np.ndarray:
    return np.array([1.0, 2.0, 2.0]) if _family(k) == 5 else np.array([1.0, float(k)])


def ring_form(k: int, t: float, dim, log_scale: float = 0.0):
    """(A, dA/dt, d2A/dt2) for family k at radius t."""
    N = as_dimension(dim).N
    _family(k)
    tau = coefficient("tau1", t, N, log_scale)
    one = np.exp(-log_scale)
    if k == 5:
        g3 = coefficient("gamma3", t, N, log_scale)
        g4 = coefficient("gamma4", t, N, log_scale)
        mats = []
        for order in range(3):
            h00 = one if order == 0 else 0.0
            tt, a3, a4 = tau[order], g3[order], g4[order]
            mats.append(np.array([
                [h00, 2 * tt, -2 * tt],
                [2 * tt, 2 * a3, 4 * a4],
                [-2 * tt, 4 * a4, 2 * a3],
            ]))
        return tuple(mats)
    gam = coefficient(RING_GAMMA[k], t, N, log_scale)
    mats = []
    for order in range(3):
        h00 = one if order == 0 else 0.0
        mats.append(np.array([[h00, k * tau[order]], [k * tau[order], k * gam[order]]]))
    return tuple(mats)


def _expand_lambda(k: int, lam) -> np.ndarray:
    lam = lam.as_array() if isinstance(lam, LambdaState) else np.asarray(lam, dtype=float)
    if lam.shape != (n_lambda(k),):
        raise DomainError(f"family {k} takes {n_lambda(k)} lambda values, got {lam.shape}")
    if np.any(lam <= 0.0):
        raise DomainError("lambda entries must be strictly positive")
    return lam


def normalized_value(k: int, lam, t: float, dim) -> float:
    """f_k / b2 at (lambda, t)."""
    N = as_dimension(dim).N
    lam = _expand_lambda(k, lam)
    s = lam ** (0.5 * (N - 2))
    A = ring_form(k, t, N)[0]
    return float(s @ A @ s / (2.0 * half_ratio(N)) - log_weights(k) @ np.log(s))


def f_value(k: int, lam, t: float, dim) -> float:
    N = as_dimension(dim).N
    return bubble_integrals(N)[1] * normalized_value(k, lam, t, N)


def evaluate_s(k: int, s, t: float, dim):
    """Normalized value, gradient and Hessian in the (s, t) chart."""
    N = as_dimension(dim).N
    s = np.asarray(s, dtype=float)
    c = half_ratio(N)
    w = log_weights(k)
    A, dA, d2A = ring_form(k, t, N)
    n = len(s)
    value = float(s @ A @ s / (2 * c) - w @ np.log(s))
    grad = np.empty(n + 1)
    grad[:n] = A @ s / c - w / s
    grad[n] = s @ dA @ s / (2 * c)
    hess = np.empty((n + 1, n + 1))
    hess[:n, :n] = A / c + np.diag(w / s**2)
    hess[:n, n] = hess[n, :n] = dA @ s / c
    hess[n, n] = s @ d2A @ s / (2 * c)
    return value, grad, hess


def f_k_eval(k: int, state, t: float, dim, normalized: bool = False) -> EnergyEvaluation:
    """f_k with analytic gradient and Hessian over (lambda_0, lambda_1[, lambda_2], t).

    ``normalized=True`` returns f_k / b2, which is O(1) for every N.
    """
    N = as_dimension(dim).N
    lam = _expand_lambda(k, state)
    m = 0.5 * (N - 2)
    s = lam**m
    value, gs, hs = evaluate_s(k, s, t, N)
    n = len(lam)
    ds = m * s / lam
    d2s = m * (m - 1.0) * s / lam**2
    jac = np.append(ds, 1.0)
    grad = gs * jac
    hess = hs * np.outer(jac, jac)
    hess[np.arange(n), np.arange(n)] += gs[:n] * d2s
    scale = 1.0 if normalized else bubble_integrals(N)[1]
    names = ("lambda0", "lambda1", "lambda2")[:n] + ("t",)
    return EnergyEvaluation(
        value=value * scale, grad=grad * scale, hess=hess * scale,
        grad_s=gs * scale, hess_s=hs * scale, scale=scale, variables=names,
    )


def f5_eval(state, t: float, dim, normalized: bool = False) -> EnergyEvaluation:
    return f_k_eval(5, state, t, dim, normalized)


# --- general configurations ------------------------------------------------

def _pair_sums(lam, xi, N, center_sign, pair_sign):
    lam = np.asarray(lam, dtype=float)
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    k = xi.shape[0] if xi.size else 0
    if lam.shape != (k + 1,):
        raise DomainError("need one lambda per point plus lambda_0")
    if np.any(lam <= 0.0):
        raise DomainError("lambda entries must be strictly positive")
    origin = np.zeros(N)
    m = N - 2
    h = 0.5 * m
    total = float(regular_part(origin, origin, N)) * lam[0] ** m
    for i in range(k):
        if np.all(xi[i] == 0.0):
            raise DomainError("blow-up points must differ from the origin")
        total += float(regular_part(xi[i], xi[i], N)) * lam[i + 1] ** m
        total += 2.0 * center_sign(i) * float(green(xi[i], origin, N)) * lam[0] ** h * lam[i + 1] ** h
    for i in range(k):
        for j in range(i + 1, k):
            total += 2.0 * pair_sign(i, j) * float(green(xi[i], xi[j], N)) * lam[i + 1] ** h * lam[j + 1] ** h
    return total


def psi(lam, xi, dim) -> float:
    """Reduced energy with a positive bubble at 0 and negative bubbles at xi."""
    N = as_dimension(dim).N
    b1, b2 = bubble_integrals(N)
    quad = _pair_sums(lam, xi, N, lambda i: 1.0, lambda i, j: -1.0)
    return b1 * quad - b2 * 0.5 * (N - 2) * float(np.sum(np.log(lam)))


def psi_tilde(lam, xi, dim) -> float:
    """Reduced energy with signs (-1)^i on the points xi_1..xi_k."""
    N = as_dimension(dim).N
    b1, b2 = bubble_integrals(N)
    # 1-based i: center coupling (-1)^(i-1), pair coupling (-1)^(i+j-1)
    quad = _pair_sums(
        lam, xi, N,
        lambda i: (-1.0) ** i,
        lambda i, j: (-1.0) ** (i + j + 1),
    )
    return b1 * quad - b2 * 0.5 * (N - 2) * float(np.sum(np.log(lam)))


# --- all-negative rings: profiles and one-dimensional reductions -------------

def _ring_alpha(k, gam, tau):
    # positive root of a^2 + (k-1) tau a - gamma = 0, cancellation-free form
    return 2.0 * gam / ((k - 1) * tau + np.sqrt((k - 1) ** 2 * tau * tau + 4.0 * gam))


def alpha_beta(k: int, t, dim):
    """(alpha, beta) with lambda0^((N-2)/2) = alpha lambda1^((N-2)/2) and beta = gamma + tau1 alpha."""
    if k not in RING_GAMMA:
        raise DomainError("alpha/beta are defined for the all-negative rings k = 2, 3, 4")
    N = as_dimension(dim).N
    tau = coefficient("tau1", t, N)[0]
    gam = coefficient(RING_GAMMA[k], t, N)[0]
    if np.any(np.asarray(gam) < 0.0):
        raise ProfileUndefinedError(f"ring coupling is negative at t={t}; alpha would be negative")
    alpha = _ring_alpha(k, gam, tau)
    return alpha, gam + tau * alpha


def lambda_profile(k: int, t: float, dim) -> tuple[float, float]:
    """Unique (lambda0(t), lambda1(t)) with vanishing lambda-gradient of f_k."""
    N = as_dimension(dim).N
    alpha, beta = alpha_beta(k, t, N)
    if not (alpha > 0.0 and beta > 0.0):
        raise ProfileUndefinedError(f"no positive lambda-profile for k={k} at t={t}")
    Y = np.sqrt(half_ratio(N) / beta)
    X = alpha * Y
    inv = 2.0 / (N - 2)
    return float(X**inv), float(Y**inv)


def lambda_profile_f3(t: float, dim) -> tuple[float, float]:
    return lambda_profile(3, t, dim)


def nu_ring(k: int, t: float, dim) -> float:
    """f_k along its profile via the stationarity identity (k + 1) b2 / 2 - b2 log(X Y^k)."""
    N = as_dimension(dim).N
    b2 = bubble_integrals(N)[1]
    l0, l1 = lambda_profile(k, t, N)
    return (k + 1) * b2 / 2.0 - b2 * 0.5 * (N - 2) * np.log(l1**k * l0)


def nu_ring_direct(k: int, t: float, dim) -> float:
    return f_value(k, lambda_profile(k, t, dim), t, dim)


def nu1(t: float, dim) -> float:
    return nu_ring(3, t, dim)


def iota_ring_terms(k: int, t, dim, scaled: bool = False):
    """The two summands gamma'(t) and 2 alpha(t) tau1'(t) of iota.

    With ``scaled=True`` both are divided by a common positive factor so that
    large N stays finite; signs and zero sets are unchanged.
    """
    if k not in RING_GAMMA:
        raise DomainError("iota is defined for k = 2, 3, 4")
    N = as_dimension(dim).N
    L = sign_scale(t, N) if scaled else 0.0
    gam, dgam, _ = coefficient(RING_GAMMA[k], t, N, L)
    tau, dtau, _ = coefficient("tau1", t, N, 0.5 * L)
    if np.any(np.asarray(gam) < 0.0):
        raise ProfileUndefinedError(f"iota needs a nonnegative ring coupling (k={k})")
    alpha = _ring_alpha(k, gam, tau)
    return dgam, 2.0 * alpha * dtau


def iota_ring(k: int, t, dim, scaled: bool = False):
    """gamma' + 2 alpha tau1'; has the sign of d/dt f_k(lambda(t), t)."""
    a, b = iota_ring_terms(k, t, dim, scaled)
    return a + b


def iota1(t, dim, scaled: bool = False):
    return iota_ring(3, t, dim, scaled)


def alpha1_iota2(t, dim):
    """(alpha1(t), iota2(t)) for the all-negative square."""
    N = as_dimension(dim).N
    alpha, _ = alpha_beta(4, t, N)
    return alpha, iota_ring(4, t, N)


def beta1_helper(t, dim):
    return alpha_beta(4, t, dim)[1]


def nu_ring_derivative(k: int, t: float, dim) -> float:
    """d/dt of the profile energy = k b1 lambda1^(N-2) iota(t)."""
    N = as_dimension(dim).N
    b1, _ = bubble_integrals(N)
    _, l1 = lambda_profile(k, t, N)
    return k * b1 * l1 ** (N - 2) * iota_ring(k, t, N)


def f3_profile_hessian(t: float, dim, simplified: bool = False) -> np.ndarray:
    """The 2x2 lambda-Hessian of f3 on its profile from the explicit second-derivative formulas.

    ``simplified=False`` keeps the b2 / lambda^2 terms; ``simplified=True``
    eliminates them with the two stationarity relations.
    """
    N = as_dimension(dim).N
    b1, b2 = bubble_integrals(N)
    l0, l1 = lambda_profile(3, t, N)
    g = coefficient("gamma1", t, N)[0]
    tau = coefficient("tau1", t, N)[0]
    h = 0.5 * (N - 2)
    if simplified:
        h11 = 3 * (N - 2) * b1 * ((N - 2) * g * l1 ** (N - 4) + h * tau * l0**h * l1 ** (h - 2))
        h00 = (N - 2) * b1 * ((N - 2) * l0 ** (N - 4) + 3 * h * tau * l0 ** (h - 2) * l1**h)
    else:
        h11 = (3 * (N - 2) * b1 * ((N - 3) * g * l1 ** (N - 4) + 0.5 * (N - 4) * tau * l0**h * l1 ** (h - 2))
               + 3 * (N - 2) * b2 / (2 * l1**2))
        h00 = ((N - 2) * b1 * ((N - 3) * l0 ** (N - 4) + 1.5 * (N - 4) * tau * l0 ** (h - 2) * l1**h)
               + (N - 2) * b2 / (2 * l0**2))
    h01 = 1.5 * (N - 2) ** 2 * b1 * tau * l0 ** (h - 1) * l1 ** (h - 1)
    return np.array([[h00, h01], [h01, h11]])


# --- alternating square (f5) ----------------------------------------------

def _f5_profile_s(t, N):
    c = half_ratio(N)
    tau = coefficient("tau1", t, N)[0]
    g3 = coefficient("gamma3", t, N)[0]
    g4 = coefficient("gamma4", t, N)[0]
    denom = g3 - 2.0 * tau * tau
    ratio = g3 / denom if denom != 0.0 else np.inf
    if not (np.isfinite(ratio) and ratio > 0.0):
        raise ProfileUndefinedError(
            f"gamma3/(gamma3 - 2 tau1^2) = {ratio:.6g} is not positive at t={t}"
        )
    if not g3 + 2.0 * g4 > 0.0:
        raise ProfileUndefinedError(f"gamma3 + 2 gamma4 = {g3 + 2 * g4:.6g} is not positive at t={t}")
    X = np.sqrt(ratio * c)
    d = tau * X / g3  # Z - Y
    p = c / (g3 + 2.0 * g4)  # Y Z
    root = np.sqrt(d * d + 4.0 * p)
    # Y = (root - d)/2 computed without cancellation for d > 0
    Y = 2.0 * p / (root + d) if d > 0 else 0.5 * (root - d)
    Z = p / Y
    return X, Y, Z


def lambda_profile_f5(t: float, dim) -> tuple[float, float, float]:
    """(lambda0, lambda1, lambda2) zeroing the lambda-gradient of f5."""
    N = as_dimension(dim).N
    X, Y, Z = _f5_profile_s(t, N)
    inv = 2.0 / (N - 2)
    return float(X**inv), float(Y**inv), float(Z**inv)


def f5_stationarity_residuals(state, t: float, dim) -> np.ndarray:
    """Relative residuals of the three lambda-stationarity equations of f5.

    Each equation reads lhs = b2/(2 b1); the residual is lhs / (b2/(2 b1)) - 1.
    """
    N = as_dimension(dim).N
    lam = _expand_lambda(5, state)
    X, Y, Z = lam ** (0.5 * (N - 2))
    c = half_ratio(N)
    tau = coefficient("tau1", t, N)[0]
    g3 = coefficient("gamma3", t, N)[0]
    g4 = coefficient("gamma4", t, N)[0]
    lhs = np.array([
        X * X + 2.0 * tau * X * (Y - Z),
        g3 * Y * Y + tau * X * Y + 2.0 * g4 * Y * Z,
        g3 * Z * Z - tau * X * Z + 2.0 * g4 * Y * Z,
    ])
    return lhs / c - 1.0


def nu2(t: float, dim) -> float:
    N = as_dimension(dim).N
    return f_value(5, lambda_profile_f5(t, N), t, N)


def iota3_terms(t, dim, scaled: bool = False):
    """The three summands of iota3 (optionally divided by a common positive factor)."""
    N = as_dimension(dim).N
    L = sign_scale(t, N) if scaled else 0.0
    tau, dtau, _ = coefficient("tau1", t, N, 0.5 * L)
    g3, dg3, _ = coefficient("gamma3", t, N, L)
    g4, dg4, _ = coefficient("gamma4", t, N, L)
    tau2 = tau * tau
    return (
        dg3 * (2.0 * g3 * (g3 - 2.0 * tau2) + tau2 * (g3 + 2.0 * g4)),
        -2.0 * dtau * tau * g3 * (g3 + 2.0 * g4),
        4.0 * dg4 * g3 * (g3 - 2.0 * tau2),
    )


def iota3(t, dim, scaled: bool = False):
    a, b, c = iota3_terms(t, dim, scaled)
    return a + b + c


def nu2_iota3(t: float, dim) -> tuple[float, float]:
    return nu2(t, dim), iota3(t, dim)


def nu2_derivative(t: float, dim) -> float:
    """d/dt of f5 along its profile = 2 b1 (gamma3' (Y^2+Z^2) + 2 tau1' X (Y-Z) + 4 gamma4' Y Z)."""
    N = as_dimension(dim).N
    b1, _ = bubble_integrals(N)
    X, Y, Z = _f5_profile_s(t, N)
    dtau = coefficient("tau1", t, N)[1]
    dg3 = coefficient("gamma3", t, N)[1]
    dg4 = coefficient("gamma4", t, N)[1]
    return 2.0 * b1 * (dg3 * (Y * Y + Z * Z) + 2.0 * dtau * X * (Y - Z) + 4.0 * dg4 * Y * Z)


def f5_profile_hessian(t: float, dim, simplified: bool = False) -> np.ndarray:
    """The 3x3 lambda-Hessian of f5 on its profile from explicit second-derivative formulas."""
    N = as_dimension(dim).N
    b1, b2 = bubble_integrals(N)
    l0, l1, l2 = lambda_profile_f5(t, N)
    h = 0.5 * (N - 2)
    X, Y, Z = l0**h, l1**h, l2**h
    tau = coefficient("tau1", t, N)[0]
    g3 = coefficient("gamma3", t, N)[0]
    g4 = coefficient("gamma4", t, N)[0]
    n2 = (N - 2) ** 2 * b1
    if simplified:
        h00 = n2 * (l0 ** (N - 4) + tau * l0 ** (h - 2) * (Y - Z))
        h11 = n2 * (2 * g3 * l1 ** (N - 4) + tau * X * l1 ** (h - 2) + 2 * g4 * l1 ** (h - 2) * Z)
        h22 = n2 * (2 * g3 * l2 ** (N - 4) - tau * X * l2 ** (h - 2) + 2 * g4 * Y * l2 ** (h - 2))
    else:
        h00 = ((N - 2) * b1 * ((N - 3) * l0 ** (N - 4) + (N - 4) * tau * l0 ** (h - 2) * (Y - Z))
               + (N - 2) * b2 / (2 * l0**2))
        h11 = ((N - 2) * b1 * (2 * (N - 3) * g3 * l1 ** (N - 4) + (N - 4) * tau * X * l1 ** (h - 2)
                               + 2 * (N - 4) * g4 * l1 ** (h - 2) * Z)
               + (N - 2) * b2 / l1**2)
        h22 = ((N - 2) * b1 * (2 * (N - 3) * g3 * l2 ** (N - 4) - (N - 4) * tau * X * l2 ** (h - 2)
                               + 2 * (N - 4) * g4 * Y * l2 ** (h - 2))
               + (N - 2) * b2 / l2**2)
    h01 = n2 * tau * l0 ** (h - 1) * l1 ** (h - 1)
    h02 = -n2 * tau * l0 ** (h - 1) * l2 ** (h - 1)
    h12 = 2 * n2 * g4 * l1 ** (h - 1) * l2 ** (h - 1)
    return np.array([[h00, h01, h02], [h01, h11, h12], [h02, h12, h22]])


def f5_reduced_matrix(t: float, dim) -> np.ndarray:
    """Row-rescaled lambda-Hessian of f5 in (X, Y, Z) with stationarity substituted.

    Rows are divided by positive factors, so its determinant has the sign of
    the lambda-Hessian determinant.
    """
    N = as_dimension(dim).N
    c = half_ratio(N)
    X, Y, Z = _f5_profile_s(t, N)
    tau = coefficient("tau1", t, N)[0]
    g3 = coefficient("gamma3", t, N)[0]
    g4 = coefficient("gamma4", t, N)[0]
    p, q = 2.0 / (N - 2), (N - 4.0) / (N - 2)
    return np.array([
        [X / 2 + c / (2 * X), tau * X**p * Y**q, -tau * X**p * Z**q],
        [tau * X**q * Y**p, g3 * Y + c / Y, 2 * g4 * Y**p * Z**q],
        [-tau * X**q * Z**p, 2 * g4 * Y**q * Z**p, g3 * Z + c / Z],
    ])


def f5_hessian_det_sign(t: float, dim) -> int:
    return int(np.sign(np.linalg.det(f5_reduced_matrix(t, dim))))
