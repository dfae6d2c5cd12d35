"""Dirichlet Green's function of the unit ball and the ring interaction coefficients.

Normalization: G(x, y) = |x - y|^(2-N) - H(x, y) with H(0, 0) = 1.

Every coefficient used by the reduced energies is a short sum of terms
a * u(t)^(-p) with u a polynomial in t, so values and t-derivatives are
evaluated term by term as exp(log|a| - p log u - log_scale).  A nonzero
``log_scale`` divides the result by exp(log_scale); callers that only need
signs use it to reach large N without overflow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import as_dimension
from .errors import DomainError, NumericalOverflowError

T_MIN = 1e-6
T_MAX = 1.0 - 1e-6


def _check_in_ball(*points):
    for p in points:
        if np.any(np.sum(np.asarray(p, dtype=float) ** 2, axis=-1) >= 1.0):
            raise DomainError("point outside the open unit ball")


def regular_part(x, y, dim) -> np.ndarray | float:
    """H(x, y) = (1 - 2 x.y + |x|^2 |y|^2)^(-(N-2)/2)."""
    N = as_dimension(dim).N
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_in_ball(x, y)
    q = 1.0 - 2.0 * np.sum(x * y, axis=-1) + np.sum(x * x, axis=-1) * np.sum(y * y, axis=-1)
    return np.exp(-0.5 * (N - 2) * np.log(q))


def regular_part_image(x, y, dim) -> float:
    """Image-charge form (|y| |x - y/|y|^2|)^(2-N); needs y != 0."""
    N = as_dimension(dim).N
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ny = np.linalg.norm(y)
    if ny == 0.0:
        raise DomainError("image-charge form is singular at y = 0")
    return float((ny * np.linalg.norm(x - y / ny**2)) ** (2 - N))


def green(x, y, dim) -> np.ndarray | float:
    N = as_dimension(dim).N
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d2 = np.sum((x - y) ** 2, axis=-1)
    if np.any(d2 == 0.0):
        raise DomainError("Green's function is singular at x = y")
    return np.exp(-0.5 * (N - 2) * np.log(d2)) - regular_part(x, y, dim)


def _exact_cos_sin(j: int, k: int) -> tuple[float, float]:
    # multiples of pi/2 and pi/3 come out exact, so ring distances like sqrt(3) t are clean
    frac = (j % k) / k
    table = {
        0.0: (1.0, 0.0), 0.25: (0.0, 1.0), 0.5: (-1.0, 0.0), 0.75: (0.0, -1.0),
    }
    if frac in table:
        return table[frac]
    theta = 2.0 * math.pi * frac
    c, s = math.cos(theta), math.sin(theta)
    for v in (0.5, -0.5):
        if abs(c - v) < 1e-15:
            c = v
    r3 = math.sqrt(3.0) / 2.0
    for v in (r3, -r3):
        if abs(s - v) < 1e-15:
            s = v
    return c, s


def rotation(k: int) -> np.ndarray:
    """The 2x2 rotation R_k by angle 2 pi / k."""
    c, s = _exact_cos_sin(1, k)
    return np.array([[c, -s], [s, c]])


def rotate_plane(x, k: int, power: int = 1) -> np.ndarray:
    """Apply R_k^power to the first two coordinates of x (last axis)."""
    x = np.array(x, dtype=float, copy=True)
    c, s = _exact_cos_sin(power, k)
    x0, x1 = x[..., 0].copy(), x[..., 1].copy()
    x[..., 0] = c * x0 - s * x1
    x[..., 1] = s * x0 + c * x1
    return x


def ring_points(k: int, t: float, dim) -> np.ndarray:
    """xi_i = R_k^(i-1) (t, 0, ..., 0), i = 1..k, as a (k, N) array."""
    N = as_dimension(dim).N
    if k < 1:
        raise DomainError("ring size must be >= 1")
    if not (0.0 < t < 1.0):
        raise DomainError(f"ring radius must lie in (0, 1), got {t}")
    pts = np.zeros((k, N))
    for i in range(k):
        c, s = _exact_cos_sin(i, k)
        pts[i, 0] = t * c
        pts[i, 1] = t * s
    return pts


# --- term machinery -------------------------------------------------------

# u(t), u'(t), u''(t) for the polynomial bases that occur
def _base_t(t):
    return t, np.ones_like(t), np.zeros_like(t)


def _base_one_minus_t2(t):
    return 1.0 - t * t, -2.0 * t, np.full_like(t, -2.0)


def _base_const(t):
    return np.ones_like(t), np.zeros_like(t), np.zeros_like(t)


def _base_ring_h(cos_theta):
    # 1 - 2 t^2 cos(theta) + t^4 = 1 - 2 xi_1.xi_j + |xi_1|^2 |xi_j|^2
    def base(t):
        t2 = t * t
        return 1.0 - 2.0 * cos_theta * t2 + t2 * t2, -4.0 * cos_theta * t + 4.0 * t2 * t, -4.0 * cos_theta + 12.0 * t2
    return base


def _eval_terms(terms, t, log_scale):
    """Sum of a * u(t)^(-p) and its first two t-derivatives, divided by exp(log_scale)."""
    val = np.zeros_like(t)
    d1 = np.zeros_like(t)
    d2 = np.zeros_like(t)
    plain = np.all(np.asarray(log_scale) == 0.0)
    with np.errstate(over="ignore", invalid="ignore"):
        for a, base, p in terms:
            u, du, ddu = base(t)
            if plain:
                term = a * u ** (-p)  # pow is accurate to an ulp; exp(log) is not for large p
            else:
                term = np.sign(a) * np.exp(math.log(abs(a)) - p * np.log(u) - log_scale)
            r = du / u
            val = val + term
            d1 = d1 - p * r * term
            d2 = d2 + term * (p * (p + 1.0) * r * r - p * ddu / u)
    return val, d1, d2


def _hself_terms(m):
    return [(1.0, _base_one_minus_t2, m)]


def _pair_green_terms(m, cos_theta, sign=1.0):
    # G(xi_1, xi_j) with |xi_1 - xi_j|^2 = 2 (1 - cos theta) t^2
    a = 2.0 * (1.0 - cos_theta)
    return [(sign * a ** (-0.5 * m), _base_t, m), (-sign, _base_ring_h(cos_theta), 0.5 * m)]


def _tau_terms(m):
    return [(1.0, _base_t, m), (-1.0, _base_const, 0.0)]


def ring_gamma_terms(k: int, m: float):
    """H(xi_1, xi_1) - sum_{j=2..k} G(xi_1, xi_j): the self-coupling of an all-negative k-ring."""
    terms = list(_hself_terms(m))
    for j in range(1, k):
        terms += _pair_green_terms(m, _exact_cos_sin(j, k)[0], sign=-1.0)
    return terms


def _named_terms(name: str, m: float):
    if name == "tau1":
        return _tau_terms(m)
    if name == "gamma1":
        return ring_gamma_terms(3, m)
    if name == "gamma2":
        return ring_gamma_terms(4, m)
    if name == "gamma3":
        return ring_gamma_terms(2, m)  # H(xi_1, xi_1) - G(xi_1, -xi_1)
    if name == "gamma4":
        return _pair_green_terms(m, 0.0)
    if name == "hself":
        return _hself_terms(m)
    raise KeyError(name)


COEFFICIENT_NAMES = ("tau1", "gamma1", "gamma2", "gamma3", "gamma4")


def _check_t(t):
    if np.any(t < T_MIN) or np.any(t > T_MAX):
        raise DomainError(f"t must lie in [{T_MIN}, {T_MAX}]")


def coefficient(name: str, t, dim, log_scale: float = 0.0):
    """(value, d/dt, d2/dt2) of one named coefficient, divided by exp(log_scale)."""
    N = as_dimension(dim).N
    t_arr = np.asarray(t, dtype=float)
    _check_t(t_arr)
    out = _eval_terms(_named_terms(name, N - 2.0), t_arr, log_scale)
    if not all(np.all(np.isfinite(v)) for v in out):
        raise NumericalOverflowError(f"{name}(t) overflows double range at N={N}")
    if t_arr.ndim == 0:
        return tuple(float(v) for v in out)
    return out


def ring_gamma(k: int, t, dim, log_scale: float = 0.0):
    """(value, d/dt, d2/dt2) of the generic k-ring self-coupling; k >= 2."""
    N = as_dimension(dim).N
    if k < 2:
        raise DomainError("ring self-coupling needs k >= 2")
    t_arr = np.asarray(t, dtype=float)
    _check_t(t_arr)
    out = _eval_terms(ring_gamma_terms(k, N - 2.0), t_arr, log_scale)
    if not all(np.all(np.isfinite(v)) for v in out):
        raise NumericalOverflowError(f"ring coupling k={k} overflows at N={N}")
    if t_arr.ndim == 0:
        return tuple(float(v) for v in out)
    return out


@dataclass(frozen=True)
class InteractionCoefficients:
    t: float
    N: int
    tau1: float
    gamma1: float
    gamma2: float
    gamma3: float
    gamma4: float
    dtau1: float
    dgamma1: float
    dgamma2: float
    dgamma3: float
    dgamma4: float
    d2tau1: float
    d2gamma1: float
    d2gamma2: float
    d2gamma3: float
    d2gamma4: float


def interaction_coeffs(t, dim) -> InteractionCoefficients:
    """tau1 = G(xi_1, 0) and gamma1..gamma4 with first and second t-derivatives."""
    N = as_dimension(dim).N
    fields = {"t": t, "N": N}
    for name in COEFFICIENT_NAMES:
        v, d1, d2 = coefficient(name, t, N)
        fields[name] = v
        fields["d" + name] = d1
        fields["d2" + name] = d2
    return InteractionCoefficients(**fields)


def sign_scale(t, dim) -> np.ndarray | float:
    """A log-scale L so that every coefficient divided by exp(L) is at most O(1)."""
    N = as_dimension(dim).N
    t = np.asarray(t, dtype=float)
    worst = np.maximum(-np.log1p(-t * t), -np.log(t))
    # derivative terms carry extra factors up to N^2 / (t (1 - t^2))^2
    return np.maximum(0.0, N * worst + 2.0 * np.log(N) + 2.0 * worst + 2.0)
