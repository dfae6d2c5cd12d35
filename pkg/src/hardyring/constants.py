"""Dimension-dependent exponents, bubble amplitudes and the integral constants b1, b2.

All bubble integrals reduce to one-dimensional radial integrals

    int_0^inf r^(N-1) (1 + r^2)^(-p) dr

which are evaluated by adaptive quadrature on [0, 1] after r = s / (1 - s).
Large powers of C0 are carried in log space so that the constants stay
finite as long as the final values fit in a double.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import DomainError, NumericalOverflowError, QuadratureError

QUAD_TOL = 1e-12
QUAD_MAX_EVALS = 1_000_000
_LOG_DBL_MAX = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class Dimension:
    """Space dimension N together with its derived exponents."""

    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 3:
            raise DomainError(f"dimension must be an integer >= 3, got {self.N!r}")

    @property
    def two_star(self) -> float:
        return 2.0 * self.N / (self.N - 2)

    @property
    def mu_bar(self) -> float:
        return (self.N - 2) ** 2 / 4.0

    @property
    def half_exponent(self) -> float:
        """(N - 2) / 2, the exponent mapping lambda to the s-variables."""
        return (self.N - 2) / 2.0


def as_dimension(dim) -> Dimension:
    return dim if isinstance(dim, Dimension) else Dimension(int(dim))


def require_claim_dimension(dim) -> Dimension:
    dim = as_dimension(dim)
    if dim.N < 7:
        raise DomainError(f"claim verification needs N >= 7, got N={dim.N}")
    return dim


@dataclass(frozen=True)
class HardyParams:
    """Hardy coefficient mu = mu0 * eps**alpha."""

    mu0: float
    alpha: float
    eps: float

    @property
    def mu(self) -> float:
        return self.mu0 * self.eps ** self.alpha

    def check(self, dim) -> "HardyParams":
        dim = as_dimension(dim)
        if self.mu0 <= 0:
            raise DomainError("mu0 must be positive")
        if self.eps <= 0:
            raise DomainError("eps must be positive")
        if self.alpha <= (dim.N - 4) / (dim.N - 2):
            raise DomainError(f"alpha must exceed (N-4)/(N-2) = {(dim.N - 4) / (dim.N - 2):.6g}")
        if self.mu >= dim.mu_bar:
            raise DomainError(f"mu_eps = {self.mu:.6g} must be below mu_bar = {dim.mu_bar:.6g}")
        return self


@dataclass(frozen=True)
class BubbleConstants:
    N: int
    mu: float
    c0: float
    c_mu: float
    beta1: float
    beta2: float
    s0: float
    b1: float
    b2: float

    @property
    def half_ratio(self) -> float:
        """b2 / (2 b1), the right-hand side of every stationarity equation."""
        return self.b2 / (2.0 * self.b1)


def critical_exponent(dim) -> float:
    dim = as_dimension(dim)
    return dim.two_star


def _check_mu(dim: Dimension, mu: float):
    if not (0.0 <= mu < dim.mu_bar):
        raise DomainError(f"mu must lie in [0, {dim.mu_bar}), got {mu}")


def hardy_exponents(dim, mu: float) -> tuple[float, float]:
    """(beta1, beta2) of the Hardy bubble; beta1 + beta2 = 2."""
    dim = as_dimension(dim)
    _check_mu(dim, mu)
    root_bar = math.sqrt(dim.mu_bar)
    root_gap = math.sqrt(dim.mu_bar - mu)
    # beta1 written as mu / (sqrt(mu_bar) (sqrt(mu_bar) + sqrt(mu_bar - mu))) to avoid cancellation
    beta1 = mu / (root_bar * (root_bar + root_gap))
    return beta1, 2.0 - beta1


def bubble_amplitudes(dim, mu: float = 0.0) -> tuple[float, float]:
    dim = as_dimension(dim)
    _check_mu(dim, mu)
    N = dim.N
    c0 = float(N * (N - 2)) ** ((N - 2) / 4.0)
    c_mu = (4.0 * N * (dim.mu_bar - mu) / (N - 2)) ** ((N - 2) / 4.0)
    return c0, c_mu


def sphere_area(dim) -> float:
    """Surface area of the unit sphere S^(N-1)."""
    N = as_dimension(dim).N
    return math.exp(_log_sphere_area(N))


def _log_sphere_area(N: int) -> float:
    return math.log(2.0) + 0.5 * N * math.log(math.pi) - math.lgamma(0.5 * N)


def radial_moment(N: int, p: float) -> float:
    """int_0^inf r^(N-1) (1 + r^2)^(-p) dr by adaptive quadrature (needs 2p > N)."""

    def integrand(s):
        if s <= 0.0 or s >= 1.0:
            return 0.0
        # r = s/(1-s), dr = ds/(1-s)^2, 1 + r^2 = ((1-s)^2 + s^2)/(1-s)^2
        q = (1.0 - s) ** 2 + s * s
        log_val = (N - 1) * math.log(s) + (2.0 * p - N - 1) * math.log1p(-s) - p * math.log(q)
        return math.exp(log_val)

    # Unit-scale the integrand so the absolute tolerance is meaningful for every N.
    peak = max(integrand(x) for x in np.linspace(0.0, 1.0, 257)[1:-1])
    value, abserr, info = integrate.quad(
        lambda s: integrand(s) / peak,
        0.0,
        1.0,
        epsabs=QUAD_TOL,
        epsrel=QUAD_TOL,
        limit=QUAD_MAX_EVALS // 21,
        full_output=True,
    )[:3]
    if info["neval"] > QUAD_MAX_EVALS or abserr > 1e-10 * abs(value):
        raise QuadratureError(
            f"radial quadrature N={N}, p={p} reached only {abserr / abs(value):.3g} relative error",
            achieved=abserr / abs(value),
        )
    return value * peak


def radial_moment_beta(N: int, p: float) -> float:
    """Closed form of radial_moment: B(N/2, p - N/2) / 2."""
    return 0.5 * special.beta(0.5 * N, p - 0.5 * N)


def _log_bubble_prefactor(N: int) -> float:
    # log(C0^(2*) * |S^(N-1)|)
    two_star = 2.0 * N / (N - 2)
    log_c0 = (N - 2) / 4.0 * math.log(N * (N - 2))
    return two_star * log_c0 + _log_sphere_area(N)


def _exp_checked(x: float, what: str) -> float:
    if x > _LOG_DBL_MAX:
        raise NumericalOverflowError(f"{what} exceeds double range (log value {x:.1f})")
    return math.exp(x)


@functools.lru_cache(maxsize=None)
def _bubble_integrals(N: int) -> tuple[float, float, float]:
    two_star = 2.0 * N / (N - 2)
    log_pref = _log_bubble_prefactor(N)
    i1 = radial_moment(N, 0.5 * (N + 2))
    i2 = radial_moment(N, float(N))
    log_b1 = math.log(0.5) + log_pref + math.log(i1)
    log_u2 = log_pref + math.log(i2)  # log int U^(2*)
    b1 = _exp_checked(log_b1, f"b1(N={N})")
    b2 = _exp_checked(log_u2 - math.log(two_star), f"b2(N={N})")
    s0 = math.exp(2.0 * log_u2 / N)
    return b1, b2, s0


def bubble_integrals(dim) -> tuple[float, float]:
    """(b1, b2) = (C0/2 int U^(2*-1), int U^(2*) / 2*) for U = U_{1,0}."""
    dim = as_dimension(dim)
    if dim.N < 5:
        raise DomainError("bubble integrals are set up for N >= 5")
    b1, b2, _ = _bubble_integrals(dim.N)
    return b1, b2


def bubble_integrals_closed_form(dim) -> tuple[float, float]:
    """Beta-function evaluation of (b1, b2); independent of the quadrature path."""
    N = as_dimension(dim).N
    two_star = 2.0 * N / (N - 2)
    log_pref = _log_bubble_prefactor(N)
    b1 = 0.5 * math.exp(log_pref) * radial_moment_beta(N, 0.5 * (N + 2))
    b2 = math.exp(log_pref) * radial_moment_beta(N, float(N)) / two_star
    return b1, b2


def sobolev_constant(dim) -> float:
    """S0 such that int U_{1,0}^(2*) = S0^(N/2)."""
    dim = as_dimension(dim)
    return _bubble_integrals(dim.N)[2]


@functools.lru_cache(maxsize=None)
def _half_ratio(N: int) -> float:
    two_star = 2.0 * N / (N - 2)
    return radial_moment(N, float(N)) / (two_star * radial_moment(N, 0.5 * (N + 2)))


def half_ratio(dim) -> float:
    """b2 / (2 b1); stays finite even where b1 and b2 themselves overflow."""
    return _half_ratio(as_dimension(dim).N)


def bubble_constants(dim, mu: float = 0.0) -> BubbleConstants:
    dim = as_dimension(dim)
    c0, c_mu = bubble_amplitudes(dim, mu)
    beta1, beta2 = hardy_exponents(dim, mu)
    b1, b2 = bubble_integrals(dim)
    return BubbleConstants(
        N=dim.N, mu=mu, c0=c0, c_mu=c_mu, beta1=beta1, beta2=beta2,
        s0=sobolev_constant(dim), b1=b1, b2=b2,
    )
