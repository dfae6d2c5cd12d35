"""Leading-order multi-bubble fields on 2-D slices of the unit ball, with CSV/JSON export.

The field is

    u(x) = V_{mu_eps, sigma}(x) + sum_i s_i U_{delta_i, R_k^i xi(t)}(x)

with sigma = lambda_0 eps^(1/(N-2)), delta_i = lambda_i eps^(1/(N-2)) and
s_i = -1 (pattern "negative") or (-1)^i (pattern "alternating", k = 4, with
delta_1 = delta_3 from lambda_1 and delta_2 = delta_4 from lambda_2).  The
small correction term is not computed; exports carry leading_order = true.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .constants import HardyParams, as_dimension, bubble_amplitudes, hardy_exponents
from .energy import LambdaState
from .errors import DomainError
from .green import rotate_plane

V_CAP = 1e12
PLANES = {"e1e2": (0, 1), "e1e3": (0, 2)}
PATTERNS = ("negative", "alternating")
FORMAT_VERSION = "1.0"


def _sq_norm(x):
    x = np.asarray(x, dtype=float)
    return np.sum(x * x, axis=-1)


def bubble_U(delta: float, xi, x, dim):
    """C0 (delta / (delta^2 + |x - xi|^2))^((N-2)/2)."""
    N = as_dimension(dim).N
    if not delta > 0:
        raise DomainError("delta must be positive")
    c0, _ = bubble_amplitudes(N)
    d2 = _sq_norm(np.asarray(x, dtype=float) - np.asarray(xi, dtype=float))
    return c0 * (delta / (delta * delta + d2)) ** (0.5 * (N - 2))


def bubble_V(mu: float, sigma: float, x, dim, with_mask: bool = False):
    """C_mu (sigma / (sigma^2 |x|^beta1 + |x|^beta2))^((N-2)/2), capped at V_CAP.

    For mu > 0 the origin is singular; values above V_CAP (including the
    origin itself) are replaced by V_CAP and flagged in the mask.
    """
    N = as_dimension(dim).N
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    _, c_mu = bubble_amplitudes(N, mu)
    b1, b2 = hardy_exponents(N, mu)
    r2 = _sq_norm(x)
    with np.errstate(divide="ignore"):
        den = sigma * sigma * r2 ** (0.5 * b1) + r2 ** (0.5 * b2)
        val = c_mu * (sigma / den) ** (0.5 * (N - 2))
    capped = ~(val <= V_CAP)
    val = np.where(capped, V_CAP, val)
    if np.ndim(val) == 0:
        val, capped = float(val), bool(capped)
    return (val, capped) if with_mask else val


@dataclass(frozen=True)
class ProfileSpec:
    dim: int
    hardy: HardyParams
    k: int
    pattern: str
    lam: LambdaState
    t: float
    plane: str = "e1e2"
    res: int = 101
    extent: float = 1.0

    def __post_init__(self):
        N = as_dimension(self.dim).N
        self.hardy.check(N)
        if self.pattern not in PATTERNS:
            raise DomainError(f"pattern must be one of {PATTERNS}")
        if self.k < 1:
            raise DomainError("ring size k must be >= 1")
        if self.pattern == "alternating":
            if self.k != 4 or self.lam.lambda2 is None:
                raise DomainError("the alternating pattern needs k = 4 and three lambda values")
        elif self.lam.lambda2 is not None:
            raise DomainError("the negative pattern takes two lambda values")
        if not 0.0 < self.t < 1.0:
            raise DomainError("ring radius t must lie in (0, 1)")
        if self.plane not in PLANES:
            raise DomainError(f"plane must be one of {tuple(PLANES)}")
        if self.res < 2:
            raise DomainError("resolution must be at least 2")
        if not 0.0 < self.extent <= 1.0:
            raise DomainError("grid extent must lie in (0, 1]; the lattice may not leave the ball")

    @classmethod
    def from_critical_point(cls, record, hardy: HardyParams, **kw) -> "ProfileSpec":
        pattern = "alternating" if record.k == 5 else "negative"
        k = 4 if record.k == 5 else record.k
        return cls(dim=record.N, hardy=hardy, k=k, pattern=pattern,
                   lam=LambdaState.from_array(record.lam), t=record.t, **kw)

    @property
    def N(self) -> int:
        return as_dimension(self.dim).N

    @property
    def scale(self) -> float:
        return self.hardy.eps ** (1.0 / (self.N - 2))

    @property
    def sigma(self) -> float:
        return self.lam.lambda0 * self.scale

    def ring(self):
        """(centers, deltas, signs) of the ring bubbles, centers at R_k^i xi(t), i = 1..k."""
        N = self.N
        xi = np.zeros(N)
        xi[0] = self.t
        centers = np.array([rotate_plane(xi, self.k, i) for i in range(1, self.k + 1)])
        if self.pattern == "negative":
            deltas = np.full(self.k, self.lam.lambda1 * self.scale)
            signs = -np.ones(self.k)
        else:
            per = (self.lam.lambda1, self.lam.lambda2)
            deltas = np.array([per[(i - 1) % 2] for i in range(1, 5)]) * self.scale
            signs = np.array([(-1.0) ** i for i in range(1, 5)])
        return centers, deltas, signs

    def to_dict(self) -> dict:
        return {
            "N": self.N, "mu0": self.hardy.mu0, "alpha": self.hardy.alpha, "eps": self.hardy.eps,
            "mu_eps": self.hardy.mu, "k": self.k, "pattern": self.pattern,
            "lambda": self.lam.as_array().tolist(), "t": self.t, "plane": self.plane,
            "res": self.res, "extent": self.extent, "sigma": self.sigma,
            "deltas": self.ring()[1].tolist(),
        }


@dataclass
class FieldGrid:
    plane: str
    basis: np.ndarray  # (2, N): the two unit vectors spanning the slice
    coords: np.ndarray  # (M, 2) lattice coordinates inside the closed unit disk
    values: np.ndarray  # (M,)
    capped: np.ndarray  # (M,) bool
    spec: ProfileSpec

    def points(self) -> np.ndarray:
        return self.coords @ self.basis


def evaluate_field(spec: ProfileSpec, x, with_mask: bool = False, ring_only: bool = False):
    """u at points x of shape (..., N); ``ring_only`` drops the V term."""
    x = np.asarray(x, dtype=float)
    if np.any(_sq_norm(x) > 1.0 + 1e-15):
        raise DomainError("field evaluation points must lie in the closed unit ball")
    if ring_only:
        u, capped = np.zeros(x.shape[:-1]), np.zeros(x.shape[:-1], dtype=bool)
    else:
        v, capped = bubble_V(spec.hardy.mu, spec.sigma, x, spec.N, with_mask=True)
        u = np.array(v, dtype=float)
    for c, d, s in zip(*spec.ring()):
        u = u + s * bubble_U(d, c, x, spec.N)
    return (u, capped) if with_mask else u


def _lattice(spec: ProfileSpec):
    ax = np.linspace(-spec.extent, spec.extent, spec.res)
    g1, g2 = np.meshgrid(ax, ax, indexing="xy")
    coords = np.column_stack([g1.ravel(), g2.ravel()])
    return coords[np.sum(coords * coords, axis=1) <= 1.0]


def _basis(spec: ProfileSpec) -> np.ndarray:
    basis = np.zeros((2, spec.N))
    i, j = PLANES[spec.plane]
    basis[0, i] = basis[1, j] = 1.0
    return basis


def assemble_field(spec: ProfileSpec) -> FieldGrid:
    coords = _lattice(spec)
    basis = _basis(spec)
    u, capped = evaluate_field(spec, coords @ basis, with_mask=True)
    return FieldGrid(spec.plane, basis, coords, np.asarray(u), np.asarray(capped, dtype=bool), spec)


def symmetry_residual(spec: ProfileSpec, anti: bool = False, power: int = 1,
                      ring_only: bool = False) -> float:
    """max |u(R_k^power x) -+ u(x)| / max |u| over the grid nodes, capped nodes excluded."""
    x = _lattice(spec) @ _basis(spec)
    u, capped = evaluate_field(spec, x, with_mask=True, ring_only=ring_only)
    rotated, capped_r = evaluate_field(spec, rotate_plane(x, spec.k, power), with_mask=True,
                                       ring_only=ring_only)
    keep = ~(np.asarray(capped, dtype=bool) | np.asarray(capped_r, dtype=bool))
    diff = rotated + u if anti else rotated - u
    return float(np.max(np.abs(diff[keep])) / np.max(np.abs(u[keep])))


def write_csv(grid: FieldGrid, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x1", "x2", "u", "capped"])
        for (a, b), u, c in zip(grid.coords, grid.values, grid.capped):
            w.writerow([repr(float(a)), repr(float(b)), repr(float(u)), int(c)])


def grid_to_dict(grid: FieldGrid) -> dict:
    return {
        "metadata": {"spec": grid.spec.to_dict(), "leading_order": True, "version": FORMAT_VERSION},
        "x1": grid.coords[:, 0].tolist(),
        "x2": grid.coords[:, 1].tolist(),
        "u": grid.values.tolist(),
        "capped": grid.capped.astype(int).tolist(),
    }


def write_json(grid: FieldGrid, path) -> None:
    with open(path, "w") as fh:
        json.dump(grid_to_dict(grid), fh)


def export_field(grid: FieldGrid, path) -> None:
    path = str(path)
    if path.endswith(".csv"):
        write_csv(grid, path)
    elif path.endswith(".json"):
        write_json(grid, path)
    else:
        raise DomainError("output file must end in .csv or .json")


__all__ = [
    "V_CAP", "PLANES", "PATTERNS", "bubble_U", "bubble_V", "ProfileSpec", "FieldGrid",
    "evaluate_field", "assemble_field", "symmetry_residual", "export_field", "grid_to_dict",
]
