"""Empirical-vs-limit discrepancies and numerical identity checks."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .polyroots import PolySum, RootPoly, log_mahler
from .potential import Grid, GridMeasure, LimitSpec, empirical_potential, potential_values
from .solver import RootReport

__all__ = [
    "EmpiricalMeasure",
    "BumpFunction",
    "PotentialDiscrepancy",
    "ball_discrepancy",
    "potential_discrepancy",
    "hkyv_residual",
    "poisson_jensen_residual",
    "mahler_envelope_gap",
    "NearCircleRootError",
]


class NearCircleRootError(ValueError):
    """A root lies too close to the integration circle."""


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    points: np.ndarray

    def __post_init__(self):
        pts = np.atleast_1d(np.asarray(self.points, dtype=complex))
        if pts.size < 1:
            raise ValueError("empirical measure needs at least one point")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.size

    def fraction_in_ball(self, center: complex, radius: float) -> float:
        return float(np.mean(np.abs(self.points - center) < radius))


@dataclass(frozen=True)
class BumpFunction:
    """``exp(-1/(1 - |(z - center)/radius|^2))`` inside the disk, 0 outside."""

    center: complex = 0j
    radius: float = 1.0

    def _u(self, z):
        return np.abs(np.asarray(z, dtype=complex) - self.center) ** 2 / self.radius ** 2

    def __call__(self, z):
        u = self._u(z)
        inside = u < 1
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(inside, np.exp(-1.0 / np.where(inside, 1 - u, 1.0)), 0.0)

    def laplacian(self, z):
        """Exact Laplacian.  With ``u = |z-c|^2/R^2`` and ``phi = h(u)``,
        ``Lap phi = (4/R^2) (u h'' + h')``."""
        u = self._u(z)
        inside = u < 1
        v = np.where(inside, 1 - u, 1.0)
        phi = np.where(inside, np.exp(-1.0 / v), 0.0)
        h1 = -phi / v ** 2
        h2 = phi / v ** 4 - 2 * phi / v ** 3
        return np.where(inside, 4.0 / self.radius ** 2 * (u * h2 + h1), 0.0)


class PotentialDiscrepancy(NamedTuple):
    value: float
    used: int
    discarded: int


def ball_discrepancy(emp: EmpiricalMeasure, rho: GridMeasure,
                     balls: Sequence[tuple[complex, float]]) -> float:
    """Max over balls of |empirical fraction - grid mass| in the ball."""
    nodes = rho.grid.nodes()
    worst = 0.0
    for c, r in balls:
        a = emp.fraction_in_ball(c, r)
        b = rho.mass_where(np.abs(nodes - c) < r)
        worst = max(worst, abs(a - b))
    return worst


def potential_discrepancy(emp: EmpiricalMeasure, spec: LimitSpec, probes,
                          exclusion: float = 0.05) -> PotentialDiscrepancy:
    """Mean |empirical potential - U| over probes farther than ``exclusion``
    from every empirical point; closer probes are discarded and counted."""
    probes = np.atleast_1d(np.asarray(probes, dtype=complex))
    near = np.array([np.min(np.abs(emp.points - z)) <= exclusion for z in probes], dtype=bool)
    keep = probes[~near]
    if keep.size == 0:
        return PotentialDiscrepancy(math.nan, 0, int(near.sum()))
    diff = np.abs(empirical_potential(emp.points, keep) - potential_values(spec, keep))
    return PotentialDiscrepancy(float(diff.mean()), int(keep.size), int(near.sum()))


def hkyv_residual(s: PolySum, report: RootReport, bump: BumpFunction, grid: Grid) -> float:
    """``|sum_i phi(z_i) - (1/2pi) sum_cells Lap(phi) log|f| h^2|``."""
    lhs = float(np.sum(bump(report.roots)))
    nodes = grid.nodes()
    lap = bump.laplacian(nodes)
    support = lap != 0
    logf = np.zeros(nodes.shape)
    logf[support] = s.log_abs(nodes[support])
    rhs = float(np.sum(lap * logf) * grid.spacing ** 2 / (2 * math.pi))
    return abs(lhs - rhs)


def poisson_jensen_residual(s: PolySum, report: RootReport, z: complex, R: float,
                            n_theta: int) -> float:
    """Residual of the Poisson-Jensen formula for ``log|f(z)|`` on ``|w| < R``."""
    z = complex(z)
    if not abs(z) < R:
        raise ValueError("probe must lie inside the disk")
    roots = np.asarray(report.roots)
    if np.any(np.abs(np.abs(roots) - R) <= 1e-6 * R):
        raise NearCircleRootError(f"a root lies within 1e-6 R of |w| = {R}")
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    boundary = s.log_abs(R * np.exp(1j * theta))
    t, arg = abs(z), (math.atan2(z.imag, z.real) if z != 0 else 0.0)
    kernel = (R * R - t * t) / (R * R + t * t - 2 * R * t * np.cos(theta - arg))
    integral = float(np.mean(boundary * kernel))
    inner = roots[np.abs(roots) < R]
    blaschke = float(np.sum(np.log(np.abs(R * (z - inner) / (R * R - np.conj(inner) * z)))))
    lhs = float(s.log_abs(np.array([z]))[0])
    return abs(lhs - integral - blaschke)


def mahler_envelope_gap(p: RootPoly, x: complex, r: float, n_theta: int) -> float:
    """``(1/deg) max_{|z|=r} | log|p(x+z)| - log M(p) |``."""
    pts = x + r * np.exp(2j * np.pi * np.arange(n_theta) / n_theta)
    with np.errstate(divide="ignore"):
        vals = p.log_abs(pts)
    return float(np.max(np.abs(vals - log_mahler(p))) / p.degree)
