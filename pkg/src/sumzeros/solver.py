"""Zeros of a sum of root-represented polynomials.

``find_roots`` runs a Jacobi-style Aberth-Ehrlich iteration directly on the
factored representation; ``count_roots_argument`` is an independent count of
zeros inside a disk from the argument principle.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .extnum import ExtArray
from .polyroots import PolySum, RootPoly

__all__ = [
    "SolveOptions",
    "RootReport",
    "RootCount",
    "find_roots",
    "count_roots_argument",
    "rouche_dominance",
    "BACKWARD_ERROR_BOUND",
]

# Acceptance bound on |f(z*)| relative to max_k |p_k(z*)|.
BACKWARD_ERROR_BOUND = 1e-8
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SolveOptions:
    max_iterations: int = 500
    stop_tolerance: float = 1e-12
    restart_attempts: int = 3

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if not 0 < self.stop_tolerance <= 1e-3:
            raise ValueError("stop_tolerance must lie in (0, 1e-3]")
        if self.restart_attempts < 0:
            raise ValueError("restart_attempts must be nonnegative")


@dataclass
class RootReport:
    roots_ext: ExtArray
    # log(|f(z)| / max_k |p_k(z)|) per root
    residuals: np.ndarray
    converged: bool
    iterations: int = 0
    restarts: int = 0
    diagnostics: dict = field(default_factory=dict)

    @property
    def roots(self) -> np.ndarray:
        """Complex view of the roots (inf beyond double range)."""
        return self.roots_ext.to_complex()

    def diagnostics_json(self) -> str:
        block = {"iterations": self.iterations, "converged": self.converged,
                 "restarts": self.restarts, **self.diagnostics}
        return json.dumps(block, sort_keys=True)

    def backward_errors(self) -> np.ndarray:
        return np.exp(self.residuals)


def _initial_guesses(s: PolySum, rng: np.random.Generator) -> ExtArray:
    n = s.degree
    order = sorted(range(len(s.terms)), key=lambda k: -s.terms[k].degree)
    pool = ExtArray.concatenate([s.terms[k].ext for k in order])[:n]
    # relative jitter 1e-3 * (1 + |r|), applied in log-polar form
    la = np.logaddexp(0.0, pool.log_abs())
    jitter = ExtArray.from_polar(la + np.log(1e-3 * rng.random(pool.size)),
                                 2 * np.pi * rng.random(pool.size))
    guesses = pool + jitter
    if guesses.size < n:
        all_roots = ExtArray.concatenate([t.ext for t in s.terms])
        log_r = float(np.logaddexp(0.0, np.max(all_roots.log_abs()))) if all_roots.size else 0.0
        k = n - guesses.size
        angles = 2 * np.pi * (np.arange(k) + rng.random()) / k
        guesses = ExtArray.concatenate([guesses, ExtArray.from_polar(np.full(k, log_r), angles)])
    return guesses


def _nudge(z: ExtArray, mask: np.ndarray) -> ExtArray:
    m = np.where(mask, z.mant * (1 + 8 * _EPS * (1 + 1j)) + np.where(z.mant == 0, 4 * _EPS, 0), z.mant)
    return ExtArray(m, z.exp)


def _avoid_term_roots(s: PolySum, z: ExtArray) -> ExtArray:
    for t in s.terms:
        if t.degree == 0:
            continue
        hit = ((z.mant[:, None] == t.ext.mant[None, :]) &
               (z.exp[:, None] == t.ext.exp[None, :])).any(axis=1)
        if hit.any():
            z = _nudge(z, hit)
    return z


def _pair_sums(za: ExtArray, z: ExtArray, active: np.ndarray) -> ExtArray:
    """``sum_{l != j} 1/(z_j - z_l)`` for the active approximations."""
    rows = np.arange(active.size)
    if np.all(z.in_double_range()):
        zc = z.to_complex()
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / (za.to_complex()[:, None] - zc[None, :])
        inv[rows, active] = 0.0
        return ExtArray(inv.sum(axis=1))
    diff = ExtArray(za.mant[:, None], za.exp[:, None], normalized=True) - \
        ExtArray(z.mant[None, :], z.exp[None, :], normalized=True)
    inv = diff.reciprocal()
    inv.mant[rows, active] = 0.0
    inv.exp[rows, active] = 0
    return inv.sum(axis=1)


def _aberth(s: PolySum, z: ExtArray, opts: SolveOptions):
    n = z.size
    done = np.zeros(n, dtype=bool)
    log_noise = math.log(4.0 * (s.degree + 1) * _EPS)
    log_tol = math.log(opts.stop_tolerance)
    it = 0
    for it in range(1, opts.max_iterations + 1):
        active = np.flatnonzero(~done)
        if active.size == 0:
            it -= 1
            break
        za = _avoid_term_roots(s, z[active])
        f, df, log_mag = s.newton_parts(za)
        at_floor = f.log_abs() <= log_noise + log_mag
        w = f / df
        sigma = _pair_sums(za, z, active)
        step = w / (1.0 - w * sigma)
        w_ok = np.isfinite(w.mant)
        bad = ~np.isfinite(step.mant)
        step.mant[bad & w_ok] = w.mant[bad & w_ok]
        step.exp[bad & w_ok] = w.exp[bad & w_ok]
        bad = ~np.isfinite(step.mant)
        lz = np.logaddexp(0.0, za.log_abs())
        if bad.any():
            # f' vanished: nudge by a small amount relative to the point.
            kick = ExtArray.from_polar(lz + math.log(1e-6), np.full(active.size, 0.7 * it))
            step.mant[bad], step.exp[bad] = kick.mant[bad], kick.exp[bad]
        # A tiny Aberth step alone can come from two approximations crowding
        # one zero; the Newton correction must be small too.
        with np.errstate(divide="ignore"):
            small = (step.log_abs() <= log_tol + lz) & (w.log_abs() <= log_tol + lz)
        moved = za - step
        keep = at_floor
        moved.mant[keep], moved.exp[keep] = za.mant[keep], za.exp[keep]
        z[active] = moved
        done[active] = small | at_floor
    return z, bool(done.all()), it


def _residuals(s: PolySum, z) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        logf = s.log_abs(z)
        return np.where(np.isneginf(logf), -np.inf, logf - s.term_scale(z))


def find_roots(s: PolySum, opts: SolveOptions | None = None,
               rng: np.random.Generator | None = None) -> RootReport:
    """All ``degree`` zeros of the sum via simultaneous Aberth-Ehrlich iteration."""
    opts = opts or SolveOptions()
    rng = rng if rng is not None else np.random.default_rng(0)
    n = s.degree
    if n < 1:
        raise ValueError("sum degree must be at least 1")
    total_iter = 0
    restarts = 0
    while True:
        z0 = _initial_guesses(s, rng)
        z, ok, iters = _aberth(s, z0.copy(), opts)
        total_iter += iters
        res = _residuals(s, z)
        if ok:
            break
        if restarts >= opts.restart_attempts:
            ok = False
            break
        restarts += 1
    return RootReport(
        roots_ext=z,
        residuals=res,
        converged=ok,
        iterations=total_iter,
        restarts=restarts,
        diagnostics={"degree": n, "max_log_residual": float(np.max(res)),
                     "backward_error_ok": bool(np.all(res <= math.log(BACKWARD_ERROR_BOUND)))},
    )


@dataclass(frozen=True)
class RootCount:
    count: int
    # distance of the quadrature value from the nearest integer
    distance: float
    reliable: bool
    # min over contour points of log(|f| / max_k |p_k|)
    min_log_residual: float
    raw: complex = 0j

    def to_dict(self) -> dict:
        d = asdict(self)
        d["raw"] = [self.raw.real, self.raw.imag]
        return d


# Cap on contour points when refining an argument-principle count.
MAX_CONTOUR_POINTS = 1 << 18


def _contour_sums(s: PolySum, center: complex, radius: float, n_q: int):
    theta = 2 * np.pi * np.arange(2 * n_q) / (2 * n_q)
    offsets = radius * np.exp(1j * theta)
    f, df, log_mag = s.newton_parts(center + offsets)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        integrand = (df / f * offsets).to_complex()
        rel = f.log_abs() - log_mag
    return integrand[::2].mean(), integrand.mean(), integrand, rel


def count_roots_argument(s: PolySum, center: complex, radius: float,
                         quadrature_points: int | None = None,
                         max_points: int = MAX_CONTOUR_POINTS) -> RootCount:
    """Number of zeros of the sum inside ``|z - center| < radius``.

    Trapezoidal rule for ``(1/2 pi i) \\oint f'/f dz`` with ``N`` points, cross-checked
    against the same rule with ``2N`` points.  While the two disagree or either
    is more than 0.1 from an integer, ``N`` is quadrupled (zeros close to the
    contour need ``N`` of order radius / distance), up to ``max_points``.  The
    count is flagged unreliable if that never settles, or if ``|f|`` nearly
    vanishes on the contour.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    n_q = quadrature_points or max(256, 16 * s.degree)
    while True:
        coarse, fine, integrand, rel = _contour_sums(s, center, radius, n_q)
        if not (np.all(np.isfinite(integrand)) and math.isfinite(coarse.real)):
            return RootCount(count=-1, distance=math.inf, reliable=False,
                             min_log_residual=-math.inf, raw=complex(coarse))
        count = int(round(coarse.real))
        dist = max(abs(coarse.real - count), abs(fine.real - count))
        settled = dist <= 0.1 and int(round(fine.real)) == count
        if settled or 8 * n_q > max_points:
            break
        n_q *= 4
    min_rel = float(np.min(rel))
    reliable = settled and min_rel > math.log(BACKWARD_ERROR_BOUND)
    return RootCount(count=count, distance=float(dist), reliable=bool(reliable),
                     min_log_residual=min_rel, raw=complex(coarse))


def rouche_dominance(p: RootPoly, q: RootPoly, center: complex, radius: float,
                     n_theta: int) -> bool:
    """True iff ``log|p| > log|q|`` at ``n_theta`` equispaced points of the circle."""
    pts = center + radius * np.exp(2j * np.pi * np.arange(n_theta) / n_theta)
    with np.errstate(divide="ignore"):
        return bool(np.all(p.log_abs(pts) > q.log_abs(pts)))
