"""Planar probability measures used as root distributions.

Every measure can be sampled; the compactly supported "classical" ones
(uniform disk, uniform circle, point mass and mixtures of them) also have a
closed-form logarithmic potential ``U(z) = E log|z - W|``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from .extnum import ExtArray

__all__ = [
    "Measure",
    "UniformDisk",
    "UniformCircle",
    "ComplexGaussian",
    "PointMass",
    "LogParetoRadial",
    "SingularRadial",
    "Mixture",
    "MCEstimate",
    "MeasureError",
    "sample",
    "log_potential_closed",
    "log_potential_mc",
    "has_log_moment",
    "measure_from_dict",
    "measure_to_dict",
    "substream",
]

# Largest radius drawn for log-pareto-radial; keeps |root| inside double range
# with room for the arithmetic done on roots (see LogParetoRadial).
LOG_RADIUS_CAP = 1e15


class MeasureError(ValueError):
    pass


class MCEstimate(NamedTuple):
    mean: float
    stderr: float


def substream(seed: int, *index: int) -> np.random.Generator:
    """Independent random stream derived from a master seed and a task index."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, index)]))


def _uniform_angle(rng: np.random.Generator, count: int) -> np.ndarray:
    return np.exp(2j * np.pi * rng.random(count))


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not value > 0 or not math.isfinite(value):
        raise MeasureError(f"{name} must be strictly positive, got {value!r}")
    return value


class Measure:
    """Base class; concrete measures are frozen dataclasses below."""

    kind: str = ""

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        raise NotImplementedError

    def sample_ext(self, rng: np.random.Generator, count: int) -> ExtArray:
        """Like :meth:`sample`, in extended range (exact for huge radii)."""
        return ExtArray(self.sample(rng, count))

    def potential(self, z):
        """Closed-form logarithmic potential, or None if unavailable."""
        return None

    @property
    def has_log_moment(self) -> bool:
        return True

    @property
    def atoms(self) -> tuple[tuple[complex, float], ...]:
        """Listed atoms as (location, weight)."""
        return ()

    @property
    def rotation_invariant(self) -> bool:
        return False

    @property
    def support_radius(self) -> float:
        """Radius of a disk around ``center`` containing the support (inf if unbounded)."""
        return math.inf

    @property
    def center(self) -> complex:
        return 0j


@dataclass(frozen=True)
class UniformDisk(Measure):
    center: complex = 0j
    radius: float = 1.0
    kind = "uniform-disk"

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", _positive("radius", self.radius))

    def sample(self, rng, count):
        r = self.radius * np.sqrt(rng.random(count))
        return self.center + r * _uniform_angle(rng, count)

    def potential(self, z):
        s = np.abs(np.asarray(z, dtype=complex) - self.center)
        inside = math.log(self.radius) + 0.5 * ((s / self.radius) ** 2 - 1.0)
        with np.errstate(divide="ignore"):
            outside = np.log(np.maximum(s, self.radius))
        return np.where(s <= self.radius, inside, outside)

    @property
    def rotation_invariant(self):
        return self.center == 0

    @property
    def support_radius(self):
        return self.radius


@dataclass(frozen=True)
class UniformCircle(Measure):
    center: complex = 0j
    radius: float = 1.0
    kind = "uniform-circle"

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", _positive("radius", self.radius))

    def sample(self, rng, count):
        return self.center + self.radius * _uniform_angle(rng, count)

    def potential(self, z):
        s = np.abs(np.asarray(z, dtype=complex) - self.center)
        return np.log(np.maximum(s, self.radius))

    @property
    def rotation_invariant(self):
        return self.center == 0

    @property
    def support_radius(self):
        return self.radius


@dataclass(frozen=True)
class ComplexGaussian(Measure):
    """``mean + scale * N`` with N standard complex Gaussian (E|N|^2 = 1)."""

    mean: complex = 0j
    scale: float = 1.0
    kind = "complex-gaussian"

    def __post_init__(self):
        object.__setattr__(self, "mean", complex(self.mean))
        object.__setattr__(self, "scale", _positive("scale", self.scale))

    def sample(self, rng, count):
        g = rng.standard_normal((count, 2)) * math.sqrt(0.5)
        return self.mean + self.scale * (g[:, 0] + 1j * g[:, 1])

    @property
    def center(self):
        return self.mean

    @property
    def rotation_invariant(self):
        return self.mean == 0


@dataclass(frozen=True)
class PointMass(Measure):
    atom: complex = 0j
    kind = "point-mass"

    def __post_init__(self):
        object.__setattr__(self, "atom", complex(self.atom))

    def sample(self, rng, count):
        return np.full(count, self.atom, dtype=complex)

    def potential(self, z):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(np.asarray(z, dtype=complex) - self.atom))

    @property
    def atoms(self):
        return ((self.atom, 1.0),)

    @property
    def center(self):
        return self.atom

    @property
    def rotation_invariant(self):
        return self.atom == 0

    @property
    def support_radius(self):
        return 0.0


@dataclass(frozen=True)
class LogParetoRadial(Measure):
    """Rotation-invariant law with ``P(|X - center| > r) = 1/log r`` for ``r >= e``.

    Sampled as ``|X - center| = exp(1/u)`` with ``u`` uniform on (0, 1].  Radii
    routinely exceed the double range, so draws live in extended range;
    :meth:`sample` returns inf for those.  ``1/u`` is capped at
    ``LOG_RADIUS_CAP``, an event of probability 1e-15.
    """

    center: complex = 0j
    kind = "log-pareto-radial"

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))

    def sample_ext(self, rng, count):
        u = 1.0 - rng.random(count)
        log_r = np.minimum(1.0 / u, LOG_RADIUS_CAP)
        x = ExtArray.from_polar(log_r, 2 * np.pi * rng.random(count))
        return x + self.center if self.center != 0 else x

    def sample(self, rng, count):
        return self.sample_ext(rng, count).to_complex()

    @property
    def has_log_moment(self):
        return False

    @property
    def rotation_invariant(self):
        return self.center == 0


@dataclass(frozen=True)
class SingularRadial(Measure):
    """Density ``1/(2 pi |w - center|)`` on the punctured unit disk."""

    center: complex = 0j
    kind = "singular-radial"

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))

    def sample(self, rng, count):
        return self.center + rng.random(count) * _uniform_angle(rng, count)

    @property
    def rotation_invariant(self):
        return self.center == 0

    @property
    def support_radius(self):
        return 1.0


@dataclass(frozen=True)
class Mixture(Measure):
    components: tuple[tuple[float, Measure], ...] = ()
    kind = "mixture"

    def __post_init__(self):
        comps = tuple((float(w), m) for w, m in self.components)
        if not comps:
            raise MeasureError("mixture needs at least one component")
        if any(w < 0 for w, _ in comps):
            raise MeasureError("mixture weights must be nonnegative")
        if abs(sum(w for w, _ in comps) - 1.0) > 1e-12:
            raise MeasureError("mixture weights must sum to 1")
        object.__setattr__(self, "components", comps)

    def sample_ext(self, rng, count):
        weights = np.array([w for w, _ in self.components])
        which = rng.choice(len(weights), size=count, p=weights / weights.sum())
        out = ExtArray(np.zeros(count, dtype=complex))
        for i, (_, m) in enumerate(self.components):
            idx = np.flatnonzero(which == i)
            if idx.size:
                out[idx] = m.sample_ext(rng, idx.size)
        return out

    def sample(self, rng, count):
        return self.sample_ext(rng, count).to_complex()

    def potential(self, z):
        parts = [(w, m.potential(z)) for w, m in self.components if w > 0]
        if any(p is None for _, p in parts):
            return None
        total = 0.0
        for w, p in parts:
            total = total + w * p
        return total

    @property
    def has_log_moment(self):
        return all(m.has_log_moment for w, m in self.components if w > 0)

    @property
    def atoms(self):
        acc: dict[complex, float] = {}
        for w, m in self.components:
            for a, wa in m.atoms:
                acc[a] = acc.get(a, 0.0) + w * wa
        return tuple((a, wa) for a, wa in acc.items() if wa > 0)

    @property
    def rotation_invariant(self):
        return all(m.rotation_invariant for _, m in self.components)

    @property
    def center(self):
        return sum(w * m.center for w, m in self.components)

    @property
    def support_radius(self):
        c = self.center
        return max(abs(m.center - c) + m.support_radius for w, m in self.components if w > 0)


# ---------------------------------------------------------------------------
# operation-style API


def sample(measure: Measure, rng: np.random.Generator, count: int) -> np.ndarray:
    if count < 1:
        raise ValueError("count must be >= 1")
    return measure.sample(rng, int(count))


def log_potential_closed(measure: Measure, z):
    """Exact potential at ``z`` (scalar or array), or None if no closed form.

    Returns -inf at an atom.
    """
    value = measure.potential(z)
    if value is None:
        return None
    if np.ndim(value) == 0:
        return float(value)
    return value


def log_potential_mc(measure: Measure, z: complex, n_samples: int,
                     rng: np.random.Generator) -> MCEstimate:
    """Monte Carlo estimate of ``U(z)`` as (mean, standard error)."""
    if not measure.has_log_moment:
        raise MeasureError(f"{measure.kind} has no logarithmic moment; potential estimator diverges")
    z = complex(z)
    if any(z == a for a, _ in measure.atoms):
        raise MeasureError(f"z={z} is an atom of the measure")
    w = sample(measure, rng, n_samples)
    vals = np.log(np.abs(z - w))
    if n_samples == 1:
        return MCEstimate(float(vals[0]), 0.0)
    return MCEstimate(float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n_samples)))


def has_log_moment(measure: Measure) -> bool:
    return measure.has_log_moment


# ---------------------------------------------------------------------------
# config records


def _cplx(value, key: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value):
        return complex(float(value[0]), float(value[1]))
    raise MeasureError(f"{key}: expected [re, im], got {value!r}")


def _pair(z: complex) -> list[float]:
    return [z.real, z.imag]


_KEYS = {
    "uniform-disk": {"center", "radius"},
    "uniform-circle": {"center", "radius"},
    "complex-gaussian": {"mean", "scale"},
    "point-mass": {"atom"},
    "log-pareto-radial": {"center"},
    "singular-radial": {"center"},
    "mixture": {"components"},
}


def measure_from_dict(record: dict, path: str = "measure") -> Measure:
    """Build a measure from a tagged record such as
    ``{"kind": "uniform-disk", "center": [2.0, 0.0], "radius": 1.0}``."""
    if not isinstance(record, dict):
        raise MeasureError(f"{path}: expected an object")
    kind = record.get("kind")
    if kind not in _KEYS:
        raise MeasureError(f"{path}.kind: unknown measure kind {kind!r}")
    extra = set(record) - _KEYS[kind] - {"kind"}
    if extra:
        raise MeasureError(f"{path}: unexpected keys {sorted(extra)} for {kind}")
    try:
        if kind == "uniform-disk":
            return UniformDisk(_cplx(record.get("center", 0.0), f"{path}.center"), record.get("radius", 1.0))
        if kind == "uniform-circle":
            return UniformCircle(_cplx(record.get("center", 0.0), f"{path}.center"), record.get("radius", 1.0))
        if kind == "complex-gaussian":
            return ComplexGaussian(_cplx(record.get("mean", 0.0), f"{path}.mean"), record.get("scale", 1.0))
        if kind == "point-mass":
            return PointMass(_cplx(record.get("atom", 0.0), f"{path}.atom"))
        if kind == "log-pareto-radial":
            return LogParetoRadial(_cplx(record.get("center", 0.0), f"{path}.center"))
        if kind == "singular-radial":
            return SingularRadial(_cplx(record.get("center", 0.0), f"{path}.center"))
        comps = record.get("components")
        if not isinstance(comps, list):
            raise MeasureError(f"{path}.components: expected a list")
        parsed = []
        for i, c in enumerate(comps):
            if not isinstance(c, dict) or set(c) != {"weight", "measure"}:
                raise MeasureError(f"{path}.components[{i}]: expected {{weight, measure}}")
            parsed.append((float(c["weight"]), measure_from_dict(c["measure"], f"{path}.components[{i}].measure")))
        return Mixture(tuple(parsed))
    except MeasureError as exc:
        if str(exc).startswith(path):
            raise
        raise MeasureError(f"{path}: {exc}") from None


def measure_to_dict(measure: Measure) -> dict:
    if isinstance(measure, (UniformDisk, UniformCircle)):
        return {"kind": measure.kind, "center": _pair(measure.center), "radius": measure.radius}
    if isinstance(measure, ComplexGaussian):
        return {"kind": measure.kind, "mean": _pair(measure.mean), "scale": measure.scale}
    if isinstance(measure, PointMass):
        return {"kind": measure.kind, "atom": _pair(measure.atom)}
    if isinstance(measure, (LogParetoRadial, SingularRadial)):
        return {"kind": measure.kind, "center": _pair(measure.center)}
    if isinstance(measure, Mixture):
        return {"kind": "mixture",
                "components": [{"weight": w, "measure": measure_to_dict(m)} for w, m in measure.components]}
    raise MeasureError(f"cannot serialize {measure!r}")
