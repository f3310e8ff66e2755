"""Experiment configuration: a single JSON document, validated up front.

Schema (all keys except ``terms``, ``n_values`` and ``seeds`` optional)::

    {
      "name": "two-disks",
      "mode": "light-tail" | "heavy-tail" | "limit-only" | "validate",
      "terms": [{"measure": {"kind": "uniform-disk", ...},
                 "degree": {"form": "full"}}, ...],
      "n_values": [300],
      "seeds": [0, 1, 2],
      "grid": {"center": [0, 0], "half_width": 2.0, "points_per_side": 400},
      "metrics": ["potential_discrepancy", ...],
      "tolerances": {"potential_discrepancy": 0.1},
      "out_dir": "runs/two_disks",
      "solver": {"max_iterations": 500, "stop_tolerance": 1e-12, "restart_attempts": 3},
      "probes": {"count": 200, "inner": 0.0, "outer": 3.0, "exclusion": 0.05,
                 "exclude_annuli": [{"center": [0, 0], "radius": 1.0, "width": 0.1}],
                 "seed": 7},
      "balls": [{"center": [0, 0], "radius": 0.5}] | {"count": 20, "min_radius": 0.1,
                                                      "max_radius": 0.5, "seed": 11},
      "validation": {"pj_probes": 10, "n_theta": 4096,
                     "bump": {"center": [0, 0], "radius": 1.5}}
    }

Degree forms: ``{"form": "full"}``, ``{"form": "ratio", "alpha": "1/12"}``,
``{"form": "sqrt"}``, ``{"form": "constant", "d": 25}``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .measures import Measure, MeasureError, measure_from_dict, measure_to_dict
from .polyroots import DegreeSequence
from .potential import Grid, LimitSpec
from .solver import SolveOptions

__all__ = [
    "ConfigError",
    "Term",
    "ProbeSpec",
    "ExperimentConfig",
    "MODES",
    "MODE_METRICS",
    "parse_config",
    "default_heavy_balls",
]

MODES = ("light-tail", "heavy-tail", "limit-only", "validate")

MODE_METRICS = {
    "light-tail": ("ball_discrepancy", "potential_discrepancy", "pj_residual_max", "hkyv_residual"),
    "heavy-tail": ("s_statistic", "rouche_mismatches", "nearest_term_discrepancy",
                   "mahler_envelope_gap"),
    "limit-only": ("mass_defect", "certificate_defect"),
    "validate": ("pj_residual_max", "hkyv_residual"),
}

_TOP_KEYS = {"name", "mode", "terms", "n_values", "seeds", "grid", "metrics", "tolerances",
             "out_dir", "solver", "probes", "balls", "validation"}


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class Term:
    measure: Measure
    degree: DegreeSequence


@dataclass(frozen=True)
class ProbeSpec:
    count: int = 200
    inner: float = 0.0
    outer: float = 3.0
    exclusion: float = 0.05
    # (center, radius, half-width) of annuli kept free of probes
    exclude_annuli: tuple[tuple[complex, float, float], ...] = ()
    seed: int = 7

    def points(self, center: complex = 0j) -> np.ndarray:
        """Uniform draws from the annulus ``inner < |z - center| < outer``
        outside the excluded annuli; deterministic in ``seed``."""
        rng = np.random.default_rng(self.seed)
        out: list[complex] = []
        while len(out) < self.count:
            k = 4 * self.count
            r = np.sqrt(rng.uniform(self.inner ** 2, self.outer ** 2, k))
            z = center + r * np.exp(2j * np.pi * rng.random(k))
            ok = np.ones(k, dtype=bool)
            for c, rad, w in self.exclude_annuli:
                ok &= np.abs(np.abs(z - c) - rad) >= w
            out.extend(z[ok].tolist())
        return np.array(out[: self.count])


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    name: str
    mode: str
    terms: tuple[Term, ...]
    n_values: tuple[int, ...]
    seeds: tuple[int, ...]
    grid: Grid = field(default_factory=Grid)
    metrics: tuple[str, ...] = ()
    tolerances: dict = field(default_factory=dict)
    out_dir: str | None = None
    solver: SolveOptions = field(default_factory=SolveOptions)
    probes: ProbeSpec = field(default_factory=ProbeSpec)
    balls: tuple[tuple[complex, float], ...] = ()
    pj_probes: int = 10
    n_theta: int = 4096
    bump: tuple[complex, float] | None = None
    raw: dict = field(default_factory=dict, repr=False)

    def limit_spec(self) -> LimitSpec:
        return LimitSpec(tuple((t.measure, t.degree.limit_ratio) for t in self.terms))

    def degrees(self, n: int) -> list[int]:
        return [t.degree.degree(n) for t in self.terms]

    def echo(self) -> dict:
        """Normalized config, as written back into summaries."""
        return {
            "name": self.name,
            "mode": self.mode,
            "terms": [{"measure": measure_to_dict(t.measure), "degree": t.degree.to_dict()}
                      for t in self.terms],
            "n_values": list(self.n_values),
            "seeds": list(self.seeds),
            "grid": self.grid.to_dict(),
            "metrics": list(self.metrics),
            "tolerances": dict(self.tolerances),
            "solver": {"max_iterations": self.solver.max_iterations,
                       "stop_tolerance": self.solver.stop_tolerance,
                       "restart_attempts": self.solver.restart_attempts},
        }


def default_heavy_balls() -> tuple[tuple[complex, float], ...]:
    """Ten fixed test balls inside B(0, 3)."""
    balls = [(0j, 0.5), (0j, 1.0), (0j, 2.0), (0j, 2.9)]
    balls += [(1.5 * complex(math.cos(a), math.sin(a)), 1.0)
              for a in 2 * math.pi * np.arange(6) / 6]
    return tuple(balls)


def _random_balls(grid: Grid, count: int, rmin: float, rmax: float, seed: int):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        r = rng.uniform(rmin, rmax)
        room = grid.half_width - r
        c = grid.center + complex(rng.uniform(-room, room), rng.uniform(-room, room))
        out.append((c, float(r)))
    return tuple(out)


# -- field helpers -------------------------------------------------------------


def _obj(v, key) -> dict:
    if not isinstance(v, dict):
        raise ConfigError(key, "expected an object")
    return v


def _keys(d: dict, allowed: set, key: str):
    extra = set(d) - allowed
    if extra:
        raise ConfigError(key, f"unexpected keys {sorted(extra)}")


def _num(v, key, positive=False, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(key, "expected a number")
    if not math.isfinite(v):
        raise ConfigError(key, "must be finite")
    if integer and int(v) != v:
        raise ConfigError(key, "expected an integer")
    if positive and v <= 0:
        raise ConfigError(key, "must be positive")
    return int(v) if integer else float(v)


def _point(v, key) -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, list) and len(v) == 2:
        return complex(_num(v[0], key), _num(v[1], key))
    raise ConfigError(key, "expected [re, im]")


def _degree(d, key) -> DegreeSequence:
    d = _obj(d, key)
    form = d.get("form")
    try:
        if form == "ratio":
            _keys(d, {"form", "alpha"}, key)
            a = d.get("alpha")
            if isinstance(a, bool) or not isinstance(a, (str, int, float)):
                raise ConfigError(f"{key}.alpha", "expected a fraction string or number")
            return DegreeSequence("ratio", alpha=Fraction(str(a)))
        if form == "constant":
            _keys(d, {"form", "d"}, key)
            return DegreeSequence("constant", d=_num(d.get("d"), f"{key}.d", positive=True, integer=True))
        if form in ("full", "sqrt"):
            _keys(d, {"form"}, key)
            return DegreeSequence(form)
    except (ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(key, str(exc)) from None
    raise ConfigError(f"{key}.form", f"unknown degree form {form!r}")


def _int_list(v, key, positive=False) -> tuple[int, ...]:
    if not isinstance(v, list) or not v:
        raise ConfigError(key, "expected a non-empty list")
    return tuple(_num(x, f"{key}[{i}]", positive=positive, integer=True) for i, x in enumerate(v))


def parse_config(text: bytes | str) -> ExperimentConfig:
    """Parse and validate a JSON experiment config; raises :class:`ConfigError`."""
    try:
        raw = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError("<document>", f"not valid JSON ({exc})") from None
    raw = _obj(raw, "<document>")
    _keys(raw, _TOP_KEYS, "<document>")

    mode = raw.get("mode", "light-tail")
    if mode not in MODES:
        raise ConfigError("mode", f"unknown mode {mode!r}")
    name = raw.get("name", "experiment")
    if not isinstance(name, str) or not name:
        raise ConfigError("name", "expected a non-empty string")

    terms_raw = raw.get("terms")
    if not isinstance(terms_raw, list) or not terms_raw:
        raise ConfigError("terms", "expected a non-empty list")
    terms = []
    for i, t in enumerate(terms_raw):
        key = f"terms[{i}]"
        t = _obj(t, key)
        _keys(t, {"measure", "degree"}, key)
        if "measure" not in t:
            raise ConfigError(f"{key}.measure", "missing")
        try:
            m = measure_from_dict(t["measure"], f"{key}.measure")
        except MeasureError as exc:
            raise ConfigError(f"{key}.measure", str(exc)) from None
        terms.append(Term(m, _degree(t.get("degree", {"form": "full"}), f"{key}.degree")))

    n_values = _int_list(raw.get("n_values"), "n_values", positive=True)
    seeds = _int_list(raw.get("seeds"), "seeds")
    for i, sd in enumerate(seeds):
        if sd < 0:
            raise ConfigError(f"seeds[{i}]", "seeds must be nonnegative")

    full = [i for i, t in enumerate(terms) if t.degree.form == "full"]
    if mode == "heavy-tail":
        if len(terms) != 2 or len(full) != 2:
            raise ConfigError("terms", "heavy-tail mode needs exactly two terms of full degree")
    elif len(full) != 1:
        what = "missing full-degree term" if not full else "more than one full-degree term"
        raise ConfigError("terms", what)
    n_min = min(n_values)
    for i, t in enumerate(terms):
        if t.degree.degree(n_min) > n_min:
            raise ConfigError(f"terms[{i}].degree",
                              f"degree {t.degree.degree(n_min)} exceeds n = {n_min}")

    g = _obj(raw.get("grid", {}), "grid")
    _keys(g, {"center", "half_width", "points_per_side"}, "grid")
    try:
        grid = Grid(_point(g.get("center", [0.0, 0.0]), "grid.center"),
                    _num(g.get("half_width", 2.0), "grid.half_width", positive=True),
                    _num(g.get("points_per_side", 400), "grid.points_per_side", integer=True))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("grid", str(exc)) from None

    allowed = MODE_METRICS[mode]
    metrics_raw = raw.get("metrics", list(allowed))
    if not isinstance(metrics_raw, list):
        raise ConfigError("metrics", "expected a list")
    for i, m in enumerate(metrics_raw):
        if m not in allowed:
            raise ConfigError(f"metrics[{i}]", f"unknown metric {m!r} for mode {mode}")
    metrics = tuple(dict.fromkeys(metrics_raw))

    tol_raw = _obj(raw.get("tolerances", {}), "tolerances")
    tolerances = {}
    for k, v in tol_raw.items():
        if k not in metrics:
            raise ConfigError(f"tolerances.{k}", "tolerance for a metric that is not requested")
        tolerances[k] = _num(v, f"tolerances.{k}", positive=True)

    s = _obj(raw.get("solver", {}), "solver")
    _keys(s, {"max_iterations", "stop_tolerance", "restart_attempts"}, "solver")
    _check_solver(s)
    solver = SolveOptions(
        max_iterations=_num(s.get("max_iterations", 500), "solver.max_iterations", positive=True, integer=True),
        stop_tolerance=_num(s.get("stop_tolerance", 1e-12), "solver.stop_tolerance", positive=True),
        restart_attempts=_num(s.get("restart_attempts", 3), "solver.restart_attempts", integer=True),
    )

    p = _obj(raw.get("probes", {}), "probes")
    _keys(p, {"count", "inner", "outer", "exclusion", "exclude_annuli", "seed"}, "probes")
    annuli = []
    for i, a in enumerate(p.get("exclude_annuli", [])):
        key = f"probes.exclude_annuli[{i}]"
        a = _obj(a, key)
        _keys(a, {"center", "radius", "width"}, key)
        annuli.append((_point(a.get("center", [0.0, 0.0]), f"{key}.center"),
                       _num(a.get("radius"), f"{key}.radius", positive=True),
                       _num(a.get("width"), f"{key}.width", positive=True)))
    probes = ProbeSpec(
        count=_num(p.get("count", 200), "probes.count", positive=True, integer=True),
        inner=_num(p.get("inner", 0.0), "probes.inner"),
        outer=_num(p.get("outer", 3.0), "probes.outer", positive=True),
        exclusion=_num(p.get("exclusion", 0.05), "probes.exclusion", positive=True),
        exclude_annuli=tuple(annuli),
        seed=_num(p.get("seed", 7), "probes.seed", integer=True),
    )
    if not 0 <= probes.inner < probes.outer:
        raise ConfigError("probes.inner", "need 0 <= inner < outer")

    balls = _balls(raw.get("balls"), mode, grid)

    v = _obj(raw.get("validation", {}), "validation")
    _keys(v, {"pj_probes", "n_theta", "bump"}, "validation")
    bump = None
    if "bump" in v:
        b = _obj(v["bump"], "validation.bump")
        _keys(b, {"center", "radius"}, "validation.bump")
        bump = (_point(b.get("center", [0.0, 0.0]), "validation.bump.center"),
                _num(b.get("radius"), "validation.bump.radius", positive=True))

    out_dir = raw.get("out_dir")
    if out_dir is not None and not isinstance(out_dir, str):
        raise ConfigError("out_dir", "expected a path string")

    cfg = ExperimentConfig(
        name=name, mode=mode, terms=tuple(terms), n_values=n_values, seeds=seeds, grid=grid,
        metrics=metrics, tolerances=tolerances, out_dir=out_dir, solver=solver, probes=probes,
        balls=balls,
        pj_probes=_num(v.get("pj_probes", 10), "validation.pj_probes", positive=True, integer=True),
        n_theta=_num(v.get("n_theta", 4096), "validation.n_theta", positive=True, integer=True),
        bump=bump, raw=raw,
    )
    if mode in ("light-tail", "limit-only"):
        try:
            cfg.limit_spec()
        except (MeasureError, ValueError) as exc:
            raise ConfigError("terms", str(exc)) from None
    return cfg


def _check_solver(s: dict):
    tol = s.get("stop_tolerance", 1e-12)
    _num(tol, "solver.stop_tolerance", positive=True)
    if tol > 1e-3:
        raise ConfigError("solver.stop_tolerance", "must not exceed 1e-3")
    if _num(s.get("restart_attempts", 3), "solver.restart_attempts", integer=True) < 0:
        raise ConfigError("solver.restart_attempts", "must be nonnegative")


def _balls(v, mode: str, grid: Grid):
    if v is None:
        if mode == "heavy-tail":
            return default_heavy_balls()
        return _random_balls(grid, 20, 0.1, 0.5, 11)
    if isinstance(v, list):
        out = []
        for i, b in enumerate(v):
            key = f"balls[{i}]"
            b = _obj(b, key)
            _keys(b, {"center", "radius"}, key)
            out.append((_point(b.get("center"), f"{key}.center"),
                        _num(b.get("radius"), f"{key}.radius", positive=True)))
        return tuple(out)
    v = _obj(v, "balls")
    _keys(v, {"count", "min_radius", "max_radius", "seed"}, "balls")
    rmin = _num(v.get("min_radius", 0.1), "balls.min_radius", positive=True)
    rmax = _num(v.get("max_radius", 0.5), "balls.max_radius", positive=True)
    if rmin > rmax or rmax >= grid.half_width:
        raise ConfigError("balls.max_radius", "need min_radius <= max_radius < grid half_width")
    return _random_balls(grid, _num(v.get("count", 20), "balls.count", positive=True, integer=True),
                         rmin, rmax, _num(v.get("seed", 11), "balls.seed", integer=True))
