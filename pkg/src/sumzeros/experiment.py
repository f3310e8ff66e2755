"""Run a configured experiment over its (n, seed) cells and write artifacts.

Layout of ``out_dir``::

    summary.json                  config echo, per-cell records, checks, manifest
    rho_grid.csv, rho_grid.json   limit measure on the grid (light-tail, limit-only)
    cells/n{n}_seed{seed}/roots.csv    re, im, source (term_1.., sum)
    cells/n{n}_seed{seed}/solver.csv   re, im, log_residual

Cells are independent (each draws from its own stream) and may run in worker
processes; results are reduced in (n, seed) order so the files do not depend
on the worker count.
"""
from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .extnum import ExtArray
from .io import dumps_json, grid_csv, labelled_roots_csv, report_csv
from .measures import substream
from .metrics import (
    BumpFunction,
    EmpiricalMeasure,
    NearCircleRootError,
    ball_discrepancy,
    hkyv_residual,
    mahler_envelope_gap,
    poisson_jensen_residual,
    potential_discrepancy,
)
from .polyroots import PolySum, RootPoly, s_statistic
from .potential import GridMeasure, riesz_extract, total_mass_certificate
from .solver import count_roots_argument, find_roots, rouche_dominance

__all__ = ["RunReport", "run_experiment", "run_cell", "contour_radius"]

# Angular resolution for Rouché dominance tests and the mass certificate.
_ROUCHE_THETA = 2048
_CERT_LOG_R = 10.0


@dataclass
class RunReport:
    records: list
    checks: list
    passed: bool
    manifest: list
    out_dir: Path
    extra: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {"records": self.records, "checks": self.checks, "passed": self.passed,
                "manifest": self.manifest, **self.extra}


def _cell_dir(n: int, seed: int) -> str:
    return f"cells/n{n}_seed{seed}"


def _sample_terms(cfg: ExperimentConfig, n: int, seed: int) -> list[RootPoly]:
    return [RootPoly(t.measure.sample_ext(substream(seed, n, k), d))
            for k, (t, d) in enumerate(zip(cfg.terms, cfg.degrees(n)))]


def contour_radius(roots: np.ndarray, rng: np.random.Generator) -> float | None:
    """A radius enclosing every root with no root within 2% of the circle."""
    mag = np.abs(roots)
    if not np.all(np.isfinite(mag)):
        return None
    R = 1.25 * float(mag.max()) + 0.5
    for _ in range(200):
        if np.min(np.abs(mag - R)) > 0.02 * R:
            return R
        R *= 1.0 + 0.05 * rng.random()
    return None


def _pj_max(s: PolySum, report, cfg: ExperimentConfig, rng) -> float:
    roots = report.roots
    R = contour_radius(roots, rng)
    if R is None:
        raise ValueError("roots outside double range; no contour-safe radius")
    worst = 0.0
    for _ in range(cfg.pj_probes):
        for _ in range(1000):
            r, a = 0.8 * R * math.sqrt(rng.random()), 2 * math.pi * rng.random()
            z = cmath.rect(r, a)
            if np.min(np.abs(roots - z)) > 1e-3:
                break
        worst = max(worst, poisson_jensen_residual(s, report, z, R, cfg.n_theta))
    return worst


def _bump(cfg: ExperimentConfig) -> BumpFunction:
    if cfg.bump is not None:
        return BumpFunction(*cfg.bump)
    return BumpFunction(cfg.grid.center, 0.9 * cfg.grid.half_width)


def _guarded(metrics: dict, name: str, fn):
    try:
        metrics[name] = fn()
    except (ValueError, ArithmeticError, NearCircleRootError) as exc:
        metrics[name] = {"failed": str(exc)}


def run_cell(cfg: ExperimentConfig, n: int, seed: int, out_dir: Path,
             rho: GridMeasure | None = None) -> dict:
    """Sample, solve and measure one (n, seed) cell; writes its CSV files."""
    rec: dict = {"n": n, "seed": seed, "degrees": cfg.degrees(n), "metrics": {}}
    terms = _sample_terms(cfg, n, seed)
    s = PolySum(tuple(terms))
    report = find_roots(s, cfg.solver, substream(seed, n, 1000))
    rec["solver"] = {"iterations": report.iterations, "converged": report.converged,
                     "restarts": report.restarts, **report.diagnostics}

    cdir = out_dir / _cell_dir(n, seed)
    cdir.mkdir(parents=True, exist_ok=True)
    groups = [(f"term_{k + 1}", t.ext) for k, t in enumerate(terms)] + [("sum", report.roots_ext)]
    (cdir / "roots.csv").write_text(labelled_roots_csv(groups))
    (cdir / "solver.csv").write_text(report_csv(report))
    rec["files"] = [f"{_cell_dir(n, seed)}/roots.csv", f"{_cell_dir(n, seed)}/solver.csv"]

    if not report.converged:
        rec["status"] = "failed"
        rec["reason"] = "solver did not converge"
        for m in cfg.metrics:
            rec["metrics"][m] = {"failed": "solver did not converge"}
        return rec
    rec["status"] = "ok"
    met = rec["metrics"]
    want = set(cfg.metrics)
    rng = substream(seed, n, 2000)

    if cfg.mode in ("light-tail", "validate"):
        if cfg.mode == "light-tail":
            emp = EmpiricalMeasure(report.roots)
            if "ball_discrepancy" in want:
                _guarded(met, "ball_discrepancy", lambda: ball_discrepancy(emp, rho, cfg.balls))
            if "potential_discrepancy" in want:
                def _pd():
                    pd = potential_discrepancy(emp, cfg.limit_spec(), cfg.probes.points(),
                                               cfg.probes.exclusion)
                    rec["probes"] = {"used": pd.used, "discarded": pd.discarded}
                    if pd.used == 0:
                        raise ValueError("every probe was discarded")
                    return pd.value
                _guarded(met, "potential_discrepancy", _pd)
        if "pj_residual_max" in want:
            _guarded(met, "pj_residual_max", lambda: _pj_max(s, report, cfg, rng))
        if "hkyv_residual" in want:
            bump = _bump(cfg)
            _guarded(met, "hkyv_residual", lambda: hkyv_residual(s, report, bump, cfg.grid))
            rec["hkyv_lhs"] = float(np.sum(bump(report.roots)))
    elif cfg.mode == "heavy-tail":
        p, q = terms
        S = s_statistic(p, q)
        if "s_statistic" in want:
            met["s_statistic"] = S
        if "rouche_mismatches" in want:
            _guarded(met, "rouche_mismatches", lambda: _rouche_check(rec, s, p, q, cfg.balls))
        if "nearest_term_discrepancy" in want:
            lead = p if S >= 0 else q
            _guarded(met, "nearest_term_discrepancy",
                     lambda: _nearest_term(report.roots_ext, lead.ext))
        if "mahler_envelope_gap" in want:
            met["mahler_envelope_gap"] = mahler_envelope_gap(p, 0j, 2.0, cfg.n_theta)
    return rec


def _rouche_check(rec: dict, s: PolySum, p: RootPoly, q: RootPoly, balls) -> int:
    """Compare argument-principle counts of the sum with the dominant term's
    root count in every ball where one term dominates on the boundary."""
    rows, bad = [], 0
    for c, r in balls:
        if rouche_dominance(p, q, c, r, _ROUCHE_THETA):
            dom, label = p, "term_1"
        elif rouche_dominance(q, p, c, r, _ROUCHE_THETA):
            dom, label = q, "term_2"
        else:
            rows.append({"center": c, "radius": r, "dominant": None})
            continue
        cnt = count_roots_argument(s, c, r)
        term_count = int(np.sum(np.abs(dom.roots - c) < r))
        ok = cnt.reliable and cnt.count == term_count
        bad += not ok
        rows.append({"center": c, "radius": r, "dominant": label, "sum_count": cnt.count,
                     "term_count": term_count, "reliable": cnt.reliable, "agree": ok})
    rec["rouche_balls"] = rows
    return bad


def _nearest_term(z: ExtArray, x: ExtArray) -> float:
    """Median over sum roots of ``|z - x*| / (1 + |x*|)``, ``x*`` the nearest term root."""
    diff = ExtArray(z.mant[:, None], z.exp[:, None], normalized=True) - \
        ExtArray(x.mant[None, :], x.exp[None, :], normalized=True)
    with np.errstate(divide="ignore"):
        rel = diff.log_abs() - np.logaddexp(0.0, x.log_abs())[None, :]
    return float(np.exp(np.median(np.min(rel, axis=1))))


def _median_metric(records: list, name: str, n: int):
    vals = [r["metrics"].get(name) for r in records if r["n"] == n]
    if not vals or any(not isinstance(v, (int, float)) for v in vals):
        return None
    return float(np.median(vals))


def _checks(cfg: ExperimentConfig, records: list, limit_metrics: dict | None) -> list:
    out = []
    for name, tol in cfg.tolerances.items():
        if limit_metrics is not None:
            v = limit_metrics.get(name)
            out.append({"metric": name, "value": v, "tolerance": tol,
                        "pass": isinstance(v, float) and v <= tol})
            continue
        for n in cfg.n_values:
            v = _median_metric(records, name, n)
            out.append({"metric": name, "n": n, "median": v, "tolerance": tol,
                        "pass": v is not None and v <= tol})
    return out


def _limit_only(cfg: ExperimentConfig, rho: GridMeasure) -> dict:
    met = {}
    want = set(cfg.metrics)
    if "mass_defect" in want:
        met["mass_defect"] = abs(rho.total - 1.0)
    if "certificate_defect" in want:
        cert = total_mass_certificate(cfg.limit_spec(), math.exp(_CERT_LOG_R), cfg.n_theta)
        met["certificate"] = cert
        met["certificate_defect"] = abs(cert - 1.0)
    met["total_mass"] = rho.total
    met["clipped_mass"] = rho.clipped_mass
    return met


def run_experiment(cfg: ExperimentConfig, out_dir: str | os.PathLike | None = None,
                   threads: int | None = None, seed_offset: int = 0) -> RunReport:
    """Run every (n, seed) cell of ``cfg`` and write the artifacts."""
    out = Path(out_dir or cfg.out_dir or f"runs/{cfg.name}")
    out.mkdir(parents=True, exist_ok=True)
    if seed_offset < 0:
        raise ValueError("seed_offset must be nonnegative")
    manifest: list[str] = []

    rho = None
    if cfg.mode in ("light-tail", "limit-only"):
        rho = riesz_extract(cfg.limit_spec(), cfg.grid)
        (out / "rho_grid.csv").write_text(grid_csv(rho))
        (out / "rho_grid.json").write_text(dumps_json(rho.header()))
        manifest += ["rho_grid.csv", "rho_grid.json"]

    records: list = []
    limit_metrics = None
    if cfg.mode == "limit-only":
        limit_metrics = _limit_only(cfg, rho)
    else:
        cells = [(n, sd + seed_offset) for n in cfg.n_values for sd in cfg.seeds]
        workers = threads or os.cpu_count() or 1
        if workers > 1 and len(cells) > 1:
            with ProcessPoolExecutor(max_workers=min(workers, len(cells))) as ex:
                futs = [ex.submit(run_cell, cfg, n, sd, out, rho) for n, sd in cells]
                records = [f.result() for f in futs]
        else:
            records = [run_cell(cfg, n, sd, out, rho) for n, sd in cells]
        for r in records:
            manifest += r.pop("files")

    checks = _checks(cfg, records, limit_metrics)
    passed = all(c["pass"] for c in checks) and all(r["status"] == "ok" for r in records)
    manifest.append("summary.json")
    extra = {"name": cfg.name, "mode": cfg.mode, "version": __version__,
             "seed_offset": seed_offset, "config": cfg.echo()}
    if limit_metrics is not None:
        extra["metrics"] = limit_metrics
    rep = RunReport(records=records, checks=checks, passed=passed, manifest=manifest,
                    out_dir=out, extra=extra)
    (out / "summary.json").write_text(dumps_json(rep.summary()))
    return rep
