"""Independent reference values, computed with mpmath/sympy and frozen to
``frozen.json``.  Rerun only when an oracle definition changes:

    python3 tests/oracles/make_oracles.py
"""
from __future__ import annotations

import json
from pathlib import Path

import mpmath as mp
import numpy as np
import sympy as sp
from scipy import integrate

mp.mp.dps = 40
OUT = Path(__file__).with_name("frozen.json")


def disk_potential_quad(z: complex, center=0j, radius=1.0) -> float:
    """Average of log|z - w| over the disk by 2D quadrature in polar form
    (radial range split at |z - center| where the integrand is singular)."""
    def f(t, r):
        return np.log(abs(z - center - r * np.exp(1j * t))) * r
    s = abs(z - center)
    cuts = [0.0, s, radius] if 0 < s < radius else [0.0, radius]
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        total += integrate.dblquad(f, lo, hi, 0.0, 2 * np.pi, epsabs=1e-12, epsrel=1e-12)[0]
    return total / (np.pi * radius ** 2)


def log_pareto():
    r, u = sp.symbols("r u", positive=True)
    tail = 1 / sp.log(r)
    density = -sp.diff(tail, r)
    # E log|X| restricted to |X| < e^u grows like log(u): the log moment diverges
    truncated = sp.integrate(sp.log(r) * density, (r, sp.E, sp.exp(u)))
    return {
        "median_log_radius": float(sp.solve(sp.Eq(tail.subs(r, sp.exp(u)), sp.Rational(1, 2)), u)[0]),
        "truncated_log_moment": str(sp.simplify(truncated)),
        "log_moment_limit": str(sp.limit(truncated, u, sp.oo)),
    }


def bump_laplacian(points, center=0j, radius=1.0):
    x, y = sp.symbols("x y", real=True)
    cx, cy = center.real, center.imag
    u = ((x - cx) ** 2 + (y - cy) ** 2) / radius ** 2
    phi = sp.exp(-1 / (1 - u))
    lap = sp.simplify(sp.diff(phi, x, 2) + sp.diff(phi, y, 2))
    f = sp.lambdify((x, y), lap, "mpmath")
    return [float(f(mp.mpf(p.real), mp.mpf(p.imag))) for p in points]


def poly_values(roots, z):
    p = mp.mpf(1)
    for r in roots:
        p *= (mp.mpc(z) - mp.mpc(r))
    return p


def main():
    rng = np.random.default_rng(20240601)
    out = {}

    out["disk_potential"] = [
        {"z": [z.real, z.imag], "value": disk_potential_quad(z)}
        for z in (0j, 0.5 + 0j, 0.3 - 0.4j, 2 + 0j, -1.5 + 2j)
    ]
    out["log_pareto"] = log_pareto()

    pts = [0j, 0.3 + 0.1j, -0.5 + 0.5j, 0.8j, 0.95 + 0j]
    out["bump_laplacian_unit"] = {"points": [[p.real, p.imag] for p in pts],
                                  "values": bump_laplacian(pts)}
    pts2 = [1 + 1j, 1.5 + 1.2j, 0.2 + 1j]
    out["bump_laplacian_shifted"] = {"center": [1.0, 1.0], "radius": 1.5,
                                     "points": [[p.real, p.imag] for p in pts2],
                                     "values": bump_laplacian(pts2, 1 + 1j, 1.5)}

    # degree-300 sample in the unit disk evaluated at 2
    r = np.sqrt(rng.random(300)) * np.exp(2j * np.pi * rng.random(300))
    out["deg300_at_2"] = {"roots": [[v.real, v.imag] for v in r],
                          "log_abs": float(mp.log(abs(poly_values(r, 2))))}

    # degree-10 log-derivative at an off-root point, exact in high precision
    r10 = rng.normal(size=10) + 1j * rng.normal(size=10)
    z0 = 0.37 - 0.21j
    ld = mp.fsum(1 / (mp.mpc(z0) - mp.mpc(x)) for x in r10)
    fd_h = mp.mpf("1e-6")
    fd = (mp.log(poly_values(r10, z0 + fd_h)) - mp.log(poly_values(r10, z0 - fd_h))) / (2 * fd_h)
    out["deg10_log_deriv"] = {"roots": [[v.real, v.imag] for v in r10], "z": [z0.real, z0.imag],
                              "value": [float(ld.real), float(ld.imag)],
                              "central_difference": [float(fd.real), float(fd.imag)]}

    # two-term sum, value at a few points
    a = rng.normal(size=7) + 1j * rng.normal(size=7)
    b = 1 + rng.normal(size=4) + 1j * rng.normal(size=4)
    zs = [0.1 + 0.2j, 3 - 1j, -2j]
    vals = [poly_values(a, z) + poly_values(b, z) for z in zs]
    out["sum_values"] = {"a": [[v.real, v.imag] for v in a], "b": [[v.real, v.imag] for v in b],
                         "z": [[z.real, z.imag] for z in zs],
                         "value": [[float(v.real), float(v.imag)] for v in vals]}

    # huge-radius product: 300 factors of magnitude e^100
    out["ext_product_log"] = float(mp.mpf(300) * 100)

    # Mahler measure of a fixed polynomial by Jensen's formula (circle mean of log|p|)
    rm = [2.5, -0.3 + 0.1j, 1.2j, 0.9, -4 - 1j]
    jensen = mp.quad(lambda t: mp.log(abs(poly_values(rm, mp.expj(t)))), [0, 2 * mp.pi]) / (2 * mp.pi)
    out["mahler_jensen"] = {"roots": [[complex(v).real, complex(v).imag] for v in rm],
                            "log_mahler": float(jensen)}

    OUT.write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
