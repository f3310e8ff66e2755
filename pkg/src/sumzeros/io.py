"""CSV/JSON serialization of roots, solver reports and grid measures.

Doubles are written in shortest round-trip form (``repr``).  Values outside
the double range are written as decimal scientific strings such as
``-3.1415926535897e+4821``, so nothing is lost to ``inf``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable, Sequence

import numpy as np

from .extnum import ExtArray
from .polyroots import RootPoly
from .potential import GridMeasure
from .solver import RootReport

__all__ = [
    "format_float",
    "format_ext_parts",
    "roots_csv",
    "labelled_roots_csv",
    "report_csv",
    "grid_csv",
    "read_grid_csv",
    "dumps_json",
]

_LOG10_2 = math.log10(2.0)


def format_float(x: float) -> str:
    return repr(float(x))


def _decimal(part: float, exp: int) -> str:
    """``part * 2**exp`` as decimal text, exact enough for 14 digits."""
    if part == 0:
        return "0.0"
    try:
        x = math.ldexp(part, exp)
    except OverflowError:
        x = math.inf
    if math.isfinite(x) and x != 0:
        return repr(x)
    l10 = math.log10(abs(part)) + exp * _LOG10_2
    k = math.floor(l10)
    digits = 10.0 ** (l10 - k)
    if digits >= 10.0:
        digits, k = digits / 10.0, k + 1
    sign = "-" if part < 0 else ""
    return f"{sign}{digits:.13f}e{k:+d}"


def format_ext_parts(ext: ExtArray) -> tuple[list[str], list[str]]:
    """Real and imaginary parts of every entry as text."""
    re, im = [], []
    for m, e in zip(ext.mant.ravel(), ext.exp.ravel()):
        re.append(_decimal(float(m.real), int(e)))
        im.append(_decimal(float(m.imag), int(e)))
    return re, im


def _write(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def roots_csv(polys: Sequence[RootPoly]) -> str:
    """Columns ``re, im, term_index`` for the roots of each term."""
    rows = []
    for k, p in enumerate(polys):
        re, im = format_ext_parts(p.ext)
        rows.extend((a, b, k) for a, b in zip(re, im))
    return _write(("re", "im", "term_index"), rows)


def labelled_roots_csv(groups: Sequence[tuple[str, ExtArray]]) -> str:
    """Columns ``re, im, source``; one group per label (``term_1``, ``sum``, ...)."""
    rows = []
    for label, ext in groups:
        re, im = format_ext_parts(ExtArray.coerce(ext))
        rows.extend((a, b, label) for a, b in zip(re, im))
    return _write(("re", "im", "source"), rows)


def report_csv(report: RootReport) -> str:
    re, im = format_ext_parts(report.roots_ext)
    rows = [(a, b, format_float(r)) for a, b, r in zip(re, im, report.residuals)]
    return _write(("re", "im", "log_residual"), rows)


def grid_csv(rho: GridMeasure) -> str:
    nodes = rho.grid.nodes()
    rows = ((format_float(z.real), format_float(z.imag), format_float(m))
            for z, m in zip(nodes.ravel(), rho.masses.ravel()))
    return _write(("cell_center_re", "cell_center_im", "mass"), rows)


def read_grid_csv(text: str) -> tuple[np.ndarray, np.ndarray]:
    """Cell centres (complex) and masses from :func:`grid_csv` output."""
    reader = csv.reader(io.StringIO(text))
    next(reader)
    data = np.array([[float(a), float(b), float(c)] for a, b, c in reader])
    return data[:, 0] + 1j * data[:, 1], data[:, 2]


def _default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def dumps_json(obj) -> str:
    """Deterministic JSON; non-finite floats become strings."""
    return json.dumps(_finite(obj), sort_keys=True, indent=2, default=_default) + "\n"


def _finite(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj
