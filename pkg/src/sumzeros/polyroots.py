"""Polynomials held as root multisets.

Nothing here ever expands a polynomial into coefficients: values are
factored products evaluated in extended-exponent arithmetic.  Roots are kept
as :class:`ExtArray` so heavy-tailed samples with ``|x| = e^5000`` are exact;
the ``roots`` attribute is the plain complex view (inf where out of range).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .extnum import ExtArray, ExtComplex, prod_arrays

__all__ = [
    "RootPoly",
    "PolySum",
    "DegreeSequence",
    "PoleError",
    "eval_ext",
    "sum_eval",
    "log_deriv_sum",
    "log_mahler",
    "s_statistic",
]

# Bounds the size of the (points x roots) factor matrix built per chunk.
_CHUNK_ELEMS = 1 << 20


class PoleError(ZeroDivisionError):
    """Evaluation point coincides with a root where a pole is not allowed."""


def _chunks(n_points: int, degree: int):
    step = max(1, _CHUNK_ELEMS // max(1, degree))
    for s in range(0, n_points, step):
        yield slice(s, s + step)


class RootPoly:
    """``leading * prod(z - root)`` for a positive integer ``leading``."""

    __slots__ = ("ext", "roots", "leading", "_in_range")

    def __init__(self, roots, leading: int = 1):
        ext = ExtArray.coerce(roots if isinstance(roots, ExtArray)
                              else np.atleast_1d(np.asarray(roots, dtype=np.complex128)))
        if ext.ndim != 1:
            raise ValueError("roots must be one-dimensional")
        if int(leading) != leading or leading < 1:
            raise ValueError("leading coefficient must be a positive integer")
        self.ext = ext.copy()
        self.roots = self.ext.to_complex()
        self.roots.setflags(write=False)
        self.leading = int(leading)
        self._in_range = bool(np.all(self.ext.in_double_range()))

    def __repr__(self):
        return f"RootPoly(degree={self.degree}, leading={self.leading})"

    @property
    def degree(self) -> int:
        return self.ext.size

    def shifted(self, a: complex) -> "RootPoly":
        return RootPoly(self.ext + complex(a), self.leading)

    def _prepare(self, z):
        """``(z, plain)``: plain complex input when doubles suffice."""
        if isinstance(z, ExtArray):
            if self._in_range and bool(np.all(z.in_double_range())):
                return z.to_complex(), True
            return z, False
        z = np.asarray(z, dtype=np.complex128)
        if self._in_range and bool(np.all(np.abs(z) < 2.0 ** 480)):
            return z, True
        return ExtArray(z), False

    def evaluate(self, z) -> ExtArray:
        """Value at every point of ``z`` (complex array or ExtArray)."""
        z, plain = self._prepare(z)
        shape = z.shape
        flat_m = np.empty(int(np.prod(shape)), dtype=np.complex128)
        flat_e = np.empty(flat_m.shape, dtype=np.int64)
        zf = z.ravel() if plain else z.reshape(-1)
        for sl in _chunks(flat_m.size, self.degree):
            if self.degree == 0:
                flat_m[sl], flat_e[sl] = 0.5, 1
            elif plain:
                flat_m[sl], flat_e[sl] = prod_arrays(zf[sl][:, None] - self.roots[None, :])
            else:
                zz = zf[sl]
                fac = ExtArray(zz.mant[:, None], zz.exp[:, None], normalized=True) - \
                    ExtArray(self.ext.mant[None, :], self.ext.exp[None, :], normalized=True)
                val = fac.prod(axis=-1)
                flat_m[sl], flat_e[sl] = val.mant, val.exp
        out = ExtArray(flat_m.reshape(shape), flat_e.reshape(shape), normalized=True)
        if self.leading != 1:
            out = out * ExtComplex(complex(self.leading))
        return out

    def log_abs(self, z) -> np.ndarray:
        return self.evaluate(z).log_abs()

    def log_deriv(self, z) -> ExtArray:
        """``sum_i 1/(z - x_i)`` at every point of ``z``; non-finite at roots."""
        z, plain = self._prepare(z)
        shape = z.shape
        if self.degree == 0:
            return ExtArray(np.zeros(shape, dtype=np.complex128))
        if plain:
            out = np.empty(z.size, dtype=np.complex128)
            zf = z.ravel()
            with np.errstate(divide="ignore", invalid="ignore"):
                for sl in _chunks(z.size, self.degree):
                    out[sl] = (1.0 / (zf[sl][:, None] - self.roots[None, :])).sum(axis=1)
            return ExtArray(out.reshape(shape))
        zf = z.reshape(-1)
        m = np.empty(zf.size, dtype=np.complex128)
        e = np.empty(zf.size, dtype=np.int64)
        for sl in _chunks(zf.size, self.degree):
            zz = zf[sl]
            fac = ExtArray(zz.mant[:, None], zz.exp[:, None], normalized=True) - \
                ExtArray(self.ext.mant[None, :], self.ext.exp[None, :], normalized=True)
            val = fac.reciprocal().sum(axis=-1)
            m[sl], e[sl] = val.mant, val.exp
        return ExtArray(m.reshape(shape), e.reshape(shape), normalized=True)


@dataclass(frozen=True, eq=False)
class PolySum:
    terms: tuple[RootPoly, ...]

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise ValueError("a sum needs at least one term")
        object.__setattr__(self, "terms", terms)

    @property
    def degree(self) -> int:
        return max(t.degree for t in self.terms)

    @property
    def leading(self) -> int:
        d = self.degree
        return sum(t.leading for t in self.terms if t.degree == d)

    def evaluate(self, z) -> ExtArray:
        out = self.terms[0].evaluate(z)
        for t in self.terms[1:]:
            out = out + t.evaluate(z)
        return out

    def log_abs(self, z) -> np.ndarray:
        return self.evaluate(z).log_abs()

    def term_scale(self, z) -> np.ndarray:
        """``log max_k |p_k(z)|``, the magnitude scale of the sum's terms."""
        return np.max([t.log_abs(z) for t in self.terms], axis=0)

    def newton_parts(self, z) -> tuple[ExtArray, ExtArray, np.ndarray]:
        """``f``, ``f'`` and ``log sum_k |p_k|`` at ``z``.

        ``f' = sum_k p_k * sum_i 1/(z - x_ik)``; points must not coincide with
        a term root.
        """
        vals = [t.evaluate(z) for t in self.terms]
        f = vals[0]
        df = vals[0] * self.terms[0].log_deriv(z)
        for t, v in zip(self.terms[1:], vals[1:]):
            f = f + v
            df = df + v * t.log_deriv(z)
        with np.errstate(divide="ignore"):
            logs = np.stack([v.log_abs() for v in vals])
        top = np.max(logs, axis=0)
        safe_top = np.where(np.isfinite(top), top, 0.0)
        with np.errstate(invalid="ignore"):
            log_mag = safe_top + np.log(np.sum(np.exp(logs - safe_top), axis=0))
        return f, df, np.where(np.isfinite(top), log_mag, top)


@dataclass(frozen=True)
class DegreeSequence:
    """How a term's degree ``n_k`` depends on the full degree ``n``.

    ``form`` is one of ``full`` (n), ``ratio`` (ceil(alpha n)), ``sqrt``
    (ceil(sqrt n)) or ``constant`` (d).
    """

    form: str = "full"
    alpha: Fraction | None = None
    d: int | None = None

    def __post_init__(self):
        if self.form == "ratio":
            a = Fraction(self.alpha) if not isinstance(self.alpha, Fraction) else self.alpha
            if not 0 < a <= 1:
                raise ValueError("ratio alpha must lie in (0, 1]")
            object.__setattr__(self, "alpha", a)
        elif self.form == "constant":
            if self.d is None or int(self.d) != self.d or self.d < 1:
                raise ValueError("constant degree must be a positive integer")
            object.__setattr__(self, "d", int(self.d))
        elif self.form not in ("full", "sqrt"):
            raise ValueError(f"unknown degree form {self.form!r}")

    def degree(self, n: int) -> int:
        if self.form == "full":
            return n
        if self.form == "ratio":
            return math.ceil(self.alpha * n)
        if self.form == "sqrt":
            return math.isqrt(n - 1) + 1 if n > 0 else 0
        return self.d

    @property
    def limit_ratio(self) -> float:
        """``c = lim n_k / n``."""
        if self.form == "full":
            return 1.0
        if self.form == "ratio":
            return float(self.alpha)
        return 0.0

    def to_dict(self) -> dict:
        if self.form == "ratio":
            return {"form": "ratio", "alpha": str(self.alpha)}
        if self.form == "constant":
            return {"form": "constant", "d": self.d}
        return {"form": self.form}


# ---------------------------------------------------------------------------
# operation-style API


def eval_ext(p: RootPoly, z: complex) -> ExtComplex:
    return p.evaluate(np.array([complex(z)])).item()


def sum_eval(s: PolySum, z: complex) -> ExtComplex:
    return s.evaluate(np.array([complex(z)])).item()


def log_deriv_sum(p: RootPoly, z: complex) -> complex:
    """``p'(z)/p(z) = sum_i 1/(z - x_i)``."""
    z = complex(z)
    if np.any(p.roots == z):
        raise PoleError(f"z={z} is a root of the polynomial")
    return complex(p.log_deriv(np.array([z])).to_complex()[0])


def log_mahler(p: RootPoly) -> float:
    """``sum_j log+ |root_j|``; the leading coefficient is not included."""
    la = p.ext.log_abs()
    return float(np.sum(la[la > 0.0]))


def s_statistic(p: RootPoly, q: RootPoly) -> float:
    """Normalized difference of log Mahler measures of equal-degree p and q."""
    if p.degree != q.degree:
        raise ValueError(f"degree mismatch: {p.degree} vs {q.degree}")
    if p.degree == 0:
        raise ValueError("degree must be positive")
    return (log_mahler(p) - log_mahler(q)) / p.degree
