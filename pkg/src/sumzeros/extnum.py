"""Extended-exponent complex arithmetic.

A value is stored as ``mantissa * 2**exponent`` with a complex double
mantissa normalized to ``0.5 <= |mantissa| < 1`` (or exactly zero with
exponent zero).  Products of thousands of factors with magnitudes far outside
the double range stay representable.

The scalar :class:`ExtComplex` carries the public contract.  :class:`ExtArray`
is its numpy counterpart (an array of mantissas plus an array of exponents)
and is what evaluation and root finding use in bulk.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ExtComplex",
    "ext_mul",
    "ext_add",
    "ext_log_abs",
    "normalize_arrays",
    "mul_arrays",
    "add_arrays",
    "log_abs_arrays",
    "prod_arrays",
    "ExtArray",
    "ALIGN_BITS",
]

MANTISSA_BITS = 53
# Exponent gap beyond which the smaller addend cannot affect the larger.
ALIGN_BITS = 2 * MANTISSA_BITS
# Factors per block in bulk products; each normalized factor is >= 1/2, so a
# block of 512 cannot leave the normal double range.
_BLOCK = 512
_LOG2 = math.log(2.0)


def _normalize(m: complex, e: int) -> tuple[complex, int]:
    if m == 0:
        return 0j, 0
    # exponent from the larger part, so |m| itself never has to be formed
    k = math.frexp(max(abs(m.real), abs(m.imag)))[1]
    m = complex(math.ldexp(m.real, -k), math.ldexp(m.imag, -k))
    if abs(m) >= 1.0:
        m, k = complex(m.real * 0.5, m.imag * 0.5), k + 1
    return m, e + k


@dataclass(frozen=True)
class ExtComplex:
    mantissa: complex = 0j
    exponent: int = 0

    def __post_init__(self):
        m, e = _normalize(complex(self.mantissa), int(self.exponent))
        object.__setattr__(self, "mantissa", m)
        object.__setattr__(self, "exponent", e)

    @classmethod
    def from_complex(cls, z: complex) -> "ExtComplex":
        return cls(complex(z), 0)

    def to_complex(self) -> complex:
        """Convert back to a double; overflows to inf / underflows to 0."""
        m, e = self.mantissa, self.exponent
        try:
            return complex(math.ldexp(m.real, e), math.ldexp(m.imag, e))
        except OverflowError:
            return complex(math.copysign(math.inf, m.real) if m.real else 0.0,
                           math.copysign(math.inf, m.imag) if m.imag else 0.0)

    def is_zero(self) -> bool:
        return self.mantissa == 0

    def log_abs(self) -> float:
        return ext_log_abs(self)

    def __mul__(self, other: "ExtComplex") -> "ExtComplex":
        return ext_mul(self, other)

    def __add__(self, other: "ExtComplex") -> "ExtComplex":
        return ext_add(self, other)

    def __neg__(self) -> "ExtComplex":
        return ExtComplex(-self.mantissa, self.exponent)

    def __sub__(self, other: "ExtComplex") -> "ExtComplex":
        return ext_add(self, -other)


def ext_mul(a: ExtComplex, b: ExtComplex) -> ExtComplex:
    if a.mantissa == 0 or b.mantissa == 0:
        return ExtComplex()
    return ExtComplex(a.mantissa * b.mantissa, a.exponent + b.exponent)


def ext_add(a: ExtComplex, b: ExtComplex) -> ExtComplex:
    if b.mantissa == 0:
        return a
    if a.mantissa == 0:
        return b
    if a.exponent < b.exponent:
        a, b = b, a
    gap = a.exponent - b.exponent
    if gap > ALIGN_BITS:
        return a
    mb = complex(math.ldexp(b.mantissa.real, -gap), math.ldexp(b.mantissa.imag, -gap))
    return ExtComplex(a.mantissa + mb, a.exponent)


def ext_log_abs(a: ExtComplex) -> float:
    if a.mantissa == 0:
        return -math.inf
    return math.log(abs(a.mantissa)) + a.exponent * _LOG2


# ---------------------------------------------------------------------------
# array versions


def _ldexp_complex(m: np.ndarray, k: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=np.complex128)
    re = np.ldexp(m.real, k)
    # assemble parts directly: re + 1j*im turns an infinite im into nan + inf j
    out = np.empty(re.shape, dtype=np.complex128)
    out.real = re
    out.imag = np.ldexp(m.imag, k)
    return out


def normalize_arrays(m, e) -> tuple[np.ndarray, np.ndarray]:
    m = np.asarray(m, dtype=np.complex128)
    e = np.asarray(e, dtype=np.int64)
    _, k = np.frexp(np.maximum(np.abs(m.real), np.abs(m.imag)))
    k = k.astype(np.int64)
    m = _ldexp_complex(m, -k)
    big = (np.abs(m) >= 1.0).astype(np.int64)
    m = _ldexp_complex(m, -big)
    e = np.where(m == 0, 0, e + k + big)
    return m, e


def mul_arrays(m1, e1, m2, e2) -> tuple[np.ndarray, np.ndarray]:
    return normalize_arrays(np.asarray(m1) * np.asarray(m2), np.asarray(e1) + np.asarray(e2))


def add_arrays(m1, e1, m2, e2) -> tuple[np.ndarray, np.ndarray]:
    m1, e1, m2, e2 = np.broadcast_arrays(
        np.asarray(m1, dtype=np.complex128), np.asarray(e1, dtype=np.int64),
        np.asarray(m2, dtype=np.complex128), np.asarray(e2, dtype=np.int64))
    big = np.where(m1 == 0, e2, np.where(m2 == 0, e1, np.maximum(e1, e2)))
    g1 = np.clip(big - e1, 0, ALIGN_BITS + 1)
    g2 = np.clip(big - e2, 0, ALIGN_BITS + 1)
    s1 = np.where(g1 > ALIGN_BITS, 0, _ldexp_complex(m1, -g1))
    s2 = np.where(g2 > ALIGN_BITS, 0, _ldexp_complex(m2, -g2))
    return normalize_arrays(s1 + s2, big)


def log_abs_arrays(m, e) -> np.ndarray:
    m = np.asarray(m)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(m)) + np.asarray(e) * _LOG2


def prod_arrays(factors, axis: int = -1) -> tuple[np.ndarray, np.ndarray]:
    """Extended-exponent product of ordinary complex ``factors`` along ``axis``."""
    f = np.moveaxis(np.asarray(factors, dtype=np.complex128), axis, -1)
    mant, k = normalize_arrays(f, np.zeros(f.shape, dtype=np.int64))
    exp_total = k.sum(axis=-1)
    shape = f.shape[:-1]
    m_acc = np.ones(shape, dtype=np.complex128)
    e_acc = np.zeros(shape, dtype=np.int64)
    for start in range(0, f.shape[-1], _BLOCK):
        block = np.prod(mant[..., start:start + _BLOCK], axis=-1)
        m_acc, e_acc = mul_arrays(m_acc, e_acc, block, 0)
    zero = m_acc == 0
    e_acc = np.where(zero, 0, e_acc + exp_total)
    return m_acc, e_acc


def _sum_arrays(m, e, axis: int) -> tuple[np.ndarray, np.ndarray]:
    live = np.where(m != 0, e, np.iinfo(np.int64).min // 2)
    top = np.max(live, axis=axis, keepdims=True)
    shift = np.clip(e - top, -1100, 0)
    total = _ldexp_complex(m, shift).sum(axis=axis)
    return normalize_arrays(total, np.squeeze(top, axis=axis))


# Magnitudes below 2**_SAFE_EXP convert to doubles with room for squaring-free
# arithmetic (differences, reciprocals, products of two).
_SAFE_EXP = 480


class ExtArray:
    """Array of extended-exponent complex numbers.

    Supports the arithmetic the root finder needs: ``+ - * /``, negation,
    reductions along an axis, comparison of magnitudes through
    :meth:`log_abs`, indexing and broadcasting like numpy.
    """

    __slots__ = ("mant", "exp")
    __array_priority__ = 100

    def __init__(self, mant, exp=0, normalized: bool = False):
        if normalized:
            self.mant = np.asarray(mant, dtype=np.complex128)
            self.exp = np.asarray(exp, dtype=np.int64)
        else:
            m, e = np.broadcast_arrays(np.asarray(mant, dtype=np.complex128),
                                       np.asarray(exp, dtype=np.int64))
            self.mant, self.exp = normalize_arrays(m, e)

    @classmethod
    def coerce(cls, value) -> "ExtArray":
        if isinstance(value, ExtArray):
            return value
        if isinstance(value, ExtComplex):
            return cls(value.mantissa, value.exponent, normalized=True)
        return cls(value)

    @classmethod
    def from_polar(cls, log_abs, angle) -> "ExtArray":
        """Values ``exp(log_abs + i angle)`` without passing through doubles."""
        log_abs = np.asarray(log_abs, dtype=float)
        k = np.floor(log_abs / _LOG2)
        frac = np.exp(log_abs - k * _LOG2)
        return cls(frac * np.exp(1j * np.asarray(angle, dtype=float)), k.astype(np.int64))

    @classmethod
    def concatenate(cls, parts) -> "ExtArray":
        parts = [cls.coerce(p) for p in parts]
        return cls(np.concatenate([p.mant for p in parts]),
                   np.concatenate([p.exp for p in parts]), normalized=True)

    # -- shape ---------------------------------------------------------------
    @property
    def shape(self):
        return self.mant.shape

    @property
    def size(self) -> int:
        return self.mant.size

    @property
    def ndim(self) -> int:
        return self.mant.ndim

    def __len__(self):
        return len(self.mant)

    def __getitem__(self, idx) -> "ExtArray":
        return ExtArray(self.mant[idx], self.exp[idx], normalized=True)

    def __setitem__(self, idx, value):
        v = ExtArray.coerce(value)
        self.mant[idx] = v.mant
        self.exp[idx] = v.exp

    def copy(self) -> "ExtArray":
        return ExtArray(self.mant.copy(), self.exp.copy(), normalized=True)

    def reshape(self, *shape) -> "ExtArray":
        return ExtArray(self.mant.reshape(*shape), self.exp.reshape(*shape), normalized=True)

    def item(self, i=None) -> ExtComplex:
        m = self.mant.ravel()[0 if i is None else i]
        e = self.exp.ravel()[0 if i is None else i]
        return ExtComplex(complex(m), int(e))

    # -- conversion ----------------------------------------------------------
    def to_complex(self) -> np.ndarray:
        """Ordinary complex values; out-of-range magnitudes become inf or 0."""
        e = np.clip(self.exp, -2200, 2200)
        with np.errstate(over="ignore", invalid="ignore"):
            return _ldexp_complex(self.mant, e)

    def in_double_range(self) -> np.ndarray:
        return (self.mant == 0) | (np.abs(self.exp) < _SAFE_EXP)

    def log_abs(self) -> np.ndarray:
        return log_abs_arrays(self.mant, self.exp)

    def angle(self) -> np.ndarray:
        return np.angle(self.mant)

    def is_zero(self) -> np.ndarray:
        return self.mant == 0

    # -- arithmetic ----------------------------------------------------------
    def __neg__(self):
        return ExtArray(-self.mant, self.exp, normalized=True)

    def __add__(self, other):
        o = ExtArray.coerce(other)
        return ExtArray(*add_arrays(self.mant, self.exp, o.mant, o.exp), normalized=True)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-ExtArray.coerce(other))

    def __rsub__(self, other):
        return ExtArray.coerce(other) + (-self)

    def __mul__(self, other):
        o = ExtArray.coerce(other)
        return ExtArray(*mul_arrays(self.mant, self.exp, o.mant, o.exp), normalized=True)

    __rmul__ = __mul__

    def reciprocal(self) -> "ExtArray":
        with np.errstate(divide="ignore", invalid="ignore"):
            return ExtArray(1.0 / self.mant, -self.exp)

    def __truediv__(self, other):
        o = ExtArray.coerce(other)
        with np.errstate(divide="ignore", invalid="ignore"):
            return ExtArray(self.mant / o.mant, self.exp - o.exp)

    def __rtruediv__(self, other):
        return ExtArray.coerce(other) / self

    def sum(self, axis: int = -1) -> "ExtArray":
        return ExtArray(*_sum_arrays(self.mant, self.exp, axis), normalized=True)

    def prod(self, axis: int = -1) -> "ExtArray":
        m = np.moveaxis(self.mant, axis, -1)
        e = np.moveaxis(self.exp, axis, -1)
        acc_m = np.ones(m.shape[:-1], dtype=np.complex128)
        acc_e = np.zeros(m.shape[:-1], dtype=np.int64)
        for start in range(0, m.shape[-1], _BLOCK):
            block = np.prod(m[..., start:start + _BLOCK], axis=-1)
            acc_m, acc_e = mul_arrays(acc_m, acc_e, block, 0)
        total = e.sum(axis=-1)
        acc_e = np.where(acc_m == 0, 0, acc_e + total)
        return ExtArray(acc_m, acc_e, normalized=True)

    def __repr__(self):
        return f"ExtArray(mant={self.mant!r}, exp={self.exp!r})"
