"""Interval arithmetic with outward rounding over IEEE doubles.

Every operation is evaluated in round-to-nearest and the result is widened
to the next representable float in the outward direction, so no global
rounding-mode state is ever touched.  Two flavours share the same kernels:

* :class:`Interval` -- an immutable scalar interval.
* :class:`IntervalArray` -- numpy-backed arrays of intervals (``lo``/``hi``).

Bulk linear algebra (:func:`imatmul`, :func:`iconvolve`) uses the
midpoint-radius representation together with the a priori bound

    |fl(x . y) - x . y| <= gamma_k |x| . |y| + k * eta,
    gamma_k = k u / (1 - k u),

which holds for any summation order and with or without fused
multiply-add, so BLAS can be used without switching rounding modes.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Real

import numpy as np

__all__ = [
    "DomainError",
    "Interval",
    "IntervalArray",
    "PI",
    "enclose",
    "imatmul",
    "iconvolve",
    "sum_upper",
    "sum_lower",
    "nonneg_matvec_upper",
]

_INF = math.inf
_MAXF = np.finfo(np.float64).max
_U = 2.0**-53  # unit roundoff
_ETA = 2.0**-1074  # smallest subnormal


class DomainError(ArithmeticError):
    """Raised for division by an interval containing zero or sqrt of negatives."""


def _gamma(k: int) -> float:
    """Upper bound for gamma_k, rounded up."""
    k = max(int(k), 1)
    if k * _U >= 0.5:
        raise OverflowError("dot product too long for the a priori error bound")
    return math.nextafter(math.nextafter(k * _U, _INF) / math.nextafter(1.0 - k * _U, -_INF), _INF)


def _down(x):
    return np.nextafter(x, -_INF)


def _up(x):
    return np.nextafter(x, _INF)


def _clip(lo, hi, raw=()):
    """Replace non-finite endpoints by the largest finite magnitude.

    ``raw`` are the unwidened round-to-nearest results; nextafter maps inf
    to the largest float, so overflow must be detected before widening.
    Returns (lo, hi, tainted).  Tainted means an endpoint overflowed and the
    interval is no longer a guaranteed enclosure.
    """
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    bad = ~(np.isfinite(lo) & np.isfinite(hi))
    for r in raw:
        bad = bad | ~np.isfinite(r)
    if not bad.any():
        return lo, hi, False
    lo = np.where(np.isnan(lo) | (lo == -_INF), -_MAXF, np.where(lo == _INF, _MAXF, lo))
    hi = np.where(np.isnan(hi) | (hi == _INF), _MAXF, np.where(hi == -_INF, -_MAXF, hi))
    return lo, hi, True


# --------------------------------------------------------------------------
# elementwise kernels on (lo, hi) ndarrays; each returns (lo, hi, tainted)


def _k_add(alo, ahi, blo, bhi):
    with np.errstate(over="ignore", invalid="ignore"):
        lo = _exact_or_down(alo, blo)
        hi = _exact_or_up(ahi, bhi)
    return _clip(lo, hi, (alo + blo, ahi + bhi))


def _exact_or_down(a, b):
    # TwoSum: err == 0 means a + b was exact; err > 0 means the true sum is above s
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return np.where(err >= 0, s, _down(s))


def _exact_or_up(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return np.where(err <= 0, s, _up(s))


def _k_neg(alo, ahi):
    return -ahi, -alo, False


def _k_sub(alo, ahi, blo, bhi):
    return _k_add(alo, ahi, -bhi, -blo)


def _k_mul(alo, ahi, blo, bhi):
    with np.errstate(over="ignore", invalid="ignore"):
        p = (alo * blo, alo * bhi, ahi * blo, ahi * bhi)
        z = ((alo == 0) | (blo == 0), (alo == 0) | (bhi == 0), (ahi == 0) | (blo == 0), (ahi == 0) | (bhi == 0))
        # products with an exact zero factor are exact and must not be widened
        los = [np.where(zi, 0.0, _down(pi)) for pi, zi in zip(p, z)]
        his = [np.where(zi, 0.0, _up(pi)) for pi, zi in zip(p, z)]
        lo = np.minimum(np.minimum(los[0], los[1]), np.minimum(los[2], los[3]))
        hi = np.maximum(np.maximum(his[0], his[1]), np.maximum(his[2], his[3]))
    return _clip(lo, hi, p)


def _k_div(alo, ahi, blo, bhi):
    if np.any((blo <= 0) & (bhi >= 0)):
        raise DomainError("division by an interval containing zero")
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        q = (alo / blo, alo / bhi, ahi / blo, ahi / bhi)
        z = (alo == 0, alo == 0, ahi == 0, ahi == 0)
        los = [np.where(zi, 0.0, _down(qi)) for qi, zi in zip(q, z)]
        his = [np.where(zi, 0.0, _up(qi)) for qi, zi in zip(q, z)]
        lo = np.minimum(np.minimum(los[0], los[1]), np.minimum(los[2], los[3]))
        hi = np.maximum(np.maximum(his[0], his[1]), np.maximum(his[2], his[3]))
    return _clip(lo, hi, q)


def _k_sqrt(alo, ahi):
    if np.any(alo < 0):
        raise DomainError("sqrt of an interval reaching below zero")
    lo = np.sqrt(alo)
    hi = np.sqrt(ahi)
    lo = np.where(lo == 0, 0.0, _down(lo))
    hi = np.where(hi == 0, 0.0, _up(hi))
    return _clip(lo, hi, (ahi,))


def _k_abs(alo, ahi):
    lo = np.where(alo >= 0, alo, np.where(ahi <= 0, -ahi, 0.0))
    hi = np.maximum(np.abs(alo), np.abs(ahi))
    return lo, hi, False


def _k_max(alo, ahi, blo, bhi):
    return np.maximum(alo, blo), np.maximum(ahi, bhi), False


def enclose(x) -> "Interval":
    """Tightest float interval containing the exact value of ``x``.

    Accepts floats, ints, :class:`~fractions.Fraction` and decimal strings
    such as ``"1.01"`` or ``"16/7"``.
    """
    if isinstance(x, Interval):
        return x
    if isinstance(x, float):
        return Interval(x, x)
    q = Fraction(x) if not isinstance(x, Fraction) else x
    f = float(q)
    fq = Fraction(f)
    if fq == q:
        return Interval(f, f)
    if fq < q:
        return Interval(f, math.nextafter(f, _INF))
    return Interval(math.nextafter(f, -_INF), f)


# --------------------------------------------------------------------------


class Interval:
    """Closed interval ``[lo, hi]`` of reals with float endpoints."""

    __slots__ = ("lo", "hi", "tainted")

    def __init__(self, lo, hi=None, tainted: bool = False):
        if hi is None:
            hi = lo
        lo = float(lo)
        hi = float(hi)
        if not lo <= hi:
            raise ValueError(f"invalid interval [{lo!r}, {hi!r}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "tainted", bool(tainted))

    def __setattr__(self, name, value):
        raise AttributeError("Interval is immutable")

    def __reduce__(self):
        return (Interval, (self.lo, self.hi, self.tainted))

    @classmethod
    def _from(cls, res, *operands) -> "Interval":
        lo, hi, t = res
        t = t or any(getattr(o, "tainted", False) for o in operands)
        return cls(float(lo), float(hi), t)

    @staticmethod
    def _coerce(other) -> "Interval":
        if isinstance(other, Interval):
            return other
        if isinstance(other, (Real, Fraction, str)):
            return enclose(other)
        return NotImplemented

    # arithmetic ----------------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return Interval._from(_k_add(self.lo, self.hi, o.lo, o.hi), self, o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return Interval._from(_k_sub(self.lo, self.hi, o.lo, o.hi), self, o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return Interval._from(_k_mul(self.lo, self.hi, o.lo, o.hi), self, o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return Interval._from(_k_div(self.lo, self.hi, o.lo, o.hi), self, o)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o / self

    def __neg__(self):
        return Interval(-self.hi, -self.lo, self.tainted)

    def __abs__(self):
        return Interval._from(_k_abs(self.lo, self.hi), self)

    def sqrt(self) -> "Interval":
        return Interval._from(_k_sqrt(self.lo, self.hi), self)

    def max(self, other) -> "Interval":
        o = self._coerce(other)
        return Interval._from(_k_max(self.lo, self.hi, o.lo, o.hi), self, o)

    # queries -------------------------------------------------------------
    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def mag(self) -> float:
        return max(abs(self.lo), abs(self.hi))

    def contains(self, x) -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        if isinstance(x, float):
            return self.lo <= x <= self.hi
        q = Fraction(x)
        return Fraction(self.lo) <= q <= Fraction(self.hi)

    __contains__ = contains

    def overlaps(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def __eq__(self, other):
        if not isinstance(other, Interval):
            return NotImplemented
        return self.lo == other.lo and self.hi == other.hi and self.tainted == other.tainted

    def __hash__(self):
        return hash((self.lo, self.hi, self.tainted))

    def __repr__(self):
        t = ", tainted" if self.tainted else ""
        return f"Interval({self.lo!r}, {self.hi!r}{t})"


def interval_max(*xs: Interval) -> Interval:
    out = xs[0]
    for x in xs[1:]:
        out = out.max(x)
    return out


PI = Interval(3.141592653589793, 3.1415926535897936)


# --------------------------------------------------------------------------


class IntervalArray:
    """An ndarray of intervals stored as two float arrays ``lo`` and ``hi``."""

    __array_priority__ = 1000

    def __init__(self, lo, hi=None, tainted: bool = False):
        lo = np.array(lo, dtype=np.float64)
        hi = lo.copy() if hi is None else np.array(hi, dtype=np.float64)
        if lo.shape != hi.shape:
            raise ValueError("lo and hi shapes differ")
        if np.any(lo > hi):
            raise ValueError("lo > hi in IntervalArray")
        self.lo = lo
        self.hi = hi
        self.tainted = bool(tainted)

    @classmethod
    def point(cls, x) -> "IntervalArray":
        x = np.asarray(x, dtype=np.float64)
        return cls(x, x)

    @classmethod
    def zeros(cls, shape) -> "IntervalArray":
        return cls(np.zeros(shape), np.zeros(shape))

    @classmethod
    def from_midrad(cls, mid, rad, tainted=False) -> "IntervalArray":
        with np.errstate(over="ignore", invalid="ignore"):
            lo = _down(mid - rad)
            hi = _up(mid + rad)
            exact = rad == 0
            lo = np.where(exact, mid, lo)
            hi = np.where(exact, mid, hi)
        lo, hi, t = _clip(lo, hi, (mid - rad, mid + rad))
        return cls(lo, hi, tainted or t)

    def midrad(self):
        """Return float arrays (mid, rad) with [lo, hi] inside mid +- rad."""
        with np.errstate(over="ignore", invalid="ignore"):
            mid = 0.5 * self.lo + 0.5 * self.hi
            rad = np.maximum(_up(self.hi - mid), _up(mid - self.lo))
            rad = np.where(self.lo == self.hi, 0.0, rad)
            mid = np.where(self.lo == self.hi, self.lo, mid)
        return mid, rad

    @staticmethod
    def _coerce(other):
        if isinstance(other, IntervalArray):
            return other.lo, other.hi, other.tainted
        if isinstance(other, Interval):
            return other.lo, other.hi, other.tainted
        if isinstance(other, (Fraction, str)):
            i = enclose(other)
            return i.lo, i.hi, False
        a = np.asarray(other, dtype=np.float64)
        return a, a, False

    def _wrap(self, res, *taints):
        lo, hi, t = res
        return IntervalArray(lo, hi, t or self.tainted or any(taints))

    def __add__(self, other):
        blo, bhi, bt = self._coerce(other)
        return self._wrap(_k_add(self.lo, self.hi, blo, bhi), bt)

    __radd__ = __add__

    def __sub__(self, other):
        blo, bhi, bt = self._coerce(other)
        return self._wrap(_k_sub(self.lo, self.hi, blo, bhi), bt)

    def __rsub__(self, other):
        blo, bhi, bt = self._coerce(other)
        return self._wrap(_k_sub(blo, bhi, self.lo, self.hi), bt)

    def __mul__(self, other):
        blo, bhi, bt = self._coerce(other)
        return self._wrap(_k_mul(self.lo, self.hi, blo, bhi), bt)

    __rmul__ = __mul__

    def __truediv__(self, other):
        blo, bhi, bt = self._coerce(other)
        return self._wrap(_k_div(self.lo, self.hi, blo, bhi), bt)

    def __rtruediv__(self, other):
        blo, bhi, bt = self._coerce(other)
        return self._wrap(_k_div(blo, bhi, self.lo, self.hi), bt)

    def __neg__(self):
        return IntervalArray(-self.hi, -self.lo, self.tainted)

    def __abs__(self):
        return self._wrap(_k_abs(self.lo, self.hi))

    def sqrt(self):
        return self._wrap(_k_sqrt(self.lo, self.hi))

    def maximum(self, other):
        blo, bhi, bt = self._coerce(other)
        return self._wrap(_k_max(self.lo, self.hi, blo, bhi), bt)

    def mag(self) -> np.ndarray:
        """Elementwise upper bound of |x|."""
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    def mig(self) -> np.ndarray:
        """Elementwise lower bound of |x|."""
        return np.where((self.lo <= 0) & (self.hi >= 0), 0.0, np.minimum(np.abs(self.lo), np.abs(self.hi)))

    # container protocol --------------------------------------------------
    @property
    def shape(self):
        return self.lo.shape

    @property
    def ndim(self):
        return self.lo.ndim

    def __len__(self):
        return len(self.lo)

    def __getitem__(self, idx):
        lo, hi = self.lo[idx], self.hi[idx]
        if np.ndim(lo) == 0:
            return Interval(float(lo), float(hi), self.tainted)
        return IntervalArray(lo, hi, self.tainted)

    def __setitem__(self, idx, value):
        vlo, vhi, vt = self._coerce(value)
        self.lo[idx] = vlo
        self.hi[idx] = vhi
        self.tainted = self.tainted or vt

    def copy(self) -> "IntervalArray":
        return IntervalArray(self.lo.copy(), self.hi.copy(), self.tainted)

    def reshape(self, *shape):
        return IntervalArray(self.lo.reshape(*shape), self.hi.reshape(*shape), self.tainted)

    @property
    def T(self):
        return IntervalArray(self.lo.T, self.hi.T, self.tainted)

    def mid(self) -> np.ndarray:
        return 0.5 * self.lo + 0.5 * self.hi

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return (self.lo <= x) & (x <= self.hi)

    def overlaps(self, other: "IntervalArray") -> np.ndarray:
        return (self.lo <= other.hi) & (other.lo <= self.hi)

    def __repr__(self):
        return f"IntervalArray(shape={self.shape}, tainted={self.tainted})"


def concat(parts, axis=0) -> IntervalArray:
    return IntervalArray(
        np.concatenate([p.lo for p in parts], axis=axis),
        np.concatenate([p.hi for p in parts], axis=axis),
        any(p.tainted for p in parts),
    )


def as_interval_array(x) -> IntervalArray:
    if isinstance(x, IntervalArray):
        return x
    return IntervalArray.point(x)


# --------------------------------------------------------------------------
# rigorous sums and products


def sum_upper(x: np.ndarray, axis=None) -> np.ndarray | float:
    """Upper bound for the exact sum of nonnegative floats."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size if axis is None else x.shape[axis]
    s = _up(np.sum(x, axis=axis))
    return _up(s * (1.0 + 2.0 * _gamma(n)))


def sum_lower(x: np.ndarray, axis=None) -> np.ndarray | float:
    """Lower bound for the exact sum of nonnegative floats."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size if axis is None else x.shape[axis]
    s = _down(np.sum(x, axis=axis))
    return np.maximum(_down(s * (1.0 - 2.0 * _gamma(n))), 0.0)


def nonneg_matvec_upper(M: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Upper bound for ``M @ x`` when both have nonnegative entries."""
    k = M.shape[-1]
    s = M @ x
    out = _up(_up(s * (1.0 + 2.0 * _gamma(k + 1))) + k * _ETA)
    # an all-zero row sums to exactly zero; elsewhere k * eta covers underflow
    return np.where(np.any(M != 0, axis=-1), out, 0.0)


def nonneg_matvec_lower(M: np.ndarray, x: np.ndarray) -> np.ndarray:
    k = M.shape[-1]
    s = M @ x
    return np.maximum(_down(_down(s * (1.0 - 2.0 * _gamma(k + 1))) - k * _ETA), 0.0)


def _midrad_product(mA, rA, mB, rB, k, op):
    """Shared midpoint-radius product for matmul and convolution.

    The exact product of any A in <mA, rA> and B in <mB, rB> lies within
    op(mA, mB) +- rad with rad bounding both the floating-point error of
    op(mA, mB) and the spread coming from the radii.
    """
    C = op(mA, mB)
    aA = np.abs(mA)
    aB = np.abs(mB)
    g = _gamma(k + 2)
    G = op(aA, aB)
    acc = g * G
    if np.any(rB):
        acc = acc + op(aA, rB)
    if np.any(rA):
        acc = acc + op(rA, _up(aB + rB))
    # acc was itself computed in floating point; every term is nonnegative
    rad = _up(_up(acc * (1.0 + 4.0 * g)) + (4 * k + 4) * _ETA)
    return IntervalArray.from_midrad(C, rad)


def imatmul(A, B, chunk: int = 1024) -> IntervalArray:
    """Rigorous enclosure of the matrix product of two interval matrices.

    Either operand may also be a plain float ndarray (a point matrix).
    Columns of ``B`` are processed in chunks to bound peak memory.
    """
    A = as_interval_array(A)
    B = as_interval_array(B)
    mA, rA = A.midrad()
    mB, rB = B.midrad()
    k = A.shape[-1]
    if B.ndim == 1:
        out = _midrad_product(mA, rA, mB, rB, k, np.matmul)
    else:
        parts = []
        for j in range(0, B.shape[1], chunk):
            sl = slice(j, j + chunk)
            parts.append(_midrad_product(mA, rA, mB[:, sl], rB[:, sl], k, np.matmul))
        out = concat(parts, axis=1) if parts else IntervalArray.zeros((A.shape[0], 0))
    out.tainted = out.tainted or A.tainted or B.tainted
    return out


def iconvolve(a, b) -> IntervalArray:
    """Rigorous enclosure of the full discrete convolution of two 1-D arrays."""
    a = as_interval_array(a)
    b = as_interval_array(b)
    ma, ra = a.midrad()
    mb, rb = b.midrad()
    k = min(len(ma), len(mb))
    out = _midrad_product(ma, ra, mb, rb, k, np.convolve)
    out.tainted = out.tainted or a.tainted or b.tainted
    return out
