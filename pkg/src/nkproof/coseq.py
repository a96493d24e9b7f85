"""Cosine-coefficient sequences and the weighted l1 Banach algebra.

A sequence ``u = (u_0, ..., u_{M-1})`` represents the even function

    u(x) = u_0 + 2 * sum_{n>=1} u_n cos(n pi x),

and is normed by ``||u||_nu = |u_0| + 2 sum_{n>=1} |u_n| nu^n``.  Products of
functions become the convolution ``(u*v)_n = sum_{k in Z} u_|k| v_|n-k|``.

Functions accept plain float arrays (fast, non-rigorous numerics) or
:class:`~nkproof.rint.IntervalArray` (rigorous); whenever an interval enters,
the result is an interval enclosure.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .rint import (
    PI,
    Interval,
    IntervalArray,
    as_interval_array,
    enclose,
    iconvolve,
    nonneg_matvec_lower,
    nonneg_matvec_upper,
)

PI2 = PI * PI


@dataclass(frozen=True)
class Weight:
    """Geometric weight ``nu >= 1``; held as an interval enclosure."""

    nu: Interval

    def __init__(self, nu):
        iv = enclose(nu) if not isinstance(nu, Interval) else nu
        if iv.lo < 1.0:
            raise ValueError(f"weight nu must be >= 1, got {nu}")
        object.__setattr__(self, "nu", iv)

    @property
    def value(self) -> float:
        return self.nu.mid

    def xi(self, length: int) -> IntervalArray:
        """Enclosures of xi_0 .. xi_{length-1}."""
        lo, hi = _xi_table(self.nu.lo, self.nu.hi, int(length))
        return IntervalArray(lo, hi)

    def xi_float(self, length: int) -> np.ndarray:
        n = np.arange(length)
        out = 2.0 * self.value ** n
        out[0] = 1.0
        return out


@lru_cache(maxsize=64)
def _xi_table(nlo: float, nhi: float, length: int):
    lo = np.empty(length)
    hi = np.empty(length)
    p = Interval(1.0)
    nu = Interval(nlo, nhi)
    for n in range(length):
        if n == 0:
            lo[0] = hi[0] = 1.0
            continue
        p = p * nu
        lo[n] = 2.0 * p.lo  # exact scaling by two
        hi[n] = 2.0 * p.hi
    lo.flags.writeable = False
    hi.flags.writeable = False
    return lo, hi


def as_weight(w) -> Weight:
    return w if isinstance(w, Weight) else Weight(w)


def weight_xi(n: int, w) -> float:
    """xi_n(nu): 1 for n = 0, otherwise 2 nu^n (float, non-rigorous)."""
    if n < 0:
        raise ValueError("mode index must be nonnegative")
    nu = as_weight(w).value
    return 1.0 if n == 0 else 2.0 * nu**n


# --------------------------------------------------------------------------


class CosSeq:
    """A finite cosine-coefficient sequence.

    ``coeffs`` is a 1-D float ndarray or an :class:`IntervalArray`.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        if isinstance(coeffs, CosSeq):
            coeffs = coeffs.coeffs
        if isinstance(coeffs, IntervalArray):
            if coeffs.ndim != 1 or len(coeffs) < 1:
                raise ValueError("CosSeq needs a nonempty 1-D coefficient array")
            self.coeffs = coeffs
        else:
            c = np.array(coeffs, dtype=np.float64)
            if c.ndim != 1 or c.size < 1:
                raise ValueError("CosSeq needs a nonempty 1-D coefficient array")
            self.coeffs = c

    @property
    def rigorous(self) -> bool:
        return isinstance(self.coeffs, IntervalArray)

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, n):
        return self.coeffs[n]

    def __add__(self, other):
        a, b = _align(self.coeffs, _raw(other))
        return CosSeq(a + b)

    def __sub__(self, other):
        a, b = _align(self.coeffs, _raw(other))
        return CosSeq(a - b)

    def __neg__(self):
        return CosSeq(-self.coeffs)

    def __mul__(self, other):
        if isinstance(other, CosSeq):
            return conv(self, other)
        return CosSeq(self.coeffs * other)

    __rmul__ = __mul__

    def norm(self, w) -> Interval:
        return norm_l1nu(self, w)

    def __call__(self, x):
        return eval_at(self, x)

    def __repr__(self):
        kind = "interval" if self.rigorous else "float"
        return f"CosSeq({kind}, length={len(self)})"


def _raw(u):
    return u.coeffs if isinstance(u, CosSeq) else u


def _wrap(u, like):
    return CosSeq(u) if isinstance(like, CosSeq) else u


def _align(a, b):
    """Zero-pad two sequences to a common length."""
    la, lb = len(a), len(b)
    if la == lb:
        return a, b
    m = max(la, lb)
    return pad(a, m), pad(b, m)


def unit(length: int = 1) -> np.ndarray:
    """The algebra's unit (1, 0, ..., 0)."""
    e = np.zeros(max(length, 1))
    e[0] = 1.0
    return e


def project(u, N: int):
    """Keep the first N modes."""
    if N < 1:
        raise ValueError("projection size must be >= 1")
    c = _raw(u)
    if len(c) >= N:
        out = c[:N]
        out = out.copy()
    else:
        out = pad(c, N)
    return _wrap(out, u)


def pad(u, M: int):
    """Append zeros up to length M (no-op when already that long)."""
    c = _raw(u)
    L = len(c)
    if M <= L:
        return _wrap(c.copy(), u)
    if isinstance(c, IntervalArray):
        lo = np.zeros(M)
        hi = np.zeros(M)
        lo[:L] = c.lo
        hi[:L] = c.hi
        return _wrap(IntervalArray(lo, hi, c.tainted), u)
    out = np.zeros(M)
    out[:L] = c
    return _wrap(out, u)


def _two_sided(c: np.ndarray) -> np.ndarray:
    return np.concatenate([c[:0:-1], c])


def conv(u, v, rigorous: bool | None = None):
    """Convolution product of two cosine sequences.

    The result has exact support ``len(u) + len(v) - 1``.  With float inputs
    and ``rigorous`` unset this is plain floating point; otherwise the result
    is an interval enclosure.
    """
    a, b = _raw(u), _raw(v)
    want_rig = rigorous if rigorous is not None else (
        isinstance(a, IntervalArray) or isinstance(b, IntervalArray)
    )
    La, Lb = len(a), len(b)
    L = La + Lb - 1
    if not want_rig:
        full = np.convolve(_two_sided(np.asarray(a, float)), _two_sided(np.asarray(b, float)))
        out = full[La + Lb - 2 : La + Lb - 2 + L].copy()
    else:
        A = as_interval_array(a)
        B = as_interval_array(b)
        ta = IntervalArray(_two_sided(A.lo), _two_sided(A.hi), A.tainted)
        tb = IntervalArray(_two_sided(B.lo), _two_sided(B.hi), B.tainted)
        full = iconvolve(ta, tb)
        out = full[La + Lb - 2 : La + Lb - 2 + L]
    return CosSeq(out) if isinstance(u, CosSeq) or isinstance(v, CosSeq) else out


# --------------------------------------------------------------------------
# Laplacian


def lap_diag(length: int, rigorous: bool = False):
    """Diagonal of the Neumann Laplacian, -(n pi)^2 for n < length."""
    n2 = np.arange(length, dtype=np.float64) ** 2
    if not rigorous:
        return -n2 * np.pi**2
    return -(IntervalArray.point(n2) * PI2)


def inv_lap_diag(length: int, rigorous: bool = False):
    """Diagonal of the pseudo-inverse Laplacian: 0 at n = 0, else -1/(n pi)^2."""
    n2 = np.arange(length, dtype=np.float64) ** 2
    if not rigorous:
        out = np.zeros(length)
        out[1:] = -1.0 / (n2[1:] * np.pi**2)
        return out
    out = IntervalArray.zeros(length)
    if length > 1:
        out[1:] = -(1.0 / (IntervalArray.point(n2[1:]) * PI2))
    return out


def laplacian(u):
    c = _raw(u)
    if isinstance(c, IntervalArray):
        return _wrap(c * lap_diag(len(c), True), u)
    return _wrap(np.asarray(c) * lap_diag(len(c)), u)


def inv_laplacian(u):
    c = _raw(u)
    if isinstance(c, IntervalArray):
        return _wrap(c * inv_lap_diag(len(c), True), u)
    return _wrap(np.asarray(c) * inv_lap_diag(len(c)), u)


# --------------------------------------------------------------------------
# norms


def norm_l1nu(u, w) -> Interval:
    """Enclosure of ||u||_nu = sum_n |u_n| xi_n(nu)."""
    c = _raw(u)
    w = as_weight(w)
    xi = w.xi(len(c))
    if isinstance(c, IntervalArray):
        hi_terms, lo_terms, t = c.mag(), c.mig(), c.tainted
    else:
        hi_terms = lo_terms = np.abs(np.asarray(c, float))
        t = False
    hi = float(nonneg_matvec_upper(hi_terms[None, :], xi.hi)[0]) if np.any(hi_terms) else 0.0
    lo = float(nonneg_matvec_lower(lo_terms[None, :], xi.lo)[0]) if np.any(lo_terms) else 0.0
    return Interval(lo, hi, t)


def norm_float(u, nu: float) -> float:
    """Plain floating-point ||u||_nu, for numerics and diagnostics."""
    c = np.asarray(_raw(u), float)
    xi = 2.0 * float(nu) ** np.arange(len(c))
    xi[0] = 1.0
    return float(np.abs(c) @ xi)


def mult_matrix(u, rows: int, cols: int, rigorous: bool = False):
    """Matrix of v -> u * v acting on the first ``cols`` modes, ``rows`` outputs.

    Entry (k, n) is u_|k-n| + u_{k+n} for n >= 1 and u_k for n = 0.
    """
    c = _raw(u)
    L = len(c)
    k = np.arange(rows)[:, None]
    n = np.arange(cols)[None, :]
    i1 = np.abs(k - n)
    i2 = k + n

    def gather(arr, idx):
        out = np.zeros(idx.shape)
        m = idx < L
        out[m] = arr[idx[m]]
        return out

    if not rigorous and not isinstance(c, IntervalArray):
        c = np.asarray(c, float)
        M = gather(c, i1) + gather(c, i2)
        M[:, 0] = gather(c, np.broadcast_to(k, (rows, 1)))[:, 0]
        return M
    C = as_interval_array(c)
    A = IntervalArray(gather(C.lo, i1), gather(C.hi, i1))
    B = IntervalArray(gather(C.lo, i2), gather(C.hi, i2))
    B.lo[:, 0] = 0.0
    B.hi[:, 0] = 0.0
    M = A + B
    M.tainted = C.tainted
    return M


def column_norm_bounds(L, w, row_offset: int = 0, col_offset: int = 0):
    """Lower/upper bounds of (1/xi_n) sum_k |L_kn| xi_k for every column.

    ``row_offset``/``col_offset`` give the mode index of row 0 / column 0, so
    sub-blocks of larger operators can be normed directly.
    Returns two float arrays (lo, hi).
    """
    w = as_weight(w)
    rows, cols = L.shape
    xi_r = w.xi(row_offset + rows)[row_offset:]
    xi_c = w.xi(col_offset + cols)[col_offset:]
    if isinstance(L, IntervalArray):
        mag, mig = L.mag(), L.mig()
    else:
        mag = mig = np.abs(np.asarray(L, float))
    hi = nonneg_matvec_upper(mag.T, xi_r.hi)
    lo = nonneg_matvec_lower(mig.T, xi_r.lo)
    hi = np.where(hi > 0, np.nextafter(hi / xi_c.lo, np.inf), 0.0)
    lo = np.maximum(np.nextafter(lo / xi_c.hi, -np.inf), 0.0)
    return lo, hi


def colnorm(L, n: int, w) -> Interval:
    """Contribution of column ``n`` to the l1_nu operator norm."""
    cols = L.shape[1]
    if not 0 <= n < cols:
        raise IndexError(f"column {n} out of range for {cols} columns")
    sub = L[:, n : n + 1]
    if not isinstance(sub, IntervalArray):
        sub = np.asarray(sub)
    lo, hi = column_norm_bounds(sub, w, col_offset=n)
    return Interval(lo[0], hi[0], getattr(L, "tainted", False))


def opnorm_columns(L, w) -> Interval:
    """Enclosure of the l1_nu operator norm of a finite matrix extended by zero."""
    lo, hi = column_norm_bounds(L, w)
    return Interval(float(lo.max()), float(hi.max()), getattr(L, "tainted", False))


# --------------------------------------------------------------------------
# pointwise


def c0_bound(u, w) -> Interval:
    """Bound on sup |u(x)|; the l1_nu norm dominates the sup norm for nu >= 1."""
    return norm_l1nu(u, w)


def eval_at(u, x):
    """Evaluate the cosine series at x (float or array); non-rigorous."""
    c = _raw(u)
    if isinstance(c, IntervalArray):
        c = c.mid()
    c = np.asarray(c, float)
    x = np.asarray(x, float)
    n = np.arange(1, len(c))
    vals = c[0] + 2.0 * np.cos(np.pi * np.multiply.outer(x, n)) @ c[1:]
    return float(vals) if vals.ndim == 0 else vals


# --------------------------------------------------------------------------
# text serialization


def dumps(u) -> str:
    """Serialize one sequence or a (d, L) stack in the ``cosseq v1`` format.

    Components of a stack are written side by side, one mode per line.
    """
    c = np.asarray(_raw(u) if isinstance(u, CosSeq) else u, dtype=np.float64)
    if c.ndim == 1:
        c = c[None, :]
    lines = [f"cosseq v1 {c.shape[1]}"]
    for n in range(c.shape[1]):
        lines.append(" ".join(repr(float(x)) for x in c[:, n]))
    return "\n".join(lines) + "\n"


def loads(text: str) -> np.ndarray:
    """Parse ``cosseq v1`` text; returns an array of shape (d, L)."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValueError("empty cosseq file")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "cosseq" or head[1] != "v1":
        raise ValueError(f"bad cosseq header: {lines[0]!r}")
    L = int(head[2])
    rows = [[float(t) for t in ln.split()] for ln in lines[1:]]
    if len(rows) != L:
        raise ValueError(f"cosseq header announces {L} coefficients, found {len(rows)}")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError("inconsistent number of components per line")
    return np.array(rows, dtype=np.float64).T


def save(path, u) -> None:
    Path(path).write_text(dumps(u))


def load(path) -> np.ndarray:
    return loads(Path(path).read_text())
