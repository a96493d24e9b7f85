"""The three problem families, all written as F(u) = Lap Phi(u) + R(u).

Each family supplies ``Phi`` and ``R`` as quadratic maps on d sequences,
which is enough to produce F, its Jacobian and its (constant) second
derivative generically:

* scalar:  Phi(u) = u^2,  R(u) = alpha u - beta u^2 + g
* SKT:     Phi_i = (d_i + d_ii u_i + d_ij u_j) u_i,
           R_1 = (r1 - a1 u1 - b1 u2) u1,  R_2 = (r2 - b2 u1 - a2 u2) u2
* DAE:     unknowns (u, v) with v = u/(gamma + u); Phi = (0, v),
           R = (u - gamma v - u v,  alpha u - beta u^2 + g)

The SKT reaction uses competitive (minus) signs.

Sequence stacks are float arrays of shape (d, L) or :class:`IntervalArray`
of the same shape.  Parameters are kept as exact fractions; ``float`` and
interval views are derived on demand.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from fractions import Fraction

import numpy as np

from . import coseq
from .rint import IntervalArray, as_interval_array, enclose

__all__ = [
    "DegenerateCompetition",
    "QuadMap",
    "ScalarQuadraticProblem",
    "SKTProblem",
    "RationalDiffusionProblem",
    "HomogeneousStates",
    "SKT_TABLE",
    "skt_row",
    "DEFAULT_FORCING",
    "residual_F",
    "jacobian_apply",
    "jacobian_matrix",
    "homogeneous_states",
    "regime_classify",
    "as_stack",
]


class DegenerateCompetition(ValueError):
    """Raised when a1 a2 = b1 b2 and no coexistence state exists."""


def frac(x) -> Fraction:
    """Exact rational from a number or string; floats are read as decimals."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


# forcing term 1/2 + 3cos(pi x) + 2cos(2pi x) - cos(3pi x) + 6cos(4pi x)
DEFAULT_FORCING = tuple(Fraction(x) for x in ("0.5", "1.5", "1", "-0.5", "3"))


# --------------------------------------------------------------------------
# stacks of sequences


def as_stack(u, dim: int | None = None):
    """Normalize a sequence, pair or (d, L) array to a (d, L) stack."""
    if isinstance(u, IntervalArray):
        return u if u.ndim == 2 else u.reshape(1, -1)
    if isinstance(u, coseq.CosSeq):
        return as_stack(u.coeffs, dim)
    if isinstance(u, (tuple, list)) and u and isinstance(u[0], (coseq.CosSeq, np.ndarray, list, tuple, IntervalArray)):
        parts = [p.coeffs if isinstance(p, coseq.CosSeq) else p for p in u]
        if any(isinstance(p, IntervalArray) for p in parts):
            parts = [as_interval_array(p) for p in parts]
            L = max(len(p) for p in parts)
            parts = [coseq.pad(p, L) for p in parts]
            return IntervalArray(np.stack([p.lo for p in parts]), np.stack([p.hi for p in parts]),
                                 any(p.tainted for p in parts))
        L = max(len(p) for p in parts)
        return np.stack([coseq.pad(np.asarray(p, float), L) for p in parts])
    a = np.asarray(u, dtype=np.float64)
    if a.ndim == 1:
        a = a[None, :]
    if dim is not None and a.shape[0] != dim:
        raise ValueError(f"expected {dim} components, got {a.shape[0]}")
    return a


def _row(u, i):
    return u[i]


def _stack_rows(rows):
    if any(isinstance(r, IntervalArray) for r in rows):
        rows = [as_interval_array(r) for r in rows]
        L = max(len(r) for r in rows)
        rows = [coseq.pad(r, L) for r in rows]
        return IntervalArray(np.stack([r.lo for r in rows]), np.stack([r.hi for r in rows]),
                             any(r.tainted for r in rows))
    L = max(len(r) for r in rows)
    return np.stack([coseq.pad(np.asarray(r, float), L) for r in rows])


def _add(a, b):
    a, b = coseq._align(a, b)
    return a + b


def _scale(c, a, rigorous):
    if c == 0:
        return None
    if rigorous:
        return enclose(c) * as_interval_array(a)
    return float(c) * np.asarray(a, float)


def _zero(length, rigorous):
    return IntervalArray.zeros(length) if rigorous else np.zeros(length)


def _unit_seq(rigorous):
    return IntervalArray.point(coseq.unit(1)) if rigorous else coseq.unit(1)


# --------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadMap:
    """u -> const + lin u + sum q * u_j * u_k, componentwise over d sequences.

    ``quad`` maps (i, j, k) with j <= k to the coefficient of u_j * u_k in
    component i.
    """

    dim: int
    const: tuple  # per component: tuple of Fractions (possibly empty)
    lin: tuple  # d x d Fractions
    quad: dict

    def evaluate(self, u, rigorous: bool = False):
        u = as_stack(u)
        L = u.shape[1]
        out = []
        for i in range(self.dim):
            acc = _zero(2 * L - 1, rigorous)
            if self.const[i]:
                acc = _add(acc, _const_seq(self.const[i], rigorous))
            for j in range(self.dim):
                t = _scale(self.lin[i][j], u[j], rigorous)
                if t is not None:
                    acc = _add(acc, t)
            for (ii, j, k), q in self.quad.items():
                if ii != i or q == 0:
                    continue
                acc = _add(acc, _scale(q, coseq.conv(u[j], u[k], rigorous or None), rigorous))
            out.append(coseq.pad(acc, max(2 * L - 1, len(acc))))
        return _stack_rows(out)

    def derivative(self, u, rigorous: bool = False):
        """d x d nested list of sequences D_ij = d(component i)/d(u_j)."""
        u = as_stack(u)
        D = [[None] * self.dim for _ in range(self.dim)]
        for i in range(self.dim):
            for j in range(self.dim):
                c = self.lin[i][j]
                D[i][j] = _scale(c, _unit_seq(rigorous), rigorous) if c != 0 else None
        for (i, j, k), q in self.quad.items():
            if q == 0:
                continue
            if j == k:
                terms = [(j, 2 * q, k)]
            else:
                terms = [(j, q, k), (k, q, j)]
            for col, coef, var in terms:
                t = _scale(coef, u[var], rigorous)
                D[i][col] = t if D[i][col] is None else _add(D[i][col], t)
        L = u.shape[1]
        for i in range(self.dim):
            for j in range(self.dim):
                if D[i][j] is None:
                    D[i][j] = _zero(1, rigorous)
                D[i][j] = coseq.pad(D[i][j], L)
        return D

    def hessian(self):
        """H[i][j][k] with D^2 component_i (v, w) = sum_jk H[i][j][k] v_j * w_k."""
        d = self.dim
        H = [[[Fraction(0)] * d for _ in range(d)] for _ in range(d)]
        for (i, j, k), q in self.quad.items():
            if j == k:
                H[i][j][j] += 2 * q
            else:
                H[i][j][k] += q
                H[i][k][j] += q
        return H

    def second_derivative(self, v, w, rigorous: bool = False):
        v, w = as_stack(v), as_stack(w)
        H = self.hessian()
        out = []
        for i in range(self.dim):
            acc = _zero(v.shape[1] + w.shape[1] - 1, rigorous)
            for j in range(self.dim):
                for k in range(self.dim):
                    if H[i][j][k] != 0:
                        acc = _add(acc, _scale(H[i][j][k], coseq.conv(v[j], w[k], rigorous or None), rigorous))
            out.append(acc)
        return _stack_rows(out)


def _const_seq(c, rigorous):
    if rigorous:
        ivs = [enclose(x) for x in c]
        return IntervalArray([i.lo for i in ivs], [i.hi for i in ivs])
    return np.array([float(x) for x in c])


# --------------------------------------------------------------------------


class _Problem:
    """Shared behaviour; subclasses define ``phi()``, ``reaction()``, ``family``."""

    family = ""
    dim = 1

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "g":
                object.__setattr__(self, f.name, tuple(frac(x) for x in v))
            else:
                object.__setattr__(self, f.name, frac(v))

    def params(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def with_param(self, name: str, value):
        return replace(self, **{name: frac(value)})

    def F(self, u, rigorous: bool = False):
        """Residual Lap Phi(u) + R(u) of a (d, L) stack; support 2L - 1."""
        u = as_stack(u, self.dim)
        ph = self.phi().evaluate(u, rigorous)
        re = self.reaction().evaluate(u, rigorous)
        L = max(ph.shape[1], re.shape[1])
        rows = []
        for i in range(self.dim):
            a = coseq.laplacian(coseq.pad(ph[i], L))
            rows.append(_add(a, coseq.pad(re[i], L)))
        return _stack_rows(rows)

    def DPhi(self, u, rigorous: bool = False):
        return self.phi().derivative(u, rigorous)

    def DR(self, u, rigorous: bool = False):
        return self.reaction().derivative(u, rigorous)

    def jacobian_blocks(self, u, rows: int, cols: int, rigorous: bool = False):
        """Jacobian DF(u) truncated to ``rows`` x ``cols`` modes per block.

        Returns a (d*rows) x (d*cols) float matrix or IntervalArray, ordered
        component-major (all modes of component 0 first).
        """
        u = as_stack(u, self.dim)
        dphi = self.DPhi(u, rigorous)
        dr = self.DR(u, rigorous)
        lap = coseq.lap_diag(rows, rigorous)
        d = self.dim
        if rigorous:
            J = IntervalArray.zeros((d * rows, d * cols))
        else:
            J = np.zeros((d * rows, d * cols))
        for i in range(d):
            for j in range(d):
                blk = None
                if _nonzero(dphi[i][j]):
                    mp = coseq.mult_matrix(dphi[i][j], rows, cols, rigorous)
                    if rigorous:
                        blk = mp * IntervalArray(lap.lo[:, None], lap.hi[:, None])
                    else:
                        blk = mp * lap[:, None]
                if _nonzero(dr[i][j]):
                    mr = coseq.mult_matrix(dr[i][j], rows, cols, rigorous)
                    blk = mr if blk is None else blk + mr
                if blk is not None:
                    J[i * rows:(i + 1) * rows, j * cols:(j + 1) * cols] = blk
        return J

    def D2F(self, v, w, rigorous: bool = False):
        """Second derivative (constant) applied to (v, w)."""
        ph = self.phi().second_derivative(v, w, rigorous)
        re = self.reaction().second_derivative(v, w, rigorous)
        rows = []
        for i in range(self.dim):
            rows.append(_add(coseq.laplacian(ph[i]), re[i]))
        return _stack_rows(rows)


def _nonzero(seq) -> bool:
    if isinstance(seq, IntervalArray):
        return bool(np.any(seq.lo != 0) or np.any(seq.hi != 0))
    return bool(np.any(np.asarray(seq) != 0))


@dataclass(frozen=True)
class ScalarQuadraticProblem(_Problem):
    """Phi(u) = u^2, R(u) = alpha u - beta u^2 + g."""

    alpha: Fraction = Fraction(1)
    beta: Fraction = Fraction(1)
    g: tuple = DEFAULT_FORCING

    family = "scalar"
    dim = 1

    def phi(self) -> QuadMap:
        return QuadMap(1, ((),), ((Fraction(0),),), {(0, 0, 0): Fraction(1)})

    def reaction(self) -> QuadMap:
        return QuadMap(1, (self.g,), ((self.alpha,),), {(0, 0, 0): -self.beta})


@dataclass(frozen=True)
class SKTProblem(_Problem):
    """Two-species cross-diffusion competition model."""

    d1: Fraction = Fraction(0)
    d2: Fraction = Fraction(0)
    d12: Fraction = Fraction(0)
    d21: Fraction = Fraction(0)
    d11: Fraction = Fraction(0)
    d22: Fraction = Fraction(0)
    r1: Fraction = Fraction(0)
    r2: Fraction = Fraction(0)
    a1: Fraction = Fraction(0)
    a2: Fraction = Fraction(0)
    b1: Fraction = Fraction(0)
    b2: Fraction = Fraction(0)

    family = "skt"
    dim = 2

    def phi(self) -> QuadMap:
        Z = Fraction(0)
        return QuadMap(2, ((), ()), ((self.d1, Z), (Z, self.d2)), {
            (0, 0, 0): self.d11, (0, 0, 1): self.d12,
            (1, 0, 1): self.d21, (1, 1, 1): self.d22,
        })

    def reaction(self) -> QuadMap:
        Z = Fraction(0)
        return QuadMap(2, ((), ()), ((self.r1, Z), (Z, self.r2)), {
            (0, 0, 0): -self.a1, (0, 0, 1): -self.b1,
            (1, 0, 1): -self.b2, (1, 1, 1): -self.a2,
        })


@dataclass(frozen=True)
class RationalDiffusionProblem(_Problem):
    """Phi(u) = u/(gamma + u), handled through the unknowns (u, v = Phi(u))."""

    gamma: Fraction = Fraction(3)
    alpha: Fraction = Fraction(1)
    beta: Fraction = Fraction(1)
    g: tuple = DEFAULT_FORCING

    family = "dae"
    dim = 2

    def __post_init__(self):
        super().__post_init__()
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")

    def phi(self) -> QuadMap:
        Z = Fraction(0)
        return QuadMap(2, ((), ()), ((Z, Z), (Z, Fraction(1))), {})

    def reaction(self) -> QuadMap:
        Z = Fraction(0)
        return QuadMap(2, ((), self.g), ((Fraction(1), -self.gamma), (self.alpha, Z)), {
            (0, 0, 1): Fraction(-1), (1, 0, 0): -self.beta,
        })


# table of SKT parameter sets, rows 1..4
SKT_TABLE = {
    1: dict(d1="0.005", d2="0.005", d12="3", d21="0", d11="0", d22="0",
            r1="5", r2="2", a1="3", a2="3", b1="1", b2="1"),
    2: dict(d1="0.005", d2="0.005", d12="100", d21="100", d11="0", d22="0",
            r1="15/2", r2="16/7", a1="4", a2="2", b1="6", b2="1"),
    3: dict(d1="0.05", d2="0.05", d12="3", d21="0", d11="0", d22="0",
            r1="15", r2="5", a1="1", a2="1", b1="0.5", b2="3"),
    4: dict(d1="-0.007", d2="-0.007", d12="3", d21="0.002", d11="0.05", d22="0.05",
            r1="5", r2="2", a1="3", a2="3", b1="1", b2="1"),
}


def skt_row(row: int) -> SKTProblem:
    return SKTProblem(**SKT_TABLE[row])


# --------------------------------------------------------------------------
# operations


def residual_F(p, u):
    """F(u); a CosSeq for scalar input, a (d, L) stack otherwise."""
    out = p.F(u, rigorous=_is_rig(u))
    if p.dim == 1 and isinstance(u, coseq.CosSeq):
        return coseq.CosSeq(out[0])
    return out


def _is_rig(u) -> bool:
    if isinstance(u, coseq.CosSeq):
        return u.rigorous
    if isinstance(u, (tuple, list)):
        return any(_is_rig(x) for x in u)
    return isinstance(u, IntervalArray)


def jacobian_apply(p, u, v):
    """DF(u) v = Lap(DPhi(u) v) + DR(u) v."""
    rig = _is_rig(u) or _is_rig(v)
    u = as_stack(u, p.dim)
    v = as_stack(v, p.dim)
    dphi, dr = p.DPhi(u, rig), p.DR(u, rig)
    rows = []
    for i in range(p.dim):
        a = _zero(1, rig)
        b = _zero(1, rig)
        for j in range(p.dim):
            a = _add(a, coseq.conv(dphi[i][j], v[j], rig or None))
            b = _add(b, coseq.conv(dr[i][j], v[j], rig or None))
        rows.append(_add(coseq.laplacian(a), b))
    return _stack_rows(rows)


def jacobian_matrix(p, u, M: int, rigorous: bool = True):
    """Pi_M DF(u) Pi_M as a (d M) x (d M) matrix (interval by default)."""
    return p.jacobian_blocks(u, M, M, rigorous)


@dataclass(frozen=True)
class HomogeneousStates:
    coexistence: tuple | None
    extinction1: tuple
    extinction2: tuple


def homogeneous_states(p: SKTProblem) -> HomogeneousStates:
    """Constant steady states of the SKT reaction terms, as exact fractions."""
    ext1 = (p.r1 / p.a1 if p.a1 != 0 else None, Fraction(0))
    ext2 = (Fraction(0), p.r2 / p.a2 if p.a2 != 0 else None)
    den = p.a1 * p.a2 - p.b1 * p.b2
    if den == 0:
        raise DegenerateCompetition("a1 a2 = b1 b2: no isolated coexistence state")
    co = ((p.r1 * p.a2 - p.r2 * p.b1) / den, (p.r2 * p.a1 - p.r1 * p.b2) / den)
    return HomogeneousStates(co, ext1, ext2)


def regime_classify(p: SKTProblem) -> str:
    """'weak', 'strong', 'case3' or 'degenerate' for the kinetic system."""
    if p.r2 == 0 or p.a2 == 0 or p.b2 == 0:
        raise ValueError("classification needs nonzero r2, a2, b2")
    lo, mid, hi = p.b1 / p.a2, p.r1 / p.r2, p.a1 / p.b2
    if lo == mid == hi:
        return "degenerate"
    if lo < mid < hi:
        return "weak"
    if hi < mid < lo:
        return "strong"
    return "case3"
