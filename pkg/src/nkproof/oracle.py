"""Independent, non-rigorous cross-checks for the test suite.

Nothing in the certification path imports this module.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import coseq
from .problems import as_stack


@dataclass(frozen=True)
class GridSolution:
    x: np.ndarray  # (K,) strictly increasing in [0, 1]
    values: np.ndarray  # (d, K)

    def __post_init__(self):
        x = np.asarray(self.x, float)
        v = np.atleast_2d(np.asarray(self.values, float))
        if x.size < 3:
            raise ValueError("grid needs at least 3 points")
        if np.any(np.diff(x) <= 0) or x[0] < 0 or x[-1] > 1:
            raise ValueError("grid must be strictly increasing inside [0, 1]")
        if v.shape[1] != x.size:
            raise ValueError("values do not match the grid")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", v)

    @classmethod
    def sample(cls, u, K: int) -> "GridSolution":
        x = np.linspace(0.0, 1.0, K)
        u = as_stack(u)
        return cls(x, np.stack([coseq.eval_at(r, x) for r in u]))


def opnorm_lower_bound(apply_L, w, trials: int, length: int = 64, seed: int = 0) -> float:
    """max ||L v|| / ||v|| over unit basis vectors and random test sequences.

    ``apply_L`` maps a 1-D float sequence to a 1-D float sequence.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    nu = coseq.as_weight(w).value
    best = 0.0
    for n in range(length):
        e = np.zeros(length)
        e[n] = 1.0
        best = max(best, coseq.norm_float(apply_L(e), nu) / coseq.norm_float(e, nu))
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        v = rng.standard_normal(length) * nu ** -np.arange(length)
        nv = coseq.norm_float(v, nu)
        if nv > 0:
            best = max(best, coseq.norm_float(apply_L(v), nu) / nv)
    return best


def fd_residual(p, sol: GridSolution) -> float:
    """Max centered-difference residual of Lap Phi(u) + R(u) on a uniform grid.

    The Neumann ends use the mirror ghost point, i.e. (2 f_1 - 2 f_0) / h^2.
    """
    x, u = sol.x, sol.values
    if x.size < 101:
        raise ValueError("grid needs at least 101 points")
    h = x[1] - x[0]
    if not np.allclose(np.diff(x), h):
        raise ValueError("grid must be uniform")
    phi = _pointwise(p.phi(), u)
    rea = _pointwise(p.reaction(), u)
    lap = np.empty_like(phi)
    lap[:, 1:-1] = (phi[:, 2:] - 2 * phi[:, 1:-1] + phi[:, :-2]) / h**2
    lap[:, 0] = 2 * (phi[:, 1] - phi[:, 0]) / h**2
    lap[:, -1] = 2 * (phi[:, -2] - phi[:, -1]) / h**2
    return float(np.abs(lap + rea).max())


def _pointwise(q, u):
    """Evaluate a QuadMap on sampled values; constants are cosine series in x."""
    d, K = u.shape
    x = np.linspace(0.0, 1.0, K)
    out = np.zeros((q.dim, K))
    for i in range(q.dim):
        if q.const[i]:
            out[i] += coseq.eval_at(np.array([float(c) for c in q.const[i]]), x)
        for j in range(d):
            out[i] += float(q.lin[i][j]) * u[j]
    for (i, j, k), c in q.quad.items():
        out[i] += float(c) * u[j] * u[k]
    return out


_OPS = {"+": operator.add, "-": operator.sub, "*": operator.mul, "/": operator.truediv}


def bigref(expr):
    """Exact rational evaluation of a nested (op, a, b) tuple or a number.

    >>> bigref(("/", ("-", ("*", "15/2", 2), ("*", 6, "16/7")), ("-", ("*", 4, 2), ("*", 6, 1))))
    Fraction(9, 14)
    """
    if isinstance(expr, tuple):
        op, a, b = expr
        return _OPS[op](bigref(a), bigref(b))
    if isinstance(expr, float):
        return Fraction(repr(expr))
    return Fraction(expr)
