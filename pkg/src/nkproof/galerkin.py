"""Floating-point numerics that produce the inputs of a validation.

Nothing here is rigorous; every output is re-audited by :mod:`nkproof.nkcore`.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import coseq
from .problems import as_stack, homogeneous_states

log = logging.getLogger(__name__)


class NonConvergence(RuntimeError):
    """Newton did not reach the requested tolerance."""

    def __init__(self, msg, history=None, u=None):
        super().__init__(msg)
        self.history = history or []
        self.u = u


class SingularJacobian(np.linalg.LinAlgError):
    pass


class SingularMultiplication(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class NewtonConfig:
    max_iters: int = 60
    residual_tol: float = 1e-13
    damping: float = 1.0
    max_halvings: int = 8
    floor_tol: float = 1e-10

    def __post_init__(self):
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")


@dataclass
class NewtonResult:
    u: np.ndarray  # (d, N)
    iterations: int
    residuals: list = field(default_factory=list)  # finite l1 residual per iterate
    steps: list = field(default_factory=list)  # l1 norm of each Newton step

    @property
    def residual(self) -> float:
        return self.residuals[-1]

    def quadratic_constants(self, below: float = 1e-4) -> list[float]:
        """Ratios step_{k+1} / step_k^2 once steps are small: C in e+ <= C e^2."""
        out = []
        for a, b in zip(self.steps, self.steps[1:]):
            if 1e-11 < a < below and b > 0:
                out.append(b / a**2)
        return out


def _flat_residual(p, u, N):
    return p.F(u)[:, :N].reshape(-1)


def solve_newton(p, N: int, guess, cfg: NewtonConfig | None = None) -> NewtonResult:
    """Newton on Pi_N F Pi_N = 0 with step halving on residual increase.

    Converged means the Newton correction ||DF^{-1} F||_1 is below
    ``residual_tol * max(1, ||u||_1)``; a correction that stalls below
    ``floor_tol`` (floating-point floor) is also accepted.
    """
    cfg = cfg or NewtonConfig()
    u = as_stack(guess, p.dim).astype(float)
    if u.shape[1] > N:
        if np.any(u[:, N:] != 0):
            raise ValueError("guess must be supported on the first N modes")
        u = u[:, :N]
    u = np.stack([coseq.pad(r, N) for r in u])
    d = p.dim
    res = _flat_residual(p, u, N)
    rn = float(np.abs(res).sum())
    out = NewtonResult(u.copy(), 0, [rn], [])
    stall = 0
    for it in range(1, cfg.max_iters + 1):
        J = p.jacobian_blocks(u, N, N)
        try:
            delta = np.linalg.solve(J, -res)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(str(exc)) from exc
        if not np.all(np.isfinite(delta)):
            raise SingularJacobian("non-finite Newton step")
        step = float(np.abs(delta).sum())
        lam = cfg.damping
        for _ in range(cfg.max_halvings + 1):
            trial = u + lam * delta.reshape(d, N)
            tres = _flat_residual(p, trial, N)
            trn = float(np.abs(tres).sum())
            if np.isfinite(trn) and (trn < rn or step < 1e-8 * max(1.0, np.abs(u).sum())):
                break
            lam *= 0.5
        u, res, rn = trial, tres, trn
        out.u = u.copy()
        out.iterations = it
        out.residuals.append(rn)
        out.steps.append(step * lam)
        log.debug("newton it=%d step=%.3e residual=%.3e lam=%.3g", it, step, rn, lam)
        scale = max(1.0, float(np.abs(u).sum()))
        if step <= cfg.residual_tol * scale and lam == cfg.damping:
            return out
        if len(out.steps) >= 2 and step <= cfg.floor_tol * scale and out.steps[-1] >= 0.5 * out.steps[-2]:
            stall += 1
            if stall >= 2:
                return out
    raise NonConvergence(
        f"Newton did not converge in {cfg.max_iters} iterations (last step {out.steps[-1]:.3e})",
        out.residuals, out.u,
    )


# --------------------------------------------------------------------------
# approximate inverses


def _mult_block(seqs, N):
    """Block matrix with block (j, k) = Pi_N M(seqs[k][j]) Pi_N (transposed blocks)."""
    d = len(seqs)
    B = np.zeros((d * N, d * N))
    for j in range(d):
        for k in range(d):
            B[j * N:(j + 1) * N, k * N:(k + 1) * N] = coseq.mult_matrix(seqs[k][j], N, N)
    return B


def left_inverse(D, N):
    """W with W * D ~ I for a d x d matrix of sequences, truncated to N modes."""
    d = len(D)
    B = _mult_block(D, N)
    W = [[None] * d for _ in range(d)]
    for i in range(d):
        rhs = np.zeros(d * N)
        rhs[i * N] = 1.0
        try:
            sol = np.linalg.solve(B, rhs)
        except np.linalg.LinAlgError as exc:
            raise SingularMultiplication(str(exc)) from exc
        if not np.all(np.isfinite(sol)):
            raise SingularMultiplication("non-finite approximate reciprocal")
        for k in range(d):
            W[i][k] = sol[k * N:(k + 1) * N]
    return W


def matrix_defect(W, D, nu: float) -> float:
    """| || I - W * D ||_nu |_1 in floating point."""
    d = len(D)
    col = np.zeros(d)
    for j in range(d):
        for i in range(d):
            acc = np.zeros(1)
            for k in range(d):
                acc = _fadd(acc, coseq.conv(W[i][k], D[k][j]))
            if i == j:
                acc = _fadd(acc, -coseq.unit(1))
            col[j] += coseq.norm_float(acc, nu)
    return float(col.max())


def _fadd(a, b):
    a, b = coseq._align(np.asarray(a, float), np.asarray(b, float))
    return a + b


def compute_wbar(p, ubar, N: int, nu: float = 1.0):
    """Approximate reciprocal of the diffusion derivative on Pi_N.

    Scalar: w * Phi'(u) ~ 1.  SKT: W * DPhi(u) ~ I (2 x 2).  DAE: w * (1 - v) ~ 1.
    Returns the reciprocal (array, or nested list for SKT) and its defect.
    """
    u = as_stack(ubar, p.dim)[:, :N]
    if p.family == "dae":
        base = coseq.unit(N) - coseq.pad(u[1], N)
        W = left_inverse([[base]], N)
        w = W[0][0]
        delta = matrix_defect(W, [[base]], nu)
        out = w
    else:
        D = p.DPhi(u)
        D = [[coseq.project(D[i][j], N) for j in range(p.dim)] for i in range(p.dim)]
        W = left_inverse(D, N)
        delta = matrix_defect(W, D, nu)
        out = W[0][0] if p.dim == 1 else W
    if delta >= 0.5:
        warnings.warn(f"approximate reciprocal defect {delta:.3g} >= 0.5", RuntimeWarning, stacklevel=2)
    return out, delta


def compute_sigma(wbar, u1, gamma, N: int):
    """Pi_N (w * (gamma + u1))."""
    base = coseq.pad(np.asarray(u1, float), max(len(u1), 1)).copy()
    base[0] += float(Fraction(gamma))
    full = coseq.conv(np.asarray(wbar, float), base)
    return coseq.project(full, N)


def compute_Abar(p, ubar, N: int, pad_factor: float = 2.0) -> np.ndarray:
    """Pi_N (Pi_K DF Pi_K)^{-1} Pi_N with K = ceil(pad_factor N), per block."""
    if pad_factor < 1:
        raise ValueError("pad_factor must be >= 1")
    K = int(math.ceil(pad_factor * N))
    u = as_stack(ubar, p.dim)
    J = p.jacobian_blocks(u, K, K)
    try:
        Jinv = np.linalg.inv(J)
    except np.linalg.LinAlgError as exc:
        raise SingularJacobian(str(exc)) from exc
    if not np.all(np.isfinite(Jinv)):
        raise SingularJacobian("non-finite inverse")
    idx = np.concatenate([np.arange(i * K, i * K + N) for i in range(p.dim)])
    return Jinv[np.ix_(idx, idx)]


# --------------------------------------------------------------------------
# initial guesses and continuation


@dataclass(frozen=True)
class GuessRecipe:
    """Homogeneous base state plus cosine perturbations.

    ``modes`` holds (mode index, amplitude) pairs; the amplitude multiplies
    the base-state magnitude of each component, with alternating sign between
    components so that the two species start out segregated.
    """

    base: str = "coexistence"
    modes: tuple = ()
    value: tuple | None = None
    continuation: tuple | None = None  # (parameter name, start, end, steps)
    coarse: int | None = None  # solve first on this many modes, then refine

    def build(self, p, N: int) -> np.ndarray:
        state = self.base_state(p)
        u = np.zeros((p.dim, N))
        u[:, 0] = state
        mag = np.maximum(np.abs(state), 1e-3)
        for k, amp in self.modes:
            if not 0 <= k < N:
                raise ValueError(f"mode {k} outside 0..{N - 1}")
            for i in range(p.dim):
                sign = 1.0 if i % 2 == 0 else -1.0
                # amplitude A of A cos(k pi x) is stored as A/2 at mode k >= 1
                u[i, k] += sign * amp * mag[i] * (0.5 if k else 1.0)
        return u

    def base_state(self, p) -> np.ndarray:
        if self.value is not None:
            return np.array([float(Fraction(v)) for v in self.value])
        if p.family == "scalar":
            return np.array([_scalar_constant_root(p)])
        if p.family == "dae":
            c = _scalar_constant_root(p)
            return np.array([c, c / (float(p.gamma) + c)])
        hs = homogeneous_states(p)
        st = {"coexistence": hs.coexistence, "extinction1": hs.extinction1,
              "extinction2": hs.extinction2}[self.base]
        return np.array([float(x) for x in st])


def _scalar_constant_root(p) -> float:
    """Positive root of alpha c - beta c^2 + g_0 = 0 (the g = mean case)."""
    a, b, g0 = float(p.alpha), float(p.beta), float(p.g[0]) if p.g else 0.0
    if b == 0:
        return -g0 / a if a else 1.0
    disc = a * a + 4 * b * g0
    if disc < 0:
        return 1.0
    return (a + math.sqrt(disc)) / (2 * b)


@dataclass
class ContinuationStep:
    value: Fraction
    u: np.ndarray | None
    error: str | None = None


def continuation_run(p, name: str, start, end, steps: int, N: int, guess,
                     cfg: NewtonConfig | None = None) -> list[ContinuationStep]:
    """Natural-parameter continuation; each step is seeded by the previous one.

    Stops at the first failure and returns the partial path (the failing step
    is included with its error message).
    """
    start, end = Fraction(start), Fraction(end)
    steps = max(int(steps), 1)
    vals = [start + (end - start) * Fraction(i, steps) for i in range(steps + 1)] if steps > 1 or start != end else [start]
    if steps == 1 and start != end:
        vals = [start, end]
    out = []
    u = as_stack(guess, p.dim)
    for v in vals:
        q = p.with_param(name, v)
        try:
            res = solve_newton(q, N, u, cfg)
        except (NonConvergence, SingularJacobian) as exc:
            out.append(ContinuationStep(v, None, str(exc)))
            break
        u = res.u
        out.append(ContinuationStep(v, u.copy()))
    return out


def solve_recipe(p, N: int, recipe: GuessRecipe, cfg: NewtonConfig | None = None) -> NewtonResult:
    """Build the guess, follow the optional continuation path, then solve at ``p``."""
    cfg = cfg or NewtonConfig()
    M = min(recipe.coarse or N, N)
    if recipe.continuation:
        name, start, end, steps = recipe.continuation
        q = p.with_param(name, start)
        path = continuation_run(q, name, start, end, steps, M, recipe.build(q, M), cfg)
        if path[-1].u is None:
            raise NonConvergence(f"continuation failed at {name}={path[-1].value}: {path[-1].error}")
        guess = path[-1].u
    else:
        guess = recipe.build(p, M)
    if M < N:
        guess = solve_newton(p, M, guess, cfg).u
        guess = np.stack([coseq.pad(r, N) for r in guess])
    return solve_newton(p, N, guess, cfg)
