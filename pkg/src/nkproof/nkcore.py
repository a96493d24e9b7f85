"""Rigorous Newton-Kantorovich bounds around an approximate steady state.

The approximate inverse is

    A = Abar + (Atil - Pi_N Atil Pi_N),    Atil = M(T) Lap^{-1} + M(S),

with T, S d x d matrices of finite cosine sequences chosen per family.  Every
quantity that decides ``conditions_ok`` is an :class:`~nkproof.rint.Interval`
built from outward-rounded operations.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import coseq
from .problems import _nonzero, as_stack, frac
from .rint import Interval, IntervalArray, enclose, imatmul, interval_max

__all__ = [
    "ConditionsFailed",
    "ApproxInverse",
    "Certificate",
    "apply_A",
    "bound_Y",
    "bound_Z1",
    "bound_Z2",
    "nk_radius",
    "check_hyp_w",
    "certify",
    "certify_solution",
    "solution_hash",
]


class ConditionsFailed(ArithmeticError):
    """The Newton-Kantorovich inequalities could not be verified."""

    def __init__(self, msg, which=None, certificate=None):
        super().__init__(msg)
        self.which = which
        self.certificate = certificate


ZERO = Interval(0.0)


def _nlap_tail(N: int) -> Interval:
    """(N pi)^2 as an interval."""
    return enclose(N * N) * coseq.PI2


# --------------------------------------------------------------------------
# the operator A


@dataclass
class ApproxInverse:
    Abar: np.ndarray  # (d N) x (d N) floats
    T: list  # d x d, entries float arrays or None
    S: list
    N: int
    dim: int
    kind: str
    wbar: object = None
    sigma: np.ndarray | None = None

    @classmethod
    def from_parts(cls, family, N, Abar, wbar, sigma=None):
        """Tail layout per family.

        scalar: T = [[w]].  skt: T = W (2 x 2).
        dae: T = [[0, sigma], [0, 1]], S = [[w, 0], [0, 0]].
        """
        Abar = np.asarray(Abar, float)
        if family == "scalar":
            return cls(Abar, [[_seq(wbar, N)]], [[None]], N, 1, "scalar", wbar)
        if family == "skt":
            T = [[_seq(wbar[i][j], N) for j in range(2)] for i in range(2)]
            return cls(Abar, T, [[None, None], [None, None]], N, 2, "skt", wbar)
        if family == "dae":
            if sigma is None:
                raise ValueError("the rational-diffusion tail needs sigma")
            T = [[None, _seq(sigma, N)], [None, coseq.unit(1)]]
            S = [[_seq(wbar, N), None], [None, None]]
            return cls(Abar, T, S, N, 2, "dae", wbar, _seq(sigma, N))
        raise ValueError(f"unknown family {family!r}")

    def __post_init__(self):
        n = self.dim * self.N
        if self.Abar.shape != (n, n):
            raise ValueError(f"Abar must be {n} x {n}, got {self.Abar.shape}")

    def block(self, i: int, k: int) -> np.ndarray:
        N = self.N
        return self.Abar[i * N:(i + 1) * N, k * N:(k + 1) * N]

    def assemble(self, cols: int, rows: int | None = None) -> IntervalArray:
        """Dense enclosure of A restricted to ``cols`` input modes per component.

        Output support is ``cols + N - 1`` modes per component unless ``rows``
        is given (rows beyond it are dropped, so pass enough of them).
        """
        N, d = self.N, self.dim
        rows = rows if rows is not None else max(cols + N - 1, N)
        ilap = coseq.inv_lap_diag(cols, True)
        ilap = IntervalArray(ilap.lo[None, :], ilap.hi[None, :])
        out = IntervalArray.zeros((d * rows, d * cols))
        nr, nc = min(rows, N), min(cols, N)
        for i in range(d):
            for k in range(d):
                blk = None
                if self.T[i][k] is not None:
                    blk = coseq.mult_matrix(self.T[i][k], rows, cols, True) * ilap
                if self.S[i][k] is not None:
                    m = coseq.mult_matrix(self.S[i][k], rows, cols, True)
                    blk = m if blk is None else blk + m
                if blk is None:
                    blk = IntervalArray.zeros((rows, cols))
                blk[:nr, :nc] = IntervalArray.point(self.block(i, k)[:nr, :nc])
                out[i * rows:(i + 1) * rows, k * cols:(k + 1) * cols] = blk
        return out


def _seq(x, N):
    a = np.asarray(x, float)
    if len(a) > N and np.any(a[N:] != 0):
        raise ValueError("tail sequences must lie in Pi_N")
    return coseq.pad(a[:N], N) if len(a) >= N else a


def _flat(u, d):
    """(d, L) stack -> flat component-major IntervalArray column."""
    u = as_stack(u, d)
    if isinstance(u, IntervalArray):
        return u.reshape(-1)
    return IntervalArray.point(np.asarray(u, float).reshape(-1))


def apply_A(A: ApproxInverse, v) -> IntervalArray:
    """Enclosure of A v for a finitely supported (d, L) stack; returns (d, L + N - 1)."""
    v = as_stack(v, A.dim)
    L = v.shape[1]
    M = A.assemble(L)
    out = imatmul(M, _flat(v, A.dim))
    return out.reshape(A.dim, -1)


def _stack_norm(u, w) -> Interval:
    """sum_i ||u_i||_nu for a (d, L) interval stack."""
    total = ZERO
    for i in range(u.shape[0]):
        total = total + coseq.norm_l1nu(u[i], w)
    return total


# --------------------------------------------------------------------------
# bounds


def bound_Y(p, ubar, A: ApproxInverse, w) -> Interval:
    """Upper bound on ||A F(ubar)|| in the product l1_nu norm."""
    u = as_stack(ubar, p.dim)
    F = p.F(u, rigorous=True)
    return _stack_norm(apply_A(A, F), w)


def _norm_matrix_colsum(Mat) -> Interval:
    """|M|_1: max over columns of the column sums of a matrix of Intervals."""
    d = len(Mat)
    sums = []
    for j in range(d):
        s = ZERO
        for i in range(d):
            s = s + Mat[i][j]
        sums.append(s)
    return interval_max(*sums)


def _seqmat_norms(Q, w):
    return [[coseq.norm_l1nu(x, w) if x is not None else ZERO for x in row] for row in Q]


def _seq_matmul(X, Y):
    """Rigorous product of two d x d matrices of sequences (None = zero)."""
    d = len(X)
    out = [[None] * d for _ in range(d)]
    for i in range(d):
        for j in range(d):
            acc = None
            for k in range(d):
                if X[i][k] is None or Y[k][j] is None or not _nonzero(Y[k][j]):
                    continue
                t = coseq.conv(X[i][k], Y[k][j], True)
                acc = t if acc is None else _iadd(acc, t)
            out[i][j] = acc
    return out


def _iadd(a, b):
    a, b = coseq._align(a, b)
    return a + b


def _isub(a, b):
    a, b = coseq._align(a, b)
    return a - b


def z1_tail_matrix(p, ubar, A: ApproxInverse, w):
    """Pieces of the tail bound: (||I - T*DPhi - S*DR||, ||T||, ||DR||) as norm matrices."""
    u = as_stack(ubar, p.dim)
    d = p.dim
    dphi = p.DPhi(u, True)
    dr = p.DR(u, True)
    for i in range(d):
        for k in range(d):
            if A.S[i][k] is None:
                continue
            for j in range(d):
                if _nonzero(dphi[k][j]):
                    raise ValueError("tail layout requires S * DPhi = 0")
    TD = _seq_matmul(A.T, dphi)
    SR = _seq_matmul(A.S, dr)
    E = [[None] * d for _ in range(d)]
    for i in range(d):
        for j in range(d):
            acc = IntervalArray.point(coseq.unit(1)) if i == j else IntervalArray.zeros(1)
            if TD[i][j] is not None:
                acc = _isub(acc, TD[i][j])
            if SR[i][j] is not None:
                acc = _isub(acc, SR[i][j])
            E[i][j] = acc
    return _seqmat_norms(E, w), _seqmat_norms(A.T, w), _seqmat_norms(dr, w)


def _norm_matmul(X, Y):
    d = len(X)
    return [[sum((X[i][k] * Y[k][j] for k in range(d)), ZERO) for j in range(d)] for i in range(d)]


def bound_Z1_tail(p, ubar, A: ApproxInverse, w) -> Interval:
    """Bound on ||(I - A DF(ubar)) v|| / ||v|| for v supported on modes >= 2N - 1."""
    E, Tn, Rn = z1_tail_matrix(p, ubar, A, w)
    prod = _norm_matmul(Tn, Rn)
    scale = _nlap_tail(A.N)
    d = p.dim
    tot = [[E[i][j] + prod[i][j] / scale for j in range(d)] for i in range(d)]
    return _norm_matrix_colsum(tot)


def _block_colnorms(B: IntervalArray, d: int, rows: int, cols: int, w):
    """Per-block column-norm enclosures: (lo, hi) arrays of shape (d, d, cols)."""
    lo = np.zeros((d, d, cols))
    hi = np.zeros((d, d, cols))
    for i in range(d):
        for j in range(d):
            sub = B[i * rows:(i + 1) * rows, j * cols:(j + 1) * cols]
            lo[i, j], hi[i, j] = coseq.column_norm_bounds(sub, w)
    return lo, hi


def z1_finite_columns(p, ubar, A: ApproxInverse, w, chunk: int = 256):
    """Column-norm enclosures of B = I - A DF(ubar) for columns 0..2N-2.

    Returns (lo, hi, tainted) with lo/hi of shape (d, d, 2N - 1): entry
    (i, j, n) bounds (1/xi_n) sum_k |B^(i,j)_kn| xi_k.
    """
    N, d = A.N, p.dim
    nc = 2 * N - 1  # finite columns
    nj = nc + N - 1  # support of DF applied to them
    nr = nj + N - 1  # support of A applied to that
    u = as_stack(ubar, d)
    Aext = A.assemble(nj, nr)
    DF = p.jacobian_blocks(u, nj, nc, rigorous=True)
    tainted = Aext.tainted or DF.tainted
    lo = np.zeros((d, d, nc))
    hi = np.zeros((d, d, nc))
    for j in range(d):
        for s in range(0, nc, chunk):
            e = min(s + chunk, nc)
            P = imatmul(Aext, DF[:, j * nc + s:j * nc + e])
            tainted = tainted or P.tainted
            eye = np.zeros((d * nr, e - s))
            eye[j * nr + np.arange(s, e), np.arange(e - s)] = 1.0
            P = IntervalArray.point(eye) - P
            for i in range(d):
                lo[i, j, s:e], hi[i, j, s:e] = coseq.column_norm_bounds(P[i * nr:(i + 1) * nr, :], w, 0, s)
    return lo, hi, tainted


def bound_Z1_finite(p, ubar, A: ApproxInverse, w) -> Interval:
    """|| (I - A DF(ubar)) restricted to columns 0..2N-2 || with the block |.|_1 rule."""
    lo, hi, tainted = z1_finite_columns(p, ubar, A, w)
    d = p.dim
    mat = [[Interval(float(lo[i, j].max()), float(hi[i, j].max()), tainted) for j in range(d)] for i in range(d)]
    return _norm_matrix_colsum(mat)


def bound_Z1(p, ubar, A: ApproxInverse, w):
    """(Z1_finite, Z1_tail, Z1 = max of both)."""
    fin = bound_Z1_finite(p, ubar, A, w)
    tail = bound_Z1_tail(p, ubar, A, w)
    return fin, tail, interval_max(fin, tail)


def block_norms(A: ApproxInverse, w, with_lap: bool = False):
    """Operator-norm enclosures ||A^(i,j)|| (or ||A^(i,j) Lap||) as a d x d Interval matrix.

    Columns n < N come from the assembled matrix (including tail rows up to
    2N - 2); columns n >= N are bounded by ||T_ij||/(n pi)^2 + ||S_ij|| (or
    ||T_ij|| when composed with the Laplacian).
    """
    N, d = A.N, A.dim
    rows = 2 * N - 1
    M = A.assemble(N, rows)
    if with_lap:
        lap = coseq.lap_diag(N, True)
        M = M * IntervalArray(np.tile(lap.lo, d)[None, :], np.tile(lap.hi, d)[None, :])
    lo, hi = _block_colnorms(M, d, rows, N, w)
    scale = _nlap_tail(N)
    out = [[None] * d for _ in range(d)]
    for i in range(d):
        for j in range(d):
            tn = coseq.norm_l1nu(A.T[i][j], w) if A.T[i][j] is not None else ZERO
            sn = coseq.norm_l1nu(A.S[i][j], w) if A.S[i][j] is not None else ZERO
            if with_lap:
                if A.S[i][j] is not None and _nonzero(A.S[i][j]):
                    raise ValueError(f"A^({i},{j}) Lap is unbounded")
                tail = tn
            else:
                tail = tn / scale + sn
            fin = Interval(float(lo[i, j].max()), float(hi[i, j].max()), M.tainted)
            out[i][j] = interval_max(fin, tail)
    return out


def bound_Z2(p, A: ApproxInverse, w) -> Interval:
    """Uniform bound on ||A D^2F(u)||: max_kl sum_j (S^Lap_j |H^Phi_jkl| + S_j |H^R_jkl|)."""
    d = p.dim
    HP = p.phi().hessian()
    HR = p.reaction().hessian()
    need_lap = [any(HP[j][k][l] != 0 for k in range(d) for l in range(d)) for j in range(d)]
    An = block_norms(A, w)
    Sj = [sum((An[i][j] for i in range(d)), ZERO) for j in range(d)]
    SLj = [ZERO] * d
    if any(need_lap):
        AL = block_norms(A, w, with_lap=True) if all(
            A.S[i][j] is None for i in range(d) for j in range(d) if need_lap[j]) else None
        if AL is None:
            raise ValueError("diffusion Hessian hits an unbounded block of A Lap")
        SLj = [sum((AL[i][j] for i in range(d)), ZERO) if need_lap[j] else ZERO for j in range(d)]
    C = []
    for k in range(d):
        for l in range(d):
            c = ZERO
            for j in range(d):
                if HP[j][k][l] != 0:
                    c = c + SLj[j] * enclose(abs(HP[j][k][l]))
                if HR[j][k][l] != 0:
                    c = c + Sj[j] * enclose(abs(HR[j][k][l]))
            C.append(c)
    return interval_max(*C)


def nk_radius(Y: Interval, Z1: Interval, Z2: Interval):
    """Admissible radius range (r_min, r_max); raises ConditionsFailed."""
    if any(x.tainted for x in (Y, Z1, Z2)):
        raise ConditionsFailed("a bound overflowed (tainted interval)", "tainted")
    y, z1, z2 = Interval(Y.hi), Interval(Z1.hi), Interval(Z2.hi)
    if not (Y.lo >= 0 and Z2.lo >= 0):
        raise ConditionsFailed("bounds must be nonnegative", "sign")
    one_m = Interval(1.0) - z1
    if not one_m.lo > 0:
        raise ConditionsFailed(f"Z1 = {Z1.hi:.6g} is not < 1", "Z1")
    disc = one_m * one_m - Interval(2.0) * y * z2
    if not disc.lo > 0:
        raise ConditionsFailed(
            f"2 Y Z2 = {(2 * y * z2).hi:.6g} is not < (1 - Z1)^2 = {(one_m * one_m).lo:.6g}", "discriminant")
    # 2Y / (1 - Z1 + sqrt(disc)) equals the textbook root without cancellation
    r_min = Interval(2.0) * y / (one_m + disc.sqrt())
    r_max = one_m / z2 if z2.lo > 0 else Interval(math.inf)
    if not r_min.hi < r_max.lo:
        raise ConditionsFailed("empty radius range", "radius")
    return r_min, r_max


def select_radius(r_min: Interval, r_max: Interval) -> float:
    """Midpoint of [r_min, min(r_max, 2 r_min)] computed upward."""
    a = r_min.hi
    b = min(r_max.lo, 2.0 * a)
    r = a + (b - a) / 2.0
    if not a <= r < r_max.lo and not (a == 0.0 and r == 0.0):
        raise ConditionsFailed("selected radius fell outside the admissible range", "radius")
    return float(r)


def check_hyp_w(p, ubar, A: ApproxInverse, w):
    """Defect of the approximate reciprocal used in the tail; ok iff < 1."""
    u = as_stack(ubar, p.dim)
    if A.kind == "dae":
        base = _isub(IntervalArray.point(coseq.unit(1)), IntervalArray.point(u[1]))
        prod = coseq.conv(A.S[0][0], base, True)
        val = coseq.norm_l1nu(_isub(IntervalArray.point(coseq.unit(1)), prod), w)
    else:
        dphi = p.DPhi(u, True)
        TD = _seq_matmul(A.T, dphi)
        d = p.dim
        E = [[None] * d for _ in range(d)]
        for i in range(d):
            for j in range(d):
                acc = IntervalArray.point(coseq.unit(1)) if i == j else IntervalArray.zeros(1)
                E[i][j] = _isub(acc, TD[i][j]) if TD[i][j] is not None else acc
        val = _norm_matrix_colsum(_seqmat_norms(E, w))
    return bool(val.hi < 1.0 and not val.tainted), val


# --------------------------------------------------------------------------
# certificate


def solution_hash(u) -> str:
    return hashlib.sha256(coseq.dumps(np.asarray(u, float)).encode()).hexdigest()


@dataclass
class Certificate:
    family: str
    params: dict
    N: int
    nu: str
    solution_sha256: str
    Y: Interval
    Z1_finite: Interval
    Z1_tail: Interval
    Z1: Interval
    Z2: Interval
    r_min: Interval | None
    r_max: Interval | None
    r: float | None
    c0_bound: float | None
    hyp_w_value: Interval
    hyp_w_ok: bool
    conditions_ok: bool
    failure: str = ""
    diagnostics: dict = field(default_factory=dict)

    # -- serialization ("nkcert v1") --
    def dumps(self) -> str:
        lines = ["nkcert v1"]
        lines.append(f"family = {self.family}")
        for k in sorted(self.params):
            v = self.params[k]
            if isinstance(v, tuple):
                v = " ".join(str(x) for x in v)
            lines.append(f"param.{k} = {v}")
        lines.append(f"N = {self.N}")
        lines.append(f"nu = {self.nu}")
        lines.append(f"solution_sha256 = {self.solution_sha256}")
        for k in ("Y", "Z1_finite", "Z1_tail", "Z1", "Z2", "r_min", "r_max", "hyp_w_value"):
            lines.append(f"{k} = {_fmt_iv(getattr(self, k))}")
        lines.append(f"r = {_fmt_f(self.r)}")
        lines.append(f"c0_bound = {_fmt_f(self.c0_bound)}")
        lines.append(f"hyp_w_ok = {str(self.hyp_w_ok).lower()}")
        lines.append(f"conditions_ok = {str(self.conditions_ok).lower()}")
        lines.append(f"failure = {self.failure}")
        for k in sorted(self.diagnostics):
            v = self.diagnostics[k]
            lines.append(f"diag.{k} = {_fmt_iv(v) if isinstance(v, Interval) else _fmt_f(v)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Certificate":
        lines = text.splitlines()
        if not lines or lines[0].strip() != "nkcert v1":
            raise ValueError("not an nkcert v1 document")
        kv = {}
        for ln in lines[1:]:
            if not ln.strip():
                continue
            k, _, v = ln.partition(" = ")
            kv[k] = v
        params = {}
        diags = {}
        for k, v in kv.items():
            if k.startswith("param."):
                name = k[6:]
                params[name] = tuple(Fraction(x) for x in v.split()) if name == "g" else Fraction(v)
            elif k.startswith("diag."):
                diags[k[5:]] = _parse_iv(v) if v.startswith("[") else _parse_f(v)
        return cls(
            family=kv["family"], params=params, N=int(kv["N"]), nu=kv["nu"],
            solution_sha256=kv["solution_sha256"],
            Y=_parse_iv(kv["Y"]), Z1_finite=_parse_iv(kv["Z1_finite"]), Z1_tail=_parse_iv(kv["Z1_tail"]),
            Z1=_parse_iv(kv["Z1"]), Z2=_parse_iv(kv["Z2"]), r_min=_parse_iv(kv["r_min"]),
            r_max=_parse_iv(kv["r_max"]), r=_parse_f(kv["r"]), c0_bound=_parse_f(kv["c0_bound"]),
            hyp_w_value=_parse_iv(kv["hyp_w_value"]), hyp_w_ok=kv["hyp_w_ok"] == "true",
            conditions_ok=kv["conditions_ok"] == "true", failure=kv.get("failure", ""),
            diagnostics=diags,
        )

    def summary(self) -> str:
        status = "VALIDATED" if self.conditions_ok else f"NOT VALIDATED ({self.failure})"
        out = [
            f"{self.family} N={self.N} nu={self.nu}: {status}",
            f"  Y  <= {self.Y.hi:.3e}",
            f"  Z1 <= {self.Z1.hi:.3e}  (finite {self.Z1_finite.hi:.3e}, tail {self.Z1_tail.hi:.3e})",
            f"  Z2 <= {self.Z2.hi:.3e}",
            f"  hyp_w {self.hyp_w_value.hi:.3e} ({'ok' if self.hyp_w_ok else 'FAILED'})",
        ]
        if self.r_min is not None:
            out.append(f"  radius in [{self.r_min.hi:.3e}, {self.r_max.lo:.3e}), r = {self.r:.3e}")
            out.append(f"  sup-norm error <= {self.c0_bound:.3e}")
        return "\n".join(out)


def _fmt_f(x) -> str:
    if x is None:
        return "none"
    return repr(float(x))


def _parse_f(s: str):
    return None if s == "none" else float(s)


def _fmt_iv(iv) -> str:
    if iv is None:
        return "none"
    t = " tainted" if iv.tainted else ""
    return f"[{float(iv.lo)!r}, {float(iv.hi)!r}]{t}"


def _parse_iv(s: str):
    if s == "none":
        return None
    tainted = s.endswith(" tainted")
    body = s.removesuffix(" tainted").strip()[1:-1]
    lo, hi = (float(x) for x in body.split(","))
    return Interval(lo, hi, tainted)


def _param_repr(params: dict) -> dict:
    return {k: (tuple(v) if isinstance(v, tuple) else frac(v)) for k, v in params.items()}


def certify(p, ubar, A: ApproxInverse, nu, raise_on_failure: bool = True) -> Certificate:
    """Full pipeline: bounds, injectivity hypothesis, radius, sup-norm bound."""
    u = as_stack(ubar, p.dim)
    if u.shape[1] != A.N:
        u = np.stack([coseq.pad(r, A.N) for r in u])
    w = coseq.as_weight(nu)
    Y = bound_Y(p, u, A, w)
    Z1f, Z1t, Z1 = bound_Z1(p, u, A, w)
    Z2 = bound_Z2(p, A, w)
    hyp_ok, hyp_val = check_hyp_w(p, u, A, w)
    diags = _diagnostics(p, u, A, w)
    cert = Certificate(
        family=p.family, params=_param_repr(p.params()), N=A.N, nu=str(frac(nu)),
        solution_sha256=solution_hash(u), Y=Y, Z1_finite=Z1f, Z1_tail=Z1t, Z1=Z1, Z2=Z2,
        r_min=None, r_max=None, r=None, c0_bound=None, hyp_w_value=hyp_val, hyp_w_ok=hyp_ok,
        conditions_ok=False, diagnostics=diags,
    )
    try:
        r_min, r_max = nk_radius(Y, Z1, Z2)
        if not hyp_ok:
            raise ConditionsFailed(f"reciprocal defect {hyp_val.hi:.3g} is not < 1", "hyp_w")
        r = select_radius(r_min, r_max)
    except ConditionsFailed as exc:
        cert.failure = exc.which or "conditions"
        if raise_on_failure:
            exc.certificate = cert
            raise
        return cert
    cert.r_min, cert.r_max, cert.r = r_min, r_max, r
    # sup |u(x)| <= ||u||_nu for nu >= 1, per component
    cert.c0_bound = r
    cert.conditions_ok = True
    return cert


def _diagnostics(p, u, A: ApproxInverse, w) -> dict:
    out = {}
    N = A.N
    if A.kind == "skt":
        Wn = _seqmat_norms(A.T, w)
        Rn = _seqmat_norms(p.DR(u, True), w)
        # older 1/N estimate; reported for comparison only, never certifying
        out["legacy_z1_tail"] = _norm_matrix_colsum(_norm_matmul(Wn, Rn)) / (enclose(N) * coseq.PI)
    if A.kind == "dae":
        rp = p.DR(u, True)[1][0]
        sig = A.sigma
        scale = _nlap_tail(N)
        out["sigma_rprime_product"] = coseq.norm_l1nu(coseq.conv(sig, rp, True), w) / scale
        out["sigma_rprime_split"] = coseq.norm_l1nu(sig, w) * coseq.norm_l1nu(rp, w) / scale
        out["u_norm"] = coseq.norm_l1nu(u[0], w)
    return out


def certify_solution(p, ubar, nu, pad_factor: float = 2.0, raise_on_failure: bool = True) -> Certificate:
    """Compute the numerical ingredients with :mod:`nkproof.galerkin`, then certify."""
    from . import galerkin

    u = as_stack(ubar, p.dim)
    N = u.shape[1]
    wbar, _ = galerkin.compute_wbar(p, u, N, float(coseq.as_weight(nu).value))
    sigma = galerkin.compute_sigma(wbar, u[0], p.gamma, N) if p.family == "dae" else None
    Abar = galerkin.compute_Abar(p, u, N, pad_factor)
    A = ApproxInverse.from_parts(p.family, N, Abar, wbar, sigma)
    return certify(p, u, A, nu, raise_on_failure)
