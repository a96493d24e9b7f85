"""Property checks shared by the acceptance suite.

Each function raises AssertionError on violation and returns a short summary.
"""

from __future__ import annotations

import math
import operator
from fractions import Fraction

import numpy as np

from nkproof import coseq, galerkin, nkcore, problems
from nkproof.rint import IntervalArray

SEED = 20240611

_SPLIT = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a):
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    """p + e == a * b exactly (Dekker), barring over/underflow."""
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def _check_enclosure(res, approx, sign):
    """``sign`` is the sign of (exact - approx); approx is the rounded value."""
    lo, hi = res.lo, res.hi
    ok = np.where(sign > 0, hi > approx, np.where(sign < 0, lo < approx, (lo <= approx) & (approx <= hi)))
    ok &= lo <= hi
    return ok


def containment_vectorized(n_ops=1_000_000, seed=SEED):
    """Exactness-based containment for + - * / sqrt on random point intervals."""
    rng = np.random.default_rng(seed)
    k = n_ops // 5
    def rand(size):
        return rng.uniform(1, 2, size) * 2.0 ** rng.integers(-60, 60, size) * rng.choice([-1, 1], size)
    a, b = rand(k), rand(k)
    A, B = IntervalArray.point(a), IntervalArray.point(b)
    bad = 0

    s, e = two_sum(a, b)
    bad += np.count_nonzero(~_check_enclosure(A + B, s, np.sign(e)))
    s, e = two_sum(a, -b)
    bad += np.count_nonzero(~_check_enclosure(A - B, s, np.sign(e)))
    p, e = two_prod(a, b)
    bad += np.count_nonzero(~_check_enclosure(A * B, p, np.sign(e)))
    q = a / b
    p, e = two_prod(q, b)
    r = (a - p) - e  # sign of a - q b, exact by Sterbenz + sign-preserving rounding
    bad += np.count_nonzero(~_check_enclosure(A / B, q, np.sign(r) * np.sign(b)))
    x = np.abs(a)
    sq = np.sqrt(x)
    p, e = two_prod(sq, sq)
    d = (x - p) - e  # sign of x - sq^2
    bad += np.count_nonzero(~_check_enclosure(IntervalArray.point(x).sqrt(), sq, np.sign(d)))
    assert bad == 0, f"{bad} containment violations"
    return f"{5 * k} point operations contained"


_OPS = {"+": operator.add, "-": operator.sub, "*": operator.mul, "/": operator.truediv}


def containment_fraction(n=2000, seed=SEED):
    """Wide intervals: random interior points, exact rational results must be enclosed."""
    from nkproof.rint import Interval

    rng = np.random.default_rng(seed + 1)
    bad = 0
    ops = ("+", "-", "*", "/")
    for _ in range(n):
        a0, b0 = sorted(rng.normal(0, 3, 2))
        c0, d0 = sorted(rng.normal(0, 3, 2))
        op = ops[rng.integers(4)]
        if op == "/" and c0 <= 0 <= d0:
            c0, d0 = abs(d0) + 0.5, abs(d0) + 1.5
        X, Y = Interval(a0, b0), Interval(c0, d0)
        R = _OPS[op](X, Y)
        for _ in range(3):
            x = Fraction(a0) + (Fraction(b0) - Fraction(a0)) * Fraction(int(rng.integers(0, 1001)), 1000)
            y = Fraction(c0) + (Fraction(d0) - Fraction(c0)) * Fraction(int(rng.integers(0, 1001)), 1000)
            z = _OPS[op](x, y)
            if not (Fraction(R.lo) <= z <= Fraction(R.hi)):
                bad += 1
    assert bad == 0, f"{bad} rational containment violations"
    return f"{3 * n} exact-rational samples contained"


def _random_seq(rng, L, nu=1.1):
    return rng.standard_normal(L) * nu ** -np.arange(L) * rng.uniform(0.1, 3)


def banach_inequality(pairs=1000, seed=SEED):
    rng = np.random.default_rng(seed + 2)
    w = coseq.Weight("1.1")
    worst = 0.0
    for _ in range(pairs):
        u = _random_seq(rng, int(rng.integers(1, 25)))
        v = _random_seq(rng, int(rng.integers(1, 25)))
        lhs = coseq.norm_l1nu(coseq.conv(u, v, True), w)
        rhs = coseq.norm_l1nu(u, w) * coseq.norm_l1nu(v, w)
        assert lhs.lo <= rhs.hi, (lhs, rhs)
        worst = max(worst, lhs.lo / rhs.hi)
    return f"{pairs} pairs, max ratio {worst:.4f}"


def mult_norm_identity(trials=50, seed=SEED):
    rng = np.random.default_rng(seed + 3)
    w = coseq.Weight("1.05")
    for _ in range(trials):
        L = int(rng.integers(1, 20))
        u = _random_seq(rng, L)
        cols = int(rng.integers(1, 30))
        M = coseq.mult_matrix(u, cols + L - 1, cols, True)
        op = coseq.opnorm_columns(M, w)
        nu_ = coseq.norm_l1nu(u, w)
        assert op.overlaps(nu_), (op, nu_)
    return f"{trials} multiplication operators match ||u||"


def bandwidth(trials=50, seed=SEED):
    rng = np.random.default_rng(seed + 4)
    for _ in range(trials):
        L = int(rng.integers(1, 12))
        u = _random_seq(rng, L)
        m = int(rng.integers(0, 20))
        M = m + int(rng.integers(0, 10))
        v = np.zeros(M + 1)
        v[m:] = rng.standard_normal(M + 1 - m)
        nz = np.nonzero(coseq.conv(u, v))[0]
        assert nz.min() >= max(0, m - L + 1) and nz.max() <= M + L - 1
    N = 8
    for p in _families():
        u = _random_seq(rng, N)[None, :].repeat(p.dim, 0)
        J = p.jacobian_blocks(u, 4 * N, 2 * N)
        for n in range(2 * N):
            for j in range(p.dim):
                col = J[:, j * 2 * N + n].reshape(p.dim, 4 * N)
                nz = np.nonzero(np.any(col != 0, axis=0))[0]
                if nz.size:
                    assert nz.min() >= max(0, n - N + 1) and nz.max() <= n + N - 1
    return "convolution and Jacobian column supports respect the bandwidth"


def _families():
    return [problems.ScalarQuadraticProblem(), problems.skt_row(1), problems.skt_row(4),
            problems.RationalDiffusionProblem(gamma="0.1")]


def jacobian_fd(h=1e-5, seed=SEED):
    rng = np.random.default_rng(seed + 5)
    worst = 0.0
    for p in _families():
        for _ in range(5):
            u = np.stack([_random_seq(rng, 12) for _ in range(p.dim)])
            v = np.stack([_random_seq(rng, 12) for _ in range(p.dim)])
            fd = (p.F(u + h * v) - p.F(u - h * v)) / (2 * h)
            ex = problems.jacobian_apply(p, u, v)
            L = max(fd.shape[1], ex.shape[1])
            fd = np.stack([coseq.pad(r, L) for r in fd])
            ex = np.stack([coseq.pad(r, L) for r in ex])
            rel = np.abs(fd - ex).sum() / max(np.abs(ex).sum(), 1e-300)
            worst = max(worst, rel)
    assert worst <= 1e-6, worst
    return f"max relative error {worst:.2e}"


# -- nkcore validity checks on small validated problems --


def small_cases():
    """(problem, ubar, nu) triples that certify quickly."""
    out = []
    p = problems.ScalarQuadraticProblem()
    u = galerkin.solve_newton(p, 20, galerkin.GuessRecipe(modes=((1, 0.1),)).build(p, 20)).u
    out.append((p, u, "1.1"))
    p = problems.skt_row(1)
    u = galerkin.solve_recipe(p, 50, galerkin.GuessRecipe(modes=((4, 0.5),))).u
    out.append((p, u, "1.01"))
    p = problems.RationalDiffusionProblem(gamma=3)
    u = galerkin.solve_newton(p, 30, galerkin.GuessRecipe(modes=((1, 0.1),)).build(p, 30)).u
    out.append((p, u, "1.1"))
    return out


def build_inverse(p, u, nu, pad=2.0):
    N = u.shape[1]
    wbar, _ = galerkin.compute_wbar(p, u, N, float(Fraction(nu)))
    sigma = galerkin.compute_sigma(wbar, u[0], p.gamma, N) if p.family == "dae" else None
    return nkcore.ApproxInverse.from_parts(p.family, N, galerkin.compute_Abar(p, u, N, pad), wbar, sigma)


def tail_bound_validity(cases, trials=10, seed=SEED):
    rng = np.random.default_rng(seed + 6)
    worst = 0.0
    for p, u, nu in cases:
        w = coseq.Weight(nu)
        A = build_inverse(p, u, nu)
        N = A.N
        z1t = nkcore.bound_Z1_tail(p, u, A, w)
        for t in range(trials):
            cols = 4 * N + 1
            v = np.zeros((p.dim, cols))
            if t < p.dim:
                v[t, 2 * N - 1] = 1.0  # basis vectors sit closest to the bound
            else:
                v[:, 2 * N - 1:] = rng.standard_normal((p.dim, cols - 2 * N + 1))
            J = p.jacobian_blocks(u, cols + N - 1, cols, rigorous=True)
            from nkproof.rint import imatmul
            DFv = imatmul(J, IntervalArray.point(v.reshape(-1))).reshape(p.dim, -1)
            ADFv = nkcore.apply_A(A, DFv)
            Lr = ADFv.shape[1]
            vv = IntervalArray.point(np.stack([coseq.pad(r, Lr) for r in v]))
            Bv = vv - ADFv
            lhs = sum((coseq.norm_l1nu(Bv[i], w) for i in range(p.dim)), nkcore.ZERO)
            nv = sum((coseq.norm_l1nu(v[i], w) for i in range(p.dim)), nkcore.ZERO)
            rhs = z1t * nv
            assert lhs.hi <= rhs.hi, (p.family, lhs, rhs)
            worst = max(worst, lhs.hi / rhs.hi)
    return f"{trials * len(cases)} tail vectors, max ratio to bound {worst:.3f}"


def z2_validity(cases, trials=10, seed=SEED):
    rng = np.random.default_rng(seed + 7)
    worst = 0.0
    for p, u, nu in cases:
        w = coseq.Weight(nu)
        A = build_inverse(p, u, nu)
        z2 = nkcore.bound_Z2(p, A, w)
        for _ in range(trials):
            L = int(rng.integers(2, 3 * A.N))
            h1 = np.stack([_random_seq(rng, L, 1.5) for _ in range(p.dim)])
            h2 = np.stack([_random_seq(rng, L, 1.5) for _ in range(p.dim)])
            h1 /= sum(coseq.norm_float(r, float(Fraction(nu))) for r in h1)
            h2 /= sum(coseq.norm_float(r, float(Fraction(nu))) for r in h2)
            D2 = p.D2F(h1, h2, rigorous=True)
            AD2 = nkcore.apply_A(A, D2)
            lhs = sum((coseq.norm_l1nu(AD2[i], w) for i in range(p.dim)), nkcore.ZERO)
            n1 = sum((coseq.norm_l1nu(r, w) for r in h1), nkcore.ZERO)
            n2 = sum((coseq.norm_l1nu(r, w) for r in h2), nkcore.ZERO)
            rhs = z2 * n1 * n2
            assert lhs.hi <= rhs.hi, (p.family, lhs, rhs)
            worst = max(worst, lhs.hi / rhs.hi)
    return f"{trials * len(cases)} pairs, max ratio to Z2 {worst:.3f}"


def radius_witness(certs):
    for c in certs:
        assert c.conditions_ok
        Y, Z1, Z2 = (Fraction(x.hi) for x in (c.Y, c.Z1, c.Z2))

        def P(r):
            return Y - (1 - Z1) * r + Z2 * r * r / 2

        assert P(Fraction(c.r_min.hi)) <= 0
        below = math.nextafter(c.r_min.lo, 0.0)
        if c.Y.hi > 0:
            assert P(Fraction(below)) > 0
        assert P(Fraction(c.r)) <= 0
    return f"{len(certs)} certificates: P(r_min) <= 0 < P(just below r_min)"
