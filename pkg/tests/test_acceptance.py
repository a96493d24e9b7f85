"""Acceptance criteria, one test per criterion.

Every test prints a single ``CRITERION <k> PASS|FAIL`` line with the measured
values; the lines are repeated in the pytest terminal summary.
"""

import time
from fractions import Fraction

import numpy as np
import pytest

import _checks as C
from nkproof import coseq, galerkin, nkcore, problems
from nkproof.cli import CASES, parse_config


class Criterion:
    def __init__(self, record, k, title):
        self.record, self.k, self.title = record, k, title
        self.facts = []
        self.t0 = time.perf_counter()

    def note(self, fmt, *args):
        self.facts.append(fmt % args if args else fmt)

    def __enter__(self):
        return self

    def __exit__(self, et, ev, tb):
        dt = time.perf_counter() - self.t0
        status = "PASS" if et is None else "FAIL"
        msg = "; ".join(self.facts)
        if et is not None:
            msg += f"; error: {et.__name__}: {ev}"
        self.record(f"CRITERION {self.k} {status} [{dt:.1f}s] {self.title}: {msg}")
        return False


def _solve(case):
    cfg = parse_config(CASES[case][0])
    res = galerkin.solve_recipe(cfg.problem, cfg.N, cfg.recipe, cfg.newton)
    return cfg, res.u


def _is_nonhomogeneous(u, tol=1e-6):
    return float(np.abs(u[:, 1:]).sum()) > tol


def _min_on_grid(u):
    x = np.linspace(0, 1, 2001)
    return min(float(coseq.eval_at(r, x).min()) for r in u)


def test_criterion_1_property_suite(record):
    with Criterion(record, 1, "property suite") as c:
        checks = [C.containment_vectorized, C.containment_fraction, C.banach_inequality,
                  C.mult_norm_identity, C.bandwidth, C.jacobian_fd]
        for f in checks:
            c.note("%s: %s", f.__name__, f())
        cases = C.small_cases()
        c.note("tail bound: %s", C.tail_bound_validity(cases))
        c.note("Z2: %s", C.z2_validity(cases))
        certs = [nkcore.certify_solution(p, u, nu) for p, u, nu in cases]
        c.note("radius: %s", C.radius_witness(certs))
        dt = time.perf_counter() - c.t0
        c.note("seed %d", C.SEED)
        assert dt < 120, f"property suite took {dt:.1f}s"


def test_criterion_2_scalar(record):
    with Criterion(record, 2, "scalar problem N=20 nu=1.1") as c:
        t0 = time.perf_counter()
        cfg, u = _solve("pm")
        cert = nkcore.certify_solution(cfg.problem, u, cfg.nu)
        dt = time.perf_counter() - t0
        c.note("Y=%.2e Z1=%.2e Z2=%.3f r=%.2e time=%.2fs", cert.Y.hi, cert.Z1.hi, cert.Z2.hi, cert.c0_bound, dt)
        assert cert.conditions_ok
        assert cert.Z1.hi <= 0.01
        assert 1 <= cert.Z2.lo and cert.Z2.hi <= 5
        assert cert.c0_bound <= 1e-8
        assert dt <= 10


def test_criterion_3_skt_row1(record):
    with Criterion(record, 3, "SKT row 1 N=50 nu=1.01") as c:
        t0 = time.perf_counter()
        cfg, u = _solve("skt1")
        cert = nkcore.certify_solution(cfg.problem, u, cfg.nu)
        dt = time.perf_counter() - t0
        legacy = cert.diagnostics["legacy_z1_tail"]
        c.note("C0=%.2e Z2=%.0f Z1tail=%.3f legacy=%.2f time=%.1fs", cert.c0_bound, cert.Z2.hi,
               cert.Z1_tail.hi, legacy.lo, dt)
        assert _is_nonhomogeneous(u)
        assert cert.conditions_ok
        assert cert.c0_bound <= 1e-5
        assert 5e3 <= cert.Z2.lo and cert.Z2.hi <= 5e4
        assert legacy.lo > 1
        assert cert.Z1_tail.hi <= 0.5
        assert dt <= 60


def test_criterion_4_skt_row2(record):
    with Criterion(record, 4, "SKT row 2 N=50 nu=1.01") as c:
        cfg, u = _solve("skt2")
        regime = problems.regime_classify(cfg.problem)
        cert = nkcore.certify_solution(cfg.problem, u, cfg.nu)
        c.note("C0=%.2e regime=%s", cert.c0_bound, regime)
        assert _is_nonhomogeneous(u)
        assert regime == "weak"
        assert cert.conditions_ok and cert.c0_bound <= 1e-8


def test_criterion_5_skt_row3(record):
    with Criterion(record, 5, "SKT row 3 N=500 nu=1.005") as c:
        t0 = time.perf_counter()
        cfg, u = _solve("skt3")
        regime = problems.regime_classify(cfg.problem)
        cert = nkcore.certify_solution(cfg.problem, u, cfg.nu)
        dt = time.perf_counter() - t0
        umin = _min_on_grid(u)
        c.note("N=%d C0=%.2e regime=%s min=%.4f time=%.1fs", cert.N, cert.c0_bound, regime, umin, dt)
        assert cert.N == 500
        assert _is_nonhomogeneous(u)
        # positive with margin larger than the certified sup-norm error
        assert umin > cert.c0_bound
        assert regime == "case3"
        assert cert.conditions_ok and cert.c0_bound <= 1e-7
        assert dt <= 1800


def test_criterion_6_skt_row4(record):
    with Criterion(record, 6, "SKT row 4 N=100 nu=1.01") as c:
        cfg, u = _solve("skt4")
        cert = nkcore.certify_solution(cfg.problem, u, cfg.nu)
        c.note("C0=%.2e d1=%s", cert.c0_bound, cfg.problem.d1)
        assert cfg.problem.d1 == Fraction(-7, 1000)
        assert cert.N == 100
        assert cert.conditions_ok and cert.c0_bound <= 1e-6


def test_criterion_7_rational_diffusion(record):
    with Criterion(record, 7, "rational diffusion N=50 nu=1.1") as c:
        cfg, u = _solve("np-gamma3")
        c3 = nkcore.certify_solution(cfg.problem, u, cfg.nu)
        cfg, u = _solve("np-gamma01")
        c01 = nkcore.certify_solution(cfg.problem, u, cfg.nu)
        unorm = coseq.norm_l1nu(u[0], cfg.nu)
        c.note("gamma=3 C0=%.2e; gamma=0.1 C0=%.2e ||u||=%.3f", c3.c0_bound, c01.c0_bound, unorm.lo)
        assert c3.conditions_ok and c3.c0_bound <= 1e-10
        assert c01.conditions_ok and c01.c0_bound <= 1e-4
        assert unorm.lo > cfg.problem.gamma


def test_criterion_8_padded_inverse(record):
    with Criterion(record, 8, "padded vs naive Abar, scalar problem") as c:
        cfg, u = _solve("pm")
        naive = nkcore.certify_solution(cfg.problem, u, cfg.nu, pad_factor=1, raise_on_failure=False)
        padded = nkcore.certify_solution(cfg.problem, u, cfg.nu, pad_factor=2)
        c.note("Z1 naive=%.4e padded=%.4e", naive.Z1.lo, padded.Z1.hi)
        assert naive.Z1.lo > padded.Z1.hi


def test_criterion_9_tail_scaling(record):
    with Criterion(record, 9, "Z1 tail scaling N -> 2N") as c:
        p = problems.ScalarQuadraticProblem()
        tails = {}
        for N in (20, 40):
            u = galerkin.solve_newton(p, N, galerkin.GuessRecipe(modes=((1, 0.1),)).build(p, N)).u
            A = C.build_inverse(p, u, "1.1")
            tails[N] = nkcore.bound_Z1_tail(p, u, A, coseq.Weight("1.1"))
        ratio = tails[20].mid / tails[40].mid
        c.note("Z1tail(20)=%.3e Z1tail(40)=%.3e ratio=%.3f", tails[20].hi, tails[40].hi, ratio)
        assert 3.2 <= ratio <= 4.8


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
