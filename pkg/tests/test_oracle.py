from fractions import Fraction

import numpy as np
import pytest

from nkproof import coseq, galerkin as G, oracle, problems as P
from nkproof.rint import Interval


def test_identity_lower_bound():
    lb = oracle.opnorm_lower_bound(lambda v: v, "1.1", trials=20)
    assert 0.99 < lb <= 1.0 + 1e-12


def test_multiplication_lower_bound_reaches_norm():
    u = np.array([1.0, 0.3, -0.2, 0.05])
    lb = oracle.opnorm_lower_bound(lambda v: coseq.conv(u, v, rigorous=False), 1.1, trials=10)
    n = coseq.norm_float(u, 1.1)
    assert 0.9 * n <= lb <= n * (1 + 1e-12)


def test_inverse_laplacian_lower_bound():
    def apply(v):
        out = coseq.inv_laplacian(v)
        out[0] = 0.0
        return out
    lb = oracle.opnorm_lower_bound(apply, 1.1, trials=5)
    assert lb == pytest.approx(1 / np.pi**2, rel=1e-12)


def test_opnorm_validation():
    with pytest.raises(ValueError):
        oracle.opnorm_lower_bound(lambda v: v, 1.1, trials=0)


def test_fd_residual_constant_state():
    p = P.skt_row(1)
    sol = oracle.GridSolution(np.linspace(0, 1, 201), np.array([[1.625] * 201, [0.125] * 201]))
    assert oracle.fd_residual(p, sol) <= 1e-12


def test_fd_residual_scalar_solution():
    p = P.ScalarQuadraticProblem()
    u = G.solve_newton(p, 20, G.GuessRecipe(modes=((1, 0.1),)).build(p, 20)).u
    sol = oracle.GridSolution.sample(u, 401)
    small = oracle.fd_residual(p, sol)
    assert small <= 1e-3
    v = sol.values.copy()
    v[0, 200] += 1e-2
    big = oracle.fd_residual(p, oracle.GridSolution(sol.x, v))
    assert big > 1e2 * max(small, 1e-3)


def test_fd_residual_rejects_coarse_grid():
    p = P.ScalarQuadraticProblem()
    with pytest.raises(ValueError):
        oracle.fd_residual(p, oracle.GridSolution.sample(np.array([[1.0]]), 50))


def test_grid_validation():
    with pytest.raises(ValueError):
        oracle.GridSolution(np.array([0.0, 0.5]), np.zeros((1, 2)))
    with pytest.raises(ValueError):
        oracle.GridSolution(np.array([0.0, 0.6, 0.5]), np.zeros((1, 3)))
    with pytest.raises(ValueError):
        oracle.GridSolution(np.linspace(0, 1, 5), np.zeros((1, 4)))


def test_bigref():
    expr = ("/", ("-", ("*", "15/2", 2), ("*", 6, "16/7")), ("-", ("*", 4, 2), ("*", 6, 1)))
    assert oracle.bigref(expr) == Fraction(9, 14)
    assert oracle.bigref(0.1) == Fraction(1, 10)
    third = Interval(1.0) / Interval(3.0)
    assert third.lo <= Fraction(1, 3) <= third.hi
    xi5 = coseq.weight_xi(5, "11/10")
    assert xi5 == pytest.approx(float(Fraction(322102, 100000)), rel=1e-15)
