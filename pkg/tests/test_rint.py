import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nkproof.rint import PI, DomainError, Interval, IntervalArray, enclose, imatmul, iconvolve, interval_max

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


@st.composite
def intervals(draw):
    a, b = draw(finite), draw(finite)
    return Interval(min(a, b), max(a, b))


def test_add_exact_integers():
    r = Interval(1) + Interval(1)
    assert r.contains(2) and r.lo == r.hi == 2.0


def test_zero_annihilates():
    r = Interval(0) * Interval(-5, 7)
    assert (r.lo, r.hi) == (0.0, 0.0)


def test_third_is_bracketed():
    r = Interval(1) / Interval(3)
    assert Fraction(r.lo) < Fraction(1, 3) < Fraction(r.hi)


def test_domain_errors():
    with pytest.raises(DomainError):
        Interval(1) / Interval(-1, 1)
    with pytest.raises(DomainError):
        Interval(-1, 4).sqrt()


def test_overflow_taints():
    big = Interval(1e308)
    r = big * big
    assert r.tainted and math.isfinite(r.hi)
    assert (r + 1).tainted


def test_pi_enclosure():
    assert PI.lo < PI.hi and Fraction(PI.lo) < Fraction("3.14159265358979323846264338327950288") < Fraction(PI.hi)


def test_enclose_decimal_strings():
    x = enclose("0.1")
    assert Fraction(x.lo) <= Fraction(1, 10) <= Fraction(x.hi) and x.lo < x.hi
    assert enclose("0.5").width == 0


@settings(max_examples=300, deadline=None)
@given(intervals(), intervals(), st.floats(0, 1), st.floats(0, 1))
def test_containment_and_monotonicity(X, Y, s, t):
    x = Fraction(X.lo) + (Fraction(X.hi) - Fraction(X.lo)) * Fraction(s)
    y = Fraction(Y.lo) + (Fraction(Y.hi) - Fraction(Y.lo)) * Fraction(t)
    for op, f in ((Interval.__add__, lambda a, b: a + b), (Interval.__sub__, lambda a, b: a - b),
                  (Interval.__mul__, lambda a, b: a * b)):
        R = op(X, Y)
        assert Fraction(R.lo) <= f(x, y) <= Fraction(R.hi)
        wide = op(Interval(X.lo - 1, X.hi + 1), Y)
        assert wide.lo <= R.lo and R.hi <= wide.hi
    if not (Y.lo <= 0 <= Y.hi):
        R = X / Y
        # overflow clips to the largest float and taints instead of enclosing
        assert R.tainted or Fraction(R.lo) <= x / y <= Fraction(R.hi)


@given(st.floats(min_value=1e-300, max_value=1e300))
def test_point_width_is_a_few_ulps(x):
    y = x * 1.5
    R = Interval(x) * Interval(y)
    assert R.hi - R.lo <= 4 * math.ulp(abs(x * y))


def test_sqrt_abs_max():
    assert Interval(4).sqrt().contains(2)
    assert abs(Interval(-3, 2)) == Interval(0, 3)
    assert Interval(1, 2).max(Interval(0, 5)) == Interval(1, 5)
    assert interval_max(Interval(1), Interval(2, 3)) == Interval(2, 3)


def test_interval_array_ops_and_product():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((30, 20))
    B = rng.standard_normal((20, 10))
    P = imatmul(A, B)
    assert np.all(P.contains(A @ B))
    a, b = rng.standard_normal(9), rng.standard_normal(7)
    assert np.all(iconvolve(a, b).contains(np.convolve(a, b)))
    X = IntervalArray.point(a)
    Y = X * 2 - X
    assert np.all(Y.contains(a))


def test_array_matches_scalar_semantics():
    X = IntervalArray([0.0, 1.0], [0.0, 2.0])
    Y = IntervalArray([-5.0, 3.0], [7.0, 3.0])
    Z = X * Y
    assert Z[0] == Interval(0.0)
    assert Z[1].contains(3) and Z[1].contains(6)
