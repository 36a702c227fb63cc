import math
from itertools import permutations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dyadlab import exponents, exponents3

finite_p = st.floats(1.01, 50.0)


def test_linear_examples():
    assert exponents(2, 3).r == math.inf
    assert exponents(4, 2).r == pytest.approx(4.0)
    ex = exponents(2, 2)
    assert ex.p_dual == ex.q_dual == 2.0
    assert ex.r == math.inf


def test_bilinear_examples():
    e = exponents3(4, 4, 4)
    assert e.r_k == (2.0, 2.0, 2.0)
    assert e.r == pytest.approx(4.0)
    assert e.q == pytest.approx(4 / 3)
    e2 = exponents3(2, 2, 2)
    assert e2.r_k == (math.inf, math.inf, math.inf)
    assert e2.r == math.inf


def test_input_validation():
    for bad in (1.0, 0.5, math.inf):
        with pytest.raises(ValueError):
            exponents(bad, 2)
        with pytest.raises(ValueError):
            exponents(2, bad)
        with pytest.raises(ValueError):
            exponents3(2, bad, 2)


@given(finite_p, finite_p)
def test_duality_invariants(p, q):
    ex = exponents(p, q)
    assert 1 / p + 1 / ex.p_dual == pytest.approx(1.0)
    assert (ex.r == math.inf) == (p <= q)
    if ex.r != math.inf:
        assert 1 / ex.r == pytest.approx(1 / q - 1 / p)
    # the adjoint problem has the same deficiency exponent
    assert ex.adjoint.r == pytest.approx(ex.r)


@given(finite_p, finite_p, finite_p)
def test_bilinear_permutation_invariance(p1, p2, p3):
    base = exponents3(p1, p2, p3)
    ps = (p1, p2, p3)
    for perm in permutations(range(3)):
        other = exponents3(*(ps[i] for i in perm))
        assert other.r == pytest.approx(base.r)
        # r_k follows its index through the permutation
        for new_k, old_k in enumerate(perm):
            assert other.r_k[new_k] == pytest.approx(base.r_k[old_k])
    for value in (*base.r_k, base.r):
        assert value > 1.0
