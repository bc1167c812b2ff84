import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from plucker_correction import (
    DimensionError, InvalidInputError, PluckerLine, VecPair, klein_residual, objective,
)
from plucker_correction.lmpc import correct_lmpc

from conftest import pairs, vec


@pytest.mark.parametrize("x, y, expected", [
    ((1, 0, 0), (0, 1, 0), 0.0),
    ((1, 1, 1), (1, 1, 1), 3.0),
])
def test_klein_residual_examples(x, y, expected):
    assert klein_residual(x, y) == expected


def test_klein_residual_of_corrected_example():
    x = (0.72360679774997916, -0.44721359549995798, 0)
    y = (0.72360679774997916, 1.170820393249937, 0)
    assert abs(klein_residual(x, y)) < 1e-5
    # rounded to five digits as well
    assert abs(klein_residual((0.72361, -0.44721, 0), (0.72361, 1.17082, 0))) < 1e-5


def test_klein_residual_dimension_mismatch():
    with pytest.raises(DimensionError):
        klein_residual([1, 2, 3], [1, 2])


@pytest.mark.parametrize("a, b, x, y, expected", [
    ((1, 0, 0), (0, 1, 0), (1, 0, 0), (0, 1, 0), 0.0),
    ((1, 0, 0), (0, 1, 0), (0, 0, 0), (0, 0, 0), 2.0),
    ((1, 0, 0), (1, 1, 0), (0, 0, 0), (0, 0, 0), 3.0),
])
def test_objective_examples(a, b, x, y, expected):
    assert objective(VecPair(a, b), x, y) == expected


def test_objective_dimension_mismatch():
    with pytest.raises(DimensionError):
        objective(VecPair([1, 0, 0], [0, 1, 0]), [0, 0], [0, 0])


@given(pairs(), st.floats(-1e3, 1e3))
def test_klein_residual_bilinear(ab, c):
    x, y = ab
    lhs = klein_residual(c * x, y)
    rhs = c * klein_residual(x, y)
    scale = abs(c) * np.sum(np.abs(x) * np.abs(y))
    assert abs(lhs - rhs) <= 1e-12 * scale + 1e-300


@given(pairs())
def test_objective_at_origin_is_q(ab):
    pair = VecPair(*ab)
    zero = np.zeros(pair.dim)
    assert math.isclose(objective(pair, zero, zero), pair.q, rel_tol=1e-15, abs_tol=0)


@given(pairs(), pairs())
def test_objective_nonnegative(ab, xy):
    a, b = ab
    x, y = xy
    if x.size != a.size:
        x, y = np.resize(x, a.size), np.resize(y, a.size)
    assert objective(VecPair(a, b), x, y) >= 0


@pytest.mark.parametrize("bad", [
    ([1.0, float("nan"), 0.0], [0, 1, 0]),
    ([1.0, 0.0, 0.0], [0, float("inf"), 0]),
])
def test_vecpair_rejects_non_finite(bad):
    with pytest.raises(InvalidInputError):
        VecPair(*bad)


def test_vecpair_shape_errors():
    with pytest.raises(DimensionError):
        VecPair([1, 2, 3], [1, 2])
    with pytest.raises(DimensionError):
        VecPair([1], [2])
    with pytest.raises(DimensionError):
        VecPair.from_flat([1, 2, 3, 4, 5])


def test_vecpair_is_immutable():
    pair = VecPair([1, 2, 3], [4, 5, 6])
    with pytest.raises(ValueError):
        pair.a[0] = 7.0


def test_plucker_line_validation():
    line = PluckerLine([1, 0, 0], [0, 2, 0])
    assert np.array_equal(line.as_array(), [1, 0, 0, 0, 2, 0])
    with pytest.raises(InvalidInputError):
        PluckerLine([1, 0, 0], [1, 1, 0])
    with pytest.raises(DimensionError):
        PluckerLine([1, 0, 0, 0], [0, 1, 0, 0])
    # relative bound: a large line with a residual well inside 1e-9 (1 + |u||v|)
    PluckerLine([1e6, 0, 0], [1e-6, 1e6, 0])


@given(vec(3), vec(3))
def test_corrected_output_is_a_plucker_line(a, b):
    # parallel inputs map to a zero direction, where only an absolute bound is attainable
    assume(np.linalg.norm(np.cross(a, b)) > 1e-6 * np.linalg.norm(a) * np.linalg.norm(b))
    res = correct_lmpc(VecPair(a, b))
    line = PluckerLine.from_result(res)
    assert line.direction.shape == (3,)
