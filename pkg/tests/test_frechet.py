import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from opertone.errors import ValidationError
from opertone.frechet import dd_tensor, frechet, frechet_contour, frechet_series, resolve_engine, taylor_sums
from opertone.matcore import rel_diff
from opertone.repfun import parse_spec, random_certified
from opertone.repfun.spec import MINUS_ONE_ONE
from opertone.sampler import SampleConfig, make_rng, rand_hermitian, rand_hermitian_in, rand_pd

INV = parse_spec("inv on (0,inf)")
ENGINES = ("contour", "divided", "closed", "fd")


@pytest.mark.parametrize("engine", ENGINES)
def test_inverse_derivatives_formula(engine, rng):
    # D^m inv(A; B) = (-1)^m m! (A^-1 B)^m A^-1
    A = rand_pd(SampleConfig(3, margin=0.3), rng) + np.eye(3)
    B = rand_hermitian(SampleConfig(3), rng)
    Ai = np.linalg.inv(A)
    for m in range(4):
        expect = (-1) ** m * math.factorial(m) * np.linalg.matrix_power(Ai @ B, m) @ Ai
        tol = 1e-5 if engine == "fd" else 1e-9
        assert rel_diff(frechet(INV, A, B, m, engine).value, expect) < tol


@given(st.integers(0, 2**32), st.integers(0, 4))
@settings(max_examples=25, deadline=None)
def test_commuting_directions_reduce_to_scalar_derivatives(seed, m):
    # diagonal A, B: D^m f(A; B) = diag(f^(m)(a) b^m); for exp every f^(m) is exp
    rng = make_rng(seed)
    f = parse_spec("exp on (-1,1)")
    a = rng.uniform(-0.9, 0.9, 3)
    b = rng.normal(size=3)
    expect = np.diag(np.exp(a) * b**m)
    for engine in ("contour", "divided"):
        assert rel_diff(frechet(f, np.diag(a), np.diag(b), m, engine).value, expect) < 1e-9


@given(st.integers(0, 2**32), st.integers(1, 3))
@settings(max_examples=25, deadline=None)
def test_divided_difference_tensor_is_symmetric(seed, m):
    f = random_certified("ktone", seed=seed, k=4)
    lam = make_rng(seed).uniform(-0.9, 0.9, 3)
    T = dd_tensor(f, lam, m)
    for perm in itertools.permutations(range(m + 1)):
        assert np.allclose(T, np.transpose(T, perm), rtol=1e-10, atol=1e-12)


def test_series_and_taylor_sums_consistent(rng):
    f = random_certified("ktone", seed=11, k=5)
    cfg = SampleConfig(3, margin=0.1)
    A = rand_hermitian_in(cfg, MINUS_ONE_ONE, rng)
    B = rand_hermitian(cfg, rng)
    ders = frechet_series(f, A, B, 4)
    sums = taylor_sums(f, A, B, 2)
    e2 = ders[0].value - ders[2].value / 2 + ders[4].value / 24
    o2 = ders[1].value - ders[3].value / 6
    assert rel_diff(sums.even[2], e2) < 1e-12
    assert rel_diff(sums.odd[2], o2) < 1e-12
    assert np.array_equal(sums.odd[0], np.zeros((3, 3)))


def test_engine_resolution():
    assert resolve_engine(random_certified("monotone", seed=1), "auto") in ("closed_form", "divided_diff")
    assert resolve_engine(INV, "fd") == "finite_diff"
    with pytest.raises(Exception):
        resolve_engine(INV, "bogus")


def test_contour_engine_takes_general_directions(rng):
    A = rand_pd(SampleConfig(3), rng) + np.eye(3)
    B = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    Ai = np.linalg.inv(A)
    assert rel_diff(frechet_contour(INV, A, B, 1).value, -Ai @ B @ Ai) < 1e-9
    with pytest.raises(ValidationError):
        frechet(INV, A, B, 1)
