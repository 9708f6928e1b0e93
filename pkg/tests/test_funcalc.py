import cmath

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from opertone.errors import DomainError, PreconditionError
from opertone.funcalc import analytic_calc, calc_hermitian, hypothesis_margins, select_case
from opertone.matcore import rel_diff
from opertone.repfun import eval_scalar, parse_spec, random_certified
from opertone.sampler import SampleConfig, haar_unitary, make_rng

LOG = parse_spec("log on (0,inf)")
SQRT = parse_spec("pow 0.5 on (0,inf)")


@given(st.integers(1, 5), st.integers(0, 2**32), st.sampled_from(["auto", "eigen", "contour"]))
@settings(max_examples=40, deadline=None)
def test_normal_matrix_matches_scalar_map(n, seed, path):
    # U diag(z) U*: the calculus must act on eigenvalues one by one
    rng = make_rng(seed)
    z = rng.uniform(0.2, 3.0, n) + 1j * rng.uniform(0.1, 2.0, n)
    U = haar_unitary(n, rng)
    X = (U * z) @ U.conj().T
    expect = (U * np.array([cmath.log(w) for w in z])) @ U.conj().T
    assert rel_diff(analytic_calc(LOG, X, path).value, expect) < 1e-9


@pytest.mark.parametrize("z", [1.5 + 0.5j, -2.0 + 1.0j, 0.7 - 2.0j])
def test_jordan_block_gives_derivative(z):
    # f([[z, 1], [0, z]]) = [[f(z), f'(z)], [0, f(z)]]; log' = 1/z
    X = np.array([[z, 1.0], [0.0, z]])
    F = analytic_calc(LOG, X, "contour").value
    assert abs(F[0, 0] - cmath.log(z)) < 1e-9
    assert abs(F[0, 1] - 1 / z) < 1e-8
    assert abs(F[1, 0]) < 1e-9
    # defective: the eigen path must refuse rather than return garbage
    with pytest.raises(DomainError):
        analytic_calc(LOG, X, "eigen")


def test_case_selection():
    A = np.diag([-1.0, 2.0])
    assert select_case(SQRT, np.diag([1.0, 2.0]) + 0j) == "strip"
    assert select_case(SQRT, A + 1j * np.eye(2)) == "upper_half"
    assert select_case(SQRT, A - 1j * np.eye(2)) == "lower_half"
    m = hypothesis_margins(SQRT, A + 1j * np.eye(2))
    assert m["strip"] < 0 < m["upper_half"]
    with pytest.raises(PreconditionError):
        analytic_calc(SQRT, A + 0j)


def test_square_root_squares_back(rng):
    X = rng.normal(size=(4, 4)) + 1j * (np.eye(4) * 3 + 0.1 * rng.normal(size=(4, 4)))
    X = X + 1j * 5 * np.eye(4)
    R = analytic_calc(SQRT, X).value
    assert rel_diff(R @ R, X) < 1e-9


def test_calc_hermitian_on_certified(rng):
    f = random_certified("decreasing", seed=3)
    lam = np.array([0.3, 1.0, 4.0])
    U = haar_unitary(3, rng)
    A = (U * lam) @ U.conj().T
    expect = (U * np.array([eval_scalar(f, x).real for x in lam])) @ U.conj().T
    assert rel_diff(calc_hermitian(f, A), expect) < 1e-12


def test_contour_report_is_serializable():
    res = analytic_calc(LOG, np.diag([1.0, 2.0]) + 0.5j, "contour")
    out = res.to_json()
    assert out["path"] == "contour" and out["nodes_used"] > 0 and "contour" in out
