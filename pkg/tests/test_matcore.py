import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from opertone.errors import ValidationError
from opertone.matcore import (
    as_hermitian,
    as_matrix,
    general_eigen,
    hermitian_eigen,
    hermitian_power,
    is_psd,
    load_matrix,
    matrix_from_json,
    matrix_to_json,
    psd_margin,
    re_im_parts,
    rel_diff,
)
from opertone.sampler import SampleConfig, make_rng, rand_hermitian, rand_pd


@pytest.mark.parametrize("bad", [np.ones((2, 3)), np.array([[np.nan]]), np.zeros((0, 0))])
def test_as_matrix_rejects(bad):
    with pytest.raises(ValidationError):
        as_matrix(bad)


def test_as_hermitian_rejects_skew():
    with pytest.raises(ValidationError):
        as_hermitian(np.array([[0, 1], [0, 0]], dtype=float))


@given(st.integers(1, 6), st.integers(0, 2**32))
@settings(max_examples=30, deadline=None)
def test_hermitian_eigen_reconstructs(n, seed):
    H = rand_hermitian(SampleConfig(n), make_rng(seed))
    sp = hermitian_eigen(H)
    assert np.all(np.diff(sp.values) >= 0)
    assert rel_diff((sp.right_vectors * sp.values) @ sp.right_vectors.conj().T, H) < 1e-12


def test_general_eigen_reconstructs(rng):
    X = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    sp = general_eigen(X)
    V = sp.right_vectors
    assert rel_diff(V @ np.diag(sp.values) @ np.linalg.inv(V), X) < 1e-10


def test_psd_margin_and_gate(rng):
    P = rand_pd(SampleConfig(4), rng)
    assert psd_margin(P) > 0 and is_psd(P)
    assert not is_psd(-P)
    assert is_psd(-1e-12 * np.eye(3))


def test_re_im_parts_recombine(rng):
    X = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    re, im = re_im_parts(X)
    assert np.allclose(re, re.conj().T) and np.allclose(im, im.conj().T)
    assert np.allclose(re + 1j * im, X)


def test_hermitian_power_square_root(rng):
    P = rand_pd(SampleConfig(4), rng)
    R = hermitian_power(P, 0.5)
    assert rel_diff(R @ R, P) < 1e-12


def test_matrix_json_round_trip(tmp_path, rng):
    X = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    obj = matrix_to_json(X)
    assert np.array_equal(matrix_from_json(json.loads(json.dumps(obj))), X)
    path = tmp_path / "m.json"
    path.write_text(json.dumps(obj))
    assert np.array_equal(load_matrix(path), X)
