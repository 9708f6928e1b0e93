from math import comb, factorial

import numpy as np
from hypothesis import given, settings, strategies as st

from opertone.matcore import rel_diff
from opertone.sampler import SampleConfig, make_rng, rand_hermitian
from opertone.words import poly_derivatives, poly_word_sum, word_sum_table


@given(st.integers(1, 4), st.integers(0, 6), st.integers(0, 2**32))
@settings(max_examples=40, deadline=None)
def test_word_sums_expand_binomial(n, l, seed):
    rng = make_rng(seed)
    A = rand_hermitian(SampleConfig(n), rng)
    B = rand_hermitian(SampleConfig(n), rng)
    t = 0.37
    total = sum(t**m * poly_word_sum(l, m, A, B) for m in range(l + 1))
    assert rel_diff(total, np.linalg.matrix_power(A + t * B, l)) < 1e-12
    F = word_sum_table(A, B, l, l)
    for m in range(l + 1):
        assert rel_diff(F[l - m, m], poly_word_sum(l, m, A, B)) < 1e-12


def test_commuting_word_sum_is_binomial():
    A = np.diag([1.0, 2.0])
    B = np.diag([3.0, -1.0])
    for l in range(6):
        for m in range(l + 1):
            expect = comb(l, m) * np.linalg.matrix_power(A, l - m) @ np.linalg.matrix_power(B, m)
            assert np.allclose(poly_word_sum(l, m, A, B), expect)


def test_poly_derivatives_match_finite_difference(rng):
    A = rand_hermitian(SampleConfig(3), rng)
    B = rand_hermitian(SampleConfig(3), rng)
    coeffs = [0.5, -1.0, 0.25, 2.0]
    P = lambda X: sum(c * np.linalg.matrix_power(X, l) for l, c in enumerate(coeffs))
    D = poly_derivatives(coeffs, A, B, 3)
    assert rel_diff(D[0], P(A)) < 1e-13
    # cubic: the third derivative is exact by the fourth-order forward stencil
    h = 1.0
    third = (P(A + 3 * h * B) - 3 * P(A + 2 * h * B) + 3 * P(A + h * B) - P(A)) / h**3
    assert rel_diff(D[3], third) < 1e-10
    assert rel_diff(D[3], 6 * coeffs[3] * np.linalg.matrix_power(B, 3)) < 1e-12 * factorial(3)
