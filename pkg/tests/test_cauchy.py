"""Closed-form Cauchy matrix identities against direct linear algebra.

The independent oracle for the permanent is a from-scratch sum over
permutations written here in the test, so the library's two permanent
routes are checked against something that shares no code with them.
"""
import itertools

import numpy as np
import pytest

from rgsolve.cauchy import (CauchyPair, borchardt_permanent, cauchy_det_explicit,
                            cauchy_inverse, cauchy_matrix, check_hadamard3,
                            check_matrix_det_lemma, check_sylvester_mixed,
                            det_lu, j_eps_matrix, j_x_matrix, permanent_direct)
from rgsolve.errors import ValidationError


def permutation_permanent(A):
    n = A.shape[0]
    total = 0.0 + 0.0j
    for p in itertools.permutations(range(n)):
        term = 1.0 + 0.0j
        for i in range(n):
            term *= A[i, p[i]]
        total += term
    return total


def draw_pair(rng, m, n, lo=-3.0, hi=3.0, imag=0.4, min_sep=0.05):
    while True:
        eps = rng.uniform(lo, hi, m) + 1j * imag * rng.standard_normal(m)
        xs = rng.uniform(lo, hi, n) + 1j * imag * rng.standard_normal(n)
        both = np.concatenate([eps, xs])
        gaps = np.abs(both[:, None] - both[None, :])
        np.fill_diagonal(gaps, np.inf)
        if gaps.min() >= min_sep:
            return CauchyPair(eps, xs)


def rel(a, b):
    return abs(a - b) / max(1.0, abs(a), abs(b))


def test_inverse_against_solve():
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(120):
        n = int(rng.integers(1, 7))
        pair = draw_pair(rng, n, n)
        C = cauchy_matrix(pair)
        err = np.abs(cauchy_inverse(pair) @ C - np.eye(n)).max()
        worst = max(worst, float(err))
    assert worst <= 1e-9


def test_determinant_explicit_against_lu():
    rng = np.random.default_rng(102)
    for _ in range(120):
        n = int(rng.integers(1, 7))
        pair = draw_pair(rng, n, n)
        assert rel(cauchy_det_explicit(pair), det_lu(cauchy_matrix(pair))) <= 1e-9


def test_permanents_against_permutation_sum():
    rng = np.random.default_rng(103)
    for _ in range(60):
        n = int(rng.integers(1, 6))
        pair = draw_pair(rng, n, n)
        C = cauchy_matrix(pair)
        truth = permutation_permanent(C)
        assert rel(borchardt_permanent(pair), truth) <= 1e-9
        assert rel(permanent_direct(C), truth) <= 1e-9


def test_sylvester_mixed_sizes():
    rng = np.random.default_rng(104)
    for _ in range(120):
        m = int(rng.integers(1, 7))
        n = int(rng.integers(1, m + 1))
        pair = draw_pair(rng, m, n)
        lhs, rhs = check_sylvester_mixed(pair)
        assert rel(lhs, rhs) <= 1e-8


def test_hadamard_cubed_square_pairs():
    rng = np.random.default_rng(105)
    for _ in range(120):
        n = int(rng.integers(1, 7))
        pair = draw_pair(rng, n, n)
        lhs, rhs = check_hadamard3(pair)
        assert rel(lhs, rhs) <= 1e-8
    with pytest.raises(ValidationError):
        check_hadamard3(draw_pair(rng, 3, 2))


def test_matrix_determinant_lemma_mixed_sizes():
    rng = np.random.default_rng(106)
    for _ in range(120):
        m = int(rng.integers(1, 7))
        n = int(rng.integers(1, m + 1))
        pair = draw_pair(rng, m, n, lo=0.3, hi=4.0, imag=0.0)
        G = complex(rng.uniform(-4.0, 4.0))
        while min(abs((G + 1.0) / 2.0 - k) for k in range(0, m + 1)) < 0.05:
            G = complex(rng.uniform(-4.0, 4.0))
        lhs, rhs = check_matrix_det_lemma(pair, G)
        assert rel(lhs, rhs) <= 1e-8
    with pytest.raises(ValidationError):
        check_matrix_det_lemma(draw_pair(rng, 2, 3, lo=0.3, hi=4.0), 0.5)


def test_j_matrices_shapes():
    rng = np.random.default_rng(107)
    pair = draw_pair(rng, 4, 2)
    assert j_eps_matrix(pair).shape == (4, 4)
    assert j_x_matrix(pair).shape == (2, 2)


def test_pole_and_collision_rejection():
    eps = np.array([0.5, 1.5, 2.5])
    with pytest.raises(ValidationError):
        cauchy_inverse(CauchyPair(eps, np.array([1.5 + 0.0j, 3.0])))  # x on a level
    with pytest.raises(ValidationError):
        cauchy_inverse(CauchyPair(np.array([0.5, 0.5, 2.5]), np.array([1.0, 3.0])))
    with pytest.raises(ValidationError):
        borchardt_permanent(CauchyPair(eps, np.array([1.0, 1.0, 3.0])))


def test_permanent_direct_small_sizes():
    A = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=complex)
    assert permanent_direct(A) == pytest.approx(1 * 4 + 2 * 3)
    assert permanent_direct(np.ones((0, 0), dtype=complex)) == pytest.approx(1.0)
