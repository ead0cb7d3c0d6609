import numpy as np
import pytest

from nullrad.linalg import (barycentric_weights, composite_gauss_panels,
                            differentiation_matrix, fixed_tree_sum,
                            gauss_legendre, richardson_limit,
                            richardson_table)


def test_fixed_tree_sum_matches_plain_sum():
    rng = np.random.default_rng(7)
    for n in (1, 2, 3, 17, 64, 1000):
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        assert abs(fixed_tree_sum(x) - np.sum(x)) < 1e-12 * max(n, 1)


def test_fixed_tree_sum_is_bit_deterministic():
    rng = np.random.default_rng(11)
    x = rng.standard_normal(12345)
    a = fixed_tree_sum(x)
    b = fixed_tree_sum(np.array(x, copy=True))
    assert a == b  # bitwise equality, not approximate


def test_fixed_tree_sum_axis():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((5, 9))
    col = fixed_tree_sum(x, axis=0)
    assert col.shape == (9,)
    for j in range(9):
        assert col[j] == fixed_tree_sum(x[:, j])


def test_fixed_tree_sum_empty():
    assert fixed_tree_sum(np.zeros(0)) == 0.0


def test_gauss_legendre_polynomial_exactness():
    x, w = gauss_legendre(6, 0.0, 1.0)
    # degree up to 2*6-1 integrated exactly
    for k in range(10):
        assert abs(np.sum(w * x ** k) - 1.0 / (k + 1)) < 1e-14


def test_composite_panels():
    x, w = composite_gauss_panels(0.0, np.pi, 4, 10)
    assert abs(np.sum(w * np.sin(x)) - 2.0) < 1e-13


def test_barycentric_weights_alternate_sign():
    x = np.linspace(-1, 1, 7)
    w = barycentric_weights(x)
    assert np.all(np.sign(w[:-1]) == -np.sign(w[1:]))


def test_differentiation_matrix_exact_for_polynomials():
    x, _ = gauss_legendre(12)
    d = differentiation_matrix(x)
    assert np.max(np.abs(d @ x ** 5 - 5 * x ** 4)) < 1e-11
    assert np.max(np.abs(d @ np.ones_like(x))) < 1e-12


def test_differentiation_matrix_smooth_function():
    x, _ = gauss_legendre(24)
    d = differentiation_matrix(x)
    assert np.max(np.abs(d @ np.exp(x) - np.exp(x))) < 1e-10


def test_richardson_recovers_geometric_limit():
    limit = 0.731
    vals = limit + 0.4 * (0.5 ** np.arange(6)) ** 2
    table = richardson_table(vals, step_ratio=2.0, order=2)
    est, err, diverging = richardson_limit(vals, step_ratio=2.0, order=2)
    assert not diverging
    assert abs(est - limit) < 1e-12
    assert abs(table[-1] - limit) < 1e-12
    assert err < 1e-10


def test_richardson_flags_divergence():
    vals = 2.0 ** np.arange(6)
    _, _, diverging = richardson_limit(vals)
    assert diverging


def test_richardson_mixed_orders():
    # error with both h and h^2 terms; first-order ladder removes both
    h = 0.3 * 0.5 ** np.arange(7)
    vals = 1.25 + 0.7 * h + 0.3 * h ** 2
    est, _, diverging = richardson_limit(vals, step_ratio=2.0, order=1)
    assert not diverging
    assert abs(est - 1.25) < 1e-12
