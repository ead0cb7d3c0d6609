import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nullrad.spinors import (EPS_LOWER, GAMMA, MINKOWSKI, Tetrad,
                             antisym_tensor_from_bispinor,
                             antisym_tensor_from_fields,
                             bispinor_from_antisym_tensor,
                             bispinor_from_fields, boost_matrix, bracket,
                             dirac_algebra, dirac_bar, energy_projectors,
                             fields_from_antisym_tensor,
                             fields_from_bispinor, gamma_dot, hodge_dual,
                             lorentz_of_sl2, lower_spinor, m_matrix,
                             matrix_lower, minkowski_dot, mixed_matrix,
                             node_spinor, null_vector_of, raise_spinor,
                             rotation_matrix, sl2_boost, sl2_rotation,
                             tetrad_from, vec_of_matrix, w_matrix)

REST = np.array([1.0, 0.0, 0.0, 0.0])

finite = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)


def random_spinors(seed, n):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2))


# --- convention anchors, fixed forever -------------------------------------


def test_anchor_null_vector_of_basis_spinor():
    assert np.array_equal(null_vector_of(np.array([1.0, 0.0])),
                          np.array([1.0, 0.0, 0.0, 1.0]))


def test_anchor_angle_parametrization():
    theta = np.linspace(0.0, np.pi, 41)
    phi = np.linspace(0.0, 2 * np.pi, 41, endpoint=False)
    th, ph = np.meshgrid(theta, phi, indexing='ij')
    u = null_vector_of(node_spinor(th, ph))
    expected = np.stack([np.ones_like(th),
                         np.sin(th) * np.cos(ph),
                         np.sin(th) * np.sin(ph),
                         np.cos(th)], axis=-1)
    assert np.max(np.abs(u - expected)) < 1e-13


def test_anchor_time_component_is_norm():
    o = random_spinors(0, 200)
    t_comp = minkowski_dot(REST, null_vector_of(o))
    assert np.max(np.abs(t_comp - np.sum(np.abs(o) ** 2, axis=-1))) < 1e-13


def test_south_pole_direction():
    # theta = pi gives the direction opposite to the polar axis
    u = null_vector_of(node_spinor(np.pi, 0.3))
    assert np.max(np.abs(u - np.array([1.0, 0.0, 0.0, -1.0]))) < 1e-15


def test_null_vector_scaling():
    o = np.array([0.3 - 0.2j, 1.1 + 0.5j])
    alpha = 2.0 + 1.0j
    got = null_vector_of(alpha * o)
    assert np.max(np.abs(got - abs(alpha) ** 2 * null_vector_of(o))) < 1e-13


def test_null_vector_is_null_and_future():
    o = random_spinors(1, 300)
    l = null_vector_of(o)
    assert np.max(np.abs(minkowski_dot(l, l))) < 1e-12 * np.max(l[:, 0]) ** 2
    assert np.all(l[:, 0] >= 0.0)


# --- epsilon algebra --------------------------------------------------------


def test_bracket_antisymmetry_exact():
    a = random_spinors(2, 10_000)
    b = random_spinors(3, 10_000)
    assert np.array_equal(bracket(a, b), -bracket(b, a))


def test_bracket_vanishes_on_diagonal():
    a = random_spinors(4, 100)
    assert np.array_equal(bracket(a, a), np.zeros(100))


def test_lower_raise_round_trip():
    a = random_spinors(5, 50)
    assert np.array_equal(raise_spinor(lower_spinor(a)), a)
    assert np.array_equal(lower_spinor(raise_spinor(a)), a)


def test_contraction_conventions():
    # sum of (lowered a) against b equals bracket(a, b); the opposite
    # pairing picks up a sign
    a = random_spinors(6, 64)
    b = random_spinors(7, 64)
    down_up = np.sum(lower_spinor(a) * b, axis=-1)
    up_down = np.sum(a * lower_spinor(b), axis=-1)
    assert np.max(np.abs(down_up - bracket(a, b))) < 1e-13
    assert np.max(np.abs(up_down + bracket(a, b))) < 1e-13


@settings(max_examples=50, deadline=None)
@given(finite, finite, finite, finite)
def test_bracket_invariant_under_sl2(rap, nx, ny, nz):
    n = np.array([nx, ny, nz])
    if np.linalg.norm(n) < 1e-3:
        n = np.array([0.0, 0.0, 1.0])
    s = sl2_boost(rap, n) @ sl2_rotation(0.4, n)
    a = np.array([0.2 + 1.0j, -0.7 + 0.1j])
    b = np.array([1.3 - 0.4j, 0.5 + 0.6j])
    sa, sb = s @ a, s @ b
    assert abs(bracket(sa, sb) - bracket(a, b)) < 1e-10 * max(
        1.0, abs(bracket(sa, sb)))


# --- vector/matrix dictionary ----------------------------------------------


def test_vec_of_mixed_is_doubling():
    rng = np.random.default_rng(8)
    v = rng.standard_normal((20, 4))
    assert np.max(np.abs(vec_of_matrix(mixed_matrix(v)) - 2 * v)) < 1e-13


def test_mixed_matrix_determinant_is_norm():
    rng = np.random.default_rng(9)
    v = rng.standard_normal((20, 4))
    det = np.linalg.det(mixed_matrix(v))
    assert np.max(np.abs(det - minkowski_dot(v, v))) < 1e-12


def test_mixed_matrix_of_null_vector_is_outer_product():
    o = random_spinors(10, 30)
    l = null_vector_of(o)
    outer = 2.0 * o[:, :, None] * np.conj(o)[:, None, :]
    assert np.max(np.abs(mixed_matrix(l) - outer)) < 1e-12


def test_matrix_lower_of_null_outer():
    # lowering both indices sends the spinor factors through epsilon
    o = random_spinors(11, 30)
    low = matrix_lower(mixed_matrix(null_vector_of(o)))
    lo = np.einsum('ab,nb->na', EPS_LOWER, o)
    expected = 2.0 * lo[:, :, None] * np.conj(lo)[:, None, :]
    assert np.max(np.abs(low - expected)) < 1e-12


def test_m_and_w_matrices_at_rest():
    assert np.array_equal(m_matrix(REST), -np.eye(2))
    assert np.array_equal(w_matrix(REST), np.eye(2))


def test_w_matrix_pairing_formula():
    rng = np.random.default_rng(12)
    for _ in range(10):
        u = rng.standard_normal(3) * 0.5
        v = np.concatenate([[np.sqrt(1 + u @ u)], u])
        o = random_spinors(rng.integers(1 << 30), 40)
        w = w_matrix(v)
        pairing = np.einsum('na,ab,nb->n', o, w, np.conj(o))
        vl = minkowski_dot(v, null_vector_of(o))
        assert np.max(np.abs(pairing - vl)) < 1e-12


# --- tetrads ----------------------------------------------------------------


def test_tetrad_anchor_rest_frame():
    tet = tetrad_from(np.array([1.0, 0.0]), REST)
    assert np.max(np.abs(tet.iota - np.array([0.0, 1.0]))) < 1e-15
    assert np.max(np.abs(tet.l - np.array([1, 0, 0, 1.0]))) < 1e-15
    assert np.max(np.abs(tet.n - np.array([0.5, 0, 0, -0.5]))) < 1e-15


def test_tetrad_identities():
    rng = np.random.default_rng(13)
    o = random_spinors(14, 25)
    for rap, axis in ((0.0, [0, 0, 1.0]), (0.9, [1.0, 0.4, -0.2])):
        t = boost_matrix(rap, axis) @ REST
        tet = Tetrad(o, t)
        assert np.max(np.abs(bracket(tet.o, tet.iota) - 1.0)) < 1e-12
        assert np.max(np.abs(minkowski_dot(tet.l, tet.n) - 1.0)) < 1e-12
        assert np.max(np.abs(minkowski_dot(tet.m, np.conj(tet.m)) + 1)) < 1e-12
        assert np.max(np.abs(minkowski_dot(tet.m, tet.m))) < 1e-12
        assert np.max(np.abs(minkowski_dot(tet.l, tet.m))) < 1e-12
        assert np.max(np.abs(minkowski_dot(tet.n, tet.m))) < 1e-12
        recon = (tet.scale[:, None] * tet.n
                 + tet.l / (2.0 * tet.scale[:, None]))
        assert np.max(np.abs(recon - t)) < 1e-12


def test_tetrad_gauge_normalization():
    # in t-gauge (t.l = 1) the decomposition reduces to t = n + l/2
    theta, phi = 1.1, 2.3
    tet = Tetrad(node_spinor(theta, phi), REST)
    assert abs(tet.scale - 1.0) < 1e-14
    assert np.max(np.abs(tet.n + tet.l / 2 - REST)) < 1e-13


def test_tetrad_rescale_keeps_normalization():
    o = np.array([0.6 + 0.2j, -0.3 + 1.0j])
    alpha = 1.7 - 0.6j
    tet = Tetrad(alpha * o, REST)
    assert abs(bracket(alpha * o, tet.iota) - 1.0) < 1e-13


def test_tetrad_rejects_spacelike_gauge():
    with pytest.raises(ValueError):
        Tetrad(np.array([1.0, 0.0]), np.array([0.0, 0.0, 0.0, 1.0]))


# --- Lorentz group ----------------------------------------------------------


def test_lorentz_of_boost_moves_rest_vector():
    rap = 0.8
    lam = boost_matrix(rap, [0, 0, 1.0])
    got = lam @ REST
    assert np.max(np.abs(got - [np.cosh(rap), 0, 0, np.sinh(rap)])) < 1e-13


def test_lorentz_matrices_preserve_metric():
    for mat in (boost_matrix(1.3, [0.2, -1.0, 0.5]),
                rotation_matrix(0.7, [1.0, 1.0, 0.0])):
        assert np.max(np.abs(mat.T @ MINKOWSKI @ mat - MINKOWSKI)) < 1e-12


def test_rotation_handedness():
    # right-handed: quarter turn about z sends x to y
    lam = rotation_matrix(np.pi / 2, [0, 0, 1.0])
    assert np.max(np.abs(lam @ [0, 1, 0, 0] - [0, 0, 1, 0])) < 1e-13
    lam_x = rotation_matrix(np.pi / 2, [1.0, 0, 0])
    assert np.max(np.abs(lam_x @ [0, 0, 1, 0] - [0, 0, 0, 1])) < 1e-13


def test_sl2_equivariance_of_null_vector():
    s = sl2_boost(1.1, [0.3, 0.9, -0.1]) @ sl2_rotation(0.8, [1, 0.2, 0.4])
    lam = lorentz_of_sl2(s)
    o = random_spinors(15, 60)
    lhs = null_vector_of(np.einsum('ab,nb->na', s, o))
    rhs = np.einsum('ab,nb->na', lam, null_vector_of(o))
    assert np.max(np.abs(lhs - rhs)) < 1e-11


def test_sl2_composition():
    s1 = sl2_boost(0.6, [1, 0, 0])
    s2 = sl2_rotation(1.2, [0, 1, 0])
    assert np.max(np.abs(lorentz_of_sl2(s1 @ s2)
                         - lorentz_of_sl2(s1) @ lorentz_of_sl2(s2))) < 1e-13


# --- field dictionaries -----------------------------------------------------


def test_field_bispinor_round_trip():
    rng = np.random.default_rng(16)
    e = rng.standard_normal((30, 3))
    b = rng.standard_normal((30, 3))
    phi = bispinor_from_fields(e, b)
    assert np.max(np.abs(phi - np.swapaxes(phi, -1, -2))) == 0.0
    e2, b2 = fields_from_bispinor(phi)
    assert np.max(np.abs(e2 - e)) < 1e-13
    assert np.max(np.abs(b2 - b)) < 1e-13


def test_tensor_round_trips():
    rng = np.random.default_rng(17)
    e = rng.standard_normal((10, 3))
    b = rng.standard_normal((10, 3))
    t = antisym_tensor_from_fields(e, b)
    assert np.max(np.abs(t + np.swapaxes(t, -1, -2))) == 0.0
    e2, b2 = fields_from_antisym_tensor(t)
    assert np.max(np.abs(e2 - e)) < 1e-14
    assert np.max(np.abs(b2 - b)) < 1e-14
    phi = bispinor_from_antisym_tensor(t)
    t2 = antisym_tensor_from_bispinor(phi)
    assert np.max(np.abs(t2 - t)) < 1e-13


def test_electric_anchor_bispinor():
    # unit electric field along z
    phi = bispinor_from_fields(np.array([0, 0, 1.0]), np.zeros(3))
    assert np.max(np.abs(phi - np.array([[0, -1], [-1, 0]]))) < 1e-15


def test_hodge_dual_swaps_fields():
    rng = np.random.default_rng(18)
    e = rng.standard_normal(3)
    b = rng.standard_normal(3)
    t = antisym_tensor_from_fields(e, b)
    ed, bd = fields_from_antisym_tensor(hodge_dual(t))
    assert np.max(np.abs(ed + b)) < 1e-14
    assert np.max(np.abs(bd - e)) < 1e-14
    assert np.max(np.abs(hodge_dual(hodge_dual(t)) + t)) < 1e-14


def test_duality_rotation_is_phase_on_bispinor():
    # dual of (E, B) is (-B, E), so C = E + iB picks up a factor +i
    rng = np.random.default_rng(19)
    e = rng.standard_normal(3)
    b = rng.standard_normal(3)
    t = antisym_tensor_from_fields(e, b)
    assert np.max(np.abs(bispinor_from_antisym_tensor(hodge_dual(t))
                         - 1j * bispinor_from_antisym_tensor(t))) < 1e-13


def test_field_bispinor_is_lorentz_equivariant():
    """bispinor(T') = M bispinor(T) M^T under any SL(2,C) element.

    Lower-index tensors map as T' = N T N^T with N the inverse transpose
    of the vector matrix, lower-index spinors with M = (S^T)^{-1}; boosts
    are the discriminating case, rotations pass for either duality sign.
    """
    rng = np.random.default_rng(21)
    metric = np.diag([1.0, -1.0, -1.0, -1.0])
    elements = [
        sl2_boost(0.7, [0, 0, 1]),
        sl2_boost(0.45, [0.3, -1.2, 0.5]),
        sl2_rotation(1.1, [1.0, 2.0, -0.5]),
        sl2_boost(0.3, [1, 0, 0]) @ sl2_rotation(0.8, [0, 1, 1]),
    ]
    t = antisym_tensor_from_fields(rng.standard_normal(3),
                                   rng.standard_normal(3))
    for s in elements:
        lam = lorentz_of_sl2(s)
        n = metric @ lam @ metric
        m = np.linalg.inv(s.T)
        got = bispinor_from_antisym_tensor(n @ t @ n.T)
        want = m @ bispinor_from_antisym_tensor(t) @ m.T
        assert np.max(np.abs(got - want)) < 1e-12


# --- Dirac matrices ---------------------------------------------------------


def test_clifford_relations():
    for a in range(4):
        for b in range(4):
            anti = GAMMA[a] @ GAMMA[b] + GAMMA[b] @ GAMMA[a]
            assert np.max(np.abs(anti - 2 * MINKOWSKI[a, b] * np.eye(4))) == 0


def test_gamma_dot_squares_to_norm():
    rng = np.random.default_rng(20)
    v = rng.standard_normal(4)
    sq = gamma_dot(v) @ gamma_dot(v)
    assert np.max(np.abs(sq - minkowski_dot(v, v) * np.eye(4))) < 1e-13


def test_energy_projectors_rest():
    plus, minus = energy_projectors(REST)
    assert abs(np.trace(plus) - 2.0) < 1e-14
    assert np.max(np.abs(plus + minus - np.eye(4))) < 1e-14
    assert np.max(np.abs(plus @ minus)) < 1e-14
    assert np.max(np.abs(plus @ plus - plus)) < 1e-14


def test_dirac_algebra_boosted():
    v = boost_matrix(1.4, [0.3, 0.8, -0.5]) @ REST
    gv, plus, minus = dirac_algebra(v)
    assert np.max(np.abs(gv @ gv - np.eye(4))) < 1e-12
    assert np.max(np.abs(plus + minus - np.eye(4))) < 1e-14
    assert np.max(np.abs(plus @ plus - plus)) < 1e-12
    assert np.max(np.abs(gv @ plus - plus)) < 1e-12
    assert np.max(np.abs(gv @ minus + minus)) < 1e-12


def test_dirac_algebra_rejects_off_shell():
    with pytest.raises(ValueError):
        dirac_algebra(np.array([1.2, 0, 0, 0.0]))


def test_dirac_bar_reverses_gamma():
    # gamma^a dagger = gamma^0 gamma^a gamma^0, hence bar(gamma^a psi) = bar(psi) gamma^a
    rng = np.random.default_rng(21)
    psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    for a in range(4):
        lhs = dirac_bar(GAMMA[a] @ psi)
        rhs = dirac_bar(psi) @ GAMMA[a]
        assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_current_is_real():
    rng = np.random.default_rng(22)
    psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    current = np.array([dirac_bar(psi) @ GAMMA[a] @ psi for a in range(4)])
    assert np.max(np.abs(current.imag)) < 1e-12
