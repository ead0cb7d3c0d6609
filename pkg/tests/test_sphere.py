import numpy as np
import pytest

from nullrad.sphere import (HomogeneousFn, NodeField, audit_homogeneity,
                            build_grid, harmonic_coefficients,
                            harmonic_expand, integrate, integrate_delta_line,
                            spin_derivative)
from nullrad.spinors import (EPS_LOWER, boost_matrix, m_matrix, matrix_lower,
                             minkowski_dot, mixed_matrix, null_vector_of)

REST = np.array([1.0, 0.0, 0.0, 0.0])


def inverse_square(v):
    """f = 1/(v.l)^2, the type (-2,-2) building block."""
    return HomogeneousFn(
        lambda o: 1.0 / minkowski_dot(v, null_vector_of(o)) ** 2, (-2, -2))


# --- grids -------------------------------------------------------------------


def test_grid_counts_and_weights():
    g = build_grid(REST, 8, 16)
    assert g.n_nodes == 128
    assert abs(g.weights.sum() - 4 * np.pi) < 1e-12
    assert np.max(np.abs(minkowski_dot(g.t, g.vectors) - 1.0)) < 1e-13


def test_grid_gauge_normalization_boosted():
    t = boost_matrix(1.0, [0.3, -1.0, 0.2]) @ REST
    g = build_grid(t, 10, 20)
    assert abs(g.weights.sum() - 4 * np.pi) < 1e-12
    assert np.max(np.abs(minkowski_dot(g.t, g.vectors) - 1.0)) < 1e-13


def test_grid_rejects_bad_input():
    with pytest.raises(ValueError):
        build_grid(np.array([0.0, 1.0, 0, 0]), 8, 16)
    with pytest.raises(ValueError):
        build_grid(REST, 1, 16)
    with pytest.raises(ValueError):
        build_grid(REST, 8, 3)


def test_grid_is_immutable():
    g = build_grid(REST, 4, 8)
    with pytest.raises(ValueError):
        g.weights[0] = 0.0


def test_grid_is_deterministic():
    a = build_grid(REST, 12, 24, axis=[0.3, 0.4, 0.5])
    b = build_grid(REST, 12, 24, axis=[0.3, 0.4, 0.5])
    assert np.array_equal(a.spinors, b.spinors)
    assert np.array_equal(a.weights, b.weights)


# --- invariant integration ----------------------------------------------------


def test_integrate_constant_in_gauge():
    g = build_grid(REST, 8, 16)
    assert abs(integrate(g, inverse_square(REST)) - 4 * np.pi) < 1e-12


def test_integrate_boost_invariance():
    # measure is invariant: the boosted integrand still integrates to 4 pi;
    # cross-checked against a quadrature at 4x resolution
    v = boost_matrix(1.0, [0, 0, 1.0]) @ REST
    g = build_grid(REST, 24, 48)
    val = integrate(g, inverse_square(v))
    dense = integrate(build_grid(REST, 96, 192), inverse_square(v))
    assert abs(val - 4 * np.pi) < 1e-10
    assert abs(val - dense) < 1e-10


def test_integrate_static_charge_mean():
    # q = Q/(2 (t.l)^2); its mean over directions is Q
    charge = 1.7
    g = build_grid(REST, 12, 24)
    f = HomogeneousFn(
        lambda o: charge / (2 * minkowski_dot(REST,
                                              null_vector_of(o)) ** 2),
        (-2, -2))
    assert abs(integrate(g, f) / (2 * np.pi) - charge) < 1e-12


def test_integrate_rejects_wrong_type():
    g = build_grid(REST, 8, 16)
    f = HomogeneousFn(
        lambda o: 1.0 / minkowski_dot(REST, null_vector_of(o)), (-1, -1))
    with pytest.raises(ValueError):
        integrate(g, f)


def test_integrate_catches_type_lie():
    g = build_grid(REST, 8, 16)
    liar = HomogeneousFn(
        lambda o: 1.0 / minkowski_dot(REST, null_vector_of(o)), (-2, -2))
    with pytest.raises(ValueError, match="homogeneity"):
        integrate(g, liar)


def test_integrate_gauge_independence():
    v = boost_matrix(0.8, [1.0, 0.5, 0.0]) @ REST
    f = inverse_square(v)
    g1 = build_grid(REST, 32, 64)
    g2 = build_grid(boost_matrix(0.5, [0, 1.0, 0]) @ REST, 32, 64)
    assert abs(integrate(g1, f) - integrate(g2, f)) < 1e-9


def test_integrate_convergence_rate():
    v = boost_matrix(1.2, [0, 0, 1.0]) @ REST
    f = inverse_square(v)
    errors = []
    for n in (8, 16):
        errors.append(abs(integrate(build_grid(REST, n, 2 * n), f)
                          - 4 * np.pi))
    assert errors[1] < errors[0] / 100 or errors[1] < 1e-12


def test_integrate_split_grid_and_axis():
    f = inverse_square(REST)
    g = build_grid(REST, 10, 20, axis=[1.0, 1.0, 0.3], x_split=[-0.2, 0.4])
    assert abs(integrate(g, f) - 4 * np.pi) < 1e-12


def test_node_field_grid_mismatch():
    g1 = build_grid(REST, 8, 16)
    g2 = build_grid(REST, 8, 16)
    field = NodeField(g2, np.ones(g2.n_nodes), (-2, -2))
    with pytest.raises(ValueError):
        integrate(g1, field)


def test_integrate_is_bit_deterministic():
    v = boost_matrix(0.9, [0.1, 0.2, 1.0]) @ REST
    g = build_grid(REST, 16, 32)
    a = integrate(g, inverse_square(v))
    b = integrate(g, inverse_square(v))
    assert a == b


# --- delta-line integrals ------------------------------------------------------


def line_integrand(v):
    return HomogeneousFn(
        lambda o: 1.0 / minkowski_dot(v, null_vector_of(o)), (-1, -1))


def test_delta_line_unit_direction():
    g = build_grid(REST, 8, 16)
    val = integrate_delta_line(g, np.array([0, 0, 0, 1.0]),
                               line_integrand(REST))
    assert abs(val - 2 * np.pi) < 1e-12


def test_delta_line_length_two():
    g = build_grid(REST, 8, 16)
    val = integrate_delta_line(g, np.array([0, 0, 0, 2.0]),
                               line_integrand(REST))
    assert abs(val - np.pi) < 1e-12


def test_delta_line_tilted():
    # y.t = 1, y.y = -1 gives 2 pi / sqrt((y.t)^2 - y.y) = 2 pi / sqrt(2)
    g = build_grid(REST, 8, 16)
    y = np.array([1.0, 0.0, 0.0, np.sqrt(2.0)])
    val = integrate_delta_line(g, y, line_integrand(REST))
    dense = integrate_delta_line(g, y, line_integrand(REST), n_psi=512)
    assert abs(val - 2 * np.pi / np.sqrt(2.0)) < 1e-8
    assert abs(val - dense) < 1e-10


def test_delta_line_smooth_integrand_converges():
    g = build_grid(REST, 8, 16)
    w = boost_matrix(1.0, [0.6, 0.8, 0.0]) @ REST
    y = np.array([0.2, 0.3, -0.4, 1.1])
    ref = integrate_delta_line(g, y, line_integrand(w), n_psi=512)
    e16 = abs(integrate_delta_line(g, y, line_integrand(w), n_psi=16) - ref)
    e32 = abs(integrate_delta_line(g, y, line_integrand(w), n_psi=32) - ref)
    assert e32 < e16 / 10 or e32 < 1e-12


def test_delta_line_rejects_non_spacelike():
    g = build_grid(REST, 8, 16)
    with pytest.raises(ValueError):
        integrate_delta_line(g, REST, line_integrand(REST))
    with pytest.raises(ValueError):
        integrate_delta_line(g, np.array([1.0, 0, 0, 1.0]),
                             line_integrand(REST))


def test_delta_line_rejects_wrong_type():
    g = build_grid(REST, 8, 16)
    with pytest.raises(ValueError):
        integrate_delta_line(g, np.array([0, 0, 0, 1.0]),
                             inverse_square(REST))


def test_delta_line_derivative():
    # against delta'(y.l) with y = z: circle at height u3 = -c picks up
    # f = (v.l)/(t.l) -> J(c) = 2 pi (v0 + v3 c), so the integral is
    # -J'(0) = -2 pi v3.  delta' carries weight (-2,-2), so f is (0,0).
    g = build_grid(REST, 8, 16)
    v = np.array([0.9, 0.2, -0.4, 0.7])
    f = HomogeneousFn(
        lambda o: (minkowski_dot(v, null_vector_of(o))
                   / minkowski_dot(REST, null_vector_of(o))), (0, 0))
    val = integrate_delta_line(g, np.array([0, 0, 0, 1.0]), f, derivative=1)
    assert abs(val - (-2 * np.pi * v[3])) < 1e-7


def test_delta_line_derivative_gauge_independent():
    # the full integrand delta'(y.l) f has invariant weight for a (0,0)
    # f, so a grid in a boosted gauge must reproduce the rest answer
    v = np.array([0.9, 0.2, -0.4, 0.7])
    f = HomogeneousFn(
        lambda o: (minkowski_dot(v, null_vector_of(o))
                   / minkowski_dot(REST, null_vector_of(o))), (0, 0))
    y = np.array([0.3, -0.2, 0.5, 1.4])
    rest = integrate_delta_line(build_grid(REST, 8, 16), y, f, derivative=1)
    w = boost_matrix(0.7, [0.0, 0.6, -0.8]) @ REST
    moving = integrate_delta_line(build_grid(w, 8, 16), y, f, derivative=1)
    assert abs(rest - moving) < 1e-6 * max(abs(rest), 1.0)


def test_delta_line_derivative_rejects_wrong_type():
    g = build_grid(REST, 8, 16)
    y = np.array([0, 0, 0, 1.0])
    with pytest.raises(ValueError):
        integrate_delta_line(g, y, line_integrand(REST), derivative=1)
    f00 = HomogeneousFn(lambda o: np.ones(len(o), dtype=complex), (0, 0))
    with pytest.raises(ValueError):
        integrate_delta_line(g, y, f00, derivative=0)


# --- spin-frame derivatives ----------------------------------------------------


def test_spin_derivative_analytic_inverse_power():
    g = build_grid(REST, 12, 24)
    f = line_integrand(REST)
    sd = spin_derivative(g, f)
    tl = minkowski_dot(REST, g.vectors)
    assert np.max(np.abs(sd.unprimed
                         + np.conj(g.spinors) / tl[:, None] ** 2)) < 1e-9
    assert np.max(np.abs(sd.primed + g.spinors / tl[:, None] ** 2)) < 1e-9
    # Euler identity contraction, the documented postcondition
    euler = np.einsum('na,na->n', g.spinors, sd.unprimed) + f(g.spinors)
    assert np.max(np.abs(euler)) < 1e-8
    assert sd.field('unprimed').ptype == (-2, -1)
    assert sd.field('primed').ptype == (-1, -2)


def test_spin_derivative_static_charge_characteristic():
    # zeta_A = Q (m(v) conj(o))_A / (v.l) has primed derivative
    # -Q l_AA' / (2 (v.l)^2) with both indices lowered
    charge = 1.3
    for gauge_rap in (0.0, 0.7):
        t = boost_matrix(gauge_rap, [0, 1.0, 0]) @ REST
        g = build_grid(t, 12, 24)

        def component(a):
            def ev(o):
                num = np.einsum('ab,...b->...a', m_matrix(REST), np.conj(o))
                return (charge * num[..., a]
                        / minkowski_dot(REST, null_vector_of(o)))
            return HomogeneousFn(ev, (-1, 0))

        primed = np.stack([spin_derivative(g, component(a)).primed
                           for a in (0, 1)], axis=1)
        l_low = matrix_lower(mixed_matrix(g.vectors))
        vl = minkowski_dot(REST, g.vectors)
        expected = -charge * l_low / (2.0 * vl[:, None, None] ** 2)
        assert np.max(np.abs(primed - expected)) < 1e-8


def test_spin_derivative_zero_mean_images():
    # derivatives of type (-1,-2) functions integrate to zero
    g = build_grid(REST, 16, 32)
    rng = np.random.default_rng(42)
    for trial in range(20):
        c = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        u = rng.standard_normal(3) * 0.4
        v = np.concatenate([[np.sqrt(1 + u @ u)], u])
        k = trial % 3

        def ev(o):
            br = c[0] * o[..., 1] - c[1] * o[..., 0]
            vl = minkowski_dot(v, null_vector_of(o))
            tl = minkowski_dot(REST, null_vector_of(o))
            return br * vl ** k / tl ** (k + 2)

        sd = spin_derivative(g, HomogeneousFn(ev, (-1, -2)))
        vals = integrate(g, sd.field('unprimed'))
        scale = np.max(np.abs(sd.unprimed))
        assert np.max(np.abs(vals)) < 1e-7 * scale


def test_spin_derivative_rejects_type_lie():
    g = build_grid(REST, 8, 16)
    liar = HomogeneousFn(
        lambda o: 1.0 / minkowski_dot(REST, null_vector_of(o)), (-2, -2))
    with pytest.raises(ValueError, match="Euler"):
        spin_derivative(g, liar)


def test_audit_homogeneity_accepts_and_rejects():
    o = np.array([[1.0 + 0.2j, 0.3 - 1.0j], [0.5, 1.0 + 0.5j]])
    good = HomogeneousFn(
        lambda s: 1.0 / minkowski_dot(REST, null_vector_of(s)), (-1, -1))
    assert audit_homogeneity(good, o) < 1e-12
    bad = HomogeneousFn(lambda s: s[..., 0] + 1.0, (1, 0))
    with pytest.raises(ValueError):
        audit_homogeneity(bad, o)


# --- spherical harmonics -------------------------------------------------------


def test_harmonic_round_trip():
    from scipy.special import sph_harm_y
    g = build_grid(REST, 12, 24)
    target = {(0, 0): 0.3 + 0.1j, (2, 1): 2.0, (3, -2): -1.0 + 0.5j}
    vals = np.zeros(g.n_nodes, dtype=complex)
    for (ell, m), c in target.items():
        vals += c * sph_harm_y(ell, m, g.theta, g.phi)
    coeffs = harmonic_coefficients(g, vals, 4)
    for key, c in target.items():
        assert abs(coeffs[key] - c) < 1e-12
    others = [abs(v) for k, v in coeffs.items() if k not in target]
    assert max(others) < 1e-12
    back = harmonic_expand(coeffs, g.theta, g.phi)
    assert np.max(np.abs(back - vals)) < 1e-12
