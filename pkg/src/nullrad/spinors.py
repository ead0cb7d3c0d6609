"""Two-spinor calculus over Minkowski space in a fixed matrix realization.

Vectors are real length-4 arrays indexed (t, x, y, z), metric signature
(+, -, -, -).  Spinors are complex length-2 arrays carrying an upper
index; the index is lowered with the antisymmetric matrix ``EPS_LOWER``,
so ``lower_spinor(x) = (-x[1], x[0])``.  The maps between vectors, 2x2
matrices and spinor pairs are fixed once here, with their normalizations,
and every other module imports them rather than re-deriving factors.

The one endemic trap: ``vec_of_matrix(mixed_matrix(v)) == 2*v``.  Nothing
in this file hides that factor; callers own it explicitly.
"""
from __future__ import annotations

import numpy as np

MINKOWSKI = np.diag([1.0, -1.0, -1.0, -1.0])

# index-lowering symplectic form; lower = L @ x, raise = -L @ x
EPS_LOWER = np.array([[0.0, -1.0], [1.0, 0.0]])

_SIGMA = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)

# spatial matrices appearing in mixed_matrix: (sigma1, -sigma2, sigma3)
_SIGMA_TILDE = np.array([_SIGMA[0], -_SIGMA[1], _SIGMA[2]])


def minkowski_dot(u, v):
    u = np.asarray(u)
    v = np.asarray(v)
    return (u[..., 0] * v[..., 0] - u[..., 1] * v[..., 1]
            - u[..., 2] * v[..., 2] - u[..., 3] * v[..., 3])


def lower_spinor(x):
    x = np.asarray(x)
    return np.stack([-x[..., 1], x[..., 0]], axis=-1)


def raise_spinor(x):
    x = np.asarray(x)
    return np.stack([x[..., 1], -x[..., 0]], axis=-1)


def bracket(a, b):
    """Symplectic pairing of two upper-index spinors, a_B b^B.

    Written in an explicitly antisymmetrized form so that the identities
    bracket(a, b) == -bracket(b, a) and bracket(a, a) == 0 hold bitwise
    even when complex products are fused.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    forward = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    backward = b[..., 0] * a[..., 1] - b[..., 1] * a[..., 0]
    return 0.5 * (forward - backward)


def null_vector_of(o):
    """Future null vector built from a spinor and its conjugate.

    Equals ``vec_of_matrix(outer(o, conj(o)))``; in particular the time
    component is |o0|^2 + |o1|^2 > 0.
    """
    o = np.asarray(o)
    a, b = o[..., 0], o[..., 1]
    cross = a * np.conj(b)
    return np.stack([
        np.abs(a) ** 2 + np.abs(b) ** 2,
        2.0 * cross.real,
        2.0 * cross.imag,
        np.abs(a) ** 2 - np.abs(b) ** 2,
    ], axis=-1)


def mixed_matrix(v):
    """Vector as a 2x2 matrix: v0*I + v1*s1 - v2*s2 + v3*s3."""
    v = np.asarray(v, dtype=complex)
    m = np.zeros(v.shape[:-1] + (2, 2), dtype=complex)
    m[..., 0, 0] = v[..., 0] + v[..., 3]
    m[..., 0, 1] = v[..., 1] + 1j * v[..., 2]
    m[..., 1, 0] = v[..., 1] - 1j * v[..., 2]
    m[..., 1, 1] = v[..., 0] - v[..., 3]
    return m


def vec_of_matrix(m):
    """Inverse-direction map; note vec_of_matrix(mixed_matrix(v)) = 2 v."""
    m = np.asarray(m)
    return np.stack([
        m[..., 0, 0] + m[..., 1, 1],
        m[..., 0, 1] + m[..., 1, 0],
        -1j * (m[..., 0, 1] - m[..., 1, 0]),
        m[..., 0, 0] - m[..., 1, 1],
    ], axis=-1)


def symmetric_pair(u, v):
    """Unreduced symmetric outer product u (x) v + v (x) u."""
    u = np.asarray(u)
    v = np.asarray(v)
    return (u[..., :, None] * v[..., None, :]
            + v[..., :, None] * u[..., None, :])


def matrix_lower(m):
    """Lower both indices of a mixed 2x2 matrix: -L @ M @ L."""
    return -np.einsum('ab,...bc,cd->...ad', EPS_LOWER, np.asarray(m),
                      EPS_LOWER)


def m_matrix(v):
    """L @ mixed_matrix(v) @ L; equals -I for v = (1,0,0,0)."""
    return np.einsum('ab,...bc,cd->...ad', EPS_LOWER, mixed_matrix(v),
                     EPS_LOWER)


def w_matrix(v):
    """Bilinear form with v.l = o^T W conj(o); equals +I at rest."""
    return -m_matrix(v)


def node_spinor(theta, phi):
    """Spinor of the null direction at colatitude theta, longitude phi.

    The associated null vector is t + sin(theta)(cos(phi), sin(phi), 0)
    + cos(theta) z with unit time component.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return np.stack([
        np.cos(theta / 2.0) * np.ones_like(phi),
        np.sin(theta / 2.0) * np.exp(-1j * phi),
    ], axis=-1)


class Tetrad:
    """Null tetrad (l, n, m, iota) adapted to a spinor o and a unit
    timelike vector t.

    Attributes
    ----------
    l : real null vector of o
    n : real null vector with l.n = 1; satisfies t = scale*n + l/(2*scale)
    m : complex null vector with m.conj(m) = -1, orthogonal to l and n
    iota : spinor with bracket(o, iota) = 1
    scale : t.l
    """

    def __init__(self, o, t):
        o = np.asarray(o, dtype=complex)
        t = np.asarray(t, dtype=float)
        if np.any(minkowski_dot(t, t) <= 0) or np.any(t[..., 0] <= 0):
            raise ValueError("tetrad gauge vector must be future timelike")
        self.o = o
        self.t = t
        self.l = null_vector_of(o)
        c = minkowski_dot(t, self.l)
        self.scale = c
        vt = mixed_matrix(t)
        self.iota = np.einsum('...ab,...b->...a', vt,
                              lower_spinor(np.conj(o))) / c[..., None]
        self.n = null_vector_of(self.iota) / 2.0
        self.m = vec_of_matrix(
            self.o[..., :, None] * np.conj(self.iota)[..., None, :]
        ) / np.sqrt(2.0)


def tetrad_from(o, t):
    """Normalized tetrad (iota, l, n, m) adapted to o and t; see Tetrad."""
    return Tetrad(o, t)


def sl2_boost(rapidity: float, direction) -> np.ndarray:
    n = np.asarray(direction, dtype=float)
    n = n / np.linalg.norm(n)
    k = np.einsum('i,iab->ab', n, _SIGMA_TILDE)
    return np.cosh(rapidity / 2.0) * np.eye(2) + np.sinh(rapidity / 2.0) * k


def sl2_rotation(angle: float, axis) -> np.ndarray:
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    k = np.einsum('i,iab->ab', n, _SIGMA_TILDE)
    return np.cos(angle / 2.0) * np.eye(2) + 1j * np.sin(angle / 2.0) * k


def lorentz_of_sl2(s: np.ndarray) -> np.ndarray:
    """Real 4x4 Lorentz matrix induced by the spinor map o -> s @ o."""
    lam = np.zeros((4, 4))
    for a in range(4):
        e = np.zeros(4)
        e[a] = 1.0
        m = s @ mixed_matrix(e) @ np.conj(s).T
        lam[:, a] = vec_of_matrix(m).real / 2.0
    return lam


def boost_matrix(rapidity: float, direction) -> np.ndarray:
    return lorentz_of_sl2(sl2_boost(rapidity, direction))


def rotation_matrix(angle: float, axis) -> np.ndarray:
    return lorentz_of_sl2(sl2_rotation(angle, axis))


# ---------------------------------------------------------------------------
# dictionaries between symmetric bispinors, (E, B) triples and rank-2
# antisymmetric tensors (lower indices).  The same tensor dictionary is
# used for the field strength and for angular-momentum style moments.

_LEVI3 = np.zeros((3, 3, 3))
for _i, _j, _k in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
    _LEVI3[_i, _j, _k] = 1.0
    _LEVI3[_i, _k, _j] = -1.0


def bispinor_from_fields(e_field, b_field):
    """Symmetric 2x2 field spinor from real field triples.

    The packed combination is C = E + iB; with the sigma-vector used by
    mixed_matrix this is the half that transforms as an unprimed symmetric
    bispinor under boosts (the opposite sign only survives rotations).
    """
    c = np.asarray(e_field, dtype=complex) + 1j * np.asarray(b_field)
    phi = np.zeros(c.shape[:-1] + (2, 2), dtype=complex)
    phi[..., 0, 0] = c[..., 0] - 1j * c[..., 1]
    phi[..., 0, 1] = -c[..., 2]
    phi[..., 1, 0] = -c[..., 2]
    phi[..., 1, 1] = -(c[..., 0] + 1j * c[..., 1])
    return phi


def fields_from_bispinor(phi):
    phi = np.asarray(phi)
    cx = (phi[..., 0, 0] - phi[..., 1, 1]) / 2.0
    cy = 1j * (phi[..., 0, 0] + phi[..., 1, 1]) / 2.0
    cz = -phi[..., 0, 1]
    c = np.stack([cx, cy, cz], axis=-1)
    return c.real, c.imag


def antisym_tensor_from_fields(e_field, b_field):
    """Antisymmetric tensor with T[i,0] = E_i and T[i,j] = -eps_ijk B_k."""
    e = np.asarray(e_field)
    b = np.asarray(b_field)
    t = np.zeros(e.shape[:-1] + (4, 4))
    t[..., 1:, 0] = e
    t[..., 0, 1:] = -e
    t[..., 1:, 1:] = -np.einsum('ijk,...k->...ij', _LEVI3, b)
    return t


def fields_from_antisym_tensor(t):
    t = np.asarray(t)
    e = t[..., 1:, 0].copy()
    b = -0.5 * np.einsum('ijk,...jk->...i', _LEVI3, t[..., 1:, 1:])
    return e, b


def bispinor_from_antisym_tensor(t):
    return bispinor_from_fields(*fields_from_antisym_tensor(t))


def antisym_tensor_from_bispinor(phi):
    return antisym_tensor_from_fields(*fields_from_bispinor(phi))


def hodge_dual(t):
    """Left dual (1/2) eps_ab^cd T_cd on lower-index antisymmetric tensors,
    with eps_0123 = +1; applying it twice gives -T."""
    e, b = fields_from_antisym_tensor(t)
    # dual swaps (E, B) -> (-B, E) in this dictionary
    return antisym_tensor_from_fields(-b, e)


# ---------------------------------------------------------------------------
# Dirac algebra, standard representation

GAMMA = np.zeros((4, 4, 4), dtype=complex)
GAMMA[0] = np.diag([1.0, 1.0, -1.0, -1.0])
for _i in range(3):
    GAMMA[_i + 1, :2, 2:] = _SIGMA[_i]
    GAMMA[_i + 1, 2:, :2] = -_SIGMA[_i]

GAMMA_LOWER = np.einsum('ab,bij->aij', MINKOWSKI, GAMMA)

# spin part of the Lorentz generators, (i/4)[gamma_a, gamma_b], lower indices
SPIN_GENERATORS = 0.25j * (np.einsum('aij,bjk->abik', GAMMA_LOWER, GAMMA_LOWER)
                           - np.einsum('bij,ajk->abik', GAMMA_LOWER,
                                       GAMMA_LOWER))


def gamma_dot(v):
    """Clifford element gamma^a v_a; squares to (v.v) I."""
    v = np.asarray(v)
    return np.einsum('...a,aij->...ij', v @ MINKOWSKI, GAMMA)


def energy_projectors(v):
    """Projectors (1 +/- gamma.v)/2 for a unit timelike vector v."""
    gv = gamma_dot(v)
    eye = np.eye(4)
    return 0.5 * (eye + gv), 0.5 * (eye - gv)


def dirac_algebra(v, tol=1e-10):
    """Clifford element gamma.v and the pair of energy projectors.

    v must lie on the unit shell: (gamma.v)^2 = 1 and the projectors are
    complementary idempotents exactly there.
    """
    v = np.asarray(v)
    if abs(minkowski_dot(v, v) - 1.0) > tol:
        raise ValueError("v must satisfy v.v = 1")
    plus, minus = energy_projectors(v)
    return gamma_dot(v), plus, minus


def dirac_bar(psi):
    """Dirac adjoint row spinor conj(psi)^T gamma^0."""
    return np.einsum('...i,ij->...j', np.conj(np.asarray(psi)), GAMMA[0])
