"""Invariant integration over null directions.

A future null direction is represented by a spinor o; the associated null
vector l = null_vector_of(o) is scale-fixed by a unit timelike gauge vector
t through t.l = 1.  Integrals of homogeneity type {-2,-2} functions are
gauge independent; this module provides the grids, the quadrature, line
integrals against delta(y.l), and numerical spin-frame derivatives.
"""

from __future__ import annotations

import numpy as np
from scipy.special import sph_harm_y

from .linalg import fixed_tree_sum, gauss_legendre
from .spinors import (Tetrad, lorentz_of_sl2, minkowski_dot, node_spinor,
                      null_vector_of, sl2_boost, sl2_rotation)

AUDIT_TOL = 1e-10

# fixed complex rescalings used by the homogeneity audit; deterministic on
# purpose so repeated runs are bit-identical
_AUDIT_ALPHAS = (1.21 + 0.47j, 0.64 - 0.83j)


class HomogeneousFn:
    """Complex function of a direction spinor with declared scaling.

    The evaluator maps spinor arrays of shape (..., 2) to complex values of
    shape (...) and must satisfy f(a o, conj(a) conj(o)) = a^p conj(a)^q f
    for the declared type (p, q).  ``falloff`` optionally records a decay
    exponent used by asymptote extrapolation; the sphere routines ignore it.
    """

    def __init__(self, evaluator, ptype, falloff=None):
        self.evaluator = evaluator
        self.ptype = (int(ptype[0]), int(ptype[1]))
        self.falloff = falloff

    def __call__(self, spinors):
        return np.asarray(self.evaluator(np.asarray(spinors, dtype=complex)))


class NodeField:
    """Samples of a homogeneous function on the nodes of one grid.

    values has shape (n_nodes,) or (n_nodes, k); columns are integrated
    independently.  Carries the declared type of the sampled function.
    """

    def __init__(self, grid, values, ptype):
        self.grid = grid
        self.values = np.asarray(values)
        self.ptype = (int(ptype[0]), int(ptype[1]))


def audit_homogeneity(fn, spinors, tol=AUDIT_TOL):
    """Check the declared scaling type of ``fn`` on sample spinors.

    Raises ValueError when the relative residual exceeds ``tol``; returns
    the residual otherwise.  The probe rescalings are fixed constants.
    """
    o = np.asarray(spinors, dtype=complex).reshape(-1, 2)
    p, q = fn.ptype
    base = np.asarray(fn(o))
    scale = np.max(np.abs(base))
    if scale == 0.0:
        return 0.0
    worst = 0.0
    for alpha in _AUDIT_ALPHAS:
        expected = alpha ** p * np.conj(alpha) ** q * base
        got = np.asarray(fn(alpha * o))
        worst = max(worst, float(np.max(np.abs(got - expected))) / scale)
    if worst > tol:
        raise ValueError(
            f"homogeneity audit failed: declared type {fn.ptype} has "
            f"relative residual {worst:.3e} (tol {tol:.1e})")
    return worst


def _rest_sl2(t):
    """SL(2,C) element whose Lorentz action maps (1,0,0,0) to t."""
    space = np.linalg.norm(t[1:])
    if space < 1e-15:
        return np.eye(2, dtype=complex)
    rapidity = np.arccosh(t[0])
    return sl2_boost(rapidity, t[1:] / space)


def _axis_sl2(axis):
    """SL(2,C) rotation taking the z direction to ``axis``."""
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    cosang = np.clip(n[2], -1.0, 1.0)
    pivot = np.array([-n[1], n[0], 0.0])
    norm = np.linalg.norm(pivot)
    if norm < 1e-14:
        if cosang > 0.0:
            return np.eye(2, dtype=complex)
        # antipodal axis: rotate by pi about x
        return sl2_rotation(np.pi, np.array([1.0, 0.0, 0.0]))
    return sl2_rotation(np.arccos(cosang), pivot / norm)


class NullDirectionGrid:
    """Quadrature grid over null directions in the gauge of t.

    Nodes are Gauss-Legendre in x = cos(theta) crossed with a uniform
    periodic phi grid, flattened theta-major.  Every node spinor satisfies
    t.l = 1 and the weights sum to the full sphere area 4 pi.  Grids are
    immutable; derived matrices are cached on first use.
    """

    def __init__(self, t, n_theta, n_phi, axis=None, x_split=None):
        t = np.asarray(t, dtype=float)
        norm2 = float(minkowski_dot(t, t))
        if norm2 <= 0.0 or t[0] <= 0.0:
            raise ValueError("gauge vector must be future timelike")
        t = t / np.sqrt(norm2)
        if n_theta < 2 or n_phi < 4:
            raise ValueError("need n_theta >= 2 and n_phi >= 4")

        self.t = t
        self.n_phi = int(n_phi)
        self.n_theta = int(n_theta)

        # polar nodes, possibly split into panels at prescribed x values
        # (used for integrands with a kink on a known circle)
        if x_split is None:
            edges = np.array([-1.0, 1.0])
        else:
            interior = np.sort(np.asarray(x_split, dtype=float))
            if interior.size and (interior[0] <= -1.0 or interior[-1] >= 1.0):
                raise ValueError("x_split values must lie inside (-1, 1)")
            edges = np.concatenate([[-1.0], interior, [1.0]])
        xs, ws, panels = [], [], []
        start = 0
        for lo, hi in zip(edges[:-1], edges[1:]):
            x, w = gauss_legendre(n_theta, lo, hi)
            xs.append(x)
            ws.append(w)
            panels.append(slice(start, start + n_theta))
            start += n_theta
        self.x_nodes = np.concatenate(xs)
        self.x_weights = np.concatenate(ws)
        self.panels = tuple(panels)

        self.theta_nodes = np.arccos(np.clip(self.x_nodes, -1.0, 1.0))
        self.phi_nodes = 2.0 * np.pi * np.arange(n_phi) / n_phi

        sl2 = _rest_sl2(t)
        if axis is not None:
            sl2 = sl2 @ _axis_sl2(axis)
        self.sl2 = sl2
        self.lorentz = lorentz_of_sl2(sl2)
        self.lorentz_inv = lorentz_of_sl2(np.linalg.inv(sl2))

        th = self.theta_nodes[:, None] + np.zeros(n_phi)[None, :]
        ph = np.zeros_like(self.theta_nodes)[:, None] + self.phi_nodes[None, :]
        self.theta = th.ravel()
        self.phi = ph.ravel()
        xi = node_spinor(self.theta, self.phi)
        self.spinors = np.einsum('ab,nb->na', sl2, xi)
        self.vectors = null_vector_of(self.spinors).real
        self.weights = np.repeat(self.x_weights * (2.0 * np.pi / n_phi),
                                 n_phi)
        self.iotas = Tetrad(self.spinors, t).iota

        self.n_nodes = self.spinors.shape[0]
        self.shape = (self.x_nodes.size, n_phi)
        for arr in (self.t, self.x_nodes, self.x_weights, self.theta,
                    self.phi, self.spinors, self.vectors, self.weights,
                    self.iotas):
            arr.flags.writeable = False

    # -- coordinate helpers -------------------------------------------------

    def angles_of(self, spinors):
        """Grid-frame (theta, phi) of arbitrary direction spinors."""
        l = null_vector_of(np.asarray(spinors, dtype=complex))
        lr = np.einsum('ab,...b->...a', self.lorentz_inv, l.real)
        u = lr[..., 1:] / lr[..., :1]
        theta = np.arccos(np.clip(u[..., 2], -1.0, 1.0))
        phi = np.mod(np.arctan2(u[..., 1], u[..., 0]), 2.0 * np.pi)
        return theta, phi



def build_grid(t, n_theta=24, n_phi=48, axis=None, x_split=None):
    """Quadrature grid over null directions scale-fixed by t.l = 1.

    Parameters
    ----------
    t : unit future timelike gauge vector (normalized if needed)
    n_theta, n_phi : polar / azimuthal resolution (per panel in theta when
        ``x_split`` is given)
    axis : optional 3-vector, polar axis in the rest coordinates of t
    x_split : optional interior break points of cos(theta), for integrands
        with a kink on a known circle
    """
    return NullDirectionGrid(t, n_theta, n_phi, axis=axis, x_split=x_split)


def _values_and_type(grid, f):
    if isinstance(f, NodeField):
        if f.grid is not grid:
            raise ValueError("node field belongs to a different grid")
        return f.values, f.ptype
    if isinstance(f, HomogeneousFn):
        audit_homogeneity(f, grid.spinors[::max(grid.n_nodes // 7, 1)])
        return f(grid.spinors), f.ptype
    raise TypeError("expected a HomogeneousFn or a NodeField")


def integrate(grid, f):
    """Invariant integral of a type {-2,-2} function over null directions.

    In the grid gauge the measure is the solid angle of the unit sphere of
    directions.  The reduction is a fixed pairwise tree, so results do not
    depend on evaluation order or thread count.
    """
    values, ptype = _values_and_type(grid, f)
    if ptype != (-2, -2):
        raise ValueError(f"integrate needs type (-2, -2), got {ptype}")
    if values.ndim == 1:
        return complex(fixed_tree_sum(grid.weights * values))
    return fixed_tree_sum(grid.weights[:, None] * values, axis=0)


def delta_line_spinors(grid, y, n_psi, offset=0.0):
    """Node spinors and density prefactor of the circle y.l = offset.

    Works in the rest coordinates of the grid gauge where l = (1, u); the
    constraint picks the circle u.yvec = y0 - offset of the unit sphere.
    """
    y = np.asarray(y, dtype=float)
    yr = grid.lorentz_inv @ y
    y0, yvec = yr[0], yr[1:]
    radius = np.linalg.norm(yvec)
    cosal = (y0 - offset) / radius
    if not -1.0 < cosal < 1.0:
        raise ValueError("line y.l = offset does not meet the light cone")
    sinal = np.sqrt(1.0 - cosal ** 2)
    e3 = yvec / radius
    seed = np.array([1.0, 0.0, 0.0])
    if abs(e3[0]) > 0.9:
        seed = np.array([0.0, 1.0, 0.0])
    e1 = seed - e3 * (seed @ e3)
    e1 = e1 / np.linalg.norm(e1)
    e2 = np.cross(e3, e1)
    psi = 2.0 * np.pi * np.arange(n_psi) / n_psi
    u = (cosal * e3[None, :]
         + sinal * (np.cos(psi)[:, None] * e1[None, :]
                    + np.sin(psi)[:, None] * e2[None, :]))
    theta = np.arccos(np.clip(u[:, 2], -1.0, 1.0))
    phi = np.arctan2(u[:, 1], u[:, 0])
    spinors = np.einsum('ab,nb->na', grid.sl2, node_spinor(theta, phi))
    return spinors, radius


def integrate_delta_line(grid, y, f, n_psi=None, derivative=0):
    """Line integral of f against delta(y.l) over null directions.

    ``y`` must be spacelike so that the plane y.l = 0 cuts the light cone
    in a circle; f must be of type (-1,-1) (the delta factor carries the
    remaining homogeneity).  ``derivative=1`` integrates against the
    derivative delta'(y.l) instead, by differencing the line integral of
    delta(y.l - c) at small offsets c; the extra weight of delta' means
    f must then be of type (0,0).
    """
    y = np.asarray(y, dtype=float)
    if minkowski_dot(y, y) >= 0.0:
        raise ValueError("y must be spacelike")
    if not isinstance(f, HomogeneousFn):
        raise TypeError("expected a HomogeneousFn")
    if derivative not in (0, 1):
        raise ValueError("derivative must be 0 or 1")
    want = (-1, -1) if derivative == 0 else (0, 0)
    if f.ptype != want:
        raise ValueError(f"delta-line integrand must be type {want}, "
                         f"got {f.ptype}")
    if n_psi is None:
        n_psi = max(2 * grid.n_phi, 64)
    spin0, radius = delta_line_spinors(grid, y, n_psi)
    audit_homogeneity(f, spin0[::max(n_psi // 5, 1)])

    def line_value(offset):
        spinors, rad = delta_line_spinors(grid, y, n_psi, offset)
        vals = f(spinors)
        return fixed_tree_sum(vals) * (2.0 * np.pi / n_psi) / rad

    if derivative == 0:
        return complex(line_value(0.0))
    if derivative == 1:
        h = 1e-2 * radius
        stencil = (-line_value(2 * h) + 8 * line_value(h)
                   - 8 * line_value(-h) + line_value(-2 * h)) / (12 * h)
        # delta'(y.l) = -d/dc delta(y.l - c) at c = 0
        return complex(-stencil)


# ---------------------------------------------------------------------------
# spin-frame derivatives
#
# Components of homogeneous functions are half-angle objects on the sphere
# (odd spinor degrees are not polynomial in cos theta), so grid-based
# spectral differencing is not available.  Instead each node decouples:
# the Euler identities fix the derivative along o, and circle differencing
# of the evaluator in one transverse spinor direction fixes the rest.


def _circle_probe(evaluator, spinors, direction, h=1e-5, n_circle=8):
    """Directional Wirtinger derivatives by circle differencing.

    Evaluates f on small circles o + h e^{i beta} mu and extracts the
    first Fourier modes: returns (mu^A d_A f, conj(mu)^A' d'_A' f).  Uses
    only evaluations of f; independent of any declared homogeneity type.
    Error is O(h^2) from the cubic terms of the local expansion.
    """
    spinors = np.asarray(spinors, dtype=complex)
    beta = 2.0 * np.pi * np.arange(n_circle) / n_circle
    step = h * np.linalg.norm(spinors, axis=-1)
    eps = step[None, :] * np.exp(1j * beta)[:, None]
    shifted = spinors[None, :, :] + eps[:, :, None] * direction[None, :, :]
    vals = np.asarray(evaluator(shifted))
    d = (vals * np.exp(-1j * beta)[:, None]).mean(axis=0) / step
    dbar = (vals * np.exp(1j * beta)[:, None]).mean(axis=0) / step
    return d, dbar


def spin_derivative_samples(evaluator, spinors, ptype, s_times_ds=None):
    """Both spin-frame derivatives of a homogeneous f at given spinors.

    Returns (d, dprime) with d[..., A] = df/do^A (lower index) and
    dprime[..., A'] = df/d(conj o)^A'.  The component along o comes from
    the Euler identity of the declared type; the transverse component from
    circle differencing along L conj(o).  For functions that also depend
    on a parameter s of scaling weight 2, pass the samples of s df/ds;
    omit for functions of the direction alone.
    """
    o = np.asarray(spinors, dtype=complex).reshape(-1, 2)
    p, q = ptype
    f = np.asarray(evaluator(o))
    sterm = 0.0 if s_times_ds is None else np.asarray(s_times_ds).reshape(-1)
    # transverse direction with bracket(o, mu) = |o|^2, never parallel to o
    mu = np.stack([-np.conj(o[:, 1]), np.conj(o[:, 0])], axis=-1)
    fd_d, fd_dp = _circle_probe(evaluator, o, mu)
    rhs1 = p * f - sterm
    rhs2 = q * f - sterm
    det = o[:, 0] * mu[:, 1] - o[:, 1] * mu[:, 0]
    d = np.stack([(mu[:, 1] * rhs1 - o[:, 1] * fd_d),
                  (o[:, 0] * fd_d - mu[:, 0] * rhs1)], axis=-1) / det[:, None]
    cdet = np.conj(det)
    co, cmu = np.conj(o), np.conj(mu)
    dprime = np.stack([(cmu[:, 1] * rhs2 - co[:, 1] * fd_dp),
                       (co[:, 0] * fd_dp - cmu[:, 0] * rhs2)],
                      axis=-1) / cdet[:, None]
    shape = np.asarray(spinors).shape
    return d.reshape(shape), dprime.reshape(shape)


class SpinDerivative:
    """Result of the spin-derivative evaluation on one grid.

    ``unprimed``/``primed`` hold the node samples of the two derivative
    fields; ``residual`` is the relative Euler-identity mismatch measured
    by finite differences of the evaluator along o itself, which the
    construction does not enforce.
    """

    def __init__(self, grid, unprimed, primed, ptype, residual):
        self.grid = grid
        self.unprimed = unprimed
        self.primed = primed
        self.ptype = ptype
        self.residual = residual

    def field(self, which='unprimed'):
        p, q = self.ptype
        if which == 'unprimed':
            return NodeField(self.grid, self.unprimed, (p - 1, q))
        if which == 'primed':
            return NodeField(self.grid, self.primed, (p, q - 1))
        raise ValueError("which must be 'unprimed' or 'primed'")


def spin_derivative(grid, f, tol=1e-6, s_times_ds=None):
    """Spin-frame derivatives of a HomogeneousFn with an Euler check.

    The radial scaling content comes from the declared type; it is then
    probed independently by differencing the evaluator along o (which
    measures o^A d_A f and conj(o)^A' d'_A' f directly).  A relative
    residual above ``tol`` signals a wrong declared type or rough data
    and raises ValueError.
    """
    if not isinstance(f, HomogeneousFn):
        raise TypeError("expected a HomogeneousFn")
    values = f(grid.spinors)
    d, dp = spin_derivative_samples(f.evaluator, grid.spinors, f.ptype,
                                    s_times_ds=s_times_ds)

    idx = np.arange(0, grid.n_nodes, max(grid.n_nodes // 16, 1))
    p, q = f.ptype
    sterm = (0.0 if s_times_ds is None
             else np.asarray(s_times_ds).reshape(-1)[idx])
    fd_d, fd_dp = _circle_probe(f.evaluator, grid.spinors[idx],
                                grid.spinors[idx])
    scale = max(float(np.max(np.abs(values))), 1e-300)
    residual = max(
        float(np.max(np.abs(fd_d - (p * values[idx] - sterm)))),
        float(np.max(np.abs(fd_dp - (q * values[idx] - sterm))))) / scale
    if residual > tol:
        raise ValueError(
            f"spin derivative failed the Euler identity check: "
            f"residual {residual:.3e} exceeds {tol:.1e}")
    return SpinDerivative(grid, d, dp, f.ptype, residual)


# ---------------------------------------------------------------------------
# low-degree spherical harmonics on a grid (enough for solving the sphere
# Laplacian; full transform libraries are out of scope)


def harmonic_coefficients(grid, values, lmax):
    """Coefficients c[l][m] of grid samples against Y_lm in the grid frame."""
    v = np.asarray(values)
    coeffs = {}
    for ell in range(lmax + 1):
        for m in range(-ell, ell + 1):
            y = sph_harm_y(ell, m, grid.theta, grid.phi)
            coeffs[(ell, m)] = complex(
                fixed_tree_sum(grid.weights * np.conj(y) * v))
    return coeffs


def harmonic_expand(coeffs, theta, phi):
    """Evaluate a harmonic coefficient table at angles of the same frame."""
    theta = np.asarray(theta, dtype=float)
    out = np.zeros(np.broadcast(theta, phi).shape, dtype=complex)
    for (ell, m), c in coeffs.items():
        if c != 0.0:
            out = out + c * sph_harm_y(ell, m, theta, phi)
    return out
