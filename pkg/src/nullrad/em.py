"""Electromagnetic data on null infinity and its long-range content.

The field is carried by a spinor-valued profile zeta_A(s, o), homogeneous
of joint degree (-1, 0) under (s, o) -> (a conj(a) s, a o).  Its second
s-derivative radiates (the free-field integral), its s-limits hold the
long-range information: the charge aspect q from the future limit, the
memory variable sigma from the past one, and their advanced-side partners
q', sigma' from the matching data at past null infinity.  The variables
assemble into a degree-(0,0) potential Phi and, through a sign-kernel
integral, into the 1/R^2 field at spacelike infinity with its electric
and magnetic parts.

Every extraction here has a closed-form companion for particle sources;
the two routes are kept separate so each can test the other.
"""

from __future__ import annotations

import numpy as np

from .linalg import fixed_tree_sum, richardson_limit
from .sphere import (HomogeneousFn, build_grid, harmonic_coefficients,
                     harmonic_expand, integrate_delta_line,
                     spin_derivative_samples)
from .spinors import (bispinor_from_antisym_tensor, hodge_dual, lower_spinor,
                      minkowski_dot, mixed_matrix, null_vector_of,
                      raise_spinor)
from .worldlines import Worldline

REST = np.array([1.0, 0.0, 0.0, 0.0])
_METRIC_SIGNS = np.array([1.0, -1.0, -1.0, -1.0])
_AUDIT_ALPHAS = (1.21 + 0.47j, 0.64 - 0.83j)


def _lower_vec(v):
    return np.asarray(v) * _METRIC_SIGNS


def iota_of(spinors, gauge=REST):
    """Companion spinor iota^A with bracket(o, iota) = 1, adapted to gauge.

    iota = mixed(t) (L conj(o)) / (t.l); degree (-1, 0) in o, so every
    contraction below inherits a definite scaling type.
    """
    o = np.asarray(spinors, dtype=complex)
    tl = minkowski_dot(np.asarray(gauge, dtype=float), null_vector_of(o))
    up = np.einsum('ab,...b->...a', mixed_matrix(gauge),
                   lower_spinor(np.conj(o)))
    return up / tl[..., None]


def coulomb_zeta(charge, velocity=REST):
    """Characteristic spinor of a uniformly moving point charge.

    Returns an evaluator for the lower-index c_A(o); independent of s and
    of the worldline anchor.  For velocity t this is charge * iota_A.
    """
    v = np.asarray(velocity, dtype=float)

    def c_lower(spinors):
        o = np.asarray(spinors, dtype=complex)
        vl = minkowski_dot(v, null_vector_of(o))
        up = np.einsum('ab,...b->...a', mixed_matrix(v),
                       lower_spinor(np.conj(o)))
        return charge * lower_spinor(up) / vl[..., None]

    return c_lower


def _contract(upper, lower):
    return np.einsum('...a,...a->...', upper, lower)


# ---------------------------------------------------------------------------
# characteristic data


class EMAsymptoticData:
    """Radiative data zeta_A(s, o) at future null infinity.

    ``zeta`` maps (s, spinors) with s broadcastable against the leading
    shape of spinors (..., 2) to lower-index components (..., 2); it must
    be jointly homogeneous of degree (-1, 0).  ``zeta_dot``/``zeta_ddot``
    may be supplied or fall back to s-differencing.  ``limit_past`` and
    ``limit_future`` are evaluators of the s -> -inf / +inf values; when
    absent they are extrapolated along a geometric s-ladder at the
    declared approach rate ``epsilon``.

    ``charge`` is the total complex charge; the contraction zeta^A o_A
    must reproduce it at every sampled (s, node).  ``past_side`` holds the
    matching dataset at past null infinity (its future limit must agree
    with this data's past limit), used for the advanced-side long-range
    variables.  ``window`` brackets the s-support of zeta_dot beyond
    which the news is below ``tail``.
    """

    def __init__(self, zeta, zeta_dot=None, zeta_ddot=None, charge=0.0,
                 limit_past=None, limit_future=None, gauge=REST,
                 epsilon=1.0, s_scale=1.0, window=None, tail=0.0,
                 past_side=None):
        self.zeta = zeta
        self._zeta_dot = zeta_dot
        self._zeta_ddot = zeta_ddot
        self.charge = complex(charge)
        self.limit_past = limit_past
        self.limit_future = limit_future
        self.gauge = np.asarray(gauge, dtype=float)
        self.epsilon = float(epsilon)
        self.s_scale = float(s_scale)
        self.window = None if window is None else (float(window[0]),
                                                   float(window[1]))
        self.tail = float(tail)
        self.past_side = past_side

    def zeta_dot(self, s, spinors, h=1e-5):
        if self._zeta_dot is not None:
            return self._zeta_dot(s, spinors)
        step = h * max(1.0, self.s_scale)
        s = np.asarray(s, dtype=float)
        num = (-self.zeta(s + 2 * step, spinors)
               + 8 * self.zeta(s + step, spinors)
               - 8 * self.zeta(s - step, spinors)
               + self.zeta(s - 2 * step, spinors))
        return num / (12 * step)

    def zeta_ddot(self, s, spinors, h=1e-4):
        if self._zeta_ddot is not None:
            return self._zeta_ddot(s, spinors)
        step = h * max(1.0, self.s_scale)
        s = np.asarray(s, dtype=float)
        num = (-self.zeta_dot(s + 2 * step, spinors)
               + 8 * self.zeta_dot(s + step, spinors)
               - 8 * self.zeta_dot(s - step, spinors)
               + self.zeta_dot(s - 2 * step, spinors))
        return num / (12 * step)

    def limit(self, sign, spinors):
        """zeta_A at s -> sign * inf: declared evaluator or extrapolation."""
        declared = self.limit_future if sign > 0 else self.limit_past
        if declared is not None:
            return declared(spinors)
        ladder = sign * self.s_scale * 16.0 * 2.0 ** np.arange(6)
        vals = np.array([self.zeta(s, spinors) for s in ladder])
        value, _err, diverging = richardson_limit(vals, step_ratio=2.0,
                                                  order=self.epsilon)
        if diverging:
            raise ValueError("zeta limit ladder does not settle; declare "
                             "limit evaluators or a slower epsilon")
        return value

    def news(self, s, spinors):
        """iota^A zeta_dot_A, the radiation rate along each direction."""
        return _contract(iota_of(spinors, self.gauge),
                         self.zeta_dot(s, spinors))

    def out_scalar(self, s, spinors):
        """iota^A (zeta_A(s) - zeta_A(+inf)); choice of iota drops out."""
        diff = self.zeta(s, spinors) - self.limit(+1, spinors)
        return _contract(iota_of(spinors, self.gauge), diff)

    def charge_samples(self, spinors, s=0.0):
        """zeta^A o_A at given nodes; constant and equal to the charge."""
        z = self.zeta(s, spinors)
        return _contract(raise_spinor(z), lower_spinor(spinors))

    def translated(self, a):
        """Data of the same field with the origin moved by a."""
        a = np.asarray(a, dtype=float)

        def shift(sp):
            return minkowski_dot(a, null_vector_of(np.asarray(sp)).real)

        def zt(s, sp):
            return self.zeta(np.asarray(s) - shift(sp), sp)

        def zdt(s, sp):
            return self.zeta_dot(np.asarray(s) - shift(sp), sp)

        window = None
        if self.window is not None:
            # widen by the largest |a.l| on the gauge section
            reach = abs(a[0]) * 2.0 + 2.0 * float(np.linalg.norm(a[1:]))
            window = (self.window[0] - reach, self.window[1] + reach)
        return EMAsymptoticData(
            zt, zeta_dot=zdt, charge=self.charge,
            limit_past=self.limit_past, limit_future=self.limit_future,
            gauge=self.gauge, epsilon=self.epsilon, s_scale=self.s_scale,
            window=window, tail=self.tail,
            past_side=None if self.past_side is None
            else self.past_side.translated(a))

    def audit(self, spinors, s=0.37, tol=1e-8, charge_tol=1e-9,
              match_tol=1e-5):
        """Scaling-law, charge and matching checks on sample directions."""
        worst = 0.0
        for alpha in _AUDIT_ALPHAS:
            sc = (alpha * np.conj(alpha)).real
            ref = self.zeta(s, spinors)
            val = self.zeta(sc * s, alpha * np.asarray(spinors))
            worst = max(worst, float(np.max(np.abs(val * alpha - ref))))
        if worst > tol:
            raise ValueError(f"zeta violates degree (-1,0) scaling "
                             f"by {worst:.2e}")
        scale = max(1.0, float(np.max(np.abs(self.zeta(s, spinors)))))
        qres = float(np.max(np.abs(self.charge_samples(spinors, s)
                                   - self.charge)))
        for probe in (-3.1 * self.s_scale, 2.4 * self.s_scale):
            qres = max(qres, float(np.max(np.abs(
                self.charge_samples(spinors, probe) - self.charge))))
        if qres > charge_tol * scale:
            raise ValueError(f"zeta^A o_A drifts from the declared charge "
                             f"by {qres:.2e}")
        if self.past_side is not None:
            gap = float(np.max(np.abs(self.limit(-1, spinors)
                                      - self.past_side.limit(+1, spinors))))
            if gap > match_tol * scale:
                raise ValueError(f"past limit and past-side future limit "
                                 f"disagree by {gap:.2e}")
        # declared limits win over the s-ladder, but must agree with it
        for sign, declared in ((+1, self.limit_future),
                               (-1, self.limit_past)):
            if declared is None:
                continue
            probe = EMAsymptoticData(
                self.zeta, charge=self.charge, gauge=self.gauge,
                epsilon=self.epsilon, s_scale=self.s_scale)
            gap = float(np.max(np.abs(probe.limit(sign, spinors)
                                      - declared(spinors))))
            if gap > match_tol * scale:
                raise ValueError(f"declared s -> {sign}inf limit is off the "
                                 f"extrapolated one by {gap:.2e}")
        return max(worst, qres)


class CurrentModel:
    """Source of characteristic data: point charges, a static charge, or
    a charged Dirac packet on the mass hyperboloid.

    Use the classmethod constructors.  ``characteristic(s, spinors)``
    returns the lower-index c_A and the total complex charge; for point
    charges it is evaluated at the cone parameter's retarded root, the
    other variants are s-independent.
    """

    def __init__(self, kind, worldlines=None, charge=None, velocity=None,
                 anchor=None, profile=None, coupling=None):
        self.kind = kind
        self.worldlines = worldlines
        self.velocity = None if velocity is None else np.asarray(
            velocity, dtype=float)
        self.anchor = None if anchor is None else np.asarray(
            anchor, dtype=float)
        self._charge = charge
        self.profile = profile
        self.coupling = coupling

    @classmethod
    def point_charges(cls, worldlines):
        lines = tuple(worldlines)
        if not lines:
            raise ValueError("need at least one worldline")
        for w in lines:
            if not isinstance(w, Worldline):
                raise TypeError("point sources must be Worldline objects")
        return cls('point', worldlines=lines)

    @classmethod
    def static_charge(cls, charge, velocity=REST, anchor=None):
        v = np.asarray(velocity, dtype=float)
        if minkowski_dot(v, v) <= 0.0 or v[0] <= 0.0:
            raise ValueError("velocity must be future timelike")
        v = v / np.sqrt(minkowski_dot(v, v))
        return cls('static', charge=complex(charge), velocity=v,
                   anchor=anchor)

    @classmethod
    def dirac_packet(cls, profile, coupling):
        return cls('dirac', profile=profile, coupling=float(coupling))

    @property
    def total_charge(self):
        if self.kind == 'point':
            return complex(sum(w.charge for w in self.worldlines))
        if self.kind == 'static':
            return self._charge
        from .hyperboloid import dirac_charge
        return complex(self.coupling * dirac_charge(self.profile))

    def velocity_limits(self):
        """Pairs (charge, v(-inf), v(+inf)) of the carrier velocities."""
        if self.kind == 'point':
            return [(w.charge,) + w.velocity_limits()
                    for w in self.worldlines]
        if self.kind == 'static':
            return [(self._charge, self.velocity, self.velocity)]
        raise ValueError("a Dirac packet has no single carrier velocity")

    def characteristic(self, s, spinors):
        o = np.asarray(spinors, dtype=complex)
        if self.kind == 'static':
            return coulomb_zeta(self._charge, self.velocity)(o), self._charge
        if self.kind == 'dirac':
            from .hyperboloid import dirac_current_spinor
            fn, charge = dirac_current_spinor(self.profile, self.coupling)
            return fn(o), charge
        l = null_vector_of(o).real
        s_arr = np.broadcast_to(np.asarray(s, dtype=float),
                                o.shape[:-1]).astype(float)
        total = np.zeros(o.shape, dtype=complex)
        for w in self.worldlines:
            tau = w.cone_proper_time(s_arr, l)
            v = w.velocity(tau)
            vl = minkowski_dot(v, l)
            up = np.einsum('...ab,...b->...a', mixed_matrix(v),
                           lower_spinor(np.conj(o)))
            total = total + w.charge * lower_spinor(up) / vl[..., None]
        return total, self.total_charge


def current_characteristic(model, s, spinors, conservation_tol=1e-9):
    """c_A(s, o) of a source together with its conserved charge.

    Asserts charge conservation: the contraction c^A o_A must equal the
    total charge at the sampled arguments.
    """
    c, charge = model.characteristic(s, spinors)
    samples = _contract(raise_spinor(c), lower_spinor(spinors))
    scale = max(1.0, float(np.max(np.abs(c))))
    drift = float(np.max(np.abs(samples - charge)))
    if drift > conservation_tol * scale:
        raise ValueError(f"characteristic violates charge conservation "
                         f"by {drift:.2e}")
    return c, charge


def data_from_current(model, side='retarded', gauge=REST):
    """Characteristic dataset of a source's retarded or advanced field.

    The varying boundary carries c_A at the cone-parameter root; the
    opposite boundary of the same solution is constant in s (no radiation
    crosses it) at the matching limit, and is attached as ``past_side``
    for the retarded field.  For the advanced field the returned data is
    the constant future-boundary profile with the varying past side
    attached.
    """
    if side not in ('retarded', 'advanced'):
        raise ValueError("side must be 'retarded' or 'advanced'")
    charge = model.total_charge

    if model.kind in ('static', 'dirac'):
        const = _constant_data(model, charge, gauge)
        const.past_side = _constant_data(model, charge, gauge)
        return const

    limits = model.velocity_limits()
    past_fn = _velocity_sum_zeta([(q, v) for q, v, _ in limits])
    future_fn = _velocity_sum_zeta([(q, v) for q, _, v in limits])

    def zeta(s, sp):
        c, _ = model.characteristic(s, sp)
        return c

    varying = EMAsymptoticData(
        zeta, charge=charge,
        limit_past=past_fn, limit_future=future_fn, gauge=gauge)
    if side == 'retarded':
        constant = EMAsymptoticData(
            lambda s, sp: past_fn(sp), charge=charge,
            limit_past=past_fn, limit_future=past_fn, gauge=gauge)
        varying.past_side = constant
        return varying
    constant = EMAsymptoticData(
        lambda s, sp: future_fn(sp), charge=charge,
        limit_past=future_fn, limit_future=future_fn, gauge=gauge)
    constant.past_side = varying
    return constant


def _constant_data(model, charge, gauge):
    def zeta(s, sp):
        c, _ = model.characteristic(s, sp)
        return c

    fixed = lambda sp: model.characteristic(0.0, sp)[0]
    return EMAsymptoticData(zeta, charge=charge, limit_past=fixed,
                            limit_future=fixed, gauge=gauge)


def _velocity_sum_zeta(pairs):
    fns = [coulomb_zeta(q, v) for q, v in pairs]

    def limit(sp):
        total = fns[0](sp)
        for fn in fns[1:]:
            total = total + fn(sp)
        return total

    return limit


# ---------------------------------------------------------------------------
# fields from data


def free_field_from_zeta(data, grid, x, charge_tol=1e-9):
    """Field bispinors of a charge-free dataset at a point.

    phi_AB(x) = -(1/2pi) int o_(A zeta''_B)(x.l) dl and the mixed form
    phi_hat_AA'(x) = -(1/2pi) int o_A nu'_A'(x.l) dl with nu = the primed
    spin derivative of the out-part.  phi_hat equals phi contracted with
    x; the agreement is the caller's cross-check that the data is really
    free.
    """
    x = np.asarray(x, dtype=float)
    o = grid.spinors
    scale = max(1.0, float(np.max(np.abs(data.zeta(0.0, o)))))
    qdrift = float(np.max(np.abs(data.charge_samples(o))))
    if abs(data.charge) > charge_tol * scale or qdrift > charge_tol * scale:
        raise ValueError("free-field integral needs charge-free data")
    s = minkowski_dot(x, grid.vectors)

    zdd = data.zeta_ddot(s, o)
    o_low = lower_spinor(o)
    sym = 0.5 * (o_low[:, :, None] * zdd[:, None, :]
                 + zdd[:, :, None] * o_low[:, None, :])
    phi = -fixed_tree_sum(grid.weights[:, None, None] * sym, axis=0) \
        / (2.0 * np.pi)

    iota_nodes = iota_of(o, data.gauge)
    rate_dot = _contract(iota_nodes, data.zeta_ddot(s, o))

    def rate(sp):
        return _contract(iota_of(sp, data.gauge), data.zeta_dot(s, sp))

    _d, dp = spin_derivative_samples(rate, o, (-3, -1),
                                     s_times_ds=s * rate_dot)
    mixed = o_low[:, :, None] * dp[:, None, :]
    phi_hat = -fixed_tree_sum(grid.weights[:, None, None] * mixed, axis=0) \
        / (2.0 * np.pi)
    return phi, phi_hat


def coulomb_field(charge, velocity, anchor, x, axis_tol=1e-10):
    """Closed-form field bispinor of a uniformly moving charge.

    F = charge * (v ^ w) / rho^3 with w the anchor-relative position
    projected off v and rho the proper distance; complex charge adds the
    duality-rotated (magnetic) part.  The dual acts as +i on packed
    bispinors while the magnetic charge is -Im(charge), so the bispinor
    couples to the conjugate charge.
    """
    v = np.asarray(velocity, dtype=float)
    v = v / np.sqrt(minkowski_dot(v, v))
    x = np.asarray(x, dtype=float)
    rel = x - np.asarray(anchor, dtype=float)
    vx = minkowski_dot(v, rel)
    rho2 = vx ** 2 - minkowski_dot(rel, rel)
    if rho2 <= axis_tol * max(1.0, float(rel @ rel)):
        raise ValueError("x lies on the source worldline axis")
    w = _lower_vec(rel) - vx * _lower_vec(v)
    vl = _lower_vec(v)
    tensor = (np.outer(vl, w) - np.outer(w, vl)) / rho2 ** 1.5
    return np.conj(charge) * bispinor_from_antisym_tensor(tensor)


def spacelike_tail(limit_fn, y, grid, n_psi=None):
    """1/R^2 coefficient of the field at spacelike infinity from data.

    lim R^2 phi_AB(a + R y) = (1/pi) int delta'(y.l) o_(A zeta_B)(-inf) dl;
    the anchor a never enters because the past limit is s-independent.

    limit_fn is the past limit in the aspect-normalized characteristic
    convention (the one with c^A o_A = Q).  A retarded field carries twice
    this data relative to the free-field integral: its null asymptote is
    2 o_(A cdot_B), measured against a Lienard-Wiechert oracle, while
    free_field_from_zeta recovers its input at coefficient 1.  Assemblies
    mixing coulomb_field with free_field_from_zeta must therefore feed the
    free integral doubled sourced profiles, or equivalently weight free
    limits by 1/2 before adding them to limit_fn.
    """
    out = np.zeros((2, 2), dtype=complex)
    for a in range(2):
        for b in range(a, 2):
            def comp(sp, a=a, b=b):
                z = limit_fn(sp)
                ol = lower_spinor(np.asarray(sp))
                return 0.5 * (ol[..., a] * z[..., b]
                              + ol[..., b] * z[..., a])

            val = integrate_delta_line(
                grid, y, HomogeneousFn(comp, (0, 0)),
                n_psi=n_psi, derivative=1) / np.pi
            out[a, b] = val
            out[b, a] = val
    return out


# ---------------------------------------------------------------------------
# long-range variables


def _charge_aspect(limit_fn, gauge, spinors):
    """(q, transverse defect) from the primed gradient of a zeta limit.

    The gradient D_AA' = d'_A' zeta_A of a long-range limit is o_A nu_A'
    up to data error; q = -(1/2) iota^A conj(iota)^A' D_AA'.
    """
    o = np.asarray(spinors, dtype=complex).reshape(-1, 2)
    grad = np.empty(o.shape[:1] + (2, 2), dtype=complex)
    for a in range(2):
        def comp(sp, a=a):
            return np.asarray(limit_fn(sp))[..., a]

        _d, dp = spin_derivative_samples(comp, o, (-1, 0))
        grad[:, a, :] = dp
    iota = iota_of(o, gauge)
    nu = np.einsum('na,nab->nb', iota, grad)
    q = -0.5 * np.einsum('nb,nb->n', np.conj(iota), nu)
    peel = lower_spinor(o)[:, :, None] * nu[:, None, :]
    scale = max(float(np.max(np.abs(grad))), 1e-300)
    defect = float(np.max(np.abs(grad - peel))) / scale
    shape = np.asarray(spinors).shape[:-1]
    return q.reshape(shape), defect


def _memory_sigma(limit_lo, limit_hi, gauge, spinors):
    """sigma from the out-part of the gap between two zeta limits."""
    o = np.asarray(spinors, dtype=complex).reshape(-1, 2)

    def gap(sp):
        diff = np.asarray(limit_lo(sp)) - np.asarray(limit_hi(sp))
        return _contract(iota_of(sp, gauge), diff)

    _d, dp = spin_derivative_samples(gap, o, (-2, 0))
    sigma = -0.5 * np.einsum('nb,nb->n', np.conj(iota_of(o, gauge)), dp)
    return sigma.reshape(np.asarray(spinors).shape[:-1])


class LongRangeVars:
    """Long-range variables of a radiative dataset on a reference grid.

    ``q``/``sigma`` live at future null infinity, ``q_past``/``sigma_past``
    at the past one; all four are degree (-2,-2) evaluators with node
    samples cached on ``grid``.  ``phi`` and ``phi_past`` solve the
    potential equation for the two sigmas.  ``defects`` records the mean,
    constraint and transversality residuals found while building.
    """

    def __init__(self, grid, charge, q, q_past, sigma, sigma_past,
                 phi, phi_past, defects, nodes=None):
        self.grid = grid
        self.charge = charge
        self.q = q
        self.q_past = q_past
        self.sigma = sigma
        self.sigma_past = sigma_past
        self.phi = phi
        self.phi_past = phi_past
        self.defects = dict(defects)
        if nodes is None:
            nodes = (q(grid.spinors), q_past(grid.spinors),
                     sigma(grid.spinors), sigma_past(grid.spinors))
        (self.q_nodes, self.q_past_nodes,
         self.sigma_nodes, self.sigma_past_nodes) = nodes

    def source(self):
        """q + sigma, the kernel feeding the spacelike 1/R^2 field."""
        q, sigma = self.q, self.sigma
        return HomogeneousFn(lambda sp: q(sp) + sigma(sp), (-2, -2))


def _coulomb_aspect_fn(pairs):
    """Closed form q(o) = sum_i Q_i / (2 (v_i . l)^2)."""
    data = [(q, np.asarray(v, dtype=float)) for q, v in pairs]

    def fn(sp):
        l = null_vector_of(np.asarray(sp, dtype=complex))
        total = 0.0
        for q, v in data:
            total = total + q / (2.0 * minkowski_dot(v, l) ** 2)
        return total

    return fn


def longrange_vars(source, grid=None, lmax=None, gauge=REST,
                   transverse_tol=1e-6):
    """Long-range variables from data or from source models.

    ``source`` is an EMAsymptoticData (spin-derivative extraction), a
    CurrentModel (closed forms, retarded field), or a pair (retarded
    model, advanced model) describing a scattering field with radiation
    through both boundaries.
    """
    defects = {}
    if isinstance(source, EMAsymptoticData):
        gauge = source.gauge
        if grid is None:
            grid = build_grid(gauge)
        charge = source.charge
        fut = lambda sp: source.limit(+1, sp)
        past = lambda sp: source.limit(-1, sp)

        def q_fn(sp):
            q, defect = _charge_aspect(fut, gauge, sp)
            if defect > transverse_tol:
                raise ValueError(f"future limit gradient is not aligned "
                                 f"with o_A (defect {defect:.2e})")
            return q

        sig_fn = lambda sp: _memory_sigma(past, fut, gauge, sp)
        if source.past_side is not None:
            side = source.past_side
            p_lo = lambda sp: side.limit(-1, sp)
            p_hi = lambda sp: side.limit(+1, sp)
        else:
            # no past-side data: the matching constant profile
            p_lo, p_hi = past, past

        def qp_fn(sp):
            q, defect = _charge_aspect(p_lo, gauge, sp)
            if defect > transverse_tol:
                raise ValueError(f"past-side limit gradient is not aligned "
                                 f"with o_A (defect {defect:.2e})")
            return q

        sigp_fn = lambda sp: _memory_sigma(p_hi, p_lo, gauge, sp)
        _q, d1 = _charge_aspect(fut, gauge, grid.spinors[::7])
        _qp, d2 = _charge_aspect(p_lo, gauge, grid.spinors[::7])
        defects['transverse'] = max(d1, d2)
    else:
        if isinstance(source, CurrentModel):
            ret, adv = source, None
        else:
            ret, adv = source
        if grid is None:
            grid = build_grid(gauge)
        charge = ret.total_charge
        if adv is not None and abs(adv.total_charge - charge) > 1e-12:
            raise ValueError("retarded and advanced models must carry the "
                             "same total charge")

        def zero(sp):
            return np.zeros(np.asarray(sp).shape[:-1], dtype=complex)

        if ret.kind == 'dirac':
            from .hyperboloid import dirac_charge_aspect
            q_fn = dirac_charge_aspect(ret.profile, ret.coupling)
            qp_fn = q_fn
            sig_fn, sigp_fn = zero, zero
        elif ret.kind == 'static' and (adv is None or adv.kind == 'static'):
            q_fn = _model_aspect(ret, '+')
            qp_fn = _model_aspect(adv or ret, '-')
            sig_fn, sigp_fn = zero, zero
        else:
            # the future boundary carries the retarded outgoing
            # velocities, its matched past limit the advanced-model
            # future ones (or the incoming ones if no advanced part)
            q_fn = _model_aspect(ret, '+')
            qp_fn = _model_aspect(adv or ret, '-')
            matched = _model_aspect(adv, '+') if adv is not None else qp_fn
            sig_fn = _aspect_gap(matched, q_fn)
            sigp_fn = _aspect_gap(matched, qp_fn) if adv is not None \
                else zero

    q_nodes = q_fn(grid.spinors)
    qp_nodes = qp_fn(grid.spinors)
    s_nodes = sig_fn(grid.spinors)
    sp_nodes = sigp_fn(grid.spinors)
    wsum = lambda v: complex(fixed_tree_sum(grid.weights * v))
    scale = max(1.0, float(np.max(np.abs(q_nodes))))
    defects['mean_q'] = abs(wsum(q_nodes) / (2 * np.pi) - charge)
    defects['mean_q_past'] = abs(wsum(qp_nodes) / (2 * np.pi) - charge)
    defects['mean_sigma'] = abs(wsum(s_nodes) / (2 * np.pi))
    defects['constraint'] = float(np.max(np.abs(
        q_nodes + s_nodes - qp_nodes - sp_nodes))) / scale

    phi = phi_from_sigma(s_nodes, grid, lmax=lmax)
    phi_past = phi_from_sigma(sp_nodes, grid, lmax=lmax)
    return LongRangeVars(
        grid, charge,
        HomogeneousFn(q_fn, (-2, -2)), HomogeneousFn(qp_fn, (-2, -2)),
        HomogeneousFn(sig_fn, (-2, -2)), HomogeneousFn(sigp_fn, (-2, -2)),
        phi, phi_past, defects,
        nodes=(q_nodes, qp_nodes, s_nodes, sp_nodes))


def _model_aspect(model, end):
    limits = model.velocity_limits()
    if end == '+':
        return _coulomb_aspect_fn([(q, v) for q, _, v in limits])
    return _coulomb_aspect_fn([(q, v) for q, v, _ in limits])


def _aspect_gap(lo, hi):
    def fn(sp):
        return np.asarray(lo(sp)) - np.asarray(hi(sp))

    return fn


# ---------------------------------------------------------------------------
# the potential Phi


class PhiSolution:
    """Zero-mean degree-(0,0) potential solving the sigma equation.

    Callable on arbitrary direction spinors (evaluated through grid-frame
    angles, so the homogeneity is exact).  ``gradient`` returns the
    unprimed spin derivative d_A Phi.  ``spectral_tail`` is the relative
    norm of the highest resolved harmonic band, a truncation diagnostic.
    """

    def __init__(self, grid, coefficients, spectral_tail):
        self.grid = grid
        self.coefficients = dict(coefficients)
        self.spectral_tail = float(spectral_tail)
        self.defects = {}

    def __call__(self, spinors):
        theta, phi = self.grid.angles_of(np.asarray(spinors, dtype=complex))
        return harmonic_expand(self.coefficients, theta, phi)

    def gradient(self, spinors):
        o = np.asarray(spinors, dtype=complex).reshape(-1, 2)
        d, _dp = spin_derivative_samples(self.__call__, o, (0, 0))
        return d.reshape(np.asarray(spinors).shape)

    def as_fn(self):
        return HomogeneousFn(self.__call__, (0, 0))


def phi_from_sigma(sigma, grid, lmax=None, out_scalar_past=None,
                   mean_tol=1e-6, residual_tol=1e-6):
    """Solve d_A d'_A' Phi = l_AA' sigma for the zero-mean potential.

    ``sigma`` is a node-sample array on ``grid`` or a degree-(-2,-2)
    evaluator.  Harmonic mode ell inverts with eigenvalue -2/(ell(ell+1));
    the mean must vanish (no solution otherwise) and the monopole of Phi
    is fixed to zero by convention.  When ``out_scalar_past`` (the
    evaluator of iota^A (zeta_A(-inf) - zeta_A(+inf))) is supplied the
    gradient identity d_A Phi = -o_A zeta_out(-inf) is checked and its
    residual stored in the solution's defects.
    """
    if isinstance(sigma, HomogeneousFn):
        if sigma.ptype != (-2, -2):
            raise ValueError("sigma must have degree (-2,-2)")
        values = np.asarray(sigma(grid.spinors))
    else:
        values = np.asarray(sigma)
        if values.shape != (grid.n_nodes,):
            raise ValueError("sigma samples must match the grid nodes")
    scale = max(1.0, float(np.max(np.abs(values))))
    mean = complex(fixed_tree_sum(grid.weights * values)) / (2.0 * np.pi)
    if abs(mean) > mean_tol * scale:
        raise ValueError(f"sigma has nonzero mean {mean:.3e}; "
                         f"no potential exists")
    if lmax is None:
        lmax = grid.n_theta - 1
    coeffs = harmonic_coefficients(grid, values, lmax)
    phi_coeffs = {}
    power = {}
    for (ell, m), c in coeffs.items():
        if ell == 0:
            continue
        phi_coeffs[(ell, m)] = -2.0 * c / (ell * (ell + 1))
        power[ell] = power.get(ell, 0.0) + abs(phi_coeffs[(ell, m)]) ** 2
    total = sum(power.values())
    tail = 0.0 if total == 0.0 else np.sqrt(power.get(lmax, 0.0) / total)
    sol = PhiSolution(grid, phi_coeffs, tail)
    if out_scalar_past is not None:
        sample = grid.spinors[::5]
        lhs = sol.gradient(sample)
        rhs = -lower_spinor(sample) * np.asarray(
            out_scalar_past(sample))[..., None]
        resid = float(np.max(np.abs(lhs - rhs))) / scale
        sol.defects['gradient_match'] = resid
        if resid > residual_tol:
            raise ValueError(f"potential gradient misses the out-part "
                             f"data by {resid:.2e}")
    return sol


def reconstructed_future_limit(charge, q, grid, lmax=None):
    """zeta_A(+inf) rebuilt from the charge and its aspect q.

    The aspect fixes the gradient part through the same harmonic solve as
    the potential: zeta(+inf) = Q iota_A - d_A Phi_q where Phi_q solves
    the equation for q minus its Coulomb reference Q/(2 (t.l)^2).
    """
    if isinstance(q, HomogeneousFn):
        q_nodes = np.asarray(q(grid.spinors))
    else:
        q_nodes = np.asarray(q)
    tl = minkowski_dot(grid.t, grid.vectors)
    residual = q_nodes - charge / (2.0 * tl ** 2)
    phi_q = phi_from_sigma(residual, grid, lmax=lmax)

    def limit(spinors):
        iota_low = lower_spinor(iota_of(spinors, grid.t))
        return charge * iota_low - phi_q.gradient(spinors)

    return limit


# ---------------------------------------------------------------------------
# the long-range field at spacelike infinity


class LongRangeField:
    """Sampled 1/R^2 field structure at one spacelike direction y.

    ``kernel`` is the complex vector K_a; ``tensor`` the real assembled
    field with ``electric``/``magnetic`` parts sourced by Re/Im(q+sigma);
    ``defects`` holds the radial transversality residuals.
    """

    def __init__(self, y, kernel, tensor, electric, magnetic, defects):
        self.y = y
        self.kernel = kernel
        self.tensor = tensor
        self.electric = electric
        self.magnetic = magnetic
        self.defects = dict(defects)


def longrange_field(vars, y, cone_tol=1e-6):
    """Assemble the long-range field at a spacelike direction.

    K_a(y) = (1/(2 pi y.y)) d_a int sgn(y.l) (q+sigma)(l) dl, by 4th-order
    differencing of the sign-kernel integral (smooth off the light cone;
    each probe integrates on a grid split exactly at its own sign circle).
    The electric part is y ^ Re K; the magnetic part is the dual of
    y ^ Im K, oriented so a charge -i g yields the field of a monopole g.
    """
    y = np.asarray(y, dtype=float)
    yy = float(minkowski_dot(y, y))
    norm2 = float(y @ y)
    if yy > -cone_tol * norm2:
        raise ValueError("y must be spacelike, away from the light cone")
    src = vars.source()
    grid = vars.grid

    def sign_integral(yp):
        yr = grid.lorentz_inv @ yp
        radius = np.linalg.norm(yr[1:])
        split = build_grid(grid.t, grid.n_theta, grid.n_phi,
                           axis=yr[1:], x_split=[yr[0] / radius])
        sg = np.sign(minkowski_dot(yp, split.vectors))
        return complex(fixed_tree_sum(split.weights * sg
                                      * src(split.spinors)))

    h = 1e-4 * np.sqrt(norm2)
    kernel = np.zeros(4, dtype=complex)
    for a in range(4):
        e = np.zeros(4)
        e[a] = h
        stencil = (-sign_integral(y + 2 * e) + 8 * sign_integral(y + e)
                   - 8 * sign_integral(y - e) + sign_integral(y - 2 * e)) \
            / (12 * h)
        kernel[a] = stencil / (2.0 * np.pi * yy)

    y_low = _lower_vec(y)
    electric = np.outer(y_low, kernel.real) - np.outer(kernel.real, y_low)
    raw_m = np.outer(y_low, kernel.imag) - np.outer(kernel.imag, y_low)
    magnetic = -hodge_dual(raw_m)
    tensor = electric + magnetic
    scale = max(float(np.max(np.abs(tensor))), 1e-300)
    defects = {
        'magnetic_radial': float(np.max(np.abs(magnetic @ y))) / scale,
        'electric_dual_radial':
            float(np.max(np.abs(hodge_dual(electric) @ y))) / scale,
    }
    return LongRangeField(y, kernel, tensor, electric, magnetic, defects)
