"""Scalar wave fields and their behaviour far from sources.

The central objects are characteristic profiles: functions chi(s, l) of a
cone parameter s and a future null direction l, homogeneous of degree
(-1, -1) in the direction spinor.  A profile determines a field through a
directional integral, a field determines profiles through 1/R limits, and
sources determine the profiles of their retarded and advanced fields
through a cone-parameter root along the trajectory.  Keeping the three
routes independent is the point: each one checks the others.
"""

from __future__ import annotations

import numpy as np

from .linalg import (ConvergenceError, composite_gauss_panels,
                     fixed_tree_sum, richardson_limit)
from .sphere import build_grid
from .spinors import minkowski_dot, null_vector_of

_AUDIT_ALPHAS = (1.21 + 0.47j, 0.64 - 0.83j)


def _broadcast_eval(fn, s, spinors):
    s = np.asarray(s)
    spinors = np.asarray(spinors)
    return fn(s, spinors)


class AsymptoticProfile:
    """Characteristic data chi(s, l) of a field along null directions.

    ``chi`` and ``chi_dot`` are evaluators taking (s, spinors) with s
    broadcastable against the leading shape of ``spinors`` (..., 2); both
    must be jointly homogeneous, chi of degree (-1, -1) and chi_dot of
    degree (-2, -2), under (s, o) -> (a*conj(a)*s, a*o).  ``direction``
    states which 1/R limit the data describes: 'future' for R -> +inf
    along +l, 'past' for the limit along -l.

    ``limit_past`` and ``limit_future`` are optional evaluators of the
    s -> -inf and s -> +inf values (functions of spinors alone).
    ``window`` optionally declares an interval outside which chi_dot is
    negligible at the ``tail`` level, which news integrals rely on.
    """

    def __init__(self, chi, chi_dot=None, direction="future",
                 gauge=(1.0, 0.0, 0.0, 0.0), epsilon=1.0, s_scale=1.0,
                 limit_past=None, limit_future=None, window=None,
                 tail=0.0):
        if direction not in ("future", "past"):
            raise ValueError("direction must be 'future' or 'past'")
        self.chi = chi
        self._chi_dot = chi_dot
        self.direction = direction
        self.gauge = np.asarray(gauge, dtype=float)
        self.epsilon = float(epsilon)
        self.s_scale = float(s_scale)
        self.limit_past = limit_past
        self.limit_future = limit_future
        self.window = None if window is None else (float(window[0]),
                                                   float(window[1]))
        self.tail = float(tail)

    def chi_dot(self, s, spinors, h=1e-5):
        if self._chi_dot is not None:
            return _broadcast_eval(self._chi_dot, s, spinors)
        s = np.asarray(s, dtype=float)
        step = h * max(1.0, self.s_scale)
        num = (-self.chi(s + 2 * step, spinors)
               + 8 * self.chi(s + step, spinors)
               - 8 * self.chi(s - step, spinors)
               + self.chi(s - 2 * step, spinors))
        return num / (12 * step)

    def audit(self, spinors, s=0.37, tol=1e-8):
        """Check the joint scaling law on a sample of directions."""
        worst = 0.0
        for alpha in _AUDIT_ALPHAS:
            scale = (alpha * np.conj(alpha)).real
            for fn, deg in ((self.chi, 1), (self.chi_dot, 2)):
                ref = fn(s, spinors)
                val = fn(scale * s, alpha * spinors)
                worst = max(worst, float(np.max(np.abs(
                    val * scale ** deg - ref))))
        if worst > tol:
            raise ValueError(f"profile violates homogeneity by {worst:.2e}")
        return worst


class ConeData:
    """Characteristic data eta(p, l) on the future null cone of the origin.

    The cone point with parameter p > 0 along l is x = l / p, so p -> inf
    approaches the vertex and p -> 0 runs out to infinity.  eta carries
    homogeneity degree (-1, -1) jointly in (p, l) and eta_dot is its
    p-derivative.
    """

    def __init__(self, eta, eta_dot=None, p_scale=1.0):
        self.eta = eta
        self._eta_dot = eta_dot
        self.p_scale = float(p_scale)

    def eta_dot(self, p, spinors, h=1e-6):
        if self._eta_dot is not None:
            return _broadcast_eval(self._eta_dot, p, spinors)
        step = h * max(1.0, self.p_scale)
        num = (-self.eta(p + 2 * step, spinors)
               + 8 * self.eta(p + step, spinors)
               - 8 * self.eta(p - step, spinors)
               + self.eta(p - 2 * step, spinors))
        return num / (12 * step)

    @classmethod
    def from_field(cls, field, p_scale=1.0):
        """Restrict a field evaluator to the cone: eta(p, l) = A(l/p)/p."""
        def eta(p, spinors):
            p = np.asarray(p, dtype=float)
            l = null_vector_of(np.asarray(spinors))
            x = l / np.expand_dims(p, -1)
            return np.asarray(field(x)) / p
        return cls(eta, p_scale=p_scale)


class SourceCharacteristic:
    """Cone-parameter profile c(s, l) of a current, with its limits.

    For the retarded field chi(s, l) = c(s, l); for the advanced field
    the past-direction profile coincides with c as well, so one object
    serves both sides.  ``charge`` is the total (complex) charge.
    """

    def __init__(self, evaluator, limit_past, limit_future, charge,
                 window=None):
        self._evaluator = evaluator
        self.limit_past = limit_past
        self.limit_future = limit_future
        self.charge = complex(charge)
        self.window = window

    def __call__(self, s, spinors):
        return _broadcast_eval(self._evaluator, s, spinors)

    def as_profile(self, direction="future", **kwargs):
        return AsymptoticProfile(
            self._evaluator, direction=direction,
            limit_past=self.limit_past, limit_future=self.limit_future,
            window=self.window, **kwargs)


class SampledCurrent:
    """Compactly supported smooth source given as a callable J(x).

    ``support`` is a coordinate box ((t0, t1), (x0, x1), (y0, y1),
    (z0, z1)) outside which J vanishes; the characteristic integral runs
    over the spatial box on each tilted plane x.l = s.
    """

    def __init__(self, density, support, charge=None, n_nodes=24):
        self.density = density
        self.support = [(float(a), float(b)) for a, b in support]
        self.n_nodes = int(n_nodes)
        self._charge = charge

    def total_charge(self):
        if self._charge is not None:
            return complex(self._charge)
        # charge of a conserved current: integrate J over a time slice
        # midway through the support box
        (t0, t1) = self.support[0]
        tmid = 0.5 * (t0 + t1)
        xs, ws = [], []
        for lo, hi in self.support[1:]:
            x, w = composite_gauss_panels(lo, hi, 4, self.n_nodes // 4)
            xs.append(x)
            ws.append(w)
        gx, gy, gz = np.meshgrid(*xs, indexing="ij")
        pts = np.stack([np.full(gx.shape, tmid), gx, gy, gz], axis=-1)
        vals = self.density(pts.reshape(-1, 4))
        wgt = (ws[0][:, None, None] * ws[1][None, :, None]
               * ws[2][None, None, :]).reshape(-1)
        return complex(fixed_tree_sum(vals * wgt))


def source_characteristic(model, s=None, spinors=None):
    """Characteristic profile of a current model.

    Point-charge trajectories use the closed form sum(Q_i / (v_i . l)) at
    the cone-parameter root; sampled currents integrate over the tilted
    plane x.l = s.  Returns a SourceCharacteristic, or its values when
    both ``s`` and ``spinors`` are given.
    """
    if isinstance(model, SampledCurrent):
        out = _sampled_characteristic(model)
    else:
        worldlines = model if isinstance(model, (list, tuple)) else [model]
        out = _pointlike_characteristic(worldlines)
    if s is None and spinors is None:
        return out
    if s is None or spinors is None:
        raise ValueError("give both s and spinors, or neither")
    return out(s, spinors)


def _pointlike_characteristic(worldlines):
    def evaluate(s, spinors):
        l = null_vector_of(np.asarray(spinors))
        s = np.broadcast_to(np.asarray(s, dtype=float), l.shape[:-1])
        total = np.zeros(l.shape[:-1], dtype=complex)
        for w in worldlines:
            tau = w.cone_proper_time(s, l)
            total = total + w.charge / minkowski_dot(w.velocity(tau), l)
        return total

    def limit(which):
        def value(spinors):
            l = null_vector_of(np.asarray(spinors))
            total = np.zeros(l.shape[:-1], dtype=complex)
            for w in worldlines:
                v = w.velocity_limits()[0 if which == "past" else 1]
                total = total + w.charge / minkowski_dot(v, l)
            return total
        return value

    charge = sum(w.charge for w in worldlines)
    return SourceCharacteristic(evaluate, limit("past"), limit("future"),
                                charge)


def _sampled_characteristic(model):
    xs, ws = [], []
    for lo, hi in model.support[1:]:
        x, w = composite_gauss_panels(lo, hi, 4, max(2, model.n_nodes // 4))
        xs.append(x)
        ws.append(w)
    gx, gy, gz = np.meshgrid(*xs, indexing="ij")
    space = np.stack([gx, gy, gz], axis=-1).reshape(-1, 3)
    weights = (ws[0][:, None, None] * ws[1][None, :, None]
               * ws[2][None, None, :]).reshape(-1)
    (t0, t1) = model.support[0]

    def evaluate(s, spinors):
        spinors = np.asarray(spinors)
        l = null_vector_of(spinors)
        s = np.broadcast_to(np.asarray(s, dtype=float), l.shape[:-1])
        flat_l = l.reshape(-1, 4)
        flat_s = np.asarray(s).reshape(-1)
        out = np.zeros(flat_s.shape, dtype=complex)
        for k, (lk, sk) in enumerate(zip(flat_l, flat_s)):
            # on the plane x.lk = sk:  x0 = (sk + vec(x).vec(lk)) / lk0
            x0 = (sk + space @ lk[1:]) / lk[0]
            inside = (x0 >= t0) & (x0 <= t1)
            if not np.any(inside):
                continue
            pts = np.concatenate([x0[inside, None], space[inside]], axis=1)
            vals = np.asarray(model.density(pts))
            out[k] = fixed_tree_sum(vals * weights[inside] / lk[0])
        return out.reshape(s.shape)

    def limit_zero(spinors):
        spinors = np.asarray(spinors)
        return np.zeros(spinors.shape[:-1], dtype=complex)

    return SourceCharacteristic(evaluate, limit_zero, limit_zero,
                                model.total_charge(),
                                window=(t0 - 1.0, t1 + 1.0))


def retarded_field(worldlines):
    """Pointwise retarded solution sum(Q / (v . (x - z))) of trajectories.

    Returns an evaluator suitable for asymptote extraction; its future
    null profile is the source characteristic of the same trajectories,
    which makes the two routes mutually checkable.
    """
    lines = worldlines if isinstance(worldlines, (list, tuple)) \
        else [worldlines]

    def field(x):
        x = np.asarray(x, dtype=float)
        total = 0.0 + 0.0j
        for w in lines:
            tau = w.retarded_proper_time(x)
            d = x - w.position(tau)
            total = total + w.charge / minkowski_dot(w.velocity(tau), d)
        return total

    return field


def field_from_asymptotic(profile, x, grid=None):
    """Field value from its characteristic profile.

    Future-direction data gives A(x) = -(1/2pi) * integral of
    chi_dot(x.l, l); past-direction data flips the sign.  ``x`` may carry
    leading batch dimensions.
    """
    if grid is None:
        grid = build_grid(profile.gauge)
    profile.audit(grid.spinors[:2])
    x = np.asarray(x, dtype=float)
    s = np.einsum("...a,na,a->...n", x, grid.vectors,
                  np.array([1.0, -1.0, -1.0, -1.0]))
    vals = profile.chi_dot(s, grid.spinors)
    sign = -1.0 if profile.direction == "future" else 1.0
    return sign / (2 * np.pi) * fixed_tree_sum(vals * grid.weights, axis=-1)


def kirchhoff_evaluate(cone, x, grid=None, gauge=(1.0, 0.0, 0.0, 0.0),
                       rtol=1e-6):
    """Field inside the future cone of the origin from cone data.

    A(x) = -(1 / (pi x.x)) * integral of eta_dot(2 x.l / x.x, l) over
    directions.  The value is recomputed on a refined grid; disagreement
    beyond ``rtol`` raises ConvergenceError.
    """
    x = np.asarray(x, dtype=float)
    xx = minkowski_dot(x, x)
    if np.any(xx <= 0.0) or np.any(x[..., 0] <= 0.0):
        raise ValueError("point must lie inside the future cone")
    if grid is None:
        grid = build_grid(gauge)
    coarse = _kirchhoff_on_grid(cone, x, xx, grid)
    fine = build_grid(grid.t, n_theta=grid.n_theta + grid.n_theta // 2,
                      n_phi=grid.n_phi + grid.n_phi // 2)
    refined = _kirchhoff_on_grid(cone, x, xx, fine)
    scale = max(np.max(np.abs(refined)), 1e-30)
    if np.max(np.abs(refined - coarse)) > rtol * scale:
        raise ConvergenceError("cone-data quadrature did not settle; "
                               "refine the grid or smooth the data")
    return refined


def _kirchhoff_on_grid(cone, x, xx, grid):
    p = 2.0 * np.einsum("...a,na,a->...n", x, grid.vectors,
                        np.array([1.0, -1.0, -1.0, -1.0]))
    p = p / np.expand_dims(xx, -1)
    vals = cone.eta_dot(p, grid.spinors)
    total = fixed_tree_sum(vals * grid.weights, axis=-1)
    return -total / (np.pi * xx)


class AsymptoteEstimate:
    """Extrapolated 1/R limit with an error bar and a measured exponent.

    ``epsilon`` is the empirical decay rate of the ladder increments; a
    nonpositive value, or ``diverging`` set, means the assumed falloff is
    wrong for this direction.
    """

    def __init__(self, value, error, epsilon, diverging, radii, raw):
        self.value = value
        self.error = float(error)
        self.epsilon = float(epsilon)
        self.diverging = bool(diverging)
        self.radii = np.asarray(radii)
        self.raw = np.asarray(raw)

    def __iter__(self):
        yield self.value
        yield self.error

    def __repr__(self):
        flag = " DIVERGING" if self.diverging else ""
        return (f"AsymptoteEstimate({self.value}, err={self.error:.2e}, "
                f"eps={self.epsilon:.3f}{flag})")


def null_asymptote(field, base, direction, r0=4.0, ratio=2.0, n_steps=7,
                   power=1):
    """1/R^power asymptote of a field evaluator along a ray.

    Null rays with power 1 extract the news coefficient; spacelike rays
    give the scalar long-range mode at power 1 and the field-strength
    mode at power 2; timelike rays of radiation fields settle to zero.
    The ladder is geometric, extrapolated at the measured rate, with the
    spread of the last extrapolants as the error.
    """
    base = np.asarray(base, dtype=float)
    direction = np.asarray(direction, dtype=float)
    radii = r0 * ratio ** np.arange(n_steps)
    raw = []
    for r in radii:
        val = field(base + r * direction)
        raw.append(np.asarray(val) * r ** power)
    raw = np.array(raw)
    eps, diverging = _empirical_rate(raw, ratio)
    # snap near-integer rates so the extrapolation cancels exactly
    order = eps if eps > 0.05 else 1.0
    if abs(order - round(order)) < 0.1 and round(order) >= 1:
        order = float(round(order))
    value, err, div2 = richardson_limit(raw, step_ratio=ratio, order=order)
    return AsymptoteEstimate(value, err, eps, diverging or div2, radii, raw)


def _empirical_rate(raw, ratio):
    """Decay exponent of ladder increments |V_{k+1} - V_k| ~ ratio^(-e k)."""
    diffs = np.array([np.max(np.abs(np.atleast_1d(raw[k + 1] - raw[k])))
                      for k in range(len(raw) - 1)])
    scale = np.max(np.abs(raw))
    good = diffs > 1e-14 * scale
    if np.count_nonzero(good) < 2:
        return 8.0, False
    d = diffs[good]
    rates = np.log(d[:-1] / d[1:]) / np.log(ratio)
    eps = float(np.median(rates))
    diverging = bool(np.all(rates[-2:] < 0.0)) if len(rates) >= 2 else eps < 0
    return eps, diverging


def spacelike_limit_from_profile(profile, y, grid=None, n_psi=None):
    """Expected spacelike 1/R coefficient from the past limit of chi.

    lim R * A(a + R y) = (1/2pi) * integral of delta(y.l) chi(-inf, l)
    for retarded fields; needs profile.limit_past and spacelike y.
    """
    from .sphere import integrate_delta_line
    from .sphere import HomogeneousFn
    if profile.limit_past is None:
        raise ValueError("profile has no past limit data")
    if grid is None:
        grid = build_grid(profile.gauge)
    fn = HomogeneousFn(lambda sp: profile.limit_past(sp), (-1, -1))
    return integrate_delta_line(grid, y, fn, n_psi=n_psi) / (2 * np.pi)


def wave_residual(field, x, h=1e-2):
    """Fourth-order stencil estimate of (box A)(x); small for solutions."""
    x = np.asarray(x, dtype=float)
    total = 0.0 + 0.0j
    signs = np.array([1.0, -1.0, -1.0, -1.0])
    centre = field(x)
    for a in range(4):
        e = np.zeros(4)
        e[a] = h
        second = (-field(x + 2 * e) + 16 * field(x + e) - 30 * centre
                  + 16 * field(x - e) - field(x - 2 * e)) / (12 * h * h)
        total = total + signs[a] * second
    return total


def save_profile(path, profile, s_nodes, grid=None):
    """Write t-gauge samples of chi to a tab-separated text file.

    One row per (node, s) pair: node index, s, real part, imaginary
    part.  The header records the gauge vector, direction, decay data
    and grid resolution needed to rebuild an evaluator.
    """
    if grid is None:
        grid = build_grid(profile.gauge)
    s_nodes = np.asarray(s_nodes, dtype=float)
    lines = ["# nullrad-profile v1",
             "# gauge: " + " ".join(repr(float(c)) for c in profile.gauge),
             f"# direction: {profile.direction}",
             f"# epsilon: {profile.epsilon!r}",
             f"# s_scale: {profile.s_scale!r}",
             f"# grid: {grid.n_theta} {grid.n_phi}",
             f"# s_count: {s_nodes.size}",
             "# columns: node s re im"]
    for s in s_nodes:
        vals = np.asarray(profile.chi(float(s), grid.spinors),
                          dtype=complex)
        for k in range(grid.n_nodes):
            lines.append(f"{k}\t{float(s)!r}\t{float(vals[k].real)!r}"
                         f"\t{float(vals[k].imag)!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_profile(path):
    """Rebuild an AsymptoticProfile from a file written by save_profile.

    The samples are expanded in spherical harmonics per s-node and
    interpolated with cubic splines in s, giving smooth evaluators for
    chi and chi_dot at arbitrary directions via the gauge reduction
    chi(s, o) = chi(s / t.l, o-hat) / t.l.
    """
    from scipy.interpolate import CubicSpline

    header = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if ":" in line:
                    key, _, rest = line[1:].partition(":")
                    header[key.strip()] = rest.strip()
                continue
            rows.append(line.split("\t"))
    gauge = np.array([float(c) for c in header["gauge"].split()])
    n_theta, n_phi = (int(c) for c in header["grid"].split())
    direction = header["direction"]
    epsilon = float(header["epsilon"])
    s_scale = float(header["s_scale"])
    grid = build_grid(gauge, n_theta=n_theta, n_phi=n_phi)

    node = np.array([int(r[0]) for r in rows])
    s = np.array([float(r[1]) for r in rows])
    val = np.array([float(r[2]) + 1j * float(r[3]) for r in rows])
    s_nodes = np.unique(s)
    values = np.zeros((s_nodes.size, grid.n_nodes), dtype=complex)
    for k, sk in enumerate(s_nodes):
        mask = s == sk
        values[k, node[mask]] = val[mask]

    from scipy.special import sph_harm_y

    # one harmonic analysis per (l, m), vectorized over all s-nodes
    lmax = n_theta - 1
    splines = {}
    for ell in range(lmax + 1):
        for m in range(-ell, ell + 1):
            y = sph_harm_y(ell, m, grid.theta, grid.phi)
            coeff = fixed_tree_sum(grid.weights * np.conj(y) * values,
                                   axis=-1)
            splines[(ell, m)] = CubicSpline(s_nodes, coeff)
    return _SplineProfile(gauge, direction, epsilon, s_scale, grid,
                          splines, (float(s_nodes[0]), float(s_nodes[-1])))


class _SplineProfile(AsymptoticProfile):
    """Profile backed by per-harmonic splines of t-gauge samples."""

    def __init__(self, gauge, direction, epsilon, s_scale, grid, splines,
                 s_range):
        self._grid = grid
        self._splines = splines
        self._s_range = s_range
        super().__init__(self._chi_eval, self._chi_dot_eval,
                         direction=direction, gauge=gauge, epsilon=epsilon,
                         s_scale=s_scale,
                         limit_past=lambda sp: self._edge_eval(sp, 0),
                         limit_future=lambda sp: self._edge_eval(sp, 1),
                         window=s_range)

    def _expand(self, s_red, spinors, order=0):
        from scipy.special import sph_harm_y
        theta, phi = self._grid.angles_of(spinors)
        s_red = np.clip(s_red, *self._s_range)
        out = np.zeros(np.broadcast(s_red, theta).shape, dtype=complex)
        for (ell, m), spline in self._splines.items():
            c = spline(s_red, order) if order else spline(s_red)
            out = out + c * sph_harm_y(ell, m, theta, phi)
        return out

    def _reduce(self, s, spinors):
        l = null_vector_of(np.asarray(spinors))
        tl = np.einsum("a,...a,a->...", self.gauge, l,
                       np.array([1.0, -1.0, -1.0, -1.0])).real
        return np.asarray(s) / tl, tl

    def _chi_eval(self, s, spinors):
        s_red, tl = self._reduce(s, spinors)
        return self._expand(s_red, spinors) / tl

    def _chi_dot_eval(self, s, spinors):
        s_red, tl = self._reduce(s, spinors)
        return self._expand(s_red, spinors, order=1) / (tl * tl)

    def _edge_eval(self, spinors, which):
        s_red = np.full(np.asarray(spinors).shape[:-1],
                        self._s_range[which])
        _, tl = self._reduce(0.0, spinors)
        return self._expand(s_red, spinors) / tl


def decay_bound_audit(profile, s_max=6.0, r_max=32.0, n_samples=6,
                      grid=None, margin=1.1):
    """Check the built field against the standard falloff envelopes.

    For x = s t + R l the directional integral of chi obeys
    |C0| < C (s + s0 + 2R)^(-eps) and the integral of chi_dot obeys
    |C1| < C (s + s0)^(-eps) / (s + s0 + 2R).  The constant is fitted on
    an inner lattice and validated on a lattice pushed twice as far in s
    and four times as far in R, so an overdeclared epsilon fails.
    """
    if grid is None:
        grid = build_grid(profile.gauge)
    t = profile.gauge / np.sqrt(minkowski_dot(profile.gauge, profile.gauge))
    l = grid.vectors[0]
    s0 = profile.s_scale

    def envelope(s, r, k):
        base = s + s0 + 2.0 * r
        if k == 0:
            return base ** (-profile.epsilon)
        return (s + s0) ** (-profile.epsilon) / base

    def worst_ratio(s_hi, r_hi, k):
        worst = 0.0
        fn = profile.chi if k == 0 else profile.chi_dot
        for i in range(n_samples):
            s = i * s_hi / n_samples
            for j in range(n_samples):
                r = r_hi * 0.5 ** j
                x = s * t + r * l
                s_nodes = np.einsum("a,na,a->n", x, grid.vectors,
                                    np.array([1.0, -1.0, -1.0, -1.0]))
                val = fixed_tree_sum(fn(s_nodes, grid.spinors)
                                     * grid.weights) / (-2 * np.pi)
                worst = max(worst, abs(val) / envelope(s, r, k))
        return worst

    report = {}
    for k in (0, 1):
        fitted = worst_ratio(s_max, r_max, k)
        outer = worst_ratio(2.0 * s_max, 4.0 * r_max, k)
        report[k] = {"constant": fitted,
                     "excess": outer / (fitted * margin)}
    violated = any(v["excess"] > 1.0 for v in report.values())
    return {"envelopes": report, "violated": violated,
            "epsilon": profile.epsilon}
