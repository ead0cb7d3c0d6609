"""Timelike worldlines built from straight and uniformly accelerated arcs.

A trajectory is a chain of segments, each carrying a rapidity that is an
affine function of proper time inside a fixed boost plane (e_t, e_s).  A
zero rapidity rate gives inertial motion, so a single representation
covers static charges, sharp velocity kinks and smoothed kinks.  Both
root problems needed by field evaluation have closed forms per segment:
the cone-parameter equation z(tau).l = s (monotone because z is timelike
and l future null) and the retarded-time equation (x - z(tau))^2 = 0.
"""

from __future__ import annotations

import numpy as np

from .spinors import minkowski_dot

_TINY_RATE = 1e-14


def _check_unit_timelike(v, name):
    v = np.asarray(v, dtype=float)
    if v.shape != (4,):
        raise ValueError(f"{name} must be a 4-vector")
    if v[0] <= 0.0 or minkowski_dot(v, v) <= 0.0:
        raise ValueError(f"{name} must be future timelike")
    return v / np.sqrt(minkowski_dot(v, v))


class Segment:
    """One arc: rapidity xi0 + rate*(tau - tau_ref) in the plane (e_t, e_s).

    e_t is unit timelike, e_s unit spacelike, mutually orthogonal.  The
    arc covers proper time [tau0, tau1] (either end may be infinite) and
    passes through z0 at the finite reference time tau_ref, where the
    rapidity equals xi0.
    """

    def __init__(self, tau0, tau1, z0, e_t, e_s, xi0, rate, tau_ref=None):
        if not tau0 < tau1:
            raise ValueError("segment needs tau0 < tau1")
        if tau_ref is None:
            tau_ref = tau0
        if not np.isfinite(tau_ref):
            raise ValueError("segment reference time must be finite")
        self.tau0 = float(tau0)
        self.tau1 = float(tau1)
        self.tau_ref = float(tau_ref)
        self.z0 = np.asarray(z0, dtype=float)
        self.e_t = np.asarray(e_t, dtype=float)
        self.e_s = np.asarray(e_s, dtype=float)
        self.xi0 = float(xi0)
        self.rate = float(rate)

    def rapidity(self, tau):
        tau = np.asarray(tau, dtype=float)
        if abs(self.rate) < _TINY_RATE:
            return np.full(tau.shape, self.xi0)
        return self.xi0 + self.rate * (tau - self.tau_ref)

    def velocity(self, tau):
        xi = self.rapidity(tau)
        return (np.expand_dims(np.cosh(xi), -1) * self.e_t
                + np.expand_dims(np.sinh(xi), -1) * self.e_s)

    def position(self, tau):
        tau = np.asarray(tau, dtype=float)
        if abs(self.rate) < _TINY_RATE:
            dt = np.expand_dims(tau - self.tau_ref, -1)
            return self.z0 + dt * self.velocity(self.tau_ref)
        xi = self.rapidity(tau)
        dt_part = np.expand_dims(np.sinh(xi) - np.sinh(self.xi0), -1) * self.e_t
        ds_part = np.expand_dims(np.cosh(xi) - np.cosh(self.xi0), -1) * self.e_s
        return self.z0 + (dt_part + ds_part) / self.rate

    def cone_parameter(self, tau, l):
        """z(tau).l against null vectors l of shape (..., 4)."""
        pos = self.position(np.asarray(tau, dtype=float))
        return minkowski_dot(pos, l)

    def solve_cone_parameter(self, s, l):
        """Proper time with z(tau).l = s; closed form, no clipping.

        The returned value may lie outside [tau0, tau1]; the caller
        selects the segment.  l must be future null so that the map is
        strictly increasing.
        """
        l = np.asarray(l, dtype=float)
        s = np.asarray(s, dtype=float)
        base = s - minkowski_dot(self.z0, l)
        a = minkowski_dot(self.e_t, l)
        b = minkowski_dot(self.e_s, l)
        if abs(self.rate) < _TINY_RATE:
            vl = np.cosh(self.xi0) * a + np.sinh(self.xi0) * b
            return self.tau_ref + base / vl
        # With u = exp(xi) the equation becomes (a+b)u^2 - 2cu - (a-b) = 0
        # and a^2 > b^2 since e_t +/- e_s are future null.  Take the
        # positive root, in whichever algebraic form avoids cancellation.
        c = self.rate * base + a * np.sinh(self.xi0) + b * np.cosh(self.xi0)
        disc = np.sqrt(c * c + (a * a - b * b))
        with np.errstate(divide="ignore", invalid="ignore"):
            u_plus = (c + disc) / (a + b)
            u_minus = (a - b) / (disc - c)
        u = np.where(c > 0, u_plus, u_minus)
        return self.tau_ref + (np.log(u) - self.xi0) / self.rate


class Worldline:
    """Piecewise-smooth timelike trajectory with a complex charge.

    Segments join continuously in position and cover all proper time;
    the first and last extend to -inf and +inf.  Velocity may jump at
    the joints (sharp kink) unless a smoothing arc was inserted.
    """

    def __init__(self, charge, segments):
        if not segments:
            raise ValueError("need at least one segment")
        for left, right in zip(segments[:-1], segments[1:]):
            gap = np.max(np.abs(right.z0 - left.position(left.tau1)))
            if not left.tau1 == right.tau0:
                raise ValueError("segments must share break proper times")
            if gap > 1e-10:
                raise ValueError("segments must join continuously")
        self.charge = complex(charge)
        self.segments = tuple(segments)

    # -- constructors -------------------------------------------------------

    @classmethod
    def static(cls, charge, position=(0.0, 0.0, 0.0, 0.0),
               velocity=(1.0, 0.0, 0.0, 0.0)):
        return cls.from_velocities(charge, [velocity], [],
                                   position=position)

    @classmethod
    def from_velocities(cls, charge, velocities, breaks,
                        position=(0.0, 0.0, 0.0, 0.0), smoothing=0.0):
        """Piecewise trajectory: velocities[k] holds before breaks[k].

        ``breaks`` are strictly increasing proper times, one fewer than
        ``velocities``.  ``position`` anchors z at the first break (or at
        proper time 0 for a single inertial segment).  ``smoothing`` > 0
        replaces each kink by a hyperbolic arc of that proper duration.
        """
        vs = [_check_unit_timelike(v, "velocity") for v in velocities]
        taus = [float(b) for b in breaks]
        if len(vs) != len(taus) + 1:
            raise ValueError("need exactly one more velocity than breaks")
        if any(b >= c for b, c in zip(taus[:-1], taus[1:])):
            raise ValueError("break proper times must increase")
        z_anchor = np.asarray(position, dtype=float)

        if not taus:
            seg = Segment(-np.inf, np.inf, z_anchor, vs[0],
                          _any_orthogonal_space(vs[0]), 0.0, 0.0,
                          tau_ref=0.0)
            return cls(charge, [seg])

        if smoothing < 0.0:
            raise ValueError("smoothing must be nonnegative")
        if smoothing > 0.0:
            gaps = [c - b for b, c in zip(taus[:-1], taus[1:])]
            if gaps and min(gaps) <= smoothing:
                raise ValueError("smoothing arcs overlap")

        # build forward from the anchor at the first break
        segments = [Segment(-np.inf, taus[0], z_anchor, vs[0],
                            _any_orthogonal_space(vs[0]), 0.0, 0.0,
                            tau_ref=taus[0])]
        z = z_anchor.copy()
        for k, tk in enumerate(taus):
            v_in, v_out = vs[k], vs[k + 1]
            t_next = taus[k + 1] if k + 1 < len(taus) else np.inf
            if smoothing == 0.0 or np.allclose(v_in, v_out):
                seg = Segment(tk, t_next, z, v_out,
                              _any_orthogonal_space(v_out), 0.0, 0.0,
                              tau_ref=tk)
            else:
                e_t, e_s, xi = _boost_plane(v_in, v_out)
                half = 0.5 * smoothing
                # shrink the previous piece to make room for the arc
                segments[-1].tau1 = tk - half
                z_arc = segments[-1].position(tk - half)
                arc = Segment(tk - half, tk + half, z_arc, e_t, e_s,
                              -xi, 2.0 * xi / smoothing)
                segments.append(arc)
                z = arc.position(tk + half)
                seg = Segment(tk + half, t_next, z, v_out,
                              _any_orthogonal_space(v_out), 0.0, 0.0,
                              tau_ref=tk + half)
            segments.append(seg)
            if np.isfinite(t_next):
                z = seg.position(t_next)
        return cls(charge, segments)

    # -- kinematics ---------------------------------------------------------

    def _dispatch(self, tau, method):
        shape = np.shape(tau)
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        idx = np.zeros(tau.shape, dtype=int)
        for k, seg in enumerate(self.segments):
            idx = np.where(tau >= seg.tau0, k, idx)
        out = np.zeros(tau.shape + (4,))
        for k, seg in enumerate(self.segments):
            mask = idx == k
            if np.any(mask):
                out[mask] = getattr(seg, method)(tau[mask])
        return out.reshape(shape + (4,))

    def position(self, tau):
        return self._dispatch(tau, "position")

    def velocity(self, tau):
        return self._dispatch(tau, "velocity")

    def velocity_limits(self):
        past = self.segments[0].velocity(self.segments[0].tau_ref)
        fut = self.segments[-1].velocity(self.segments[-1].tau_ref)
        return past, fut

    def cone_proper_time(self, s, l):
        """Proper time with z(tau).l = s, vectorized over broadcast (s, l).

        z(tau).l is strictly increasing (timelike against future null),
        so the solution is unique; each point is routed to the segment
        whose cone-parameter range contains s.
        """
        l = np.asarray(l, dtype=float)
        s = np.broadcast_to(np.asarray(s, dtype=float),
                            np.broadcast_shapes(np.shape(s), l.shape[:-1]))
        if np.any(l[..., 0] <= 0.0):
            raise ValueError("l must be future null")
        tau = np.full(s.shape, np.nan)
        unresolved = np.ones(s.shape, dtype=bool)
        for seg in self.segments:
            cand = seg.solve_cone_parameter(s, l)
            inside = unresolved & (cand < seg.tau1)
            tau = np.where(inside, cand, tau)
            unresolved &= ~inside
        # anything left belongs to the closing half line
        if np.any(unresolved):
            last = self.segments[-1]
            tau = np.where(unresolved, last.solve_cone_parameter(s, l), tau)
        if not np.all(np.isfinite(tau)):
            raise RuntimeError("cone-parameter root failed; trajectory "
                               "is not timelike")
        return tau

    def retarded_proper_time(self, x):
        """Root of (x - z(tau))^2 = 0 on the past cone of x.

        The function tau -> (x - z)^2 is strictly decreasing where x - z
        is future pointing, so the retarded root is unique.  Closed form
        on inertial segments; bisection refined by Newton on arcs.
        """
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return float(self._retarded_single(x))
        flat = x.reshape(-1, 4)
        taus = np.array([self._retarded_single(p) for p in flat])
        return taus.reshape(x.shape[:-1])

    def _retarded_single(self, x):
        for seg in self.segments:
            tau = _retarded_on_segment(seg, x)
            if tau is not None:
                lo = seg.tau0 if np.isfinite(seg.tau0) else -np.inf
                if lo <= tau < seg.tau1:
                    return tau
        raise RuntimeError("retarded root not found; point may not be in "
                           "the causal future of the trajectory")


def _any_orthogonal_space(v):
    """Some unit spacelike vector orthogonal to unit timelike v."""
    seed = np.array([0.0, 1.0, 0.0, 0.0])
    if abs(minkowski_dot(seed, v)) > 0.9:
        seed = np.array([0.0, 0.0, 1.0, 0.0])
    w = seed - minkowski_dot(seed, v) * v
    return w / np.sqrt(-minkowski_dot(w, w))


def _boost_plane(v_in, v_out):
    """Orthonormal plane basis and half rapidity of the kink v_in -> v_out.

    Returns (e_t, e_s, xi) with v_in = cosh(xi) e_t - sinh(xi) e_s and
    v_out = cosh(xi) e_t + sinh(xi) e_s.
    """
    mid = v_in + v_out
    e_t = mid / np.sqrt(minkowski_dot(mid, mid))
    w = v_out - minkowski_dot(v_out, e_t) * e_t
    e_s = w / np.sqrt(-minkowski_dot(w, w))
    cosh2 = minkowski_dot(v_in, v_out)
    xi = 0.5 * np.arccosh(cosh2)
    return e_t, e_s, xi


def _retarded_on_segment(seg, x):
    """Retarded root on one segment, or None when it misses the window."""
    if abs(seg.rate) < _TINY_RATE:
        ref = seg.tau_ref
        v = seg.velocity(ref)
        dx = x - seg.position(np.array(ref))
        vx = minkowski_dot(v, dx)
        disc = vx * vx - minkowski_dot(dx, dx)
        if disc < 0.0:
            return None
        return ref + vx - np.sqrt(disc)
    # hyperbolic arc: bracket on [tau0, tau1], g is monotone decreasing
    def g(tau):
        d = x - seg.position(np.asarray(tau))
        return minkowski_dot(d, d)
    lo, hi = seg.tau0, seg.tau1
    glo, ghi = g(lo), g(hi)
    if not (glo >= 0.0 >= ghi):
        return None
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if g(mid) >= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
