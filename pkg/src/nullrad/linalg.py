"""Deterministic reductions and small numerical building blocks.

Quadrature weights, differentiation matrices and extrapolation tables used
throughout the package live here so that every module reduces data the same
way, node for node, run for run.
"""
from __future__ import annotations

import numpy as np


class ConvergenceError(RuntimeError):
    """A quadrature or extrapolation failed its self-consistency check."""


def fixed_tree_sum(values: np.ndarray, axis: int = -1) -> np.ndarray:
    """Sum along ``axis`` with a fixed pairwise reduction tree.

    The tree depends only on the length of the axis, never on chunking or
    thread count, so repeated runs are bit-for-bit identical.
    """
    a = np.moveaxis(np.asarray(values), axis, 0)
    n = a.shape[0]
    if n == 0:
        return np.zeros(a.shape[1:], dtype=a.dtype)
    while n > 1:
        half = n // 2
        paired = a[:half] + a[half:2 * half]
        if n % 2:
            paired = np.concatenate([paired, a[2 * half:]], axis=0)
        a = paired
        n = a.shape[0]
    return a[0]


def gauss_legendre(n: int, lo: float = -1.0, hi: float = 1.0):
    """Gauss-Legendre nodes and weights mapped to ``[lo, hi]``."""
    x, w = np.polynomial.legendre.leggauss(n)
    mid, rad = 0.5 * (hi + lo), 0.5 * (hi - lo)
    return mid + rad * x, rad * w


def composite_gauss_panels(lo: float, hi: float, n_panels: int, n_nodes: int):
    """Composite Gauss-Legendre rule over equal panels of ``[lo, hi]``."""
    edges = np.linspace(lo, hi, n_panels + 1)
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        x, w = gauss_legendre(n_nodes, a, b)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    x = np.asarray(nodes, dtype=float)
    n = x.size
    w = np.ones(n)
    for j in range(n):
        diff = x[j] - np.delete(x, j)
        w[j] = 1.0 / np.prod(diff)
    # rescale to tame overflow for larger n
    return w / np.max(np.abs(w))


def differentiation_matrix(nodes: np.ndarray) -> np.ndarray:
    """Spectral differentiation matrix on arbitrary distinct nodes.

    Uses the barycentric form of the Lagrange interpolant; exact for
    polynomials of degree ``len(nodes) - 1``.
    """
    x = np.asarray(nodes, dtype=float)
    w = barycentric_weights(x)
    n = x.size
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                d[i, j] = (w[j] / w[i]) / (x[i] - x[j])
        d[i, i] = -np.sum(d[i, np.arange(n) != i])
    return d


def richardson_table(values: np.ndarray, step_ratio: float = 2.0,
                     order: int = 1) -> np.ndarray:
    """Extrapolate a geometric-ladder sequence to its limit.

    ``values[k]`` is the estimate at step ``h0 / step_ratio**k`` and the
    error is assumed to expand in integer powers of the step starting at
    ``order``.  Returns the full extrapolation diagonal, finest last.
    """
    v = [np.asarray(x) for x in values]
    diag = [v[-1]]
    p = order
    while len(v) > 1:
        factor = step_ratio ** p
        v = [(factor * v[k + 1] - v[k]) / (factor - 1.0) for k in range(len(v) - 1)]
        diag.append(v[-1])
        p += 1
    return np.array(diag)


def richardson_limit(values: np.ndarray, step_ratio: float = 2.0,
                     order: int = 1):
    """Limit and error estimate from a geometric ladder of estimates.

    The error estimate is the spread between the last two extrapolants; a
    divergence flag is raised when the extrapolants grow instead of
    settling.
    """
    diag = richardson_table(values, step_ratio, order)
    if len(diag) == 1:
        return diag[0], np.inf, False
    err = np.max(np.abs(np.atleast_1d(diag[-1] - diag[-2])))
    diverging = False
    if len(values) >= 3:
        # a convergent ladder must contract; compare successive input steps
        steps = [np.max(np.abs(np.atleast_1d(values[k + 1] - values[k])))
                 for k in range(len(values) - 1)]
        scale = max(np.max(np.abs(np.atleast_1d(v))) for v in values)
        diverging = steps[-1] > max(steps[-2], 1e-14 * scale)
    return diag[-1], err, diverging
