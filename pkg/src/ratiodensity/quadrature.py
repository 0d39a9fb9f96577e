"""Composite Gauss-Legendre quadrature and polynomial extrapolation."""

from __future__ import annotations

import functools
import math

import numpy as np

from .errors import NumericError


@functools.lru_cache(maxsize=16)
def gauss_legendre(order):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_nodes(edges, order=16):
    """Nodes and weights of composite Gauss-Legendre on consecutive panels."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(order)
    a = edges[:-1, None]
    b = edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (a + b) * 0.5 + half * x
    weights = half * w
    return nodes.ravel(), weights.ravel()


def split_edges(breaks, max_width):
    """Refine sorted breakpoints so no panel is wider than max_width."""
    breaks = np.unique(np.asarray(breaks, dtype=float))
    out = [breaks[0]]
    for a, b in zip(breaks[:-1], breaks[1:]):
        n = max(1, int(math.ceil((b - a) / max_width)))
        out.extend(np.linspace(a, b, n + 1)[1:])
    return np.array(out)


def integrate(f, edges, order=16):
    """Integrate a vectorised f over the panels given by edges."""
    nodes, weights = panel_nodes(edges, order)
    return np.sum(weights * f(nodes))


def integrate_checked(f, edges, tol, order=16):
    """Integrate f, comparing against a run with every panel halved.

    Returns (value, error_estimate); raises NumericError when the two
    resolutions disagree by more than tol.
    """
    coarse = integrate(f, edges, order)
    fine_edges = np.sort(np.concatenate([edges, 0.5 * (edges[1:] + edges[:-1])]))
    fine = integrate(f, fine_edges, order)
    err = abs(fine - coarse)
    if err > tol:
        raise NumericError(
            f"quadrature did not converge: panel halving moved the value by {err:.3e}"
        )
    return fine, err


def neville_at_zero(h, values):
    """Polynomial extrapolation of values(h) to h = 0.

    Returns (estimate, error_estimate) where the error estimate is the
    change contributed by the last interpolation order.
    """
    h = [float(v) for v in h]
    table = [complex(v) for v in values]
    n = len(h)
    if n == 0:
        raise NumericError("nothing to extrapolate")
    prev = table[-1]
    est = table[0]
    for level in range(1, n):
        for i in range(n - level):
            j = i + level
            table[i] = (h[j] * table[i] - h[i] * table[i + 1]) / (h[j] - h[i])
        prev, est = est, table[0]
    return est, abs(est - prev)
