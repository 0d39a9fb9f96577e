"""Even test functions with compactly supported Fourier transform.

The sinc-power family

    phi(x) = A * (sin(w) / w)^m,   w = 2 pi sigma x / m,

has Fourier transform (convention phi_hat(xi) = int phi(x) e^{-2 pi i x xi} dx)
equal to a scaled cardinal B-spline of order m,

    phi_hat(xi) = B_m(m xi / (2 sigma)) / B_m(0),

supported exactly on [-sigma, sigma]. A = 2 sigma / (m B_m(0)) makes
phi_hat(0) = 1. The hat is evaluated as an explicit piecewise polynomial, so
support and hat values carry no quadrature error.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ConfigError


@functools.lru_cache(maxsize=None)
def _bspline_pieces(m):
    """Coefficients of B_m on [i - m/2, i + 1 - m/2] in t = x - (i - m/2).

    Row i holds ascending-power coefficients of the degree m-1 polynomial.
    """
    deg = m - 1
    fact = math.factorial(deg)
    rows = []
    for i in range(m):
        coef = [Fraction(0)] * (deg + 1)
        for j in range(i + 1):
            # (-1)^j C(m, j) (t + i - j)^deg / deg!
            c = Fraction((-1) ** j * math.comb(m, j), fact)
            shift = i - j
            for r in range(deg + 1):
                coef[r] += c * math.comb(deg, r) * Fraction(shift) ** (deg - r)
        rows.append(coef)
    return rows


@functools.lru_cache(maxsize=None)
def _bspline_tables(m):
    rows = _bspline_pieces(m)
    poly = np.array([[float(c) for c in row] for row in rows])
    # antiderivative coefficients, zero at the left end of each piece
    anti = np.zeros((m, m + 1))
    anti[:, 1:] = poly / np.arange(1, m + 1)
    # cumulative integral at the left end of each piece
    left = np.zeros(m + 1)
    for i in range(m):
        left[i + 1] = left[i] + float(sum(c / (r + 1) for r, c in enumerate(rows[i])))
    return poly, anti, left


def bspline(m, x):
    """Cardinal B-spline of order m (density of a sum of m uniforms on [-1/2, 1/2])."""
    poly, _, _ = _bspline_tables(m)
    x = np.asarray(x, dtype=float)
    y = x + 0.5 * m
    inside = (y > 0) & (y < m)
    i = np.clip(np.floor(y).astype(int), 0, m - 1)
    t = y - i
    out = np.zeros_like(y)
    for r in range(m - 1, -1, -1):
        out = out * t + poly[i, r]
    return np.where(inside, out, 0.0)


def bspline_cdf(m, x):
    """int_{-inf}^x B_m, exact piecewise polynomial."""
    _, anti, left = _bspline_tables(m)
    x = np.asarray(x, dtype=float)
    y = x + 0.5 * m
    i = np.clip(np.floor(y).astype(int), 0, m - 1)
    t = np.clip(y - i, 0.0, 1.0)
    acc = np.zeros_like(y)
    for r in range(m, -1, -1):
        acc = acc * t + anti[i, r]
    out = left[i] + acc
    out = np.where(y <= 0, 0.0, out)
    return np.where(y >= m, 1.0, out)


@dataclass(frozen=True)
class TestFunction:
    """phi(x) = A sinc(2 pi sigma x / m)^m with hat supported on [-sigma, sigma]."""

    m: int
    sigma: float
    A: float
    family: str = "sinc_power"

    __test__ = False  # not a pytest class

    @property
    def knots(self):
        """Points of [-sigma, sigma] where phi_hat changes polynomial piece."""
        return self.sigma * (2.0 * np.arange(self.m + 1) - self.m) / self.m

    def to_dict(self):
        return {"family": self.family, "m": self.m, "sigma": self.sigma}


def make_sinc_power(m, sigma):
    if isinstance(m, bool) or int(m) != m or m < 2 or m % 2:
        raise ConfigError("m must be an even integer >= 2")
    m = int(m)
    if m > 8:
        raise ConfigError("m must be one of 2, 4, 6, 8")
    sigma = float(sigma)
    if not sigma > 0 or not math.isfinite(sigma):
        raise ConfigError("sigma must be a positive real")
    b0 = float(bspline(m, 0.0))
    return TestFunction(m=m, sigma=sigma, A=2.0 * sigma / (m * b0))


def _sinc_power(tf, w):
    small = np.abs(w) < 1e-4
    safe = np.where(small, 1.0, w)
    w2 = w * w
    val = np.where(small, 1.0 - w2 / 6.0 + w2 * w2 / 120.0, np.sin(safe) / safe)
    return tf.A * val ** tf.m


def phi(tf, x):
    """phi(x), real x (scalar or array)."""
    x = np.asarray(x, dtype=float)
    out = _sinc_power(tf, 2.0 * math.pi * tf.sigma * x / tf.m)
    return float(out) if out.ndim == 0 else out


def phi_complex(tf, z):
    """Analytic continuation of phi to complex arguments."""
    z = np.asarray(z, dtype=complex)
    out = _sinc_power(tf, 2.0 * math.pi * tf.sigma * z / tf.m)
    return complex(out) if out.ndim == 0 else out


def phi_hat(tf, xi):
    """phi_hat(xi); exactly zero for |xi| >= sigma."""
    xi = np.asarray(xi, dtype=float)
    b0 = bspline(tf.m, 0.0)
    out = bspline(tf.m, tf.m * xi / (2.0 * tf.sigma)) / b0
    out = np.where(np.abs(xi) >= tf.sigma, 0.0, np.maximum(out, 0.0))
    return float(out) if out.ndim == 0 else out


def hat_integral(tf, a, b):
    """int_a^b phi_hat(xi) d xi, exact."""
    scale = 2.0 * tf.sigma / tf.m
    b0 = float(bspline(tf.m, 0.0))
    hi = bspline_cdf(tf.m, b / scale)
    lo = bspline_cdf(tf.m, a / scale)
    return float(scale * (hi - lo) / b0)


def phi_tail_bound(tf, T):
    """Upper bound for int_T^inf |phi(x)| dx (T > 0)."""
    c = tf.m / (2.0 * math.pi * tf.sigma)
    return tf.A * c ** tf.m * T ** (1 - tf.m) / (tf.m - 1)


def tail_window(tf, tol):
    """Smallest T with int_T^inf |phi| <= tol."""
    c = tf.m / (2.0 * math.pi * tf.sigma)
    return (tf.A * c ** tf.m / ((tf.m - 1) * tol)) ** (1.0 / (tf.m - 1))


@dataclass(frozen=True)
class DecayReport:
    n: int
    C: float
    C_refined: float
    stable: bool
    passed: bool


def _decay_ratio(tf, n, z):
    z = np.asarray(z, dtype=complex)
    r2 = z.real ** 2 + z.imag ** 2
    bound = np.exp(2.0 * math.pi * np.abs(z.imag) * tf.sigma) * r2 ** (-float(n))
    val = np.abs(phi_complex(tf, z))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(r2 > 0, val / bound, 0.0)
    return float(np.max(ratio)) if ratio.size else 0.0


def check_decay_bound(tf, n, grid):
    """Smallest C with |phi(t+iy)| <= C e^{2 pi |y| sigma} (t^2+y^2)^{-n} on grid.

    The grid is refined by inserting the midpoint of every consecutive pair
    of points; the check passes when C is finite and grows by at most 10%.
    """
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ConfigError("n must be a positive integer")
    if n > tf.m // 2:
        raise ConfigError(f"decay exponent n={n} exceeds m/2={tf.m // 2} for this family")
    grid = np.asarray(list(grid), dtype=complex)
    C = _decay_ratio(tf, n, grid)
    mids = 0.5 * (grid[1:] + grid[:-1])
    C_ref = max(C, _decay_ratio(tf, n, mids))
    stable = math.isfinite(C_ref) and C_ref <= 1.1 * C
    return DecayReport(n=int(n), C=C, C_refined=C_ref, stable=stable,
                       passed=math.isfinite(C) and stable)
