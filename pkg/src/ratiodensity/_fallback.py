"""Pure numpy versions of the compiled kernels (same signatures)."""

from __future__ import annotations

import math

import numpy as np


def _units_and_inverses(c):
    d = np.arange(1, c, dtype=np.int64)
    d = d[np.gcd(d, c) == 1]
    # d^{-1} = d^{phi(c)-1} mod c by square-and-multiply on the whole array
    e = len(d) - 1
    inv = np.ones_like(d)
    base = d % c
    while e:
        if e & 1:
            inv = inv * base % c
        base = base * base % c
        e >>= 1
    return d, inv


def kloosterman_enum(m, n, c):
    """Direct sum over units d mod c; returns (real, imag)."""
    m, n, c = int(m), int(n), int(c)
    if c == 1:
        return 1.0, 0.0
    d, inv = _units_and_inverses(c)
    r = ((m % c) * d + (n % c) * inv) % c
    ang = (2.0 * math.pi / c) * r
    return float(np.cos(ang).sum()), float(np.sin(ang).sum())


def kloosterman_table(c, mmax, nmax):
    """S(m, n; c) for 0 <= m <= mmax, 0 <= n <= nmax as a real array."""
    c = int(c)
    if c == 1:
        return np.ones((mmax + 1, nmax + 1))
    d, inv = _units_and_inverses(c)
    mm = np.arange(mmax + 1)
    nn = np.arange(nmax + 1)
    step = 2.0 * math.pi / c
    # S(m,n) = Re sum_d e(m d / c) e(n dbar / c)
    A = np.exp(1j * step * (np.outer(mm, d) % c))
    B = np.exp(1j * step * (np.outer(inv, nn) % c))
    return (A @ B).real


def residual_product(u, p, logp, peel=0, block=256):
    """prod_p (1 - (1 - w) / (p (p + w))), w = p^{-u}, for every u.

    With peel=1 each factor is multiplied by
    (1 - p^{-2-u}) (1 - p^{-3-u}) / ((1 - p^{-2}) (1 - p^{-3-2u})),
    leaving factors 1 + O(p^{-4}).
    """
    u = np.asarray(u, dtype=complex)
    out = np.empty(len(u), dtype=complex)
    q2 = 1.0 / (p * p)
    q3 = q2 / p
    for a in range(0, len(u), block):
        w = np.exp(-np.outer(u[a:a + block], logp))
        t = 1.0 - (1.0 - w) / (p * (p + w))
        if peel:
            t = t * (1.0 - w * q2) * (1.0 - w * q3) / ((1.0 - q2) * (1.0 - w * w * q3))
        out[a:a + block] = np.prod(t, axis=1)
    return out


def chi_direct_product(ure, uim, p, logp, block=1 << 20):
    """prod_p (1 + p^{-u} / (p - 1)) over the supplied primes."""
    u = complex(ure, uim)
    acc = 1.0 + 0j
    for a in range(0, len(p), block):
        w = np.exp(-u * logp[a:a + block])
        acc *= np.prod(1.0 + w / (p[a:a + block] - 1.0))
    return complex(acc)
