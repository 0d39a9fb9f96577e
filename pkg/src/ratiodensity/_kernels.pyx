# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: Kloosterman enumeration and Euler-product kernels."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, exp, M_PI

cnp.import_array()


cdef long long _inverse(long long a, long long m) nogil:
    # extended Euclid; returns 0 when gcd(a, m) != 1
    cdef long long g = m, x = 0, x1 = 1, a1 = a, q, t
    while a1 != 0:
        q = g // a1
        t = g - q * a1
        g = a1
        a1 = t
        t = x - q * x1
        x = x1
        x1 = t
    if g != 1:
        return 0
    x %= m
    if x < 0:
        x += m
    return x


def kloosterman_enum(long long m, long long n, long long c):
    """Direct sum over units d mod c; returns (real, imag)."""
    cdef long long d, dinv, r
    cdef double re = 0.0, im = 0.0, ang
    cdef double step = 2.0 * M_PI / c
    if c == 1:
        return 1.0, 0.0
    m %= c
    n %= c
    if m < 0:
        m += c
    if n < 0:
        n += c
    with nogil:
        for d in range(1, c):
            dinv = _inverse(d, c)
            if dinv == 0:
                continue
            r = (m * d + n * dinv) % c
            ang = step * r
            re += cos(ang)
            im += sin(ang)
    return re, im


def kloosterman_table(long long c, long long mmax, long long nmax):
    """S(m, n; c) for 0 <= m <= mmax, 0 <= n <= nmax as a real array."""
    cdef long long d, dinv, mm, nn, r, rm
    cdef cnp.ndarray[double, ndim=2] out = np.zeros((mmax + 1, nmax + 1))
    cdef double[:, :] o = out
    cdef double[:] ctab
    if c == 1:
        out[:, :] = 1.0
        return out
    # cos(2 pi r / c) looked up by residue instead of recomputed per entry
    ctab = np.cos((2.0 * np.pi / c) * np.arange(c))
    with nogil:
        for d in range(1, c):
            dinv = _inverse(d, c)
            if dinv == 0:
                continue
            for mm in range(mmax + 1):
                rm = (mm * d) % c
                r = rm
                for nn in range(nmax + 1):
                    o[mm, nn] += ctab[r]
                    r += dinv
                    if r >= c:
                        r -= c
    return out


def residual_product(u, const double[:] pp, const double[:] lp, int peel=0):
    """prod_p (1 - (1 - w) / (p (p + w))), w = p^{-u}, for every u.

    With peel=1 each factor is multiplied by
    (1 - p^{-2-u}) (1 - p^{-3-u}) / ((1 - p^{-2}) (1 - p^{-3-2u})),
    leaving factors 1 + O(p^{-4}).
    """
    cdef Py_ssize_t i, j, nu = u.shape[0], npr = pp.shape[0]
    cdef double a, b, mag, wr, wi, dr, di, den, nr, ni, tr, ti, pr, pi_, q, a_tmp
    cdef double q2, q3, xr, xi, yr, yi, zr, zi, w2r, w2i
    out = np.empty(nu, dtype=complex)
    cdef const double[:] ur = np.ascontiguousarray(u.real)
    cdef const double[:] ui = np.ascontiguousarray(u.imag)
    cdef double[:] outr = np.empty(nu)
    cdef double[:] outi = np.empty(nu)
    with nogil:
        for i in range(nu):
            a = ur[i]
            b = ui[i]
            pr = 1.0
            pi_ = 0.0
            for j in range(npr):
                q = pp[j]
                mag = exp(-a * lp[j])
                wr = mag * cos(b * lp[j])
                wi = -mag * sin(b * lp[j])
                # (1 - w) / (p (p + w))
                dr = q * (q + wr)
                di = q * wi
                den = dr * dr + di * di
                nr = 1.0 - wr
                ni = -wi
                tr = 1.0 - (nr * dr + ni * di) / den
                ti = -(ni * dr - nr * di) / den
                if peel:
                    q2 = 1.0 / (q * q)
                    q3 = q2 / q
                    # x = (1 - w q^2)(1 - w q^3)
                    xr = 1.0 - wr * q2
                    xi = -wi * q2
                    yr = 1.0 - wr * q3
                    yi = -wi * q3
                    zr = xr * yr - xi * yi
                    zi = xr * yi + xi * yr
                    # divide by (1 - q^2)(1 - w^2 q^3)
                    w2r = wr * wr - wi * wi
                    w2i = 2.0 * wr * wi
                    dr = (1.0 - q2) * (1.0 - w2r * q3)
                    di = -(1.0 - q2) * w2i * q3
                    den = dr * dr + di * di
                    xr = (zr * dr + zi * di) / den
                    xi = (zi * dr - zr * di) / den
                    a_tmp = tr * xr - ti * xi
                    ti = tr * xi + ti * xr
                    tr = a_tmp
                a_tmp = pr * tr - pi_ * ti
                pi_ = pr * ti + pi_ * tr
                pr = a_tmp
            outr[i] = pr
            outi[i] = pi_
    out.real = np.asarray(outr)
    out.imag = np.asarray(outi)
    return out


def chi_direct_product(double ure, double uim, const double[:] pp, const double[:] lp):
    """prod_p (1 + p^{-u} / (p - 1)) over the supplied primes."""
    cdef Py_ssize_t j, npr = pp.shape[0]
    cdef double pr = 1.0, pi_ = 0.0, mag, tr, ti, tmp
    with nogil:
        for j in range(npr):
            mag = exp(-ure * lp[j]) / (pp[j] - 1.0)
            tr = 1.0 + mag * cos(uim * lp[j])
            ti = -mag * sin(uim * lp[j])
            tmp = pr * tr - pi_ * ti
            pi_ = pr * ti + pi_ * tr
            pr = tmp
    return complex(pr, pi_)
