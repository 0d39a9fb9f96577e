"""Foundation special functions.

Prime sieve with an optional on-disk cache, the Riemann zeta function for
Re s > 1 (and zeta(1+u) up to the line Re u = 0), complex log-gamma and
digamma, and Bessel functions of the first kind of integer order.

Every numeric routine accepts scalars or numpy arrays and returns the same
shape. Scalars come back as Python ``complex``/``float``.
"""

from __future__ import annotations

import functools
import math
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError, PoleError

EULER_GAMMA = 0.57721566490153286060651209

# Stieltjes constants gamma_0 .. gamma_12, used in the Laurent expansion
# zeta(1+u) = 1/u + sum_n (-1)^n gamma_n u^n / n!
STIELTJES = (
    0.5772156649015328606065,
    -0.07281584548367672486059,
    -0.00969036319287231848453,
    0.00205383442030334586616,
    0.002325370065467300057468,
    0.0007933238173010627017533,
    -0.0002387693454301996098724,
    -0.0005272895670577510460741,
    -0.0003521233538030395096021,
    -0.00003439477441808804817791,
    0.0002053328149090647946837,
    0.0002701844395439035266729,
    0.0001672729121051401933535,
)

ZETA2 = math.pi ** 2 / 6.0

# Bernoulli numbers B_2 .. B_24
_BERNOULLI = (
    1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730,
    7.0 / 6, -3617.0 / 510, 43867.0 / 798, -174611.0 / 330,
    854513.0 / 138, -236364091.0 / 2730,
)


def _as_complex_array(z):
    arr = np.asarray(z, dtype=complex)
    return np.atleast_1d(arr), arr.ndim == 0


def _finish(out, scalar, real=False):
    if scalar:
        v = out.ravel()[0]
        return float(v.real) if real else complex(v)
    return out.real.copy() if real else out


# ---------------------------------------------------------------- primes

_PTBL_MAGIC = b"PTBL1"


@dataclass(frozen=True)
class PrimeTable:
    """Primes up to ``limit`` with their natural logarithms."""

    limit: int
    primes: np.ndarray
    logs: np.ndarray

    def __post_init__(self):
        self.primes.setflags(write=False)
        self.logs.setflags(write=False)

    def __len__(self):
        return len(self.primes)

    def upto(self, bound):
        """Return (primes, logs) restricted to p <= bound."""
        j = int(np.searchsorted(self.primes, bound, side="right"))
        return self.primes[:j], self.logs[:j]


def _sieve(limit):
    # odd-only sieve of Eratosthenes
    if limit < 3:
        return np.array([2], dtype=np.int64)
    size = (limit - 1) // 2  # index i represents 2i+1, i >= 1
    is_p = np.ones(size + 1, dtype=bool)
    is_p[0] = False
    r = math.isqrt(limit)
    for i in range(1, (r - 1) // 2 + 1):
        if is_p[i]:
            p = 2 * i + 1
            is_p[(p * p) // 2::p] = False
    odd = 2 * np.flatnonzero(is_p).astype(np.int64) + 1
    return np.concatenate(([2], odd))


def _cache_path(limit):
    d = os.environ.get("RD_CACHE_DIR")
    if not d:
        return None
    return Path(d) / f"primes_{limit}.ptbl"


def write_prime_cache(path, limit, primes):
    """Write a prime table atomically in the PTBL1 binary layout."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    primes = np.asarray(primes, dtype="<i8")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".ptbl-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(_PTBL_MAGIC)
            fh.write(struct.pack("<q", limit))
            fh.write(struct.pack("<q", len(primes)))
            fh.write(primes.tobytes())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_prime_cache(path):
    """Read a PTBL1 file; returns (limit, primes) or None if malformed."""
    data = Path(path).read_bytes()
    if len(data) < 21 or data[:5] != _PTBL_MAGIC:
        return None
    limit, count = struct.unpack("<qq", data[5:21])
    body = data[21:]
    if len(body) != 8 * count:
        return None
    return limit, np.frombuffer(body, dtype="<i8").astype(np.int64)


@functools.lru_cache(maxsize=8)
def sieve_primes(limit):
    """All primes <= limit, with cached logs.

    If RD_CACHE_DIR is set the table is read from / written to a binary
    cache file in that directory.
    """
    if isinstance(limit, bool) or int(limit) != limit:
        raise ConfigError("prime limit must be an integer")
    limit = int(limit)
    if limit < 2 or limit > 10**9:
        raise ConfigError(f"prime limit must lie in [2, 1e9], got {limit}")
    primes = None
    path = _cache_path(limit)
    if path is not None and path.exists():
        got = read_prime_cache(path)
        if got is not None and got[0] == limit:
            primes = got[1]
    if primes is None:
        primes = _sieve(limit)
        if path is not None:
            try:
                write_prime_cache(path, limit, primes)
            except OSError:
                pass
    return PrimeTable(limit, primes, np.log(primes.astype(float)))


# ------------------------------------------------------------------ zeta

_EM_TERMS = 8


def _em_cutoff(s):
    # keep |s|/(2 pi M) <= 1/4 so the Bernoulli tail stays below 1e-14
    return np.maximum(50, np.ceil(2.0 * np.abs(s) / math.pi) + 1)


def _zeta_em_block(s, M, deriv):
    """Euler-Maclaurin for a 1-d array s sharing the cutoff M."""
    n = np.arange(1, M, dtype=float)
    logn = np.log(n)
    head = np.zeros(len(s), dtype=complex)
    dhead = np.zeros(len(s), dtype=complex)
    # chunk the (len(s), M) power table to bound memory
    step = max(1, 2_000_000 // M)
    for a in range(0, len(s), step):
        blk = np.exp(-np.outer(s[a:a + step], logn))
        head[a:a + step] = blk.sum(axis=1)
        if deriv:
            dhead[a:a + step] = -(blk * logn).sum(axis=1)
    lm = math.log(M)
    Ms = np.exp(-s * lm)  # M^{-s}
    sm1 = s - 1.0
    tail = M * Ms / sm1 + 0.5 * Ms
    dtail = -lm * M * Ms / sm1 - M * Ms / sm1 ** 2 - 0.5 * lm * Ms
    poch = s.copy()  # s (s+1) ... (s+2j-2)
    dlogpoch = 1.0 / s
    Mpow = Ms / M  # M^{-s-1}
    fact = 2.0  # (2j)!
    for j in range(1, _EM_TERMS + 1):
        term = _BERNOULLI[j - 1] / fact * poch * Mpow
        tail = tail + term
        if deriv:
            dtail = dtail + term * (dlogpoch - lm)
        poch = poch * (s + 2 * j - 1) * (s + 2 * j)
        dlogpoch = dlogpoch + 1.0 / (s + 2 * j - 1) + 1.0 / (s + 2 * j)
        Mpow = Mpow / (M * M)
        fact *= (2 * j + 1) * (2 * j + 2)
    return head + tail, dhead + dtail


def _zeta_em(s, deriv=False):
    """Euler-Maclaurin zeta (and optionally zeta') on a flat complex array."""
    s = np.asarray(s, dtype=complex).ravel()
    val = np.empty_like(s)
    dval = np.empty_like(s)
    if s.size == 0:
        return val, dval
    cut = _em_cutoff(s)
    # bucket cutoffs to multiples of 64 so nearby arguments share one power table
    bucket = (64 * np.ceil(cut / 64.0)).astype(int)
    for M in np.unique(bucket):
        idx = np.flatnonzero(bucket == M)
        v, dv = _zeta_em_block(s[idx], int(M), deriv)
        val[idx] = v
        dval[idx] = dv
    return val, dval


def zeta(s):
    """Riemann zeta for Re s >= 1.25 (Euler-Maclaurin)."""
    arr, scalar = _as_complex_array(s)
    if np.any(arr.real < 1.25):
        raise DomainError("zeta is provided only for Re s >= 1.25")
    v, _ = _zeta_em(arr)
    return _finish(v.reshape(arr.shape), scalar)


def zeta_logderiv(s):
    """zeta'(s)/zeta(s) for Re s >= 1.25."""
    arr, scalar = _as_complex_array(s)
    if np.any(arr.real < 1.25):
        raise DomainError("zeta_logderiv is provided only for Re s >= 1.25")
    v, dv = _zeta_em(arr, deriv=True)
    return _finish((dv / v).reshape(arr.shape), scalar)


def zeta_one_plus(u):
    """zeta(1+u) for Re u >= 0, u != 0.

    Laurent series through the Stieltjes constants when |u| < 0.1,
    Euler-Maclaurin otherwise.
    """
    arr, scalar = _as_complex_array(u)
    if np.any(arr.real < 0):
        raise DomainError("zeta(1+u) requires Re u >= 0")
    if np.any(arr == 0):
        raise PoleError("zeta(1+u) has a pole at u = 0")
    flat = arr.ravel()
    out = np.empty_like(flat)
    near = np.abs(flat) < 0.1
    if np.any(near):
        w = flat[near]
        acc = np.zeros_like(w)
        for n in range(len(STIELTJES) - 1, -1, -1):
            acc = acc * (-w) / (n + 1) + STIELTJES[n]
        # Horner above builds sum (-1)^n gamma_n w^n / n!
        out[near] = 1.0 / w + acc
    if np.any(~near):
        out[~near] = _zeta_em(1.0 + flat[~near])[0]
    return _finish(out.reshape(arr.shape), scalar)


@functools.lru_cache(maxsize=1)
def zeta_prime_over_zeta_at_2():
    """zeta'(2)/zeta(2) from the differentiated Euler-Maclaurin formula."""
    v, dv = _zeta_em(np.array([2.0 + 0j]), deriv=True)
    return float((dv[0] / v[0]).real)


# ------------------------------------------------------- gamma, digamma

_STIRLING_SHIFT = 10.0
_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)


def _shift_count(z):
    return np.maximum(0, np.ceil(_STIRLING_SHIFT - z.real)).astype(int)


def log_gamma(z):
    """Principal branch of log Gamma(z) for Re z > 0."""
    arr, scalar = _as_complex_array(z)
    if np.any(arr.real <= 0):
        raise DomainError("log_gamma requires Re z > 0")
    n = _shift_count(arr)
    w = arr + n
    corr = np.zeros_like(arr)
    for j in range(int(n.max(initial=0))):
        mask = n > j
        corr[mask] += np.log(arr[mask] + j)
    w2 = w * w
    series = np.zeros_like(arr)
    wp = w
    for j in range(1, len(_BERNOULLI) + 1):
        series += _BERNOULLI[j - 1] / (2 * j * (2 * j - 1) * wp)
        wp = wp * w2
    out = (w - 0.5) * np.log(w) - w + _HALF_LOG_2PI + series - corr
    return _finish(out, scalar)


def digamma(z):
    """psi(z) = Gamma'(z)/Gamma(z) for Re z > 0."""
    arr, scalar = _as_complex_array(z)
    if np.any(arr.real <= 0):
        raise DomainError("digamma requires Re z > 0")
    n = _shift_count(arr)
    w = arr + n
    corr = np.zeros_like(arr)
    for j in range(int(n.max(initial=0))):
        mask = n > j
        corr[mask] += 1.0 / (arr[mask] + j)
    w2 = w * w
    series = np.zeros_like(arr)
    wp = w2
    for j in range(1, len(_BERNOULLI) + 1):
        series += _BERNOULLI[j - 1] / (2 * j * wp)
        wp = wp * w2
    out = np.log(w) - 0.5 / w - series - corr
    return _finish(out, scalar)


# ---------------------------------------------------------------- Bessel

_SERIES_X = 8.0
_MAX_ORDER = 200


def _hankel_threshold(n):
    return max(35.0, 0.5 * n * n + 25.0)


def _bessel_series(n, x):
    h = 0.5 * x
    term = np.exp(n * np.log(np.where(h > 0, h, 1.0)) - math.lgamma(n + 1))
    term = np.where(h > 0, term, 1.0 if n == 0 else 0.0)
    total = term.copy()
    q = h * h
    for j in range(1, 80):
        term = -term * q / (j * (j + n))
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total) + 1e-300):
            break
    return total


def _bessel_hankel(n, x):
    mu = 4.0 * n * n
    P = np.ones_like(x)
    Q = np.zeros_like(x)
    term = np.ones_like(x)
    for k in range(1, 40):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if k % 2 == 1:
            Q += (-1) ** ((k - 1) // 2) * term
        else:
            P += (-1) ** (k // 2) * term
        if np.all(np.abs(term) < 1e-17):
            break
    chi = x - (0.5 * n + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (P * np.cos(chi) - Q * np.sin(chi))


def _bessel_miller(n, x):
    # backward recurrence from well above max(n, x), normalised by
    # J_0 + 2 sum_k J_2k = 1
    top = int(max(n, x.max()) + 40 + 12 * math.sqrt(max(n, x.max())))
    top += top % 2
    jp1 = np.zeros_like(x)
    j = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    keep = np.zeros_like(x)
    for idx in range(top, 0, -1):
        jm1 = (2.0 * idx / x) * j - jp1
        jp1, j = j, jm1
        # j now holds the unnormalised J_{idx-1}
        if idx - 1 == n:
            keep = j.copy()
        if (idx - 1) % 2 == 0 and idx - 1 > 0:
            norm += 2.0 * j
        big = np.abs(j) > 1e250
        if np.any(big):
            f = np.where(big, 1e-250, 1.0)
            j *= f
            jp1 *= f
            norm *= f
            keep *= f
    norm += j  # J_0 term
    return keep / norm


def bessel_j(order, x):
    """J_order(x) for integer 0 <= order <= 200 and real x >= 0."""
    n = int(order)
    if n != order or n < 0 or n > _MAX_ORDER:
        raise DomainError("bessel_j needs an integer order in [0, 200]")
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    flat = np.atleast_1d(arr).ravel()
    if np.any(flat < 0):
        raise DomainError("bessel_j requires x >= 0")
    out = np.empty_like(flat)
    ser = (flat <= _SERIES_X) | (flat * flat <= 4.0 * (n + 1))
    han = ~ser & (flat >= _hankel_threshold(n))
    mil = ~ser & ~han
    if np.any(ser):
        out[ser] = _bessel_series(n, flat[ser])
    if np.any(han):
        out[han] = _bessel_hankel(n, flat[han])
    if np.any(mil):
        out[mil] = _bessel_miller(n, flat[mil])
    if scalar:
        return float(out[0])
    return out.reshape(arr.shape)
