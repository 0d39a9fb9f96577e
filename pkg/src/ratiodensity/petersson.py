"""Kloosterman sums and the Petersson average Delta_{k,N}(m, n).

    Delta_{k,N}(m, n) = delta(m, n)
        + 2 pi i^k sum_{c = 0 mod N} S(m, n; c)/c * J_{k-1}(4 pi sqrt(mn)/c)

The c-sum is truncated at c <= c_sum_cutoff_factor * N and the remainder is
bounded with elementary estimates (see ``_c_tail_bound``).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .arith import divisor_count, divisor_count3, factorize, is_prime
from .config import FamilyParams, TruncationPolicy
from .errors import ConfigError, DomainError, NumericError
from .special import bessel_j

DEFAULT_POLICY = TruncationPolicy()
MAX_DIRECT_MODULUS = 10_000_000
IMAG_TOL = 1e-9
# largest prime modulus for which a full FFT table of S(a, 1; q) is built
PRIME_TABLE_MAX = 2_000_000


def _check_modulus(c):
    c = int(c)
    if c <= 0:
        raise DomainError("Kloosterman modulus must be a positive integer")
    return c


def kloosterman_direct(m, n, c):
    """S(m, n; c) by enumeration of the units mod c."""
    c = _check_modulus(c)
    if c > MAX_DIRECT_MODULUS:
        raise DomainError(f"direct enumeration limited to c <= {MAX_DIRECT_MODULUS}")
    re, im = kernels.kloosterman_enum(int(m) % c, int(n) % c, c)
    if abs(im) >= IMAG_TOL:
        raise NumericError(f"S({m},{n};{c}) has imaginary part {im:.3e}")
    return re


@functools.lru_cache(maxsize=32)
def _prime_table(q):
    """S(a, 1; q) for a = 0..q-1, q prime, as q * ifft(v) with v[d] = e(dbar/q)."""
    d = np.arange(1, q, dtype=np.int64)
    # dbar = d^(q-2) mod q, square-and-multiply on the whole array
    e, base, acc = q - 2, d.copy(), np.ones_like(d)
    while e:
        if e & 1:
            acc = acc * base % q
        base = base * base % q
        e >>= 1
    inv = acc
    v = np.zeros(q, dtype=complex)
    v[d] = np.exp(2j * math.pi * inv / q)
    out = q * np.fft.ifft(v)
    if np.max(np.abs(out.imag)) >= IMAG_TOL * max(1.0, math.sqrt(q)):
        raise NumericError(f"prime table for q={q} is not real")
    tab = out.real.copy()
    tab[0] = -1.0  # Ramanujan sum c_q(1)
    tab.setflags(write=False)
    return tab


def _kloosterman_prime(m, n, q, table):
    m %= q
    n %= q
    if m == 0 and n == 0:
        return float(q - 1)
    if m == 0 or n == 0:
        return -1.0
    if q == table and q <= PRIME_TABLE_MAX:
        return float(_prime_table(q)[m * n % q])
    return kloosterman_direct(m, n, q)


def _kloosterman(m, n, factors, table=None):
    """Recursive twisted multiplicativity over the prime-power factors."""
    if not factors:
        return 1.0
    p, e = factors[0]
    q = p ** e
    if len(factors) == 1:
        if e == 1:
            return _kloosterman_prime(m, n, q, table)
        return kloosterman_direct(m, n, q)
    rest = math.prod(pp ** ee for pp, ee in factors[1:])
    q_inv = pow(q, -1, rest)
    r_inv = pow(rest, -1, q)
    first = _kloosterman(m * r_inv, n * r_inv, factors[:1], table)
    if first == 0.0:
        return 0.0
    return first * _kloosterman(m * q_inv, n * q_inv, factors[1:], table)


def kloosterman(m, n, c, table_prime=None):
    """S(m, n; c) = sum_{d mod c, (d,c)=1} e((m d + n dbar)/c), real-valued.

    Composite moduli are split into coprime prime powers with
    S(m,n;c1 c2) = S(m c2bar, n c2bar; c1) S(m c1bar, n c1bar; c2).
    A prime factor equal to ``table_prime`` is read from a cached FFT table,
    which pays off when many sums share that prime (the level N).
    """
    c = _check_modulus(c)
    if c == 1:
        return 1.0
    return _kloosterman(int(m), int(n), factorize(c), table_prime)


def kloosterman_split(m, n, c1, c2):
    """The twisted-multiplicativity product for coprime c1, c2 (direct on each)."""
    c1, c2 = _check_modulus(c1), _check_modulus(c2)
    if math.gcd(c1, c2) != 1:
        raise DomainError("kloosterman_split needs coprime moduli")
    a = pow(c2, -1, c1) if c1 > 1 else 0
    b = pow(c1, -1, c2) if c2 > 1 else 0
    return kloosterman_direct(m * a, n * a, c1) * kloosterman_direct(m * b, n * b, c2)


def weil_bound(m, n, c):
    """tau(c) gcd(m, n, c)^{1/2} sqrt(c)."""
    g = math.gcd(math.gcd(int(m), int(n)), int(c))
    return divisor_count(c) * math.sqrt(g) * math.sqrt(c)


# ------------------------------------------------------------ Petersson

@functools.lru_cache(maxsize=8)
def _divisor_power_constant(delta):
    """sup_n tau(n) / n^delta = prod_{p < 2^{1/delta}} max_e (e+1) p^{-e delta}."""
    out = 1.0
    p = 2
    while p < 2.0 ** (1.0 / delta):
        if is_prime(p):
            out *= max((e + 1) * p ** (-e * delta) for e in range(64))
        p += 1
    return out


def _c_tail_bound(m, n, k, N, J):
    """Bound on |2 pi sum_{c = jN, j > J} S(m,n;c)/c J_{k-1}(4 pi sqrt(mn)/c)|.

    Uses |J_{k-1}(x)| <= (x/2)^{k-1}/(k-1)! (valid for x >= 0) with either
    |S| <= c, which sums for k >= 4, or the Weil bound with
    tau(jN) <= 2 tau(j) <= 2 C j^{1/4}, which sums for every k >= 2.
    """
    a = 2.0 * math.pi * math.sqrt(m * n) / N
    fact = math.factorial(k - 1)
    # trivial: 2 pi sum_{j>J} (a/j)^{k-1}/(k-1)! <= 2 pi a^{k-1}/(k-1)! J^{2-k}/(k-2)
    trivial = math.inf
    if k > 2:
        trivial = 2.0 * math.pi * a ** (k - 1) / fact * J ** (2.0 - k) / (k - 2.0)
    # Weil: |S|/c <= 2 C j^{1/4} sqrt(g) (jN)^{-1/2}; exponent 1/4-1/2-(k-1) < -1
    C = _divisor_power_constant(0.25)
    g = math.gcd(math.gcd(int(m), int(n)), N)
    expo = k - 1 + 0.25
    weil = (2.0 * math.pi * 2.0 * C * math.sqrt(g) / math.sqrt(N)
            * a ** (k - 1) / fact * J ** (-expo + 1.0) / (expo - 1.0))
    return min(trivial, weil)


@dataclass(frozen=True)
class PeterssonResult:
    value: float
    tail_bound: float
    terms: int


def delta_kN_details(m, n, params, policy=DEFAULT_POLICY):
    m, n = int(m), int(n)
    if m < 1 or n < 1:
        raise DomainError("Petersson arguments must be positive integers")
    k, N = params.k, params.N
    J = policy.c_sum_cutoff_factor
    x0 = 4.0 * math.pi * math.sqrt(m * n)
    if x0 > J * N:
        raise ConfigError(
            f"c-sum cutoff {J}*N does not reach the tail region 4 pi sqrt(mn) <= c; "
            f"raise c_sum_cutoff_factor above {math.ceil(x0 / N)}"
        )
    c = N * np.arange(1, J + 1, dtype=np.int64)
    bes = bessel_j(k - 1, x0 / c.astype(float))
    live = np.abs(bes) > 0.0
    S = np.zeros(len(c))
    for i in np.flatnonzero(live):
        S[i] = kloosterman(m, n, int(c[i]), table_prime=N)
    ik = 1 if k % 4 == 0 else -1
    series = 2.0 * math.pi * ik * math.fsum(S * bes / c)
    value = (1.0 if m == n else 0.0) + series
    return PeterssonResult(value, _c_tail_bound(m, n, k, N, J), int(live.sum()))


def delta_kN(m, n, params, policy=DEFAULT_POLICY):
    """(Delta_{k,N}(m, n), tail_bound) with the c-sum truncated at c <= J N."""
    r = delta_kN_details(m, n, params, policy)
    return r.value, r.tail_bound


# ------------------------------------------------------- bound shapes

def _gcd3(m, n, N):
    return math.gcd(math.gcd(m, n), N)


def bound_A2(m, n, params):
    """tau(N)/(N k^{5/6}) (m,n,N) tau_3((m,n)) / sqrt((m,N)+(n,N))
    * (mn/(sqrt(mn) + kN))^{1/2} log(2mn), implied constant 1."""
    k, N = params.k, params.N
    mn = m * n
    return (divisor_count(N) / (N * k ** (5.0 / 6.0)) * _gcd3(m, n, N)
            * divisor_count3(math.gcd(m, n)) / math.sqrt(math.gcd(m, N) + math.gcd(n, N))
            * math.sqrt(mn / (math.sqrt(mn) + k * N)) * math.log(2.0 * mn))


def bound_A3(m, n, params, enforce=True):
    """tau(N)/(2^k N^{3/2}) (m,n,N) sqrt(mn) / sqrt((m,N)+(n,N)) tau((m,n)).

    Valid when 12 pi sqrt(mn) <= kN; enforce=False evaluates the shape anyway.
    """
    k, N = params.k, params.N
    if enforce and 12.0 * math.pi * math.sqrt(m * n) > k * N:
        raise DomainError("bound_A3 requires 12 pi sqrt(mn) <= kN")
    return (divisor_count(N) / (2.0 ** k * N ** 1.5) * _gcd3(m, n, N) * math.sqrt(m * n)
            / math.sqrt(math.gcd(m, N) + math.gcd(n, N)) * divisor_count(math.gcd(m, n)))


def bound_3_2(m, n, params, eps=0.1):
    """(mN)^eps/N + (mn/(sqrt(mn)+N))^{1/2} log(2mn) / (N sqrt((m,N)+(n,N)))."""
    N = params.N
    mn = m * n
    first = (m * N) ** eps / N
    second = (math.sqrt(mn / (math.sqrt(mn) + N)) * math.log(2.0 * mn)
              / (N * math.sqrt(math.gcd(m, N) + math.gcd(n, N))))
    return first + second


__all__ = [
    "FamilyParams", "PeterssonResult", "bound_3_2", "bound_A2", "bound_A3", "delta_kN",
    "delta_kN_details", "kloosterman", "kloosterman_direct", "kloosterman_split", "weil_bound",
]
