"""Small integer arithmetic: primality, factorisation, multiplicative functions."""

from __future__ import annotations

import functools
import math


def is_prime(n):
    """Deterministic Miller-Rabin for n < 3.3e24."""
    n = int(n)
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for p in small:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@functools.lru_cache(maxsize=65536)
def factorize(n):
    """Prime factorisation as a tuple of (prime, exponent), ascending."""
    n = int(n)
    if n < 1:
        raise ValueError("factorize needs a positive integer")
    out = []
    for p in (2, 3):
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            out.append((p, e))
    p = 5
    while p * p <= n:
        for q in (p, p + 2):
            e = 0
            while n % q == 0:
                n //= q
                e += 1
            if e:
                out.append((q, e))
        p += 6
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def mobius(n):
    f = factorize(n)
    if any(e > 1 for _, e in f):
        return 0
    return -1 if len(f) % 2 else 1


def euler_phi(n):
    out = 1
    for p, e in factorize(n):
        out *= (p - 1) * p ** (e - 1)
    return out


def divisor_count(n):
    return math.prod(e + 1 for _, e in factorize(n))


def divisor_count3(n):
    """tau_3(n): number of ordered factorisations n = abc."""
    return math.prod((e + 1) * (e + 2) // 2 for _, e in factorize(n))
