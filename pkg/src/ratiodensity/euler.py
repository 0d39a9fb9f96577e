"""Euler products and prime sums.

chi(u) = prod_p (1 + 1/((p-1) p^u)) is evaluated through the factorisation

    chi(u) = zeta(2)/zeta(2+2u) * zeta(1+u) * Pi(u),
    Pi(u)  = prod_p (1 - (p^u - 1)/(p (p^{1+u} + 1))),

whose factors are 1 + O(p^-2). Pi itself is accelerated once more:

    Pi(u) = zeta(2+u) zeta(3+u) / (zeta(2) zeta(3+2u)) * prod_p r_p(u),

with r_p(u) = 1 + O(p^-4), so a short prime range suffices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .config import TruncationPolicy
from .errors import DomainError, PoleError
from .special import (
    EULER_GAMMA,
    ZETA2,
    _zeta_em,
    digamma,
    log_gamma,
    sieve_primes,
    zeta_one_plus,
    zeta_prime_over_zeta_at_2,
)

DEFAULT_POLICY = TruncationPolicy()

# |log r_p(u)| <= R4_COEFF * p^-4 for Re u >= 0 (coefficient measured <= 4.1)
R4_COEFF = 5.0


def primes_upto(x):
    """(primes, logs) for p <= x, sharing sieves through power-of-two limits."""
    x = float(x)
    if x < 2:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    limit = max(1024, 1 << int(math.ceil(math.log2(x + 1))))
    return sieve_primes(limit).upto(x)


def _zeta_arr(s):
    v, _ = _zeta_em(s)
    return v


def _check_u(u):
    u = np.atleast_1d(np.asarray(u, dtype=complex))
    if np.any(u.real < 0):
        raise DomainError("chi needs Re u >= 0")
    if np.any(u == 0):
        raise PoleError("chi has a pole at u = 0")
    return u


def residual_tail_bound(P):
    """Bound on |log| of the accelerated residual product beyond P."""
    return R4_COEFF / (3.0 * float(P) ** 3)


def residual_euler_product(u, policy=DEFAULT_POLICY, method="accelerated", cutoff=None):
    """Pi(u) = prod_p (1 - (p^u - 1)/(p (p^{1+u} + 1))) for Re u >= 0.

    method="accelerated" peels zeta(2+u) zeta(3+u) / (zeta(2) zeta(3+2u)) and
    truncates the O(p^-4) remainder at chi_prime_cutoff; method="plain"
    multiplies the factors directly up to ``cutoff`` (default prime_cutoff)
    and applies the first-order tail sum_{p>P} (p^{-2-u} - p^{-2}) estimated
    by its integral.
    """
    arr = np.asarray(u, dtype=complex)
    scalar = arr.ndim == 0
    u = np.atleast_1d(arr).ravel()
    if np.any(u.real < 0):
        raise DomainError("residual product needs Re u >= 0")
    if method == "accelerated":
        P = policy.chi_prime_cutoff if cutoff is None else cutoff
        p, lp = primes_upto(P)
        res = kernels.residual_product(u, p, lp, peel=True)
        out = res * _zeta_arr(2.0 + u) * _zeta_arr(3.0 + u) / (ZETA2 * _zeta_arr(3.0 + 2.0 * u))
    elif method == "plain":
        P = policy.prime_cutoff if cutoff is None else cutoff
        p, lp = primes_upto(P)
        out = kernels.residual_product(u, p, lp, peel=False)
        # first-order tail sum_{p>P} (p^{-2-u} - p^{-2}) ~ int_P^inf (x^{-2-u} - x^{-2}) dx / log x
        out = out * np.exp((P ** (-1.0 - u) / (1.0 + u) - 1.0 / P) / math.log(P))
    else:
        raise ValueError(f"unknown method {method!r}")
    out = out.reshape(arr.shape) if not scalar else out
    return complex(out[0]) if scalar else out


def chi(u, policy=DEFAULT_POLICY):
    """chi(u) for Re u >= 0, u != 0 (scalar or array)."""
    arr = np.asarray(u, dtype=complex)
    scalar = arr.ndim == 0
    flat = _check_u(arr).ravel()
    z1 = zeta_one_plus(flat)
    p, lp = primes_upto(policy.chi_prime_cutoff)
    res = kernels.residual_product(flat, p, lp, peel=True)
    # zeta(2)/zeta(2+2u) * zeta(2+u) zeta(3+u)/(zeta(2) zeta(3+2u)) * zeta(1+u)
    out = z1 * _zeta_arr(2.0 + flat) * _zeta_arr(3.0 + flat) * res
    out = out / (_zeta_arr(2.0 + 2.0 * flat) * _zeta_arr(3.0 + 2.0 * flat))
    return complex(out[0]) if scalar else out.reshape(arr.shape)


def chi_local_factor(u, N):
    """The p = N Euler factor 1 + 1/((N-1) N^u)."""
    u = np.asarray(u, dtype=complex)
    return 1.0 + np.exp(-u * math.log(N)) / (N - 1.0)


def chi_N(u, N, policy=DEFAULT_POLICY):
    """chi with the p = N factor removed."""
    out = np.asarray(chi(u, policy)) / chi_local_factor(u, N)
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class DirectProduct:
    value: complex
    cutoff: int
    tail_bound: float


def chi_direct(u, cutoff=None, exclude=None, policy=DEFAULT_POLICY):
    """prod_{p <= cutoff} (1 + 1/((p-1) p^u)), optionally skipping p = exclude.

    The tail bound |log tail| <= sum_{p > P} p^{-Re u}/(p-1) is estimated by
    the integer sum, valid for Re u > 0.
    """
    u = complex(u)
    if u.real < 0:
        raise DomainError("direct product needs Re u >= 0")
    P = policy.prime_cutoff if cutoff is None else int(cutoff)
    p, lp = primes_upto(P)
    if exclude is not None:
        keep = p != exclude
        p, lp = p[keep], lp[keep]
    val = kernels.chi_direct_product(u, p, lp)
    a = u.real
    # sum_{n>P} n^{-a}/(n-1) <= 2 * P^{-a} / a  (P >= 2)
    tail = 2.0 * P ** (-a) / a if a > 0 else math.inf
    return DirectProduct(val, P, tail)


# ---------------------------------------------------------------- M(X)

def gamma_ratio(X, k):
    """G(X) = Gamma(k/2 - 2 pi i X) / Gamma(k/2 + 2 pi i X)."""
    X = np.asarray(X, dtype=float)
    z = k / 2.0 + 2j * math.pi * X
    out = np.exp(log_gamma(np.conj(z)) - log_gamma(z))
    return complex(out) if np.ndim(out) == 0 else out


def M_function(X, k, policy=DEFAULT_POLICY):
    """M(X) = zeta(2)/zeta(2+8 pi i X) * G(X) * Pi(4 pi i X), |X| < 1/8."""
    arr = np.asarray(X, dtype=float)
    scalar = arr.ndim == 0
    X = np.atleast_1d(arr).ravel()
    if np.any(np.abs(X) >= 0.125):
        raise DomainError("M_function requires |X| < 1/8")
    u = 4j * math.pi * X
    out = ZETA2 / _zeta_arr(2.0 + 2.0 * u) * np.atleast_1d(gamma_ratio(X, k))
    out = out * np.atleast_1d(residual_euler_product(u, policy))
    return complex(out[0]) if scalar else out.reshape(arr.shape)


# ---------------------------------------------------------------- constants

@dataclass(frozen=True)
class PrimeConstant:
    value: float
    partial_sum: float
    cutoff: int
    tail_estimate: float
    tail_bound: float


_PRIME_CONST_CACHE = {}


def prime_constant_details(policy=DEFAULT_POLICY):
    """sum_p log p / (p (p+1)) with a Chebyshev-theta tail estimate.

    Beyond P the sum is int_P^inf d theta(x) / x^2 (to O(P^-2)), which by
    parts equals 2/P - theta(P)/P^2 + 2 int_P^inf (theta(x) - x)/x^3 dx; the
    last integral is dropped. The recorded bound is the crude
    sum_{n>P} ln n / n^2 < (ln P + 1)/P.
    """
    P = policy.prime_cutoff
    if P in _PRIME_CONST_CACHE:
        return _PRIME_CONST_CACHE[P]
    p, lp = primes_upto(P)
    pf = p.astype(float)
    partial = math.fsum(lp / (pf * (pf + 1.0)))
    theta = math.fsum(lp)
    est = 2.0 / P - theta / float(P) ** 2
    bound = (math.log(P) + 1.0) / P
    out = PrimeConstant(partial + est, partial, P, est, bound)
    _PRIME_CONST_CACHE[P] = out
    return out


def prime_constant(policy=DEFAULT_POLICY):
    return prime_constant_details(policy).value


def m1_closed_form(k, policy=DEFAULT_POLICY):
    """Linear Taylor coefficient of M: -4 pi i [C + 2 zeta'/zeta(2) + psi(k/2)]."""
    C = prime_constant(policy)
    inner = C + 2.0 * zeta_prime_over_zeta_at_2() + digamma(k / 2.0).real
    return complex(0.0, -4.0 * math.pi * inner)


def m1_finite_difference(k, h=1e-4, policy=DEFAULT_POLICY):
    """Central difference of M at 0 with one Richardson step (h, h/2)."""
    vals = M_function(np.array([h, -h, h / 2, -h / 2]), k, policy)
    d1 = (vals[0] - vals[1]) / (2 * h)
    d2 = (vals[2] - vals[3]) / h
    return complex((4.0 * d2 - d1) / 3.0)


def m_constant(k, policy=DEFAULT_POLICY):
    """m = 2 gamma - 2 sum_p log p/(p(p+1)) - 4 zeta'/zeta(2) - 2 psi(k/2)."""
    return (2.0 * EULER_GAMMA - 2.0 * prime_constant(policy)
            - 4.0 * zeta_prime_over_zeta_at_2() - 2.0 * digamma(k / 2.0).real)


def prime_sum_T2(tf, R, policy=DEFAULT_POLICY, exclude=None):
    """(1/log R) sum_p (2 log p / p) phi_hat(2 log p / log R).

    The hat support truncates the sum at p <= R^{sigma/2} exactly.
    """
    from .testfn import phi_hat

    if R <= 1:
        raise DomainError("R must exceed 1")
    L = math.log(R)
    p, lp = primes_upto(math.exp(tf.sigma * L / 2.0))
    if exclude is not None:
        keep = p != exclude
        p, lp = p[keep], lp[keep]
    if len(p) == 0:
        return 0.0
    terms = 2.0 * lp / p * phi_hat(tf, 2.0 * lp / L) / L
    return math.fsum(np.atleast_1d(terms))
