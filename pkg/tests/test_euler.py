import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ratiodensity.config import TruncationPolicy
from ratiodensity.errors import DomainError, PoleError
from ratiodensity.euler import (
    EULER_GAMMA,
    M_function,
    chi,
    chi_N,
    chi_direct,
    chi_local_factor,
    gamma_ratio,
    m1_closed_form,
    m1_finite_difference,
    m_constant,
    prime_constant,
    prime_constant_details,
    prime_sum_T2,
    primes_upto,
    residual_euler_product,
)
from ratiodensity.special import zeta, zeta_prime_over_zeta_at_2
from ratiodensity.testfn import make_sinc_power, phi_hat


def test_chi_at_one_closed_form():
    ref = (zeta(2.0) * zeta(3.0) / zeta(6.0)).real
    assert abs(chi(1.0) - ref) < 1e-13 * ref
    assert abs(ref - 1.9435964368) < 1e-9
    # independent oracle: the same closed form at high precision
    mp = float(mpmath.zeta(2) * mpmath.zeta(3) / mpmath.zeta(6))
    assert abs(chi(1.0).real - mp) < 1e-13


def test_chi_at_one_direct_product():
    d = chi_direct(1.0, cutoff=10**7)
    assert abs(d.value - chi(1.0)) < 1e-6 * abs(chi(1.0))


def test_chi_at_two_direct_product():
    d = chi_direct(2.0, cutoff=10**7)
    assert abs(d.value - chi(2.0)) < 1e-9


def test_chi_half_two_routes():
    c_lo = chi(0.5, TruncationPolicy(chi_prime_cutoff=3000))
    c_hi = chi(0.5, TruncationPolicy(chi_prime_cutoff=30000))
    assert abs(c_lo - c_hi) < 1e-9 * abs(c_hi)
    d = chi_direct(0.5, cutoff=10**7)
    assert abs(d.value - c_hi) < 1e-3 * abs(c_hi)


@pytest.mark.parametrize("u", [1.0, 2.0, 1.5 + 1j])
def test_factorisation_against_direct(u):
    d = chi_direct(u, cutoff=10**7)
    assert abs(d.value - chi(u)) / abs(chi(u)) < 1e-6


def test_chi_conjugate_symmetry_and_pole():
    for u in (0.01 + 3j, 0.3 + 0.7j, 2 + 10j):
        assert abs(chi(np.conj(u)) - np.conj(chi(u))) < 1e-13 * abs(chi(u))
    u = 1e-3j
    # simple pole with residue 1
    assert abs(u * chi(u) - 1.0) < 1e-2
    with pytest.raises(PoleError):
        chi(0.0)
    with pytest.raises(DomainError):
        chi(-0.1 + 1j)


def test_chi_array_matches_scalar():
    u = np.array([0.2 + 1j, 1.0, 3 - 2j])
    arr = chi(u)
    assert np.allclose(arr, [chi(v) for v in u], rtol=1e-15, atol=0)


def test_residual_product_two_methods():
    for u in (0.5, 1j, 2 + 3j):
        acc = residual_euler_product(u)
        plain = residual_euler_product(u, method="plain", cutoff=10**6)
        assert abs(acc - plain) < 1e-6


def test_chi_N_local_factor():
    for u in (1.0, 0.5 + 2j, 3j):
        for N in (2, 5, 1009):
            assert abs(chi_N(u, N) * chi_local_factor(u, N) - chi(u)) < 1e-12 * abs(chi(u))
    assert abs(chi_N(1.0, 2) - chi(1.0) / 1.5) < 1e-15
    d = chi_direct(1.0, cutoff=10**7, exclude=5)
    assert abs(chi_N(1.0, 5) - d.value) < 1e-6


@given(st.floats(0.0, 5.0), st.floats(-30, 30), st.sampled_from([101, 1009, 100003]))
@settings(max_examples=50, deadline=None)
def test_chi_N_close_to_chi(a, b, N):
    u = complex(a, b)
    if abs(u) < 1e-3:
        return
    assert abs(chi_N(u, N) / chi(u) - 1.0) <= 2.0 / N


# ----------------------------------------------------------- M and m1

def test_M_at_zero():
    for k in (2, 4, 12):
        assert abs(M_function(0.0, k) - 1.0) < 1e-13


def test_gamma_ratio_unimodular():
    X = np.linspace(-0.1, 0.1, 201)
    for k in (2, 4, 12, 20):
        assert np.max(np.abs(np.abs(gamma_ratio(X, k)) - 1.0)) < 1e-12


def test_M_conjugate_symmetry():
    X = np.linspace(0.001, 0.12, 30)
    a = M_function(X, 4)
    b = M_function(-X, 4)
    assert np.allclose(b, np.conj(a), rtol=1e-13, atol=1e-15)


def test_M_domain():
    with pytest.raises(DomainError):
        M_function(0.125, 4)


def test_m1_purely_imaginary():
    for k in range(2, 22, 2):
        assert m1_closed_form(k).real == 0.0


def test_m1_k2_uses_minus_gamma():
    C = prime_constant()
    expected = -4 * math.pi * (C + 2 * zeta_prime_over_zeta_at_2() - EULER_GAMMA)
    assert abs(m1_closed_form(2).imag - expected) < 1e-12


@pytest.mark.parametrize("k", [2, 4, 12])
def test_m1_finite_difference(k):
    cf = m1_closed_form(k)
    fd = m1_finite_difference(k)
    assert abs(fd - cf) / abs(cf) < 1e-6


def test_prime_constant_value_and_tail():
    det = prime_constant_details()
    # independent direct sum at a smaller cutoff plus the crude tail bound
    p, lp = primes_upto(10**6)
    pf = p.astype(float)
    small = math.fsum(lp / (pf * (pf + 1.0)))
    assert 0 < det.partial_sum - small < 2 * math.log(10**6) * 1e-6
    assert abs(det.value - 0.38455537540) < 1e-9
    assert det.tail_bound == pytest.approx((math.log(10**7) + 1) / 10**7)


def test_prime_constant_partial_sums_increase():
    p, lp = primes_upto(10**4)
    terms = lp / (p * (p + 1.0))
    assert np.all(np.diff(np.cumsum(terms)) > 0)


def test_m_constant_matches_m1():
    for k in (2, 4, 12):
        assert abs(m_constant(k) - (2 * EULER_GAMMA + (m1_closed_form(k) / (2j * math.pi)).real)) < 1e-12


def test_m_constant_recurrence():
    for k in range(2, 20, 2):
        assert abs(m_constant(k + 2) - m_constant(k) + 4.0 / k) < 1e-12
    assert math.isfinite(m_constant(2))


# ------------------------------------------------------------ T2 sum

def test_prime_sum_empty_support():
    tf = make_sinc_power(4, 1.0)
    assert prime_sum_T2(tf, 3.9) == 0.0  # R^{1/2} < 2


def test_prime_sum_single_prime():
    tf = make_sinc_power(4, 1.0)
    R = 6.0  # R^{1/2} in (2, 3)
    L = math.log(R)
    expected = 2 * math.log(2) / 2 * phi_hat(tf, 2 * math.log(2) / L) / L
    assert prime_sum_T2(tf, R) == pytest.approx(expected, rel=1e-15)


def test_prime_sum_against_loop():
    tf = make_sinc_power(4, 0.8)
    R = 16 * 1009.0
    L = math.log(R)
    ref = math.fsum(2 * math.log(p) / p * phi_hat(tf, 2 * math.log(p) / L) / L
                    for p in range(2, 100) if all(p % q for q in range(2, p)))
    assert abs(prime_sum_T2(tf, R) - ref) < 1e-14


def test_prime_sum_support_monotone():
    R = 16 * 1009.0
    counts = []
    for sigma in (0.5, 1.0, 2.0):
        tf = make_sinc_power(4, sigma)
        p, _ = primes_upto(R ** (sigma / 2))
        counts.append(len(p))
        assert prime_sum_T2(tf, R) > 0
    assert counts == sorted(counts)


def test_prime_sum_exclude():
    tf = make_sinc_power(4, 2.0)
    R = 101.0 * 16
    L = math.log(R)
    gap = prime_sum_T2(tf, R) - prime_sum_T2(tf, R, exclude=101)
    assert gap == pytest.approx(2 * math.log(101) / 101 * phi_hat(tf, 2 * math.log(101) / L) / L,
                                rel=1e-12)
