import math
import random

import pytest

from ratiodensity import kernels
from ratiodensity.arith import divisor_count, factorize
from ratiodensity.config import FamilyParams, TruncationPolicy
from ratiodensity.errors import ConfigError, DomainError
from ratiodensity.petersson import (
    bound_3_2,
    bound_A2,
    bound_A3,
    delta_kN,
    delta_kN_details,
    kloosterman,
    kloosterman_direct,
    kloosterman_split,
    weil_bound,
)


def _naive(m, n, c):
    # plain Python enumeration with pow(d, -1, c): an independent oracle
    tot = 0.0
    for d in range(1, c + 1):
        if math.gcd(d, c) == 1:
            tot += math.cos(2 * math.pi * ((m * d + n * pow(d, -1, c)) % c) / c)
    return tot


def _coprime_split(c):
    f = factorize(c)
    if len(f) < 2:
        return None
    c1 = f[0][0] ** f[0][1]
    return c1, c // c1


def test_trivial_values():
    assert kloosterman(1, 1, 1) == 1.0
    assert kloosterman_direct(5, 7, 1) == 1.0
    assert kloosterman_direct(1, 1, 3) == pytest.approx(-1.0, abs=1e-12)
    assert kloosterman_direct(1, 2, 6) == pytest.approx(-2.0, abs=1e-12)
    assert kloosterman_split(1, 2, 2, 3) == pytest.approx(-2.0, abs=1e-12)


def test_ramanujan_sums():
    # S(0, n; p) = -1 for p not dividing n, S(0, 0; p) = p - 1
    for p in (5, 7, 101, 1009):
        assert kloosterman(0, 3, p) == -1.0
        assert kloosterman(0, 0, p) == p - 1
        assert kloosterman_direct(0, 3, p) == pytest.approx(-1.0, abs=1e-9)


def test_against_naive_enumeration():
    for c in (2, 9, 30, 97, 128, 210):
        for m, n in ((1, 1), (2, 5), (7, 3)):
            assert abs(kloosterman_direct(m, n, c) - _naive(m, n, c)) < 1e-9


def test_exhaustive_identities():
    """Weil bound, symmetry, periodicity, reality and twisted multiplicativity,
    for every c <= 500 and 1 <= m, n <= 10."""
    for c in range(1, 501):
        tab = kernels.kloosterman_table(c, 20, 10)
        split = _coprime_split(c)
        for m in range(1, 11):
            for n in range(1, 11):
                s = kloosterman_direct(m, n, c)  # raises if not real
                assert abs(s) <= weil_bound(m, n, c) + 1e-9
                assert abs(s - tab[n, m]) < 1e-9  # symmetry S(m,n) = S(n,m)
                assert abs(s - tab[m + c if m + c <= 20 else m, n]) < 1e-9
                assert abs(kloosterman_direct(m + c, n, c) - s) < 1e-9  # periodicity
                assert abs(kloosterman(m, n, c) - s) < 1e-8
                if split:
                    assert abs(kloosterman_split(m, n, *split) - s) < 1e-8


def test_random_multiplicativity():
    rng = random.Random(20261016)
    done = 0
    while done < 200:
        c1, c2 = rng.randint(2, 1000), rng.randint(2, 1000)
        if math.gcd(c1, c2) != 1:
            continue
        m, n = rng.randint(-50, 10**6), rng.randint(-50, 10**6)
        direct = kloosterman_direct(m, n, c1 * c2)
        assert abs(kloosterman_split(m, n, c1, c2) - direct) < 1e-6
        assert abs(kloosterman(m, n, c1 * c2) - direct) < 1e-6
        done += 1


def test_prime_table_route():
    N = 1009
    for m, n, j in ((1, 1, 3), (2, 7, 10), (5, 5, 1)):
        c = N * j
        assert abs(kloosterman(m, n, c, table_prime=N) - kloosterman_direct(m, n, c)) < 1e-8


def test_domain_errors():
    with pytest.raises(DomainError):
        kloosterman(1, 1, 0)
    with pytest.raises(DomainError):
        kloosterman_split(1, 1, 4, 6)


def test_backends_agree():
    if "compiled" not in kernels.BACKENDS:
        pytest.skip("compiled kernels not built")
    for c in (7, 60, 997):
        a = kernels.BACKENDS["compiled"].kloosterman_enum(3, 8, c)
        b = kernels.BACKENDS["python"].kloosterman_enum(3, 8, c)
        assert abs(a[0] - b[0]) < 1e-9


# ------------------------------------------------------------ Petersson

def test_delta_diagonal_weight_12():
    p = FamilyParams(12, 101)
    r = delta_kN_details(1, 1, p)
    assert abs(r.value - 1.0) < 1e-10
    v, tail = delta_kN(2, 3, p)
    assert abs(v) < 1e-8
    assert tail < 1e-10


def test_delta_symmetric():
    p = FamilyParams(4, 101)
    a, _ = delta_kN(3, 7, p)
    b, _ = delta_kN(7, 3, p)
    assert abs(a - b) < 1e-14


def test_delta_weight_2_level_11_eigenvalues():
    # S_2(Gamma_0(11)) is spanned by the newform of the elliptic curve 11a,
    # with a(2) = -2 and a(3) = -1, so Delta(n, 1)/Delta(1, 1) = a(n)/sqrt(n)
    p = FamilyParams(2, 11)
    d11, _ = delta_kN(1, 1, p)
    d21, _ = delta_kN(2, 1, p)
    d31, _ = delta_kN(3, 1, p)
    assert abs(d21 / d11 + math.sqrt(2)) < 1e-3
    assert abs(d31 / d11 + 1 / math.sqrt(3)) < 1e-3


def test_delta_needs_long_enough_c_sum():
    with pytest.raises(ConfigError):
        delta_kN(10**6, 10**6, FamilyParams(4, 11), TruncationPolicy(c_sum_cutoff_factor=10))


def test_weight_2_diagonal_within_scaled_bound():
    p = FamilyParams(2, 11)
    v, _ = delta_kN(1, 1, p)
    assert abs(v - 1.0) <= 100 * bound_A3(1, 1, p, enforce=False)
    with pytest.raises(DomainError):
        bound_A3(1, 1, p)


def test_bound_A3_decays_in_weight():
    vals = [bound_A3(1, 1, FamilyParams(k, 101)) for k in (4, 6, 8, 10, 12)]
    for a, b in zip(vals, vals[1:]):
        assert a / b == pytest.approx(4.0, rel=1e-12)


@pytest.mark.parametrize("k,N", [(4, 101), (12, 101), (4, 1009)])
def test_diagonal_within_A3(k, N):
    p = FamilyParams(k, N)
    v, tail = delta_kN(1, 1, p)
    assert abs(v - 1.0) <= 100 * bound_A3(1, 1, p) + tail


def test_prime_level_divisor_count():
    assert divisor_count(101) == 2
    assert divisor_count(1009) == 2


def test_off_diagonal_within_A2():
    p = FamilyParams(4, 101)
    for m, n in ((1, 2), (2, 3), (5, 7), (4, 9)):
        v, tail = delta_kN(m, n, p)
        assert abs(v) <= 100 * bound_A2(m, n, p) + tail


def test_bound_shapes_positive():
    p = FamilyParams(4, 1009)
    for m, n in ((1, 1), (2, 1009), (1009, 1)):
        assert bound_A2(m, n, p) > 0
        assert bound_3_2(m, n, p) > 0
    assert bound_3_2(1, 1, p, eps=0.1) > bound_3_2(1, 1, p, eps=0.05)
