import math

import numpy as np
import pytest
from scipy import integrate, special as sps

from ratiodensity import euler
from ratiodensity.config import FamilyParams, TruncationPolicy
from ratiodensity.errors import ConfigError, DomainError
from ratiodensity.ntside import (
    V1_bsum,
    V1_bsum_details,
    V1_chi_integral,
    V1_kloosterman,
    V2_bound_shapes,
    V2_terms,
    V3_bound_shape,
    V3_details,
    V3_term,
    _b_term,
    bessel_mellin,
    bessel_mellin_rhs,
    compare_sides,
    level_twist_product,
    nt_density,
    squarefree_weight,
    squarefree_weight_table,
)
from ratiodensity.ratios import T1_direct, xl_integral_identity
from ratiodensity.testfn import make_sinc_power, phi_hat

TF = make_sinc_power(4, 0.8)
P1009 = FamilyParams(4, 1009)
P101 = FamilyParams(4, 101)


# ----------------------------------------------------------- Bessel-Mellin

@pytest.mark.parametrize("k", [2, 4, 12])
def test_bessel_mellin_at_zero(k):
    assert bessel_mellin_rhs(0.0, k) == pytest.approx(1.0, abs=1e-15)
    assert abs(bessel_mellin(0.0, k) - 1.0) < 1e-6


@pytest.mark.parametrize("k", [2, 4, 12])
def test_bessel_mellin_real_and_imaginary(k):
    assert abs(bessel_mellin(0.3, k) - bessel_mellin_rhs(0.3, k)) < 1e-6
    assert abs(bessel_mellin(0.25j, k) - bessel_mellin_rhs(0.25j, k)) < 1e-4


@pytest.mark.parametrize("k", [2, 4, 12])
def test_bessel_mellin_grid(k):
    grid = [-0.9, -0.5, -0.2, 0.1, 0.2, 0.4, 0.1j, 0.5j, -0.3 + 1j, 0.2 - 2j]
    for s in grid:
        lhs, rhs = bessel_mellin(s, k), bessel_mellin_rhs(s, k)
        tol = 1e-6 if complex(s).imag == 0 else 1e-4
        assert abs(lhs - rhs) < tol, s


def test_bessel_mellin_damped_against_scipy():
    k, s, eps = 4, 0.3, 0.5
    f = lambda y: sps.jv(k - 1, y) * y ** s * math.exp(-eps * y)
    ref = sum(integrate.quad(f, a, a + 1.0, epsabs=1e-14)[0] for a in range(0, 120))
    assert abs(bessel_mellin(s, k, epsilon=eps) - ref) < 1e-10


def test_bessel_mellin_domain():
    with pytest.raises(DomainError):
        bessel_mellin(0.6, 4)
    with pytest.raises(DomainError):
        bessel_mellin(-3.5, 4)
    with pytest.raises(DomainError):
        bessel_mellin(0.1, 4, epsilon=-1.0)
    with pytest.raises(ConfigError):
        bessel_mellin(0.1, 3)


# ------------------------------------------------------------------ V1

def test_squarefree_weight_table_matches_factorisation():
    tab = squarefree_weight_table(10**4)
    ref = np.array([0.0] + [squarefree_weight(b) for b in range(1, 10**4 + 1)])
    assert np.array_equal(tab, ref)
    assert tab[4] == tab[8] == tab[9] == 0.0
    assert tab[6] == 0.5


def test_b_integrals_decay_like_b_power():
    a2 = _b_term(2, TF, P1009)
    a4 = _b_term(4, TF, P1009)
    assert 2 ** 4 / 4 <= a2 / a4 <= 2 ** 4 * 4


def test_bsum_non_squarefree_terms_vanish():
    det = V1_bsum_details(TF, P1009)
    for b in (4, 8, 9, 12, 18, 25):
        assert det.terms[b - 1] == 0.0


def test_bsum_resolution_and_cutoff_invariance():
    a = V1_bsum_details(TF, P1009)
    b = V1_bsum_details(TF, P1009, resolution=2)
    assert abs(a.value - b.value) < 1e-8
    c = V1_bsum_details(TF, P1009, TruncationPolicy(b_sum_cutoff=4000))
    assert a.tail_bound < 1e-8
    assert abs(a.value - c.value) < 1e-8


def test_bsum_cutoff_error():
    with pytest.raises(ConfigError):
        V1_bsum_details(TF, P1009, TruncationPolicy(b_sum_cutoff=3), tol=1e-12)


def test_bsum_shrinks_with_support():
    vals = [abs(V1_bsum(make_sinc_power(4, s), P1009)) for s in (1.6, 0.8, 0.4, 0.2)]
    for big, small in zip(vals, vals[1:]):
        assert small <= big + 1e-9


def test_v1_chi_integral_is_twice_t1():
    assert V1_chi_integral(TF, P1009) == 2.0 * T1_direct(TF, P1009)


def test_v1_local_factor_effect():
    a = V1_chi_integral(TF, P1009)
    b = V1_chi_integral(TF, P1009, use_chi_N=True)
    assert abs(a - b) < 10 / 1009


def test_mellin_bridge():
    assert abs(V1_bsum(TF, P1009) - V1_chi_integral(TF, P1009)) < 1e-3


def test_kloosterman_route_lands_on_half_bsum():
    # direct Petersson evaluation of the a = 1 half; its gap to calT is within
    # the error shape N^{sigma/2 - 1 + 0.1}
    P0, P1 = V1_kloosterman(TF, P1009)
    calT = T1_direct(TF, P1009)
    assert abs(P1 - calT) <= P1009.N ** (TF.sigma / 2 - 1 + 0.1)
    assert abs(P0) <= 100 * P1009.N ** (TF.sigma / 2 - 1 + 0.1)


# ------------------------------------------------------------------ V2

@pytest.mark.parametrize("N", [101, 1009])
def test_v2_prime_sum_term(N):
    p = FamilyParams(4, N)
    L = p.log_R
    v2 = V2_terms(TF, p)
    full = euler.prime_sum_T2(TF, p.R)
    pN = 2 * math.log(N) / (N * L) * phi_hat(TF, 2 * math.log(N) / L)
    assert abs(v2["S02"] + (full - pN) / 2) < 1e-14


def test_v2_p_equals_N_excluded_term():
    tf = TF
    p = FamilyParams(4, 101, R=101.0 ** 3)
    assert p.N <= p.R ** (tf.sigma / 2)
    L = p.log_R
    gap = euler.prime_sum_T2(tf, p.R) / 2 + V2_terms(tf, p)["S02"]
    assert gap == pytest.approx(phi_hat(tf, 2 * math.log(101) / L) * math.log(101) / (101 * L),
                                rel=1e-10)


@pytest.mark.parametrize("N", [101, 1009])
def test_v2_off_diagonal_within_shapes(N):
    p = FamilyParams(4, N)
    v2 = V2_terms(TF, p)
    shapes = V2_bound_shapes(TF, p)
    for name in ("S00", "S10", "S12"):
        assert abs(v2[name]) <= 100 * shapes[name]


def test_v2_sign_parity():
    pos = V2_terms(TF, P101)
    neg = V2_terms(TF, P101.with_sign(-1))
    assert pos["S00"] == neg["S00"] and pos["S02"] == neg["S02"]
    assert pos["S10"] == -neg["S10"] and pos["S12"] == -neg["S12"]


# ------------------------------------------------------------------ V3

def test_v3_vanishes_without_cubes_in_support():
    tf = make_sinc_power(4, 0.25)
    assert P101.R ** (tf.sigma / 3) < 2
    assert V3_term(tf, P101) == 0.0


@pytest.mark.parametrize("N", [101, 1009])
def test_v3_within_shape(N):
    p = FamilyParams(4, N)
    assert abs(V3_term(TF, p)) <= 100 * V3_bound_shape(TF, p)


def test_v3_nu_terms_decrease():
    for p in (P101, P1009):
        by_nu = V3_details(TF, p).by_nu
        assert abs(by_nu[5]) < abs(by_nu[3])


def test_v3_truncation_bound_covers_dropped_terms():
    tf = make_sinc_power(4, 1.6)
    full = V3_details(tf, P101, nu_max=12)
    cut = V3_details(tf, P101, nu_max=4)
    assert abs(full.value - cut.value) <= cut.truncation_bound
    with pytest.raises(ConfigError):
        V3_details(tf, P101, nu_max=2)


# ------------------------------------------------------------- assembly

def test_nt_density_bookkeeping_and_sign_flip():
    pos = nt_density(TF, P101)
    neg = nt_density(TF, P101.with_sign(-1))
    assert abs(pos.total - sum(t.value for t in pos.terms.values())) < 1e-12
    v2, v3 = pos.extra["V2"], pos.extra["V3"]
    neg_v3 = neg.extra["V3"]
    even = v2["S02"] + v2["S00"] + 0.5 * (v3 + neg_v3)
    xl = pos.terms["logN_term"].value + pos.terms["gamma_integral"].value
    assert abs(pos.total + neg.total - 2 * (xl - 2 * even)) < 1e-12


def test_nt_density_xl_term_matches_identity_rhs():
    rep = nt_density(TF, P101)
    _, rhs = xl_integral_identity(TF, P101)
    assert abs(rep.terms["logN_term"].value + rep.terms["gamma_integral"].value - rhs) < 1e-14


def test_level_twist_product():
    for N in (101, 1009):
        p = FamilyParams(4, N)
        assert abs(level_twist_product(0.1, 0.1, p)) <= 1.0 / N
        assert level_twist_product(0.1, 0.1, p) == pytest.approx(N ** -1.1, rel=1e-13)
        assert abs(level_twist_product(0.3 + 1j, 0.2, p)) <= 1.0 / N
    assert level_twist_product(0.1, 0.1, FamilyParams(2, 101)).real < 0
    a = abs(level_twist_product(0.3, 0.01, FamilyParams(4, 101)))
    b = abs(level_twist_product(0.3, 0.01, FamilyParams(4, 211)))
    assert 2 / 1.3 <= a / b <= 2 * 1.3
    with pytest.raises(DomainError):
        level_twist_product(0.1, 0.0, P101)


def test_compare_sides_all_pass():
    rep = compare_sides(TF, P1009)
    assert rep.passed
    d = rep.to_dict()
    assert d["verdict"] == "pass"
    prime = d["alignments"]["prime_sum"]
    assert prime["abs_diff"] < 1e-12
    assert abs(prime["expected_difference"]) < math.log(1009) / (1009 * P1009.log_R)
    assert d["alignments"]["T1_vs_V1"]["abs_diff"] < 1e-3
    assert len(rep.rows()) == 7
