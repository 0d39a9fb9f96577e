"""Number-theory side: explicit formula pieces reached through Petersson.

The density of the sign-split family is

    D = (X_L integral) - 2 [sign * V1 + V2 + V3]

where V1, V2, V3 collect the nu = 1, 2, >= 3 prime-power terms.  The a = 1
halves (twisted by i^k mu(N) N^{1/2} lambda_f(N)) carry the sign, so they
cancel between the two families.

V1 is reached through the Bessel b-sum

    B = (2/L) sum_{(b,N)=1} mu^2(b)/phi(b) int_0^inf J_{k-1}(y)
            phi_hat(2 log(b y sqrt(N) / 4 pi) / L) dy,

which the Mellin identity for J_{k-1} turns into 2 calT (calT as in
``ratios``).  A direct Kloosterman evaluation of the a = 1 prime sum lands
on calT, i.e. on B/2, and that is the value the density uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import euler, ratios
from .arith import euler_phi, factorize
from .config import FamilyParams, TruncationPolicy
from .errors import ConfigError, DomainError
from .petersson import bound_3_2, delta_kN
from .quadrature import neville_at_zero, panel_nodes, split_edges
from .ratios import DensityReport, Term
from .special import bessel_j, log_gamma
from .testfn import phi_hat

DEFAULT_POLICY = TruncationPolicy()
# instantiation of the N^epsilon factors in the error shapes
EPS_SHAPE = 0.1
BESSEL_PANEL = 0.5 * math.pi


# ---------------------------------------------------------- Bessel-Mellin

def bessel_mellin_rhs(s, k):
    """2^s Gamma((k+s)/2) / Gamma((k-s)/2)."""
    s = complex(s)
    return complex(np.exp(s * math.log(2.0) + log_gamma((k + s) / 2.0) - log_gamma((k - s) / 2.0)))


def _mellin_edges(s, eps):
    # geometric panels towards 0 when y^{s+k-1} is not smooth there
    Y = 40.0 / eps
    lo = [0.0] + [2.0 ** -j for j in range(40, 0, -1)]
    return split_edges(lo + [1.0, Y], BESSEL_PANEL)


def _bessel_mellin_eps(s, k, eps):
    edges = _mellin_edges(s, eps)
    y, w = panel_nodes(edges, 16)
    f = bessel_j(k - 1, y) * np.exp(s * np.log(y) - eps * y)
    return complex(np.sum(w * f))


def bessel_mellin(s, k, epsilon=None, policy=DEFAULT_POLICY):
    """int_0^inf J_{k-1}(y) y^s dy by quadrature.

    With epsilon > 0 the integrand is damped by e^{-epsilon y} and that
    regularised value is returned; with epsilon None or 0 the damped values
    on mellin_epsilon_schedule are extrapolated to epsilon = 0.
    """
    s = complex(s)
    if isinstance(k, bool) or int(k) != k or k < 2 or k % 2:
        raise ConfigError("k must be an even integer >= 2")
    if not (-(k - 1) < s.real < 0.5):
        raise DomainError("bessel_mellin needs -(k-1) < Re s < 1/2")
    if epsilon is not None and epsilon < 0:
        raise DomainError("epsilon must be >= 0")
    if epsilon:
        return _bessel_mellin_eps(s, k, float(epsilon))
    sched = policy.mellin_epsilon_schedule
    vals = [_bessel_mellin_eps(s, k, e) for e in sched]
    est, _ = neville_at_zero(sched, vals)
    return complex(est)


# ------------------------------------------------------------------ V1

def squarefree_weight(b):
    """mu^2(b) / phi(b) by factorisation."""
    f = factorize(b)
    if any(e > 1 for _, e in f):
        return 0.0
    return 1.0 / euler_phi(b)


def squarefree_weight_table(B):
    """mu^2(b)/phi(b) for b = 0..B from sieves (entry 0 unused)."""
    phi = np.arange(B + 1, dtype=np.int64)
    sqfree = np.ones(B + 1, dtype=bool)
    for p in range(2, B + 1):
        if phi[p] == p:  # p prime
            phi[p::p] -= phi[p::p] // p
            sqfree[p * p::p * p] = False
    out = np.zeros(B + 1)
    out[1:] = np.where(sqfree[1:], 1.0 / phi[1:], 0.0)
    return out


def _b_term(b, tf, params, resolution=1):
    """(1/L) int_0^inf J_{k-1}(y) phi_hat(2 log(b y sqrt N / 4 pi)/L) dy."""
    L = params.log_R
    scale = 4.0 * math.pi / (b * math.sqrt(params.N))
    # hat argument 2 log(y/scale)/L = xi  <=>  y = scale * exp(L xi / 2)
    knots = scale * np.exp(0.5 * L * tf.knots)
    lo, hi = knots[0], knots[-1]
    ratio = 1.5 ** (1.0 / resolution)
    geo = [lo]
    while geo[-1] * ratio < hi:
        geo.append(geo[-1] * ratio)
    edges = split_edges(np.concatenate([knots, geo, [hi]]), BESSEL_PANEL / resolution)
    y, w = panel_nodes(edges, 16)
    f = bessel_j(params.k - 1, y) * phi_hat(tf, 2.0 * np.log(y / scale) / L)
    return float(np.sum(w * f)) / L


def _b_tail_bound(tf, params, B):
    """Bound on the b > B remainder.

    |J_{k-1}(y)| <= (y/2)^{k-1}/(k-1)!, |phi_hat| <= 1, the y-range ends at
    Y/b, and phi(b) >= sqrt(b/2); so term_b <= (2/L)(Y/2)^k/k! sqrt(2) b^{-k-1/2}.
    """
    k, L = params.k, params.log_R
    Y = 4.0 * math.pi / math.sqrt(params.N) * math.exp(0.5 * L * tf.sigma)
    c = 2.0 / L * (0.5 * Y) ** k / math.factorial(k) * math.sqrt(2.0)
    return c * B ** (0.5 - k) / (k - 0.5)


@dataclass(frozen=True)
class BSumResult:
    value: float
    tail_bound: float
    cutoff: int
    terms: tuple = field(default=(), repr=False)


def V1_bsum_details(tf, params, policy=DEFAULT_POLICY, resolution=1, tol=None):
    B = policy.b_sum_cutoff
    wts = squarefree_weight_table(B)
    terms = []
    for b in range(1, B + 1):
        if wts[b] == 0.0 or b % params.N == 0:
            terms.append(0.0)
            continue
        terms.append(wts[b] * _b_term(b, tf, params, resolution))
    tail = _b_tail_bound(tf, params, B)
    if tol is not None and tail > tol:
        raise ConfigError(
            f"b_sum_cutoff={B} leaves a tail bound {tail:.3e} above {tol:.1e}; raise b_sum_cutoff"
        )
    return BSumResult(2.0 * math.fsum(terms), 2.0 * tail, B, tuple(terms))


def V1_bsum(tf, params, policy=DEFAULT_POLICY):
    """2 sum_{(b,N)=1} mu^2(b)/phi(b) int J_{k-1}(y) phi_hat(...) dy / L."""
    return V1_bsum_details(tf, params, policy).value


def V1_chi_integral(tf, params, policy=DEFAULT_POLICY, use_chi_N=False):
    """2 calT (or 2 calT_N with the p = N Euler factor removed)."""
    return 2.0 * ratios.T1_details(tf, params, policy, "plemelj", local_N=use_chi_N).value


def V1_kloosterman(tf, params, policy=DEFAULT_POLICY):
    """(P0, P1): the two halves of V1 straight from Petersson.

    P_a = (i^k mu(N) N^{1/2})^a sum_{p != N} Delta(p N^a, 1)
          phi_hat(log p / L) log p / (sqrt p L).
    Slow (one Delta per prime below R^sigma); used as a cross-check.
    """
    L, N = params.log_R, params.N
    p_arr, lp_arr = euler.primes_upto(math.exp(tf.sigma * L))
    twist = _twist(params) * math.sqrt(N)
    P0, P1 = [], []
    for p, lp in zip(p_arr.tolist(), lp_arr.tolist()):
        if p == N:
            continue
        w = phi_hat(tf, lp / L) * lp / (math.sqrt(p) * L)
        if w == 0.0:
            continue
        P0.append(w * delta_kN(p, 1, params, policy)[0])
        P1.append(w * delta_kN(p * N, 1, params, policy)[0])
    return math.fsum(P0), twist * math.fsum(P1)


def _twist(params):
    """i^k mu(N) for N prime."""
    return -1.0 if params.k % 4 == 0 else 1.0


# ------------------------------------------------------------------ V2

def _primes_in_support(tf, params, nu):
    L = params.log_R
    p, lp = euler.primes_upto(math.exp(tf.sigma * L / nu))
    keep = p != params.N
    return p[keep].tolist(), lp[keep].tolist()


def V2_terms(tf, params, policy=DEFAULT_POLICY):
    """{S02, S00, S10, S12} with the family sign folded into the a = 1 terms."""
    L, N = params.log_R, params.N
    pre = params.sign * _twist(params) * math.sqrt(N)
    ps, lps = _primes_in_support(tf, params, 2)
    w = [phi_hat(tf, 2.0 * lp / L) * lp / (p * L) for p, lp in zip(ps, lps)]
    S02 = -math.fsum(w)
    S00 = math.fsum(wi * delta_kN(p * p, 1, params, policy)[0] for wi, p in zip(w, ps))
    S10 = pre * math.fsum(wi * delta_kN(p * p * N, 1, params, policy)[0] for wi, p in zip(w, ps))
    S12 = -pre * delta_kN(N, 1, params, policy)[0] * math.fsum(w)
    return {"S02": S02, "S00": S00, "S10": S10, "S12": S12}


def V2_bound_shapes(tf, params):
    """Error shapes for the off-diagonal V2 pieces (N^epsilon -> N^0.1)."""
    N, s = params.N, tf.sigma
    e = EPS_SHAPE
    return {
        "S00": N ** (s / 2.0 - 1.5 + e),
        "S10": N ** (-0.5 + e) + N ** (s / 2.0 - 1.0 + e),
        "S12": N ** (-0.5 + e),
    }


# ------------------------------------------------------------------ V3

@dataclass(frozen=True)
class V3Result:
    value: float
    by_nu: dict
    truncation_bound: float


def V3_details(tf, params, nu_max=8, policy=DEFAULT_POLICY):
    if isinstance(nu_max, bool) or int(nu_max) != nu_max or nu_max < 3:
        raise ConfigError("nu_max must be an integer >= 3")
    L, N = params.log_R, params.N
    pre = params.sign * _twist(params) * math.sqrt(N)
    by_nu = {}
    for nu in range(3, int(nu_max) + 1):
        ps, lps = _primes_in_support(tf, params, nu)
        acc = []
        for p, lp in zip(ps, lps):
            w = phi_hat(tf, nu * lp / L) * lp / (p ** (nu / 2.0) * L)
            if w == 0.0:
                continue
            for a, c in ((0, 1.0), (1, pre)):
                na = N ** a
                d = (delta_kN(p ** nu * na, 1, params, policy)[0]
                     - delta_kN(p ** (nu - 2) * na, 1, params, policy)[0])
                acc.append(c * w * d)
        by_nu[nu] = math.fsum(acc)
    # nu > nu_max: Deligne |lambda_f(p^j)| <= j + 1 and |N^{1/2} lambda_f(N)| = 1
    # bound each Petersson difference by 2 nu Delta(1, 1)
    trunc = 0.0
    top = _nu_max_exact(tf, params)
    if nu_max < top:
        d11 = abs(delta_kN(1, 1, params, policy)[0])
        acc = []
        for nu in range(int(nu_max) + 1, top + 1):
            ps, lps = _primes_in_support(tf, params, nu)
            acc.extend(2.0 * 2.0 * nu * d11 * lp / (p ** (nu / 2.0) * L) for p, lp in zip(ps, lps))
        trunc = math.fsum(acc)
    return V3Result(math.fsum(by_nu.values()), by_nu, trunc)


def V3_term(tf, params, nu_max=8, policy=DEFAULT_POLICY):
    """V3 truncated at nu <= nu_max (exact once 2^{nu_max+1} >= R^sigma)."""
    return V3_details(tf, params, nu_max, policy).value


def V3_bound_shape(tf, params):
    return params.N ** (-0.75 + tf.sigma / 4.0 + EPS_SHAPE)


def _nu_max_exact(tf, params):
    """Smallest nu_max past which no prime power enters the hat support."""
    return max(3, int(math.ceil(tf.sigma * params.log_R / math.log(2.0))) - 1)


# ----------------------------------------------------------- assembly

def nt_density(tf, params, policy=DEFAULT_POLICY):
    """Explicit-formula density with every prime-power block via Petersson.

    The V1 block is the a = 1 Kloosterman main term, B/2 with B = V1_bsum;
    the a = 0 half is dropped (its main term is absorbed into the error).
    """
    L = params.log_R
    s = params.sign
    _, rhs = ratios.xl_integral_identity(tf, params, policy)
    gi, gtail = ratios._gamma_integral(tf, params.k, params.R, policy)
    v1 = V1_bsum_details(tf, params, policy)
    v2 = V2_terms(tf, params, policy)
    v3 = V3_details(tf, params, _nu_max_exact(tf, params), policy)
    terms = {
        "logN_term": Term(math.log(params.N) / L * phi_hat(tf, 0.0), 0.0),
        "gamma_integral": Term(gi, gtail),
        "V1_block": Term(-s * v1.value, v1.tail_bound, "-sign * 2 * (V1_bsum / 2)"),
        "V2_S02": Term(-2.0 * v2["S02"], 1e-14, "prime sum without p = N"),
        "V2_S00": Term(-2.0 * v2["S00"], 0.0),
        "V2_S10": Term(-2.0 * v2["S10"], 0.0),
        "V2_S12": Term(-2.0 * v2["S12"], 0.0),
        "V3": Term(-2.0 * v3.value, 2.0 * v3.truncation_bound),
    }
    extra = {
        "xl_integral_rhs": rhs,
        "V1_bsum": v1.value,
        "P0_bound_shape": params.N ** (tf.sigma / 2.0 - 1.0 + EPS_SHAPE),
        "V2": v2,
        "V3": v3.value,
        "V3_by_nu": {str(k): v for k, v in v3.by_nu.items()},
    }
    return DensityReport("ntside", terms, params, tf, policy, extra)


def level_twist_product(alpha, gamma, params, policy=DEFAULT_POLICY):
    """i^k N^{-(1+gamma)} prod_p (1 - p^{-1-alpha-gamma} + p^{-1-2 gamma})."""
    alpha, gamma = complex(alpha), complex(gamma)
    if alpha.real <= 0 or gamma.real <= 0:
        raise DomainError("level_twist_product needs Re alpha > 0 and Re gamma > 0")
    ik = 1.0 if params.k % 4 == 0 else -1.0
    scale = ik * np.exp(-(1.0 + gamma) * math.log(params.N))
    if alpha == gamma:
        return complex(scale)
    prod = ratios._s1_product(1.0 + alpha + gamma, 1.0 + 2.0 * gamma, policy)
    return complex(scale * prod)


# ---------------------------------------------------------- comparison

@dataclass
class Alignment:
    name: str
    ratios_value: float
    ntside_value: float
    expected_difference: float
    tolerance: float
    note: str = ""

    @property
    def abs_diff(self):
        return abs(self.ratios_value - self.ntside_value - self.expected_difference)

    @property
    def rel_diff(self):
        scale = max(abs(self.ratios_value), abs(self.ntside_value))
        return self.abs_diff / scale if scale > 0 else 0.0

    @property
    def passed(self):
        return self.abs_diff <= self.tolerance

    def to_dict(self):
        return {"ratios": self.ratios_value, "ntside": self.ntside_value,
                "expected_difference": self.expected_difference,
                "abs_diff": self.abs_diff, "rel_diff": self.rel_diff,
                "tolerance": self.tolerance, "verdict": "pass" if self.passed else "fail",
                "note": self.note}


@dataclass
class Residual:
    name: str
    value: float
    bound: float
    slack: float = 100.0

    @property
    def passed(self):
        return abs(self.value) <= self.slack * self.bound

    def to_dict(self):
        return {"value": self.value, "bound_shape": self.bound, "slack": self.slack,
                "verdict": "pass" if self.passed else "fail"}


@dataclass
class ComparisonReport:
    params: FamilyParams
    tf: object
    policy: TruncationPolicy
    alignments: list
    residuals: list
    ratios_total: float
    ntside_total: float

    @property
    def passed(self):
        return all(a.passed for a in self.alignments) and all(r.passed for r in self.residuals)

    def rows(self):
        """(name, value, abs_err_budget, verdict) rows for tabular output."""
        out = []
        for a in self.alignments:
            out.append((a.name, a.ratios_value - a.ntside_value, a.tolerance,
                        "pass" if a.passed else "fail"))
        for r in self.residuals:
            out.append((r.name, r.value, r.slack * r.bound, "pass" if r.passed else "fail"))
        return out

    def to_dict(self):
        return {
            "params": self.params.to_dict(),
            "testfn": self.tf.to_dict(),
            "policy": self.policy.to_dict(),
            "alignments": {a.name: a.to_dict() for a in self.alignments},
            "residuals": {r.name: r.to_dict() for r in self.residuals},
            "ratios_total": self.ratios_total,
            "ntside_total": self.ntside_total,
            "verdict": "pass" if self.passed else "fail",
        }


def compare_sides(tf, params, policy=DEFAULT_POLICY, t1_tol=1e-3):
    """Term-by-term comparison of the ratios prediction and the explicit formula."""
    rat = ratios.density_full(tf, params, policy)
    nt = nt_density(tf, params, policy)
    L, N = params.log_R, params.N
    pN = 2.0 * math.log(N) / (N * L) * phi_hat(tf, 2.0 * math.log(N) / L)
    xl_ratio = rat.terms["logN_term"].value + rat.terms["gamma_integral"].value
    xl_nt = nt.extra["xl_integral_rhs"]
    alignments = [
        Alignment("prime_sum", rat.terms["prime_sum_T2"].value, nt.terms["V2_S02"].value,
                  pN, 1e-12, "differ by the p = N term"),
        Alignment("T1_vs_V1", rat.terms["T1"].value, nt.terms["V1_block"].value, 0.0, t1_tol,
                  "-sign 2 calT against -sign V1_bsum"),
        Alignment("xl_integral", xl_ratio, xl_nt, 0.0, 1e-12),
    ]
    shapes = V2_bound_shapes(tf, params)
    residuals = [
        Residual(f"V2_{name}", nt.extra["V2"][name], shapes[name])
        for name in ("S00", "S10", "S12")
    ]
    residuals.append(Residual("V3", nt.extra["V3"], V3_bound_shape(tf, params)))
    return ComparisonReport(params, tf, policy, alignments, residuals, rat.total, nt.total)


def petersson_bound_3_2(m, n, params):
    return bound_3_2(m, n, params, EPS_SHAPE)
