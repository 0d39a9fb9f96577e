"""Ratios-conjecture side of the 1-level density.

Conventions: L = log R, phi is the test function, t is the variable of phi.
The T1 quantity

    calT = lim_{eps -> 0+} int_R X_L(1/2 + 2 pi i x) chi(eps + 4 pi i x) phi(x L) dx

enters the full prediction as -sign * 2 * calT.  Since chi has a simple pole
with residue 1 at 0, the eps-limit equals (Plemelj)

    calT = phi(0)/4 + (1/L) int_0^inf 2 Re[X_L(1/2 + 2 pi i t/L) chi(4 pi i t/L)] phi(t) dt,

whose integrand is finite at t = 0.  The eps-route (Richardson on a schedule)
is kept as an independent cross-check.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from . import euler
from .config import FamilyParams, TruncationPolicy
from .errors import DomainError, NumericError
from .quadrature import neville_at_zero, panel_nodes, split_edges
from .special import _zeta_em, digamma, log_gamma, zeta_one_plus
from .testfn import hat_integral, phi, phi_hat, tail_window

DEFAULT_POLICY = TruncationPolicy()
PANEL_WIDTH = 1.0


# ---------------------------------------------------------------- X_L

def _xl_args(s, k):
    a = 1.0 - s + (k - 1) / 2.0
    b = s + (k - 1) / 2.0
    if np.any(np.real(a) <= 0) or np.any(np.real(b) <= 0):
        raise DomainError("X_L needs both Gamma arguments in the right half-plane")
    return a, b


def X_L(s, params):
    """(sqrt N / 2 pi)^{1-2s} Gamma(1-s+(k-1)/2) / Gamma(s+(k-1)/2)."""
    s = np.asarray(s, dtype=complex)
    a, b = _xl_args(s, params.k)
    logq = 0.5 * math.log(params.N) - math.log(2 * math.pi)
    out = np.exp((1.0 - 2.0 * s) * logq + log_gamma(a) - log_gamma(b))
    return complex(out) if np.ndim(out) == 0 else out


def X_L_logderiv(s, params):
    """X_L'/X_L(s) = -log(N/4pi^2) - psi(1-s+(k-1)/2) - psi(s+(k-1)/2)."""
    s = np.asarray(s, dtype=complex)
    a, b = _xl_args(s, params.k)
    out = -math.log(params.N / (4 * math.pi ** 2)) - digamma(a) - digamma(b)
    return complex(out) if np.ndim(out) == 0 else out


def _xl_critical(t, params):
    """X_L(1/2 + 2 pi i t / L) for real t (vectorised, no domain checks)."""
    L = params.log_R
    y = 2.0 * math.pi * np.asarray(t, dtype=float) / L
    z = params.k / 2.0 + 1j * y
    logq = 0.5 * math.log(params.N) - math.log(2 * math.pi)
    return np.exp(-2j * y * logq + log_gamma(np.conj(z)) - log_gamma(z))


# ------------------------------------------------------- t-integrals

def _window(tf, tol, growth=1.0):
    """Integration window for int_0^inf g(t) phi(t) dt with |g| <~ growth."""
    return tail_window(tf, tol / max(growth, 1.0))


def _t_panels(T, width=PANEL_WIDTH, fine_scale=None):
    breaks = [0.0, T]
    if fine_scale is not None:
        # geometric refinement towards 0 for eps-peaked integrands
        g = fine_scale / 16.0
        while g < width:
            breaks.append(g)
            g *= 2.0
    return split_edges(breaks, width)


def _integrate_t(f, T, width=PANEL_WIDTH, fine_scale=None, order=16):
    nodes, weights = panel_nodes(_t_panels(T, width, fine_scale), order)
    return float(np.sum(weights * f(nodes)))


def gamma_integral(tf, params, policy=DEFAULT_POLICY):
    """(2/L) int_R psi(k/2 + 2 pi i t / L) phi(t) dt (real)."""
    val, _ = _gamma_integral(tf, params.k, params.R, policy)
    return val


@functools.lru_cache(maxsize=64)
def _gamma_integral(tf, k, R, policy):
    L = math.log(R)
    growth = 2.0 * math.log(k + 2.0 * math.pi * policy.quadrature_window / L) + 2.0
    T = min(policy.quadrature_window, _window(tf, policy.quadrature_tol, growth))
    f = lambda t: digamma(k / 2.0 + 2j * math.pi * t / L).real * phi(tf, t)
    val = 2.0 / L * 2.0 * _integrate_t(f, T)
    tail = 2.0 / L * 2.0 * growth * _phi_tail(tf, T)
    return val, tail


def _phi_tail(tf, T):
    from .testfn import phi_tail_bound

    return phi_tail_bound(tf, T)


def xl_integral_identity(tf, params, policy=DEFAULT_POLICY):
    """Both sides of the X_L integral identity.

    lhs = -int_R X_L'/X_L(1/2 + 2 pi i t) phi(t log R) dt, by quadrature of
    X_L_logderiv; rhs = (log N / log R) phi_hat(0) + gamma_integral.
    """
    L = params.log_R
    growth = math.log(params.N) + 2.0 * math.log(params.k + policy.quadrature_window) + 2.0
    T = min(policy.quadrature_window, _window(tf, policy.quadrature_tol, growth))

    def f(t):
        return -X_L_logderiv(0.5 + 2j * math.pi * t / L, params).real * phi(tf, t)

    lhs = 2.0 * _integrate_t(f, T) / L
    rhs = math.log(params.N) / L * phi_hat(tf, 0.0) + gamma_integral(tf, params, policy)
    return lhs, rhs


# ---------------------------------------------------- ratio averages

def _s1_product(a_exp, b_exp, policy):
    """prod_p (1 - p^{-a} + p^{-b}) = zeta(b)/zeta(a) prod_p (1 + y(x-y)/(1-x))."""
    p, lp = euler.primes_upto(policy.prime_cutoff)
    x = np.exp(-a_exp * lp)
    y = np.exp(-b_exp * lp)
    prod = np.prod(1.0 + y * (x - y) / (1.0 - x))
    return complex(prod * zeta_one_plus(b_exp - 1.0) / zeta_one_plus(a_exp - 1.0))


def _s2_product(w_exp, b_exp, policy):
    """prod_p (1 + p^{w}/(p^{b}(p^{w} - 1))) = zeta(b) prod_p (1 + y(w-y)/(1-w))."""
    p, lp = euler.primes_upto(policy.prime_cutoff)
    w = np.exp(-w_exp * lp)
    y = np.exp(-b_exp * lp)
    prod = np.prod(1.0 + y * (w - y) / (1.0 - w))
    return complex(prod * zeta_one_plus(b_exp - 1.0))


def ratio_average(alpha, gamma, params, policy=DEFAULT_POLICY):
    """R_pm(alpha, gamma) predicted by the ratios recipe (Re alpha, Re gamma > 0)."""
    alpha, gamma = complex(alpha), complex(gamma)
    if alpha.real <= 0 or gamma.real <= 0:
        raise DomainError("ratio_average needs Re alpha > 0 and Re gamma > 0")
    if (1.0 - alpha + gamma).real <= 0:
        raise DomainError("ratio_average needs Re(1 - alpha + gamma) > 0")
    s1 = _s1_product(1.0 + alpha + gamma, 1.0 + 2.0 * gamma, policy)
    if alpha == gamma:
        # 1/zeta(1) = 0 removes the second term
        return s1
    inv_zeta = 1.0 / complex(_zeta_em(np.array([1.0 - alpha + gamma]))[0][0])
    s2 = params.sign * X_L(0.5 + alpha, params) * inv_zeta
    s2 *= _s2_product(1.0 - alpha + gamma, 1.0 + 2.0 * gamma, policy)
    return s1 + s2


def prime_logsum(r, policy=DEFAULT_POLICY):
    """sum_p log p * p^{-(1+2r)}, Re r > 0.

    Uses -zeta'/zeta(s) = sum_p log p p^{-s} / (1 - p^{-s}) and subtracts the
    prime-power part, truncated at prime_cutoff.
    """
    r = complex(r)
    if r.real <= 0:
        raise DomainError("prime_logsum needs Re r > 0")
    s = 1.0 + 2.0 * r
    v, dv = _zeta_em(np.array([s]), deriv=True)
    p, lp = euler.primes_upto(policy.prime_cutoff)
    ps = np.exp(-s * lp)
    powers = np.sum(lp * ps * ps / (1.0 - ps))
    return complex(-dv[0] / v[0] - powers)


def logderiv_average(r, params, policy=DEFAULT_POLICY):
    """sum_p log p p^{-(1+2r)} -/+ X_L(1/2 + r) chi(2r), Re r > 0."""
    r = complex(r)
    if r.real <= 0:
        raise DomainError("logderiv_average needs Re r > 0")
    return prime_logsum(r, policy) - params.sign * X_L(0.5 + r, params) * euler.chi(2.0 * r, policy)


# ---------------------------------------------------------------- T1

@dataclass(frozen=True)
class T1Result:
    value: float
    method: str
    window: float
    tail_bound: float
    error_estimate: float
    eps_values: tuple = ()


def _chi_growth(T, L):
    # crude bound for |chi(4 pi i t / L)| on [1, T]
    return 4.0 * (math.log(1.0 + 4.0 * math.pi * T / L) + 1.0)


def _t1_integrand_factory(params, policy, local_N, eps=0.0):
    L = params.log_R

    def f(t):
        u = eps + 4j * math.pi * t / L
        c = euler.chi(u, policy)
        if local_N:
            c = c / euler.chi_local_factor(u, params.N)
        return 2.0 * (_xl_critical(t, params) * c).real / L

    return f


@functools.lru_cache(maxsize=64)
def _t1_cached(tf, k, N, R, policy, method, local_N):
    params = FamilyParams(k, N, 1, R)
    L = params.log_R
    growth = 2.0 * _chi_growth(policy.quadrature_window, L) / L
    T = min(policy.quadrature_window, _window(tf, policy.quadrature_tol, growth))
    tail = growth * _phi_tail(tf, T)
    residue = (N - 1.0) / N if local_N else 1.0
    if method == "plemelj":
        g = _t1_integrand_factory(params, policy, local_N)
        val = residue * phi(tf, 0.0) / 4.0 + _integrate_t(lambda t: g(t) * phi(tf, t), T)
        return T1Result(val, method, T, tail, tail)
    if method == "richardson":
        vals = []
        for eps in policy.epsilon_schedule:
            g = _t1_integrand_factory(params, policy, local_N, eps)
            fine = eps * L / (4.0 * math.pi)
            vals.append(_integrate_t(lambda t: g(t) * phi(tf, t), T, fine_scale=fine))
        est, err = neville_at_zero(policy.epsilon_schedule, vals)
        return T1Result(est.real, method, T, tail, err, tuple(vals))
    raise ValueError(f"unknown T1 method {method!r}")


def T1_details(tf, params, policy=DEFAULT_POLICY, method="plemelj", local_N=False):
    return _t1_cached(tf, params.k, params.N, params.R, policy, method, bool(local_N))


def T1_direct(tf, params, policy=DEFAULT_POLICY, method="plemelj"):
    """calT = lim_{eps->0} int X_L(1/2+2 pi i x) chi(eps+4 pi i x) phi(x log R) dx.

    The full density carries -sign * 2 * calT.
    """
    res = T1_details(tf, params, policy, method)
    if method == "richardson" and res.error_estimate > 1e-2:
        raise NumericError(
            f"eps-extrapolation not settled (last-order change {res.error_estimate:.3e})"
        )
    return res.value


def sinc_integral(tf, ell, policy=DEFAULT_POLICY):
    """int_R sin(2 pi t ell)/(2 pi t) phi(t) dt by quadrature."""
    T = min(policy.quadrature_window, _window(tf, policy.quadrature_tol, 1.0))

    def f(t):
        w = 2.0 * math.pi * t * ell
        small = np.abs(w) < 1e-4
        safe = np.where(small, 1.0, w)
        s = np.where(small, ell * (1.0 - w * w / 6.0), np.sin(safe) / (2.0 * math.pi * np.where(small, 1.0, t)))
        return s * phi(tf, t)

    return 2.0 * _integrate_t(f, T, width=min(PANEL_WIDTH, 0.25 / max(ell, 1e-9)))


def sinc_integral_exact(tf, ell):
    """Same integral from the hat: (1/2) int_{-ell}^{ell} phi_hat."""
    return 0.5 * hat_integral(tf, -ell, ell)


# ----------------------------------------------------------- reports

@dataclass
class Term:
    value: float
    abs_err_budget: float = 0.0
    note: str = ""


@dataclass
class DensityReport:
    """Itemised 1-level density evaluation."""

    kind: str
    terms: dict
    params: FamilyParams
    tf: object
    policy: TruncationPolicy
    extra: dict = field(default_factory=dict)

    @property
    def total(self):
        return math.fsum(t.value for t in self.terms.values())

    @property
    def error_budget(self):
        return math.fsum(t.abs_err_budget for t in self.terms.values())

    def to_dict(self):
        return {
            "kind": self.kind,
            "params": self.params.to_dict(),
            "testfn": self.tf.to_dict(),
            "policy": self.policy.to_dict(),
            "terms": {
                name: {"value": t.value, "abs_err_budget": t.abs_err_budget, "note": t.note}
                for name, t in self.terms.items()
            },
            "total": self.total,
            "error_budget": self.error_budget,
            "extra": self.extra,
        }


def _common_terms(tf, params, policy):
    L = params.log_R
    gi, gtail = _gamma_integral(tf, params.k, params.R, policy)
    return {
        "prime_sum_T2": Term(euler.prime_sum_T2(tf, params.R, policy), 1e-14,
                             "exact truncation by hat support"),
        "logN_term": Term(math.log(params.N) / L * phi_hat(tf, 0.0), 0.0),
        "gamma_integral": Term(gi, gtail),
    }


def density_full(tf, params, policy=DEFAULT_POLICY, method="plemelj"):
    """Full ratios prediction: T2 + logN term - sign*2*calT + gamma integral."""
    terms = _common_terms(tf, params, policy)
    res = T1_details(tf, params, policy, method)
    terms["T1"] = Term(-params.sign * 2.0 * res.value, 2.0 * (res.tail_bound + res.error_estimate),
                       f"-sign*2*calT, {method}")
    return DensityReport("ratios_full", terms, params, tf, policy,
                         {"calT": res.value, "T1_window": res.window})


def T1_decomposed(tf, params, delta=0.1, policy=DEFAULT_POLICY):
    """The three sign-carrying lower-order pieces and the nominal error size.

    Returns {half_phi0, sinc_integral, m_hat_term, error_nominal}; the
    density carries sign * (-half_phi0 + sinc_integral - m_hat_term).
    """
    if not 0 < delta < 0.5:
        raise DomainError("delta must lie in (0, 1/2)")
    ell = params.ell
    if ell <= 0:
        raise DomainError("need N > 4 pi^2 so that ell > 0")
    L = params.log_R
    m = euler.m_constant(params.k, policy)
    return {
        "half_phi0": 0.5 * phi(tf, 0.0),
        "sinc_integral": sinc_integral(tf, ell, policy),
        "m_hat_term": m * phi_hat(tf, ell) / L,
        "error_nominal": L ** (-2.0 * (1.0 - delta)),
    }


def lower_order_block(tf, params, delta=0.1, policy=DEFAULT_POLICY):
    """-half_phi0 + sinc_integral - m_hat_term (multiply by sign for the density)."""
    d = T1_decomposed(tf, params, delta, policy)
    return -d["half_phi0"] + d["sinc_integral"] - d["m_hat_term"]


def density_lower_order(tf, params, delta=0.1, policy=DEFAULT_POLICY, restricted_shortcut=False):
    """Lower-order expansion of the density.

    With restricted_shortcut=True and sigma <= ell the sign-carrying terms
    are dropped (they cancel exactly in that range).
    """
    terms = _common_terms(tf, params, policy)
    d = T1_decomposed(tf, params, delta, policy)
    s = params.sign
    restricted = tf.sigma <= params.ell
    if not (restricted_shortcut and restricted):
        terms["half_phi0"] = Term(-s * d["half_phi0"], 0.0)
        terms["sinc_integral"] = Term(s * d["sinc_integral"], policy.quadrature_tol)
        terms["m_hat_term"] = Term(-s * d["m_hat_term"], 0.0)
    rep = DensityReport("ratios_lower_order", terms, params, tf, policy,
                        {"error_nominal": d["error_nominal"], "restricted": restricted,
                         "delta": delta})
    return rep
