"""Command-line front end.

    ratiodensity predict --k 4 --N 1009 --sign + --sigma 0.8
    ratiodensity compare --config run.json --format csv --out cmp.csv

Exit codes: 0 ok, 1 a verdict failed, 2 bad configuration, 3 numeric or I/O
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

from .config import FamilyParams, TruncationPolicy
from .errors import ConfigError, DomainError, NumericError

COMMANDS = ("predict", "ntside", "compare", "selfcheck", "constants", "petersson")
CSV_HEADER = ("term", "value", "abs_err_budget", "verdict")

EXIT_OK, EXIT_VERDICT, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _parse_sign(v):
    if v in ("+", "+1", 1, "1"):
        return 1
    if v in ("-", "-1", -1):
        return -1
    raise ConfigError(f"sign must be '+' or '-', got {v!r}")


@dataclass
class RunConfig:
    k: int = 4
    N: int = 1009
    sign: int = 1
    R_factor: float = None  # R = R_factor * N, default k^2
    m: int = 4
    sigma: float = 0.8
    delta: float = 0.1
    policy: TruncationPolicy = field(default_factory=TruncationPolicy)
    format: str = "json"
    path: str = None
    pm: int = 1
    pn: int = 1

    def family(self):
        factor = self.k ** 2 if self.R_factor is None else self.R_factor
        return FamilyParams(self.k, self.N, self.sign, float(factor) * self.N)

    def testfn(self):
        from .testfn import make_sinc_power

        return make_sinc_power(self.m, self.sigma)

    def validate(self):
        """Check every field against the preconditions of the operations."""
        if self.R_factor is not None:
            f = float(self.R_factor)
            if not (math.isfinite(f) and f >= 1.0):
                raise ConfigError("R-factor must be a finite real >= 1")
        self.family()
        self.testfn()
        if not 0.0 < float(self.delta) < 0.5:
            raise ConfigError("delta must lie in (0, 1/2)")
        if self.format not in ("json", "csv"):
            raise ConfigError("format must be json or csv")
        for name in ("pm", "pn"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise ConfigError(f"{name} must be a positive integer")
        return self

    def to_dict(self):
        return {
            "family": {"k": self.k, "N": self.N, "sign": "+" if self.sign > 0 else "-",
                       "R_factor": self.R_factor},
            "testfn": {"m": self.m, "sigma": self.sigma},
            "policy": self.policy.to_dict(),
            "delta": self.delta,
            "output": {"format": self.format, "path": self.path},
            "options": {"pm": self.pm, "pn": self.pn},
        }

    @classmethod
    def from_dict(cls, d):
        known = {"family", "testfn", "policy", "delta", "output", "options"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config sections: {sorted(extra)}")
        cfg = cls()
        fam = dict(d.get("family", {}))
        tfd = dict(d.get("testfn", {}))
        out = dict(d.get("output", {}))
        opt = dict(d.get("options", {}))
        for section, allowed in ((fam, {"k", "N", "sign", "R_factor"}), (tfd, {"m", "sigma"}),
                                 (out, {"format", "path"}), (opt, {"pm", "pn"})):
            bad = set(section) - allowed
            if bad:
                raise ConfigError(f"unknown config keys: {sorted(bad)}")
        if "sign" in fam:
            fam["sign"] = _parse_sign(fam["sign"])
        for src in (fam, tfd, out, opt):
            for key, val in src.items():
                setattr(cfg, key, val)
        if "delta" in d:
            cfg.delta = d["delta"]
        if "policy" in d:
            try:
                cfg.policy = TruncationPolicy.from_dict(d["policy"])
            except TypeError as exc:
                raise ConfigError(str(exc)) from None
        return cfg


# ---------------------------------------------------------- arguments

def _common_parser(suppress=False):
    # the subcommand copy must not reset flags given before the command
    p = argparse.ArgumentParser(add_help=False,
                                argument_default=argparse.SUPPRESS if suppress else None)
    p.add_argument("--config", help="JSON run configuration; flags override it")
    p.add_argument("--k", type=int, help="weight (even, >= 2)")
    p.add_argument("--N", type=int, help="prime level")
    p.add_argument("--sign", help="family sign, + or -")
    p.add_argument("--sigma", type=float, help="support of phi_hat")
    p.add_argument("--m", type=int, help="sinc power of the test function")
    p.add_argument("--R-factor", dest="R_factor", type=float, help="R = factor * N (default k^2)")
    p.add_argument("--delta", type=float, help="delta in the lower-order error exponent")
    p.add_argument("--prime-cutoff", dest="prime_cutoff", type=int)
    p.add_argument("--out", dest="path", help="output file (default stdout)")
    p.add_argument("--format", choices=("json", "csv"))
    return p


def build_parser():
    parser = argparse.ArgumentParser(prog="ratiodensity", parents=[_common_parser()],
                                     description="1-level density: ratios prediction vs explicit formula")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    helps = {
        "predict": "ratios-side density report",
        "ntside": "explicit-formula density report",
        "compare": "term-by-term comparison with verdicts",
        "selfcheck": "run the identity suite",
        "constants": "print the arithmetic constants",
        "petersson": "evaluate Delta_{k,N}(m, n)",
    }
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[_common_parser(suppress=True)], help=helps[name])
        if name == "petersson":
            sp.add_argument("--pm", type=int, default=None, help="first Petersson argument")
            sp.add_argument("--pn", type=int, default=None, help="second Petersson argument")
    return parser


def _load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config {path}: top level must be an object")
    return RunConfig.from_dict(data)


def resolve_config(ns):
    """Merge the config file (if any) with flag overrides, then validate."""
    cfg = _load_config(ns.config) if getattr(ns, "config", None) else RunConfig()
    for name in ("k", "N", "sigma", "m", "R_factor", "delta", "path", "format", "pm", "pn"):
        v = getattr(ns, name, None)
        if v is not None:
            setattr(cfg, name, v)
    if getattr(ns, "sign", None) is not None:
        cfg.sign = _parse_sign(ns.sign)
    if getattr(ns, "prime_cutoff", None) is not None:
        d = cfg.policy.to_dict()
        d["prime_cutoff"] = ns.prime_cutoff
        cfg.policy = TruncationPolicy.from_dict(d)
    return cfg.validate()


# ------------------------------------------------------------- output

def _clean(obj):
    """JSON-safe copy: non-finite floats become strings, tuples lists."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, complex):
        return {"re": _clean(obj.real), "im": _clean(obj.imag)}
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return _clean(obj.item())
    return obj


def render(payload, rows, fmt):
    if fmt == "json":
        return json.dumps(_clean(payload), indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for name, value, budget, verdict in rows:
        w.writerow([name, repr(float(value)), repr(float(budget)), verdict])
    return buf.getvalue()


def emit_report(payload, rows, fmt, path=None):
    text = render(payload, rows, fmt)
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _density_rows(report):
    return [(name, t.value, t.abs_err_budget, "n/a") for name, t in report.terms.items()]


# ----------------------------------------------------------- commands

def _cmd_predict(cfg):
    from .ratios import density_full, T1_decomposed

    params, tf = cfg.family(), cfg.testfn()
    rep = density_full(tf, params, cfg.policy)
    payload = rep.to_dict()
    if params.ell > 0:
        payload["lower_order"] = T1_decomposed(tf, params, cfg.delta, cfg.policy)
    return payload, _density_rows(rep), True


def _cmd_ntside(cfg):
    from .ntside import nt_density

    rep = nt_density(cfg.testfn(), cfg.family(), cfg.policy)
    return rep.to_dict(), _density_rows(rep), True


def _cmd_compare(cfg):
    from .ntside import compare_sides

    rep = compare_sides(cfg.testfn(), cfg.family(), cfg.policy)
    return rep.to_dict(), rep.rows(), rep.passed


def _cmd_constants(cfg):
    from . import euler
    from .special import EULER_GAMMA, zeta_prime_over_zeta_at_2

    params = cfg.family()
    pc = euler.prime_constant_details(cfg.policy)
    m1 = euler.m1_closed_form(params.k, cfg.policy)
    vals = {
        "euler_gamma": EULER_GAMMA,
        "prime_constant": pc.value,
        "zeta_prime_over_zeta_2": zeta_prime_over_zeta_at_2(),
        "m_constant": euler.m_constant(params.k, cfg.policy),
        "m1_imag": m1.imag,
        "ell": params.ell,
        "log_R": params.log_R,
    }
    budgets = {"prime_constant": pc.tail_bound}
    rows = [(k, v, budgets.get(k, 0.0), "n/a") for k, v in vals.items()]
    return {"constants": vals, "prime_constant_tail_bound": pc.tail_bound}, rows, True


def _cmd_petersson(cfg):
    from .petersson import bound_A3, delta_kN

    params = cfg.family()
    value, tail = delta_kN(cfg.pm, cfg.pn, params, cfg.policy)
    try:
        a3 = bound_A3(cfg.pm, cfg.pn, params)
    except DomainError:
        a3 = None
    payload = {"m": cfg.pm, "n": cfg.pn, "k": params.k, "N": params.N,
               "value": value, "tail_bound": tail, "bound_A3": a3}
    rows = [("delta_kN", value, tail, "n/a")]
    return payload, rows, True


def selfcheck_items(cfg):
    """(name, lhs, rhs, tolerance) for the identity suite."""
    import random

    from . import euler, ntside, petersson, ratios
    from .testfn import make_sinc_power

    params = cfg.family()
    pol = cfg.policy
    items = []
    cut = min(pol.prime_cutoff, 1_000_000)
    for u in (1.0, 2.0, 1.5 + 1.0j):
        d = euler.chi_direct(u, cutoff=cut, policy=pol)
        a = euler.chi(u, pol)
        items.append((f"chi_factorisation_u={u}", abs(d.value), abs(a), 2.0 * d.tail_bound * abs(a)))
    tf1 = make_sinc_power(cfg.m, 1.0)
    lhs, rhs = ratios.xl_integral_identity(tf1, params, pol)
    items.append(("xl_integral_identity", lhs, rhs, 1e-8))
    cf = euler.m1_closed_form(params.k, pol).imag
    fd = euler.m1_finite_difference(params.k, policy=pol).imag
    items.append(("m1_finite_difference", fd, cf, 1e-6 * abs(cf)))
    for s in (0.0, 0.3):
        items.append((f"bessel_mellin_s={s}", ntside.bessel_mellin(s, params.k, policy=pol).real,
                      ntside.bessel_mellin_rhs(s, params.k).real, 1e-6))
    rng = random.Random(12345)
    worst = 0.0
    for _ in range(40):
        c1, c2 = rng.randint(2, 60), rng.randint(2, 60)
        if math.gcd(c1, c2) != 1:
            continue
        m, n = rng.randint(1, 30), rng.randint(1, 30)
        worst = max(worst, abs(petersson.kloosterman(m, n, c1 * c2)
                               - petersson.kloosterman_direct(m, n, c1 * c2)))
    items.append(("kloosterman_multiplicativity", worst, 0.0, 1e-8))
    v, _ = petersson.delta_kN(1, 1, FamilyParams(12, 101), pol)
    items.append(("petersson_diagonal_12_101", v, 1.0, 1e-10))
    return items


def _cmd_selfcheck(cfg):
    items = selfcheck_items(cfg)
    checks = {}
    rows = []
    ok = True
    for name, lhs, rhs, tol in items:
        diff = abs(lhs - rhs)
        passed = diff <= tol
        ok &= passed
        verdict = "pass" if passed else "fail"
        checks[name] = {"lhs": lhs, "rhs": rhs, "abs_diff": diff, "tolerance": tol,
                        "verdict": verdict}
        rows.append((name, diff, tol, verdict))
    return {"checks": checks, "verdict": "pass" if ok else "fail"}, rows, ok


HANDLERS = {
    "predict": _cmd_predict,
    "ntside": _cmd_ntside,
    "compare": _cmd_compare,
    "selfcheck": _cmd_selfcheck,
    "constants": _cmd_constants,
    "petersson": _cmd_petersson,
}


def run(argv=None):
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = resolve_config(ns)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        payload, rows, ok = HANDLERS[ns.command](cfg)
        payload = {"command": ns.command, "config": cfg.to_dict(), **payload}
        emit_report(payload, rows, cfg.format, cfg.path)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, DomainError, ArithmeticError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if not ok:
        print(f"{ns.command}: at least one verdict failed", file=sys.stderr)
        return EXIT_VERDICT
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
