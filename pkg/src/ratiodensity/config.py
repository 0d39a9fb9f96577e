"""Configuration records: truncation policy and family parameters."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields

from .arith import is_prime
from .errors import ConfigError


@dataclass(frozen=True)
class TruncationPolicy:
    """Cutoffs and tolerances for every infinite sum, product and integral."""

    prime_cutoff: int = 10_000_000
    # residual Euler product inside integrands (tail-corrected beyond it)
    chi_prime_cutoff: int = 3_000
    product_tail_tol: float = 1e-12
    quadrature_window: float = 5000.0
    quadrature_tol: float = 1e-9
    epsilon_schedule: tuple = (0.1, 0.05, 0.025, 0.0125)
    mellin_epsilon_schedule: tuple = (0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003125)
    c_sum_cutoff_factor: int = 1000
    b_sum_cutoff: int = 2000

    def __post_init__(self):
        object.__setattr__(self, "epsilon_schedule", tuple(float(e) for e in self.epsilon_schedule))
        object.__setattr__(
            self, "mellin_epsilon_schedule", tuple(float(e) for e in self.mellin_epsilon_schedule)
        )
        for name in ("prime_cutoff", "chi_prime_cutoff", "c_sum_cutoff_factor", "b_sum_cutoff"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v <= 0:
                raise ConfigError(f"{name} must be a positive integer")
            object.__setattr__(self, name, int(v))
        for name in ("product_tail_tol", "quadrature_window", "quadrature_tol"):
            v = float(getattr(self, name))
            if not (v > 0 and math.isfinite(v)):
                raise ConfigError(f"{name} must be a positive real")
            object.__setattr__(self, name, v)
        if self.prime_cutoff < 2 or self.prime_cutoff > 10**9:
            raise ConfigError("prime_cutoff must lie in [2, 1e9]")
        for name in ("epsilon_schedule", "mellin_epsilon_schedule"):
            sched = getattr(self, name)
            if len(sched) < 2:
                raise ConfigError(f"{name} needs at least two entries")
            if any(e <= 0 for e in sched):
                raise ConfigError(f"{name} entries must be positive")
            if any(b >= a for a, b in zip(sched, sched[1:])):
                raise ConfigError(f"{name} must be strictly decreasing")

    def to_dict(self):
        d = asdict(self)
        d["epsilon_schedule"] = list(self.epsilon_schedule)
        d["mellin_epsilon_schedule"] = list(self.mellin_epsilon_schedule)
        return d

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown policy keys: {sorted(extra)}")
        return cls(**d)


@dataclass(frozen=True)
class FamilyParams:
    """Weight k, prime level N, sign of the functional equation, scaling R."""

    k: int
    N: int
    sign: int = 1
    R: float = field(default=None)

    def __post_init__(self):
        k, N = self.k, self.N
        if isinstance(k, bool) or int(k) != k or k < 2 or k % 2:
            raise ConfigError("k must be an even integer >= 2")
        if isinstance(N, bool) or int(N) != N or not is_prime(int(N)):
            raise ConfigError("N must be prime")
        object.__setattr__(self, "k", int(k))
        object.__setattr__(self, "N", int(N))
        if self.sign not in (1, -1):
            raise ConfigError("sign must be +1 or -1")
        R = float(k * k * N) if self.R is None else float(self.R)
        if not math.isfinite(R) or R < N:
            raise ConfigError("R must be a finite real with R >= N")
        object.__setattr__(self, "R", R)

    @property
    def log_R(self):
        return math.log(self.R)

    @property
    def ell(self):
        """log(N / 4 pi^2) / log R."""
        return math.log(self.N / (4.0 * math.pi ** 2)) / self.log_R

    def with_sign(self, sign):
        return FamilyParams(self.k, self.N, sign, self.R)

    def to_dict(self):
        return {"k": self.k, "N": self.N, "sign": "+" if self.sign > 0 else "-", "R": self.R}
