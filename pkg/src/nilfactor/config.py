"""Run-wide constants.

Every implicit O(1) exponent of the factorisation theorems lives here with a
concrete default, and every report echoes the resolved values.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ConstantsConfig:
    # loss exponents
    B: float = 2.0
    C: float = 2.0
    C_prime: float = 2.0
    A: float = 4.0
    # obstruction criterion: frequencies up to K(delta) = ceil(delta^-kappa),
    # capped at sqrt(length); phases with C-infinity norm <= tau count
    kappa: float = 4.0
    tau: float = 1.0
    # direct oracle family and progressions
    char_cutoff: int = 8
    vertical_cutoff: int = 1
    q_max: int = 64
    window_grid: int = 256
    # tree and factorisation caps
    qtilde_cap: int = 1000
    difference_cap_exponent: float = 8.0
    scale_cap_exponent: float = 16.0
    exhaustive_limit: int = 300000
    # comparability factor between the coordinate quasi-metric and d_X
    metric_comparability: float = 1.0
    # factorise_once: confirm each "no obstruction" verdict with the direct oracle
    direct_check: bool = True

    def __post_init__(self):
        for name in ("B", "C", "C_prime", "A", "kappa"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if not self.A / self.B > 1:
            raise ConfigError("A / B must exceed 1")
        for name in ("char_cutoff", "q_max", "window_grid", "qtilde_cap", "exhaustive_limit"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.tau <= 0:
            raise ConfigError("tau must be positive")

    def obstruction_cutoff(self, delta: float, length: int) -> int:
        """K(delta): frequency range of the obstruction criterion at scale delta."""
        k_delta = math.ceil(delta ** (-self.kappa) - 1e-9)
        return max(1, min(k_delta, math.isqrt(max(1, length))))

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "ConstantsConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    def with_(self, **kw) -> "ConstantsConfig":
        return replace(self, **kw)
