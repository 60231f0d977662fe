from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigError


@dataclass(frozen=True)
class PrecisionConfig:
    """Working precision and truncation targets for the arbitrary precision engine.

    ``tail_tol`` defaults to ``10**(1 - working_digits)``.
    """

    working_digits: int = 40
    em_terms_min: int = 10
    tail_tol: float | None = None
    zero_clearance: float = 1e-3

    def __post_init__(self):
        if self.working_digits < 25:
            raise ConfigError(f"working_digits must be >= 25, got {self.working_digits}")
        if self.tail_tol is None:
            object.__setattr__(self, "tail_tol", 10.0 ** (1 - self.working_digits))
        if not self.tail_tol > 0:
            raise ConfigError("tail_tol must be positive")
        if not self.zero_clearance > 0:
            raise ConfigError("zero_clearance must be positive")
        if self.em_terms_min < 1:
            raise ConfigError("em_terms_min must be >= 1")

    @property
    def guard_digits(self) -> int:
        return self.working_digits + 10


DEFAULT_PRECISION = PrecisionConfig()
ORACLE_PRECISION = PrecisionConfig(working_digits=60)


@dataclass(frozen=True)
class RunConfig:
    t_max: float = 100.0
    precision_digits: int = 40
    a_list: tuple[float, ...] = (0.5, 1.0, 2.0)
    c: float = 1.0
    sigma1: float = 0.9
    jobs: int = 1
    out_dir: str = "out"
    cache_dir: str = ".zetalab_cache"
    zeros_file: str | None = None
    t_caps: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        # 10 rather than 20: a derivative scan with t_max=10 is a valid empty run.
        if not self.t_max >= 10:
            raise ConfigError(f"t_max must be >= 10, got {self.t_max}")
        if not 25 <= self.precision_digits <= 200:
            raise ConfigError(f"precision_digits must lie in [25, 200], got {self.precision_digits}")
        if not self.c > 0:
            raise ConfigError("c must be positive")
        if not 0.5 < self.sigma1 < 1:
            raise ConfigError("sigma1 must lie in (1/2, 1)")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if any(not a > 0 for a in self.a_list):
            raise ConfigError("every a must be positive")
        if any(not math.isfinite(x) for x in (self.t_max, self.c, self.sigma1)):
            raise ConfigError("non-finite configuration value")

    def precision(self) -> PrecisionConfig:
        return PrecisionConfig(working_digits=self.precision_digits)
