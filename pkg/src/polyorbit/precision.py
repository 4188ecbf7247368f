"""Working-precision configuration.

All numerics run on mpmath reals.  A :class:`PrecisionConfig` pins the
decimal working precision, the default acceptance tolerance and the
ceiling on integer exponents (orbit magnitudes scale like t**(2**n), so
exponents are explicit big integers and need a sanity budget).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from mpmath import mp, mpf


@dataclass(frozen=True)
class PrecisionConfig:
    """Immutable bundle of precision knobs.

    working_digits: decimal digits of the mpmath reals (>= 30).
    rel_tol: default relative acceptance tolerance; must be well below
        10**(-working_digits/3) so tolerance checks sit far above noise.
    max_exponent_budget: largest n for which 2**n-sized integer
        exponents are allowed in powers and closed-form iterates.
    """

    working_digits: int = 50
    rel_tol: mpf = field(default=None)  # type: ignore[assignment]
    max_exponent_budget: int = 256

    def __post_init__(self):
        if self.working_digits < 30:
            raise ValueError("working_digits must be >= 30")
        if self.max_exponent_budget < 1:
            raise ValueError("max_exponent_budget must be positive")
        if self.rel_tol is None:
            object.__setattr__(self, "rel_tol", mpf(10) ** (-(self.working_digits // 2)))
        else:
            object.__setattr__(self, "rel_tol", mpf(self.rel_tol))
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.rel_tol >= mpf(10) ** (-mpf(self.working_digits) / 3):
            raise ValueError("rel_tol must be < 10**(-working_digits/3)")

    def activate(self) -> "PrecisionConfig":
        """Set the global mpmath precision to this configuration."""
        mp.dps = self.working_digits
        return self

    @property
    def exponent_ceiling(self) -> int:
        return 1 << self.max_exponent_budget


DEFAULT_PRECISION = PrecisionConfig()
DEFAULT_PRECISION.activate()


def get_precision() -> PrecisionConfig:
    """Return the precision currently matching the mpmath context."""
    if mp.dps == DEFAULT_PRECISION.working_digits:
        return DEFAULT_PRECISION
    return PrecisionConfig(working_digits=mp.dps)
