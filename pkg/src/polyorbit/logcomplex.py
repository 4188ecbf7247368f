"""Extended-range complex scalars in log-polar form.

Orbit magnitudes of degree-m homogeneous maps scale like t**(m**n), so
any fixed-exponent float dies after a handful of steps.  A LogComplex
stores log|z| (an mpmath real, -inf for zero) and the phase in
(-pi, pi].  Products and integer powers act additively on logs; the
phase of a huge integer power is reduced with exact extended-precision
integer arithmetic, so no phase drift accumulates over exponents the
size of 2**n.

Conventions: 0**0 == 1; a root of zero is zero only when the caller
passes ``zero_ok=True``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import mpmath
from mpmath import mp, mpc, mpf

from .errors import ExponentBudgetExceeded, ZeroRoot
from .precision import PrecisionConfig, get_precision

Scalar = Union["LogComplex", mpc, mpf, complex, float, int]

_NINF = mpf("-inf")


def _normalize_phase(t: mpf) -> mpf:
    """Fold a real angle into (-pi, pi]."""
    pi = mp.pi
    if -pi < t <= pi:
        return t
    n = mpmath.floor((pi - t) / (2 * pi))
    return t + 2 * pi * n


@dataclass(frozen=True)
class LogComplex:
    """Complex scalar as (log-modulus, phase); phase in (-pi, pi]."""

    logmag: mpf
    phase: mpf

    @staticmethod
    def zero() -> "LogComplex":
        return LogComplex(_NINF, mpf(0))

    @staticmethod
    def one() -> "LogComplex":
        return LogComplex(mpf(0), mpf(0))

    @staticmethod
    def from_polar(logmag, phase) -> "LogComplex":
        lm = mpf(logmag)
        if lm == _NINF:
            return LogComplex.zero()
        return LogComplex(lm, _normalize_phase(mpf(phase)))

    @staticmethod
    def from_complex(z: Scalar) -> "LogComplex":
        if isinstance(z, LogComplex):
            return z
        w = mpc(z)
        if w == 0:
            return LogComplex.zero()
        return LogComplex(mpmath.log(abs(w)), mpmath.arg(w))

    @property
    def is_zero(self) -> bool:
        return self.logmag == _NINF

    def to_mpc(self) -> mpc:
        if self.is_zero:
            return mpc(0)
        return mpmath.exp(mpc(self.logmag, self.phase))

    def to_complex(self) -> complex:
        """Python complex, for report output; caller guards the range."""
        return complex(self.to_mpc())

    def abs_mpf(self) -> mpf:
        return mpf(0) if self.is_zero else mpmath.exp(self.logmag)

    def conjugate(self) -> "LogComplex":
        if self.is_zero:
            return self
        return LogComplex(self.logmag, _normalize_phase(-self.phase))

    def negate(self) -> "LogComplex":
        if self.is_zero:
            return self
        return LogComplex(self.logmag, _normalize_phase(self.phase + mp.pi))

    def serialize(self) -> str:
        digits = mp.dps + 8
        if self.is_zero:
            return "-inf@0"
        return "%s@%s" % (
            mpmath.nstr(self.logmag, digits, strip_zeros=True),
            mpmath.nstr(self.phase, digits, strip_zeros=True),
        )

    @staticmethod
    def deserialize(text: str) -> "LogComplex":
        lm, ph = text.split("@")
        if lm.strip() == "-inf":
            return LogComplex.zero()
        return LogComplex.from_polar(mpf(lm), mpf(ph))

    def __repr__(self):  # short, for test diagnostics
        if self.is_zero:
            return "LogComplex(0)"
        return "LogComplex(logmag=%s, phase=%s)" % (
            mpmath.nstr(self.logmag, 10),
            mpmath.nstr(self.phase, 10),
        )


def lc_mul(a: LogComplex, b: LogComplex) -> LogComplex:
    """Product: logmags add, phases add and renormalize; zero absorbs."""
    if a.is_zero or b.is_zero:
        return LogComplex.zero()
    return LogComplex(a.logmag + b.logmag, _normalize_phase(a.phase + b.phase))


def lc_div(a: LogComplex, b: LogComplex) -> LogComplex:
    if b.is_zero:
        raise ZeroDivisionError("division by LogComplex zero")
    if a.is_zero:
        return a
    return LogComplex(a.logmag - b.logmag, _normalize_phase(a.phase - b.phase))


def lc_ipow(a: LogComplex, e: int, prec: PrecisionConfig | None = None) -> LogComplex:
    """a**e for a big nonnegative integer e, with exact phase reduction.

    The phase of the result is (phase * e) mod 2*pi computed at
    precision extended by the bit length of e, so the reduction is
    exact up to one ulp of the working precision regardless of how
    large e is.  By convention 0**0 == 1.
    """
    if e < 0:
        raise ValueError("exponent must be nonnegative")
    prec = prec or get_precision()
    if e > prec.exponent_ceiling:
        raise ExponentBudgetExceeded(
            "exponent needs %d bits, budget is %d" % (e.bit_length(), prec.max_exponent_budget)
        )
    if e == 0:
        return LogComplex.one()
    if a.is_zero:
        return a
    logmag = a.logmag * e
    if a.phase == 0:
        return LogComplex(logmag, mpf(0))
    with mp.extraprec(e.bit_length() + 16):
        t = a.phase * e
        phase = _normalize_phase(t)
    return LogComplex(logmag, +phase)


def root_to_one(a: LogComplex, n: int, zero_ok: bool = False) -> LogComplex:
    """Principal n-th root: phase divides by n, so roots tend to 1.

    For a = r*exp(i*theta) with theta in (-pi, pi] this is the number
    r**(1/n) * exp(i*theta/n).  Raising the result back to the n-th
    power recovers a exactly in phase (the reduction never wraps).
    """
    if n < 1:
        raise ValueError("root order must be positive")
    if a.is_zero:
        if zero_ok:
            return a
        raise ZeroRoot("root of zero requires zero_ok=True")
    return LogComplex(a.logmag / n, a.phase / n)


def lc_add(a: LogComplex, b: LogComplex) -> LogComplex:
    """Sum, computed stably at any magnitude.

    The smaller summand is divided out against the larger, the bounded
    ratio is added to 1 in ordinary complex arithmetic, and the result
    is folded back.  When the ratio is below working precision the
    larger summand is returned unchanged.
    """
    if a.is_zero:
        return b
    if b.is_zero:
        return a
    if a.logmag == b.logmag:
        d = abs(a.phase - b.phase)
        if d == mp.pi or abs(d - 2 * mp.pi) == 0:  # exact opposites cancel
            return LogComplex.zero()
    big, small = (a, b) if a.logmag >= b.logmag else (b, a)
    gap = small.logmag - big.logmag
    # exp(gap) underflows the working precision: the sum is just `big`.
    if gap < -mpf(10) * mp.dps:
        return big
    ratio = mpmath.exp(mpc(gap, small.phase - big.phase))
    s = 1 + ratio
    if s == 0:
        return LogComplex.zero()
    return lc_mul(big, LogComplex.from_complex(s))


def lc_sub(a: LogComplex, b: LogComplex) -> LogComplex:
    return lc_add(a, b.negate())


def lc_close(a: LogComplex, b: LogComplex, rel_tol) -> bool:
    """Relative closeness |a-b| <= rel_tol * max(|a|, |b|), in log space."""
    if a.is_zero and b.is_zero:
        return True
    d = lc_sub(a, b)
    if d.is_zero:
        return True
    ref = max(a.logmag if not a.is_zero else _NINF, b.logmag if not b.is_zero else _NINF)
    return d.logmag - ref <= mpmath.log(mpf(rel_tol))


def lc_sign(z: LogComplex) -> LogComplex:
    """Unimodular sign z/|z|, with sign(0) = 1."""
    if z.is_zero:
        return LogComplex.one()
    return LogComplex(mpf(0), z.phase)
