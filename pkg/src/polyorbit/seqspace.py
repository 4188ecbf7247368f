"""Sequence-space vectors with closed-form analytic tails.

A SeqVector is a finite head of log-polar coordinates plus a symbolic
tail (zero, constant, geometric, or inverse factorial power).  Tails
stay symbolic because membership certificates quantify over *all*
coordinates; a truncated array can never certify anything.  Norms of
the supported tails have closed forms (geometric series) or rigorously
bounded remainders (factorial ratio test), so vector norms are exact to
working precision rather than truncated.

Hosts are the classical Banach sequence spaces: l_p (p >= 1), c_0, the
space c of convergent sequences with the sup norm, and the finite
dimensional sup-norm space used by the coordinatewise-square example.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import mpmath
from mpmath import mp, mpf

from .errors import NotInDomain, SpaceMismatch, TailNotRepresentable, WrongSpace
from .logcomplex import LogComplex, lc_add, lc_mul

_NINF = mpf("-inf")


def log_factorial(n: int) -> mpf:
    """log(n!) valid for arbitrarily large n."""
    if n < 0:
        raise ValueError("negative factorial")
    return mpmath.loggamma(mpf(n) + 1)


# ---------------------------------------------------------------------------
# host spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpaceTag:
    """Host space: kind in {lp, c0, c, linf_finite}."""

    kind: str
    p: mpf = None  # type: ignore[assignment]
    dim: int = 0

    @staticmethod
    def lp(p) -> "SpaceTag":
        p = mpf(p)
        if not p >= 1:
            raise ValueError("p must be >= 1")
        return SpaceTag("lp", p=p)

    @staticmethod
    def c0() -> "SpaceTag":
        return SpaceTag("c0")

    @staticmethod
    def c() -> "SpaceTag":
        return SpaceTag("c")

    @staticmethod
    def linf(dim: int) -> "SpaceTag":
        if dim < 1:
            raise ValueError("dim must be positive")
        return SpaceTag("linf_finite", dim=dim)

    @property
    def sup_normed(self) -> bool:
        return self.kind in ("c0", "c", "linf_finite")

    def describe(self) -> str:
        if self.kind == "lp":
            return "l_%s" % mpmath.nstr(self.p, 6)
        if self.kind == "linf_finite":
            return "linf(%d)" % self.dim
        return self.kind

    def to_json(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "lp":
            d["p"] = str(self.p)
        if self.kind == "linf_finite":
            d["dim"] = self.dim
        return d

    @staticmethod
    def from_json(d: dict) -> "SpaceTag":
        if d["kind"] == "lp":
            return SpaceTag.lp(mpf(d["p"]))
        if d["kind"] == "linf_finite":
            return SpaceTag.linf(int(d["dim"]))
        if d["kind"] == "c0":
            return SpaceTag.c0()
        if d["kind"] == "c":
            return SpaceTag.c()
        raise WrongSpace("unknown space kind %r" % d["kind"])


# ---------------------------------------------------------------------------
# tails
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TailModel:
    """Symbolic tail.  Local index k = 0, 1, ... counts from tail start.

    zero:             all coordinates 0
    constant:         value (c and linf hosts only)
    geometric:        first * ratio**k, |ratio| < 1
    factorial_power:  scale / ((k + 1 + offset)! ** power)
    """

    kind: str
    value: LogComplex = None  # type: ignore[assignment]
    first: LogComplex = None  # type: ignore[assignment]
    ratio: LogComplex = None  # type: ignore[assignment]
    offset: int = 0
    power: int = 1
    scale: LogComplex = None  # type: ignore[assignment]

    @staticmethod
    def zero() -> "TailModel":
        return TailModel("zero")

    @staticmethod
    def constant(value) -> "TailModel":
        return TailModel("constant", value=LogComplex.from_complex(value))

    @staticmethod
    def geometric(first, ratio) -> "TailModel":
        first = LogComplex.from_complex(first)
        ratio = LogComplex.from_complex(ratio)
        if not ratio.logmag < 0:
            raise ValueError("geometric tail needs |ratio| < 1")
        if first.is_zero:
            return TailModel.zero()
        return TailModel("geometric", first=first, ratio=ratio)

    @staticmethod
    def factorial_power(offset: int, power: int, scale) -> "TailModel":
        if offset < 0 or power < 1:
            raise ValueError("offset >= 0 and power >= 1 required")
        scale = LogComplex.from_complex(scale)
        if scale.is_zero:
            return TailModel.zero()
        return TailModel("factorial_power", offset=offset, power=power, scale=scale)

    # -- pointwise ----------------------------------------------------------

    def coord(self, k: int) -> LogComplex:
        if self.kind == "zero":
            return LogComplex.zero()
        if self.kind == "constant":
            return self.value
        if self.kind == "geometric":
            return LogComplex(
                self.first.logmag + k * self.ratio.logmag,
                LogComplex.from_polar(0, self.first.phase + k * self.ratio.phase).phase,
            )
        lm = self.scale.logmag - self.power * log_factorial(k + 1 + self.offset)
        return LogComplex(lm, self.scale.phase)

    def log_coord_mag(self, k: int) -> mpf:
        """log|coord(k)| without building the phase."""
        if self.kind == "zero":
            return _NINF
        if self.kind == "constant":
            return self.value.logmag
        if self.kind == "geometric":
            return self.first.logmag + k * self.ratio.logmag
        return self.scale.logmag - self.power * log_factorial(k + 1 + self.offset)

    # -- structure ----------------------------------------------------------

    def advance(self, d: int) -> "TailModel":
        """Tail seen from d positions further in: coord k -> coord(k + d)."""
        if d == 0 or self.kind in ("zero", "constant"):
            return self
        if self.kind == "geometric":
            first = lc_mul(self.first, LogComplex(d * self.ratio.logmag,
                                                  LogComplex.from_polar(0, d * self.ratio.phase).phase))
            return TailModel("geometric", first=first, ratio=self.ratio)
        return TailModel("factorial_power", offset=self.offset + d,
                         power=self.power, scale=self.scale)

    def scale_by(self, s: LogComplex) -> "TailModel":
        if s.is_zero:
            return TailModel.zero()
        if self.kind == "zero":
            return self
        if self.kind == "constant":
            return TailModel("constant", value=lc_mul(self.value, s))
        if self.kind == "geometric":
            return TailModel("geometric", first=lc_mul(self.first, s), ratio=self.ratio)
        return TailModel("factorial_power", offset=self.offset, power=self.power,
                         scale=lc_mul(self.scale, s))

    def admissible_for(self, space: SpaceTag) -> bool:
        if self.kind == "constant":
            return space.kind in ("c", "linf_finite")
        return True

    @property
    def limit(self) -> LogComplex:
        return self.value if self.kind == "constant" else LogComplex.zero()

    # -- norms --------------------------------------------------------------

    def log_pth_power_sum(self, p: mpf) -> mpf:
        """log of sum_k |coord(k)|**p, exact or rigorously truncated."""
        if self.kind == "zero":
            return _NINF
        if self.kind == "constant":
            raise NotInDomain("constant tail is not p-summable")
        if self.kind == "geometric":
            r = p * self.ratio.logmag  # < 0
            return p * self.first.logmag - mpmath.log(-mpmath.expm1(r))
        # factorial power: terms decay superexponentially; once successive
        # terms at least halve, the remainder is < 2 * (next term).
        lead = p * (self.scale.logmag - self.power * log_factorial(1 + self.offset))
        total = mpf(1)  # in units of exp(lead)
        k = 1
        cutoff = mpf(10) ** (-(mp.dps + 10))
        while True:
            t = p * (self.scale.logmag - self.power * log_factorial(k + 1 + self.offset))
            rel = mpmath.exp(t - lead)
            total += rel
            if rel < cutoff * total and k > 1:
                break
            k += 1
            if k > 100000:
                raise TailNotRepresentable("factorial tail sum did not settle")
        return lead + mpmath.log(total)

    def log_sup(self) -> mpf:
        if self.kind == "zero":
            return _NINF
        if self.kind == "constant":
            return self.value.logmag
        if self.kind == "geometric":
            return self.first.logmag
        return self.scale.logmag - self.power * log_factorial(1 + self.offset)

    def log_l1_from(self, k0: int) -> mpf:
        """log of sum_{k >= k0} |coord(k)|; used for truncation budgets."""
        return self.advance(k0).log_pth_power_sum(mpf(1))

    def to_json(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "constant":
            d["value"] = self.value.serialize()
        elif self.kind == "geometric":
            d["first"] = self.first.serialize()
            d["ratio"] = self.ratio.serialize()
        elif self.kind == "factorial_power":
            d.update(offset=self.offset, power=self.power, scale=self.scale.serialize())
        return d

    @staticmethod
    def from_json(d: dict) -> "TailModel":
        kind = d["kind"]
        if kind == "zero":
            return TailModel.zero()
        if kind == "constant":
            return TailModel("constant", value=LogComplex.deserialize(d["value"]))
        if kind == "geometric":
            return TailModel("geometric", first=LogComplex.deserialize(d["first"]),
                             ratio=LogComplex.deserialize(d["ratio"]))
        if kind == "factorial_power":
            return TailModel("factorial_power", offset=int(d["offset"]), power=int(d["power"]),
                             scale=LogComplex.deserialize(d["scale"]))
        raise ValueError("unknown tail kind %r" % kind)


# ---------------------------------------------------------------------------
# vectors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeqVector:
    """Finite head (coordinates 1..h) plus tail from coordinate h+1 on."""

    space: SpaceTag
    head: tuple
    tail: TailModel

    def __post_init__(self):
        if not self.tail.admissible_for(self.space):
            raise WrongSpace("tail %s not admissible in %s" % (self.tail.kind, self.space.describe()))
        if self.space.kind == "linf_finite" and self.head_len > self.space.dim:
            raise WrongSpace("head longer than the finite dimension")

    @staticmethod
    def make(space: SpaceTag, head: Iterable = (), tail: TailModel | None = None) -> "SeqVector":
        hd = tuple(LogComplex.from_complex(z) for z in head)
        return SeqVector(space, hd, tail if tail is not None else TailModel.zero())

    @property
    def head_len(self) -> int:
        return len(self.head)

    @property
    def tail_start(self) -> int:
        return self.head_len + 1

    def coord(self, j: int) -> LogComplex:
        """Coordinate functional e_j'; j is 1-based."""
        if j < 1:
            raise ValueError("coordinates are 1-based")
        if self.space.kind == "linf_finite" and j > self.space.dim:
            return LogComplex.zero()
        if j <= self.head_len:
            return self.head[j - 1]
        return self.tail.coord(j - self.tail_start)

    def log_coord_mag(self, j: int) -> mpf:
        if j <= self.head_len:
            return self.head[j - 1].logmag
        if self.space.kind == "linf_finite" and j > self.space.dim:
            return _NINF
        return self.tail.log_coord_mag(j - self.tail_start)

    def materialize(self, upto: int) -> "SeqVector":
        """Extend the head through coordinate `upto`; values unchanged."""
        if upto <= self.head_len:
            return self
        extra = tuple(self.tail.coord(k) for k in range(upto - self.head_len))
        return SeqVector(self.space, self.head + extra, self.tail.advance(upto - self.head_len))

    def truncate(self, n: int) -> "SeqVector":
        """Keep coordinates 1..n, zero tail."""
        v = self.materialize(n) if n > self.head_len else self
        return SeqVector(self.space, v.head[:n], TailModel.zero())

    def scale(self, s) -> "SeqVector":
        s = LogComplex.from_complex(s)
        return SeqVector(self.space, tuple(lc_mul(z, s) for z in self.head), self.tail.scale_by(s))

    def is_finitely_supported(self) -> bool:
        return self.tail.kind == "zero"

    def support_end(self) -> int:
        """Last nonzero head coordinate (0 if none); tail must be zero."""
        if self.tail.kind != "zero":
            raise NotInDomain("infinite support")
        last = 0
        for i, z in enumerate(self.head, start=1):
            if not z.is_zero:
                last = i
        return last

    # -- norms --------------------------------------------------------------

    def log_norm(self) -> mpf:
        space = self.space
        if space.kind == "lp":
            return self._log_norm_p(space.p)
        if space.kind == "linf_finite":
            mags = [self.log_coord_mag(j) for j in range(1, space.dim + 1)]
            return max(mags) if mags else _NINF
        mags = [z.logmag for z in self.head]
        mags.append(self.tail.log_sup())
        return max(mags)

    def _log_norm_p(self, p: mpf) -> mpf:
        terms = [p * z.logmag for z in self.head if not z.is_zero]
        tail_term = self.tail.log_pth_power_sum(p) if self.tail.kind != "zero" else _NINF
        if tail_term != _NINF:
            terms.append(tail_term)
        if not terms:
            return _NINF
        m = max(terms)
        acc = mpf(0)
        for t in terms:
            acc += mpmath.exp(t - m)
        return (m + mpmath.log(acc)) / p

    def norm(self) -> mpf:
        ln = self.log_norm()
        return mpf(0) if ln == _NINF else mpmath.exp(ln)

    def limit_value(self) -> LogComplex:
        if self.space.kind != "c":
            raise WrongSpace("limit_value is only defined on c")
        return self.tail.limit

    def to_json(self) -> dict:
        return {
            "space": self.space.to_json(),
            "head": [z.serialize() for z in self.head],
            "tail": self.tail.to_json(),
        }

    @staticmethod
    def from_json(d: dict) -> "SeqVector":
        return SeqVector(
            SpaceTag.from_json(d["space"]),
            tuple(LogComplex.deserialize(s) for s in d["head"]),
            TailModel.from_json(d["tail"]),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @staticmethod
    def loads(text: str) -> "SeqVector":
        return SeqVector.from_json(json.loads(text))


def zero_vector(space: SpaceTag) -> SeqVector:
    return SeqVector.make(space)


def basis_vector(space: SpaceTag, j: int, value=1) -> SeqVector:
    head = [0] * j
    head[j - 1] = value
    return SeqVector.make(space, head)


# ---------------------------------------------------------------------------
# shifts
# ---------------------------------------------------------------------------


def _weight_log(i: int, weight_offset: int) -> mpf:
    """log of the inverse fourth power weight applied at coordinate i."""
    return -4 * mpmath.log(mpf(i + weight_offset))


def backward_shift(v: SeqVector, weight_offset: int | None = None) -> SeqVector:
    """B(v)_i = v_{i+1}, optionally weighted by 1/(i + weight_offset)**4.

    The unweighted shift preserves every tail model exactly.  The
    weighted shift has no closed-form tail, so the head is extended
    until the dropped tail mass is below the truncation budget.
    """
    if weight_offset is None:
        if v.head_len == 0:
            return SeqVector(v.space, (), v.tail.advance(1))
        return SeqVector(v.space, v.head[1:], v.tail)
    if v.space.kind != "lp":
        raise WrongSpace("weighted shift is defined on l_p hosts")
    if v.tail.kind == "constant":
        raise TailNotRepresentable("constant tail under a weighted shift")
    w = _materialize_for_weights(v)
    head = tuple(
        lc_mul(w.head[i], LogComplex(_weight_log(i, weight_offset), mpf(0)))
        for i in range(1, w.head_len)
    )
    return SeqVector(v.space, head, TailModel.zero())


def forward_shift(v: SeqVector, n: int = 1) -> SeqVector:
    """S**n:  n leading zeros, coordinates move right, tail intact."""
    if n < 0:
        raise ValueError("shift count must be nonnegative")
    zeros = tuple(LogComplex.zero() for _ in range(n))
    return SeqVector(v.space, zeros + v.head, v.tail)


def weighted_forward(v: SeqVector, k: int, weight_offset: int = 1) -> SeqVector:
    """Formal inverse of the weighted backward shift, applied k times.

    Coordinate j > k of the image is v_{j-k} * ((j-1+woff)...(j-k+woff))**4;
    for woff = 1 that is (j!/(j-k)!)**4 * v_{j-k}.  Decaying tails
    (geometric, inverse factorial) stay summable because the weight
    factor is polynomial in j for fixed k; constant tails do not.
    """
    if k < 0:
        raise ValueError("shift count must be nonnegative")
    if k == 0:
        return v
    if v.space.kind != "lp":
        raise WrongSpace("weighted shift is defined on l_p hosts")
    if v.tail.kind == "constant":
        raise NotInDomain("constant tail is outside the weighted shift domain")

    def log_gain(j: int) -> mpf:
        if weight_offset == 1:
            return 4 * (log_factorial(j) - log_factorial(j - k))
        acc = mpf(0)
        for t in range(1, k + 1):
            acc += 4 * mpmath.log(mpf(j - t + weight_offset))
        return acc

    head = [LogComplex.zero()] * k
    for i in range(v.head_len):
        j = k + i + 1
        head.append(lc_mul(v.head[i], LogComplex(log_gain(j), mpf(0))))
    if v.tail.kind != "zero":
        cutoff = -(mpf(10) * (mp.dps + 10))  # log of the drop threshold, relative
        lead = None
        kk = 0
        while True:
            j = k + v.head_len + kk + 1
            val = lc_mul(v.tail.coord(kk), LogComplex(log_gain(j), mpf(0)))
            head.append(val)
            lm = val.logmag
            if lead is None or lm > lead:
                lead = lm
            prev = head[-2].logmag if kk > 0 else _NINF
            settled = kk > 2 and lm < prev and (lm - lead) < cutoff
            if settled:
                break
            kk += 1
            if kk > 100000:
                raise NotInDomain("weighted forward image did not converge")
    return SeqVector(v.space, tuple(head), TailModel.zero())


def _materialize_for_weights(v: SeqVector) -> SeqVector:
    """Head-extend so the dropped weighted tail mass is negligible."""
    if v.tail.kind == "zero":
        return v
    lead = v.log_norm()
    budget = lead - mpf(10) * (mp.dps + 10)
    k = 0
    step = 16
    while True:
        rest = v.tail.log_l1_from(k)
        if rest < budget:
            break
        k += step
        if k > 200000:
            raise TailNotRepresentable("weighted shift truncation budget not met")
    return v.materialize(v.head_len + k)


# ---------------------------------------------------------------------------
# sums (restricted to the representable cases)
# ---------------------------------------------------------------------------


def vec_add(u: SeqVector, v: SeqVector) -> SeqVector:
    """u + v when the tails combine in closed form.

    Heads are aligned to a common length; tails then combine if either
    is zero, both are constant, or both are geometric with the same
    ratio.  Anything else raises TailNotRepresentable.
    """
    if u.space != v.space:
        raise SpaceMismatch("adding vectors of different hosts")
    L = max(u.head_len, v.head_len)
    a = u.materialize(L)
    b = v.materialize(L)
    head = tuple(lc_add(x, y) for x, y in zip(a.head, b.head))
    ta, tb = a.tail, b.tail
    if ta.kind == "zero":
        tail = tb
    elif tb.kind == "zero":
        tail = ta
    elif ta.kind == "constant" and tb.kind == "constant":
        tail = TailModel("constant", value=lc_add(ta.value, tb.value))
    elif (ta.kind == "geometric" and tb.kind == "geometric"
          and ta.ratio == tb.ratio):
        tail = TailModel("geometric", first=lc_add(ta.first, tb.first), ratio=ta.ratio)
    elif (ta.kind == "factorial_power" and tb.kind == "factorial_power"
          and ta.offset == tb.offset and ta.power == tb.power):
        s = lc_add(ta.scale, tb.scale)
        tail = TailModel.zero() if s.is_zero else TailModel(
            "factorial_power", offset=ta.offset, power=ta.power, scale=s)
    else:
        raise TailNotRepresentable("tail sum %s + %s" % (ta.kind, tb.kind))
    return SeqVector(u.space, head, tail)


def vec_sub(u: SeqVector, v: SeqVector) -> SeqVector:
    return vec_add(u, v.scale(-1))


def distance(u: SeqVector, v: SeqVector) -> mpf:
    return vec_sub(u, v).norm()


def log_distance(u: SeqVector, v: SeqVector) -> mpf:
    return vec_sub(u, v).log_norm()
