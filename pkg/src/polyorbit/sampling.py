"""Seeded samplers shared by the CLI experiments and the test suite.

Everything is driven by random.Random(seed): Python floats convert to
mpmath reals exactly, so runs reproduce bit for bit at a fixed working
precision.
"""

from __future__ import annotations

import random

import mpmath
from mpmath import mp, mpc, mpf

from .logcomplex import LogComplex
from .polynomials import fixed_vector
from .seqspace import SeqVector, SpaceTag, TailModel


def unit_phase(rng: random.Random) -> mpf:
    return (2 * mpf(rng.random()) - 1) * mp.pi


def complex_in_annulus(rng: random.Random, r_min=0.1, r_max=2.0) -> mpc:
    r = mpf(rng.uniform(float(r_min), float(r_max)))
    th = unit_phase(rng)
    return r * mpmath.exp(mpc(0, th))


def random_vector(space: SpaceTag, rng: random.Random, head_len: int = 6,
                  tail: str = "geometric", scale=1) -> SeqVector:
    """Random head of annulus values; geometric or zero tail."""
    head = [complex_in_annulus(rng) for _ in range(head_len)]
    if tail == "geometric":
        first = complex_in_annulus(rng, 0.1, 1.0)
        ratio = mpf(rng.uniform(0.2, 0.7))
        t = TailModel.geometric(first, ratio)
    elif tail == "zero":
        t = TailModel.zero()
    else:
        raise ValueError("tail must be 'geometric' or 'zero'")
    v = SeqVector.make(space, head, t)
    return v if scale == 1 else v.scale(scale)


def random_with_norm(space: SpaceTag, rng: random.Random, target_norm,
                     head_len: int = 6, tail: str = "geometric") -> SeqVector:
    v = random_vector(space, rng, head_len, tail)
    return v.scale(mpf(target_norm) / v.norm())


def random_julia_dominating(p, rng: random.Random, bumps: int = 4) -> SeqVector:
    """A certified Julia start: the fixed vector with random unimodular
    phases and a few amplitude factors >= 1 on leading coordinates.

    Coordinatewise it dominates the fixed vector, so the domination
    certificate applies directly.
    """
    ref = fixed_vector(p)
    phase = unit_phase(rng)
    head = []
    for j in range(1, bumps + 1):
        amp = mpf(rng.uniform(1.0, 1.6))
        th = unit_phase(rng)
        head.append(ref.coord(j).to_mpc() * amp * mpmath.exp(mpc(0, th)))
    tail = ref.materialize(bumps).tail
    rotated = TailModel("geometric",
                        first=LogComplex(tail.first.logmag, LogComplex.from_polar(0, phase).phase),
                        ratio=tail.ratio)
    return SeqVector.make(SpaceTag.lp(p), head, rotated)


def random_nonzero_start(p, rng: random.Random, head_len: int = 5) -> SeqVector:
    """All coordinates nonzero (head annulus values, geometric tail with
    positive ratio); suitable for coefficient-based corrections."""
    head = [complex_in_annulus(rng, 0.5, 1.8) for _ in range(head_len)]
    first = complex_in_annulus(rng, 0.3, 1.0)
    ratio = mpf(rng.uniform(0.3, 0.6))
    return SeqVector.make(SpaceTag.lp(p), head, TailModel.geometric(first, ratio))


def random_finite_target(space: SpaceTag, rng: random.Random, head_len: int = 4) -> SeqVector:
    return SeqVector.make(space, [complex_in_annulus(rng, 0.2, 1.5) for _ in range(head_len)])
