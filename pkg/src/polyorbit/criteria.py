"""Numerical checker for the scalar-set transitivity criterion.

An instance supplies dense-set samples, a schedule, a scalar rule and a
correction map; the checker reports, per start/target pair and per
index k, the correction norm r1_k and the identity residual
r2_k = ||lam_k P^(n_k)(x + S_k(x)(y)) - y||, and judges each sequence
by the finite surrogate for convergence to zero: last value under
tolerance and non-increasing over the final third of indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import mpmath
from mpmath import mp, mpf

from .errors import GammaGrowthInsufficient, ZeroCoefficient
from .julia import classify
from .logcomplex import LogComplex, lc_div, lc_mul, root_to_one
from .polynomials import (FunctionalShift, HomPoly, PowerShift,
                          orbit_coefficients)
from .seqspace import SeqVector, forward_shift, vec_add
from .witness import (GammaSet, WitnessReport, _root_shift, residual_norm,
                      transitivity_witness, gamma_unbounded_witness)


@dataclass(frozen=True)
class CriterionInstance:
    """One concrete construction fed to the checker.

    witness(k, x, y) returns (w, lam) with w = x + S_k(x)(y); the
    checker derives r1 from ||w - x|| and r2 from the n_k-th image.
    """

    name: str
    P: HomPoly
    X0: tuple
    Y0: tuple
    schedule: Callable[[int], int]
    witness: Callable[[int, SeqVector, SeqVector], tuple]


def _trend_ok(seq, tol) -> bool:
    """Finite surrogate for -> 0: final value below tol, non-increasing
    over the last third (up to working-precision jitter)."""
    if not seq:
        return False
    if not seq[-1] < tol:
        return False
    third = seq[-(max(2, len(seq) // 3)):]
    jitter = mpf(10) ** (-(mp.dps - 15))
    return all(b <= a + jitter for a, b in zip(third, third[1:]))


def check_criterion(inst: CriterionInstance, K: int, tol) -> dict:
    tol = mpf(tol)
    pairs = []
    overall = True
    for xi, x in enumerate(inst.X0):
        for yi, y in enumerate(inst.Y0):
            r1s, r2s = [], []
            for k in range(1, K + 1):
                n_k = inst.schedule(k)
                w, lam = inst.witness(k, x, y)
                r1, s1 = residual_norm(w, x)
                img = inst.P.image(w, n_k).scale(lam)
                r2, s2 = residual_norm(img, y)
                r1s.append(r1 + s1)
                r2s.append(r2 + s2)
            ok = _trend_ok(r1s, tol) and _trend_ok(r2s, tol)
            overall = overall and ok
            pairs.append({
                "x_index": xi, "y_index": yi, "r1": r1s, "r2": r2s, "pass": ok,
            })
    return {"instance": inst.name, "K": K, "tol": tol, "pairs": pairs, "pass": overall}


# ---------------------------------------------------------------------------
# the named instances
# ---------------------------------------------------------------------------


def power_shift_roots_instance(m: int, X0: Sequence[SeqVector], Y0: Sequence[SeqVector],
                               gamma: GammaSet, name: str = "power_shift_roots") -> CriterionInstance:
    """Root-shift corrections on c_0: S_k(x)(y) = F^k(y)/lam_k**(1/m**k),
    lam_k from the unbounded ladder with lam_k**(1/m**k) -> infinity."""
    if gamma.kind != "unbounded_seq":
        raise GammaGrowthInsufficient("unbounded ladder required")
    space = X0[0].space
    P = PowerShift(m, space)

    def witness(k, x, y):
        big = m ** k
        lam = gamma.pick_with_logmag_at_least(big * mpmath.log(mpf(k + 2)))
        corr = _root_shift(y, k, m).scale(lc_div(LogComplex.one(), root_to_one(lam, big)))
        return vec_add(x, corr), lam

    return CriterionInstance(name, P, tuple(X0), tuple(Y0), lambda k: k, witness)


def functional_shift_instance(p, X0: Sequence[SeqVector], Y0: Sequence[SeqVector],
                              gamma: GammaSet, name: str = "functional_shift_unbounded") -> CriterionInstance:
    """Truncation-plus-correction on l_p with ladder scalars making
    |lam_k c_k(x)| -> infinity."""
    if gamma.kind != "unbounded_seq":
        raise GammaGrowthInsufficient("unbounded ladder required")
    from .seqspace import SpaceTag
    P = FunctionalShift(SpaceTag.lp(p))

    def witness(k, x, y):
        c = orbit_coefficients(x, k)[-1]
        if c.is_zero:
            raise ZeroCoefficient("start vector has a zero leading coordinate")
        lam = gamma.pick_with_logmag_at_least(
            mpmath.log(mpf(k) * max(mpf(1), y.norm())) - c.logmag)
        corr = forward_shift(y, k).scale(lc_div(LogComplex.one(), lc_mul(c, lam)))
        return vec_add(x.truncate(k), corr), lam

    return CriterionInstance(name, P, tuple(X0), tuple(Y0), lambda k: k, witness)


def sabotage_instance(p, X0: Sequence[SeqVector], Y0: Sequence[SeqVector],
                      name: str = "sabotage_identity_scalars") -> CriterionInstance:
    """Scalar rule lam_k = 1 with the correction clamped to norm 1/k.

    The clamp keeps the correction condition satisfied by construction;
    with basin starts the witnesses stay in the basin, their orbits
    die, and the identity residual settles at the target norm instead
    of zero: the criterion fails exactly as the limit-ball dichotomy
    dictates.
    """
    from .seqspace import SpaceTag
    P = FunctionalShift(SpaceTag.lp(p))
    one = LogComplex.one()

    def witness(k, x, y):
        c = orbit_coefficients(x, k)[-1]
        if c.is_zero:
            raise ZeroCoefficient("start vector has a zero leading coordinate")
        corr = forward_shift(y, k).scale(lc_div(one, c))
        cn = corr.norm()
        cap = mpf(1) / k
        if cn > cap:
            corr = corr.scale(cap / cn)
        return vec_add(x.truncate(k), corr), one

    return CriterionInstance(name, P, tuple(X0), tuple(Y0), lambda k: k, witness)


# ---------------------------------------------------------------------------
# transitivity probing
# ---------------------------------------------------------------------------


def probe_transitivity(P: HomPoly, U_center: SeqVector, V_center: SeqVector,
                       radius, gamma: GammaSet, budget: int = 12) -> dict:
    """Search for lam in the scalar set and n with lam P^n(U) meeting V.

    Tries the exact witness constructions first (their images hit the
    target exactly, so only the distance to the start needs to shrink
    inside U); reports exhaustion when no strategy lands within budget.
    """
    radius = mpf(radius)
    one = LogComplex.one()

    def hit(w, lam, n, strategy):
        return {"found": True, "lam": lam, "n": n, "witness": w, "strategy": strategy}

    # fixed-point shortcut: the center of U may already map into V
    for n in range(1, budget + 1):
        if gamma.contains(one):
            img = P.image(U_center, n)
            d, s = residual_norm(img, V_center)
            if d + s < radius:
                return hit(U_center, one, n, "orbit_of_center")

    if gamma.contains(one):
        for n in range(1, budget + 1):
            try:
                w, rep = transitivity_witness(P, U_center, V_center, n)
            except Exception:
                break
            if rep.residuals["distance_to_start"] < radius:
                return hit(w, one, n, "transitivity_witness")

    if gamma.kind == "unbounded_seq":
        for n in range(1, budget + 1):
            try:
                w, lam, rep = gamma_unbounded_witness(P, U_center, V_center, gamma, n)
            except Exception:
                break
            d, s = residual_norm(w, U_center)
            if d + s < radius:
                return hit(w, lam, n, "gamma_unbounded_witness")

    return {"found": False, "strategy": "exhausted", "budget": budget,
            "u_classification": classify(P, U_center).verdict}
