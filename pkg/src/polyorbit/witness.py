"""Constructive witnesses for the cyclicity properties.

Each operation here builds an explicit vector together with the
residual it must satisfy and the bound the residual is checked
against: periodic points as geometric block sums, transitivity
witnesses as truncation-plus-correction, dense projections through the
signed coordinatewise max, weak-neighborhood witnesses, scalar-set
witnesses for sets accumulating at zero or unbounded, the greedy
schedule for the disk-supercyclic vector on the space of convergent
sequences, phase-doubling targeting on the circle, numerical orbit
sampling, and the sensitivity separation construction.

All witnesses report {construction, inputs, residuals, bounds, pass}
and serialize to JSON.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import mpmath
from mpmath import mp, mpc, mpf

from .errors import (BudgetExhausted, CoefficientTooSmall, GammaGrowthInsufficient,
                     GammaTooLarge, IncomparableTails, NoKernelVector, NotInDomain,
                     NotInShiftDomain, ScheduleSearchExhausted, SpaceMismatch,
                     TailNotRepresentable, ZeroCoefficient)
from .julia import Certificate, certify_domination
from .logcomplex import LogComplex, lc_add, lc_div, lc_ipow, lc_mul, lc_sign, lc_sub, root_to_one
from .polynomials import (FunctionalShift, HomPoly, PowerShift,
                          WeightedFunctionalShift, fixed_vector,
                          orbit_coefficients, weight_coefficients)
from .seqspace import (SeqVector, SpaceTag, TailModel, backward_shift,
                       forward_shift, vec_add, vec_sub, weighted_forward)

_NINF = mpf("-inf")


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass
class WitnessReport:
    construction: str
    inputs: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        for name, r in self.residuals.items():
            b = self.bounds.get(name)
            if b is not None and not (r <= b):
                return False
        return True

    def to_json(self) -> dict:
        def conv(v):
            if isinstance(v, mpf):
                return mpmath.nstr(v, mp.dps + 8)
            if isinstance(v, LogComplex):
                return v.serialize()
            if isinstance(v, SeqVector):
                return v.to_json()
            if isinstance(v, Certificate):
                return v.to_json()
            if isinstance(v, dict):
                return {k: conv(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [conv(x) for x in v]
            return v

        return {
            "construction": self.construction,
            "inputs": conv(self.inputs),
            "residuals": conv(self.residuals),
            "bounds": conv(self.bounds),
            "pass": self.passed,
            "extra": conv(self.extra),
        }


def residual_norm(u: SeqVector, v: SeqVector):
    """||u - v|| with a rigorous slack when tails do not combine.

    Returns (value, slack): the true norm lies in [value - slack,
    value + slack].  Exact (slack 0) whenever the tail difference is
    representable; otherwise heads are extended until both tail masses
    drop below the working cutoff.
    """
    try:
        return vec_sub(u, v).norm(), mpf(0)
    except TailNotRepresentable:
        pass
    cutoff_log = -mpf(10) * (mp.dps // 2 + 10)
    scale = max(u.log_norm(), v.log_norm())
    L = max(u.head_len, v.head_len, 8)
    for _ in range(40):
        ru = u.tail.log_l1_from(max(L - u.head_len, 0)) if u.tail.kind != "zero" else _NINF
        rv = v.tail.log_l1_from(max(L - v.head_len, 0)) if v.tail.kind != "zero" else _NINF
        worst = max(ru, rv)
        if worst == _NINF or worst - scale < cutoff_log:
            break
        L *= 2
    else:
        raise TailNotRepresentable("residual tails would not decay")
    du = u.materialize(L).truncate(L)
    dv = v.materialize(L).truncate(L)
    val = vec_sub(du, dv).norm()
    slack = mpf(0)
    for t, hl in ((u.tail, u.head_len), (v.tail, v.head_len)):
        if t.kind != "zero":
            slack += mpmath.exp(t.log_l1_from(max(L - hl, 0)))
    return val, slack


# ---------------------------------------------------------------------------
# scalar sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GammaSet:
    """Scalar sets: unbounded geometric ladders, ladders accumulating at
    zero, the open unit disk, the unit circle, the positive half line.
    """

    kind: str  # unbounded_seq | zero_accumulating | unit_disk | circle | positive_half_line
    base: LogComplex = None  # type: ignore[assignment]
    step: LogComplex = None  # type: ignore[assignment]

    @staticmethod
    def unbounded(base=2, step=2) -> "GammaSet":
        b = LogComplex.from_complex(base)
        s = LogComplex.from_complex(step)
        if not s.logmag > 0:
            raise ValueError("|step| > 1 needed for an unbounded ladder")
        return GammaSet("unbounded_seq", base=b, step=s)

    @staticmethod
    def zero_accumulating(base=1, step=mpf("0.5")) -> "GammaSet":
        b = LogComplex.from_complex(base)
        s = LogComplex.from_complex(step)
        if not s.logmag < 0:
            raise ValueError("|step| < 1 needed to accumulate at zero")
        return GammaSet("zero_accumulating", base=b, step=s)

    @staticmethod
    def unit_disk() -> "GammaSet":
        return GammaSet("unit_disk")

    @staticmethod
    def circle() -> "GammaSet":
        return GammaSet("circle")

    @staticmethod
    def positive_half_line() -> "GammaSet":
        return GammaSet("positive_half_line")

    def element(self, k: int) -> LogComplex:
        if self.kind not in ("unbounded_seq", "zero_accumulating"):
            raise NotInDomain("only ladder sets enumerate")
        return lc_mul(self.base, lc_ipow(self.step, k))

    def pick_with_logmag_at_least(self, bound: mpf) -> LogComplex:
        if self.kind != "unbounded_seq":
            raise GammaGrowthInsufficient("set is not an unbounded ladder")
        k = int(max(0, mpmath.ceil((bound - self.base.logmag) / self.step.logmag)))
        return self.element(k)

    def pick_with_logmag_at_most(self, bound: mpf) -> LogComplex:
        if self.kind != "zero_accumulating":
            raise GammaTooLarge("set does not accumulate at zero")
        k = int(max(0, mpmath.ceil((bound - self.base.logmag) / self.step.logmag)))
        return self.element(k)

    def contains(self, z: LogComplex, tol=mpf("1e-30")) -> bool:
        if self.kind == "unit_disk":
            return z.logmag < 0
        if self.kind == "circle":
            return abs(z.logmag) <= tol
        if self.kind == "positive_half_line":
            return (not z.is_zero) and abs(z.phase) <= tol
        # ladder membership: match an enumerated element
        if z.is_zero:
            return False
        k = mpmath.nint((z.logmag - self.base.logmag) / self.step.logmag)
        if k < 0:
            return False
        e = self.element(int(k))
        return abs(e.logmag - z.logmag) <= tol and abs(e.phase - z.phase) <= tol


# ---------------------------------------------------------------------------
# signed max merge (the sign(0)=1 convention lives here)
# ---------------------------------------------------------------------------


def _constant_tail_phase(t: TailModel) -> Optional[mpf]:
    if t.kind == "zero":
        return mpf(0)  # sign(0) = 1
    if t.kind == "constant":
        return t.value.phase
    if t.kind == "geometric":
        return t.first.phase if t.ratio.phase == 0 else None
    return t.scale.phase


def signed_max_merge(x: SeqVector, ref: SeqVector):
    """y_i = sign(x_i) * max(|x_i|, |ref_i|), with sign(0) = 1.

    Works coordinatewise on materialized heads; past a computed index
    one of the two tails dominates forever, and the merged tail is
    either x's own tail or ref's magnitudes carrying x's (necessarily
    constant) tail phase.  Raises IncomparableTails when x's tail phase
    varies and ref's tail wins infinitely often.
    """
    if x.space != ref.space:
        raise SpaceMismatch("merge across hosts")
    from .julia import _tail_dominates  # shared comparison core

    L = max(x.head_len, ref.head_len)
    for _ in range(30):
        a = x.materialize(L)
        b = ref.materialize(L)
        ok_x, kx = _tail_dominates(a.tail, b.tail)
        if ok_x:
            winner = "x"
            break
        ok_r, kr = _tail_dominates(b.tail, a.tail)
        if ok_r:
            winner = "ref"
            break
        L += max(kx, kr) + 16
    else:
        raise IncomparableTails("no eventual winner within the scan budget")

    head = []
    for i in range(1, L + 1):
        xi, ri = a.coord(i), b.coord(i)
        if xi.logmag >= ri.logmag:
            head.append(xi if not xi.is_zero else lc_mul(lc_sign(xi), ri))
        else:
            head.append(lc_mul(lc_sign(xi), LogComplex(ri.logmag, mpf(0))))
    if winner == "x":
        tail = a.tail
    else:
        phase = _constant_tail_phase(a.tail)
        if phase is None:
            raise IncomparableTails("varying tail phase under a dominating reference")
        t = b.tail
        if t.kind == "constant":
            tail = TailModel("constant", value=LogComplex(t.value.logmag, phase))
        elif t.kind == "geometric":
            tail = TailModel("geometric",
                             first=LogComplex(t.first.logmag, phase),
                             ratio=LogComplex(t.ratio.logmag, mpf(0)))
        elif t.kind == "factorial_power":
            tail = TailModel("factorial_power", offset=t.offset, power=t.power,
                             scale=LogComplex(t.scale.logmag, phase))
        else:
            tail = t
    return SeqVector(x.space, tuple(head), tail)


# ---------------------------------------------------------------------------
# periodic points
# ---------------------------------------------------------------------------


def periodic_point(P: HomPoly, y: SeqVector, n: int):
    """The n-periodic vector built as the geometric sum of shifted blocks.

    Blocks are S^{ni}(y^n) / c^i with c the n-th orbit coefficient of
    y; |c| > 1 makes the series geometric.  The weighted shift grows
    block norms factorially in the block index, so no weighted analogue
    converges and the weighted family is rejected.
    """
    if isinstance(P, WeightedFunctionalShift):
        raise NotInDomain(
            "weighted forward blocks grow factorially; the periodic series diverges")
    if not isinstance(P, FunctionalShift):
        raise NotInDomain("periodic block construction targets the functional shift")
    P._check_space(y)
    if n < 1:
        raise ValueError("period must be positive")
    c = orbit_coefficients(y, n)[-1]
    if c.is_zero or not c.logmag > 0:
        raise CoefficientTooSmall("need |c_n(y)| > 1 for the block series")
    yn = y.truncate(n)
    log_target = -mpf(mp.dps - 12) * mpmath.log(10)
    blocks = int(mpmath.ceil(-log_target / c.logmag)) + 2
    inv_c = lc_div(LogComplex.one(), c)
    head = []
    factor = LogComplex.one()
    for i in range(blocks + 1):
        for j in range(n):
            head.append(lc_mul(yn.head[j] if j < yn.head_len else LogComplex.zero(), factor))
        factor = lc_mul(factor, inv_c)
    tilde = SeqVector(y.space, tuple(head), TailModel.zero())

    img = P.image(tilde, n)
    res, slack = residual_norm(img, tilde)
    tnorm = tilde.norm()
    rel = (res + slack) / tnorm
    dist, dslack = residual_norm(tilde, yn)
    geo_bound = y.norm() / (mpmath.exp(c.logmag) - 1)
    report = WitnessReport(
        "periodic_point",
        inputs={"n": n, "coeff_logmag": c.logmag, "blocks": blocks},
        residuals={"relative_periodicity": rel, "distance_to_truncation": dist + dslack},
        bounds={"relative_periodicity": mpf(10) ** (-(mp.dps - 15)),
                "distance_to_truncation": geo_bound + mpf(10) ** (-(mp.dps - 15))},
        extra={"series_remainder": mpmath.exp(log_target) * y.norm()},
    )
    return tilde, report


# ---------------------------------------------------------------------------
# transitivity witnesses
# ---------------------------------------------------------------------------


def transitivity_witness(P: HomPoly, x: SeqVector, y: SeqVector, n: int):
    """x^n + S^n(y)/c_n(x) (weighted: S_w^n(y)/(c_n(x) c_n(W))).

    The n-th image of the witness equals y exactly in block algebra;
    the report carries the numerical residual and the distance to x.
    """
    if n < 1:
        raise ValueError("n must be positive")
    P._check_space(x)
    P._check_space(y)
    if isinstance(P, FunctionalShift):
        c = orbit_coefficients(x, n)[-1]
        if c.is_zero:
            raise ZeroCoefficient("c_n(x) = 0: correction undefined")
        corr = forward_shift(y, n).scale(lc_div(LogComplex.one(), c))
    elif isinstance(P, WeightedFunctionalShift):
        c = orbit_coefficients(x, n)[-1]
        if c.is_zero:
            raise ZeroCoefficient("c_n(x) = 0: correction undefined")
        w = weight_coefficients(n, P.weight_offset)[-1]
        c = lc_mul(c, w)
        if y.tail.kind == "constant":
            raise NotInShiftDomain("target tail outside the weighted shift domain")
        corr = weighted_forward(y, n, P.weight_offset).scale(lc_div(LogComplex.one(), c))
    else:
        raise NotInDomain("transitivity correction targets the shift families")
    witness = vec_add(x.truncate(n), corr)
    img = P.image(witness, n)
    res, slack = residual_norm(img, y)
    dist, dslack = residual_norm(witness, x)
    tail_dist, _ = residual_norm(x, x.truncate(n))
    bound = tail_dist + mpmath.exp(y.log_norm() - c.logmag)
    report = WitnessReport(
        "transitivity_witness",
        inputs={"n": n, "coeff_logmag": c.logmag},
        residuals={"image_vs_target": res + slack, "distance_to_start": dist + dslack},
        bounds={"image_vs_target": mpf(10) ** (-(mp.dps - 15)) * max(mpf(1), y.norm()),
                "distance_to_start": bound * (1 + mpf(10) ** (-(mp.dps - 15)))},
    )
    return witness, report


# ---------------------------------------------------------------------------
# d-dense projection
# ---------------------------------------------------------------------------


def d_dense_project(x: SeqVector, ref: Optional[SeqVector] = None):
    """Project x onto the dominating set of the reference Julia vector.

    The output passes the domination certificate and sits within
    ||ref|| of x (the limit radius, for the standard references).
    """
    if ref is None:
        if x.space.kind != "lp":
            raise SpaceMismatch("default reference needs an l_p host")
        ref = fixed_vector(x.space.p)
    merged = signed_max_merge(x, ref)
    assert certify_domination(merged, ref)
    dist, slack = residual_norm(merged, x)
    cert = Certificate("domination", {"reference": ref, "provenance": "fixed_point"})
    report = WitnessReport(
        "d_dense_project",
        residuals={"distance": dist + slack},
        bounds={"distance": ref.norm() * (1 + mpf(10) ** (-(mp.dps - 15)))},
        extra={"certificate": cert},
    )
    return merged, report


# ---------------------------------------------------------------------------
# weak-topology witness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoordFunctional:
    """Finitely supported coordinate functional sum_j coeff_j e_j'."""

    support: tuple  # 1-based coordinates
    coeffs: tuple  # LogComplex, parallel to support

    @staticmethod
    def make(entries: dict) -> "CoordFunctional":
        items = sorted(entries.items())
        return CoordFunctional(tuple(j for j, _ in items),
                               tuple(LogComplex.from_complex(v) for _, v in items))

    def apply(self, v: SeqVector) -> LogComplex:
        acc = LogComplex.zero()
        for j, cf in zip(self.support, self.coeffs):
            acc = lc_add(acc, lc_mul(cf, v.coord(j)))
        return acc

    def dual_norm(self, p: mpf) -> mpf:
        mags = [mpmath.exp(c.logmag) for c in self.coeffs if not c.is_zero]
        if not mags:
            return mpf(0)
        if p == 1:
            return max(mags)
        q = p / (p - 1)
        return sum(m ** q for m in mags) ** (1 / q)


def weak_dense_witness(x0: SeqVector, functionals: Sequence[CoordFunctional],
                       epsilon, n: int, ref: Optional[SeqVector] = None):
    """A vector epsilon-close to x0 under all functionals, certified far
    from the basin via the auxiliary one-coordinate spike.

    Uses a kernel coordinate past every functional support.  The spike
    grows linearly in n; the certificate is granted once the iterated
    spike image is a >= 1 multiple of the reference, and withheld below
    that (the report says which).
    """
    epsilon = mpf(epsilon)
    if x0.space.kind != "lp":
        raise SpaceMismatch("weak witness targets l_p hosts")
    p = x0.space.p
    if ref is None:
        ref = fixed_vector(p)
    if not functionals:
        raise NoKernelVector("no functionals; any coordinate works, pass at least one")
    k = max(max(f.support) for f in functionals) + 1
    if x0.tail.kind not in ("zero",) and x0.head_len < k:
        x0 = x0.materialize(k)
    M = max(f.dual_norm(p) for f in functionals)
    if M == 0:
        raise NoKernelVector("functionals vanish identically")
    eps_t = epsilon / M
    r = ref.norm()
    ref_scaled = ref.scale(eps_t / r)

    spike = SeqVector.make(x0.space, [0] * (k - 1) + [n])
    yn = vec_add(spike, x0.truncate(max(x0.head_len, k))) if x0.tail.kind == "zero" \
        else vec_add(spike, x0)
    xn = signed_max_merge(yn, ref_scaled)

    # auxiliary spike vector: the scaled reference with the witness value
    # (itself carrying the eps/r prefactor) in the kernel slot
    s_lc = LogComplex.from_complex(eps_t / r)
    zn_head = list(ref_scaled.materialize(k).head)
    zn_head[k - 1] = lc_mul(s_lc, xn.coord(k))
    zn = SeqVector(x0.space, tuple(zn_head), ref_scaled.materialize(k).tail)

    lam = lc_mul(lc_ipow(LogComplex.from_complex(eps_t / r), 1 << k),
                 lc_div(xn.coord(k), ref.coord(k)))
    func_res = [mpmath.exp(f.apply(vec_sub_trunc(xn, x0, k + 8)).logmag) for f in functionals]
    certified = lam.logmag >= 0
    cert = None
    if certified:
        cert = Certificate("preimage", {
            "steps": k,
            "inner": Certificate("domination", {"reference": ref, "provenance": "fixed_point"}),
        })
    report = WitnessReport(
        "weak_dense_witness",
        inputs={"n": n, "kernel_coordinate": k, "epsilon": epsilon, "bound_M": M},
        residuals={"max_functional_deviation": max(func_res)},
        bounds={"max_functional_deviation": epsilon},
        extra={"lambda_logmag": lam.logmag, "certified": certified,
               "certificate": cert, "spike_vector": zn},
    )
    return xn, report


def vec_sub_trunc(u: SeqVector, v: SeqVector, upto: int) -> SeqVector:
    """Difference of leading coordinates only (enough for finitely
    supported functionals)."""
    return vec_sub(u.truncate(upto), v.truncate(upto))


def weak_witness_spike_threshold(epsilon, M, k: int, ref: SeqVector) -> int:
    """Smallest integer spike making the weak witness certifiable.

    The certificate needs |lambda| = (eps_t/r)**(2**k) * x_k / ref_k
    to reach 1, so the spike must exceed ref_k * (r/eps_t)**(2**k).
    """
    eps_t = mpf(epsilon) / mpf(M)
    r = ref.norm()
    log_n = ref.coord(k).logmag + (1 << k) * (mpmath.log(r) - mpmath.log(eps_t))
    if log_n > mpf(10) ** 6:
        raise BudgetExhausted("spike size exceeds any representable integer")
    return int(mpmath.ceil(mpmath.exp(log_n))) + 1


# ---------------------------------------------------------------------------
# scalar-set witnesses
# ---------------------------------------------------------------------------


def gamma_zero_witness(x: SeqVector, epsilon, gamma, ref: Optional[SeqVector] = None):
    """z with gamma*z within epsilon of x and z dominating the reference.

    Requires epsilon/(r * |gamma|) > 1 so the 1/gamma blow-up lands z
    beyond the reference coordinatewise.
    """
    epsilon = mpf(epsilon)
    gamma = LogComplex.from_complex(gamma)
    if x.space.kind != "lp":
        raise SpaceMismatch("l_p hosts only")
    if ref is None:
        ref = fixed_vector(x.space.p)
    r = ref.norm()
    if not (mpmath.log(epsilon) - mpmath.log(r) - gamma.logmag) > 0:
        raise GammaTooLarge("need epsilon/(r*|gamma|) > 1")
    merged = signed_max_merge(x, ref.scale(epsilon / r))
    z = merged.scale(lc_div(LogComplex.one(), gamma))
    ok = certify_domination(z, ref)
    res, slack = residual_norm(merged, x)  # gamma*z == merged exactly
    cert = Certificate("domination", {"reference": ref, "provenance": "fixed_point"})
    # ||gamma z - x|| <= epsilon with equality exactly when x = 0
    report = WitnessReport(
        "gamma_zero_witness",
        inputs={"epsilon": epsilon, "gamma_logmag": gamma.logmag},
        residuals={"gamma_z_vs_x": res + slack},
        bounds={"gamma_z_vs_x": epsilon * (1 + mpf(10) ** (-(mp.dps - 15)))},
        extra={"certified": ok, "certificate": cert},
    )
    return z, report


def gamma_unbounded_witness(P: HomPoly, x: SeqVector, y: SeqVector,
                            gamma: GammaSet, n: int):
    """(w, lam): lam * P^n(w) = y exactly in block algebra, w near x.

    Functional shift: w = x^n + S^n(y)/(c_n(x) lam), lam picked from
    the ladder so |lam c_n(x)| >= n * max(1, ||y||).  Power shift on
    c_0: w = x + F^n(y)/lam^(1/m^n) with the root shift F; exact once n
    clears the support of x.
    """
    if gamma.kind != "unbounded_seq":
        raise GammaGrowthInsufficient("need an unbounded ladder")
    P._check_space(x)
    P._check_space(y)
    if isinstance(P, FunctionalShift):
        c = orbit_coefficients(x, n)[-1]
        if c.is_zero:
            raise ZeroCoefficient("c_n(x) = 0")
        want = mpmath.log(n * max(mpf(1), y.norm())) - c.logmag
        lam = gamma.pick_with_logmag_at_least(want)
        corr = forward_shift(y, n).scale(lc_div(LogComplex.one(), lc_mul(c, lam)))
        w = vec_add(x.truncate(n), corr)
        img = P.image(w, n).scale(lam)
    elif isinstance(P, PowerShift):
        if not x.is_finitely_supported():
            raise NotInDomain("power-shift witness needs a finitely supported start")
        m = P.m
        big = m ** n
        want = big * mpmath.log(mpf(n + 2))  # makes |lam|**(1/m**n) >= n+2
        lam = gamma.pick_with_logmag_at_least(want)
        lam_root = root_to_one(lam, big)
        fy = _root_shift(y, n, m)
        corr = fy.scale(lc_div(LogComplex.one(), lam_root))
        w = vec_add(x, corr)
        img = P.image(w, n).scale(lam)
    else:
        raise NotInDomain("unbounded-set witness targets shift families")
    res, slack = residual_norm(img, y)
    corr_norm = corr.norm()
    report = WitnessReport(
        "gamma_unbounded_witness",
        inputs={"n": n, "lambda_logmag": lam.logmag},
        residuals={"lam_image_vs_target": res + slack},
        bounds={"lam_image_vs_target": mpf(10) ** (-(mp.dps - 15)) * max(mpf(1), y.norm())},
        extra={"correction_norm": corr_norm},
    )
    return w, lam, report


def _root_shift(y: SeqVector, k: int, m: int) -> SeqVector:
    """F^k: forward shift by k with principal m^k-th roots of the values."""
    if not y.is_finitely_supported():
        raise NotInDomain("root shift implemented for finite supports")
    big = m ** k
    head = [LogComplex.zero()] * k + [
        (root_to_one(z, big) if not z.is_zero else z) for z in y.head
    ]
    return SeqVector(y.space, tuple(head), TailModel.zero())


# ---------------------------------------------------------------------------
# greedy disk-supercyclic schedule on c
# ---------------------------------------------------------------------------


def default_dense_targets(K: int):
    """Deterministic enumeration of (finite head, nonzero limit) targets.

    Heads run through rational complex values on a fixed grid; limits
    cycle through nonzero rationals of both signs and both axes.
    """
    heads = []
    limits = []
    grid = [mpf(1), mpf(-1), mpf("0.5"), mpf(2), mpf("-0.5"),
            mpf("1.5"), mpf("0.25"), mpf(3)]
    lims = [mpf(1), mpf(-1), mpf("0.5"), mpf("2"), mpf("0.75"),
            mpf("-1.5"), mpf("1.25"), mpf("0.3")]
    k = 0
    width = 1
    while len(heads) < K:
        head = [grid[(k + i) % len(grid)] * (1 if (k + i) % 3 else -1)
                for i in range(width)]
        heads.append(head)
        limits.append(lims[k % len(lims)])
        k += 1
        if k % 4 == 0:
            width = 1 + (width % 3)
    return [(SeqVector.make(SpaceTag.c(), heads[i]), LogComplex.from_complex(limits[i]))
            for i in range(K)]


def disk_supercyclic_build(targets, m: int = 2, per_index_budget: int = 512):
    """Greedy schedule for the disk-supercyclic vector on c.

    For each target (y_k, l_k) the schedule index n_k is the first
    integer past the support bound satisfying, in log space: the root
    ratios of y_k against l_k settle within 1/k, |l_k| < 2**(m**n_k),
    and every cross ratio against earlier indices stays within 1/k.
    The assembled vector has the block values 2 F^{n_j}(y_j) /
    l_j**(1/m**n_j) and the constant 2 on every gap.
    """
    if m < 2:
        raise ValueError("degree >= 2")
    space = SpaceTag.c()
    K = len(targets)
    norm_targets = []
    for y, l in targets:
        l = LogComplex.from_complex(l)
        if l.is_zero:
            raise ValueError("limits must be nonzero")
        y = y if y.is_finitely_supported() else y.truncate(y.head_len)
        supp = y.support_end()
        if supp == 0:
            raise ValueError("target heads must be nonzero")
        if any(y.coord(j).is_zero for j in range(1, supp + 1)):
            raise ValueError("interior zeros violate the support normalization")
        norm_targets.append((y.truncate(supp), l))

    schedule = []
    for k in range(1, K + 1):
        y_k, l_k = norm_targets[k - 1]
        prev_n = schedule[-1] if schedule else 0
        prev_supp = norm_targets[k - 2][0].head_len if k > 1 else 0
        n = prev_n + prev_supp + 1
        found = None
        for _ in range(per_index_budget):
            if (_cond_roots(y_k, l_k, n, m, mpf(1) / k)
                    and _cond_disk(l_k, n, m)
                    and _cond_cross(norm_targets, schedule, k, n, m)):
                found = n
                break
            n += 1
        if found is None:
            raise ScheduleSearchExhausted("no n_%d within budget" % k)
        schedule.append(found)

    # assemble the head through the last block
    last_end = schedule[-1] + norm_targets[-1][0].head_len
    two = LogComplex.from_complex(2)
    head = [two] * last_end
    for (y_k, l_k), n_k in zip(norm_targets, schedule):
        big = m ** n_k
        lroot = root_to_one(l_k, big)
        for j in range(1, y_k.head_len + 1):
            val = root_to_one(y_k.coord(j), big, zero_ok=True)
            head[n_k + j - 1] = lc_mul(two, lc_div(val, lroot))
    x = SeqVector(space, tuple(head), TailModel.constant(2))

    residuals = []
    for idx, ((y_k, l_k), n_k) in enumerate(zip(norm_targets, schedule), start=1):
        residuals.append(_disk_residual(x, y_k, l_k, n_k, m, last_end))
    report = WitnessReport(
        "disk_supercyclic_build",
        inputs={"K": K, "m": m},
        residuals={"residual_%d" % (i + 1): r for i, r in enumerate(residuals)},
        bounds={"residual_%d" % (i + 1): mpf(1) / (i + 2) + mpf("1e-6")
                for i in range(len(residuals))},
        extra={"schedule": schedule},
    )
    return x, schedule, residuals, report


def _cond_roots(y, l, n, m, tol) -> bool:
    big = m ** n
    lroot = root_to_one(l, big)
    for j in range(1, y.head_len + 1):
        v = y.coord(j)
        if v.is_zero:
            return False
        ratio = lc_div(root_to_one(v, big), lroot)
        if abs(ratio.to_mpc() - 1) >= tol:
            return False
    return True


def _cond_disk(l, n, m) -> bool:
    return l.logmag < (mpf(m) ** n) * mpmath.log(2)


def _cond_cross(norm_targets, schedule, k, n, m) -> bool:
    y_k, l_k = norm_targets[k - 1]
    for j in range(1, k):
        n_j = schedule[j - 1]
        l_j = norm_targets[j - 1][1]
        gap = n - n_j
        biggap = m ** gap
        lroot = root_to_one(l_k, biggap)
        for i in range(1, y_k.head_len + 1):
            v = y_k.coord(i)
            ratio = lc_div(root_to_one(v, biggap), lroot)
            if mpmath.exp(l_j.logmag) * abs(ratio.to_mpc() - 1) >= mpf(1) / k:
                return False
    return True


def _disk_residual(x, y_k, l_k, n_k, m, last_end) -> mpf:
    """sup_j |(l_k / 2**(m**n_k)) x_{j+n_k}**(m**n_k) - target_j|.

    Coordinates past the assembled head are the constant 2, whose
    scaled power is exactly l_k; the sup runs over the materialized
    range.
    """
    big = m ** n_k
    scale = lc_div(l_k, lc_ipow(LogComplex.from_complex(2), big))
    worst = mpf(0)
    for j in range(1, last_end - n_k + 1):
        val = lc_mul(scale, lc_ipow(x.coord(j + n_k), big))
        target = y_k.coord(j) if j <= y_k.head_len else l_k
        diff = abs(val.to_mpc() - target.to_mpc())
        if diff > worst:
            worst = diff
    return worst


# ---------------------------------------------------------------------------
# phase doubling on the circle
# ---------------------------------------------------------------------------


def doubling_phase(m: int, theta_targets, tol, budget: int = 10000):
    """A starting angle whose power-map orbit visits every target angle.

    Digit construction in base m: each target contributes a block of
    digits of theta/(2 pi); the orbit at the block offset reproduces
    the target within 3 * (2 pi) * m**-d.  Exact rational arithmetic
    (denominator m**D) keeps the iteration drift-free.
    """
    if m < 2:
        raise ValueError("m >= 2")
    tol = mpf(tol)
    d = int(mpmath.ceil(mpmath.log(8 * mp.pi / tol) / mpmath.log(m))) + 1
    K = len(theta_targets)
    if d * K > budget:
        raise BudgetExhausted("digit budget %d exceeds %d" % (d * K, budget))
    digits = []
    taus = []
    for th in theta_targets:
        tau = mpf(th) / (2 * mp.pi)
        tau = tau - mpmath.floor(tau)
        taus.append(tau)
        a = int(mpmath.floor(tau * mpf(m) ** d))
        digits.append(a)
    den = m ** (d * K)
    num = 0
    for i, a in enumerate(digits):
        num += a * m ** (d * (K - 1 - i))
    t0 = Fraction(num, den)
    theta1 = 2 * mp.pi * mpf(t0.numerator) / mpf(t0.denominator)
    hits = []
    errors = []
    for i in range(K):
        h = d * i
        frac = Fraction((t0.numerator * m ** h) % t0.denominator, t0.denominator)
        ang = 2 * mp.pi * mpf(frac.numerator) / mpf(frac.denominator)
        err = abs(mpmath.exp(mpc(0, ang)) - mpmath.exp(mpc(0, 2 * mp.pi * taus[i])))
        hits.append(h)
        errors.append(err)
    report = WitnessReport(
        "doubling_phase",
        inputs={"m": m, "targets": len(theta_targets), "digits_per_target": d},
        residuals={"hit_%d" % (i + 1): e for i, e in enumerate(errors)},
        bounds={"hit_%d" % (i + 1): tol for i in range(K)},
        extra={"hit_times": hits},
    )
    return theta1, hits, report


def doubling_transit_vector(u: SeqVector, v: SeqVector, theta1, theta2,
                            n: int, m: int):
    """The circle-block vector carrying u toward v on the power shift,
    with the displayed sup-norm estimate checked on both sides."""
    space = SpaceTag.c()
    if u.space != space or v.space != space:
        raise SpaceMismatch("transit vectors live on c")
    N = max(u.support_end(), v.support_end(), 1)
    if n <= N:
        raise ValueError("need n > N (the shared support bound)")
    e1 = mpmath.exp(mpc(0, mpf(theta1)))
    e2 = mpmath.exp(mpc(0, mpf(theta2)))
    big = m ** n
    head = []
    for k_ in range(1, N + 1):
        head.append(lc_add(u.coord(k_), LogComplex.from_complex(e1)))
    for k_ in range(N + 1, n + 1):
        head.append(LogComplex.from_complex(e1))
    for k_ in range(n + 1, N + n + 1):
        base = LogComplex.from_complex(v.coord(k_ - n).to_mpc() * mpmath.exp(mpc(0, -mpf(theta2))) + 1)
        head.append(lc_mul(root_to_one(base, big), LogComplex.from_complex(e1)))
    xn = SeqVector(space, tuple(head), TailModel.constant(e1))

    P = PowerShift(m, space)
    img = P.image(xn, n)
    phi_n = lc_ipow(LogComplex.from_complex(e1), big).to_mpc()
    lhs = mpf(0)
    for j in range(1, N + 2):
        target = v.coord(j).to_mpc() + e2 if j <= N else e2
        lhs = max(lhs, abs(img.coord(j).to_mpc() - target))
    lhs = max(lhs, abs(img.tail.limit.to_mpc() - e2))
    rhs = (v.norm() + 1) * abs(phi_n - e2)
    report = WitnessReport(
        "doubling_transit",
        inputs={"n": n, "m": m},
        residuals={"sup_distance": lhs},
        bounds={"sup_distance": rhs + mpf(10) ** (-(mp.dps - 15))},
    )
    return xn, report


# ---------------------------------------------------------------------------
# numerical orbit sampling
# ---------------------------------------------------------------------------


def numerical_orbit(P: HomPoly, x: SeqVector, coordinate: int, budget: int = 20):
    """x*(P^n(x)) for n <= budget as ordinary complex samples.

    Entries whose log-magnitude exceeds the float range are flagged as
    overflow and carry the log-magnitude instead of a value.
    """
    trace = P.iterate(x, budget, head_window=coordinate)
    out = []
    for st in trace.steps:
        z = st.head[coordinate - 1] if len(st.head) >= coordinate else LogComplex.zero()
        if not z.is_zero and abs(z.logmag) > 700:
            out.append({"n": st.n, "value": None, "logmag": z.logmag, "overflow": True})
        else:
            out.append({"n": st.n, "value": z.to_complex(), "logmag": z.logmag,
                        "overflow": False})
    return out


# ---------------------------------------------------------------------------
# sensitivity separation
# ---------------------------------------------------------------------------


def sensitivity_witness(P: FunctionalShift, x: SeqVector, n: int, epsilon,
                        c_value=None, target_separation=2):
    """y agreeing with x on the nonzero leading coordinates, epsilon/2 on
    the zero ones, with coordinate n+1 solved so the first-coordinate
    separation of the n-th images exceeds 1 (or any requested value)."""
    if not isinstance(P, FunctionalShift):
        raise NotInDomain("sensitivity construction targets the functional shift")
    epsilon = mpf(epsilon)
    head = []
    for k_ in range(1, n + 1):
        xk = x.coord(k_)
        head.append(LogComplex.from_complex(epsilon / 2) if xk.is_zero else xk)
    y_partial = SeqVector(x.space, tuple(head), TailModel.zero())
    cy = orbit_coefficients(y_partial, n)[-1]
    cx = orbit_coefficients(x, n)[-1]
    lead = lc_mul(cx, x.coord(n + 1))
    if c_value is None:
        target = lc_sub(lead, LogComplex.from_complex(target_separation))
        c = lc_div(target, cy)
    else:
        c = LogComplex.from_complex(c_value)
    y = SeqVector(x.space, tuple(head) + (c,), TailModel.zero())
    sep = lc_sub(lead, lc_mul(cy, c))
    separation = sep.abs_mpf()
    report = WitnessReport(
        "sensitivity_witness",
        inputs={"n": n, "epsilon": epsilon},
        residuals={"separation_defect": mpf(0) if (c_value is not None or separation > 1)
                   else mpf(1) - separation},
        bounds={"separation_defect": mpf(0)},
        extra={"separation": separation},
    )
    return y, separation, report


# ---------------------------------------------------------------------------
# density of the shifted Julia set
# ---------------------------------------------------------------------------


def bjp_dense_check(targets: Sequence[SeqVector], epsilon, ref: Optional[SeqVector] = None):
    """For each target y0, a preimage z of a nearby Julia vector:
    B(z) = y with ||y - y0|| <= eps * ||ref|| and P(z) = y/eps dominating
    the reference."""
    epsilon = mpf(epsilon)
    out = []
    for y0 in targets:
        if y0.space.kind != "lp":
            raise SpaceMismatch("l_p hosts only")
        base_ref = ref if ref is not None else fixed_vector(y0.space.p)
        y = signed_max_merge(y0, base_ref.scale(epsilon))
        z = vec_add(SeqVector.make(y0.space, [1 / epsilon]), forward_shift(y, 1))
        bz = backward_shift(z)
        res_b, slack_b = residual_norm(bz, y)
        P = FunctionalShift(y0.space)
        pz = P.eval(z)
        dom = certify_domination(pz, base_ref)
        dist, dslack = residual_norm(y, y0)
        cert = Certificate("preimage", {
            "steps": 1,
            "inner": Certificate("domination", {"reference": base_ref,
                                                "provenance": "fixed_point"}),
        })
        report = WitnessReport(
            "bjp_dense_check",
            inputs={"epsilon": epsilon},
            residuals={"backward_image_vs_y": res_b + slack_b,
                       "distance_to_target": dist + dslack},
            bounds={"backward_image_vs_y": mpf(10) ** (-(mp.dps - 15)) * max(mpf(1), y.norm()),
                    "distance_to_target": epsilon * base_ref.norm()
                    * (1 + mpf(10) ** (-(mp.dps - 15)))},
            extra={"dominates": dom, "certificate": cert, "preimage": z},
        )
        out.append((z, report))
    return out
