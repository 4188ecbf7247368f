"""The homogeneous polynomial families and their closed-form iterates.

Every family here admits an exact n-th iterate: the functional-shift
families through the orbit coefficient recurrence c_{n+1} = c_n**2 *
x_{n+1}, the power shift and coordinate square through coordinatewise
integer powers, the affine-hyperplane family through its displayed
closed form, and scaled families through the geometric exponent
(m**n - 1)/(m - 1).  Repeated direct evaluation is kept only as a
small-n cross-check oracle: beyond ~10 steps magnitudes scale like
t**(2**n) and only the log-polar closed forms survive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import mpmath
import numpy as np
from mpmath import mp, mpf

from .errors import ExponentBudgetExceeded, NoClosedForm, SpaceMismatch, WrongSpace, ZeroLambda
from .logcomplex import LogComplex, lc_ipow, lc_mul
from .precision import get_precision
from .seqspace import (SeqVector, SpaceTag, TailModel, backward_shift,
                       basis_vector, forward_shift, log_factorial, vec_add)

_NINF = mpf("-inf")


# ---------------------------------------------------------------------------
# orbit traces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrbitStep:
    """One closed-form iterate: head sample, log norm, coefficients."""

    n: int
    head: tuple
    lognorm: mpf
    coeff: Optional[LogComplex] = None
    coeff_weight: Optional[LogComplex] = None

    def to_json(self) -> dict:
        d = {"n": self.n, "lognorm": mpmath.nstr(self.lognorm, mp.dps + 8),
             "head": [z.serialize() for z in self.head]}
        if self.coeff is not None:
            d["coeff"] = self.coeff.serialize()
        if self.coeff_weight is not None:
            d["coeff_weight"] = self.coeff_weight.serialize()
        return d


@dataclass(frozen=True)
class OrbitTrace:
    family: str
    steps: tuple

    def lognorms(self):
        return [s.lognorm for s in self.steps]

    def step(self, n: int) -> OrbitStep:
        return self.steps[n]

    def to_json(self) -> dict:
        return {"family": self.family, "steps": [s.to_json() for s in self.steps]}


# ---------------------------------------------------------------------------
# coordinatewise helpers
# ---------------------------------------------------------------------------


def coordinatewise_ipow(v: SeqVector, e: int) -> SeqVector:
    """Raise every coordinate to the e-th power; tails stay closed-form."""
    head = tuple(lc_ipow(z, e) for z in v.head)
    t = v.tail
    if t.kind == "zero":
        tail = t
    elif t.kind == "constant":
        tail = TailModel("constant", value=lc_ipow(t.value, e))
    elif t.kind == "geometric":
        tail = TailModel("geometric", first=lc_ipow(t.first, e), ratio=lc_ipow(t.ratio, e))
    else:
        tail = TailModel("factorial_power", offset=t.offset, power=t.power * e,
                         scale=lc_ipow(t.scale, e))
    return SeqVector(v.space, head, tail)


def orbit_coefficients(x: SeqVector, n: int) -> list:
    """[c_1..c_n] with c_1 = x_1 and c_{k+1} = c_k**2 * x_{k+1}."""
    out = []
    c = x.coord(1)
    out.append(c)
    for k in range(2, n + 1):
        c = lc_mul(lc_mul(c, c), x.coord(k))
        out.append(c)
    return out


def weight_coefficients(n: int, weight_offset: int = 1) -> list:
    """Same recurrence run on the weight sequence of the weighted shift.

    Entry k of the underlying sequence is (woff! / (k-1+woff)!)**4, so
    for the standard offset 1 it is 1/(k!)**4.
    """
    def omega(k: int) -> LogComplex:
        lm = 4 * (log_factorial(weight_offset) - log_factorial(k - 1 + weight_offset))
        return LogComplex(lm, mpf(0))

    out = []
    c = omega(1)
    out.append(c)
    for k in range(2, n + 1):
        c = lc_mul(lc_mul(c, c), omega(k))
        out.append(c)
    return out


def weighted_backward_n(v: SeqVector, n: int, weight_offset: int = 1) -> SeqVector:
    """n-fold weighted backward shift, materialized with a drop budget.

    Coordinate i of the image is v_{i+n} * ((i+woff-1)! / (i+n+woff-1)!)**4.
    """
    if n == 0:
        return v

    def log_gain(i: int) -> mpf:
        return 4 * (log_factorial(i + weight_offset - 1) - log_factorial(i + n + weight_offset - 1))

    head = []
    for i in range(1, max(v.head_len - n, 0) + 1):
        head.append(lc_mul(v.head[i + n - 1], LogComplex(log_gain(i), mpf(0))))
    if v.tail.kind != "zero":
        i = len(head) + 1
        lead = _NINF
        cutoff = mpf(10) * (mp.dps + 10)
        while True:
            j = i + n  # source coordinate
            src = v.coord(j)
            val = lc_mul(src, LogComplex(log_gain(i), mpf(0)))
            head.append(val)
            if val.logmag > lead:
                lead = val.logmag
            if i > 3 and val.logmag < head[-2].logmag and lead - val.logmag > cutoff:
                break
            i += 1
            if i > 100000:
                raise WrongSpace("weighted image did not settle")
    return SeqVector(v.space, tuple(head), TailModel.zero())


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HomPoly:
    """Base class: a continuous m-homogeneous polynomial on a host space."""

    def eval(self, x: SeqVector) -> SeqVector:
        raise NotImplementedError

    def image(self, x: SeqVector, n: int) -> SeqVector:
        """The full n-th iterate as a vector, via the closed form."""
        raise NotImplementedError

    def iterate(self, x: SeqVector, n: int, head_window: int = 8) -> OrbitTrace:
        raise NotImplementedError

    def op_norm_analytic(self) -> mpf:
        raise NoClosedForm(type(self).__name__)

    @property
    def degree(self) -> int:
        raise NotImplementedError

    @property
    def space(self) -> SpaceTag:
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError

    def _check_space(self, x: SeqVector):
        if x.space != self.space:
            raise SpaceMismatch("vector lives on %s, polynomial on %s"
                                % (x.space.describe(), self.space.describe()))

    def _check_budget(self, n: int):
        prec = get_precision()
        if n > prec.max_exponent_budget:
            raise ExponentBudgetExceeded("iterate count %d exceeds budget %d"
                                         % (n, prec.max_exponent_budget))


def _window(v: SeqVector, width: int) -> tuple:
    return tuple(v.coord(j) for j in range(1, width + 1))


@dataclass(frozen=True)
class PowerShift(HomPoly):
    """P(x)_j = x_{j+1}**m; hosts: l_p, c_0, c."""

    m: int
    host: SpaceTag

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("degree must be >= 2")
        if self.host.kind == "linf_finite":
            raise WrongSpace("power shift needs an infinite host")

    degree = property(lambda self: self.m)
    space = property(lambda self: self.host)

    def eval(self, x: SeqVector) -> SeqVector:
        self._check_space(x)
        return coordinatewise_ipow(backward_shift(x), self.m)

    def image(self, x: SeqVector, n: int) -> SeqVector:
        self._check_space(x)
        self._check_budget(n)
        v = x
        for _ in range(n):
            v = backward_shift(v)
        return coordinatewise_ipow(v, self.m ** n)

    def iterate(self, x: SeqVector, n: int, head_window: int = 8) -> OrbitTrace:
        self._check_space(x)
        self._check_budget(n)
        steps = [OrbitStep(0, _window(x, head_window), x.log_norm())]
        v = x
        for k in range(1, n + 1):
            v = backward_shift(v)
            img = coordinatewise_ipow(v, self.m ** k)
            steps.append(OrbitStep(k, _window(img, head_window), img.log_norm()))
        return OrbitTrace(self.name(), tuple(steps))

    def op_norm_analytic(self) -> mpf:
        return mpf(1)

    def name(self) -> str:
        return "power_shift"

    def describe(self) -> dict:
        return {"family": self.name(), "m": self.m, "space": self.host.to_json()}


@dataclass(frozen=True)
class FunctionalShift(HomPoly):
    """P(x) = x_1 * B(x) on l_p or c_0; degree 2."""

    host: SpaceTag

    def __post_init__(self):
        if self.host.kind not in ("lp", "c0"):
            raise WrongSpace("functional shift lives on l_p or c_0")

    degree = property(lambda self: 2)
    space = property(lambda self: self.host)

    def eval(self, x: SeqVector) -> SeqVector:
        self._check_space(x)
        return backward_shift(x).scale(x.coord(1))

    def image(self, x: SeqVector, n: int) -> SeqVector:
        self._check_space(x)
        self._check_budget(n)
        if n == 0:
            return x
        c = orbit_coefficients(x, n)[-1]
        v = x
        for _ in range(n):
            v = backward_shift(v)
        return v.scale(c)

    def iterate(self, x: SeqVector, n: int, head_window: int = 8) -> OrbitTrace:
        self._check_space(x)
        self._check_budget(n)
        coeffs = orbit_coefficients(x, n)
        steps = [OrbitStep(0, _window(x, head_window), x.log_norm())]
        shifted = x
        for k in range(1, n + 1):
            shifted = backward_shift(shifted)
            c = coeffs[k - 1]
            img = shifted.scale(c)
            steps.append(OrbitStep(k, _window(img, head_window), img.log_norm(), coeff=c))
        return OrbitTrace(self.name(), tuple(steps))

    def op_norm_analytic(self) -> mpf:
        if self.host.kind == "c0":
            return mpf(1)
        return mpf(2) ** (-2 / self.host.p)

    def name(self) -> str:
        return "functional_shift"

    def describe(self) -> dict:
        return {"family": self.name(), "space": self.host.to_json()}


@dataclass(frozen=True)
class WeightedFunctionalShift(HomPoly):
    """P = e_1' * B_w on l_1 with weights 1/(i + weight_offset)**4.

    weight_offset = 1 is the irregular-decay family; weight_offset = 0
    is the variant the transfer construction commutes with exactly.
    """

    weight_offset: int = 1

    degree = property(lambda self: 2)
    space = property(lambda self: SpaceTag.lp(1))

    def eval(self, x: SeqVector) -> SeqVector:
        self._check_space(x)
        return backward_shift(x, weight_offset=self.weight_offset).scale(x.coord(1))

    def image(self, x: SeqVector, n: int) -> SeqVector:
        self._check_space(x)
        self._check_budget(n)
        if n == 0:
            return x
        c = orbit_coefficients(x, n)[-1]
        w = weight_coefficients(n, self.weight_offset)[-1]
        return weighted_backward_n(x, n, self.weight_offset).scale(lc_mul(c, w))

    def iterate(self, x: SeqVector, n: int, head_window: int = 8) -> OrbitTrace:
        self._check_space(x)
        self._check_budget(n)
        coeffs = orbit_coefficients(x, n)
        wcoeffs = weight_coefficients(n, self.weight_offset)
        steps = [OrbitStep(0, _window(x, head_window), x.log_norm())]
        for k in range(1, n + 1):
            c, w = coeffs[k - 1], wcoeffs[k - 1]
            img = weighted_backward_n(x, k, self.weight_offset).scale(lc_mul(c, w))
            steps.append(OrbitStep(k, _window(img, head_window), img.log_norm(),
                                   coeff=c, coeff_weight=w))
        return OrbitTrace(self.name(), tuple(steps))

    def op_norm_analytic(self) -> mpf:
        # Two-coordinate reduction: sup |x_1| * sum w_i |x_{i+1}| over the
        # unit sphere puts all mass on coordinates 1, 2 (weights decrease),
        # leaving max s*t*w_1 = w_1/4 at s = t = 1/2.  Confirmed by the
        # sampling oracle; no closed form is published for this family.
        w1 = mpf(1) / mpf(1 + self.weight_offset) ** 4
        return w1 / 4

    def name(self) -> str:
        return "weighted_functional_shift"

    def describe(self) -> dict:
        return {"family": self.name(), "weight_offset": self.weight_offset}


@dataclass(frozen=True)
class AffineHyperplane(HomPoly):
    """P(x) = x_1**m e_1 + x_1**(m-1) T(x - x_1 e_1), T = (1+eps) B on l_1.

    T acts on the kernel of the first coordinate: coordinate 1 of T(y)
    is 0 and coordinate i >= 2 is (1+eps) y_{i+1}.
    """

    m: int
    epsilon: mpf

    def __post_init__(self):
        object.__setattr__(self, "epsilon", mpf(self.epsilon))
        if self.m < 2:
            raise ValueError("degree must be >= 2")
        if not (0 < self.epsilon < 1):
            raise ValueError("epsilon in (0, 1) required")

    degree = property(lambda self: self.m)
    space = property(lambda self: SpaceTag.lp(1))

    def _ker_part(self, x: SeqVector) -> SeqVector:
        v = x.materialize(max(1, x.head_len))
        head = (LogComplex.zero(),) + v.head[1:]
        return SeqVector(x.space, head, v.tail)

    def _t_power(self, y: SeqVector, n: int) -> SeqVector:
        """T**n(y): coordinate 1 is 0, coordinate i>=2 is (1+eps)**n y_{i+n}."""
        v = y
        for _ in range(n + 1):
            v = backward_shift(v)
        v = forward_shift(v, 1)
        growth = LogComplex(n * mpmath.log(1 + self.epsilon), mpf(0))
        return v.scale(growth)

    def eval(self, x: SeqVector) -> SeqVector:
        self._check_space(x)
        return self._closed_step(x, 1)

    def _closed_step(self, x: SeqVector, n: int) -> SeqVector:
        lam = x.coord(1)
        y = self._ker_part(x)
        e = self.m ** n
        first = basis_vector(self.space, 1).scale(lc_ipow(lam, e))
        rest = self._t_power(y, n).scale(lc_ipow(lam, e - 1))
        return vec_add(first, rest)

    def image(self, x: SeqVector, n: int) -> SeqVector:
        self._check_space(x)
        self._check_budget(n)
        return x if n == 0 else self._closed_step(x, n)

    def iterate(self, x: SeqVector, n: int, head_window: int = 8) -> OrbitTrace:
        self._check_space(x)
        self._check_budget(n)
        steps = [OrbitStep(0, _window(x, head_window), x.log_norm())]
        for k in range(1, n + 1):
            img = self._closed_step(x, k)
            steps.append(OrbitStep(k, _window(img, head_window), img.log_norm()))
        return OrbitTrace(self.name(), tuple(steps))

    def op_norm_analytic(self) -> mpf:
        # max of s**(m-1) * (1 + eps(1-s)) on [0, 1] sits at s = 1 for
        # eps < 1, and P(e_1) = e_1 attains it.
        return mpf(1)

    def name(self) -> str:
        return "affine_hyperplane"

    def describe(self) -> dict:
        return {"family": self.name(), "m": self.m, "epsilon": str(self.epsilon)}


@dataclass(frozen=True)
class CoordinateSquare(HomPoly):
    """P(z) = (z_1**2, ..., z_d**2) on the finite sup-norm space."""

    dim: int

    degree = property(lambda self: 2)
    space = property(lambda self: SpaceTag.linf(self.dim))

    def eval(self, x: SeqVector) -> SeqVector:
        self._check_space(x)
        return coordinatewise_ipow(x.materialize(self.dim), 2)

    def image(self, x: SeqVector, n: int) -> SeqVector:
        self._check_space(x)
        self._check_budget(n)
        return coordinatewise_ipow(x.materialize(self.dim), 1 << n)

    def iterate(self, x: SeqVector, n: int, head_window: int = 8) -> OrbitTrace:
        self._check_space(x)
        self._check_budget(n)
        v = x.materialize(self.dim)
        steps = [OrbitStep(0, _window(v, min(head_window, self.dim)), v.log_norm())]
        for k in range(1, n + 1):
            img = coordinatewise_ipow(v, 1 << k)
            steps.append(OrbitStep(k, _window(img, min(head_window, self.dim)), img.log_norm()))
        return OrbitTrace(self.name(), tuple(steps))

    def op_norm_analytic(self) -> mpf:
        return mpf(1)

    def name(self) -> str:
        return "coordinate_square"

    def describe(self) -> dict:
        return {"family": self.name(), "dim": self.dim}


@dataclass(frozen=True)
class Scaled(HomPoly):
    """lambda * P for a nonzero scalar lambda."""

    base: HomPoly
    lam: LogComplex

    def __post_init__(self):
        lam = LogComplex.from_complex(self.lam)
        object.__setattr__(self, "lam", lam)
        if lam.is_zero:
            raise ZeroLambda("scaling by zero")

    degree = property(lambda self: self.base.degree)
    space = property(lambda self: self.base.space)

    def eval(self, x: SeqVector) -> SeqVector:
        return self.base.eval(x).scale(self.lam)

    def _lam_power(self, n: int) -> LogComplex:
        m = self.degree
        e = (m ** n - 1) // (m - 1)
        return lc_ipow(self.lam, e)

    def image(self, x: SeqVector, n: int) -> SeqVector:
        if n == 0:
            return x
        return self.base.image(x, n).scale(self._lam_power(n))

    def iterate(self, x: SeqVector, n: int, head_window: int = 8) -> OrbitTrace:
        base_trace = self.base.iterate(x, n, head_window)
        steps = []
        for st in base_trace.steps:
            if st.n == 0:
                steps.append(st)
                continue
            f = self._lam_power(st.n)
            steps.append(OrbitStep(st.n, tuple(lc_mul(z, f) for z in st.head),
                                   st.lognorm + f.logmag, st.coeff, st.coeff_weight))
        return OrbitTrace(self.name(), tuple(steps))

    def op_norm_analytic(self) -> mpf:
        return self.base.op_norm_analytic() * self.lam.abs_mpf()

    def name(self) -> str:
        return "scaled(%s)" % self.base.name()

    def describe(self) -> dict:
        return {"family": "scaled", "lambda": self.lam.serialize(), "base": self.base.describe()}


# ---------------------------------------------------------------------------
# module-level operations
# ---------------------------------------------------------------------------


def eval_poly(P: HomPoly, x: SeqVector) -> SeqVector:
    return P.eval(x)


def iterate(P: HomPoly, x: SeqVector, n: int, head_window: int = 8) -> OrbitTrace:
    return P.iterate(x, n, head_window)


def op_norm_analytic(P: HomPoly) -> mpf:
    return P.op_norm_analytic()


def limit_radius(P: HomPoly, norm: mpf | None = None) -> mpf:
    """r = ||P||**(1/(1-m)); orbits entering the r-ball converge to 0."""
    nrm = P.op_norm_analytic() if norm is None else mpf(norm)
    m = P.degree
    return mpmath.exp(mpmath.log(nrm) / (1 - m))


def fixed_vector(p) -> SeqVector:
    """The explicit fixed point 2**(1/p) * (1, 2**(-1/p), 2**(-2/p), ...)
    of the functional shift on l_p; its norm equals the limit radius."""
    p = mpf(p)
    first = mpf(2) ** (1 / p)
    ratio = mpf(2) ** (-1 / p)
    return SeqVector.make(SpaceTag.lp(p), [], TailModel.geometric(first, ratio))


def c0_reference_vector(a=2) -> SeqVector:
    """A fixed point (a, 1, 1/a, ...) of the functional shift on c_0, a > 1."""
    a = mpf(a)
    if not a > 1:
        raise ValueError("need a > 1 for a c0 fixed point")
    return SeqVector.make(SpaceTag.c0(), [], TailModel.geometric(a, 1 / a))


# ---------------------------------------------------------------------------
# sampling oracle for operator norms (float64; lower-bound method)
# ---------------------------------------------------------------------------


def _dense_norm(space: SpaceTag, X: np.ndarray) -> np.ndarray:
    if space.kind == "lp":
        p = float(space.p)
        return (np.abs(X) ** p).sum(axis=1) ** (1.0 / p)
    return np.abs(X).max(axis=1)


def _dense_eval_norm(P: HomPoly, X: np.ndarray) -> np.ndarray:
    """||P(x)|| for nonnegative sample rows; float64, vectorized."""
    if isinstance(P, FunctionalShift):
        return X[:, 0] * _dense_norm(P.space, X[:, 1:])
    if isinstance(P, WeightedFunctionalShift):
        i = np.arange(1, X.shape[1])
        w = 1.0 / (i + P.weight_offset) ** 4
        return X[:, 0] * (X[:, 1:] * w).sum(axis=1)
    if isinstance(P, PowerShift):
        Y = X[:, 1:] ** P.m
        return _dense_norm(P.space, Y)
    if isinstance(P, CoordinateSquare):
        return (X ** 2).max(axis=1)
    if isinstance(P, AffineHyperplane):
        lam = X[:, 0]
        ker = X[:, 1:]
        shifted = np.zeros_like(ker)
        shifted[:, :-1] = ker[:, 1:]
        t_norm = (1 + float(P.epsilon)) * np.abs(shifted).sum(axis=1)
        return lam ** P.m + lam ** (P.m - 1) * t_norm
    if isinstance(P, Scaled):
        return float(P.lam.abs_mpf()) * _dense_eval_norm(P.base, X)
    raise NoClosedForm("no dense evaluator for %s" % type(P).__name__)


def _mpf_eval_norm(P: HomPoly, x: np.ndarray) -> mpf:
    """Re-evaluate one candidate at working precision (exact lower bound)."""
    v = SeqVector.make(P.space, [mpf(float(t)) for t in x])
    nv = v.norm()
    if nv == 0:
        return mpf(0)
    v = v.scale(1 / nv)
    return P.eval(v).norm()


def op_norm_oracle(P: HomPoly, trunc_dim: int = 64, samples: int = 100000,
                   polish_steps: int = 400, seed: int = 0) -> mpf:
    """Lower bound on ||P|| by seeded random search plus coordinate polish.

    Maximizes ||P(x)|| over the unit sphere of the trunc_dim-dimensional
    truncation: batched float64 sampling of the nonnegative orthant
    (all families have coordinatewise-monotone norms, so phases never
    help), then multiplicative single-coordinate ascent on the best
    candidate, then one exact re-evaluation at working precision so the
    reported value never overshoots the true norm by more than an ulp.
    """
    if trunc_dim < 2:
        raise ValueError("trunc_dim >= 2 required")
    if P.space.kind == "linf_finite":
        trunc_dim = min(trunc_dim, P.space.dim)
    rng = np.random.default_rng(seed)
    best_val = -1.0
    best_x = None
    batch = 20000
    done = 0
    while done < samples:
        k = min(batch, samples - done)
        X = np.abs(rng.standard_normal((k, trunc_dim)))
        X /= _dense_norm(P.space, X)[:, None]
        vals = _dense_eval_norm(P, X)
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val = float(vals[i])
            best_x = X[i].copy()
        done += k
    x = best_x
    step = 0.5
    val = best_val
    for it in range(polish_steps):
        improved = False
        for j in range(trunc_dim):
            for fac in (1.0 + step, 1.0 / (1.0 + step)):
                y = x.copy()
                y[j] *= fac
                y /= _dense_norm(P.space, y[None, :])[0]
                v = float(_dense_eval_norm(P, y[None, :])[0])
                if v > val:
                    val, x, improved = v, y, True
        if not improved:
            step *= 0.5
            if step < 1e-12:
                break
    return _mpf_eval_norm(P, x)
