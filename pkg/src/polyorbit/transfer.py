"""Quasiconjugacy machinery on a concrete Banach host.

A biorthogonal system (x_n, x_n*) with x_n*(x_k) = alpha(n) delta_nk,
x_n -> 0 and uniformly bounded functionals is built on l_2 by a
sequential Gram-Schmidt biorthogonalization; the transferred
polynomial Q(x) = x_1*(x) sum x_{n+1}*(x) x_n / n**2 then commutes
exactly with the weighted functional shift carrying weights 1/n**4
through the factor map a -> sum a_n x_n.  Iterates of Q factor through
their own coefficient sequence, which transports the shift coefficients
coordinate for coordinate; that identity is what the verification
routines check, in log space, far beyond the range where the raw
magnitudes are representable as floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import mpmath
from mpmath import mp, mpc, mpf

from .errors import DependentFamily, NotInDomain, ZeroLambda
from .logcomplex import LogComplex, lc_mul, root_to_one
from .polynomials import (HomPoly, OrbitStep, OrbitTrace, Scaled,
                          WeightedFunctionalShift, orbit_coefficients,
                          weight_coefficients)
from .seqspace import SeqVector, SpaceTag, TailModel

_NINF = mpf("-inf")


def default_alpha(n: int) -> mpf:
    """alpha(1) = 1, alpha(n) = 1/(n-1)**2 for n >= 2."""
    return mpf(1) if n == 1 else 1 / mpf(n - 1) ** 2


# ---------------------------------------------------------------------------
# dense helpers (system vectors live in a finite slice of l_2)
# ---------------------------------------------------------------------------


def _inner(a, b) -> mpc:
    return sum((x * mpmath.conj(y) for x, y in zip(a, b)), mpc(0))


def _norm2(a) -> mpf:
    return mpmath.sqrt(sum((abs(x) ** 2 for x in a), mpf(0)))


def _axpy(alpha, x, y):
    return [yi + alpha * xi for xi, yi in zip(x, y)]


def _to_seqvector(space: SpaceTag, coords) -> SeqVector:
    return SeqVector.make(space, list(coords))


def _dense(v: SeqVector, dim: int):
    return [v.coord(j).to_mpc() for j in range(1, dim + 1)]


# ---------------------------------------------------------------------------
# the system
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BiorthogonalSystem:
    """Finite prefix of a biorthogonal system on l_2.

    vectors[n] = alpha(n+1) * y_n with (y_n, functionals[n]) biorthogonal;
    applying functionals is the plain bilinear coordinate pairing with
    the stored coefficient rows.
    """

    host: SpaceTag
    alpha: tuple
    basis: tuple          # y_n as dense coordinate tuples
    functionals: tuple    # f_n coefficient rows (dense tuples)
    dim: int

    @property
    def length(self) -> int:
        return len(self.basis)

    def vector(self, n: int) -> SeqVector:
        """x_n = alpha(n) y_n, 1-based."""
        y = self.basis[n - 1]
        a = self.alpha[n - 1]
        return _to_seqvector(self.host, [a * c for c in y])

    def vector_dense(self, n: int):
        y = self.basis[n - 1]
        a = self.alpha[n - 1]
        return [a * c for c in y]

    def apply_functional(self, n: int, dense) -> mpc:
        return sum((f * x for f, x in zip(self.functionals[n - 1], dense)), mpc(0))

    def functional_bound(self) -> mpf:
        return max(_norm2(f) for f in self.functionals)

    def max_vector_norm(self) -> mpf:
        return max(_norm2(self.vector_dense(n)) for n in range(1, self.length + 1))

    def pairing(self, n: int, k: int) -> mpc:
        return self.apply_functional(n, self.vector_dense(k))

    def to_json(self) -> dict:
        def row(xs):
            return [[mpmath.nstr(x.real, mp.dps + 8), mpmath.nstr(x.imag, mp.dps + 8)]
                    for x in xs]
        return {
            "host": self.host.to_json(),
            "alpha": [mpmath.nstr(a, mp.dps + 8) for a in self.alpha],
            "basis": [row(b) for b in self.basis],
            "functionals": [row(f) for f in self.functionals],
            "dim": self.dim,
        }

    @staticmethod
    def from_json(d: dict) -> "BiorthogonalSystem":
        def unrow(rows):
            return tuple(mpc(mpf(re), mpf(im)) for re, im in rows)
        return BiorthogonalSystem(
            host=SpaceTag.from_json(d["host"]),
            alpha=tuple(mpf(a) for a in d["alpha"]),
            basis=tuple(unrow(b) for b in d["basis"]),
            functionals=tuple(unrow(f) for f in d["functionals"]),
            dim=int(d["dim"]),
        )


def standard_family(N: int, dim: int):
    out = []
    for n in range(1, N + 1):
        v = [mpc(0)] * dim
        v[n - 1] = mpc(1)
        out.append(v)
    return out


def perturbed_family(N: int, dim: int):
    """z_n = (e_n + e_{n+1}/2) / ||.||, linearly independent, normalized."""
    out = []
    for n in range(1, N + 1):
        v = [mpc(0)] * dim
        v[n - 1] = mpc(1)
        if n < dim:
            v[n] = mpc(mpf(1) / 2)
        nrm = _norm2(v)
        out.append([c / nrm for c in v])
    return out


def build_system(host: SpaceTag = None, alpha: Optional[Callable[[int], mpf]] = None,
                 z_family="standard", N: int = 10) -> BiorthogonalSystem:
    """Sequential biorthogonalization of the chosen family.

    y_n = z_n - sum_{k<n} f_k(z_n) y_k; the functional f_n is the inner
    product against the component of y_n orthogonal to the earlier
    y's, normalized to f_n(y_n) = 1.  The pivot is that component's
    squared norm; a pivot under the dependence tolerance aborts.  For
    the standard basis the construction degenerates to x_n = alpha(n) e_n,
    f_n = e_n'.
    """
    if host is None:
        host = SpaceTag.lp(2)
    if host != SpaceTag.lp(2):
        raise NotInDomain("the concrete instantiation lives on l_2")
    alpha = alpha or default_alpha
    dim = N + 1
    if z_family == "standard":
        zs = standard_family(N, dim)
    elif z_family == "perturbed":
        zs = perturbed_family(N, dim)
    else:
        zs = [list(z) for z in z_family]
        dim = len(zs[0])
        N = len(zs)

    ys = []
    fs = []
    ortho = []  # orthonormalized y's, for the projections
    tol = mpf(10) ** (-(mp.dps // 2))
    for n, z in enumerate(zs, start=1):
        y = list(z)
        for k in range(n - 1):
            coeff = sum((f * c for f, c in zip(fs[k], z)), mpc(0))
            y = _axpy(-coeff, ys[k], y)
        w = list(y)
        for u in ortho:
            w = _axpy(-_inner(w, u), u, w)
        pivot = _norm2(w)
        if pivot < tol * max(_norm2(z), mpf(1)):
            raise DependentFamily("pivot %s below tolerance at index %d"
                                  % (mpmath.nstr(pivot, 5), n))
        denom = _inner(y, w)
        fs.append(tuple(mpmath.conj(c) / denom for c in w))
        ys.append(tuple(y))
        ortho.append(tuple(c / pivot for c in w))
    alphas = tuple(alpha(n) for n in range(1, N + 1))
    return BiorthogonalSystem(host=host, alpha=alphas, basis=tuple(ys),
                              functionals=tuple(fs), dim=dim)


def biorthogonality_residual(system: BiorthogonalSystem) -> mpf:
    """max over n, k of |f_n(x_k) - alpha(n) delta_nk|."""
    worst = mpf(0)
    for n in range(1, system.length + 1):
        for k in range(1, system.length + 1):
            v = system.pairing(n, k)
            target = system.alpha[n - 1] if n == k else mpc(0)
            worst = max(worst, abs(v - target))
    return worst


# ---------------------------------------------------------------------------
# the transferred polynomial
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TransferPolynomial(HomPoly):
    """Q(x) = x_1*(x) sum_n x_{n+1}*(x) x_n / n**2 on the system's host.

    The series is a finite sum here: the system stores N vectors, and
    every functional beyond the prefix annihilates the slice, so the
    truncation bound is exactly zero on the represented subspace.
    """

    system: BiorthogonalSystem

    degree = property(lambda self: 2)
    space = property(lambda self: self.system.host)

    def _t_dense(self, dense):
        out = [mpc(0)] * self.system.dim
        for n in range(1, self.system.length):
            coeff = self.system.apply_functional(n + 1, dense) / mpf(n) ** 2
            if coeff != 0:
                xv = self.system.vector_dense(n)
                out = _axpy(coeff, xv, out)
        return out

    def linear_factor(self, x: SeqVector) -> SeqVector:
        return _to_seqvector(self.space, self._t_dense(_dense(x, self.system.dim)))

    def eval(self, x: SeqVector) -> SeqVector:
        self._check_space(x)
        dense = _dense(x, self.system.dim)
        lead = self.system.apply_functional(1, dense)
        return _to_seqvector(self.space, [lead * c for c in self._t_dense(dense)])

    def coefficient_sequence(self, x: SeqVector, n: int):
        """d_1..d_n with d_1 = x_1*(x), d_{k+1} = d_k**2 x_1*(T^k x)."""
        dense = _dense(x, self.system.dim)
        out = []
        d = LogComplex.from_complex(self.system.apply_functional(1, dense))
        out.append(d)
        cur = dense
        for _ in range(2, n + 1):
            cur = self._t_dense(cur)
            lead = LogComplex.from_complex(self.system.apply_functional(1, cur))
            d = lc_mul(lc_mul(d, d), lead)
            out.append(d)
        return out

    def image(self, x: SeqVector, n: int) -> SeqVector:
        self._check_space(x)
        self._check_budget(n)
        if n == 0:
            return x
        ds = self.coefficient_sequence(x, n)
        cur = _dense(x, self.system.dim)
        for _ in range(n):
            cur = self._t_dense(cur)
        d = ds[-1]
        head = [lc_mul(LogComplex.from_complex(c), d) for c in cur]
        return SeqVector(self.space, tuple(head), TailModel.zero())

    def iterate(self, x: SeqVector, n: int, head_window: int = 8) -> OrbitTrace:
        self._check_space(x)
        self._check_budget(n)
        steps = [OrbitStep(0, tuple(x.coord(j) for j in range(1, head_window + 1)),
                           x.log_norm())]
        ds = self.coefficient_sequence(x, n) if n else []
        cur = _dense(x, self.system.dim)
        for k in range(1, n + 1):
            cur = self._t_dense(cur)
            d = ds[k - 1]
            head = [lc_mul(LogComplex.from_complex(c), d) for c in cur]
            v = SeqVector(self.space, tuple(head), TailModel.zero())
            steps.append(OrbitStep(k, tuple(v.coord(j) for j in range(1, head_window + 1)),
                                   v.log_norm(), coeff=d))
        return OrbitTrace(self.name(), tuple(steps))

    def name(self) -> str:
        return "transfer"

    def describe(self) -> dict:
        return {"family": "transfer", "length": self.system.length}


# ---------------------------------------------------------------------------
# the factor map
# ---------------------------------------------------------------------------


def phi_map(system: BiorthogonalSystem, a: SeqVector) -> SeqVector:
    """Phi(a) = sum a_n x_n; defined here for supports within the prefix."""
    if a.space.kind != "lp" or a.space.p != 1:
        raise NotInDomain("the factor map is defined on l_1")
    if a.tail.kind != "zero" or a.support_end() > system.length:
        raise NotInDomain("support exceeds the stored system prefix")
    out = [mpc(0)] * system.dim
    for j in range(1, min(a.head_len, system.length) + 1):
        aj = a.coord(j).to_mpc()
        if aj != 0:
            out = _axpy(aj, system.vector_dense(j), out)
    return _to_seqvector(system.host, out)


def phi_operator_norm_bound(system: BiorthogonalSystem) -> mpf:
    """||Phi|| <= max_n ||x_n|| on an l_1 source."""
    return system.max_vector_norm()


# ---------------------------------------------------------------------------
# scaling conjugation
# ---------------------------------------------------------------------------


def scale_conjugate(P: HomPoly, lam):
    """(lam P, Phi) with Phi(x) = x / lam**(1/(m-1)); Phi P = (lam P) Phi."""
    lam = LogComplex.from_complex(lam)
    if lam.is_zero:
        raise ZeroLambda("conjugation needs lam != 0")
    scaled = Scaled(P, lam)
    factor = root_to_one(lam, P.degree - 1)
    inv = LogComplex(-factor.logmag, LogComplex.from_polar(0, -factor.phase).phase)

    def phi(x: SeqVector) -> SeqVector:
        return x.scale(inv)

    return scaled, phi


def commutation_residual(P: HomPoly, lam, x: SeqVector) -> mpf:
    """|| Phi(P(x)) - (lam P)(Phi(x)) || for the scaling conjugation."""
    from .witness import residual_norm
    scaled, phi = scale_conjugate(P, lam)
    lhs = phi(P.eval(x))
    rhs = scaled.eval(phi(x))
    r, s = residual_norm(lhs, rhs)
    return r + s


# ---------------------------------------------------------------------------
# quasiconjugacy verification
# ---------------------------------------------------------------------------


def conjl1_polynomial() -> WeightedFunctionalShift:
    """The l_1 polynomial the transfer commutes with exactly: weights 1/n**4."""
    return WeightedFunctionalShift(weight_offset=0)


def verify_quasiconjugacy(system: BiorthogonalSystem, samples, n_iters: int,
                          tol) -> dict:
    """max over samples and n <= n_iters of ||Phi(P^n a) - Q^n(Phi a)||."""
    from .witness import residual_norm
    P = conjl1_polynomial()
    Q = TransferPolynomial(system)
    tol = mpf(tol)
    worst = mpf(0)
    for a in samples:
        pa = phi_map(system, a)
        for n in range(1, n_iters + 1):
            lhs = phi_map(system, P.image(a, n))
            rhs = Q.image(pa, n)
            r, s = residual_norm(lhs, rhs)
            worst = max(worst, r + s)
    return {"residual": worst, "tol": tol, "pass": bool(worst < tol)}


def dn_identity_gaps(system: BiorthogonalSystem, a: SeqVector, n_max: int):
    """| log|d_n(Phi a)| - log|c_n(a) c_n(W)| | for n = 1..n_max.

    Entries where both sides are zero contribute 0; a one-sided zero
    contributes +inf (a genuine failure).
    """
    Q = TransferPolynomial(system)
    pa = phi_map(system, a)
    ds = Q.coefficient_sequence(pa, n_max)
    cs = orbit_coefficients(a, n_max)
    ws = weight_coefficients(n_max, weight_offset=0)
    gaps = []
    for n in range(1, n_max + 1):
        lhs = ds[n - 1]
        rhs = lc_mul(cs[n - 1], ws[n - 1])
        if lhs.is_zero and rhs.is_zero:
            gaps.append(mpf(0))
        elif lhs.is_zero or rhs.is_zero:
            gaps.append(mpf("+inf"))
        else:
            gaps.append(abs(lhs.logmag - rhs.logmag))
    return gaps
