import mpmath
import pytest
from mpmath import mp, mpf

from polyorbit.errors import NoClosedForm, SpaceMismatch
from polyorbit.logcomplex import LogComplex
from polyorbit.polynomials import (AffineHyperplane, CoordinateSquare,
                                   FunctionalShift, PowerShift, Scaled,
                                   WeightedFunctionalShift, c0_reference_vector,
                                   fixed_vector, limit_radius, op_norm_oracle,
                                   orbit_coefficients, weight_coefficients)
from polyorbit.sampling import random_vector
from polyorbit.seqspace import SeqVector, SpaceTag, TailModel, basis_vector, vec_sub

REL_TOL = mpf("1e-25")
L1 = SpaceTag.lp(1)
L2 = SpaceTag.lp(2)


# -- evaluation -------------------------------------------------------------


def test_fixed_vector_is_fixed():
    P = FunctionalShift(L1)
    xbar = fixed_vector(1)
    assert vec_sub(P.eval(xbar), xbar).norm() / xbar.norm() < mpf("1e-45")


def test_eval_kills_basis():
    P = FunctionalShift(L1)
    assert P.eval(basis_vector(L1, 1)).norm() == 0


def test_power_shift_constant_tail():
    P = PowerShift(2, SpaceTag.c())
    v = SeqVector.make(SpaceTag.c(), [], TailModel.constant(2))
    out = P.eval(v)
    assert abs(out.limit_value().to_mpc() - 4) < REL_TOL


def test_space_mismatch():
    P = FunctionalShift(L2)
    with pytest.raises(SpaceMismatch):
        P.eval(fixed_vector(1))


# -- closed-form iteration ---------------------------------------------------


def test_iterate_fixed_point_heads():
    P = FunctionalShift(L1)
    xbar = fixed_vector(1)
    tr = P.iterate(xbar, 5)
    for st in tr.steps:
        assert abs(st.head[0].to_mpc() - 2) < REL_TOL
        assert abs(st.lognorm - mpmath.log(4)) < REL_TOL


def test_coefficient_product():
    # c_3 of (2,2,2,...) = 2**4 * 2**2 * 2 = 128
    x = SeqVector.make(L1, [2, 2, 2])
    assert abs(orbit_coefficients(x, 3)[-1].to_mpc() - 128) < REL_TOL


def test_coefficient_recurrence_vs_exponent_sum(rng):
    x = random_vector(L1, rng)
    cs = orbit_coefficients(x, 10)
    for n in (3, 7, 10):
        direct = sum((1 << (n - i)) * x.coord(i).logmag for i in range(1, n + 1))
        assert abs(cs[n - 1].logmag - direct) < REL_TOL * max(1, abs(direct))


def test_power_shift_closed_form():
    # P^n(a)_j = a_{j+n}**(m**n), cross-checked against repeated eval
    P = PowerShift(2, SpaceTag.c())
    a = SeqVector.make(SpaceTag.c(), [mpf("1.1"), mpf("0.7"), mpf("1.3"), mpf("0.9")],
                       TailModel.constant(mpf("0.8")))
    direct = a
    for _ in range(4):
        direct = P.eval(direct)
    closed = P.image(a, 4)
    for j in (1, 2, 5):
        assert abs(direct.coord(j).to_mpc() - closed.coord(j).to_mpc()) < REL_TOL


@pytest.mark.parametrize("family", [
    FunctionalShift(L1), FunctionalShift(L2), WeightedFunctionalShift(),
    AffineHyperplane(2, mpf("0.5")), PowerShift(2, SpaceTag.c0()),
    Scaled(FunctionalShift(L1), LogComplex.from_complex(mpmath.mpc(0, 2))),
])
def test_closed_form_matches_repeated_eval(family, rng):
    space = family.space
    tail = "zero" if isinstance(family, WeightedFunctionalShift) else "geometric"
    x = random_vector(space, rng, head_len=5, tail=tail).scale(mpf("0.8"))
    direct = x
    for _ in range(6):
        direct = family.eval(direct)
    closed = family.image(x, 6)
    num = vec_sub(direct, closed).norm()
    den = max(direct.norm(), mpf(10) ** -40)
    assert num / den < REL_TOL or num < mpf(10) ** -40


def test_homogeneity(rng):
    for family in (FunctionalShift(L2), PowerShift(3, SpaceTag.c0()),
                   AffineHyperplane(2, mpf("0.25"))):
        x = random_vector(family.space, rng, head_len=4)
        t = LogComplex.from_complex(mpmath.mpc(mpf(rng.uniform(0.5, 2)), mpf(rng.uniform(-1, 1))))
        lhs = family.eval(x.scale(t))
        from polyorbit.logcomplex import lc_ipow
        rhs = family.eval(x).scale(lc_ipow(t, family.degree))
        assert vec_sub(lhs, rhs).norm() <= REL_TOL * max(mpf(1), rhs.norm())


# -- operator norms and radii -------------------------------------------------


@pytest.mark.parametrize("p,norm,radius", [(1, mpf("0.25"), 4), (2, mpf("0.5"), 2)])
def test_functional_shift_norms(p, norm, radius):
    P = FunctionalShift(SpaceTag.lp(p))
    assert abs(P.op_norm_analytic() - norm) < mpf("1e-45")
    assert abs(limit_radius(P) - radius) < mpf("1e-45")


def test_affine_norm_and_radius():
    P = AffineHyperplane(2, mpf("0.5"))
    assert P.op_norm_analytic() == 1
    assert limit_radius(P) == 1


def test_power_shift_norm():
    assert PowerShift(2, SpaceTag.c()).op_norm_analytic() == 1


def test_weighted_norm_is_one_sixtyfourth():
    # two-coordinate reduction max s*t/2**4 on s+t=1 gives 1/(4*16)
    W = WeightedFunctionalShift()
    assert W.op_norm_analytic() == mpf(1) / 64


def test_oracle_confirms_analytic_values():
    for fam, tol in ((FunctionalShift(L2), mpf("1e-3")),
                     (WeightedFunctionalShift(), mpf("1e-3")),
                     (CoordinateSquare(3), mpf("1e-9"))):
        o = op_norm_oracle(fam, trunc_dim=16, samples=20000, polish_steps=120, seed=7)
        a = fam.op_norm_analytic()
        assert abs(o - a) < tol
        assert o <= a + REL_TOL  # lower-bound method never overshoots


def test_oracle_square_attained_at_ones():
    o = op_norm_oracle(CoordinateSquare(3), trunc_dim=3, samples=500, seed=3)
    assert abs(o - 1) < mpf("1e-9")


def test_scaled_norm_and_transfer_norm():
    S = Scaled(FunctionalShift(L2), LogComplex.from_complex(4))
    assert abs(S.op_norm_analytic() - 2) < REL_TOL
    from polyorbit.transfer import TransferPolynomial, build_system
    Q = TransferPolynomial(build_system(N=4))
    with pytest.raises(NoClosedForm):
        Q.op_norm_analytic()


# -- limit-ball absorption -----------------------------------------------------


def test_limit_ball_absorption_sample(rng):
    P = FunctionalShift(L1)
    r = limit_radius(P)
    for _ in range(20):
        x = random_vector(L1, rng, head_len=5)
        x = x.scale(mpf("0.9") * r / x.norm())
        tr = P.iterate(x, 6)
        for st in tr.steps[1:]:
            bound = (mpf(2) ** st.n) * mpmath.log(mpf("0.9")) + mpmath.log(r) + REL_TOL
            assert st.lognorm <= bound


def test_weight_coefficients_match_display():
    # c_2(W) = W_1**2 * W_2 with W = (1, 1/2!**4, ...)
    ws = weight_coefficients(3)
    assert abs(ws[0].to_mpc() - 1) < REL_TOL
    assert abs(ws[1].abs_mpf() - mpf(1) / 16) < REL_TOL
    assert abs(ws[2].abs_mpf() - (mpf(1) / 16) ** 2 / 1296) < REL_TOL


def test_c0_reference_vector_fixed():
    P = FunctionalShift(SpaceTag.c0())
    v = c0_reference_vector(2)
    assert vec_sub(P.eval(v), v).norm() < REL_TOL
    assert P.op_norm_analytic() == 1
