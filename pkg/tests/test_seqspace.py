import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st
from mpmath import mp, mpf

from polyorbit.errors import NotInDomain, WrongSpace
from polyorbit.logcomplex import LogComplex
from polyorbit.polynomials import fixed_vector
from polyorbit.seqspace import (SeqVector, SpaceTag, TailModel, backward_shift,
                                basis_vector, forward_shift, log_factorial,
                                vec_add, vec_sub, weighted_forward)

REL_TOL = mpf("1e-25")
L1 = SpaceTag.lp(1)
L2 = SpaceTag.lp(2)


def test_fixed_vector_norm_l1():
    # head (2), geometric tail ratio 1/2: 2 * 1/(1 - 1/2) = 4
    xbar = fixed_vector(1)
    assert abs(xbar.norm() - 4) < mpf("1e-45")
    assert abs(xbar.coord(2).to_mpc() - 1) < REL_TOL


def test_norm_basis_l2():
    assert abs(basis_vector(L2, 1).norm() - 1) == 0


def test_norm_sup_constant_tail():
    v = SeqVector.make(SpaceTag.c(), [mpf("0.5")], TailModel.constant(mpf("1.2")))
    assert abs(v.norm() - mpf("1.2")) == 0


def test_factorial_tail_norm_matches_series():
    v = SeqVector.make(L1, [], TailModel.factorial_power(0, 1, 1))
    brute = sum(mpf(1) / mpmath.factorial(k) for k in range(1, 60))
    assert abs(v.norm() - brute) < mpf("1e-45")


def test_backward_shift_kills_basis():
    assert backward_shift(basis_vector(L1, 1)).norm() == 0


def test_backward_shift_fixed_vector_halves():
    # x1 * B(xbar) = xbar
    xbar = fixed_vector(1)
    b = backward_shift(xbar)
    recon = b.scale(xbar.coord(1))
    assert vec_sub(recon, xbar).norm() < REL_TOL


def test_weighted_backward_basis():
    # weight at i=1 is 1/2**4
    out = backward_shift(basis_vector(L1, 2), weight_offset=1)
    assert abs(out.coord(1).to_mpc() - mpf(1) / 16) < REL_TOL
    assert out.coord(2).is_zero


def test_forward_shift_basis():
    assert vec_sub(forward_shift(basis_vector(L1, 1), 1), basis_vector(L1, 2)).norm() == 0


def test_forward_shift_isometry():
    xbar = fixed_vector(2)
    for n in (1, 3, 7):
        assert abs(forward_shift(xbar, n).norm() - xbar.norm()) < REL_TOL


def test_weighted_forward_coordinates():
    # j-th coordinate of S_w^k is (j!/(j-k)!)**4 times the source
    e1 = basis_vector(L1, 1)
    out = weighted_forward(e1, 2)
    assert abs(out.coord(3).to_mpc() - 1296) < REL_TOL  # (3!/1!)**4
    assert out.coord(1).is_zero and out.coord(2).is_zero


def test_weighted_forward_factorial_tail():
    # image coordinate j > k + n is j!**4 / ((j-k)!**4 (j-k)!)
    y = SeqVector.make(L1, [1, 1], TailModel.factorial_power(2, 1, 1))
    k = 2
    out = weighted_forward(y, k)
    j = 7  # beyond k + head
    expect = mpmath.exp(4 * (log_factorial(j) - log_factorial(j - k))
                        - log_factorial(j - k))
    assert abs(out.coord(j).to_mpc() - expect) < REL_TOL * expect


def test_weighted_forward_rejects_constant_tail():
    v = SeqVector.make(SpaceTag.c(), [1], TailModel.constant(1))
    with pytest.raises((NotInDomain, WrongSpace)):
        weighted_forward(v, 1)


def test_backward_of_forward_is_identity():
    xbar = fixed_vector(1)
    v = forward_shift(xbar, 3)
    for _ in range(3):
        v = backward_shift(v)
    assert vec_sub(v, xbar).norm() < REL_TOL


def test_coord_truncate_limit():
    xbar = fixed_vector(1)
    t = xbar.truncate(1)
    assert t.head_len == 1 and t.tail.kind == "zero"
    assert abs(t.coord(1).to_mpc() - 2) < REL_TOL
    v = SeqVector.make(SpaceTag.c(), [7], TailModel.constant(mpf("1.2")))
    assert abs(v.limit_value().to_mpc() - mpf("1.2")) < REL_TOL
    with pytest.raises(WrongSpace):
        fixed_vector(1).limit_value()


def test_truncation_converges():
    xbar = fixed_vector(1)
    prev = mpf("inf")
    for n in (2, 6, 12, 24):
        d = vec_sub(xbar.truncate(n), xbar).norm()
        assert d < prev
        prev = d
    assert prev < mpf("1e-6")


def _random_vec(draw_vals, tail_ratio):
    return SeqVector.make(L2, draw_vals, TailModel.geometric(1, tail_ratio))


@given(st.lists(st.floats(min_value=-3, max_value=3), min_size=1, max_size=5),
       st.lists(st.floats(min_value=-3, max_value=3), min_size=1, max_size=5))
def test_triangle_inequality(a, b):
    u = SeqVector.make(L2, [mpf(x) for x in a])
    v = SeqVector.make(L2, [mpf(x) for x in b])
    assert vec_add(u, v).norm() <= u.norm() + v.norm() + REL_TOL


@given(st.floats(min_value=0.01, max_value=50),
       st.lists(st.floats(min_value=-3, max_value=3), min_size=1, max_size=5))
def test_absolute_homogeneity(t, a):
    v = SeqVector.make(L2, [mpf(x) for x in a], TailModel.geometric(1, mpf("0.5")))
    assert abs(v.scale(mpf(t)).norm() - mpf(t) * v.norm()) <= REL_TOL * (1 + v.norm() * mpf(t))


def test_limit_value_norm_continuous():
    v = SeqVector.make(SpaceTag.c(), [mpf("0.3")], TailModel.constant(mpf("0.9")))
    assert v.limit_value().abs_mpf() <= v.norm() + REL_TOL


def test_json_round_trip_bit_exact():
    xbar = fixed_vector(2)
    v = SeqVector.make(L2, [mpmath.mpc(1, -2), mpf("0.125")], xbar.tail)
    w = SeqVector.loads(v.dumps())
    assert w.space == v.space
    assert vec_sub(v, w).norm() < mpf("1e-49") * v.norm()
    f = SeqVector.make(L1, [3], TailModel.factorial_power(1, 5, 1))
    g = SeqVector.loads(f.dumps())
    assert g.tail.offset == 1 and g.tail.power == 5


def test_linf_dimension_guard():
    with pytest.raises(WrongSpace):
        SeqVector.make(SpaceTag.linf(2), [1, 2, 3])
