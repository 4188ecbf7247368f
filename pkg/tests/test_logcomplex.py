import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st
from mpmath import mp, mpf

from polyorbit.errors import ExponentBudgetExceeded, ZeroRoot
from polyorbit.logcomplex import (LogComplex, lc_add, lc_close, lc_ipow,
                                  lc_mul, lc_sign, lc_sub, root_to_one)
from polyorbit.precision import PrecisionConfig

REL_TOL = mpf("1e-25")


def close(a, b, tol=REL_TOL):
    return lc_close(LogComplex.from_complex(a) if not isinstance(a, LogComplex) else a,
                    LogComplex.from_complex(b) if not isinstance(b, LogComplex) else b,
                    tol)


def scalars(min_mag=0.01, max_mag=100.0):
    return st.builds(
        lambda r, t: LogComplex.from_polar(mpmath.log(mpf(r)), mpf(t)),
        st.floats(min_value=min_mag, max_value=max_mag),
        st.floats(min_value=-3.14, max_value=3.14),
    )


def test_mul_real_product():
    two = LogComplex.from_complex(2)
    assert close(lc_mul(two, two), 4)


def test_mul_zero_absorbs():
    z = LogComplex.zero()
    a = LogComplex.from_polar(5, 1)
    assert lc_mul(z, a).is_zero
    assert lc_mul(z, a).phase == 0


def test_mul_phase_wrap_at_boundary():
    # (log 3, pi/2) * (log 3, pi/2) -> (log 9, pi)
    a = LogComplex.from_polar(mpmath.log(3), mp.pi / 2)
    out = lc_mul(a, a)
    assert abs(out.logmag - mpmath.log(9)) < REL_TOL
    assert abs(out.phase - mp.pi) < REL_TOL


def test_ipow_real_base():
    a = LogComplex.from_complex(2)
    out = lc_ipow(a, 1 << 10)
    assert out.logmag == 1024 * a.logmag
    assert out.phase == 0


def test_ipow_exact_phase_reduction():
    # (e^{2 pi i/3})^3 has phase exactly 0 modulo rounding of 2*pi/3
    w = LogComplex.from_polar(0, 2 * mp.pi / 3)
    out = lc_ipow(w, 3)
    assert abs(out.phase) < mpf("1e-48")


def test_ipow_zero_exponent_is_one():
    assert lc_ipow(LogComplex.zero(), 0) == LogComplex.one()
    assert lc_ipow(LogComplex.from_complex(7), 0) == LogComplex.one()


def test_ipow_budget():
    prec = PrecisionConfig(working_digits=50, max_exponent_budget=64)
    with pytest.raises(ExponentBudgetExceeded):
        lc_ipow(LogComplex.from_complex(2), 1 << 65, prec=prec)


def test_root_principal_branch():
    r = root_to_one(LogComplex.from_complex(-1), 2)
    assert abs(r.phase - mp.pi / 2) < REL_TOL  # i


def test_root_real():
    assert close(root_to_one(LogComplex.from_complex(4), 2), 2)


def test_root_form():
    # r^(1/n) e^(i theta/n) for r=8, theta=0.3, n=3
    a = LogComplex.from_polar(mpmath.log(8), mpf("0.3"))
    out = root_to_one(a, 3)
    assert abs(out.logmag - mpmath.log(2)) < REL_TOL
    assert abs(out.phase - mpf("0.1")) < REL_TOL


def test_root_of_zero():
    with pytest.raises(ZeroRoot):
        root_to_one(LogComplex.zero(), 5)
    assert root_to_one(LogComplex.zero(), 5, zero_ok=True).is_zero


@given(scalars(), scalars(), scalars())
def test_mul_associative_commutative(a, b, c):
    assert lc_close(lc_mul(a, b), lc_mul(b, a), REL_TOL)
    assert lc_close(lc_mul(lc_mul(a, b), c), lc_mul(a, lc_mul(b, c)), REL_TOL)


@given(scalars(), st.integers(min_value=1, max_value=10))
def test_ipow_matches_repeated_squaring(a, k):
    sq = a
    for _ in range(k):
        sq = lc_mul(sq, sq)
    ip = lc_ipow(a, 1 << k)
    assert ip.logmag == sq.logmag  # exact: both scale by powers of two
    assert abs(ip.phase - sq.phase) < REL_TOL


@given(scalars(), st.integers(min_value=1, max_value=12))
def test_root_inverts_power_on_principal_sector(a, n):
    if not (-mp.pi / n < a.phase <= mp.pi / n):
        a = LogComplex.from_polar(a.logmag, a.phase / n)
    back = root_to_one(lc_ipow(a, n), n)
    assert lc_close(back, a, REL_TOL)


def test_root_tends_to_one():
    a = LogComplex.from_polar(mpmath.log(mpf("1e9")), mpf("2.5"))
    prev = mpf("inf")
    for n in (10, 1000, 10 ** 6):
        r = root_to_one(a, n)
        assert abs(r.logmag) < prev
        prev = abs(r.logmag)
    assert abs(root_to_one(a, 10 ** 6).logmag) < mpf("1e-4")


def test_add_extreme_magnitudes():
    big = LogComplex.from_polar(mpf(10) ** 6, 0)
    small = LogComplex.from_polar(-mpf(10) ** 6, 1)
    assert lc_add(big, small) == big
    a = LogComplex.from_complex(3)
    b = LogComplex.from_complex(4)
    assert close(lc_add(a, b), 7)
    assert lc_sub(a, a).is_zero or lc_sub(a, a).logmag < a.logmag - 45 * mpmath.log(10)


def test_sign_conventions():
    assert lc_sign(LogComplex.zero()) == LogComplex.one()
    s = lc_sign(LogComplex.from_complex(mpmath.mpc(0, -2)))
    assert abs(s.logmag) == 0 and abs(s.phase + mp.pi / 2) < REL_TOL


def test_serialization_round_trip():
    a = LogComplex.from_polar(mpf("1234.5678901234567890123456789"), mpf("-2.7182818284590452"))
    b = LogComplex.deserialize(a.serialize())
    assert abs(a.logmag - b.logmag) <= abs(a.logmag) * mpf("1e-50")
    assert abs(a.phase - b.phase) <= mpf("1e-50")
    assert LogComplex.deserialize(LogComplex.zero().serialize()).is_zero
