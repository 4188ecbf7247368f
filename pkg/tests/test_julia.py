import mpmath
import pytest
from mpmath import mp, mpf

from polyorbit.errors import InequalityFails, ShapeMismatch
from polyorbit.julia import (Certificate, certify_domination, certify_enjp,
                             classify, classify_iterative, classify_power_iterate,
                             enjp_display_holds, enjp_min_log_k,
                             enjp_reference_vector, reference_julia_vectors,
                             scaled_ray_probe, verify)
from polyorbit.logcomplex import LogComplex, root_to_one
from polyorbit.polynomials import (AffineHyperplane, FunctionalShift, PowerShift,
                                   Scaled, WeightedFunctionalShift, fixed_vector,
                                   limit_radius)
from polyorbit.sampling import random_julia_dominating, random_vector
from polyorbit.seqspace import SeqVector, SpaceTag, TailModel, log_factorial

L1 = SpaceTag.lp(1)
P1 = FunctionalShift(L1)
XBAR = fixed_vector(1)


# -- classify: the dichotomy on the fixed ray ---------------------------------


def test_fixed_vector_is_julia_via_domination():
    c = classify(P1, XBAR)
    assert c.verdict == "Julia"
    assert c.certificate.kind == "domination"
    assert verify(c.certificate, P1, XBAR)


def test_inside_ball_attracts():
    x = XBAR.scale(mpf("0.9"))
    c = classify(P1, x)
    assert c.verdict == "AttractsToZero"
    assert c.certificate.kind == "in_limit_ball"
    assert c.certificate.data["step"] == 0  # ||0.9 xbar|| = 3.6 < 4
    assert verify(c.certificate, P1, x)


def test_outside_ray_escapes():
    x = XBAR.scale(mpf("1.1"))
    c = classify(P1, x)
    assert c.verdict == "Escapes"
    assert c.certificate.kind == "blow_up"
    assert verify(c.certificate, P1, x)


def test_c_space_closed_form():
    Pc = PowerShift(2, SpaceTag.c())
    v = SeqVector.make(SpaceTag.c(), [3, mpf("0.1")], TailModel.constant(mpf("1.2")))
    assert classify(Pc, v).verdict == "Escapes"
    w = SeqVector.make(SpaceTag.c(), [5], TailModel.constant(mpmath.mpc(0, 1)))
    assert classify(Pc, w).verdict == "Julia"
    u = SeqVector.make(SpaceTag.c(), [5, 2], TailModel.constant(mpf("0.3")))
    assert classify(Pc, u).verdict == "AttractsToZero"


def test_power_shift_lp_all_attracts():
    Pl = PowerShift(2, SpaceTag.c0())
    v = random_vector(SpaceTag.c0(), __import__("random").Random(3), 4)
    assert classify(Pl, v).verdict == "AttractsToZero"


def test_affine_closed_form():
    A = AffineHyperplane(2, mpf("0.5"))
    inside = SeqVector.make(L1, [mpf("0.7"), 1, 2])
    on = SeqVector.make(L1, [mpmath.mpc(0, 1), 1])
    out = SeqVector.make(L1, [mpf("1.3")])
    assert classify(A, inside).verdict == "AttractsToZero"
    assert classify(A, on).verdict == "Julia"
    assert classify(A, out).verdict == "Escapes"


# -- domination ---------------------------------------------------------------


def test_domination_reflexive_and_scaled():
    assert certify_domination(XBAR, XBAR)
    assert not certify_domination(XBAR.scale(mpf("0.5")), XBAR)
    assert certify_domination(XBAR.scale(mpf("1.5")), XBAR)


def test_domination_random_projections(rng):
    from polyorbit.witness import d_dense_project
    for _ in range(10):
        x = random_vector(L1, rng, 4)
        merged, _ = d_dense_project(x)
        assert certify_domination(merged, XBAR)


def test_domination_tail_kinds():
    # geometric x vs factorial ref: x eventually dominates
    geo = SeqVector.make(L1, [10], TailModel.geometric(1, mpf("0.5")))
    fact = SeqVector.make(L1, [1], TailModel.factorial_power(0, 1, 1))
    assert certify_domination(geo, fact)
    assert not certify_domination(fact, geo)


# -- the factorial-tail certificate --------------------------------------------


def test_enjp_paper_constant_threshold():
    # (2n)!**5 satisfies the display from n = 17 on; fails below
    ok16, bad = enjp_display_holds(16, 5, 5 * log_factorial(32), 200)
    assert not ok16 and bad is not None
    for n in (17, 60, 200):
        ok, _ = enjp_display_holds(n, 5, 5 * log_factorial(2 * n), 200)
        assert ok


def test_enjp_certificate_boundary():
    ref = enjp_reference_vector(2, 1)
    cert = certify_enjp(ref, 2, 1, 200)
    W = WeightedFunctionalShift()
    assert verify(cert, W, ref)
    # N at half the threshold is refused
    low = SeqVector(L1, (LogComplex(ref.coord(1).logmag - mpmath.log(2), mpf(0)),), ref.tail)
    with pytest.raises(InequalityFails):
        certify_enjp(low, 2, 1, 200)
    with pytest.raises(ShapeMismatch):
        certify_enjp(XBAR, 2, 1, 200)


def test_weighted_reference_registered():
    W = WeightedFunctionalShift()
    refs = reference_julia_vectors(W)
    assert refs and refs[0][1].startswith("en_jp")
    big = refs[0][0].scale(2)
    assert certify_domination(big, refs[0][0])


# -- ray probe -----------------------------------------------------------------


def test_scaled_ray_probe_escape():
    x = XBAR.scale(mpf("1.1"))
    rep = scaled_ray_probe(P1, x, 1 / mpf("1.1"), budget=10)
    assert rep["predicted_escape"] and rep["rate_holds"]


def test_scaled_ray_probe_no_conclusion():
    rep = scaled_ray_probe(P1, XBAR, mpf("0.9"), budget=10)
    assert not rep["predicted_escape"]
    rep2 = scaled_ray_probe(P1, XBAR.scale(mpf("0.5")), mpf("0.9"), budget=10)
    assert rep2["scaled_verdict"] == "AttractsToZero"


# -- invariants ----------------------------------------------------------------


def test_verify_self_audit(rng):
    polys = [P1, FunctionalShift(SpaceTag.lp(2)), AffineHyperplane(2, mpf("0.5"))]
    checked = 0
    for _ in range(60):
        fam = polys[rng.randrange(len(polys))]
        x = random_vector(fam.space, rng, 4).scale(mpf(rng.uniform(0.2, 2.0)))
        c = classify(fam, x, budget=16)
        if c.certificate is not None:
            assert verify(c.certificate, fam, x)
            checked += 1
    assert checked >= 50


def test_mutual_exclusion(rng):
    # nothing gets both an in-ball and a domination certificate
    for _ in range(40):
        x = random_vector(L1, rng, 4).scale(mpf(rng.uniform(0.2, 2.0)))
        c = classify(P1, x, budget=16)
        if c.verdict == "AttractsToZero":
            assert not certify_domination(x, XBAR)


def test_closed_vs_iterative_agreement(rng):
    Pc = PowerShift(2, SpaceTag.c())
    agree = 0
    for _ in range(60):
        lim = [mpf(rng.uniform(0.2, 0.9)), mpf(1), mpf(rng.uniform(1.1, 2.0))][rng.randrange(3)]
        th = mpf(rng.uniform(-3, 3))
        v = SeqVector.make(SpaceTag.c(),
                           [mpf(rng.uniform(-2, 2)) for _ in range(rng.randint(0, 4))],
                           TailModel.constant(lim * mpmath.exp(mpmath.mpc(0, th))))
        cf = classify(Pc, v).verdict
        it = classify_iterative(Pc, v, budget=16).verdict
        if cf == "Julia":
            assert it in ("Julia", "Undetermined")
        else:
            assert it == cf
        agree += 1
    assert agree == 60


def test_p_invariance_of_julia_verdict(rng):
    for _ in range(10):
        x = random_julia_dominating(1, rng)
        c = classify(P1, x, budget=20)
        if c.verdict == "Julia":
            img = P1.eval(x)
            assert classify(P1, img, budget=20).verdict == "Julia"


def test_iterated_map_classification_matches(rng):
    for n_fold in (2, 3):
        for x in (XBAR, XBAR.scale(mpf("0.9")), XBAR.scale(mpf("1.05")),
                  random_julia_dominating(1, rng)):
            base = classify(P1, x, budget=12)
            comp = classify_power_iterate(P1, n_fold, x, budget=12)
            if base.verdict in ("AttractsToZero", "Escapes", "Julia"):
                assert comp.verdict == base.verdict


def test_scaling_conjugacy_classification(rng):
    for lam_val in (4, mpmath.mpc(0, 1), mpf("0.01")):
        lam = LogComplex.from_complex(lam_val)
        S = Scaled(P1, lam)
        factor = root_to_one(lam, 1)
        inv = LogComplex(-factor.logmag, LogComplex.from_polar(0, -factor.phase).phase)
        for x in (XBAR, XBAR.scale(mpf("0.8")), XBAR.scale(mpf("1.2"))):
            direct = classify(P1, x, budget=12)
            mapped = classify(S, x.scale(inv), budget=12)
            assert mapped.verdict == direct.verdict
            if mapped.certificate is not None:
                assert verify(mapped.certificate, S, x.scale(inv))


def test_certificate_json_round_trip():
    c = classify(P1, XBAR)
    c2 = Certificate.loads(c.certificate.dumps())
    assert c2.kind == c.certificate.kind
    assert verify(c2, P1, XBAR)
