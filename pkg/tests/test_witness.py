import mpmath
import pytest
from mpmath import mp, mpf

from polyorbit.errors import (CoefficientTooSmall, GammaTooLarge, NotInDomain,
                              ScheduleSearchExhausted)
from polyorbit.julia import certify_domination, verify
from polyorbit.logcomplex import LogComplex, lc_ipow, root_to_one
from polyorbit.polynomials import (FunctionalShift, PowerShift, Scaled,
                                   WeightedFunctionalShift, fixed_vector,
                                   limit_radius, orbit_coefficients)
from polyorbit.sampling import (random_finite_target, random_julia_dominating,
                                random_nonzero_start, random_vector,
                                random_with_norm)
from polyorbit.seqspace import (SeqVector, SpaceTag, TailModel, backward_shift,
                                basis_vector, forward_shift, vec_sub)
from polyorbit.witness import (CoordFunctional, GammaSet, bjp_dense_check,
                               d_dense_project, default_dense_targets,
                               disk_supercyclic_build, doubling_phase,
                               doubling_transit_vector, gamma_unbounded_witness,
                               gamma_zero_witness, numerical_orbit,
                               periodic_point, residual_norm,
                               sensitivity_witness, transitivity_witness,
                               weak_dense_witness, weak_witness_spike_threshold)

L1 = SpaceTag.lp(1)
P1 = FunctionalShift(L1)
XBAR = fixed_vector(1)


# -- periodic points -----------------------------------------------------------


def test_periodic_reconstructs_fixed_point():
    # y = xbar, n = 1: c_1 = 2 and the block sum is (2, 1, 1/2, ...) = xbar
    tilde, rep = periodic_point(P1, XBAR, 1)
    assert rep.passed
    d, s = residual_norm(tilde, XBAR)
    assert d + s < mpf("1e-30")


def test_periodic_residual_and_geometric_bound(rng):
    for _ in range(8):
        y = random_julia_dominating(1, rng)
        n = rng.randint(1, 6)
        tilde, rep = periodic_point(P1, y, n)
        assert rep.residuals["relative_periodicity"] < mpf("1e-20")
        assert rep.passed  # includes the geometric distance bound


def test_periodic_needs_expanding_coefficient():
    small = XBAR.scale(mpf("0.2"))
    with pytest.raises(CoefficientTooSmall):
        periodic_point(P1, small, 3)


def test_periodic_weighted_family_diverges():
    W = WeightedFunctionalShift()
    y = SeqVector.make(L1, [100, 1, 1])
    with pytest.raises(NotInDomain):
        periodic_point(W, y, 2)


# -- transitivity ----------------------------------------------------------------


def test_transitivity_self_consistency():
    # x = y = xbar, n = 2: the witness is xbar itself
    w, rep = transitivity_witness(P1, XBAR, XBAR, 2)
    assert rep.passed
    d, s = residual_norm(w, XBAR)
    assert d + s < mpf("1e-40")


def test_transitivity_residual_zero_at_precision(rng):
    for _ in range(10):
        x = random_julia_dominating(1, rng)
        y = random_julia_dominating(1, rng)
        n = rng.randint(1, 8)
        w, rep = transitivity_witness(P1, x, y, n)
        assert rep.residuals["image_vs_target"] < mpf("1e-25")
        assert rep.passed


def test_transitivity_weighted_version(rng):
    W = WeightedFunctionalShift()
    x = SeqVector.make(L1, [mpf(50), 2, 3, 1], TailModel.factorial_power(1, 1, 1))
    y = SeqVector.make(L1, [1, mpf("0.5")], TailModel.factorial_power(2, 1, 1))
    w, rep = transitivity_witness(W, x, y, 3)
    assert rep.residuals["image_vs_target"] < mpf("1e-25")


def test_transitivity_distance_shrinks():
    x = random_julia_dominating(1, __import__("random").Random(5))
    dists = []
    for n in (2, 5, 8):
        _, rep = transitivity_witness(P1, x, XBAR, n)
        dists.append(rep.residuals["distance_to_start"])
    assert dists[2] < dists[0]


# -- d-dense projection -----------------------------------------------------------


def test_project_zero_gives_reference():
    z = SeqVector.make(L1, [])
    merged, rep = d_dense_project(z)
    assert vec_sub(merged, XBAR).norm() < mpf("1e-40")
    assert abs(rep.residuals["distance"] - 4) < mpf("1e-30")


def test_project_dominating_is_identity():
    big = XBAR.scale(mpf("1.5"))
    merged, rep = d_dense_project(big)
    assert rep.residuals["distance"] < mpf("1e-40")


def test_project_random_within_radius(rng):
    for _ in range(15):
        x = random_with_norm(L1, rng, mpf(rng.uniform(0.1, 8.0)))
        merged, rep = d_dense_project(x)
        assert rep.residuals["distance"] <= 4 + mpf("1e-12")
        assert certify_domination(merged, XBAR)


# -- weak witness -----------------------------------------------------------------


def test_weak_witness_deviation_and_certificate():
    fs = [CoordFunctional.make({1: 1}), CoordFunctional.make({2: mpf("0.5")})]
    x0 = SeqVector.make(L1, [mpf("0.3"), mpf("-0.2")])
    n = weak_witness_spike_threshold(mpf("0.1"), 1, 3, XBAR)
    xn, rep = weak_dense_witness(x0, fs, mpf("0.1"), n)
    assert rep.residuals["max_functional_deviation"] <= mpf("0.1")
    assert rep.extra["certified"]
    assert verify(rep.extra["certificate"], P1, rep.extra["spike_vector"])


def test_weak_witness_withheld_for_small_spike():
    fs = [CoordFunctional.make({1: 1})]
    x0 = SeqVector.make(L1, [])
    _, rep = weak_dense_witness(x0, fs, mpf("0.1"), n=3)
    assert not rep.extra["certified"]


def test_weak_witness_spike_identity():
    # P^k(z) = (eps_t/r)**(2**k) * (x_k / xbar_k) * xbar
    fs = [CoordFunctional.make({1: 1}), CoordFunctional.make({2: 1})]
    x0 = SeqVector.make(L1, [])
    n = weak_witness_spike_threshold(mpf("0.2"), 1, 3, XBAR)
    xn, rep = weak_dense_witness(x0, fs, mpf("0.2"), n)
    z = rep.extra["spike_vector"]
    img = P1.image(z, 3)
    lam = LogComplex(rep.extra["lambda_logmag"], img.coord(1).phase)  # magnitude check
    assert abs(img.log_norm() - (rep.extra["lambda_logmag"] + XBAR.log_norm())) < mpf("1e-30")


# -- scalar-set witnesses -----------------------------------------------------------


def test_gamma_zero_x_zero_equality():
    z, rep = gamma_zero_witness(SeqVector.make(L1, []), mpf("0.01"), mpf("1e-6"))
    assert abs(rep.residuals["gamma_z_vs_x"] - mpf("0.01")) < mpf("1e-40")
    assert rep.extra["certified"] and rep.passed


def test_gamma_zero_random(rng):
    for _ in range(10):
        x = random_vector(L1, rng, 4)
        eps = mpf(rng.uniform(0.01, 0.5))
        gam = eps / (4 * mpf(rng.uniform(1.5, 50.0)))
        z, rep = gamma_zero_witness(x, eps, gam)
        assert rep.residuals["gamma_z_vs_x"] < eps
        assert rep.extra["certified"]


def test_gamma_zero_precondition():
    with pytest.raises(GammaTooLarge):
        gamma_zero_witness(SeqVector.make(L1, []), mpf("0.01"), mpf("0.005"))


def test_gamma_unbounded_power_shift_exact():
    C0 = SpaceTag.c0()
    P = PowerShift(2, C0)
    x = SeqVector.make(C0, [1, mpf("0.5")])
    y = SeqVector.make(C0, [mpf("0.7"), mpmath.mpc(0, mpf("0.3"))])
    w, lam, rep = gamma_unbounded_witness(P, x, y, GammaSet.unbounded(2, 3), 3)
    assert rep.residuals["lam_image_vs_target"] < mpf("1e-25")


def test_gamma_unbounded_functional_shift(rng):
    for _ in range(8):
        x = random_nonzero_start(1, rng)
        y = random_finite_target(L1, rng)
        n = rng.randint(2, 8)
        w, lam, rep = gamma_unbounded_witness(P1, x, y, GammaSet.unbounded(2, 3), n)
        assert rep.residuals["lam_image_vs_target"] < mpf("1e-25")
        assert rep.passed


def test_root_shift_norm_bound(rng):
    # ||F(y)||_infty <= max(1, ||y||)
    from polyorbit.witness import _root_shift
    C0 = SpaceTag.c0()
    for _ in range(10):
        y = random_finite_target(C0, rng, rng.randint(1, 5))
        fy = _root_shift(y, 1, 2)
        assert fy.norm() <= max(mpf(1), y.norm()) + mpf("1e-30")


# -- disk supercyclic build ------------------------------------------------------


def test_disk_build_schedule_and_residuals():
    targets = default_dense_targets(6)
    x, schedule, residuals, rep = disk_supercyclic_build(targets, m=2)
    assert all(b > a for a, b in zip(schedule, schedule[1:]))
    for k, r in enumerate(residuals, start=1):
        assert r <= mpf(1) / (k + 1) + mpf("1e-6")
    # condition: l_k / 2**(m**n_k) inside the unit disk
    for (y, l), n_k in zip(default_dense_targets(6), schedule):
        lc = LogComplex.from_complex(1) if l is None else l
    assert rep.passed
    assert abs(x.tail.limit.to_mpc() - 2) < mpf("1e-30")


def test_disk_build_smallest_n1_matches_scan():
    # brute-force the smallest n_1 for a single target
    targets = [(SeqVector.make(SpaceTag.c(), [1]), LogComplex.from_complex(1))]
    x, schedule, residuals, _ = disk_supercyclic_build(targets, m=2)
    n1 = schedule[0]
    found = None
    for n in range(1, 64):
        big = 2 ** n
        ratio = root_to_one(LogComplex.from_complex(1), big)
        cond_ii = abs(ratio.to_mpc() - 1) < 1
        cond_iii = 0 < big * mpmath.log(2)
        if cond_ii and cond_iii:
            found = n
            break
    assert n1 == found == 1


def test_disk_build_rejects_zero_limits():
    with pytest.raises(ValueError):
        disk_supercyclic_build([(SeqVector.make(SpaceTag.c(), [1]), 0)])


# -- doubling phase ---------------------------------------------------------------


def test_doubling_single_target_exact():
    # theta1 = theta2 / 2**n hits exactly at time n
    theta2 = mpf("1.234")
    th1, hits, rep = doubling_phase(2, [theta2], mpf("1e-6"))
    assert rep.passed


def test_doubling_two_targets():
    th1, hits, rep = doubling_phase(2, [mpf(0), mp.pi], mpf("1e-3"))
    assert rep.passed and len(hits) == 2 and hits[1] > hits[0]


def test_doubling_transit_bound():
    C = SpaceTag.c()
    u = SeqVector.make(C, [mpf("0.3")])
    v = SeqVector.make(C, [mpf("0.4"), mpf("-0.1")])
    th2 = mpf("0.7")
    n = 9
    th1 = th2 / (2 ** n)  # exact single-target start
    xn, rep = doubling_transit_vector(u, v, th1, th2, n, 2)
    assert rep.passed


# -- numerical orbit ---------------------------------------------------------------


def test_numerical_orbit_fixed_point_constant():
    S = Scaled(P1, LogComplex.from_complex(1))
    samples = numerical_orbit(S, XBAR, 1, budget=6)
    vals = [s["value"] for s in samples]
    assert all(abs(v - vals[0]) < 1e-30 for v in vals)


def test_numerical_orbit_conjugation_law(rng):
    # samples of ||x0|| P at x0/||x0|| match the ||x0||-conjugated orbit
    x0 = random_julia_dominating(1, rng)
    nrm = x0.norm()
    S = Scaled(P1, LogComplex.from_complex(nrm))
    u = x0.scale(1 / nrm)
    samples = numerical_orbit(S, u, 1, budget=5)
    base = numerical_orbit(P1, x0, 1, budget=5)
    for s, b in zip(samples, base):
        assert abs(s["value"] - b["value"] / complex(float(nrm), 0)) < 1e-20


def test_numerical_orbit_overflow_flag():
    x = XBAR.scale(2)
    samples = numerical_orbit(P1, x, 1, budget=12)
    assert any(s["overflow"] for s in samples)


# -- sensitivity --------------------------------------------------------------------


def test_sensitivity_separation():
    y, sep, rep = sensitivity_witness(P1, XBAR, 3, mpf("0.1"))
    assert sep > 1 and rep.passed
    for k in range(1, 4):
        if not XBAR.coord(k).is_zero:
            assert abs(y.coord(k).to_mpc() - XBAR.coord(k).to_mpc()) < 1e-40


def test_sensitivity_degenerate_control():
    x = SeqVector.make(L1, [1, 1, 1])  # x_4 = 0
    y, sep, rep = sensitivity_witness(P1, x, 3, mpf("0.1"), c_value=0)
    assert sep == 0


# -- shifted Julia density ------------------------------------------------------------


def test_bjp_target_zero():
    outs = bjp_dense_check([SeqVector.make(L1, [])], mpf("0.5"))
    z, rep = outs[0]
    assert rep.passed and rep.extra["dominates"]
    assert rep.residuals["distance_to_target"] <= mpf("0.5") * 4 * (1 + mpf("1e-30"))


def test_bjp_random_targets(rng):
    targets = [random_finite_target(L1, rng) for _ in range(5)]
    for z, rep in bjp_dense_check(targets, mpf("0.25")):
        assert rep.passed and rep.extra["dominates"]
        assert verify(rep.extra["certificate"], P1, z)
        # B(z) = y exactly in block algebra
        assert rep.residuals["backward_image_vs_y"] < mpf("1e-30")
