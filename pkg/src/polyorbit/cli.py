"""Experiment runner: declarative TOML configs in, JSON-lines reports out.

One experiment per invocation.  The report file is byte-reproducible
given config + seed + working precision; wall time and other
environment facts go to a sidecar meta.json so they never perturb the
deterministic surface.  Exit status 0 means every assertion in the
config held.

Subcommands:
  run                --config FILE [--out-dir DIR] [--seed N]
                     [--precision-digits N] [--jobs N]
  verify-certificate --certificate FILE --family FILE --vector FILE
  list-families

Environment overrides: POLYORBIT_SEED, POLYORBIT_OUT_DIR,
POLYORBIT_PRECISION_DIGITS, POLYORBIT_JOBS.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - version dependent
    import tomli as tomllib

import mpmath
from mpmath import mp, mpf

from . import julia, transfer, witness
from .criteria import (check_criterion, functional_shift_instance,
                       power_shift_roots_instance, sabotage_instance)
from .errors import BudgetExhausted, ConfigError, ExponentBudgetExceeded, PolyorbitError
from .logcomplex import LogComplex
from .polynomials import (AffineHyperplane, CoordinateSquare, FunctionalShift,
                          HomPoly, OrbitTrace, PowerShift, Scaled,
                          WeightedFunctionalShift, fixed_vector, limit_radius,
                          op_norm_oracle)
from .precision import PrecisionConfig
from .sampling import (random_finite_target, random_julia_dominating,
                       random_nonzero_start, random_with_norm)
from .seqspace import SeqVector, SpaceTag, TailModel
from .witness import GammaSet

EXIT_OK = 0
EXIT_ASSERT = 1
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_IO = 4

FAMILY_GRAMMAR = {
    "power_shift": {"m": "int >= 2", "space": "lp(p) | c0 | c"},
    "functional_shift": {"space": "lp(p) | c0"},
    "weighted_functional_shift": {"weight_offset": "int >= 0 (default 1)"},
    "affine_hyperplane": {"m": "int >= 2", "epsilon": "(0, 1)"},
    "coordinate_square": {"dim": "int >= 1"},
    "scaled": {"base": "family table", "lambda": "[re, im] != 0"},
}


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------


def parse_space(d) -> SpaceTag:
    if isinstance(d, str):
        if d == "c0":
            return SpaceTag.c0()
        if d == "c":
            return SpaceTag.c()
        raise ConfigError("space string must be 'c0' or 'c'")
    kind = d.get("kind", "lp")
    if kind == "lp":
        return SpaceTag.lp(mpf(str(d["p"])))
    if kind == "c0":
        return SpaceTag.c0()
    if kind == "c":
        return SpaceTag.c()
    if kind == "linf_finite":
        return SpaceTag.linf(int(d["dim"]))
    raise ConfigError("unknown space kind %r" % kind)


def parse_scalar(v) -> LogComplex:
    if isinstance(v, (list, tuple)):
        return LogComplex.from_complex(mpmath.mpc(mpf(str(v[0])), mpf(str(v[1]))))
    return LogComplex.from_complex(mpf(str(v)))


def parse_family(d) -> HomPoly:
    try:
        name = d["name"]
        if name == "power_shift":
            return PowerShift(int(d.get("m", 2)), parse_space(d["space"]))
        if name == "functional_shift":
            return FunctionalShift(parse_space(d["space"]))
        if name == "weighted_functional_shift":
            return WeightedFunctionalShift(int(d.get("weight_offset", 1)))
        if name == "affine_hyperplane":
            return AffineHyperplane(int(d.get("m", 2)), mpf(str(d["epsilon"])))
        if name == "coordinate_square":
            return CoordinateSquare(int(d["dim"]))
        if name == "scaled":
            return Scaled(parse_family(d["base"]), parse_scalar(d["lambda"]))
    except KeyError as e:
        raise ConfigError("family %r missing field %s" % (d, e))
    raise ConfigError("unknown family %r" % name)


def parse_tail(d) -> TailModel:
    kind = d.get("kind", "zero")
    if kind == "zero":
        return TailModel.zero()
    if kind == "constant":
        return TailModel.constant(parse_scalar(d["value"]).to_mpc())
    if kind == "geometric":
        return TailModel.geometric(parse_scalar(d["first"]).to_mpc(),
                                   parse_scalar(d["ratio"]).to_mpc())
    if kind == "factorial_power":
        return TailModel.factorial_power(int(d.get("offset", 0)), int(d.get("power", 1)),
                                         parse_scalar(d.get("scale", 1)).to_mpc())
    raise ConfigError("unknown tail kind %r" % kind)


def parse_vector(d, space: SpaceTag) -> SeqVector:
    if isinstance(d, str):
        if d == "fixed_vector":
            if space.kind != "lp":
                raise ConfigError("fixed_vector needs an l_p space")
            return fixed_vector(space.p)
        if d == "zero":
            return SeqVector.make(space)
        raise ConfigError("unknown vector shorthand %r" % d)
    head = [parse_scalar(v).to_mpc() for v in d.get("head", [])]
    return SeqVector.make(space, head, parse_tail(d.get("tail", {"kind": "zero"})))


# ---------------------------------------------------------------------------
# deterministic formatting
# ---------------------------------------------------------------------------


def fixed_places(x, places: int) -> str:
    """Decimal string with exactly `places` fractional digits."""
    if x == mpf("-inf"):
        return "-inf"
    if x == mpf("+inf"):
        return "inf"
    neg = x < 0
    scaled = int(mpmath.nint(abs(mpf(x)) * mpf(10) ** places))
    s = str(scaled).rjust(places + 1, "0")
    return ("-" if neg else "") + s[:-places] + "." + s[-places:]


def _num(x):
    if isinstance(x, mpf):
        return mpmath.nstr(x, mp.dps + 8)
    return x


def emit_orbit_curve(trace: OrbitTrace, path: str) -> None:
    """CSV of (n, lognorm, log|coefficient|), fixed decimal places."""
    places = mp.dps // 2
    lines = ["n,lognorm,log_coeff"]
    for st in trace.steps:
        c = st.coeff.logmag if st.coeff is not None else None
        lines.append("%d,%s,%s" % (
            st.n, fixed_places(st.lognorm, places),
            fixed_places(c, places) if c is not None else ""))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# experiment runners (each returns (outputs dict, passed bool))
# ---------------------------------------------------------------------------


def _run_orbit(cfg, rng, out_dir):
    fam = parse_family(cfg["family"])
    section = cfg.get("orbit", {})
    start = parse_vector(section.get("start", "fixed_vector"), fam.space)
    steps = int(section.get("steps", 10))
    trace = fam.iterate(start, steps, head_window=int(section.get("head_window", 8)))
    outputs = {"lognorms": [_num(s.lognorm) for s in trace.steps]}
    passed = True
    check = section.get("assert", "")
    if check == "constant_lognorm":
        vals = [s.lognorm for s in trace.steps]
        passed = max(vals) - min(vals) < mpf("1e-30")
    elif check == "enters_ball":
        r_log = mpmath.log(limit_radius(fam))
        passed = any(s.lognorm < r_log for s in trace.steps)
    elif check == "escape_slope":
        t_log = mpf(str(section["slope_log"]))
        r_log = mpmath.log(limit_radius(fam))
        m = fam.degree
        last = trace.steps[-1]
        passed = last.lognorm >= (mpf(m) ** last.n) * t_log + r_log - mpf("1e-20")
    if section.get("emit_curve"):
        emit_orbit_curve(trace, os.path.join(out_dir, section["emit_curve"]))
        outputs["curve_file"] = section["emit_curve"]
    return outputs, bool(passed)


def _run_classify_sweep(cfg, rng, out_dir):
    fam = parse_family(cfg["family"])
    section = cfg.get("classify_sweep", {})
    ray = parse_vector(section.get("ray", "fixed_vector"), fam.space)
    t_min = mpf(str(section.get("t_min", "0.5")))
    t_max = mpf(str(section.get("t_max", "1.5")))
    points = int(section.get("points", 101))
    budget = int(section.get("budget", 16))
    rows = []
    for i in range(points):
        t = t_min + (t_max - t_min) * i / (points - 1)
        x = ray.scale(t)
        cl = julia.classify(fam, x, budget)
        ok_cert = True
        if cl.certificate is not None:
            ok_cert = julia.verify(cl.certificate, fam, x)
        rows.append({"t": _num(t), "verdict": cl.verdict,
                     "certificate": cl.certificate.kind if cl.certificate else None,
                     "verified": ok_cert})
    passed = all(r["verified"] for r in rows)
    if section.get("assert", "") == "boundary_at_one":
        for r in rows:
            t = mpf(r["t"])
            want = ("AttractsToZero" if t < 1 else
                    "Julia" if t == 1 else "Escapes")
            if r["verdict"] != want:
                passed = False
    return {"rows": rows}, passed


def _run_norm(cfg, rng, out_dir):
    section = cfg.get("norm", {})
    tol = mpf(str(section.get("tolerance", "1e-3")))
    trunc_dim = int(section.get("trunc_dim", 64))
    samples = int(section.get("samples", 100000))
    polish = int(section.get("polish_steps", 400))
    seed = int(cfg.get("seeds", {}).get("oracle", 1234))
    table = []
    passed = True
    fams = cfg.get("families") or [cfg["family"]]
    for fd in fams:
        fam = parse_family(fd)
        analytic = fam.op_norm_analytic()
        oracle = op_norm_oracle(fam, trunc_dim=trunc_dim, samples=samples,
                                polish_steps=polish, seed=seed)
        ok = abs(oracle - analytic) <= tol and oracle <= analytic + mpf("1e-30")
        passed = passed and ok
        table.append({"family": fd.get("name"), "analytic": _num(analytic),
                      "oracle": _num(oracle),
                      "limit_radius": _num(limit_radius(fam)), "pass": ok})
    return {"table": table}, passed


def _run_witness(cfg, rng, out_dir):
    section = cfg.get("witness", {})
    bundle = section.get("bundle", "mainexample")
    count = int(section.get("count", 10))
    p = mpf(str(section.get("p", 1)))
    reports = []
    if bundle == "mainexample":
        P = FunctionalShift(SpaceTag.lp(p))
        xb = fixed_vector(p)
        for _ in range(count):
            x = random_julia_dominating(p, rng)
            y = random_julia_dominating(p, rng)
            n = rng.randint(1, 8)
            _, rep = witness.transitivity_witness(P, x, y, n)
            reports.append(rep)
            try:
                _, rep2 = witness.periodic_point(P, x, n)
                reports.append(rep2)
            except PolyorbitError:
                pass
            v = random_with_norm(SpaceTag.lp(p), rng, mpf(rng.uniform(0.5, 6.0)))
            _, rep3 = witness.d_dense_project(v)
            reports.append(rep3)
            eps = mpf(rng.uniform(0.01, 0.5))
            gam = eps / (xb.norm() * mpf(rng.uniform(1.5, 20.0)))
            _, rep4 = witness.gamma_zero_witness(v, eps, gam)
            reports.append(rep4)
            start = random_nonzero_start(p, rng)
            target = random_finite_target(SpaceTag.lp(p), rng)
            _, _, rep5 = witness.gamma_unbounded_witness(
                P, start, target, GammaSet.unbounded(2, 3), rng.randint(2, 8))
            reports.append(rep5)
    elif bundle == "disk":
        K = int(section.get("targets", 20))
        targets = witness.default_dense_targets(K)
        _, schedule, _, rep = witness.disk_supercyclic_build(targets, int(section.get("m", 2)))
        reports.append(rep)
    elif bundle == "doubling":
        tol = mpf(str(section.get("tol", "1e-3")))
        thetas = [mpf(str(t)) for t in section.get("targets", [0.0, 3.14159])]
        _, _, rep = witness.doubling_phase(int(section.get("m", 2)), thetas, tol)
        reports.append(rep)
    elif bundle == "bjp":
        targets = [random_finite_target(SpaceTag.lp(p), rng) for _ in range(count)]
        for _, rep in witness.bjp_dense_check(targets, mpf(str(section.get("epsilon", "0.1")))):
            reports.append(rep)
    else:
        raise ConfigError("unknown witness bundle %r" % bundle)
    outputs = {"reports": [r.to_json() for r in reports]}
    return outputs, all(r.passed for r in reports)


def _run_criterion(cfg, rng, out_dir):
    section = cfg.get("criterion", {})
    name = section.get("instance", "functional_shift_unbounded")
    K = int(section.get("K", 12))
    tol = mpf(str(section.get("tol", "1e-6")))
    p = mpf(str(section.get("p", 1)))
    n_pairs = int(section.get("pairs", 3))
    if name == "power_shift_roots":
        space = SpaceTag.c0()
        X0 = [random_finite_target(space, rng, rng.randint(2, 4)) for _ in range(n_pairs)]
        Y0 = [random_finite_target(space, rng, rng.randint(2, 4)) for _ in range(n_pairs)]
        inst = power_shift_roots_instance(int(section.get("m", 2)), X0, Y0,
                                          GammaSet.unbounded(2, 4))
    elif name == "functional_shift_unbounded":
        X0 = [random_nonzero_start(p, rng) for _ in range(n_pairs)]
        Y0 = [random_finite_target(SpaceTag.lp(p), rng) for _ in range(n_pairs)]
        inst = functional_shift_instance(p, X0, Y0, GammaSet.unbounded(2, 4))
    elif name == "sabotage":
        xb = fixed_vector(p)
        X0 = [xb.scale(mpf(rng.uniform(0.3, 0.6))) for _ in range(n_pairs)]
        Y0 = [xb, xb.scale(-1)]
        inst = sabotage_instance(p, X0, Y0)
    else:
        raise ConfigError("unknown criterion instance %r" % name)
    rep = check_criterion(inst, K, tol)
    expect = section.get("expect", "pass")
    outputs = {"instance": rep["instance"], "pass": rep["pass"],
               "pairs": [{"r1_last": _num(pr["r1"][-1]), "r2_last": _num(pr["r2"][-1]),
                          "pass": pr["pass"]} for pr in rep["pairs"]]}
    ok = rep["pass"] if expect == "pass" else not rep["pass"]
    if expect == "fail" and "r2_floor" in section:
        floor = mpf(str(section["r2_floor"]))
        ok = ok and all(mpf(pr["r2"][-1]) >= floor for pr in rep["pairs"])
    return outputs, ok


def _run_transfer(cfg, rng, out_dir):
    section = cfg.get("transfer", {})
    N = int(section.get("system_length", 10))
    tol_biorth = mpf(str(section.get("tol_biorth", "1e-12")))
    tol_quasi = mpf(str(section.get("tol_quasi", "1e-10")))
    outputs = {}
    passed = True
    for fam_name in ("standard", "perturbed"):
        system = transfer.build_system(z_family=fam_name, N=N)
        res = transfer.biorthogonality_residual(system)
        outputs["biorthogonality_%s" % fam_name] = _num(res)
        passed = passed and res < tol_biorth
    system = transfer.build_system(z_family="perturbed", N=N)
    samples = [SeqVector.make(SpaceTag.lp(1),
                              [mpf(rng.uniform(-1, 1)) for _ in range(min(8, N))])
               for _ in range(int(section.get("samples", 20)))]
    rep = transfer.verify_quasiconjugacy(system, samples,
                                         int(section.get("n_iters", 5)), tol_quasi)
    outputs["quasiconjugacy_residual"] = _num(rep["residual"])
    passed = passed and rep["pass"]
    dn_max = int(section.get("dn_max", 40))
    long_sys = transfer.build_system(N=dn_max + 4)
    a = SeqVector.make(SpaceTag.lp(1),
                       [mpf(rng.uniform(1.0, 2.0)) for _ in range(dn_max + 4)])
    gaps = transfer.dn_identity_gaps(long_sys, a, dn_max)
    outputs["dn_identity_max_gap"] = _num(max(gaps))
    passed = passed and max(gaps) < mpf(str(section.get("tol_dn", "1e-12")))
    return outputs, passed


_RUNNERS = {
    "orbit": _run_orbit,
    "classify-sweep": _run_classify_sweep,
    "norm": _run_norm,
    "witness": _run_witness,
    "criterion": _run_criterion,
    "transfer": _run_transfer,
}


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------


def _digest(cfg: dict, seed: int, digits: int) -> str:
    blob = json.dumps({"config": cfg, "seed": seed, "digits": digits},
                      sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def run(config_path: str, out_dir: str | None = None, seed: int | None = None,
        precision_digits: int | None = None, jobs: int = 1) -> int:
    try:
        with open(config_path, "rb") as fh:
            cfg = tomllib.load(fh)
    except OSError as e:
        print("cannot read config: %s" % e, file=sys.stderr)
        return EXIT_IO
    except tomllib.TOMLDecodeError as e:
        print("config parse error: %s" % e, file=sys.stderr)
        return EXIT_CONFIG

    exp = cfg.get("experiment", {})
    kind = exp.get("kind")
    if kind not in _RUNNERS:
        print("unknown experiment kind %r" % kind, file=sys.stderr)
        return EXIT_CONFIG
    digits = precision_digits or int(os.environ.get("POLYORBIT_PRECISION_DIGITS", 0)) \
        or int(cfg.get("precision", {}).get("working_digits", 50))
    budget = int(cfg.get("precision", {}).get("max_exponent_budget", 256))
    PrecisionConfig(working_digits=digits, max_exponent_budget=budget).activate()
    seed = seed if seed is not None else int(os.environ.get("POLYORBIT_SEED", 0)) \
        or int(cfg.get("seeds", {}).get("main", 12345))
    out_dir = out_dir or os.environ.get("POLYORBIT_OUT_DIR") or exp.get("out_dir", ".")
    os.makedirs(out_dir, exist_ok=True)

    import random as _random
    rng = _random.Random(seed)
    t0 = time.time()
    try:
        outputs, passed = _RUNNERS[kind](cfg, rng, out_dir)
    except (BudgetExhausted, ExponentBudgetExceeded) as e:
        print("budget error: %s" % e, file=sys.stderr)
        return EXIT_BUDGET
    except ConfigError as e:
        print("config error: %s" % e, file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print("I/O error: %s" % e, file=sys.stderr)
        return EXIT_IO
    wall = time.time() - t0

    record = {
        "experiment": exp.get("id", os.path.basename(config_path)),
        "kind": kind,
        "inputs_digest": _digest(cfg, seed, digits),
        "precision_digits": digits,
        "seed": seed,
        "outputs": outputs,
        "pass": passed,
    }
    report_path = os.path.join(out_dir, "report.jsonl")
    with open(report_path, "a") as fh:
        fh.write(json.dumps(record, sort_keys=True, default=str) + "\n")
    with open(os.path.join(out_dir, "meta.json"), "w") as fh:
        json.dump({"wall_time_s": wall, "config": os.path.abspath(config_path)}, fh)
    print("%s: %s (report: %s)" % (record["experiment"],
                                   "PASS" if passed else "FAIL", report_path))
    return EXIT_OK if passed else EXIT_ASSERT


def verify_certificate(cert_path: str, family_path: str, vector_path: str) -> int:
    try:
        cert = julia.Certificate.loads(open(cert_path).read())
        fam = parse_family(json.load(open(family_path)))
        vec = SeqVector.loads(open(vector_path).read())
    except OSError as e:
        print("cannot read input: %s" % e, file=sys.stderr)
        return EXIT_IO
    except (ConfigError, KeyError, ValueError) as e:
        print("bad input: %s" % e, file=sys.stderr)
        return EXIT_CONFIG
    ok = julia.verify(cert, fam, vec)
    print("certificate %s: %s" % (cert.kind, "VALID" if ok else "INVALID"))
    return EXIT_OK if ok else EXIT_ASSERT


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="polyorbit", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="cmd", required=True)
    runp = sub.add_parser("run", help="run one experiment config")
    runp.add_argument("--config", required=True)
    runp.add_argument("--out-dir", default=None)
    runp.add_argument("--seed", type=int, default=None)
    runp.add_argument("--precision-digits", type=int, default=None)
    runp.add_argument("--jobs", type=int,
                      default=int(os.environ.get("POLYORBIT_JOBS", "1")))
    verp = sub.add_parser("verify-certificate", help="re-check a serialized certificate")
    verp.add_argument("--certificate", required=True)
    verp.add_argument("--family", required=True)
    verp.add_argument("--vector", required=True)
    sub.add_parser("list-families", help="print the family grammar")
    args = ap.parse_args(argv)
    if args.cmd == "run":
        return run(args.config, args.out_dir, args.seed, args.precision_digits, args.jobs)
    if args.cmd == "verify-certificate":
        return verify_certificate(args.certificate, args.family, args.vector)
    if args.cmd == "list-families":
        print(json.dumps(FAMILY_GRAMMAR, indent=2, sort_keys=True))
        return EXIT_OK
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
