"""Acceptance gate: one test per primary criterion, each reporting a PASS/FAIL line."""
import io
import math
import time
from pathlib import Path

import numpy as np

from plucker_correction import (
    Branch,
    Method,
    VecPair,
    check_candidate_ordering,
    correct_bs,
    correct_bs_lsvd,
    correct_lmpc,
    frobenius_identity_gap,
    kkt_residuals,
    lambda_roots,
)
from plucker_correction.bench import BenchConfig, emit_report, parse_report, run_benchmark
from plucker_correction.cli import main
from plucker_correction.oracle import global_min_search_batch

DATA = Path(__file__).parent / "data"


def uniform_pairs(seed, count, dim=3):
    rows = np.random.default_rng(seed).uniform(-1.0, 1.0, (count, 2 * dim))
    return [VecPair.from_flat(r) for r in rows]


def test_klein_constraint(verdict):
    t0 = time.perf_counter()
    results = [correct_lmpc(pair) for pair in uniform_pairs(1, 10 ** 5)]
    X = np.array([r.x for r in results if r.branch is Branch.GENERIC])
    Y = np.array([r.y for r in results if r.branch is Branch.GENERIC])
    generic = len(X)
    rel = np.abs(np.einsum("ij,ij->i", X, Y)) / (1 + np.linalg.norm(X, axis=1) * np.linalg.norm(Y, axis=1))
    worst = float(rel.max())
    dt = time.perf_counter() - t0
    verdict("Klein constraint on 1e5 inputs", worst <= 1e-10 and dt < 5.0,
            f"{generic} generic, worst relative |x.y| {worst:.2e}, {dt:.2f} s")


def test_global_optimality_oracle(verdict):
    t0 = time.perf_counter()
    pairs = uniform_pairs(2, 100)
    lm = [correct_lmpc(p).objective for p in pairs]
    reports = global_min_search_batch(pairs, 10 ** 5, 2, refine=True, method_objectives=lm)
    dt = time.perf_counter() - t0
    beaten = sum(r.method_objective > r.best_objective + 1e-9 for r in reports)
    rel = max((r.best_objective - r.method_objective) / r.method_objective for r in reports)
    verdict("global-optimality oracle (100 inputs, 1e5 samples, refined)",
            beaten == 0 and rel <= 1e-3 and dt < 60.0,
            f"LMPC beaten {beaten} times, max relative gap {rel:.2e}, {dt:.1f} s")


def test_cross_method_equivalence(verdict):
    t0 = time.perf_counter()
    worst_bs = worst_lsvd = 0.0
    for pair in uniform_pairs(3, 10 ** 4):
        scale = 1 + pair.q
        f_lm = correct_lmpc(pair).objective
        f_bs = correct_bs(pair).objective
        f_ls = correct_bs_lsvd(pair).objective
        worst_bs = max(worst_bs, abs(f_lm - f_bs) / scale)
        worst_lsvd = max(worst_lsvd, abs(f_bs - f_ls) / scale)
    dt = time.perf_counter() - t0
    verdict("cross-method equivalence on 1e4 inputs",
            worst_bs <= 1e-8 and worst_lsvd <= 1e-8 and dt < 10.0,
            f"LMPC-BS {worst_bs:.1e}, BS-LSVD {worst_lsvd:.1e}, {dt:.2f} s")


def test_kkt_and_ordering(verdict):
    worst_kkt = worst_prod = 0.0
    bad_order = checked = 0
    for pair in uniform_pairs(4, 10 ** 4):
        res = correct_lmpc(pair)
        if res.branch is not Branch.GENERIC:
            continue
        checked += 1
        bound = 1 + np.linalg.norm(pair.a) + np.linalg.norm(pair.b)
        worst_kkt = max(worst_kkt, max(kkt_residuals(pair, res)) / bound)
        bad_order += not check_candidate_ordering(pair).ok
        l1, l2 = lambda_roots(pair.p, pair.q)
        worst_prod = max(worst_prod, abs(l1 * l2 - 1))
    verdict("KKT residuals, candidate ordering, lambda1*lambda2 = 1",
            worst_kkt <= 1e-9 and bad_order == 0 and worst_prod <= 1e-10,
            f"{checked} inputs, KKT {worst_kkt:.1e}, ordering failures {bad_order}, "
            f"|l1 l2 - 1| {worst_prod:.1e}")


def test_special_cases(verdict):
    rng = np.random.default_rng(5)
    ok = True
    for _ in range(200):
        a = rng.uniform(-1, 1, 3)
        b = np.cross(a, rng.uniform(-1, 1, 3))
        pair = VecPair(a, b)
        if pair.p != 0.0:
            continue
        res = correct_lmpc(pair)
        ok &= np.array_equal(res.x, a) and np.array_equal(res.y, b)
    axis = correct_lmpc(VecPair([1, 0, 0], [0, 1, 0]))
    ok &= axis.branch is Branch.ORTHOGONAL_INPUT and list(axis.flat()) == [1, 0, 0, 0, 1, 0]
    a = np.array([0.3, -1.2, 2.5])
    eq = correct_lmpc(VecPair(a, a))
    ok &= np.array_equal(eq.x, a) and not eq.y.any() and eq.objective == sum(v * v for v in a)
    op = correct_lmpc(VecPair(a, -a))
    ok &= np.array_equal(op.x, a) and not op.y.any() and op.branch is Branch.OPPOSITE_VECTORS
    zero = correct_lmpc(VecPair([0, 0, 0], [0, 0, 0]))
    ok &= not zero.x.any() and not zero.y.any() and zero.branch is Branch.BOTH_ZERO
    verdict("special cases (p=0, a=b, a=-b, a=b=0)", bool(ok))


def test_frobenius_identity(verdict):
    U = np.eye(3)[:, :2]
    gap = frobenius_identity_gap(U, np.eye(2), np.array([[1.0, 0], [0, 1], [1, 1]]))
    ok = abs(gap - math.sqrt(2)) <= 1e-12
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(100):
        n, k = int(rng.integers(3, 9)), 2
        k = int(rng.integers(1, n))
        U = np.linalg.qr(rng.normal(size=(n, k)))[0]
        A, F = rng.normal(size=(k, k)), rng.normal(size=(k, k))
        B = U @ F
        g = frobenius_identity_gap(U, A, B)
        worst = max(worst, abs(g) / (np.linalg.norm(A) + np.linalg.norm(B)))
    verdict("Frobenius-identity counterexample and B = U F cases", ok and worst <= 1e-12,
            f"gap - sqrt(2) = {gap - math.sqrt(2):.1e}, worst B = U F gap {worst:.1e}")


def test_timing_ordering(verdict):
    t0 = time.perf_counter()
    cfg = BenchConfig(trials=10 ** 5, seed=8, methods=(Method.LMPC, Method.BS_LSVD, Method.BS_ITER))
    rep = run_benchmark(cfg)
    dt = time.perf_counter() - t0
    med = {k: v.median_call_microseconds for k, v in rep.methods.items()}
    r_lsvd = med["BS_LSVD"] / med["LMPC"]
    r_iter = med["BS_ITER"] / med["LMPC"]
    ok = med["LMPC"] < med["BS_LSVD"] < med["BS_ITER"] and r_lsvd >= 1.5 and r_iter >= 3 and dt < 120
    verdict("timing ordering LMPC < BS-LSVD < BS_ITER (1e5 trials)", ok,
            f"medians {med['LMPC']:.2f} / {med['BS_LSVD']:.2f} / {med['BS_ITER']:.2f} us, "
            f"ratios {r_lsvd:.1f}x and {r_iter:.1f}x, {dt:.1f} s")


def test_n_dimensional(verdict):
    details, ok = [], True
    for n in (2, 4, 8):
        pairs = uniform_pairs(100 + n, 10 ** 3, dim=n)
        results = [correct_lmpc(p) for p in pairs]
        klein = kkt = 0.0
        for pair, res in zip(pairs, results):
            if res.branch is not Branch.GENERIC:
                continue
            x, y = res.x, res.y
            klein = max(klein, abs(x @ y) / (1 + np.linalg.norm(x) * np.linalg.norm(y)))
            bound = 1 + np.linalg.norm(pair.a) + np.linalg.norm(pair.b)
            kkt = max(kkt, max(kkt_residuals(pair, res)) / bound)
        reports = global_min_search_batch(pairs, 10 ** 4, n, refine=True,
                                          method_objectives=[r.objective for r in results])
        beaten = sum(r.method_objective > r.best_objective + 1e-9 for r in reports)
        rel = max((r.best_objective - r.method_objective) / r.method_objective for r in reports)
        ok &= klein <= 1e-10 and kkt <= 1e-9 and beaten == 0 and rel <= 1e-3
        details.append(f"n={n}: Klein {klein:.0e}, KKT {kkt:.0e}, beaten {beaten}, gap {rel:.0e}")
    verdict("n-dimensional generalisation (n = 2, 4, 8)", bool(ok), "; ".join(details))


def _cli(argv):
    out, err = io.StringIO(), io.StringIO()
    return main(argv, out=out, err=err), out.getvalue(), err.getvalue()


def test_cli_contract(verdict, tmp_path):
    fixture = str(DATA / "correct_fixture.txt")
    code, out, err = _cli(["correct", fixture, "--extra", "objective,branch,klein_residual"])
    golden = out == (DATA / "correct_golden.csv").read_text()
    reported = "line 10: expected 6 fields, got 5" in err and "1 record(s) failed" in err
    exit_1 = code == 1
    clean = tmp_path / "clean.txt"
    clean.write_text("1 0 0 1 1 0\n0 0 1 2 0 0\n")
    exit_0 = _cli(["correct", str(clean)])[0] == 0
    exit_2 = _cli(["correct", str(tmp_path / "absent")])[0] == 2 and _cli(["bench", "--trials", "0"])[0] == 2
    rep = run_benchmark(BenchConfig(trials=2000, seed=9, warmup=0))
    back = parse_report(emit_report(rep, "csv"), "csv")
    round_trip = back.methods == rep.methods and back.ratios == rep.ratios and back.trials == rep.trials
    ok = golden and reported and exit_1 and exit_0 and exit_2 and round_trip
    verdict("CLI contract (golden output, exit codes 0/1/2, bench CSV round-trip)", ok,
            f"golden={golden} stderr={reported} exit0={exit_0} exit1={exit_1} exit2={exit_2} "
            f"csv={round_trip}")
