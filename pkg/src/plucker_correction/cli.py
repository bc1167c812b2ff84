"""Command line front end: ``correct``, ``bench`` and ``verify``.

Exit codes: 0 success, 1 some input records failed, 2 usage, I/O or
configuration error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from typing import List, Optional

import numpy as np

from . import bench as bench_mod
from .bs import correct_bs, correct_bs_lsvd
from .errors import ConfigError, PluckerError
from .geometry import Method, VecPair
from .lmpc import DEGENERACY_TOL, correct_lmpc
from .oracle import check_candidate_ordering, global_min_search_batch, kkt_residuals

TOL_ENV = "PLUCKER_TOL"
EXTRA_COLUMNS = ("objective", "branch", "klein_residual")
METHOD_NAMES = {
    "lmpc": Method.LMPC,
    "bs": Method.BS,
    "bs-lsvd": Method.BS_LSVD,
    "bs-iter": Method.BS_ITER,
}
_SPLIT = re.compile(r"[,\s]+")


class UsageError(Exception):
    pass


def _solver(method: Method, tol: float):
    if method is Method.LMPC:
        return lambda pair: correct_lmpc(pair, tol)
    if method is Method.BS:
        return correct_bs
    if method is Method.BS_ITER:
        return lambda pair: correct_bs(pair, svd="jacobi")
    return correct_bs_lsvd


def _default_tol() -> float:
    raw = os.environ.get(TOL_ENV)
    if raw is None:
        return DEGENERACY_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise UsageError(f"{TOL_ENV}={raw!r} is not a number") from None
    if not tol >= 0:
        raise UsageError(f"{TOL_ENV} must be nonnegative")
    return tol


def _parse_extra(text: str) -> List[str]:
    if text.strip().lower() in ("", "none"):
        return []
    cols = [c.strip() for c in text.split(",") if c.strip()]
    for c in cols:
        if c not in EXTRA_COLUMNS:
            raise UsageError(f"unknown column {c!r}; choose from {', '.join(EXTRA_COLUMNS)}")
    return cols


def _parse_record(line: str, dim: int) -> np.ndarray:
    fields = [f for f in _SPLIT.split(line.strip()) if f]
    if len(fields) != 2 * dim:
        raise ValueError(f"expected {2 * dim} fields, got {len(fields)}")
    try:
        values = [float(f) for f in fields]
    except ValueError as exc:
        raise ValueError(f"not a number: {exc}") from None
    if not all(math.isfinite(v) for v in values):
        raise ValueError("non-finite value")
    return np.array(values)


def cmd_correct(args, out=sys.stdout, err=sys.stderr) -> int:
    method = METHOD_NAMES[args.method]
    if args.dim < 2:
        raise UsageError("--dim must be >= 2")
    if method is Method.BS_LSVD and args.dim != 3:
        raise UsageError("bs-lsvd only supports --dim 3")
    tol = _default_tol() if args.tol is None else args.tol
    if not tol >= 0:
        raise UsageError("--tol must be nonnegative")
    extra = _parse_extra(args.extra)
    solve = _solver(method, tol)
    fmt = f"{{:.{args.precision}g}}"

    def num(v: float) -> str:
        return fmt.format(v)

    try:
        stream = sys.stdin if args.input == "-" else open(args.input, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc.strerror}") from None

    failures = 0
    with stream:
        if args.format == "csv" and args.header:
            names = [f"x{i + 1}" for i in range(args.dim)] + [f"y{i + 1}" for i in range(args.dim)]
            out.write("# " + ",".join(names + extra) + "\n")
        for lineno, line in enumerate(stream, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            try:
                values = _parse_record(stripped, args.dim)
                result = solve(VecPair.from_flat(values))
            except (ValueError, PluckerError) as exc:
                failures += 1
                err.write(f"line {lineno}: {exc}\n")
                continue
            cols = {
                "objective": result.objective,
                "branch": result.branch.value,
                "klein_residual": result.klein_residual,
            }
            if args.format == "csv":
                row = [num(v) for v in result.x] + [num(v) for v in result.y]
                row += [c if isinstance(c, str) else num(c) for c in (cols[k] for k in extra)]
                out.write(",".join(row) + "\n")
            else:
                rec = {
                    "line": lineno,
                    "x": [float(num(v)) for v in result.x],
                    "y": [float(num(v)) for v in result.y],
                }
                for k in extra:
                    rec[k] = cols[k] if isinstance(cols[k], str) else float(num(cols[k]))
                out.write(json.dumps(rec) + "\n")
    if failures:
        err.write(f"{failures} record(s) failed\n")
        return 1
    return 0


def cmd_bench(args, out=sys.stdout, err=sys.stderr) -> int:
    try:
        methods = [METHOD_NAMES[m.strip()] for m in args.methods.split(",") if m.strip()]
    except KeyError as exc:
        raise UsageError(f"unknown method {exc.args[0]!r}") from None
    try:
        config = bench_mod.BenchConfig(
            trials=args.trials, seed=args.seed, methods=methods, warmup=args.warmup,
            distribution=args.distribution, stream=args.stream, pin_cpu=not args.no_pin,
        )
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    report = bench_mod.run_benchmark(config)
    text = bench_mod.emit_report(report, args.format)
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise UsageError(f"cannot write {args.output}: {exc.strerror}") from None
    else:
        out.write(text)
    return 0


def cmd_verify(args, out=sys.stdout, err=sys.stderr) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    if args.dim < 2:
        raise UsageError("--dim must be >= 2")
    input_seed, oracle_seed = np.random.SeedSequence(args.seed).spawn(2)
    rng = np.random.default_rng(input_seed)
    pairs = [VecPair.from_flat(rng.uniform(-1.0, 1.0, 2 * args.dim)) for _ in range(args.trials)]
    lmpc = [correct_lmpc(p) for p in pairs]
    reports = global_min_search_batch(
        pairs, args.samples, np.random.default_rng(oracle_seed), refine=not args.no_refine,
        method_objectives=[r.objective for r in lmpc],
    )

    counts = {k: 0 for k in ("oracle", "klein", "kkt", "ordering", "agreement")}
    worst = {k: -math.inf for k in counts}
    for pair, res, rep in zip(pairs, lmpc, reports):
        na, nb = np.linalg.norm(pair.a), np.linalg.norm(pair.b)
        worst["oracle"] = max(worst["oracle"], rep.gap)
        counts["oracle"] += rep.gap <= args.gap_tol

        klein = abs(res.klein_residual) / (1 + np.linalg.norm(res.x) * np.linalg.norm(res.y))
        worst["klein"] = max(worst["klein"], klein)
        counts["klein"] += klein <= args.klein_tol

        if res.lam is not None:
            kkt = max(kkt_residuals(pair, res)) / (1 + na + nb)
        else:
            kkt = 0.0
        worst["kkt"] = max(worst["kkt"], kkt)
        counts["kkt"] += kkt <= args.kkt_tol

        if pair.p != 0.0:
            chk = check_candidate_ordering(pair)
            worst["ordering"] = max(worst["ordering"], (chk.g2 - chk.g1) / chk.q)
            counts["ordering"] += chk.ok
        else:
            counts["ordering"] += 1

        others = [correct_bs(pair)]
        if pair.dim == 3:
            others.append(correct_bs_lsvd(pair))
        dev = max(abs(o.objective - res.objective) for o in others) / (1 + pair.q)
        worst["agreement"] = max(worst["agreement"], dev)
        counts["agreement"] += dev <= args.agree_tol

    labels = {
        "oracle": ("oracle gap", "max(lmpc - oracle best)"),
        "klein": ("klein", "max |x.y| / (1 + |x||y|)"),
        "kkt": ("kkt", "max residual / (1 + |a| + |b|)"),
        "ordering": ("ordering", "max (g2 - g1) / q"),
        "agreement": ("cross-method", "max |f_lmpc - f_bs| / (1 + q)"),
    }
    out.write(f"trials={args.trials} samples={args.samples} seed={args.seed} dim={args.dim} "
              f"refine={not args.no_refine}\n")
    passed = True
    for key, (name, what) in labels.items():
        ok = counts[key] == args.trials
        passed &= ok
        out.write(f"{name:<13} {'PASS' if ok else 'FAIL'} {counts[key]}/{args.trials}  "
                  f"{what} = {worst[key]:.3e}\n")
    out.write("result: " + ("PASS" if passed else "FAIL") + "\n")
    return 0 if passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plucker", description="Plücker correction tools")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("correct", help="correct records of 2n numbers (a then b), one per line")
    p.add_argument("input", nargs="?", default="-", help="input file, '-' for stdin")
    p.add_argument("--method", choices=sorted(METHOD_NAMES), default="lmpc")
    p.add_argument("--tol", type=float, default=None,
                   help=f"a = +-b detection threshold (default ${TOL_ENV} or 2**-26)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--precision", type=int, default=17, help="significant digits")
    p.add_argument("--extra", default="objective",
                   help="comma list from objective,branch,klein_residual, or 'none'")
    p.add_argument("--no-header", dest="header", action="store_false")
    p.set_defaults(func=cmd_correct)

    p = sub.add_parser("bench", help="time the correction methods")
    p.add_argument("--trials", type=int, default=10 ** 6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--methods", default="lmpc,bs,bs-lsvd,bs-iter")
    p.add_argument("--warmup", type=int, default=10 ** 4)
    p.add_argument("--distribution", choices=bench_mod.DISTRIBUTIONS, default="uniform")
    p.add_argument("--format", choices=("markdown", "csv", "json"), default="markdown")
    p.add_argument("--output", help="write the report here instead of stdout")
    p.add_argument("--stream", action="store_true", help="generate inputs batch by batch")
    p.add_argument("--no-pin", action="store_true", help="do not pin to one CPU")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("verify", help="check LMPC against the oracle on random inputs")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--no-refine", action="store_true")
    p.add_argument("--gap-tol", type=float, default=1e-9)
    p.add_argument("--klein-tol", type=float, default=1e-10)
    p.add_argument("--kkt-tol", type=float, default=1e-9)
    p.add_argument("--agree-tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[List[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out=out, err=err)
    except UsageError as exc:
        err.write(f"plucker {args.command}: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
